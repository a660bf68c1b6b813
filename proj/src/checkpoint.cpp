#include "voxevo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "voxevo/errors.hpp"

namespace voxevo {

namespace {

constexpr char kMagic[8] = {'V', 'O', 'X', 'E', 'V', 'O', 'C', 'K'};
constexpr std::size_t kMorphologyTextSize = kGridCells + kGridSide;

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_optional_f64(std::string& out, const std::optional<double>& v) {
    put_u8(out, v.has_value());
    put_f64(out, v.value_or(0.0));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view take(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw IntegrityError("checkpoint truncated");
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::optional<double> optional_f64() {
        bool has = u8() != 0;
        double v = f64();
        return has ? std::optional<double>(v) : std::nullopt;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

ControllerGenome read_controller(Reader& r) {
    std::uint8_t kind = r.u8();
    if (kind > 1) throw IntegrityError("checkpoint: unknown controller kind");
    MlpShape shape{static_cast<int>(r.u32()), static_cast<int>(r.u32()), static_cast<int>(r.u32())};
    std::uint64_t count = r.u64();
    if (count != shape.param_count()) throw IntegrityError("checkpoint: controller parameter count mismatch");
    std::vector<double> values(count);
    for (double& v : values) v = r.f64();
    return {static_cast<ControllerKind>(kind), MlpParams(shape, std::move(values))};
}

}  // namespace

void append_controller(std::string& out, const ControllerGenome& controller) {
    const MlpShape& s = controller.params.shape();
    put_u8(out, static_cast<std::uint8_t>(controller.kind));
    put_u32(out, static_cast<std::uint32_t>(s.inputs));
    put_u32(out, static_cast<std::uint32_t>(s.hidden));
    put_u32(out, static_cast<std::uint32_t>(s.outputs));
    put_u64(out, controller.params.size());
    for (double v : controller.params.values()) put_f64(out, v);
}

std::string encode_checkpoint(int generation, std::span<const Individual> individuals) {
    std::string out(kMagic, sizeof kMagic);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(generation));
    put_u32(out, static_cast<std::uint32_t>(individuals.size()));
    for (const Individual& ind : individuals) {
        put_u64(out, ind.id);
        put_u8(out, ind.parent_id.has_value());
        put_u64(out, ind.parent_id.value_or(0));
        put_u32(out, static_cast<std::uint32_t>(ind.age));
        put_u8(out, static_cast<std::uint8_t>(ind.mutation_kind));
        put_optional_f64(out, ind.fitness);
        put_optional_f64(out, ind.parent_fitness_at_birth);
        put_u32(out, static_cast<std::uint32_t>(ind.birth_generation));
        out += ind.morphology.to_text();
        append_controller(out, ind.controller);
    }
    put_u64(out, fnv1a(out));
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw IntegrityError("not a voxevo checkpoint");
    std::string_view body = bytes.substr(0, bytes.size() - 8);
    Reader trailer(bytes.substr(bytes.size() - 8));
    if (trailer.u64() != fnv1a(body)) throw IntegrityError("checkpoint checksum mismatch");

    Reader r(body);
    r.take(sizeof kMagic);
    Checkpoint cp;
    cp.version = r.u32();
    if (cp.version != kCheckpointVersion)
        throw IntegrityError("unsupported checkpoint version " + std::to_string(cp.version));
    cp.generation = static_cast<int>(r.u32());
    std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        Individual ind;
        ind.id = r.u64();
        bool has_parent = r.u8() != 0;
        std::uint64_t parent = r.u64();
        if (has_parent) ind.parent_id = parent;
        ind.age = static_cast<int>(r.u32());
        std::uint8_t kind = r.u8();
        if (kind > 2) throw IntegrityError("checkpoint: unknown mutation kind");
        ind.mutation_kind = static_cast<MutationKind>(kind);
        ind.fitness = r.optional_f64();
        ind.parent_fitness_at_birth = r.optional_f64();
        ind.birth_generation = static_cast<int>(r.u32());
        try {
            ind.morphology = MorphologyGenome::from_text(r.take(kMorphologyTextSize));
        } catch (const RejectedInput& e) {
            throw IntegrityError(std::string("checkpoint: ") + e.what());
        }
        ind.controller = read_controller(r);
        cp.individuals.push_back(std::move(ind));
    }
    if (!r.done()) throw IntegrityError("checkpoint has trailing bytes");
    return cp;
}

void write_checkpoint(const std::filesystem::path& path, int generation, std::span<const Individual> individuals) {
    const std::string bytes = encode_checkpoint(generation, individuals);
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("failed to write checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IntegrityError("cannot open checkpoint " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return decode_checkpoint(buf.str());
}

Individual read_champion(const std::filesystem::path& path) {
    Checkpoint cp = read_checkpoint(path);
    if (cp.individuals.empty()) throw IntegrityError("checkpoint " + path.string() + " holds no individuals");
    if (!cp.individuals.front().fitness) throw IntegrityError("champion in " + path.string() + " is unevaluated");
    return cp.individuals.front();
}

}  // namespace voxevo
