#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "voxevo/evolution.hpp"

namespace voxevo {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Flat controller encoding: kind tag, shape, then parameters in layer order
/// as little-endian IEEE-754 doubles.
void append_controller(std::string& out, const ControllerGenome& controller);

/// Serializes individuals behind a versioned header and a trailing FNV-1a checksum.
std::string encode_checkpoint(int generation, std::span<const Individual> individuals);

struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    int generation = 0;
    std::vector<Individual> individuals;
};

/// Throws IntegrityError on bad magic, unknown version, truncation or checksum mismatch.
Checkpoint decode_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, int generation, std::span<const Individual> individuals);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Reads a checkpoint and returns its first individual, which must be evaluated.
Individual read_champion(const std::filesystem::path& path);

}  // namespace voxevo
