#include "voxevo/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voxevo/errors.hpp"

namespace voxevo {

const char* to_string(ControllerKind kind) {
    return kind == ControllerKind::Global ? "global" : "modular";
}

ControllerKind parse_controller_kind(std::string_view text) {
    if (text == "global") return ControllerKind::Global;
    if (text == "modular") return ControllerKind::Modular;
    throw RejectedInput("unknown controller kind '" + std::string(text) + "'");
}

MlpParams::MlpParams(MlpShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.param_count())
        throw RejectedInput("expected " + std::to_string(shape_.param_count()) + " parameters, got " +
                            std::to_string(values_.size()));
}

MlpShape controller_shape(ControllerKind kind, const ObservationConfig& obs) {
    if (kind == ControllerKind::Global) return kGlobalShape;
    return MlpShape{obs.local_input_size(), kHiddenUnits, 1};
}

void mlp_forward(const MlpParams& params, std::span<const double> input, std::span<double> output) {
    const MlpShape& s = params.shape();
    if (input.size() != static_cast<std::size_t>(s.inputs))
        throw RejectedInput("mlp input has " + std::to_string(input.size()) + " entries, expected " +
                            std::to_string(s.inputs));
    if (output.size() != static_cast<std::size_t>(s.outputs))
        throw RejectedInput("mlp output buffer has the wrong size");

    std::array<double, 256> hidden_storage{};
    if (s.hidden > static_cast<int>(hidden_storage.size()))
        throw RejectedInput("hidden layer too wide");
    std::span<double> hidden(hidden_storage.data(), static_cast<std::size_t>(s.hidden));

    auto w1 = params.w1();
    auto b1 = params.b1();
    for (std::size_t j = 0; j < hidden.size(); ++j) {
        const double* row = w1.data() + j * input.size();
        double acc = b1[j];
        for (std::size_t i = 0; i < input.size(); ++i) acc += row[i] * input[i];
        hidden[j] = acc > 0.0 ? acc : 0.0;
    }
    auto w2 = params.w2();
    auto b2 = params.b2();
    for (std::size_t k = 0; k < output.size(); ++k) {
        const double* row = w2.data() + k * hidden.size();
        double acc = b2[k];
        for (std::size_t j = 0; j < hidden.size(); ++j) acc += row[j] * hidden[j];
        output[k] = 1.0 / (1.0 + std::exp(-acc));
    }
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
    std::vector<double> out(static_cast<std::size_t>(params.shape().outputs));
    mlp_forward(params, input, out);
    return out;
}

ActionAssignment act_global(const ControllerGenome& controller, const SimWorld& world, long env_step,
                            const ObservationConfig& obs) {
    if (controller.kind != ControllerKind::Global)
        throw RejectedInput("act_global needs a global controller");
    std::array<double, kGlobalInputSize> input{};
    std::array<double, kGridCells> output{};
    observe_global(ObservationFrame(world, obs), env_step, input);
    mlp_forward(controller.params, input, output);

    ActionAssignment actions;
    for (const VoxelBody& v : world.voxels)
        if (is_actuator(v.material)) actions.push_back({v.cell, output[static_cast<std::size_t>(v.cell)]});
    std::sort(actions.begin(), actions.end(), [](auto& a, auto& b) { return a.cell < b.cell; });
    return actions;
}

ActionAssignment act_modular(const ControllerGenome& controller, const SimWorld& world, long env_step,
                             const ObservationConfig& obs) {
    if (controller.kind != ControllerKind::Modular)
        throw RejectedInput("act_modular needs a modular controller");
    ObservationFrame frame(world, obs);
    std::vector<double> input(static_cast<std::size_t>(obs.local_input_size()));
    double out = 0.0;

    ActionAssignment actions;
    for (const VoxelBody& v : world.voxels) {
        if (!is_actuator(v.material)) continue;
        observe_local(frame, Cell::from_raster(v.cell), env_step, obs.neighborhood, input);
        mlp_forward(controller.params, input, std::span<double>(&out, 1));
        actions.push_back({v.cell, out});
    }
    std::sort(actions.begin(), actions.end(), [](auto& a, auto& b) { return a.cell < b.cell; });
    return actions;
}

ActionAssignment act(const ControllerGenome& controller, const SimWorld& world, long env_step,
                     const ObservationConfig& obs) {
    return controller.kind == ControllerKind::Global ? act_global(controller, world, env_step, obs)
                                                     : act_modular(controller, world, env_step, obs);
}

ControllerGenome init_controller(ControllerKind kind, Rng& rng, const ObservationConfig& obs) {
    MlpShape shape = controller_shape(kind, obs);
    std::vector<double> values;
    values.reserve(shape.param_count());
    auto fill = [&](std::size_t count, int fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t i = 0; i < count; ++i) values.push_back(u(rng));
    };
    const auto in = static_cast<std::size_t>(shape.inputs);
    const auto hid = static_cast<std::size_t>(shape.hidden);
    const auto out = static_cast<std::size_t>(shape.outputs);
    fill(hid * in, shape.inputs);
    fill(hid, shape.inputs);
    fill(out * hid, shape.hidden);
    fill(out, shape.hidden);
    return {kind, MlpParams(shape, std::move(values))};
}

ControllerGenome mutate_controller(const ControllerGenome& parent, Rng& rng, double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw RejectedInput("mutation sigma must be finite and >= 0");
    ControllerGenome child = parent;
    if (sigma == 0.0) return child;
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& p : child.params.values()) p += noise(rng);
    return child;
}

}  // namespace voxevo
