#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "voxevo/physics.hpp"
#include "voxevo/rng.hpp"
#include "voxevo/sensing.hpp"

namespace voxevo {

enum class ControllerKind : std::uint8_t { Global = 0, Modular = 1 };

const char* to_string(ControllerKind kind);
/// Accepts "global" or "modular"; throws RejectedInput otherwise.
ControllerKind parse_controller_kind(std::string_view text);

inline constexpr int kHiddenUnits = 32;

struct MlpShape {
    int inputs = 0;
    int hidden = kHiddenUnits;
    int outputs = 0;

    constexpr std::size_t param_count() const {
        return static_cast<std::size_t>(inputs * hidden + hidden + hidden * outputs + outputs);
    }
    friend constexpr bool operator==(MlpShape, MlpShape) = default;
};

inline constexpr MlpShape kGlobalShape{kGlobalInputSize, kHiddenUnits, kGridCells};
inline constexpr MlpShape kModularShape{kGlobalInputSize, kHiddenUnits, 1};
static_assert(kGlobalShape.param_count() == 7289);
static_assert(kModularShape.param_count() == 6497);

/// One-hidden-layer MLP parameters stored flat in layer order:
/// W1 (hidden x inputs, row-major), b1, W2 (outputs x hidden, row-major), b2.
class MlpParams {
public:
    MlpParams() = default;
    explicit MlpParams(MlpShape shape) : shape_(shape), values_(shape.param_count(), 0.0) {}
    /// Throws RejectedInput if `values` does not match the shape's parameter count.
    MlpParams(MlpShape shape, std::vector<double> values);

    const MlpShape& shape() const { return shape_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<const double> w1() const { return values().subspan(0, w1_size()); }
    std::span<const double> b1() const { return values().subspan(w1_size(), h()); }
    std::span<const double> w2() const { return values().subspan(w1_size() + h(), w2_size()); }
    std::span<const double> b2() const { return values().subspan(w1_size() + h() + w2_size(), o()); }

    friend bool operator==(const MlpParams&, const MlpParams&) = default;

private:
    std::size_t h() const { return static_cast<std::size_t>(shape_.hidden); }
    std::size_t o() const { return static_cast<std::size_t>(shape_.outputs); }
    std::size_t w1_size() const { return static_cast<std::size_t>(shape_.inputs) * h(); }
    std::size_t w2_size() const { return o() * h(); }

    MlpShape shape_;
    std::vector<double> values_;
};

struct ControllerGenome {
    ControllerKind kind = ControllerKind::Modular;
    MlpParams params;

    friend bool operator==(const ControllerGenome&, const ControllerGenome&) = default;
};

/// Network shape for a controller kind; the modular input follows the Moore window size.
MlpShape controller_shape(ControllerKind kind, const ObservationConfig& obs = {});

/// sigmoid(W2 relu(W1 x + b1) + b2). Throws RejectedInput on size mismatch.
void mlp_forward(const MlpParams& params, std::span<const double> input, std::span<double> output);
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

/// Actuator cell -> action, sorted by raster index.
using ActionAssignment = std::vector<VoxelAction>;

ActionAssignment act_global(const ControllerGenome& controller, const SimWorld& world, long env_step,
                            const ObservationConfig& obs = {});
ActionAssignment act_modular(const ControllerGenome& controller, const SimWorld& world, long env_step,
                             const ObservationConfig& obs = {});
/// Dispatches on controller.kind.
ActionAssignment act(const ControllerGenome& controller, const SimWorld& world, long env_step,
                     const ObservationConfig& obs = {});

/// Weights and biases uniform in +-1/sqrt(fan_in) per layer.
ControllerGenome init_controller(ControllerKind kind, Rng& rng, const ObservationConfig& obs = {});

/// Adds N(0, sigma^2) noise to every parameter.
ControllerGenome mutate_controller(const ControllerGenome& parent, Rng& rng, double sigma = 0.1);

}  // namespace voxevo
