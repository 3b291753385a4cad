#pragma once

// Feedforward approximator of the state -> minimum-time plan map, its
// trainer, and the guidance query flown at a fixed re-planning period.
//
// Input: RelativeState (dx, dy, dpsi). Output: kPlanSlots triplets, three
// channels each (eps channel, theta, len); the eps channel carries the turn
// direction for non-zero turns and 0 otherwise, decoded by sign.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relguide/exec_policy.hpp"
#include "relguide/plan_geometry.hpp"
#include "relguide/rdp_generator.hpp"
#include "relguide/relative_frame.hpp"

namespace relguide {

inline constexpr int kPlanSlots = 4;
inline constexpr int kInputs = 3;
inline constexpr int kOutputs = 3 * kPlanSlots;

struct Scaling {
  std::vector<double> offset;
  std::vector<double> scale;  // strictly positive

  bool operator==(const Scaling&) const = default;
};

struct NetworkParams {
  std::vector<int> layer_sizes;  // input, hidden..., output
  std::vector<double> values;    // per layer: weights (out x in, row major), then biases
  Scaling input;
  Scaling output;
  std::vector<double> input_min;  // bounds of the training inputs
  std::vector<double> input_max;
  double r_min = 1.0;

  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  std::size_t parameter_count() const;

  bool operator==(const NetworkParams&) const = default;
};

/// Network with Xavier-uniform weights and zero biases, identity scaling.
NetworkParams make_network(const std::vector<int>& layer_sizes, std::uint64_t seed, double r_min);

/// Throws std::invalid_argument on inconsistent dimensions or scales.
void validate_network(const NetworkParams& p);

std::vector<double> encode_plan(const ManeuverPlan& plan);
ManeuverPlan decode_plan(std::span<const double> outputs, double r_min);
std::vector<double> encode_state(const RelativeState& s);

/// Raw network pass on normalized input, returning normalized output.
std::vector<double> network_output(const NetworkParams& p, std::span<const double> input);

/// Denormalized outputs, kOutputs channels, before decoding.
std::vector<double> forward_outputs(const NetworkParams& p, const RelativeState& state);

/// Decoded plan, kPlanSlots triplets in execution order, zero padded.
ManeuverPlan forward(const NetworkParams& p, const RelativeState& state);
bool in_trained_region(const NetworkParams& p, const RelativeState& state);

/// Mean squared error over normalized outputs for one sample, and its gradient
/// by backpropagation (accumulated into grad, scaled by weight).
double sample_loss(const NetworkParams& p, const TrainingSample& s);
double accumulate_gradient(const NetworkParams& p, std::span<const double> input,
                           std::span<const double> target, double weight,
                           std::vector<double>& grad);

/// Max relative error between backprop and central finite differences over
/// every weight and bias, using step h on the parameter values.
double gradient_check(const NetworkParams& p, const TrainingSample& s, double h = 1e-5);

enum class Optimizer { kMomentum, kAdam };

struct TrainConfig {
  std::vector<int> hidden{32, 32};
  Optimizer optimizer = Optimizer::kAdam;
  double learning_rate = 0.003;
  double momentum = 0.9;       // heavy-ball coefficient, or Adam beta1
  double beta2 = 0.999;        // Adam only
  double final_lr_fraction = 0.05;  // geometric decay reaches lr * this at the last epoch
  int epochs = 300;
  int batch_size = 64;
  std::uint64_t seed = 1;
  double validation_split = 0.1;
  Exec exec = Exec::kParallel;
};

struct EpochLoss {
  int epoch = 0;  // 0 = before the first update
  double train = 0.0;
  double validation = 0.0;  // NaN without a validation split
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochLoss> history;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

/// Mini-batch gradient descent with momentum. Throws Error(kDivergence) when
/// the training loss exceeds 1e3 times its initial value.
TrainResult train(const std::vector<TrainingSample>& data, const TrainConfig& cfg, double r_min);

/// Mean loss over a subset, evaluated in fixed-size chunks so the result does
/// not depend on the worker count.
double dataset_loss(const NetworkParams& p, const std::vector<TrainingSample>& data,
                    const std::vector<std::size_t>& indices, Exec exec);

/// Mean gradient over a batch, same chunking contract as dataset_loss.
std::vector<double> batch_gradient(const NetworkParams& p,
                                   const std::vector<TrainingSample>& data,
                                   std::span<const std::size_t> batch, Exec exec);

void save_weights(const NetworkParams& p, const std::string& path);
NetworkParams load_weights(const std::string& path);
std::string weights_to_json(const NetworkParams& p);
NetworkParams weights_from_json(const std::string& text);

// ---------------------------------------------------------------- guidance

/// A straight reference track: the (real or announced) leader pose now.
struct TrackReference {
  PlanarPose leader;
  double speed = 0.0;
};

enum class DirectiveKind { kTurn, kHoldHeading, kTrackHold };

struct Directive {
  DirectiveKind kind = DirectiveKind::kHoldHeading;
  int eps = 1;                  // turn direction for kTurn
  double turn_angle = 0.0;      // remaining turn for kTurn
  double target_heading = 0.0;  // kTurn and kHoldHeading
  double turn_rate = 0.0;       // commanded turn rate for kTurn (signed)
  PlanarPose track;             // reference line for kTrackHold

  bool operator==(const Directive&) const = default;
};

std::string directive_code(const Directive& d);

/// Region in which guidance switches from the network to track hold.
struct CaptureEnvelope {
  double cross_track = 3000.0;
  double heading = 0.3490658503988659;  // 20 deg
};

struct GuidanceConfig {
  CaptureEnvelope capture;
  double min_turn = 0.008726646259971648;  // 0.5 deg, smaller turns count as none
  double polyline_step = 0.08726646259971647;
};

struct GuidanceOutput {
  Directive directive;
  ManeuverPlan plan;
  std::vector<double> outputs;  // denormalized network channels
  RelativeState relative;
  bool in_region = true;
  std::vector<Vec2> polyline;  // predicted pursuer path, absolute frame
};

/// Plans against `intent` when set (the announced final track), otherwise
/// against the leader's current track.
GuidanceOutput guidance_query(const NetworkParams& p, const TrackReference& leader,
                              const PlanarPose& pursuer, double pursuer_speed,
                              const std::optional<TrackReference>& intent,
                              const ConvergenceSpec& spec, const GuidanceConfig& cfg = {});

std::vector<Vec2> plan_polyline(const ManeuverPlan& plan, const PlanarPose& start, double step);

}  // namespace relguide
