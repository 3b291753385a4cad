#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "relguide/neural_guidance.hpp"

namespace relguide {

std::size_t NetworkParams::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    const auto in = static_cast<std::size_t>(layer_sizes[l]);
    const auto out = static_cast<std::size_t>(layer_sizes[l + 1]);
    off += out * in + out;
  }
  return off;
}

std::size_t NetworkParams::bias_offset(std::size_t layer) const {
  return weight_offset(layer) +
         static_cast<std::size_t>(layer_sizes[layer + 1]) *
             static_cast<std::size_t>(layer_sizes[layer]);
}

std::size_t NetworkParams::parameter_count() const { return weight_offset(layer_count()); }

namespace {

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Scaling identity_scaling(int n) {
  return Scaling{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                 std::vector<double>(static_cast<std::size_t>(n), 1.0)};
}

}  // namespace

NetworkParams make_network(const std::vector<int>& layer_sizes, std::uint64_t seed,
                           double r_min) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("network: need at least two layers");
  if (layer_sizes.front() != kInputs || layer_sizes.back() != kOutputs) {
    throw std::invalid_argument("network: input must be 3 wide and output 3 * plan slots");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw std::invalid_argument("network: layer sizes must be positive");
  }
  NetworkParams p;
  p.layer_sizes = layer_sizes;
  p.values.assign(p.parameter_count(), 0.0);
  p.input = identity_scaling(kInputs);
  p.output = identity_scaling(kOutputs);
  p.input_min.assign(kInputs, -1e300);
  p.input_max.assign(kInputs, 1e300);
  p.r_min = r_min;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const int in = layer_sizes[l];
    const int out = layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    const std::size_t w = p.weight_offset(l);
    for (std::size_t i = 0; i < static_cast<std::size_t>(in * out); ++i) {
      p.values[w + i] = (2.0 * unit_uniform(rng) - 1.0) * limit;
    }
  }
  return p;
}

void validate_network(const NetworkParams& p) {
  if (p.layer_sizes.size() < 2 || p.layer_sizes.front() != kInputs ||
      p.layer_sizes.back() != kOutputs) {
    throw std::invalid_argument("network: layer sizes must run from 3 to 3 * plan slots");
  }
  for (int s : p.layer_sizes) {
    if (s <= 0) throw std::invalid_argument("network: layer sizes must be positive");
  }
  if (p.values.size() != p.parameter_count()) {
    throw std::invalid_argument("network: parameter count does not match layer sizes");
  }
  auto check_scaling = [](const Scaling& s, int n, const char* what) {
    if (s.offset.size() != static_cast<std::size_t>(n) ||
        s.scale.size() != static_cast<std::size_t>(n)) {
      throw std::invalid_argument(std::string("network: bad ") + what + " scaling size");
    }
    for (double v : s.scale) {
      if (!(v > 0.0)) throw std::invalid_argument(std::string("network: ") + what +
                                                  " scales must be positive");
    }
  };
  check_scaling(p.input, kInputs, "input");
  check_scaling(p.output, kOutputs, "output");
  if (p.input_min.size() != kInputs || p.input_max.size() != kInputs) {
    throw std::invalid_argument("network: bad input bounds");
  }
  if (!(p.r_min > 0.0)) throw std::invalid_argument("network: r_min must be positive");
}

std::vector<double> encode_state(const RelativeState& s) { return {s.dx, s.dy, s.dpsi}; }

std::vector<double> encode_plan(const ManeuverPlan& plan) {
  std::vector<double> out(kOutputs, 0.0);
  const std::size_t n = std::min<std::size_t>(plan.triplets.size(), kPlanSlots);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = plan.triplets[i];
    out[3 * i] = t.theta > 0.0 ? static_cast<double>(t.eps) : 0.0;
    out[3 * i + 1] = t.theta;
    out[3 * i + 2] = t.len;
  }
  return out;
}

ManeuverPlan decode_plan(std::span<const double> outputs, double r_min) {
  if (outputs.size() != kOutputs) throw std::invalid_argument("decode_plan: wrong output size");
  ManeuverPlan plan;
  plan.r_min = r_min;
  for (std::size_t i = 0; i < kPlanSlots; ++i) {
    PlanTriplet t;
    t.eps = outputs[3 * i] >= 0.0 ? 1 : -1;
    t.theta = std::max(0.0, outputs[3 * i + 1]);
    t.len = std::max(0.0, outputs[3 * i + 2]);
    plan.triplets.push_back(t);
  }
  return plan;
}

std::vector<double> network_output(const NetworkParams& p, std::span<const double> input) {
  std::vector<double> a(input.begin(), input.end());
  std::vector<double> z;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
    const double* w = p.values.data() + p.weight_offset(l);
    const double* b = p.values.data() + p.bias_offset(l);
    z.assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b[j];
      for (std::size_t i = 0; i < in; ++i) acc += w[j * in + i] * a[i];
      z[j] = l + 1 < p.layer_count() ? std::tanh(acc) : acc;
    }
    a.swap(z);
  }
  return a;
}

namespace {

std::vector<double> normalize(const Scaling& s, const std::vector<double>& raw) {
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - s.offset[i]) / s.scale[i];
  return out;
}

}  // namespace

// The optimal plan of a mirrored state is the mirrored plan, but a fitted
// network only honours that approximately. Right-side states are answered
// from the left half so both sides fly the same policy.
namespace {
bool right_side(const RelativeState& state) {
  return state.dy < 0.0 || (state.dy == 0.0 && state.dpsi < 0.0);
}
}  // namespace

std::vector<double> forward_outputs(const NetworkParams& p, const RelativeState& state) {
  const bool flip = right_side(state);
  const std::vector<double> x = normalize(p.input, encode_state(flip ? mirrored(state) : state));
  std::vector<double> y = network_output(p, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] * p.output.scale[i] + p.output.offset[i];
  if (flip) {
    for (std::size_t i = 0; i < y.size(); i += 3) y[i] = -y[i];
  }
  return y;
}

ManeuverPlan forward(const NetworkParams& p, const RelativeState& state) {
  return decode_plan(forward_outputs(p, state), p.r_min);
}

bool in_trained_region(const NetworkParams& p, const RelativeState& state) {
  const std::vector<double> x = encode_state(state);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < p.input_min[i] || x[i] > p.input_max[i]) return false;
  }
  return true;
}

double accumulate_gradient(const NetworkParams& p, std::span<const double> input,
                           std::span<const double> target, double weight,
                           std::vector<double>& grad) {
  const std::size_t layers = p.layer_count();
  thread_local std::vector<std::vector<double>> acts;
  thread_local std::vector<double> delta;
  thread_local std::vector<double> back;
  acts.resize(layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
    const double* w = p.values.data() + p.weight_offset(l);
    const double* b = p.values.data() + p.bias_offset(l);
    acts[l + 1].assign(out, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      double acc = b[j];
      for (std::size_t i = 0; i < in; ++i) acc += w[j * in + i] * acts[l][i];
      acts[l + 1][j] = l + 1 < layers ? std::tanh(acc) : acc;
    }
  }
  const std::vector<double>& y = acts[layers];
  const double k = static_cast<double>(y.size());
  double loss = 0.0;
  delta.resize(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double e = y[j] - target[j];
    loss += e * e;
    delta[j] = 2.0 * e / k;
  }
  loss /= k;
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
    const double* w = p.values.data() + p.weight_offset(l);
    double* gw = grad.data() + p.weight_offset(l);
    double* gb = grad.data() + p.bias_offset(l);
    const std::vector<double>& prev = acts[l];
    for (std::size_t j = 0; j < out; ++j) {
      const double d = weight * delta[j];
      gb[j] += d;
      for (std::size_t i = 0; i < in; ++i) gw[j * in + i] += d * prev[i];
    }
    if (l == 0) break;
    back.assign(in, 0.0);
    for (std::size_t j = 0; j < out; ++j) {
      for (std::size_t i = 0; i < in; ++i) back[i] += w[j * in + i] * delta[j];
    }
    for (std::size_t i = 0; i < in; ++i) back[i] *= 1.0 - prev[i] * prev[i];
    delta.swap(back);
  }
  return loss;
}

namespace {

struct NormalizedSample {
  std::vector<double> x;
  std::vector<double> t;
};

NormalizedSample normalized(const NetworkParams& p, const TrainingSample& s) {
  return NormalizedSample{normalize(p.input, encode_state(s.state)),
                          normalize(p.output, encode_plan(s.plan))};
}

double loss_of(const NetworkParams& p, const NormalizedSample& n) {
  const std::vector<double> y = network_output(p, n.x);
  double loss = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) loss += (y[j] - n.t[j]) * (y[j] - n.t[j]);
  return loss / static_cast<double>(y.size());
}

}  // namespace

double sample_loss(const NetworkParams& p, const TrainingSample& s) {
  return loss_of(p, normalized(p, s));
}

double gradient_check(const NetworkParams& p, const TrainingSample& s, double h) {
  const NormalizedSample n = normalized(p, s);
  std::vector<double> grad(p.values.size(), 0.0);
  accumulate_gradient(p, n.x, n.t, 1.0, grad);
  NetworkParams probe = p;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    probe.values[i] = p.values[i] + h;
    const double up = loss_of(probe, n);
    probe.values[i] = p.values[i] - h;
    const double down = loss_of(probe, n);
    probe.values[i] = p.values[i];
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-3});
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

}  // namespace relguide
