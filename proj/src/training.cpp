#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "relguide/errors.hpp"
#include "relguide/neural_guidance.hpp"

namespace relguide {

namespace {

// Reductions run over fixed chunks summed in order, so the floating-point
// result is the same for any number of workers.
constexpr std::size_t kChunk = 16;

struct NormalizedSet {
  std::vector<double> x;  // n x kInputs
  std::vector<double> t;  // n x kOutputs
};

NormalizedSet normalize_all(const NetworkParams& p, const std::vector<TrainingSample>& data) {
  NormalizedSet set;
  set.x.reserve(data.size() * kInputs);
  set.t.reserve(data.size() * kOutputs);
  for (const auto& s : data) {
    const auto x = encode_state(s.state);
    for (std::size_t i = 0; i < x.size(); ++i)
      set.x.push_back((x[i] - p.input.offset[i]) / p.input.scale[i]);
    const auto t = encode_plan(s.plan);
    for (std::size_t i = 0; i < t.size(); ++i)
      set.t.push_back((t[i] - p.output.offset[i]) / p.output.scale[i]);
  }
  return set;
}

std::span<const double> x_of(const NormalizedSet& set, std::size_t i) {
  return {set.x.data() + i * kInputs, kInputs};
}
std::span<const double> t_of(const NormalizedSet& set, std::size_t i) {
  return {set.t.data() + i * kOutputs, kOutputs};
}

double set_loss(const NetworkParams& p, const NormalizedSet& set,
                std::span<const std::size_t> idx, Exec exec) {
  if (idx.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t chunks = (idx.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  auto run = [&](std::size_t c) {
    double acc = 0.0;
    const std::size_t end = std::min(idx.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const auto y = network_output(p, x_of(set, idx[k]));
      const auto t = t_of(set, idx[k]);
      double l = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) l += (y[j] - t[j]) * (y[j] - t[j]);
      acc += l / static_cast<double>(y.size());
    }
    partial[c] = acc;
  };
  const auto n = static_cast<std::ptrdiff_t>(chunks);
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < n; ++c) run(static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < n; ++c) run(static_cast<std::size_t>(c));
  }
  double total = 0.0;
  for (double v : partial) total += v;
  return total / static_cast<double>(idx.size());
}

void set_gradient(const NetworkParams& p, const NormalizedSet& set,
                  std::span<const std::size_t> idx, Exec exec, std::vector<double>& grad,
                  std::vector<std::vector<double>>& scratch) {
  const std::size_t chunks = (idx.size() + kChunk - 1) / kChunk;
  scratch.resize(chunks);
  const double w = 1.0 / static_cast<double>(idx.size());
  auto run = [&](std::size_t c) {
    std::vector<double>& g = scratch[c];
    g.assign(p.values.size(), 0.0);
    const std::size_t end = std::min(idx.size(), (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      accumulate_gradient(p, x_of(set, idx[k]), t_of(set, idx[k]), w, g);
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(chunks);
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < n; ++c) run(static_cast<std::size_t>(c));
  } else {
    for (std::ptrdiff_t c = 0; c < n; ++c) run(static_cast<std::size_t>(c));
  }
  grad.assign(p.values.size(), 0.0);
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += scratch[c][i];
  }
}

Scaling fit_scaling(const std::vector<std::vector<double>>& rows, std::size_t width) {
  Scaling s{std::vector<double>(width, 0.0), std::vector<double>(width, 1.0)};
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t i = 0; i < width; ++i) s.offset[i] += r[i] / n;
  std::vector<double> var(width, 0.0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < width; ++i) var[i] += (r[i] - s.offset[i]) * (r[i] - s.offset[i]) / n;
  for (std::size_t i = 0; i < width; ++i) {
    const double sd = std::sqrt(var[i]);
    s.scale[i] = sd > 1e-9 * std::max(1.0, std::abs(s.offset[i])) ? sd : 1.0;
  }
  return s;
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

double dataset_loss(const NetworkParams& p, const std::vector<TrainingSample>& data,
                    const std::vector<std::size_t>& indices, Exec exec) {
  const NormalizedSet set = normalize_all(p, data);
  return set_loss(p, set, indices, exec);
}

std::vector<double> batch_gradient(const NetworkParams& p,
                                   const std::vector<TrainingSample>& data,
                                   std::span<const std::size_t> batch, Exec exec) {
  const NormalizedSet set = normalize_all(p, data);
  std::vector<double> grad;
  std::vector<std::vector<double>> scratch;
  set_gradient(p, set, batch, exec, grad, scratch);
  return grad;
}

TrainResult train(const std::vector<TrainingSample>& data, const TrainConfig& cfg, double r_min) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("train: learning rate must be >= 0");
  if (!(cfg.validation_split > 0.0 && cfg.validation_split < 1.0)) {
    throw std::invalid_argument("train: validation split must lie in (0, 1)");
  }
  if (cfg.batch_size < 1 || cfg.epochs < 0) throw std::invalid_argument("train: bad batch/epochs");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0) ||
      !(cfg.final_lr_fraction > 0.0 && cfg.final_lr_fraction <= 1.0)) {
    throw std::invalid_argument("train: momentum, beta2 or final_lr_fraction out of range");
  }

  TrainResult result;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, rng);
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_split * static_cast<double>(data.size())));
  result.validation_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  std::vector<int> sizes{kInputs};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(kOutputs);
  NetworkParams p = make_network(sizes, cfg.seed, r_min);

  std::vector<std::vector<double>> in_rows;
  std::vector<std::vector<double>> out_rows;
  for (std::size_t i : result.train_indices) {
    in_rows.push_back(encode_state(data[i].state));
    out_rows.push_back(encode_plan(data[i].plan));
  }
  p.input = fit_scaling(in_rows, kInputs);
  p.output = fit_scaling(out_rows, kOutputs);
  for (std::size_t i = 0; i < kInputs; ++i) {
    p.input_min[i] = p.input_max[i] = in_rows.front()[i];
    for (const auto& r : in_rows) {
      p.input_min[i] = std::min(p.input_min[i], r[i]);
      p.input_max[i] = std::max(p.input_max[i], r[i]);
    }
  }

  const NormalizedSet set = normalize_all(p, data);
  auto record = [&](int epoch) {
    EpochLoss e;
    e.epoch = epoch;
    e.train = set_loss(p, set, result.train_indices, cfg.exec);
    e.validation = set_loss(p, set, result.validation_indices, cfg.exec);
    result.history.push_back(e);
    return e.train;
  };
  const double initial = record(0);

  std::vector<double> velocity(p.values.size(), 0.0);
  std::vector<double> second(p.values.size(), 0.0);
  std::size_t steps = 0;
  const double decay =
      cfg.epochs > 1 ? std::pow(cfg.final_lr_fraction, 1.0 / static_cast<double>(cfg.epochs - 1)) : 1.0;
  double lr = cfg.learning_rate;
  std::vector<double> grad;
  std::vector<std::vector<double>> scratch;
  std::vector<std::size_t> epoch_order = result.train_indices;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(epoch_order, rng);
    for (std::size_t b = 0; b < epoch_order.size(); b += batch) {
      const std::size_t e = std::min(epoch_order.size(), b + batch);
      set_gradient(p, set, std::span<const std::size_t>(epoch_order.data() + b, e - b), cfg.exec,
                   grad, scratch);
      ++steps;
      if (cfg.optimizer == Optimizer::kAdam) {
        const double b1 = cfg.momentum;
        const double b2 = cfg.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps));
        for (std::size_t i = 0; i < p.values.size(); ++i) {
          velocity[i] = b1 * velocity[i] + (1.0 - b1) * grad[i];
          second[i] = b2 * second[i] + (1.0 - b2) * grad[i] * grad[i];
          p.values[i] -= lr * (velocity[i] / c1) / (std::sqrt(second[i] / c2) + 1e-8);
        }
      } else {
        for (std::size_t i = 0; i < p.values.size(); ++i) {
          velocity[i] = cfg.momentum * velocity[i] - lr * grad[i];
          p.values[i] += velocity[i];
        }
      }
    }
    lr *= decay;
    const double loss = record(epoch);
    if (!std::isfinite(loss) || loss > 1e3 * initial) {
      throw Error(ErrorKind::kDivergence,
                  "training diverged at epoch " + std::to_string(epoch) +
                      " (loss " + std::to_string(loss) + ", initial " + std::to_string(initial) +
                      ")");
    }
  }
  result.params = std::move(p);
  return result;
}

}  // namespace relguide
