#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dfr/errors.hpp"
#include "dfr/rng.hpp"

namespace dfr {

// Paired input/target series with a washout | train | test split.
struct Dataset {
  std::vector<double> inputs;
  std::vector<double> targets;
  int washout = 0;
  int train_end = 0;
  int test_end = 0;
  std::uint64_t seed_used = 0;
  bool reseeded = false;  // NARMA10 divergence fallback fired

  void validate() const {
    if (inputs.size() != targets.size())
      throw invalid_parameter("Dataset: inputs/targets length mismatch");
    if (!(0 <= washout && washout < train_end && train_end < test_end &&
          test_end == static_cast<int>(inputs.size())))
      throw invalid_parameter("Dataset: need 0 <= washout < train_end < test_end == T");
    for (double v : inputs)
      if (!std::isfinite(v)) throw invalid_parameter("Dataset: non-finite input");
    for (double v : targets)
      if (!std::isfinite(v)) throw invalid_parameter("Dataset: non-finite target");
  }
};

// Splits by fraction of T; remainder is the test segment.
inline void apply_split(Dataset& ds, double washout_frac, double train_frac) {
  const int T = static_cast<int>(ds.inputs.size());
  ds.washout = static_cast<int>(std::lround(washout_frac * T));
  ds.train_end = ds.washout + static_cast<int>(std::lround(train_frac * T));
  ds.test_end = T;
  ds.validate();
}

// NARMA10 recurrence over a given input series, from zero history:
//   y_{t+1} = 0.3 y_t + 0.05 y_t (sum_{i=0..9} y_{t-i}) + 1.5 u_{t-9} u_t + 0.1
// Returns y_1..y_T (the target at step t is y_{t+1}), or nullopt if the
// recurrence blows past |y| > 10.
inline std::optional<std::vector<double>> narma10_targets(const std::vector<double>& u) {
  const int T = static_cast<int>(u.size());
  std::vector<double> y(static_cast<std::size_t>(T));
  std::vector<double> hist(10, 0.0);  // y_t .. y_{t-9}, newest first
  double y_t = 0.0;
  for (int t = 0; t < T; ++t) {
    double sum = 0.0;
    for (double h : hist) sum += h;
    const double u_lag = (t >= 9) ? u[static_cast<std::size_t>(t - 9)] : 0.0;
    const double y_next =
        0.3 * y_t + 0.05 * y_t * sum + 1.5 * u_lag * u[static_cast<std::size_t>(t)] + 0.1;
    if (!std::isfinite(y_next) || std::abs(y_next) > 10.0) return std::nullopt;
    y[static_cast<std::size_t>(t)] = y_next;
    hist.pop_back();
    hist.insert(hist.begin(), y_next);
    y_t = y_next;
  }
  return y;
}

// u_t i.i.d. uniform on [0, 0.5]. The recurrence occasionally diverges for
// unlucky draws; in that case the generator retries with seed+1 and records
// the substitution, so the dataset stays a deterministic function of the
// requested seed.
inline Dataset gen_narma10(int T, std::uint64_t seed) {
  if (T < 20) throw invalid_parameter("gen_narma10: T must be >= 20");
  for (std::uint64_t attempt = seed;; ++attempt) {
    std::vector<double> u(static_cast<std::size_t>(T));
    SeededRng rng(attempt);
    for (auto& v : u) v = 0.5 * rng.unit();
    auto y = narma10_targets(u);
    if (!y) continue;
    Dataset ds;
    ds.inputs = std::move(u);
    ds.targets = std::move(*y);
    ds.seed_used = attempt;
    ds.reseeded = attempt != seed;
    apply_split(ds, 0.05, 0.75);
    return ds;
  }
}

struct MackeyGlassParams {
  double beta = 0.2;
  double gamma = 0.1;
  double n = 10.0;
  double tau = 17.0;
  double dt = 0.1;
  int subsample = 10;
};

// dx/dt = beta x(t-tau) / (1 + x(t-tau)^n) - gamma x(t), integrated with
// fixed-step RK4; the delayed term is linearly interpolated from the stored
// grid. Constant history x = 1.2 for t <= 0. Inputs are the subsampled
// series, targets the series `horizon` samples ahead.
inline Dataset gen_mackey_glass(int T, int horizon, const MackeyGlassParams& p = {}) {
  if (T < 1) throw invalid_parameter("gen_mackey_glass: T must be >= 1");
  if (horizon < 1) throw invalid_parameter("gen_mackey_glass: horizon must be >= 1");
  if (!(p.dt > 0)) throw invalid_parameter("gen_mackey_glass: dt must be > 0");
  if (!(p.tau > 0)) throw invalid_parameter("gen_mackey_glass: tau must be > 0");
  if (p.subsample < 1) throw invalid_parameter("gen_mackey_glass: subsample must be >= 1");

  const double x0 = 1.2;
  const double delay_steps = p.tau / p.dt;
  const long n_steps = static_cast<long>(T + horizon) * p.subsample;
  std::vector<double> xs(static_cast<std::size_t>(n_steps) + 1);
  xs[0] = x0;

  // x(t - tau) at grid offset `pos` steps (possibly fractional) before now
  auto delayed = [&](double pos) {
    if (pos <= 0.0) return x0;  // constant pre-history
    const long i0 = static_cast<long>(std::floor(pos));
    const double frac = pos - static_cast<double>(i0);
    const double a = xs[static_cast<std::size_t>(i0)];
    if (frac == 0.0) return a;
    const double b = xs[static_cast<std::size_t>(i0) + 1];
    return a + frac * (b - a);
  };
  auto deriv = [&](double x, double x_tau) {
    return p.beta * x_tau / (1.0 + std::pow(x_tau, p.n)) - p.gamma * x;
  };

  double x = x0;
  for (long j = 0; j < n_steps; ++j) {
    const double d0 = delayed(static_cast<double>(j) - delay_steps);
    const double dh = delayed(static_cast<double>(j) + 0.5 - delay_steps);
    const double d1 = delayed(static_cast<double>(j) + 1.0 - delay_steps);
    const double k1 = deriv(x, d0);
    const double k2 = deriv(x + 0.5 * p.dt * k1, dh);
    const double k3 = deriv(x + 0.5 * p.dt * k2, dh);
    const double k4 = deriv(x + p.dt * k3, d1);
    x += p.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(x)) throw divergence_error("mackey-glass generator", j);
    xs[static_cast<std::size_t>(j) + 1] = x;
  }

  Dataset ds;
  ds.inputs.resize(static_cast<std::size_t>(T));
  ds.targets.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    ds.inputs[static_cast<std::size_t>(t)] =
        xs[static_cast<std::size_t>(t) * static_cast<std::size_t>(p.subsample)];
    ds.targets[static_cast<std::size_t>(t)] =
        xs[static_cast<std::size_t>(t + horizon) * static_cast<std::size_t>(p.subsample)];
  }
  ds.seed_used = 0;
  apply_split(ds, 0.05, 0.75);
  return ds;
}

struct Metrics {
  double mse = 0.0;
  double nmse = 0.0;
  double nrmse = 0.0;
};

// nmse = sum (pred - y)^2 / sum (y - mean(y))^2, nrmse = sqrt(nmse).
inline Metrics compute_metrics(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.size() < 2)
    throw invalid_parameter("compute_metrics: need equal lengths >= 2");
  const double n = static_cast<double>(target.size());
  double mean = 0.0;
  for (double y : target) mean += y;
  mean /= n;
  double sq_err = 0.0, var_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sq_err += e * e;
    const double c = target[i] - mean;
    var_sum += c * c;
  }
  if (var_sum == 0.0)
    throw degenerate_target("compute_metrics: constant target, nmse undefined");
  Metrics m;
  m.mse = sq_err / n;
  m.nmse = sq_err / var_sum;
  m.nrmse = std::sqrt(m.nmse);
  return m;
}

}  // namespace dfr
