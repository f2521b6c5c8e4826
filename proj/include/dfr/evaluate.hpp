#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dfr/bench.hpp"
#include "dfr/errors.hpp"
#include "dfr/quantized.hpp"
#include "dfr/readout.hpp"
#include "dfr/reservoir.hpp"

namespace dfr {

enum class RunMode { Float, Quantized };
enum class TrainerKind { Rls, Lms };

struct TrainerConfig {
  TrainerKind kind = TrainerKind::Rls;
  double forgetting = 1.0;    // lambda
  double init_scale = 1e-4;   // delta
  std::optional<double> step_size;  // mu; LMS only, auto-resolved when absent
};

struct FormatsConfig {
  QFormat state{16, 12, Rounding::RoundNearestEven, Overflow::Saturate};
  QFormat weight{16, 12, Rounding::RoundNearestEven, Overflow::Saturate};
  QFormat accum{32, 24, Rounding::RoundNearestEven, Overflow::Saturate};
};

struct EvalReport {
  Metrics metrics;                      // test segment only
  Eigen::VectorXd weights;              // final readout weights (dequantized if fixed point)
  std::vector<std::int64_t> weights_raw;  // quantized mode only
  std::vector<double> train_trace;      // pre-update error per trained step
  std::vector<double> test_predictions;
  double duration_ms = 0.0;
  long updates_applied = 0;
  bool continual = false;
  double resolved_mu = std::numeric_limits<double>::quiet_NaN();
};

// mu default: 0.1 / mean ||phi||^2 over the washout window (the first
// min(32, T) rows when washout is 0).
inline double resolve_mu(const TrainerConfig& trainer, const Eigen::MatrixXd& states,
                         int washout) {
  if (trainer.step_size) {
    if (!(*trainer.step_size > 0)) throw invalid_parameter("step_size must be > 0");
    return *trainer.step_size;
  }
  const long window = washout > 0 ? washout : std::min<long>(32, states.rows());
  if (window < 1) throw invalid_parameter("resolve_mu: no samples to size the step from");
  double mean_sq = 0.0;
  for (long t = 0; t < window; ++t)
    mean_sq += states.row(t).squaredNorm() + 1.0;  // + bias entry
  mean_sq /= static_cast<double>(window);
  return 0.1 / mean_sq;
}

namespace detail {

struct StopWatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

}  // namespace detail

// Train -> frozen-weight inference -> metrics over an arbitrary feature
// matrix (rows aligned with the dataset). The reservoir path and the
// input-only baseline both go through here.
inline EvalReport evaluate_features(const Eigen::MatrixXd& features, const TrainerConfig& trainer,
                                    const Dataset& ds, bool continual = false) {
  ds.validate();
  if (features.rows() != static_cast<long>(ds.inputs.size()))
    throw invalid_parameter("evaluate_features: feature/dataset row mismatch");

  detail::StopWatch watch;
  EvalReport report;
  report.continual = continual;

  const Eigen::Map<const Eigen::VectorXd> targets(ds.targets.data(),
                                                  static_cast<long>(ds.targets.size()));
  const int n_features = static_cast<int>(features.cols());
  const Eigen::MatrixXd train_states = features.topRows(ds.train_end);
  const Eigen::VectorXd train_targets = targets.head(ds.train_end);

  Eigen::VectorXd row;
  auto run = [&](auto& state, auto update) {
    try {
      report.train_trace = train_online(state, train_states, train_targets, ds.washout);
    } catch (const divergence_error& e) {
      throw divergence_error("train", e.step(), e.node());
    }
    report.updates_applied = static_cast<long>(report.train_trace.size());
    report.test_predictions.reserve(static_cast<std::size_t>(ds.test_end - ds.train_end));
    for (int t = ds.train_end; t < ds.test_end; ++t) {
      row = features.row(t);
      report.test_predictions.push_back(predict(state.weights, row));
      if (continual) {
        try {
          update(state, row, ds.targets[static_cast<std::size_t>(t)]);
        } catch (const divergence_error& e) {
          throw divergence_error("test", t, e.node());
        }
        ++report.updates_applied;
      }
    }
    report.weights = state.weights.w;
  };

  if (trainer.kind == TrainerKind::Lms) {
    report.resolved_mu = resolve_mu(trainer, features, ds.washout);
    LmsState state = LmsState::init(n_features, report.resolved_mu);
    run(state, [](LmsState& s, const Eigen::VectorXd& x, double d) { lms_update(s, x, d); });
  } else {
    RlsState state = RlsState::init(n_features, trainer.forgetting, trainer.init_scale);
    run(state, [](RlsState& s, const Eigen::VectorXd& x, double d) { rls_update(s, x, d); });
  }

  report.metrics = compute_metrics(
      report.test_predictions,
      std::span<const double>(ds.targets).subspan(static_cast<std::size_t>(ds.train_end)));
  report.duration_ms = watch.elapsed_ms();
  return report;
}

inline EvalReport evaluate_quantized(const ReservoirParams& params, const MaskVector& mask,
                                     const TrainerConfig& trainer, const Dataset& ds,
                                     const FormatsConfig& formats, bool continual = false) {
  ds.validate();
  if (trainer.kind != TrainerKind::Lms)
    throw invalid_configuration("quantized mode trains with LMS only");

  detail::StopWatch watch;
  EvalReport report;
  report.continual = continual;

  const QStateMatrix states =
      run_sequence_q(params, mask, ds.inputs, formats.state, formats.weight);

  // mu sized from the dequantized washout window, as in the float path
  Eigen::MatrixXd states_real(states.rows(), states.cols());
  for (long t = 0; t < states.rows(); ++t)
    for (long i = 0; i < states.cols(); ++i)
      states_real(t, i) = FixedVal{states(t, i), formats.state}.to_real();
  report.resolved_mu = resolve_mu(trainer, states_real, ds.washout);

  const Eigen::Map<const Eigen::VectorXd> targets(ds.targets.data(),
                                                  static_cast<long>(ds.targets.size()));
  QTrainResult trained =
      train_online_q(states.topRows(ds.train_end), formats.state, targets.head(ds.train_end),
                     ds.washout, report.resolved_mu, formats.weight, formats.accum);
  report.train_trace = std::move(trained.trace);
  report.updates_applied = static_cast<long>(report.train_trace.size());

  const FixedVal mu_accum = quantize(report.resolved_mu, formats.accum);
  std::vector<std::int64_t> row(static_cast<std::size_t>(states.cols()));
  report.test_predictions.reserve(static_cast<std::size_t>(ds.test_end - ds.train_end));
  for (int t = ds.train_end; t < ds.test_end; ++t) {
    for (Eigen::Index i = 0; i < states.cols(); ++i)
      row[static_cast<std::size_t>(i)] = states(t, i);
    report.test_predictions.push_back(
        predict_q(trained.weights, row, formats.state, formats.accum).to_real());
    if (continual) {
      qlms_update(trained.weights, row, formats.state, formats.accum, mu_accum,
                  ds.targets[static_cast<std::size_t>(t)]);
      ++report.updates_applied;
    }
  }

  report.weights_raw = trained.weights.w_raw;
  report.weights.resize(static_cast<long>(trained.weights.w_raw.size()));
  for (long i = 0; i < report.weights.size(); ++i)
    report.weights[i] =
        FixedVal{trained.weights.w_raw[static_cast<std::size_t>(i)], formats.weight}.to_real();

  report.metrics = compute_metrics(
      report.test_predictions,
      std::span<const double>(ds.targets).subspan(static_cast<std::size_t>(ds.train_end)));
  report.duration_ms = watch.elapsed_ms();
  return report;
}

// The full pipeline: states -> online training on the train segment ->
// frozen-weight inference on the test segment -> metrics. With `continual`
// set, updates keep running through the test segment and the report says so.
inline EvalReport evaluate(const ReservoirParams& params, const MaskVector& mask,
                           const TrainerConfig& trainer, const Dataset& ds, RunMode mode,
                           const FormatsConfig* formats = nullptr, bool continual = false) {
  params.validate();
  if (mode == RunMode::Quantized) {
    if (!formats) throw invalid_configuration("quantized mode requires formats");
    return evaluate_quantized(params, mask, trainer, ds, *formats, continual);
  }
  detail::StopWatch watch;
  Eigen::MatrixXd states;
  try {
    states = run_sequence(params, mask, ds.inputs);
  } catch (const divergence_error& e) {
    throw divergence_error("reservoir", e.step(), e.node());
  }
  EvalReport report = evaluate_features(states, trainer, ds, continual);
  report.duration_ms = watch.elapsed_ms();
  return report;
}

}  // namespace dfr
