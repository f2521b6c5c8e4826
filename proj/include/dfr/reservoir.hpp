#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dfr/errors.hpp"
#include "dfr/nonlinearity.hpp"
#include "dfr/rng.hpp"

namespace dfr {

// IdealDelay: each virtual node feeds back only on its own previous state.
// Cascade: mixes in the just-updated neighbor, modeling the analog node's
// inertia dragging adjacent time slots together.
enum class UpdateMode { IdealDelay, Cascade };

enum class MaskKind { Binary, Uniform };

struct ReservoirParams {
  int n_virtual = 100;
  double feedback_gain = 0.8;  // eta, in [0, 1)
  double input_gain = 0.5;     // gamma
  NonlinearitySpec nonlinearity{};
  UpdateMode update_mode = UpdateMode::IdealDelay;
  double cascade_coupling = 0.0;  // k, in [0, 1]; Cascade mode only
  int washout = 0;

  void validate() const {
    if (n_virtual < 1) throw invalid_parameter("n_virtual must be >= 1");
    if (!(feedback_gain >= 0.0 && feedback_gain < 1.0))
      throw invalid_parameter("feedback_gain must be in [0, 1)");
    if (!(cascade_coupling >= 0.0 && cascade_coupling <= 1.0))
      throw invalid_parameter("cascade_coupling must be in [0, 1]");
    if (washout < 0) throw invalid_parameter("washout must be >= 0");
    if (nonlinearity.variant == Nonlinearity::MackeyGlass && !(nonlinearity.mg_exponent > 0))
      throw invalid_parameter("mg_exponent must be > 0");
  }
};

struct MaskVector {
  std::vector<double> values;
  MaskKind kind = MaskKind::Binary;
  std::uint64_t seed = 0;
};

// Deterministic in (n, kind, seed).
inline MaskVector new_mask(int n, MaskKind kind, std::uint64_t seed) {
  if (n < 1) throw invalid_parameter("new_mask: n must be >= 1");
  MaskVector m;
  m.kind = kind;
  m.seed = seed;
  m.values.resize(static_cast<std::size_t>(n));
  SeededRng rng(seed);
  for (auto& v : m.values)
    v = (kind == MaskKind::Binary) ? rng.sign() : rng.uniform(-1.0, 1.0);
  return m;
}

// Node states from the previous input step. One full pass of step() writes
// all N slots, so between calls the cursor is back at the origin.
struct DelayLine {
  std::vector<double> buffer;
  std::size_t cursor = 0;
  long t = 0;  // input steps consumed since reset

  DelayLine() = default;
  explicit DelayLine(int n) : buffer(static_cast<std::size_t>(n), 0.0) {}

  void reset() {
    std::fill(buffer.begin(), buffer.end(), 0.0);
    cursor = 0;
    t = 0;
  }
};

struct StateVector {
  Eigen::VectorXd x;
  long t = 0;
};

// J_i = input_gain * mask_i * u
inline Eigen::VectorXd mask_input(double u, const MaskVector& mask, double input_gain) {
  Eigen::VectorXd j(static_cast<Eigen::Index>(mask.values.size()));
  for (Eigen::Index i = 0; i < j.size(); ++i)
    j[i] = input_gain * mask.values[static_cast<std::size_t>(i)] * u;
  return j;
}

// One input sample: one pass over all virtual nodes in index order.
inline StateVector step(const ReservoirParams& params, const MaskVector& mask,
                        DelayLine& delay, double u) {
  const std::size_t n = static_cast<std::size_t>(params.n_virtual);
  if (mask.values.size() != n) throw invalid_parameter("step: mask/params size mismatch");
  if (delay.buffer.size() != n) throw invalid_parameter("step: delay line/params size mismatch");

  const Eigen::VectorXd j = mask_input(u, mask, params.input_gain);
  const bool cascade = params.update_mode == UpdateMode::Cascade;
  const double k = params.cascade_coupling;

  StateVector out;
  out.t = delay.t;
  out.x.resize(static_cast<Eigen::Index>(n));

  // x_new_{-1} is the previous step's last node
  double neighbor = delay.buffer[n - 1];
  for (std::size_t i = 0; i < n; ++i) {
    const double x_prev = delay.buffer[delay.cursor];
    double z = params.feedback_gain * x_prev + j[static_cast<Eigen::Index>(i)];
    if (cascade) z = (1.0 - k) * z + k * neighbor;
    const double x = eval(params.nonlinearity, z);
    if (!std::isfinite(x)) throw divergence_error("reservoir", out.t, static_cast<long>(i));
    delay.buffer[delay.cursor] = x;
    delay.cursor = (delay.cursor + 1) % n;
    out.x[static_cast<Eigen::Index>(i)] = x;
    neighbor = x;
  }
  ++delay.t;
  return out;
}

// Continues from the given delay line; row t holds the state after input t.
inline Eigen::MatrixXd run_sequence_from(const ReservoirParams& params, const MaskVector& mask,
                                         DelayLine& delay, const std::vector<double>& inputs) {
  params.validate();
  Eigen::MatrixXd states(static_cast<Eigen::Index>(inputs.size()), params.n_virtual);
  for (std::size_t t = 0; t < inputs.size(); ++t)
    states.row(static_cast<Eigen::Index>(t)) = step(params, mask, delay, inputs[t]).x;
  return states;
}

// Batch driver from a fresh (all-zero) delay line.
inline Eigen::MatrixXd run_sequence(const ReservoirParams& params, const MaskVector& mask,
                                    const std::vector<double>& inputs) {
  DelayLine delay(params.n_virtual);
  return run_sequence_from(params, mask, delay, inputs);
}

}  // namespace dfr
