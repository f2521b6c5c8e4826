#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dfr/errors.hpp"
#include "dfr/fixedpoint.hpp"
#include "dfr/reservoir.hpp"

namespace dfr {

using QStateMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// PWL table prepared for the fixed-point datapath: knot values and slopes
// pass through fmt_weight (the LUT storage format) and are then carried in
// fmt_state, in which all interpolation arithmetic runs.
struct QPwlTable {
  QFormat fmt_state;
  std::vector<std::int64_t> bp_raw;     // fmt_state
  std::vector<std::int64_t> value_raw;  // fmt_state, after fmt_weight quantization
  std::vector<std::int64_t> slope_raw;  // fmt_state, after fmt_weight quantization
};

inline QPwlTable quantize_pwl(const PwlTable& table, const QFormat& fmt_state,
                              const QFormat& fmt_weight) {
  table.validate();
  fmt_state.validate();
  fmt_weight.validate();
  const std::size_t n = table.breakpoints.size();
  QPwlTable q;
  q.fmt_state = fmt_state;
  q.bp_raw.resize(n);
  q.value_raw.resize(n);
  q.slope_raw.resize(n - 1);
  std::vector<FixedVal> vw(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.bp_raw[i] = quantize(table.breakpoints[i], fmt_state).raw;
    vw[i] = quantize(table.values[i], fmt_weight);
    q.value_raw[i] = requantize(vw[i], fmt_state).raw;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double slope = (vw[i + 1].to_real() - vw[i].to_real()) /
                         (table.breakpoints[i + 1] - table.breakpoints[i]);
    q.slope_raw[i] = requantize(quantize(slope, fmt_weight), fmt_state).raw;
  }
  return q;
}

// v_i + slope_i * (z - bp_i), clamped to the table domain. All arithmetic in
// fmt_state; exact at quantized breakpoints (dz == 0 there).
inline FixedVal qpwl_eval(const QPwlTable& table, FixedVal z) {
  if (!(z.fmt == table.fmt_state)) throw invalid_parameter("qpwl_eval: format mismatch");
  if (z.raw <= table.bp_raw.front()) return {table.value_raw.front(), table.fmt_state};
  if (z.raw >= table.bp_raw.back()) return {table.value_raw.back(), table.fmt_state};
  auto it = std::upper_bound(table.bp_raw.begin(), table.bp_raw.end(), z.raw);
  const std::size_t seg = static_cast<std::size_t>(it - table.bp_raw.begin()) - 1;
  const FixedVal bp{table.bp_raw[seg], table.fmt_state};
  const FixedVal value{table.value_raw[seg], table.fmt_state};
  const FixedVal slope{table.slope_raw[seg], table.fmt_state};
  return fx_add(value, fx_mul(slope, fx_sub(z, bp)));
}

// The reservoir datapath with every state, mask entry, and MAC in fmt_state
// arithmetic. Saturation takes the place of the float path's divergence
// errors. Per-step state is raw integers only, so runs are bit-exact.
class QuantizedReservoir {
public:
  QuantizedReservoir(const ReservoirParams& params, const MaskVector& mask,
                     const QFormat& fmt_state, const QFormat& fmt_weight)
      : params_(params), fmt_state_(fmt_state) {
    params.validate();
    fmt_state.validate();
    fmt_weight.validate();
    if (mask.values.size() != static_cast<std::size_t>(params.n_virtual))
      throw invalid_parameter("QuantizedReservoir: mask/params size mismatch");
    switch (params.nonlinearity.variant) {
      case Nonlinearity::PiecewiseLinear:
        pwl_ = quantize_pwl(params.nonlinearity.pwl, fmt_state, fmt_weight);
        break;
      case Nonlinearity::Identity:
        break;
      default:
        throw invalid_configuration(
            "quantized mode requires a piecewise-linear or identity nonlinearity");
    }
    mask_raw_.resize(mask.values.size());
    for (std::size_t i = 0; i < mask.values.size(); ++i)
      mask_raw_[i] = quantize(mask.values[i], fmt_state).raw;
    gain_in_raw_ = quantize(params.input_gain, fmt_state).raw;
    gain_fb_raw_ = quantize(params.feedback_gain, fmt_state).raw;
    coupling_raw_ = quantize(params.cascade_coupling, fmt_state).raw;
    coupling_comp_raw_ = quantize(1.0 - params.cascade_coupling, fmt_state).raw;
    delay_raw_.assign(mask.values.size(), 0);
  }

  void reset() {
    std::fill(delay_raw_.begin(), delay_raw_.end(), 0);
    t_ = 0;
  }

  // One input sample; returns the new state raws (fmt_state).
  const std::vector<std::int64_t>& step(double u) {
    const FixedVal u_q = quantize(u, fmt_state_);
    const std::size_t n = delay_raw_.size();
    const bool cascade = params_.update_mode == UpdateMode::Cascade;
    FixedVal neighbor{delay_raw_[n - 1], fmt_state_};
    for (std::size_t i = 0; i < n; ++i) {
      const FixedVal mask_i{mask_raw_[i], fmt_state_};
      const FixedVal j = fx_mul({gain_in_raw_, fmt_state_}, fx_mul(mask_i, u_q));
      const FixedVal x_prev{delay_raw_[i], fmt_state_};
      FixedVal z = fx_add(fx_mul({gain_fb_raw_, fmt_state_}, x_prev), j);
      if (cascade)
        z = fx_add(fx_mul({coupling_comp_raw_, fmt_state_}, z),
                   fx_mul({coupling_raw_, fmt_state_}, neighbor));
      const FixedVal x = pwl_ ? qpwl_eval(*pwl_, z) : z;
      delay_raw_[i] = x.raw;
      neighbor = x;
    }
    ++t_;
    return delay_raw_;
  }

  const std::vector<std::int64_t>& state_raw() const { return delay_raw_; }
  std::vector<std::int64_t>& state_raw() { return delay_raw_; }
  const QFormat& fmt_state() const { return fmt_state_; }
  long t() const { return t_; }
  void set_t(long t) { t_ = t; }

private:
  ReservoirParams params_;
  QFormat fmt_state_;
  std::optional<QPwlTable> pwl_;
  std::vector<std::int64_t> mask_raw_;
  std::int64_t gain_in_raw_ = 0;
  std::int64_t gain_fb_raw_ = 0;
  std::int64_t coupling_raw_ = 0;
  std::int64_t coupling_comp_raw_ = 0;
  std::vector<std::int64_t> delay_raw_;
  long t_ = 0;
};

// Quantized counterpart of run_sequence: row t holds state raws after input t.
inline QStateMatrix run_sequence_q(const ReservoirParams& params, const MaskVector& mask,
                                   const std::vector<double>& inputs, const QFormat& fmt_state,
                                   const QFormat& fmt_weight) {
  QuantizedReservoir reservoir(params, mask, fmt_state, fmt_weight);
  QStateMatrix states(static_cast<Eigen::Index>(inputs.size()), params.n_virtual);
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const auto& raw = reservoir.step(inputs[t]);
    for (std::size_t i = 0; i < raw.size(); ++i)
      states(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = raw[i];
  }
  return states;
}

// Readout weights in fmt_weight; the trailing entry is the bias.
struct QReadout {
  std::vector<std::int64_t> w_raw;
  QFormat fmt_weight;

  static QReadout zeros(int n_features, const QFormat& fmt_weight) {
    fmt_weight.validate();
    return {std::vector<std::int64_t>(static_cast<std::size_t>(n_features) + 1, 0), fmt_weight};
  }
};

// MAC in fmt_accum over the bias-augmented quantized state.
inline FixedVal predict_q(const QReadout& weights, const std::vector<std::int64_t>& x_raw,
                          const QFormat& fmt_state, const QFormat& fmt_accum) {
  if (weights.w_raw.size() != x_raw.size() + 1)
    throw invalid_parameter("predict_q: weight/state dimension mismatch");
  FixedVal acc{0, fmt_accum};
  for (std::size_t i = 0; i < x_raw.size(); ++i) {
    const FixedVal w = requantize({weights.w_raw[i], weights.fmt_weight}, fmt_accum);
    const FixedVal x = requantize({x_raw[i], fmt_state}, fmt_accum);
    acc = fx_add(acc, fx_mul(w, x));
  }
  // bias: phi = 1 exactly
  acc = fx_add(acc, requantize({weights.w_raw.back(), weights.fmt_weight}, fmt_accum));
  return acc;
}

inline void check_accum_width(const QFormat& fmt_weight, const QFormat& fmt_accum) {
  if (fmt_accum.total_bits < fmt_weight.total_bits || fmt_accum.frac_bits < fmt_weight.frac_bits)
    throw invalid_configuration("accumulator format must be at least as wide as the weights");
}

// LMS with weights in fmt_weight and all products/sums in fmt_accum; each
// weight write quantizes back down. Returns the pre-update error (real).
inline double qlms_update(QReadout& weights, const std::vector<std::int64_t>& x_raw,
                          const QFormat& fmt_state, const QFormat& fmt_accum,
                          const FixedVal& mu_accum, double target) {
  const FixedVal pred = predict_q(weights, x_raw, fmt_state, fmt_accum);
  const FixedVal d = quantize(target, fmt_accum);
  const FixedVal e = fx_sub(d, pred);
  for (std::size_t i = 0; i < x_raw.size(); ++i) {
    const FixedVal phi = requantize({x_raw[i], fmt_state}, fmt_accum);
    const FixedVal update = fx_mul(mu_accum, fx_mul(e, phi));
    const FixedVal w = requantize({weights.w_raw[i], weights.fmt_weight}, fmt_accum);
    weights.w_raw[i] = requantize(fx_add(w, update), weights.fmt_weight).raw;
  }
  const FixedVal bias_update = fx_mul(mu_accum, e);  // phi = 1
  const FixedVal bias = requantize({weights.w_raw.back(), weights.fmt_weight}, fmt_accum);
  weights.w_raw.back() = requantize(fx_add(bias, bias_update), weights.fmt_weight).raw;
  return e.to_real();
}

struct QTrainResult {
  QReadout weights;
  std::vector<double> trace;
};

// Quantized online training path. LMS only: a fixed-point inverse-correlation
// update is not something a small edge datapath does.
inline QTrainResult train_online_q(const QStateMatrix& states, const QFormat& fmt_state,
                                   const Eigen::VectorXd& targets, int washout, double mu,
                                   const QFormat& fmt_weight, const QFormat& fmt_accum) {
  fmt_state.validate();
  fmt_weight.validate();
  fmt_accum.validate();
  check_accum_width(fmt_weight, fmt_accum);
  const long T = states.rows();
  if (targets.size() != T) throw invalid_parameter("train_online_q: states/targets mismatch");
  if (washout < 0 || washout >= T)
    throw invalid_parameter("train_online_q: washout must be in [0, T)");
  if (!(mu > 0)) throw invalid_parameter("train_online_q: mu must be > 0");

  QTrainResult result;
  result.weights = QReadout::zeros(static_cast<int>(states.cols()), fmt_weight);
  result.trace.reserve(static_cast<std::size_t>(T - washout));
  const FixedVal mu_accum = quantize(mu, fmt_accum);
  std::vector<std::int64_t> row(static_cast<std::size_t>(states.cols()));
  for (long t = washout; t < T; ++t) {
    for (Eigen::Index i = 0; i < states.cols(); ++i)
      row[static_cast<std::size_t>(i)] = states(t, i);
    result.trace.push_back(
        qlms_update(result.weights, row, fmt_state, fmt_accum, mu_accum, targets[t]));
  }
  return result;
}

}  // namespace dfr
