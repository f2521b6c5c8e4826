#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dfr/errors.hpp"

namespace dfr {

// Weights over the bias-augmented state [x; 1]; the last entry is the bias.
struct ReadoutWeights {
  Eigen::VectorXd w;

  int n_features() const { return static_cast<int>(w.size()) - 1; }
};

inline ReadoutWeights zero_weights(int n_features) {
  if (n_features < 0) throw invalid_parameter("zero_weights: n_features must be >= 0");
  return {Eigen::VectorXd::Zero(n_features + 1)};
}

inline Eigen::VectorXd augment(const Eigen::VectorXd& x) {
  Eigen::VectorXd phi(x.size() + 1);
  phi.head(x.size()) = x;
  phi[x.size()] = 1.0;
  return phi;
}

// y = w^T [x; 1]
inline double predict(const ReadoutWeights& weights, const Eigen::VectorXd& x) {
  if (weights.w.size() != x.size() + 1)
    throw invalid_parameter("predict: weight/state dimension mismatch");
  return weights.w.head(x.size()).dot(x) + weights.w[x.size()];
}

struct LmsState {
  ReadoutWeights weights;
  double step_size = 0.01;  // mu

  static LmsState init(int n_features, double mu) {
    if (!(mu > 0)) throw invalid_parameter("LmsState: step_size must be > 0");
    return {zero_weights(n_features), mu};
  }
};

struct RlsState {
  ReadoutWeights weights;
  Eigen::MatrixXd p_matrix;   // inverse correlation estimate
  double forgetting = 1.0;    // lambda in (0, 1]
  double init_scale = 1e-4;   // delta; P0 = (1/delta) I

  static RlsState init(int n_features, double lambda, double delta) {
    if (!(lambda > 0 && lambda <= 1.0))
      throw invalid_parameter("RlsState: forgetting must be in (0, 1]");
    if (!(delta > 0)) throw invalid_parameter("RlsState: init_scale must be > 0");
    RlsState s;
    s.weights = zero_weights(n_features);
    s.p_matrix = Eigen::MatrixXd::Identity(n_features + 1, n_features + 1) / delta;
    s.forgetting = lambda;
    s.init_scale = delta;
    return s;
  }
};

// e = d - w^T phi; w <- w + mu e phi. Returns the pre-update error.
inline double lms_update(LmsState& state, const Eigen::VectorXd& x, double target) {
  const double e = target - predict(state.weights, x);
  const Eigen::VectorXd phi = augment(x);
  state.weights.w += state.step_size * e * phi;
  if (!state.weights.w.allFinite())
    throw divergence_error("lms_update (step_size too large?)", -1);
  return e;
}

// k = P phi / (lambda + phi^T P phi); w <- w + k e; P <- (P - k phi^T P) / lambda.
// P is re-symmetrized after every update so drift cannot accumulate.
inline double rls_update(RlsState& state, const Eigen::VectorXd& x, double target) {
  const double e = target - predict(state.weights, x);
  const Eigen::VectorXd phi = augment(x);
  const Eigen::VectorXd p_phi = state.p_matrix * phi;
  const double denom = state.forgetting + phi.dot(p_phi);
  const Eigen::VectorXd k = p_phi / denom;
  state.weights.w += k * e;
  state.p_matrix = (state.p_matrix - k * p_phi.transpose()) / state.forgetting;
  state.p_matrix = 0.5 * (state.p_matrix + state.p_matrix.transpose()).eval();
  if (!state.weights.w.allFinite() || !state.p_matrix.allFinite())
    throw divergence_error("rls_update", -1);
  return e;
}

// Offline oracle: minimizes ||X w - d||^2 + reg ||w||^2. X rows are
// bias-augmented states. reg == 0 with rank-deficient X errors rather than
// pseudo-inverting.
inline ReadoutWeights ridge_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& d,
                                  double reg) {
  if (X.rows() < 1) throw invalid_parameter("ridge_batch: need at least one row");
  if (X.rows() != d.size()) throw invalid_parameter("ridge_batch: X/d row mismatch");
  if (reg < 0) throw invalid_parameter("ridge_batch: reg must be >= 0");

  if (reg == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols())
      throw singular_system("ridge_batch: X is rank deficient and reg == 0");
    return {qr.solve(d)};
  }
  const Eigen::MatrixXd gram =
      X.transpose() * X + reg * Eigen::MatrixXd::Identity(X.cols(), X.cols());
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw singular_system("ridge_batch: normal-equation solve failed");
  return {ldlt.solve(X.transpose() * d)};
}

// Applies the per-sample update in order for t >= washout; earlier steps are
// skipped entirely. Returns the pre-update error for each updated step.
template <typename Trainer>
std::vector<double> train_online(Trainer& trainer, const Eigen::MatrixXd& states,
                                 const Eigen::VectorXd& targets, int washout) {
  const long T = states.rows();
  if (targets.size() != T) throw invalid_parameter("train_online: states/targets mismatch");
  if (washout < 0 || washout >= T)
    throw invalid_parameter("train_online: washout must be in [0, T)");

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(T - washout));
  Eigen::VectorXd row;
  for (long t = washout; t < T; ++t) {
    row = states.row(t);
    double e;
    try {
      if constexpr (std::is_same_v<Trainer, LmsState>)
        e = lms_update(trainer, row, targets[t]);
      else
        e = rls_update(trainer, row, targets[t]);
    } catch (const divergence_error& err) {
      throw divergence_error(err.phase(), t, err.node());
    }
    trace.push_back(e);
  }
  return trace;
}

}  // namespace dfr
