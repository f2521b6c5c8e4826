#pragma once

#include <optional>
#include <variant>

#include "dfr/checkpoint.hpp"
#include "dfr/config.hpp"
#include "dfr/errors.hpp"
#include "dfr/evaluate.hpp"
#include "dfr/quantized.hpp"

namespace dfr {

// Per-line engine behind `stream`: advance one step and predict with the
// current weights; apply one online update when a target arrives. Uses the
// exact step/predict/update routines of the batch path, so stream and batch
// agree sample for sample.
class StreamSession {
public:
  explicit StreamSession(const RunConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    mask_ = cfg.make_mask();
    if (cfg.mode == RunMode::Quantized) {
      if (!cfg.trainer.step_size)
        throw invalid_configuration("stream: quantized LMS requires an explicit trainer.mu");
      quantized_.emplace(cfg.reservoir, mask_, cfg.formats.state, cfg.formats.weight);
      q_weights_ = QReadout::zeros(cfg.reservoir.n_virtual, cfg.formats.weight);
      mu_ = *cfg.trainer.step_size;
    } else {
      delay_ = DelayLine(cfg.reservoir.n_virtual);
      if (cfg.trainer.kind == TrainerKind::Lms) {
        if (!cfg.trainer.step_size)
          throw invalid_configuration("stream: LMS requires an explicit trainer.mu");
        mu_ = *cfg.trainer.step_size;
        trainer_ = LmsState::init(cfg.reservoir.n_virtual, mu_);
      } else {
        trainer_ = RlsState::init(cfg.reservoir.n_virtual, cfg.trainer.forgetting,
                                  cfg.trainer.init_scale);
      }
    }
  }

  StreamSession(const RunConfig& cfg, const StreamCheckpoint& cp) : StreamSession(cfg) {
    if (cp.mode != cfg.mode) throw invalid_configuration("checkpoint/config mode mismatch");
    if (cp.n_virtual != cfg.reservoir.n_virtual)
      throw invalid_configuration("checkpoint/config n_virtual mismatch");
    if (cp.mask_kind != cfg.mask_kind || cp.mask_seed != cfg.mask_seed)
      throw invalid_configuration("checkpoint/config mask mismatch");
    if (cp.trainer_kind != cfg.trainer.kind)
      throw invalid_configuration("checkpoint/config trainer mismatch");
    if (cfg.mode == RunMode::Quantized) {
      if (cp.weights_raw.size() != q_weights_.w_raw.size())
        throw invalid_configuration("checkpoint weight size mismatch");
      q_weights_.w_raw = cp.weights_raw;
      quantized_->state_raw() = cp.delay_raw;
      quantized_->set_t(cp.t);
      mu_ = cp.mu;
    } else {
      if (cp.delay.size() != delay_.buffer.size())
        throw invalid_configuration("checkpoint delay size mismatch");
      delay_.buffer = cp.delay;
      delay_.t = cp.t;
      if (auto* rls = std::get_if<RlsState>(&trainer_)) {
        rls->weights.w = cp.weights;
        rls->p_matrix = *cp.p_matrix;
        rls->forgetting = cp.forgetting;
        rls->init_scale = cp.init_scale;
      } else {
        auto& lms = std::get<LmsState>(trainer_);
        lms.weights.w = cp.weights;
        lms.step_size = cp.mu;
        mu_ = cp.mu;
      }
    }
  }

  // Advance one input step; returns the prediction made with the weights as
  // they stand (pre-update).
  double step_predict(double u) {
    if (quantized_) {
      const auto& raw = quantized_->step(u);
      last_q_state_ = raw;
      return predict_q(q_weights_, raw, cfg_.formats.state, cfg_.formats.accum).to_real();
    }
    last_state_ = step(cfg_.reservoir, mask_, delay_, u).x;
    return std::visit([&](const auto& s) { return predict(s.weights, last_state_); }, trainer_);
  }

  // One online update against the state produced by the last step_predict.
  void update(double target) {
    if (quantized_) {
      const FixedVal mu_accum = quantize(mu_, cfg_.formats.accum);
      qlms_update(q_weights_, last_q_state_, cfg_.formats.state, cfg_.formats.accum, mu_accum,
                  target);
      return;
    }
    std::visit(
        [&](auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, LmsState>)
            lms_update(s, last_state_, target);
          else
            rls_update(s, last_state_, target);
        },
        trainer_);
  }

  long t() const { return quantized_ ? quantized_->t() : delay_.t; }

  StreamCheckpoint checkpoint() const {
    StreamCheckpoint cp;
    cp.mode = cfg_.mode;
    cp.mask_kind = cfg_.mask_kind;
    cp.mask_seed = cfg_.mask_seed;
    cp.n_virtual = cfg_.reservoir.n_virtual;
    cp.trainer_kind = cfg_.trainer.kind;
    if (quantized_) {
      cp.t = quantized_->t();
      cp.delay_raw = quantized_->state_raw();
      cp.weights_raw = q_weights_.w_raw;
      cp.formats = cfg_.formats;
      cp.mu = mu_;
    } else {
      cp.t = delay_.t;
      cp.delay = delay_.buffer;
      if (const auto* rls = std::get_if<RlsState>(&trainer_)) {
        cp.weights = rls->weights.w;
        cp.p_matrix = rls->p_matrix;
        cp.forgetting = rls->forgetting;
        cp.init_scale = rls->init_scale;
      } else {
        const auto& lms = std::get<LmsState>(trainer_);
        cp.weights = lms.weights.w;
        cp.mu = lms.step_size;
      }
    }
    return cp;
  }

private:
  RunConfig cfg_;
  MaskVector mask_;

  // float path
  DelayLine delay_;
  std::variant<RlsState, LmsState> trainer_;
  Eigen::VectorXd last_state_;

  // quantized path
  std::optional<QuantizedReservoir> quantized_;
  QReadout q_weights_;
  std::vector<std::int64_t> last_q_state_;
  double mu_ = 0.0;
};

}  // namespace dfr
