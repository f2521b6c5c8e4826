#pragma once

#include <algorithm>
#include <atomic>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dfr/config.hpp"
#include "dfr/csv.hpp"
#include "dfr/evaluate.hpp"

namespace dfr {

namespace detail {

struct SweepPoint {
  std::optional<int> n_virtual;
  std::optional<double> feedback_gain;
  std::optional<double> input_gain;
  std::optional<int> frac_bits;
};

// frac_bits replaces the state/weight fraction widths, keeping each format's
// integer headroom (total - frac) fixed.
inline RunConfig apply_point(RunConfig cfg, const SweepPoint& p) {
  if (p.n_virtual) cfg.reservoir.n_virtual = *p.n_virtual;
  if (p.feedback_gain) cfg.reservoir.feedback_gain = *p.feedback_gain;
  if (p.input_gain) cfg.reservoir.input_gain = *p.input_gain;
  if (p.frac_bits) {
    const int state_headroom = cfg.formats.state.total_bits - cfg.formats.state.frac_bits;
    const int weight_headroom = cfg.formats.weight.total_bits - cfg.formats.weight.frac_bits;
    cfg.formats.state.frac_bits = *p.frac_bits;
    cfg.formats.state.total_bits = *p.frac_bits + state_headroom;
    cfg.formats.weight.frac_bits = *p.frac_bits;
    cfg.formats.weight.total_bits = *p.frac_bits + weight_headroom;
  }
  return cfg;
}

}  // namespace detail

// Cartesian sweep over the configured axes. Rows are ordered
// lexicographically by axis value (axes sorted ascending), independent of
// execution order or thread count; a diverged point is recorded in-row.
inline void run_sweep(const RunConfig& base, int threads, std::ostream& out) {
  if (!base.sweep || base.sweep->empty())
    throw invalid_configuration("sweep: config has no sweep axes");
  SweepAxes axes = *base.sweep;
  std::sort(axes.n_virtual.begin(), axes.n_virtual.end());
  std::sort(axes.feedback_gain.begin(), axes.feedback_gain.end());
  std::sort(axes.input_gain.begin(), axes.input_gain.end());
  std::sort(axes.frac_bits.begin(), axes.frac_bits.end());

  const bool has_n = !axes.n_virtual.empty();
  const bool has_fb = !axes.feedback_gain.empty();
  const bool has_in = !axes.input_gain.empty();
  const bool has_frac = !axes.frac_bits.empty();

  std::vector<detail::SweepPoint> points;
  for (std::size_t a = 0; a < std::max<std::size_t>(1, axes.n_virtual.size()); ++a)
    for (std::size_t b = 0; b < std::max<std::size_t>(1, axes.feedback_gain.size()); ++b)
      for (std::size_t c = 0; c < std::max<std::size_t>(1, axes.input_gain.size()); ++c)
        for (std::size_t d = 0; d < std::max<std::size_t>(1, axes.frac_bits.size()); ++d) {
          detail::SweepPoint p;
          if (has_n) p.n_virtual = axes.n_virtual[a];
          if (has_fb) p.feedback_gain = axes.feedback_gain[b];
          if (has_in) p.input_gain = axes.input_gain[c];
          if (has_frac) p.frac_bits = axes.frac_bits[d];
          points.push_back(p);
        }

  // one dataset shared read-only across all points
  const Dataset ds = build_dataset(base.task);

  std::vector<std::string> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const RunConfig cfg = detail::apply_point(base, points[i]);
      std::ostringstream row;
      if (points[i].n_virtual) row << *points[i].n_virtual << ',';
      if (points[i].feedback_gain) row << format_real17(*points[i].feedback_gain) << ',';
      if (points[i].input_gain) row << format_real17(*points[i].input_gain) << ',';
      if (points[i].frac_bits) row << *points[i].frac_bits << ',';
      try {
        const MaskVector mask = cfg.make_mask();
        Dataset point_ds = ds;
        apply_split(point_ds, cfg.task.washout_frac, cfg.task.train_frac);
        const EvalReport report =
            evaluate(cfg.reservoir, mask, cfg.trainer, point_ds, cfg.mode, &cfg.formats,
                     cfg.continual);
        row << format_real17(report.metrics.mse) << ',' << format_real17(report.metrics.nmse)
            << ',' << format_real17(report.metrics.nrmse) << ','
            << static_cast<long>(report.duration_ms);
      } catch (const divergence_error&) {
        row << "diverged,diverged,diverged,0";
      }
      rows[i] = row.str();
    }
  };

  const int n_threads = std::max(1, threads);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads) - 1);
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (has_n) out << "n_virtual,";
  if (has_fb) out << "feedback_gain,";
  if (has_in) out << "input_gain,";
  if (has_frac) out << "frac_bits,";
  out << "mse,nmse,nrmse,duration_ms\n";
  for (const auto& r : rows) out << r << '\n';
  if (!out) throw io_error("sweep: output stream failure");
}

}  // namespace dfr
