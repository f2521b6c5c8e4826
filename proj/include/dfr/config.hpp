#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfr/bench.hpp"
#include "dfr/csv.hpp"
#include "dfr/errors.hpp"
#include "dfr/evaluate.hpp"
#include "dfr/nonlinearity.hpp"
#include "dfr/reservoir.hpp"

namespace dfr {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---- enum <-> string ----

inline std::string to_string(MaskKind k) { return k == MaskKind::Binary ? "binary" : "uniform"; }
inline MaskKind mask_kind_from_string(const std::string& s) {
  if (s == "binary") return MaskKind::Binary;
  if (s == "uniform") return MaskKind::Uniform;
  throw invalid_configuration("unknown mask kind: " + s);
}

inline std::string to_string(UpdateMode m) {
  return m == UpdateMode::IdealDelay ? "ideal_delay" : "cascade";
}
inline UpdateMode update_mode_from_string(const std::string& s) {
  if (s == "ideal_delay") return UpdateMode::IdealDelay;
  if (s == "cascade") return UpdateMode::Cascade;
  throw invalid_configuration("unknown update_mode: " + s);
}

inline std::string to_string(TrainerKind k) { return k == TrainerKind::Rls ? "rls" : "lms"; }
inline TrainerKind trainer_kind_from_string(const std::string& s) {
  if (s == "rls") return TrainerKind::Rls;
  if (s == "lms") return TrainerKind::Lms;
  throw invalid_configuration("unknown trainer kind: " + s);
}

inline std::string to_string(RunMode m) { return m == RunMode::Float ? "float" : "quantized"; }
inline RunMode run_mode_from_string(const std::string& s) {
  if (s == "float") return RunMode::Float;
  if (s == "quantized") return RunMode::Quantized;
  throw invalid_configuration("unknown mode: " + s);
}

// ---- QFormat ----

inline json qformat_to_json(const QFormat& f) {
  return {{"total_bits", f.total_bits},
          {"frac_bits", f.frac_bits},
          {"rounding", to_string(f.rounding)},
          {"overflow", to_string(f.overflow)}};
}

inline QFormat qformat_from_json(const json& j) {
  QFormat f;
  f.total_bits = j.value("total_bits", f.total_bits);
  f.frac_bits = j.value("frac_bits", f.frac_bits);
  const std::string rounding = j.value("rounding", "rne");
  if (rounding == "rne")
    f.rounding = Rounding::RoundNearestEven;
  else if (rounding == "truncate")
    f.rounding = Rounding::Truncate;
  else
    throw invalid_configuration("unknown rounding: " + rounding);
  const std::string overflow = j.value("overflow", "saturate");
  if (overflow == "saturate")
    f.overflow = Overflow::Saturate;
  else if (overflow == "wrap")
    f.overflow = Overflow::Wrap;
  else
    throw invalid_configuration("unknown overflow: " + overflow);
  f.validate();
  return f;
}

// ---- nonlinearity ----

struct PwlBuildRecipe {
  std::string base = "tanh";        // tanh | identity | mackey_glass
  double mg_exponent = 1.0;
  int segments = 256;
  double lo = -4.0;
  double hi = 4.0;
};

inline json pwl_table_to_json(const PwlTable& t) {
  return {{"domain_lo", t.domain_lo},
          {"domain_hi", t.domain_hi},
          {"breakpoints", t.breakpoints},
          {"values", t.values}};
}

inline PwlTable pwl_table_from_json(const json& j) {
  PwlTable t;
  t.domain_lo = j.at("domain_lo").get<double>();
  t.domain_hi = j.at("domain_hi").get<double>();
  t.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  t.values = j.at("values").get<std::vector<double>>();
  t.validate();
  return t;
}

// A "pwl" nonlinearity comes either as an explicit table or as a build
// recipe (base function, segment count, domain). The recipe is kept so the
// resolved config stays compact and reproducible.
struct NonlinearityConfig {
  NonlinearitySpec spec;
  std::optional<PwlBuildRecipe> recipe;
};

inline NonlinearitySpec base_spec_from_name(const std::string& name, double mg_exponent) {
  if (name == "tanh") return NonlinearitySpec::tanh();
  if (name == "identity") return NonlinearitySpec::identity();
  if (name == "mackey_glass") return NonlinearitySpec::mackey_glass(mg_exponent);
  throw invalid_configuration("unknown nonlinearity base: " + name);
}

inline NonlinearityConfig nonlinearity_from_json(const json& j) {
  NonlinearityConfig cfg;
  const std::string variant = j.value("variant", "tanh");
  if (variant == "pwl") {
    if (j.contains("build")) {
      const json& b = j.at("build");
      PwlBuildRecipe r;
      r.base = b.value("base", r.base);
      r.mg_exponent = b.value("mg_exponent", r.mg_exponent);
      r.segments = b.value("segments", r.segments);
      r.lo = b.value("lo", r.lo);
      r.hi = b.value("hi", r.hi);
      cfg.spec = NonlinearitySpec::piecewise(
          build_pwl(base_spec_from_name(r.base, r.mg_exponent), r.segments, r.lo, r.hi));
      cfg.recipe = r;
    } else if (j.contains("pwl")) {
      cfg.spec = NonlinearitySpec::piecewise(pwl_table_from_json(j.at("pwl")));
    } else {
      throw invalid_configuration("pwl nonlinearity needs a 'pwl' table or 'build' recipe");
    }
  } else {
    cfg.spec = base_spec_from_name(variant, j.value("mg_exponent", 1.0));
  }
  return cfg;
}

inline json nonlinearity_to_json(const NonlinearityConfig& cfg) {
  json j;
  j["variant"] = to_string(cfg.spec.variant);
  switch (cfg.spec.variant) {
    case Nonlinearity::MackeyGlass:
      j["mg_exponent"] = cfg.spec.mg_exponent;
      break;
    case Nonlinearity::PiecewiseLinear:
      if (cfg.recipe) {
        j["build"] = {{"base", cfg.recipe->base},
                      {"mg_exponent", cfg.recipe->mg_exponent},
                      {"segments", cfg.recipe->segments},
                      {"lo", cfg.recipe->lo},
                      {"hi", cfg.recipe->hi}};
      } else {
        j["pwl"] = pwl_table_to_json(cfg.spec.pwl);
      }
      break;
    default:
      break;
  }
  return j;
}

// ---- task / output / sweep ----

struct TaskConfig {
  std::string name = "narma10";  // narma10 | mackey-glass | csv:<path>
  int length = 4000;
  std::uint64_t seed = 1;
  double washout_frac = 0.05;
  double train_frac = 0.75;
  int horizon = 1;  // mackey-glass
  MackeyGlassParams mg;
};

struct OutputConfig {
  std::string report = "-";  // "-" = stdout
  std::string weights;       // empty = do not write
};

struct SweepAxes {
  std::vector<int> n_virtual;
  std::vector<double> feedback_gain;
  std::vector<double> input_gain;
  std::vector<int> frac_bits;

  bool empty() const {
    return n_virtual.empty() && feedback_gain.empty() && input_gain.empty() &&
           frac_bits.empty();
  }
};

struct RunConfig {
  ReservoirParams reservoir;
  NonlinearityConfig nonlinearity;
  MaskKind mask_kind = MaskKind::Binary;
  std::uint64_t mask_seed = 1;
  TrainerConfig trainer;
  RunMode mode = RunMode::Float;
  FormatsConfig formats;
  TaskConfig task;
  OutputConfig output;
  bool continual = false;
  std::optional<SweepAxes> sweep;

  MaskVector make_mask() const {
    return new_mask(reservoir.n_virtual, mask_kind, mask_seed);
  }

  void validate() const {
    reservoir.validate();
    if (!(trainer.forgetting > 0 && trainer.forgetting <= 1.0))
      throw invalid_configuration("trainer.lambda must be in (0, 1]");
    if (!(trainer.init_scale > 0)) throw invalid_configuration("trainer.delta must be > 0");
    if (trainer.step_size && !(*trainer.step_size > 0))
      throw invalid_configuration("trainer.mu must be > 0");
    if (mode == RunMode::Quantized) {
      if (reservoir.nonlinearity.variant != Nonlinearity::PiecewiseLinear &&
          reservoir.nonlinearity.variant != Nonlinearity::Identity)
        throw invalid_configuration(
            "quantized mode requires a piecewise-linear or identity nonlinearity");
      if (trainer.kind != TrainerKind::Lms)
        throw invalid_configuration("quantized mode trains with LMS only");
      formats.state.validate();
      formats.weight.validate();
      formats.accum.validate();
      check_accum_width(formats.weight, formats.accum);
    }
    if (!(task.washout_frac >= 0 && task.train_frac > 0 &&
          task.washout_frac + task.train_frac < 1.0))
      throw invalid_configuration("task split fractions must leave room for a test segment");
  }
};

inline RunConfig config_from_json(const json& j) {
  if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion)
    throw invalid_configuration("unsupported config schema version");

  RunConfig cfg;
  if (j.contains("reservoir")) {
    const json& r = j.at("reservoir");
    cfg.reservoir.n_virtual = r.value("n_virtual", cfg.reservoir.n_virtual);
    cfg.reservoir.feedback_gain = r.value("feedback_gain", cfg.reservoir.feedback_gain);
    cfg.reservoir.input_gain = r.value("input_gain", cfg.reservoir.input_gain);
    cfg.reservoir.update_mode =
        update_mode_from_string(r.value("update_mode", std::string("ideal_delay")));
    cfg.reservoir.cascade_coupling = r.value("cascade_coupling", cfg.reservoir.cascade_coupling);
    if (r.contains("nonlinearity")) cfg.nonlinearity = nonlinearity_from_json(r.at("nonlinearity"));
    if (r.contains("mask")) {
      cfg.mask_kind = mask_kind_from_string(r.at("mask").value("kind", std::string("binary")));
      cfg.mask_seed = r.at("mask").value("seed", cfg.mask_seed);
    }
  }
  cfg.reservoir.nonlinearity = cfg.nonlinearity.spec;

  if (j.contains("trainer")) {
    const json& t = j.at("trainer");
    cfg.trainer.kind = trainer_kind_from_string(t.value("kind", std::string("rls")));
    cfg.trainer.forgetting = t.value("lambda", cfg.trainer.forgetting);
    cfg.trainer.init_scale = t.value("delta", cfg.trainer.init_scale);
    if (t.contains("mu") && !t.at("mu").is_null())
      cfg.trainer.step_size = t.at("mu").get<double>();
  }

  cfg.mode = run_mode_from_string(j.value("mode", std::string("float")));
  if (j.contains("formats")) {
    const json& f = j.at("formats");
    if (f.contains("state")) cfg.formats.state = qformat_from_json(f.at("state"));
    if (f.contains("weight")) cfg.formats.weight = qformat_from_json(f.at("weight"));
    if (f.contains("accum")) cfg.formats.accum = qformat_from_json(f.at("accum"));
  }

  if (j.contains("task")) {
    const json& t = j.at("task");
    cfg.task.name = t.value("name", cfg.task.name);
    cfg.task.length = t.value("length", cfg.task.length);
    cfg.task.seed = t.value("seed", cfg.task.seed);
    cfg.task.washout_frac = t.value("washout_frac", cfg.task.washout_frac);
    cfg.task.train_frac = t.value("train_frac", cfg.task.train_frac);
    cfg.task.horizon = t.value("horizon", cfg.task.horizon);
    if (t.contains("mg")) {
      const json& mg = t.at("mg");
      cfg.task.mg.beta = mg.value("beta", cfg.task.mg.beta);
      cfg.task.mg.gamma = mg.value("gamma", cfg.task.mg.gamma);
      cfg.task.mg.n = mg.value("n", cfg.task.mg.n);
      cfg.task.mg.tau = mg.value("tau", cfg.task.mg.tau);
      cfg.task.mg.dt = mg.value("dt", cfg.task.mg.dt);
      cfg.task.mg.subsample = mg.value("subsample", cfg.task.mg.subsample);
    }
  }

  if (j.contains("output")) {
    cfg.output.report = j.at("output").value("report", cfg.output.report);
    cfg.output.weights = j.at("output").value("weights", cfg.output.weights);
  }

  cfg.continual = j.value("continual", false);

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepAxes axes;
    axes.n_virtual = s.value("n_virtual", axes.n_virtual);
    axes.feedback_gain = s.value("feedback_gain", axes.feedback_gain);
    axes.input_gain = s.value("input_gain", axes.input_gain);
    axes.frac_bits = s.value("frac_bits", axes.frac_bits);
    cfg.sweep = axes;
  }

  cfg.validate();
  return cfg;
}

// Full-default expansion: every field present, so a run is reproducible from
// the echoed config alone.
inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["schema"] = kSchemaVersion;
  j["reservoir"] = {{"n_virtual", cfg.reservoir.n_virtual},
                    {"feedback_gain", cfg.reservoir.feedback_gain},
                    {"input_gain", cfg.reservoir.input_gain},
                    {"update_mode", to_string(cfg.reservoir.update_mode)},
                    {"cascade_coupling", cfg.reservoir.cascade_coupling},
                    {"nonlinearity", nonlinearity_to_json(cfg.nonlinearity)},
                    {"mask", {{"kind", to_string(cfg.mask_kind)}, {"seed", cfg.mask_seed}}}};
  j["trainer"] = {{"kind", to_string(cfg.trainer.kind)},
                  {"lambda", cfg.trainer.forgetting},
                  {"delta", cfg.trainer.init_scale},
                  {"mu", cfg.trainer.step_size ? json(*cfg.trainer.step_size) : json(nullptr)}};
  j["mode"] = to_string(cfg.mode);
  j["formats"] = {{"state", qformat_to_json(cfg.formats.state)},
                  {"weight", qformat_to_json(cfg.formats.weight)},
                  {"accum", qformat_to_json(cfg.formats.accum)}};
  j["task"] = {{"name", cfg.task.name},
               {"length", cfg.task.length},
               {"seed", cfg.task.seed},
               {"washout_frac", cfg.task.washout_frac},
               {"train_frac", cfg.task.train_frac},
               {"horizon", cfg.task.horizon},
               {"mg",
                {{"beta", cfg.task.mg.beta},
                 {"gamma", cfg.task.mg.gamma},
                 {"n", cfg.task.mg.n},
                 {"tau", cfg.task.mg.tau},
                 {"dt", cfg.task.mg.dt},
                 {"subsample", cfg.task.mg.subsample}}}};
  j["output"] = {{"report", cfg.output.report}, {"weights", cfg.output.weights}};
  j["continual"] = cfg.continual;
  if (cfg.sweep)
    j["sweep"] = {{"n_virtual", cfg.sweep->n_virtual},
                  {"feedback_gain", cfg.sweep->feedback_gain},
                  {"input_gain", cfg.sweep->input_gain},
                  {"frac_bits", cfg.sweep->frac_bits}};
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_configuration(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

// Builds the task's dataset with the configured split.
inline Dataset build_dataset(const TaskConfig& task) {
  Dataset ds;
  if (task.name == "narma10") {
    ds = gen_narma10(task.length, task.seed);
  } else if (task.name == "mackey-glass") {
    ds = gen_mackey_glass(task.length, task.horizon, task.mg);
  } else if (task.name.rfind("csv:", 0) == 0) {
    ds = read_dataset_csv(task.name.substr(4));
  } else {
    throw invalid_configuration("unknown task: " + task.name);
  }
  apply_split(ds, task.washout_frac, task.train_frac);
  return ds;
}

}  // namespace dfr
