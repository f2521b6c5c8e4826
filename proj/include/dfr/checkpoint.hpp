#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfr/config.hpp"
#include "dfr/errors.hpp"
#include "dfr/readout.hpp"

namespace dfr {

// Readout weights on disk: explicit length plus the value array; quantized
// weights additionally carry exact raws and their format.
inline json weights_to_json(const Eigen::VectorXd& w) {
  json j;
  j["schema"] = kSchemaVersion;
  j["length"] = w.size();
  j["values"] = std::vector<double>(w.data(), w.data() + w.size());
  return j;
}

inline json weights_to_json(const std::vector<std::int64_t>& raw, const QFormat& fmt) {
  json j;
  j["schema"] = kSchemaVersion;
  j["length"] = raw.size();
  j["format"] = qformat_to_json(fmt);
  j["raw"] = raw;
  std::vector<double> values(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) values[i] = FixedVal{raw[i], fmt}.to_real();
  j["values"] = values;
  return j;
}

inline Eigen::VectorXd weights_from_json(const json& j) {
  const auto values = j.at("values").get<std::vector<double>>();
  if (j.at("length").get<std::size_t>() != values.size())
    throw invalid_configuration("weights: length field does not match values");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
}

// Everything a resumed stream needs: weights, trainer state, delay-line
// contents, and the mask identity. Fixed-point state is stored as raw
// integers so resume is bit-exact.
struct StreamCheckpoint {
  RunMode mode = RunMode::Float;
  MaskKind mask_kind = MaskKind::Binary;
  std::uint64_t mask_seed = 0;
  int n_virtual = 0;
  long t = 0;

  // float state
  std::vector<double> delay;
  Eigen::VectorXd weights;
  std::optional<Eigen::MatrixXd> p_matrix;  // RLS only
  double forgetting = 1.0;
  double init_scale = 1e-4;
  double mu = 0.0;  // LMS only

  // quantized state
  std::vector<std::int64_t> delay_raw;
  std::vector<std::int64_t> weights_raw;
  FormatsConfig formats;

  TrainerKind trainer_kind = TrainerKind::Rls;
};

inline json checkpoint_to_json(const StreamCheckpoint& cp) {
  json j;
  j["schema"] = kSchemaVersion;
  j["mode"] = to_string(cp.mode);
  j["mask"] = {{"kind", to_string(cp.mask_kind)}, {"seed", cp.mask_seed}, {"n", cp.n_virtual}};
  j["t"] = cp.t;
  json trainer = {{"kind", to_string(cp.trainer_kind)}};
  if (cp.mode == RunMode::Float) {
    j["delay"] = cp.delay;
    j["weights"] = weights_to_json(cp.weights);
    if (cp.trainer_kind == TrainerKind::Rls) {
      trainer["lambda"] = cp.forgetting;
      trainer["delta"] = cp.init_scale;
      std::vector<std::vector<double>> rows;
      const auto& P = *cp.p_matrix;
      rows.reserve(static_cast<std::size_t>(P.rows()));
      for (long r = 0; r < P.rows(); ++r)
        rows.emplace_back(P.row(r).begin(), P.row(r).end());
      trainer["p_matrix"] = rows;
    } else {
      trainer["mu"] = cp.mu;
    }
  } else {
    j["delay_raw"] = cp.delay_raw;
    j["weights"] = weights_to_json(cp.weights_raw, cp.formats.weight);
    j["formats"] = {{"state", qformat_to_json(cp.formats.state)},
                    {"weight", qformat_to_json(cp.formats.weight)},
                    {"accum", qformat_to_json(cp.formats.accum)}};
    trainer["mu"] = cp.mu;
  }
  j["trainer"] = trainer;
  return j;
}

inline StreamCheckpoint checkpoint_from_json(const json& j) {
  if (j.value("schema", kSchemaVersion) != kSchemaVersion)
    throw invalid_configuration("unsupported checkpoint schema version");
  StreamCheckpoint cp;
  cp.mode = run_mode_from_string(j.at("mode").get<std::string>());
  const json& mask = j.at("mask");
  cp.mask_kind = mask_kind_from_string(mask.at("kind").get<std::string>());
  cp.mask_seed = mask.at("seed").get<std::uint64_t>();
  cp.n_virtual = mask.at("n").get<int>();
  cp.t = j.value("t", 0L);
  const json& trainer = j.at("trainer");
  cp.trainer_kind = trainer_kind_from_string(trainer.at("kind").get<std::string>());
  if (cp.mode == RunMode::Float) {
    cp.delay = j.at("delay").get<std::vector<double>>();
    cp.weights = weights_from_json(j.at("weights"));
    if (cp.trainer_kind == TrainerKind::Rls) {
      cp.forgetting = trainer.at("lambda").get<double>();
      cp.init_scale = trainer.at("delta").get<double>();
      const auto rows = trainer.at("p_matrix").get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd P(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
          P(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
      cp.p_matrix = P;
    } else {
      cp.mu = trainer.at("mu").get<double>();
    }
  } else {
    cp.delay_raw = j.at("delay_raw").get<std::vector<std::int64_t>>();
    const json& w = j.at("weights");
    cp.weights_raw = w.at("raw").get<std::vector<std::int64_t>>();
    const json& fmts = j.at("formats");
    cp.formats.state = qformat_from_json(fmts.at("state"));
    cp.formats.weight = qformat_from_json(fmts.at("weight"));
    cp.formats.accum = qformat_from_json(fmts.at("accum"));
    cp.mu = trainer.at("mu").get<double>();
  }
  return cp;
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw io_error("write failure: " + path);
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw invalid_configuration(std::string("JSON parse error in ") + path + ": " + e.what());
  }
  return j;
}

}  // namespace dfr
