#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dfr/bench.hpp"
#include "dfr/errors.hpp"

namespace dfr {

// Round-trip exact for doubles.
inline std::string format_real17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  out << "t,input,target\n";
  for (std::size_t t = 0; t < ds.inputs.size(); ++t)
    out << t << ',' << format_real17(ds.inputs[t]) << ',' << format_real17(ds.targets[t])
        << '\n';
  if (!out) throw io_error("write_dataset_csv: stream failure");
}

inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_dataset_csv(out, ds);
  out.flush();
  if (!out) throw io_error("write failure: " + path);
}

// Split indices are left at defaults; the caller applies its own.
inline Dataset read_dataset_csv(std::istream& in) {
  Dataset ds;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,input,target", 0) != 0)
    throw io_error("dataset CSV: missing t,input,target header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t_field, u_field, d_field;
    if (!std::getline(row, t_field, ',') || !std::getline(row, u_field, ',') ||
        !std::getline(row, d_field))
      throw io_error("dataset CSV: malformed row: " + line);
    try {
      ds.inputs.push_back(std::stod(u_field));
      ds.targets.push_back(std::stod(d_field));
    } catch (const std::exception&) {
      throw io_error("dataset CSV: non-numeric row: " + line);
    }
  }
  return ds;
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open for reading: " + path);
  return read_dataset_csv(in);
}

}  // namespace dfr
