#pragma once

#include <stdexcept>
#include <string>

namespace dfr {

class invalid_parameter : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class invalid_configuration : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Non-finite value produced inside a run. Carries where it happened.
class divergence_error : public std::runtime_error {
public:
  divergence_error(std::string phase, long step, long node = -1)
      : std::runtime_error(make_message(phase, step, node)),
        phase_(std::move(phase)), step_(step), node_(node) {}

  const std::string& phase() const noexcept { return phase_; }
  long step() const noexcept { return step_; }
  long node() const noexcept { return node_; }

private:
  static std::string make_message(const std::string& phase, long step, long node) {
    std::string msg = "divergence in " + phase + " at step " + std::to_string(step);
    if (node >= 0) msg += ", node " + std::to_string(node);
    return msg;
  }

  std::string phase_;
  long step_;
  long node_;
};

class singular_system : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class degenerate_target : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfr
