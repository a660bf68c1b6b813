#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace voxevo {

/// Input violates an operation's precondition (bad genome, out-of-range action, ...).
class RejectedInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite state appeared while stepping a world.
class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t substep, const std::string& what)
        : std::runtime_error(what), substep_(substep) {}
    std::size_t substep() const noexcept { return substep_; }

private:
    std::size_t substep_;
};

/// Rejection sampling ran out of retries.
class MutationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Persisted data (checkpoint, lineage, logs) is corrupt or incomplete.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace voxevo
