#pragma once

#include <stdexcept>
#include <string>

namespace fsqkd {

/// Configuration and schema problems. The CLI maps these to exit code 2;
/// model/domain errors (std::domain_error) map to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void check_positive(double v, const char* name) {
    if (!(v > 0.0)) throw std::domain_error(std::string(name) + " must be > 0");
}

inline void check_nonnegative(double v, const char* name) {
    if (!(v >= 0.0)) throw std::domain_error(std::string(name) + " must be >= 0");
}

inline void check_unit_interval(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error(std::string(name) + " must be in [0, 1]");
}

} // namespace fsqkd
