#pragma once

#include <stdexcept>
#include <string>

namespace wasslip {

// Shapes of vectors/matrices/point sets disagree.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Norm pairing that the operation does not implement (e.g. L1 -> L2 operator norm).
class UnsupportedNormError : public std::invalid_argument {
public:
    explicit UnsupportedNormError(const std::string& what) : std::invalid_argument(what) {}
};

// Transport problem admits no coupling of finite cost.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// Every sampled pair was degenerate, nothing to estimate from.
class SamplingError : public std::runtime_error {
public:
    explicit SamplingError(const std::string& what) : std::runtime_error(what) {}
};

// NaN/Inf showed up where a finite value is required, or an iteration diverged.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration or input-file problem. `path` names the offending field, e.g. "robust.rho".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace wasslip
