#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tunnelkit {

// Schema or precondition violation in user-supplied configuration.
// path() names the offending field, e.g. "barrier.segments[0].w".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& msg)
        : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)), msg_(msg) {}
    const std::string& path() const { return path_; }
    const std::string& message() const { return msg_; }
    ConfigError prefixed(const std::string& prefix) const {
        return ConfigError(path_.empty() ? prefix : prefix + "." + path_, msg_);
    }

private:
    std::string path_;
    std::string msg_;
};

// Numerical failure: non-convergence, ill-conditioning, undefined quantities.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Physics-regime warnings are collected, never printed from library code.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
    if (sink) sink->push_back(std::move(msg));
}

} // namespace tunnelkit
