#pragma once

#include <stdexcept>
#include <string>

namespace rotodop {

// Root of every error raised by the library. Each subclass names one
// failure mode so callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DegenerateRadius : public Error {
public:
    using Error::Error;
};

class DegenerateCharges : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class GridTooCoarse : public Error {
public:
    using Error::Error;
};

class NotSinglePeaked : public Error {
public:
    using Error::Error;
};

class HalfMaxNotBracketed : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& message, int line = 0, std::string key = {})
        : Error(format(message, line, key)), line_(line), key_(std::move(key)) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& message, int line, const std::string& key) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!key.empty()) out += "key '" + key + "': ";
        return out + message;
    }

    int line_;
    std::string key_;
};

} // namespace rotodop
