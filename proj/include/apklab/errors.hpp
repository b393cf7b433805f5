#pragma once

#include <stdexcept>
#include <string>

namespace apklab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parse/usage failure carrying a 1-based line number (-1 when not line-bound).
class ConfigError : public Error {
public:
    ConfigError(const std::string& msg, int line = -1)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line = -1)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class DeviceError : public Error {
public:
    using Error::Error;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class NotImplementedError : public Error {
public:
    using Error::Error;
};

}  // namespace apklab
