#pragma once

#include <stdexcept>
#include <string>

namespace hpst {

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& msg) : std::runtime_error("shape mismatch: " + msg) {}
};

struct MalformedRecord : std::runtime_error {
    size_t line_no;
    MalformedRecord(size_t line, const std::string& msg)
        : std::runtime_error("malformed record at line " + std::to_string(line) + ": " + msg),
          line_no(line) {}
};

struct VersionMismatch : std::runtime_error {
    explicit VersionMismatch(int got)
        : std::runtime_error("unknown format_version " + std::to_string(got)) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error("io error: " + msg) {}
};

struct DegenerateEvent : std::runtime_error {
    explicit DegenerateEvent(const std::string& msg) : std::runtime_error("degenerate event: " + msg) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& msg) : std::runtime_error("non-finite value: " + msg) {}
};

struct NonFiniteGradient : std::runtime_error {
    explicit NonFiniteGradient(const std::string& msg) : std::runtime_error("non-finite gradient: " + msg) {}
};

struct NonFiniteCost : std::runtime_error {
    explicit NonFiniteCost(const std::string& msg) : std::runtime_error("non-finite cost: " + msg) {}
};

struct NonFiniteLoss : std::runtime_error {
    explicit NonFiniteLoss(const std::string& msg) : std::runtime_error("non-finite loss: " + msg) {}
};

struct LabelOutOfRange : std::runtime_error {
    explicit LabelOutOfRange(const std::string& msg) : std::runtime_error("label out of range: " + msg) {}
};

struct TooManyInstances : std::runtime_error {
    explicit TooManyInstances(const std::string& msg) : std::runtime_error("too many instances: " + msg) {}
};

struct RecordMismatch : std::runtime_error {
    explicit RecordMismatch(const std::string& msg) : std::runtime_error("pool record mismatch: " + msg) {}
};

struct CorruptCheckpoint : std::runtime_error {
    explicit CorruptCheckpoint(const std::string& msg) : std::runtime_error("corrupt checkpoint: " + msg) {}
};

struct ConfigMismatch : std::runtime_error {
    explicit ConfigMismatch(const std::string& msg) : std::runtime_error("config mismatch: " + msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct DegenerateInput : std::runtime_error {
    explicit DegenerateInput(const std::string& msg) : std::runtime_error("degenerate input: " + msg) {}
};

}  // namespace hpst
