#pragma once

#include <stdexcept>
#include <string>

namespace intentguard {

/// Base class for all intentguard errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// graph_model
class SchemaError : public Error {
public:
    using Error::Error;
};
class CycleError : public Error {
public:
    using Error::Error;
};
class DanglingRefError : public Error {
public:
    using Error::Error;
};
class PlaceholderError : public Error {
public:
    using Error::Error;
};

// risk_registry / config files
class ParseError : public Error {
public:
    using Error::Error;
};
class RangeError : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};

// model_gateway
class TransportError : public Error {
public:
    using Error::Error;
};
class MalformedVerdict : public Error {
public:
    using Error::Error;
};
class ModelProtocolError : public Error {
public:
    using Error::Error;
};
class EmbedderError : public Error {
public:
    using Error::Error;
};

// flow_monitor plug-in failures
class PolicyError : public Error {
public:
    using Error::Error;
};
class ExecutorError : public Error {
public:
    using Error::Error;
};

} // namespace intentguard
