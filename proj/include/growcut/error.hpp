#pragma once

#include <stdexcept>
#include <string>

namespace growcut {

/// Base of every error raised by the library. `kind()` is a stable tag
/// used by the CLI and service to pick exit codes and HTTP statuses.
class Error : public std::runtime_error {
public:
    enum class Kind {
        Parse,
        UnsupportedGeometry,
        Truncation,
        Io,
        Shape,
        NoSeeds,
        Parameter,
        Bounds,
        Validation,
        UndefinedDistance,
    };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

inline Error parse_error(const std::string& what) { return {Error::Kind::Parse, what}; }
inline Error io_error(const std::string& what) { return {Error::Kind::Io, what}; }
inline Error shape_error(const std::string& what) { return {Error::Kind::Shape, what}; }
inline Error parameter_error(const std::string& what) { return {Error::Kind::Parameter, what}; }
inline Error bounds_error(const std::string& what) { return {Error::Kind::Bounds, what}; }
inline Error validation_error(const std::string& what) { return {Error::Kind::Validation, what}; }

} // namespace growcut
