#pragma once

#include <stdexcept>
#include <string>

namespace stackqa {

// Bad content: malformed JSON, schema violations, out-of-range values.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failures: missing files, unwritable paths.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stackqa
