#pragma once

#include <stdexcept>
#include <string>

namespace flakevoc {

// Malformed input, broken data contract, or IO failure. The CLI maps this to
// exit code 2; usage errors exit with 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

} // namespace flakevoc
