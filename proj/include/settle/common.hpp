#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace settle {

inline constexpr const char* kVersion = "0.1.0";

// Pinned random source, embedded in every output for re-runnability.
inline constexpr const char* kPrngId = "xoshiro256** seeded via splitmix64, v1";

// Violated precondition or malformed input. CLI maps this to exit code 1.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Work or memory beyond the configured budget. CLI maps this to exit code 2.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

// Budget knobs resolved from the environment, with library defaults.
inline uint64_t env_budget(const char* name, uint64_t fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ContractError(std::string(name) + ": not a valid budget value: " + v);
    }
}

} // namespace detail

} // namespace settle
