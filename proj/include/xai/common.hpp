#ifndef XAI_COMMON_HPP
#define XAI_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xai {

/// Base class for all library errors; the message names the failing stage.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// splitmix64 mix step; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-seed for (seed, index) pairs, so per-instance and
/// per-repeat work can run in any order with identical results.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    return mix_seed(seed ^ mix_seed(index));
}

/// Serializes a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace xai

#endif
