#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace crflab {

using VertexId = std::uint32_t;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised for malformed user input (bad files, out-of-range parameters).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when metric data produces a triangle that cannot be realized.
class DegenerateTriangle : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by numerical procedures that fail to produce a result
/// (step underflow, bisection without a bracket, placement failure).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Worker cap: CRFLAB_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("CRFLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v) < hw ? static_cast<unsigned>(v) : hw;
    }
    return hw;
}

} // namespace crflab
