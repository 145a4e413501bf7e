#pragma once

#include <span>
#include <vector>

namespace tetlb {

/// Exclusive prefix over virtual ranks: rank r receives the sum of values[0..r).
/// Summation runs strictly left to right so the result never depends on how
/// the caller was parallelized.
template <class T>
std::vector<T> scan_emulate(std::span<const T> values) {
    std::vector<T> out(values.size(), T{});
    T running{};
    for (std::size_t r = 0; r < values.size(); ++r) {
        out[r] = running;
        running += values[r];
    }
    return out;
}

template <class T>
std::vector<T> scan_emulate(const std::vector<T>& values) {
    return scan_emulate(std::span<const T>(values));
}

} // namespace tetlb
