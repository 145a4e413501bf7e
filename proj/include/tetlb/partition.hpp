#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"

namespace tetlb {

/// Element -> part map for `p` parts; indexed by element id, -1 = unassigned.
struct PartitionAssignment {
    int p = 1;
    std::vector<std::int32_t> part_of;

    PartitionAssignment() = default;
    PartitionAssignment(int parts, std::size_t capacity) : p(parts), part_of(capacity, -1) {}

    bool assigned(ElementId id) const { return id < part_of.size() && part_of[id] >= 0; }
    int part(ElementId id) const {
        if (!assigned(id)) detail::fail(errc::not_found, "element " + std::to_string(id) + " has no part");
        return part_of[id];
    }
    void assign(ElementId id, int part) {
        if (id >= part_of.size()) part_of.resize(static_cast<std::size_t>(id) + 1, -1);
        part_of[id] = part;
    }

    friend bool operator==(const PartitionAssignment& a, const PartitionAssignment& b) {
        if (a.p != b.p) return false;
        const std::size_t n = std::max(a.part_of.size(), b.part_of.size());
        for (std::size_t i = 0; i < n; ++i) {
            const int x = i < a.part_of.size() ? a.part_of[i] : -1;
            const int y = i < b.part_of.size() ? b.part_of[i] : -1;
            if (x != y) return false;
        }
        return true;
    }
};

/// True when prefix weight `s` has reached the start W*i/p of part i.
/// Compared as s*p >= W*i, exact whenever weights are integers below 2^53/p.
inline bool reaches_part(double s, double total, int i, int p) {
    return s * static_cast<double>(p) >= total * static_cast<double>(i);
}

/// Part owning prefix weight `s` under the half-open rule [W i/p, W (i+1)/p),
/// clamped to p-1.
inline int part_for_prefix(double s, double total, int p) {
    int part = static_cast<int>(std::floor(s * static_cast<double>(p) / total));
    part = std::clamp(part, 0, p - 1);
    while (part > 0 && !reaches_part(s, total, part, p)) --part;
    while (part + 1 < p && reaches_part(s, total, part + 1, p)) ++part;
    return part;
}

} // namespace tetlb
