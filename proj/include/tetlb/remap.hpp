#pragma once

// Subgrid -> process remapping.
//
// S(i, j) is the weight owned by old process i that the new partition puts in
// subgrid j. A permutation perm places subgrid j on process perm[j]; the weight
// that stays put is F = sum_j S(perm[j], j), and maximizing F minimizes the
// total migrated weight TotalV = sum(S) - F.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/partition.hpp"

namespace tetlb {

class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(int p_old, int p) : p_old_(p_old), p_(p), s_(static_cast<std::size_t>(p_old) * p, 0.0) {
        detail::require(p_old >= 1 && p >= 1, errc::invalid_argument, "matrix dimensions must be positive");
    }
    /// Square matrix from rows of equal length.
    static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        detail::require(!rows.empty() && !rows.front().empty(), errc::invalid_argument, "empty matrix");
        SimilarityMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
        for (int i = 0; i < m.p_old_; ++i) {
            detail::require(rows[i].size() == static_cast<std::size_t>(m.p_), errc::invalid_argument,
                            "ragged matrix rows");
            for (int j = 0; j < m.p_; ++j) {
                detail::require(rows[i][j] >= 0.0, errc::invalid_argument, "negative matrix entry");
                m(i, j) = rows[i][j];
            }
        }
        return m;
    }

    int p_old() const { return p_old_; }
    int p() const { return p_; }
    bool square() const { return p_old_ == p_; }

    double& operator()(int i, int j) { return s_[static_cast<std::size_t>(i) * p_ + j]; }
    double operator()(int i, int j) const { return s_[static_cast<std::size_t>(i) * p_ + j]; }

    double total() const {
        double sum = 0.0;
        for (double v : s_) sum += v;
        return sum;
    }
    double row_sum(int i) const {
        double sum = 0.0;
        for (int j = 0; j < p_; ++j) sum += (*this)(i, j);
        return sum;
    }
    double column_sum(int j) const {
        double sum = 0.0;
        for (int i = 0; i < p_old_; ++i) sum += (*this)(i, j);
        return sum;
    }

    friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

private:
    int p_old_ = 0;
    int p_ = 0;
    std::vector<double> s_;
};

/// perm[j] = process hosting new subgrid j.
using RemapPermutation = std::vector<int>;

inline RemapPermutation identity_permutation(int p) {
    RemapPermutation perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), 0);
    return perm;
}

inline bool is_permutation_of(std::span<const int> perm, int p) {
    if (perm.size() != static_cast<std::size_t>(p)) return false;
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (int v : perm) {
        if (v < 0 || v >= p || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

/// Rows are old owners, columns new subgrids. Both assignments must cover the
/// same elements; `weights` is indexed by element id.
inline SimilarityMatrix build_similarity(const PartitionAssignment& old_parts,
                                         const PartitionAssignment& new_parts,
                                         std::span<const double> weights) {
    SimilarityMatrix s(old_parts.p, new_parts.p);
    const std::size_t n = std::max(old_parts.part_of.size(), new_parts.part_of.size());
    for (std::size_t e = 0; e < n; ++e) {
        const auto id = static_cast<ElementId>(e);
        const bool in_old = old_parts.assigned(id);
        const bool in_new = new_parts.assigned(id);
        if (in_old != in_new) {
            detail::fail(errc::invalid_argument,
                         "element " + std::to_string(e) + " is covered by only one assignment");
        }
        if (!in_old) continue;
        const int i = old_parts.part_of[e];
        const int j = new_parts.part_of[e];
        detail::require(i < old_parts.p && j < new_parts.p, errc::invalid_argument, "part id out of range");
        detail::require(e < weights.size(), errc::invalid_argument, "missing element weight");
        s(i, j) += weights[e];
    }
    return s;
}

/// Retained weight F = sum_j S(perm[j], j).
inline double cost_F(const SimilarityMatrix& s, std::span<const int> perm) {
    detail::require(s.square() && is_permutation_of(perm, s.p()), errc::invalid_argument,
                    "remapping is not a permutation of the processes");
    double f = 0.0;
    for (int j = 0; j < s.p(); ++j) f += s(perm[j], j);
    return f;
}

/// Greedy matching in the style of Oliker and Biswas: visit entries by
/// descending S(i, j) (ties: ascending i, then j) and place subgrid j on
/// process i when both are still free; leftovers are paired in ascending
/// order. The result is never worse than the identity placement.
inline RemapPermutation remap_greedy(const SimilarityMatrix& s) {
    detail::require(s.square(), errc::invalid_argument, "similarity matrix must be square");
    const int p = s.p();
    std::vector<std::tuple<double, int, int>> entries;
    entries.reserve(static_cast<std::size_t>(p) * p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) entries.emplace_back(s(i, j), i, j);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::pair(std::get<1>(a), std::get<2>(a)) < std::pair(std::get<1>(b), std::get<2>(b));
    });
    RemapPermutation perm(static_cast<std::size_t>(p), -1);
    std::vector<bool> process_taken(static_cast<std::size_t>(p), false);
    for (const auto& [value, i, j] : entries) {
        (void)value;
        if (process_taken[i] || perm[j] >= 0) continue;
        process_taken[i] = true;
        perm[j] = i;
    }
    int next_free = 0;
    for (int j = 0; j < p; ++j) {
        if (perm[j] >= 0) continue;
        while (process_taken[next_free]) ++next_free;
        process_taken[next_free] = true;
        perm[j] = next_free;
    }
    const RemapPermutation identity = identity_permutation(p);
    return cost_F(s, perm) >= cost_F(s, identity) ? perm : identity;
}

inline constexpr int remap_exact_limit = 10;

/// F-maximizing permutation (Hungarian assignment on -S), p <= 10.
inline RemapPermutation remap_exact(const SimilarityMatrix& s) {
    detail::require(s.square(), errc::invalid_argument, "similarity matrix must be square");
    const int p = s.p();
    if (p > remap_exact_limit) {
        detail::fail(errc::unsupported, "exact remapping is limited to p <= 10");
    }
    // Potentials formulation, 1-based with a sentinel column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(p + 1, 0.0), v(p + 1, 0.0), minv(p + 1);
    std::vector<int> match(p + 1, 0), way(p + 1, 0);
    std::vector<bool> used(p + 1);
    for (int row = 1; row <= p; ++row) {
        match[0] = row;
        int col0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[col0] = true;
            const int i0 = match[col0];
            double delta = inf;
            int col1 = 0;
            for (int j = 1; j <= p; ++j) {
                if (used[j]) continue;
                const double cur = -s(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for (int j = 0; j <= p; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
        } while (match[col0] != 0);
        do {
            const int col1 = way[col0];
            match[col0] = match[col1];
            col0 = col1;
        } while (col0 != 0);
    }
    RemapPermutation perm(static_cast<std::size_t>(p));
    for (int j = 1; j <= p; ++j) perm[j - 1] = match[j] - 1;
    return perm;
}

struct MigrationStats {
    double totalv = 0.0;
    double maxv = 0.0;

    friend bool operator==(const MigrationStats&, const MigrationStats&) = default;
};

/// TotalV = sum(S) - F. MaxV = max over processes q of send_q + recv_q, where
/// send_q is the weight q owned before minus what it keeps and recv_q is the
/// weight of the subgrid placed on q minus what q already had of it.
inline MigrationStats migration_stats(const SimilarityMatrix& s, std::span<const int> perm) {
    const double f = cost_F(s, perm);
    MigrationStats out;
    out.totalv = s.total() - f;
    for (int j = 0; j < s.p(); ++j) {
        const int q = perm[j];
        const double kept = s(q, j);
        const double send = s.row_sum(q) - kept;
        const double recv = s.column_sum(j) - kept;
        out.maxv = std::max(out.maxv, send + recv);
    }
    return out;
}

/// Relabels a subgrid assignment into process ids: element e goes to perm[part(e)].
inline PartitionAssignment apply_permutation(const PartitionAssignment& parts, std::span<const int> perm) {
    detail::require(is_permutation_of(perm, parts.p), errc::invalid_argument,
                    "remapping is not a permutation of the processes");
    PartitionAssignment out = parts;
    for (auto& v : out.part_of) {
        if (v >= 0) v = perm[v];
    }
    return out;
}

} // namespace tetlb
