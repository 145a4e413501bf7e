#pragma once

// Test-only generators and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "tetlb/mesh.hpp"
#include "tetlb/rtree.hpp"

namespace tetlb::testing {

/// Forest over `roots` initial elements grown by `bisections` random splits.
/// Element ids are handed out consecutively after the roots.
inline RefinementForest random_forest(std::mt19937_64& rng, std::size_t roots, std::size_t bisections) {
    RefinementForest forest = RefinementForest::with_roots(roots);
    std::vector<ElementId> leaves(roots);
    std::iota(leaves.begin(), leaves.end(), ElementId{0});
    ElementId next = static_cast<ElementId>(roots);
    for (std::size_t b = 0; b < bisections; ++b) {
        std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
        const std::size_t slot = pick(rng);
        const ElementId parent = leaves[slot];
        BisectionEvent ev;
        ev.parent = parent;
        ev.left_child = next++;
        ev.right_child = next++;
        forest.mirror_event(ev);
        leaves[slot] = ev.left_child;
        leaves.push_back(ev.right_child);
    }
    return forest;
}

/// Integer weights in [lo, hi] for ids [0, capacity); at least one positive.
inline std::vector<double> random_int_weights(std::mt19937_64& rng, std::size_t capacity, int lo, int hi) {
    std::uniform_int_distribution<int> dist(lo, hi);
    std::vector<double> w(capacity);
    for (double& v : w) v = dist(rng);
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
    return w;
}

/// Interior faces found by comparing every pair of live elements for three
/// common vertices.
inline std::vector<std::pair<ElementId, ElementId>> brute_force_interior_faces(const TetMesh& mesh) {
    const auto live = mesh.live_elements();
    std::vector<std::pair<ElementId, ElementId>> out;
    for (std::size_t a = 0; a < live.size(); ++a) {
        auto va = mesh.tet(live[a]).vertices;
        std::sort(va.begin(), va.end());
        for (std::size_t b = a + 1; b < live.size(); ++b) {
            auto vb = mesh.tet(live[b]).vertices;
            std::sort(vb.begin(), vb.end());
            int common = 0;
            for (VertexId x : va) common += static_cast<int>(std::count(vb.begin(), vb.end(), x));
            if (common == 3) out.emplace_back(live[a], live[b]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Distinct triangles over the live elements.
inline std::size_t brute_force_face_count(const TetMesh& mesh) {
    std::set<std::array<VertexId, 3>> faces;
    for (ElementId id : mesh.live_elements()) {
        const auto& v = mesh.tet(id).vertices;
        for (int skip = 0; skip < 4; ++skip) {
            std::array<VertexId, 3> f{};
            int k = 0;
            for (int i = 0; i < 4; ++i) {
                if (i != skip) f[k++] = v[i];
            }
            std::sort(f.begin(), f.end());
            faces.insert(f);
        }
    }
    return faces.size();
}

/// Part of the leaf with integer prefix s under [W i/p, W (i+1)/p), by scanning
/// i upward with exact integer arithmetic.
inline int scan_part(std::int64_t s, std::int64_t total, int p) {
    int part = 0;
    while (part + 1 < p && s * p >= total * (part + 1)) ++part;
    return part;
}

/// Smallest achievable maximum part weight when cutting `weights` (in order)
/// into p contiguous, possibly empty, parts. Enumerates every placement of
/// the p-1 cuts among the n+1 gaps.
inline double exhaustive_min_max(const std::vector<double>& weights, int p) {
    const int n = static_cast<int>(weights.size());
    std::vector<double> prefix(weights.size() + 1, 0.0);
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + weights[i];
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> cut(static_cast<std::size_t>(p - 1), 0);
    while (true) {
        double worst = 0.0;
        int prev = 0;
        for (int c : cut) {
            worst = std::max(worst, prefix[c] - prefix[prev]);
            prev = c;
        }
        worst = std::max(worst, prefix[n] - prefix[prev]);
        best = std::min(best, worst);
        // next nondecreasing cut vector
        int i = p - 2;
        while (i >= 0 && cut[i] == n) --i;
        if (i < 0) break;
        ++cut[i];
        for (int j = i + 1; j < p - 1; ++j) cut[j] = cut[i];
    }
    return best;
}

/// Largest retained weight over all p! placements.
template <class Matrix>
double exhaustive_best_F(const Matrix& s) {
    std::vector<int> perm(static_cast<std::size_t>(s.p()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
        double f = 0.0;
        for (int j = 0; j < s.p(); ++j) f += s(perm[j], j);
        best = std::max(best, f);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace tetlb::testing
