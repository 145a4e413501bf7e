#pragma once

// Structural partition-quality measures: load imbalance, interface faces and,
// when a previous placement is known, migration volume.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/partition.hpp"
#include "tetlb/remap.hpp"
#include "tetlb/rtree.hpp"

namespace tetlb {

struct QualityReport {
    int p = 1;
    std::vector<double> part_weights;
    double imbalance = 1.0;
    long long interface_faces = 0;
    double totalv = 0.0;
    double maxv = 0.0;
    double migration_fraction = 0.0;
    double dfs_face_share_rate = 0.0;

    friend bool operator==(const QualityReport&, const QualityReport&) = default;
};

inline void to_json(nlohmann::json& j, const QualityReport& r) {
    j = nlohmann::json{{"p", r.p},
                       {"part_weights", r.part_weights},
                       {"imbalance", r.imbalance},
                       {"interface_faces", r.interface_faces},
                       {"totalv", r.totalv},
                       {"maxv", r.maxv},
                       {"migration_fraction", r.migration_fraction},
                       {"dfs_face_share_rate", r.dfs_face_share_rate}};
}

inline void from_json(const nlohmann::json& j, QualityReport& r) {
    j.at("p").get_to(r.p);
    j.at("part_weights").get_to(r.part_weights);
    j.at("imbalance").get_to(r.imbalance);
    j.at("interface_faces").get_to(r.interface_faces);
    j.at("totalv").get_to(r.totalv);
    j.at("maxv").get_to(r.maxv);
    j.at("migration_fraction").get_to(r.migration_fraction);
    j.at("dfs_face_share_rate").get_to(r.dfs_face_share_rate);
}

/// Total weight per part over the live elements.
inline std::vector<double> part_weights(const TetMesh& mesh, const PartitionAssignment& parts,
                                        std::span<const double> weights, int p) {
    detail::require(p >= 1, errc::invalid_argument, "part count must be at least 1");
    std::vector<double> out(static_cast<std::size_t>(p), 0.0);
    for (ElementId id : mesh.live_elements()) {
        const int part = parts.part(id);
        detail::require(part < p, errc::invalid_argument, "part id out of range");
        detail::require(id < weights.size(), errc::invalid_argument, "missing element weight");
        out[part] += weights[id];
    }
    return out;
}

/// max part weight * p / W; 1 means perfectly balanced.
inline double imbalance(const TetMesh& mesh, const PartitionAssignment& parts,
                        std::span<const double> weights, int p) {
    const auto w = part_weights(mesh, parts, weights, p);
    double total = 0.0;
    for (double v : w) total += v;
    detail::require(total > 0.0, errc::degenerate_input, "total weight is zero");
    return *std::max_element(w.begin(), w.end()) * p / total;
}

/// Interior faces whose two elements lie in different parts.
inline long long edge_cut(const TetMesh& mesh, const PartitionAssignment& parts) {
    long long cut = 0;
    for (const auto& [key, inc] : mesh.faces()) {
        (void)key;
        if (inc.interior() && parts.part(inc.elements[0]) != parts.part(inc.elements[1])) ++cut;
    }
    return cut;
}

/// Migration inputs: where elements lived before and how new subgrids are
/// placed on processes.
struct MigrationInput {
    const PartitionAssignment* old_owner = nullptr;
    std::span<const int> perm;
};

inline QualityReport quality_report(const TetMesh& mesh, const PartitionAssignment& new_parts,
                                    std::span<const double> weights, int p,
                                    std::optional<MigrationInput> migration = std::nullopt,
                                    const RefinementForest* forest = nullptr) {
    QualityReport r;
    r.p = p;
    r.part_weights = part_weights(mesh, new_parts, weights, p);
    double total = 0.0;
    for (double v : r.part_weights) total += v;
    detail::require(total > 0.0, errc::degenerate_input, "total weight is zero");
    r.imbalance = *std::max_element(r.part_weights.begin(), r.part_weights.end()) * p / total;
    r.interface_faces = edge_cut(mesh, new_parts);
    if (migration && migration->old_owner != nullptr) {
        const SimilarityMatrix s = build_similarity(*migration->old_owner, new_parts, weights);
        const RemapPermutation identity = identity_permutation(p);
        const std::span<const int> perm = migration->perm.empty() ? std::span<const int>(identity)
                                                                 : migration->perm;
        const MigrationStats stats = migration_stats(s, perm);
        r.totalv = stats.totalv;
        r.maxv = stats.maxv;
        const double sum = s.total();
        r.migration_fraction = sum > 0.0 ? stats.totalv / sum : 0.0;
    }
    if (forest != nullptr) r.dfs_face_share_rate = dfs_face_share_rate(mesh, *forest);
    return r;
}

} // namespace tetlb
