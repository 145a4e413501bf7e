#pragma once

// Simulated adaptive computation over virtual ranks.
//
// Every step marks elements from an indicator field, bisects and coarsens the
// mesh, mirrors the events into the refinement forest, repartitions with the
// selected method, remaps the new subgrids onto processes against the previous
// placement and records the resulting partition quality.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/mesh_io.hpp"
#include "tetlb/metrics.hpp"
#include "tetlb/parallel.hpp"
#include "tetlb/part1d.hpp"
#include "tetlb/partition.hpp"
#include "tetlb/remap.hpp"
#include "tetlb/rtree.hpp"
#include "tetlb/sfc.hpp"

namespace tetlb {

enum class Method { RTK, MortonSFC, HilbertSFC };
enum class IndicatorKind { Uniform, MovingPeak };

/// Peak of u = exp(1 / (25 r^2 + 0.9) - 2.5), r measured from a center that
/// circles (cx, cy) in the plane z = plane_z:
/// (cx + R sin(w t), cy + R cos(w t), plane_z).
struct PeakParams {
    double center_x = 0.5;
    double center_y = 0.5;
    double plane_z = 1.0;
    double orbit_radius = 0.4;
    double angular_speed = 8.0 * std::numbers::pi;

    friend bool operator==(const PeakParams&, const PeakParams&) = default;
};

struct BoxMeshSpec {
    int nx = 4;
    int ny = 4;
    int nz = 4;
    std::array<double, 3> dims{1.0, 1.0, 1.0};

    friend bool operator==(const BoxMeshSpec&, const BoxMeshSpec&) = default;
};

struct PartitionConfig {
    Method method = Method::RTK;
    NormalizeMode mode = NormalizeMode::PreserveAspect;
    int order = default_curve_order;
    int k = 4;
    int p = 1;
    ExecPolicy exec{};
};

struct Scenario {
    std::variant<BoxMeshSpec, std::filesystem::path> mesh = BoxMeshSpec{};
    IndicatorKind indicator = IndicatorKind::Uniform;
    PeakParams peak{};
    int steps = 1;
    double refine_fraction = 0.0;
    double coarsen_fraction = 0.0;
    int p = 1;
    Method method = Method::RTK;
    NormalizeMode mode = NormalizeMode::PreserveAspect;
    int order = default_curve_order;
    int k = 4;
    std::uint64_t seed = 0;
    /// Random bisections applied to the initial mesh before the first step.
    int random_refinements = 0;
    /// Timing fields stay 0 unless set, so records are reproducible byte for byte.
    bool measure_time = false;
    ExecPolicy exec{};
};

struct StepRecord {
    int step = 0;
    std::size_t element_count = 0;
    QualityReport report;
    double partition_seconds = 0.0;
    double remap_seconds = 0.0;
    /// TotalV had the new subgrids been placed without remapping.
    double totalv_identity = 0.0;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

inline void to_json(nlohmann::json& j, const StepRecord& r) {
    j = nlohmann::json{{"step", r.step},
                       {"element_count", r.element_count},
                       {"report", r.report},
                       {"partition_seconds", r.partition_seconds},
                       {"remap_seconds", r.remap_seconds},
                       {"totalv_identity", r.totalv_identity}};
}

inline const char* to_string(Method m) {
    switch (m) {
    case Method::RTK: return "rtk";
    case Method::MortonSFC: return "morton";
    case Method::HilbertSFC: return "hilbert";
    }
    return "?";
}

inline const char* to_string(NormalizeMode m) {
    return m == NormalizeMode::PreserveAspect ? "preserve" : "stretch";
}

inline Method parse_method(const std::string& s) {
    if (s == "rtk") return Method::RTK;
    if (s == "morton") return Method::MortonSFC;
    if (s == "hilbert") return Method::HilbertSFC;
    detail::fail(errc::invalid_argument, "unknown method '" + s + "'");
}

inline NormalizeMode parse_mode(const std::string& s) {
    if (s == "preserve") return NormalizeMode::PreserveAspect;
    if (s == "stretch") return NormalizeMode::StretchToUnit;
    detail::fail(errc::invalid_argument, "unknown normalization mode '" + s + "'");
}

inline double indicator_value(IndicatorKind kind, const PeakParams& peak, const Point3& at, double t) {
    if (kind == IndicatorKind::Uniform) return 1.0;
    const double cx = peak.center_x + peak.orbit_radius * std::sin(peak.angular_speed * t);
    const double cy = peak.center_y + peak.orbit_radius * std::cos(peak.angular_speed * t);
    const double r2 = (at.x - cx) * (at.x - cx) + (at.y - cy) * (at.y - cy) +
                      (at.z - peak.plane_z) * (at.z - peak.plane_z);
    return std::exp(1.0 / (25.0 * r2 + 0.9) - 2.5);
}

/// Subgrid assignment of the live elements. RTK runs the scanned algorithm
/// with one virtual rank per run of equal `owner` along the DFS order (a
/// single rank when `owner` is null); the curve methods key element
/// barycenters and cut the key range with the multi-section partitioner.
inline PartitionAssignment partition_mesh(const TetMesh& mesh, const RefinementForest& forest,
                                          std::span<const double> weights, const PartitionConfig& cfg,
                                          const PartitionAssignment* owner = nullptr) {
    detail::require(cfg.p >= 1, errc::invalid_argument, "part count must be at least 1");
    if (cfg.method == Method::RTK) {
        if (owner == nullptr) return partition_serial(forest, weights, cfg.p);
        const auto blocks = dfs_owner_blocks(forest, *owner);
        return partition_scanned(forest, weights, cfg.p, blocks);
    }
    const CurveKind kind = cfg.method == Method::MortonSFC ? CurveKind::Morton : CurveKind::Hilbert;
    const auto keys = element_keys(mesh, cfg.mode, kind, cfg.order, cfg.exec);
    std::vector<WeightedKey<SfcKey>> items;
    items.reserve(keys.size());
    for (const ElementKey& k : keys) {
        detail::require(k.element_id < weights.size(), errc::invalid_argument, "missing element weight");
        items.push_back({k.key, weights[k.element_id], k.element_id});
    }
    Part1dOptions opt;
    opt.k = cfg.k;
    opt.exec = cfg.exec;
    auto result = partition_1d<IntegerKeySpace>(std::span<const WeightedKey<SfcKey>>(items), cfg.p, opt,
                                                IntegerKeySpace{3 * cfg.order});
    result.assignment.part_of.resize(mesh.element_capacity(), -1);
    return std::move(result.assignment);
}

inline void validate(const Scenario& s) {
    const auto check = [](bool ok, const char* what) {
        if (!ok) detail::fail(errc::scenario, what);
    };
    check(s.steps >= 1, "steps must be at least 1");
    check(s.p >= 1, "p must be at least 1");
    check(s.refine_fraction >= 0.0 && s.refine_fraction <= 1.0, "refine_fraction must be in [0,1]");
    check(s.coarsen_fraction >= 0.0 && s.coarsen_fraction < 1.0, "coarsen_fraction must be in [0,1)");
    check(s.refine_fraction + s.coarsen_fraction <= 1.0, "refine_fraction + coarsen_fraction exceeds 1");
    check(s.order >= 1 && s.order <= max_curve_order, "order must be in [1,21]");
    check(s.k >= 2, "k must be at least 2");
    check(s.random_refinements >= 0, "random_refinements must be nonnegative");
    if (const auto* box = std::get_if<BoxMeshSpec>(&s.mesh)) {
        check(box->nx >= 1 && box->ny >= 1 && box->nz >= 1, "box cell counts must be at least 1");
        check(box->dims[0] > 0 && box->dims[1] > 0 && box->dims[2] > 0, "box dimensions must be positive");
    }
}

/// Scenario text: one `key = value` per line, '#' comments. Keys:
///   mesh_box = nx ny nz dx dy dz     mesh_file = path
///   indicator = uniform | moving_peak
///   peak_center = cx cy z            peak_orbit_radius, peak_angular_speed
///   steps, refine_fraction, coarsen_fraction, p, order, k, seed, random_refinements
///   method = rtk | morton | hilbert  mode = preserve | stretch
inline Scenario parse_scenario(std::istream& in) {
    Scenario s;
    std::string line;
    std::size_t lineno = 0;
    while (detail::next_content_line(in, line, lineno)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error(lineno, "expected 'key = value'");
        const auto trim = [](std::string v) {
            const auto b = v.find_first_not_of(" \t\r");
            const auto e = v.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : v.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::istringstream vs(value);
        const auto bad = [&] { throw parse_error(lineno, "bad value for '" + key + "'"); };
        const auto read_all = [&](auto&... out) {
            if (!(vs >> ... >> out)) bad();
            std::string rest;
            if (vs >> rest) bad();
        };
        try {
            if (key == "mesh_box") {
                BoxMeshSpec box;
                read_all(box.nx, box.ny, box.nz, box.dims[0], box.dims[1], box.dims[2]);
                s.mesh = box;
            } else if (key == "mesh_file") {
                if (value.empty()) bad();
                s.mesh = std::filesystem::path(value);
            } else if (key == "indicator") {
                if (value == "uniform") s.indicator = IndicatorKind::Uniform;
                else if (value == "moving_peak") s.indicator = IndicatorKind::MovingPeak;
                else bad();
            } else if (key == "peak_center") {
                read_all(s.peak.center_x, s.peak.center_y, s.peak.plane_z);
            } else if (key == "peak_orbit_radius") {
                read_all(s.peak.orbit_radius);
            } else if (key == "peak_angular_speed") {
                read_all(s.peak.angular_speed);
            } else if (key == "steps") {
                read_all(s.steps);
            } else if (key == "refine_fraction") {
                read_all(s.refine_fraction);
            } else if (key == "coarsen_fraction") {
                read_all(s.coarsen_fraction);
            } else if (key == "p") {
                read_all(s.p);
            } else if (key == "order") {
                read_all(s.order);
            } else if (key == "k") {
                read_all(s.k);
            } else if (key == "seed") {
                read_all(s.seed);
            } else if (key == "random_refinements") {
                read_all(s.random_refinements);
            } else if (key == "method") {
                s.method = parse_method(value);
            } else if (key == "mode") {
                s.mode = parse_mode(value);
            } else {
                throw parse_error(lineno, "unknown key '" + key + "'");
            }
        } catch (const parse_error&) {
            throw;
        } catch (const error& e) {
            throw parse_error(lineno, e.what());
        }
    }
    return s;
}

namespace detail {

inline TetMesh make_scenario_mesh(const Scenario& s) {
    if (const auto* box = std::get_if<BoxMeshSpec>(&s.mesh)) {
        return generate_box_mesh(box->nx, box->ny, box->nz, box->dims);
    }
    return load_mesh(std::get<std::filesystem::path>(s.mesh));
}

// Children take over their parent's owner; a restored parent takes its left child's.
inline void inherit_owners(PartitionAssignment& owner, const std::vector<MeshEvent>& events,
                           std::size_t from, std::size_t capacity) {
    owner.part_of.resize(capacity, -1);
    for (std::size_t e = from; e < events.size(); ++e) {
        if (const auto* b = std::get_if<BisectionEvent>(&events[e])) {
            const int o = owner.part_of[b->parent];
            owner.part_of[b->left_child] = o;
            owner.part_of[b->right_child] = o;
            owner.part_of[b->parent] = -1;
        } else {
            const auto& c = std::get<CoarsenEvent>(events[e]);
            owner.part_of[c.parent] = owner.part_of[c.left_child];
            owner.part_of[c.left_child] = -1;
            owner.part_of[c.right_child] = -1;
        }
    }
}

} // namespace detail

/// Deterministic replay of the adaptive loop; one record per step.
///
/// Marking: an element's score is indicator(barycenter, t) times its longest
/// edge. The floor(refine_fraction * N) highest scores are bisected, then the
/// floor(coarsen_fraction * N) coarsenable sibling pairs with the lowest
/// max(child score) are merged (pairs with a child marked for refinement are
/// skipped). Ties go to the smaller element id. t = step / steps.
inline std::vector<StepRecord> run_scenario(const Scenario& s) {
    validate(s);
    TetMesh mesh = detail::make_scenario_mesh(s);
    std::mt19937_64 rng(s.seed);
    for (int r = 0; r < s.random_refinements; ++r) {
        const auto live = mesh.live_elements();
        std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
        mesh.bisect(live[pick(rng)]);
    }
    RefinementForest forest(mesh);

    const PartitionConfig cfg{s.method, s.mode, s.order, s.k, s.p, s.exec};
    std::vector<double> weights = mesh.weights();
    PartitionAssignment owner = partition_mesh(mesh, forest, weights, cfg);

    using clock = std::chrono::steady_clock;
    const auto seconds_since = [&](clock::time_point start) {
        return s.measure_time ? std::chrono::duration<double>(clock::now() - start).count() : 0.0;
    };

    std::vector<StepRecord> records;
    records.reserve(static_cast<std::size_t>(s.steps));
    for (int step = 0; step < s.steps; ++step) {
        const double t = static_cast<double>(step) / static_cast<double>(s.steps);
        const auto live = mesh.live_elements();
        const std::size_t n = live.size();

        std::vector<double> score(mesh.element_capacity(), 0.0);
        for (ElementId id : live) {
            score[id] = indicator_value(s.indicator, s.peak, mesh.barycenter(id), t) *
                        mesh.longest_edge_length(id);
        }
        const auto n_refine = static_cast<std::size_t>(std::floor(s.refine_fraction * static_cast<double>(n)));
        const auto n_coarsen = static_cast<std::size_t>(std::floor(s.coarsen_fraction * static_cast<double>(n)));

        std::vector<ElementId> refine(live);
        std::stable_sort(refine.begin(), refine.end(),
                         [&](ElementId a, ElementId b) { return score[a] > score[b]; });
        refine.resize(n_refine);
        std::vector<bool> marked(mesh.element_capacity(), false);
        for (ElementId id : refine) marked[id] = true;

        std::vector<ElementId> coarsen;
        std::vector<double> pair_score(mesh.element_capacity(), 0.0);
        for (ElementId parent : mesh.coarsenable_parents()) {
            const auto [l, r] = *mesh.children(parent);
            if (marked[l] || marked[r]) continue;
            pair_score[parent] = std::max(score[l], score[r]);
            coarsen.push_back(parent);
        }
        std::stable_sort(coarsen.begin(), coarsen.end(),
                         [&](ElementId a, ElementId b) { return pair_score[a] < pair_score[b]; });
        if (coarsen.size() > n_coarsen) coarsen.resize(n_coarsen);
        if (n + refine.size() <= coarsen.size()) detail::fail(errc::scenario, "step would empty the mesh");

        std::sort(refine.begin(), refine.end());
        std::sort(coarsen.begin(), coarsen.end());
        const std::size_t first_event = mesh.events().size();
        for (ElementId parent : coarsen) mesh.coarsen(parent);
        for (ElementId id : refine) mesh.bisect(id);
        for (std::size_t e = first_event; e < mesh.events().size(); ++e) forest.mirror_event(mesh.events()[e]);
        detail::inherit_owners(owner, mesh.events(), first_event, mesh.element_capacity());
        weights = mesh.weights();

        StepRecord rec;
        rec.step = step;
        rec.element_count = mesh.live_count();

        auto start = clock::now();
        const PartitionAssignment subgrids = partition_mesh(mesh, forest, weights, cfg, &owner);
        rec.partition_seconds = seconds_since(start);
        if (s.method == Method::RTK && !(subgrids == partition_serial(forest, weights, s.p))) {
            detail::fail(errc::consistency, "scanned refinement-tree partition differs from serial");
        }

        start = clock::now();
        const SimilarityMatrix sim = build_similarity(owner, subgrids, weights);
        const RemapPermutation perm = remap_greedy(sim);
        rec.remap_seconds = seconds_since(start);

        rec.report = quality_report(mesh, subgrids, weights, s.p, MigrationInput{&owner, perm}, &forest);
        rec.totalv_identity = migration_stats(sim, identity_permutation(s.p)).totalv;
        owner = apply_permutation(subgrids, perm);
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace tetlb
