#pragma once

// Tetrahedral mesh with longest-edge bisection and its inverse (coarsening).
//
// Every element ever created keeps its record, so element ids stay stable and
// dense: coarsening kills the two children and revives the parent, and a later
// bisection of the same parent revives the same child ids. Hanging nodes are
// allowed; edge midpoints are shared through an edge->vertex cache so that
// neighbours bisected across a common edge see matching faces.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/geometry.hpp"

namespace tetlb {

using VertexId = std::uint32_t;
using ElementId = std::uint32_t;

inline constexpr ElementId no_element = std::numeric_limits<ElementId>::max();

struct Tet {
    std::array<VertexId, 4> vertices{};
    ElementId element_id = no_element;
    /// Node id of this element in a RefinementForest. Forest node ids coincide
    /// with element ids, so this always equals element_id.
    ElementId tree_node = no_element;
    double weight = 1.0;

    friend bool operator==(const Tet&, const Tet&) = default;
};

struct BisectionEvent {
    ElementId parent = no_element;
    ElementId left_child = no_element;
    ElementId right_child = no_element;
    std::array<VertexId, 2> cut_edge{};
    VertexId new_vertex = 0;

    friend bool operator==(const BisectionEvent&, const BisectionEvent&) = default;
};

struct CoarsenEvent {
    ElementId parent = no_element;
    ElementId left_child = no_element;
    ElementId right_child = no_element;

    friend bool operator==(const CoarsenEvent&, const CoarsenEvent&) = default;
};

using MeshEvent = std::variant<BisectionEvent, CoarsenEvent>;

/// Sorted vertex triple.
using FaceKey = std::array<VertexId, 3>;

struct FaceKeyHash {
    std::size_t operator()(const FaceKey& f) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (VertexId v : f) {
            h ^= v;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Elements incident to one face; `elements` is ascending when count == 2.
struct FaceIncidence {
    std::array<ElementId, 2> elements{no_element, no_element};
    int count = 0;

    bool interior() const { return count == 2; }
    friend bool operator==(const FaceIncidence&, const FaceIncidence&) = default;
};

using FaceMap = std::unordered_map<FaceKey, FaceIncidence, FaceKeyHash>;

inline FaceKey make_face(VertexId a, VertexId b, VertexId c) {
    FaceKey f{a, b, c};
    std::sort(f.begin(), f.end());
    return f;
}

inline std::array<FaceKey, 4> faces_of(const std::array<VertexId, 4>& v) {
    return {make_face(v[1], v[2], v[3]), make_face(v[0], v[2], v[3]), make_face(v[0], v[1], v[3]),
            make_face(v[0], v[1], v[2])};
}

class TetMesh {
public:
    struct Record {
        Tet tet;
        ElementId parent = no_element;
        ElementId left = no_element;
        ElementId right = no_element;
        bool live = false;

        friend bool operator==(const Record&, const Record&) = default;
    };

    TetMesh() = default;

    /// Builds an unrefined mesh; element ids are the positions in `tets`.
    /// An empty `weights` means weight 1 everywhere.
    TetMesh(std::vector<Point3> vertices, std::span<const std::array<VertexId, 4>> tets,
            std::span<const double> weights = {})
        : vertices_(std::move(vertices)) {
        detail::require(weights.empty() || weights.size() == tets.size(), errc::invalid_argument,
                        "weight count does not match element count");
        for (const Point3& p : vertices_) {
            detail::require(p.finite(), errc::invalid_argument, "non-finite vertex coordinate");
        }
        records_.reserve(tets.size());
        for (std::size_t i = 0; i < tets.size(); ++i) {
            const auto& v = tets[i];
            for (int a = 0; a < 4; ++a) {
                detail::require(v[a] < vertices_.size(), errc::invalid_argument,
                                "vertex index out of range");
                for (int b = 0; b < a; ++b) {
                    detail::require(v[a] != v[b], errc::invalid_argument,
                                    "tetrahedron repeats a vertex");
                }
            }
            const double w = weights.empty() ? 1.0 : weights[i];
            detail::require(std::isfinite(w) && w >= 0.0, errc::invalid_argument,
                            "element weight must be finite and nonnegative");
            const auto id = static_cast<ElementId>(i);
            Record r;
            r.tet = Tet{v, id, id, w};
            r.live = true;
            records_.push_back(r);
            detail::require(volume(id) > 0.0, errc::invalid_argument,
                            "tetrahedron has non-positive signed volume");
        }
        initial_count_ = records_.size();
        live_count_ = records_.size();
        bbox_ = BoundingBox::of(vertices_);
        faces_ = recompute_faces();
        for (const auto& [key, inc] : faces_) {
            (void)key;
            detail::require(inc.count <= 2, errc::invalid_argument,
                            "face shared by more than two tetrahedra");
        }
    }

    std::span<const Point3> vertices() const { return vertices_; }
    const BoundingBox& bbox() const { return bbox_; }
    const FaceMap& faces() const { return faces_; }
    const std::vector<MeshEvent>& events() const { return events_; }

    /// Number of element ids ever handed out (live or not).
    std::size_t element_capacity() const { return records_.size(); }
    std::size_t initial_count() const { return initial_count_; }
    std::size_t live_count() const { return live_count_; }

    bool contains(ElementId id) const { return id < records_.size(); }
    bool is_live(ElementId id) const { return contains(id) && records_[id].live; }
    const Record& record(ElementId id) const {
        if (!contains(id)) detail::fail(errc::not_found, "unknown element id " + std::to_string(id));
        return records_[id];
    }
    const Tet& tet(ElementId id) const { return record(id).tet; }

    std::optional<std::pair<ElementId, ElementId>> children(ElementId id) const {
        const Record& r = record(id);
        if (r.left == no_element) return std::nullopt;
        return std::pair{r.left, r.right};
    }

    /// Live element ids, ascending.
    std::vector<ElementId> live_elements() const {
        std::vector<ElementId> out;
        out.reserve(live_count_);
        for (const Record& r : records_) {
            if (r.live) out.push_back(r.tet.element_id);
        }
        return out;
    }

    /// Weights indexed by element id; entries of dead elements are 0.
    std::vector<double> weights() const {
        std::vector<double> w(records_.size(), 0.0);
        for (const Record& r : records_) {
            if (r.live) w[r.tet.element_id] = r.tet.weight;
        }
        return w;
    }

    void set_weight(ElementId id, double w) {
        detail::require(std::isfinite(w) && w >= 0.0, errc::invalid_argument,
                        "element weight must be finite and nonnegative");
        if (!contains(id)) detail::fail(errc::not_found, "unknown element id " + std::to_string(id));
        records_[id].tet.weight = w;
    }

    double volume(ElementId id) const {
        const auto& v = tet(id).vertices;
        return signed_volume(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]], vertices_[v[3]]);
    }

    Point3 barycenter(ElementId id) const {
        const auto& v = tet(id).vertices;
        const Point3 s = (vertices_[v[0]] + vertices_[v[1]]) + (vertices_[v[2]] + vertices_[v[3]]);
        return 0.25 * s;
    }

    double longest_edge_length(ElementId id) const {
        const auto [i, j] = cut_positions(tet(id).vertices);
        const auto& v = tet(id).vertices;
        return std::sqrt(squared_distance(vertices_[v[i]], vertices_[v[j]]));
    }

    /// Parents whose two children are both live, ascending.
    std::vector<ElementId> coarsenable_parents() const {
        std::vector<ElementId> out;
        for (const Record& r : records_) {
            if (!r.live && r.left != no_element && records_[r.left].live && records_[r.right].live) {
                out.push_back(r.tet.element_id);
            }
        }
        return out;
    }

    /// Splits a live element at the midpoint of its longest edge.
    BisectionEvent bisect(ElementId id) {
        if (!contains(id)) detail::fail(errc::not_found, "unknown element id " + std::to_string(id));
        if (!records_[id].live) {
            detail::fail(errc::precondition, "element " + std::to_string(id) + " is not a live leaf");
        }
        const std::array<VertexId, 4> v = records_[id].tet.vertices;
        const auto [i, j] = cut_positions(v);
        const VertexId a = v[i];
        const VertexId b = v[j];
        const VertexId m = midpoint_vertex(a, b);

        // Replacing one endpoint by the midpoint keeps the orientation.
        std::array<VertexId, 4> with_a = v;
        with_a[j] = m;
        std::array<VertexId, 4> with_b = v;
        with_b[i] = m;
        const bool a_first = a < b;
        const std::array<VertexId, 4>& left_vertices = a_first ? with_a : with_b;
        const std::array<VertexId, 4>& right_vertices = a_first ? with_b : with_a;

        if (records_[id].left == no_element) {
            records_[id].left = allocate(id);
            records_[id].right = allocate(id);
        }
        const ElementId left = records_[id].left;
        const ElementId right = records_[id].right;
        const double w = records_[id].tet.weight;
        records_[left].tet = Tet{left_vertices, left, left, w};
        records_[right].tet = Tet{right_vertices, right, right, w};

        remove_faces(id);
        records_[id].live = false;
        records_[left].live = true;
        records_[right].live = true;
        add_faces(left);
        add_faces(right);
        ++live_count_;

        BisectionEvent ev{id, left, right, {std::min(a, b), std::max(a, b)}, m};
        events_.emplace_back(ev);
        return ev;
    }

    /// Merges the two live children of `parent` back into it.
    void coarsen(ElementId parent) {
        if (!contains(parent)) {
            detail::fail(errc::not_found, "unknown element id " + std::to_string(parent));
        }
        const Record& r = records_[parent];
        if (r.live || r.left == no_element || !records_[r.left].live || !records_[r.right].live) {
            detail::fail(errc::precondition,
                         "children of " + std::to_string(parent) + " are not both live leaves");
        }
        const ElementId left = r.left;
        const ElementId right = r.right;
        remove_faces(left);
        remove_faces(right);
        records_[left].live = false;
        records_[right].live = false;
        records_[parent].live = true;
        add_faces(parent);
        --live_count_;
        events_.emplace_back(CoarsenEvent{parent, left, right});
    }

    /// Face map rebuilt from the live elements alone.
    FaceMap recompute_faces() const {
        FaceMap faces;
        faces.reserve(records_.size() * 3);
        for (const Record& r : records_) {
            if (!r.live) continue;
            for (const FaceKey& f : faces_of(r.tet.vertices)) {
                insert_incidence(faces, f, r.tet.element_id);
            }
        }
        return faces;
    }

    const std::vector<Record>& records() const { return records_; }

    friend bool operator==(const TetMesh& a, const TetMesh& b) {
        return a.vertices_ == b.vertices_ && a.records_ == b.records_ && a.events_ == b.events_ &&
               a.initial_count_ == b.initial_count_;
    }

private:
    // Longest edge; equal lengths resolved by the smallest (min, max) vertex pair.
    std::pair<int, int> cut_positions(const std::array<VertexId, 4>& v) const {
        int bi = 0, bj = 1;
        double best = -1.0;
        std::pair<VertexId, VertexId> best_key{};
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                const double len = squared_distance(vertices_[v[i]], vertices_[v[j]]);
                const std::pair<VertexId, VertexId> key{std::min(v[i], v[j]), std::max(v[i], v[j])};
                if (len > best || (len == best && key < best_key)) {
                    best = len;
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        }
        return {bi, bj};
    }

    VertexId midpoint_vertex(VertexId a, VertexId b) {
        const std::uint64_t key = (std::uint64_t{std::min(a, b)} << 32) | std::max(a, b);
        auto [it, inserted] = midpoints_.try_emplace(key, static_cast<VertexId>(vertices_.size()));
        if (inserted) vertices_.push_back(midpoint(vertices_[a], vertices_[b]));
        return it->second;
    }

    ElementId allocate(ElementId parent) {
        const auto id = static_cast<ElementId>(records_.size());
        Record r;
        r.parent = parent;
        r.tet.element_id = id;
        r.tet.tree_node = id;
        records_.push_back(r);
        return id;
    }

    static void insert_incidence(FaceMap& faces, const FaceKey& f, ElementId id) {
        FaceIncidence& inc = faces[f];
        if (inc.count >= 2) {
            detail::fail(errc::consistency, "face shared by more than two tetrahedra");
        }
        inc.elements[inc.count++] = id;
        if (inc.count == 2 && inc.elements[0] > inc.elements[1]) {
            std::swap(inc.elements[0], inc.elements[1]);
        }
    }

    void add_faces(ElementId id) {
        for (const FaceKey& f : faces_of(records_[id].tet.vertices)) insert_incidence(faces_, f, id);
    }

    void remove_faces(ElementId id) {
        for (const FaceKey& f : faces_of(records_[id].tet.vertices)) {
            auto it = faces_.find(f);
            if (it == faces_.end()) detail::fail(errc::consistency, "face map out of sync");
            FaceIncidence& inc = it->second;
            if (inc.count == 1) {
                faces_.erase(it);
            } else if (inc.elements[0] == id) {
                inc.elements = {inc.elements[1], no_element};
                inc.count = 1;
            } else {
                inc.elements[1] = no_element;
                inc.count = 1;
            }
        }
    }

    std::vector<Point3> vertices_;
    std::vector<Record> records_;
    std::vector<MeshEvent> events_;
    FaceMap faces_;
    std::unordered_map<std::uint64_t, VertexId> midpoints_;
    BoundingBox bbox_;
    std::size_t initial_count_ = 0;
    std::size_t live_count_ = 0;
};

/// Interior faces as (smaller id, larger id) pairs in ascending order.
inline std::vector<std::pair<ElementId, ElementId>> interior_faces(const TetMesh& mesh) {
    std::vector<std::pair<ElementId, ElementId>> out;
    for (const auto& [key, inc] : mesh.faces()) {
        (void)key;
        if (inc.interior()) out.emplace_back(inc.elements[0], inc.elements[1]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Structured box mesh of [0,dx]x[0,dy]x[0,dz] with nx*ny*nz cells.
///
/// Each cell is cut into the six Kuhn tetrahedra around its diagonal from the
/// (0,0,0) corner to the (1,1,1) corner: for every permutation (a, b, c) of the
/// axes, the path corner -> +e_a -> +e_a+e_b -> opposite corner. Permutations are
/// taken in lexicographic order; a tetrahedron with negative orientation has its
/// last two vertices swapped. Vertex (i,j,k) has index i + (nx+1)*(j + (ny+1)*k)
/// and cells are numbered with i fastest, so element id = 6*cell + permutation.
/// All cells use the same diagonal direction, so the mesh is conforming.
inline TetMesh generate_box_mesh(int nx, int ny, int nz, std::array<double, 3> dims) {
    detail::require(nx >= 1 && ny >= 1 && nz >= 1, errc::invalid_argument,
                    "cell counts must be at least 1");
    detail::require(dims[0] > 0.0 && dims[1] > 0.0 && dims[2] > 0.0 && std::isfinite(dims[0]) &&
                        std::isfinite(dims[1]) && std::isfinite(dims[2]),
                    errc::invalid_argument, "box dimensions must be positive");
    const auto vid = [&](int i, int j, int k) {
        return static_cast<VertexId>(i + (nx + 1) * (j + (ny + 1) * k));
    };
    std::vector<Point3> vertices;
    vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1));
    for (int k = 0; k <= nz; ++k) {
        for (int j = 0; j <= ny; ++j) {
            for (int i = 0; i <= nx; ++i) {
                vertices.push_back({dims[0] * i / nx, dims[1] * j / ny, dims[2] * k / nz});
            }
        }
    }
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    std::vector<std::array<VertexId, 4>> tets;
    tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const auto corner = [&](int bits) {
                    return vid(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
                };
                for (const auto& perm : perms) {
                    const int b1 = 1 << perm[0];
                    const int b2 = b1 | (1 << perm[1]);
                    std::array<VertexId, 4> t{corner(0), corner(b1), corner(b2), corner(7)};
                    if (signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]) <
                        0.0) {
                        std::swap(t[2], t[3]);
                    }
                    tets.push_back(t);
                }
            }
        }
    }
    return TetMesh(std::move(vertices), tets);
}

} // namespace tetlb
