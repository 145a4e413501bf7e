#pragma once

// Refinement-tree partitioning.
//
// The forest mirrors the mesh's bisection history: one binary tree per initial
// element, roots kept in initial element order for the whole run. Leaves are
// ordered by a depth-first, left-before-right walk; leaf i gets the prefix sum
// S_i of the weights of all leaves before it and goes to part i when
// S_i lies in [W i/p, W (i+1)/p). Interior node weights are never formed.

#include <algorithm>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/partition.hpp"
#include "tetlb/scan.hpp"

namespace tetlb {

struct RTreeNode {
    ElementId parent = no_element;
    ElementId left = no_element;
    ElementId right = no_element;
    bool present = false;

    bool leaf() const { return left == no_element; }
    friend bool operator==(const RTreeNode&, const RTreeNode&) = default;
};

class RefinementForest {
public:
    RefinementForest() = default;

    /// Roots are the mesh's initial elements; its event log is then replayed.
    explicit RefinementForest(const TetMesh& mesh) {
        nodes_.resize(mesh.initial_count());
        roots_.reserve(mesh.initial_count());
        for (std::size_t i = 0; i < mesh.initial_count(); ++i) {
            nodes_[i].present = true;
            roots_.push_back(static_cast<ElementId>(i));
        }
        leaves_ = roots_.size();
        for (const MeshEvent& ev : mesh.events()) mirror_event(ev);
    }

    /// Forest of unrefined roots 0..n-1.
    static RefinementForest with_roots(std::size_t n) {
        RefinementForest f;
        f.nodes_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            f.nodes_[i].present = true;
            f.roots_.push_back(static_cast<ElementId>(i));
        }
        f.leaves_ = n;
        return f;
    }

    std::span<const ElementId> roots() const { return roots_; }
    std::size_t leaf_count() const { return leaves_; }
    std::size_t capacity() const { return nodes_.size(); }

    const RTreeNode& node(ElementId id) const {
        if (id >= nodes_.size() || !nodes_[id].present) {
            detail::fail(errc::not_found, "no forest node " + std::to_string(id));
        }
        return nodes_[id];
    }

    bool is_leaf(ElementId id) const {
        return id < nodes_.size() && nodes_[id].present && nodes_[id].leaf();
    }

    void mirror_event(const MeshEvent& event) {
        std::visit([this](const auto& ev) { apply(ev); }, event);
    }

    friend bool operator==(const RefinementForest&, const RefinementForest&) = default;

private:
    void apply(const BisectionEvent& ev) {
        if (!is_leaf(ev.parent)) {
            detail::fail(errc::consistency,
                         "bisection of " + std::to_string(ev.parent) + " which is not a forest leaf");
        }
        const ElementId hi = std::max(ev.left_child, ev.right_child);
        if (hi == no_element || ev.left_child == ev.right_child) {
            detail::fail(errc::consistency, "bisection event with invalid children");
        }
        if (hi >= nodes_.size()) nodes_.resize(static_cast<std::size_t>(hi) + 1);
        for (ElementId c : {ev.left_child, ev.right_child}) {
            if (nodes_[c].present) {
                detail::fail(errc::consistency, "child " + std::to_string(c) + " already in forest");
            }
            nodes_[c] = RTreeNode{ev.parent, no_element, no_element, true};
        }
        nodes_[ev.parent].left = ev.left_child;
        nodes_[ev.parent].right = ev.right_child;
        ++leaves_;
    }

    void apply(const CoarsenEvent& ev) {
        if (ev.parent >= nodes_.size() || !nodes_[ev.parent].present ||
            nodes_[ev.parent].left != ev.left_child || nodes_[ev.parent].right != ev.right_child ||
            !is_leaf(ev.left_child) || !is_leaf(ev.right_child)) {
            detail::fail(errc::consistency,
                         "stale coarsening of " + std::to_string(ev.parent));
        }
        nodes_[ev.left_child].present = false;
        nodes_[ev.right_child].present = false;
        nodes_[ev.parent].left = no_element;
        nodes_[ev.parent].right = no_element;
        --leaves_;
    }

    std::vector<RTreeNode> nodes_;
    std::vector<ElementId> roots_;
    std::size_t leaves_ = 0;
};

/// Leaves in depth-first order, roots in their fixed order, left child first.
inline std::vector<ElementId> dfs_leaf_order(const RefinementForest& forest) {
    std::vector<ElementId> order;
    order.reserve(forest.leaf_count());
    std::vector<ElementId> stack;
    for (ElementId root : forest.roots()) {
        stack.push_back(root);
        while (!stack.empty()) {
            const ElementId id = stack.back();
            stack.pop_back();
            const RTreeNode& n = forest.node(id);
            if (n.leaf()) {
                order.push_back(id);
            } else {
                stack.push_back(n.right);
                stack.push_back(n.left);
            }
        }
    }
    return order;
}

namespace detail {

inline double leaf_weight(std::span<const double> weights, ElementId id) {
    if (id >= weights.size()) {
        fail(errc::invalid_argument, "no weight for element " + std::to_string(id));
    }
    const double w = weights[id];
    if (!(w >= 0.0)) fail(errc::invalid_argument, "negative weight on element " + std::to_string(id));
    return w;
}

} // namespace detail

struct LeafPrefix {
    ElementId element_id;
    double prefix;

    friend bool operator==(const LeafPrefix&, const LeafPrefix&) = default;
};

/// S_0 = 0, S_i = S_{i-1} + w_{i-1} along the DFS leaf order.
/// `weights` is indexed by element id.
inline std::vector<LeafPrefix> prefix_sums(const RefinementForest& forest,
                                           std::span<const double> weights) {
    std::vector<LeafPrefix> out;
    double running = 0.0;
    for (ElementId id : dfs_leaf_order(forest)) {
        const double w = detail::leaf_weight(weights, id);
        out.push_back({id, running});
        running += w;
    }
    return out;
}

/// Single-traversal partition of the leaves into p contiguous DFS runs.
inline PartitionAssignment partition_serial(const RefinementForest& forest,
                                            std::span<const double> weights, int p) {
    detail::require(p >= 1, errc::invalid_argument, "part count must be at least 1");
    const auto order = dfs_leaf_order(forest);
    double total = 0.0;
    for (ElementId id : order) total += detail::leaf_weight(weights, id);
    detail::require(total > 0.0, errc::degenerate_input, "total leaf weight is zero");

    PartitionAssignment out(p, forest.capacity());
    double running = 0.0;
    for (ElementId id : order) {
        out.part_of[id] = part_for_prefix(running, total, p);
        running += weights[id];
    }
    return out;
}

/// Emulation of the distributed three-step algorithm. `blocks[r]` holds the
/// leaves owned by virtual rank r; together the blocks must cover the DFS
/// order in consecutive runs, block r before block r+1 (empty blocks allowed).
///   1. every rank sums its local leaf weights W_r;
///   2. an exclusive scan hands rank r the sum of W_k for k < r;
///   3. every rank walks its leaves, extending that offset by each leaf's
///      weight, and applies the interval rule.
inline PartitionAssignment partition_scanned(const RefinementForest& forest,
                                             std::span<const double> weights, int p,
                                             std::span<const std::vector<ElementId>> blocks) {
    detail::require(p >= 1, errc::invalid_argument, "part count must be at least 1");
    const auto order = dfs_leaf_order(forest);

    // Local visit order of each rank = DFS order restricted to its block.
    std::vector<std::size_t> position(forest.capacity(), order.size());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;
    std::vector<std::vector<ElementId>> local(blocks.size());
    std::size_t next = 0;
    for (std::size_t r = 0; r < blocks.size(); ++r) {
        std::vector<std::size_t> pos;
        pos.reserve(blocks[r].size());
        for (ElementId id : blocks[r]) {
            if (id >= position.size() || position[id] == order.size()) {
                detail::fail(errc::invalid_argument,
                             "block element " + std::to_string(id) + " is not a forest leaf");
            }
            pos.push_back(position[id]);
        }
        std::sort(pos.begin(), pos.end());
        for (std::size_t q : pos) {
            if (q != next) {
                detail::fail(errc::invalid_argument, "blocks are not a contiguous cover of the DFS order");
            }
            ++next;
            local[r].push_back(order[q]);
        }
    }
    if (next != order.size()) {
        detail::fail(errc::invalid_argument, "blocks do not cover every leaf");
    }

    // Step 1.
    std::vector<double> rank_weight(local.size(), 0.0);
    for (std::size_t r = 0; r < local.size(); ++r) {
        for (ElementId id : local[r]) rank_weight[r] += detail::leaf_weight(weights, id);
    }
    // Step 2.
    const std::vector<double> offset = scan_emulate(rank_weight);
    const double total = local.empty() ? 0.0 : offset.back() + rank_weight.back();
    detail::require(total > 0.0, errc::degenerate_input, "total leaf weight is zero");
    // Step 3.
    PartitionAssignment out(p, forest.capacity());
    for (std::size_t r = 0; r < local.size(); ++r) {
        double s = offset[r];
        for (ElementId id : local[r]) {
            out.part_of[id] = part_for_prefix(s, total, p);
            s += weights[id];
        }
    }
    return out;
}

/// Blocks made of the maximal runs of equal owner along the DFS order; a valid
/// `blocks` argument for partition_scanned whatever the ownership looks like.
inline std::vector<std::vector<ElementId>> dfs_owner_blocks(const RefinementForest& forest,
                                                            const PartitionAssignment& owner) {
    std::vector<std::vector<ElementId>> blocks;
    int current = -2;
    for (ElementId id : dfs_leaf_order(forest)) {
        const int o = owner.assigned(id) ? owner.part_of[id] : -1;
        if (blocks.empty() || o != current) {
            blocks.emplace_back();
            current = o;
        }
        blocks.back().push_back(id);
    }
    return blocks;
}

/// Fraction of consecutive DFS leaf pairs that share a face (1 when fewer than two leaves).
inline double dfs_face_share_rate(const TetMesh& mesh, const RefinementForest& forest) {
    const auto order = dfs_leaf_order(forest);
    if (order.size() < 2) return 1.0;
    std::size_t shared = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        auto a = mesh.tet(order[i]).vertices;
        auto b = mesh.tet(order[i + 1]).vertices;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        std::array<VertexId, 4> common{};
        const auto end = std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), common.begin());
        if (end - common.begin() >= 3) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(order.size() - 1);
}

} // namespace tetlb
