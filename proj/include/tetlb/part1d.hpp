#pragma once

// Multi-section 1D partitioner.
//
// Finds p-1 cuts in a key interval so the weight between consecutive cuts is
// as equal as the items allow. Each cut keeps its own search box; every
// iteration splits each unresolved box into k equal subintervals, one pass
// over the items bins their weights against the union of all subinterval
// boundaries, and each box shrinks to the subinterval holding its target
// cumulative weight W*i/p. A box is resolved when it holds a single distinct
// key (or at most tol*W weight); the cut is then snapped onto the item that
// straddles the target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/parallel.hpp"
#include "tetlb/partition.hpp"

namespace tetlb {

template <class Key>
struct WeightedKey {
    Key key{};
    double weight = 1.0;
    ElementId owner = 0;

    friend bool operator==(const WeightedKey&, const WeightedKey&) = default;
};

/// Keys are reals in [0, 1).
struct UnitInterval {
    using key_type = double;

    double upper() const { return 1.0; }
    bool contains(double key) const { return key >= 0.0 && key < 1.0; }
    double split(double lo, double hi, int t, int k) const {
        if (t == k) return hi;
        return lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(k);
    }
};

/// Keys are integers in [0, 2^bits), bits <= 63; used for raw curve keys so
/// no precision is lost converting them to reals.
struct IntegerKeySpace {
    using key_type = std::uint64_t;
    int bits = 63;

    std::uint64_t upper() const { return std::uint64_t{1} << bits; }
    bool contains(std::uint64_t key) const { return key < upper(); }
    std::uint64_t split(std::uint64_t lo, std::uint64_t hi, int t, int k) const {
        const unsigned __int128 width = hi - lo;
        return lo + static_cast<std::uint64_t>(width * static_cast<unsigned>(t) / static_cast<unsigned>(k));
    }
};

struct Part1dOptions {
    int k = 4;
    double tol = 0.0;
    int max_iter = 64;
    ExecPolicy exec{};
};

/// a_1 <= ... <= a_{p-1}; part i is [a_i, a_{i+1}) with a_0 = lower end, a_p = upper end.
template <class Key>
struct CutSet {
    std::vector<Key> cuts;

    friend bool operator==(const CutSet&, const CutSet&) = default;
};

template <class Key>
struct Part1dResult {
    CutSet<Key> cuts;
    PartitionAssignment assignment; ///< keyed by item owner
    std::vector<int> item_parts;    ///< aligned with the input items
    int iterations = 0;
    bool converged = true; ///< every box resolved before max_iter
};

/// Stable (key, owner) order; `items` must already be sorted this way.
/// Returns the total weight of items with key < x.
template <class Key>
double cumulative_weight(std::span<const WeightedKey<Key>> items, Key x) {
    double sum = 0.0;
    for (const auto& item : items) {
        if (!(item.key < x)) break;
        sum += item.weight;
    }
    return sum;
}

template <class Key>
void sort_items(std::vector<WeightedKey<Key>>& items) {
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        return a.key != b.key ? a.key < b.key : a.owner < b.owner;
    });
}

template <class Domain = UnitInterval>
Part1dResult<typename Domain::key_type> partition_1d(
    std::span<const WeightedKey<typename Domain::key_type>> items, int p, Part1dOptions opt = {},
    Domain domain = {}) {
    using Key = typename Domain::key_type;
    detail::require(p >= 1, errc::invalid_argument, "part count must be at least 1");
    detail::require(opt.k >= 2, errc::invalid_argument, "k must be at least 2");
    detail::require(opt.max_iter >= 0, errc::invalid_argument, "max_iter must be nonnegative");
    detail::require(opt.tol >= 0.0, errc::invalid_argument, "tol must be nonnegative");
    detail::require(!items.empty(), errc::invalid_argument, "no items to partition");
    ElementId max_owner = 0;
    for (const auto& item : items) {
        detail::require(domain.contains(item.key), errc::invalid_argument, "key out of range");
        detail::require(std::isfinite(item.weight) && item.weight >= 0.0, errc::invalid_argument,
                        "item weight must be finite and nonnegative");
        max_owner = std::max(max_owner, item.owner);
    }

    const std::size_t n = items.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = items[a];
        const auto& y = items[b];
        return x.key != y.key ? x.key < y.key : x.owner < y.owner;
    });
    std::vector<Key> keys(n);
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        keys[j] = items[order[j]].key;
        prefix[j + 1] = prefix[j] + items[order[j]].weight;
    }
    const double total = prefix[n];
    detail::require(total > 0.0, errc::invalid_argument, "total item weight is zero");

    Part1dResult<Key> result;
    result.item_parts.assign(n, 0);
    result.assignment = PartitionAssignment(p, static_cast<std::size_t>(max_owner) + 1);

    // Cut i (1-based) targets cumulative weight W*i/p; a weight c lies past the
    // target when c*p > W*i.
    const auto past = [&](double c, int i) {
        return c * static_cast<double>(p) > total * static_cast<double>(i);
    };

    struct Box {
        Key lo;
        Key hi;
        bool active = true;
    };
    std::vector<Box> boxes(static_cast<std::size_t>(p - 1), Box{Key{}, domain.upper(), true});
    const auto item_range = [&](const Box& b) {
        const auto first = std::lower_bound(keys.begin(), keys.end(), b.lo) - keys.begin();
        const auto last = std::lower_bound(keys.begin(), keys.end(), b.hi) - keys.begin();
        return std::pair<std::size_t, std::size_t>(static_cast<std::size_t>(first),
                                                   static_cast<std::size_t>(last));
    };
    const auto resolved = [&](const Box& b) {
        const auto [first, last] = item_range(b);
        if (last <= first) return true;
        if (keys[first] == keys[last - 1]) return true;
        return prefix[last] - prefix[first] <= opt.tol * total;
    };

    std::vector<Key> bounds;
    std::vector<double> bins;
    while (true) {
        bool any_active = false;
        for (Box& b : boxes) {
            if (b.active && resolved(b)) b.active = false;
            any_active = any_active || b.active;
        }
        if (!any_active) break;
        if (result.iterations == opt.max_iter) {
            result.converged = false;
            break;
        }
        ++result.iterations;

        bounds.clear();
        for (const Box& b : boxes) {
            if (!b.active) continue;
            for (int t = 0; t <= opt.k; ++t) bounds.push_back(domain.split(b.lo, b.hi, t, opt.k));
        }
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

        // bins[q] = weight of items with exactly q boundaries <= key.
        const std::size_t shards = shard_count(n);
        std::vector<std::vector<double>> partial(shards, std::vector<double>(bounds.size() + 1, 0.0));
        for_each_shard(n, opt.exec, [&](std::size_t s, std::size_t begin, std::size_t end) {
            auto& local = partial[s];
            for (std::size_t j = begin; j < end; ++j) {
                const auto q = std::upper_bound(bounds.begin(), bounds.end(), keys[j]) - bounds.begin();
                local[static_cast<std::size_t>(q)] += items[order[j]].weight;
            }
        });
        bins.assign(bounds.size() + 1, 0.0);
        for (const auto& local : partial) {
            for (std::size_t q = 0; q < bins.size(); ++q) bins[q] += local[q];
        }
        // below[q] = cumulative weight strictly below bounds[q].
        std::vector<double> below(bounds.size(), 0.0);
        double running = 0.0;
        for (std::size_t q = 0; q < bounds.size(); ++q) {
            running += bins[q];
            below[q] = running;
        }
        const auto cw = [&](Key x) {
            const auto q = std::lower_bound(bounds.begin(), bounds.end(), x) - bounds.begin();
            return below[static_cast<std::size_t>(q)];
        };

        for (std::size_t c = 0; c < boxes.size(); ++c) {
            Box& b = boxes[c];
            if (!b.active) continue;
            const int target = static_cast<int>(c) + 1;
            Key lo = b.lo;
            Key hi = b.hi;
            for (int t = 1; t <= opt.k; ++t) {
                const Key edge = domain.split(b.lo, b.hi, t, opt.k);
                if (past(cw(edge), target)) {
                    hi = edge;
                    break;
                }
                lo = edge;
            }
            if (lo == b.lo && hi == b.hi) {
                b.active = false; // no representable split left
            } else {
                b.lo = lo;
                b.hi = hi;
            }
        }
    }

    // Snap each cut to the key of the item whose weight straddles the target.
    result.cuts.cuts.resize(boxes.size());
    for (std::size_t c = 0; c < boxes.size(); ++c) {
        const int target = static_cast<int>(c) + 1;
        const auto [first, last] = item_range(boxes[c]);
        std::size_t j = n;
        for (std::size_t q = first; q < last; ++q) {
            if (past(prefix[q + 1], target)) {
                j = q;
                break;
            }
        }
        if (j == n || (j > 0 && past(prefix[j], target))) {
            // Box lost the target through rounding of real weights: search globally.
            j = static_cast<std::size_t>(
                std::partition_point(prefix.begin() + 1, prefix.end(),
                                     [&](double s) { return !past(s, target); }) -
                (prefix.begin() + 1));
            j = std::min(j, n - 1);
        }
        result.cuts.cuts[c] = keys[j];
    }

    // Interval membership, except that items whose key equals a cut follow the
    // prefix-weight rule in (key, owner) order, limited to the parts that cut spans.
    const auto& cuts = result.cuts.cuts;
    for (std::size_t j = 0; j < n; ++j) {
        const auto lo = static_cast<int>(std::lower_bound(cuts.begin(), cuts.end(), keys[j]) - cuts.begin());
        const auto hi = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), keys[j]) - cuts.begin());
        const int part = lo == hi ? lo : std::clamp(part_for_prefix(prefix[j], total, p), lo, hi);
        result.item_parts[order[j]] = part;
        result.assignment.part_of[items[order[j]].owner] = part;
    }
    return result;
}

template <class Domain = UnitInterval>
Part1dResult<typename Domain::key_type> partition_1d(
    const std::vector<WeightedKey<typename Domain::key_type>>& items, int p, Part1dOptions opt = {},
    Domain domain = {}) {
    return partition_1d<Domain>(std::span<const WeightedKey<typename Domain::key_type>>(items), p, opt,
                                domain);
}

} // namespace tetlb
