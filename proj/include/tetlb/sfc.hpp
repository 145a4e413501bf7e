#pragma once

// Space-filling-curve keys for mesh elements.
//
// Coordinates are first mapped into the unit cube relative to the mesh bounding
// box, either dividing every axis by the largest extent (keeps the domain's
// shape) or each axis by its own extent (stretches it to a cube). Each axis is
// then quantized to m bits and turned into a 3m-bit Morton or Hilbert key.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tetlb/error.hpp"
#include "tetlb/geometry.hpp"
#include "tetlb/mesh.hpp"
#include "tetlb/parallel.hpp"

namespace tetlb {

enum class NormalizeMode { PreserveAspect, StretchToUnit };
enum class CurveKind { Morton, Hilbert };

using SfcKey = std::uint64_t;

inline constexpr int max_curve_order = 21;
inline constexpr int default_curve_order = 21;

/// Largest coordinate handed to the quantizer: 1 - 2^-(m+1).
inline double unit_upper_bound(int order) { return 1.0 - std::ldexp(1.0, -order - 1); }

namespace detail {

inline void check_order(int order) {
    require(order >= 1 && order <= max_curve_order, errc::invalid_argument,
            "curve order must be in [1, 21]");
}

inline std::array<std::uint32_t, 3> quantize(const Point3& c, int order) {
    check_order(order);
    std::array<std::uint32_t, 3> q{};
    const double scale = std::ldexp(1.0, order);
    for (int a = 0; a < 3; ++a) {
        const double v = c[a];
        if (!(v >= 0.0 && v < 1.0)) fail(errc::invalid_argument, "coordinate outside [0,1)");
        q[a] = static_cast<std::uint32_t>(std::floor(v * scale));
    }
    return q;
}

// Spreads the low 21 bits of x so that bit i lands on bit 3i.
constexpr std::uint64_t spread_bits(std::uint64_t x) {
    x &= 0x1fffff;
    x = (x | x << 32) & 0x1f00000000ffffull;
    x = (x | x << 16) & 0x1f0000ff0000ffull;
    x = (x | x << 8) & 0x100f00f00f00f00full;
    x = (x | x << 4) & 0x10c30c30c30c30c3ull;
    x = (x | x << 2) & 0x1249249249249249ull;
    return x;
}

// Hilbert state machine: a state is an (entry corner, direction) pair of the
// Gray-code traversal of the octants. Transitions are generated at compile time
// from the traversal rules; 12 states are reachable from the initial one.
namespace hilbert {

constexpr unsigned rotr3(unsigned x, unsigned r) {
    r %= 3;
    return ((x >> r) | (x << (3 - r))) & 7u;
}
constexpr unsigned rotl3(unsigned x, unsigned r) {
    r %= 3;
    return ((x << r) | (x >> (3 - r))) & 7u;
}
constexpr unsigned gray(unsigned i) { return i ^ (i >> 1); }
constexpr unsigned gray_inverse(unsigned g) { return g ^ (g >> 1) ^ (g >> 2); }
constexpr unsigned trailing_ones(unsigned i) {
    unsigned c = 0;
    while (i & 1u) {
        ++c;
        i >>= 1;
    }
    return c;
}
constexpr unsigned entry_corner(unsigned w) { return w == 0 ? 0 : gray(2 * ((w - 1) / 2)); }
constexpr unsigned exit_axis(unsigned w) {
    if (w == 0) return 0;
    return (w % 2 == 0 ? trailing_ones(w - 1) : trailing_ones(w)) % 3;
}

struct Table {
    int states = 0;
    std::array<std::array<std::uint8_t, 8>, 24> digit{};
    std::array<std::array<std::uint8_t, 8>, 24> next{};
};

constexpr Table build_table() {
    Table t;
    std::array<unsigned, 24> entry{};
    std::array<unsigned, 24> dir{};
    entry[0] = 0;
    dir[0] = 0;
    t.states = 1;
    for (int s = 0; s < t.states; ++s) {
        for (unsigned octant = 0; octant < 8; ++octant) {
            const unsigned w = gray_inverse(rotr3(octant ^ entry[s], dir[s] + 1));
            const unsigned e2 = entry[s] ^ rotl3(entry_corner(w), dir[s] + 1);
            const unsigned d2 = (dir[s] + exit_axis(w) + 1) % 3;
            int found = -1;
            for (int k = 0; k < t.states; ++k) {
                if (entry[k] == e2 && dir[k] == d2) found = k;
            }
            if (found < 0) {
                found = t.states++;
                entry[found] = e2;
                dir[found] = d2;
            }
            t.digit[s][octant] = static_cast<std::uint8_t>(w);
            t.next[s][octant] = static_cast<std::uint8_t>(found);
        }
    }
    return t;
}

inline constexpr Table table = build_table();
static_assert(table.states == 12);

} // namespace hilbert

} // namespace detail

/// Maps points into [0,1)^3 relative to `bbox`.
///
/// PreserveAspect divides every axis by max(len_x, len_y, len_z), so an
/// elongated domain keeps its shape inside a slab of the cube; StretchToUnit
/// divides each axis by its own length (a zero-length axis maps to 0).
/// Results are clamped to [0, 1 - 2^-(order+1)].
inline std::vector<Point3> normalize(std::span<const Point3> points, const BoundingBox& bbox,
                                     NormalizeMode mode, int order = default_curve_order) {
    detail::check_order(order);
    const double len = bbox.max_len();
    detail::require(len > 0.0, errc::degenerate_input, "bounding box has zero extent");
    const double tol = 1e-12 * len;
    const double upper = unit_upper_bound(order);
    std::array<double, 3> scale{};
    for (int a = 0; a < 3; ++a) {
        const double axis_len = mode == NormalizeMode::PreserveAspect ? len : bbox.len[a];
        scale[a] = axis_len > 0.0 ? axis_len : 1.0;
    }
    std::vector<Point3> out;
    out.reserve(points.size());
    for (const Point3& p : points) {
        std::array<double, 3> u{};
        for (int a = 0; a < 3; ++a) {
            const double offset = p[a] - bbox.min[a];
            if (!(offset >= -tol && offset <= bbox.len[a] + tol)) {
                detail::fail(errc::invalid_argument, "point outside the bounding box");
            }
            u[a] = std::clamp(offset / scale[a], 0.0, upper);
        }
        out.push_back({u[0], u[1], u[2]});
    }
    return out;
}

inline SfcKey morton_key(const Point3& coord, int order = default_curve_order) {
    const auto q = detail::quantize(coord, order);
    return (detail::spread_bits(q[0]) << 2) | (detail::spread_bits(q[1]) << 1) |
           detail::spread_bits(q[2]);
}

/// Morton key of lattice cell (x, y, z) in a 2^order cube.
inline SfcKey morton_key_of_cell(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    return (detail::spread_bits(x) << 2) | (detail::spread_bits(y) << 1) | detail::spread_bits(z);
}

/// Hilbert key of lattice cell (x, y, z) in a 2^order cube; octant bits are
/// (x << 2) | (y << 1) | z, most significant level first.
inline SfcKey hilbert_key_of_cell(std::uint32_t x, std::uint32_t y, std::uint32_t z, int order) {
    const auto& table = detail::hilbert::table;
    SfcKey key = 0;
    int state = 0;
    for (int level = order - 1; level >= 0; --level) {
        const unsigned octant = (((x >> level) & 1u) << 2) | (((y >> level) & 1u) << 1) |
                                ((z >> level) & 1u);
        key = (key << 3) | table.digit[state][octant];
        state = table.next[state][octant];
    }
    return key;
}

inline SfcKey hilbert_key(const Point3& coord, int order = default_curve_order) {
    const auto q = detail::quantize(coord, order);
    return hilbert_key_of_cell(q[0], q[1], q[2], order);
}

inline SfcKey curve_key(CurveKind kind, const Point3& coord, int order) {
    return kind == CurveKind::Morton ? morton_key(coord, order) : hilbert_key(coord, order);
}

struct ElementKey {
    ElementId element_id;
    SfcKey key;
    double weight;

    friend bool operator==(const ElementKey&, const ElementKey&) = default;
};

/// Curve key of every live element's barycenter, ascending element id.
inline std::vector<ElementKey> element_keys(const TetMesh& mesh, NormalizeMode mode, CurveKind kind,
                                            int order = default_curve_order, ExecPolicy exec = {}) {
    detail::check_order(order);
    const auto live = mesh.live_elements();
    detail::require(!live.empty(), errc::invalid_argument, "mesh has no elements");
    const BoundingBox bbox = mesh.bbox();
    std::vector<ElementKey> out(live.size());
    for_each_shard(live.size(), exec, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<Point3> centers;
        centers.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) centers.push_back(mesh.barycenter(live[i]));
        const auto unit = normalize(centers, bbox, mode, order);
        for (std::size_t i = begin; i < end; ++i) {
            const ElementId id = live[i];
            out[i] = {id, curve_key(kind, unit[i - begin], order), mesh.tet(id).weight};
        }
    });
    return out;
}

} // namespace tetlb
