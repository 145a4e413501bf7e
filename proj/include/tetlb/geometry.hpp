#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>

namespace tetlb {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;

    double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, Point3 a) { return {s * a.x, s * a.y, s * a.z}; }

inline double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(Point3 a, Point3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double squared_distance(Point3 a, Point3 b) { return dot(a - b, a - b); }

inline Point3 midpoint(Point3 a, Point3 b) { return 0.5 * (a + b); }

/// Signed volume; positive when (b-a, c-a, d-a) is right-handed.
inline double signed_volume(Point3 a, Point3 b, Point3 c, Point3 d) {
    return dot(b - a, cross(c - a, d - a)) / 6.0;
}

/// Axis-aligned box stored as min corner plus per-axis extents.
struct BoundingBox {
    Point3 min;
    std::array<double, 3> len{0.0, 0.0, 0.0};

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

    double max_len() const { return std::max({len[0], len[1], len[2]}); }

    static BoundingBox of(std::span<const Point3> points) {
        if (points.empty()) return {};
        Point3 lo = points.front();
        Point3 hi = points.front();
        for (const Point3& p : points) {
            lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
            hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        }
        return {lo, {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z}};
    }
};

} // namespace tetlb
