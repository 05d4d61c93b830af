#pragma once

#include <cmath>
#include <vector>

namespace boxvote {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    bool operator==(const Vec3& o) const = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double squared_norm() const { return x * x + y * y + z * z; }
    double l1_norm() const { return std::fabs(x) + std::fabs(y) + std::fabs(z); }
};

// Fitted boxes with planar or degenerate extents are padded up to this size
// so box volume stays positive.
inline constexpr double kMinBoxExtent = 1e-3;

// Axis-aligned box, center/size parameterization, with a semantic class id.
struct Aabb {
    Vec3 center;
    Vec3 size;   // width, height, depth; all > 0
    int label = 0;

    Vec3 min_corner() const { return center - size * 0.5; }
    Vec3 max_corner() const { return center + size * 0.5; }

    bool operator==(const Aabb& o) const = default;
};

double volume(const Aabb& b);

// Intersection-over-union of the box volumes. Symmetric, in [0, 1],
// 0 for disjoint interiors, exactly 1 for identical corner intervals.
// Computed from corner intervals, not center/size differences.
double iou_aabb(const Aabb& a, const Aabb& b);

// Closed-box containment: points on the boundary count as inside.
bool contains(const Aabb& b, const Vec3& p);

// Tightest axis-aligned box around the points; degenerate extents are
// padded to kMinBoxExtent. Throws std::invalid_argument on empty input.
Aabb fit_aabb(const std::vector<Vec3>& points, int label);

}  // namespace boxvote
