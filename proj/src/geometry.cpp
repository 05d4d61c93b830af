#include "boxvote/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boxvote {

double volume(const Aabb& b) {
    return b.size.x * b.size.y * b.size.z;
}

double iou_aabb(const Aabb& a, const Aabb& b) {
    const Vec3 a_lo = a.min_corner(), a_hi = a.max_corner();
    const Vec3 b_lo = b.min_corner(), b_hi = b.max_corner();

    double inter = 1.0, vol_a = 1.0, vol_b = 1.0;
    for (int i = 0; i < 3; ++i) {
        const double overlap = std::min(a_hi[i], b_hi[i]) - std::max(a_lo[i], b_lo[i]);
        if (overlap <= 0.0) return 0.0;
        inter *= overlap;
        // Both volumes from the same corner intervals so iou(a, a) == 1 exactly.
        vol_a *= a_hi[i] - a_lo[i];
        vol_b *= b_hi[i] - b_lo[i];
    }
    return inter / (vol_a + vol_b - inter);
}

bool contains(const Aabb& b, const Vec3& p) {
    const Vec3 lo = b.min_corner(), hi = b.max_corner();
    return p.x >= lo.x && p.x <= hi.x &&
           p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
}

Aabb fit_aabb(const std::vector<Vec3>& points, int label) {
    if (points.empty()) throw std::invalid_argument("fit_aabb: empty point set");

    Vec3 lo = points.front(), hi = points.front();
    for (const Vec3& p : points) {
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    Aabb box;
    box.center = (lo + hi) * 0.5;
    box.size = hi - lo;
    for (int i = 0; i < 3; ++i) box.size[i] = std::max(box.size[i], kMinBoxExtent);
    box.label = label;
    // (lo+hi)/2 +- (hi-lo)/2 can round inward and exclude the extreme points
    // that defined the box; grow by ulps until they are back inside
    for (int i = 0; i < 3; ++i)
        while (box.min_corner()[i] > lo[i] || box.max_corner()[i] < hi[i])
            box.size[i] = std::nextafter(box.size[i],
                                         std::numeric_limits<double>::infinity());
    return box;
}

}  // namespace boxvote
