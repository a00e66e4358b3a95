#include "dalab/torus_geometry.hpp"

#include <cmath>
#include <limits>

#include "dalab/errors.hpp"

namespace dalab {

double wrap_unit(double x) {
    if (!std::isfinite(x)) throw PreconditionError("non-finite coordinate");
    double y = x - std::floor(x);
    if (y >= 1.0 - kSnapTolerance) y = 0.0;
    return y;
}

TorusPoint3 project(const Vec3& p) {
    return TorusPoint3{Vec3(wrap_unit(p[0]), wrap_unit(p[1]), wrap_unit(p[2]))};
}

TorusPoint3 project(const Lift3& p) { return project(p.coords); }

TorusPoint2 project(const Vec2& p) {
    return TorusPoint2{Vec2(wrap_unit(p[0]), wrap_unit(p[1]))};
}

AdaptedFrame::AdaptedFrame(const Mat3& basis) : basis_(basis), inverse_(basis.inverse()) {
    if (!inverse_.allFinite()) throw NumericalError("adapted frame is singular");
    // Adapted norm ≥ |m| / ‖P‖, so only |m|∞ ≤ ‖P‖·best needs scanning.
    basis_norm_ = Eigen::JacobiSVD<Mat3>(basis_).singularValues()[0];
    const double p_norm = basis_norm_;
    double best = std::numeric_limits<double>::infinity();
    int reach = 1;
    for (int pass = 0; pass < 2; ++pass) {
        for (int i = -reach; i <= reach; ++i)
            for (int j = -reach; j <= reach; ++j)
                for (int k = -reach; k <= reach; ++k) {
                    if (i == 0 && j == 0 && k == 0) continue;
                    best = std::min(best, norm(Vec3(i, j, k)));
                }
        reach = static_cast<int>(std::ceil(p_norm * best));
    }
    unique_radius_ = 0.5 * best;
}

Vec3 nearest_lift(const TorusPoint3& xi, const AdaptedFrame& frame) {
    const Vec3& x = xi.coords;
    Vec3 guess(x[0] - std::round(x[0]), x[1] - std::round(x[1]), x[2] - std::round(x[2]));
    if (frame.norm(guess) < frame.unique_radius()) return guess;

    Vec3 best_v = x;
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) {
                Vec3 v = x - Vec3(i, j, k);
                double n = frame.norm(v);
                if (n < best) {
                    best = n;
                    best_v = v;
                }
            }
    return best_v;
}

Vec3 local_chart(const TorusPoint3& xi, const AdaptedFrame& frame) {
    return frame.to_chart(nearest_lift(xi, frame));
}

std::optional<Vec3> chart_within(const TorusPoint3& xi, const AdaptedFrame& frame, double radius) {
    if (frame.basis_norm() * radius < 0.5) {
        // Only the rounded translate can be that close.
        const Vec3& x = xi.coords;
        Vec3 c = frame.to_chart(Vec3(x[0] - std::round(x[0]), x[1] - std::round(x[1]), x[2] - std::round(x[2])));
        if (c.squaredNorm() < radius * radius) return c;
        return std::nullopt;
    }
    Vec3 c = local_chart(xi, frame);
    if (c.norm() < radius) return c;
    return std::nullopt;
}

TorusPoint3 chart_to_torus(const Vec3& chart, const AdaptedFrame& frame) {
    return project(frame.from_chart(chart));
}

double adapted_distance(const TorusPoint3& xi, const TorusPoint3& eta, const AdaptedFrame& frame) {
    TorusPoint3 diff{xi.coords - eta.coords};
    return frame.norm(nearest_lift(diff, frame));
}

Vec2 torus_difference(const TorusPoint2& x, const TorusPoint2& y) {
    Vec2 d = x.coords - y.coords;
    for (int i = 0; i < 2; ++i) d[i] -= std::floor(d[i] + 0.5);
    return d;
}

double torus_distance(const TorusPoint2& x, const TorusPoint2& y) {
    return torus_difference(x, y).norm();
}

}  // namespace dalab
