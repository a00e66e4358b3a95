#pragma once

#include <Eigen/Dense>
#include <optional>

namespace dalab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Values within this distance below 1 reduce to 0.
inline constexpr double kSnapTolerance = 1e-14;

double wrap_unit(double x);

struct Lift3 {
    Vec3 coords = Vec3::Zero();
};

struct TorusPoint3 {
    Vec3 coords = Vec3::Zero();
};

struct TorusPoint2 {
    Vec2 coords = Vec2::Zero();
};

TorusPoint3 project(const Lift3& p);
TorusPoint3 project(const Vec3& p);
TorusPoint2 project(const Vec2& p);

// Columns of basis() are the unit eigenvectors (e_s, e_c, e_u) of B.
// The adapted inner product makes them orthonormal.
class AdaptedFrame {
public:
    AdaptedFrame() = default;
    explicit AdaptedFrame(const Mat3& basis);

    const Mat3& basis() const { return basis_; }
    const Mat3& inverse() const { return inverse_; }

    Vec3 to_chart(const Vec3& v) const { return inverse_ * v; }
    Vec3 from_chart(const Vec3& c) const { return basis_ * c; }
    double norm(const Vec3& v) const { return (inverse_ * v).norm(); }

    // Half the adapted length of the shortest nonzero lattice vector. Any
    // lift whose adapted norm is below this is the unique nearest lift.
    double unique_radius() const { return unique_radius_; }
    double shortest_lattice_vector() const { return 2.0 * unique_radius_; }
    // ‖basis‖₂: a lift within adapted radius ρ lies within ‖basis‖·ρ in the
    // standard norm.
    double basis_norm() const { return basis_norm_; }

private:
    Mat3 basis_ = Mat3::Identity();
    Mat3 inverse_ = Mat3::Identity();
    double unique_radius_ = 0.5;
    double basis_norm_ = 1.0;
};

// Representative of ξ − m over the 27 translates m ∈ {−1,0,1}³ closest to the
// origin in the adapted metric. Exact ties go to the lexicographically
// smallest m.
Vec3 nearest_lift(const TorusPoint3& xi, const AdaptedFrame& frame);

Vec3 local_chart(const TorusPoint3& xi, const AdaptedFrame& frame);
// Chart coordinates of ξ if some lift lies within the given adapted radius
// of a lattice point.
std::optional<Vec3> chart_within(const TorusPoint3& xi, const AdaptedFrame& frame, double radius);
TorusPoint3 chart_to_torus(const Vec3& chart, const AdaptedFrame& frame);

double adapted_distance(const TorusPoint3& xi, const TorusPoint3& eta, const AdaptedFrame& frame);

// Flat distance on T² (minimum over lattice translates).
double torus_distance(const TorusPoint2& x, const TorusPoint2& y);
// Signed shortest representative of x − y in [−1/2, 1/2)².
Vec2 torus_difference(const TorusPoint2& x, const TorusPoint2& y);

}  // namespace dalab
