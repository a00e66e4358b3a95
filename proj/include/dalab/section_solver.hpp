#pragma once

#include <vector>

#include "dalab/da_map.hpp"

namespace dalab {

// t ∈ L(E^u, E^s⊕E^c): e_u ↦ t_s·e_s + t_c·e_c.
struct Slope {
    Vec2 t = Vec2::Zero();
    double norm() const { return t.norm(); }
    Vec3 direction() const;  // unit chart vector spanning graph(t)
};

Slope graph_transform(const DAMap& g, const TorusPoint3& xi, const Slope& t);
Slope graph_transform(const Jacobian3& J, const Slope& t);

// g⁻¹ξ, g⁻²ξ, ..., g⁻ⁿξ.
std::vector<TorusPoint3> backward_orbit(const DAMap& g, const TorusPoint3& xi, int n);

Slope unstable_slope(const DAMap& g, const TorusPoint3& xi, int n);
Vec3 unstable_direction(const DAMap& g, const TorusPoint3& xi, int n);

// Dominant in-plane direction at ξ by forward push from g⁻ⁿξ, with the log
// growth of the pushed vector over those n steps.
struct PlanePush {
    Vec2 direction = Vec2(0, 1);
    double log_growth = 0.0;
};
PlanePush push_plane(const DAMap& g, const std::vector<TorusPoint3>& backward, Vec2 start);
Vec3 central_direction(const DAMap& g, const TorusPoint3& xi, int n);
// Dominant in-plane direction of the inverse cocycle, pulled back from gⁿξ.
Vec3 stable_direction(const DAMap& g, const TorusPoint3& xi, int n);
BundleDirections bundle_at(const DAMap& g, const TorusPoint3& xi, int n_unstable, int n_plane);

double lip_constant(const DAMap& g, const TorusPoint3& xi);
double tau_constant(const DAMap& g, const TorusPoint3& xi);
// sup l_ξ = (λ_c + b + k)/λ_u, attained at p.
double lip_sup(const DAMap& g);
// Smallest n with 2·l̄ⁿ < tol.
int default_bundle_iterations(const DAMap& g, double tol = 1e-10);

struct SmoothnessCertificate {
    int a = 0;
    double k = 0, r = 0;
    double bound_outside = 0, bound_inside = 0;
    double log10_bound_outside = 0, log10_bound_inside = 0;
    bool verdict = false;
};

// Closed-form constants 100·a^{4(r−1)}/a⁸ and 10⁴·a^{4(r−1)}/a⁸.
SmoothnessCertificate certificate(int a, double k, double r);
// Largest r with 10⁴·a^{4(r−1)−8} ≤ 1, i.e. 3 − 1/log₁₀ a.
double smoothness_max(double a);

struct PointwiseCertificate {
    double r = 0;
    int grid = 0;
    double sup = 0;
    double at_p = 0;
    double outside = 0;
    double sup_radius = 0, sup_height = 0;  // chart location of the sup (r = x²+y², z)
    bool verdict = false;
};

// sup of l_ξ·τ_ξ^r over chart points. Both factors depend on (x²+y², z) only,
// so the grid is grid×grid in (log r, z) plus p and the outside value.
PointwiseCertificate pointwise_certificate(const DAMap& g, double r, int grid);

}  // namespace dalab
