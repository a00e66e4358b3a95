#include "dalab/section_solver.hpp"

#include <cmath>
#include <string>

#include "dalab/errors.hpp"

namespace dalab {

Vec3 Slope::direction() const {
    Vec3 d(t[0], t[1], 1.0);
    return d / d.norm();
}

Slope graph_transform(const Jacobian3& J, const Slope& t) {
    if (!(t.norm() <= 1.0)) throw PreconditionError("slope outside the unit disc");
    const double lu = J.matrix(2, 2);
    Slope s{(J.plane_block() * t.t + J.unstable_column()) / lu};
    if (!(s.norm() <= 1.0)) throw NumericalError("graph transform left the unit disc");
    return s;
}

Slope graph_transform(const DAMap& g, const TorusPoint3& xi, const Slope& t) {
    return graph_transform(g.jacobian(xi), t);
}

std::vector<TorusPoint3> backward_orbit(const DAMap& g, const TorusPoint3& xi, int n) {
    std::vector<TorusPoint3> out;
    out.reserve(n);
    TorusPoint3 x = xi;
    for (int j = 0; j < n; ++j) {
        x = g.apply_inverse(x);
        out.push_back(x);
    }
    return out;
}

Slope unstable_slope(const DAMap& g, const TorusPoint3& xi, int n) {
    if (n < 1) throw PreconditionError("unstable_direction needs n >= 1");
    if (g.is_linear()) return Slope{};
    // Off the support the transform fixes t = 0, so only the stretch from the
    // deepest support visit onward matters.
    Vec3 charts[64];
    std::vector<Vec3> spill;
    Vec3* ch = charts;
    if (n > 64) {
        spill.resize(n);
        ch = spill.data();
    }
    int start = -1;
    TorusPoint3 x = xi;
    for (int j = 0; j < n; ++j) {
        DAMap::Charted r = g.apply_inverse_charted(x);
        x = r.point;
        if (r.chart) {
            ch[j] = *r.chart;
            if (g.surgery_scale(ch[j]) != 0.0) start = j;
        } else {
            ch[j] = Vec3::Constant(g.rho());
        }
    }
    Slope t;
    for (int j = start; j >= 0; --j) t = graph_transform(g.jacobian_chart(ch[j]), t);
    return t;
}

Vec3 unstable_direction(const DAMap& g, const TorusPoint3& xi, int n) { return unstable_slope(g, xi, n).direction(); }

PlanePush push_plane(const DAMap& g, const std::vector<TorusPoint3>& backward, Vec2 start) {
    PlanePush out;
    Vec2 v = start.normalized();
    for (int j = static_cast<int>(backward.size()) - 1; j >= 0; --j) {
        v = g.jacobian(backward[j]).plane_block() * v;
        double n = v.norm();
        out.log_growth += std::log(n);
        v /= n;
    }
    out.direction = v;
    return out;
}

Vec3 central_direction(const DAMap& g, const TorusPoint3& xi, int n) {
    Vec2 v = push_plane(g, backward_orbit(g, xi, n), Vec2(1.0, 1.0)).direction;
    if (v[1] < 0) v = -v;
    return Vec3(v[0], v[1], 0.0);
}

Vec3 stable_direction(const DAMap& g, const TorusPoint3& xi, int n) {
    std::vector<TorusPoint3> fwd;
    fwd.reserve(n);
    TorusPoint3 x = xi;
    for (int j = 0; j < n; ++j) {
        fwd.push_back(x);
        x = g.apply(x);
    }
    Vec2 v(1.0, 1.0);
    v.normalize();
    for (int j = n - 1; j >= 0; --j) {
        v = g.jacobian(fwd[j]).plane_block().lu().solve(v);
        v.normalize();
    }
    if (v[0] < 0) v = -v;
    return Vec3(v[0], v[1], 0.0);
}

BundleDirections bundle_at(const DAMap& g, const TorusPoint3& xi, int n_unstable, int n_plane) {
    return BundleDirections{stable_direction(g, xi, n_plane), central_direction(g, xi, n_plane),
                            unstable_direction(g, xi, n_unstable)};
}

double lip_constant(const DAMap& g, const TorusPoint3& xi) {
    const Spectrum& L = g.model().lambda;
    if (g.is_linear()) return L.c / L.u;
    auto c = g.ball_chart(xi);
    if (!c) return L.c / L.u;
    return (L.c + g.surgery_scale(*c) + g.k()) / L.u;
}

double tau_constant(const DAMap& g, const TorusPoint3& xi) {
    return 1.0 / (g.model().lambda.s + g.lambda1(xi));
}

double lip_sup(const DAMap& g) {
    const Spectrum& L = g.model().lambda;
    return (L.c + g.b() + g.k()) / L.u;
}

int default_bundle_iterations(const DAMap& g, double tol) {
    const double l = lip_sup(g);
    int n = 1;
    while (2.0 * std::pow(l, n) >= tol) ++n;
    return n;
}

SmoothnessCertificate certificate(int a, double k, double r) {
    if (a < 3) throw PreconditionError("certificate needs a >= 3");
    if (!(r >= 1.0 && r < 3.0)) throw PreconditionError("certificate needs 1 <= r < 3, got " + std::to_string(r));
    const double ls = family_spectrum(isolate_roots(a)).s;
    if (!(k > 0.0 && 3.0 * k < ls))
        throw PreconditionError("certificate assumes 0 < 3k < lambda_s(a) = " + std::to_string(ls));
    SmoothnessCertificate c;
    c.a = a;
    c.k = k;
    c.r = r;
    const double la = std::log10(static_cast<double>(a));
    const double e = (4.0 * (r - 1.0) - 8.0) * la;
    c.log10_bound_outside = 2.0 + e;
    c.log10_bound_inside = 4.0 + e;
    c.bound_outside = std::pow(10.0, c.log10_bound_outside);
    c.bound_inside = std::pow(10.0, c.log10_bound_inside);
    c.verdict = std::max(c.log10_bound_outside, c.log10_bound_inside) <= 0.0;
    return c;
}

double smoothness_max(double a) {
    if (!(a > 1.0)) throw PreconditionError("smoothness_max needs a > 1");
    return 3.0 - 1.0 / std::log10(a);
}

PointwiseCertificate pointwise_certificate(const DAMap& g, double r, int grid) {
    if (grid < 2) throw PreconditionError("grid must be >= 2");
    const Spectrum& L = g.model().lambda;
    PointwiseCertificate out;
    out.r = r;
    out.grid = grid;
    out.outside = (L.c / L.u) * std::pow(1.0 / L.s, r);
    auto value = [&](const Vec3& c) {
        double l = (L.c + g.surgery_scale(c) + g.k()) / L.u;
        double zf = g.is_linear() ? 0.0 : g.params().Z->value(c[2]);
        double rr = c[0] * c[0] + c[1] * c[1];
        double l1 = g.is_linear() ? 0.0 : zf * (g.params().beta->value(rr) + 2.0 * g.params().beta->derivative_times_t(rr));
        return l * std::pow(1.0 / (L.s + l1), r);
    };
    out.at_p = value(Vec3::Zero());
    out.sup = std::max(out.outside, out.at_p);
    if (!g.is_linear()) {
        const BetaProfile& beta = *g.params().beta;
        const double lo = std::log(beta.t1()) - 1.0, hi = std::log(beta.r0()) + 0.1;
        for (int i = 0; i < grid; ++i) {
            double rr = std::exp(lo + (hi - lo) * i / (grid - 1));
            for (int j = 0; j < grid; ++j) {
                double z = 0.5 * g.rho() * j / (grid - 1);
                Vec3 c(std::sqrt(rr), 0.0, z);
                if (c.norm() >= g.rho()) continue;
                double v = value(c);
                if (v > out.sup) {
                    out.sup = v;
                    out.sup_radius = rr;
                    out.sup_height = z;
                }
            }
        }
    }
    out.verdict = out.sup < 1.0;
    return out;
}

}  // namespace dalab
