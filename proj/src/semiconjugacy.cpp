#include "dalab/semiconjugacy.hpp"

#include <cmath>

#include "dalab/errors.hpp"

namespace dalab {

int truncation_for(const DAMap& g, double tol) {
    if (g.is_linear()) return 0;
    const Spectrum& L = g.model().lambda;
    const double sk = std::sqrt(g.k());
    for (int n = 1; n < 10000; ++n) {
        double e = std::pow(L.c, n) * sk / (1.0 - L.c) + std::pow(L.u, -n) * sk / (1.0 - 1.0 / L.u);
        if (e < tol) return n;
    }
    throw NumericalError("no truncation reaches the requested tolerance");
}

ShadowField::ShadowField(const DAMap& g, double tol, std::optional<int> n_trunc) : g_(&g), tol_(tol) {
    if (!(tol > 0.0)) throw PreconditionError("tolerance must be positive");
    n_trunc_ = n_trunc.value_or(truncation_for(g, tol));
    const Spectrum& L = g.model().lambda;
    c_shadow_ = std::max(1.0 / (1.0 - L.c), 1.0 / (L.u - 1.0));
}

double ShadowField::truncation_bound() const {
    const Spectrum& L = g_->model().lambda;
    const double sk = std::sqrt(g_->k());
    return std::pow(L.c, n_trunc_) * sk / (1.0 - L.c) + std::pow(L.u, -n_trunc_) * sk / (1.0 - 1.0 / L.u);
}

Vec3 ShadowField::correction(const TorusPoint3& xi) const {
    if (g_->is_linear()) return Vec3::Zero();
    const Spectrum& L = g_->model().lambda;
    double us = 0.0, uc = 0.0, ps = 1.0, pc = 1.0;
    TorusPoint3 x = xi;
    for (int n = 0; n < n_trunc_; ++n) {
        x = g_->apply_inverse(x);
        auto c = g_->ball_chart(x);
        if (c) {
            Vec3 d = g_->perturbation_chart(*c);
            us -= ps * d[0];
            uc -= pc * d[1];
        }
        ps *= L.s;
        pc *= L.c;
    }
    return g_->frame().from_chart(Vec3(us, uc, 0.0));
}

Lift3 ShadowField::H(const Lift3& x) const { return Lift3{x.coords + correction(project(x))}; }

TorusPoint3 ShadowField::h(const TorusPoint3& xi) const { return project(Vec3(xi.coords + correction(xi))); }

CentralExponent central_backward_exponent(const DAMap& g, const TorusPoint3& xi, int N, int burn,
                                          double visit_radius_factor) {
    if (N < 1) throw PreconditionError("exponent needs N >= 1");
    if (burn < 0) burn = std::max(N, kDefaultBurn);
    std::vector<TorusPoint3> orbit = backward_orbit(g, xi, N + burn);
    std::vector<TorusPoint3> head(orbit.begin(), orbit.begin() + N);
    std::vector<TorusPoint3> tail(orbit.begin() + N, orbit.end());
    Vec2 v = push_plane(g, tail, Vec2(1.0, 1.0)).direction;
    // The aligned vector sits at g^{−N}ξ = orbit[N−1]; push it up to ξ.
    PlanePush p = push_plane(g, head, v);
    CentralExponent out;
    out.exponent = p.log_growth / N;
    out.direction = p.direction;
    int visits = 0;
    const double radius = visit_radius_factor * g.rho();
    for (int j = 0; j < N; ++j)
        if (g.frame().norm(nearest_lift(orbit[j], g.frame())) < radius) ++visits;
    out.ball_visit_frequency = double(visits) / N;
    return out;
}

const char* to_string(FiberVerdict v) {
    switch (v) {
        case FiberVerdict::trivial: return "trivial";
        case FiberVerdict::nontrivial: return "nontrivial";
        default: return "undecided";
    }
}

double default_gamma_threshold(const DAMap& g) { return 0.1 * std::log(g.model().lambda.c + g.b()); }

FiberDiagnostic fiber_diagnostic(const ShadowField& field, const TorusPoint3& xi, int N, double gamma_threshold,
                                 int burn, double visit_radius_factor) {
    if (!(gamma_threshold > 0.0)) throw PreconditionError("gamma threshold must be positive");
    CentralExponent e = central_backward_exponent(field.map(), xi, N, burn, visit_radius_factor);
    FiberDiagnostic d;
    d.point = xi;
    d.central_backward_exponent = e.exponent;
    d.ball_visit_frequency = e.ball_visit_frequency;
    if (e.exponent > gamma_threshold)
        d.verdict = FiberVerdict::nontrivial;
    else if (e.exponent < -gamma_threshold)
        d.verdict = FiberVerdict::trivial;
    else
        d.verdict = FiberVerdict::undecided;
    return d;
}

FiberArc fiber_arc_probe(const ShadowField& field, const TorusPoint3& xi, int N, const ArcProbeOptions& opt) {
    const DAMap& g = field.map();
    FiberArc arc;
    arc.max_length = 2.0 * field.c_shadow() * std::sqrt(g.k());
    arc.direction_chart = central_direction(g, xi, N);
    const Vec3 e = g.frame().from_chart(arc.direction_chart);
    const Vec3 base = xi.coords;
    const Vec3 h0 = base + field.correction(xi);
    auto collapsed = [&](double s) {
        Vec3 x = base + s * e;
        Vec3 hx = x + field.correction(project(x));
        // Compare lifts so the mod-1 seam cannot fake a collapse.
        return g.frame().norm(hx - h0) <= opt.slope * std::fabs(s) + opt.tol_abs;
    };
    const double reach = arc.max_length;
    // Bisection from [0, reach] needs a log-scale start: fibers can be 1e-11
    // long while reach is O(0.1).
    auto side_log = [&](double sign) {
        double s = reach;
        while (s > 1e-18 && !collapsed(sign * s)) s *= 0.5;
        if (s <= 1e-18) return 0.0;
        double lo = s, hi = std::min(reach, 2.0 * s);
        if (hi <= lo) return lo;
        for (int it = 0; it < opt.bisections && hi - lo > 1e-6 * lo; ++it) {
            double mid = 0.5 * (lo + hi);
            if (collapsed(sign * mid))
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    };
    arc.s_plus = side_log(1.0);
    arc.s_minus = side_log(-1.0);
    return arc;
}

}  // namespace dalab
