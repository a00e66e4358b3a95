#include "dalab/da_map.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>
#include <utility>

#include "dalab/errors.hpp"

namespace dalab {

namespace {

IntegerMatrix3 inverse_of_B(const AnosovModel& m) {
    IntegerMatrix3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.entries[i][j] = static_cast<std::int64_t>(m.B_inverse(i, j));
    return r;
}

}  // namespace

Vec3 integer_apply(const IntegerMatrix3& m, const Vec3& v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
        long double s = 0.0L;
        for (int j = 0; j < 3; ++j) s += static_cast<long double>(m(i, j)) * v[j];
        r[i] = static_cast<double>(s);
    }
    return r;
}

Vec3 integer_apply_mod1(const IntegerMatrix3& m, const Vec3& v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
        long double s = 0.0L;
        for (int j = 0; j < 3; ++j) s += static_cast<long double>(m(i, j)) * v[j];
        s -= std::floor(s);
        r[i] = static_cast<double>(s);
    }
    return r;
}

double default_k(const AnosovModel& model) { return 0.9 * (model.lambda.c - model.lambda.s); }

double max_rho(const AnosovModel& model) { return std::min(0.25, model.frame.unique_radius()); }

double default_rho(const AnosovModel& model, double k) { return 0.5 * (std::sqrt(k) + max_rho(model)); }

DAParams make_params(std::shared_ptr<const AnosovModel> model, double k, std::optional<double> rho,
                     const BetaShape& shape) {
    if (!model) throw PreconditionError("missing model");
    DAParams p;
    p.model = model;
    p.k = k;
    p.rho = rho.value_or(default_rho(*model, k));
    const double rmax = max_rho(*model);
    if (!(k >= 0.0 && k < model->lambda.c - model->lambda.s))
        throw PreconditionError("k must satisfy 0 <= k < lambda_c - lambda_s, got " + std::to_string(k));
    if (!(p.rho > 0.0 && p.rho < rmax))
        throw PreconditionError("rho must lie in (0, " + std::to_string(rmax) + "), got " + std::to_string(p.rho));
    if (!(std::sqrt(k) < p.rho))
        throw PreconditionError("rho must exceed sqrt(k) = " + std::to_string(std::sqrt(k)));
    if (k > 0.0) {
        p.Z = make_Z(p.rho);
        p.beta = make_beta(*model, k, shape);
        // Support {|z| < ρ/2, r < r₀} must sit inside the open ball.
        if (!(p.beta->r0() + 0.25 * p.rho * p.rho < p.rho * p.rho))
            throw PreconditionError("surgery support does not fit inside B(p, rho)");
    }
    return p;
}

DAMap::DAMap(DAParams params) : params_(std::move(params)) {
    if (!params_.model) throw PreconditionError("missing model");
    B_ = params_.model->B_exact;
    B_inv_ = inverse_of_B(*params_.model);
    const Spectrum& L = params_.model->lambda;
    diag_ = Vec3(L.s, L.c, L.u);
}

std::optional<Vec3> DAMap::ball_chart(const TorusPoint3& xi) const { return chart_within(xi, frame(), params_.rho); }

double DAMap::surgery_scale(const Vec3& c) const {
    if (is_linear()) return 0.0;
    double z = params_.Z->value(c[2]);
    if (z == 0.0) return 0.0;
    return z * params_.beta->value(c[0] * c[0] + c[1] * c[1]);
}

Vec3 DAMap::perturbation_chart(const Vec3& c) const {
    double m = surgery_scale(c);
    return Vec3(m * c[0], m * c[1], 0.0);
}

Vec3 DAMap::delta(const TorusPoint3& xi) const {
    if (is_linear()) return Vec3::Zero();
    auto c = ball_chart(xi);
    if (!c) return Vec3::Zero();
    return frame().from_chart(perturbation_chart(*c));
}

TorusPoint3 DAMap::apply(const TorusPoint3& xi) const {
    if (!is_linear()) {
        if (auto c = ball_chart(xi)) {
            Vec3 d = perturbation_chart(*c);
            if (d[0] != 0.0 || d[1] != 0.0) {
                Vec3 bl = integer_apply(B_, nearest_lift(xi, frame()));
                return project(Vec3(bl + frame().from_chart(d)));
            }
        }
    }
    return project(integer_apply_mod1(B_, xi.coords));
}

Lift3 DAMap::apply_lift(const Lift3& x) const {
    return Lift3{integer_apply(B_, x.coords) + delta(project(x))};
}

Vec3 DAMap::solve_inverse_in_ball(const Vec3& c0) const {
    const double ls = diag_[0], lc = diag_[1];
    const BetaProfile& beta = *params_.beta;
    const double zf = params_.Z->value(c0[2]);
    const double xp = ls * c0[0], yp = lc * c0[1];

    auto image_r = [&](double m) {
        double u = xp / (ls + m), v = yp / (lc + m);
        return u * u + v * v;
    };
    double r;
    double r_plateau = image_r(zf * beta.b());
    if (r_plateau <= beta.t1()) {
        r = r_plateau;
    } else {
        // F(r)/r − 1 in log r is ≥ 0 at the plateau image and ≤ 0 at the
        // unperturbed preimage r_free < r₀.
        auto phi = [&](double s) {
            double rr = std::exp(s);
            double m = zf * beta.value(rr);
            double u = xp / (ls + m), v = yp / (lc + m);
            double img = u * u + v * v;
            double dimg_dm = -2.0 * u * u / (ls + m) - 2.0 * v * v / (lc + m);
            double dm_ds = zf * beta.derivative_times_t(rr);
            return std::make_pair(img / rr - 1.0, (dimg_dm * dm_ds - img) / rr);
        };
        double r_free = c0[0] * c0[0] + c0[1] * c0[1];
        double lo = std::log(r_plateau), hi = std::log(r_free);
        double guess = std::clamp(std::log(image_r(zf * beta.value(r_free))), lo, hi);
        boost::uintmax_t iters = 100;
        double s = boost::math::tools::newton_raphson_iterate(phi, guess, lo, hi, 50, iters);
        if (!(iters < 100) || !std::isfinite(s)) throw NumericalError("inverse radius solve did not converge");
        r = std::exp(s);
    }
    double m = zf * beta.value(r);
    Vec3 c(xp / (ls + m), yp / (lc + m), c0[2]);

    // Newton polish on (λ_s x + mx, λ_c y + my) = (x', y').
    for (int it = 0; it < 3; ++it) {
        const double x = c[0], y = c[1], rr = x * x + y * y;
        const double bt = zf * beta.value(rr), bpr = zf * beta.derivative_times_t(rr);
        Vec2 res((ls + bt) * x - xp, (lc + bt) * y - yp);
        if (res.norm() == 0.0 || rr == 0.0) break;
        Mat2 J;
        J << ls + bt + 2.0 * bpr * x * (x / rr), 2.0 * bpr * x * (y / rr), 2.0 * bpr * x * (y / rr),
            lc + bt + 2.0 * bpr * y * (y / rr);
        Vec2 step = J.inverse() * res;
        if (!step.allFinite()) break;
        c[0] -= step[0];
        c[1] -= step[1];
        if (step.norm() <= 1e-15 * c.head<2>().norm()) break;
    }
    return c;
}

DAMap::Charted DAMap::apply_inverse_charted(const TorusPoint3& eta) const {
    TorusPoint3 zeta = project(integer_apply_mod1(B_inv_, eta.coords));
    if (is_linear()) return {zeta, std::nullopt};
    // g(S) = B(S) for the support S, so g⁻¹η ∈ S iff B⁻¹η ∈ S.
    auto c0 = ball_chart(zeta);
    if (!c0 || surgery_scale(*c0) == 0.0) return {zeta, c0};
    Vec3 c = solve_inverse_in_ball(*c0);
    const Vec3 lift = nearest_lift(zeta, frame());
    return {project(Vec3(lift + frame().from_chart(c - *c0))), c};
}

Lift3 DAMap::apply_inverse_lift(const Lift3& y) const {
    Vec3 z = integer_apply(B_inv_, y.coords);
    if (is_linear()) return Lift3{z};
    auto c0 = ball_chart(project(z));
    if (!c0 || surgery_scale(*c0) == 0.0) return Lift3{z};
    Vec3 c = solve_inverse_in_ball(*c0);
    return Lift3{z + frame().from_chart(c - *c0)};
}

Jacobian3 DAMap::jacobian_chart(const Vec3& c) const {
    Jacobian3 J;
    J.linear = diag_.asDiagonal();
    J.perturbation.setZero();
    if (!is_linear() && c.norm() < params_.rho) {
        const double x = c[0], y = c[1], z = c[2];
        const double r = x * x + y * y;
        const double zf = params_.Z->value(z), zp = params_.Z->derivative(z);
        const double bt = params_.beta->value(r);
        const double bpr = params_.beta->derivative_times_t(r);
        double xx = 0.0, xy = 0.0, yy = 0.0;
        if (r > 0.0 && bpr != 0.0) {
            xx = x * (x / r);
            xy = x * (y / r);
            yy = y * (y / r);
        }
        Mat3& M = J.perturbation;
        M(0, 0) = zf * (bt + 2.0 * bpr * xx);
        M(0, 1) = zf * 2.0 * bpr * xy;
        M(1, 0) = M(0, 1);
        M(1, 1) = zf * (bt + 2.0 * bpr * yy);
        M(0, 2) = zp * bt * x;
        M(1, 2) = zp * bt * y;
    }
    J.matrix = J.linear + J.perturbation;
    return J;
}

Jacobian3 DAMap::jacobian(const TorusPoint3& xi) const {
    auto c = ball_chart(xi);
    return jacobian_chart(c ? *c : Vec3(1.0, 1.0, 1.0) * params_.rho);
}

Vec2 DAMap::central_eigenstructure_S(const TorusPoint3& xi) const {
    if (is_linear()) return Vec2::Zero();
    auto c = ball_chart(xi);
    if (!c) return Vec2::Zero();
    const double r = (*c)[0] * (*c)[0] + (*c)[1] * (*c)[1];
    const double zf = params_.Z->value((*c)[2]);
    const double bt = params_.beta->value(r);
    return Vec2(zf * (bt + 2.0 * params_.beta->derivative_times_t(r)), zf * bt);
}

double DAMap::lambda1(const TorusPoint3& xi) const { return central_eigenstructure_S(xi)[0]; }

Rates DAMap::rate_functions(const TorusPoint3& xi, const BundleDirections& bundle) const {
    for (const Vec3* v : {&bundle.s, &bundle.c, &bundle.u})
        if (!v->allFinite() || std::fabs(v->norm() - 1.0) > 1e-9)
            throw NumericalError("bundle directions not converged (non-unit or non-finite)");
    Mat3 J = jacobian(xi).matrix;
    return Rates{(J * bundle.s).norm(), (J * bundle.c).norm(), (J * bundle.u).norm()};
}

}  // namespace dalab
