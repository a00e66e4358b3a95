#include "dalab/holonomy.hpp"

#include <cmath>
#include <string>

#include "dalab/errors.hpp"

namespace dalab {

TorusPoint2 T_B_map(const AnosovModel& model, const TorusPoint2& x) {
    return project(Vec2(x.coords + translation_vector(model)));
}

Vec3 embed_sheet(const AnosovModel& model, const Vec2& x) {
    Vec3 X = Vec3::Zero();
    int n = 0;
    for (int i = 0; i < 3; ++i)
        if (i != model.transverse_axis) X[i] = x[n++];
    return X;
}

Vec2 sheet_coords(const AnosovModel& model, const Vec3& X) {
    Vec2 v;
    int n = 0;
    for (int i = 0; i < 3; ++i)
        if (i != model.transverse_axis) v[n++] = X[i];
    return v;
}

Holonomy::Holonomy(const DAMap& g, ReturnConfig cfg) : g_(&g), cfg_(cfg) {
    axis_ = g.model().transverse_axis;
    e_u_ = g.model().e_u();
    if (cfg_.step <= 0.0) cfg_.step = g.rho() / 5.0;
    if (cfg_.n_bundle <= 0) cfg_.n_bundle = default_bundle_iterations(g);
    if (!(cfg_.step < g.rho() / 4.0)) throw PreconditionError("return step must be < rho/4");
    if (!(cfg_.event_tol > 0.0 && cfg_.event_tol < 1e-10)) throw PreconditionError("event_tol must lie in (0, 1e-10)");
    if (cfg_.max_steps <= 0)
        cfg_.max_steps = static_cast<int>(std::ceil(4.0 / (std::fabs(e_u_[axis_]) * cfg_.step))) + 100;
}

Vec3 Holonomy::field_at(const Vec3& X, bool& in_ball) const {
    TorusPoint3 xi = project(X);
    if (!in_ball && g_->in_ball(xi)) in_ball = true;
    Vec3 v = g_->frame().from_chart(unstable_direction(*g_, xi, cfg_.n_bundle));
    if (v[axis_] < 0) v = -v;
    if (!(v[axis_] > cfg_.transversality_margin)) {
        throw NumericalError("transversality margin violated at (" + std::to_string(xi.coords[0]) + ", " +
                             std::to_string(xi.coords[1]) + ", " + std::to_string(xi.coords[2]) + ")");
    }
    return v;
}

Vec3 Holonomy::field(const Vec3& X) const {
    bool unused = false;
    return field_at(X, unused);
}

ReturnResult Holonomy::first_return(const Vec3& X0, int sign) const {
    const double s = sign >= 0 ? 1.0 : -1.0;
    const double target = sign >= 0 ? std::floor(X0[axis_]) + 1.0 : std::ceil(X0[axis_]) - 1.0;
    ReturnResult out;
    bool ball = false;
    auto F = [&](const Vec3& X) -> Vec3 { return s * field_at(X, ball); };
    auto rk4 = [&](const Vec3& X, const Vec3& k1, double h) {
        Vec3 k2 = F(X + 0.5 * h * k1);
        Vec3 k3 = F(X + 0.5 * h * k2);
        Vec3 k4 = F(X + h * k3);
        return Vec3(X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };
    const double h = cfg_.step;
    Vec3 X = X0;
    double length = 0.0;
    for (int step = 0; step < cfg_.max_steps; ++step) {
        Vec3 k1 = F(X);
        Vec3 Y = rk4(X, k1, h);
        double gap = s * (Y[axis_] - target);
        if (gap < 0.0) {
            X = Y;
            length += h;
            continue;
        }
        // Crossing inside this step: Illinois on the sub-step τ ∈ [0, h].
        double a = 0.0, fa = s * (X[axis_] - target), b = h, fb = gap;
        Vec3 Z = Y;
        int side = 0;
        for (int it = 0; it < 100; ++it) {
            double tau = (a * fb - b * fa) / (fb - fa);
            if (!(tau > a && tau < b)) tau = 0.5 * (a + b);
            Z = rk4(X, k1, tau);
            double fz = s * (Z[axis_] - target);
            if (std::fabs(fz) <= cfg_.event_tol) {
                b = tau;
                break;
            }
            if (fz < 0.0) {
                a = tau;
                fa = fz;
                if (side == -1) fb *= 0.5;
                side = -1;
            } else {
                b = tau;
                fb = fz;
                if (side == 1) fa *= 0.5;
                side = 1;
            }
            if (it == 99) throw NumericalError("crossing refinement did not converge");
        }
        // Slide the last residual along the field onto the sheet.
        Vec3 v = F(Z);
        double corr = (target - Z[axis_]) / v[axis_];
        Z += corr * v;
        Z[axis_] = target;
        length += b + corr;
        Vec2 from = sheet_coords(g_->model(), X0), to = sheet_coords(g_->model(), Z);
        out.point = project(to);
        out.displacement = to - from;
        out.leaf_length = length;
        out.ball_encounter = ball;
        return out;
    }
    throw NumericalError("first return exceeded " + std::to_string(cfg_.max_steps) + " steps");
}

ReturnResult Holonomy::f_step(const TorusPoint2& x) const {
    return first_return(embed_sheet(g_->model(), x.coords), 1);
}

TorusPoint2 Holonomy::f_inverse(const TorusPoint2& x) const {
    return first_return(embed_sheet(g_->model(), x.coords), -1).point;
}

ReturnOrbit Holonomy::orbit(const TorusPoint2& x0, int n) const {
    ReturnOrbit o;
    o.points.reserve(n + 1);
    o.points.push_back(x0);
    TorusPoint2 x = x0;
    for (int i = 0; i < n; ++i) {
        ReturnResult r = f_step(x);
        x = r.point;
        o.points.push_back(x);
        o.return_times.push_back(r.leaf_length);
        o.displacements.push_back(r.displacement);
        o.ball_flags.push_back(r.ball_encounter);
    }
    return o;
}

std::vector<Vec3> Holonomy::leaf_samples(const Vec3& X0, int stride) const {
    std::vector<Vec3> pts{X0};
    bool ball = false;
    const double h = cfg_.step;
    const double target = std::floor(X0[axis_]) + 1.0;
    Vec3 X = X0;
    for (int step = 1; step <= cfg_.max_steps; ++step) {
        Vec3 k1 = field_at(X, ball);
        Vec3 k2 = field_at(X + 0.5 * h * k1, ball);
        Vec3 k3 = field_at(X + 0.5 * h * k2, ball);
        Vec3 k4 = field_at(X + h * k3, ball);
        X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (X[axis_] >= target) break;
        if (step % stride == 0) pts.push_back(X);
    }
    return pts;
}

TorusPoint2 h_hat(const ShadowField& field, const TorusPoint2& x) {
    const AnosovModel& m = field.map().model();
    if (!(field.c_shadow() * std::sqrt(field.map().k()) < 0.25))
        throw PreconditionError("h_hat needs C*sqrt(k) < 1/4");
    const Vec3 X = embed_sheet(m, x.coords);
    const Vec3 q = field.H(Lift3{X}).coords;
    const Vec3 eu = m.e_u();
    const int ax = m.transverse_axis;
    Vec3 slid = q - (q[ax] / eu[ax]) * eu;
    return project(sheet_coords(m, slid));
}

}  // namespace dalab
