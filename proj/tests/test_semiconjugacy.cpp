#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dalab/experiments.hpp"

using namespace dalab;

namespace {

std::shared_ptr<const AnosovModel> model3() {
    static const auto m = std::make_shared<const AnosovModel>(make_model(3));
    return m;
}

const DAMap& g3() {
    static const DAMap g(make_params(model3(), default_k(*model3())));
    return g;
}

const ShadowField& field3() {
    static const ShadowField f(g3());
    return f;
}

// Points of g(supp), where the shadow correction is largest.
std::vector<TorusPoint3> near_support(int n, std::uint64_t seed) {
    const DAMap& g = g3();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<TorusPoint3> out;
    for (int i = 0; i < n; ++i) {
        double s = std::sqrt(g.params().beta->r0()) * std::sqrt(U(rng)), th = 2 * M_PI * U(rng);
        double z = (U(rng) - 0.5) * g.rho();
        Vec3 c(s * std::cos(th), s * std::sin(th), z);
        out.push_back(g.apply(chart_to_torus(c, g.frame())));
    }
    return out;
}

}  // namespace

TEST_CASE("k = 0 gives the identity") {
    DAMap lin(make_params(model3(), 0.0));
    ShadowField F(lin);
    for (const TorusPoint3& x : random_points3(41, 200)) CHECK(F.correction(x).norm() == 0.0);
}

TEST_CASE("shadow constants") {
    const ShadowField& F = field3();
    const auto& L = model3()->lambda;
    CHECK(F.c_shadow() == doctest::Approx(std::max(1 / (1 - L.c), 1 / (L.u - 1))));
    CHECK(F.truncation_bound() <= F.tolerance());
    CHECK(F.n_trunc() == truncation_for(g3(), F.tolerance()));
    ShadowField shorter(g3(), 1e-13, F.n_trunc() - 1);
    CHECK(shorter.truncation_bound() > F.tolerance());
    CHECK(F.h(TorusPoint3{}).coords == Vec3::Zero());
}

TEST_CASE("conjugacy residual, size bound and degree one") {
    const DAMap& g = g3();
    const ShadowField& F = field3();
    const auto& m = *model3();
    const double bound = F.c_shadow() * std::sqrt(g.k());
    auto pts = random_points3(42, 500);
    auto near = near_support(500, 43);
    pts.insert(pts.end(), near.begin(), near.end());
    double max_u = 0;
    for (const TorusPoint3& x : pts) {
        Lift3 X{x.coords};
        Vec3 lhs = m.B * F.H(X).coords;
        Vec3 rhs = F.H(g.apply_lift(X)).coords;
        CHECK(m.frame.norm(lhs - rhs) < 1e-8);
        CHECK(adapted_distance(project(integer_apply_mod1(m.B_exact, F.h(x).coords)), F.h(g.apply(x)), m.frame) < 1e-8);
        double u = m.frame.norm(F.correction(x));
        CHECK(u <= bound);
        max_u = std::max(max_u, u);
        CHECK(std::fabs(m.frame.to_chart(F.correction(x))[2]) <= 1e-14 * u + 1e-30);
        Lift3 Y{X.coords + Vec3(1, -2, 3)};
        CHECK((F.H(Y).coords - F.H(X).coords - Vec3(1, -2, 3)).norm() < 1e-12);
    }
    CHECK(max_u > 1e-4);
}

TEST_CASE("residual is the truncation tail") {
    // B·H_N − H_N∘G = −B^N·Δ∘G^{−N}, so it is bounded by λ_c^N·sup‖Δ‖.
    const DAMap& g = g3();
    const auto& m = *model3();
    auto pts = near_support(100, 44);
    double prev_bound = INFINITY;
    for (int n : {2, 4, 6, 8}) {
        ShadowField F(g, 1e-13, n);
        CHECK(F.truncation_bound() < prev_bound);
        prev_bound = F.truncation_bound();
        for (const TorusPoint3& x : pts) {
            Lift3 X{x.coords};
            const Vec3 res = m.B * F.H(X).coords - F.H(g.apply_lift(X)).coords;
            TorusPoint3 y = x;
            for (int j = 0; j < n; ++j) y = g.apply_inverse(y);
            Vec3 tail = g.delta(y);
            for (int j = 0; j < n; ++j) tail = m.B * tail;
            // Each g⁻¹ step amplifies rounding by up to 1/λ_s.
            CHECK(m.frame.norm(res + tail) < 1e-8);
        }
    }
}

TEST_CASE("central exponent") {
    const DAMap& g = g3();
    const auto& L = model3()->lambda;
    CentralExponent at_p = central_backward_exponent(g, TorusPoint3{}, 60);
    CHECK(std::fabs(at_p.exponent - std::log(L.c + g.b())) < 1e-6);
    CHECK(at_p.ball_visit_frequency == 1.0);

    // Dyadic B-periodic orbits far from p: exact arithmetic, g = B along them.
    for (Vec3 q : {Vec3(0, 0.5, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0.5), Vec3(0, 0.25, 0), Vec3(0, 0.25, 0.5)}) {
        TorusPoint3 x = project(q);
        CentralExponent e = central_backward_exponent(g, x, 60, 100);
        CHECK(std::fabs(e.exponent - std::log(L.c)) < 1e-12);
        CHECK(e.ball_visit_frequency == 0.0);
        FiberDiagnostic d = fiber_diagnostic(field3(), x, 60, default_gamma_threshold(g), 100);
        CHECK(d.verdict == FiberVerdict::trivial);
    }
    FiberDiagnostic dp = fiber_diagnostic(field3(), TorusPoint3{}, 60, default_gamma_threshold(g));
    CHECK(dp.verdict == FiberVerdict::nontrivial);

    // The growth of one vector lies between the extreme singular values of the product.
    for (const TorusPoint3& x : near_support(20, 45)) {
        const int N = 60, burn = 1000;
        CentralExponent e = central_backward_exponent(g, x, N, burn);
        auto orbit = backward_orbit(g, x, N);
        Mat2 P = Mat2::Identity();
        for (int j = N - 1; j >= 0; --j) P = g.jacobian(orbit[j]).plane_block() * P;
        Eigen::JacobiSVD<Mat2> svd(P);
        CHECK(e.exponent <= std::log(svd.singularValues()[0]) / N + 1e-12);
        CHECK(e.exponent >= std::log(svd.singularValues()[1]) / N - 1e-12);
    }
}

TEST_CASE("fiber arc probe") {
    const ShadowField& F = field3();
    FiberArc at_p = fiber_arc_probe(F, TorusPoint3{}, 2000);
    CHECK(at_p.length() > 0.0);
    CHECK(at_p.length() <= at_p.max_length + 1e-12);
    CHECK(at_p.max_length == doctest::Approx(2 * F.c_shadow() * std::sqrt(g3().k())));
    FiberArc far = fiber_arc_probe(F, project(Vec3(0, 0.5, 0)), 2000);
    CHECK(far.length() < 1e-10);
    // h really collapses the arc at p.
    const auto& f = model3()->frame;
    TorusPoint3 end = chart_to_torus(0.9 * at_p.s_plus * at_p.direction_chart, f);
    CHECK(adapted_distance(F.h(end), F.h(TorusPoint3{}), f) < 1e-3 * 0.9 * at_p.s_plus + 1e-13);
}

TEST_CASE("h maps unstable leaves into lines parallel to e_u") {
    const DAMap& g = g3();
    const ShadowField& F = field3();
    Holonomy hol(g);
    const auto& m = *model3();
    int checked = 0;
    for (const TorusPoint2& x : random_points2(46, 8)) {
        auto leaf = hol.leaf_samples(embed_sheet(m, x.coords), 1);
        Vec3 h0 = F.H(Lift3{leaf.front()}).coords;
        for (const Vec3& X : leaf) {
            Vec3 c = m.frame.to_chart(F.H(Lift3{X}).coords - h0);
            CHECK(std::hypot(c[0], c[1]) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 50);
}
