#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

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

double sup_return_deviation(const Holonomy& hol, const std::vector<TorusPoint2>& pts) {
    double worst = 0;
    for (const TorusPoint2& x : pts)
        worst = std::max(worst, torus_distance(hol.f(x), T_B_map(hol.map().model(), x)));
    return worst;
}

}  // namespace

TEST_CASE("translation map") {
    const auto& m = *model3();
    TorusPoint2 t = T_B_map(m, TorusPoint2{});
    CHECK(torus_distance(t, project(translation_vector(m))) == 0.0);
    auto pts = random_points2(51, 100);
    for (size_t i = 1; i < pts.size(); ++i)
        CHECK(std::fabs(torus_distance(T_B_map(m, pts[i]), T_B_map(m, pts[i - 1])) -
                        torus_distance(pts[i], pts[i - 1])) < 1e-14);
    CHECK(sheet_coords(m, embed_sheet(m, Vec2(0.3, 0.7))) == Vec2(0.3, 0.7));
    CHECK(embed_sheet(m, Vec2(0.3, 0.7))[m.transverse_axis] == 0.0);
}

TEST_CASE("k = 0 holonomy equals T_B") {
    DAMap lin(make_params(model3(), 0.0));
    Holonomy hol(lin);
    const auto& m = *model3();
    for (const TorusPoint2& x : random_points2(52, 200)) {
        ReturnResult r = hol.f_step(x);
        CHECK(torus_distance(r.point, T_B_map(m, x)) < 1e-10);
        CHECK(std::fabs(r.leaf_length - 1.0 / m.e_u()[2]) < 1e-10);
        CHECK((r.displacement - translation_lift(m)).norm() < 1e-10);
    }
}

TEST_CASE("configuration checks") {
    const DAMap& g = g3();
    CHECK_THROWS_AS(Holonomy(g, ReturnConfig{g.rho() / 4}), PreconditionError);
    ReturnConfig bad;
    bad.event_tol = 1e-9;
    CHECK_THROWS_AS(Holonomy(g, bad), PreconditionError);
    Holonomy hol(g);
    CHECK(hol.config().step == doctest::Approx(g.rho() / 5));
    CHECK(hol.config().n_bundle == default_bundle_iterations(g));
}

TEST_CASE("first return with the surgery") {
    const DAMap& g = g3();
    const auto& m = *model3();
    Holonomy hol(g);
    ReturnConfig half;
    half.step = g.rho() / 10;
    Holonomy fine(g, half);
    ShadowField F(g);
    const double L0 = 1.0 / m.e_u()[2];
    const double C = F.c_shadow() * std::sqrt(g.k());
    auto pts = random_points2(53, 2000);
    for (int i = 0; i < 20; ++i) pts.push_back(project(Vec2(1e-3 * i, 2e-3 * i)));
    double worst = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        const TorusPoint2& x = pts[i];
        ReturnResult r = hol.f_step(x);
        double d = torus_distance(r.point, T_B_map(m, x));
        worst = std::max(worst, d);
        CHECK(d <= 2 * C);
        CHECK(std::fabs(r.leaf_length - L0) <= C);
        // Isotopic to T_B: the lift displacement stays within a half period of T_B's.
        CHECK((r.displacement - translation_lift(m)).cwiseAbs().maxCoeff() < 0.5);
        if (i % 10 == 0) {
            CHECK(torus_distance(fine.f(x), r.point) < 1e-8);
            CHECK(torus_distance(hol.f_inverse(r.point), x) < 1e-8);
        }
    }
    CHECK(worst > 1e-9);
    // Leaf samples climb monotonically in the transverse coordinate.
    auto leaf = hol.leaf_samples(embed_sheet(m, pts[0].coords));
    for (size_t i = 1; i < leaf.size(); ++i) CHECK(leaf[i][2] > leaf[i - 1][2]);
    CHECK(leaf.back()[2] < 1.0);
    CHECK(leaf.back()[2] > 1.0 - hol.config().step);
}

TEST_CASE("deviation from T_B shrinks with k") {
    auto pts = random_points2(54, 3000);
    double prev = INFINITY;
    for (double fac : {1.0, 0.5, 0.25}) {
        DAMap g(make_params(model3(), fac * default_k(*model3())));
        Holonomy hol(g);
        double d = sup_return_deviation(hol, pts);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("h_hat conjugates f to T_B") {
    const DAMap& g = g3();
    const auto& m = *model3();
    ShadowField F(g);
    Holonomy hol(g);
    DAMap lin(make_params(model3(), 0.0));
    ShadowField F0(lin);
    for (const TorusPoint2& x : random_points2(55, 300)) {
        CHECK(torus_distance(h_hat(F0, x), x) < 1e-15);
        CHECK(torus_distance(h_hat(F, hol.f(x)), T_B_map(m, h_hat(F, x))) < 1e-6);
    }
    // Near p the shadow correction is largest.
    for (int i = 0; i < 30; ++i) {
        TorusPoint2 x = project(Vec2(3e-3 * i, -2e-3 * i));
        CHECK(torus_distance(h_hat(F, hol.f(x)), T_B_map(m, h_hat(F, x))) < 1e-6);
    }
    // Onto: images of a grid leave no 0.05-hole.
    std::vector<TorusPoint2> img;
    const int n = 60;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) img.push_back(h_hat(F, project(Vec2((i + 0.5) / n, (j + 0.5) / n))));
    double worst = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            TorusPoint2 c = project(Vec2((i + 0.5) / 20, (j + 0.5) / 20));
            double best = INFINITY;
            for (const auto& y : img) best = std::min(best, torus_distance(c, y));
            worst = std::max(worst, best);
        }
    CHECK(worst < 0.05);
}
