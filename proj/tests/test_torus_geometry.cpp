#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dalab/anosov_family.hpp"
#include "dalab/errors.hpp"

using namespace dalab;

namespace {

const AnosovModel& model3() {
    static const AnosovModel m = make_model(3);
    return m;
}

Vec3 random_vec(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> U(lo, hi);
    return Vec3(U(rng), U(rng), U(rng));
}

// Minimum over the 27 neighbouring translates, straight from the definition.
double brute_distance(const TorusPoint3& x, const TorusPoint3& y, const AdaptedFrame& f) {
    double best = INFINITY;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            for (int k = -1; k <= 1; ++k) best = std::min(best, f.norm(y.coords - x.coords + Vec3(i, j, k)));
    return best;
}

}  // namespace

TEST_CASE("project reduces mod 1") {
    CHECK(project(Vec3(0, 0, 0)).coords == Vec3(0, 0, 0));
    TorusPoint3 p = project(Vec3(1.25, -0.5, 3.0));
    CHECK(p.coords[0] == 0.25);
    CHECK(p.coords[1] == 0.5);
    CHECK(p.coords[2] == 0.0);
    CHECK(project(Vec3(-1e-16, 0, 0)).coords == Vec3(0, 0, 0));
    CHECK(project(Vec2(1.0 - 1e-15, 2.0)).coords == Vec2(0, 0));
    CHECK_THROWS(project(Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0)));
    CHECK_THROWS(project(Vec3(INFINITY, 0, 0)));
}

TEST_CASE("project is idempotent and lands in [0,1)") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        Vec3 v = random_vec(rng, -50.0, 50.0);
        TorusPoint3 p = project(v);
        for (int c = 0; c < 3; ++c) {
            CHECK(p.coords[c] >= 0.0);
            CHECK(p.coords[c] < 1.0);
        }
        CHECK(project(p.coords).coords == p.coords);
    }
}

TEST_CASE("local chart examples") {
    const auto& m = model3();
    const auto& f = m.frame;
    CHECK(local_chart(TorusPoint3{}, f).norm() == 0.0);
    const double eps = 0.01;
    Vec3 c = local_chart(project(Vec3(eps * m.e_u())), f);
    CHECK(std::fabs(c[0]) < 1e-14);
    CHECK(std::fabs(c[1]) < 1e-14);
    CHECK(std::fabs(c[2] - eps) < 1e-14);
    c = local_chart(project(Vec3(0.01 * m.e_s() + 0.02 * m.e_c())), f);
    CHECK(std::fabs(c[0] - 0.01) < 1e-14);
    CHECK(std::fabs(c[1] - 0.02) < 1e-14);
    CHECK(std::fabs(c[2]) < 1e-14);
}

TEST_CASE("frame is consistent") {
    const auto& f = model3().frame;
    CHECK((f.basis() * f.inverse() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    // Basis columns are orthonormal in the adapted metric.
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(f.norm(f.basis().col(i)) - 1.0) < 1e-12);
    Eigen::JacobiSVD<Mat3> svd(f.basis());
    CHECK(std::fabs(f.basis_norm() - svd.singularValues()[0]) < 1e-12);
}

TEST_CASE("chart round trip on the fundamental domain") {
    const auto& f = model3().frame;
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
        TorusPoint3 x = project(random_vec(rng));
        Vec3 c = local_chart(x, f);
        TorusPoint3 back = chart_to_torus(c, f);
        CHECK(adapted_distance(back, x, f) < 1e-12);
        CHECK((f.to_chart(f.from_chart(c)) - c).norm() < 1e-12);
    }
}

TEST_CASE("nearest lift is the shortest translate, ties go lexicographically low") {
    const auto& f = model3().frame;
    std::mt19937_64 rng(13);
    for (int i = 0; i < 500; ++i) {
        TorusPoint3 x = project(random_vec(rng));
        Vec3 l = nearest_lift(x, f);
        CHECK(std::fabs(f.norm(l) - brute_distance(TorusPoint3{}, x, f)) < 1e-13);
        CHECK((project(l).coords - x.coords).cwiseAbs().maxCoeff() < 1e-12);
    }
    // ±(1/2)e₁ have equal adapted norm; m = (0,0,0) beats (1,0,0).
    Vec3 tie = nearest_lift(project(Vec3(0.5, 0, 0)), f);
    if (std::fabs(f.norm(Vec3(0.5, 0, 0)) - brute_distance(TorusPoint3{}, project(Vec3(0.5, 0, 0)), f)) < 1e-15)
        CHECK(tie[0] == 0.5);
}

TEST_CASE("adapted distance") {
    const auto& m = model3();
    const auto& f = m.frame;
    TorusPoint3 x = project(Vec3(0.3, 0.7, 0.1));
    CHECK(adapted_distance(x, x, f) == 0.0);
    CHECK(std::fabs(adapted_distance(TorusPoint3{}, project(Vec3(0.1 * m.e_u())), f) - 0.1) < 1e-14);
    std::mt19937_64 rng(14);
    for (int i = 0; i < 2000; ++i) {
        TorusPoint3 a = project(random_vec(rng)), b = project(random_vec(rng)), c = project(random_vec(rng));
        double ab = adapted_distance(a, b, f), ba = adapted_distance(b, a, f);
        CHECK(std::fabs(ab - ba) < 1e-14);
        CHECK(std::fabs(ab - brute_distance(a, b, f)) < 1e-13);
        CHECK(adapted_distance(a, c, f) <= ab + adapted_distance(b, c, f) + 1e-12);
    }
}

TEST_CASE("planar torus distance") {
    CHECK(torus_distance(project(Vec2(0.05, 0.0)), project(Vec2(0.95, 0.0))) == doctest::Approx(0.1));
    CHECK(torus_difference(project(Vec2(0.95, 0.5)), project(Vec2(0.05, 0.5)))[0] == doctest::Approx(-0.1));
}
