#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "dalab/section_solver.hpp"

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

// Chart points spread over the support: log-uniform radius, uniform angle and height.
std::vector<Vec3> ball_samples(const DAMap& g, int n, std::uint64_t seed, double log_r_min = -60.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double r0 = g.params().beta->r0();
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i) {
        double lr = log_r_min + (std::log(r0) - log_r_min) * U(rng);
        double s = std::exp(0.5 * lr), th = 2 * M_PI * U(rng);
        double z = (U(rng) - 0.5) * 0.9 * g.rho();
        out.emplace_back(s * std::cos(th), s * std::sin(th), z);
    }
    return out;
}

Vec3 chart_diff(const DAMap& g, const TorusPoint3& a, const TorusPoint3& b) {
    return local_chart(project(Vec3(a.coords - b.coords)), g.frame());
}

}  // namespace

TEST_CASE("parameters") {
    const auto& m = *model3();
    CHECK(default_k(m) == doctest::Approx(0.9 * (m.lambda.c - m.lambda.s)));
    CHECK(max_rho(m) <= 0.25);
    const double k = default_k(m);
    CHECK(std::sqrt(k) < default_rho(m, k));
    CHECK(default_rho(m, k) < max_rho(m));
    CHECK_THROWS_AS(make_params(model3(), m.lambda.c - m.lambda.s), PreconditionError);
    CHECK_THROWS_AS(make_params(model3(), k, 0.3), PreconditionError);
    CHECK_THROWS_AS(make_params(model3(), k, 0.5 * std::sqrt(k)), PreconditionError);
    DAParams lin = make_params(model3(), 0.0);
    CHECK_FALSE(lin.beta.has_value());
}

TEST_CASE("g fixes p and equals B off the ball") {
    const DAMap& g = g3();
    CHECK(g.apply(TorusPoint3{}).coords == Vec3::Zero());
    CHECK(g.apply_inverse(TorusPoint3{}).coords == Vec3::Zero());
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int outside = 0;
    for (int i = 0; i < 2000; ++i) {
        TorusPoint3 x = project(Vec3(U(rng), U(rng), U(rng)));
        if (g.in_ball(x)) continue;
        ++outside;
        CHECK(g.apply(x).coords == integer_apply_mod1(model3()->B_exact, x.coords));
        CHECK(g.delta(x).norm() == 0.0);
    }
    CHECK(outside > 1500);
}

TEST_CASE("plateau formula") {
    const DAMap& g = g3();
    const auto& m = *model3();
    const double t1 = g.params().beta->t1();
    const double x = 0.5 * std::sqrt(t1);
    TorusPoint3 xi = chart_to_torus(Vec3(x, 0, 0), g.frame());
    Vec3 c = chart_diff(g, g.apply(xi), TorusPoint3{});
    // Absolute error is limited by the mod-1 torus coordinates.
    CHECK(std::fabs(c[0] - (m.lambda.s + g.b()) * x) < 1e-15);
    CHECK(std::fabs(c[1]) < 1e-15);
    Jacobian3 J = g.jacobian_chart(Vec3(x, 0, 0));
    CHECK(J.matrix(0, 0) == doctest::Approx(m.lambda.s + g.b()).epsilon(1e-12));
    CHECK(J.matrix(1, 1) == doctest::Approx(m.lambda.c + g.b()).epsilon(1e-12));
    Jacobian3 Jp = g.jacobian(TorusPoint3{});
    Mat3 expect = Vec3(m.lambda.s + g.b(), m.lambda.c + g.b(), m.lambda.u).asDiagonal();
    CHECK((Jp.matrix - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("inverse round trip") {
    const DAMap& g = g3();
    const auto& f = g.frame();
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        TorusPoint3 x = project(Vec3(U(rng), U(rng), U(rng)));
        CHECK(adapted_distance(g.apply(g.apply_inverse(x)), x, f) < 1e-12);
        CHECK(adapted_distance(g.apply_inverse(g.apply(x)), x, f) < 1e-10);
    }
    for (const Vec3& c : ball_samples(g, 1000, 23)) {
        TorusPoint3 x = chart_to_torus(c, f);
        CHECK(adapted_distance(g.apply(g.apply_inverse(x)), x, f) < 1e-12);
        CHECK(adapted_distance(g.apply_inverse(g.apply(x)), x, f) < 1e-10);
    }
    Lift3 L{Vec3(2.3, -1.1, 0.4)};
    CHECK((g.apply_inverse_lift(g.apply_lift(L)).coords - L.coords).norm() < 1e-9);
}

TEST_CASE("analytic Jacobian against central differences") {
    const DAMap& g = g3();
    // Steps scale with √r so each difference stays within one e-fold of β.
    int bad = 0;
    for (const Vec3& c : ball_samples(g, 1000, 24, -18.0)) {
        Jacobian3 J = g.jacobian_chart(c);
        const double h = 1e-5 * std::hypot(c[0], c[1]);
        Mat3 fd;
        for (int j = 0; j < 3; ++j) {
            Vec3 e = Vec3::Zero();
            e[j] = h;
            Vec3 plus = J.linear * (c + e) + g.perturbation_chart(c + e);
            Vec3 minus = J.linear * (c - e) + g.perturbation_chart(c - e);
            fd.col(j) = (plus - minus) / (2 * h);
        }
        double err = (fd - J.matrix).cwiseAbs().maxCoeff();
        if (err > 1e-6 * std::max(1.0, J.matrix.cwiseAbs().maxCoeff())) ++bad;
        CHECK(J.matrix.row(2).head<2>().norm() == 0.0);
        CHECK(J.matrix(2, 2) == model3()->lambda.u);
        CHECK(J.matrix.determinant() > 0.0);
        CHECK((J.matrix - J.linear - J.perturbation).cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK(bad == 0);
}

TEST_CASE("perturbation bounds and the surgery block") {
    const DAMap& g = g3();
    const double k = g.k(), rho = g.rho(), b = g.b();
    const double bound = std::max(2 * k, 8 * b * std::sqrt(k) / rho);
    for (const Vec3& c : ball_samples(g, 10000, 25)) {
        TorusPoint3 x = chart_to_torus(c, g.frame());
        Jacobian3 J = g.jacobian(x);
        Eigen::JacobiSVD<Mat3> svd(J.perturbation);
        CHECK(svd.singularValues()[0] <= bound);

        Vec2 lam = g.central_eigenstructure_S(x);
        Mat2 S = J.perturbation.topLeftCorner<2, 2>();
        CHECK(std::fabs(S(0, 1) - S(1, 0)) < 1e-15);
        Eigen::SelfAdjointEigenSolver<Mat2> es(S);
        CHECK(std::fabs(es.eigenvalues()[0] - lam[0]) < 1e-10);
        CHECK(std::fabs(es.eigenvalues()[1] - lam[1]) < 1e-10);
        CHECK(lam[0] > -k);
        CHECK(lam[0] <= lam[1]);
        CHECK(lam[1] <= b + 1e-15);
        CHECK(lam[1] - lam[0] <= 2 * k);
    }
    Vec2 at_p = g.central_eigenstructure_S(TorusPoint3{});
    CHECK(at_p[0] == doctest::Approx(b));
    CHECK(at_p[1] == doctest::Approx(b));
}

TEST_CASE("equivariance and linear case") {
    const DAMap& g = g3();
    Lift3 x{Vec3(0.01, -0.02, 0.005)};
    Lift3 y{Vec3(x.coords + Vec3(3, -2, 5))};
    Vec3 gx = g.apply_lift(x).coords, gy = g.apply_lift(y).coords;
    Vec3 expect = model3()->B * Vec3(3, -2, 5);
    CHECK((gy - gx - expect).norm() < 1e-9);

    DAMap lin(make_params(model3(), 0.0));
    CHECK(lin.is_linear());
    TorusPoint3 q = project(Vec3(0.01, 0.02, 0.003));
    CHECK(lin.apply(q).coords == integer_apply_mod1(model3()->B_exact, q.coords));
    CHECK(adapted_distance(lin.apply_inverse(q), project(Vec3(model3()->B_inverse * q.coords)), lin.frame()) < 1e-12);
}

TEST_CASE("rate functions") {
    const DAMap& g = g3();
    const auto& L = model3()->lambda;
    const int n = default_bundle_iterations(g);
    TorusPoint3 out = project(Vec3(0.5, 0.5, 0.5));
    REQUIRE_FALSE(g.in_ball(out));
    Rates r = g.rate_functions(out, bundle_at(g, out, n, 200));
    CHECK(r.s == doctest::Approx(L.s).epsilon(1e-6));
    CHECK(r.c == doctest::Approx(L.c).epsilon(1e-6));
    CHECK(r.u == doctest::Approx(L.u).epsilon(1e-9));
    // Alignment at p only gains (λ_s+b)/(λ_c+b) ≈ 0.97 per step.
    Rates rp = g.rate_functions(TorusPoint3{}, bundle_at(g, TorusPoint3{}, n, 1000));
    CHECK(rp.s == doctest::Approx(L.s + g.b()).epsilon(1e-9));
    CHECK(rp.c == doctest::Approx(L.c + g.b()).epsilon(1e-9));
    CHECK(rp.u == doctest::Approx(L.u).epsilon(1e-9));
    double sup_s = 0;
    for (const Vec3& c : ball_samples(g, 300, 26)) {
        TorusPoint3 x = chart_to_torus(c, g.frame());
        sup_s = std::max(sup_s, g.rate_functions(x, bundle_at(g, x, n, 200)).s);
    }
    CHECK(sup_s < 1.0);
}
