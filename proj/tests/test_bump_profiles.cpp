#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "dalab/da_map.hpp"

using namespace dalab;

namespace {

const AnosovModel& model3() {
    static const AnosovModel m = make_model(3);
    return m;
}

}  // namespace

TEST_CASE("smooth step") {
    SmoothStep S{0.6};
    CHECK(S.value(0.0) == 0.0);
    CHECK(S.value(-1.0) == 0.0);
    CHECK(S.value(1.0) == 1.0);
    CHECK(S.value(0.5) == doctest::Approx(0.5));
    for (double u = 0.01; u < 1.0; u += 0.01) {
        double h = 1e-6;
        double fd = (S.value(u + h) - S.value(u - h)) / (2 * h);
        CHECK(std::fabs(fd - S.derivative(u)) < 1e-6 * std::max(1.0, std::fabs(fd)));
        CHECK(std::fabs(S.value(u) + S.value(1.0 - u) - 1.0) < 1e-14);
    }
}

TEST_CASE("bump Z") {
    const double rho = 0.2;
    BumpZ Z = make_Z(rho);
    CHECK(Z.value(0.0) == 1.0);
    CHECK(Z.value(rho / 2) == 0.0);
    CHECK(Z.value(-rho / 2) == 0.0);
    CHECK(Z.value(0.3) == 0.0);
    CHECK(Z.derivative(rho / 2) == 0.0);
    CHECK(Z.derivative(0.0) == 0.0);
    double max_abs = 0.0;
    const int n = 100000;
    for (int i = 0; i <= n; ++i) {
        double z = -rho / 2 + rho * i / n;
        CHECK(Z.value(z) >= 0.0);
        CHECK(Z.value(z) <= 1.0);
        CHECK(Z.value(z) == Z.value(-z));
        max_abs = std::max(max_abs, std::fabs(Z.derivative(z)));
    }
    CHECK(max_abs < 4.0 / rho);
    CHECK(Z.derivative_bound() >= max_abs * (1 - 1e-9));
    CHECK(Z.derivative_bound() < 4.0 / rho);
    CHECK_THROWS_AS(make_Z(0.0), PreconditionError);
}

TEST_CASE("beta profile for the default parameters") {
    const auto& m = model3();
    const double k = default_k(m);
    BetaProfile beta = make_beta(m, k);
    const double ls = m.lambda.s, lc = m.lambda.c;
    CHECK(beta.k() == k);
    CHECK(beta.r0() == doctest::Approx(k / 2));
    CHECK(beta.b() == doctest::Approx(1.0 - lc + k / 2));
    CHECK(ls + beta.b() < 1.0);
    CHECK(1.0 < lc + beta.b());
    CHECK(lc + beta.b() < 1.0 + k);

    CHECK(beta.value(beta.r0()) == 0.0);
    CHECK(beta.value(k) == 0.0);
    CHECK(beta.value(1.0) == 0.0);
    CHECK(beta.value(beta.t1()) == doctest::Approx(beta.b()).epsilon(1e-12));
    CHECK(beta.value(beta.t1() / 2) == doctest::Approx(beta.b()).epsilon(1e-12));
    CHECK(beta.value(0.0) == beta.b());
    CHECK(beta.derivative(0.0) == 0.0);
    CHECK(beta.derivative(beta.t1() / 2) == 0.0);

    // Envelope and monotonicity on log-spaced points of (t₁, r₀).
    const int n = 10000;
    double prev = beta.b();
    for (int i = 0; i <= n; ++i) {
        double u = beta.log_span() * (1.0 - double(i) / n);  // from t₁ to r₀
        double t = beta.r0() * std::exp(-u);
        double v = beta.value(t), dt = beta.derivative_times_t(t);
        CHECK(dt <= 0.0);
        CHECK(-dt <= k);
        CHECK(v <= prev + 1e-15);
        CHECK(ls + v + 2 * dt > 0.0);
        prev = v;
    }
    CHECK(beta.max_envelope_ratio() <= 1.0);
    CHECK(beta.min_invertibility_margin() > 0.0);
}

TEST_CASE("mass of psi = -beta' equals b") {
    const auto& m = model3();
    BetaProfile beta = make_beta(m, default_k(m));
    // ∫₀^{r₀} ψ(t) dt = ∫₀^L φ(u) du after u = log(r₀/t).
    auto phi = [&](double u) { return beta.density(u); };
    double err = 0;
    double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(phi, 0.0, beta.log_span(), 30, 1e-14,
                                                                                 &err);
    CHECK(std::fabs(mass - beta.b()) < 1e-8);
}

TEST_CASE("beta' matches finite differences") {
    const auto& m = model3();
    BetaProfile beta = make_beta(m, default_k(m));
    // Central differences in log t: dβ/d(log t) = β'(t)·t.
    const double h = 1e-5;
    int checked = 0;
    for (int i = 1; i < 2000; ++i) {
        double u = beta.log_span() * i / 2000.0;
        double t = beta.r0() * std::exp(-u);
        double fd = (beta.value(t * std::exp(h)) - beta.value(t * std::exp(-h))) / (2 * h);
        double an = beta.derivative_times_t(t);
        if (std::fabs(an) < 1e-3 * beta.k()) {
            CHECK(std::fabs(fd - an) < 1e-9);
            continue;
        }
        ++checked;
        CHECK_MESSAGE(std::fabs(fd - an) < 1e-6 * std::fabs(an), "u=" << u);
        CHECK(std::fabs(beta.derivative(t) * t - an) < 1e-12 * std::fabs(an));
    }
    CHECK(checked > 500);
}

TEST_CASE("beta preconditions") {
    const auto& m = model3();
    const double gap = m.lambda.c - m.lambda.s;
    CHECK_THROWS_AS(make_beta(m, 0.0), PreconditionError);
    CHECK_THROWS_AS(make_beta(m, gap), PreconditionError);
    CHECK_THROWS_AS(make_beta(m, -0.01), PreconditionError);
    // Tiny k needs ~b/k e-folds: far below double range.
    try {
        make_beta(m, 1e-4);
        FAIL("expected InfeasibleBudget");
    } catch (const InfeasibleBudget& e) {
        CHECK(e.required_log10_t1() < -300);
    }
    BetaProfile smaller = make_beta(m, default_k(m) / 4);
    CHECK(smaller.log_span() > make_beta(m, default_k(m)).log_span());
}
