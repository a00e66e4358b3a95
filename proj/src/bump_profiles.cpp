#include "dalab/bump_profiles.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <string>

#include "dalab/errors.hpp"

namespace dalab {

namespace {

constexpr double kGaussX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                               0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGaussW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                               0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss8(F&& f, double lo, double hi) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo), s = 0.0;
    for (int i = 0; i < 8; ++i) s += kGaussW[i] * f(mid + half * kGaussX[i]);
    return s * half;
}

constexpr double kGauss4X[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kGauss4W[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

template <class F>
double gauss4(F&& f, double lo, double hi) {
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo), s = 0.0;
    for (int i = 0; i < 4; ++i) s += kGauss4W[i] * f(mid + half * kGauss4X[i]);
    return s * half;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kPanel = 0.05;       // e-folds per quadrature panel
constexpr double kTablePanel = 0.01;  // 4-point rule on a partial panel is exact to rounding
constexpr double kMinLogT1 = -690.0;  // log(1e-300)

}  // namespace

double SmoothStep::value(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double q = c / u - c / (1.0 - u);
    if (q > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(q));
}

double SmoothStep::derivative(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double q = c / u - c / (1.0 - u);
    if (std::fabs(q) > 700.0) return 0.0;
    double e = std::exp(q);
    double s = 1.0 / (1.0 + e);
    return s * (1.0 - s) * (c / (u * u) + c / ((1.0 - u) * (1.0 - u)));
}

BumpZ::BumpZ(double rho) : rho_(rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw PreconditionError("bump radius must be positive");
    // |Z'| = (2/ρ)·S'(u); locate max S' on [0,1].
    const int n = 4096;
    int best = 1;
    for (int i = 1; i < n; ++i)
        if (step_.derivative(double(i) / n) > step_.derivative(double(best) / n)) best = i;
    double lo = double(best - 1) / n, hi = double(best + 1) / n;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
        if (step_.derivative(m1) > step_.derivative(m2))
            hi = m2;
        else
            lo = m1;
    }
    derivative_bound_ = (2.0 / rho_) * step_.derivative(0.5 * (lo + hi));
    if (!(derivative_bound_ < 4.0 / rho_)) throw NumericalError("bump derivative bound exceeds 4/rho");
}

double BumpZ::value(double z) const { return 1.0 - step_.value(2.0 * std::fabs(z) / rho_); }

double BumpZ::derivative(double z) const {
    double d = -(2.0 / rho_) * step_.derivative(2.0 * std::fabs(z) / rho_);
    return z < 0 ? -d : d;
}

BumpZ make_Z(double rho) { return BumpZ(rho); }

double BetaProfile::omega(double u) const {
    const SmoothStep s1{1.0};
    return s1.value(u / shape_.start_ramp) * logistic((u - u0_) * shape_.logistic_rate) *
           s1.value((L_ - u) / shape_.end_cutoff);
}

double BetaProfile::density(double u) const {
    if (u <= 0.0 || u >= L_) return 0.0;
    return c_ * omega(u);
}

double BetaProfile::cumulative(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= L_) return b_;
    std::size_t j = std::min(static_cast<std::size_t>(u / h_), table_.size() - 1);
    double base = j * h_;
    return std::min(b_, table_[j] + c_ * gauss4([this](double v) { return omega(v); }, base, u));
}

double BetaProfile::value(double t) const {
    if (t <= t1_) return b_;
    if (t >= r0_) return 0.0;
    return cumulative(std::log(r0_ / t));
}

double BetaProfile::derivative_times_t(double t) const {
    if (t <= t1_ || t >= r0_) return 0.0;
    return -density(std::log(r0_ / t));
}

double BetaProfile::derivative(double t) const {
    if (t <= t1_ || t >= r0_) return 0.0;
    return derivative_times_t(t) / t;
}

BetaProfile make_beta(const AnosovModel& model, double k, const BetaShape& shape) {
    const double ls = model.lambda.s, lc = model.lambda.c;
    if (!(k > 0.0 && k < lc - ls))
        throw PreconditionError("profile requires 0 < k < lambda_c - lambda_s, got k=" + std::to_string(k));
    if (!(shape.utilization > 0 && shape.utilization < 1 && shape.start_ramp > 0 && shape.end_cutoff > 0 &&
          shape.logistic_rate > 0 && shape.delay_factor > 0))
        throw PreconditionError("invalid profile shape parameters");

    BetaProfile p;
    p.k_ = k;
    p.shape_ = shape;
    p.b_ = 1.0 - lc + 0.5 * k;
    p.r0_ = 0.5 * k;
    p.u0_ = std::max(0.0, 2.0 * std::log(shape.delay_factor * shape.utilization * k / ls));
    p.c_ = shape.utilization * k;

    auto omega_mass = [&p](double L) {
        p.L_ = L;
        int n = std::max(1, static_cast<int>(std::ceil(L / kPanel)));
        double h = L / n, s = 0.0;
        for (int j = 0; j < n; ++j) s += gauss8([&p](double v) { return p.omega(v); }, j * h, (j + 1) * h);
        return s;
    };
    const double target = p.b_ / p.c_;
    double lo = p.u0_ + target, hi = lo + 2.0 * target + 20.0;
    if (omega_mass(hi) < target) throw NumericalError("profile mass bracket failed");
    auto required = [&](double L) {
        double log_t1 = std::log(p.r0_) - L;
        if (log_t1 < kMinLogT1)
            throw InfeasibleBudget("infeasible profile budget: t1 = 1e" + std::to_string(log_t1 / std::log(10.0)) +
                                       " is below the representable range",
                                   log_t1 / std::log(10.0));
    };
    while (omega_mass(lo) > target) lo *= 0.5;
    boost::uintmax_t iters = 200;
    auto root = boost::math::tools::toms748_solve([&](double L) { return omega_mass(L) - target; }, lo, hi,
                                                  boost::math::tools::eps_tolerance<double>(50), iters);
    double L = 0.5 * (root.first + root.second);
    required(L);

    p.L_ = L;
    p.t1_ = p.r0_ * std::exp(-L);
    int n = std::max(1, static_cast<int>(std::ceil(L / kTablePanel)));
    p.h_ = L / n;
    std::vector<double> raw(n + 1, 0.0);
    double carry = 0.0;
    for (int j = 0; j < n; ++j) {
        double y = gauss8([&p](double v) { return p.omega(v); }, j * p.h_, (j + 1) * p.h_) - carry;
        double t = raw[j] + y;
        carry = (t - raw[j]) - y;
        raw[j + 1] = t;
    }
    p.c_ = p.b_ / raw[n];
    p.table_.resize(n + 1);
    for (int j = 0; j <= n; ++j) p.table_[j] = p.c_ * raw[j];
    p.table_[n] = p.b_;

    auto fail = [&](const std::string& what) {
        throw NumericalError("BetaProfile invariant violated (k=" + std::to_string(k) + "): " + what);
    };
    if (!(p.c_ <= k)) fail("envelope scale c <= k");
    if (!(ls + p.b_ < 1.0 && 1.0 < lc + p.b_ && lc + p.b_ < 1.0 + k)) fail("lambda_s+b < 1 < lambda_c+b < 1+k");

    // Grid validation: 2·10⁴ points log-spaced over [t₁/10, 10·r₀] plus the
    // table nodes themselves.
    const int m = 20000;
    double log_lo = std::log(p.t1_) - std::log(10.0), log_hi = std::log(p.r0_) + std::log(10.0);
    double prev = p.value(std::exp(log_lo));
    p.min_margin_ = ls + p.b_;
    p.max_envelope_ratio_ = 0.0;
    for (int i = 0; i <= m; ++i) {
        double t = std::exp(log_lo + (log_hi - log_lo) * i / m);
        double v = p.value(t), dt = p.derivative_times_t(t);
        if (v > prev + 1e-14) fail("beta decreasing");
        if (!(dt <= 0.0 && dt >= -k)) fail("-k <= beta'(t) t <= 0");
        p.max_envelope_ratio_ = std::max(p.max_envelope_ratio_, -dt / k);
        p.min_margin_ = std::min(p.min_margin_, ls + v + 2.0 * dt);
        prev = v;
    }
    for (int j = 0; j <= n; ++j) {
        double u = j * p.h_;
        p.min_margin_ = std::min(p.min_margin_, ls + p.table_[j] - 2.0 * p.density(u));
    }
    if (!(p.min_margin_ > 0.0)) fail("lambda_s + beta + 2 beta' t > 0 (invertibility)");
    if (p.value(p.r0_) != 0.0 || p.value(k) != 0.0) fail("support within [0, k]");
    if (p.value(0.5 * p.t1_) != p.b_) fail("plateau");
    return p;
}

}  // namespace dalab
