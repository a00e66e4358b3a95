#include "dalab/anosov_family.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dalab/errors.hpp"

namespace dalab {

namespace {

using boost::multiprecision::cpp_rational;
using I128 = __int128;
using I3 = std::array<std::array<I128, 3>, 3>;

cpp_rational poly_exact(int a, const cpp_rational& x) {
    cpp_rational a2 = cpp_rational(a) * a;
    cpp_rational a4 = a2 * a2;
    return ((-x + a2) * x + a4) * x + 1;
}

int sign_of(const cpp_rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

RootInterval bisect(int a, double lo, double hi) {
    int s_lo = char_poly_sign(a, lo);
    int s_hi = char_poly_sign(a, hi);
    if (s_lo == 0) return {lo, lo};
    if (s_hi == 0) return {hi, hi};
    if (s_lo == s_hi)
        throw NumericalError("bracket sign check failed for a=" + std::to_string(a) + " on [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    // Run to full double resolution; the 1e-12 width target is far above it.
    for (int it = 0; it < 4000; ++it) {
        double m = 0.5 * (lo + hi);
        if (m <= lo || m >= hi) break;
        int s = char_poly_sign(a, m);
        if (s == 0) return {m, m};
        if (s == s_lo)
            lo = m;
        else
            hi = m;
    }
    // Above |λ| ≈ 4500 one ulp exceeds 1e-12.
    const double target = std::max(1e-12, 2.0 * (std::nextafter(std::fabs(hi), INFINITY) - std::fabs(hi)));
    if (hi - lo > target) throw NumericalError("root bisection did not reach width 1e-12");
    return {lo, hi};
}

I3 mul(const I3& x, const I3& y) {
    I3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += x[i][k] * y[k][j];
    return r;
}

I3 adjugate(const I3& m) {
    I3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
            int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
            r[i][j] = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1];
        }
    return r;
}

IntegerMatrix3 narrow(const I3& m, int a) {
    IntegerMatrix3 r;
    const I128 lim = static_cast<I128>(std::numeric_limits<std::int64_t>::max());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (m[i][j] > lim || m[i][j] < -lim)
                throw PreconditionError("B_a entries overflow 64-bit integers for a=" + std::to_string(a));
            r.entries[i][j] = static_cast<std::int64_t>(m[i][j]);
        }
    return r;
}

I3 widen(const IntegerMatrix3& m) {
    I3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = m.entries[i][j];
    return r;
}

using LVec = Eigen::Matrix<long double, 3, 1>;

// Unit null vector of M − μI via the largest cross product of two rows.
Vec3 eigenvector(const IntegerMatrix3& M, long double mu) {
    LVec rows[3];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) rows[i][j] = static_cast<long double>(M(i, j));
        rows[i][i] -= mu;
    }
    LVec best = LVec::Zero();
    for (int i = 0; i < 3; ++i) {
        LVec c = rows[i].cross(rows[(i + 1) % 3]);
        if (c.norm() > best.norm()) best = c;
    }
    if (best.norm() == 0.0L) throw NumericalError("degenerate eigenvector computation");
    best /= best.norm();
    return best.cast<double>();
}

long double eigen_residual(const IntegerMatrix3& B, const Vec3& v, long double lambda) {
    long double r2 = 0.0L, b_norm = 0.0L;
    for (int i = 0; i < 3; ++i) {
        long double s = 0.0L, row = 0.0L;
        for (int j = 0; j < 3; ++j) {
            s += static_cast<long double>(B(i, j)) * v[j];
            row += std::fabs(static_cast<long double>(B(i, j)));
        }
        s -= lambda * v[i];
        r2 += s * s;
        b_norm = std::max(b_norm, row);
    }
    return std::sqrt(r2) / std::max(1.0L, b_norm);
}

}  // namespace

Mat3 IntegerMatrix3::to_real() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = static_cast<double>(entries[i][j]);
    return r;
}

I128 determinant(const IntegerMatrix3& m) {
    I3 w = widen(m);
    return w[0][0] * (w[1][1] * w[2][2] - w[1][2] * w[2][1]) -
           w[0][1] * (w[1][0] * w[2][2] - w[1][2] * w[2][0]) +
           w[0][2] * (w[1][0] * w[2][1] - w[1][1] * w[2][0]);
}

IntegerMatrix3 make_Ma(int a) {
    if (a < 3) throw PreconditionError("family parameter a must be >= 3, got " + std::to_string(a));
    if (a > 100000) throw PreconditionError("family parameter a too large for 64-bit entries");
    std::int64_t A = a;
    IntegerMatrix3 m;
    m.entries = {{{0, -1, 0}, {1, A * A - 1, A}, {0, A * A * A + A, 1}}};
    if (determinant(m) != 1) throw NumericalError("det(M_a) != 1");
    return m;
}

double char_poly_eval(int a, double lambda) {
    double a2 = static_cast<double>(a) * a;
    return ((-lambda + a2) * lambda + a2 * a2) * lambda + 1.0;
}

int char_poly_sign(int a, double lambda) {
    return sign_of(poly_exact(a, cpp_rational(lambda)));
}

std::array<RootSignCheck, 6> root_sign_checks(int a) {
    cpp_rational a2 = cpp_rational(a) * a;
    auto at = [&](const char* label, const cpp_rational& x, int expected) {
        cpp_rational v = poly_exact(a, x);
        return RootSignCheck{label, static_cast<double>(v), sign_of(v), expected};
    };
    return {at("P(-2a^2/3)", -2 * a2 / 3, 1), at("P(-a^2/3)", -a2 / 3, -1), at("P(-1)", cpp_rational(-1), -1),
            at("P(0)", cpp_rational(0), 1),     at("P(a^2)", a2, 1),           at("P(2a^2)", 2 * a2, -1)};
}

RootEnclosures isolate_roots(int a) {
    if (a < 3) throw PreconditionError("family parameter a must be >= 3, got " + std::to_string(a));
    for (const auto& c : root_sign_checks(a))
        if (c.sign != c.expected)
            throw NumericalError(std::string("root lemma sign evaluation failed: ") + c.label);
    double a2 = static_cast<double>(a) * a;
    // −2a²/3 and −a²/3 are not dyadic; widen outward by an ulp so the double
    // brackets contain the exact ones.
    double lo_alpha = std::nextafter(-2.0 * a2 / 3.0, -INFINITY);
    double hi_alpha = std::nextafter(-a2 / 3.0, INFINITY);
    RootEnclosures r;
    r.alpha = bisect(a, lo_alpha, hi_alpha);
    r.beta = bisect(a, -1.0, 0.0);
    r.gamma = bisect(a, a2, 2.0 * a2);
    return r;
}

Spectrum family_spectrum(const RootEnclosures& roots) {
    auto inv_sq = [](const RootInterval& iv) {
        long double m = 0.5L * (static_cast<long double>(iv.lo) + iv.hi);
        return static_cast<double>(1.0L / (m * m));
    };
    return {inv_sq(roots.gamma), inv_sq(roots.alpha), inv_sq(roots.beta)};
}

AnosovModel make_model(int a) {
    AnosovModel model;
    model.a = a;
    model.M = make_Ma(a);
    I3 m = widen(model.M);
    I3 m2 = mul(m, m);
    model.B_exact = narrow(adjugate(m2), a);
    model.B = model.B_exact.to_real();
    model.B_inverse = narrow(m2, a).to_real();

    model.roots = isolate_roots(a);
    model.lambda = family_spectrum(model.roots);
    const Spectrum& L = model.lambda;

    auto mid = [](const RootInterval& iv) { return 0.5L * (static_cast<long double>(iv.lo) + iv.hi); };
    Vec3 es = eigenvector(model.M, mid(model.roots.gamma));
    Vec3 ec = eigenvector(model.M, mid(model.roots.alpha));
    Vec3 eu = eigenvector(model.M, mid(model.roots.beta));

    int axis = 2;
    if (std::fabs(eu[2]) < 1e-8) {
        axis = std::fabs(eu[0]) >= std::fabs(eu[1]) ? 0 : 1;
        if (std::fabs(eu[axis]) < 1e-8) throw NumericalError("unstable direction has no transverse axis");
    }
    model.transverse_axis = axis;
    if (eu[axis] < 0) eu = -eu;
    if (es[0] < 0) es = -es;
    if (ec[0] < 0) ec = -ec;

    Mat3 P;
    P.col(0) = es;
    P.col(1) = ec;
    P.col(2) = eu;
    model.frame = AdaptedFrame(P);

    model.max_eigen_residual = static_cast<double>(std::max(
        {eigen_residual(model.B_exact, es, L.s), eigen_residual(model.B_exact, ec, L.c),
         eigen_residual(model.B_exact, eu, L.u)}));

    double a4 = std::pow(static_cast<double>(a), 4);
    model.K = L.s * a4;
    model.K_prime = L.c * a4;

    auto fail = [&](const std::string& what) {
        throw NumericalError("AnosovModel invariant violated for a=" + std::to_string(a) + ": " + what);
    };
    if (!(0 < L.s && L.s < L.c && L.c < 1 && 1 < L.u)) fail("0 < λ_s < λ_c < 1 < λ_u");
    if (std::fabs(static_cast<long double>(L.s) * L.c * L.u - 1.0L) > 1e-10) fail("λ_s·λ_c·λ_u = 1");
    if (!(0.1 < model.K && model.K < model.K_prime && model.K_prime < 10)) fail("1/10 < K_a < K'_a < 10");
    if (model.max_eigen_residual > 1e-10) fail("eigen-residual");
    if ((P * model.frame.inverse() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12) fail("frame inverse");
    return model;
}

Vec2 translation_lift(const AnosovModel& model) {
    Vec3 eu = model.e_u();
    int axis = model.transverse_axis;
    if (std::fabs(eu[axis]) < 1e-8) throw NumericalError("unstable direction is not transverse to T^2");
    Vec2 v;
    int n = 0;
    for (int i = 0; i < 3; ++i)
        if (i != axis) v[n++] = eu[i] / eu[axis];
    return v;
}

Vec2 translation_vector(const AnosovModel& model) { return project(translation_lift(model)).coords; }

}  // namespace dalab
