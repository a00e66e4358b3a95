#pragma once

#include <array>
#include <cstdint>

#include "dalab/torus_geometry.hpp"

namespace dalab {

struct IntegerMatrix3 {
    std::array<std::array<std::int64_t, 3>, 3> entries{};

    std::int64_t operator()(int i, int j) const { return entries[i][j]; }
    Mat3 to_real() const;
};

// Exact determinant (128-bit accumulation).
__int128 determinant(const IntegerMatrix3& m);

IntegerMatrix3 make_Ma(int a);

// −λ³ + a²λ² + a⁴λ + 1
double char_poly_eval(int a, double lambda);
// Sign of P_a at a dyadic point, computed in exact rational arithmetic.
int char_poly_sign(int a, double lambda);

struct RootInterval {
    double lo = 0.0;
    double hi = 0.0;
    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
};

// α ∈ [−2a²/3, −a²/3], β ∈ [−1, 0], γ ∈ [a², 2a²].
struct RootEnclosures {
    RootInterval alpha, beta, gamma;
};

RootEnclosures isolate_roots(int a);

// Exact sign of P_a at each bracket endpoint against the sign the root
// lemma predicts.
struct RootSignCheck {
    const char* label;
    double value;
    int sign;
    int expected;
};
std::array<RootSignCheck, 6> root_sign_checks(int a);

struct Spectrum {
    double s = 0.0, c = 0.0, u = 0.0;
};

// λ = 1/μ² for the roots μ of P_a; needs no matrices, so works for large a.
Spectrum family_spectrum(const RootEnclosures& roots);

struct AnosovModel {
    int a = 3;
    IntegerMatrix3 M;
    IntegerMatrix3 B_exact;  // adj(M²) = (M²)⁻¹
    Mat3 B;
    Mat3 B_inverse;          // M², exact integers stored as reals
    RootEnclosures roots;
    Spectrum lambda;
    AdaptedFrame frame;
    double K = 0.0;          // λ_s·a⁴
    double K_prime = 0.0;    // λ_c·a⁴
    // Standard coordinate playing the role of "third" for the transverse
    // T². 2 unless (e_u)₃ degenerates.
    int transverse_axis = 2;
    double max_eigen_residual = 0.0;

    const Vec3 e_s() const { return frame.basis().col(0); }
    const Vec3 e_c() const { return frame.basis().col(1); }
    const Vec3 e_u() const { return frame.basis().col(2); }
};

AnosovModel make_model(int a);

// ((e_u)_i/(e_u)_axis, (e_u)_j/(e_u)_axis) mod 1 for the two non-transverse
// axes, in increasing index order.
Vec2 translation_vector(const AnosovModel& model);
// Same without reduction mod 1.
Vec2 translation_lift(const AnosovModel& model);

}  // namespace dalab
