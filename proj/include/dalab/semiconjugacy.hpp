#pragma once

#include "dalab/section_solver.hpp"

namespace dalab {

// u = H − id, summed as −Σ_{n<N} Bⁿ·Δ(G^{−(n+1)}x) on the s,c components. The
// u-component vanishes identically: Δ has no unstable part.
class ShadowField {
public:
    explicit ShadowField(const DAMap& g, double tol = 1e-13, std::optional<int> n_trunc = std::nullopt);

    const DAMap& map() const { return *g_; }
    int n_trunc() const { return n_trunc_; }
    double c_shadow() const { return c_shadow_; }
    double tolerance() const { return tol_; }
    // λ_c^N√k/(1−λ_c) + λ_u^{−N}√k/(1−1/λ_u)
    double truncation_bound() const;

    Vec3 correction(const TorusPoint3& xi) const;  // u, standard coordinates
    Lift3 H(const Lift3& x) const;
    TorusPoint3 h(const TorusPoint3& xi) const;

private:
    const DAMap* g_;
    double tol_;
    int n_trunc_;
    double c_shadow_;
};

int truncation_for(const DAMap& g, double tol);

struct CentralExponent {
    double exponent = 0.0;
    Vec2 direction = Vec2(0, 1);
    double ball_visit_frequency = 0.0;
};

// Alignment at p converges like ((λ_s+b)/(λ_c+b))ⁿ ≈ 0.97ⁿ.
inline constexpr int kDefaultBurn = 1000;

// In-plane dominant direction aligned over a burn-in segment from g^{−N−burn}ξ,
// then (1/N)·log growth over the last N steps ending at ξ. burn < 0 picks
// max(N, kDefaultBurn).
CentralExponent central_backward_exponent(const DAMap& g, const TorusPoint3& xi, int N, int burn = -1,
                                          double visit_radius_factor = 1.0);

enum class FiberVerdict { trivial, nontrivial, undecided };
const char* to_string(FiberVerdict v);

struct FiberDiagnostic {
    TorusPoint3 point;
    double central_backward_exponent = 0.0;
    FiberVerdict verdict = FiberVerdict::undecided;
    double ball_visit_frequency = 0.0;
};

double default_gamma_threshold(const DAMap& g);  // 0.1·log(λ_c + b)

FiberDiagnostic fiber_diagnostic(const ShadowField& field, const TorusPoint3& xi, int N, double gamma_threshold,
                                 int burn = -1, double visit_radius_factor = 1.0);

struct FiberArc {
    Vec3 direction_chart;  // unit central direction used
    double s_minus = 0.0;  // collapse extends over [−s_minus, s_plus] along direction
    double s_plus = 0.0;
    double length() const { return s_minus + s_plus; }
    double max_length = 0.0;  // 2C√k
};

struct ArcProbeOptions {
    double slope = 1e-3;      // κ: collapse means ‖h(ξ+s·e) − h(ξ)‖ ≤ κ|s| + tol_abs
    double tol_abs = 1e-14;
    int bisections = 80;
};

FiberArc fiber_arc_probe(const ShadowField& field, const TorusPoint3& xi, int N, const ArcProbeOptions& opt = {});

}  // namespace dalab
