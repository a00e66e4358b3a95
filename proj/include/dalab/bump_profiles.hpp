#pragma once

#include <string>
#include <vector>

#include "dalab/anosov_family.hpp"
#include "dalab/errors.hpp"

namespace dalab {

// 0 for u ≤ 0, 1 for u ≥ 1, C^∞ in between: 1/(1 + exp(c/u − c/(1−u))).
struct SmoothStep {
    double c = 1.0;
    double value(double u) const;
    double derivative(double u) const;
};

class BumpZ {
public:
    BumpZ() = default;
    explicit BumpZ(double rho);

    double rho() const { return rho_; }
    double value(double z) const;
    double derivative(double z) const;
    // sup |Z'|, located by dense scan plus golden-section polish.
    double derivative_bound() const { return derivative_bound_; }

private:
    double rho_ = 0.0;
    SmoothStep step_{0.6};
    double derivative_bound_ = 0.0;
};

BumpZ make_Z(double rho);

// Shape of β_k in e-fold coordinates u = log(r₀/t) ∈ [0, L]. The mass density
// is φ(u) = c·S(u/start_ramp)·σ((u−u₀)·logistic_rate)·S((L−u)/end_cutoff),
// so −β'(t)·t = φ(u) and the envelope −β'·t ≤ k is the scalar constraint c ≤ k.
// The logistic delay keeps φ small until β has grown, which keeps
// λ_s + β + 2β'·t positive (det dg > 0).
struct BetaShape {
    double utilization = 0.95;   // c ≈ utilization·k
    double start_ramp = 1.0;
    double end_cutoff = 0.5;
    double logistic_rate = 0.5;
    double delay_factor = 4.0;   // u₀ = 2·log(delay_factor·utilization·k/λ_s), floored at 0
};

class BetaProfile {
public:
    double k() const { return k_; }
    double b() const { return b_; }
    double r0() const { return r0_; }
    double t1() const { return t1_; }
    double log_span() const { return L_; }   // log(r₀/t₁)
    double scale() const { return c_; }
    double delay() const { return u0_; }
    const BetaShape& shape() const { return shape_; }

    double value(double t) const;
    double derivative(double t) const;
    // β'(t)·t, bounded by k in magnitude even where β' itself is huge.
    double derivative_times_t(double t) const;
    // min over t of λ_s + β(t) + 2β'(t)t, recorded during validation.
    double min_invertibility_margin() const { return min_margin_; }
    double max_envelope_ratio() const { return max_envelope_ratio_; }

    double density(double u) const;  // φ(u)

private:
    friend BetaProfile make_beta(const AnosovModel&, double, const BetaShape&);

    double omega(double u) const;
    double cumulative(double u) const;

    double k_ = 0, b_ = 0, r0_ = 0, t1_ = 0, L_ = 0, c_ = 0, u0_ = 0;
    BetaShape shape_;
    double h_ = 0;
    std::vector<double> table_;   // ∫₀^{j·h} φ
    double min_margin_ = 0, max_envelope_ratio_ = 0;
};

BetaProfile make_beta(const AnosovModel& model, double k, const BetaShape& shape = {});

// Thrown when the logarithmic budget needs t₁ below the representable range.
class InfeasibleBudget : public PreconditionError {
public:
    InfeasibleBudget(const std::string& msg, double log10_t1) : PreconditionError(msg), log10_t1_(log10_t1) {}
    double required_log10_t1() const { return log10_t1_; }

private:
    double log10_t1_;
};

}  // namespace dalab
