#pragma once

#include <memory>
#include <optional>

#include "dalab/bump_profiles.hpp"

namespace dalab {

struct DAParams {
    std::shared_ptr<const AnosovModel> model;
    double k = 0.0;
    double rho = 0.0;
    std::optional<BumpZ> Z;          // absent when k = 0
    std::optional<BetaProfile> beta;
};

double default_k(const AnosovModel& model);     // 0.9(λ_c − λ_s)
double max_rho(const AnosovModel& model);       // min(1/4, half shortest lattice vector)
double default_rho(const AnosovModel& model, double k);  // (√k + max_rho)/2

// k = 0 gives the linear map B itself.
DAParams make_params(std::shared_ptr<const AnosovModel> model, double k, std::optional<double> rho = std::nullopt,
                     const BetaShape& shape = {});

// Chart coordinates throughout: columns (e_s, e_c, e_u), adapted metric.
struct Jacobian3 {
    Mat3 matrix;
    Mat3 linear;        // A_ξ = diag(λ_s, λ_c, λ_u)
    Mat3 perturbation;  // M_ξ

    Mat2 plane_block() const { return matrix.topLeftCorner<2, 2>(); }   // T_ξ
    Vec2 unstable_column() const { return matrix.block<2, 1>(0, 2); }   // A_ξ of the graph transform
};

struct Rates {
    double s = 0.0, c = 0.0, u = 0.0;
};

struct BundleDirections {
    Vec3 s, c, u;  // unit chart vectors
};

class DAMap {
public:
    explicit DAMap(DAParams params);

    const DAParams& params() const { return params_; }
    const AnosovModel& model() const { return *params_.model; }
    const AdaptedFrame& frame() const { return params_.model->frame; }
    bool is_linear() const { return !params_.beta.has_value(); }
    double k() const { return params_.k; }
    double rho() const { return params_.rho; }
    double b() const { return is_linear() ? 0.0 : params_.beta->b(); }

    // Chart coordinates of ξ when it lies in the open ball B(p, ρ).
    std::optional<Vec3> ball_chart(const TorusPoint3& xi) const;
    bool in_ball(const TorusPoint3& xi) const { return ball_chart(xi).has_value(); }

    // Z(z)β(r)·(x, y, 0); zero off the support.
    Vec3 perturbation_chart(const Vec3& c) const;
    // Δ = G − B at the lift level, standard coordinates.
    Vec3 delta(const TorusPoint3& xi) const;
    // Z(z)β(r) at a chart point.
    double surgery_scale(const Vec3& c) const;

    TorusPoint3 apply(const TorusPoint3& xi) const;
    TorusPoint3 apply_inverse(const TorusPoint3& eta) const { return apply_inverse_charted(eta).point; }
    // g⁻¹η together with its ball chart, which the solve produces anyway.
    struct Charted {
        TorusPoint3 point;
        std::optional<Vec3> chart;
    };
    Charted apply_inverse_charted(const TorusPoint3& eta) const;
    Lift3 apply_lift(const Lift3& x) const;
    Lift3 apply_inverse_lift(const Lift3& y) const;

    Jacobian3 jacobian(const TorusPoint3& xi) const;
    Jacobian3 jacobian_chart(const Vec3& c) const;

    // Eigenvalues (λ₁, λ₂) of the symmetric in-plane surgery block S_ξ.
    Vec2 central_eigenstructure_S(const TorusPoint3& xi) const;
    double lambda1(const TorusPoint3& xi) const;

    Rates rate_functions(const TorusPoint3& xi, const BundleDirections& bundle) const;

private:
    Vec3 solve_inverse_in_ball(const Vec3& c0) const;

    DAParams params_;
    IntegerMatrix3 B_, B_inv_;
    Vec3 diag_;
};

// B·v reduced mod 1, accumulated in extended precision.
Vec3 integer_apply_mod1(const IntegerMatrix3& m, const Vec3& v);
Vec3 integer_apply(const IntegerMatrix3& m, const Vec3& v);

}  // namespace dalab
