#pragma once

#include <vector>

#include "dalab/semiconjugacy.hpp"

namespace dalab {

struct ReturnConfig {
    double step = 0.0;        // 0 → ρ/5
    double event_tol = 1e-13;
    int n_bundle = 0;         // 0 → default_bundle_iterations
    double transversality_margin = 0.05;
    int max_steps = 0;        // 0 → derived from the linear leaf length
};

struct ReturnResult {
    TorusPoint2 point;
    double leaf_length = 0.0;
    Vec2 displacement = Vec2::Zero();  // lift displacement in the two sheet coordinates
    bool ball_encounter = false;
};

struct ReturnOrbit {
    std::vector<TorusPoint2> points;
    std::vector<double> return_times;
    std::vector<Vec2> displacements;
    std::vector<bool> ball_flags;
};

TorusPoint2 T_B_map(const AnosovModel& model, const TorusPoint2& x);

// Embeds a sheet point (x₁, x₂) as the lift with zero transverse coordinate.
Vec3 embed_sheet(const AnosovModel& model, const Vec2& x);
Vec2 sheet_coords(const AnosovModel& model, const Vec3& X);

class Holonomy {
public:
    Holonomy(const DAMap& g, ReturnConfig cfg = {});

    const DAMap& map() const { return *g_; }
    const ReturnConfig& config() const { return cfg_; }

    // Unit (adapted) vector field spanning E^u_g, standard coordinates,
    // oriented with positive transverse component.
    Vec3 field(const Vec3& X) const;

    // Integrates from X until the transverse coordinate first crosses the next
    // integer (sign = +1) or the previous integer (sign = −1).
    ReturnResult first_return(const Vec3& X, int sign = 1) const;
    ReturnResult first_return(const TorusPoint3& xi) const { return first_return(xi.coords, 1); }

    ReturnResult f_step(const TorusPoint2& x) const;
    TorusPoint2 f(const TorusPoint2& x) const { return f_step(x).point; }
    TorusPoint2 f_inverse(const TorusPoint2& x) const;
    ReturnOrbit orbit(const TorusPoint2& x0, int n) const;

    // Sample points of the integral curve from X over one return, every
    // stride steps.
    std::vector<Vec3> leaf_samples(const Vec3& X, int stride = 1) const;

private:
    Vec3 field_at(const Vec3& X, bool& in_ball) const;

    const DAMap* g_;
    ReturnConfig cfg_;
    int axis_;
    Vec3 e_u_;
};

// ĥ(x) = P(h(x)): slide H(x, 0) along e_u to the sheet.
TorusPoint2 h_hat(const ShadowField& field, const TorusPoint2& x);

}  // namespace dalab
