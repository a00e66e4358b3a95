#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dalab/holonomy.hpp"

namespace dalab {

struct PlanarStep {
    TorusPoint2 point;
    Vec2 displacement = Vec2::Zero();
};

class PlanarMap {
public:
    virtual ~PlanarMap() = default;
    virtual PlanarStep step(const TorusPoint2& x) const = 0;
    virtual std::string label() const = 0;
};

class TranslationMap final : public PlanarMap {
public:
    explicit TranslationMap(const AnosovModel& model) : lift_(translation_lift(model)) {}
    explicit TranslationMap(Vec2 lift) : lift_(lift) {}
    PlanarStep step(const TorusPoint2& x) const override {
        return {project(Vec2(x.coords + lift_)), lift_};
    }
    std::string label() const override { return "T_B"; }

private:
    Vec2 lift_;
};

class HolonomyMap final : public PlanarMap {
public:
    explicit HolonomyMap(const Holonomy& hol) : hol_(&hol) {}
    PlanarStep step(const TorusPoint2& x) const override {
        ReturnResult r = hol_->f_step(x);
        return {r.point, r.displacement};
    }
    std::string label() const override { return "f_g"; }

private:
    const Holonomy* hol_;
};

struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string name;
    std::map<std::string, double> parameters;
    std::map<std::string, double> metrics;
    std::map<std::string, bool> verdicts;
    std::map<std::string, std::string> provenance;
    std::vector<std::string> notes;
    std::map<std::string, Series> series;

    bool passed() const;
    // Throws NumericalError naming the first non-finite metric.
    void check_finite() const;
};

// Seeded generator for task index i; identical across runs and thread counts.
std::uint64_t task_seed(std::uint64_t seed, std::uint64_t index);
std::vector<TorusPoint2> random_points2(std::uint64_t seed, int n);
std::vector<TorusPoint3> random_points3(std::uint64_t seed, int n);

ExperimentReport minimality_scan(const PlanarMap& f, int N, double eps, const std::vector<TorusPoint2>& starts);

struct SensitivityOptions {
    double delta = 1e-6;
    int N = 10000;
    int pairs = 100;
    int directions_per_base = 10;  // pairs sharing one base point
    double growth = 1e3;          // exceedance threshold = growth·δ
    double min_fraction = 0.01;
    double neighborhood = 1e-3;   // base points drawn within this radius of center
    TorusPoint2 center;
    std::uint64_t seed = 1;
    bool lyapunov_check = true;
};
ExperimentReport sensitivity_probe(const PlanarMap& f, const SensitivityOptions& opt);

using PointPair = std::pair<TorusPoint2, TorusPoint2>;
struct LiYorkeOptions {
    int N = 10000;
    double eps_low = 1e-3;
    double eps_high = 0.0;
};
ExperimentReport li_yorke_scan(const PlanarMap& f, const std::vector<PointPair>& pairs, const LiYorkeOptions& opt,
                               const std::vector<PointPair>& control_pairs = {});

// The p-fiber arc carried to the sheet along unstable leaves.
struct SheetArc {
    FiberArc arc;
    std::vector<TorusPoint2> points;  // ordered along the arc
    double length = 0.0;              // polyline length on T²
};
SheetArc fiber_arc_on_sheet(const Holonomy& hol, const ShadowField& field, const TorusPoint3& xi, int probe_N,
                            int samples);
std::vector<PointPair> arc_pairs(const SheetArc& arc);

struct EntropyOptions {
    int n_max = 20;
    std::vector<double> eps_list{0.05};
    int samples = 1000;
    double slope_max = 0.05;
    double noise = 0.02;
    std::uint64_t seed = 1;
};
ExperimentReport entropy_estimate(const PlanarMap& f, const EntropyOptions& opt);

struct ErgodicOptions {
    int N = 1000000;
    double spread_max = 1e-2;
};
ExperimentReport unique_ergodicity_probe(const PlanarMap& f, const std::vector<TorusPoint2>& starts,
                                         const ErgodicOptions& opt);
// Names of the fixed observable dictionary, in evaluation order.
std::vector<std::string> observable_names();
void evaluate_observables(const TorusPoint2& x, double* out);

Vec2 rotation_vector(const PlanarMap& f, const TorusPoint2& x0, int N);
ExperimentReport rotation_report(const PlanarMap& f, const AnosovModel& model, const TorusPoint2& x0, int N,
                                 double tol);

struct CensusOptions {
    int samples = 10000;
    int N = 60;
    int burn = -1;
    double gamma = 0.0;  // 0 → default_gamma_threshold
    double visit_radius = 1.0;
    double max_fraction = 0.05;
    std::uint64_t seed = 1;
};
ExperimentReport fiber_census(const ShadowField& field, const CensusOptions& opt);

}  // namespace dalab
