#include "dalab/run.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <locale>
#include <random>
#include <sstream>
#include <unistd.h>

#include "dalab/errors.hpp"

namespace dalab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitNumerical = 3;

std::string fmt(double v) {
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(17);
    o << v;
    return o.str();
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json j = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

json imat_json(const IntegerMatrix3& m) {
    json j = json::array();
    for (int i = 0; i < 3; ++i) j.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return j;
}

json interval_json(const RootInterval& r) { return {{"lo", r.lo}, {"hi", r.hi}}; }

std::vector<double> parse_list(const std::string& s, std::size_t n, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream in(item);
        in.imbue(std::locale::classic());
        double v;
        in >> v;
        if (!in || !std::isfinite(v)) throw CLI::ValidationError(what, "expected " + std::to_string(n) + " reals");
        out.push_back(v);
    }
    if (out.size() != n) throw CLI::ValidationError(what, "expected " + std::to_string(n) + " comma-separated reals");
    return out;
}

std::shared_ptr<const AnosovModel> shared_model(int a) { return std::make_shared<const AnosovModel>(make_model(a)); }

ReturnConfig return_config(const RunConfig& cfg) {
    ReturnConfig rc;
    if (auto s = cfg.real_or_auto("holonomy.step")) rc.step = *s;
    rc.event_tol = cfg.real("holonomy.event_tol");
    if (cfg.raw("holonomy.n_bundle") != "auto") rc.n_bundle = static_cast<int>(cfg.integer("holonomy.n_bundle"));
    return rc;
}

std::unique_ptr<Instance> build(std::shared_ptr<const AnosovModel> model, double k, std::optional<double> rho,
                                const RunConfig& cfg) {
    auto inst = std::make_unique<Instance>();
    inst->model = std::move(model);
    inst->g = std::make_unique<DAMap>(make_params(inst->model, k, rho));
    inst->field = std::make_unique<ShadowField>(*inst->g, cfg.real("semiconj.tol"));
    inst->holonomy = std::make_unique<Holonomy>(*inst->g, return_config(cfg));
    return inst;
}

std::uint64_t seed_of(const RunConfig& cfg, std::uint64_t salt) {
    return task_seed(static_cast<std::uint64_t>(cfg.integer("seed")), salt);
}

void merge_control(ExperimentReport& r, const ExperimentReport& control) {
    for (const auto& [k, v] : control.metrics) r.metrics["control_" + k] = v;
    for (const auto& [k, s] : control.series) r.series["control_" + k] = s;
}

ExperimentReport minimality(const RunConfig& cfg, const Instance& inst) {
    int N = static_cast<int>(cfg.integer("minimality.N"));
    double eps = cfg.real("minimality.eps");
    auto starts = random_points2(seed_of(cfg, 1), static_cast<int>(cfg.integer("minimality.starts")));
    HolonomyMap f(*inst.holonomy);
    TranslationMap tb(*inst.model);
    ExperimentReport r = minimality_scan(f, N, eps, starts);
    ExperimentReport c = minimality_scan(tb, N, eps, starts);
    merge_control(r, c);
    r.notes.push_back("control T_B min coverage " + fmt(c.metrics.at("min_coverage")));
    return r;
}

ExperimentReport sensitivity(const RunConfig& cfg, const Instance& inst) {
    SensitivityOptions o;
    o.delta = cfg.real("sensitivity.delta");
    o.N = static_cast<int>(cfg.integer("sensitivity.N"));
    o.pairs = static_cast<int>(cfg.integer("sensitivity.pairs"));
    o.directions_per_base = static_cast<int>(cfg.integer("sensitivity.directions_per_base"));
    o.growth = cfg.real("sensitivity.growth");
    o.min_fraction = cfg.real("sensitivity.min_fraction");
    o.neighborhood = cfg.real("sensitivity.neighborhood");
    // p = 0 lies on the sheet, so its fiber meets T² at the origin.
    o.center = project(sheet_coords(*inst.model, Vec3::Zero()));
    o.seed = seed_of(cfg, 2);
    HolonomyMap f(*inst.holonomy);
    TranslationMap tb(*inst.model);
    ExperimentReport r = sensitivity_probe(f, o);
    SensitivityOptions oc = o;
    oc.lyapunov_check = false;
    ExperimentReport c = sensitivity_probe(tb, oc);
    merge_control(r, c);
    r.parameters["control_tol"] = cfg.real("sensitivity.control_tol");
    r.verdicts["control_T_B_not_sensitive"] = c.metrics.at("max_growth") <= 1.0 + cfg.real("sensitivity.control_tol");
    r.provenance["control_tol"] = "config (relative rounding allowance on the T_B isometry)";
    return r;
}

ExperimentReport li_yorke(const RunConfig& cfg, const Instance& inst) {
    const int arc_points = static_cast<int>(cfg.integer("li_yorke.arc_points"));
    SheetArc arc = fiber_arc_on_sheet(*inst.holonomy, *inst.field, TorusPoint3{},
                                      static_cast<int>(cfg.integer("fiber.probe_N")), arc_points);
    LiYorkeOptions o;
    o.N = static_cast<int>(cfg.integer("li_yorke.N"));
    o.eps_low = cfg.real("li_yorke.eps_low");
    o.eps_high = cfg.real("li_yorke.high_fraction") * arc.length;
    std::vector<PointPair> control;
    const int nc = static_cast<int>(cfg.integer("li_yorke.control_pairs"));
    auto pts = random_points2(seed_of(cfg, 3), 2 * nc);
    for (int i = 0; i < nc; ++i) control.emplace_back(pts[2 * i], pts[2 * i + 1]);
    HolonomyMap f(*inst.holonomy);
    ExperimentReport r = li_yorke_scan(f, arc_pairs(arc), o, control);
    r.parameters["high_fraction"] = cfg.real("li_yorke.high_fraction");
    r.metrics["arc_length_chart"] = arc.arc.length();
    r.metrics["arc_length_sheet"] = arc.length;
    r.metrics["arc_max_length"] = arc.arc.max_length;
    if (!control.empty())
        r.verdicts["control_bounded_below"] = r.metrics.at("control_min_distance") > o.eps_low;
    Series s;
    s.columns = {"index", "x", "y"};
    for (std::size_t i = 0; i < arc.points.size(); ++i)
        s.rows.push_back({double(i), arc.points[i].coords[0], arc.points[i].coords[1]});
    r.series["arc"] = s;
    return r;
}

ExperimentReport entropy(const RunConfig& cfg, const Instance& inst) {
    EntropyOptions o;
    o.n_max = static_cast<int>(cfg.integer("entropy.n_max"));
    o.eps_list = cfg.reals("entropy.eps");
    o.samples = static_cast<int>(cfg.integer("entropy.samples"));
    o.slope_max = cfg.real("entropy.slope_max");
    o.noise = cfg.real("entropy.noise");
    o.seed = seed_of(cfg, 4);
    HolonomyMap f(*inst.holonomy);
    TranslationMap tb(*inst.model);
    ExperimentReport r = entropy_estimate(f, o);
    ExperimentReport c = entropy_estimate(tb, o);
    merge_control(r, c);
    return r;
}

ExperimentReport ergodicity(const RunConfig& cfg, const Instance& inst) {
    ErgodicOptions o;
    o.N = static_cast<int>(cfg.integer("ergodicity.N"));
    o.spread_max = cfg.real("ergodicity.spread_max");
    auto starts = random_points2(seed_of(cfg, 5), static_cast<int>(cfg.integer("ergodicity.starts")));
    HolonomyMap f(*inst.holonomy);
    TranslationMap tb(*inst.model);
    ExperimentReport r = unique_ergodicity_probe(f, starts, o);
    merge_control(r, unique_ergodicity_probe(tb, starts, o));
    return r;
}

ExperimentReport rotation(const RunConfig& cfg, const Instance& inst) {
    HolonomyMap f(*inst.holonomy);
    TorusPoint2 x0 = random_points2(seed_of(cfg, 6), 1)[0];
    return rotation_report(f, *inst.model, x0, static_cast<int>(cfg.integer("rotation.N")),
                           cfg.real("rotation.tol"));
}

CensusOptions census_options(const RunConfig& cfg) {
    CensusOptions o;
    o.samples = static_cast<int>(cfg.integer("census.samples"));
    o.N = static_cast<int>(cfg.integer("census.N"));
    if (cfg.raw("census.burn") != "auto") o.burn = static_cast<int>(cfg.integer("census.burn"));
    o.gamma = cfg.real_or_auto("census.gamma").value_or(0.0);
    o.visit_radius = cfg.real("census.visit_radius");
    o.max_fraction = cfg.real("census.max_fraction");
    o.seed = seed_of(cfg, 7);
    return o;
}

ExperimentReport census(const RunConfig& cfg, const Instance& inst) {
    CensusOptions o = census_options(cfg);
    ExperimentReport r = fiber_census(*inst.field, o);
    double tol = cfg.real("census.exponent_tol");
    r.parameters["exponent_tol"] = tol;
    r.verdicts["exponent_at_p_matches"] =
        std::fabs(r.metrics.at("exponent_at_p") - r.metrics.at("expected_exponent_at_p")) < tol;
    return r;
}

json base_report_json(const ExperimentReport& r) {
    json j;
    j["name"] = r.name;
    j["parameters"] = r.parameters;
    j["metrics"] = r.metrics;
    j["verdicts"] = r.verdicts;
    j["passed"] = r.passed();
    j["provenance"] = r.provenance;
    j["notes"] = r.notes;
    json s = json::object();
    for (const auto& [k, v] : r.series) s[k] = r.name + "." + k + ".csv";
    j["series"] = s;
    return j;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string resolve_out_dir(const std::string& flag, const RunConfig* cfg) {
    if (!flag.empty()) return flag;
    if (cfg && !cfg->raw("out_dir").empty()) return cfg->raw("out_dir");
    if (const char* env = std::getenv("DALAB_OUT_DIR"); env && *env) return env;
    return ".";
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

json model_json(const AnosovModel& m) {
    json j;
    j["a"] = m.a;
    j["M"] = imat_json(m.M);
    j["det_M"] = static_cast<long long>(determinant(m.M));
    j["B"] = imat_json(m.B_exact);
    j["det_B"] = static_cast<long long>(determinant(m.B_exact));
    j["roots"] = {{"alpha", interval_json(m.roots.alpha)},
                  {"beta", interval_json(m.roots.beta)},
                  {"gamma", interval_json(m.roots.gamma)}};
    json checks = json::array();
    for (const auto& c : root_sign_checks(m.a))
        checks.push_back({{"point", c.label}, {"sign", c.sign}, {"expected", c.expected}});
    j["root_sign_checks"] = checks;
    j["spectrum"] = {{"lambda_s", m.lambda.s}, {"lambda_c", m.lambda.c}, {"lambda_u", m.lambda.u}};
    j["K"] = m.K;
    j["K_prime"] = m.K_prime;
    j["e_s"] = vec_json(m.e_s());
    j["e_c"] = vec_json(m.e_c());
    j["e_u"] = vec_json(m.e_u());
    j["unique_radius"] = m.frame.unique_radius();
    j["transverse_axis"] = m.transverse_axis;
    j["max_eigen_residual"] = m.max_eigen_residual;
    j["translation_vector"] = vec_json(translation_vector(m));
    return j;
}

double k_or_default(const std::optional<double>& k, const AnosovModel& m) { return k ? *k : default_k(m); }

struct CliState {
    int a = 3;
    std::optional<double> k, r, rho;
    bool json_out = false, pointwise = false, fiber = false, linear = false;
    int grid = 64, n = 100, samples = 2000, census_samples = 10000;
    std::string csv, x0, dir = "fwd", probe, config_path, out, name;
    double table_from = 3, table_to = 1e12;
    int table_points = 10;
};

std::string orbit_csv(const DAMap& g, TorusPoint3 x, int n, bool forward) {
    Series s;
    s.columns = {"n", "x", "y", "z", "chart_s", "chart_c", "chart_u", "in_ball"};
    for (int i = 0; i <= n; ++i) {
        Vec3 c = local_chart(x, g.frame());
        s.rows.push_back({double(i), x.coords[0], x.coords[1], x.coords[2], c[0], c[1], c[2],
                          g.in_ball(x) ? 1.0 : 0.0});
        if (i < n) x = forward ? g.apply(x) : g.apply_inverse(x);
    }
    return series_to_csv(s);
}

int cmd_family(const CliState& st) {
    AnosovModel m = make_model(st.a);
    json j = model_json(m);
    if (st.json_out) {
        print_json(j);
        return kExitPass;
    }
    std::cout << "a = " << m.a << "\n";
    for (int i = 0; i < 3; ++i)
        std::cout << (i == 0 ? "M = " : "    ") << m.M(i, 0) << " " << m.M(i, 1) << " " << m.M(i, 2) << "\n";
    std::cout << "det M = " << static_cast<long long>(determinant(m.M)) << "\n";
    std::cout << "alpha in [" << fmt(m.roots.alpha.lo) << ", " << fmt(m.roots.alpha.hi) << "]\n";
    std::cout << "beta  in [" << fmt(m.roots.beta.lo) << ", " << fmt(m.roots.beta.hi) << "]\n";
    std::cout << "gamma in [" << fmt(m.roots.gamma.lo) << ", " << fmt(m.roots.gamma.hi) << "]\n";
    std::cout << "lambda_s = " << fmt(m.lambda.s) << "  lambda_c = " << fmt(m.lambda.c)
              << "  lambda_u = " << fmt(m.lambda.u) << "\n";
    std::cout << "K = " << fmt(m.K) << "  K' = " << fmt(m.K_prime) << "\n";
    Vec2 t = translation_vector(m);
    std::cout << "translation = (" << fmt(t[0]) << ", " << fmt(t[1]) << ")\n";
    return kExitPass;
}

int cmd_profiles(const CliState& st) {
    auto model = shared_model(st.a);
    DAParams p = make_params(model, k_or_default(st.k, *model), st.rho);
    const BetaProfile& b = *p.beta;
    json j = {{"a", st.a},
              {"k", p.k},
              {"rho", p.rho},
              {"b", b.b()},
              {"r0", b.r0()},
              {"t1", b.t1()},
              {"log_span", b.log_span()},
              {"scale", b.scale()},
              {"delay", b.delay()},
              {"min_invertibility_margin", b.min_invertibility_margin()},
              {"max_envelope_ratio", b.max_envelope_ratio()},
              {"Z_derivative_bound", p.Z->derivative_bound()},
              {"Z_derivative_limit", 4.0 / p.rho}};
    if (!st.csv.empty()) {
        Series s;
        s.columns = {"t", "beta", "beta_prime", "beta_prime_t"};
        double lo = std::log(b.t1() / 10.0), hi = std::log(10.0 * b.r0());
        for (int i = 0; i < st.samples; ++i) {
            double t = std::exp(lo + (hi - lo) * i / std::max(1, st.samples - 1));
            s.rows.push_back({t, b.value(t), b.derivative(t), b.derivative_times_t(t)});
        }
        write_atomic(st.csv, series_to_csv(s));
        j["csv"] = st.csv;
    }
    print_json(j);
    return kExitPass;
}

int cmd_certify(const CliState& st) {
    if (!st.r) throw CLI::ValidationError("--r", "required");
    double k = st.k ? *st.k : 0.0;
    if (!st.k) {
        if (st.a > 30) throw CLI::ValidationError("--k", "required when a > 30");
        k = default_k(*shared_model(st.a));
    }
    SmoothnessCertificate c = certificate(st.a, k, *st.r);
    json j = {{"a", c.a},
              {"k", c.k},
              {"r", c.r},
              {"bound_outside", c.bound_outside},
              {"bound_inside", c.bound_inside},
              {"log10_bound_outside", c.log10_bound_outside},
              {"log10_bound_inside", c.log10_bound_inside},
              {"r_max", smoothness_max(st.a)},
              {"verdict", c.verdict}};
    bool ok = c.verdict;
    if (st.pointwise) {
        auto model = shared_model(st.a);
        DAMap g(make_params(model, k, st.rho));
        PointwiseCertificate pc = pointwise_certificate(g, *st.r, st.grid);
        j["pointwise"] = {{"grid", pc.grid},         {"sup", pc.sup},
                          {"at_p", pc.at_p},         {"outside", pc.outside},
                          {"sup_radius", pc.sup_radius}, {"sup_height", pc.sup_height},
                          {"verdict", pc.verdict}};
        ok = ok && pc.verdict;
    }
    print_json(j);
    return ok ? kExitPass : kExitFail;
}

int cmd_smoothness_max(const CliState& st) {
    json table = json::array();
    for (int i = 0; i < st.table_points; ++i) {
        double la = std::log10(st.table_from) +
                    (std::log10(st.table_to) - std::log10(st.table_from)) * i / std::max(1, st.table_points - 1);
        double a = std::pow(10.0, la);
        table.push_back({{"a", a}, {"r_max", smoothness_max(a)}});
    }
    print_json({{"a", st.a}, {"r_max", smoothness_max(st.a)}, {"table", table}});
    return kExitPass;
}

int cmd_orbit(const CliState& st) {
    auto model = shared_model(st.a);
    DAMap g(make_params(model, k_or_default(st.k, *model), st.rho));
    auto x = parse_list(st.x0, 3, "--x0");
    if (st.dir != "fwd" && st.dir != "bwd") throw CLI::ValidationError("--dir", "expected fwd or bwd");
    std::string csv = orbit_csv(g, project(Vec3(x[0], x[1], x[2])), st.n, st.dir == "fwd");
    if (st.csv.empty())
        std::cout << csv;
    else
        write_atomic(st.csv, csv);
    return kExitPass;
}

int cmd_semiconj(const CliState& st, const RunConfig& cfg) {
    auto model = shared_model(st.a);
    DAMap g(make_params(model, k_or_default(st.k, *model), st.rho));
    ShadowField field(g, cfg.real("semiconj.tol"));
    auto v = parse_list(st.probe, 3, "--probe");
    TorusPoint3 x = project(Vec3(v[0], v[1], v[2]));
    TorusPoint3 hx = field.h(x);
    TorusPoint3 bh = project(integer_apply_mod1(model->B_exact, hx.coords));
    double residual = adapted_distance(bh, field.h(g.apply(x)), g.frame());
    Lift3 H = field.H(Lift3{x.coords});
    json j = {{"point", vec_json(x.coords)},
              {"H", vec_json(H.coords)},
              {"h", vec_json(hx.coords)},
              {"correction_norm", g.frame().norm(field.correction(x))},
              {"shadow_bound", field.c_shadow() * std::sqrt(g.k())},
              {"n_trunc", field.n_trunc()},
              {"c_shadow", field.c_shadow()},
              {"residual", residual}};
    if (st.fiber) {
        CensusOptions o = census_options(cfg);
        double gamma = o.gamma > 0 ? o.gamma : default_gamma_threshold(g);
        FiberDiagnostic d = fiber_diagnostic(field, x, o.N, gamma, o.burn, o.visit_radius);
        FiberArc arc = fiber_arc_probe(field, x, static_cast<int>(cfg.integer("fiber.probe_N")));
        j["fiber"] = {{"exponent", d.central_backward_exponent},
                      {"verdict", to_string(d.verdict)},
                      {"gamma", gamma},
                      {"ball_visit_frequency", d.ball_visit_frequency},
                      {"arc_s_minus", arc.s_minus},
                      {"arc_s_plus", arc.s_plus},
                      {"arc_length", arc.length()},
                      {"arc_max_length", arc.max_length}};
    }
    print_json(j);
    return kExitPass;
}

int cmd_holonomy(const CliState& st, const RunConfig& cfg) {
    auto model = shared_model(st.a);
    auto x = parse_list(st.x0, 2, "--x0");
    Series s;
    s.columns = {"n", "x", "y", "return_time", "displacement_x", "displacement_y", "ball"};
    TorusPoint2 p = project(Vec2(x[0], x[1]));
    if (st.linear) {
        const double time = 1.0 / model->e_u()[model->transverse_axis];
        Vec2 d = translation_lift(*model);
        s.rows.push_back({0.0, p.coords[0], p.coords[1], 0.0, 0.0, 0.0, 0.0});
        for (int i = 1; i <= st.n; ++i) {
            p = T_B_map(*model, p);
            s.rows.push_back({double(i), p.coords[0], p.coords[1], time, d[0], d[1], 0.0});
        }
    } else {
        DAMap g(make_params(model, k_or_default(st.k, *model), st.rho));
        Holonomy hol(g, return_config(cfg));
        ReturnOrbit o = hol.orbit(p, st.n);
        s.rows.push_back({0.0, p.coords[0], p.coords[1], 0.0, 0.0, 0.0, 0.0});
        for (int i = 0; i < st.n; ++i)
            s.rows.push_back({double(i + 1), o.points[i + 1].coords[0], o.points[i + 1].coords[1], o.return_times[i],
                              o.displacements[i][0], o.displacements[i][1], o.ball_flags[i] ? 1.0 : 0.0});
    }
    std::string csv = series_to_csv(s);
    if (st.csv.empty())
        std::cout << csv;
    else
        write_atomic(st.csv, csv);
    return kExitPass;
}

int emit_reports(const std::vector<ExperimentReport>& reports, const RunConfig& cfg, const std::string& out_dir,
                 const std::vector<double>& seconds) {
    fs::create_directories(out_dir);
    bool all = true;
    json summary = json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        r.check_finite();
        write_atomic((fs::path(out_dir) / (r.name + ".json")).string(), report_to_json(r, cfg));
        for (const auto& [k, s] : r.series)
            write_atomic((fs::path(out_dir) / (r.name + "." + k + ".csv")).string(), series_to_csv(s));
        json meta = {{"report", r.name + ".json"},
                     {"finished_utc", utc_now()},
                     {"wall_seconds", seconds[i]},
                     {"seed", cfg.integer("seed")}};
        write_atomic((fs::path(out_dir) / (r.name + ".meta.json")).string(), meta.dump(2) + "\n");
        all = all && r.passed();
        summary.push_back({{"name", r.name}, {"passed", r.passed()}, {"verdicts", r.verdicts}});
    }
    print_json(summary);
    return all ? kExitPass : kExitFail;
}

int cmd_fiber_census(const CliState& st, RunConfig cfg) {
    cfg.set("a", std::to_string(st.a));
    if (st.k) cfg.set("k", fmt(*st.k));
    if (st.rho) cfg.set("rho", fmt(*st.rho));
    cfg.set("census.samples", std::to_string(st.census_samples));
    auto inst = make_instance(cfg);
    auto t0 = std::chrono::steady_clock::now();
    ExperimentReport r = census(cfg, *inst);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!st.csv.empty()) write_atomic(st.csv, series_to_csv(r.series.at("samples")));
    r.check_finite();
    std::cout << report_to_json(r, cfg);
    std::cerr << "census: " << secs << " s\n";
    return r.passed() ? kExitPass : kExitFail;
}

int cmd_experiment(const CliState& st, const RunConfig& cfg) {
    std::vector<std::string> names;
    if (st.name == "all") {
        for (const auto& n : experiment_names())
            if (cfg.flag(n + ".enabled")) names.push_back(n);
    } else {
        bool known = false;
        for (const auto& n : experiment_names()) known = known || n == st.name;
        if (!known) throw CLI::ValidationError("name", "unknown experiment '" + st.name + "'");
        names.push_back(st.name);
    }
    auto inst = make_instance(cfg);
    std::vector<ExperimentReport> reports;
    std::vector<double> seconds;
    for (const auto& n : names) {
        auto t0 = std::chrono::steady_clock::now();
        reports.push_back(run_experiment(n, cfg, *inst));
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return emit_reports(reports, cfg, resolve_out_dir(st.out, &cfg), seconds);
}

void error_message(const char* kind, const std::string& what) {
    json j = {{"error", kind}, {"message", what}};
    std::cerr << j.dump() << "\n";
}

}  // namespace

std::unique_ptr<Instance> make_instance(const RunConfig& cfg) {
    auto model = shared_model(static_cast<int>(cfg.integer("a")));
    double k = cfg.real_or_auto("k").value_or(default_k(*model));
    return build(model, k, cfg.real_or_auto("rho"), cfg);
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> n = {"minimality", "sensitivity", "li_yorke", "entropy",
                                               "ergodicity", "rotation",    "census"};
    return n;
}

ExperimentReport run_experiment(const std::string& name, const RunConfig& cfg, const Instance& inst) {
    ExperimentReport r;
    if (name == "minimality")
        r = minimality(cfg, inst);
    else if (name == "sensitivity")
        r = sensitivity(cfg, inst);
    else if (name == "li_yorke")
        r = li_yorke(cfg, inst);
    else if (name == "entropy")
        r = entropy(cfg, inst);
    else if (name == "ergodicity")
        r = ergodicity(cfg, inst);
    else if (name == "rotation")
        r = rotation(cfg, inst);
    else if (name == "census")
        r = census(cfg, inst);
    else
        throw PreconditionError("unknown experiment '" + name + "'");
    r.parameters["a"] = inst.model->a;
    r.parameters["k"] = inst.g->k();
    r.parameters["rho"] = inst.g->rho();
    r.parameters["seed"] = static_cast<double>(cfg.integer("seed"));
    return r;
}

std::string report_to_json(const ExperimentReport& r, const RunConfig& cfg) {
    json j = base_report_json(r);
    json c = json::object();
    for (const auto& k : RunConfig::keys())
        if (k != "out_dir") c[k] = cfg.raw(k);
    j["config"] = c;
    return j.dump(2) + "\n";
}

std::string series_to_csv(const Series& s) {
    std::string out;
    for (std::size_t i = 0; i < s.columns.size(); ++i) out += (i ? "," : "") + s.columns[i];
    out += "\n";
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + fmt(row[i]);
        out += "\n";
    }
    return out;
}

void write_atomic(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, p);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Derived-from-Anosov diffeomorphisms of T^3 and their holonomy maps"};
    app.require_subcommand(1);
    CliState st;
    std::string config_path;
    app.add_option("--config", config_path, "key = value configuration file");

    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--a", st.a, "family parameter (integer >= 3)");
        sub->add_option("--k", st.k, "surgery size");
        sub->add_option("--rho", st.rho, "surgery radius");
    };

    auto* family = app.add_subcommand("family", "print the Anosov model M_a, B_a and its spectrum");
    family->add_option("--a", st.a, "family parameter (integer >= 3)");
    family->add_flag("--json", st.json_out, "JSON output");

    auto* profiles = app.add_subcommand("profiles", "summarise the bump profiles and dump beta samples");
    add_model(profiles);
    profiles->add_option("--dump-csv", st.csv, "write (t, beta, beta', beta' t) samples");
    profiles->add_option("--samples", st.samples, "number of log-spaced samples");

    auto* certify = app.add_subcommand("certify", "closed-form C^r certificate");
    certify->add_option("--a", st.a, "family parameter");
    certify->add_option("--k", st.k, "surgery size");
    certify->add_option("--r", st.r, "smoothness exponent")->required();
    certify->add_option("--rho", st.rho, "surgery radius (pointwise mode)");
    certify->add_flag("--pointwise", st.pointwise, "also evaluate sup l*tau^r on a chart grid");
    certify->add_option("--grid", st.grid, "pointwise grid size per axis");

    auto* smax = app.add_subcommand("smoothness-max", "largest certified r for a, plus a table");
    smax->add_option("--a", st.a, "family parameter");
    smax->add_option("--from", st.table_from, "table start");
    smax->add_option("--to", st.table_to, "table end");
    smax->add_option("--points", st.table_points, "table points (log-spaced)");

    auto* orbit = app.add_subcommand("orbit", "orbit of the DA map with chart coordinates");
    add_model(orbit);
    orbit->add_option("--x0", st.x0, "x,y,z")->required();
    orbit->add_option("--n", st.n, "iterates");
    orbit->add_option("--dir", st.dir, "fwd or bwd");
    orbit->add_option("--csv", st.csv, "output path (stdout if omitted)");

    auto* semiconj = app.add_subcommand("semiconj", "evaluate the semiconjugacy at a point");
    add_model(semiconj);
    semiconj->add_option("--probe", st.probe, "x,y,z")->required();
    semiconj->add_flag("--fiber", st.fiber, "fiber diagnostic and arc probe");

    auto* fcensus = app.add_subcommand("fiber-census", "classify fibers at uniform samples");
    add_model(fcensus);
    fcensus->add_option("--samples", st.census_samples, "samples");
    fcensus->add_option("--csv", st.csv, "per-sample CSV");

    auto* holonomy = app.add_subcommand("holonomy", "orbit of the first-return map on T^2");
    add_model(holonomy);
    holonomy->add_option("--x0", st.x0, "x,y")->required();
    holonomy->add_option("--n", st.n, "returns");
    holonomy->add_option("--csv", st.csv, "output path (stdout if omitted)");
    holonomy->add_flag("--linear", st.linear, "run T_B instead");

    auto* experiment = app.add_subcommand("experiment", "run one experiment (or 'all') from a config");
    experiment->add_option("name", st.name, "experiment name or 'all'")->required();
    experiment->add_option("--config", config_path, "key = value configuration file");
    experiment->add_option("--out", st.out, "output directory (default: out_dir, then $DALAB_OUT_DIR)");

    auto* show = app.add_subcommand("config", "print the resolved configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
        if (*family) return cmd_family(st);
        if (*profiles) return cmd_profiles(st);
        if (*certify) return cmd_certify(st);
        if (*smax) return cmd_smoothness_max(st);
        if (*orbit) return cmd_orbit(st);
        if (*semiconj) return cmd_semiconj(st, cfg);
        if (*fcensus) return cmd_fiber_census(st, cfg);
        if (*holonomy) return cmd_holonomy(st, cfg);
        if (*experiment) return cmd_experiment(st, cfg);
        if (*show) {
            std::cout << cfg.to_text();
            return kExitPass;
        }
    } catch (const ConfigError& e) {
        error_message("config", e.what());
        return kExitUsage;
    } catch (const CLI::Error& e) {
        error_message("usage", e.what());
        return kExitUsage;
    } catch (const PreconditionError& e) {
        error_message("precondition", e.what());
        return kExitUsage;
    } catch (const NumericalError& e) {
        error_message("numerical", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        error_message("internal", e.what());
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace dalab
