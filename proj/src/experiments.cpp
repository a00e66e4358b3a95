#include "dalab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>

#include "dalab/errors.hpp"

namespace dalab {

namespace {

// Runs fn(i) for i in [0, n) across threads; the first exception is rethrown.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
    std::exception_ptr error;
    std::mutex mu;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

std::mt19937_64 task_rng(std::uint64_t seed, std::uint64_t index) { return std::mt19937_64(task_seed(seed, index)); }

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

bool ExperimentReport::passed() const {
    if (verdicts.empty()) return false;
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

void ExperimentReport::check_finite() const {
    for (const auto& [k, v] : metrics)
        if (!std::isfinite(v)) throw NumericalError("metric '" + k + "' of " + name + " is not finite");
    for (const auto& [k, v] : parameters)
        if (!std::isfinite(v)) throw NumericalError("parameter '" + k + "' of " + name + " is not finite");
}

std::uint64_t task_seed(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::vector<TorusPoint2> random_points2(std::uint64_t seed, int n) {
    std::mt19937_64 rng = task_rng(seed, 0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<TorusPoint2> pts(n);
    for (auto& p : pts) p = project(Vec2(U(rng), U(rng)));
    return pts;
}

std::vector<TorusPoint3> random_points3(std::uint64_t seed, int n) {
    std::mt19937_64 rng = task_rng(seed, 0);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<TorusPoint3> pts(n);
    for (auto& p : pts) p = project(Vec3(U(rng), U(rng), U(rng)));
    return pts;
}

ExperimentReport minimality_scan(const PlanarMap& f, int N, double eps, const std::vector<TorusPoint2>& starts) {
    if (N < 1 || !(eps > 0.0 && eps <= 1.0) || starts.empty())
        throw PreconditionError("minimality scan needs N >= 1, 0 < eps <= 1 and at least one start");
    const int m = static_cast<int>(std::ceil(1.0 / eps - 1e-9));
    const int cells = m * m;
    const int checkpoints = 10;
    std::vector<std::vector<double>> coverage(starts.size(), std::vector<double>(checkpoints, 0.0));
    std::vector<double> final_fraction(starts.size(), 0.0);
    parallel_for(static_cast<int>(starts.size()), [&](int s) {
        std::vector<char> hit(cells, 0);
        int count = 0, next_cp = 0;
        TorusPoint2 x = starts[s];
        for (int n = 0; n < N; ++n) {
            int i = std::min(m - 1, static_cast<int>(x.coords[0] * m));
            int j = std::min(m - 1, static_cast<int>(x.coords[1] * m));
            if (!hit[i * m + j]) {
                hit[i * m + j] = 1;
                ++count;
            }
            while (next_cp < checkpoints && n + 1 >= (static_cast<long>(N) * (next_cp + 1)) / checkpoints)
                coverage[s][next_cp++] = double(count) / cells;
            if (n + 1 < N) x = f.step(x).point;
        }
        final_fraction[s] = double(count) / cells;
    });
    ExperimentReport r;
    r.name = "minimality";
    r.parameters = {{"N", double(N)}, {"eps", eps}, {"starts", double(starts.size())}, {"cells", double(cells)}};
    r.metrics["min_coverage"] = *std::min_element(final_fraction.begin(), final_fraction.end());
    for (std::size_t s = 0; s < starts.size(); ++s) r.metrics["coverage_start_" + std::to_string(s)] = final_fraction[s];
    r.verdicts["all_cells_visited"] = r.metrics["min_coverage"] == 1.0;
    r.provenance["eps"] = "config (grid cell side)";
    Series ser;
    ser.columns = {"iterates"};
    for (std::size_t s = 0; s < starts.size(); ++s) ser.columns.push_back("coverage_" + std::to_string(s));
    for (int c = 0; c < checkpoints; ++c) {
        std::vector<double> row{double((static_cast<long>(N) * (c + 1)) / checkpoints)};
        for (std::size_t s = 0; s < starts.size(); ++s) row.push_back(coverage[s][c]);
        ser.rows.push_back(row);
    }
    r.series["coverage"] = ser;
    r.notes.push_back("map: " + f.label());
    return r;
}

namespace {

struct PairRun {
    double max_sep = 0.0;
    int first_exceed = -1;
};

PairRun run_pair(const PlanarMap& f, TorusPoint2 x, TorusPoint2 y, int N, double threshold) {
    PairRun out;
    out.max_sep = torus_distance(x, y);
    for (int n = 1; n <= N; ++n) {
        x = f.step(x).point;
        y = f.step(y).point;
        double d = torus_distance(x, y);
        if (d > out.max_sep) out.max_sep = d;
        if (out.first_exceed < 0 && d > threshold) out.first_exceed = n;
    }
    return out;
}

}  // namespace

ExperimentReport sensitivity_probe(const PlanarMap& f, const SensitivityOptions& opt) {
    if (!(opt.delta > 0.0) || opt.N < 1 || opt.pairs < 1 || opt.directions_per_base < 1)
        throw PreconditionError("invalid sensitivity options");
    const int D = opt.directions_per_base;
    const int bases = (opt.pairs + D - 1) / D;
    std::vector<TorusPoint2> xs(opt.pairs);
    std::vector<Vec2> dirs(opt.pairs);
    for (int i = 0; i < opt.pairs; ++i) {
        std::mt19937_64 base_rng = task_rng(opt.seed, i / D);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double rad = opt.neighborhood * std::sqrt(U(base_rng)), ang = 2.0 * M_PI * U(base_rng);
        xs[i] = project(Vec2(opt.center.coords + rad * Vec2(std::cos(ang), std::sin(ang))));
        std::mt19937_64 dir_rng = task_rng(opt.seed ^ 0x5eed, i);
        double th = 2.0 * M_PI * U(dir_rng);
        dirs[i] = Vec2(std::cos(th), std::sin(th));
    }
    const double threshold = opt.growth * opt.delta;
    // Orbit 0 of each group is the base; orbits 1..D its perturbations.
    std::vector<std::vector<TorusPoint2>> base_orbit(bases);
    std::vector<PairRun> runs(opt.pairs);
    parallel_for(bases, [&](int t) {
        auto& o = base_orbit[t];
        o.resize(opt.N + 1);
        o[0] = xs[t * D];
        for (int n = 1; n <= opt.N; ++n) o[n] = f.step(o[n - 1]).point;
    });
    parallel_for(opt.pairs, [&](int i) {
        const auto& o = base_orbit[i / D];
        TorusPoint2 y = project(Vec2(xs[i].coords + opt.delta * dirs[i]));
        PairRun& out = runs[i];
        out.max_sep = torus_distance(o[0], y);
        for (int n = 1; n <= opt.N; ++n) {
            y = f.step(y).point;
            double d = torus_distance(o[n], y);
            if (d > out.max_sep) out.max_sep = d;
            if (out.first_exceed < 0 && d > threshold) out.first_exceed = n;
        }
    });
    ExperimentReport r;
    r.name = "sensitivity";
    r.parameters = {{"delta", opt.delta},         {"N", double(opt.N)},
                    {"pairs", double(opt.pairs)}, {"growth", opt.growth},
                    {"seed", double(opt.seed)},   {"neighborhood", opt.neighborhood},
                    {"center_x", opt.center.coords[0]}, {"center_y", opt.center.coords[1]},
                    {"directions_per_base", double(D)}, {"min_fraction", opt.min_fraction}};
    std::vector<double> growth(opt.pairs);
    int exceed = 0;
    double mean_first = 0.0;
    for (int i = 0; i < opt.pairs; ++i) {
        growth[i] = runs[i].max_sep / opt.delta;
        if (runs[i].first_exceed >= 0) {
            ++exceed;
            mean_first += runs[i].first_exceed;
        }
    }
    std::vector<double> sorted = growth;
    std::sort(sorted.begin(), sorted.end());
    r.metrics["fraction_exceeding"] = double(exceed) / opt.pairs;
    r.metrics["max_growth"] = sorted.back();
    r.metrics["median_growth"] = sorted[sorted.size() / 2];
    r.metrics["min_growth"] = sorted.front();
    r.verdicts["sensitive"] = r.metrics["fraction_exceeding"] >= opt.min_fraction;
    r.provenance["growth"] = "config (exceedance threshold = growth * delta)";
    r.provenance["min_fraction"] = "config (" + std::to_string(opt.min_fraction) + ")";
    if (exceed > 0 && opt.lyapunov_check) {
        mean_first /= exceed;
        // Same pairs at δ/10 and the same absolute threshold.
        double shifted = 0.0;
        int agree = 0;
        for (int i = 0; i < opt.pairs; ++i) {
            if (runs[i].first_exceed < 0) continue;
            PairRun s = run_pair(f, xs[i], project(Vec2(xs[i].coords + 0.1 * opt.delta * dirs[i])), opt.N, threshold);
            if (s.first_exceed >= 0) {
                shifted += s.first_exceed - runs[i].first_exceed;
                ++agree;
            }
        }
        double chi = std::log(opt.growth) / mean_first;
        r.metrics["mean_first_exceedance"] = mean_first;
        r.metrics["lyapunov_exponent_estimate"] = chi;
        r.metrics["predicted_shift"] = std::log(10.0) / chi;
        r.metrics["measured_shift"] = agree > 0 ? shifted / agree : 0.0;
    } else if (exceed == 0) {
        r.notes.push_back("no pair exceeded growth*delta; Lyapunov-time check skipped");
    }
    Series ser;
    ser.columns = {"pair", "x", "y", "max_separation", "growth", "first_exceedance"};
    for (int i = 0; i < opt.pairs; ++i)
        ser.rows.push_back({double(i), xs[i].coords[0], xs[i].coords[1], runs[i].max_sep, growth[i],
                            double(runs[i].first_exceed)});
    r.series["pairs"] = ser;
    r.notes.push_back("map: " + f.label());
    return r;
}

ExperimentReport li_yorke_scan(const PlanarMap& f, const std::vector<PointPair>& pairs, const LiYorkeOptions& opt,
                               const std::vector<PointPair>& control_pairs) {
    ExperimentReport r;
    r.name = "li_yorke";
    r.parameters = {{"N", double(opt.N)}, {"eps_low", opt.eps_low}, {"eps_high", opt.eps_high},
                    {"pairs", double(pairs.size())}, {"control_pairs", double(control_pairs.size())}};
    r.provenance["eps_low"] = "config";
    r.provenance["eps_high"] = "calibrated: fraction of the measured sheet fiber arc length";
    // Orbits are computed once per distinct start point.
    auto scan = [&](const std::vector<PointPair>& ps, std::vector<double>& mins, std::vector<double>& maxs) {
        std::vector<TorusPoint2> starts;
        std::vector<std::pair<int, int>> ids;
        auto id_of = [&](const TorusPoint2& x) {
            for (std::size_t k = 0; k < starts.size(); ++k)
                if (starts[k].coords == x.coords) return static_cast<int>(k);
            starts.push_back(x);
            return static_cast<int>(starts.size()) - 1;
        };
        for (const auto& p : ps) {
            int i = id_of(p.first);
            ids.emplace_back(i, id_of(p.second));
        }
        std::vector<std::vector<TorusPoint2>> orbit(starts.size());
        parallel_for(static_cast<int>(starts.size()), [&](int k) {
            orbit[k].resize(opt.N + 1);
            orbit[k][0] = starts[k];
            for (int n = 1; n <= opt.N; ++n) orbit[k][n] = f.step(orbit[k][n - 1]).point;
        });
        mins.assign(ps.size(), 0.0);
        maxs.assign(ps.size(), 0.0);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto& ox = orbit[ids[i].first];
            const auto& oy = orbit[ids[i].second];
            double lo = INFINITY, hi = 0.0;
            for (int n = 1; n <= opt.N; ++n) {
                double d = torus_distance(ox[n], oy[n]);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            mins[i] = opt.N > 0 ? lo : 0.0;
            maxs[i] = hi;
        }
    };
    std::vector<double> mins, maxs;
    scan(pairs, mins, maxs);
    int flagged = 0;
    double best_max = 0.0, best_min = INFINITY, best_initial = 0.0;
    Series ser;
    ser.columns = {"pair", "x1", "y1", "x2", "y2", "initial", "running_min", "running_max", "flagged"};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        bool flag = mins[i] < opt.eps_low && maxs[i] > opt.eps_high;
        if (flag) {
            ++flagged;
            if (maxs[i] > best_max) {
                best_max = maxs[i];
                best_min = mins[i];
                best_initial = torus_distance(pairs[i].first, pairs[i].second);
            }
        }
        ser.rows.push_back({double(i), pairs[i].first.coords[0], pairs[i].first.coords[1], pairs[i].second.coords[0],
                            pairs[i].second.coords[1], torus_distance(pairs[i].first, pairs[i].second), mins[i],
                            maxs[i], flag ? 1.0 : 0.0});
    }
    r.series["pairs"] = ser;
    if (pairs.empty()) r.notes.push_back("no candidates: no nontrivial fiber arc was detected");
    r.metrics["flagged_pairs"] = flagged;
    if (flagged > 0) {
        r.metrics["best_running_max"] = best_max;
        r.metrics["best_running_min"] = best_min;
        r.metrics["best_initial_distance"] = best_initial;
    }
    if (!maxs.empty()) r.metrics["largest_running_max"] = *std::max_element(maxs.begin(), maxs.end());
    r.verdicts["scrambled_pair_found"] = flagged > 0;
    if (!control_pairs.empty()) {
        std::vector<double> cmin, cmax;
        scan(control_pairs, cmin, cmax);
        r.metrics["control_min_distance"] = *std::min_element(cmin.begin(), cmin.end());
    }
    r.notes.push_back("map: " + f.label());
    return r;
}

SheetArc fiber_arc_on_sheet(const Holonomy& hol, const ShadowField& field, const TorusPoint3& xi, int probe_N,
                            int samples) {
    SheetArc out;
    out.arc = fiber_arc_probe(field, xi, probe_N);
    if (out.arc.length() <= 0.0 || samples < 2) return out;
    const AnosovModel& m = hol.map().model();
    const int ax = m.transverse_axis;
    const Vec3 e = hol.map().frame().from_chart(out.arc.direction_chart);
    for (int i = 0; i < samples; ++i) {
        double s = -out.arc.s_minus + out.arc.length() * i / (samples - 1);
        Vec3 X = xi.coords + s * e;
        double sheet = std::round(X[ax]);
        TorusPoint2 p;
        if (X[ax] == sheet)
            p = project(sheet_coords(m, X));
        else
            p = hol.first_return(X, X[ax] < sheet ? 1 : -1).point;
        out.points.push_back(p);
    }
    for (std::size_t i = 1; i < out.points.size(); ++i) out.length += torus_distance(out.points[i - 1], out.points[i]);
    return out;
}

std::vector<PointPair> arc_pairs(const SheetArc& arc) {
    std::vector<PointPair> out;
    const auto& p = arc.points;
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j) out.emplace_back(p[i], p[j]);
    return out;
}

ExperimentReport entropy_estimate(const PlanarMap& f, const EntropyOptions& opt) {
    if (opt.n_max < 2 || opt.samples < 2 || opt.eps_list.empty()) throw PreconditionError("invalid entropy options");
    const int M = opt.samples, T = 2 * opt.n_max;
    std::vector<TorusPoint2> starts = random_points2(opt.seed, M);
    std::vector<std::vector<TorusPoint2>> orbit(M);
    parallel_for(M, [&](int i) {
        orbit[i].resize(T);
        orbit[i][0] = starts[i];
        for (int n = 1; n < T; ++n) orbit[i][n] = f.step(orbit[i][n - 1]).point;
    });
    const std::size_t P = static_cast<std::size_t>(M) * (M - 1) / 2;
    std::vector<float> D(P, 0.0f);
    auto idx = [M](int i, int j) { return static_cast<std::size_t>(i) * (2 * M - i - 1) / 2 + (j - i - 1); };
    const int E = static_cast<int>(opt.eps_list.size());
    std::vector<std::vector<double>> counts(E, std::vector<double>(T + 1, 0.0));
    for (int n = 1; n <= T; ++n) {
        // D holds max_{m<n} d(f^m x_i, f^m x_j).
#pragma omp parallel for schedule(static)
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j) {
                float d = static_cast<float>(torus_distance(orbit[i][n - 1], orbit[j][n - 1]));
                float& slot = D[idx(i, j)];
                if (d > slot) slot = d;
            }
        for (int e = 0; e < E; ++e) {
            const float eps = static_cast<float>(opt.eps_list[e]);
            std::vector<int> chosen;
            for (int i = 0; i < M; ++i) {
                bool sep = true;
                for (int j : chosen)
                    if (!(D[idx(j, i)] > eps)) {
                        sep = false;
                        break;
                    }
                if (sep) chosen.push_back(i);
            }
            counts[e][n] = double(chosen.size());
        }
    }
    ExperimentReport r;
    r.name = "entropy";
    r.parameters = {{"n_max", double(opt.n_max)}, {"samples", double(M)}, {"seed", double(opt.seed)},
                    {"slope_max", opt.slope_max}, {"noise", opt.noise}};
    bool all_ok = true, stable = true;
    for (int e = 0; e < E; ++e) {
        auto slope_over = [&](int a, int b) {
            std::vector<double> xs, ys;
            for (int n = a; n <= b; ++n) {
                xs.push_back(n);
                ys.push_back(std::log(counts[e][n]));
            }
            return least_squares_slope(xs, ys);
        };
        double s1 = slope_over(std::max(1, opt.n_max / 2), opt.n_max);
        double s2 = slope_over(opt.n_max, T);
        std::string tag = "eps_" + std::to_string(opt.eps_list[e]);
        r.parameters[tag] = opt.eps_list[e];
        r.metrics["slope_" + tag] = s1;
        r.metrics["slope_doubled_" + tag] = s2;
        r.metrics["count_at_n_max_" + tag] = counts[e][opt.n_max];
        all_ok = all_ok && s1 < opt.slope_max;
        stable = stable && s2 <= s1 + opt.noise;
        if (counts[e][opt.n_max] >= 0.9 * M)
            r.notes.push_back("separated-set count near the sample size at " + tag + "; estimate saturated");
    }
    r.verdicts["zero_entropy_slope"] = all_ok;
    r.verdicts["slope_stable_under_doubling"] = stable;
    r.provenance["slope_max"] = "config";
    Series ser;
    ser.columns = {"n"};
    for (double e : opt.eps_list) ser.columns.push_back("N_eps_" + std::to_string(e));
    for (int n = 1; n <= T; ++n) {
        std::vector<double> row{double(n)};
        for (int e = 0; e < E; ++e) row.push_back(counts[e][n]);
        ser.rows.push_back(row);
    }
    r.series["separated_counts"] = ser;
    r.notes.push_back("map: " + f.label());
    return r;
}

std::vector<std::string> observable_names() {
    return {"one",         "x1",          "x2",           "cos(x1)",      "sin(x1)",      "cos(x2)",
            "sin(x2)",     "cos(x1+x2)",  "sin(x1+x2)",   "cos(x1-x2)",   "sin(x1-x2)"};
}

void evaluate_observables(const TorusPoint2& x, double* out) {
    const double a = 2.0 * M_PI * x.coords[0], b = 2.0 * M_PI * x.coords[1];
    out[0] = 1.0;
    out[1] = x.coords[0];
    out[2] = x.coords[1];
    out[3] = std::cos(a);
    out[4] = std::sin(a);
    out[5] = std::cos(b);
    out[6] = std::sin(b);
    out[7] = std::cos(a + b);
    out[8] = std::sin(a + b);
    out[9] = std::cos(a - b);
    out[10] = std::sin(a - b);
}

ExperimentReport unique_ergodicity_probe(const PlanarMap& f, const std::vector<TorusPoint2>& starts,
                                         const ErgodicOptions& opt) {
    if (starts.size() < 2 || opt.N < 10) throw PreconditionError("ergodicity probe needs >= 2 starts and N >= 10");
    const auto names = observable_names();
    const int K = static_cast<int>(names.size()), S = static_cast<int>(starts.size());
    const int early = opt.N / 10;
    std::vector<std::vector<double>> avg_early(S, std::vector<double>(K)), avg_late(S, std::vector<double>(K));
    parallel_for(S, [&](int s) {
        std::vector<double> sum(K, 0.0), v(K);
        TorusPoint2 x = starts[s];
        for (int n = 0; n < opt.N; ++n) {
            evaluate_observables(x, v.data());
            for (int k = 0; k < K; ++k) sum[k] += v[k];
            if (n + 1 == early)
                for (int k = 0; k < K; ++k) avg_early[s][k] = sum[k] / early;
            x = f.step(x).point;
        }
        for (int k = 0; k < K; ++k) avg_late[s][k] = sum[k] / opt.N;
    });
    auto spread = [&](const std::vector<std::vector<double>>& avg, int k) {
        double lo = INFINITY, hi = -INFINITY;
        for (int s = 0; s < S; ++s) {
            lo = std::min(lo, avg[s][k]);
            hi = std::max(hi, avg[s][k]);
        }
        return hi - lo;
    };
    ExperimentReport r;
    r.name = "unique_ergodicity";
    r.parameters = {{"N", double(opt.N)}, {"starts", double(S)}, {"spread_max", opt.spread_max}};
    double sp_early = 0.0, sp_late = 0.0;
    Series ser;
    ser.columns = {"observable", "spread_N_over_10", "spread_N", "mean_N"};
    for (int k = 0; k < K; ++k) {
        double e = spread(avg_early, k), l = spread(avg_late, k);
        double mean = 0.0;
        for (int s = 0; s < S; ++s) mean += avg_late[s][k] / S;
        sp_early = std::max(sp_early, e);
        sp_late = std::max(sp_late, l);
        r.metrics["spread_" + names[k]] = l;
        r.metrics["mean_" + names[k]] = mean;
        ser.rows.push_back({double(k), e, l, mean});
    }
    r.metrics["spread_N"] = sp_late;
    r.metrics["spread_N_over_10"] = sp_early;
    r.verdicts["spread_below_threshold"] = sp_late < opt.spread_max;
    r.verdicts["spread_decreasing"] = sp_late <= sp_early;
    r.provenance["spread_max"] = "config";
    r.series["observables"] = ser;
    r.notes.push_back("map: " + f.label());
    r.notes.push_back("observable index order: one, x1, x2, then cos/sin of 2*pi*(x1, x2, x1+x2, x1-x2)");
    return r;
}

Vec2 rotation_vector(const PlanarMap& f, const TorusPoint2& x0, int N) {
    if (N < 1) throw PreconditionError("rotation vector needs N >= 1");
    Vec2 sum = Vec2::Zero();
    TorusPoint2 x = x0;
    for (int n = 0; n < N; ++n) {
        PlanarStep s = f.step(x);
        sum += s.displacement;
        x = s.point;
    }
    return sum / N;
}

ExperimentReport rotation_report(const PlanarMap& f, const AnosovModel& model, const TorusPoint2& x0, int N,
                                 double tol) {
    Vec2 rot = rotation_vector(f, x0, N);
    Vec2 ref = translation_lift(model);
    Vec2 diff = torus_difference(project(rot), project(ref));
    ExperimentReport r;
    r.name = "rotation_vector";
    r.parameters = {{"N", double(N)}, {"tol", tol}, {"x0_1", x0.coords[0]}, {"x0_2", x0.coords[1]}};
    r.metrics["rotation_1"] = rot[0];
    r.metrics["rotation_2"] = rot[1];
    r.metrics["translation_1"] = ref[0];
    r.metrics["translation_2"] = ref[1];
    r.metrics["difference"] = diff.norm();
    r.metrics["lift_difference"] = (rot - ref).norm();
    r.verdicts["matches_translation"] = diff.norm() < tol;
    r.provenance["tol"] = "config";
    r.notes.push_back("map: " + f.label());
    return r;
}

ExperimentReport fiber_census(const ShadowField& field, const CensusOptions& opt) {
    if (opt.samples < 4 || opt.N < 1) throw PreconditionError("census needs >= 4 samples and N >= 1");
    const DAMap& g = field.map();
    const double gamma = opt.gamma > 0.0 ? opt.gamma : default_gamma_threshold(g);
    std::vector<TorusPoint3> pts = random_points3(opt.seed, opt.samples);
    std::vector<FiberDiagnostic> diag(pts.size());
    parallel_for(opt.samples, [&](int i) {
        diag[i] = fiber_diagnostic(field, pts[i], opt.N, gamma, opt.burn, opt.visit_radius);
    });
    FiberDiagnostic at_p = fiber_diagnostic(field, TorusPoint3{}, opt.N, gamma, opt.burn, opt.visit_radius);
    ExperimentReport r;
    r.name = "fiber_census";
    r.parameters = {{"samples", double(opt.samples)}, {"N", double(opt.N)}, {"gamma", gamma},
                    {"visit_radius_factor", opt.visit_radius}, {"seed", double(opt.seed)},
                    {"max_fraction", opt.max_fraction}};
    std::vector<int> sizes{opt.samples / 4, opt.samples / 2, opt.samples};
    std::vector<double> frac;
    for (int n : sizes) {
        int c = 0;
        for (int i = 0; i < n; ++i) c += diag[i].verdict == FiberVerdict::nontrivial;
        frac.push_back(double(c) / n);
        r.metrics["nontrivial_fraction_" + std::to_string(n)] = frac.back();
    }
    int undecided = 0;
    double mean_exp = 0.0, mean_visit = 0.0;
    for (const auto& d : diag) {
        undecided += d.verdict == FiberVerdict::undecided;
        mean_exp += d.central_backward_exponent / opt.samples;
        mean_visit += d.ball_visit_frequency / opt.samples;
    }
    r.metrics["nontrivial_fraction"] = frac.back();
    r.metrics["undecided_fraction"] = double(undecided) / opt.samples;
    r.metrics["mean_exponent"] = mean_exp;
    r.metrics["mean_ball_visit_frequency"] = mean_visit;
    r.metrics["exponent_at_p"] = at_p.central_backward_exponent;
    r.metrics["expected_exponent_at_p"] = std::log(g.model().lambda.c + g.b());
    r.verdicts["p_nontrivial"] = at_p.verdict == FiberVerdict::nontrivial;
    r.verdicts["fraction_below_threshold"] = frac.back() < opt.max_fraction;
    r.verdicts["fraction_non_increasing"] = frac[0] >= frac[1] && frac[1] >= frac[2];
    r.provenance["gamma"] = opt.gamma > 0.0 ? "config" : "default 0.1*log(lambda_c + b)";
    r.provenance["max_fraction"] = "config";
    Series ser;
    ser.columns = {"x", "y", "z", "exponent", "verdict", "ball_visit_frequency"};
    for (int i = 0; i < opt.samples; ++i)
        ser.rows.push_back({pts[i].coords[0], pts[i].coords[1], pts[i].coords[2], diag[i].central_backward_exponent,
                            diag[i].verdict == FiberVerdict::nontrivial ? 1.0
                            : diag[i].verdict == FiberVerdict::trivial  ? -1.0
                                                                        : 0.0,
                            diag[i].ball_visit_frequency});
    r.series["samples"] = ser;
    return r;
}

}  // namespace dalab
