#include "drm/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <ostream>

#include "drm/benchmark.hpp"
#include "drm/csv.hpp"
#include "drm/engine.hpp"
#include "drm/oracle.hpp"

namespace drm {
namespace cli {

namespace fs = std::filesystem;

namespace {

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config", std::string("parse error: ") + e.what());
    }
    return validate_config(j);
}

void ensure_writable(const fs::path& file, bool force) {
    if (fs::exists(file) && !force)
        throw std::runtime_error("refusing to overwrite " + file.string() + " (pass --force)");
}

void prepare_out_dir(const std::string& out_dir) {
    fs::create_directories(out_dir);
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << text;
}

std::vector<Strategy> strategies_from_config(const ExperimentConfig& cfg, std::ostream& err) {
    std::vector<Strategy> out;
    for (const auto& group : cfg.loads) {
        for (const auto& w : strategy_warnings(group.strategy, cfg.type_space)) err << "warning: " << w << "\n";
        Strategy s = make_strategy(group.strategy, cfg.type_space);
        for (int k = 0; k < group.count; ++k) out.push_back(s);
    }
    return out;
}

std::string sweep_csv(const SweepResult& sw) {
    std::string text = "p,posted_avg_cost,optimal_avg_cost\n";
    for (const auto& pt : sw.points) {
        append_double(text, pt.rebate);
        text += ',';
        append_double(text, pt.average_cost);
        text += ',';
        append_double(text, sw.optimal_average);
        text += '\n';
    }
    return text;
}

struct CheckReporter {
    explicit CheckReporter(std::ostream& o) : out(o) {}
    std::ostream& out;
    nlohmann::json checks = nlohmann::json::array();
    bool failed = false;
    std::string first_failure;

    // `measured` should be at most `bound` for the check to pass.
    void check(const std::string& name, double measured, double bound) {
        const bool ok = measured <= bound;
        out << (ok ? "ok   " : "FAIL ") << name << "  (measured " << measured << ", bound " << bound << ")\n";
        checks.push_back({{"name", name}, {"measured", measured}, {"bound", bound}, {"pass", ok}});
        if (!ok && !failed) {
            failed = true;
            first_failure = name;
        }
    }
    void check_flag(const std::string& name, bool ok) { check(name, ok ? 0.0 : 1.0, 0.0); }
};

ExperimentConfig deterministic_config() { return validate_config(builtin_deterministic_config()); }

int verify_dispatch(CheckReporter& rep) {
    // Frozen deterministic instance.
    {
        ExperimentConfig cfg = deterministic_config();
        std::vector<int> types = {0, 1};
        RealTimeSolution sol = solve_real_time(10.0, 0.0, types, cfg.type_space, cfg.costs, BoundsMode::Unconstrained);
        rep.check("deterministic unconstrained curtailments", std::abs(sol.curtailments[0] - 10.0) + std::abs(sol.curtailments[1] - 5.0), 1e-9);
        rep.check("deterministic unconstrained cost", std::abs(sol.social_cost - 80.0), 1e-9);
        RealTimeSolution box = solve_real_time(10.0, 0.0, types, cfg.type_space, cfg.costs, BoundsMode::Box);
        rep.check("deterministic box cost", std::abs(box.social_cost - 513.5), 1e-9);
    }
    // Random small instances against the brute-force grid. The grid value
    // sits above the true optimum by at most the quadratic resolution
    // effect, and the solver must never sit above the grid value.
    Rng rng(20260809);
    double worst_excess = 0.0;    // solver above grid (should be ~0)
    double worst_gap_ratio = 0.0; // (grid - solver) / resolution bound
    for (int trial = 0; trial < 200; ++trial) {
        const int n = rng.uniform_int(1, 3);
        const double step = n == 3 ? 0.1 : 0.01;
        const int T = rng.uniform_int(1, 3);
        TypeSpace ts;
        ts.d_max = 3;
        double max_kappa = 0.0;
        for (int t = 0; t < T; ++t) {
            LoadType lt;
            lt.id = "t" + std::to_string(t);
            lt.baseline = rng.uniform_int(0, 3);
            lt.kappa = rng.uniform(0.5, 4.0);
            max_kappa = std::max(max_kappa, lt.kappa);
            ts.types.push_back(lt);
        }
        CostModel costs;
        costs.reserve.kind = ReserveCost::Kind::Quadratic;
        costs.reserve.a = rng.uniform(0.5, 6.0);
        std::vector<int> types;
        for (int i = 0; i < n; ++i) types.push_back(rng.uniform_int(0, T - 1));
        const double z = rng.uniform(-4.0, n == 3 ? 6.0 : 10.0);
        const double g = rng.uniform(0.0, 2.0);
        const BoundsMode bounds = rng.uniform01() < 0.5 ? BoundsMode::Unconstrained : BoundsMode::Box;
        RealTimeSolution fast = solve_real_time(z, g, types, ts, costs, bounds);
        RealTimeSolution ref = oracle::brute_force_real_time(z, g, types, ts, costs, bounds, step);
        const double curvature = 2.0 * costs.reserve.a * n * n + max_kappa;
        const double bound = std::max(1e-6, 10.0 * step * step * curvature);
        worst_excess = std::max(worst_excess, fast.social_cost - ref.social_cost);
        worst_gap_ratio = std::max(worst_gap_ratio, (ref.social_cost - fast.social_cost) / bound);
    }
    rep.check("200 random instances: solver never above grid", worst_excess, 1e-9);
    rep.check("200 random instances: grid gap within resolution bound", worst_gap_ratio, 1.0);
    return rep.failed ? 1 : 0;
}

int verify_mechanism(CheckReporter& rep) {
    ExperimentConfig cfg = deterministic_config();
    cfg.days = 300;
    std::vector<Strategy> strategies(2, make_strategy(StrategySpec{}, cfg.type_space));

    double worst_identity = 0.0, worst_recompute = 0.0, p1_drift = 0.0;
    bool compliant = true;
    std::vector<std::vector<int>> log;
    std::vector<double> p1_first;
    SimulationResult res;
    RunOptions opt;
    opt.keep_series = true;
    opt.on_day = [&](const DayRecord& rec) {
        if (!audit_compliance(rec, cfg.type_space)) compliant = false;
        log.push_back(rec.reported_types);
        for (size_t i = 0; i < rec.payments.size(); ++i) {
            const auto& pay = rec.payments[i];
            if (p1_first.size() <= i) p1_first.push_back(pay.p1);
            p1_drift = std::max(p1_drift, std::abs(pay.p1 - p1_first[i]));
        }
    };
    res = run(cfg, strategies, opt);

    // Payment identity on every 97th day, recomputed from first principles.
    {
        std::vector<Strategy> strat2(2, make_strategy(StrategySpec{}, cfg.type_space));
        RunOptions opt2;
        opt2.on_day = [&](const DayRecord& rec) {
            if (rec.day % 97 != 0 && rec.day != 1) return;
            for (size_t i = 0; i < rec.payments.size(); ++i) {
                const auto& pay = rec.payments[i];
                const double p1 = first_stage_payment(res.w_minus[i], res.day_ahead.w_star,
                                                      res.day_ahead.expected_load_cost[i]);
                const PaymentRecord re = settle(p1, pay.realized_reported_cost,
                                                res.day_ahead.expected_load_cost[i], pay.penalized, rec.day,
                                                cfg.penalty);
                worst_recompute = std::max(worst_recompute, std::abs(re.total - pay.total));
                const double algebraic = res.w_minus[i] - res.day_ahead.w_star + pay.realized_reported_cost -
                                         (pay.penalized ? cfg.penalty.penalty(rec.day) : 0.0);
                worst_identity =
                    std::max(worst_identity, std::abs(pay.total - algebraic) / std::max(1.0, std::abs(algebraic)));
            }
        };
        (void)run(cfg, strat2, opt2);
    }
    rep.check("payment recomputation drift", worst_recompute, 0.0);
    rep.check("expectation-cancellation identity (relative)", worst_identity, 1e-9);
    rep.check("p1 constant across days", p1_drift, 0.0);
    rep.check_flag("compliance audit", compliant);
    rep.check("p1 load 0 vs 665/6", std::abs(res.p1[0] - 665.0 / 6.0), 1e-6);
    rep.check("p1 load 1 vs 240/11", std::abs(res.p1[1] - 240.0 / 11.0), 1e-6);

    // Tracker audit on a stochastic instance.
    {
        ExperimentConfig sg = validate_config(builtin_small_game_config());
        sg.days = 2000;
        std::vector<Strategy> strat = strategies_from_config(sg, std::cerr);
        RunOptions o;
        o.keep_series = true;
        SimulationResult r = run(sg, strat, o);
        DeviationTracker fresh(
            {sg.loads[0].distribution, sg.loads[1].distribution}, sg.type_space.size());
        double worst_f = 0.0, worst_h = 0.0;
        for (long l = 1; l <= sg.days; ++l) {
            fresh.update(r.report_log[static_cast<size_t>(l - 1)]);
            if (l % 97 != 0) continue;
            for (int i = 0; i < r.n; ++i) {
                oracle::TrackerRecount rc =
                    oracle::recount_tracker(r.report_log, l, i, sg.loads[static_cast<size_t>(i)].distribution);
                worst_f = std::max(worst_f, std::abs(rc.sup_f - fresh.sup_f(i)));
                worst_h = std::max(worst_h, std::abs(rc.sup_h - fresh.sup_h(i)));
            }
        }
        rep.check("tracker f recount drift", worst_f, 1e-12);
        rep.check("tracker h recount drift", worst_h, 1e-12);
    }
    return rep.failed ? 1 : 0;
}

int verify_incentives(CheckReporter& rep, const fs::path& out_dir, bool force) {
    ExperimentConfig game = validate_config(builtin_small_game_config());

    std::vector<StrategySpec> candidates;
    candidates.push_back(StrategySpec{});  // truthful
    {
        StrategySpec s;
        s.kind = StrategySpec::Kind::DistMisreport;
        s.reported.probs = {0.9, 0.05, 0.05};
        candidates.push_back(s);
    }
    {
        StrategySpec s;
        s.kind = StrategySpec::Kind::TypeMisreport;
        s.type_map = {2, 1, 0};  // swap A <-> C
        candidates.push_back(s);
    }
    {
        StrategySpec s;
        s.kind = StrategySpec::Kind::BaselineInflate;
        s.inflate_delta = 1;
        candidates.push_back(s);
    }
    {
        StrategySpec s;
        s.kind = StrategySpec::Kind::CostExaggerate;
        s.type_map = {0, 2, 2};  // B -> C (same baseline, higher kappa)
        candidates.push_back(s);
    }
    {
        // Period 2 keeps the report-frequency gap above the detection
        // threshold inside the 4000-day horizon; slower intermittent lies
        // are only caught on longer runs.
        StrategySpec s;
        s.kind = StrategySpec::Kind::Intermittent;
        s.period = 2;
        s.inner_kind = StrategySpec::Kind::TypeMisreport;
        s.inner_type_map = {2, 1, 0};
        candidates.push_back(s);
    }

    std::vector<uint64_t> seeds;
    for (uint64_t k = 0; k < 8; ++k) seeds.push_back(1000 + k);
    oracle::DeviationReport report = oracle::enumerate_deviations(game, candidates, 4000, seeds);

    const auto& truthful = report.entries[0];
    for (size_t c = 1; c < report.entries.size(); ++c) {
        const auto& e = report.entries[c];
        if (!e.persistent) continue;
        double worst = 0.0;
        for (size_t s = 0; s < seeds.size(); ++s)
            worst = std::max(worst, e.mean_utility[s] - truthful.mean_utility[s]);
        rep.check("truthful >= " + e.label + " (all seeds)", worst, 0.0);
    }
    for (size_t c = 1; c < report.entries.size(); ++c) {
        const auto& e = report.entries[c];
        if (e.persistent) continue;
        const double se = std::max(e.stderr_mean, 1e-12);
        rep.check("truthful >= " + e.label + " (2 se)", e.mean - truthful.mean, 2.0 * se);
    }

    // Persist the report.
    nlohmann::json j;
    j["horizon"] = report.horizon;
    j["focalLoad"] = report.focal_load;
    j["seeds"] = report.seeds;
    j["entries"] = nlohmann::json::array();
    std::string csv = "strategy,mean_utility,stderr,gap_to_truthful,penalty_fraction\n";
    for (const auto& e : report.entries) {
        double pen = 0.0;
        for (double v : e.penalty_fraction) pen += v;
        pen /= static_cast<double>(e.penalty_fraction.size());
        j["entries"].push_back({{"strategy", e.label},
                                {"truthful", e.truthful},
                                {"persistent", e.persistent},
                                {"meanUtility", e.mean},
                                {"stderr", e.stderr_mean},
                                {"gapToTruthful", e.gap_to_truthful},
                                {"perSeedMean", e.mean_utility},
                                {"perSeedTailMin", e.tail_min_utility},
                                {"perSeedPenaltyFraction", e.penalty_fraction}});
        csv += e.label + "," + format_double(e.mean) + "," + format_double(e.stderr_mean) + "," +
               format_double(e.gap_to_truthful) + "," + format_double(pen) + "\n";
    }
    ensure_writable(out_dir / "deviation_report.json", force);
    ensure_writable(out_dir / "deviation_report.csv", force);
    write_text(out_dir / "deviation_report.json", j.dump(2) + "\n");
    write_text(out_dir / "deviation_report.csv", csv);
    return rep.failed ? 1 : 0;
}

}  // namespace

nlohmann::json builtin_deterministic_config() {
    nlohmann::json j;
    j["seed"] = 7;
    j["days"] = 10;
    j["mode"] = "explicit-baseline";
    j["curtailmentBounds"] = "unconstrained";
    j["typeSpace"]["dMax"] = 3;
    j["typeSpace"]["types"] = nlohmann::json::array();
    j["typeSpace"]["types"].push_back({{"id", "slow"}, {"baseline", 3}, {"kappa", 1.0}});
    j["typeSpace"]["types"].push_back({{"id", "stiff"}, {"baseline", 3}, {"kappa", 2.0}});
    j["loads"] = nlohmann::json::array();
    j["loads"].push_back({{"count", 1}, {"distribution", {1.0, 0.0}}, {"strategy", {{"kind", "truthful"}}}});
    j["loads"].push_back({{"count", 1}, {"distribution", {0.0, 1.0}}, {"strategy", {{"kind", "truthful"}}}});
    j["netDemand"] = {{"kind", "discrete"}, {"values", {10.0}}, {"probs", {1.0}}};
    j["costs"]["generator"] = {{"kind", "disabled"}};
    j["costs"]["reserve"] = {{"kind", "quadratic"}, {"a", 5.0}};
    j["costs"]["load"] = {{"family", "quadratic"}};
    j["expectation"] = {{"method", "enumerate"}};
    return j;
}

nlohmann::json builtin_small_game_config() {
    nlohmann::json j;
    j["seed"] = 11;
    j["days"] = 4000;
    j["mode"] = "explicit-baseline";
    j["curtailmentBounds"] = "unconstrained";
    j["typeSpace"]["dMax"] = 3;
    j["typeSpace"]["types"] = nlohmann::json::array();
    j["typeSpace"]["types"].push_back({{"id", "A"}, {"baseline", 2}, {"kappa", 1.0}});
    j["typeSpace"]["types"].push_back({{"id", "B"}, {"baseline", 3}, {"kappa", 1.0}});
    j["typeSpace"]["types"].push_back({{"id", "C"}, {"baseline", 3}, {"kappa", 2.0}});
    j["loads"] = nlohmann::json::array();
    j["loads"].push_back({{"count", 1}, {"distribution", {0.5, 0.3, 0.2}}, {"strategy", {{"kind", "truthful"}}}});
    j["loads"].push_back({{"count", 1}, {"distribution", {0.2, 0.3, 0.5}}, {"strategy", {{"kind", "truthful"}}}});
    j["netDemand"] = {{"kind", "discrete"}, {"values", {6.0, 10.0, 14.0}}, {"probs", {0.3, 0.4, 0.3}}};
    j["costs"]["generator"] = {{"kind", "disabled"}};
    j["costs"]["reserve"] = {{"kind", "quadratic"}, {"a", 5.0}};
    j["costs"]["load"] = {{"family", "quadratic"}};
    j["expectation"] = {{"method", "enumerate"}};
    return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override, bool force, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        prepare_out_dir(out_dir);
        const fs::path dir(out_dir);
        ensure_writable(dir / "ledger.csv", force);
        ensure_writable(dir / "summary.json", force);
        ensure_writable(dir / "config.json", force);

        std::vector<Strategy> strategies = strategies_from_config(cfg, err);
        RunOptions opt;
        opt.ledger_path = (dir / "ledger.csv").string();
        SimulationResult res = run(cfg, strategies, opt);
        SummaryMetrics metrics = summarize(res);
        nlohmann::json summary = summary_to_json(metrics);
        summary["seed"] = cfg.seed;
        write_text(dir / "summary.json", summary.dump(2) + "\n");
        write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
        out << "simulated " << cfg.days << " days, " << cfg.n_loads() << " loads; mean social cost "
            << metrics.mean_social_cost << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, const std::vector<double>& p_grid,
              bool force, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (cfg.mode != BaselineMode::NetDemand) {
            err << "config error: config.mode: the posted-price sweep requires net-demand mode\n";
            return 2;
        }
        if (p_grid.empty()) {
            err << "error: empty rebate grid\n";
            return 1;
        }
        prepare_out_dir(out_dir);
        const fs::path dir(out_dir);
        ensure_writable(dir / "sweep.csv", force);
        SweepResult sw = sweep(p_grid, cfg, cfg.seed);
        write_text(dir / "sweep.csv", sweep_csv(sw));
        out << "swept " << p_grid.size() << " rebates over " << cfg.days << " days\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_compare(const std::string& config_path, const std::string& out_dir, bool force, std::ostream& out,
                std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(config_path);
        if (cfg.mode != BaselineMode::NetDemand) {
            err << "config error: config.mode: compare requires a net-demand-mode config\n";
            return 2;
        }
        prepare_out_dir(out_dir);
        const fs::path dir(out_dir);
        ensure_writable(dir / "fig2.csv", force);
        ensure_writable(dir / "compare_summary.json", force);

        const std::vector<double> grid = default_rebate_grid(cfg);
        SweepResult sw = sweep(grid, cfg, cfg.seed);
        write_text(dir / "fig2.csv", sweep_csv(sw));

        size_t argmin = 0;
        for (size_t k = 1; k < sw.points.size(); ++k)
            if (sw.points[k].average_cost < sw.points[argmin].average_cost) argmin = k;
        nlohmann::json summary;
        summary["rebateGrid"] = grid;
        summary["postedMinimumAverageCost"] = sw.points[argmin].average_cost;
        summary["postedMinimizingRebate"] = sw.points[argmin].rebate;
        summary["optimalAverageCost"] = sw.optimal_average;
        summary["ratio"] = sw.points[argmin].average_cost / sw.optimal_average;
        summary["analyticRebate"] = analytic_optimal_rebate(cfg);
        write_text(dir / "compare_summary.json", summary.dump(2) + "\n");
        out << "posted-price minimum " << sw.points[argmin].average_cost << " at p=" << sw.points[argmin].rebate
            << "; optimal average " << sw.optimal_average << "; ratio "
            << sw.points[argmin].average_cost / sw.optimal_average << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const std::string& suite, const std::string& out_dir, bool force, std::ostream& out,
               std::ostream& err) {
    try {
        prepare_out_dir(out_dir);
        const fs::path dir(out_dir);
        CheckReporter rep(out);
        int rc = 0;
        if (suite == "dispatch") {
            rc = verify_dispatch(rep);
        } else if (suite == "mechanism") {
            rc = verify_mechanism(rep);
        } else if (suite == "incentives") {
            rc = verify_incentives(rep, dir, force);
        } else {
            err << "error: unknown verify suite '" << suite << "' (expected dispatch|mechanism|incentives)\n";
            return 1;
        }
        const fs::path report = dir / ("verify_" + suite + ".json");
        ensure_writable(report, force);
        write_text(report, rep.checks.dump(2) + "\n");
        if (rep.failed) {
            err << "error: first failing assertion: " << rep.first_failure << "\n";
            return 1;
        }
        return rc;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_print_schema(std::ostream& out) {
    nlohmann::json schema;
    schema["fields"] = {
        {"seed", "integer (required): master seed; every stream in a run forks from it"},
        {"days", "integer >= 1 (required): horizon L"},
        {"mode", "'explicit-baseline' | 'net-demand' (required): whether types carry baselines or they are netted into z"},
        {"curtailmentBounds", "'unconstrained' (default) | 'box': box constrains 0 <= pi_i <= reported baseline"},
        {"utilityAccounting",
         "'physical-reduction' (default) | 'reported-curtailment': cost basis for the load's realized utility"},
        {"typeSpace", "{dMax, types: [{id, baseline in 0..dMax, kappa > 0}]}"},
        {"loads", "[{count, distribution (probability vector over types), strategy}]"},
        {"netDemand", "{kind:'uniform', lo, hi} | {kind:'discrete', values, probs}"},
        {"costs",
         "{generator: {kind:'disabled'|'quadratic' a|'tabulated' gMin values}, reserve: {kind:'quadratic' a|'tabulated' "
         "xMin values}, load: {family:'quadratic'|'tabulated' xMin xMax values-per-type}}"},
        {"penalty", "{gamma, thresholdMultiplier, penaltyExponent}"},
        {"expectation", "{method:'enumerate'|'monte-carlo', samples (monte-carlo only), zNodes}"},
        {"strategy",
         "{kind:'truthful'} | {kind:'dist-misreport', report} | {kind:'type-misreport', map} | "
         "{kind:'baseline-inflate', delta} | {kind:'cost-exaggerate', map} | {kind:'intermittent', period, inner}"}};
    schema["defaults"] = {{"penalty.gamma", 1.0},
                          {"penalty.thresholdMultiplier", 2.0},
                          {"penalty.penaltyExponent", 1.5},
                          {"expectation.zNodes", 256},
                          {"curtailmentBounds", "unconstrained"},
                          {"utilityAccounting", "physical-reduction"},
                          {"expectation.method", "enumerate"}};
    schema["example"] = builtin_deterministic_config();
    out << schema.dump(2) << "\n";
    return 0;
}

}  // namespace cli
}  // namespace drm
