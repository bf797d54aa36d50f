#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "drm/commands.hpp"
#include "drm/csv.hpp"
#include "drm/engine.hpp"
#include "drm/oracle.hpp"

using namespace drm;
namespace fs = std::filesystem;

namespace {

ExperimentConfig det_config(long days = 10) {
    nlohmann::json j = cli::builtin_deterministic_config();
    j["days"] = days;
    return validate_config(j);
}

std::vector<Strategy> truthful_strategies(const ExperimentConfig& cfg) {
    return std::vector<Strategy>(static_cast<size_t>(cfg.n_loads()),
                                 make_strategy(StrategySpec{}, cfg.type_space));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("deterministic two-load run: every day identical, known utilities") {
    ExperimentConfig cfg = det_config();
    SimulationResult res;
    std::vector<DayRecord> records;
    RunOptions opt;
    opt.keep_series = true;
    opt.on_day = [&](const DayRecord& rec) { records.push_back(rec); };
    res = run(cfg, truthful_strategies(cfg), opt);

    CHECK(res.day_ahead.w_star == doctest::Approx(80.0));
    CHECK(res.w_minus[0] == doctest::Approx(845.0 / 6.0));
    CHECK(res.w_minus[1] == doctest::Approx(845.0 / 11.0));
    CHECK(res.p1[0] == doctest::Approx(665.0 / 6.0).epsilon(1e-9));
    CHECK(res.p1[1] == doctest::Approx(240.0 / 11.0).epsilon(1e-9));

    REQUIRE(records.size() == 10);
    for (const auto& rec : records) {
        CHECK(rec.z == 10.0);
        CHECK(rec.curtailments[0] == doctest::Approx(10.0));
        CHECK(rec.curtailments[1] == doctest::Approx(5.0));
        CHECK(rec.consumptions[0] == doctest::Approx(-7.0));  // 3 - 10: over-delivery via the grid
        CHECK(rec.social_cost == doctest::Approx(80.0));
        CHECK(rec.utilities[0] == doctest::Approx(365.0 / 6.0).epsilon(1e-9));
        CHECK(rec.utilities[1] == doctest::Approx(-35.0 / 11.0).epsilon(1e-9));
        CHECK(rec.payments[0].p2 == doctest::Approx(0.0));
        CHECK_FALSE(rec.payments[0].penalized);
        CHECK(audit_compliance(rec, cfg.type_space));
    }
    CHECK(res.mean_utility[0] == doctest::Approx(365.0 / 6.0).epsilon(1e-9));
    CHECK(res.tail_min_utility[1] == doctest::Approx(-35.0 / 11.0).epsilon(1e-9));
    CHECK(res.mean_social_cost == doctest::Approx(80.0));
    CHECK(res.penalty_fraction[0] == 0.0);
}

TEST_CASE("tampered records fail the compliance audit") {
    ExperimentConfig cfg = det_config(3);
    DayRecord captured;
    RunOptions opt;
    opt.on_day = [&](const DayRecord& rec) { captured = rec; };
    (void)run(cfg, truthful_strategies(cfg), opt);
    CHECK(audit_compliance(captured, cfg.type_space));
    captured.consumptions[0] += 1.0;
    CHECK_FALSE(audit_compliance(captured, cfg.type_space));
}

TEST_CASE("baseline-inflating agents remain contract-compliant") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 50;
    ExperimentConfig cfg = validate_config(j);
    std::vector<Strategy> strat;
    StrategySpec inflate;
    inflate.kind = StrategySpec::Kind::BaselineInflate;
    inflate.inflate_delta = 1;
    strat.push_back(make_strategy(inflate, cfg.type_space));
    strat.push_back(make_strategy(StrategySpec{}, cfg.type_space));
    bool all_compliant = true;
    RunOptions opt;
    opt.on_day = [&](const DayRecord& rec) { all_compliant &= audit_compliance(rec, cfg.type_space); };
    (void)run(cfg, strat, opt);
    CHECK(all_compliant);  // compliance is judged against the reported baseline
}

TEST_CASE("zero-cost system produces all-zero payments, utilities and costs") {
    nlohmann::json j = cli::builtin_deterministic_config();
    j["costs"]["reserve"] = {{"kind", "quadratic"}, {"a", 0.0}};
    ExperimentConfig cfg = validate_config(j);
    SimulationResult res = run(cfg, truthful_strategies(cfg));
    CHECK(res.day_ahead.w_star == 0.0);
    CHECK(res.mean_social_cost == 0.0);
    for (int i = 0; i < res.n; ++i) {
        CHECK(res.p1[static_cast<size_t>(i)] == 0.0);
        CHECK(res.mean_utility[static_cast<size_t>(i)] == 0.0);
    }
}

TEST_CASE("truthful report log equals the true type log") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 300;
    ExperimentConfig cfg = validate_config(j);
    std::vector<std::vector<int>> truths;
    RunOptions opt;
    opt.keep_series = true;
    opt.on_day = [&](const DayRecord& rec) { truths.push_back(rec.true_types); };
    SimulationResult res = run(cfg, truthful_strategies(cfg), opt);
    REQUIRE(res.report_log.size() == truths.size());
    for (size_t l = 0; l < truths.size(); ++l) CHECK(res.report_log[l] == truths[l]);
}

TEST_CASE("equal seeds give bit-identical ledgers, different seeds differ") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 200;
    ExperimentConfig cfg = validate_config(j);
    const fs::path dir = fs::temp_directory_path() / "drm_engine_test";
    fs::create_directories(dir);

    auto run_to = [&](const fs::path& p, uint64_t seed) {
        ExperimentConfig c = cfg;
        c.seed = seed;
        RunOptions opt;
        opt.ledger_path = p.string();
        (void)run(c, truthful_strategies(c), opt);
    };
    run_to(dir / "a.csv", 5);
    run_to(dir / "b.csv", 5);
    run_to(dir / "c.csv", 6);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a != slurp(dir / "c.csv"));
    CHECK(a.substr(0, a.find('\n')) == kLedgerHeader);
}

TEST_CASE("running averages recomputed from the ledger match in-memory values") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 150;
    ExperimentConfig cfg = validate_config(j);
    const fs::path ledger = fs::temp_directory_path() / "drm_engine_test" / "roundtrip.csv";
    fs::create_directories(ledger.parent_path());
    RunOptions opt;
    opt.ledger_path = ledger.string();
    SimulationResult res = run(cfg, truthful_strategies(cfg), opt);

    std::ifstream in(ledger);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> utility_sum(2, 0.0);
    double social_sum = 0.0;
    long rows = 0;
    while (std::getline(in, line)) {
        auto f = split_csv_line(line);
        const int load = static_cast<int>(parse_double(f[2]));
        utility_sum[static_cast<size_t>(load)] += parse_double(f[10]);
        if (load == 0) social_sum += parse_double(f[11]);
        ++rows;
    }
    CHECK(rows == 150 * 2);
    CHECK(utility_sum[0] / 150.0 == doctest::Approx(res.mean_utility[0]).epsilon(1e-9));
    CHECK(utility_sum[1] / 150.0 == doctest::Approx(res.mean_utility[1]).epsilon(1e-9));
    CHECK(social_sum / 150.0 == doctest::Approx(res.mean_social_cost).epsilon(1e-9));
}

TEST_CASE("summarize validates the tail fraction and honors keep_series") {
    ExperimentConfig cfg = det_config(8);
    RunOptions opt;
    opt.keep_series = true;
    SimulationResult res = run(cfg, truthful_strategies(cfg), opt);
    CHECK_THROWS_AS(summarize(res, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(summarize(res, 1.5), std::invalid_argument);
    SummaryMetrics half = summarize(res);
    CHECK(half.tail_min_utility[0] == doctest::Approx(res.mean_utility[0]));
    SummaryMetrics quarter = summarize(res, 0.25);
    CHECK(quarter.tail_min_utility[0] == doctest::Approx(res.mean_utility[0]));
    CHECK(half.hypothesis_gap[1] == doctest::Approx(-35.0 / 11.0));

    SimulationResult bare = run(cfg, truthful_strategies(cfg));
    CHECK_THROWS_AS(summarize(bare, 0.25), std::invalid_argument);
}

TEST_CASE("engine rejects mismatched strategy lists and zero horizons") {
    ExperimentConfig cfg = det_config();
    std::vector<Strategy> one = {make_strategy(StrategySpec{}, cfg.type_space)};
    CHECK_THROWS_AS(run(cfg, one), std::invalid_argument);
}

TEST_CASE("one-day horizons have a well-defined tail") {
    ExperimentConfig cfg = det_config(1);
    SimulationResult res = run(cfg, truthful_strategies(cfg));
    CHECK(res.tail_min_utility[0] == doctest::Approx(365.0 / 6.0));
    CHECK(res.tail_penalty_fraction[0] == 0.0);
    RunningAverage ra = long_run_average(std::vector<double>{7.0});
    CHECK(ra.mean == 7.0);
    CHECK(ra.tail_min == 7.0);
}

TEST_CASE("engine runs a tabulated (non-quadratic) cost family end to end") {
    nlohmann::json j;
    j["seed"] = 21;
    j["days"] = 60;
    j["mode"] = "explicit-baseline";
    j["curtailmentBounds"] = "box";
    j["typeSpace"]["dMax"] = 2;
    j["typeSpace"]["types"] = nlohmann::json::array();
    j["typeSpace"]["types"].push_back({{"id", "mild"}, {"baseline", 2}, {"kappa", 1.0}});
    j["typeSpace"]["types"].push_back({{"id", "spiky"}, {"baseline", 2}, {"kappa", 1.0}});
    j["loads"] = nlohmann::json::array();
    j["loads"].push_back({{"count", 2}, {"distribution", {0.5, 0.5}}, {"strategy", {{"kind", "truthful"}}}});
    j["netDemand"] = {{"kind", "discrete"}, {"values", {5.0}}, {"probs", {1.0}}};
    j["costs"]["generator"] = {{"kind", "disabled"}};
    j["costs"]["reserve"] = {{"kind", "quadratic"}, {"a", 5.0}};
    // Deliberately non-convex rows: cheap first unit, pricey second.
    j["costs"]["load"] = {{"family", "tabulated"},
                          {"xMin", 0},
                          {"xMax", 2},
                          {"values", {{"mild", {0.0, 1.0, 9.0}}, {"spiky", {0.0, 4.0, 5.0}}}}};
    j["expectation"] = {{"method", "enumerate"}};
    ExperimentConfig cfg = validate_config(j);

    bool dispatch_matches_oracle = true;
    double worst_social_gap = 0.0;
    RunOptions opt;
    opt.on_day = [&](const DayRecord& rec) {
        RealTimeSolution ref = oracle::brute_force_real_time(rec.z, 0.0, rec.reported_types, cfg.type_space,
                                                             cfg.costs, cfg.bounds, 1.0);
        double parts = 0.0;
        for (size_t i = 0; i < rec.curtailments.size(); ++i)
            parts += load_cost(cfg.costs, cfg.type_space.type(rec.reported_types[i]), rec.reported_types[i],
                               rec.curtailments[i]);
        parts += reserve_cost(cfg.costs, rec.reserve);
        if (std::abs(parts - ref.social_cost) > 1e-9) dispatch_matches_oracle = false;
        worst_social_gap = std::max(worst_social_gap, std::abs(rec.social_cost - parts));
    };
    SimulationResult res = run(cfg, truthful_strategies(cfg), opt);
    CHECK(dispatch_matches_oracle);
    CHECK(worst_social_gap <= 1e-9);  // truthful: reported costs are the true costs
    CHECK(res.day_ahead.w_star ==
          doctest::Approx(oracle::exact_expectation(0.0, cfg.true_model(), cfg.net_demand, cfg.type_space,
                                                    cfg.costs, cfg.bounds)));
}

TEST_CASE("real-time reports never move the first-stage payment") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 400;
    ExperimentConfig cfg = validate_config(j);
    SimulationResult honest = run(cfg, truthful_strategies(cfg));

    StrategySpec swap;  // day-ahead bid stays truthful, real time lies
    swap.kind = StrategySpec::Kind::TypeMisreport;
    swap.type_map = {2, 1, 0};
    std::vector<Strategy> lying;
    lying.push_back(make_strategy(swap, cfg.type_space));
    lying.push_back(make_strategy(StrategySpec{}, cfg.type_space));
    SimulationResult swapped = run(cfg, lying);

    CHECK(honest.p1 == swapped.p1);  // p1 is a function of the day-ahead bids alone
    CHECK(honest.day_ahead.w_star == swapped.day_ahead.w_star);
}

TEST_CASE("persistent misreports penalize a non-vanishing fraction of late days") {
    nlohmann::json j = cli::builtin_small_game_config();
    j["days"] = 5000;
    // TV 0.4 against the true (0.5, 0.3, 0.2).
    j["loads"][0]["strategy"] = {{"kind", "dist-misreport"}, {"report", {0.9, 0.05, 0.05}}};
    ExperimentConfig cfg = validate_config(j);
    std::vector<Strategy> strat;
    strat.push_back(make_strategy(cfg.loads[0].strategy, cfg.type_space));
    strat.push_back(make_strategy(StrategySpec{}, cfg.type_space));
    SimulationResult res = run(cfg, strat);
    CHECK(res.tail_penalty_fraction[0] > 0.5);
    CHECK(res.tail_penalty_fraction[1] < 0.01);  // the truthful neighbor stays clean
    CHECK(res.mean_utility[0] < -1000.0);        // J_p avalanche
}
