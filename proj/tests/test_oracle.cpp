#include <doctest.h>

#include <cmath>

#include "drm/commands.hpp"
#include "drm/oracle.hpp"

using namespace drm;

namespace {

ExperimentConfig det_config() { return validate_config(cli::builtin_deterministic_config()); }

}  // namespace

TEST_CASE("brute-force dispatch brackets the closed-form optimum") {
    ExperimentConfig cfg = det_config();
    std::vector<int> types = {0, 1};
    RealTimeSolution unc =
        oracle::brute_force_real_time(10.0, 0.0, types, cfg.type_space, cfg.costs, BoundsMode::Unconstrained, 0.01);
    CHECK(std::abs(unc.social_cost - 80.0) <= 1e-3);
    RealTimeSolution box =
        oracle::brute_force_real_time(10.0, 0.0, types, cfg.type_space, cfg.costs, BoundsMode::Box, 0.01);
    CHECK(std::abs(box.social_cost - 513.5) <= 1e-3);
}

TEST_CASE("degenerate grids and guard rails") {
    ExperimentConfig cfg = det_config();
    // A box with zero baselines collapses every load to the single point 0.
    TypeSpace ts;
    ts.d_max = 0;
    ts.types = {{"zero", 0, 1.0}};
    std::vector<int> types = {0};
    RealTimeSolution sol =
        oracle::brute_force_real_time(4.0, 0.0, types, ts, cfg.costs, BoundsMode::Box, 0.5);
    CHECK(sol.curtailments[0] == 0.0);
    CHECK(sol.social_cost == doctest::Approx(reserve_cost(cfg.costs, 4.0)));

    std::vector<int> five(4, 0);
    CHECK_THROWS_AS(
        oracle::brute_force_real_time(10.0, 0.0, std::vector<int>(5, 0), cfg.type_space, cfg.costs,
                                      BoundsMode::Unconstrained, 0.01),
        std::invalid_argument);
    CHECK_THROWS_AS(oracle::brute_force_real_time(10.0, 0.0, five, cfg.type_space, cfg.costs,
                                                  BoundsMode::Unconstrained, 1e-5),
                    std::invalid_argument);
}

TEST_CASE("exact expectation enumerates every scenario") {
    ExperimentConfig cfg = det_config();
    CHECK(oracle::exact_expectation(0.0, cfg.true_model(), cfg.net_demand, cfg.type_space, cfg.costs,
                                    cfg.bounds) == doctest::Approx(80.0));

    // Two equiprobable z atoms on the fixed-type instance: (20 + 80) / 2.
    NetDemandModel z2;
    z2.kind = NetDemandModel::Kind::Discrete;
    z2.values = {0.0, 8.0};  // z_net = z + 6 reported baseline units
    z2.values = {8.0 - 6.0, 16.0 - 6.0};
    z2.probs = {0.5, 0.5};
    CHECK(oracle::exact_expectation(0.0, cfg.true_model(), z2, cfg.type_space, cfg.costs, cfg.bounds) ==
          doctest::Approx(50.0));

    // A zero-probability type in the support changes nothing.
    nlohmann::json j = cli::builtin_deterministic_config();
    j["typeSpace"]["types"].push_back({{"id", "ghost"}, {"baseline", 0}, {"kappa", 9.0}});
    j["loads"][0]["distribution"] = {1.0, 0.0, 0.0};
    j["loads"][1]["distribution"] = {0.0, 1.0, 0.0};
    ExperimentConfig cfg3 = validate_config(j);
    CHECK(oracle::exact_expectation(0.0, cfg3.true_model(), cfg3.net_demand, cfg3.type_space, cfg3.costs,
                                    cfg3.bounds) == doctest::Approx(80.0));

    // Uniform z is out of scope for the exact oracle.
    NetDemandModel zu;
    zu.kind = NetDemandModel::Kind::Uniform;
    zu.lo = 0.0;
    zu.hi = 1.0;
    CHECK_THROWS_AS(
        oracle::exact_expectation(0.0, cfg.true_model(), zu, cfg.type_space, cfg.costs, cfg.bounds),
        std::invalid_argument);
}

TEST_CASE("deviation enumeration: anchors, ordering, and guards") {
    ExperimentConfig game = validate_config(cli::builtin_small_game_config());
    std::vector<uint64_t> seeds = {1, 2, 3};

    StrategySpec truthful;
    StrategySpec swap;
    swap.kind = StrategySpec::Kind::TypeMisreport;
    swap.type_map = {2, 1, 0};
    StrategySpec misreport;
    misreport.kind = StrategySpec::Kind::DistMisreport;
    misreport.reported.probs = {0.9, 0.05, 0.05};

    std::vector<StrategySpec> cands = {truthful, swap, misreport};
    oracle::DeviationReport rep = oracle::enumerate_deviations(game, cands, 2000, seeds);
    REQUIRE(rep.entries.size() == 3);
    CHECK(rep.entries[0].truthful);
    CHECK(rep.entries[0].gap_to_truthful == 0.0);

    // Truthful vs truthful on the same path is an exact tie.
    std::vector<StrategySpec> twins = {truthful, truthful};
    oracle::DeviationReport tie = oracle::enumerate_deviations(game, twins, 2000, seeds);
    CHECK(tie.entries[1].gap_to_truthful == 0.0);
    for (size_t s = 0; s < seeds.size(); ++s)
        CHECK(tie.entries[0].mean_utility[s] == tie.entries[1].mean_utility[s]);

    // Permuting candidates permutes entries but not their statistics.
    std::vector<StrategySpec> permuted = {misreport, truthful, swap};
    oracle::DeviationReport rep2 = oracle::enumerate_deviations(game, permuted, 2000, seeds);
    CHECK(rep2.entries[1].mean == rep.entries[0].mean);
    CHECK(rep2.entries[0].mean == rep.entries[2].mean);
    CHECK(rep2.entries[2].mean == rep.entries[1].mean);

    CHECK_THROWS_AS(oracle::enumerate_deviations(game, cands, 500, seeds), std::invalid_argument);
    std::vector<StrategySpec> no_anchor = {swap};
    CHECK_THROWS_AS(oracle::enumerate_deviations(game, no_anchor, 2000, seeds), std::invalid_argument);
}

TEST_CASE("longer horizons never rescue a persistent misreporter") {
    ExperimentConfig game = validate_config(cli::builtin_small_game_config());
    std::vector<uint64_t> seeds = {5, 6, 7};
    StrategySpec misreport;
    misreport.kind = StrategySpec::Kind::DistMisreport;
    misreport.reported.probs = {0.9, 0.05, 0.05};
    std::vector<StrategySpec> cands = {StrategySpec{}, misreport};

    oracle::DeviationReport shorter = oracle::enumerate_deviations(game, cands, 10000, seeds);
    oracle::DeviationReport longer = oracle::enumerate_deviations(game, cands, 100000, seeds);
    for (size_t s = 0; s < seeds.size(); ++s) {
        const double short_gap = shorter.entries[0].mean_utility[s] - shorter.entries[1].mean_utility[s];
        const double long_gap = longer.entries[0].mean_utility[s] - longer.entries[1].mean_utility[s];
        CHECK(short_gap > 0.0);
        CHECK(long_gap > short_gap);  // J_p(l)/l keeps growing
    }
}

TEST_CASE("slow intermittent lies can skim under the radar at finite horizons") {
    // Documented finite-horizon behavior: a period-30 swap stays below the
    // detection threshold for the whole run and collects a small positive
    // settlement skim; Theorem 1.1's almost-sure dominance only bites once
    // the threshold catches the frequency gap. The acceptance suite uses
    // periods that cross inside its horizon.
    ExperimentConfig game = validate_config(cli::builtin_small_game_config());
    std::vector<uint64_t> seeds = {1, 2, 3, 4};
    StrategySpec slow;
    slow.kind = StrategySpec::Kind::Intermittent;
    slow.period = 30;
    slow.inner_kind = StrategySpec::Kind::TypeMisreport;
    slow.inner_type_map = {2, 1, 0};
    std::vector<StrategySpec> cands = {StrategySpec{}, slow};
    oracle::DeviationReport rep = oracle::enumerate_deviations(game, cands, 5000, seeds);
    for (double f : rep.entries[1].penalty_fraction) CHECK(f == 0.0);
    CHECK(rep.entries[1].mean > rep.entries[0].mean);
}
