#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "drm/benchmark.hpp"
#include "drm/commands.hpp"
#include "drm/dispatch.hpp"

using namespace drm;

namespace {

// Net-demand config with two fixed loads (kappa 1 and 2) and z = 16 a.s.
nlohmann::json degenerate_posted_config() {
    nlohmann::json j;
    j["seed"] = 3;
    j["days"] = 5;
    j["mode"] = "net-demand";
    j["typeSpace"]["dMax"] = 0;
    j["typeSpace"]["types"] = nlohmann::json::array();
    j["typeSpace"]["types"].push_back({{"id", "k1"}, {"baseline", 0}, {"kappa", 1.0}});
    j["typeSpace"]["types"].push_back({{"id", "k2"}, {"baseline", 0}, {"kappa", 2.0}});
    j["loads"] = nlohmann::json::array();
    j["loads"].push_back({{"count", 1}, {"distribution", {1.0, 0.0}}, {"strategy", {{"kind", "truthful"}}}});
    j["loads"].push_back({{"count", 1}, {"distribution", {0.0, 1.0}}, {"strategy", {{"kind", "truthful"}}}});
    j["netDemand"] = {{"kind", "discrete"}, {"values", {16.0}}, {"probs", {1.0}}};
    j["costs"]["generator"] = {{"kind", "disabled"}};
    j["costs"]["reserve"] = {{"kind", "quadratic"}, {"a", 5.0}};
    j["costs"]["load"] = {{"family", "quadratic"}};
    j["expectation"] = {{"method", "enumerate"}};
    return j;
}

}  // namespace

TEST_CASE("best response to a rebate") {
    ExperimentConfig cfg = validate_config(degenerate_posted_config());
    CHECK(best_response(10.0, cfg.type_space.type(1), 1, cfg.costs) == doctest::Approx(5.0));
    CHECK(best_response(0.0, cfg.type_space.type(0), 0, cfg.costs) == 0.0);
    CHECK(best_response(10.0, cfg.type_space.type(0), 0, cfg.costs) == doctest::Approx(10.0));
    CHECK_THROWS_AS(best_response(-1.0, cfg.type_space.type(0), 0, cfg.costs), std::invalid_argument);
}

TEST_CASE("posted day cost at fixed rebates") {
    ExperimentConfig cfg = validate_config(degenerate_posted_config());
    std::vector<int> types = {0, 1};
    CHECK(run_posted_day(10.0, 16.0, types, cfg.type_space, cfg.costs) == doctest::Approx(80.0));
    CHECK(run_posted_day(8.0, 16.0, types, cfg.type_space, cfg.costs) == doctest::Approx(128.0));
    CHECK(run_posted_day(0.0, 16.0, types, cfg.type_space, cfg.costs) == doctest::Approx(5.0 * 256.0));
}

TEST_CASE("degenerate sweep reproduces the fixed-point values") {
    ExperimentConfig cfg = validate_config(degenerate_posted_config());
    std::vector<double> grid = {8.0, 10.0};
    SweepResult sw = sweep(grid, cfg, cfg.seed);
    REQUIRE(sw.points.size() == 2);
    CHECK(sw.points[0].average_cost == doctest::Approx(128.0));
    CHECK(sw.points[1].average_cost == doctest::Approx(80.0));
    CHECK(sw.optimal_average == doctest::Approx(80.0));
    // p = 10 equals the optimal shadow price here, so dominance is tight.
    for (size_t k = 0; k < sw.points.size(); ++k)
        for (long l = 0; l < cfg.days; ++l)
            CHECK(sw.points[k].per_day_cost[static_cast<size_t>(l)] >=
                  sw.optimal_per_day[static_cast<size_t>(l)] - 1e-9);
}

TEST_CASE("per-day pointwise dominance on a stochastic instance") {
    nlohmann::json j = degenerate_posted_config();
    j["netDemand"] = {{"kind", "uniform"}, {"lo", 0.0}, {"hi", 30.0}};
    j["loads"][0]["distribution"] = {0.5, 0.5};
    j["loads"][1]["distribution"] = {0.2, 0.8};
    j["days"] = 200;
    ExperimentConfig cfg = validate_config(j);
    SweepResult sw = sweep(default_rebate_grid(cfg), cfg, 99);
    for (const auto& pt : sw.points)
        for (long l = 0; l < cfg.days; ++l)
            CHECK(pt.per_day_cost[static_cast<size_t>(l)] >= sw.optimal_per_day[static_cast<size_t>(l)] - 1e-9);
}

TEST_CASE("sweep is deterministic and permutation-equivariant") {
    nlohmann::json j = degenerate_posted_config();
    j["netDemand"] = {{"kind", "uniform"}, {"lo", 0.0}, {"hi", 30.0}};
    j["days"] = 100;
    ExperimentConfig cfg = validate_config(j);
    std::vector<double> grid = {2.0, 5.0, 9.0};
    SweepResult a = sweep(grid, cfg, 7);
    SweepResult b = sweep(grid, cfg, 7);
    for (size_t k = 0; k < grid.size(); ++k) CHECK(a.points[k].average_cost == b.points[k].average_cost);
    std::vector<double> permuted = {9.0, 2.0, 5.0};
    SweepResult c = sweep(permuted, cfg, 7);
    CHECK(c.points[0].average_cost == a.points[2].average_cost);
    CHECK(c.points[1].average_cost == a.points[0].average_cost);
    CHECK(c.points[2].average_cost == a.points[1].average_cost);
}

TEST_CASE("closed-form best response matches a grid argmax") {
    Rng rng(31337);
    CostModel costs;  // quadratic load family
    for (int trial = 0; trial < 100; ++trial) {
        const double p = rng.uniform(0.0, 20.0);
        const double kappa = rng.uniform(0.5, 8.0);
        LoadType type{"x", 0, kappa};
        const double closed = best_response(p, type, 0, costs);
        double best_x = 0.0, best_v = -1e300;
        for (double x = 0.0; x <= 45.0; x += 0.01) {
            const double v = p * x - 0.5 * kappa * x * x;
            if (v > best_v) {
                best_v = v;
                best_x = x;
            }
        }
        CHECK(std::abs(closed - best_x) <= 0.01 + 1e-9);
    }
}

TEST_CASE("analytic rebate minimizes the expected posted cost") {
    nlohmann::json j = degenerate_posted_config();
    j["netDemand"] = {{"kind", "uniform"}, {"lo", 0.0}, {"hi", 30.0}};
    j["loads"][0]["distribution"] = {0.5, 0.5};
    j["days"] = 2000;
    ExperimentConfig cfg = validate_config(j);
    const double p_star = analytic_optimal_rebate(cfg);
    CHECK(p_star > 0.0);
    // Empirical averages on a long path: p* beats nearby rebates.
    std::vector<double> probe = {0.8 * p_star, p_star, 1.25 * p_star};
    SweepResult sw = sweep(probe, cfg, 11);
    CHECK(sw.points[1].average_cost <= sw.points[0].average_cost + 1e-9);
    CHECK(sw.points[1].average_cost <= sw.points[2].average_cost + 1e-9);

    std::vector<double> grid = default_rebate_grid(cfg);
    CHECK(grid.size() == 50);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(4.0 * p_star));
}

TEST_CASE("sweep argument errors") {
    ExperimentConfig cfg = validate_config(degenerate_posted_config());
    CHECK_THROWS_AS(sweep({}, cfg, 1), std::invalid_argument);
    ExperimentConfig wrong = validate_config(cli::builtin_deterministic_config());
    std::vector<double> grid = {1.0};
    CHECK_THROWS_AS(sweep(grid, wrong, 1), std::invalid_argument);
}
