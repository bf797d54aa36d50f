#include "drm/benchmark.hpp"

#include <cmath>
#include <stdexcept>

#include "drm/dispatch.hpp"

namespace drm {

double best_response(double p, const LoadType& type, int type_index, const CostModel& costs) {
    if (p < 0.0) throw std::invalid_argument("rebate must be nonnegative");
    if (costs.load.kind == LoadCostFamily::Kind::Quadratic) return p / type.kappa;
    double best_x = 0.0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int x = costs.load.x_min; x <= costs.load.x_max; ++x) {
        const double v = p * x - load_cost(costs, type, type_index, static_cast<double>(x));
        if (v > best_v) {
            best_v = v;
            best_x = static_cast<double>(x);
        }
    }
    return best_x;
}

double run_posted_day(double p, double z, std::span<const int> types, const TypeSpace& ts,
                      const CostModel& costs) {
    double curtailed = 0.0, load_total = 0.0;
    if (costs.load.kind == LoadCostFamily::Kind::Quadratic) {
        for (int t : types) {
            const double x = p / ts.type(t).kappa;
            curtailed += x;
            load_total += 0.5 * ts.type(t).kappa * x * x;
        }
    } else {
        for (int t : types) {
            const double x = best_response(p, ts.type(t), t, costs);
            curtailed += x;
            load_total += load_cost(costs, ts.type(t), t, x);
        }
    }
    return reserve_cost(costs, z - curtailed) + load_total;
}

SweepResult sweep(std::span<const double> p_grid, const ExperimentConfig& config, uint64_t seed) {
    if (p_grid.empty()) throw std::invalid_argument("rebate grid is empty");
    if (config.mode != BaselineMode::NetDemand)
        throw std::invalid_argument("the posted-price sweep runs in net-demand mode");

    const TypeSpace& ts = config.type_space;
    const long L = config.days;
    const int n = config.n_loads();

    // One common sample path across all grid points.
    Rng env = Rng(seed).fork("env");
    std::vector<double> zs(static_cast<size_t>(L));
    std::vector<int> profile(static_cast<size_t>(n) * static_cast<size_t>(L));
    {
        DaySample day;
        for (long l = 0; l < L; ++l) {
            sample_day_into(config, env, day);
            zs[static_cast<size_t>(l)] = day.z;
            std::copy(day.types.begin(), day.types.end(),
                      profile.begin() + static_cast<size_t>(l) * static_cast<size_t>(n));
        }
    }

    SweepResult res;
    res.optimal_per_day.resize(static_cast<size_t>(L));
    double opt_sum = 0.0;
    for (long l = 0; l < L; ++l) {
        std::span<const int> day_types(profile.data() + static_cast<size_t>(l) * static_cast<size_t>(n),
                                       static_cast<size_t>(n));
        RealTimeSolution sol = solve_real_time(zs[static_cast<size_t>(l)], 0.0, day_types, ts, config.costs,
                                               config.bounds);
        res.optimal_per_day[static_cast<size_t>(l)] = sol.social_cost;
        opt_sum += sol.social_cost;
    }
    res.optimal_average = opt_sum / static_cast<double>(L);

    res.points.reserve(p_grid.size());
    for (double p : p_grid) {
        PostedPriceResult pr;
        pr.rebate = p;
        pr.per_day_cost.resize(static_cast<size_t>(L));
        double sum = 0.0;
        for (long l = 0; l < L; ++l) {
            std::span<const int> day_types(profile.data() + static_cast<size_t>(l) * static_cast<size_t>(n),
                                           static_cast<size_t>(n));
            const double c = run_posted_day(p, zs[static_cast<size_t>(l)], day_types, ts, config.costs);
            pr.per_day_cost[static_cast<size_t>(l)] = c;
            sum += c;
        }
        pr.average_cost = sum / static_cast<double>(L);
        res.points.push_back(std::move(pr));
    }
    return res;
}

double analytic_optimal_rebate(const ExperimentConfig& config) {
    if (config.costs.load.kind != LoadCostFamily::Kind::Quadratic ||
        config.costs.reserve.kind != ReserveCost::Kind::Quadratic)
        throw std::invalid_argument("analytic rebate requires the quadratic cost model");
    const double a = config.costs.reserve.a;
    if (a == 0.0) return 0.0;
    double mean_s = 0.0, var_s = 0.0;
    for (const auto& group : config.loads) {
        double m1 = 0.0, m2 = 0.0;
        for (size_t t = 0; t < group.distribution.probs.size(); ++t) {
            const double inv = 1.0 / config.type_space.type(static_cast<int>(t)).kappa;
            m1 += group.distribution.probs[t] * inv;
            m2 += group.distribution.probs[t] * inv * inv;
        }
        mean_s += group.count * m1;
        var_s += group.count * (m2 - m1 * m1);
    }
    const double es2 = var_s + mean_s * mean_s;
    const double ez = config.net_demand.mean();
    if (mean_s == 0.0) return 0.0;
    return 2.0 * a * mean_s * ez / (mean_s + 2.0 * a * es2);
}

std::vector<double> default_rebate_grid(const ExperimentConfig& config) {
    const double p_star = analytic_optimal_rebate(config);
    const double hi = p_star > 0.0 ? 4.0 * p_star : 1.0;
    std::vector<double> grid(50);
    for (size_t k = 0; k < grid.size(); ++k)
        grid[k] = hi * static_cast<double>(k) / static_cast<double>(grid.size() - 1);
    return grid;
}

}  // namespace drm
