#include "drm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "drm/agents.hpp"

namespace drm {
namespace oracle {

RealTimeSolution brute_force_real_time(double z, double g, std::span<const int> reported_types,
                                       const TypeSpace& ts, const CostModel& costs, BoundsMode bounds,
                                       double grid_step) {
    const size_t n = reported_types.size();
    if (n > 4) throw std::invalid_argument("brute-force dispatch supports at most 4 loads");
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");

    double baseline_sum = 0.0;
    for (int t : reported_types) baseline_sum += ts.type(t).baseline;
    const double z_net = z - g + baseline_sum;

    std::vector<long> steps(n);
    std::vector<double> lo(n);
    double total = 1.0;
    for (size_t i = 0; i < n; ++i) {
        double l = std::min(0.0, z_net) - ts.d_max;
        double h = std::max(0.0, z_net) + ts.d_max;
        if (costs.load.kind == LoadCostFamily::Kind::Tabulated) {
            l = std::max(l, static_cast<double>(costs.load.x_min));
            h = std::min(h, static_cast<double>(costs.load.x_max));
        }
        if (bounds == BoundsMode::Box) {
            l = std::max(l, 0.0);
            h = std::min(h, static_cast<double>(ts.type(reported_types[i]).baseline));
            if (h < l) h = l;
        }
        lo[i] = l;
        steps[i] = static_cast<long>(std::floor((h - l) / grid_step)) + 1;
        total *= static_cast<double>(steps[i]);
    }
    if (total > 1e8) throw std::invalid_argument("brute-force grid exceeds 1e8 points");

    std::vector<long> idx(n, 0);
    std::vector<double> xs(n), cs(n);
    RealTimeSolution best;
    best.social_cost = std::numeric_limits<double>::infinity();
    const double cg = generator_cost(costs, g);
    while (true) {
        double mismatch = 0.0, load_total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            xs[i] = lo[i] + static_cast<double>(idx[i]) * grid_step;
            cs[i] = load_cost(costs, ts.type(reported_types[i]), reported_types[i], xs[i]);
            mismatch += ts.type(reported_types[i]).baseline - xs[i];
            load_total += cs[i];
        }
        const double g_r = z - g + mismatch;
        const double cost = cg + reserve_cost(costs, g_r) + load_total;
        if (cost < best.social_cost) {
            best.curtailments = xs;
            best.load_costs = cs;
            best.reserve = g_r;
            best.generator_cost_value = cg;
            best.reserve_cost_value = reserve_cost(costs, g_r);
            best.social_cost = cost;
        }
        size_t k = 0;
        while (k < n && ++idx[k] == steps[k]) idx[k++] = 0;
        if (k == n) break;
    }
    return best;
}

double exact_expectation(double g, const JointTypeModel& model, const NetDemandModel& z,
                         const TypeSpace& ts, const CostModel& costs, BoundsMode bounds) {
    if (z.kind != NetDemandModel::Kind::Discrete)
        throw std::invalid_argument("exact expectation requires a discrete net-demand support");
    const int n = model.n_loads();
    const int T = ts.size();
    double profiles = 1.0;
    for (int i = 0; i < n; ++i) profiles *= static_cast<double>(T);
    if (profiles > 1e5) throw std::invalid_argument("exact expectation bound exceeded");

    std::vector<int> profile(static_cast<size_t>(n), 0);
    double total = 0.0;
    while (true) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) p *= model.per_load[static_cast<size_t>(i)].probs[static_cast<size_t>(profile[static_cast<size_t>(i)])];
        if (p > 0.0) {
            for (size_t k = 0; k < z.values.size(); ++k) {
                if (z.probs[k] == 0.0) continue;
                RealTimeSolution sol = solve_real_time(z.values[k], g, profile, ts, costs, bounds);
                total += p * z.probs[k] * sol.social_cost;
            }
        }
        int i = 0;
        while (i < n && ++profile[static_cast<size_t>(i)] == T) profile[static_cast<size_t>(i++)] = 0;
        if (i == n) break;
    }
    return total;
}

DeviationReport enumerate_deviations(const ExperimentConfig& small_game,
                                     std::span<const StrategySpec> candidates, long horizon,
                                     std::span<const uint64_t> seeds) {
    if (small_game.n_loads() > 3 || small_game.type_space.size() > 3)
        throw std::invalid_argument("deviation enumeration is restricted to n <= 3, |types| <= 3");
    if (horizon < 1000) throw std::invalid_argument("horizon below 1000 days cannot stabilize penalties");
    if (seeds.empty()) throw std::invalid_argument("need at least one seed");
    size_t truthful_at = candidates.size();
    for (size_t c = 0; c < candidates.size(); ++c)
        if (candidates[c].kind == StrategySpec::Kind::Truthful) {
            truthful_at = c;
            break;
        }
    if (truthful_at == candidates.size())
        throw std::invalid_argument("candidate set must include the truthful strategy");

    ExperimentConfig cfg = small_game;
    cfg.days = horizon;

    const int n = cfg.n_loads();
    const Strategy truthful = make_strategy(StrategySpec{}, cfg.type_space);

    DeviationReport report;
    report.horizon = horizon;
    report.seeds.assign(seeds.begin(), seeds.end());
    report.focal_load = 0;

    for (const auto& spec : candidates) {
        DeviationEntry entry;
        entry.spec = spec;
        entry.label = describe(spec, cfg.type_space);
        entry.truthful = is_truthful(spec);
        entry.persistent = spec.kind != StrategySpec::Kind::Intermittent && !entry.truthful;
        std::vector<Strategy> strategies;
        strategies.push_back(make_strategy(spec, cfg.type_space));
        for (int i = 1; i < n; ++i) strategies.push_back(truthful);

        for (uint64_t seed : seeds) {
            ExperimentConfig run_cfg = cfg;
            run_cfg.seed = seed;
            SimulationResult res = run(run_cfg, strategies);
            entry.mean_utility.push_back(res.mean_utility[0]);
            entry.tail_min_utility.push_back(res.tail_min_utility[0]);
            entry.penalty_fraction.push_back(res.penalty_fraction[0]);
        }
        double sum = 0.0, sumsq = 0.0;
        for (double v : entry.mean_utility) {
            sum += v;
            sumsq += v * v;
        }
        const double k = static_cast<double>(entry.mean_utility.size());
        entry.mean = sum / k;
        entry.stderr_mean = k > 1 ? std::sqrt(std::max(0.0, (sumsq / k - entry.mean * entry.mean) / (k - 1))) : 0.0;
        report.entries.push_back(std::move(entry));
    }
    const double truthful_mean = report.entries[truthful_at].mean;
    for (auto& e : report.entries) e.gap_to_truthful = truthful_mean - e.mean;
    return report;
}

TrackerRecount recount_tracker(std::span<const std::vector<int>> report_log, long upto_day, int load,
                               const TypeDistribution& reported) {
    if (upto_day < 1 || upto_day > static_cast<long>(report_log.size()))
        throw std::invalid_argument("audit day outside the log");
    const int T = static_cast<int>(reported.probs.size());
    TrackerRecount rc;
    rc.marginal.assign(static_cast<size_t>(T), 0);

    std::map<std::vector<int>, std::pair<long, std::vector<long>>> rows;  // eta -> (M, N(nu))
    std::vector<int> eta;
    for (long l = 0; l < upto_day; ++l) {
        const auto& profile = report_log[static_cast<size_t>(l)];
        const int nu = profile[static_cast<size_t>(load)];
        rc.marginal[static_cast<size_t>(nu)] += 1;
        eta.clear();
        for (size_t j = 0; j < profile.size(); ++j)
            if (static_cast<int>(j) != load) eta.push_back(profile[j]);
        auto& row = rows[eta];
        if (row.second.empty()) row.second.assign(static_cast<size_t>(T), 0);
        row.first += 1;
        row.second[static_cast<size_t>(nu)] += 1;
    }
    const double L = static_cast<double>(upto_day);
    for (int t = 0; t < T; ++t)
        rc.sup_f = std::max(rc.sup_f, std::abs(rc.marginal[static_cast<size_t>(t)] / L - reported.probs[static_cast<size_t>(t)]));
    for (const auto& [key, row] : rows) {
        for (int t = 0; t < T; ++t) {
            const double h = row.second[static_cast<size_t>(t)] / L -
                             reported.probs[static_cast<size_t>(t)] * (static_cast<double>(row.first) / L);
            rc.sup_h = std::max(rc.sup_h, std::abs(h));
        }
    }
    return rc;
}

}  // namespace oracle
}  // namespace drm
