#pragma once

#include <span>
#include <vector>

#include "drm/model.hpp"

namespace drm {

// Reduction maximizing p*x - c_i(x, type); p/kappa in closed form for the
// quadratic family, grid argmax for tabulated ones.
double best_response(double p, const LoadType& type, int type_index, const CostModel& costs);

// c_r(z - sum x*) + sum c_i(x*, type): the day's social cost when every load
// best-responds to the rebate (net-demand setting, no generator).
double run_posted_day(double p, double z, std::span<const int> types, const TypeSpace& ts,
                      const CostModel& costs);

struct PostedPriceResult {
    double rebate = 0.0;
    std::vector<double> per_day_cost;
    double average_cost = 0.0;
};

struct SweepResult {
    std::vector<PostedPriceResult> points;
    std::vector<double> optimal_per_day;  // per-day optimal dispatch cost, same sample path
    double optimal_average = 0.0;
};

// Evaluates every rebate on one common (z, type-profile) sample path drawn
// from the seed, together with the per-day optimal dispatch cost.
SweepResult sweep(std::span<const double> p_grid, const ExperimentConfig& config, uint64_t seed);

// Expected-cost-minimizing rebate under the quadratic model:
//   p* = 2 a_r E[S] E[z] / (E[S] + 2 a_r E[S^2]),  S = sum_i 1/kappa_i.
double analytic_optimal_rebate(const ExperimentConfig& config);

// 50 points spanning [0, 4 * analytic optimum].
std::vector<double> default_rebate_grid(const ExperimentConfig& config);

}  // namespace drm
