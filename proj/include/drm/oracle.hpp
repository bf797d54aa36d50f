#pragma once

#include <span>
#include <string>
#include <vector>

#include "drm/dispatch.hpp"
#include "drm/engine.hpp"
#include "drm/model.hpp"

namespace drm {
namespace oracle {

// Exhaustive grid minimum of the real-time program; the reference the
// dispatch solver is tested against. The per-load grid spans
// [min(0, z_net) - d_max, max(0, z_net) + d_max] at grid_step (intersected
// with the box when bounded).
RealTimeSolution brute_force_real_time(double z, double g, std::span<const int> reported_types,
                                       const TypeSpace& ts, const CostModel& costs, BoundsMode bounds,
                                       double grid_step);

// Probability-weighted sum over every (z atom, full type profile) scenario
// of the inner optimum. Enumerates raw profiles without any symmetry
// reduction, so it is an independent route to the enumerate expectation.
double exact_expectation(double g, const JointTypeModel& model, const NetDemandModel& z,
                         const TypeSpace& ts, const CostModel& costs, BoundsMode bounds);

struct DeviationEntry {
    StrategySpec spec;
    std::string label;
    bool truthful = false;
    bool persistent = false;  // misreports on a non-vanishing fraction of days
    std::vector<double> mean_utility;      // per seed
    std::vector<double> tail_min_utility;  // per seed
    std::vector<double> penalty_fraction;  // per seed
    double mean = 0.0;
    double stderr_mean = 0.0;  // across seeds
    double gap_to_truthful = 0.0;
};

struct DeviationReport {
    std::vector<DeviationEntry> entries;
    long horizon = 0;
    std::vector<uint64_t> seeds;
    int focal_load = 0;
};

// Runs the full engine for every candidate strategy of load 0 (all other
// loads truthful) on the common per-seed sample path, and reports utility
// statistics against the truthful anchor.
DeviationReport enumerate_deviations(const ExperimentConfig& small_game,
                                     std::span<const StrategySpec> candidates, long horizon,
                                     std::span<const uint64_t> seeds);

// Brute-force recount of the deviation statistics from a raw report log
// prefix, keyed by the actual others'-profiles (no hashing).
struct TrackerRecount {
    std::vector<long> marginal;  // per type
    double sup_f = 0.0;
    double sup_h = 0.0;
};
TrackerRecount recount_tracker(std::span<const std::vector<int>> report_log, long upto_day, int load,
                               const TypeDistribution& reported);

}  // namespace oracle
}  // namespace drm
