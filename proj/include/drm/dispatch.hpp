#pragma once

#include <memory>
#include <span>
#include <vector>

#include "drm/model.hpp"

namespace drm {

// Outcome of the per-day curtailment program at fixed generator dispatch.
struct RealTimeSolution {
    std::vector<double> curtailments;  // pi_i, one per load
    double reserve = 0.0;              // g_r = z - g + sum_i (d̂_i - pi_i)
    double generator_cost_value = 0.0;
    double reserve_cost_value = 0.0;
    std::vector<double> load_costs;  // c_i(pi_i, reported type)
    double social_cost = 0.0;        // sum of the per-entity costs
};

// Minimizes c_r(g_r) + sum_i c_i(x_i, reported type) over curtailments.
// Quadratic families solve the KKT system in closed form (breakpoint search
// under box bounds); tabulated families are searched exhaustively on their
// integer grid. The balance identity is recomputed from the returned
// curtailments in load-index order so it holds exactly as stated.
RealTimeSolution solve_real_time(double z, double g, std::span<const int> reported_types,
                                 const TypeSpace& ts, const CostModel& costs, BoundsMode bounds);

struct ExpectedCost {
    double value = 0.0;
    double stderr_estimate = 0.0;  // 0 for the enumerate method
};

// Scheduled dispatch plus the expectations the payment rule needs.
struct DayAheadDecision {
    double g_star = 0.0;
    JointTypeModel reported_model;
    double w_star = 0.0;
    double w_star_stderr = 0.0;
    std::vector<double> expected_load_cost;  // E[c_i(pi*_i(z, δ̂), δ̂_i)] at g*
};

// Precomputes the scenario set for one reported model so that repeated
// evaluations (the 1-D dispatch search, the n leave-one-out solves) are
// cheap. On the monte-carlo path each load owns its own sample stream, so
// excluding a load leaves every other load's draws untouched (common random
// numbers across the leave-one-out systems).
class DayAheadSolver {
public:
    DayAheadSolver(const JointTypeModel& model, const NetDemandModel& z, const TypeSpace& ts,
                   const CostModel& costs, BoundsMode bounds, const ExpectationSpec& spec,
                   uint64_t mc_seed);
    ~DayAheadSolver();
    DayAheadSolver(DayAheadSolver&&) noexcept;
    DayAheadSolver& operator=(DayAheadSolver&&) noexcept;

    // Expected social cost at dispatch g, including the generator term.
    ExpectedCost expected(double g) const;

    DayAheadDecision solve() const;

    // Decision for the system with the given load fully removed.
    DayAheadDecision solve_excluding(int load) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ExpectedCost expected_social_cost(double g, const JointTypeModel& model, const NetDemandModel& z,
                                  const TypeSpace& ts, const CostModel& costs, BoundsMode bounds,
                                  const ExpectationSpec& spec, uint64_t mc_seed);

DayAheadDecision solve_day_ahead(const JointTypeModel& model, const NetDemandModel& z,
                                 const TypeSpace& ts, const CostModel& costs, BoundsMode bounds,
                                 const ExpectationSpec& spec, uint64_t mc_seed);

DayAheadDecision solve_day_ahead_excluding(const JointTypeModel& model, int excluded_load,
                                           const NetDemandModel& z, const TypeSpace& ts,
                                           const CostModel& costs, BoundsMode bounds,
                                           const ExpectationSpec& spec, uint64_t mc_seed);

}  // namespace drm
