#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "drm/model.hpp"
#include "drm/rng.hpp"

namespace drm {

// Information available to a load's real-time policy on day `day`: its own
// realized types up to today, the dispatch outputs it has observed, and the
// scheduled generator dispatch. Nothing about other loads' reports.
struct RealTimeContext {
    long day = 0;                                 // 1-based
    int true_type = 0;                            // today's realization
    std::span<const int> own_type_history;        // days 1..day
    std::span<const double> own_past_curtailments;  // days 1..day-1 (may be empty if unretained)
    double g_star = 0.0;
};

// A strategy is a pair of fixed functions chosen before the type
// distribution is observed: the day-ahead distribution report sigma and the
// real-time type-report policy mu.
struct Strategy {
    StrategySpec spec;
    std::function<TypeDistribution(const TypeDistribution&)> day_ahead;
    std::function<int(const RealTimeContext&, Rng&)> real_time;
};

Strategy make_strategy(const StrategySpec& spec, const TypeSpace& ts);

// Exact truthfulness by kind; intermittent and map-based strategies are
// conservatively non-truthful even when behaviorally indistinguishable.
bool is_truthful(const StrategySpec& spec);

// Diagnostics such as a kind-based non-truthful spec whose maps are
// identities (behaviorally truthful).
std::vector<std::string> strategy_warnings(const StrategySpec& spec, const TypeSpace& ts);

}  // namespace drm
