#include "drm/agents.hpp"

#include <stdexcept>

namespace drm {

namespace {

// Day-ahead report for a consistent per-type relabeling: the pushforward of
// the true distribution under the map. A load that relabels every
// realization the same way bids the distribution its reports will actually
// follow, so nothing in its report stream is statistically inconsistent.
TypeDistribution pushforward(const TypeDistribution& theta, const std::vector<int>& map) {
    TypeDistribution out;
    out.probs.assign(theta.probs.size(), 0.0);
    for (size_t t = 0; t < theta.probs.size(); ++t)
        out.probs[static_cast<size_t>(map[t])] += theta.probs[t];
    return out;
}

bool identity_map(const std::vector<int>& map) {
    for (size_t t = 0; t < map.size(); ++t)
        if (map[t] != static_cast<int>(t)) return false;
    return true;
}

std::vector<int> inflate_map(const TypeSpace& ts, int delta) {
    std::vector<int> map(static_cast<size_t>(ts.size()));
    for (int k = 0; k < ts.size(); ++k) {
        const int d = std::min(ts.type(k).baseline + delta, ts.d_max);
        int to = -1;
        for (int j = 0; j < ts.size(); ++j)
            if (ts.type(j).baseline == d && ts.type(j).kappa == ts.type(k).kappa) {
                to = j;
                break;
            }
        if (to < 0) throw std::invalid_argument("inflated type absent from the type space");
        map[static_cast<size_t>(k)] = to;
    }
    return map;
}

}  // namespace

Strategy make_strategy(const StrategySpec& spec, const TypeSpace& ts) {
    using K = StrategySpec::Kind;
    const int T = ts.size();
    auto check_map = [T](const std::vector<int>& map) {
        if (static_cast<int>(map.size()) != T) throw std::invalid_argument("strategy type map arity mismatch");
        for (int to : map)
            if (to < 0 || to >= T) throw std::invalid_argument("strategy type map image outside the type space");
    };

    Strategy s;
    s.spec = spec;
    switch (spec.kind) {
        case K::Truthful:
            s.day_ahead = [](const TypeDistribution& theta) { return theta; };
            s.real_time = [](const RealTimeContext& ctx, Rng&) { return ctx.true_type; };
            break;
        case K::DistMisreport: {
            if (static_cast<int>(spec.reported.probs.size()) != T)
                throw std::invalid_argument("dist-misreport report arity mismatch");
            TypeDistribution fixed = spec.reported;
            s.day_ahead = [fixed](const TypeDistribution&) { return fixed; };
            s.real_time = [](const RealTimeContext& ctx, Rng&) { return ctx.true_type; };
            break;
        }
        case K::TypeMisreport: {
            check_map(spec.type_map);
            std::vector<int> map = spec.type_map;
            s.day_ahead = [](const TypeDistribution& theta) { return theta; };
            s.real_time = [map](const RealTimeContext& ctx, Rng&) { return map[static_cast<size_t>(ctx.true_type)]; };
            break;
        }
        case K::BaselineInflate:
        case K::CostExaggerate: {
            std::vector<int> map = spec.kind == K::BaselineInflate && spec.type_map.empty()
                                       ? inflate_map(ts, spec.inflate_delta)
                                       : spec.type_map;
            check_map(map);
            s.day_ahead = [map](const TypeDistribution& theta) { return pushforward(theta, map); };
            s.real_time = [map](const RealTimeContext& ctx, Rng&) { return map[static_cast<size_t>(ctx.true_type)]; };
            break;
        }
        case K::Intermittent: {
            if (spec.period < 1) throw std::invalid_argument("intermittent period must be >= 1");
            std::vector<int> map = spec.inner_kind == K::BaselineInflate && spec.inner_type_map.empty()
                                       ? inflate_map(ts, spec.inner_inflate_delta)
                                       : spec.inner_type_map;
            check_map(map);
            const long period = spec.period;
            s.day_ahead = [](const TypeDistribution& theta) { return theta; };
            s.real_time = [map, period](const RealTimeContext& ctx, Rng&) {
                if (ctx.day % period == 0) return map[static_cast<size_t>(ctx.true_type)];
                return ctx.true_type;
            };
            break;
        }
    }
    return s;
}

bool is_truthful(const StrategySpec& spec) { return spec.kind == StrategySpec::Kind::Truthful; }

std::vector<std::string> strategy_warnings(const StrategySpec& spec, const TypeSpace& ts) {
    using K = StrategySpec::Kind;
    std::vector<std::string> out;
    switch (spec.kind) {
        case K::TypeMisreport:
        case K::CostExaggerate:
            if (identity_map(spec.type_map))
                out.push_back(describe(spec, ts) + " is behaviorally truthful (identity map) but not flagged truthful");
            break;
        case K::BaselineInflate:
            if (spec.inflate_delta == 0 || (!spec.type_map.empty() && identity_map(spec.type_map)))
                out.push_back(describe(spec, ts) + " is behaviorally truthful (no inflation possible) but not flagged truthful");
            break;
        case K::Intermittent:
            if (identity_map(spec.inner_type_map))
                out.push_back(describe(spec, ts) + " is behaviorally truthful (identity inner map) but not flagged truthful");
            break;
        default:
            break;
    }
    return out;
}

}  // namespace drm
