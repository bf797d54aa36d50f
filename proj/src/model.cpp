#include "drm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace drm {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key, "missing required field");
    return *it;
}

double require_number(const nlohmann::json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

long require_integer(const nlohmann::json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
    return v.get<long>();
}

std::string require_string(const nlohmann::json& j, const char* key, const std::string& path) {
    const auto& v = require(j, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

std::vector<double> parse_prob_vector(const nlohmann::json& arr, size_t expected, const std::string& path) {
    if (!arr.is_array()) throw ConfigError(path, "expected an array of probabilities");
    std::vector<double> p = arr.get<std::vector<double>>();
    if (p.size() != expected)
        throw ConfigError(path, "expected " + std::to_string(expected) + " entries, got " + std::to_string(p.size()));
    double sum = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
        if (p[k] < 0.0) throw ConfigError(path + "[" + std::to_string(k) + "]", "probability is negative");
        sum += p[k];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError(path, "probabilities sum to " + fmt(sum));
    return p;
}

std::vector<int> parse_type_map(const nlohmann::json& m, const TypeSpace& ts, const std::string& path,
                                bool preserve_baseline) {
    if (!m.is_object()) throw ConfigError(path, "expected an object mapping type ids to type ids");
    std::vector<int> map(static_cast<size_t>(ts.size()));
    for (int k = 0; k < ts.size(); ++k) map[static_cast<size_t>(k)] = k;
    for (auto it = m.begin(); it != m.end(); ++it) {
        int from = ts.index_of(it.key());
        if (from < 0) throw ConfigError(path, "unknown type id '" + it.key() + "'");
        if (!it.value().is_string()) throw ConfigError(path + "." + it.key(), "expected a type id string");
        int to = ts.index_of(it.value().get<std::string>());
        if (to < 0) throw ConfigError(path + "." + it.key(), "image type '" + it.value().get<std::string>() + "' not in the type space");
        if (preserve_baseline && ts.type(from).baseline != ts.type(to).baseline)
            throw ConfigError(path + "." + it.key(), "cost-exaggerate map must preserve the baseline");
        map[static_cast<size_t>(from)] = to;
    }
    return map;
}

int inflate_target(const TypeSpace& ts, int from, int delta) {
    const LoadType& t = ts.type(from);
    int d = std::min(t.baseline + delta, ts.d_max);
    for (int k = 0; k < ts.size(); ++k)
        if (ts.type(k).baseline == d && ts.type(k).kappa == t.kappa) return k;
    return -1;
}

StrategySpec parse_strategy(const nlohmann::json& j, const TypeSpace& ts, const std::string& path, bool inner = false);

StrategySpec parse_strategy(const nlohmann::json& j, const TypeSpace& ts, const std::string& path, bool inner) {
    StrategySpec s;
    std::string kind = require_string(j, "kind", path);
    if (kind == "truthful") {
        s.kind = StrategySpec::Kind::Truthful;
        if (inner) throw ConfigError(path, "intermittent inner strategy must be a real-time misreport");
    } else if (kind == "dist-misreport") {
        if (inner) throw ConfigError(path, "dist-misreport cannot be an intermittent inner strategy");
        s.kind = StrategySpec::Kind::DistMisreport;
        s.reported.probs = parse_prob_vector(require(j, "report", path), static_cast<size_t>(ts.size()), path + ".report");
    } else if (kind == "type-misreport") {
        s.kind = StrategySpec::Kind::TypeMisreport;
        s.type_map = parse_type_map(require(j, "map", path), ts, path + ".map", false);
    } else if (kind == "cost-exaggerate") {
        s.kind = StrategySpec::Kind::CostExaggerate;
        s.type_map = parse_type_map(require(j, "map", path), ts, path + ".map", true);
    } else if (kind == "baseline-inflate") {
        s.kind = StrategySpec::Kind::BaselineInflate;
        long d = require_integer(j, "delta", path);
        if (d < 0) throw ConfigError(path + ".delta", "must be nonnegative");
        s.inflate_delta = static_cast<int>(d);
        s.type_map.resize(static_cast<size_t>(ts.size()));
        for (int k = 0; k < ts.size(); ++k) {
            int to = inflate_target(ts, k, s.inflate_delta);
            if (to < 0)
                throw ConfigError(path + ".delta", "inflated type (baseline " +
                                                       std::to_string(std::min(ts.type(k).baseline + s.inflate_delta, ts.d_max)) +
                                                       ", kappa " + fmt(ts.type(k).kappa) + ") absent from the type space");
            s.type_map[static_cast<size_t>(k)] = to;
        }
    } else if (kind == "intermittent") {
        if (inner) throw ConfigError(path, "intermittent strategies cannot nest");
        s.kind = StrategySpec::Kind::Intermittent;
        s.period = require_integer(j, "period", path);
        if (s.period < 1) throw ConfigError(path + ".period", "must be >= 1");
        StrategySpec in = parse_strategy(require(j, "inner", path), ts, path + ".inner", true);
        s.inner_kind = in.kind;
        s.inner_type_map = in.type_map;
        s.inner_inflate_delta = in.inflate_delta;
    } else {
        throw ConfigError(path + ".kind", "unknown strategy kind '" + kind + "'");
    }
    return s;
}

nlohmann::json strategy_to_json(const StrategySpec& s, const TypeSpace& ts);

nlohmann::json type_map_to_json(const std::vector<int>& map, const TypeSpace& ts) {
    nlohmann::json m = nlohmann::json::object();
    for (size_t k = 0; k < map.size(); ++k)
        if (map[k] != static_cast<int>(k)) m[ts.type(static_cast<int>(k)).id] = ts.type(map[k]).id;
    return m;
}

nlohmann::json strategy_to_json(const StrategySpec& s, const TypeSpace& ts) {
    using K = StrategySpec::Kind;
    nlohmann::json j;
    switch (s.kind) {
        case K::Truthful: j["kind"] = "truthful"; break;
        case K::DistMisreport:
            j["kind"] = "dist-misreport";
            j["report"] = s.reported.probs;
            break;
        case K::TypeMisreport:
            j["kind"] = "type-misreport";
            j["map"] = type_map_to_json(s.type_map, ts);
            break;
        case K::CostExaggerate:
            j["kind"] = "cost-exaggerate";
            j["map"] = type_map_to_json(s.type_map, ts);
            break;
        case K::BaselineInflate:
            j["kind"] = "baseline-inflate";
            j["delta"] = s.inflate_delta;
            break;
        case K::Intermittent: {
            j["kind"] = "intermittent";
            j["period"] = s.period;
            StrategySpec in;
            in.kind = s.inner_kind;
            in.type_map = s.inner_type_map;
            in.inflate_delta = s.inner_inflate_delta;
            j["inner"] = strategy_to_json(in, ts);
            break;
        }
    }
    return j;
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double generator_cost(const CostModel& m, double x) {
    switch (m.generator.kind) {
        case GeneratorCost::Kind::Disabled: return 0.0;
        case GeneratorCost::Kind::Quadratic: return m.generator.a * x * x;
        case GeneratorCost::Kind::Tabulated: {
            double r = std::round(x);
            if (std::abs(x - r) > 1e-9) throw std::domain_error("tabulated generator cost queried off its grid");
            long k = static_cast<long>(r) - m.generator.g_min;
            if (k < 0 || k >= static_cast<long>(m.generator.table.size()))
                throw std::domain_error("tabulated generator cost queried off its grid");
            return m.generator.table[static_cast<size_t>(k)];
        }
    }
    return 0.0;
}

double reserve_cost(const CostModel& m, double x) {
    if (m.reserve.kind == ReserveCost::Kind::Quadratic) return m.reserve.a * x * x;
    double r = std::round(x);
    if (std::abs(x - r) > 1e-9) throw std::domain_error("tabulated reserve cost queried off its grid");
    long k = static_cast<long>(r) - m.reserve.x_min;
    if (k < 0 || k >= static_cast<long>(m.reserve.table.size()))
        throw std::domain_error("tabulated reserve cost queried off its grid");
    return m.reserve.table[static_cast<size_t>(k)];
}

double load_cost(const CostModel& m, const LoadType& type, int type_index, double x) {
    if (m.load.kind == LoadCostFamily::Kind::Quadratic) return 0.5 * type.kappa * x * x;
    double r = std::round(x);
    if (std::abs(x - r) > 1e-9) throw std::domain_error("tabulated load cost queried off its grid");
    long k = static_cast<long>(r) - m.load.x_min;
    const auto& row = m.load.tables[static_cast<size_t>(type_index)];
    if (k < 0 || k >= static_cast<long>(row.size()))
        throw std::domain_error("tabulated load cost queried off its grid");
    return row[static_cast<size_t>(k)];
}

double enumeration_scenario_count(const ExperimentConfig& config) {
    const int t = config.type_space.size();
    double log_total = 0.0;
    for (const auto& g : config.loads) log_total += log_choose(g.count + t - 1, t - 1);
    if (log_total > 60.0) return 1e26;  // effectively infinite
    return std::exp(log_total);
}

ExperimentConfig validate_config(const nlohmann::json& raw) {
    if (!raw.is_object()) throw ConfigError("config", "expected a JSON object");
    ExperimentConfig c;

    c.seed = static_cast<uint64_t>(require_integer(raw, "seed", "config"));
    c.days = require_integer(raw, "days", "config");
    if (c.days < 1) throw ConfigError("config.days", "must be >= 1");

    std::string mode = require_string(raw, "mode", "config");
    if (mode == "explicit-baseline") c.mode = BaselineMode::ExplicitBaseline;
    else if (mode == "net-demand") c.mode = BaselineMode::NetDemand;
    else throw ConfigError("config.mode", "expected 'explicit-baseline' or 'net-demand'");

    std::string bounds = raw.value("curtailmentBounds", std::string("unconstrained"));
    if (bounds == "unconstrained") c.bounds = BoundsMode::Unconstrained;
    else if (bounds == "box") c.bounds = BoundsMode::Box;
    else throw ConfigError("config.curtailmentBounds", "expected 'unconstrained' or 'box'");

    std::string acct = raw.value("utilityAccounting", std::string("physical-reduction"));
    if (acct == "physical-reduction") c.accounting = UtilityAccounting::PhysicalReduction;
    else if (acct == "reported-curtailment") c.accounting = UtilityAccounting::ReportedCurtailment;
    else throw ConfigError("config.utilityAccounting", "expected 'physical-reduction' or 'reported-curtailment'");

    // Type space.
    {
        const auto& jts = require(raw, "typeSpace", "config");
        long dmax = require_integer(jts, "dMax", "config.typeSpace");
        if (dmax < 0) throw ConfigError("config.typeSpace.dMax", "must be >= 0");
        c.type_space.d_max = static_cast<int>(dmax);
        const auto& jtypes = require(jts, "types", "config.typeSpace");
        if (!jtypes.is_array() || jtypes.empty()) throw ConfigError("config.typeSpace.types", "must be a nonempty array");
        for (size_t k = 0; k < jtypes.size(); ++k) {
            const std::string path = "config.typeSpace.types[" + std::to_string(k) + "]";
            LoadType t;
            t.id = require_string(jtypes[k], "id", path);
            long b = require_integer(jtypes[k], "baseline", path);
            if (b < 0 || b > c.type_space.d_max)
                throw ConfigError(path + ".baseline", "baseline " + std::to_string(b) + " outside {0..dMax}");
            t.baseline = static_cast<int>(b);
            t.kappa = jtypes[k].value("kappa", 1.0);
            if (c.type_space.index_of(t.id) >= 0) throw ConfigError(path + ".id", "duplicate type id '" + t.id + "'");
            c.type_space.types.push_back(std::move(t));
        }
    }

    // Costs (needed before the kappa check picks the family).
    {
        const auto& jc = require(raw, "costs", "config");
        const auto& jg = require(jc, "generator", "config.costs");
        std::string gk = require_string(jg, "kind", "config.costs.generator");
        if (gk == "disabled") {
            c.costs.generator.kind = GeneratorCost::Kind::Disabled;
        } else if (gk == "quadratic") {
            c.costs.generator.kind = GeneratorCost::Kind::Quadratic;
            c.costs.generator.a = require_number(jg, "a", "config.costs.generator");
            if (c.costs.generator.a < 0) throw ConfigError("config.costs.generator.a", "must be >= 0");
        } else if (gk == "tabulated") {
            c.costs.generator.kind = GeneratorCost::Kind::Tabulated;
            c.costs.generator.g_min = static_cast<int>(require_integer(jg, "gMin", "config.costs.generator"));
            if (c.costs.generator.g_min < 0) throw ConfigError("config.costs.generator.gMin", "must be >= 0");
            c.costs.generator.table = require(jg, "values", "config.costs.generator").get<std::vector<double>>();
            if (c.costs.generator.table.empty()) throw ConfigError("config.costs.generator.values", "must be nonempty");
        } else {
            throw ConfigError("config.costs.generator.kind", "expected 'disabled', 'quadratic' or 'tabulated'");
        }

        const auto& jr = require(jc, "reserve", "config.costs");
        std::string rk = require_string(jr, "kind", "config.costs.reserve");
        if (rk == "quadratic") {
            c.costs.reserve.kind = ReserveCost::Kind::Quadratic;
            c.costs.reserve.a = require_number(jr, "a", "config.costs.reserve");
            if (c.costs.reserve.a < 0) throw ConfigError("config.costs.reserve.a", "must be >= 0");
        } else if (rk == "tabulated") {
            c.costs.reserve.kind = ReserveCost::Kind::Tabulated;
            c.costs.reserve.x_min = static_cast<int>(require_integer(jr, "xMin", "config.costs.reserve"));
            c.costs.reserve.table = require(jr, "values", "config.costs.reserve").get<std::vector<double>>();
            if (c.costs.reserve.table.empty()) throw ConfigError("config.costs.reserve.values", "must be nonempty");
        } else {
            throw ConfigError("config.costs.reserve.kind", "expected 'quadratic' or 'tabulated'");
        }

        const auto& jl = require(jc, "load", "config.costs");
        std::string lf = require_string(jl, "family", "config.costs.load");
        if (lf == "quadratic") {
            c.costs.load.kind = LoadCostFamily::Kind::Quadratic;
        } else if (lf == "tabulated") {
            c.costs.load.kind = LoadCostFamily::Kind::Tabulated;
            c.costs.load.x_min = static_cast<int>(require_integer(jl, "xMin", "config.costs.load"));
            c.costs.load.x_max = static_cast<int>(require_integer(jl, "xMax", "config.costs.load"));
            if (c.costs.load.x_min > 0 || c.costs.load.x_max < 0)
                throw ConfigError("config.costs.load", "curtailment grid must contain 0");
            const auto& jv = require(jl, "values", "config.costs.load");
            const size_t span = static_cast<size_t>(c.costs.load.x_max - c.costs.load.x_min + 1);
            c.costs.load.tables.resize(static_cast<size_t>(c.type_space.size()));
            for (int k = 0; k < c.type_space.size(); ++k) {
                const std::string& id = c.type_space.type(k).id;
                auto it = jv.find(id);
                if (it == jv.end()) throw ConfigError("config.costs.load.values", "missing table for type '" + id + "'");
                auto row = it->get<std::vector<double>>();
                if (row.size() != span)
                    throw ConfigError("config.costs.load.values." + id,
                                      "expected " + std::to_string(span) + " values, got " + std::to_string(row.size()));
                c.costs.load.tables[static_cast<size_t>(k)] = std::move(row);
            }
        } else {
            throw ConfigError("config.costs.load.family", "expected 'quadratic' or 'tabulated'");
        }
    }

    if (c.costs.load.kind == LoadCostFamily::Kind::Quadratic) {
        for (int k = 0; k < c.type_space.size(); ++k)
            if (!(c.type_space.type(k).kappa > 0.0))
                throw ConfigError("config.typeSpace.types[" + std::to_string(k) + "].kappa",
                                  "must be > 0 for the quadratic family");
    }

    if (c.mode == BaselineMode::NetDemand) {
        for (int k = 0; k < c.type_space.size(); ++k)
            if (c.type_space.type(k).baseline != 0)
                throw ConfigError("config.typeSpace.types[" + std::to_string(k) + "].baseline",
                                  "baselines must be 0 in net-demand mode");
        if (c.bounds != BoundsMode::Unconstrained)
            throw ConfigError("config.curtailmentBounds", "must be 'unconstrained' in net-demand mode");
    }

    // Net demand.
    {
        const auto& jz = require(raw, "netDemand", "config");
        std::string zk = require_string(jz, "kind", "config.netDemand");
        if (zk == "uniform") {
            c.net_demand.kind = NetDemandModel::Kind::Uniform;
            c.net_demand.lo = require_number(jz, "lo", "config.netDemand");
            c.net_demand.hi = require_number(jz, "hi", "config.netDemand");
            if (!(c.net_demand.lo < c.net_demand.hi))
                throw ConfigError("config.netDemand", "uniform support requires lo < hi");
        } else if (zk == "discrete") {
            c.net_demand.kind = NetDemandModel::Kind::Discrete;
            c.net_demand.values = require(jz, "values", "config.netDemand").get<std::vector<double>>();
            if (c.net_demand.values.empty()) throw ConfigError("config.netDemand.values", "must be nonempty");
            c.net_demand.probs =
                parse_prob_vector(require(jz, "probs", "config.netDemand"), c.net_demand.values.size(), "config.netDemand.probs");
        } else {
            throw ConfigError("config.netDemand.kind", "expected 'uniform' or 'discrete'");
        }
        if (c.costs.reserve.kind == ReserveCost::Kind::Tabulated && c.net_demand.kind == NetDemandModel::Kind::Uniform)
            throw ConfigError("config.costs.reserve", "tabulated reserve cost requires a discrete net demand on its grid");
        if (c.costs.reserve.kind == ReserveCost::Kind::Tabulated &&
            c.costs.load.kind != LoadCostFamily::Kind::Tabulated)
            throw ConfigError("config.costs.reserve",
                              "tabulated reserve cost requires the tabulated load family (grid search route)");
    }

    // Loads.
    {
        const auto& jl = require(raw, "loads", "config");
        if (!jl.is_array() || jl.empty()) throw ConfigError("config.loads", "must be a nonempty array");
        for (size_t g = 0; g < jl.size(); ++g) {
            const std::string path = "config.loads[" + std::to_string(g) + "]";
            LoadGroup grp;
            long count = require_integer(jl[g], "count", path);
            if (count < 1) throw ConfigError(path + ".count", "must be >= 1");
            grp.count = static_cast<int>(count);
            grp.distribution.probs =
                parse_prob_vector(require(jl[g], "distribution", path), static_cast<size_t>(c.type_space.size()),
                                  path + ".distribution");
            grp.strategy = parse_strategy(require(jl[g], "strategy", path), c.type_space, path + ".strategy");
            c.loads.push_back(std::move(grp));
        }
    }

    // Penalty schedule (all defaulted).
    {
        nlohmann::json jp = raw.value("penalty", nlohmann::json::object());
        c.penalty.gamma = jp.value("gamma", 1.0);
        c.penalty.threshold_multiplier = jp.value("thresholdMultiplier", 2.0);
        c.penalty.penalty_exponent = jp.value("penaltyExponent", 1.5);
        if (!(c.penalty.gamma > 0)) throw ConfigError("config.penalty.gamma", "must be > 0");
        if (!(c.penalty.threshold_multiplier >= 1.0))
            throw ConfigError("config.penalty.thresholdMultiplier", "must be >= 1");
        if (!(c.penalty.penalty_exponent > 1.0)) throw ConfigError("config.penalty.penaltyExponent", "must be > 1");
    }

    // Expectation method.
    {
        nlohmann::json je = raw.value("expectation", nlohmann::json::object());
        std::string method = je.value("method", std::string("enumerate"));
        c.expectation.z_nodes = je.value("zNodes", 256);
        if (c.expectation.z_nodes < 1) throw ConfigError("config.expectation.zNodes", "must be >= 1");
        if (method == "enumerate") {
            c.expectation.method = ExpectationSpec::Method::Enumerate;
            double scenarios = enumeration_scenario_count(c);
            if (scenarios > 1e6)
                throw ConfigError("config.expectation",
                                  "enumerate method needs <= 1e6 scenarios after group reduction, got ~" + fmt(scenarios));
        } else if (method == "monte-carlo") {
            c.expectation.method = ExpectationSpec::Method::MonteCarlo;
            c.expectation.samples = require_integer(je, "samples", "config.expectation");
            if (c.expectation.samples < 1) throw ConfigError("config.expectation.samples", "must be >= 1");
        } else {
            throw ConfigError("config.expectation.method", "expected 'enumerate' or 'monte-carlo'");
        }
    }

    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["days"] = c.days;
    j["mode"] = c.mode == BaselineMode::ExplicitBaseline ? "explicit-baseline" : "net-demand";
    j["curtailmentBounds"] = c.bounds == BoundsMode::Unconstrained ? "unconstrained" : "box";
    j["utilityAccounting"] =
        c.accounting == UtilityAccounting::PhysicalReduction ? "physical-reduction" : "reported-curtailment";

    nlohmann::json jts;
    jts["dMax"] = c.type_space.d_max;
    jts["types"] = nlohmann::json::array();
    for (const auto& t : c.type_space.types)
        jts["types"].push_back({{"id", t.id}, {"baseline", t.baseline}, {"kappa", t.kappa}});
    j["typeSpace"] = jts;

    j["loads"] = nlohmann::json::array();
    for (const auto& g : c.loads)
        j["loads"].push_back({{"count", g.count},
                              {"distribution", g.distribution.probs},
                              {"strategy", strategy_to_json(g.strategy, c.type_space)}});

    if (c.net_demand.kind == NetDemandModel::Kind::Uniform)
        j["netDemand"] = {{"kind", "uniform"}, {"lo", c.net_demand.lo}, {"hi", c.net_demand.hi}};
    else
        j["netDemand"] = {{"kind", "discrete"}, {"values", c.net_demand.values}, {"probs", c.net_demand.probs}};

    nlohmann::json jc;
    switch (c.costs.generator.kind) {
        case GeneratorCost::Kind::Disabled: jc["generator"] = {{"kind", "disabled"}}; break;
        case GeneratorCost::Kind::Quadratic: jc["generator"] = {{"kind", "quadratic"}, {"a", c.costs.generator.a}}; break;
        case GeneratorCost::Kind::Tabulated:
            jc["generator"] = {{"kind", "tabulated"}, {"gMin", c.costs.generator.g_min}, {"values", c.costs.generator.table}};
            break;
    }
    if (c.costs.reserve.kind == ReserveCost::Kind::Quadratic)
        jc["reserve"] = {{"kind", "quadratic"}, {"a", c.costs.reserve.a}};
    else
        jc["reserve"] = {{"kind", "tabulated"}, {"xMin", c.costs.reserve.x_min}, {"values", c.costs.reserve.table}};
    if (c.costs.load.kind == LoadCostFamily::Kind::Quadratic) {
        jc["load"] = {{"family", "quadratic"}};
    } else {
        nlohmann::json values = nlohmann::json::object();
        for (int k = 0; k < c.type_space.size(); ++k)
            values[c.type_space.type(k).id] = c.costs.load.tables[static_cast<size_t>(k)];
        jc["load"] = {{"family", "tabulated"}, {"xMin", c.costs.load.x_min}, {"xMax", c.costs.load.x_max}, {"values", values}};
    }
    j["costs"] = jc;

    j["penalty"] = {{"gamma", c.penalty.gamma},
                    {"thresholdMultiplier", c.penalty.threshold_multiplier},
                    {"penaltyExponent", c.penalty.penalty_exponent}};

    if (c.expectation.method == ExpectationSpec::Method::Enumerate)
        j["expectation"] = {{"method", "enumerate"}, {"zNodes", c.expectation.z_nodes}};
    else
        j["expectation"] = {{"method", "monte-carlo"}, {"samples", c.expectation.samples}, {"zNodes", c.expectation.z_nodes}};

    return j;
}

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b) {
    return to_json(a) == to_json(b);
}

void sample_day_into(const ExperimentConfig& config, Rng& rng, DaySample& out) {
    out.z = config.net_demand.sample(rng);
    out.types.resize(static_cast<size_t>(config.n_loads()));
    size_t i = 0;
    for (const auto& g : config.loads)
        for (int k = 0; k < g.count; ++k) out.types[i++] = rng.pick(g.distribution.probs);
}

DaySample sample_day(const ExperimentConfig& config, Rng& rng) {
    DaySample s;
    sample_day_into(config, rng, s);
    return s;
}

std::string describe(const StrategySpec& spec, const TypeSpace& ts) {
    using K = StrategySpec::Kind;
    auto map_str = [&](const std::vector<int>& map) {
        std::string s = "{";
        bool first = true;
        for (size_t k = 0; k < map.size(); ++k) {
            if (map[k] == static_cast<int>(k)) continue;
            if (!first) s += ",";
            s += ts.type(static_cast<int>(k)).id + "->" + ts.type(map[k]).id;
            first = false;
        }
        return s + "}";
    };
    switch (spec.kind) {
        case K::Truthful: return "truthful";
        case K::DistMisreport: {
            std::string s = "dist-misreport[";
            for (size_t k = 0; k < spec.reported.probs.size(); ++k) {
                if (k) s += ",";
                s += fmt(spec.reported.probs[k]);
            }
            return s + "]";
        }
        case K::TypeMisreport: return "type-misreport" + map_str(spec.type_map);
        case K::CostExaggerate: return "cost-exaggerate" + map_str(spec.type_map);
        case K::BaselineInflate: return "baseline-inflate(+" + std::to_string(spec.inflate_delta) + ")";
        case K::Intermittent: {
            StrategySpec in;
            in.kind = spec.inner_kind;
            in.type_map = spec.inner_type_map;
            in.inflate_delta = spec.inner_inflate_delta;
            return "intermittent(period=" + std::to_string(spec.period) + "," + describe(in, ts) + ")";
        }
    }
    return "?";
}

}  // namespace drm
