#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "drm/rng.hpp"

#include <json.hpp>

namespace drm {

// Raised by config validation; `field` names the offending config entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// One element of the finite type space: a baseline quantity (energy quanta)
// plus cost parameters. For the quadratic family the per-unit² coefficient
// is kappa; tabulated families carry their values in the cost model.
struct LoadType {
    std::string id;
    int baseline = 0;
    double kappa = 1.0;
};

struct TypeSpace {
    std::vector<LoadType> types;
    int d_max = 0;

    int size() const { return static_cast<int>(types.size()); }
    const LoadType& type(int k) const { return types[static_cast<size_t>(k)]; }
    // -1 when the id is unknown.
    int index_of(const std::string& id) const {
        for (size_t k = 0; k < types.size(); ++k)
            if (types[k].id == id) return static_cast<int>(k);
        return -1;
    }
};

// Probability vector over the type space.
struct TypeDistribution {
    std::vector<double> probs;

    bool operator==(const TypeDistribution&) const = default;
};

// Product model theta_1 x ... x theta_n over independent loads.
struct JointTypeModel {
    std::vector<TypeDistribution> per_load;

    int n_loads() const { return static_cast<int>(per_load.size()); }
};

// Distribution of the net demand z of the inelastic loads; days are IID.
struct NetDemandModel {
    enum class Kind { Uniform, Discrete };
    Kind kind = Kind::Uniform;
    double lo = 0.0, hi = 0.0;          // uniform support
    std::vector<double> values, probs;  // discrete support

    double sample(Rng& rng) const {
        if (kind == Kind::Uniform) return rng.uniform(lo, hi);
        return values[static_cast<size_t>(rng.pick(probs))];
    }
    double max_value() const {
        if (kind == Kind::Uniform) return hi;
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
    double mean() const {
        if (kind == Kind::Uniform) return 0.5 * (lo + hi);
        double s = 0.0;
        for (size_t k = 0; k < values.size(); ++k) s += probs[k] * values[k];
        return s;
    }
    // Integration nodes: composite-midpoint for uniform supports, the atoms
    // themselves for discrete ones.
    void nodes(int z_nodes, std::vector<double>& pts, std::vector<double>& wts) const {
        pts.clear();
        wts.clear();
        if (kind == Kind::Discrete) {
            pts = values;
            wts = probs;
            return;
        }
        const double h = (hi - lo) / z_nodes;
        pts.reserve(static_cast<size_t>(z_nodes));
        wts.assign(static_cast<size_t>(z_nodes), 1.0 / z_nodes);
        for (int k = 0; k < z_nodes; ++k) pts.push_back(lo + (k + 0.5) * h);
    }
};

struct GeneratorCost {
    enum class Kind { Disabled, Quadratic, Tabulated };
    Kind kind = Kind::Disabled;
    double a = 0.0;                 // c_g(x) = a x^2
    int g_min = 0;                  // tabulated grid start (integer dispatch)
    std::vector<double> table;      // values at g_min, g_min+1, ...
};

struct ReserveCost {
    enum class Kind { Quadratic, Tabulated };
    Kind kind = Kind::Quadratic;
    double a = 0.0;                 // c_r(x) = a x^2, defined on all reals
    int x_min = 0;
    std::vector<double> table;
};

// Per-type curtailment cost c_i(x, delta). The quadratic family evaluates
// (kappa/2) x^2 for all real x (negative x = over-consumption); tabulated
// families are defined on an integer grid only.
struct LoadCostFamily {
    enum class Kind { Quadratic, Tabulated };
    Kind kind = Kind::Quadratic;
    int x_min = 0, x_max = 0;                  // shared integer grid
    std::vector<std::vector<double>> tables;   // [type][x - x_min]
};

struct CostModel {
    GeneratorCost generator;
    ReserveCost reserve;
    LoadCostFamily load;

    bool closed_form() const {
        return generator.kind != GeneratorCost::Kind::Tabulated &&
               reserve.kind == ReserveCost::Kind::Quadratic &&
               load.kind == LoadCostFamily::Kind::Quadratic;
    }
};

double generator_cost(const CostModel& m, double x);
double reserve_cost(const CostModel& m, double x);
double load_cost(const CostModel& m, const LoadType& type, int type_index, double x);

// Threshold r(l) and penalty J_p(l) schedules. r shrinks like
// sqrt(log l / l) but no faster than the concentration bound; J_p grows
// superlinearly so that J_p(l)/l is unbounded.
struct PenaltySchedule {
    double gamma = 1.0;
    double threshold_multiplier = 2.0;
    double penalty_exponent = 1.5;

    double threshold(long l) const {
        const double t = std::log(2.0) + (1.0 + gamma) * std::log(static_cast<double>(l));
        return threshold_multiplier * std::sqrt(t / (2.0 * static_cast<double>(l)));
    }
    double penalty(long l) const { return std::pow(static_cast<double>(l), penalty_exponent); }
};

// Bidding behavior selector; behavior itself lives in agents.
struct StrategySpec {
    enum class Kind {
        Truthful,
        DistMisreport,    // day-ahead distribution fixed at `reported`; real time truthful
        TypeMisreport,    // day-ahead truthful; real time reports type_map[true type]
        BaselineInflate,  // consistently reports the type with baseline min(d+delta, d_max)
        CostExaggerate,   // consistently reports type_map[true type] (baseline-preserving)
        Intermittent      // applies the inner real-time misreport every `period`-th day
    };
    Kind kind = Kind::Truthful;
    TypeDistribution reported;   // DistMisreport
    std::vector<int> type_map;   // TypeMisreport / CostExaggerate (identity elsewhere)
    int inflate_delta = 0;       // BaselineInflate
    long period = 0;             // Intermittent
    Kind inner_kind = Kind::Truthful;  // Intermittent payload
    std::vector<int> inner_type_map;
    int inner_inflate_delta = 0;
};

struct LoadGroup {
    int count = 0;
    TypeDistribution distribution;
    StrategySpec strategy;
};

enum class BaselineMode { ExplicitBaseline, NetDemand };
enum class BoundsMode { Unconstrained, Box };  // box: 0 <= pi_i <= reported baseline
enum class UtilityAccounting { PhysicalReduction, ReportedCurtailment };

struct ExpectationSpec {
    enum class Method { Enumerate, MonteCarlo };
    Method method = Method::Enumerate;
    long samples = 0;     // Monte Carlo sample count
    int z_nodes = 256;    // quadrature nodes on uniform z supports
};

struct ExperimentConfig {
    uint64_t seed = 0;
    long days = 0;
    BaselineMode mode = BaselineMode::ExplicitBaseline;
    BoundsMode bounds = BoundsMode::Unconstrained;
    UtilityAccounting accounting = UtilityAccounting::PhysicalReduction;
    TypeSpace type_space;
    std::vector<LoadGroup> loads;
    NetDemandModel net_demand;
    CostModel costs;
    PenaltySchedule penalty;
    ExpectationSpec expectation;

    int n_loads() const {
        int n = 0;
        for (const auto& g : loads) n += g.count;
        return n;
    }
    // Group owning load i, loads numbered group by group.
    int group_of(int i) const {
        int base = 0;
        for (size_t g = 0; g < loads.size(); ++g) {
            base += loads[g].count;
            if (i < base) return static_cast<int>(g);
        }
        throw std::out_of_range("load index out of range");
    }
    const TypeDistribution& distribution_of(int i) const { return loads[static_cast<size_t>(group_of(i))].distribution; }
    JointTypeModel true_model() const {
        JointTypeModel m;
        for (const auto& g : loads)
            for (int k = 0; k < g.count; ++k) m.per_load.push_back(g.distribution);
        return m;
    }
};

// Parses and validates a config document; fills defaults (gamma=1,
// thresholdMultiplier=2, penaltyExponent=1.5, zNodes=256). Throws
// ConfigError naming the violated invariant.
ExperimentConfig validate_config(const nlohmann::json& raw);

// Canonical serialization; validate_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& c);

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b);

// One day's environment realization.
struct DaySample {
    double z = 0.0;
    std::vector<int> types;  // true type index per load
};

// Draws z then each load's type in index order from the given stream.
DaySample sample_day(const ExperimentConfig& config, Rng& rng);
void sample_day_into(const ExperimentConfig& config, Rng& rng, DaySample& out);

// Scenario count of the enumerate expectation method after collapsing
// exchangeable loads within a group (multiset enumeration).
double enumeration_scenario_count(const ExperimentConfig& config);

std::string describe(const StrategySpec& spec, const TypeSpace& ts);

}  // namespace drm
