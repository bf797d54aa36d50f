#include "drm/engine.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "drm/csv.hpp"

namespace drm {

const char* const kLedgerHeader =
    "day,z,load_id,true_type,reported_type,curtailment,consumption,p1,p2,penalty,utility,social_cost";

namespace {

void write_ledger_rows(std::ofstream& out, const DayRecord& rec, const TypeSpace& ts) {
    std::string line;
    for (size_t i = 0; i < rec.true_types.size(); ++i) {
        line.clear();
        line += std::to_string(rec.day);
        line += ',';
        append_double(line, rec.z);
        line += ',';
        line += std::to_string(i);
        line += ',';
        line += ts.type(rec.true_types[i]).id;
        line += ',';
        line += ts.type(rec.reported_types[i]).id;
        line += ',';
        append_double(line, rec.curtailments[i]);
        line += ',';
        append_double(line, rec.consumptions[i]);
        line += ',';
        append_double(line, rec.payments[i].p1);
        line += ',';
        append_double(line, rec.payments[i].p2);
        line += ',';
        line += rec.payments[i].penalized ? '1' : '0';
        line += ',';
        append_double(line, rec.utilities[i]);
        line += ',';
        append_double(line, rec.social_cost);
        line += '\n';
        out << line;
    }
}

}  // namespace

SimulationResult run(const ExperimentConfig& config, const std::vector<Strategy>& strategies,
                     const RunOptions& options) {
    const int n = config.n_loads();
    const long L = config.days;
    if (L < 1) throw std::invalid_argument("horizon must be at least one day");
    if (static_cast<int>(strategies.size()) != n)
        throw std::invalid_argument("expected one strategy per load");
    const TypeSpace& ts = config.type_space;
    const int T = ts.size();

    // Phase 1: collect distribution reports and solve the day-ahead program.
    std::vector<TypeDistribution> reported_dists(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        reported_dists[static_cast<size_t>(i)] = strategies[static_cast<size_t>(i)].day_ahead(config.distribution_of(i));
        double sum = 0.0;
        for (double p : reported_dists[static_cast<size_t>(i)].probs) {
            if (p < 0.0) throw std::runtime_error("strategy reported a negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("strategy reported a non-normalized distribution");
    }
    JointTypeModel reported_model{reported_dists};

    Rng root(config.seed);
    const uint64_t mc_seed = root.fork("day-ahead-mc").next_u64();
    DayAheadSolver solver(reported_model, config.net_demand, ts, config.costs, config.bounds,
                          config.expectation, mc_seed);

    SimulationResult res;
    res.day_ahead = solver.solve();
    res.days = L;
    res.n = n;
    const double g_star = res.day_ahead.g_star;

    // Leave-one-out social costs, cached per config group (members report
    // identically, so the reduced systems coincide).
    res.w_minus.assign(static_cast<size_t>(n), 0.0);
    {
        int base = 0;
        for (const auto& group : config.loads) {
            const DayAheadDecision excl = solver.solve_excluding(base);
            for (int k = 0; k < group.count; ++k) res.w_minus[static_cast<size_t>(base + k)] = excl.w_star;
            base += group.count;
        }
    }
    res.p1.assign(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        res.p1[static_cast<size_t>(i)] =
            first_stage_payment(res.w_minus[static_cast<size_t>(i)], res.day_ahead.w_star,
                                res.day_ahead.expected_load_cost[static_cast<size_t>(i)]);

    res.tracker = DeviationTracker(reported_dists, T);

    Rng env = root.fork("env");
    std::vector<Rng> strat_rng;
    strat_rng.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) strat_rng.push_back(root.fork("strategy", static_cast<uint64_t>(i)));

    const bool retain_curtailments = static_cast<size_t>(n) * static_cast<size_t>(L) <= 20000000u;
    std::vector<std::vector<int>> type_history(static_cast<size_t>(n));
    std::vector<std::vector<double>> curtailment_history(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        type_history[static_cast<size_t>(i)].reserve(static_cast<size_t>(L));
        if (retain_curtailments) curtailment_history[static_cast<size_t>(i)].reserve(static_cast<size_t>(L));
    }

    std::ofstream ledger;
    if (!options.ledger_path.empty()) {
        ledger.open(options.ledger_path, std::ios::trunc);
        if (!ledger) throw std::runtime_error("cannot open ledger file " + options.ledger_path);
        ledger << kLedgerHeader << '\n';
    }
    const bool want_record = ledger.is_open() || static_cast<bool>(options.on_day);

    if (options.keep_series) {
        res.utility_series.assign(static_cast<size_t>(n), {});
        for (auto& s : res.utility_series) s.reserve(static_cast<size_t>(L));
        res.social_cost_series.reserve(static_cast<size_t>(L));
        res.report_log.reserve(static_cast<size_t>(L));
    }

    std::vector<double> utility_sum(static_cast<size_t>(n), 0.0);
    std::vector<long> penalty_days(static_cast<size_t>(n), 0), tail_penalty_days(static_cast<size_t>(n), 0);
    res.tail_min_utility.assign(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
    double social_sum = 0.0;
    const long tail_start = L - (L + 1) / 2 + 1;  // final ceil(L/2) days

    DaySample day;
    std::vector<int> reports(static_cast<size_t>(n));
    DayRecord rec;
    const auto& ec = res.day_ahead.expected_load_cost;

    for (long l = 1; l <= L; ++l) {
        sample_day_into(config, env, day);

        for (int i = 0; i < n; ++i) {
            auto& hist = type_history[static_cast<size_t>(i)];
            hist.push_back(day.types[static_cast<size_t>(i)]);
            RealTimeContext ctx;
            ctx.day = l;
            ctx.true_type = day.types[static_cast<size_t>(i)];
            ctx.own_type_history = hist;
            ctx.own_past_curtailments = curtailment_history[static_cast<size_t>(i)];
            ctx.g_star = g_star;
            const int rep = strategies[static_cast<size_t>(i)].real_time(ctx, strat_rng[static_cast<size_t>(i)]);
            if (rep < 0 || rep >= T) throw std::runtime_error("strategy reported a type outside the type space");
            reports[static_cast<size_t>(i)] = rep;
        }

        RealTimeSolution sol = solve_real_time(day.z, g_star, reports, ts, config.costs, config.bounds);

        res.tracker.update(reports);

        double social = sol.generator_cost_value + sol.reserve_cost_value;
        if (want_record) {
            rec.day = l;
            rec.z = day.z;
            rec.true_types = day.types;
            rec.reported_types = reports;
            rec.curtailments = sol.curtailments;
            rec.reserve = sol.reserve;
            rec.consumptions.resize(static_cast<size_t>(n));
            rec.payments.resize(static_cast<size_t>(n));
            rec.utilities.resize(static_cast<size_t>(n));
        }
        for (int i = 0; i < n; ++i) {
            const size_t si = static_cast<size_t>(i);
            const int true_type = day.types[si];
            const int rep_type = reports[si];
            const double pi = sol.curtailments[si];
            const bool event = res.tracker.penalty_event(i, config.penalty);
            const PaymentRecord pay = settle(res.p1[si], sol.load_costs[si], ec[si], event, l, config.penalty);

            const double reduction = config.accounting == UtilityAccounting::PhysicalReduction
                                         ? pi - (ts.type(rep_type).baseline - ts.type(true_type).baseline)
                                         : pi;
            const double true_cost = load_cost(config.costs, ts.type(true_type), true_type, reduction);
            const double u = day_utility(pay, true_cost);

            social += true_cost;
            utility_sum[si] += u;
            if (event) {
                penalty_days[si] += 1;
                if (l >= tail_start) tail_penalty_days[si] += 1;
            }
            const double running = utility_sum[si] / static_cast<double>(l);
            if (l >= tail_start)
                res.tail_min_utility[si] = std::min(res.tail_min_utility[si], running);

            if (retain_curtailments) curtailment_history[si].push_back(pi);
            if (options.keep_series) res.utility_series[si].push_back(u);
            if (want_record) {
                rec.consumptions[si] = ts.type(rep_type).baseline - pi;
                rec.payments[si] = pay;
                rec.utilities[si] = u;
            }
        }
        social_sum += social;
        if (options.keep_series) {
            res.social_cost_series.push_back(social);
            res.report_log.push_back(reports);
        }
        if (want_record) {
            rec.social_cost = social;
            if (ledger.is_open()) write_ledger_rows(ledger, rec, ts);
            if (options.on_day) options.on_day(rec);
        }
    }

    res.mean_utility.resize(static_cast<size_t>(n));
    res.penalty_fraction.resize(static_cast<size_t>(n));
    res.tail_penalty_fraction.resize(static_cast<size_t>(n));
    const long tail_days = L - (tail_start - 1);
    for (int i = 0; i < n; ++i) {
        const size_t si = static_cast<size_t>(i);
        res.mean_utility[si] = utility_sum[si] / static_cast<double>(L);
        res.penalty_fraction[si] = static_cast<double>(penalty_days[si]) / static_cast<double>(L);
        res.tail_penalty_fraction[si] = static_cast<double>(tail_penalty_days[si]) / static_cast<double>(tail_days);
    }
    res.mean_social_cost = social_sum / static_cast<double>(L);
    return res;
}

bool audit_compliance(const DayRecord& record, const TypeSpace& ts) {
    for (size_t i = 0; i < record.consumptions.size(); ++i) {
        const double contracted =
            static_cast<double>(ts.type(record.reported_types[i]).baseline) - record.curtailments[i];
        if (record.consumptions[i] != contracted) return false;
    }
    return true;
}

SummaryMetrics summarize(const SimulationResult& result, double tail_fraction) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
        throw std::invalid_argument("tail fraction must lie in (0, 1]");
    SummaryMetrics m;
    m.days = result.days;
    m.n = result.n;
    m.g_star = result.day_ahead.g_star;
    m.w_star = result.day_ahead.w_star;
    m.mean_social_cost = result.mean_social_cost;
    m.mean_utility = result.mean_utility;
    m.w_minus = result.w_minus;
    m.p1 = result.p1;
    m.penalty_fraction = result.penalty_fraction;
    m.tail_penalty_fraction = result.tail_penalty_fraction;
    m.hypothesis_gap.resize(result.w_minus.size());
    for (size_t i = 0; i < result.w_minus.size(); ++i) m.hypothesis_gap[i] = result.w_minus[i] - result.day_ahead.w_star;

    const bool default_tail = std::abs(tail_fraction - 0.5) < 1e-12;
    if (default_tail) {
        m.tail_min_utility = result.tail_min_utility;
    } else {
        if (result.utility_series.empty())
            throw std::invalid_argument("non-default tail fraction requires keep_series");
        const long L = result.days;
        const long tail_days = std::max<long>(1, static_cast<long>(std::ceil(tail_fraction * static_cast<double>(L))));
        const long tail_start = L - tail_days + 1;
        m.tail_min_utility.assign(static_cast<size_t>(result.n), std::numeric_limits<double>::infinity());
        for (int i = 0; i < result.n; ++i) {
            double sum = 0.0;
            const auto& series = result.utility_series[static_cast<size_t>(i)];
            for (long l = 1; l <= L; ++l) {
                sum += series[static_cast<size_t>(l - 1)];
                if (l >= tail_start)
                    m.tail_min_utility[static_cast<size_t>(i)] =
                        std::min(m.tail_min_utility[static_cast<size_t>(i)], sum / static_cast<double>(l));
            }
        }
    }
    return m;
}

nlohmann::json summary_to_json(const SummaryMetrics& m) {
    nlohmann::json j;
    j["days"] = m.days;
    j["n"] = m.n;
    j["gStar"] = m.g_star;
    j["wStar"] = m.w_star;
    j["meanSocialCost"] = m.mean_social_cost;
    j["meanUtility"] = m.mean_utility;
    j["tailMinUtility"] = m.tail_min_utility;
    j["wMinus"] = m.w_minus;
    j["p1"] = m.p1;
    j["hypothesisGap"] = m.hypothesis_gap;
    j["penaltyFraction"] = m.penalty_fraction;
    j["tailPenaltyFraction"] = m.tail_penalty_fraction;
    return j;
}

}  // namespace drm
