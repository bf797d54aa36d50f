#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drm/agents.hpp"
#include "drm/dispatch.hpp"
#include "drm/mechanism.hpp"
#include "drm/model.hpp"

namespace drm {

// Full per-day ledger row.
struct DayRecord {
    long day = 0;
    double z = 0.0;
    std::vector<int> true_types;
    std::vector<int> reported_types;
    std::vector<double> curtailments;
    double reserve = 0.0;
    std::vector<double> consumptions;  // y_i = reported baseline - pi_i
    std::vector<PaymentRecord> payments;
    std::vector<double> utilities;
    double social_cost = 0.0;  // generator + reserve + true curtailment costs
};

struct SimulationResult {
    DayAheadDecision day_ahead;
    std::vector<double> w_minus;  // W*(theta_hat_{-i}) per load
    std::vector<double> p1;       // first-stage payment per load (every day)
    long days = 0;
    int n = 0;
    std::vector<double> mean_utility;
    std::vector<double> tail_min_utility;  // min running mean over the final half
    double mean_social_cost = 0.0;
    std::vector<double> penalty_fraction;       // penalized days / days
    std::vector<double> tail_penalty_fraction;  // over the final half
    DeviationTracker tracker;

    // Retained only with RunOptions::keep_series.
    std::vector<std::vector<double>> utility_series;  // [load][day]
    std::vector<double> social_cost_series;
    std::vector<std::vector<int>> report_log;  // [day][load]
};

struct RunOptions {
    std::string ledger_path;  // stream day records as CSV when nonempty
    bool keep_series = false;
    std::function<void(const DayRecord&)> on_day;  // audit hook
};

// The two-stage repeated game: one day-ahead solve from the reported
// distributions, then the daily loop of sampling, real-time reporting,
// dispatch, settlement and tracker update. Deterministic given
// (config, strategies, seed).
SimulationResult run(const ExperimentConfig& config, const std::vector<Strategy>& strategies,
                     const RunOptions& options = {});

// y_i equals the contracted consumption for every load, compared exactly.
bool audit_compliance(const DayRecord& record, const TypeSpace& ts);

extern const char* const kLedgerHeader;

struct SummaryMetrics {
    long days = 0;
    int n = 0;
    double g_star = 0.0;
    double w_star = 0.0;
    double mean_social_cost = 0.0;
    std::vector<double> mean_utility;
    std::vector<double> tail_min_utility;
    std::vector<double> w_minus;
    std::vector<double> p1;
    std::vector<double> hypothesis_gap;  // w_minus[i] - w_star
    std::vector<double> penalty_fraction;
    std::vector<double> tail_penalty_fraction;
};

// tail_fraction other than 0.5 needs keep_series (the engine tracks the
// default half-horizon tail on the fly).
SummaryMetrics summarize(const SimulationResult& result, double tail_fraction = 0.5);

nlohmann::json summary_to_json(const SummaryMetrics& m);

}  // namespace drm
