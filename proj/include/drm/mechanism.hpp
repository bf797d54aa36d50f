#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "drm/model.hpp"

namespace drm {

// W*(theta_hat_{-i}) - [W*(theta_hat) - E[c_i]]: pay the load its
// externality-adjusted contribution to the planned social cost.
double first_stage_payment(double w_minus_i, double w_star, double expected_load_cost_i);

// [realized reported cost - E[c_i]] - J_p(l) when the deviation event holds.
double second_stage_settlement(double realized_reported_cost, double expected_load_cost_i, bool event,
                               long day, const PenaltySchedule& schedule);

struct PaymentRecord {
    double p1 = 0.0;
    double p2 = 0.0;
    bool penalized = false;
    double total = 0.0;  // p1 + p2
    double realized_reported_cost = 0.0;
};

PaymentRecord settle(double p1, double realized_reported_cost, double expected_load_cost_i, bool event,
                     long day, const PenaltySchedule& schedule);

double day_utility(const PaymentRecord& payment, double true_curtailment_cost);

struct RunningAverage {
    double mean = 0.0;
    double tail_min = 0.0;  // minimum running mean over the final half
};

RunningAverage long_run_average(std::span<const double> utilities);

// Running empirical-deviation statistics of the real-time reports against
// the day-ahead distribution bids.
//
//   f_{i,nu}(L)      = N_i(nu)/L - theta_hat_i(nu)
//   h_{i,nu,eta}(L)  = N_i(nu,eta)/L - theta_hat_i(nu) * M_{-i}(eta)/L
//
// Joint counts are sparse over observed others'-profiles eta; unobserved
// profiles have h identically zero (both terms vanish), so the sup over eta
// only ranges over observed rows. Rows are keyed by a commutative
// position-mixed 64-bit hash so that each day's n keys come from one O(n)
// pass.
class DeviationTracker {
public:
    DeviationTracker() = default;
    DeviationTracker(std::vector<TypeDistribution> reported, int n_types);

    // Incorporates one day's reported profile (length = number of loads).
    void update(std::span<const int> reported_profile);

    long day_count() const { return days_; }
    int n_loads() const { return static_cast<int>(loads_.size()); }
    int n_types() const { return n_types_; }

    long marginal_count(int load, int type) const;
    double f_stat(int load, int type) const;
    double sup_f(int load) const;
    double sup_h(int load) const;

    // sup_nu |f| >= r(l)  or  sup_{nu,eta} |h| >= r(l), at l = day_count().
    bool penalty_event(int load, const PenaltySchedule& schedule) const;

    // Joint-count audit access: rows of (eta key, M_{-i}(eta), N_i(nu,eta)).
    size_t n_joint_rows(int load) const;
    uint64_t joint_row_key(int load, size_t row) const;
    long joint_row_m(int load, size_t row) const;
    long joint_row_count(int load, size_t row, int type) const;

private:
    struct PerLoad {
        std::vector<double> reported;        // theta_hat_i
        std::vector<uint32_t> marginal;      // N_i(nu)
        std::unordered_map<uint64_t, uint32_t> row_of;
        std::vector<uint64_t> row_key;
        std::vector<uint32_t> row_m;         // M_{-i}(eta)
        std::vector<uint32_t> row_counts;    // N_i(nu,eta), row-major
        std::vector<double> row_maxabs;      // max_nu |N(nu,eta) - theta(nu) M(eta)|
        double sup_numer = 0.0;              // max over rows of row_maxabs
        uint32_t argmax_row = 0;
    };

    void touch_row(PerLoad& pl, uint64_t key, int type);

    std::vector<PerLoad> loads_;
    int n_types_ = 0;
    long days_ = 0;
    std::vector<uint64_t> scratch_mix_;
};

}  // namespace drm
