#include "drm/mechanism.hpp"

#include <cmath>
#include <stdexcept>

namespace drm {

namespace {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Position-keyed value for load j reporting type nu; eta keys are wrapping
// sums of these, so removing one load's contribution is a subtraction.
uint64_t position_mix(size_t j, int nu) {
    return mix64((static_cast<uint64_t>(j) << 20) ^ static_cast<uint64_t>(nu + 1));
}

}  // namespace

double first_stage_payment(double w_minus_i, double w_star, double expected_load_cost_i) {
    return w_minus_i - (w_star - expected_load_cost_i);
}

double second_stage_settlement(double realized_reported_cost, double expected_load_cost_i, bool event,
                               long day, const PenaltySchedule& schedule) {
    double v = realized_reported_cost - expected_load_cost_i;
    if (event) v -= schedule.penalty(day);
    return v;
}

PaymentRecord settle(double p1, double realized_reported_cost, double expected_load_cost_i, bool event,
                     long day, const PenaltySchedule& schedule) {
    PaymentRecord r;
    r.p1 = p1;
    r.p2 = second_stage_settlement(realized_reported_cost, expected_load_cost_i, event, day, schedule);
    r.penalized = event;
    r.total = r.p1 + r.p2;
    r.realized_reported_cost = realized_reported_cost;
    return r;
}

double day_utility(const PaymentRecord& payment, double true_curtailment_cost) {
    return payment.total - true_curtailment_cost;
}

RunningAverage long_run_average(std::span<const double> utilities) {
    if (utilities.empty()) throw std::invalid_argument("long_run_average: empty stream");
    const long L = static_cast<long>(utilities.size());
    const long tail_start = L - (L + 1) / 2 + 1;  // final ceil(L/2) days, 1-based
    RunningAverage out;
    out.tail_min = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (long l = 1; l <= L; ++l) {
        sum += utilities[static_cast<size_t>(l - 1)];
        const double mean = sum / static_cast<double>(l);
        if (l >= tail_start) out.tail_min = std::min(out.tail_min, mean);
    }
    out.mean = sum / static_cast<double>(L);
    return out;
}

DeviationTracker::DeviationTracker(std::vector<TypeDistribution> reported, int n_types)
    : n_types_(n_types) {
    loads_.resize(reported.size());
    for (size_t i = 0; i < reported.size(); ++i) {
        if (static_cast<int>(reported[i].probs.size()) != n_types)
            throw std::invalid_argument("reported distribution arity mismatch");
        loads_[i].reported = std::move(reported[i].probs);
        loads_[i].marginal.assign(static_cast<size_t>(n_types), 0);
    }
}

void DeviationTracker::touch_row(PerLoad& pl, uint64_t key, int type) {
    auto [it, fresh] = pl.row_of.try_emplace(key, static_cast<uint32_t>(pl.row_key.size()));
    if (fresh) {
        pl.row_key.push_back(key);
        pl.row_m.push_back(0);
        pl.row_counts.resize(pl.row_counts.size() + static_cast<size_t>(n_types_), 0);
        pl.row_maxabs.push_back(0.0);
    }
    const uint32_t r = it->second;
    pl.row_m[r] += 1;
    pl.row_counts[static_cast<size_t>(r) * static_cast<size_t>(n_types_) + static_cast<size_t>(type)] += 1;

    const double m = pl.row_m[r];
    const uint32_t* counts = &pl.row_counts[static_cast<size_t>(r) * static_cast<size_t>(n_types_)];
    double maxabs = 0.0;
    for (int t = 0; t < n_types_; ++t)
        maxabs = std::max(maxabs, std::abs(counts[t] - pl.reported[static_cast<size_t>(t)] * m));
    pl.row_maxabs[r] = maxabs;

    if (maxabs >= pl.sup_numer) {
        pl.sup_numer = maxabs;
        pl.argmax_row = r;
    } else if (r == pl.argmax_row) {
        // The maximizer itself shrank; rescan the cached row maxima.
        double best = 0.0;
        uint32_t arg = 0;
        for (size_t k = 0; k < pl.row_maxabs.size(); ++k)
            if (pl.row_maxabs[k] > best) {
                best = pl.row_maxabs[k];
                arg = static_cast<uint32_t>(k);
            }
        pl.sup_numer = best;
        pl.argmax_row = arg;
    }
}

void DeviationTracker::update(std::span<const int> reported_profile) {
    const size_t n = loads_.size();
    if (reported_profile.size() != n) throw std::invalid_argument("profile length mismatch");
    scratch_mix_.resize(n);
    uint64_t full = 0;
    for (size_t j = 0; j < n; ++j) {
        const int nu = reported_profile[j];
        if (nu < 0 || nu >= n_types_) throw std::invalid_argument("reported type outside the type space");
        scratch_mix_[j] = position_mix(j, nu);
        full += scratch_mix_[j];
    }
    days_ += 1;
    for (size_t i = 0; i < n; ++i) {
        PerLoad& pl = loads_[i];
        const int nu = reported_profile[i];
        pl.marginal[static_cast<size_t>(nu)] += 1;
        touch_row(pl, full - scratch_mix_[i], nu);
    }
}

long DeviationTracker::marginal_count(int load, int type) const {
    return loads_[static_cast<size_t>(load)].marginal[static_cast<size_t>(type)];
}

double DeviationTracker::f_stat(int load, int type) const {
    const PerLoad& pl = loads_[static_cast<size_t>(load)];
    return pl.marginal[static_cast<size_t>(type)] / static_cast<double>(days_) -
           pl.reported[static_cast<size_t>(type)];
}

double DeviationTracker::sup_f(int load) const {
    const PerLoad& pl = loads_[static_cast<size_t>(load)];
    double best = 0.0;
    for (int t = 0; t < n_types_; ++t)
        best = std::max(best, std::abs(pl.marginal[static_cast<size_t>(t)] / static_cast<double>(days_) -
                                       pl.reported[static_cast<size_t>(t)]));
    return best;
}

double DeviationTracker::sup_h(int load) const {
    return loads_[static_cast<size_t>(load)].sup_numer / static_cast<double>(days_);
}

bool DeviationTracker::penalty_event(int load, const PenaltySchedule& schedule) const {
    const double r = schedule.threshold(days_);
    return sup_f(load) >= r || sup_h(load) >= r;
}

size_t DeviationTracker::n_joint_rows(int load) const { return loads_[static_cast<size_t>(load)].row_key.size(); }

uint64_t DeviationTracker::joint_row_key(int load, size_t row) const {
    return loads_[static_cast<size_t>(load)].row_key[row];
}

long DeviationTracker::joint_row_m(int load, size_t row) const {
    return loads_[static_cast<size_t>(load)].row_m[row];
}

long DeviationTracker::joint_row_count(int load, size_t row, int type) const {
    return loads_[static_cast<size_t>(load)]
        .row_counts[row * static_cast<size_t>(n_types_) + static_cast<size_t>(type)];
}

}  // namespace drm
