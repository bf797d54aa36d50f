#include "drm/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace drm {

namespace {

// Inner optimum on a type-count profile (quadratic families only). Loads of
// equal type are interchangeable here, so the solution is per type.
struct InnerByType {
    double cost = 0.0;  // reserve + load costs, generator term excluded
    std::vector<double> x_by_type;
    std::vector<double> cost_by_type;  // per single load of that type
};

// Unconstrained KKT: kappa_nu * x_nu = c_r'(g_r) = 2a g_r with
// g_r = z_net / (1 + 2aS), S = sum counts_nu / kappa_nu.
void solve_quadratic_unconstrained(double z_net, std::span<const int> counts, const TypeSpace& ts,
                                   double a, InnerByType& out) {
    const int T = ts.size();
    double S = 0.0;
    for (int t = 0; t < T; ++t)
        if (counts[static_cast<size_t>(t)] > 0) S += counts[static_cast<size_t>(t)] / ts.type(t).kappa;
    const double g_r = z_net / (1.0 + 2.0 * a * S);
    const double lambda = 2.0 * a * g_r;
    out.x_by_type.assign(static_cast<size_t>(T), 0.0);
    out.cost_by_type.assign(static_cast<size_t>(T), 0.0);
    double total = a * g_r * g_r;
    for (int t = 0; t < T; ++t) {
        if (counts[static_cast<size_t>(t)] == 0) continue;
        const double x = lambda / ts.type(t).kappa;
        const double c = 0.5 * ts.type(t).kappa * x * x;
        out.x_by_type[static_cast<size_t>(t)] = x;
        out.cost_by_type[static_cast<size_t>(t)] = c;
        total += counts[static_cast<size_t>(t)] * c;
    }
    out.cost = total;
}

// Box-constrained KKT (0 <= x_nu <= baseline): x_nu = clamp(lambda/kappa_nu)
// with lambda solving sum_nu m_nu clamp(lambda/kappa_nu, 0, b_nu) = z_net -
// lambda/(2a). The left side is piecewise linear in lambda; walk its
// breakpoints.
void solve_quadratic_box(double z_net, std::span<const int> counts, const TypeSpace& ts, double a,
                         InnerByType& out) {
    const int T = ts.size();
    out.x_by_type.assign(static_cast<size_t>(T), 0.0);
    out.cost_by_type.assign(static_cast<size_t>(T), 0.0);
    double lambda = 0.0;
    if (z_net > 0.0 && a > 0.0) {
        struct Item {
            double bp;
            int type;
        };
        std::vector<Item> items;
        double active_S = 0.0;
        for (int t = 0; t < T; ++t) {
            const int m = counts[static_cast<size_t>(t)];
            if (m == 0 || ts.type(t).baseline == 0) continue;
            items.push_back({ts.type(t).kappa * ts.type(t).baseline, t});
            active_S += m / ts.type(t).kappa;
        }
        std::sort(items.begin(), items.end(), [](const Item& u, const Item& v) {
            return u.bp < v.bp || (u.bp == v.bp && u.type < v.type);
        });
        double capped = 0.0;
        double lo = 0.0;
        const double inv2a = 1.0 / (2.0 * a);
        for (size_t k = 0; k <= items.size(); ++k) {
            const double hi = k < items.size() ? items[k].bp : std::numeric_limits<double>::infinity();
            const double cand = (z_net - capped) / (active_S + inv2a);
            if (cand >= lo - 1e-12 && cand <= hi + 1e-12) {
                lambda = std::max(cand, 0.0);
                break;
            }
            if (k < items.size()) {
                const int t = items[k].type;
                const int m = counts[static_cast<size_t>(t)];
                active_S -= m / ts.type(t).kappa;
                capped += static_cast<double>(m) * ts.type(t).baseline;
                lo = hi;
            }
        }
    }
    double curtailed = 0.0;
    for (int t = 0; t < T; ++t) {
        const int m = counts[static_cast<size_t>(t)];
        if (m == 0) continue;
        const double x = std::clamp(lambda / ts.type(t).kappa, 0.0, static_cast<double>(ts.type(t).baseline));
        out.x_by_type[static_cast<size_t>(t)] = x;
        out.cost_by_type[static_cast<size_t>(t)] = 0.5 * ts.type(t).kappa * x * x;
        curtailed += m * x;
    }
    const double g_r = z_net - curtailed;
    double total = a * g_r * g_r;
    for (int t = 0; t < T; ++t)
        total += counts[static_cast<size_t>(t)] * out.cost_by_type[static_cast<size_t>(t)];
    out.cost = total;
}

void solve_inner_counts(double z_net, std::span<const int> counts, const TypeSpace& ts,
                        const CostModel& costs, BoundsMode bounds, InnerByType& out) {
    if (costs.reserve.kind != ReserveCost::Kind::Quadratic || costs.load.kind != LoadCostFamily::Kind::Quadratic)
        throw std::logic_error("counts-based inner solve requires quadratic families");
    if (bounds == BoundsMode::Unconstrained)
        solve_quadratic_unconstrained(z_net, counts, ts, costs.reserve.a, out);
    else
        solve_quadratic_box(z_net, counts, ts, costs.reserve.a, out);
}

// Exhaustive search over the integer curtailment grid; the only route for
// tabulated families.
RealTimeSolution solve_real_time_grid(double z, double g, std::span<const int> types, const TypeSpace& ts,
                                      const CostModel& costs, BoundsMode bounds) {
    const size_t n = types.size();
    std::vector<long> lo(n), hi(n);
    double total_points = 1.0;
    for (size_t i = 0; i < n; ++i) {
        long l = costs.load.x_min, h = costs.load.x_max;
        if (bounds == BoundsMode::Box) {
            l = std::max<long>(l, 0);
            h = std::min<long>(h, ts.type(types[i]).baseline);
        }
        if (l > h) throw std::runtime_error("empty curtailment grid for load " + std::to_string(i));
        lo[i] = l;
        hi[i] = h;
        total_points *= static_cast<double>(h - l + 1);
    }
    if (total_points > 5e6) throw std::runtime_error("tabulated curtailment search space too large");

    std::vector<long> x(lo);
    RealTimeSolution best;
    best.social_cost = std::numeric_limits<double>::infinity();
    std::vector<double> xs(n), cs(n);
    const double cg = generator_cost(costs, g);
    while (true) {
        double mismatch = 0.0, load_total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            xs[i] = static_cast<double>(x[i]);
            cs[i] = load_cost(costs, ts.type(types[i]), types[i], xs[i]);
            mismatch += ts.type(types[i]).baseline - xs[i];
            load_total += cs[i];
        }
        const double g_r = z - g + mismatch;
        const double cost = cg + reserve_cost(costs, g_r) + load_total;
        if (cost < best.social_cost) {
            best.curtailments = xs;
            best.load_costs = cs;
            best.reserve = g_r;
            best.generator_cost_value = cg;
            best.reserve_cost_value = cost - cg - load_total;
            best.social_cost = cost;
        }
        size_t k = 0;
        while (k < n && ++x[k] > hi[k]) {
            x[k] = lo[k];
            ++k;
        }
        if (k == n) break;
    }
    return best;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

RealTimeSolution solve_real_time(double z, double g, std::span<const int> reported_types,
                                 const TypeSpace& ts, const CostModel& costs, BoundsMode bounds) {
    if (costs.load.kind == LoadCostFamily::Kind::Tabulated ||
        costs.reserve.kind == ReserveCost::Kind::Tabulated)
        return solve_real_time_grid(z, g, reported_types, ts, costs, bounds);

    const size_t n = reported_types.size();
    std::vector<int> counts(static_cast<size_t>(ts.size()), 0);
    double baseline_sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        counts[static_cast<size_t>(reported_types[i])]++;
        baseline_sum += ts.type(reported_types[i]).baseline;
    }
    InnerByType inner;
    solve_inner_counts(z - g + baseline_sum, counts, ts, costs, bounds, inner);

    RealTimeSolution sol;
    sol.curtailments.resize(n);
    sol.load_costs.resize(n);
    double load_total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sol.curtailments[i] = inner.x_by_type[static_cast<size_t>(reported_types[i])];
        sol.load_costs[i] = inner.cost_by_type[static_cast<size_t>(reported_types[i])];
        load_total += sol.load_costs[i];
    }
    // Balance recomputed from the final curtailments, in index order.
    double mismatch = 0.0;
    for (size_t i = 0; i < n; ++i) mismatch += ts.type(reported_types[i]).baseline - sol.curtailments[i];
    sol.reserve = z - g + mismatch;
    sol.generator_cost_value = generator_cost(costs, g);
    sol.reserve_cost_value = reserve_cost(costs, sol.reserve);
    sol.social_cost = sol.generator_cost_value + sol.reserve_cost_value + load_total;
    return sol;
}

// ---------------------------------------------------------------------------
// Expected-cost evaluator.

struct DayAheadSolver::Impl {
    JointTypeModel model;
    NetDemandModel zmodel;
    TypeSpace ts;
    CostModel costs;
    BoundsMode bounds;
    ExpectationSpec spec;
    uint64_t mc_seed;

    struct Group {
        TypeDistribution dist;
        std::vector<int> members;
    };
    std::vector<Group> groups;
    int T = 0;
    bool closed = false;  // quadratic + unconstrained: analytic inner optimum

    // Scenario tables (enumerate: weighted type-count profiles; monte-carlo:
    // per-sample draws). counts is scenario-major [s][group][type].
    std::vector<double> weight;
    std::vector<uint16_t> counts;
    std::vector<double> S, D;
    std::vector<double> z_sample;          // MC only
    std::vector<uint16_t> rep_type;        // MC only: [s][group], first member's draw
    std::vector<double> z_pts, z_wts;      // enumerate only
    double m0 = 1.0, m1 = 0.0, m2 = 0.0;   // z moments under the integration rule
    double q2 = 0.0, q1 = 0.0, q0 = 0.0;   // closed path: inner(g) = q2 g² + q1 g + q0

    Impl(const JointTypeModel& m, const NetDemandModel& z, const TypeSpace& typespace, const CostModel& c,
         BoundsMode b, const ExpectationSpec& e, uint64_t seed)
        : model(m), zmodel(z), ts(typespace), costs(c), bounds(b), spec(e), mc_seed(seed) {
        T = ts.size();
        if (T > 255) throw std::runtime_error("type space too large for the expectation evaluator");
        closed = costs.reserve.kind == ReserveCost::Kind::Quadratic &&
                 costs.load.kind == LoadCostFamily::Kind::Quadratic && bounds == BoundsMode::Unconstrained;
        group_loads();
        if (spec.method == ExpectationSpec::Method::Enumerate)
            build_enumerate();
        else
            build_monte_carlo();
        finalize_scenarios();
    }

    void group_loads() {
        for (int i = 0; i < model.n_loads(); ++i) {
            const auto& d = model.per_load[static_cast<size_t>(i)];
            bool placed = false;
            for (auto& g : groups) {
                if (g.dist == d) {
                    g.members.push_back(i);
                    placed = true;
                    break;
                }
            }
            if (!placed) groups.push_back({d, {i}});
        }
        for (const auto& g : groups)
            if (g.members.size() > 60000) throw std::runtime_error("load group too large");
    }

    size_t n_groups() const { return groups.size(); }
    size_t n_scenarios() const { return weight.size(); }
    uint16_t count_at(size_t s, size_t g, int t) const {
        return counts[(s * n_groups() + g) * static_cast<size_t>(T) + static_cast<size_t>(t)];
    }

    // All type-count vectors per group (multiset enumeration over
    // exchangeable members), combined across groups as a product.
    void build_enumerate() {
        zmodel.nodes(spec.z_nodes, z_pts, z_wts);
        m0 = m1 = m2 = 0.0;
        for (size_t k = 0; k < z_pts.size(); ++k) {
            m0 += z_wts[k];
            m1 += z_wts[k] * z_pts[k];
            m2 += z_wts[k] * z_pts[k] * z_pts[k];
        }

        // Per-group list of (weight, counts) rows.
        std::vector<std::vector<double>> gw(groups.size());
        std::vector<std::vector<uint16_t>> gc(groups.size());
        for (size_t g = 0; g < groups.size(); ++g) {
            const auto& probs = groups[g].dist.probs;
            const int m = static_cast<int>(groups[g].members.size());
            std::vector<uint16_t> cur(static_cast<size_t>(T), 0);
            // Recursive composition of m over the support of probs.
            std::function<void(int, int, double)> rec = [&](int t, int left, double w) {
                if (t == T - 1) {
                    if (probs[static_cast<size_t>(t)] == 0.0 && left > 0) return;
                    cur[static_cast<size_t>(t)] = static_cast<uint16_t>(left);
                    double full = w;
                    if (left > 0) full *= std::pow(probs[static_cast<size_t>(t)], left);
                    // multinomial coefficient
                    double coef = std::lgamma(m + 1.0);
                    for (int u = 0; u < T; ++u) coef -= std::lgamma(cur[static_cast<size_t>(u)] + 1.0);
                    gw[g].push_back(full * std::exp(coef));
                    gc[g].insert(gc[g].end(), cur.begin(), cur.end());
                    cur[static_cast<size_t>(t)] = 0;
                    return;
                }
                const double p = probs[static_cast<size_t>(t)];
                const int top = p == 0.0 ? 0 : left;
                double pw = 1.0;
                for (int k = 0; k <= top; ++k) {
                    cur[static_cast<size_t>(t)] = static_cast<uint16_t>(k);
                    rec(t + 1, left - k, w * pw);
                    pw *= p;
                }
                cur[static_cast<size_t>(t)] = 0;
            };
            rec(0, m, 1.0);
        }

        // Cartesian product across groups.
        std::vector<size_t> idx(groups.size(), 0);
        const size_t G = groups.size();
        while (true) {
            double w = 1.0;
            for (size_t g = 0; g < G; ++g) w *= gw[g][idx[g]];
            weight.push_back(w);
            for (size_t g = 0; g < G; ++g) {
                const uint16_t* row = &gc[g][idx[g] * static_cast<size_t>(T)];
                counts.insert(counts.end(), row, row + T);
            }
            size_t g = 0;
            while (g < G && ++idx[g] == gw[g].size()) idx[g++] = 0;
            if (g == G) break;
            if (weight.size() > 2000000) throw std::runtime_error("enumeration scenario bound exceeded");
        }
    }

    // Joint (z, type profile) samples. Each load draws from its own
    // substream so that removing one load leaves the others' draws intact.
    void build_monte_carlo() {
        const size_t N = static_cast<size_t>(spec.samples);
        const size_t G = groups.size();
        weight.assign(N, 1.0 / static_cast<double>(spec.samples));
        counts.assign(N * G * static_cast<size_t>(T), 0);
        rep_type.assign(N * G, 0);
        Rng root(mc_seed);
        {
            Rng zr = root.fork("expectation-z");
            z_sample.resize(N);
            for (size_t s = 0; s < N; ++s) z_sample[s] = zmodel.sample(zr);
        }
        for (size_t g = 0; g < G; ++g) {
            for (size_t mi = 0; mi < groups[g].members.size(); ++mi) {
                const int load = groups[g].members[mi];
                Rng lr = root.fork("expectation-type", static_cast<uint64_t>(load));
                for (size_t s = 0; s < N; ++s) {
                    const int t = lr.pick(groups[g].dist.probs);
                    counts[(s * G + g) * static_cast<size_t>(T) + static_cast<size_t>(t)]++;
                    if (mi == 0) rep_type[s * G + g] = static_cast<uint16_t>(t);
                }
            }
        }
    }

    void finalize_scenarios() {
        const size_t G = groups.size();
        const size_t N = n_scenarios();
        S.assign(N, 0.0);
        D.assign(N, 0.0);
        for (size_t s = 0; s < N; ++s) {
            double sv = 0.0, dv = 0.0;
            for (size_t g = 0; g < G; ++g) {
                for (int t = 0; t < T; ++t) {
                    const uint16_t c = count_at(s, g, t);
                    if (!c) continue;
                    sv += c / ts.type(t).kappa;
                    dv += static_cast<double>(c) * ts.type(t).baseline;
                }
            }
            S[s] = sv;
            D[s] = dv;
        }
        if (closed) reduce_closed();
    }

    // Quadratic + unconstrained: inner optimum is a*z_net²/(1+2aS), so the
    // whole expectation collapses to a quadratic in g.
    void reduce_closed() {
        const double a = costs.reserve.a;
        q2 = q1 = q0 = 0.0;
        if (spec.method == ExpectationSpec::Method::Enumerate) {
            double t0 = 0.0, t1 = 0.0, t2 = 0.0;
            for (size_t s = 0; s < n_scenarios(); ++s) {
                const double alpha = weight[s] * a / (1.0 + 2.0 * a * S[s]);
                t0 += alpha;
                t1 += alpha * D[s];
                t2 += alpha * D[s] * D[s];
            }
            q2 = m0 * t0;
            q1 = -2.0 * (m1 * t0 + m0 * t1);
            q0 = m2 * t0 + 2.0 * m1 * t1 + m0 * t2;
        } else {
            for (size_t s = 0; s < n_scenarios(); ++s) {
                const double alpha = weight[s] * a / (1.0 + 2.0 * a * S[s]);
                const double e = z_sample[s] + D[s];
                q2 += alpha;
                q1 -= 2.0 * alpha * e;
                q0 += alpha * e * e;
            }
        }
    }

    double inner_expectation(double g) const {
        if (closed) return (q2 * g + q1) * g + q0;
        const size_t G = groups.size();
        std::vector<int> combined(static_cast<size_t>(T));
        InnerByType inner;
        double total = 0.0;
        const bool gridded = costs.load.kind == LoadCostFamily::Kind::Tabulated ||
                             costs.reserve.kind == ReserveCost::Kind::Tabulated;
        std::vector<int> profile;
        for (size_t s = 0; s < n_scenarios(); ++s) {
            for (int t = 0; t < T; ++t) {
                int c = 0;
                for (size_t gr = 0; gr < G; ++gr) c += count_at(s, gr, t);
                combined[static_cast<size_t>(t)] = c;
            }
            auto scenario_cost = [&](double z) -> double {
                if (!gridded) {
                    solve_inner_counts(z - g + D[s], combined, ts, costs, bounds, inner);
                    return inner.cost;
                }
                profile.clear();
                for (int t = 0; t < T; ++t)
                    for (int k = 0; k < combined[static_cast<size_t>(t)]; ++k) profile.push_back(t);
                RealTimeSolution sol = solve_real_time_grid(z, g, profile, ts, costs, bounds);
                return sol.social_cost - sol.generator_cost_value;
            };
            if (spec.method == ExpectationSpec::Method::Enumerate) {
                double acc = 0.0;
                for (size_t k = 0; k < z_pts.size(); ++k) acc += z_wts[k] * scenario_cost(z_pts[k]);
                total += weight[s] * acc;
            } else {
                total += weight[s] * scenario_cost(z_sample[s]);
            }
        }
        return total;
    }

    ExpectedCost expected(double g) const {
        ExpectedCost ec;
        ec.value = generator_cost(costs, g) + inner_expectation(g);
        if (spec.method == ExpectationSpec::Method::MonteCarlo) ec.stderr_estimate = mc_stderr(g);
        return ec;
    }

    double mc_stderr(double g) const {
        const double a = costs.reserve.a;
        const size_t N = n_scenarios();
        if (N < 2) return 0.0;
        double sum = 0.0, sumsq = 0.0;
        if (closed) {
            for (size_t s = 0; s < N; ++s) {
                const double alpha = a / (1.0 + 2.0 * a * S[s]);
                const double e = z_sample[s] + D[s] - g;
                const double v = alpha * e * e;
                sum += v;
                sumsq += v * v;
            }
        } else {
            const size_t G = groups.size();
            std::vector<int> combined(static_cast<size_t>(T));
            InnerByType inner;
            for (size_t s = 0; s < N; ++s) {
                for (int t = 0; t < T; ++t) {
                    int c = 0;
                    for (size_t gr = 0; gr < G; ++gr) c += count_at(s, gr, t);
                    combined[static_cast<size_t>(t)] = c;
                }
                solve_inner_counts(z_sample[s] - g + D[s], combined, ts, costs, bounds, inner);
                sum += inner.cost;
                sumsq += inner.cost * inner.cost;
            }
        }
        const double mean = sum / static_cast<double>(N);
        const double var = std::max(0.0, sumsq / static_cast<double>(N) - mean * mean);
        return std::sqrt(var / static_cast<double>(N));
    }

    // E[c_i] per load at dispatch g; members of a group share the value by
    // exchangeability.
    std::vector<double> per_load_expected_cost(double g) const {
        const size_t G = groups.size();
        std::vector<double> per_group(G, 0.0);
        const double a = costs.reserve.a;
        if (closed) {
            for (size_t s = 0; s < n_scenarios(); ++s) {
                const double denom = 1.0 + 2.0 * a * S[s];
                double q;  // E_z[(z - g + D)^2] under the integration rule
                if (spec.method == ExpectationSpec::Method::Enumerate) {
                    const double shift = D[s] - g;
                    q = m2 + 2.0 * shift * m1 + shift * shift * m0;
                } else {
                    const double e = z_sample[s] + D[s] - g;
                    q = e * e;
                }
                const double gr2 = q / (denom * denom);  // E[g_r^2]
                for (size_t gi = 0; gi < G; ++gi) {
                    double acc = 0.0;
                    for (int t = 0; t < T; ++t) {
                        const uint16_t c = count_at(s, gi, t);
                        if (!c) continue;
                        acc += c * (2.0 * a * a / ts.type(t).kappa) * gr2;
                    }
                    per_group[gi] += weight[s] * acc / static_cast<double>(groups[gi].members.size());
                }
            }
        } else {
            std::vector<int> combined(static_cast<size_t>(T));
            std::vector<int> profile;
            InnerByType inner;
            const bool gridded = costs.load.kind == LoadCostFamily::Kind::Tabulated ||
                                 costs.reserve.kind == ReserveCost::Kind::Tabulated;
            for (size_t s = 0; s < n_scenarios(); ++s) {
                for (int t = 0; t < T; ++t) {
                    int c = 0;
                    for (size_t gr = 0; gr < G; ++gr) c += count_at(s, gr, t);
                    combined[static_cast<size_t>(t)] = c;
                }
                auto accumulate = [&](double z, double w) {
                    std::vector<double> cost_by_type(static_cast<size_t>(T), 0.0);
                    if (!gridded) {
                        solve_inner_counts(z - g + D[s], combined, ts, costs, bounds, inner);
                        cost_by_type = inner.cost_by_type;
                    } else {
                        profile.clear();
                        for (int t = 0; t < T; ++t)
                            for (int k = 0; k < combined[static_cast<size_t>(t)]; ++k) profile.push_back(t);
                        RealTimeSolution sol = solve_real_time_grid(z, g, profile, ts, costs, bounds);
                        std::vector<int> seen(static_cast<size_t>(T), 0);
                        for (size_t i = 0; i < profile.size(); ++i) {
                            cost_by_type[static_cast<size_t>(profile[i])] += sol.load_costs[i];
                            seen[static_cast<size_t>(profile[i])]++;
                        }
                        for (int t = 0; t < T; ++t)
                            if (seen[static_cast<size_t>(t)]) cost_by_type[static_cast<size_t>(t)] /= seen[static_cast<size_t>(t)];
                    }
                    for (size_t gi = 0; gi < G; ++gi) {
                        double acc = 0.0;
                        for (int t = 0; t < T; ++t) {
                            const uint16_t c = count_at(s, gi, t);
                            if (c) acc += c * cost_by_type[static_cast<size_t>(t)];
                        }
                        per_group[gi] += w * acc / static_cast<double>(groups[gi].members.size());
                    }
                };
                if (spec.method == ExpectationSpec::Method::Enumerate) {
                    for (size_t k = 0; k < z_pts.size(); ++k) accumulate(z_pts[k], weight[s] * z_wts[k]);
                } else {
                    accumulate(z_sample[s], weight[s]);
                }
            }
        }
        std::vector<double> per_load(static_cast<size_t>(model.n_loads()), 0.0);
        for (size_t gi = 0; gi < G; ++gi)
            for (int i : groups[gi].members) per_load[static_cast<size_t>(i)] = per_group[gi];
        return per_load;
    }

    double search_upper_bracket() const {
        double hi = zmodel.max_value();
        for (const auto& d : model.per_load) {
            int dmax = 0;
            for (int t = 0; t < T; ++t)
                if (d.probs[static_cast<size_t>(t)] > 0.0) dmax = std::max(dmax, ts.type(t).baseline);
            hi += dmax;
        }
        return std::max(hi, 0.0);
    }

    DayAheadDecision decide() const {
        DayAheadDecision dec;
        dec.reported_model = model;
        double g_star = 0.0;
        switch (costs.generator.kind) {
            case GeneratorCost::Kind::Disabled: g_star = 0.0; break;
            case GeneratorCost::Kind::Quadratic: {
                const double hi = search_upper_bracket();
                if (hi > 0.0)
                    g_star = golden_min([this](double g) { return expected(g).value; }, 0.0, hi, 1e-8);
                break;
            }
            case GeneratorCost::Kind::Tabulated: {
                double best = std::numeric_limits<double>::infinity();
                for (size_t k = 0; k < costs.generator.table.size(); ++k) {
                    const double g = static_cast<double>(costs.generator.g_min + static_cast<long>(k));
                    const double v = expected(g).value;
                    if (v < best) {
                        best = v;
                        g_star = g;
                    }
                }
                break;
            }
        }
        dec.g_star = g_star;
        ExpectedCost ec = expected(g_star);
        dec.w_star = ec.value;
        dec.w_star_stderr = ec.stderr_estimate;
        dec.expected_load_cost = per_load_expected_cost(g_star);
        return dec;
    }

    std::unique_ptr<Impl> without(int load) const {
        if (load < 0 || load >= model.n_loads()) throw std::out_of_range("excluded load index out of range");
        if (spec.method == ExpectationSpec::Method::Enumerate) {
            JointTypeModel reduced = model;
            reduced.per_load.erase(reduced.per_load.begin() + load);
            return std::make_unique<Impl>(reduced, zmodel, ts, costs, bounds, spec, mc_seed);
        }
        // Monte-carlo: drop the group representative's draws; members of a
        // group are exchangeable, and every other load's samples are shared
        // with the full system.
        auto impl = std::make_unique<Impl>(*this);
        size_t gi = 0;
        for (; gi < groups.size(); ++gi) {
            const auto& m = groups[gi].members;
            if (std::find(m.begin(), m.end(), load) != m.end()) break;
        }
        const size_t G = groups.size();
        for (size_t s = 0; s < n_scenarios(); ++s) {
            const uint16_t t = rep_type[s * G + gi];
            impl->counts[(s * G + gi) * static_cast<size_t>(T) + t]--;
        }
        auto& members = impl->groups[gi].members;
        members.erase(std::find(members.begin(), members.end(), load));
        if (members.empty()) {
            // Group emptied: drop its column.
            impl->groups.erase(impl->groups.begin() + static_cast<long>(gi));
            std::vector<uint16_t> packed;
            packed.reserve(impl->counts.size() - n_scenarios() * static_cast<size_t>(T));
            for (size_t s = 0; s < n_scenarios(); ++s)
                for (size_t g2 = 0; g2 < G; ++g2)
                    if (g2 != gi) {
                        const uint16_t* row = &impl->counts[(s * G + g2) * static_cast<size_t>(T)];
                        packed.insert(packed.end(), row, row + T);
                    }
            impl->counts = std::move(packed);
            std::vector<uint16_t> rpacked;
            for (size_t s = 0; s < n_scenarios(); ++s)
                for (size_t g2 = 0; g2 < G; ++g2)
                    if (g2 != gi) rpacked.push_back(impl->rep_type[s * G + g2]);
            impl->rep_type = std::move(rpacked);
        }
        impl->model.per_load.erase(impl->model.per_load.begin() + load);
        // Member indices refer to the reduced model.
        for (auto& g2 : impl->groups)
            for (int& m : g2.members)
                if (m > load) --m;
        impl->finalize_scenarios();
        return impl;
    }
};

DayAheadSolver::DayAheadSolver(const JointTypeModel& model, const NetDemandModel& z, const TypeSpace& ts,
                               const CostModel& costs, BoundsMode bounds, const ExpectationSpec& spec,
                               uint64_t mc_seed)
    : impl_(std::make_unique<Impl>(model, z, ts, costs, bounds, spec, mc_seed)) {}

DayAheadSolver::~DayAheadSolver() = default;
DayAheadSolver::DayAheadSolver(DayAheadSolver&&) noexcept = default;
DayAheadSolver& DayAheadSolver::operator=(DayAheadSolver&&) noexcept = default;

ExpectedCost DayAheadSolver::expected(double g) const { return impl_->expected(g); }

DayAheadDecision DayAheadSolver::solve() const { return impl_->decide(); }

DayAheadDecision DayAheadSolver::solve_excluding(int load) const { return impl_->without(load)->decide(); }

ExpectedCost expected_social_cost(double g, const JointTypeModel& model, const NetDemandModel& z,
                                  const TypeSpace& ts, const CostModel& costs, BoundsMode bounds,
                                  const ExpectationSpec& spec, uint64_t mc_seed) {
    return DayAheadSolver(model, z, ts, costs, bounds, spec, mc_seed).expected(g);
}

DayAheadDecision solve_day_ahead(const JointTypeModel& model, const NetDemandModel& z, const TypeSpace& ts,
                                 const CostModel& costs, BoundsMode bounds, const ExpectationSpec& spec,
                                 uint64_t mc_seed) {
    return DayAheadSolver(model, z, ts, costs, bounds, spec, mc_seed).solve();
}

DayAheadDecision solve_day_ahead_excluding(const JointTypeModel& model, int excluded_load,
                                           const NetDemandModel& z, const TypeSpace& ts,
                                           const CostModel& costs, BoundsMode bounds,
                                           const ExpectationSpec& spec, uint64_t mc_seed) {
    return DayAheadSolver(model, z, ts, costs, bounds, spec, mc_seed).solve_excluding(excluded_load);
}

}  // namespace drm
