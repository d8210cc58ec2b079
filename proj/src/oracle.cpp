#include "invpress/oracle.hpp"

#include "invpress/control_set.hpp"
#include "invpress/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

namespace invpress {

std::size_t PointSet::count() const {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool PointSet::empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

bool PointSet::subset_of(const PointSet& other) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (words_[i] & ~other.words_[i]) return false;
    }
    return true;
}

void PointSet::unite(const PointSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
}

std::size_t PointSet::count_new(const PointSet& covered) const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) n += static_cast<std::size_t>(std::popcount(words_[i] & ~covered.words_[i]));
    return n;
}

ControlSequence AdmissibleControls::controls(const CoverCandidate& c) const {
    ControlSequence out;
    out.reserve(c.sequence.size());
    for (int i : c.sequence) out.push_back(control_grid[static_cast<std::size_t>(i)]);
    return out;
}

OracleConfig default_oracle_config(const LinearSystem& sys, const SpectralSplit& split, int tau, int control_grid,
                                   int state_grid) {
    const auto approx = approximate_control_set(sys, split, 25, 1e-3);
    ConvexPolytope q = shrink(approx.inner, 1e-6);
    const Vector c = chebyshev_ball(q).center;
    ConvexPolytope k = translate(linear_image(translate(q, -c), 0.5 * Matrix::Identity(sys.d(), sys.d())), c);
    OracleConfig cfg(std::move(q), std::move(k));
    cfg.tau = tau;
    cfg.control_grid = control_grid;
    cfg.state_grid = state_grid;
    return cfg;
}

namespace {

// Tensor grid over the bounding box, first coordinate varying slowest, kept where inside `p`.
std::vector<Vector> box_grid(const ConvexPolytope& p, int n) {
    if (n < 1) throw PreconditionViolated("grid needs at least one point per axis");
    const Vector lo = p.lower_bounds(), hi = p.upper_bounds();
    const int d = p.dim();
    std::vector<Vector> out;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    for (;;) {
        Vector g(d);
        for (int i = 0; i < d; ++i) {
            g(i) = n == 1 ? 0.5 * (lo(i) + hi(i)) : lo(i) + (hi(i) - lo(i)) * idx[static_cast<std::size_t>(i)] / (n - 1);
        }
        if (contains_point(p, g, 1e-12)) out.push_back(g);
        int pos = d - 1;
        while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return out;
}

bool in_q(const ConvexPolytope& q, const Vector& x) {
    if (const auto& h = q.halfspaces()) {
        const double v = h->max_violation(x);
        if (v <= 0.0) return true;
        if (v > 1e-9) return false;
    }
    return contains_point(q, x, 1e-9);
}

}  // namespace

AdmissibleControls admissible_controls(const LinearSystem& sys, const OracleConfig& cfg) {
    if (cfg.tau < 1) throw PreconditionViolated("tau must be positive");
    if (cfg.q.dim() != sys.d() || cfg.k.dim() != sys.d()) throw DimensionMismatch("Q and K must live in the state space");
    AdmissibleControls adm;
    adm.tau = cfg.tau;
    adm.control_grid = box_grid(sys.U(), cfg.control_grid);
    adm.k_grid = box_grid(cfg.k, cfg.state_grid);
    if (adm.k_grid.empty()) throw PreconditionViolated("the K grid is empty");
    for (const Vector& x : adm.k_grid) {
        if (!in_q(cfg.q, x)) throw PreconditionViolated("K grid point outside Q");
    }

    const double steps = cfg.tau * std::pow(static_cast<double>(adm.control_grid.size()), cfg.tau) *
                         static_cast<double>(adm.k_grid.size());
    if (steps > cfg.budget) {
        throw BudgetExceeded("oracle needs " + std::to_string(steps) + " trajectory steps, budget is " +
                             std::to_string(cfg.budget));
    }

    const std::size_t n = adm.k_grid.size();
    const auto g = static_cast<int>(adm.control_grid.size());
    std::vector<Vector> bu;
    for (const Vector& u : adm.control_grid) bu.push_back(sys.B() * u);

    // Depth-first over sequences; each level keeps the surviving points and their states.
    struct Level {
        std::vector<std::size_t> alive;
        std::vector<Vector> states;
    };
    std::vector<Level> levels(static_cast<std::size_t>(cfg.tau + 1));
    for (std::size_t i = 0; i < n; ++i) {
        levels[0].alive.push_back(i);
        levels[0].states.push_back(adm.k_grid[i]);
    }
    std::vector<int> seq(static_cast<std::size_t>(cfg.tau), 0);
    std::function<void(int)> descend = [&](int depth) {
        const Level& cur = levels[static_cast<std::size_t>(depth)];
        Level& next = levels[static_cast<std::size_t>(depth + 1)];
        for (int c = 0; c < g; ++c) {
            next.alive.clear();
            next.states.clear();
            for (std::size_t j = 0; j < cur.alive.size(); ++j) {
                Vector x = sys.A() * cur.states[j] + bu[static_cast<std::size_t>(c)];
                if (in_q(cfg.q, x)) {
                    next.alive.push_back(cur.alive[j]);
                    next.states.push_back(std::move(x));
                }
            }
            if (next.alive.empty()) continue;
            seq[static_cast<std::size_t>(depth)] = c;
            if (depth + 1 == cfg.tau) {
                CoverCandidate cand{seq, PointSet(n)};
                for (std::size_t i : next.alive) cand.covered.set(i);
                adm.candidates.push_back(std::move(cand));
            } else {
                descend(depth + 1);
            }
        }
    };
    descend(0);
    return adm;
}

namespace {

struct CoverChoice {
    std::vector<std::size_t> chosen;
    bool exact = false;
};

// Drops duplicates and candidates whose cover is contained in a no-heavier one.
std::vector<std::size_t> undominated(const AdmissibleControls& adm, const std::vector<double>& lw) {
    std::map<std::vector<std::uint64_t>, std::size_t> best;
    for (std::size_t i = 0; i < adm.candidates.size(); ++i) {
        auto [it, inserted] = best.emplace(adm.candidates[i].covered.words(), i);
        if (!inserted && lw[i] < lw[it->second]) it->second = i;
    }
    std::vector<std::size_t> unique;
    for (const auto& [key, i] : best) unique.push_back(i);
    std::sort(unique.begin(), unique.end());
    std::vector<std::size_t> keep;
    for (std::size_t a : unique) {
        bool dominated = false;
        for (std::size_t b : unique) {
            if (a == b) continue;
            const auto& ca = adm.candidates[a].covered;
            const auto& cb = adm.candidates[b].covered;
            if (ca.subset_of(cb) && lw[b] <= lw[a] && !(ca == cb)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) keep.push_back(a);
    }
    return keep;
}

CoverChoice exact_cover(const AdmissibleControls& adm, const std::vector<std::size_t>& cand, const std::vector<double>& w) {
    const std::size_t n = adm.k_grid.size();
    std::vector<std::size_t> current, best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::function<void(const PointSet&, double)> search = [&](const PointSet& covered, double cost) {
        if (cost >= best_cost) return;
        std::size_t first = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!covered.test(i)) {
                first = i;
                break;
            }
        }
        if (first == n) {
            best_cost = cost;
            best = current;
            return;
        }
        for (std::size_t j = 0; j < cand.size(); ++j) {
            if (!adm.candidates[cand[j]].covered.test(first)) continue;
            PointSet next = covered;
            next.unite(adm.candidates[cand[j]].covered);
            current.push_back(j);
            search(next, cost + w[j]);
            current.pop_back();
        }
    };
    search(PointSet(n), 0.0);
    CoverChoice out;
    out.exact = true;
    for (std::size_t j : best) out.chosen.push_back(cand[j]);
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

CoverChoice greedy_cover(const AdmissibleControls& adm, const std::vector<std::size_t>& cand, const std::vector<double>& w) {
    const std::size_t n = adm.k_grid.size();
    PointSet covered(n);
    CoverChoice out;
    while (covered.count() < n) {
        double best_ratio = -1.0;
        std::size_t best = cand.size();
        for (std::size_t j = 0; j < cand.size(); ++j) {
            const std::size_t fresh = adm.candidates[cand[j]].covered.count_new(covered);
            if (fresh == 0) continue;
            const double ratio = static_cast<double>(fresh) / w[j];
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best = j;
            }
        }
        covered.unite(adm.candidates[cand[best]].covered);
        out.chosen.push_back(cand[best]);
    }
    std::sort(out.chosen.begin(), out.chosen.end());
    return out;
}

}  // namespace

OracleEstimate min_weight_cover(const AdmissibleControls& adm, const std::vector<double>& log_weights) {
    if (log_weights.size() != adm.candidates.size()) throw DimensionMismatch("one weight per candidate expected");
    const std::size_t n = adm.k_grid.size();
    PointSet all(n);
    for (const auto& c : adm.candidates) all.unite(c.covered);
    if (all.count() < n) {
        throw UnspannableGrid(std::to_string(n - all.count()) + " of " + std::to_string(n) +
                              " K grid points are kept in Q by no grid control");
    }

    const std::vector<std::size_t> cand = undominated(adm, log_weights);
    double shift = std::numeric_limits<double>::infinity();
    for (std::size_t i : cand) shift = std::min(shift, log_weights[i]);
    std::vector<double> w;
    for (std::size_t i : cand) w.push_back(std::exp(log_weights[i] - shift));

    const CoverChoice choice = cand.size() <= kExactCoverLimit ? exact_cover(adm, cand, w) : greedy_cover(adm, cand, w);

    OracleEstimate est;
    est.tau = adm.tau;
    est.exact = choice.exact;
    est.cover_gap = choice.exact ? 1.0 : std::log(static_cast<double>(n)) + 1.0;
    est.candidates = cand.size();
    est.admissible = adm.candidates.size();
    est.control_points = adm.control_grid.size();
    est.grid_points = n;
    est.spanning_cardinality = choice.chosen.size();
    est.chosen_set.tau = adm.tau;
    std::vector<double> chosen_lw;
    for (std::size_t i : choice.chosen) {
        est.chosen_set.controls.push_back(adm.controls(adm.candidates[i]));
        est.chosen_set.log_weights.push_back(log_weights[i]);
        chosen_lw.push_back(log_weights[i]);
    }
    est.rate = log_sum_exp_rate(chosen_lw, adm.tau);
    est.log_a_tau = est.rate * adm.tau;
    est.a_tau = std::exp(est.log_a_tau);
    return est;
}

OracleEstimate estimate_pressure(const LinearSystem& sys, const OracleConfig& cfg, const Potential& p) {
    if (p.uses_state() && !cfg.total_mode) {
        throw PreconditionViolated("state-dependent potentials need total mode");
    }
    const AdmissibleControls adm = admissible_controls(sys, cfg);
    std::vector<double> lw;
    lw.reserve(adm.candidates.size());
    const Vector origin = Vector::Zero(sys.d());
    for (const auto& c : adm.candidates) {
        const ControlSequence u = adm.controls(c);
        if (cfg.total_mode && p.uses_state()) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < adm.k_grid.size(); ++i) {
                if (c.covered.test(i)) best = std::min(best, birkhoff_sum(p, sys, adm.k_grid[i], u));
            }
            lw.push_back(best);
        } else {
            lw.push_back(birkhoff_sum(p, sys, origin, u));
        }
    }
    OracleEstimate est = min_weight_cover(adm, lw);
    est.total_mode = cfg.total_mode;

    // Independent re-simulation: every K point needs one chosen control keeping it in Q.
    for (const Vector& x0 : adm.k_grid) {
        bool covered = false;
        for (const auto& u : est.chosen_set.controls) {
            Vector x = x0;
            bool ok = true;
            for (const auto& c : u) {
                x = sys.A() * x + sys.B() * c;
                ok = ok && contains_point(cfg.q, x, 1e-9);
            }
            if (ok) {
                covered = true;
                break;
            }
        }
        if (!covered) ++est.violations;
    }
    return est;
}

SweepReport discretization_sweep(const LinearSystem& sys, const OracleConfig& cfg, const Potential& p,
                                 const std::vector<int>& taus) {
    if (taus.empty()) throw PreconditionViolated("empty tau list");
    SweepReport report;
    for (int t : taus) {
        OracleConfig c = cfg;
        c.tau = t;
        report.estimates.push_back(estimate_pressure(sys, c, p));
    }
    report.min_rate = report.max_rate = report.estimates.front().rate;
    for (std::size_t i = 1; i < report.estimates.size(); ++i) {
        const double prev = report.estimates[i - 1].rate, cur = report.estimates[i].rate;
        report.nonincreasing = report.nonincreasing && cur <= prev + 1e-12;
        report.nondecreasing = report.nondecreasing && cur >= prev - 1e-12;
        report.min_rate = std::min(report.min_rate, cur);
        report.max_rate = std::max(report.max_rate, cur);
    }
    return report;
}

}  // namespace invpress
