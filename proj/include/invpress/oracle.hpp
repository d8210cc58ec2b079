#pragma once

#include "invpress/polytope.hpp"
#include "invpress/potential.hpp"
#include "invpress/pressure.hpp"
#include "invpress/spectral.hpp"
#include "invpress/system.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace invpress {

constexpr double kDefaultOracleBudget = 1e8;
constexpr std::size_t kExactCoverLimit = 20;

struct OracleConfig {
    OracleConfig(ConvexPolytope q_set, ConvexPolytope k_set) : q(std::move(q_set)), k(std::move(k_set)) {}

    int tau = 1;
    int control_grid = 3;  // points per control axis
    int state_grid = 5;    // points per state axis
    ConvexPolytope q;      // confinement set
    ConvexPolytope k;      // initial set, K subset of Q
    bool total_mode = false;
    double budget = kDefaultOracleBudget;  // tau * |G|^tau * |K grid| trajectory steps
};

/// Q = control-set approximation moved inward by 1e-6, K = Q scaled by 0.5
/// about its Chebyshev center.
OracleConfig default_oracle_config(const LinearSystem& sys, const SpectralSplit& split, int tau, int control_grid,
                                   int state_grid);

/// Fixed-size bitset over K-grid points.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const { return n_; }
    bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
    void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    std::size_t count() const;
    bool empty() const;
    bool subset_of(const PointSet& other) const;
    void unite(const PointSet& other);
    std::size_t count_new(const PointSet& covered) const;
    bool operator==(const PointSet& other) const { return words_ == other.words_; }
    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

struct CoverCandidate {
    std::vector<int> sequence;  // indices into the control grid, lexicographic order
    PointSet covered;
};

struct AdmissibleControls {
    int tau = 0;
    std::vector<Vector> control_grid;
    std::vector<Vector> k_grid;
    std::vector<CoverCandidate> candidates;  // sequences covering at least one K point

    ControlSequence controls(const CoverCandidate& c) const;
};

/// Enumerates all |G|^tau grid control sequences and records which K-grid
/// points stay in Q for k = 1..tau (tolerance 1e-9).
AdmissibleControls admissible_controls(const LinearSystem& sys, const OracleConfig& cfg);

struct OracleEstimate {
    int tau = 0;
    bool total_mode = false;  // a_tau_total instead of a_tau
    double a_tau = 0.0;
    double log_a_tau = 0.0;
    double rate = 0.0;        // log_a_tau / tau
    std::size_t spanning_cardinality = 0;
    SpanningSet chosen_set;   // tau, controls and log_weights are filled
    bool exact = false;
    double cover_gap = 1.0;   // 1 for exact covers, ln(n) + 1 for greedy
    std::size_t candidates = 0;   // after dominance pruning
    std::size_t admissible = 0;   // sequences covering at least one point
    std::size_t control_points = 0;
    std::size_t grid_points = 0;
    int violations = 0;           // K points the chosen set fails on re-simulation
};

/// Minimum total of exp(log_weights) over covers of the whole K grid: exact
/// below kExactCoverLimit candidates (after dominance pruning), greedy above.
OracleEstimate min_weight_cover(const AdmissibleControls& adm, const std::vector<double>& log_weights);

OracleEstimate estimate_pressure(const LinearSystem& sys, const OracleConfig& cfg, const Potential& p);

struct SweepReport {
    std::vector<OracleEstimate> estimates;
    bool nonincreasing = true;
    bool nondecreasing = true;
    double min_rate = 0.0;
    double max_rate = 0.0;
};

SweepReport discretization_sweep(const LinearSystem& sys, const OracleConfig& cfg, const Potential& p,
                                 const std::vector<int>& taus);

}  // namespace invpress
