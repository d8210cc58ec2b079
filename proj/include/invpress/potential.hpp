#pragma once

#include "invpress/polytope.hpp"
#include "invpress/system.hpp"
#include "invpress/types.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace invpress {

struct PotentialNode {
    enum class Kind { Number, Control, State, Negate, Add, Subtract, Multiply, Divide, Power, Call };

    Kind kind = Kind::Number;
    double value = 0.0;          // Number
    int index = 0;               // Control / State
    std::string function;        // Call
    std::vector<PotentialNode> children;
    std::size_t offset = 0;      // byte offset of the node in the source
};

/// Parsed potential f(u) or f(x, u). Immutable and cheap to copy.
class Potential {
public:
    Potential(std::shared_ptr<const PotentialNode> root, int d, int m);

    const PotentialNode& root() const { return *root_; }
    bool uses_state() const { return uses_state_; }
    int state_dim() const { return d_; }
    int control_dim() const { return m_; }

    /// Fully parenthesized source that re-parses to the same tree.
    std::string print() const;

private:
    std::shared_ptr<const PotentialNode> root_;
    int d_ = 0;
    int m_ = 0;
    bool uses_state_ = false;
};

/// Grammar:
///   Expr    -> Term (('+' | '-') Term)*
///   Term    -> Factor (('*' | '/') Factor)*
///   Factor  -> Unary ('^' Factor)?
///   Unary   -> '-' Unary | Primary
///   Primary -> number | ident | ident '(' Args ')' | '(' Expr ')'
/// Identifiers are u0..u{m-1}, x0..x{d-1} and the functions abs, exp, log,
/// sqrt (one argument) and min, max (two or more).
Potential parse_potential(std::string_view source, int d, int m);

/// f(x, u). `x` is required iff the potential uses state variables.
double evaluate(const Potential& p, const std::optional<Vector>& x, const Vector& u);

/// sum_{i < tau} f(u_i), or sum_{i < tau} f(phi(i, x, u), u_i) for state potentials.
double birkhoff_sum(const Potential& p, const LinearSystem& sys, const Vector& x, const ControlSequence& controls);

struct Minimum {
    Vector argmin;
    double value = 0.0;
    bool empty_grid = false;      // no grid point fell inside U; vertices were used alone
    std::vector<double> history;  // incumbent value after the initial scan and each refinement round
};

constexpr int kDefaultMinimizeGrid = 33;
constexpr int kDefaultRefineRounds = 10;

/// Grid scan of U's bounding box (plus U's vertices and 0), then local
/// refinement rounds with the window shrinking by 0.3 each time.
Minimum minimize_over_U(const Potential& p, const ConvexPolytope& u, int grid = kDefaultMinimizeGrid,
                        int refine_iters = kDefaultRefineRounds);

}  // namespace invpress
