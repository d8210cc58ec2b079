#include "invpress/potential.hpp"

#include "invpress/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace invpress {

namespace {

using Kind = PotentialNode::Kind;

struct Token {
    enum class Type { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End, Invalid };
    Type type = Type::End;
    std::size_t offset = 0;
    std::string text;
    double number = 0.0;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const auto digit = [&](std::size_t j) { return j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])); };
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.offset = i;
        if (digit(i) || (c == '.' && digit(i + 1))) {
            std::size_t j = i;
            while (digit(j)) ++j;
            if (j < src.size() && src[j] == '.') {
                ++j;
                while (digit(j)) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (digit(k)) {
                    while (digit(k)) ++k;
                    j = k;
                }
            }
            t.type = Token::Type::Number;
            t.text = std::string(src.substr(i, j - i));
            t.number = std::strtod(t.text.c_str(), nullptr);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.type = Token::Type::Ident;
            t.text = std::string(src.substr(i, j - i));
            i = j;
        } else {
            switch (c) {
            case '+': t.type = Token::Type::Plus; break;
            case '-': t.type = Token::Type::Minus; break;
            case '*': t.type = Token::Type::Star; break;
            case '/': t.type = Token::Type::Slash; break;
            case '^': t.type = Token::Type::Caret; break;
            case '(': t.type = Token::Type::LParen; break;
            case ')': t.type = Token::Type::RParen; break;
            case ',': t.type = Token::Type::Comma; break;
            default: t.type = Token::Type::Invalid; break;
            }
            t.text = std::string(1, c);
            ++i;
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.offset = src.size();
    out.push_back(end);
    return out;
}

std::string describe(const Token& t) {
    switch (t.type) {
    case Token::Type::End: return "end of input";
    case Token::Type::Number: return "number '" + t.text + "'";
    case Token::Type::Ident: return "identifier '" + t.text + "'";
    default: return "'" + t.text + "'";
    }
}

// Parses "u<n>" / "x<n>" with a canonical decimal index.
std::optional<std::pair<char, int>> variable_name(const std::string& s) {
    if (s.size() < 2 || (s[0] != 'u' && s[0] != 'x')) return std::nullopt;
    if (s.size() > 2 && s[1] == '0') return std::nullopt;
    if (s.size() > 9) return std::nullopt;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    }
    return std::make_pair(s[0], std::stoi(s.substr(1)));
}

bool is_function(const std::string& s) {
    return s == "abs" || s == "exp" || s == "log" || s == "sqrt" || s == "min" || s == "max";
}

class Parser {
public:
    Parser(std::string_view src, int d, int m) : tokens_(lex(src)), d_(d), m_(m) {}

    PotentialNode parse() {
        PotentialNode root = expr();
        if (peek().type != Token::Type::End) fail_after_operand({"end of input"});
        return root;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    const Token& next() { return tokens_[pos_++]; }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        const Token& t = peek();
        std::string msg = "unexpected " + describe(t) + " at offset " + std::to_string(t.offset) + "; expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
        throw ParseError(msg, t.offset, std::move(expected));
    }

    // After a complete operand any binary operator may follow, plus the closers.
    [[noreturn]] void fail_after_operand(std::vector<std::string> closers) {
        std::vector<std::string> expected{"+", "-", "*", "/", "^"};
        expected.insert(expected.end(), closers.begin(), closers.end());
        fail(std::move(expected));
    }

    static PotentialNode binary(Kind kind, PotentialNode lhs, PotentialNode rhs, std::size_t offset) {
        PotentialNode n;
        n.kind = kind;
        n.offset = offset;
        n.children.push_back(std::move(lhs));
        n.children.push_back(std::move(rhs));
        return n;
    }

    PotentialNode expr() {
        PotentialNode lhs = term();
        for (;;) {
            const Token& t = peek();
            if (t.type != Token::Type::Plus && t.type != Token::Type::Minus) return lhs;
            const Kind kind = t.type == Token::Type::Plus ? Kind::Add : Kind::Subtract;
            const std::size_t offset = next().offset;
            lhs = binary(kind, std::move(lhs), term(), offset);
        }
    }

    PotentialNode term() {
        PotentialNode lhs = factor();
        for (;;) {
            const Token& t = peek();
            if (t.type != Token::Type::Star && t.type != Token::Type::Slash) return lhs;
            const Kind kind = t.type == Token::Type::Star ? Kind::Multiply : Kind::Divide;
            const std::size_t offset = next().offset;
            lhs = binary(kind, std::move(lhs), factor(), offset);
        }
    }

    PotentialNode factor() {
        PotentialNode base = unary();
        if (peek().type != Token::Type::Caret) return base;
        const std::size_t offset = next().offset;
        return binary(Kind::Power, std::move(base), factor(), offset);
    }

    PotentialNode unary() {
        if (peek().type == Token::Type::Minus) {
            PotentialNode n;
            n.kind = Kind::Negate;
            n.offset = next().offset;
            n.children.push_back(unary());
            return n;
        }
        return primary();
    }

    PotentialNode primary() {
        const Token& t = peek();
        PotentialNode n;
        n.offset = t.offset;
        switch (t.type) {
        case Token::Type::Number:
            n.kind = Kind::Number;
            n.value = next().number;
            return n;
        case Token::Type::LParen: {
            next();
            n = expr();
            if (peek().type != Token::Type::RParen) fail_after_operand({")"});
            next();
            return n;
        }
        case Token::Type::Ident:
            return identifier();
        default:
            fail({"number", "identifier", "(", "-"});
        }
    }

    PotentialNode identifier() {
        const Token& t = next();
        PotentialNode n;
        n.offset = t.offset;
        if (peek().type == Token::Type::LParen) {
            if (!is_function(t.text)) throw UnknownIdentifier("unknown function '" + t.text + "'", t.offset);
            next();
            n.kind = Kind::Call;
            n.function = t.text;
            n.children.push_back(expr());
            while (peek().type == Token::Type::Comma) {
                next();
                n.children.push_back(expr());
            }
            if (peek().type != Token::Type::RParen) fail_after_operand({",", ")"});
            next();
            const std::size_t arity = n.children.size();
            const bool unary_fn = n.function != "min" && n.function != "max";
            if (unary_fn && arity != 1) {
                throw ArityError(n.function + " takes 1 argument, got " + std::to_string(arity), n.offset);
            }
            if (!unary_fn && arity < 2) {
                throw ArityError(n.function + " takes at least 2 arguments, got " + std::to_string(arity), n.offset);
            }
            return n;
        }
        if (is_function(t.text)) fail({"("});
        const auto var = variable_name(t.text);
        if (!var) throw UnknownIdentifier("unknown identifier '" + t.text + "'", t.offset);
        const int limit = var->first == 'u' ? m_ : d_;
        if (var->second >= limit) {
            throw UnknownIdentifier("variable '" + t.text + "' out of range (" + std::string(1, var->first) +
                                        " has " + std::to_string(limit) + " coordinates)",
                                    t.offset);
        }
        n.kind = var->first == 'u' ? Kind::Control : Kind::State;
        n.index = var->second;
        return n;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int d_;
    int m_;
};

bool scan_state(const PotentialNode& n) {
    if (n.kind == Kind::State) return true;
    return std::any_of(n.children.begin(), n.children.end(), scan_state);
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const PotentialNode& n, std::string& out) {
    switch (n.kind) {
    case Kind::Number: out += format_number(n.value); return;
    case Kind::Control: out += "u" + std::to_string(n.index); return;
    case Kind::State: out += "x" + std::to_string(n.index); return;
    case Kind::Negate:
        out += "(-";
        print_node(n.children[0], out);
        out += ")";
        return;
    case Kind::Call:
        out += n.function + "(";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) out += ", ";
            print_node(n.children[i], out);
        }
        out += ")";
        return;
    default: break;
    }
    const char* op = n.kind == Kind::Add ? " + " : n.kind == Kind::Subtract ? " - " : n.kind == Kind::Multiply ? " * "
                   : n.kind == Kind::Divide ? " / " : " ^ ";
    out += "(";
    print_node(n.children[0], out);
    out += op;
    print_node(n.children[1], out);
    out += ")";
}

std::string print_vector(const Vector& v) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
    os << ")";
    return os.str();
}

struct Evaluator {
    const Vector* x;
    const Vector& u;

    [[noreturn]] void domain(const PotentialNode& n, const std::string& what) const {
        std::string where;
        print_node(n, where);
        std::string input = "u=" + print_vector(u);
        if (x) input += ", x=" + print_vector(*x);
        throw DomainError(what + " in " + where + " at " + input);
    }

    double operator()(const PotentialNode& n) const {
        switch (n.kind) {
        case Kind::Number: return n.value;
        case Kind::Control: return u(n.index);
        case Kind::State: return (*x)(n.index);
        case Kind::Negate: return -(*this)(n.children[0]);
        case Kind::Add: return (*this)(n.children[0]) + (*this)(n.children[1]);
        case Kind::Subtract: return (*this)(n.children[0]) - (*this)(n.children[1]);
        case Kind::Multiply: return (*this)(n.children[0]) * (*this)(n.children[1]);
        case Kind::Divide: {
            const double num = (*this)(n.children[0]);
            const double den = (*this)(n.children[1]);
            if (std::abs(den) < 1e-300) domain(n, "division by " + format_number(den));
            return num / den;
        }
        case Kind::Power: {
            const double base = (*this)(n.children[0]);
            const double exponent = (*this)(n.children[1]);
            const double r = std::pow(base, exponent);
            if (std::isnan(r)) domain(n, "undefined power " + format_number(base) + "^" + format_number(exponent));
            return r;
        }
        case Kind::Call: return call(n);
        }
        return 0.0;
    }

    double call(const PotentialNode& n) const {
        const double a = (*this)(n.children[0]);
        if (n.function == "abs") return std::abs(a);
        if (n.function == "exp") return std::exp(a);
        if (n.function == "log") {
            if (!(a > 0.0)) domain(n, "log of nonpositive " + format_number(a));
            return std::log(a);
        }
        if (n.function == "sqrt") {
            if (a < 0.0) domain(n, "sqrt of negative " + format_number(a));
            return std::sqrt(a);
        }
        double r = a;
        for (std::size_t i = 1; i < n.children.size(); ++i) {
            const double b = (*this)(n.children[i]);
            r = n.function == "min" ? std::min(r, b) : std::max(r, b);
        }
        return r;
    }
};

}  // namespace

Potential::Potential(std::shared_ptr<const PotentialNode> root, int d, int m)
    : root_(std::move(root)), d_(d), m_(m), uses_state_(scan_state(*root_)) {}

std::string Potential::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

Potential parse_potential(std::string_view source, int d, int m) {
    if (d < 0 || m < 1) throw PreconditionViolated("potential needs m >= 1 control coordinates");
    Parser parser(source, d, m);
    return Potential(std::make_shared<const PotentialNode>(parser.parse()), d, m);
}

double evaluate(const Potential& p, const std::optional<Vector>& x, const Vector& u) {
    if (u.size() != p.control_dim()) throw DimensionMismatch("control has wrong length for the potential");
    if (p.uses_state()) {
        if (!x) throw PreconditionViolated("state-dependent potential needs a state");
        if (x->size() != p.state_dim()) throw DimensionMismatch("state has wrong length for the potential");
    }
    const Vector* xs = x ? &*x : nullptr;
    return Evaluator{xs, u}(p.root());
}

double birkhoff_sum(const Potential& p, const LinearSystem& sys, const Vector& x, const ControlSequence& controls) {
    double sum = 0.0;
    if (!p.uses_state()) {
        for (const Vector& u : controls) {
            if (!control_in_range(sys, u)) throw ControlOutOfRange("control value outside U");
            sum += evaluate(p, std::nullopt, u);
        }
        return sum;
    }
    Vector state = x;
    for (const Vector& u : controls) {
        sum += evaluate(p, state, u);
        state = step(sys, state, u);
    }
    return sum;
}

namespace {

// Visits every point of the tensor grid lower + spacing .* i, i in [0, n)^dim.
template <class Visit>
void for_grid(const Vector& lower, const Vector& spacing, int n, Visit visit) {
    const Eigen::Index dim = lower.size();
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Vector p(dim);
    for (;;) {
        for (Eigen::Index j = 0; j < dim; ++j) p(j) = lower(j) + spacing(j) * idx[static_cast<std::size_t>(j)];
        visit(p);
        Eigen::Index pos = 0;
        while (pos < dim && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos++)] = 0;
        if (pos == dim) return;
    }
}

}  // namespace

Minimum minimize_over_U(const Potential& p, const ConvexPolytope& u, int grid, int refine_iters) {
    if (p.uses_state()) throw PreconditionViolated("minimize_over_U needs a control-only potential");
    if (grid < 2) throw PreconditionViolated("grid must have at least 2 points per axis");
    if (u.dim() != p.control_dim()) throw DimensionMismatch("U dimension differs from the potential's control dimension");

    Minimum best{Vector(), std::numeric_limits<double>::infinity(), true, {}};
    const auto offer = [&](const Vector& c) {
        const double v = evaluate(p, std::nullopt, c);
        if (v < best.value) {
            best.value = v;
            best.argmin = c;
        }
    };

    const Vector lo = u.lower_bounds(), hi = u.upper_bounds();
    const Vector spacing = (hi - lo) / (grid - 1);
    for_grid(lo, spacing, grid, [&](const Vector& c) {
        if (contains_point(u, c, 0.0)) {
            best.empty_grid = false;
            offer(c);
        }
    });
    for (Eigen::Index i = 0; i < u.num_vertices(); ++i) offer(u.vertex(i));
    const Vector zero = Vector::Zero(u.dim());
    if (contains_point(u, zero, 0.0)) offer(zero);
    best.history.push_back(best.value);

    const bool can_project = u.dim() <= 3 || (u.halfspaces() && u.halfspaces()->size() == 2 * u.dim());
    Vector half = spacing;
    for (int round = 0; round < refine_iters; ++round) {
        const Vector center = best.argmin;
        for_grid(center - half, 2.0 * half / (grid - 1), grid, [&](const Vector& c) {
            if (can_project) {
                offer(u.nearest(c).point);
            } else if (contains_point(u, c, 0.0)) {
                offer(c);
            }
        });
        best.history.push_back(best.value);
        half *= 0.3;
    }
    return best;
}

}  // namespace invpress
