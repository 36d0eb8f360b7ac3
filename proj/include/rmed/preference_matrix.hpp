// preference_matrix.hpp
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <string>
#include <vector>

#include "rmed/divergence.hpp"

namespace rmed {

// Arms are 0-based everywhere in the library. Reports add 1 when printing.
using Arm = std::size_t;

inline constexpr double kRowSumTolerance = 1e-12;

struct Violation {
    enum class Kind { row_sum, diagonal, out_of_range };
    Kind kind;
    Arm i;
    Arm j;
    double value;  // offending entry mu(i,j)

    std::string describe() const {
        std::ostringstream os;
        os << std::setprecision(17);
        switch (kind) {
            case Kind::row_sum:
                os << "mu(" << i + 1 << "," << j + 1 << ") + mu(" << j + 1 << "," << i + 1
                   << ") != 1";
                break;
            case Kind::diagonal:
                os << "mu(" << i + 1 << "," << i + 1 << ") = " << value << ", expected 0.5";
                break;
            case Kind::out_of_range:
                os << "mu(" << i + 1 << "," << j + 1 << ") = " << value << " outside [0,1]";
                break;
        }
        return os.str();
    }
};

/// Validation failure carrying every violation found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}
    const std::vector<Violation>& violations() const { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& v) {
        std::string s = "invalid preference matrix:";
        for (const auto& x : v) s += " " + x.describe() + ";";
        return s;
    }
    std::vector<Violation> violations_;
};

/// Raw K x K table of win probabilities, row-major. mu(i,j) is the
/// probability that arm i beats arm j. No invariants are enforced here;
/// use validate() or PreferenceMatrix::create().
class PreferenceMatrix {
public:
    PreferenceMatrix() = default;

    /// Throws std::invalid_argument on non-square input, ValidationError on
    /// broken identities.
    static PreferenceMatrix create(const std::vector<std::vector<double>>& rows);

    /// Skips validation; callers take responsibility.
    static PreferenceMatrix unchecked(const std::vector<std::vector<double>>& rows);

    std::size_t size() const { return k_; }
    double operator()(Arm i, Arm j) const { return mu_[i * k_ + j]; }

    /// Gap mu(i,j) - 1/2.
    double gap(Arm i, Arm j) const { return (*this)(i, j) - 0.5; }

    bool operator==(const PreferenceMatrix&) const = default;

private:
    std::size_t k_{0};
    std::vector<double> mu_;
};

inline PreferenceMatrix PreferenceMatrix::unchecked(const std::vector<std::vector<double>>& rows) {
    PreferenceMatrix m;
    m.k_ = rows.size();
    m.mu_.reserve(m.k_ * m.k_);
    for (const auto& r : rows) {
        if (r.size() != m.k_) throw std::invalid_argument("preference matrix must be square");
        m.mu_.insert(m.mu_.end(), r.begin(), r.end());
    }
    return m;
}

/// Every violated identity: entries in [0,1], mu(i,i) = 1/2 exactly,
/// mu(i,j) + mu(j,i) = 1 within kRowSumTolerance. Empty means valid.
inline std::vector<Violation> validate(const PreferenceMatrix& m) {
    std::vector<Violation> out;
    const std::size_t k = m.size();
    for (Arm i = 0; i < k; ++i) {
        for (Arm j = 0; j < k; ++j) {
            const double v = m(i, j);
            if (!(v >= 0.0 && v <= 1.0)) out.push_back({Violation::Kind::out_of_range, i, j, v});
        }
    }
    for (Arm i = 0; i < k; ++i) {
        if (m(i, i) != 0.5) out.push_back({Violation::Kind::diagonal, i, i, m(i, i)});
        for (Arm j = i + 1; j < k; ++j) {
            if (!(std::abs(m(i, j) + m(j, i) - 1.0) <= kRowSumTolerance)) {
                out.push_back({Violation::Kind::row_sum, i, j, m(i, j)});
            }
        }
    }
    return out;
}

inline PreferenceMatrix PreferenceMatrix::create(const std::vector<std::vector<double>>& rows) {
    auto m = unchecked(rows);
    if (m.size() < 2) throw std::invalid_argument("preference matrix needs K >= 2 arms");
    if (auto v = validate(m); !v.empty()) throw ValidationError(std::move(v));
    return m;
}

/// The arm beating every other arm with probability > 1/2, if any.
inline std::optional<Arm> condorcet_winner(const PreferenceMatrix& m) {
    for (Arm i = 0; i < m.size(); ++i) {
        bool beats_all = true;
        for (Arm j = 0; j < m.size() && beats_all; ++j) {
            if (j != i && !(m(i, j) > 0.5)) beats_all = false;
        }
        if (beats_all) return i;
    }
    return std::nullopt;
}

/// Arms that beat i on average (strict: mu(i,j) < 1/2).
inline std::vector<Arm> superiors(const PreferenceMatrix& m, Arm i) {
    std::vector<Arm> out;
    for (Arm j = 0; j < m.size(); ++j) {
        if (m(i, j) < 0.5) out.push_back(j);
    }
    return out;
}

namespace detail {

inline Arm require_winner(const PreferenceMatrix& m) {
    auto w = condorcet_winner(m);
    if (!w) throw std::domain_error("preference matrix has no Condorcet winner");
    return *w;
}

// (gap(w,i) + gap(w,j)) / d(mu(i,j), 1/2): cost per log-round of
// eliminating i by dueling it against j, before the factor 1/2.
inline double elimination_cost(const PreferenceMatrix& m, Arm w, Arm i, Arm j) {
    return (m.gap(w, i) + m.gap(w, j)) / bernoulli_kl(m(i, j), 0.5);
}

}  // namespace detail

/// Cheapest superior to eliminate arm i with; ties go to the lowest index.
inline Arm best_opponent(const PreferenceMatrix& m, Arm i) {
    const Arm w = detail::require_winner(m);
    if (i == w) throw std::domain_error("best_opponent: arm is the Condorcet winner");
    Arm best = w;
    double best_cost = std::numeric_limits<double>::infinity();
    for (Arm j : superiors(m, i)) {
        const double c = detail::elimination_cost(m, w, i, j);
        if (c < best_cost) {
            best_cost = c;
            best = j;
        }
    }
    return best;
}

/// Asymptotic log T coefficients of the regret lower bound and of RMED1's bound.
struct BoundReport {
    Arm winner{0};
    // Indexed by arm; entries for the winner are unused (opponent = winner, term = 0).
    std::vector<Arm> best_opponent;
    std::vector<double> term;
    double true_lb{0.0};
    double lb1{0.0};
};

/// Lower-bound coefficient: sum over i != w of
/// min_{j superior to i} (gap(w,i) + gap(w,j)) / (2 d(mu(i,j), 1/2)).
/// Throws std::domain_error without a Condorcet winner.
inline BoundReport true_lb_coefficient(const PreferenceMatrix& m) {
    BoundReport r;
    r.winner = detail::require_winner(m);
    const std::size_t k = m.size();
    r.best_opponent.assign(k, r.winner);
    r.term.assign(k, 0.0);
    for (Arm i = 0; i < k; ++i) {
        if (i == r.winner) continue;
        const Arm b = best_opponent(m, i);
        r.best_opponent[i] = b;
        r.term[i] = detail::elimination_cost(m, r.winner, i, b) / 2.0;
        r.true_lb += r.term[i];
        r.lb1 += m.gap(r.winner, i) / (2.0 * bernoulli_kl(m(i, r.winner), 0.5));
    }
    return r;
}

/// RMED1's leading constant: sum over i != w of gap(w,i) / (2 d(mu(i,w), 1/2)).
inline double rmed1_lb_coefficient(const PreferenceMatrix& m) {
    return true_lb_coefficient(m).lb1;
}

// ---------- datasets ----------

/// Three-arm toy with a free parameter q = mu(2,3) (1-based).
inline PreferenceMatrix example1(double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("example1: q must lie in (0,1)");
    return PreferenceMatrix::create({
        {0.5, 0.7, 0.7},
        {0.3, 0.5, q},
        {0.3, 1.0 - q, 0.5},
    });
}

/// Six arXiv retrieval functions; arm 1 wins.
inline PreferenceMatrix six_rankers() {
    return PreferenceMatrix::create({
        {0.50, 0.55, 0.55, 0.54, 0.61, 0.61},
        {0.45, 0.50, 0.55, 0.55, 0.58, 0.60},
        {0.45, 0.45, 0.50, 0.54, 0.51, 0.56},
        {0.46, 0.45, 0.46, 0.50, 0.54, 0.50},
        {0.39, 0.42, 0.49, 0.46, 0.50, 0.51},
        {0.39, 0.40, 0.44, 0.50, 0.49, 0.50},
    });
}

/// Arms 2..4 form a cycle; comparing them with arm 1 is not the cheapest elimination.
inline PreferenceMatrix cyclic() {
    return PreferenceMatrix::create({
        {0.5, 0.6, 0.6, 0.6},
        {0.4, 0.5, 0.9, 0.1},
        {0.4, 0.1, 0.5, 0.9},
        {0.4, 0.9, 0.1, 0.5},
    });
}

/// Total order mu(i,j) = 0.5 + 0.05 (j - i); arm 1 wins.
inline PreferenceMatrix arithmetic(std::size_t k = 8) {
    if (k < 2 || k > 11) throw std::domain_error("arithmetic: k must lie in [2,11]");
    std::vector<std::vector<double>> rows(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            rows[i][j] = 0.5 + 0.05 * (static_cast<double>(j) - static_cast<double>(i));
        }
    }
    return PreferenceMatrix::create(rows);
}

// ---------- CSV ----------

class CsvError : public std::runtime_error {
public:
    enum class Kind { parse, ragged, too_small, validation };

    CsvError(Kind kind, std::size_t line, const std::string& what,
             std::vector<Violation> violations = {})
        : std::runtime_error(what), kind_(kind), line_(line), violations_(std::move(violations)) {}

    Kind kind() const { return kind_; }
    // 1-based line of the offending row, 0 when not tied to a line
    std::size_t line() const { return line_; }
    const std::vector<Violation>& violations() const { return violations_; }

private:
    Kind kind_;
    std::size_t line_;
    std::vector<Violation> violations_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Whole-field decimal parse; from_chars ignores the global locale.
inline std::optional<double> parse_decimal(const std::string& field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline std::string format_decimal(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Parses K lines of K comma-separated decimals (blank lines ignored) and validates.
inline PreferenceMatrix from_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string field;
        std::size_t col = 0;
        while (std::getline(ls, field, ',')) {
            ++col;
            auto v = detail::parse_decimal(detail::trim(field));
            if (!v) {
                throw CsvError(CsvError::Kind::parse, lineno,
                               "line " + std::to_string(lineno) + ", field " + std::to_string(col) +
                                   ": not a decimal number: '" + detail::trim(field) + "'");
            }
            row.push_back(*v);
        }
        if (line.back() == ',') {
            throw CsvError(CsvError::Kind::parse, lineno,
                           "line " + std::to_string(lineno) + ": trailing comma");
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw CsvError(CsvError::Kind::ragged, lineno,
                           "line " + std::to_string(lineno) + ": expected " +
                               std::to_string(rows.front().size()) + " fields, found " +
                               std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw CsvError(CsvError::Kind::too_small, 0,
                       "matrix needs at least 2 arms, found " + std::to_string(rows.size()));
    }
    if (rows.front().size() != rows.size()) {
        throw CsvError(CsvError::Kind::ragged, 0,
                       "matrix is not square: " + std::to_string(rows.size()) + " rows of " +
                           std::to_string(rows.front().size()) + " fields");
    }
    auto m = PreferenceMatrix::unchecked(rows);
    if (auto v = validate(m); !v.empty()) {
        const std::string msg = ValidationError(v).what();
        throw CsvError(CsvError::Kind::validation, 0, msg, std::move(v));
    }
    return m;
}

inline PreferenceMatrix from_csv(const std::string& text) {
    std::istringstream is(text);
    return from_csv(is);
}

/// Shortest representation that reads back to the same doubles.
inline void to_csv(const PreferenceMatrix& m, std::ostream& out) {
    std::string text;
    for (Arm i = 0; i < m.size(); ++i) {
        for (Arm j = 0; j < m.size(); ++j) {
            if (j) text += ',';
            text += detail::format_decimal(m(i, j));
        }
        text += '\n';
    }
    out << text;
}

inline std::string to_csv(const PreferenceMatrix& m) {
    std::ostringstream os;
    to_csv(m, os);
    return os.str();
}

}  // namespace rmed
