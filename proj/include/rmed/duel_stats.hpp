// duel_stats.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rmed/divergence.hpp"
#include "rmed/preference_matrix.hpp"

namespace rmed {

/// Relative gap below which two divergences count as tied. Mathematically
/// equal sums built from different terms can differ in the last bits.
inline constexpr double kTieTolerance = 1e-12;

/// Per-arm empirical divergences and their minimizer.
struct DivergenceSnapshot {
    std::vector<double> divergence;  // I_i(t)
    Arm istar{0};                    // lowest-index minimizer
    double istar_value{0.0};         // I*(t)
};

/// Sufficient statistics of the duels observed so far.
///
/// Each unordered pair {i,j}, i < j, stores the comparison count and the
/// number of wins of the lower-indexed arm; both ordered reads derive from
/// that single counter. The term N_ij d(mu_hat_ij, 1/2) is cached per pair
/// and refreshed on record(), so empirical_divergence() costs O(K) additions
/// and no logarithms. Sums run in ascending arm order, so identical record
/// sequences give bit-identical snapshots.
class DuelStats {
public:
    explicit DuelStats(std::size_t k) : k_(k), pairs_(k * (k > 0 ? k - 1 : 0) / 2) {
        if (k < 2) throw std::invalid_argument("DuelStats needs K >= 2 arms");
    }

    std::size_t arms() const { return k_; }

    /// Records one duel between i and j won by `winner`. Order of (i,j) is irrelevant.
    void record(Arm i, Arm j, Arm winner) {
        if (i >= k_ || j >= k_) throw std::out_of_range("DuelStats::record: arm out of range");
        if (i == j) throw std::invalid_argument("DuelStats::record: self-duel carries no statistic");
        if (winner != i && winner != j) {
            throw std::invalid_argument("DuelStats::record: winner must be one of the pair");
        }
        const Arm lo = i < j ? i : j;
        auto& p = pairs_[index(i, j)];
        ++p.n;
        if (winner == lo) ++p.wins_low;
        p.weighted_kl = weighted_half_kl(p.wins_low, p.n);
        ++total_;
    }

    /// N_ij; zero for i == j.
    std::uint64_t count(Arm i, Arm j) const {
        if (i == j) return 0;
        return pairs_[index(i, j)].n;
    }

    /// Times i was preferred over j.
    std::uint64_t wins(Arm i, Arm j) const {
        if (i == j) return 0;
        const auto& p = pairs_[index(i, j)];
        return i < j ? p.wins_low : p.n - p.wins_low;
    }

    /// Total non-self duels recorded.
    std::uint64_t total() const { return total_; }

    /// mu_hat(i,j) with 0/0 = 1/2 and mu_hat(i,i) = 1/2.
    double empirical_mean(Arm i, Arm j) const {
        if (i == j) return 0.5;
        const auto& p = pairs_[index(i, j)];
        if (p.n == 0) return 0.5;
        const auto w = i < j ? p.wins_low : p.n - p.wins_low;
        return static_cast<double>(w) / static_cast<double>(p.n);
    }

    /// Opponents of i: every j != i with mu_hat(i,j) <= 1/2.
    std::vector<Arm> empirical_opponents(Arm i) const {
        std::vector<Arm> out;
        for (Arm j = 0; j < k_; ++j) {
            if (j != i && is_opponent(i, j)) out.push_back(j);
        }
        return out;
    }

    bool is_opponent(Arm i, Arm j) const { return j != i && empirical_mean(i, j) <= 0.5; }

    /// I_i(t) = sum over opponents j of N_ij d(mu_hat_ij, 1/2).
    double empirical_divergence(Arm i) const {
        double sum = 0.0;
        for (Arm j = 0; j < k_; ++j) {
            if (is_opponent(i, j)) sum += pairs_[index(i, j)].weighted_kl;
        }
        return sum;
    }

    /// i* is the lowest-index arm within kTieTolerance of the minimum.
    DivergenceSnapshot snapshot() const {
        DivergenceSnapshot s;
        s.divergence.resize(k_);
        for (Arm i = 0; i < k_; ++i) s.divergence[i] = empirical_divergence(i);
        const double lowest = *std::min_element(s.divergence.begin(), s.divergence.end());
        s.istar = 0;
        while (s.divergence[s.istar] > lowest + kTieTolerance * std::max(1.0, lowest)) ++s.istar;
        s.istar_value = s.divergence[s.istar];
        return s;
    }

    /// True when arm w empirically beats every other arm (mu_hat(w,j) > 1/2).
    bool beats_all(Arm w) const {
        for (Arm j = 0; j < k_; ++j) {
            if (j != w && !(empirical_mean(w, j) > 0.5)) return false;
        }
        return true;
    }

    bool operator==(const DuelStats& o) const {
        if (k_ != o.k_ || total_ != o.total_) return false;
        for (std::size_t p = 0; p < pairs_.size(); ++p) {
            if (pairs_[p].n != o.pairs_[p].n || pairs_[p].wins_low != o.pairs_[p].wins_low) return false;
        }
        return true;
    }

private:
    struct Pair {
        std::uint64_t n{0};
        std::uint64_t wins_low{0};
        double weighted_kl{0.0};
    };

    // n d(w/n, 1/2), written symmetrically in w and n - w so both arms of
    // the pair read the identical value.
    static double weighted_half_kl(std::uint64_t w, std::uint64_t n) {
        const double nd = static_cast<double>(n);
        const double a = static_cast<double>(w) / nd;
        const double b = static_cast<double>(n - w) / nd;
        const double d = detail::xlogxy(a, 0.5) + detail::xlogxy(b, 0.5);
        return nd * (d > 0.0 ? d : 0.0);
    }

    // Row-major upper triangle without the diagonal.
    std::size_t index(Arm i, Arm j) const {
        const Arm lo = i < j ? i : j;
        const Arm hi = i < j ? j : i;
        return lo * (2 * k_ - lo - 1) / 2 + (hi - lo - 1);
    }

    std::size_t k_;
    std::vector<Pair> pairs_;
    std::uint64_t total_{0};
};

/// Candidate predicate: I_i(t) - I*(t) <= log t + f(K).
inline bool is_candidate(const DivergenceSnapshot& snap, Arm i, std::uint64_t t, double f_k) {
    return snap.divergence[i] - snap.istar_value <= std::log(static_cast<double>(t)) + f_k;
}

inline bool is_candidate(const DuelStats& stats, Arm i, std::uint64_t t, double f_k) {
    return is_candidate(stats.snapshot(), i, t, f_k);
}

}  // namespace rmed
