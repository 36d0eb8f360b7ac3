// policies.hpp
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rmed/divergence.hpp"
#include "rmed/duel_stats.hpp"
#include "rmed/rng.hpp"

namespace rmed {

struct ArmPair {
    Arm first;
    Arm second;
    bool operator==(const ArmPair&) const = default;
};

enum class Variant { rmed1, rmed2, rmed2fh };

// Sign of the plug-in gap used by estimate_best_opponent.
enum class DeltaSign {
    population,  // max(mu_hat(a,j) - 1/2, 0): same sign as the true gap
    literal,     // 1/2 - mu_hat(a,j), as printed next to the estimator
};

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::rmed1: return "rmed1";
        case Variant::rmed2: return "rmed2";
        case Variant::rmed2fh: return "rmed2fh";
    }
    return "?";
}

/// log(log(max(x, e^e))); never below 1.
inline double loglog(double x) {
    constexpr double e_to_e = 15.154262241479262;
    return std::log(std::log(std::max(x, e_to_e)));
}

struct RmedConfig {
    Variant variant{Variant::rmed1};
    double c{0.3};    // f(K) = c K^(1 + eps)
    double eps{0.01};
    std::optional<double> alpha;           // rmed2, rmed2fh
    std::optional<std::uint64_t> horizon;  // rmed2fh
    DeltaSign delta_sign{DeltaSign::population};

    bool operator==(const RmedConfig&) const = default;

    double f(std::size_t k) const { return c * std::pow(static_cast<double>(k), 1.0 + eps); }

    /// Every problem with the configuration; empty when usable.
    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        if (!(c >= 0.0) || !std::isfinite(c)) out.push_back("c must be a finite value >= 0");
        if (!(eps >= 0.0) || !std::isfinite(eps)) out.push_back("eps must be a finite value >= 0");
        if (variant == Variant::rmed1) {
            if (alpha) out.push_back("alpha is only used by rmed2/rmed2fh");
        } else if (!alpha) {
            out.push_back(std::string(to_string(variant)) + " requires alpha");
        } else if (!(*alpha > 0.0) || !std::isfinite(*alpha)) {
            out.push_back("alpha must be > 0");
        }
        if (variant == Variant::rmed2fh) {
            if (!horizon) out.push_back("rmed2fh requires horizon");
            else if (*horizon < 1) out.push_back("horizon must be >= 1");
        } else if (horizon) {
            out.push_back("horizon is only used by rmed2fh");
        }
        return out;
    }

    /// Times each pair is drawn in the initial phase.
    std::uint64_t initial_repeats() const {
        if (variant != Variant::rmed2fh) return 1;
        const double l = std::ceil(*alpha * loglog(static_cast<double>(*horizon)));
        return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(l));
    }
};

// ---------- target selection ----------

/// Comparison target for l: i* when i* is an opponent of l or l has no
/// opponents, otherwise the arm l fares worst against (lowest index on ties).
inline Arm rmed1_target(Arm l, const DuelStats& stats, const DivergenceSnapshot& snap) {
    bool any_opponent = false;
    for (Arm j = 0; j < stats.arms(); ++j) any_opponent = any_opponent || stats.is_opponent(l, j);
    if (!any_opponent || stats.is_opponent(l, snap.istar)) return snap.istar;
    Arm best = l == 0 ? 1 : 0;
    for (Arm j = best + 1; j < stats.arms(); ++j) {
        if (j != l && stats.empirical_mean(l, j) < stats.empirical_mean(l, best)) best = j;
    }
    return best;
}

inline Arm rmed1_target(Arm l, const DuelStats& stats) {
    return rmed1_target(l, stats, stats.snapshot());
}

/// Plug-in estimate of the cheapest arm to eliminate i with:
/// argmin over j != i of (gap(a,i) + gap(a,j)) / d+(mu_hat(i,j), 1/2),
/// a = istar, x/0 = +inf, lowest index on ties (including all-infinite).
inline Arm estimate_best_opponent(Arm i, const DuelStats& stats, Arm istar,
                                  DeltaSign sign = DeltaSign::population) {
    auto gap = [&](Arm j) {
        const double mu = stats.empirical_mean(istar, j);
        return sign == DeltaSign::population ? std::max(mu - 0.5, 0.0) : 0.5 - mu;
    };
    const double gap_i = gap(i);
    std::optional<Arm> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (Arm j = 0; j < stats.arms(); ++j) {
        if (j == i) continue;
        const double dplus = kl_plus(stats.empirical_mean(i, j), 0.5);
        const double value =
            dplus > 0.0 ? (gap_i + gap(j)) / dplus : std::numeric_limits<double>::infinity();
        if (!best || value < best_value) {
            best = j;
            best_value = value;
        }
    }
    return *best;
}

inline Arm estimate_best_opponent(Arm i, const DuelStats& stats,
                                  DeltaSign sign = DeltaSign::population) {
    return estimate_best_opponent(i, stats, stats.snapshot().istar, sign);
}

/// RMED2/RMED2FH target: the estimated best opponent `bhat` while it is an
/// opponent of l and i* has been compared with l at least
/// N(l,bhat) / loglog(x) times (x = t for RMED2, the horizon for RMED2FH);
/// otherwise rmed1_target.
inline Arm rmed2_target(Arm l, Arm bhat, const DuelStats& stats, const DivergenceSnapshot& snap,
                        std::uint64_t t, const RmedConfig& cfg) {
    const double x = cfg.variant == Variant::rmed2fh ? static_cast<double>(*cfg.horizon)
                                                     : static_cast<double>(t);
    if (stats.is_opponent(l, bhat) &&
        static_cast<double>(stats.count(l, snap.istar)) >=
            static_cast<double>(stats.count(l, bhat)) / loglog(x)) {
        return bhat;
    }
    return rmed1_target(l, stats, snap);
}

/// RMED2 form: re-estimates the best opponent from the current statistics.
inline Arm rmed2_target(Arm l, const DuelStats& stats, std::uint64_t t, const RmedConfig& cfg) {
    const auto snap = stats.snapshot();
    const Arm bhat = estimate_best_opponent(l, stats, snap.istar, cfg.delta_sign);
    return rmed2_target(l, bhat, stats, snap, t, cfg);
}

// ---------- RMED main routine ----------

/// Algorithm state of one RMED run, advanced one duel at a time.
///
/// Usage per round t = 1, 2, ...: next_pair(stats, t), record the outcome
/// into stats, then observe(stats, t). The initial phase draws every pair
/// L times (lexicographic passes). The main routine walks the current loop
/// in ascending arm order; after each draw, arms outside the remaining set
/// that pass the candidate predicate join the next loop. RMED2 re-runs the
/// forced exploration of under-sampled pairs before each loop.
class RmedPolicy {
public:
    enum class Phase { initial, forced_exploration, main };

    RmedPolicy(std::size_t k, RmedConfig cfg) : k_(k), cfg_(std::move(cfg)) {
        if (k < 2) throw std::invalid_argument("RmedPolicy needs K >= 2 arms");
        if (auto p = cfg_.problems(); !p.empty()) throw std::invalid_argument("RmedConfig: " + p.front());
        for (Arm i = 0; i < k; ++i) {
            for (Arm j = i + 1; j < k; ++j) pairs_.push_back({i, j});
        }
        f_k_ = cfg_.f(k);
        initial_draws_ = cfg_.initial_repeats() * pairs_.size();
        remaining_.assign(k, false);
        in_next_.assign(k, false);
    }

    const RmedConfig& config() const { return cfg_; }
    std::size_t arms() const { return k_; }
    Phase phase() const { return phase_; }
    std::uint64_t initial_draws() const { return initial_draws_; }

    /// Current loop L_C in draw order.
    const std::vector<Arm>& current_loop() const { return loop_; }
    /// Arms of L_C not yet drawn as l(t) in this loop.
    std::vector<Arm> remaining() const { return members(remaining_); }
    /// L_N in insertion order.
    const std::vector<Arm>& next_loop() const { return next_; }
    /// Frozen best-opponent estimates (RMED2FH, after the initial phase).
    const std::vector<Arm>& frozen_best_opponents() const { return frozen_bhat_; }
    /// Completed main loops.
    std::uint64_t loops_completed() const { return loops_; }

    ArmPair next_pair(const DuelStats& stats, std::uint64_t t) {
        if (awaiting_observe_) throw std::logic_error("RmedPolicy: next_pair called twice without observe");
        if (stats.arms() != k_) throw std::invalid_argument("RmedPolicy: stats arm count mismatch");
        awaiting_observe_ = true;
        last_was_main_ = false;

        if (phase_ == Phase::initial) {
            if (initial_emitted_ < initial_draws_) {
                return pairs_[initial_emitted_++ % pairs_.size()];
            }
            if (cfg_.variant == Variant::rmed2fh) {
                const Arm istar = stats.snapshot().istar;
                frozen_bhat_.resize(k_);
                for (Arm i = 0; i < k_; ++i) {
                    frozen_bhat_[i] = estimate_best_opponent(i, stats, istar, cfg_.delta_sign);
                }
            }
            start_loop(std::vector<Arm>(all_arms()));
        }

        if (phase_ == Phase::forced_exploration) {
            const double threshold = *cfg_.alpha * loglog(static_cast<double>(t));
            while (forced_cursor_ < pairs_.size()) {
                const auto p = pairs_[forced_cursor_];
                if (static_cast<double>(stats.count(p.first, p.second)) < threshold) return p;
                ++forced_cursor_;
            }
            phase_ = Phase::main;
        }

        if (cursor_ >= loop_.size()) {
            awaiting_observe_ = false;
            throw std::logic_error("RmedPolicy: empty loop in main phase");
        }
        const Arm l = loop_[cursor_];
        const auto snap = stats.snapshot();
        Arm m = l;
        switch (cfg_.variant) {
            case Variant::rmed1:
                m = rmed1_target(l, stats, snap);
                break;
            case Variant::rmed2:
                m = rmed2_target(l, estimate_best_opponent(l, stats, snap.istar, cfg_.delta_sign),
                                 stats, snap, t, cfg_);
                break;
            case Variant::rmed2fh:
                m = rmed2_target(l, frozen_bhat_[l], stats, snap, t, cfg_);
                break;
        }
        last_was_main_ = true;
        return {l, m};
    }

    /// Feeds back round t; `stats` must already contain its outcome.
    void observe(const DuelStats& stats, std::uint64_t t) {
        if (!awaiting_observe_) throw std::logic_error("RmedPolicy: observe without next_pair");
        awaiting_observe_ = false;
        if (!last_was_main_) return;

        remaining_[loop_[cursor_]] = false;
        const auto snap = stats.snapshot();
        for (Arm j = 0; j < k_; ++j) {
            if (!remaining_[j] && !in_next_[j] && is_candidate(snap, j, t, f_k_)) {
                in_next_[j] = true;
                next_.push_back(j);
            }
        }
        ++cursor_;
        if (cursor_ == loop_.size()) {
            if (next_.empty()) throw std::logic_error("RmedPolicy: loop ended with empty next loop");
            std::vector<Arm> next = next_;
            std::sort(next.begin(), next.end());
            ++loops_;
            start_loop(std::move(next));
        }
    }

private:
    std::vector<Arm> all_arms() const {
        std::vector<Arm> v(k_);
        for (Arm i = 0; i < k_; ++i) v[i] = i;
        return v;
    }

    static std::vector<Arm> members(const std::vector<bool>& flags) {
        std::vector<Arm> v;
        for (Arm i = 0; i < flags.size(); ++i) {
            if (flags[i]) v.push_back(i);
        }
        return v;
    }

    void start_loop(std::vector<Arm> arms) {
        loop_ = std::move(arms);
        std::fill(remaining_.begin(), remaining_.end(), false);
        for (Arm a : loop_) remaining_[a] = true;
        std::fill(in_next_.begin(), in_next_.end(), false);
        next_.clear();
        cursor_ = 0;
        if (cfg_.variant == Variant::rmed2) {
            phase_ = Phase::forced_exploration;
            forced_cursor_ = 0;
        } else {
            phase_ = Phase::main;
        }
    }

    std::size_t k_;
    RmedConfig cfg_;
    double f_k_{0.0};
    std::vector<ArmPair> pairs_;
    std::uint64_t initial_draws_{0};
    std::uint64_t initial_emitted_{0};

    Phase phase_{Phase::initial};
    std::size_t forced_cursor_{0};
    std::vector<Arm> loop_;
    std::size_t cursor_{0};
    std::vector<bool> remaining_;
    std::vector<bool> in_next_;
    std::vector<Arm> next_;
    std::vector<Arm> frozen_bhat_;
    std::uint64_t loops_{0};
    bool awaiting_observe_{false};
    bool last_was_main_{false};
};

// ---------- RUCB baseline ----------

struct RucbConfig {
    double alpha{0.51};

    bool operator==(const RucbConfig&) const = default;

    std::vector<std::string> problems() const {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) return {"rucb alpha must be > 0"};
        return {};
    }
};

/// Optimistic estimate of mu(i,j): 1 for unseen pairs, 1/2 on the diagonal,
/// otherwise mu_hat + sqrt(alpha log t / N) capped at 1.
inline double rucb_index(const DuelStats& stats, Arm i, Arm j, std::uint64_t t, double alpha) {
    if (i == j) return 0.5;
    const auto n = stats.count(i, j);
    if (n == 0) return 1.0;
    const double u = stats.empirical_mean(i, j) +
                     std::sqrt(alpha * std::log(static_cast<double>(t)) / static_cast<double>(n));
    return std::min(u, 1.0);
}

namespace detail {

inline Arm pick_uniform(const std::vector<Arm>& v, Xoshiro256& rng) {
    return v.size() == 1 ? v.front() : v[rng.below(v.size())];
}

}  // namespace detail

/// One RUCB step. l is uniform over arms whose optimistic indices are all
/// >= 1/2 (every arm when none qualifies). m maximizes u(j,l) over all j,
/// with u(l,l) = 1/2; ties go uniformly to maximizers other than l.
inline ArmPair rucb_next_pair(const DuelStats& stats, std::uint64_t t, const RucbConfig& cfg,
                              Xoshiro256& rng) {
    const std::size_t k = stats.arms();
    std::vector<Arm> candidates;
    for (Arm i = 0; i < k; ++i) {
        bool ok = true;
        for (Arm j = 0; j < k && ok; ++j) ok = j == i || rucb_index(stats, i, j, t, cfg.alpha) >= 0.5;
        if (ok) candidates.push_back(i);
    }
    if (candidates.empty()) {
        candidates.resize(k);
        for (Arm i = 0; i < k; ++i) candidates[i] = i;
    }
    const Arm l = detail::pick_uniform(candidates, rng);

    double best = -1.0;
    for (Arm j = 0; j < k; ++j) best = std::max(best, rucb_index(stats, j, l, t, cfg.alpha));
    std::vector<Arm> ties;
    for (Arm j = 0; j < k; ++j) {
        if (j != l && rucb_index(stats, j, l, t, cfg.alpha) == best) ties.push_back(j);
    }
    const Arm m = ties.empty() ? l : detail::pick_uniform(ties, rng);
    return {l, m};
}

class RucbPolicy {
public:
    RucbPolicy(std::size_t k, RucbConfig cfg) : k_(k), cfg_(cfg) {
        if (k < 2) throw std::invalid_argument("RucbPolicy needs K >= 2 arms");
        if (auto p = cfg_.problems(); !p.empty()) throw std::invalid_argument(p.front());
    }
    const RucbConfig& config() const { return cfg_; }
    ArmPair next_pair(const DuelStats& stats, std::uint64_t t, Xoshiro256& rng) const {
        return rucb_next_pair(stats, t, cfg_, rng);
    }

private:
    std::size_t k_;
    RucbConfig cfg_;
};

// ---------- uniform front ----------

using PolicyConfig = std::variant<RmedConfig, RucbConfig>;

inline std::vector<std::string> problems(const PolicyConfig& cfg) {
    return std::visit([](const auto& c) { return c.problems(); }, cfg);
}

/// Either policy behind one interface, as the simulator drives it.
class Policy {
public:
    Policy(std::size_t k, const PolicyConfig& cfg)
        : impl_(std::holds_alternative<RmedConfig>(cfg)
                    ? Impl{RmedPolicy(k, std::get<RmedConfig>(cfg))}
                    : Impl{RucbPolicy(k, std::get<RucbConfig>(cfg))}) {}

    ArmPair next_pair(const DuelStats& stats, std::uint64_t t, Xoshiro256& rng) {
        if (auto* r = std::get_if<RmedPolicy>(&impl_)) return r->next_pair(stats, t);
        return std::get<RucbPolicy>(impl_).next_pair(stats, t, rng);
    }

    void observe(const DuelStats& stats, std::uint64_t t) {
        if (auto* r = std::get_if<RmedPolicy>(&impl_)) r->observe(stats, t);
    }

    /// Rounds spent in the forced initial phase (0 for RUCB).
    std::uint64_t initial_draws() const {
        if (auto* r = std::get_if<RmedPolicy>(&impl_)) return r->initial_draws();
        return 0;
    }

private:
    using Impl = std::variant<RmedPolicy, RucbPolicy>;
    Impl impl_;
};

}  // namespace rmed
