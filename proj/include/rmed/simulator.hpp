// simulator.hpp
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rmed/duel_stats.hpp"
#include "rmed/policies.hpp"
#include "rmed/preference_matrix.hpp"
#include "rmed/rng.hpp"

namespace rmed {

/// Draws one comparison: i wins with probability mu(i,j). Always consumes
/// one uniform, including for i == j, which returns i.
inline Arm duel(const PreferenceMatrix& m, Arm i, Arm j, Xoshiro256& rng) {
    const double u = rng.uniform();
    if (i == j) return i;
    return u < m(i, j) ? i : j;
}

/// Per-round regret of comparing (i,j): (gap(w,i) + gap(w,j)) / 2.
inline double regret_increment(const PreferenceMatrix& m, Arm winner, Arm i, Arm j) {
    return (m.gap(winner, i) + m.gap(winner, j)) / 2.0;
}

inline double regret_increment(const PreferenceMatrix& m, Arm i, Arm j) {
    return regret_increment(m, detail::require_winner(m), i, j);
}

/// Rounds floor(10^(k/20)), k = 0, 1, ..., deduplicated and capped at the
/// horizon, with the horizon itself always last.
inline std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon) {
    std::vector<std::uint64_t> out;
    for (int k = 0;; ++k) {
        const auto t = static_cast<std::uint64_t>(std::floor(std::pow(10.0, k / 20.0)));
        if (t >= horizon) break;
        if (out.empty() || out.back() != t) out.push_back(t);
    }
    out.push_back(horizon);
    return out;
}

struct Checkpoint {
    std::uint64_t t;
    double regret;  // cumulative R(t)
    bool operator==(const Checkpoint&) const = default;
};

struct RegretTrace {
    std::vector<Checkpoint> checkpoints;
    std::uint64_t horizon{0};
    double final_regret{0.0};
    // Rounds whose starting statistics did not show the true winner beating every arm.
    std::uint64_t winner_failures{0};
    std::uint64_t self_duels{0};
    // K x K row-major; off-diagonal N_ij at the horizon, diagonal = self-duels of arm i.
    std::size_t arms{0};
    std::vector<std::uint64_t> duels;

    std::uint64_t duel_count(Arm i, Arm j) const { return duels[i * arms + j]; }
    bool operator==(const RegretTrace&) const = default;
};

struct RunSpec {
    PreferenceMatrix matrix;
    PolicyConfig policy;
    std::uint64_t horizon{0};
    std::uint64_t seed{0};
    std::vector<std::uint64_t> checkpoints;  // empty: checkpoint_grid(horizon)
};

/// Every reason the spec cannot run; empty when runnable.
inline std::vector<std::string> problems(const RunSpec& spec) {
    std::vector<std::string> out;
    if (spec.matrix.size() < 2) out.push_back("matrix needs K >= 2 arms");
    else if (!condorcet_winner(spec.matrix)) out.push_back("matrix has no Condorcet winner; regret is undefined");
    if (spec.horizon < 1) out.push_back("horizon must be >= 1");
    for (auto& p : problems(spec.policy)) out.push_back(p);
    if (out.empty()) {
        const Policy policy(spec.matrix.size(), spec.policy);
        if (spec.horizon < policy.initial_draws()) {
            out.push_back("horizon " + std::to_string(spec.horizon) + " is shorter than the initial phase (" +
                          std::to_string(policy.initial_draws()) + " draws)");
        }
    }
    for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
        const auto t = spec.checkpoints[c];
        if (t < 1 || t > spec.horizon || (c > 0 && t <= spec.checkpoints[c - 1])) {
            out.push_back("checkpoints must be strictly increasing within [1, horizon]");
            break;
        }
    }
    return out;
}

struct NoObserver {
    void operator()(std::uint64_t, ArmPair, Arm) const {}
};

/// Executes exactly `horizon` duels. Identical specs give identical traces.
/// `on_round(t, pair, winner)` sees every duel. Throws std::invalid_argument
/// for unrunnable specs and std::runtime_error when the policy misbehaves
/// mid-run.
template <typename Observer = NoObserver>
RegretTrace run(const RunSpec& spec, Observer&& on_round = {}) {
    if (auto p = problems(spec); !p.empty()) throw std::invalid_argument("run: " + p.front());
    const auto& m = spec.matrix;
    const std::size_t k = m.size();
    const Arm winner = *condorcet_winner(m);

    std::vector<double> increment(k * k);
    for (Arm i = 0; i < k; ++i) {
        for (Arm j = 0; j < k; ++j) increment[i * k + j] = regret_increment(m, winner, i, j);
    }
    const auto grid = spec.checkpoints.empty() ? checkpoint_grid(spec.horizon) : spec.checkpoints;

    RegretTrace trace;
    trace.horizon = spec.horizon;
    trace.arms = k;
    trace.duels.assign(k * k, 0);
    trace.checkpoints.reserve(grid.size());

    DuelStats stats(k);
    Policy policy(k, spec.policy);
    Xoshiro256 rng(spec.seed);
    double regret = 0.0;
    std::size_t next_checkpoint = 0;

    for (std::uint64_t t = 1; t <= spec.horizon; ++t) {
        if (!stats.beats_all(winner)) ++trace.winner_failures;
        ArmPair pair;
        try {
            pair = policy.next_pair(stats, t, rng);
        } catch (const std::logic_error& e) {
            throw std::runtime_error("policy failed at round " + std::to_string(t) + ": " + e.what());
        }
        if (pair.first >= k || pair.second >= k) {
            throw std::runtime_error("policy emitted an arm out of range at round " + std::to_string(t));
        }
        const Arm w = duel(m, pair.first, pair.second, rng);
        if (pair.first != pair.second) {
            stats.record(pair.first, pair.second, w);
        } else {
            ++trace.self_duels;
            ++trace.duels[pair.first * k + pair.first];
        }
        regret += increment[pair.first * k + pair.second];
        on_round(t, pair, w);
        try {
            policy.observe(stats, t);
        } catch (const std::logic_error& e) {
            throw std::runtime_error("policy failed at round " + std::to_string(t) + ": " + e.what());
        }
        if (next_checkpoint < grid.size() && grid[next_checkpoint] == t) {
            trace.checkpoints.push_back({t, regret});
            ++next_checkpoint;
        }
    }

    for (Arm i = 0; i < k; ++i) {
        for (Arm j = 0; j < k; ++j) {
            if (i != j) trace.duels[i * k + j] = stats.count(i, j);
        }
    }
    trace.final_regret = regret;
    return trace;
}

/// R(T) rebuilt from the final duel counts: sum over i < j of N_ij r(i,j)
/// plus self-duels times r(i,i).
inline double recomputed_regret(const RegretTrace& trace, const PreferenceMatrix& m) {
    const Arm winner = detail::require_winner(m);
    double total = 0.0;
    for (Arm i = 0; i < trace.arms; ++i) {
        for (Arm j = i; j < trace.arms; ++j) {
            total += static_cast<double>(trace.duel_count(i, j)) * regret_increment(m, winner, i, j);
        }
    }
    return total;
}

/// Sum over unordered pairs of N_ij plus self-duels; equals the horizon.
inline std::uint64_t total_duels(const RegretTrace& trace) {
    std::uint64_t total = 0;
    for (Arm i = 0; i < trace.arms; ++i) {
        for (Arm j = i; j < trace.arms; ++j) total += trace.duel_count(i, j);
    }
    return total;
}

struct RegretSummary {
    std::vector<std::uint64_t> t;
    std::vector<double> mean;
    std::vector<double> sd;  // unbiased; 0 for a single run
    std::size_t runs{0};
};

/// Per-checkpoint sample mean and standard deviation, summed in trace order.
inline RegretSummary aggregate(const std::vector<RegretTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("aggregate: no traces");
    const auto& first = traces.front().checkpoints;
    RegretSummary s;
    s.runs = traces.size();
    for (const auto& tr : traces) {
        bool same = tr.checkpoints.size() == first.size();
        for (std::size_t c = 0; same && c < first.size(); ++c) same = tr.checkpoints[c].t == first[c].t;
        if (!same) throw std::invalid_argument("aggregate: traces have different checkpoint rounds");
    }
    const double n = static_cast<double>(traces.size());
    for (std::size_t c = 0; c < first.size(); ++c) {
        double sum = 0.0;
        for (const auto& tr : traces) sum += tr.checkpoints[c].regret;
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& tr : traces) {
            const double d = tr.checkpoints[c].regret - mean;
            ss += d * d;
        }
        s.t.push_back(first[c].t);
        s.mean.push_back(mean);
        s.sd.push_back(traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
    }
    return s;
}

/// Runs every spec on up to `threads` workers; results keep input order.
/// The first failure is rethrown after all workers stop.
inline std::vector<RegretTrace> run_all(const std::vector<RunSpec>& specs, unsigned threads) {
    std::vector<RegretTrace> out(specs.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(specs.size())));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < specs.size() && !failed; i = next++) {
            try {
                out[i] = run(specs[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace rmed
