// Copyright 2026 The macrobell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Microscopic source models. Each pair emits (a, b) in {0,1}^2 given the
// settings (x, y); a trial aggregates N such pairs.
//
// Quantum angle convention: Alice rotates her half of a singlet by
// R_z(theta_x), Bob rotates his by R_z(-theta_y); the pair then behaves as a
// singlet with relative phase theta_x + theta_y and both measure sigma_x.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "macrobell/error.hpp"

namespace macrobell {

/// Local deterministic responses: Alice answers a[x], Bob answers b[y].
struct DeterministicTable {
    std::array<uint8_t, 2> a{};
    std::array<uint8_t, 2> b{};

    /// Bits of code, low to high: a0, a1, b0, b1.
    static DeterministicTable from_code(unsigned code) {
        return {{static_cast<uint8_t>(code & 1), static_cast<uint8_t>((code >> 1) & 1)},
                {static_cast<uint8_t>((code >> 2) & 1), static_cast<uint8_t>((code >> 3) & 1)}};
    }
    unsigned code() const { return a[0] | (a[1] << 1) | (b[0] << 2) | (b[1] << 3); }

    static DeterministicTable constant(uint8_t v) { return {{v, v}, {v, v}}; }
};

struct WeightedTable {
    DeterministicTable table;
    double weight = 0;
};

/// Every pair independently draws a table from the mixture.
struct LocalRandom {
    std::vector<WeightedTable> mixture;
};

/// One coin per trial selects the table used by every pair of that trial.
struct GlobalCoin {
    DeterministicTable heads;
    DeterministicTable tails;
    double p_heads = 0.5;
};

/// Shared singlets with per-setting z-rotation angles.
struct QuantumSinglet {
    std::array<double, 2> theta_a{};
    std::array<double, 2> theta_b{};

    /// Angles winning the CHSH game with probability sin^2(3 pi / 8).
    static QuantumSinglet chsh() {
        constexpr double pi = std::numbers::pi;
        return {{-3 * pi / 8, 9 * pi / 8}, {-3 * pi / 8, 9 * pi / 8}};
    }
};

using StrategySpec = std::variant<DeterministicTable, LocalRandom, GlobalCoin, QuantumSinglet>;

inline void validate(const DeterministicTable &t) {
    for (auto v : {t.a[0], t.a[1], t.b[0], t.b[1]}) {
        if (v > 1) throw InvalidInput("deterministic table entries must be 0 or 1");
    }
}

inline void validate(const StrategySpec &spec) {
    struct Visitor {
        void operator()(const DeterministicTable &t) const { validate(t); }
        void operator()(const LocalRandom &m) const {
            if (m.mixture.empty()) throw InvalidInput("local_random mixture is empty");
            double total = 0;
            for (const auto &w : m.mixture) {
                validate(w.table);
                if (!(w.weight >= 0)) throw InvalidInput("local_random weights must be >= 0");
                total += w.weight;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw InvalidInput("local_random weights must sum to 1 (got " + std::to_string(total) + ")");
            }
        }
        void operator()(const GlobalCoin &g) const {
            validate(g.heads);
            validate(g.tails);
            if (!(g.p_heads >= 0 && g.p_heads <= 1)) throw InvalidInput("global_coin p_heads must lie in [0,1]");
        }
        void operator()(const QuantumSinglet &q) const {
            for (double t : {q.theta_a[0], q.theta_a[1], q.theta_b[0], q.theta_b[1]}) {
                if (!std::isfinite(t)) throw InvalidInput("quantum_singlet angles must be finite");
            }
        }
    };
    std::visit(Visitor{}, spec);
}

inline std::string kind_name(const StrategySpec &spec) {
    static constexpr const char *names[] = {"deterministic", "local_random", "global_coin", "quantum_singlet"};
    return names[spec.index()];
}

/// Joint law of one pair's outcomes for one setting pair.
struct JointOutcomeDistribution {
    double p11 = 0, p10 = 0, p01 = 0, p00 = 0;

    double p_a1() const { return p11 + p10; }
    double p_b1() const { return p11 + p01; }
    double p_even() const { return p11 + p00; }
    /// E[a'b'] with a' = 2a - 1.
    double pm_correlator() const { return p11 + p00 - p10 - p01; }
    /// E[ab] - E[a]E[b].
    double covariance() const { return p11 - p_a1() * p_b1(); }
    std::array<double, 4> probabilities() const { return {p11, p10, p01, p00}; }
};

/// Probability of equal sigma_x outcomes on a singlet with relative phase theta.
inline double singlet_even_probability(double theta) {
    const double s = std::sin(theta / 2);
    return s * s;
}

namespace detail {

inline JointOutcomeDistribution point_mass(uint8_t a, uint8_t b) {
    JointOutcomeDistribution d;
    if (a && b) d.p11 = 1;
    else if (a) d.p10 = 1;
    else if (b) d.p01 = 1;
    else d.p00 = 1;
    return d;
}

inline void accumulate(JointOutcomeDistribution &into, const JointOutcomeDistribution &d, double w) {
    into.p11 += w * d.p11;
    into.p10 += w * d.p10;
    into.p01 += w * d.p01;
    into.p00 += w * d.p00;
}

}  // namespace detail

inline JointOutcomeDistribution joint_distribution(const StrategySpec &spec, int x, int y) {
    struct Visitor {
        int x, y;
        JointOutcomeDistribution operator()(const DeterministicTable &t) const {
            return detail::point_mass(t.a[x], t.b[y]);
        }
        JointOutcomeDistribution operator()(const LocalRandom &m) const {
            JointOutcomeDistribution d;
            for (const auto &w : m.mixture) detail::accumulate(d, detail::point_mass(w.table.a[x], w.table.b[y]), w.weight);
            return d;
        }
        JointOutcomeDistribution operator()(const GlobalCoin &g) const {
            JointOutcomeDistribution d;
            detail::accumulate(d, detail::point_mass(g.heads.a[x], g.heads.b[y]), g.p_heads);
            detail::accumulate(d, detail::point_mass(g.tails.a[x], g.tails.b[y]), 1 - g.p_heads);
            return d;
        }
        JointOutcomeDistribution operator()(const QuantumSinglet &q) const {
            const double p11 = 0.5 * singlet_even_probability(q.theta_a[x] + q.theta_b[y]);
            return {p11, 0.5 - p11, 0.5 - p11, p11};
        }
    };
    return std::visit(Visitor{x, y}, spec);
}

/// E[a0 b0] + E[a0 b1] + E[a1 b0] - E[a1 b1] for a single pair.
inline double micro_correlator(const StrategySpec &spec) {
    double sum = 0;
    for (int s = 0; s < 4; ++s) {
        const double e = joint_distribution(spec, s >> 1, s & 1).p11;
        sum += s == 3 ? -e : e;
    }
    return sum;
}

/// cov(a0,b0) + cov(a0,b1) + cov(a1,b0) - cov(a1,b1) for a single pair.
inline double micro_covariance_combination(const StrategySpec &spec) {
    double sum = 0;
    for (int s = 0; s < 4; ++s) {
        const double c = joint_distribution(spec, s >> 1, s & 1).covariance();
        sum += s == 3 ? -c : c;
    }
    return sum;
}

/// Probability of winning the CHSH game (x AND y == a XOR b) with uniform questions.
inline double chsh_win_probability(const StrategySpec &spec) {
    double win = 0;
    for (int s = 0; s < 4; ++s) {
        const auto d = joint_distribution(spec, s >> 1, s & 1);
        win += s == 3 ? d.p10 + d.p01 : d.p_even();
    }
    return win / 4;
}

template <typename URBG>
int64_t sample_binomial(int64_t n, double p, URBG &rng) {
    if (n <= 0 || p <= 0) return 0;
    if (p >= 1) return n;
    std::binomial_distribution<int64_t> dist(n, p);
    return dist(rng);
}

/// Multinomial counts (n11, n10, n01, n00) of n pairs drawn from d, via a
/// chain of conditional binomials.
template <typename URBG>
std::array<int64_t, 4> sample_joint_counts(const JointOutcomeDistribution &d, int64_t n, URBG &rng) {
    const auto p = d.probabilities();
    std::array<int64_t, 4> counts{};
    int64_t remaining = n;
    double mass = 1.0;
    for (int k = 0; k < 3 && remaining > 0; ++k) {
        const double cond = mass > 0 ? p[k] / mass : 0.0;
        counts[k] = sample_binomial(remaining, std::min(1.0, std::max(0.0, cond)), rng);
        remaining -= counts[k];
        mass -= p[k];
    }
    counts[3] = remaining;
    return counts;
}

/// Aggregate outcomes (A_x, B_y) of one trial with n_pairs pairs.
template <typename URBG>
std::pair<double, double> sample_macroscopic(const StrategySpec &spec, int64_t n_pairs, int x, int y, URBG &rng) {
    if (n_pairs < 1) throw InvalidInput("sample_macroscopic: n_pairs must be >= 1");
    if (const auto *g = std::get_if<GlobalCoin>(&spec)) {
        std::bernoulli_distribution coin(g->p_heads);
        const DeterministicTable &t = coin(rng) ? g->heads : g->tails;
        const double n = static_cast<double>(n_pairs);
        return {n * t.a[x], n * t.b[y]};
    }
    const auto counts = sample_joint_counts(joint_distribution(spec, x, y), n_pairs, rng);
    return {static_cast<double>(counts[0] + counts[1]), static_cast<double>(counts[0] + counts[2])};
}

}  // namespace macrobell
