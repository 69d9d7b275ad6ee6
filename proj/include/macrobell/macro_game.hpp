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

// Macroscopic CHSH game: N Alices and N Bobs answer every round; the verifier
// compares the per-round counts of 1-answers against their transcript
// averages and scores sqrt(N)-scale deviations with the CHSH sign pattern.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "macrobell/bell.hpp"
#include "macrobell/error.hpp"
#include "macrobell/numerics.hpp"
#include "macrobell/parallel.hpp"
#include "macrobell/random.hpp"
#include "macrobell/strategies.hpp"

namespace macrobell {

struct GameRound {
    uint8_t x = 0;
    uint8_t y = 0;
    int64_t a_count = 0;
    int64_t b_count = 0;
};

struct GameTranscript {
    int64_t n_players = 0;
    std::vector<GameRound> rounds;
};

struct ScoreReport {
    std::array<double, 4> per_pair_win_fraction{};
    std::array<uint64_t, 4> per_pair_round_count{};
    std::array<uint64_t, 4> per_pair_wins{};
    /// Minimum of per_pair_win_fraction.
    double score = 0;
    /// Binomial standard error of the win fraction of the minimizing pair.
    double score_std_err = 0;
    int worst_pair = 0;
    std::array<double, 2> average_a{};
    std::array<double, 2> average_b{};
};

inline int sign_of(double v) { return (v > 0) - (v < 0); }

/// Whether one round is won given the transcript averages. A deviation of
/// exactly sqrt(N) counts as far from the mean.
inline bool round_won(const GameRound &r, const std::array<double, 2> &average_a,
                      const std::array<double, 2> &average_b, int64_t n_players) {
    const double threshold = std::sqrt(static_cast<double>(n_players));
    const double da = static_cast<double>(r.a_count) - average_a[r.x];
    const double db = static_cast<double>(r.b_count) - average_b[r.y];
    if (std::abs(da) < threshold || std::abs(db) < threshold) return false;
    const int want = (r.x & r.y) ? -1 : 1;
    return sign_of(da) * sign_of(db) == want;
}

inline void validate(const GameTranscript &t) {
    if (t.n_players < 1) throw InvalidInput("transcript: n_players must be >= 1");
    for (const auto &r : t.rounds) {
        if (r.x > 1 || r.y > 1) throw InvalidInput("transcript: questions must be bits");
        if (r.a_count < 0 || r.a_count > t.n_players || r.b_count < 0 || r.b_count > t.n_players) {
            throw InvalidInput("transcript: counts must lie in [0, n_players]");
        }
    }
}

inline ScoreReport score_transcript(const GameTranscript &t) {
    validate(t);
    ScoreReport rep;
    std::array<double, 2> sum_a{}, sum_b{};
    std::array<uint64_t, 2> n_a{}, n_b{};
    for (const auto &r : t.rounds) {
        sum_a[r.x] += static_cast<double>(r.a_count);
        ++n_a[r.x];
        sum_b[r.y] += static_cast<double>(r.b_count);
        ++n_b[r.y];
        ++rep.per_pair_round_count[setting_index(r.x, r.y)];
    }
    for (int s = 0; s < 4; ++s) {
        if (rep.per_pair_round_count[s] == 0) {
            throw InsufficientData("transcript has no rounds with question pair " + setting_name(s));
        }
    }
    for (int v = 0; v < 2; ++v) {
        rep.average_a[v] = sum_a[v] / static_cast<double>(n_a[v]);
        rep.average_b[v] = sum_b[v] / static_cast<double>(n_b[v]);
    }
    for (const auto &r : t.rounds) {
        if (round_won(r, rep.average_a, rep.average_b, t.n_players)) ++rep.per_pair_wins[setting_index(r.x, r.y)];
    }
    rep.score = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 4; ++s) {
        rep.per_pair_win_fraction[s] =
            static_cast<double>(rep.per_pair_wins[s]) / static_cast<double>(rep.per_pair_round_count[s]);
        if (rep.per_pair_win_fraction[s] < rep.score) {
            rep.score = rep.per_pair_win_fraction[s];
            rep.worst_pair = s;
        }
    }
    const double p = rep.score;
    rep.score_std_err = std::sqrt(p * (1 - p) / static_cast<double>(rep.per_pair_round_count[rep.worst_pair]));
    return rep;
}

/// Memoryless players: each round draws its questions uniformly and its
/// counts from a fresh (seed, round) stream.
inline GameTranscript play_game(const StrategySpec &spec, int64_t n_players, int64_t n_rounds, uint64_t seed,
                                unsigned workers = 0) {
    validate(spec);
    if (n_players < 1) throw InvalidInput("play_game: n_players must be >= 1");
    if (n_rounds < 4) throw InvalidInput("play_game: n_rounds must be >= 4");
    GameTranscript t;
    t.n_players = n_players;
    t.rounds.resize(static_cast<size_t>(n_rounds));
    parallel_for(t.rounds.size(), workers, [&](size_t i) {
        Rng rng = Rng::stream(seed, Domain::kGameRound, i);
        const int s = static_cast<int>(rng.below(4));
        GameRound r;
        r.x = static_cast<uint8_t>(s >> 1);
        r.y = static_cast<uint8_t>(s & 1);
        const auto [a, b] = sample_macroscopic(spec, n_players, r.x, r.y, rng);
        r.a_count = static_cast<int64_t>(a);
        r.b_count = static_cast<int64_t>(b);
        t.rounds[i] = r;
    });
    return t;
}

/// Centered bivariate Gaussian (X, Y) with thresholds at sqrt(n).
struct GaussianTailQuery {
    double var_x = 0;
    double var_y = 0;
    double cov = 0;
    double n = 1;
};

inline void validate(const GaussianTailQuery &q) {
    if (!(q.var_x > 0) || !(q.var_y > 0)) throw InvalidInput("gaussian tail: variances must be > 0");
    if (!(q.n > 0)) throw InvalidInput("gaussian tail: n must be > 0");
    if (!std::isfinite(q.cov) || std::abs(q.cov) > std::sqrt(q.var_x * q.var_y) * (1 + 1e-12)) {
        throw InvalidInput("gaussian tail: |cov| exceeds sqrt(var_x * var_y)");
    }
}

inline constexpr double kTailTolerance = 1e-7;

/// same_side: P(X >= sqrt(n) and Y >= sqrt(n)).
/// otherwise:  P(X >= sqrt(n) and Y <= -sqrt(n)).
///
/// Integrates the density of X times the conditional upper tail of Y given X.
inline double gaussian_tail_probability(const GaussianTailQuery &q, bool same_side, double abs_tol = kTailTolerance) {
    validate(q);
    const double cov = same_side ? q.cov : -q.cov;
    const double t = std::sqrt(q.n);
    const double sx = std::sqrt(q.var_x);
    const double z0 = t / sx;
    const double cond_var = std::max(0.0, q.var_y - cov * cov / q.var_x);
    // dY/dz of the conditional mean, with X = z * sx.
    const double slope = cov / sx;

    if (cond_var <= 1e-14 * q.var_y) {
        // Y is a deterministic multiple of X.
        if (slope <= 0) return 0.0;
        return normal_upper_tail(std::max(z0, t / slope));
    }
    const double cond_sd = std::sqrt(cond_var);
    auto integrand = [&](double z) { return normal_pdf(z) * normal_upper_tail((t - z * slope) / cond_sd); };
    std::vector<double> breaks;
    if (slope > 0) breaks.push_back(t / slope);
    const double upper = std::max(z0, 0.0) + 38.0;
    return integrate(integrand, z0, upper, abs_tol, breaks).value;
}

struct TailMaximum {
    double max_prob = 0;
    GaussianTailQuery argmax;
};

namespace detail {

/// Projects (var_x, var_y, cov) onto the feasible set of the tail maximization.
inline GaussianTailQuery project_tail_query(double vx, double vy, double c, double var_cap, double cov_cap, double n) {
    const double floor = var_cap * 1e-6;
    vx = std::clamp(vx, floor, var_cap);
    vy = std::clamp(vy, floor, var_cap);
    const double cs = std::sqrt(vx * vy);
    c = std::clamp(c, -cs, std::min(cov_cap, cs));
    return {vx, vy, c, n};
}

}  // namespace detail

/// Maximizes the same-side tail probability over var_x, var_y <= var_cap,
/// cov <= cov_cap and Cauchy-Schwarz. A 33^3 grid picks the start point,
/// Nelder-Mead on the projected objective refines it.
inline TailMaximum maximize_tail_probability(double var_cap, double cov_cap, double n) {
    if (!(var_cap > 0) || !(n > 0)) throw InvalidInput("maximize_tail_probability: caps and n must be positive");
    if (!(cov_cap >= 0)) throw InvalidInput("maximize_tail_probability: cov_cap must be >= 0");
    constexpr int kGrid = 33;
    TailMaximum best{-1.0, {}};
    for (int i = 0; i < kGrid; ++i) {
        const double vx = var_cap * (i + 1) / kGrid;
        for (int j = 0; j < kGrid; ++j) {
            const double vy = var_cap * (j + 1) / kGrid;
            const double cs = std::sqrt(vx * vy);
            const double hi = std::min(cov_cap, cs);
            for (int k = 0; k < kGrid; ++k) {
                const double c = -cs + (hi + cs) * k / (kGrid - 1);
                const GaussianTailQuery q{vx, vy, std::min(c, hi), n};
                const double p = gaussian_tail_probability(q, true);
                if (p > best.max_prob) best = {p, q};
            }
        }
    }
    auto objective = [&](const std::vector<double> &v) {
        return gaussian_tail_probability(detail::project_tail_query(v[0], v[1], v[2], var_cap, cov_cap, n), true);
    };
    NelderMeadOptions opt;
    const double step = var_cap / kGrid;
    opt.initial_step = {-step, -step, -step};
    opt.x_tol = 1e-6 * var_cap;
    opt.f_tol = 1e-13;
    const auto refined = nelder_mead_maximize(objective, {best.argmax.var_x, best.argmax.var_y, best.argmax.cov}, opt);
    if (refined.value > best.max_prob) {
        best.max_prob = refined.value;
        best.argmax = detail::project_tail_query(refined.x[0], refined.x[1], refined.x[2], var_cap, cov_cap, n);
    }
    return best;
}

/// Classical players' score ceiling: twice the largest tail probability with
/// variances <= N/4 and covariance <= N/7.
inline double classical_score_bound() {
    constexpr double n = 1.0;
    return 2.0 * maximize_tail_probability(n / 4, n / 7, n).max_prob;
}

/// Gaussian-limit win probability of singlet players on one question pair:
/// both counts above their means by sqrt(N), plus both below (equal by symmetry).
inline double quantum_game_score(double n) {
    if (!(n > 0)) throw InvalidInput("quantum_game_score: n must be > 0");
    const GaussianTailQuery q{n / 4, n / 4, n / (4 * std::numbers::sqrt2), n};
    // (-X, -Y) has the same covariance matrix, so the lower tail equals the upper one.
    return 2.0 * gaussian_tail_probability(q, true);
}

}  // namespace macrobell
