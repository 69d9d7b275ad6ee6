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

// Down-conversion source: M incident photons per trial, each converting with
// probability lambda into an entangled pair whose photons survive to the
// detectors independently with probability gamma.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "macrobell/bell.hpp"
#include "macrobell/error.hpp"
#include "macrobell/parallel.hpp"
#include "macrobell/random.hpp"
#include "macrobell/strategies.hpp"

namespace macrobell {

struct SpdcParams {
    int64_t m_incident = 1000000;
    double lambda = 1e-3;
    double gamma = 1.0;
    StrategySpec strategy = QuantumSinglet::chsh();
};

/// lambda = 0 is accepted (no conversions) so that the source can be switched off.
inline void validate(const SpdcParams &p) {
    if (p.m_incident < 1) throw InvalidInput("spdc: m_incident must be >= 1");
    if (!(p.lambda >= 0 && p.lambda < 1)) throw InvalidInput("spdc: lambda must lie in [0, 1)");
    if (!(p.gamma >= 0 && p.gamma <= 1)) throw InvalidInput("spdc: gamma must lie in [0, 1]");
    validate(p.strategy);
}

struct SpdcTrial {
    double a_total = 0;
    double b_total = 0;
    int64_t conversions = 0;
};

template <typename URBG>
SpdcTrial sample_spdc_trial_detail(const SpdcParams &p, int x, int y, URBG &rng) {
    SpdcTrial out;
    out.conversions = sample_binomial(p.m_incident, p.lambda, rng);
    int64_t ones_a = 0, ones_b = 0;
    if (const auto *g = std::get_if<GlobalCoin>(&p.strategy)) {
        std::bernoulli_distribution coin(g->p_heads);
        const DeterministicTable &t = coin(rng) ? g->heads : g->tails;
        ones_a = out.conversions * t.a[x];
        ones_b = out.conversions * t.b[y];
    } else {
        const auto counts = sample_joint_counts(joint_distribution(p.strategy, x, y), out.conversions, rng);
        ones_a = counts[0] + counts[1];
        ones_b = counts[0] + counts[2];
    }
    out.a_total = static_cast<double>(sample_binomial(ones_a, p.gamma, rng));
    out.b_total = static_cast<double>(sample_binomial(ones_b, p.gamma, rng));
    return out;
}

/// Detected 1-outcomes (A_x, B_y) of one trial.
template <typename URBG>
std::pair<double, double> sample_spdc_trial(const SpdcParams &p, int x, int y, URBG &rng) {
    const auto t = sample_spdc_trial_detail(p, x, y, rng);
    return {t.a_total, t.b_total};
}

/// Mean of a_total + b_total over (0,0) trials; stands in for N.
inline double effective_n(std::span<const TrialRecord> trials) {
    double sum = 0;
    size_t n = 0;
    for (const auto &t : trials) {
        if (t.x == 0 && t.y == 0) {
            sum += t.a_total + t.b_total;
            ++n;
        }
    }
    if (n < 2) throw InsufficientData("effective_n: need >= 2 trials with setting pair 00, got " + std::to_string(n));
    return sum / static_cast<double>(n);
}

struct SpdcClassicalBound {
    double leading = 4.0;
    /// M lambda^2 / N; the bound is leading + O(correction_scale) with an
    /// unspecified constant.
    double correction_scale = 0;
};

inline SpdcClassicalBound spdc_classical_bound(const SpdcParams &p, double n_effective) {
    if (!(n_effective > 0)) throw InvalidInput("spdc_classical_bound: n_effective must be > 0");
    return {4.0, static_cast<double>(p.m_incident) * p.lambda * p.lambda / n_effective};
}

namespace detail {
inline double chsh_gain() {
    const double s = std::sin(3 * std::numbers::pi / 8);
    return 4 * s * s - 1;
}
}  // namespace detail

/// Leading (lambda -> 0) Bell parameter of the singlet strategy with survival gamma.
inline double spdc_quantum_value(double gamma) {
    if (!(gamma >= 0 && gamma <= 1)) throw InvalidInput("spdc_quantum_value: gamma must lie in [0, 1]");
    return 2 * gamma * detail::chsh_gain();
}

/// Survival probability above which the singlet strategy exceeds 4.
inline double gamma_threshold() { return 2 / detail::chsh_gain(); }

inline std::vector<TrialRecord> generate_spdc_trials(const SpdcParams &p, int64_t trials_per_setting, uint64_t seed,
                                                     unsigned workers = 0) {
    validate(p);
    std::vector<TrialRecord> trials(static_cast<size_t>(4 * trials_per_setting));
    parallel_for(trials.size(), workers, [&](size_t i) {
        const int s = static_cast<int>(i % 4);
        Rng rng = Rng::stream(seed, Domain::kTrial, i);
        const auto [a, b] = sample_spdc_trial(p, s >> 1, s & 1, rng);
        trials[i] = {static_cast<uint8_t>(s >> 1), static_cast<uint8_t>(s & 1), a, b};
    });
    return trials;
}

/// Bell parameter normalized by the effective N of the same trials.
inline BellEstimate estimate_spdc_bell(const SpdcParams &p, int64_t trials_per_setting, uint64_t seed,
                                       unsigned workers = 0, int bootstrap_resamples = 200) {
    if (trials_per_setting < 100) throw InvalidInput("estimate_spdc_bell: trials_per_setting must be >= 100");
    const auto trials = generate_spdc_trials(p, trials_per_setting, seed, workers);
    return detail::estimate(trials, detail::Normalization::kEffective, 0.0,
                            {seed, bootstrap_resamples, workers});
}

}  // namespace macrobell
