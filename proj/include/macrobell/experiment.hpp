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

#include <cstdint>
#include <vector>

#include "macrobell/bell.hpp"
#include "macrobell/parallel.hpp"
#include "macrobell/random.hpp"
#include "macrobell/strategies.hpp"

namespace macrobell {

struct ExperimentOptions {
    int64_t n_pairs = 100;
    int64_t trials_per_setting = 10000;
    uint64_t seed = 1;
    NoiseSpec noise{};
    unsigned workers = 0;
    int bootstrap_resamples = 200;
};

/// Trials interleave the setting pairs: trial i uses setting pair i mod 4.
/// Trial i draws from its own (seed, i) stream.
inline std::vector<TrialRecord> generate_trials(const StrategySpec &spec, const ExperimentOptions &opt) {
    validate(spec);
    if (opt.n_pairs < 1) throw InvalidInput("n_pairs must be >= 1");
    if (opt.trials_per_setting < 2) throw InvalidInput("trials_per_setting must be >= 2");
    std::vector<TrialRecord> trials(static_cast<size_t>(4 * opt.trials_per_setting));
    parallel_for(trials.size(), opt.workers, [&](size_t i) {
        const int s = static_cast<int>(i % 4);
        TrialRecord t;
        t.x = static_cast<uint8_t>(s >> 1);
        t.y = static_cast<uint8_t>(s & 1);
        Rng rng = Rng::stream(opt.seed, Domain::kTrial, i);
        const auto [a, b] = sample_macroscopic(spec, opt.n_pairs, t.x, t.y, rng);
        t.a_total = a;
        t.b_total = b;
        if (opt.noise.epsilon > 0) {
            Rng noise_rng = Rng::stream(opt.seed, Domain::kNoise, i);
            inject_trial_noise(t, opt.noise, opt.n_pairs, noise_rng);
        }
        trials[i] = t;
    });
    return trials;
}

inline BellEstimate run_bell_experiment(const StrategySpec &spec, const ExperimentOptions &opt) {
    const auto trials = generate_trials(spec, opt);
    return estimate_bell(trials, opt.n_pairs, {opt.seed, opt.bootstrap_resamples, opt.workers});
}

}  // namespace macrobell
