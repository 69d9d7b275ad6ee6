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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "macrobell/bell.hpp"
#include "macrobell/experiment.hpp"
#include "macrobell/strategies.hpp"

namespace mb = macrobell;
using std::numbers::sqrt2;

TEST(BellParameter, SingletCovariancesGiveTsirelson) {
    for (double n : {1.0, 10.0, 1234.0}) {
        const double c = n / (4 * sqrt2);
        EXPECT_NEAR(mb::bell_parameter(c, c, c, -c, n), 2 * sqrt2, 1e-12);
    }
    EXPECT_EQ(mb::bell_parameter(0, 0, 0, 0, 5), 0.0);
}

TEST(BellParameter, GlobalCoinCovariancesGiveTwoN) {
    // all four covariances are +N^2/4; the minus sign of the 11 term gives 2N
    const double n = 100, c = n * n / 4;
    EXPECT_NEAR(mb::bell_parameter(c, c, c, c, n), 2 * n, 1e-9);
}

TEST(BellParameter, RejectsNonPositiveN) {
    EXPECT_THROW(mb::bell_parameter(1, 1, 1, 1, 0), mb::InvalidInput);
    EXPECT_THROW(mb::bell_parameter(1, 1, 1, 1, -3), mb::InvalidInput);
}

TEST(TraditionalBellParameter, Examples) {
    // +-1 joint means of the singlet strategy
    std::array<double, 4> q{};
    const auto spec = mb::StrategySpec{mb::QuantumSinglet::chsh()};
    for (int s = 0; s < 4; ++s) q[s] = mb::joint_distribution(spec, s >> 1, s & 1).pm_correlator();
    EXPECT_NEAR(mb::traditional_bell_parameter(q), 2 * sqrt2, 1e-12);
    EXPECT_DOUBLE_EQ(mb::traditional_bell_parameter({1, 1, 1, 1}), 2.0);
    EXPECT_DOUBLE_EQ(mb::traditional_bell_parameter({0, 0, 0, 0}), 0.0);
}

TEST(Bounds, ClosedForms) {
    EXPECT_NEAR(mb::classical_bound(0), 16.0 / 7, 1e-12);
    EXPECT_NEAR(mb::classical_bound(0.01), 5.645714285714, 1e-9);
    EXPECT_NEAR(mb::classical_bound(1), 50.285714285714, 1e-9);
    EXPECT_NEAR(mb::quantum_lower_bound(0), 2 * sqrt2, 1e-12);
    EXPECT_NEAR(mb::quantum_lower_bound(1e-4), 2.506827, 1e-6);
    EXPECT_THROW(mb::classical_bound(-1e-9), mb::InvalidInput);
    EXPECT_THROW(mb::quantum_lower_bound(-1), mb::InvalidInput);
}

TEST(Bounds, QuantumLowerBoundRoot) {
    // Root of 2*sqrt2 - 16 e - 32 sqrt(e): quadratic in s = sqrt(e).
    const double s = (-32 + std::sqrt(32.0 * 32 + 4 * 16 * 2 * sqrt2)) / 32;
    const double root = s * s;
    EXPECT_NEAR(mb::quantum_lower_bound(root), 0.0, 1e-12);
    EXPECT_NEAR(root, 0.0071899, 1e-6);
    EXPECT_GT(mb::quantum_lower_bound(root - 1e-6), 0.0);
    EXPECT_LT(mb::quantum_lower_bound(root + 1e-6), 0.0);
}

TEST(EstimateBell, ConstantDataGivesZero) {
    std::vector<mb::TrialRecord> trials;
    for (int rep = 0; rep < 4; ++rep) {
        for (uint8_t s = 0; s < 4; ++s) trials.push_back({uint8_t(s >> 1), uint8_t(s & 1), 3.0, 4.0});
    }
    const auto e = mb::estimate_bell(trials, 10, {1, 50, 1});
    EXPECT_EQ(e.b_hat, 0.0);
    EXPECT_EQ(e.std_err, 0.0);
    for (auto c : e.trials_per_setting) EXPECT_EQ(c, 4u);
}

TEST(EstimateBell, MissingSettingNamesThePair) {
    std::vector<mb::TrialRecord> trials;
    for (int rep = 0; rep < 3; ++rep) {
        trials.push_back({0, 0, 1, 1});
        trials.push_back({0, 1, 1, 2});
        trials.push_back({1, 0, 2, 1});
    }
    try {
        mb::estimate_bell(trials, 10);
        FAIL() << "expected InsufficientData";
    } catch (const mb::InsufficientData &e) {
        EXPECT_NE(std::string(e.what()).find("11"), std::string::npos) << e.what();
    }
    trials.push_back({1, 1, 0, 0});
    EXPECT_THROW(mb::estimate_bell(trials, 10), mb::InsufficientData);  // one trial is not enough
}

TEST(EstimateBell, GlobalCoinNearTwoN) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 100;
    opt.trials_per_setting = 10000;
    opt.seed = 5;
    const mb::GlobalCoin coin{mb::DeterministicTable::constant(1), mb::DeterministicTable::constant(0), 0.5};
    const auto e = mb::run_bell_experiment(coin, opt);
    EXPECT_NEAR(e.b_hat, 200, 10);
}

TEST(EstimateBell, QuantumNearTsirelson) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 100;
    opt.trials_per_setting = 100000;
    opt.seed = 17;
    const auto e = mb::run_bell_experiment(mb::QuantumSinglet::chsh(), opt);
    EXPECT_NEAR(e.b_hat, 2.8284, 0.05);
    EXPECT_GT(e.std_err, 0.0);
    EXPECT_LT(e.std_err, 0.02);
}

TEST(EstimateBell, DeterministicGivenSeedAndWorkers) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 20;
    opt.trials_per_setting = 2000;
    opt.seed = 99;
    opt.bootstrap_resamples = 60;
    opt.workers = 1;
    const auto a = mb::run_bell_experiment(mb::QuantumSinglet::chsh(), opt);
    opt.workers = 4;
    const auto b = mb::run_bell_experiment(mb::QuantumSinglet::chsh(), opt);
    EXPECT_EQ(a.b_hat, b.b_hat);
    EXPECT_EQ(a.std_err, b.std_err);
    opt.seed = 100;
    EXPECT_NE(mb::run_bell_experiment(mb::QuantumSinglet::chsh(), opt).b_hat, a.b_hat);
}

TEST(Noise, ZeroEpsilonIsIdentity) {
    auto rng = mb::Rng::stream(1, mb::Domain::kNoise, 0);
    for (double v : {-3.0, 0.0, 41.5}) EXPECT_EQ(mb::inject_noise(v, {0.0, mb::NoiseMode::kIndependent}, 100, rng), v);
}

TEST(Noise, VarianceIsEpsilonN) {
    auto rng = mb::Rng::stream(2, mb::Domain::kNoise, 0);
    std::vector<double> r(100000);
    for (auto &v : r) v = mb::inject_noise(0.0, {0.01, mb::NoiseMode::kIndependent}, 100, rng);
    EXPECT_NEAR(mb::variance(r), 1.0, 0.03);
    EXPECT_THROW(mb::inject_noise(0.0, {-0.1, mb::NoiseMode::kIndependent}, 100, rng), mb::InvalidInput);
}

TEST(Noise, CommonModeSharesOneDraw) {
    auto rng = mb::Rng::stream(3, mb::Domain::kNoise, 0);
    for (int i = 0; i < 100; ++i) {
        mb::TrialRecord t{0, 0, 10, 20};
        mb::inject_trial_noise(t, {0.5, mb::NoiseMode::kCommonMode}, 100, rng);
        EXPECT_NEAR(t.b_total - t.a_total, 10.0, 1e-12);
    }
}

TEST(Noise, CommonModeOnUncorrelatedSourceStaysClassical) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 100;
    opt.trials_per_setting = 100000 / 4;
    opt.seed = 8;
    opt.noise = {0.01, mb::NoiseMode::kCommonMode};
    mb::LocalRandom coins;
    for (unsigned c = 0; c < 16; ++c) coins.mixture.push_back({mb::DeterministicTable::from_code(c), 1.0 / 16});
    const auto e = mb::run_bell_experiment(coins, opt);
    EXPECT_LE(e.b_hat, mb::classical_bound(0.01));
}

TEST(Nonlinearity, GlobalMixtureExceedsComponents) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 100;
    opt.trials_per_setting = 5000;
    opt.seed = 4;
    const auto ones = mb::run_bell_experiment(mb::DeterministicTable::constant(1), opt);
    const auto zeros = mb::run_bell_experiment(mb::DeterministicTable::constant(0), opt);
    const auto mix = mb::run_bell_experiment(
        mb::GlobalCoin{mb::DeterministicTable::constant(1), mb::DeterministicTable::constant(0), 0.5}, opt);
    EXPECT_EQ(ones.b_hat, 0.0);
    EXPECT_EQ(zeros.b_hat, 0.0);
    EXPECT_GT(mix.b_hat, ones.b_hat / 2 + zeros.b_hat / 2 + 100);
}

TEST(ChshReduction, SinglePairMatchesTraditional) {
    mb::ExperimentOptions opt;
    opt.n_pairs = 1;
    opt.trials_per_setting = 100000;
    opt.seed = 21;
    const auto trials = mb::generate_trials(mb::QuantumSinglet::chsh(), opt);
    const auto e = mb::estimate_bell(trials, 1, {opt.seed, 200, 0});
    const double trad = mb::traditional_bell_parameter(mb::empirical_pm_correlators(trials));
    EXPECT_NEAR(e.b_hat, trad, 3 * e.std_err);
    EXPECT_NEAR(e.b_hat, 2 * sqrt2, 4 * e.std_err);
}
