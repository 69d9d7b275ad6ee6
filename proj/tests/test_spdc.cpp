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
#include <vector>

#include "macrobell/spdc.hpp"

namespace mb = macrobell;

namespace {
const double kLeading = 2 + 2 * std::numbers::sqrt2;  // 2(4 sin^2(3pi/8) - 1)
}

TEST(SpdcTrial, NoConversionsOrNoDetection) {
    auto rng = mb::Rng::stream(1, mb::Domain::kTest, 0);
    mb::SpdcParams p;
    p.lambda = 0;
    for (int i = 0; i < 10; ++i) EXPECT_EQ(mb::sample_spdc_trial(p, i & 1, 0, rng), std::make_pair(0.0, 0.0));
    p.lambda = 0.01;
    p.gamma = 0;
    for (int i = 0; i < 10; ++i) EXPECT_EQ(mb::sample_spdc_trial(p, 1, i & 1, rng), std::make_pair(0.0, 0.0));
}

TEST(SpdcTrial, MeansMatchBinomialComposition) {
    mb::SpdcParams p;
    p.m_incident = 100000;
    p.lambda = 0.01;
    auto rng = mb::Rng::stream(2, mb::Domain::kTest, 0);
    constexpr int kTrials = 20000;
    double sum_a = 0, sum_k = 0;
    for (int i = 0; i < kTrials; ++i) {
        const auto t = mb::sample_spdc_trial_detail(p, 0, 0, rng);
        sum_a += t.a_total;
        sum_k += static_cast<double>(t.conversions);
    }
    // K ~ Bin(M, lambda); A | K ~ Bin(K, 1/2)
    const double var_k = 1e5 * 0.01 * 0.99;
    EXPECT_NEAR(sum_k / kTrials, 1000, 3 * std::sqrt(var_k / kTrials));
    const double var_a = var_k / 4 + 1000.0 / 4;
    EXPECT_NEAR(sum_a / kTrials, 500, 3 * std::sqrt(var_a / kTrials));
}

TEST(EffectiveN, ConstantAndMonteCarlo) {
    std::vector<mb::TrialRecord> t{{0, 0, 3, 4}, {0, 0, 3, 4}, {1, 1, 9, 9}};
    EXPECT_DOUBLE_EQ(mb::effective_n(t), 7.0);
    t.pop_back();
    t.pop_back();
    EXPECT_THROW(mb::effective_n(t), mb::InsufficientData);

    mb::SpdcParams p;
    p.m_incident = 100000;
    p.lambda = 0.01;
    const double full = mb::effective_n(mb::generate_spdc_trials(p, 2000, 3, 0));
    EXPECT_NEAR(full, 1000, 50);
    p.gamma = 0.5;
    const double half = mb::effective_n(mb::generate_spdc_trials(p, 2000, 3, 0));
    EXPECT_NEAR(half / full, 0.5, 0.025);
}

TEST(SpdcClassicalBound, LeadingAndScale) {
    mb::SpdcParams p;
    p.m_incident = 100000;
    p.lambda = 0.01;
    const auto b = mb::spdc_classical_bound(p, 1000);
    EXPECT_EQ(b.leading, 4.0);
    EXPECT_NEAR(b.correction_scale, 0.01, 1e-15);
    // lambda -> 0 with M lambda fixed
    p.m_incident = 100000000;
    p.lambda = 1e-5;
    EXPECT_NEAR(mb::spdc_classical_bound(p, 1000).correction_scale, 1e-5, 1e-15);
    EXPECT_THROW(mb::spdc_classical_bound(p, 0), mb::InvalidInput);
}

TEST(SpdcQuantumValue, AnalyticValues) {
    EXPECT_NEAR(mb::spdc_quantum_value(1), 4.828427, 1e-6);
    EXPECT_EQ(mb::spdc_quantum_value(0), 0.0);
    EXPECT_NEAR(mb::gamma_threshold(), 0.828427, 1e-6);
    EXPECT_NEAR(mb::spdc_quantum_value(mb::gamma_threshold()), 4.0, 1e-9);
    EXPECT_LT(mb::gamma_threshold(), 1.0);
    EXPECT_THROW(mb::spdc_quantum_value(1.01), mb::InvalidInput);
    EXPECT_THROW(mb::spdc_quantum_value(-0.1), mb::InvalidInput);
}

TEST(SpdcValidate, Rejects) {
    mb::SpdcParams p;
    p.lambda = 1;
    EXPECT_THROW(mb::validate(p), mb::InvalidInput);
    p = {};
    p.m_incident = 0;
    EXPECT_THROW(mb::validate(p), mb::InvalidInput);
    p = {};
    EXPECT_THROW(mb::estimate_spdc_bell(p, 99, 1), mb::InvalidInput);
}

TEST(EstimateSpdcBell, QuantumAboveAndBelowThreshold) {
    mb::SpdcParams p;
    const auto hi = mb::estimate_spdc_bell(p, 100000, 7, 0, 100);
    EXPECT_NEAR(hi.b_hat, 4.83, 0.1);
    EXPECT_GT(hi.b_hat, 4.0);
    p.gamma = 0.5;
    const auto lo = mb::estimate_spdc_bell(p, 100000, 7, 0, 100);
    EXPECT_NEAR(lo.b_hat, 2.41, 0.1);
    EXPECT_LT(lo.b_hat, 4.0);
}

TEST(EstimateSpdcBell, ClassicalStaysBelowFour) {
    // tables with detections on setting 00
    for (unsigned code : {5u, 6u, 15u}) {
        for (double gamma : {0.3, 1.0}) {
            mb::SpdcParams p;
            p.strategy = mb::DeterministicTable::from_code(code);
            p.gamma = gamma;
            const auto e = mb::estimate_spdc_bell(p, 20000, 11, 0, 100);
            EXPECT_LE(e.b_hat, 4 + 5 * e.std_err) << "table " << code << " gamma " << gamma;
            EXPECT_LE(e.b_hat, 4.1);
        }
    }
}

TEST(EstimateSpdcBell, MonotoneInGamma) {
    mb::SpdcParams p;
    double prev = -1, prev_se = 0;
    for (int g = 1; g <= 10; ++g) {
        p.gamma = g / 10.0;
        const auto e = mb::estimate_spdc_bell(p, 20000, 13, 0, 100);
        EXPECT_GT(e.b_hat + 2 * e.std_err, prev - 2 * prev_se) << "gamma " << p.gamma;
        EXPECT_NEAR(e.b_hat, kLeading * p.gamma, 6 * e.std_err + 0.01);
        prev = e.b_hat;
        prev_se = e.std_err;
    }
}

TEST(EstimateSpdcBell, ApproachesLeadingTermAsLambdaShrinks) {
    mb::SpdcParams p;
    p.m_incident = 10000;
    std::vector<double> gap, se;
    for (double lambda : {0.1, 0.01, 0.001}) {
        p.lambda = lambda;
        const auto e = mb::estimate_spdc_bell(p, 200000, 17, 0, 100);
        gap.push_back(std::abs(e.b_hat - kLeading));
        se.push_back(e.std_err);
    }
    EXPECT_LT(gap[1], gap[0]);
    EXPECT_LE(gap[2], gap[1] + 3 * se[2]);
    EXPECT_LT(gap[2], 3 * se[2] + 0.01);
}
