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

#include <atomic>
#include <cmath>
#include <numeric>
#include <vector>

#include "macrobell/parallel.hpp"
#include "macrobell/random.hpp"
#include "macrobell/stats.hpp"

namespace mb = macrobell;

TEST(Covariance, ConstantSequenceIsZero) {
    std::vector<double> xs{5, 5, 5, 5}, ys{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(mb::covariance(xs, ys), 0.0);
}

TEST(Covariance, TwoPointHandValues) {
    std::vector<double> a{0, 1}, b{1, 0};
    EXPECT_DOUBLE_EQ(mb::covariance(a, a), 0.5);
    EXPECT_DOUBLE_EQ(mb::covariance(a, b), -0.5);
}

TEST(Covariance, RejectsBadLengths) {
    std::vector<double> a{1, 2, 3}, b{1, 2}, one{1};
    EXPECT_THROW(mb::covariance(a, b), mb::InvalidInput);
    EXPECT_THROW(mb::covariance(one, one), mb::InvalidInput);
    EXPECT_THROW(mb::variance(one), mb::InvalidInput);
}

TEST(Covariance, SymmetryTranslationCauchySchwarz) {
    auto rng = mb::Rng::stream(7, mb::Domain::kTest, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const size_t n = 2 + rng.below(50);
        std::vector<double> x(n), y(n), xc(n);
        const double c = 1000 * (rng.uniform() - 0.5);
        for (size_t i = 0; i < n; ++i) {
            x[i] = 10 * rng.uniform();
            y[i] = 0.3 * x[i] + rng.uniform();
            xc[i] = x[i] + c;
        }
        const double cxy = mb::covariance(x, y);
        EXPECT_DOUBLE_EQ(cxy, mb::covariance(y, x));
        EXPECT_NEAR(mb::covariance(xc, y), cxy, 1e-9);
        EXPECT_GE(mb::variance(x), 0.0);
        EXPECT_DOUBLE_EQ(mb::covariance(x, x), mb::variance(x));
        EXPECT_LE(std::abs(cxy), std::sqrt(mb::variance(x) * mb::variance(y)) * (1 + 1e-12));
    }
}

TEST(RunningCovariance, MatchesTwoPassOnRandomSequences) {
    for (uint64_t rep = 0; rep < 10000; ++rep) {
        auto rng = mb::Rng::stream(11, mb::Domain::kTest, rep);
        const size_t n = 2 + rng.below(60);
        const double offset = 1e3 * rng.uniform();
        std::vector<double> x(n), y(n);
        mb::RunningCovariance acc;
        for (size_t i = 0; i < n; ++i) {
            x[i] = offset + rng.uniform();
            y[i] = -offset + rng.uniform() + 0.5 * x[i];
            acc.add(x[i], y[i]);
        }
        const double ref = mb::covariance(x, y);
        ASSERT_NEAR(acc.covariance(), ref, 1e-9 * std::max(1.0, std::abs(ref))) << "rep " << rep;
        ASSERT_NEAR(acc.variance_x(), mb::variance(x), 1e-9 * std::max(1.0, mb::variance(x)));
    }
}

TEST(RunningCovariance, MergeEqualsSequential) {
    auto rng = mb::Rng::stream(3, mb::Domain::kTest, 0);
    mb::RunningCovariance all, left, right;
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(), y = x * x + rng.uniform();
        all.add(x, y);
        (i < 377 ? left : right).add(x, y);
    }
    left.merge(right);
    EXPECT_EQ(left.count(), all.count());
    EXPECT_NEAR(left.covariance(), all.covariance(), 1e-12);
    EXPECT_NEAR(left.mean_y(), all.mean_y(), 1e-12);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    auto a = mb::Rng::stream(42, mb::Domain::kTrial, 5);
    auto b = mb::Rng::stream(42, mb::Domain::kTrial, 5);
    auto c = mb::Rng::stream(42, mb::Domain::kTrial, 6);
    auto d = mb::Rng::stream(42, mb::Domain::kNoise, 5);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 16; ++i) {
        const auto va = a(), vc = c(), vd = d();
        EXPECT_EQ(va, b());
        differs_c |= va != vc;
        differs_d |= va != vd;
    }
    EXPECT_TRUE(differs_c);
    EXPECT_TRUE(differs_d);
}

TEST(Rng, UniformAndBelowRanges) {
    auto r = mb::Rng::stream(1, mb::Domain::kTest, 0);
    std::array<int, 7> hist{};
    double sum = 0;
    for (int i = 0; i < 70000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        ++hist[r.below(7)];
    }
    EXPECT_NEAR(sum / 70000, 0.5, 0.005);
    for (int h : hist) EXPECT_NEAR(h, 10000, 400);
}

TEST(ParallelFor, ResultIndependentOfWorkerCount) {
    auto run = [](unsigned workers) {
        std::vector<uint64_t> out(1000);
        mb::parallel_for(out.size(), workers, [&](size_t i) {
            auto r = mb::Rng::stream(9, mb::Domain::kTest, i);
            out[i] = r();
        });
        return out;
    };
    const auto one = run(1);
    EXPECT_EQ(one, run(3));
    EXPECT_EQ(one, run(8));
}

TEST(ParallelFor, PropagatesExceptions) {
    EXPECT_THROW(mb::parallel_for(100, 4,
                                  [](size_t i) {
                                      if (i == 57) throw std::runtime_error("boom");
                                  }),
                 std::runtime_error);
    std::atomic<int> hits{0};
    mb::parallel_for(0, 4, [&](size_t) { ++hits; });
    EXPECT_EQ(hits.load(), 0);
}
