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

// Scalar numerics: normal distribution helpers, adaptive Gauss-Kronrod
// quadrature and a bound-projected Nelder-Mead maximizer.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "macrobell/error.hpp"

namespace macrobell {

/// Standard normal density.
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

/// P(Z >= z) for a standard normal Z. std::erfc is accurate to a few ulp over
/// the whole real line, including the far tail where 1 - Phi(z) would cancel.
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

struct QuadratureResult {
    double value = 0;
    double error = 0;
    int intervals = 0;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <typename F>
Segment gauss_kronrod_15(F &f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kKronrodWeights[7];
    double gauss = fc * kGaussWeights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kKronrodWeights[j] * sum;
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Integrates f over [a, b], splitting at the listed breakpoints first, then
/// bisecting the worst segment until the summed error estimate is <= abs_tol.
template <typename F>
QuadratureResult integrate(F &&f, double a, double b, double abs_tol, std::vector<double> breakpoints = {},
                           int max_intervals = 4000) {
    std::vector<double> cuts{a};
    std::sort(breakpoints.begin(), breakpoints.end());
    for (double p : breakpoints) {
        if (p > cuts.back() && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);

    std::priority_queue<detail::Segment> heap;
    double value = 0, error = 0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto s = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
        value += s.value;
        error += s.error;
        heap.push(s);
    }
    while (error > abs_tol) {
        if (static_cast<int>(heap.size()) >= max_intervals) {
            std::ostringstream msg;
            msg << "quadrature did not converge on [" << a << ", " << b << "]: error estimate " << error
                << " > tolerance " << abs_tol << " after " << heap.size() << " intervals (value " << value << ")";
            throw NumericError(msg.str());
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the segments to shed the drift of incremental updates.
    value = 0;
    error = 0;
    const int intervals = static_cast<int>(heap.size());
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    return {value, error, intervals};
}

struct NelderMeadOptions {
    std::vector<double> initial_step;
    double x_tol = 1e-9;
    double f_tol = 1e-14;
    int max_iterations = 5000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0;
    int iterations = 0;
};

/// Maximizes f starting at x0. f is expected to handle projection onto its
/// feasible set itself; the simplex moves freely.
inline NelderMeadResult nelder_mead_maximize(const std::function<double(const std::vector<double> &)> &f,
                                             std::vector<double> x0, const NelderMeadOptions &opt) {
    const size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step.at(i);
    for (size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<size_t> order(n + 1);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        for (size_t i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](size_t l, size_t r) { return values[l] > values[r]; });
        const size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double size = 0;
        for (size_t i = 0; i <= n; ++i) {
            for (size_t k = 0; k < n; ++k) size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]));
        }
        if (size < opt.x_tol && std::abs(values[best] - values[worst]) <= opt.f_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            std::vector<double> p(n);
            for (size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return p;
        };
        auto reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr > values[best]) {
            auto expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe > fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if (fr > values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            auto contracted = fr > values[worst] ? along(-0.5) : along(0.5);
            const double fc = f(contracted);
            if (fc > std::max(fr, values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for (size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (size_t k = 0; k < n; ++k) simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    size_t best = 0;
    for (size_t i = 1; i <= n; ++i) {
        if (values[i] > values[best]) best = i;
    }
    return {simplex[best], values[best], it};
}

}  // namespace macrobell
