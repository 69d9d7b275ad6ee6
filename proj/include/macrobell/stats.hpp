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

#include <cmath>
#include <cstdint>
#include <span>
#include <string>

#include "macrobell/error.hpp"

namespace macrobell {

/// Sample covariance with 1/(n-1) normalization, computed in two passes.
inline double covariance(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw InvalidInput("covariance: length mismatch (" + std::to_string(xs.size()) + " vs " +
                           std::to_string(ys.size()) + ")");
    }
    if (xs.size() < 2) throw InvalidInput("covariance: need at least 2 samples");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double s = 0;
    for (size_t i = 0; i < xs.size(); ++i) s += (xs[i] - mx) * (ys[i] - my);
    return s / (n - 1);
}

inline double variance(std::span<const double> xs) { return covariance(xs, xs); }

/// Streaming first and second moments of a pair (X, Y).
///
/// Welford updates with Chan's pairwise merge. Merging is associative only up
/// to rounding, so callers that need reproducible results merge partial
/// accumulators in a fixed order.
class RunningCovariance {
   public:
    void add(double x, double y) {
        ++n_;
        const double n = static_cast<double>(n_);
        const double dx = x - mean_x_;
        mean_x_ += dx / n;
        const double dy = y - mean_y_;
        mean_y_ += dy / n;
        m2x_ += dx * (x - mean_x_);
        m2y_ += dy * (y - mean_y_);
        cxy_ += dx * (y - mean_y_);
    }

    void merge(const RunningCovariance &o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
        const double n = na + nb;
        const double dx = o.mean_x_ - mean_x_;
        const double dy = o.mean_y_ - mean_y_;
        m2x_ += o.m2x_ + dx * dx * na * nb / n;
        m2y_ += o.m2y_ + dy * dy * na * nb / n;
        cxy_ += o.cxy_ + dx * dy * na * nb / n;
        mean_x_ += dx * nb / n;
        mean_y_ += dy * nb / n;
        n_ += o.n_;
    }

    uint64_t count() const { return n_; }
    double mean_x() const { return mean_x_; }
    double mean_y() const { return mean_y_; }

    double covariance() const {
        if (n_ < 2) throw InsufficientData("covariance needs at least 2 samples");
        return cxy_ / static_cast<double>(n_ - 1);
    }
    double variance_x() const {
        if (n_ < 2) throw InsufficientData("variance needs at least 2 samples");
        return m2x_ / static_cast<double>(n_ - 1);
    }
    double variance_y() const {
        if (n_ < 2) throw InsufficientData("variance needs at least 2 samples");
        return m2y_ / static_cast<double>(n_ - 1);
    }

   private:
    uint64_t n_ = 0;
    double mean_x_ = 0, mean_y_ = 0;
    double m2x_ = 0, m2y_ = 0, cxy_ = 0;
};

}  // namespace macrobell
