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

// Macroscopic Bell parameter: covariance estimation over aggregate outcomes,
// the classical and quantum bounds, and bounded-variance noise injection.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "macrobell/error.hpp"
#include "macrobell/parallel.hpp"
#include "macrobell/random.hpp"
#include "macrobell/stats.hpp"

namespace macrobell {

/// Index of a setting pair in all four-element arrays: 2*x + y.
constexpr int setting_index(int x, int y) { return 2 * x + y; }

inline std::string setting_name(int s) { return std::to_string(s >> 1) + std::to_string(s & 1); }

/// Sign with which the covariance of setting pair s enters the Bell combination.
constexpr double bell_sign(int s) { return s == 3 ? -1.0 : 1.0; }

/// One Bell-test trial: settings and aggregate outcomes.
struct TrialRecord {
    uint8_t x = 0;
    uint8_t y = 0;
    double a_total = 0;
    double b_total = 0;
};

/// Streaming covariance of (A_x, B_y) for each of the four setting pairs.
class CovarianceAccumulator {
   public:
    void add(const TrialRecord &t) { pairs_[setting_index(t.x, t.y)].add(t.a_total, t.b_total); }

    void merge(const CovarianceAccumulator &o) {
        for (int s = 0; s < 4; ++s) pairs_[s].merge(o.pairs_[s]);
    }

    const RunningCovariance &pair(int s) const { return pairs_[s]; }

    std::array<double, 4> covariances() const {
        std::array<double, 4> c{};
        for (int s = 0; s < 4; ++s) {
            if (pairs_[s].count() < 2) {
                throw InsufficientData("setting pair " + setting_name(s) + " has " +
                                       std::to_string(pairs_[s].count()) + " trials, need >= 2");
            }
            c[s] = pairs_[s].covariance();
        }
        return c;
    }

   private:
    std::array<RunningCovariance, 4> pairs_{};
};

/// (4/N) [cov00 + cov01 + cov10 - cov11].
inline double bell_parameter(double cov00, double cov01, double cov10, double cov11, double n_pairs) {
    if (!(n_pairs > 0) || !std::isfinite(n_pairs)) {
        throw InvalidInput("bell_parameter: n_pairs must be positive, got " + std::to_string(n_pairs));
    }
    return 4.0 / n_pairs * (cov00 + cov01 + cov10 - cov11);
}

inline double bell_parameter(const std::array<double, 4> &cov, double n_pairs) {
    return bell_parameter(cov[0], cov[1], cov[2], cov[3], n_pairs);
}

/// CHSH combination of the four joint means E[a'b'] on the +-1 convention
/// a' = 2(a - 1/2).
inline double traditional_bell_parameter(const std::array<double, 4> &pm_joint_means) {
    for (double m : pm_joint_means) {
        if (!std::isfinite(m)) throw InvalidInput("traditional_bell_parameter: non-finite joint mean");
    }
    return pm_joint_means[0] + pm_joint_means[1] + pm_joint_means[2] - pm_joint_means[3];
}

/// Empirical E[a'b'] per setting pair for single-pair (N = 1) trials.
inline std::array<double, 4> empirical_pm_correlators(std::span<const TrialRecord> trials) {
    std::array<double, 4> sum{};
    std::array<uint64_t, 4> count{};
    for (const auto &t : trials) {
        const int s = setting_index(t.x, t.y);
        sum[s] += (2 * t.a_total - 1) * (2 * t.b_total - 1);
        ++count[s];
    }
    for (int s = 0; s < 4; ++s) {
        if (count[s] == 0) throw InsufficientData("no trials for setting pair " + setting_name(s));
        sum[s] /= static_cast<double>(count[s]);
    }
    return sum;
}

/// Upper bound on the Bell parameter of classical sources with noise level epsilon.
inline double classical_bound(double epsilon) {
    if (!(epsilon >= 0)) throw InvalidInput("classical_bound: epsilon must be >= 0");
    return 16.0 / 7.0 + 16.0 * epsilon + 32.0 * std::sqrt(epsilon);
}

/// Guaranteed Bell parameter of the singlet strategy under noise level epsilon.
inline double quantum_lower_bound(double epsilon) {
    if (!(epsilon >= 0)) throw InvalidInput("quantum_lower_bound: epsilon must be >= 0");
    return 2.0 * std::numbers::sqrt2 - 16.0 * epsilon - 32.0 * std::sqrt(epsilon);
}

struct BellEstimate {
    double b_hat = 0;
    double std_err = 0;
    /// Normalization N. Exact pair count for ordinary sources, the effective
    /// photon number for down-conversion sources.
    double n_pairs = 0;
    std::array<double, 4> covariances{};
    std::array<uint64_t, 4> trials_per_setting{};
};

struct BootstrapOptions {
    uint64_t seed = 0;
    int resamples = 200;
    unsigned workers = 0;
};

namespace detail {

/// Trials of one setting pair, centered on their own means so that the
/// bootstrap sums stay well conditioned.
struct CenteredGroup {
    std::vector<double> a, b;
    double mean_a = 0, mean_b = 0;
};

inline std::array<CenteredGroup, 4> group_trials(std::span<const TrialRecord> trials) {
    std::array<CenteredGroup, 4> g;
    for (const auto &t : trials) {
        auto &grp = g[setting_index(t.x, t.y)];
        grp.a.push_back(t.a_total);
        grp.b.push_back(t.b_total);
    }
    for (int s = 0; s < 4; ++s) {
        auto &grp = g[s];
        if (grp.a.size() < 2) {
            throw InsufficientData("setting pair " + setting_name(s) + " has " + std::to_string(grp.a.size()) +
                                   " trials, need >= 2");
        }
        double ma = 0, mb = 0;
        for (size_t i = 0; i < grp.a.size(); ++i) {
            ma += grp.a[i];
            mb += grp.b[i];
        }
        ma /= static_cast<double>(grp.a.size());
        mb /= static_cast<double>(grp.a.size());
        for (size_t i = 0; i < grp.a.size(); ++i) {
            grp.a[i] -= ma;
            grp.b[i] -= mb;
        }
        grp.mean_a = ma;
        grp.mean_b = mb;
    }
    return g;
}

/// How the normalization N of a resample is obtained.
enum class Normalization {
    kFixed,      // configured N
    kEffective,  // mean of a_total + b_total over (0,0) trials
};

struct ResampleStats {
    std::array<double, 4> cov{};
    double n_effective = 0;
};

inline double bootstrap_std(const std::array<CenteredGroup, 4> &groups, Normalization mode, double fixed_n,
                            const BootstrapOptions &opt) {
    if (opt.resamples < 2) return 0.0;
    std::vector<double> replicate(static_cast<size_t>(opt.resamples));
    parallel_for(replicate.size(), opt.workers, [&](size_t r) {
        Rng rng = Rng::stream(opt.seed, Domain::kBootstrap, r);
        std::array<double, 4> cov{};
        double n_eff = 0;
        for (int s = 0; s < 4; ++s) {
            const auto &grp = groups[s];
            const size_t n = grp.a.size();
            double sa = 0, sb = 0, sab = 0;
            for (size_t k = 0; k < n; ++k) {
                const size_t i = rng.below(n);
                sa += grp.a[i];
                sb += grp.b[i];
                sab += grp.a[i] * grp.b[i];
            }
            const double dn = static_cast<double>(n);
            cov[s] = (sab - sa * sb / dn) / (dn - 1);
            if (s == 0) n_eff = grp.mean_a + grp.mean_b + (sa + sb) / dn;
        }
        const double norm = mode == Normalization::kFixed ? fixed_n : n_eff;
        replicate[r] = norm > 0 ? bell_parameter(cov, norm) : 0.0;
    });
    double mean = 0;
    for (double v : replicate) mean += v;
    mean /= static_cast<double>(replicate.size());
    double ss = 0;
    for (double v : replicate) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(replicate.size() - 1));
}

inline BellEstimate estimate(std::span<const TrialRecord> trials, Normalization mode, double fixed_n,
                             const BootstrapOptions &opt) {
    CovarianceAccumulator acc;
    for (const auto &t : trials) acc.add(t);
    BellEstimate est;
    est.covariances = acc.covariances();
    for (int s = 0; s < 4; ++s) est.trials_per_setting[s] = acc.pair(s).count();
    if (mode == Normalization::kFixed) {
        est.n_pairs = fixed_n;
    } else {
        est.n_pairs = acc.pair(0).mean_x() + acc.pair(0).mean_y();
        if (!(est.n_pairs > 0)) throw InsufficientData("effective N is zero: no detections on (0,0) trials");
    }
    est.b_hat = bell_parameter(est.covariances, est.n_pairs);
    const auto groups = group_trials(trials);
    est.std_err = bootstrap_std(groups, mode, fixed_n, opt);
    return est;
}

}  // namespace detail

/// Plug-in estimate of the Bell parameter from trials with exactly n_pairs
/// pairs each. std_err is a stratified nonparametric bootstrap (trials are
/// resampled within their setting pair).
inline BellEstimate estimate_bell(std::span<const TrialRecord> trials, int64_t n_pairs,
                                  const BootstrapOptions &opt = {}) {
    if (n_pairs <= 0) throw InvalidInput("estimate_bell: n_pairs must be >= 1");
    return detail::estimate(trials, detail::Normalization::kFixed, static_cast<double>(n_pairs), opt);
}

enum class NoiseMode { kIndependent, kCommonMode };

/// Zero-mean Gaussian error with variance epsilon * N on every aggregate.
struct NoiseSpec {
    double epsilon = 0;
    NoiseMode mode = NoiseMode::kIndependent;
};

inline double noise_stddev(const NoiseSpec &spec, int64_t n_pairs) {
    if (!(spec.epsilon >= 0)) throw InvalidInput("noise epsilon must be >= 0");
    return std::sqrt(spec.epsilon * static_cast<double>(n_pairs));
}

/// a_ideal plus one independent noise draw.
template <typename URBG>
double inject_noise(double a_ideal, const NoiseSpec &spec, int64_t n_pairs, URBG &rng) {
    const double sd = noise_stddev(spec, n_pairs);
    if (sd == 0) return a_ideal;
    std::normal_distribution<double> normal(0.0, sd);
    return a_ideal + normal(rng);
}

/// Adds noise to both aggregates of a trial. Common mode uses one draw for
/// every macroscopic variable of the trial.
template <typename URBG>
void inject_trial_noise(TrialRecord &t, const NoiseSpec &spec, int64_t n_pairs, URBG &rng) {
    const double sd = noise_stddev(spec, n_pairs);
    if (sd == 0) return;
    std::normal_distribution<double> normal(0.0, sd);
    if (spec.mode == NoiseMode::kCommonMode) {
        const double r = normal(rng);
        t.a_total += r;
        t.b_total += r;
    } else {
        t.a_total += normal(rng);
        t.b_total += normal(rng);
    }
}

}  // namespace macrobell
