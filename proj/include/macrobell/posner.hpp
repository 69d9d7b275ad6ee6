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

// Few-Posner Bell test on twelve phosphorus spins.
//
// Qubit layout (little-endian in the amplitude index): Posner A holds qubits
// 0-5, Posner B holds qubits 6-11, and qubit k of A forms a singlet with
// qubit k of B. The threefold symmetry rotation G of a Posner cycles its
// spins as (0 1 2)(3 4 5); B uses the same cycle on its own qubits, so
// G_A G_B leaves the six-singlet state invariant and its tau values satisfy
// tau_A + tau_B = 0 (mod 3). Sector labels t in {0, 1, 2} stand for
// tau in {0, +1, -1}.

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "macrobell/error.hpp"

namespace macrobell {

using Amplitude = std::complex<double>;

inline constexpr int kPosnerQubits = 6;
inline constexpr int kPairQubits = 2 * kPosnerQubits;
inline constexpr size_t kPairDim = size_t{1} << kPairQubits;

enum class Posner { kA, kB };
enum class BindingParity { kEven, kOdd };

/// State of an entangled Posner pair: 4096 amplitudes.
class PosnerPairState {
   public:
    PosnerPairState() : amp_(kPairDim) {}
    explicit PosnerPairState(std::vector<Amplitude> amplitudes) : amp_(std::move(amplitudes)) {
        if (amp_.size() != kPairDim) throw InvalidInput("PosnerPairState needs 4096 amplitudes");
    }

    std::vector<Amplitude> &amplitudes() { return amp_; }
    const std::vector<Amplitude> &amplitudes() const { return amp_; }
    Amplitude operator[](size_t i) const { return amp_[i]; }

    double norm_squared() const {
        double s = 0;
        for (const auto &a : amp_) s += std::norm(a);
        return s;
    }
    double norm() const { return std::sqrt(norm_squared()); }

   private:
    std::vector<Amplitude> amp_;
};

namespace detail {

/// cycle_table()[k][c]: image of the 6-bit Posner chunk c under G^k.
inline const std::array<std::array<uint8_t, 64>, 3> &cycle_table() {
    static const auto table = [] {
        constexpr std::array<int, 6> image = {1, 2, 0, 4, 5, 3};
        std::array<std::array<uint8_t, 64>, 3> t{};
        for (unsigned c = 0; c < 64; ++c) {
            t[0][c] = static_cast<uint8_t>(c);
            unsigned g = 0;
            for (int q = 0; q < 6; ++q) {
                if ((c >> q) & 1) g |= 1u << image[q];
            }
            t[1][c] = static_cast<uint8_t>(g);
        }
        for (unsigned c = 0; c < 64; ++c) t[2][c] = t[1][t[1][c]];
        return t;
    }();
    return table;
}

inline int posner_shift(Posner p) { return p == Posner::kA ? 0 : kPosnerQubits; }

}  // namespace detail

/// Six singlets (|01> - |10>)/sqrt(2), one per qubit pair (A_k, B_k).
inline PosnerPairState six_singlets_state() {
    PosnerPairState s;
    const double scale = 1.0 / 8.0;  // (1/sqrt 2)^6
    for (size_t i = 0; i < kPairDim; ++i) {
        const unsigned a = i & 63u, b = (i >> 6) & 63u;
        if ((a ^ b) != 63u) continue;
        // Each pair contributes -1 when A's qubit is 1.
        s.amplitudes()[i] = (std::popcount(a) % 2 ? -scale : scale);
    }
    return s;
}

/// exp(-i theta Z / 2) on qubit 0 of the chosen Posner.
inline PosnerPairState tau_rotation(PosnerPairState state, double theta, Posner which) {
    const size_t bit = size_t{1} << detail::posner_shift(which);
    const Amplitude phase0 = std::polar(1.0, -theta / 2);
    const Amplitude phase1 = std::polar(1.0, theta / 2);
    for (size_t i = 0; i < kPairDim; ++i) state.amplitudes()[i] *= (i & bit) ? phase1 : phase0;
    return state;
}

/// G^k applied to one Posner: (G psi)[G(i)] = psi[i].
inline PosnerPairState apply_symmetry_rotation(const PosnerPairState &state, Posner which, int k) {
    const auto &tab = detail::cycle_table()[((k % 3) + 3) % 3];
    const int shift = detail::posner_shift(which);
    PosnerPairState out;
    for (size_t i = 0; i < kPairDim; ++i) {
        const unsigned chunk = (i >> shift) & 63u;
        const size_t j = (i & ~(size_t{63} << shift)) | (size_t{tab[chunk]} << shift);
        out.amplitudes()[j] = state[i];
    }
    return out;
}

/// Projection onto sector t: (1/3) sum_k omega^{-t k} G^k.
inline PosnerPairState project_tau_sector(const PosnerPairState &state, Posner which, int t) {
    const double angle = 2 * std::numbers::pi / 3;
    PosnerPairState out;
    for (int k = 0; k < 3; ++k) {
        const Amplitude w = std::polar(1.0 / 3.0, -angle * t * k);
        const auto rotated = apply_symmetry_rotation(state, which, k);
        for (size_t i = 0; i < kPairDim; ++i) out.amplitudes()[i] += w * rotated[i];
    }
    return out;
}

struct TauSectorDistribution {
    /// q[t_A][t_B]
    std::array<std::array<double, 3>, 3> q{};

    double total() const {
        double s = 0;
        for (const auto &row : q) {
            for (double v : row) s += v;
        }
        return s;
    }
};

inline TauSectorDistribution tau_sector_distribution(const PosnerPairState &state) {
    TauSectorDistribution d;
    for (int ta = 0; ta < 3; ++ta) {
        const auto pa = project_tau_sector(state, Posner::kA, ta);
        for (int tb = 0; tb < 3; ++tb) d.q[ta][tb] = project_tau_sector(pa, Posner::kB, tb).norm_squared();
    }
    return d;
}

/// Probability that the bindings A-A' and B-B' of two pairs have the given
/// parity. A binding happens when the two tau values sum to 0 mod 3.
inline double binding_probability(const TauSectorDistribution &first, const TauSectorDistribution &second,
                                  BindingParity parity) {
    double even = 0;
    for (int ta = 0; ta < 3; ++ta) {
        for (int tb = 0; tb < 3; ++tb) {
            for (int ta2 = 0; ta2 < 3; ++ta2) {
                for (int tb2 = 0; tb2 < 3; ++tb2) {
                    const bool bind_a = (ta + ta2) % 3 == 0;
                    const bool bind_b = (tb + tb2) % 3 == 0;
                    if (bind_a == bind_b) even += first.q[ta][tb] * second.q[ta2][tb2];
                }
            }
        }
    }
    return parity == BindingParity::kEven ? even : first.total() * second.total() - even;
}

/// Even-parity binding probability after rotating Posner A of one pair by
/// theta; the second pair is left unrotated.
inline double even_binding_probability(double theta) {
    const auto ent = six_singlets_state();
    const auto rotated = tau_sector_distribution(tau_rotation(ent, theta, Posner::kA));
    return binding_probability(rotated, tau_sector_distribution(ent), BindingParity::kEven);
}

inline std::vector<std::pair<double, double>> even_binding_curve(const std::vector<double> &theta_grid) {
    if (theta_grid.empty()) throw InvalidInput("even_binding_curve: theta grid is empty");
    const auto ent = six_singlets_state();
    const auto reference = tau_sector_distribution(ent);
    std::vector<std::pair<double, double>> curve;
    curve.reserve(theta_grid.size());
    for (double theta : theta_grid) {
        const auto q = tau_sector_distribution(tau_rotation(ent, theta, Posner::kA));
        curve.emplace_back(theta, binding_probability(q, reference, BindingParity::kEven));
    }
    return curve;
}

/// Rotation angles of the few-Posner CHSH strategy.
struct PosnerGameAngles {
    std::array<double, 2> alice{-std::numbers::pi / 8, 3 * std::numbers::pi / 8};
    std::array<double, 2> bob{std::numbers::pi / 8, -3 * std::numbers::pi / 8};
};

struct PosnerGameAnalysis {
    /// Even-parity probability per question pair, index 2x + y.
    std::array<double, 4> p_even{};
    std::array<double, 4> p_win{};
    double win_probability = 0;
};

/// Alice rotates A by alice[x], Bob rotates B by bob[y]; each then reports
/// whether their Posner bound to its partner in the second pair. Even parity
/// wins on 00, 01, 10 and odd parity wins on 11.
inline PosnerGameAnalysis analyze_posner_game(const PosnerGameAngles &angles = {}) {
    const auto ent = six_singlets_state();
    const auto reference = tau_sector_distribution(ent);
    PosnerGameAnalysis out;
    for (int s = 0; s < 4; ++s) {
        const int x = s >> 1, y = s & 1;
        auto state = tau_rotation(ent, angles.alice[x], Posner::kA);
        state = tau_rotation(state, angles.bob[y], Posner::kB);
        out.p_even[s] = binding_probability(tau_sector_distribution(state), reference, BindingParity::kEven);
        out.p_win[s] = s == 3 ? 1 - out.p_even[s] : out.p_even[s];
        out.win_probability += out.p_win[s] / 4;
    }
    return out;
}

inline double posner_game_win_probability() { return analyze_posner_game().win_probability; }

inline constexpr size_t kDefaultOracleBudgetBytes = size_t{1} << 30;

/// Independent check of binding_probability on the full 24-qubit register of
/// two pairs (A, B, A', B' at qubits 0-5, 6-11, 12-17, 18-23).
///
/// Uses Pi_AA' = (1/3) sum_k (G_A G_A')^k, the projector onto tau_A + tau_A' = 0,
/// and likewise for B. Pi_even = 1 - Pi_AA' - Pi_BB' + 2 Pi_AA' Pi_BB' is then a
/// weighted sum of nine qubit permutations, applied one amplitude at a time.
inline double brute_force_even_parity(double theta_a, size_t memory_budget_bytes = kDefaultOracleBudgetBytes) {
    constexpr size_t dim = size_t{1} << (2 * kPairQubits);
    const size_t needed = dim * sizeof(Amplitude);
    if (needed > memory_budget_bytes) {
        throw ResourceError("brute_force_even_parity needs " + std::to_string(needed >> 20) + " MiB, budget is " +
                            std::to_string(memory_budget_bytes >> 20) +
                            " MiB; use the sector method (binding_probability) instead");
    }
    const auto ent = six_singlets_state();
    const auto rotated = tau_rotation(ent, theta_a, Posner::kA);
    std::vector<Amplitude> psi(dim);
    for (size_t i = 0; i < dim; ++i) psi[i] = rotated[i & (kPairDim - 1)] * ent[i >> kPairQubits];

    const auto &tab = detail::cycle_table();
    // coefficient of (G_A G_A')^j (G_B G_B')^k
    double coeff[3][3];
    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            coeff[j][k] = (j == 0 && k == 0 ? 1.0 : 0.0) - (k == 0 ? 1.0 / 3 : 0.0) - (j == 0 ? 1.0 / 3 : 0.0) + 2.0 / 9;
        }
    }
    double total = 0;
    for (size_t i = 0; i < dim; ++i) {
        const unsigned ca = i & 63u, cb = (i >> 6) & 63u, ca2 = (i >> 12) & 63u, cb2 = (i >> 18) & 63u;
        Amplitude v = 0;
        for (int j = 0; j < 3; ++j) {
            // (P psi)[i] = psi[P^{-1} i]; the inverse of G^j is G^{3-j}.
            const auto &inv_a = tab[(3 - j) % 3];
            const size_t src_a = size_t{inv_a[ca]} | (size_t{inv_a[ca2]} << 12);
            for (int k = 0; k < 3; ++k) {
                const auto &inv_b = tab[(3 - k) % 3];
                const size_t src = src_a | (size_t{inv_b[cb]} << 6) | (size_t{inv_b[cb2]} << 18);
                v += coeff[j][k] * psi[src];
            }
        }
        total += std::norm(v);
    }
    return total;
}

}  // namespace macrobell
