// Copyright 2026 The ftlab Authors
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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ftlab::distill {

/// Bloch coordinates tr(P rho); pure states have unit norm.
struct BlochVector {
    double x = 0;
    double y = 0;
    double z = 0;

    double norm_squared() const { return x * x + y * y + z * z; }
    /// Projection on the T axis (1,1,1)/sqrt(3).
    double t_projection() const { return (x + y + z) / std::sqrt(3.0); }
    static BlochVector on_t_axis(double f) {
        double c = f / std::sqrt(3.0);
        return {c, c, c};
    }
};

inline constexpr std::size_t kInputs = 5;
using FidelityVector = std::array<double, kInputs>;

/// sqrt(3/7): inputs strictly above this improve under distillation.
inline const double kCriticalFidelity = std::sqrt(3.0 / 7.0);

struct DistillOutcome {
    double f_out = 0;
    double p_accept = 0;
    /// The output points along -(1,1,1); a T-axis flip restores orientation.
    bool orientation_flipped = true;
};

/// Average over the order-3 rotation about the T axis (x -> y -> z -> x).
inline BlochVector twirl_to_t_axis(const BlochVector &v) {
    double m = (v.x + v.y + v.z) / 3.0;
    return {m, m, m};
}

// Index sets of the closed form, fitted against the density-matrix oracle
// over all 32 multilinear monomials: every triple and every quadruple of
// inputs appears with unit coefficient.
inline constexpr std::array<std::array<std::size_t, 3>, 10> kTriples = {{
    {0, 1, 2}, {0, 1, 3}, {0, 1, 4}, {0, 2, 3}, {0, 2, 4},
    {0, 3, 4}, {1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4},
}};
inline constexpr std::array<std::array<std::size_t, 4>, 5> kQuadruples = {{
    {0, 1, 2, 3}, {0, 1, 2, 4}, {0, 1, 3, 4}, {0, 2, 3, 4}, {1, 2, 3, 4},
}};
inline constexpr double kAcceptanceConstant = 3.0;
inline constexpr double kAcceptanceScale = 48.0;

inline void require_fidelities(const FidelityVector &fs) {
    for (double f : fs) {
        if (!(f >= -1.0 && f <= 1.0)) throw std::invalid_argument("fidelities must lie in [-1, 1]");
    }
}

/// One round of five-qubit-code distillation on T-axis-symmetric inputs.
inline DistillOutcome distill_step(const FidelityVector &fs) {
    require_fidelities(fs);
    double triples = 0;
    for (const auto &t : kTriples) triples += fs[t[0]] * fs[t[1]] * fs[t[2]];
    double quads = 0;
    for (const auto &q : kQuadruples) quads += fs[q[0]] * fs[q[1]] * fs[q[2]] * fs[q[3]];
    double all5 = fs[0] * fs[1] * fs[2] * fs[3] * fs[4];
    double denom = kAcceptanceConstant + quads;
    return {(triples - 2.0 * all5) / denom, denom / kAcceptanceScale, true};
}

inline DistillOutcome distill_step(double f) { return distill_step(FidelityVector{f, f, f, f, f}); }

/// Central differences of f_out in each coordinate.
inline std::array<double, kInputs> monotonicity_check(const FidelityVector &fs, double h = 1e-6) {
    if (!(h > 0 && h <= 1e-4)) throw std::invalid_argument("finite-difference step must lie in (0, 1e-4]");
    for (double f : fs) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("monotonicity_check needs fidelities in [0, 1]");
    }
    std::array<double, kInputs> out{};
    for (std::size_t i = 0; i < kInputs; ++i) {
        // Keep the stencil inside [-1, 1]; one-sided at the boundary.
        FidelityVector up = fs, down = fs;
        up[i] = std::min(1.0, fs[i] + h);
        down[i] = std::max(-1.0, fs[i] - h);
        out[i] = (distill_step(up).f_out - distill_step(down).f_out) / (up[i] - down[i]);
    }
    return out;
}

/// Same differences for the acceptance probability.
inline std::array<double, kInputs> acceptance_differences(const FidelityVector &fs, double h = 1e-6) {
    std::array<double, kInputs> out{};
    for (std::size_t i = 0; i < kInputs; ++i) {
        FidelityVector up = fs, down = fs;
        up[i] = std::min(1.0, fs[i] + h);
        down[i] = std::max(-1.0, fs[i] - h);
        out[i] = (distill_step(up).p_accept - distill_step(down).p_accept) / (up[i] - down[i]);
    }
    return out;
}

struct IterationRound {
    double f = 0;         ///< fidelity after this round
    double p_accept = 0;  ///< acceptance probability of this round
};

struct IterationPlan {
    int rounds = 0;
    /// Expected raw inputs consumed per output, 5 / p_accept compounded.
    double expected_inputs = 1;
    std::vector<IterationRound> trace;
};

/// Rounds needed so that worst-case inputs at `f_lower` reach 1 - f <= target.
inline IterationPlan plan_iterations(double f_lower, double epsilon, double target_infidelity,
                                     int max_rounds = 10000) {
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
    if (!(target_infidelity > 0)) throw std::invalid_argument("target infidelity must be positive");
    if (!(f_lower >= kCriticalFidelity + epsilon) || f_lower > 1.0) {
        throw std::invalid_argument("f_lower must lie in [sqrt(3/7) + epsilon, 1]");
    }
    IterationPlan plan;
    double f = f_lower;
    while (1.0 - f > target_infidelity) {
        if (plan.rounds >= max_rounds) throw std::runtime_error("distillation plan exceeded the round limit");
        auto o = distill_step(f);
        plan.expected_inputs *= 5.0 / o.p_accept;
        f = o.f_out;
        ++plan.rounds;
        plan.trace.push_back({f, o.p_accept});
    }
    return plan;
}

}  // namespace ftlab::distill
