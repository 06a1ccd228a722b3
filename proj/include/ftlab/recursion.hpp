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
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftlab::recursion {

/// Structural constants of the concatenated scheme and the base CNOT fault
/// probability.
template <typename Real = double>
struct ModelConstants {
    int n = 7;   ///< block size
    int s = 9;   ///< CNOTs to entangle a stabilizer state
    int e = 11;  ///< CNOTs to encode/decode an arbitrary state
    Real A0 = 0;
    Real B0 = 0;
    Real b0 = 0;
    Real D0 = 0;
    Real p = 0;           ///< physical CNOT fault probability
    Real c0_scale = 1;    ///< C0 = c0_scale * p

    Real C0() const { return c0_scale * p; }
};

template <typename Real = double>
struct LevelParams {
    int level = 0;
    Real A = 0;   ///< ancilla preparation failure
    Real a = 0;   ///< ancilla wellness
    Real B = 0;   ///< correction failure
    Real Bp = 0;  ///< conditional correction failure B'
    Real b = 0;   ///< block wellness
    Real b_tilde = 0;
    Real C = 0;   ///< CNOT failure
    Real D = 0;   ///< decoding failure
    Real N = 1;   ///< ancilla acceptance lower bound (intermediate)

    Real max_failure() const { return std::max({A, B, C}); }
};

struct RecursionConfig {
    int max_levels = 60;
    double fp_tolerance = 1e-14;
    int fp_max_sweeps = 10000;
    double convergence_floor = 1e-30;
    double divergence_ceiling = 1.0;
    double bisection_tolerance = 1e-3;
    /// Also require D_k to settle (bounded and Cauchy) before declaring convergence.
    bool require_bounded_decoding = false;

    void validate() const {
        if (max_levels < 2) throw std::invalid_argument("max_levels must be >= 2");
        if (!(fp_tolerance > 0) || !(convergence_floor > 0) || !(bisection_tolerance > 0) ||
            !(divergence_ceiling > 0)) {
            throw std::invalid_argument("recursion tolerances must be positive");
        }
    }
};

enum class Status { Ok, Diverged };

template <typename Real = double>
struct LevelResult {
    LevelParams<Real> params;
    Status status = Status::Ok;
    std::string reason;
    int sweeps = 0;
    bool ok() const { return status == Status::Ok; }
};

template <typename Real>
LevelParams<Real> initial_level(const ModelConstants<Real> &c) {
    LevelParams<Real> z;
    z.level = 0;
    z.A = c.A0;
    z.B = c.B0;
    z.b = c.b0;
    z.b_tilde = c.b0;
    z.C = c.C0();
    z.D = c.D0;
    return z;
}

template <typename Real>
Real choose2(Real m) {
    return m * (m - 1) / 2;
}

template <typename Real>
bool in_unit_interval(const Real &v, double ceiling = 1.0) {
    using std::isfinite;
    return isfinite(v) && v >= 0 && v <= Real(ceiling);
}

template <typename Real = double>
struct CorrectionFixedPoint {
    Real B = 0;
    Real Bp = 0;
    Real b = 0;
    Real b_tilde = 0;
    int sweeps = 0;
    Status status = Status::Ok;
    std::string reason;
};

/// B_k as a function of the wellness parameter b_k (linear in b_k).
template <typename Real>
Real correction_failure(Real A_k, Real a_k, Real b_k, const LevelParams<Real> &prev, const ModelConstants<Real> &c) {
    const Real n = c.n;
    const Real C = prev.C, B = prev.B;
    return 4 * A_k + choose2(4 * n) * C * C + choose2(Real(4)) * a_k * a_k + choose2(2 * n) * B * B +
           b_k * (4 * n * C + 4 * a_k + 2 * n * B) + 4 * n * C * (4 * a_k + 2 * n * B) + 8 * n * a_k * B;
}

/// Solves the coupled {B_k, b~_k, B'_k, b_k} system by iterating from b_k = 0.
template <typename Real>
CorrectionFixedPoint<Real> solve_correction_fixed_point(Real A_k, Real a_k, const LevelParams<Real> &prev,
                                                        const ModelConstants<Real> &c, const RecursionConfig &cfg) {
    using std::abs;
    CorrectionFixedPoint<Real> r;
    const Real n = c.n;
    const Real single_failures = 4 * a_k + 2 * n * prev.B + 4 * n * prev.C;
    Real b = 0;
    for (int sweep = 1; sweep <= cfg.fp_max_sweeps; ++sweep) {
        Real B = correction_failure(A_k, a_k, b, prev, c);
        if (!in_unit_interval(B, cfg.divergence_ceiling) || B >= 1) {
            r.status = Status::Diverged;
            r.reason = "B left [0,1)";
            r.sweeps = sweep;
            return r;
        }
        Real b_tilde = single_failures / (1 - B);
        Real Bp = 4 * A_k + (1 - B) * b_tilde;
        if (!in_unit_interval(Bp, cfg.divergence_ceiling) || Bp >= 1) {
            r.status = Status::Diverged;
            r.reason = "B' left [0,1)";
            r.sweeps = sweep;
            return r;
        }
        Real b_next = (1 - B) * b_tilde / (1 - Bp);
        if (!in_unit_interval(b_next, cfg.divergence_ceiling)) {
            r.status = Status::Diverged;
            r.reason = "b left [0,1]";
            r.sweeps = sweep;
            return r;
        }
        bool done = abs(b_next - b) <= Real(cfg.fp_tolerance) * abs(b_next);
        b = b_next;
        if (done) {
            r.b = b;
            r.B = correction_failure(A_k, a_k, b, prev, c);
            r.b_tilde = single_failures / (1 - r.B);
            r.Bp = 4 * A_k + (1 - r.B) * r.b_tilde;
            r.sweeps = sweep;
            return r;
        }
    }
    r.status = Status::Diverged;
    r.reason = "fixed point did not converge";
    r.sweeps = cfg.fp_max_sweeps;
    return r;
}

/// Level-k parameters from level k-1.
template <typename Real>
LevelResult<Real> advance_level(const LevelParams<Real> &prev, const ModelConstants<Real> &c,
                                const RecursionConfig &cfg) {
    LevelResult<Real> out;
    auto fail = [&](std::string why) {
        out.status = Status::Diverged;
        out.reason = std::move(why);
        return out;
    };
    const Real n = c.n;
    const Real s = c.s;
    const Real A = prev.A, B = prev.B, C = prev.C;
    LevelParams<Real> &k = out.params;
    k.level = prev.level + 1;

    k.N = 1 - 2 * n * A - 2 * n * B - (2 * s + n) * C;
    if (!in_unit_interval(k.N) || k.N <= 0) return fail("N left (0,1]");
    k.A = (choose2(2 * n) * (A * A + B * B) + choose2(2 * s + n) * C * C + 2 * n * (2 * s + n) * (A + B) * C +
           4 * n * n * A * B) /
          k.N;
    if (!in_unit_interval(k.A, cfg.divergence_ceiling) || k.A >= 1) return fail("A left [0,1)");
    k.a = (2 * n * (A + B) + (2 * s + n) * C) / ((1 - k.A) * k.N);
    if (!in_unit_interval(k.a, cfg.divergence_ceiling)) return fail("a left [0,1]");

    auto fp = solve_correction_fixed_point(k.A, k.a, prev, c, cfg);
    out.sweeps = fp.sweeps;
    if (fp.status != Status::Ok) return fail(fp.reason);
    k.B = fp.B;
    k.Bp = fp.Bp;
    k.b = fp.b;
    k.b_tilde = fp.b_tilde;

    k.C = (2 * k.B + 2 * n * C * k.Bp + choose2(n) * C * C) + 2 * k.b * (2 * k.Bp + n * C) + k.b * k.b;
    if (!in_unit_interval(k.C, cfg.divergence_ceiling)) return fail("C left [0,1]");

    k.D = Real(c.e) * c.C0() + n * k.b * prev.D + choose2(n) * prev.D * prev.D;
    if (!in_unit_interval(k.D, cfg.divergence_ceiling)) return fail("D left [0,1]");
    return out;
}

/// Decoding failure bound for a well_1(p1) block with extra per-bit error q1.
template <typename Real>
Real decoding_error_general(Real p1, Real q1, const ModelConstants<Real> &c) {
    if (!(p1 >= 0 && p1 <= 1) || !(q1 >= 0 && q1 <= 1)) {
        throw std::invalid_argument("decoding_error_general: p1 and q1 must lie in [0,1]");
    }
    const Real n = c.n;
    return Real(c.e) * c.C0() + n * p1 * q1 + choose2(n) * q1 * q1;
}

/// Evaluates `levels` levels without any stopping rule. Stops early only on
/// divergence; the returned trace starts at level 0.
template <typename Real>
std::vector<LevelParams<Real>> iterate_levels(const ModelConstants<Real> &c, int levels,
                                              const RecursionConfig &cfg = {}) {
    std::vector<LevelParams<Real>> trace{initial_level(c)};
    for (int k = 1; k <= levels; ++k) {
        auto r = advance_level(trace.back(), c, cfg);
        if (!r.ok()) break;
        trace.push_back(r.params);
    }
    return trace;
}

enum class Verdict { Converges, Diverges };

template <typename Real = double>
struct ConvergenceResult {
    Verdict verdict = Verdict::Diverges;
    int decided_at_level = 0;
    std::string reason;
    std::vector<LevelParams<Real>> trace;  ///< starts at level 0
    bool converged() const { return verdict == Verdict::Converges; }
};

template <typename Real>
ConvergenceResult<Real> converges(Real p, ModelConstants<Real> c, const RecursionConfig &cfg) {
    using std::abs;
    cfg.validate();
    if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p must lie in [0,1]");
    c.p = p;
    ConvergenceResult<Real> out;
    out.trace.push_back(initial_level(c));
    int non_decreasing = 0;
    for (int k = 1; k <= cfg.max_levels; ++k) {
        auto r = advance_level(out.trace.back(), c, cfg);
        out.decided_at_level = k;
        if (!r.ok()) {
            out.verdict = Verdict::Diverges;
            out.reason = r.reason;
            return out;
        }
        const auto &prev = out.trace.back();
        const auto &cur = r.params;
        bool decreased = cur.max_failure() < prev.max_failure();
        out.trace.push_back(cur);
        if (cur.max_failure() < Real(cfg.convergence_floor)) {
            if (!cfg.require_bounded_decoding) {
                out.verdict = Verdict::Converges;
                return out;
            }
            if (cur.D <= Real(cfg.divergence_ceiling) &&
                abs(cur.D - prev.D) <= Real(cfg.fp_tolerance) * std::max(abs(cur.D), Real(cfg.convergence_floor))) {
                out.verdict = Verdict::Converges;
                return out;
            }
            continue;
        }
        if (k > 3) {
            non_decreasing = decreased ? 0 : non_decreasing + 1;
            if (non_decreasing >= 5) {
                out.verdict = Verdict::Diverges;
                out.reason = "failure parameters stopped decreasing";
                return out;
            }
        }
    }
    out.verdict = Verdict::Diverges;
    out.reason = "no decision within max_levels";
    return out;
}

template <typename Real = double>
struct ThresholdResult {
    Real lower = 0;  ///< largest probe known to converge
    Real upper = 0;  ///< smallest probe known to diverge
    int iterations = 0;
    std::vector<std::pair<Real, Real>> brackets;  ///< after each bisection step

    Real estimate() const {
        using std::sqrt;
        return sqrt(lower * upper);
    }
    Real relative_width() const { return (upper - lower) / lower; }
};

/// Geometric bisection for the largest p whose recursion converges.
template <typename Real>
ThresholdResult<Real> find_threshold(const ModelConstants<Real> &c, const RecursionConfig &cfg, Real lo = Real(1e-8),
                                     Real hi = Real(1e-3)) {
    using std::sqrt;
    cfg.validate();
    if (!converges(lo, c, cfg).converged() || converges(hi, c, cfg).converged()) {
        throw std::invalid_argument("threshold bracket endpoints must straddle the threshold");
    }
    ThresholdResult<Real> out;
    out.brackets.emplace_back(lo, hi);
    while ((hi - lo) / lo > Real(cfg.bisection_tolerance)) {
        Real mid = sqrt(lo * hi);
        if (converges(mid, c, cfg).converged()) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++out.iterations;
        out.brackets.emplace_back(lo, hi);
    }
    out.lower = lo;
    out.upper = hi;
    return out;
}

}  // namespace ftlab::recursion
