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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "ftlab/cli.hpp"
#include "ftlab/distill.hpp"
#include "ftlab/distill_oracle.hpp"
#include "ftlab/recursion.hpp"
#include "ftlab/sim.hpp"
#include "ftlab/steane.hpp"

using namespace ftlab;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string &what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char *f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Threshold bracket.
Verdict threshold_reproduction() {
    Verdict v;
    auto t0 = std::chrono::steady_clock::now();
    auto t = recursion::find_threshold(recursion::ModelConstants<double>{}, recursion::RecursionConfig{});
    double secs = seconds_since(t0);
    v.require(t.lower <= 6.75e-6 && 6.75e-6 <= t.upper, "bracket misses 6.75e-6");
    v.require(t.relative_width() <= 0.02, "bracket wider than 2%");
    v.require(secs < 5.0, "took longer than 5 s");
    v.detail = "bracket [" + fmt("%.6e", t.lower) + ", " + fmt("%.6e", t.upper) + "], width " +
               fmt("%.2e", t.relative_width()) + ", " + fmt("%.2f s", secs) + (v.pass ? "" : "; " + v.detail);
    return v;
}

// 2. Zero noise.
Verdict zero_noise() {
    Verdict v;
    recursion::ModelConstants<double> c;
    auto trace = recursion::iterate_levels(c, 20);
    v.require(trace.size() == 21, "recursion stopped early at p = 0");
    for (const auto &l : trace) {
        bool zero = l.A == 0 && l.a == 0 && l.B == 0 && l.Bp == 0 && l.b == 0 && l.b_tilde == 0 && l.C == 0 &&
                    l.D == 0;
        v.require(zero, "nonzero parameter at level " + std::to_string(l.level));
    }
    auto ideal_cnot = [](PauliLabel a, PauliLabel b) {
        return std::pair{make_label(x_bit(a), z_bit(a) ^ z_bit(b)), make_label(x_bit(a) ^ x_bit(b), z_bit(b))};
    };
    int cases = 0;
    for (int k = 1; k <= 2; ++k) {
        sim::Simulator s(ErrorModel{});
        for (auto basis : {sim::AncillaBasis::Zero, sim::AncillaBasis::Plus}) {
            auto [reg, ok] = s.prepare_verified_ancilla(k, basis);
            v.require(ok && reg.frame().is_clean(), "ancilla not clean at level " + std::to_string(k));
            ++cases;
        }
        for (auto l : kPauliOrder) {
            auto r = sim::BlockRegister::with_logical(k, l);
            s.error_correct(r.view());
            v.require(r.state() == l && r.relative_state().is_clean(), "EC changed a logical state");
            auto d = sim::BlockRegister::with_logical(k, l);
            v.require(s.decode_gadget(d.view()) == PauliLabel::I, "decode differs from ideal");
            cases += 2;
            for (auto t : kPauliOrder) {
                auto a = sim::BlockRegister::with_logical(k, l);
                auto b = sim::BlockRegister::with_logical(k, t);
                s.cnot_gadget(a.view(), b.view());
                auto [ea, eb] = ideal_cnot(l, t);
                v.require(a.state() == ea && b.state() == eb, "CNOT map wrong");
                ++cases;
            }
        }
    }
    v.detail = "20 levels all zero; " + std::to_string(cases) + " noiseless gadget cases" +
               (v.pass ? "" : "; " + v.detail);
    return v;
}

// 3. Analytic quadratic suppression.
Verdict analytic_suppression() {
    Verdict v;
    recursion::ModelConstants<long double> c;
    c.p = 1e-6L;
    auto trace = recursion::iterate_levels(c, 11);
    if (trace.size() != 12) {
        v.require(false, "recursion stopped before level 11");
        return v;
    }
    std::string ratios;
    for (int k = 3; k <= 10; ++k) {
        long double r = std::log(trace[k + 1].max_failure()) / std::log(trace[k].max_failure());
        ratios += (ratios.empty() ? "" : " ") + fmt("%.3f", double(r));
        v.require(r >= 1.8L && r <= 2.2L, "k=" + std::to_string(k) + " ratio " + fmt("%.3f", double(r)));
    }
    v.detail = "ratios k=3..10: " + ratios + (v.pass ? "" : "; out of [1.8, 2.2]: " + v.detail);
    return v;
}

// 4. Decoding threshold coincides.
Verdict decoding_coincidence() {
    Verdict v;
    recursion::RecursionConfig plain, with_d;
    with_d.require_bounded_decoding = true;
    auto a = recursion::find_threshold(recursion::ModelConstants<double>{}, plain);
    auto b = recursion::find_threshold(recursion::ModelConstants<double>{}, with_d);
    double tol = plain.bisection_tolerance;
    v.require(std::abs(a.lower - b.lower) <= tol * a.lower && std::abs(a.upper - b.upper) <= tol * a.upper,
              "brackets differ");
    v.detail = "[" + fmt("%.6e", a.lower) + ", " + fmt("%.6e", a.upper) + "] vs [" + fmt("%.6e", b.lower) + ", " +
               fmt("%.6e", b.upper) + "]" + (v.pass ? "" : "; " + v.detail);
    return v;
}

sim::GadgetStats run(sim::Gadget g, double p, std::uint64_t trials, std::uint64_t seed) {
    sim::SimConfig cfg;
    cfg.gadget = g;
    cfg.level = 1;
    cfg.model.p = p;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.record_histograms = false;
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());
    return sim::run_experiment(cfg);
}

double binomial_sigma(double rate, double n) { return std::sqrt(rate * (1 - rate) / n); }

struct CnotRuns {
    std::vector<double> ps{1e-4, 3e-4, 1e-3};
    std::vector<std::uint64_t> trials{4000000, 2000000, 1000000};
    std::vector<sim::GadgetStats> stats;
};

CnotRuns &cnot_runs() {
    static CnotRuns runs = [] {
        CnotRuns r;
        for (std::size_t i = 0; i < r.ps.size(); ++i) r.stats.push_back(run(sim::Gadget::Cnot, r.ps[i], r.trials[i], 1000 + i));
        return r;
    }();
    return runs;
}

// 5. Monte Carlo rates respect the analytic bounds.
Verdict bound_soundness() {
    Verdict v;
    std::string detail;
    auto &cn = cnot_runs();
    for (std::size_t i = 0; i < 2; ++i) {
        double p = cn.ps[i];
        recursion::ModelConstants<double> c;
        c.p = p;
        const auto l1 = recursion::iterate_levels(c, 1)[1];
        const double n_cnot = double(cn.trials[i]);
        const auto &cs = cn.stats[i];
        double cr = cs.failure_rate();
        v.require(cr <= l1.C + 3 * binomial_sigma(l1.C, n_cnot), "CNOT rate above C1 at p=" + fmt("%g", p));

        const std::uint64_t n = 1000000;
        auto anc = run(sim::Gadget::Ancilla, p, n, 2000 + i);
        double acc = anc.acceptance_rate();
        v.require(acc >= l1.N - 3 * binomial_sigma(l1.N, double(n)), "acceptance below N1 at p=" + fmt("%g", p));

        auto ec = run(sim::Gadget::ErrorCorrection, p, n, 3000 + i);
        double rel = ec.relative_error_rate();
        v.require(rel <= l1.b_tilde + 3 * binomial_sigma(l1.b_tilde, double(n)),
                  "relative-error rate above b~1 at p=" + fmt("%g", p));

        detail += (detail.empty() ? "" : " | ") + std::string("p=") + fmt("%g", p) + ": cnot " + fmt("%.2e", cr) +
                  " <= C1 " + fmt("%.2e", l1.C) + ", accept " + fmt("%.5f", acc) + " >= N1 " + fmt("%.5f", l1.N) +
                  ", rel " + fmt("%.2e", rel) + " <= b~1 " + fmt("%.2e", l1.b_tilde);
    }
    v.detail = detail + (v.pass ? "" : "; " + v.detail);
    return v;
}

// 6. Empirical quadratic suppression.
Verdict empirical_suppression() {
    Verdict v;
    auto &cn = cnot_runs();
    std::vector<double> xs, ys;
    std::string rates;
    for (std::size_t i = 0; i < cn.ps.size(); ++i) {
        double r = cn.stats[i].failure_rate();
        rates += (rates.empty() ? "" : " ") + fmt("%.3e", r);
        if (r <= 0) {
            v.require(false, "no failures at p=" + fmt("%g", cn.ps[i]));
            return v;
        }
        xs.push_back(std::log(cn.ps[i]));
        ys.push_back(std::log(r));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / xs.size();
        my += ys[i] / ys.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = sxy / sxx;
    v.require(std::abs(slope - 2.0) <= 0.3, "slope outside 2.0 +/- 0.3");
    v.detail = "rates " + rates + ", slope " + fmt("%.3f", slope) + (v.pass ? "" : "; " + v.detail);
    return v;
}

// 7. Decoder against brute-force minimum-weight search.
Verdict decoder_equivalence() {
    Verdict v;
    auto mask_of = [](const char *s, char c) {
        unsigned m = 0;
        for (unsigned q = 0; q < 7; ++q) m |= unsigned(s[q] == c) << q;
        return m;
    };
    const char *zg[] = {"IIIZZZZ", "IZZIIZZ", "ZIZIZIZ"};
    const char *xg[] = {"IIIXXXX", "IXXIIXX", "XIXIXIX"};
    auto search = [&](unsigned comp, const char **gens, char c) {
        std::set<unsigned> stab;
        for (unsigned sel = 0; sel < 8; ++sel) {
            unsigned m = 0;
            for (unsigned g = 0; g < 3; ++g) {
                if ((sel >> g) & 1u) m ^= mask_of(gens[g], c);
            }
            stab.insert(m);
        }
        int best_w = 99;
        unsigned best = 0;
        for (unsigned e = 0; e < 128; ++e) {
            unsigned w = comp ^ e;
            bool ok = true;
            for (int g = 0; g < 3; ++g) ok = ok && !(std::popcount(w & mask_of(gens[g], c)) & 1);
            if (ok && std::popcount(e) < best_w) {
                best_w = std::popcount(e);
                best = e;
            }
        }
        int pos = best ? std::countr_zero(best) + 1 : 0;
        return std::pair{pos, stab.count(comp ^ best) == 0};
    };
    int mismatches = 0;
    for (unsigned x = 0; x < 128; ++x) {
        auto [px, lx] = search(x, zg, 'Z');
        for (unsigned z = 0; z < 128; ++z) {
            auto [pz, lz] = search(z, xg, 'X');
            auto r = steane::relative_state(steane::BlockPattern{steane::Mask7(x), steane::Mask7(z)});
            if (r.x_position != px || r.z_position != pz || r.block_state != make_label(lx, lz)) ++mismatches;
        }
    }
    v.require(mismatches == 0, std::to_string(mismatches) + " mismatching patterns");
    auto a = steane::relative_state(PauliFrame::from_string("IIIIIYX"));
    v.require(a.block_state == PauliLabel::X && a.x_position == 1 && a.z_position == 6, "IIIIIYX example");
    auto b = steane::relative_state(PauliFrame::from_string("XXIIIII"));
    v.require(b.block_state == PauliLabel::X && b.x_position == 3 && b.z_position == 0, "XXIIIII example");
    v.detail = "16384 patterns, " + std::to_string(mismatches) + " mismatches; worked examples " +
               (v.pass ? "ok" : "; " + v.detail);
    return v;
}

// 8. Distillation against the density-matrix oracle.
Verdict distill_equivalence() {
    Verdict v;
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_f = 0, worst_p = 0;
    for (int i = 0; i < 100; ++i) {
        distill::FidelityVector fs;
        for (auto &f : fs) f = u(rng);
        auto a = distill::distill_step(fs);
        auto o = distill::oracle_distill(fs);
        worst_f = std::max(worst_f, std::abs(a.f_out - o.f_out));
        worst_p = std::max(worst_p, std::abs(a.p_accept - o.p_accept));
    }
    v.require(worst_f <= 1e-12 && worst_p <= 1e-12, "closed form differs from the oracle");
    double fp = std::abs(distill::distill_step(distill::kCriticalFidelity).f_out - distill::kCriticalFidelity);
    v.require(fp <= 1e-10, "sqrt(3/7) is not a fixed point");
    int nonpositive = 0;
    for (int i = 0; i < 200; ++i) {
        distill::FidelityVector fs;
        for (auto &f : fs) f = u(rng);
        for (double d : distill::monotonicity_check(fs)) nonpositive += d <= 0;
    }
    v.require(nonpositive == 0, std::to_string(nonpositive) + " nonpositive partials");
    v.detail = "max |df| " + fmt("%.1e", worst_f) + ", max |dp| " + fmt("%.1e", worst_p) + ", fixed point off by " +
               fmt("%.1e", fp) + ", " + std::to_string(nonpositive) + "/1000 nonpositive partials" +
               (v.pass ? "" : "; " + v.detail);
    return v;
}

// 9. Byte-identical reruns.
Verdict determinism() {
    Verdict v;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("ftlab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto slurp = [](const fs::path &p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    };
    const std::vector<std::vector<std::string>> commands = {
        {"threshold"},
        {"threshold", "--format", "csv", "--with-decoding"},
        {"iterate", "--p", "1e-6", "--levels", "10"},
        {"simulate", "--gadget", "cnot", "--level", "1", "--p", "1e-3", "--trials", "20000", "--seed", "11"},
        {"simulate", "--gadget", "ancilla", "--level", "2", "--p", "1e-3", "--trials", "200", "--seed", "12",
         "--format", "json"},
        {"simulate", "--gadget", "decode", "--level", "1", "--p", "1e-3", "--trials", "5000", "--seed", "13",
         "--threads", "3"},
        {"distill", "--f", "0.9,0.8,0.85,0.95,0.7", "--iters", "4", "--format", "json"},
        {"decode-table"},
    };
    int identical = 0;
    std::ostringstream sink;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::string a = (dir / ("a" + std::to_string(i))).string();
        std::string b = (dir / ("b" + std::to_string(i))).string();
        auto ca = commands[i], cb = commands[i];
        ca.insert(ca.end(), {"--out", a});
        cb.insert(cb.end(), {"--out", b});
        int ra = cli::dispatch(ca, sink), rb = cli::dispatch(cb, sink);
        bool same = ra == 0 && rb == 0 && slurp(a) == slurp(b) && !slurp(a).empty();
        identical += same;
        v.require(same, "'" + commands[i][0] + "' run " + std::to_string(i) + " differs");
    }
    fs::remove_all(dir);
    v.detail = std::to_string(identical) + "/" + std::to_string(commands.size()) + " command reruns byte-identical" +
               (v.pass ? "" : "; " + v.detail);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"threshold reproduction", threshold_reproduction},
        {"zero-noise exactness", zero_noise},
        {"quadratic suppression (analytic)", analytic_suppression},
        {"decoding threshold coincidence", decoding_coincidence},
        {"bound soundness (Monte Carlo)", bound_soundness},
        {"quadratic suppression (empirical)", empirical_suppression},
        {"decoder oracle equivalence", decoder_equivalence},
        {"distillation oracle equivalence", distill_equivalence},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception &e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failed += !v.pass;
        std::printf("criterion %zu %-36s %s  (%.1f s) %s\n", i + 1, criteria[i].first.c_str(), v.pass ? "PASS" : "FAIL",
                    seconds_since(t0), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
