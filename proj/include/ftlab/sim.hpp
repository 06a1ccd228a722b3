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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftlab/pauli.hpp"
#include "ftlab/recursion.hpp"
#include "ftlab/steane.hpp"

namespace ftlab::sim {

using steane::block_size;
using steane::kBlockSize;

enum class Gadget { Ancilla, ErrorCorrection, Cnot, Decode };
enum class AncillaBasis { Zero, Plus };
enum class CorrectionKind { X, Z };

inline const char *gadget_name(Gadget g) {
    switch (g) {
        case Gadget::Ancilla:
            return "ancilla";
        case Gadget::ErrorCorrection:
            return "ec";
        case Gadget::Cnot:
            return "cnot";
        case Gadget::Decode:
            return "decode";
    }
    return "?";
}

inline Gadget parse_gadget(const std::string &name) {
    if (name == "ancilla") return Gadget::Ancilla;
    if (name == "ec") return Gadget::ErrorCorrection;
    if (name == "cnot") return Gadget::Cnot;
    if (name == "decode") return Gadget::Decode;
    throw std::invalid_argument("unknown gadget '" + name + "'");
}

/// A level-k block inside some frame: qubits [offset, offset + 7^level).
struct BlockView {
    PauliFrame *frame = nullptr;
    std::size_t offset = 0;
    int level = 0;

    std::size_t size() const { return block_size(level); }
    BlockView sub(std::size_t i) const {
        if (level < 1) throw std::logic_error("a level-0 block has no subblocks");
        return {frame, offset + i * block_size(level - 1), level - 1};
    }
    /// Block reached by following subblock indices from this block.
    BlockView descend(std::span<const std::size_t> path) const {
        BlockView v = *this;
        for (std::size_t i : path) v = v.sub(i);
        return v;
    }
    PauliLabel state() const { return steane::block_state(*frame, offset, level); }
    steane::RelativeState relative_state() const { return steane::relative_state_at(*frame, offset, level); }
    void clear() const { frame->clear_range(offset, size()); }
};

/// Owns the frame of one level-k block.
class BlockRegister {
   public:
    explicit BlockRegister(int level = 1) : level_(level), frame_(block_size(level)) {
        if (level < 0) throw std::invalid_argument("block level must be >= 0");
    }

    /// A clean block with the transversal logical operator `logical` applied.
    static BlockRegister with_logical(int level, PauliLabel logical) {
        BlockRegister r(level);
        if (x_bit(logical)) r.frame_.flip_x_range(0, r.frame_.num_qubits());
        if (z_bit(logical)) r.frame_.flip_z_range(0, r.frame_.num_qubits());
        return r;
    }

    int level() const { return level_; }
    PauliFrame &frame() { return frame_; }
    const PauliFrame &frame() const { return frame_; }
    BlockView view() { return {&frame_, 0, level_}; }

    PauliLabel state() const { return steane::block_state(frame_, 0, level_); }
    steane::RelativeState relative_state() const { return steane::relative_state_at(frame_, 0, level_); }

    /// Physical qubit range of the subblock reached through `path`.
    std::pair<std::size_t, std::size_t> subblock_range(std::span<const std::size_t> path) const {
        if (static_cast<int>(path.size()) > level_) throw std::invalid_argument("subblock path deeper than block");
        std::size_t offset = 0;
        int level = level_;
        for (std::size_t i : path) {
            if (i >= kBlockSize) throw std::out_of_range("subblock index must be < 7");
            --level;
            offset += i * block_size(level);
        }
        return {offset, block_size(level)};
    }

    bool operator==(const BlockRegister &) const = default;

   private:
    int level_;
    PauliFrame frame_;
};

/// Number of level-j blocks (j = 1..level) carrying a relative error; index 0 unused.
inline std::vector<int> relative_error_counts(const PauliFrame &frame, std::size_t offset, int level) {
    std::vector<int> counts(static_cast<std::size_t>(level) + 1, 0);
    auto visit = [&](auto &&self, std::size_t off, int lvl) -> void {
        if (lvl < 1) return;
        if (!steane::relative_state_at(frame, off, lvl).is_clean()) ++counts[lvl];
        for (std::size_t i = 0; i < kBlockSize; ++i) self(self, off + i * block_size(lvl - 1), lvl - 1);
    };
    visit(visit, offset, level);
    return counts;
}

struct CorrectionRecord {
    CorrectionKind kind = CorrectionKind::X;
    int position = 0;  ///< 1-based corrected subblock, 0 if none
};

class RetryCapExceeded : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kAncillaRetryCap = 10000;

/// Pauli-frame executor for the concatenated gadgets. Every physical CNOT is a
/// numbered fault location; faults are sampled from the error model, and
/// specific locations can be forced for fault-injection experiments.
class Simulator {
   public:
    explicit Simulator(ErrorModel model, std::uint64_t seed = 0) : model_(model), rng_(seed) { model_.validate(); }

    void reseed(std::uint64_t seed) { rng_.seed(seed); }
    const ErrorModel &model() const { return model_; }

    void inject(std::uint64_t location, TwoQubitPauli fault) { injected_[location] = fault; }
    void clear_injections() { injected_.clear(); }
    std::uint64_t locations_used() const { return location_; }
    void reset_location_counter() { location_ = 0; }

    std::uint64_t ancilla_attempts() const { return ancilla_attempts_; }
    std::uint64_t ancilla_rejections() const { return ancilla_rejections_; }
    void reset_counters() {
        ancilla_attempts_ = 0;
        ancilla_rejections_ = 0;
        location_ = 0;
    }

    void physical_cnot(PauliFrame &cf, std::size_t c, PauliFrame &tf, std::size_t t) {
        propagate_cnot_between(cf, c, tf, t);
        std::uint64_t loc = location_++;
        std::optional<TwoQubitPauli> fault;
        if (!injected_.empty()) {
            if (auto it = injected_.find(loc); it != injected_.end()) fault = it->second;
        }
        if (auto sampled = sample_cnot_fault(model_, rng_)) {
            fault = fault ? TwoQubitPauli{compose(fault->first, sampled->first), compose(fault->second, sampled->second)}
                          : *sampled;
        }
        if (fault) {
            cf.apply(c, fault->first);
            tf.apply(t, fault->second);
        }
    }

    /// CNOT_k: transversal CNOT_{k-1} followed by error correction of both blocks.
    void cnot_gadget(BlockView control, BlockView target) {
        if (control.level != target.level) throw std::invalid_argument("CNOT gadget blocks must share a level");
        if (control.level == 0) {
            physical_cnot(*control.frame, control.offset, *target.frame, target.offset);
            return;
        }
        transversal_cnot(control, target);
        error_correct(control);
        error_correct(target);
    }

    /// Two rounds of [transversal EC_{k-1}; X-correction; Z-correction].
    void error_correct(BlockView block) {
        if (block.level < 1) throw std::invalid_argument("error correction needs level >= 1");
        for (int round = 0; round < 2; ++round) {
            if (block.level > 1) {
                for (std::size_t i = 0; i < kBlockSize; ++i) error_correct(block.sub(i));
            }
            steane_extraction_round(block, CorrectionKind::X);
            steane_extraction_round(block, CorrectionKind::Z);
        }
    }

    /// One Steane syndrome extraction with a freshly verified ancilla, then
    /// the transversal correction of the indicated subblock.
    CorrectionRecord steane_extraction_round(BlockView data, CorrectionKind kind) {
        if (data.level < 1) throw std::invalid_argument("syndrome extraction needs level >= 1");
        BlockRegister anc(data.level);
        BlockView a = anc.view();
        CorrectionRecord rec{kind, 0};
        if (kind == CorrectionKind::X) {
            acquire_ancilla(a, AncillaBasis::Plus);
            transversal_cnot(data, a);
            rec.position = steane::hamming_position(steane::subblock_states(anc.frame(), 0, a.level).x);
            if (rec.position) {
                BlockView target = data.sub(static_cast<std::size_t>(rec.position - 1));
                target.frame->flip_x_range(target.offset, target.size());
            }
        } else {
            acquire_ancilla(a, AncillaBasis::Zero);
            transversal_cnot(a, data);
            rec.position = steane::hamming_position(steane::subblock_states(anc.frame(), 0, a.level).z);
            if (rec.position) {
                BlockView target = data.sub(static_cast<std::size_t>(rec.position - 1));
                target.frame->flip_z_range(target.offset, target.size());
            }
        }
        return rec;
    }

    /// One verification attempt. Writes the candidate into `dest` and
    /// returns whether it was accepted.
    bool prepare_verified_ancilla(BlockView dest, AncillaBasis basis) {
        if (dest.level < 1) throw std::invalid_argument("verified ancilla needs level >= 1");
        ++ancilla_attempts_;
        prepare_unverified(dest, basis);
        BlockRegister check(dest.level);
        prepare_unverified(check.view(), basis);
        // X errors of a |0> candidate are copied forward into the check copy;
        // Z errors of a |+> candidate are copied backward.
        bool zero = basis == AncillaBasis::Zero;
        if (zero) {
            transversal_cnot(dest, check.view());
        } else {
            transversal_cnot(check.view(), dest);
        }
        steane::BlockPattern seen = steane::subblock_states(check.frame(), 0, dest.level);
        steane::Mask7 component = zero ? seen.x : seen.z;
        bool accepted = component == 0;  // no relative error and state I
        if (!accepted) {
            ++ancilla_rejections_;
            return false;
        }
        // Bookkeeping: a logical Z on |0> (X on |+>) acts trivially, so fold it away.
        PauliLabel st = dest.state();
        if (zero && z_bit(st)) dest.frame->flip_z_range(dest.offset, dest.size());
        if (!zero && x_bit(st)) dest.frame->flip_x_range(dest.offset, dest.size());
        return true;
    }

    std::pair<BlockRegister, bool> prepare_verified_ancilla(int level, AncillaBasis basis) {
        BlockRegister reg(level);
        bool ok = prepare_verified_ancilla(reg.view(), basis);
        return {std::move(reg), ok};
    }

    /// Repeats verification until acceptance. Level 0 is a perfect preparation.
    void acquire_ancilla(BlockView dest, AncillaBasis basis) {
        if (dest.level == 0) {
            dest.clear();
            return;
        }
        for (int attempt = 0; attempt < kAncillaRetryCap; ++attempt) {
            if (prepare_verified_ancilla(dest, basis)) return;
        }
        throw RetryCapExceeded("ancilla verification rejected " + std::to_string(kAncillaRetryCap) + " times");
    }

    /// Noisy bottom-up unencoding. Destroys the block; returns the Pauli error
    /// on the decoded qubit relative to ideal decoding of the input.
    PauliLabel decode_gadget(BlockView block) {
        if (block.level < 1) throw std::invalid_argument("decoding needs level >= 1");
        PauliLabel ideal = block.state();
        std::size_t out = unencode(block);
        return compose(block.frame->label(out), ideal);
    }

    void transversal_cnot(BlockView control, BlockView target) {
        for (std::size_t i = 0; i < kBlockSize; ++i) cnot_gadget(control.sub(i), target.sub(i));
    }

   private:
    void prepare_unverified(BlockView dest, AncillaBasis basis) {
        auto circuit = steane::encoding_circuit(basis == AncillaBasis::Zero ? steane::EncoderKind::Zero
                                                                            : steane::EncoderKind::Plus);
        for (std::size_t i = 0; i < kBlockSize; ++i) {
            auto sub_basis = circuit.initial_bases[i] == steane::InitialBasis::Zero ? AncillaBasis::Zero
                                                                                    : AncillaBasis::Plus;
            acquire_ancilla(dest.sub(i), sub_basis);
        }
        for (auto [c, t] : circuit.gates) cnot_gadget(dest.sub(c), dest.sub(t));
        if (dest.level > 1) {
            for (std::size_t i = 0; i < kBlockSize; ++i) error_correct(dest.sub(i));
        }
    }

    std::size_t unencode(BlockView block) {
        if (block.level == 0) return block.offset;
        std::array<std::size_t, kBlockSize> pos{};
        for (std::size_t i = 0; i < kBlockSize; ++i) pos[i] = unencode(block.sub(i));
        const auto &un = steane::unencoder();
        PauliFrame &f = *block.frame;
        for (auto [c, t] : un.gates()) physical_cnot(f, pos[c], f, pos[t]);
        auto at = [&](std::size_t q) { return pos[q]; };
        std::size_t data = pos[steane::kDataQubit];
        if (un.x_fix(un.x_outcome(f, at))) f.flip_x(data);
        if (un.z_fix(un.z_outcome(f, at))) f.flip_z(data);
        return data;
    }

    ErrorModel model_;
    std::mt19937_64 rng_;
    std::unordered_map<std::uint64_t, TwoQubitPauli> injected_;
    std::uint64_t location_ = 0;
    std::uint64_t ancilla_attempts_ = 0;
    std::uint64_t ancilla_rejections_ = 0;
};

struct SimConfig {
    Gadget gadget = Gadget::Cnot;
    int level = 1;
    ErrorModel model;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    /// Trial indices run are [first_trial, first_trial + trials); each trial's
    /// rng stream is derived from (seed, trial index).
    std::uint64_t first_trial = 0;
    bool record_histograms = true;
    AncillaBasis ancilla_basis = AncillaBasis::Zero;
    unsigned threads = 1;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("trials must be >= 1");
        if (level < 1) throw std::invalid_argument("level must be >= 1");
        if (level > 4) throw std::invalid_argument("level must be <= 4");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
        model.validate();
    }
};

struct GadgetStats {
    std::uint64_t trials = 0;
    std::uint64_t accepted = 0;  ///< postselected gadgets only; equals trials otherwise
    std::uint64_t failures = 0;  ///< trials whose logical outcome differs from the ideal
    std::uint64_t with_relative_error = 0;       ///< output has >= 1 top-level relative error
    std::uint64_t with_two_relative_errors = 0;  ///< output has 2 erroneous subblocks
    std::uint64_t ancilla_attempts = 0;          ///< every verification attempt, nested ones included
    std::uint64_t ancilla_rejections = 0;
    std::map<std::string, std::uint64_t> logical_outcomes;
    std::map<std::pair<int, int>, std::uint64_t> relative_error_histogram;  ///< (level, count) -> samples
    bool retry_cap_exhausted = false;

    GadgetStats &merge(const GadgetStats &o) {
        trials += o.trials;
        accepted += o.accepted;
        failures += o.failures;
        with_relative_error += o.with_relative_error;
        with_two_relative_errors += o.with_two_relative_errors;
        ancilla_attempts += o.ancilla_attempts;
        ancilla_rejections += o.ancilla_rejections;
        for (const auto &[k, v] : o.logical_outcomes) logical_outcomes[k] += v;
        for (const auto &[k, v] : o.relative_error_histogram) relative_error_histogram[k] += v;
        retry_cap_exhausted = retry_cap_exhausted || o.retry_cap_exhausted;
        return *this;
    }

    double failure_rate() const { return trials ? static_cast<double>(failures) / static_cast<double>(trials) : 0.0; }
    double acceptance_rate() const {
        return trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0;
    }
    double relative_error_rate() const {
        return accepted ? static_cast<double>(with_relative_error) / static_cast<double>(accepted) : 0.0;
    }

    bool operator==(const GadgetStats &) const = default;
};

namespace detail {

inline void record_block(GadgetStats &stats, const BlockRegister &reg, bool histograms) {
    auto rel = reg.relative_state();
    if (!rel.is_clean()) ++stats.with_relative_error;
    if (rel.erroneous_subblocks() >= 2) ++stats.with_two_relative_errors;
    if (histograms) {
        auto counts = relative_error_counts(reg.frame(), 0, reg.level());
        for (int j = 1; j <= reg.level(); ++j) ++stats.relative_error_histogram[{j, counts[j]}];
    }
}

inline void run_trial(Simulator &sim, const SimConfig &cfg, GadgetStats &stats) {
    ++stats.trials;
    switch (cfg.gadget) {
        case Gadget::Ancilla: {
            auto [reg, ok] = sim.prepare_verified_ancilla(cfg.level, cfg.ancilla_basis);
            if (!ok) return;
            ++stats.accepted;
            PauliLabel st = reg.state();
            ++stats.logical_outcomes[std::string(1, to_char(st))];
            // A verified |0> must not carry a logical X (a |+> no logical Z).
            bool bad = cfg.ancilla_basis == AncillaBasis::Zero ? x_bit(st) : z_bit(st);
            if (bad) ++stats.failures;
            record_block(stats, reg, cfg.record_histograms);
            return;
        }
        case Gadget::ErrorCorrection: {
            BlockRegister reg(cfg.level);
            sim.error_correct(reg.view());
            ++stats.accepted;
            PauliLabel st = reg.state();
            ++stats.logical_outcomes[std::string(1, to_char(st))];
            if (st != PauliLabel::I) ++stats.failures;
            record_block(stats, reg, cfg.record_histograms);
            return;
        }
        case Gadget::Cnot: {
            BlockRegister a(cfg.level), b(cfg.level);
            sim.cnot_gadget(a.view(), b.view());
            ++stats.accepted;
            PauliLabel sa = a.state(), sb = b.state();
            ++stats.logical_outcomes[std::string{to_char(sa), to_char(sb)}];
            if (sa != PauliLabel::I || sb != PauliLabel::I) ++stats.failures;
            auto ra = a.relative_state(), rb = b.relative_state();
            if (!ra.is_clean() || !rb.is_clean()) ++stats.with_relative_error;
            if (ra.erroneous_subblocks() >= 2 || rb.erroneous_subblocks() >= 2) ++stats.with_two_relative_errors;
            if (cfg.record_histograms) {
                for (const BlockRegister *r : {&a, &b}) {
                    auto counts = relative_error_counts(r->frame(), 0, r->level());
                    for (int j = 1; j <= r->level(); ++j) ++stats.relative_error_histogram[{j, counts[j]}];
                }
            }
            return;
        }
        case Gadget::Decode: {
            // Input: a block that has just left a (noisy) correction.
            BlockRegister reg(cfg.level);
            sim.error_correct(reg.view());
            record_block(stats, reg, cfg.record_histograms);
            ++stats.accepted;
            PauliLabel err = sim.decode_gadget(reg.view());
            ++stats.logical_outcomes[std::string(1, to_char(err))];
            if (err != PauliLabel::I) ++stats.failures;
            return;
        }
    }
}

inline GadgetStats run_range(const SimConfig &cfg, std::uint64_t begin, std::uint64_t end) {
    GadgetStats stats;
    Simulator sim(cfg.model);
    for (std::uint64_t t = begin; t < end; ++t) {
        sim.reseed(derive_seed(cfg.seed, t));
        try {
            run_trial(sim, cfg, stats);
        } catch (const RetryCapExceeded &) {
            stats.retry_cap_exhausted = true;
            break;
        }
    }
    stats.ancilla_attempts = sim.ancilla_attempts();
    stats.ancilla_rejections = sim.ancilla_rejections();
    return stats;
}

}  // namespace detail

/// Runs `cfg.trials` independent trials of the selected gadget from clean
/// inputs. Output is independent of the thread count.
inline GadgetStats run_experiment(const SimConfig &cfg) {
    cfg.validate();
    const std::uint64_t begin = cfg.first_trial;
    const std::uint64_t end = cfg.first_trial + cfg.trials;
    unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads, cfg.trials));
    if (workers <= 1) return detail::run_range(cfg, begin, end);

    std::vector<GadgetStats> parts(workers);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (cfg.trials + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::uint64_t lo = begin + w * chunk;
        std::uint64_t hi = std::min(end, lo + chunk);
        pool.emplace_back([&, w, lo, hi] { parts[w] = detail::run_range(cfg, lo, hi); });
    }
    for (auto &t : pool) t.join();
    GadgetStats total;
    for (const auto &p : parts) total.merge(p);
    return total;
}

struct AuditSummary {
    std::uint64_t samples = 0;
    std::uint64_t with_one_or_more = 0;
    std::uint64_t with_two_or_more = 0;
    std::map<std::pair<int, int>, std::uint64_t> histogram;

    double fraction_one_or_more() const {
        return samples ? static_cast<double>(with_one_or_more) / static_cast<double>(samples) : 0.0;
    }
    double fraction_two_or_more() const {
        return samples ? static_cast<double>(with_two_or_more) / static_cast<double>(samples) : 0.0;
    }
};

/// Top-level relative-error fractions of a set of same-level snapshots.
inline AuditSummary audit_relative_errors(std::span<const BlockRegister> samples) {
    AuditSummary out;
    if (samples.empty()) return out;
    const int level = samples.front().level();
    for (const auto &s : samples) {
        if (s.level() != level) throw std::invalid_argument("audit_relative_errors: snapshots have mixed levels");
        if (level < 1) throw std::invalid_argument("audit_relative_errors: snapshots must have level >= 1");
        ++out.samples;
        auto rel = s.relative_state();
        int bad = rel.erroneous_subblocks();
        if (bad >= 1) ++out.with_one_or_more;
        if (bad >= 2) ++out.with_two_or_more;
        auto counts = relative_error_counts(s.frame(), 0, level);
        for (int j = 1; j <= level; ++j) ++out.histogram[{j, counts[j]}];
    }
    return out;
}

/// Analytic counterpart of each gadget's failure tally: A_k, B_k, C_k, D_k.
inline double analytic_bound(Gadget g, int level, double p) {
    recursion::ModelConstants<double> c;
    c.p = p;
    auto trace = recursion::iterate_levels(c, level);
    if (static_cast<int>(trace.size()) <= level) return 1.0;
    const auto &lp = trace[static_cast<std::size_t>(level)];
    switch (g) {
        case Gadget::Ancilla:
            return lp.A;
        case Gadget::ErrorCorrection:
            return lp.B;
        case Gadget::Cnot:
            return lp.C;
        case Gadget::Decode:
            return lp.D;
    }
    return 1.0;
}

}  // namespace ftlab::sim
