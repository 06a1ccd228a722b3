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
#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ftlab/pauli.hpp"

namespace ftlab::steane {

inline constexpr std::size_t kBlockSize = 7;

/// Number of physical qubits in a level-k block.
constexpr std::size_t block_size(int level) {
    std::size_t n = 1;
    for (int i = 0; i < level; ++i) n *= kBlockSize;
    return n;
}

/// A 7-bit support mask: bit (j-1) set means qubit j (1-based) is involved.
using Mask7 = std::uint8_t;

inline constexpr Mask7 kAllOnes = 0x7F;

/// Check i covers the qubits whose 1-based index has binary digit (2 - i)
/// set, so the syndrome read most-significant-first is the position of a
/// single error.
inline constexpr std::array<Mask7, 3> kHammingChecks = {0x78, 0x66, 0x55};

struct CodeParams {
    std::size_t n = kBlockSize;
    std::array<Mask7, 3> z_checks = kHammingChecks;
    std::array<Mask7, 3> x_checks = kHammingChecks;
    Mask7 logical_support = kAllOnes;
};

inline constexpr CodeParams kSteane{};

struct SyndromeTriple {
    std::array<std::uint8_t, 3> bits{};

    /// Bits read as a binary number, most significant first.
    int value() const { return bits[0] * 4 + bits[1] * 2 + bits[2]; }
    bool operator==(const SyndromeTriple &) const = default;
};

inline SyndromeTriple syndrome_of(Mask7 pattern, const std::array<Mask7, 3> &checks = kHammingChecks) {
    SyndromeTriple s;
    for (std::size_t i = 0; i < 3; ++i) {
        s.bits[i] = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(pattern & checks[i])) & 1);
    }
    return s;
}

/// Position (1..7) of the single flip producing this syndrome, or 0.
inline int hamming_position(Mask7 pattern) { return syndrome_of(pattern).value(); }

constexpr Mask7 position_mask(int position) {
    return position == 0 ? Mask7{0} : static_cast<Mask7>(1u << (position - 1));
}

/// X and Z components of a 7-qubit pattern.
struct BlockPattern {
    Mask7 x = 0;
    Mask7 z = 0;

    static BlockPattern from_frame(const PauliFrame &block, std::size_t offset = 0) {
        BlockPattern out;
        for (std::size_t q = 0; q < kBlockSize; ++q) {
            out.x |= static_cast<Mask7>(block.x(offset + q) << q);
            out.z |= static_cast<Mask7>(block.z(offset + q) << q);
        }
        return out;
    }
    PauliLabel label(int position) const {
        auto bit = static_cast<unsigned>(position - 1);
        return make_label((x >> bit) & 1u, (z >> bit) & 1u);
    }
    bool operator==(const BlockPattern &) const = default;
};

inline void require_block(const PauliFrame &block) {
    if (block.num_qubits() != kBlockSize) {
        throw std::invalid_argument("expected a 7-qubit block, got " + std::to_string(block.num_qubits()) +
                                    " qubits");
    }
}

/// z_syndrome detects X errors (parities of x-bits over the Z checks);
/// x_syndrome detects Z errors.
inline std::pair<SyndromeTriple, SyndromeTriple> syndromes(const PauliFrame &block) {
    require_block(block);
    auto pattern = BlockPattern::from_frame(block);
    return {syndrome_of(pattern.x, kSteane.z_checks), syndrome_of(pattern.z, kSteane.x_checks)};
}

enum class LogicalCoset { Trivial, Logical };

/// Classifies a zero-syndrome pattern: stabilizer elements have even
/// weight (0 or 4), logical-coset elements odd weight (3 or 7).
inline LogicalCoset logical_coset(Mask7 corrected) {
    if (syndrome_of(corrected).value() != 0) {
        throw std::invalid_argument("logical_coset needs a zero-syndrome pattern");
    }
    return (std::popcount(static_cast<unsigned>(corrected)) & 1) ? LogicalCoset::Logical : LogicalCoset::Trivial;
}

/// Logical bit of one component after minimum-weight correction.
inline bool decode_component(Mask7 component) {
    Mask7 corrected = component ^ position_mask(hamming_position(component));
    return logical_coset(corrected) == LogicalCoset::Logical;
}

struct RelativeState {
    PauliLabel block_state = PauliLabel::I;
    int x_position = 0;  ///< 1-based subblock in relative X error, 0 if none
    int z_position = 0;

    bool is_clean() const { return x_position == 0 && z_position == 0; }
    /// Number of distinct subblocks in relative error (0, 1 or 2).
    int erroneous_subblocks() const {
        if (x_position == 0) return z_position == 0 ? 0 : 1;
        if (z_position == 0 || z_position == x_position) return 1;
        return 2;
    }
    bool operator==(const RelativeState &) const = default;
};

inline RelativeState relative_state(BlockPattern pattern) {
    RelativeState r;
    r.x_position = hamming_position(pattern.x);
    r.z_position = hamming_position(pattern.z);
    r.block_state = make_label(decode_component(pattern.x), decode_component(pattern.z));
    return r;
}

inline RelativeState relative_state(const PauliFrame &block) {
    require_block(block);
    return relative_state(BlockPattern::from_frame(block));
}

/// Bottom-up ideal decoding of one component of the level-`level` block
/// occupying qubits [offset, offset + 7^level).
inline bool decoded_bit(const PauliFrame &frame, std::size_t offset, int level, bool z_component) {
    if (level == 0) {
        return z_component ? frame.z(offset) : frame.x(offset);
    }
    return decode_component([&] {
        Mask7 m = 0;
        std::size_t stride = block_size(level - 1);
        for (std::size_t i = 0; i < kBlockSize; ++i) {
            m |= static_cast<Mask7>(decoded_bit(frame, offset + i * stride, level - 1, z_component) << i);
        }
        return m;
    }());
}

/// States of the seven subblocks of a level-`level` block (level >= 1).
inline BlockPattern subblock_states(const PauliFrame &frame, std::size_t offset, int level) {
    if (level < 1) throw std::invalid_argument("subblock_states needs level >= 1");
    BlockPattern out;
    std::size_t stride = block_size(level - 1);
    for (std::size_t i = 0; i < kBlockSize; ++i) {
        out.x |= static_cast<Mask7>(decoded_bit(frame, offset + i * stride, level - 1, false) << i);
        out.z |= static_cast<Mask7>(decoded_bit(frame, offset + i * stride, level - 1, true) << i);
    }
    return out;
}

/// state_k of a block.
inline PauliLabel block_state(const PauliFrame &frame, std::size_t offset, int level) {
    return make_label(decoded_bit(frame, offset, level, false), decoded_bit(frame, offset, level, true));
}

inline RelativeState relative_state_at(const PauliFrame &frame, std::size_t offset, int level) {
    return relative_state(subblock_states(frame, offset, level));
}

enum class InitialBasis { Zero, Plus, Data };
enum class EncoderKind { Zero, Plus, Data };

struct EncodingCircuit {
    std::array<InitialBasis, kBlockSize> initial_bases{};
    /// 0-based (control, target) pairs, applied in order.
    std::vector<std::pair<std::size_t, std::size_t>> gates;
};

/// Index of the qubit that carries the input state in the data encoder.
inline constexpr std::size_t kDataQubit = 5;

inline EncodingCircuit encoding_circuit(EncoderKind kind) {
    using B = InitialBasis;
    EncodingCircuit c;
    c.initial_bases = {B::Plus, B::Plus, B::Zero, B::Plus, B::Zero, B::Zero, B::Zero};
    c.gates = {{0, 2}, {0, 4}, {0, 6}, {1, 2}, {1, 5}, {1, 6}, {3, 4}, {3, 5}, {3, 6}};
    switch (kind) {
        case EncoderKind::Zero:
            break;
        case EncoderKind::Plus:
            // Transversal Hadamard conjugation: swap bases, reverse every CNOT.
            for (auto &b : c.initial_bases) b = (b == B::Zero) ? B::Plus : B::Zero;
            for (auto &[ctl, tgt] : c.gates) std::swap(ctl, tgt);
            break;
        case EncoderKind::Data:
            c.initial_bases[kDataQubit] = B::Data;
            c.gates.insert(c.gates.begin(), {{kDataQubit, 2}, {kDataQubit, 4}});
            break;
    }
    return c;
}

/// Entry of the syndrome -> position lookup.
struct DecodeTableRow {
    SyndromeTriple syndrome;
    int position = 0;
};

inline std::array<DecodeTableRow, 8> decode_table() {
    std::array<DecodeTableRow, 8> rows{};
    for (int s = 0; s < 8; ++s) {
        rows[s].syndrome.bits = {static_cast<std::uint8_t>((s >> 2) & 1), static_cast<std::uint8_t>((s >> 1) & 1),
                                 static_cast<std::uint8_t>(s & 1)};
        // Position j's single flip has syndrome j; the table is the identity
        // by construction, but compute it rather than assume it.
        for (int j = 0; j <= 7; ++j) {
            if (syndrome_of(position_mask(j)).value() == s) rows[s].position = j;
        }
    }
    return rows;
}

/// Classical post-processing for the unencoding circuit (inverse of the data
/// encoder). After unencoding, the ancilla-role qubits are measured: former
/// |0> qubits in the Z basis (x-bits), former |+> qubits in the X basis
/// (z-bits). The tables map those three-bit outcomes to the flip needed on the
/// data qubit so that it carries the ideally decoded state.
class Unencoder {
   public:
    Unencoder() : circuit_(encoding_circuit(EncoderKind::Data)) {
        for (std::size_t q = 0; q < kBlockSize; ++q) {
            if (circuit_.initial_bases[q] == InitialBasis::Zero) zero_qubits_.push_back(q);
            if (circuit_.initial_bases[q] == InitialBasis::Plus) plus_qubits_.push_back(q);
        }
        x_fix_.fill(-1);
        z_fix_.fill(-1);
        for (unsigned m = 0; m < 128; ++m) {
            PauliFrame f(kBlockSize);
            for (std::size_t q = 0; q < kBlockSize; ++q) {
                if ((m >> q) & 1u) {
                    f.flip_x(q);
                    f.flip_z(q);
                }
            }
            bool ideal = decode_component(static_cast<Mask7>(m));
            unencode_perfect(f);
            record(x_fix_, x_outcome_at(f, 0), f.x(kDataQubit) != ideal);
            record(z_fix_, z_outcome_at(f, 0), f.z(kDataQubit) != ideal);
        }
    }

    /// Gates of the unencoding circuit, in application order.
    std::vector<std::pair<std::size_t, std::size_t>> gates() const {
        return {circuit_.gates.rbegin(), circuit_.gates.rend()};
    }
    const std::vector<std::size_t> &zero_qubits() const { return zero_qubits_; }
    const std::vector<std::size_t> &plus_qubits() const { return plus_qubits_; }

    /// Outcome bits given the physical index of each of the 7 block positions.
    template <typename PositionFn>
    unsigned x_outcome(const PauliFrame &f, PositionFn pos) const {
        unsigned s = 0;
        for (std::size_t i = 0; i < zero_qubits_.size(); ++i) s |= static_cast<unsigned>(f.x(pos(zero_qubits_[i]))) << i;
        return s;
    }
    template <typename PositionFn>
    unsigned z_outcome(const PauliFrame &f, PositionFn pos) const {
        unsigned s = 0;
        for (std::size_t i = 0; i < plus_qubits_.size(); ++i) s |= static_cast<unsigned>(f.z(pos(plus_qubits_[i]))) << i;
        return s;
    }
    unsigned x_outcome_at(const PauliFrame &f, std::size_t offset) const {
        return x_outcome(f, [offset](std::size_t q) { return offset + q; });
    }
    unsigned z_outcome_at(const PauliFrame &f, std::size_t offset) const {
        return z_outcome(f, [offset](std::size_t q) { return offset + q; });
    }

    bool x_fix(unsigned outcome) const { return x_fix_[outcome] == 1; }
    bool z_fix(unsigned outcome) const { return z_fix_[outcome] == 1; }

    void unencode_perfect(PauliFrame &f) const {
        for (auto [c, t] : gates()) f.apply_cnot(c, t);
    }

   private:
    void record(std::array<int, 8> &table, unsigned outcome, bool flip) {
        int v = flip ? 1 : 0;
        if (table[outcome] != -1 && table[outcome] != v) {
            throw std::logic_error("unencoder correction table is inconsistent");
        }
        table[outcome] = v;
    }

    EncodingCircuit circuit_;
    std::vector<std::size_t> zero_qubits_;
    std::vector<std::size_t> plus_qubits_;
    std::array<int, 8> x_fix_{};
    std::array<int, 8> z_fix_{};
};

inline const Unencoder &unencoder() {
    static const Unencoder instance;
    return instance;
}

}  // namespace ftlab::steane
