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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftlab {

/// Single-qubit Pauli label up to phase. The enumerator value packs the
/// (x, z) bit pair as `x | (z << 1)`, so Y = X|Z.
enum class PauliLabel : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

/// Labels in the conventional I, X, Y, Z order used for tables and output.
inline constexpr std::array<PauliLabel, 4> kPauliOrder = {
    PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z};

constexpr PauliLabel make_label(bool x, bool z) {
    return static_cast<PauliLabel>(static_cast<unsigned>(x) | (static_cast<unsigned>(z) << 1));
}
constexpr bool x_bit(PauliLabel p) { return (static_cast<unsigned>(p) & 1u) != 0; }
constexpr bool z_bit(PauliLabel p) { return (static_cast<unsigned>(p) & 2u) != 0; }

/// Phase-free product.
constexpr PauliLabel compose(PauliLabel a, PauliLabel b) {
    return static_cast<PauliLabel>(static_cast<unsigned>(a) ^ static_cast<unsigned>(b));
}

constexpr char to_char(PauliLabel p) {
    switch (p) {
        case PauliLabel::I:
            return 'I';
        case PauliLabel::X:
            return 'X';
        case PauliLabel::Y:
            return 'Y';
        case PauliLabel::Z:
            return 'Z';
    }
    return '?';
}

inline PauliLabel label_from_char(char c) {
    switch (c) {
        case 'I':
        case '_':
            return PauliLabel::I;
        case 'X':
            return PauliLabel::X;
        case 'Y':
            return PauliLabel::Y;
        case 'Z':
            return PauliLabel::Z;
        default:
            throw std::invalid_argument(std::string("Not a Pauli label: '") + c + "'");
    }
}

struct TwoQubitPauli {
    PauliLabel first = PauliLabel::I;
    PauliLabel second = PauliLabel::I;

    bool is_identity() const { return first == PauliLabel::I && second == PauliLabel::I; }
    /// Position of this product in the I⊗I, I⊗X, I⊗Y, ..., Z⊗Z enumeration.
    std::size_t table_index() const;
    static TwoQubitPauli from_table_index(std::size_t index);
    bool operator==(const TwoQubitPauli &) const = default;
};

inline std::size_t order_index(PauliLabel p) {
    switch (p) {
        case PauliLabel::I:
            return 0;
        case PauliLabel::X:
            return 1;
        case PauliLabel::Y:
            return 2;
        case PauliLabel::Z:
            return 3;
    }
    return 0;
}

inline std::size_t TwoQubitPauli::table_index() const {
    return order_index(first) * 4 + order_index(second);
}

inline TwoQubitPauli TwoQubitPauli::from_table_index(std::size_t index) {
    if (index >= 16) {
        throw std::out_of_range("two-qubit Pauli index must be < 16");
    }
    return {kPauliOrder[index / 4], kPauliOrder[index % 4]};
}

/// X/Z error record over a register. Qubit indices are 0-based.
class PauliFrame {
   public:
    PauliFrame() = default;
    explicit PauliFrame(std::size_t num_qubits)
        : num_qubits_(num_qubits), xs_(num_words(num_qubits), 0), zs_(num_words(num_qubits), 0) {}

    /// Parses a string such as "IIIIIYX" (qubit 0 first).
    static PauliFrame from_string(const std::string &text) {
        PauliFrame frame(text.size());
        for (std::size_t q = 0; q < text.size(); ++q) {
            frame.set(q, label_from_char(text[q]));
        }
        return frame;
    }

    std::size_t num_qubits() const { return num_qubits_; }

    bool x(std::size_t q) const { return (xs_[q >> 6] >> (q & 63)) & 1u; }
    bool z(std::size_t q) const { return (zs_[q >> 6] >> (q & 63)) & 1u; }
    PauliLabel label(std::size_t q) const { return make_label(x(q), z(q)); }

    void flip_x(std::size_t q) { xs_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
    void flip_z(std::size_t q) { zs_[q >> 6] ^= std::uint64_t{1} << (q & 63); }
    void apply(std::size_t q, PauliLabel p) {
        if (x_bit(p)) flip_x(q);
        if (z_bit(p)) flip_z(q);
    }
    void set(std::size_t q, PauliLabel p) {
        if (x(q) != x_bit(p)) flip_x(q);
        if (z(q) != z_bit(p)) flip_z(q);
    }

    void flip_x_range(std::size_t offset, std::size_t count) {
        for (std::size_t q = offset; q < offset + count; ++q) flip_x(q);
    }
    void flip_z_range(std::size_t offset, std::size_t count) {
        for (std::size_t q = offset; q < offset + count; ++q) flip_z(q);
    }
    void clear_range(std::size_t offset, std::size_t count) {
        for (std::size_t q = offset; q < offset + count; ++q) set(q, PauliLabel::I);
    }

    bool is_clean() const {
        for (std::size_t w = 0; w < xs_.size(); ++w) {
            if (xs_[w] != 0 || zs_[w] != 0) return false;
        }
        return true;
    }

    /// In-place conjugation by CNOT(control, target).
    void apply_cnot(std::size_t control, std::size_t target) {
        check_index(control);
        check_index(target);
        if (control == target) {
            throw std::invalid_argument("CNOT control and target must differ");
        }
        if (x(control)) flip_x(target);
        if (z(target)) flip_z(control);
    }

    PauliFrame &operator^=(const PauliFrame &other) {
        if (other.num_qubits_ != num_qubits_) {
            throw std::invalid_argument("frame size mismatch");
        }
        for (std::size_t w = 0; w < xs_.size(); ++w) {
            xs_[w] ^= other.xs_[w];
            zs_[w] ^= other.zs_[w];
        }
        return *this;
    }
    friend PauliFrame operator^(PauliFrame a, const PauliFrame &b) { return a ^= b; }

    bool operator==(const PauliFrame &) const = default;

    std::string str() const {
        std::string out(num_qubits_, 'I');
        for (std::size_t q = 0; q < num_qubits_; ++q) out[q] = to_char(label(q));
        return out;
    }

    void check_index(std::size_t q) const {
        if (q >= num_qubits_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                    std::to_string(num_qubits_) + "-qubit frame");
        }
    }

   private:
    static std::size_t num_words(std::size_t n) { return (n + 63) / 64; }

    std::size_t num_qubits_ = 0;
    std::vector<std::uint64_t> xs_;
    std::vector<std::uint64_t> zs_;
};

/// CNOT propagation: X copied control -> target, Z copied target -> control.
inline PauliFrame propagate_cnot(PauliFrame frame, std::size_t control, std::size_t target) {
    frame.apply_cnot(control, target);
    return frame;
}

/// CNOT between qubits living in two different frames.
inline void propagate_cnot_between(PauliFrame &control_frame, std::size_t control,
                                   PauliFrame &target_frame, std::size_t target) {
    if (&control_frame == &target_frame) {
        control_frame.apply_cnot(control, target);
        return;
    }
    control_frame.check_index(control);
    target_frame.check_index(target);
    if (control_frame.x(control)) target_frame.flip_x(target);
    if (target_frame.z(target)) control_frame.flip_z(control);
}

enum class FaultDistribution { UniformNontrivial15, Uniform16, Table };

struct ErrorModel {
    double p = 0.0;
    FaultDistribution distribution = FaultDistribution::UniformNontrivial15;
    /// Indexed by TwoQubitPauli::table_index(); only read for FaultDistribution::Table.
    std::array<double, 16> table{};
    std::uint64_t seed = 0;

    void validate() const {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("fault probability p must lie in [0, 1]");
        }
        if (distribution == FaultDistribution::Table) {
            double total = 0;
            for (double v : table) {
                if (!(v >= 0.0)) throw std::invalid_argument("fault table entries must be nonnegative");
                total += v;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw std::invalid_argument("fault table must sum to 1");
            }
        }
    }
};

/// Uniform double in [0, 1) from the top 53 bits.
template <typename Rng>
double uniform_unit(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased-enough integer in [0, n) by 32x32 multiply-shift.
template <typename Rng>
std::uint32_t uniform_below(Rng &rng, std::uint32_t n) {
    auto r = static_cast<std::uint64_t>(rng() >> 32);
    return static_cast<std::uint32_t>((r * n) >> 32);
}

template <typename Rng>
std::optional<TwoQubitPauli> sample_cnot_fault(const ErrorModel &model, Rng &rng) {
    if (model.p <= 0.0 || uniform_unit(rng) >= model.p) {
        return std::nullopt;
    }
    switch (model.distribution) {
        case FaultDistribution::UniformNontrivial15:
            return TwoQubitPauli::from_table_index(1 + uniform_below(rng, 15));
        case FaultDistribution::Uniform16:
            return TwoQubitPauli::from_table_index(uniform_below(rng, 16));
        case FaultDistribution::Table: {
            double u = uniform_unit(rng);
            double acc = 0;
            for (std::size_t k = 0; k < 16; ++k) {
                acc += model.table[k];
                if (u < acc) return TwoQubitPauli::from_table_index(k);
            }
            for (std::size_t k = 16; k-- > 0;) {
                if (model.table[k] > 0) return TwoQubitPauli::from_table_index(k);
            }
            return TwoQubitPauli{};
        }
    }
    return std::nullopt;
}

/// splitmix64 finalizer; used to derive independent per-trial seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632BE59BD9B4E019ull));
}

}  // namespace ftlab
