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

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "ftlab/distill.hpp"

namespace ftlab::distill {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Density matrix on one or five qubits.
class DensityMatrix {
   public:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 32)) {
            throw std::invalid_argument("density matrix must be 2x2 or 32x32");
        }
    }

    static DensityMatrix from_bloch(const BlochVector &v);

    const Matrix &matrix() const { return m_; }
    std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }

    /// Empty when valid, otherwise a description of the violated invariant.
    std::optional<std::string> invalid_reason() const {
        if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return "not Hermitian";
        if (std::abs(m_.trace() - Complex(1.0)) > 1e-12) return "trace differs from 1";
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
        if (es.eigenvalues().minCoeff() < -1e-10) return "not positive semidefinite";
        return std::nullopt;
    }
    bool is_valid() const { return !invalid_reason(); }

    BlochVector bloch() const;

   private:
    Matrix m_;
};

namespace pauli_matrices {

inline Matrix identity() { return Matrix::Identity(2, 2); }
inline Matrix x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Matrix y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}
inline Matrix z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline Matrix of(char c) {
    switch (c) {
        case 'I':
            return identity();
        case 'X':
            return x();
        case 'Y':
            return y();
        case 'Z':
            return z();
        default:
            throw std::invalid_argument(std::string("not a Pauli: ") + c);
    }
}

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Tensor product of single-qubit Paulis, first character is the most
/// significant qubit.
inline Matrix string(const std::string &s) {
    Matrix out = Matrix::Identity(1, 1);
    for (char c : s) out = kron(out, of(c));
    return out;
}

}  // namespace pauli_matrices

inline DensityMatrix DensityMatrix::from_bloch(const BlochVector &v) {
    using namespace pauli_matrices;
    Matrix m = 0.5 * (identity() + v.x * x() + v.y * y() + v.z * z());
    return DensityMatrix(std::move(m));
}

inline BlochVector DensityMatrix::bloch() const {
    using namespace pauli_matrices;
    if (dimension() != 2) throw std::logic_error("Bloch coordinates need a single-qubit state");
    return {(x() * m_).trace().real(), (y() * m_).trace().real(), (z() * m_).trace().real()};
}

/// Cyclic shifts of XZZXI.
inline constexpr std::array<const char *, 4> kFiveQubitStabilizers = {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"};

/// Projector onto the joint +1 eigenspace of the four stabilizers.
inline Matrix code_projector() {
    Matrix proj = Matrix::Identity(32, 32);
    for (const char *g : kFiveQubitStabilizers) {
        proj = proj * (0.5 * (Matrix::Identity(32, 32) + pauli_matrices::string(g)));
    }
    return proj;
}

struct OracleOutcome {
    std::optional<DensityMatrix> output;  ///< empty when always rejected
    double p_accept = 0;
};

/// Exact postselected decoding of five single-qubit inputs.
///
/// The logical qubit is read through the transversal logical operators
/// XXXXX, YYYYY and ZZZZZ, i.e. a decoding Clifford that maps them to X, Y
/// and Z on the output qubit and the stabilizers to Z on the other four.
inline OracleOutcome oracle_distill(const std::array<DensityMatrix, kInputs> &inputs) {
    Matrix rho = Matrix::Identity(1, 1);
    for (const auto &in : inputs) {
        if (in.dimension() != 2) throw std::invalid_argument("oracle inputs must be single-qubit states");
        if (auto why = in.invalid_reason()) throw std::invalid_argument("invalid oracle input: " + *why);
        rho = pauli_matrices::kron(rho, in.matrix());
    }
    static const Matrix proj = code_projector();
    Matrix projected = proj * rho * proj;
    OracleOutcome out;
    out.p_accept = projected.trace().real();
    if (out.p_accept < 1e-15) return out;
    BlochVector v{(pauli_matrices::string("XXXXX") * projected).trace().real() / out.p_accept,
                  (pauli_matrices::string("YYYYY") * projected).trace().real() / out.p_accept,
                  (pauli_matrices::string("ZZZZZ") * projected).trace().real() / out.p_accept};
    out.output = DensityMatrix::from_bloch(v);
    return out;
}

/// Oracle on T-axis-symmetric inputs, reported like distill_step.
inline DistillOutcome oracle_distill(const FidelityVector &fs) {
    std::array<DensityMatrix, kInputs> inputs = {
        DensityMatrix::from_bloch(BlochVector::on_t_axis(fs[0])), DensityMatrix::from_bloch(BlochVector::on_t_axis(fs[1])),
        DensityMatrix::from_bloch(BlochVector::on_t_axis(fs[2])), DensityMatrix::from_bloch(BlochVector::on_t_axis(fs[3])),
        DensityMatrix::from_bloch(BlochVector::on_t_axis(fs[4]))};
    auto o = oracle_distill(inputs);
    DistillOutcome d;
    d.p_accept = o.p_accept;
    if (!o.output) return d;
    d.f_out = -o.output->bloch().t_projection();
    d.orientation_flipped = true;
    return d;
}

/// The T-axis rotation (e^{2 pi i/3} - 1)|T><T| + I.
inline Matrix t_rotation() {
    DensityMatrix t = DensityMatrix::from_bloch(BlochVector::on_t_axis(1.0));
    const double pi = std::acos(-1.0);
    Complex w = std::exp(Complex(0, 2 * pi / 3));
    return (w - 1.0) * t.matrix() + Matrix::Identity(2, 2);
}

/// Twirl by conjugation with I, T and T^2; reference route for twirl_to_t_axis.
inline BlochVector twirl_by_conjugation(const BlochVector &v) {
    Matrix rho = DensityMatrix::from_bloch(v).matrix();
    Matrix t = t_rotation();
    Matrix t2 = t * t;
    Matrix avg = (rho + t * rho * t.adjoint() + t2 * rho * t2.adjoint()) / 3.0;
    return DensityMatrix(avg).bloch();
}

}  // namespace ftlab::distill
