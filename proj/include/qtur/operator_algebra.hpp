// Copyright 2026 The qtur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense operator and superoperator kernel.
 *
 * Operators are d x d complex matrices. Superoperators are d^2 x d^2 complex
 * matrices acting on column-stacked operators: entry A(i, j) of an operator
 * lands at position j * d + i of its vectorization, so that
 * vec(A B C) = (C^T (x) A) vec(B).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qtur/error.hpp"

namespace qtur {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using SuperOperator = Eigen::MatrixXcd;
using VecState = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace tolerance {
inline constexpr double hermitian = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double positivity = -1e-8;
inline constexpr double zero_eigenvalue = 1e-8;
inline constexpr double pinv_relative_cutoff = 1e-12;
inline constexpr double steady_residual = 1e-10;
inline constexpr double purity = 1e-9;
} // namespace tolerance

[[nodiscard]] inline Operator identity(Eigen::Index dim) {
    return Operator::Identity(dim, dim);
}

[[nodiscard]] inline bool is_hermitian(const Operator &a,
                                       double tol = tolerance::hermitian) {
    if (a.rows() != a.cols()) {
        return false;
    }
    return a.size() == 0 || (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

[[nodiscard]] inline bool all_finite(const Eigen::MatrixXcd &a) {
    return a.allFinite();
}

inline void require_square(const Operator &a, const char *what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + " must be square, got " +
                             std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()));
    }
}

inline void require_same_dim(const Operator &a, const Operator &b,
                             const char *what) {
    require_square(a, what);
    require_square(b, what);
    if (a.rows() != b.rows()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.rows()) + " vs " +
                             std::to_string(b.rows()) + ")");
    }
}

/// Column stacking: A(i, j) -> v[j * d + i].
[[nodiscard]] inline VecState vectorize(const Operator &a) {
    require_square(a, "vectorize: operator");
    return Eigen::Map<const VecState>(a.data(), a.size());
}

[[nodiscard]] inline Operator unvectorize(const VecState &v) {
    const auto n = v.size();
    const auto d = static_cast<Eigen::Index>(
        std::llround(std::sqrt(static_cast<double>(n))));
    if (d * d != n || d == 0) {
        throw DimensionError("unvectorize: length " + std::to_string(n) +
                             " is not a positive perfect square");
    }
    return Eigen::Map<const Operator>(v.data(), d, d);
}

[[nodiscard]] inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd &a,
                                           const Eigen::MatrixXcd &b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Superoperator S with S vec(B) = vec(A B C), i.e. C^T (x) A.
[[nodiscard]] inline SuperOperator kron_sandwich(const Operator &a,
                                                 const Operator &c) {
    require_same_dim(a, c, "kron_sandwich");
    return kron(c.transpose(), a);
}

/// X -> A X
[[nodiscard]] inline SuperOperator left_multiplication(const Operator &a) {
    require_square(a, "left_multiplication");
    return kron_sandwich(a, identity(a.rows()));
}

/// X -> X C
[[nodiscard]] inline SuperOperator right_multiplication(const Operator &c) {
    require_square(c, "right_multiplication");
    return kron_sandwich(identity(c.rows()), c);
}

/// X -> -i (A X - X B). With A == B this is the commutator generator of A.
[[nodiscard]] inline SuperOperator two_sided_commutator(const Operator &left,
                                                        const Operator &right) {
    require_same_dim(left, right, "two_sided_commutator");
    return -kI * (left_multiplication(left) - right_multiplication(right));
}

/// rho -> -i [H, rho]
[[nodiscard]] inline SuperOperator commutator_generator(const Operator &h) {
    require_square(h, "commutator_generator: H");
    if (!is_hermitian(h)) {
        throw ModelError("commutator_generator: H is not Hermitian");
    }
    return two_sided_commutator(h, h);
}

/// rho -> L rho L^dag - 1/2 {L^dag L, rho}
[[nodiscard]] inline SuperOperator dissipator(const Operator &l) {
    require_square(l, "dissipator: L");
    const Operator ldl = l.adjoint() * l;
    return kron_sandwich(l, l.adjoint()) - 0.5 * left_multiplication(ldl) -
           0.5 * right_multiplication(ldl);
}

/// exp(S t) by Pade scaling and squaring.
[[nodiscard]] inline SuperOperator superop_exp(const SuperOperator &s, double t) {
    if (s.rows() != s.cols()) {
        throw DimensionError("superop_exp: generator must be square");
    }
    if (!s.allFinite() || !std::isfinite(t)) {
        throw NumericalError("superop_exp: non-finite generator or time");
    }
    if (t == 0.0) {
        return SuperOperator::Identity(s.rows(), s.cols());
    }
    const SuperOperator scaled = s * t;
    SuperOperator out = scaled.exp();
    if (!out.allFinite()) {
        throw NumericalError("superop_exp: exponential overflowed");
    }
    return out;
}

/// Moore-Penrose pseudoinverse; singular values below 1e-12 * sigma_max are zeroed.
[[nodiscard]] inline SuperOperator pseudoinverse(const SuperOperator &s) {
    if (!s.allFinite()) {
        throw NumericalError("pseudoinverse: non-finite entries");
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s, Eigen::ComputeFullU |
                                                  Eigen::ComputeFullV);
    const Eigen::VectorXd &sigma = svd.singularValues();
    SuperOperator out = SuperOperator::Zero(s.cols(), s.rows());
    if (sigma.size() == 0 || sigma(0) == 0.0) {
        return out;
    }
    const double cutoff = tolerance::pinv_relative_cutoff * sigma(0);
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma(k) > cutoff) {
            out += (svd.matrixV().col(k) / sigma(k)) * svd.matrixU().col(k).adjoint();
        }
    }
    return out;
}

/// Sum of singular values of a - b, halved.
[[nodiscard]] inline double trace_distance(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "trace_distance");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a - b);
    return 0.5 * svd.singularValues().sum();
}

/// Hilbert-Schmidt pairing <<A|B>> = Tr[A^dag B].
[[nodiscard]] inline Complex hs_inner(const Operator &a, const Operator &b) {
    require_same_dim(a, b, "hs_inner");
    return (a.adjoint() * b).trace();
}

[[nodiscard]] inline Eigen::VectorXd hermitian_eigenvalues(const Operator &a) {
    const Operator sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Throws ModelError unless rho is Hermitian, unit trace and positive.
inline void check_density(const Operator &rho, const char *what = "state",
                          double tol = tolerance::hermitian) {
    require_square(rho, what);
    if (rho.rows() < 1 || !rho.allFinite()) {
        throw ModelError(std::string(what) + ": empty or non-finite");
    }
    if (!is_hermitian(rho, tol)) {
        throw ModelError(std::string(what) + ": not Hermitian");
    }
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tolerance::trace) {
        throw ModelError(std::string(what) + ": trace " + std::to_string(tr.real()) +
                         " differs from 1");
    }
    if (hermitian_eigenvalues(rho).minCoeff() < tolerance::positivity) {
        throw ModelError(std::string(what) + ": negative eigenvalue");
    }
}

/// True if rho is a rank-one projector up to the purity tolerance.
[[nodiscard]] inline bool is_pure(const Operator &rho) {
    return std::abs(hermitian_eigenvalues(rho).maxCoeff() - 1.0) <= tolerance::purity;
}

/// Normalized eigenvector of the largest eigenvalue of a Hermitian operator.
[[nodiscard]] inline Eigen::VectorXcd dominant_vector(const Operator &rho) {
    const Operator sym = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Operator> es(sym);
    return es.eigenvectors().col(sym.rows() - 1).normalized();
}

[[nodiscard]] inline Operator projector(const Eigen::VectorXcd &psi) {
    const Eigen::VectorXcd unit = psi.normalized();
    return unit * unit.adjoint();
}

/**
 * Stationary state of a trace-preserving generator.
 *
 * The zero eigenvalue must be simple: the second-smallest eigenvalue modulus
 * has to exceed 1e-8, otherwise DegenerateSteadyState reports how many
 * eigenvalues sit below that threshold. The null vector is taken from the
 * SVD, then Hermitian-symmetrized and normalized to unit trace.
 */
[[nodiscard]] inline Operator steady_state(const SuperOperator &s) {
    if (s.rows() != s.cols() || s.rows() == 0) {
        throw DimensionError("steady_state: generator must be square and non-empty");
    }
    if (!s.allFinite()) {
        throw NumericalError("steady_state: non-finite generator");
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(s, false);
    std::vector<double> moduli;
    moduli.reserve(static_cast<std::size_t>(s.rows()));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        moduli.push_back(std::abs(es.eigenvalues()(k)));
    }
    std::sort(moduli.begin(), moduli.end());
    const auto multiplicity = static_cast<std::size_t>(
        std::count_if(moduli.begin(), moduli.end(),
                      [](double m) { return m <= tolerance::zero_eigenvalue; }));
    if (moduli.size() > 1 && moduli[1] <= tolerance::zero_eigenvalue) {
        throw DegenerateSteadyState(multiplicity);
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(s, Eigen::ComputeFullV);
    const VecState null = svd.matrixV().col(s.cols() - 1);
    Operator rho = unvectorize(null);
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-14) {
        throw NumericalError("steady_state: null vector has vanishing trace");
    }
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();

    const double residual = (s * vectorize(rho)).norm();
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if (residual > tolerance::steady_residual * scale) {
        throw NumericalError("steady_state: residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    if (hermitian_eigenvalues(rho).minCoeff() < tolerance::positivity) {
        throw NumericalError("steady_state: stationary state is not positive");
    }
    return rho;
}

} // namespace qtur
