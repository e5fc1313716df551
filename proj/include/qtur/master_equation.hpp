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
 * Ensemble-averaged generators: Lindblad, jump feedback and Wiseman-Milburn.
 *
 * Every generator is assembled from a (left, right) pair of models. The
 * ensemble generators pass the same model on both sides; the two-sided
 * generators in fisher.hpp pass differently parametrized copies. Sharing the
 * assembly path makes the theta = phi = 0 reduction exact.
 */

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qtur/error.hpp"
#include "qtur/operator_algebra.hpp"

namespace qtur {

struct JumpChannel {
    Operator L;
    /// Counting weight of the channel; also the strength of the feedback kick.
    double nu = 0.0;
};

/// (H, {L_z, nu_z}, F) for jump detection with post-jump feedback exp(-i nu_z F).
struct JumpModelSpec {
    Operator H;
    std::vector<JumpChannel> jumps;
    Operator F;

    [[nodiscard]] Eigen::Index dim() const { return H.rows(); }
};

/// (H, Y, F, lambda) for homodyne detection of Y with output fed back through F.
struct HomodyneModelSpec {
    Operator H;
    Operator Y;
    Operator F;
    double lambda = 1.0;

    [[nodiscard]] Eigen::Index dim() const { return H.rows(); }
};

inline void validate(const JumpModelSpec &m) {
    require_square(m.H, "model H");
    if (m.dim() < 1) {
        throw ModelError("model: empty Hamiltonian");
    }
    require_same_dim(m.H, m.F, "model F");
    if (!is_hermitian(m.H)) {
        throw ModelError("model: H is not Hermitian");
    }
    if (!is_hermitian(m.F)) {
        throw ModelError("model: F is not Hermitian");
    }
    for (std::size_t z = 0; z < m.jumps.size(); ++z) {
        require_same_dim(m.H, m.jumps[z].L, "model jump operator");
        if (!m.jumps[z].L.allFinite() || !std::isfinite(m.jumps[z].nu)) {
            throw ModelError("model: jump channel " + std::to_string(z + 1) +
                             " is not finite");
        }
    }
}

inline void validate(const HomodyneModelSpec &m) {
    require_square(m.H, "model H");
    if (m.dim() < 1) {
        throw ModelError("model: empty Hamiltonian");
    }
    require_same_dim(m.H, m.Y, "model Y");
    require_same_dim(m.H, m.F, "model F");
    if (!is_hermitian(m.H) || !is_hermitian(m.Y) || !is_hermitian(m.F)) {
        throw ModelError("model: H, Y and F must be Hermitian");
    }
    if (!(m.lambda > 0.0) || !std::isfinite(m.lambda)) {
        throw ModelError("model: measurement strength lambda must be positive, got " +
                         std::to_string(m.lambda));
    }
}

/// Same model with every feedback weight set to zero.
[[nodiscard]] inline JumpModelSpec without_feedback(JumpModelSpec m) {
    for (auto &ch : m.jumps) {
        ch.nu = 0.0;
    }
    return m;
}

namespace detail {

/**
 * d rho/dt = -i(H_l rho - rho H_r)
 *          + sum_z [ exp(nu_z F_lr) (L_l rho L_r^dag)
 *                    - 1/2 L_l^dag L_l rho - 1/2 rho L_r^dag L_r ]
 * with F_lr X = -i (F_l X - X F_r). The two models must agree on dimension,
 * channel count and weights.
 */
[[nodiscard]] inline SuperOperator assemble_jump(const JumpModelSpec &left,
                                                 const JumpModelSpec &right) {
    SuperOperator gen = two_sided_commutator(left.H, right.H);
    const SuperOperator feedback = two_sided_commutator(left.F, right.F);
    for (std::size_t z = 0; z < left.jumps.size(); ++z) {
        const Operator &ll = left.jumps[z].L;
        const Operator &lr = right.jumps[z].L;
        SuperOperator recycle = kron_sandwich(ll, lr.adjoint());
        if (left.jumps[z].nu != 0.0) {
            recycle = superop_exp(feedback, left.jumps[z].nu) * recycle;
        }
        gen += recycle;
        gen -= 0.5 * left_multiplication(ll.adjoint() * ll);
        gen -= 0.5 * right_multiplication(lr.adjoint() * lr);
    }
    return gen;
}

/**
 * d rho/dt = 1/(8 lambda) F_lr^2 rho + 1/2 F_lr (rho Y_r + Y_l rho)
 *          - i(H_l rho - rho H_r) - lambda/2 (rho Y_r^2 + Y_l^2 rho)
 *          + lambda Y_l rho Y_r
 */
[[nodiscard]] inline SuperOperator assemble_homodyne(const HomodyneModelSpec &left,
                                                     const HomodyneModelSpec &right) {
    const double lambda = left.lambda;
    const SuperOperator feedback = two_sided_commutator(left.F, right.F);
    const SuperOperator outputs =
        right_multiplication(right.Y) + left_multiplication(left.Y);
    SuperOperator gen = (1.0 / (8.0 * lambda)) * (feedback * feedback);
    gen += 0.5 * (feedback * outputs);
    gen += two_sided_commutator(left.H, right.H);
    gen -= (0.5 * lambda) * right_multiplication(right.Y * right.Y);
    gen -= (0.5 * lambda) * left_multiplication(left.Y * left.Y);
    gen += lambda * kron_sandwich(left.Y, right.Y);
    return gen;
}

} // namespace detail

/// Plain Lindblad generator; feedback weights are ignored.
[[nodiscard]] inline SuperOperator lindblad_generator(const JumpModelSpec &model) {
    validate(model);
    const JumpModelSpec plain = without_feedback(model);
    return detail::assemble_jump(plain, plain);
}

/// Lindblad generator with the kick exp(nu_z F) applied to each recycling term.
[[nodiscard]] inline SuperOperator feedback_generator(const JumpModelSpec &model) {
    validate(model);
    return detail::assemble_jump(model, model);
}

/// H rho + lambda D[Y] rho + 1/2 F{Y, rho} + 1/(8 lambda) F^2 rho
[[nodiscard]] inline SuperOperator
wiseman_milburn_generator(const HomodyneModelSpec &model) {
    validate(model);
    return detail::assemble_homodyne(model, model);
}

/// unvec(exp(gen tau) vec(rho0)) for a time-independent generator.
[[nodiscard]] inline Operator propagate(const SuperOperator &gen, const Operator &rho0,
                                        double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ModelError("propagate: tau must be a finite nonnegative time");
    }
    check_density(rho0, "propagate: initial state");
    if (gen.rows() != rho0.size()) {
        throw DimensionError("propagate: generator does not act on this state");
    }
    return unvectorize(superop_exp(gen, tau) * vectorize(rho0));
}

} // namespace qtur
