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
 * Quantum Fisher information of continuously measured feedback systems.
 *
 * The measurement record together with the system is a pure state whose
 * overlap between two parameter values theta, phi equals |Tr rho(tau)|, where
 * rho evolves under a two-sided generator with theta-operators on the left
 * and phi-operators on the right. The Fisher information follows from
 *
 *     I = 8 (1 - |Tr rho(tau; -h/2, +h/2)|) / h^2,
 *
 * evaluated at h = dtheta and h = dtheta / 2 to confirm the quadratic regime.
 * The quantum dynamical activity is this information for the time-rescaling
 * parametrization H -> (1 + theta) H, L -> sqrt(1 + theta) L.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <string>

#include "qtur/error.hpp"
#include "qtur/master_equation.hpp"
#include "qtur/operator_algebra.hpp"

namespace qtur {

enum class ScalingKind {
    jump,     ///< H(1+t), L sqrt(1+t), F fixed
    homodyne, ///< H(1+t), Y sqrt(1+t), F sqrt(1+t)
};

struct Parametrization {
    ScalingKind kind = ScalingKind::jump;

    [[nodiscard]] static constexpr Parametrization jump_scaling() {
        return {ScalingKind::jump};
    }
    [[nodiscard]] static constexpr Parametrization homodyne_scaling() {
        return {ScalingKind::homodyne};
    }

    [[nodiscard]] JumpModelSpec apply(const JumpModelSpec &model, double theta) const {
        check(theta);
        const double root = std::sqrt(1.0 + theta);
        JumpModelSpec out = model;
        out.H = (1.0 + theta) * model.H;
        for (auto &ch : out.jumps) {
            ch.L *= root;
        }
        if (kind == ScalingKind::homodyne) {
            out.F *= root;
        }
        return out;
    }

    [[nodiscard]] HomodyneModelSpec apply(const HomodyneModelSpec &model,
                                          double theta) const {
        check(theta);
        const double root = std::sqrt(1.0 + theta);
        HomodyneModelSpec out = model;
        out.H = (1.0 + theta) * model.H;
        out.Y = root * model.Y;
        if (kind == ScalingKind::homodyne) {
            out.F = root * model.F;
        }
        return out;
    }

  private:
    static void check(double theta) {
        if (!(theta > -1.0) || !std::isfinite(theta)) {
            throw ModelError("parametrization: theta must exceed -1, got " +
                             std::to_string(theta));
        }
    }
};

/// rho(t; theta, phi); a density operator only when theta == phi.
struct TwoSidedState {
    Operator matrix;
    double theta = 0.0;
    double phi = 0.0;
};

struct ActivityResult {
    double B = 0.0;        ///< Fisher information at dtheta (clamped at 0)
    double B_half = 0.0;   ///< same at dtheta / 2
    double tau = 0.0;
    double dtheta_used = 0.0;
    double convergence_ratio = 1.0; ///< B / B_half
    bool converged = true;          ///< |convergence_ratio - 1| <= 1e-3
};

struct AsymptoticActivityResult {
    double rate = 0.0;   ///< a_term + bc_term
    double a_term = 0.0; ///< sum_z Tr[L_z rho_ss L_z^dag]
    double bc_term = 0.0;
    Complex Z1;
    Complex Z2;
    Operator steady_state;
};

inline constexpr double kDefaultDtheta = 1e-3;
inline constexpr double kConvergenceTolerance = 1e-3;

[[nodiscard]] inline SuperOperator two_sided_jump_generator(const JumpModelSpec &model,
                                                            Parametrization param,
                                                            double theta, double phi) {
    validate(model);
    return detail::assemble_jump(param.apply(model, theta), param.apply(model, phi));
}

[[nodiscard]] inline SuperOperator
two_sided_homodyne_generator(const HomodyneModelSpec &model, Parametrization param,
                             double theta, double phi) {
    validate(model);
    return detail::assemble_homodyne(param.apply(model, theta),
                                     param.apply(model, phi));
}

namespace detail {

inline void check_pure_initial(const Operator &psi0) {
    check_density(psi0, "initial state");
    if (!is_pure(psi0)) {
        throw ModelError("initial state must be pure (rank one) for the overlap");
    }
}

/// Tr X from vec(X) without unvectorizing.
[[nodiscard]] inline Complex vec_trace(const VecState &v, Eigen::Index dim) {
    Complex tr{0.0, 0.0};
    for (Eigen::Index i = 0; i < dim; ++i) {
        tr += v(i * dim + i);
    }
    return tr;
}

} // namespace detail

[[nodiscard]] inline TwoSidedState evolve_two_sided(const SuperOperator &gen,
                                                    const Operator &psi0, double tau,
                                                    double theta, double phi) {
    detail::check_pure_initial(psi0);
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ModelError("two-sided evolution: tau must be nonnegative");
    }
    if (gen.rows() != psi0.size()) {
        throw DimensionError("two-sided evolution: generator does not act on this state");
    }
    return {unvectorize(superop_exp(gen, tau) * vectorize(psi0)), theta, phi};
}

/// |Tr exp(gen tau) psi0| for a pure initial state psi0.
[[nodiscard]] inline double overlap(const SuperOperator &gen, const Operator &psi0,
                                    double tau) {
    detail::check_pure_initial(psi0);
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ModelError("overlap: tau must be nonnegative");
    }
    if (gen.rows() != psi0.size()) {
        throw DimensionError("overlap: generator does not act on this state");
    }
    const VecState v = superop_exp(gen, tau) * vectorize(psi0);
    return std::abs(detail::vec_trace(v, psi0.rows()));
}

/**
 * Finite-difference Fisher information from a generator factory
 * make_generator(theta, phi). Uses the symmetric pair (-h/2, +h/2), whose
 * fidelity is even in h, at h = dtheta and h = dtheta / 2.
 */
template <class GeneratorFactory>
[[nodiscard]] ActivityResult qfi_from(GeneratorFactory &&make_generator,
                                      const Operator &psi0, double tau,
                                      double dtheta = kDefaultDtheta) {
    if (!(dtheta > 0.0) || !(dtheta < 2.0)) {
        throw ModelError("qfi: dtheta must lie in (0, 2), got " + std::to_string(dtheta));
    }
    detail::check_pure_initial(psi0);
    auto estimate = [&](double h) {
        const double fidelity = overlap(make_generator(-0.5 * h, 0.5 * h), psi0, tau);
        return std::max(0.0, 8.0 * (1.0 - fidelity) / (h * h));
    };
    ActivityResult r;
    r.tau = tau;
    r.dtheta_used = dtheta;
    r.B = estimate(dtheta);
    r.B_half = estimate(0.5 * dtheta);
    // Both estimates at round-off level: the state does not depend on theta.
    constexpr double kFloor = 1e-9;
    if (r.B <= kFloor && r.B_half <= kFloor) {
        r.convergence_ratio = 1.0;
    } else if (r.B_half == 0.0) {
        r.convergence_ratio = std::numeric_limits<double>::infinity();
    } else {
        r.convergence_ratio = r.B / r.B_half;
    }
    r.converged = std::abs(r.convergence_ratio - 1.0) <= kConvergenceTolerance;
    return r;
}

[[nodiscard]] inline ActivityResult qfi(const JumpModelSpec &model, Parametrization param,
                                        const Operator &psi0, double tau,
                                        double dtheta = kDefaultDtheta) {
    validate(model);
    return qfi_from(
        [&](double theta, double phi) {
            return two_sided_jump_generator(model, param, theta, phi);
        },
        psi0, tau, dtheta);
}

[[nodiscard]] inline ActivityResult qfi(const HomodyneModelSpec &model,
                                        Parametrization param, const Operator &psi0,
                                        double tau, double dtheta = kDefaultDtheta) {
    validate(model);
    return qfi_from(
        [&](double theta, double phi) {
            return two_sided_homodyne_generator(model, param, theta, phi);
        },
        psi0, tau, dtheta);
}

/// Quantum dynamical activity under jump feedback.
[[nodiscard]] inline ActivityResult activity_jump(const JumpModelSpec &model,
                                                  const Operator &psi0, double tau,
                                                  double dtheta = kDefaultDtheta) {
    return qfi(model, Parametrization::jump_scaling(), psi0, tau, dtheta);
}

/// Quantum dynamical activity under homodyne feedback.
[[nodiscard]] inline ActivityResult activity_homodyne(const HomodyneModelSpec &model,
                                                      const Operator &psi0, double tau,
                                                      double dtheta = kDefaultDtheta) {
    return qfi(model, Parametrization::homodyne_scaling(), psi0, tau, dtheta);
}

/**
 * Long-time growth rate of the jump activity, B(tau) ~ tau (a + b_c).
 *
 *   K1 rho = -i H rho + 1/2 sum_z (exp(nu_z F) L_z rho L_z^dag - L_z^dag L_z rho)
 *   K2 rho = +i rho H + 1/2 sum_z (exp(nu_z F) L_z rho L_z^dag - rho L_z^dag L_z)
 *   Z1 = -<<1| K1 Q L^+ Q K2 |rho_ss>>,  Z2 = -<<1| K2 Q L^+ Q K1 |rho_ss>>
 *
 * with Q = 1 - |rho_ss>><<1| and L^+ the pseudoinverse of the feedback
 * Liouvillian. b_c = 4 (Z1 + Z2) and a is the stationary jump rate.
 */
[[nodiscard]] inline AsymptoticActivityResult asymptotic_activity(const JumpModelSpec &model) {
    validate(model);
    const Eigen::Index d = model.dim();
    const SuperOperator liouvillian = feedback_generator(model);
    const Operator rho_ss = steady_state(liouvillian);
    const VecState ket_ss = vectorize(rho_ss);
    const VecState ket_one = vectorize(identity(d));

    SuperOperator k1 = -kI * left_multiplication(model.H);
    SuperOperator k2 = kI * right_multiplication(model.H);
    const SuperOperator feedback = commutator_generator(model.F);
    double a_term = 0.0;
    for (const auto &ch : model.jumps) {
        SuperOperator recycle = kron_sandwich(ch.L, ch.L.adjoint());
        if (ch.nu != 0.0) {
            recycle = superop_exp(feedback, ch.nu) * recycle;
        }
        const Operator ldl = ch.L.adjoint() * ch.L;
        k1 += 0.5 * (recycle - left_multiplication(ldl));
        k2 += 0.5 * (recycle - right_multiplication(ldl));
        a_term += (ch.L * rho_ss * ch.L.adjoint()).trace().real();
    }

    const SuperOperator q = SuperOperator::Identity(d * d, d * d) - ket_ss * ket_one.adjoint();
    const SuperOperator reduced = q * pseudoinverse(liouvillian) * q;

    AsymptoticActivityResult r;
    r.Z1 = -(ket_one.adjoint() * k1 * reduced * k2 * ket_ss).value();
    r.Z2 = -(ket_one.adjoint() * k2 * reduced * k1 * ket_ss).value();
    r.a_term = a_term;
    r.bc_term = 4.0 * (r.Z1 + r.Z2).real();
    r.rate = r.a_term + r.bc_term;
    r.steady_state = rho_ss;
    return r;
}

} // namespace qtur
