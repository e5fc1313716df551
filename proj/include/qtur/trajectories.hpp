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
 * Stochastic unravelings with Markovian feedback.
 *
 * Jump detection: each step of length dt picks an outcome z in {0, ..., N_C}
 * with probability Tr[M_z rho M_z^dag], where M_0 = 1 - dt/2 sum_z L_z^dag L_z
 * and M_z = sqrt(dt) L_z, then applies exp(-i nu_z F) (jumps only) and
 * exp(-i H dt).
 *
 * Homodyne detection: each step records z = <Y> + dW / (2 sqrt(lambda) dt),
 * applies the Gaussian Kraus operator exp(-lambda dt (z - Y)^2), the feedback
 * unitary exp(-i z dt F) and finally exp(-i H dt).
 *
 * The kernels are templates over the Hilbert-space dimension so that the
 * two-level case runs on fixed-size matrices. Pure initial states are evolved
 * as state vectors, mixed ones as density matrices; both follow the same
 * update rule and consume the same random numbers.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/StdVector>

#include "qtur/error.hpp"
#include "qtur/master_equation.hpp"
#include "qtur/operator_algebra.hpp"
#include "qtur/parallel.hpp"
#include "qtur/random.hpp"

namespace qtur {

struct JumpTrajectory {
    std::vector<double> jump_times;
    std::vector<std::size_t> channels; ///< 1-based channel index per jump
    std::vector<long> counts;          ///< counts[z - 1] = N_z
    double N = 0.0;                    ///< sum_z nu_z N_z
    Operator final_state;
};

struct HomodyneOutput {
    double t;
    double z;
};

struct HomodyneTrajectory {
    double Z = 0.0;
    std::vector<HomodyneOutput> sampled_outputs; ///< empty unless requested
    Operator final_state;
};

struct EnsembleStats {
    std::size_t n_traj = 0;
    double mean = 0.0;
    double variance = 0.0; ///< unbiased
    double std_error_mean = 0.0;
    double std_error_variance = 0.0;
    /// Covariance of the sample mean and sample variance estimators.
    double cov_mean_variance = 0.0;
    Operator mean_state;
};

/// Which scalar a jump ensemble reports.
enum class CountStatistic {
    weighted, ///< N = sum_z nu_z N_z
    total,    ///< sum_z N_z
};

struct EnsembleOptions {
    unsigned threads = 0; ///< 0: QTUR_THREADS or hardware concurrency
    CountStatistic statistic = CountStatistic::weighted;
};

struct JumpStepResult {
    std::size_t channel; ///< 0 for no jump
    Operator state;
};

struct HomodyneStepResult {
    double z;
    Operator state;
};

/// Sample moments of `samples`; mean_state is passed through.
[[nodiscard]] inline EnsembleStats compute_stats(std::span<const double> samples,
                                                 Operator mean_state) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw ModelError("ensemble statistics need at least two samples");
    }
    const double dn = static_cast<double>(n);
    double sum = 0.0;
    for (double x : samples) {
        sum += x;
    }
    const double mean = sum / dn;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    EnsembleStats s;
    s.n_traj = n;
    s.mean = mean;
    s.variance = m2 / (dn - 1.0);
    m3 /= dn;
    m4 /= dn;
    s.std_error_mean = std::sqrt(s.variance / dn);
    const double var_of_var =
        (m4 - (dn - 3.0) / (dn - 1.0) * s.variance * s.variance) / dn;
    s.std_error_variance = std::sqrt(std::max(0.0, var_of_var));
    s.cov_mean_variance = m3 / dn;
    s.mean_state = std::move(mean_state);
    return s;
}

/// Delta-method standard error of variance / mean^2.
[[nodiscard]] inline double precision_stderr(const EnsembleStats &s) {
    const double m = s.mean;
    const double v = s.variance;
    if (m == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double dv = 1.0 / (m * m);
    const double dm = -2.0 * v / (m * m * m);
    const double var = dv * dv * s.std_error_variance * s.std_error_variance +
                       dm * dm * s.std_error_mean * s.std_error_mean +
                       2.0 * dv * dm * s.cov_mean_variance;
    return std::sqrt(std::max(0.0, var));
}

/// Number of steps for horizon tau: round(tau / dt), at least one.
[[nodiscard]] inline std::size_t step_count(double tau, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ModelError("time step dt must be positive");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ModelError("horizon tau must be positive");
    }
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(tau / dt)));
}

/// dt = 1e-3 / max(1, |H|, max_z |L_z^dag L_z|) using spectral norms.
[[nodiscard]] inline double default_dt(const JumpModelSpec &model) {
    double scale = 1.0;
    scale = std::max(scale, model.H.operatorNorm());
    for (const auto &ch : model.jumps) {
        scale = std::max(scale, (ch.L.adjoint() * ch.L).eval().operatorNorm());
    }
    return 1e-3 / scale;
}

[[nodiscard]] inline double default_dt(const HomodyneModelSpec &model) {
    return 1e-3 / std::max({1.0, model.H.operatorNorm(), model.lambda});
}

namespace detail {

template <int D>
using Mat = Eigen::Matrix<Complex, D, D>;
template <int D>
using Vec = Eigen::Matrix<Complex, D, 1>;
template <int D>
using MatList = std::vector<Mat<D>, Eigen::aligned_allocator<Mat<D>>>;

/// Calls fn with std::integral_constant<int, D> for D in {2, 3, 4}, else Dynamic.
template <class Fn>
decltype(auto) dispatch_dim(Eigen::Index dim, Fn &&fn) {
    switch (dim) {
    case 2:
        return fn(std::integral_constant<int, 2>{});
    case 3:
        return fn(std::integral_constant<int, 3>{});
    case 4:
        return fn(std::integral_constant<int, 4>{});
    default:
        return fn(std::integral_constant<int, Eigen::Dynamic>{});
    }
}

template <int D>
[[nodiscard]] Mat<D> fixed(const Operator &a) {
    return Mat<D>(a);
}

template <class M>
[[nodiscard]] Operator to_operator(const M &a) {
    return Operator(a);
}

/// Tr[E rho] for a density matrix, <psi|E|psi> for a vector.
template <int D, class State>
[[nodiscard]] double expectation(const Mat<D> &e, const State &s) {
    if constexpr (State::ColsAtCompileTime == 1) {
        return (s.adjoint() * e * s).value().real();
    } else {
        return e.transpose().cwiseProduct(s).sum().real();
    }
}

template <int D, class State>
void apply(const Mat<D> &a, State &s) {
    if constexpr (State::ColsAtCompileTime == 1) {
        s = (a * s).eval();
    } else {
        s = (a * s * a.adjoint()).eval();
    }
}

template <class State>
[[nodiscard]] double weight(const State &s) {
    if constexpr (State::ColsAtCompileTime == 1) {
        return s.squaredNorm();
    } else {
        return s.trace().real();
    }
}

template <class State>
void normalize(State &s) {
    if constexpr (State::ColsAtCompileTime == 1) {
        s /= s.norm();
    } else {
        s /= s.trace().real();
    }
}

template <int D, class State>
[[nodiscard]] Mat<D> as_density(const State &s) {
    if constexpr (State::ColsAtCompileTime == 1) {
        return s * s.adjoint();
    } else {
        return s;
    }
}

[[nodiscard]] inline Operator unitary(const Operator &generator_h, double t) {
    const Operator arg = (-kI * t) * generator_h;
    return arg.exp();
}

/// Precomputed Kraus maps of one jump step.
template <int D>
class JumpKernel {
  public:
    JumpKernel(const JumpModelSpec &model, double dt) : dt_(dt) {
        validate(model);
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ModelError("jump step: dt must be positive");
        }
        const Eigen::Index d = model.dim();
        Operator rates = Operator::Zero(d, d);
        double max_rate = 0.0;
        for (const auto &ch : model.jumps) {
            const Operator ldl = ch.L.adjoint() * ch.L;
            rates += ldl;
            max_rate = std::max(max_rate, ldl.operatorNorm());
        }
        if (dt * max_rate > 0.01 * (1.0 + 1e-12)) {
            throw NumericalError("jump step: dt * max_z |L_z^dag L_z| = " +
                                 std::to_string(dt * max_rate) +
                                 " exceeds 0.01; decrease dt");
        }
        const Operator uh = unitary(model.H, dt);
        const Operator m0 = identity(d) - 0.5 * dt * rates;
        no_jump_ = fixed<D>(uh * m0);
        no_jump_effect_ = fixed<D>(m0.adjoint() * m0);
        for (const auto &ch : model.jumps) {
            const Operator mz = std::sqrt(dt) * ch.L;
            Operator kick = uh;
            if (ch.nu != 0.0) {
                kick = uh * unitary(model.F, ch.nu);
            }
            jump_.push_back(fixed<D>(kick * mz));
            jump_effect_.push_back(fixed<D>(mz.adjoint() * mz));
        }
        // sum_z p_z - 1 = dt^2 / 4 <R^2> with R = sum_z L_z^dag L_z
        const double rate_scale = std::max(1.0, rates.operatorNorm());
        tolerance_ = std::max(10.0 * dt * dt * rate_scale * rate_scale, 1e-12);
    }

    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] std::size_t channels() const { return jump_.size(); }

    /// Advances s by one step using uniform variate u; returns the outcome.
    template <class State>
    std::size_t step(State &s, double u) const {
        constexpr std::size_t kInline = 16;
        std::array<double, kInline> inline_probs{};
        std::vector<double> heap_probs;
        double *probs = inline_probs.data();
        if (jump_.size() > kInline) {
            heap_probs.resize(jump_.size());
            probs = heap_probs.data();
        }
        const double p0 = expectation<D>(no_jump_effect_, s);
        double total = p0;
        for (std::size_t z = 0; z < jump_.size(); ++z) {
            probs[z] = expectation<D>(jump_effect_[z], s);
            total += probs[z];
        }
        if (!(std::abs(total - 1.0) <= tolerance_)) {
            throw NumericalError("jump step: outcome probabilities sum to " +
                                 std::to_string(total) + "; dt too coarse");
        }
        const double target = u * total;
        std::size_t outcome = 0;
        double cumulative = p0;
        if (target >= cumulative) {
            outcome = jump_.size();
            for (std::size_t z = 0; z < jump_.size(); ++z) {
                cumulative += probs[z];
                if (target < cumulative) {
                    outcome = z + 1;
                    break;
                }
            }
            // u * total rounding past the last bin: take the last nonzero outcome.
            while (outcome > 0 && probs[outcome - 1] <= 0.0) {
                --outcome;
            }
        }
        apply<D>(outcome == 0 ? no_jump_ : jump_[outcome - 1], s);
        normalize(s);
        return outcome;
    }

  private:
    double dt_;
    double tolerance_ = 0.0;
    Mat<D> no_jump_;
    Mat<D> no_jump_effect_;
    MatList<D> jump_;
    MatList<D> jump_effect_;
};

/// Homodyne step maps, expressed in the eigenbasis of Y.
template <int D>
class HomodyneKernel {
  public:
    HomodyneKernel(const HomodyneModelSpec &model, double dt)
        : dt_(dt), lambda_(model.lambda) {
        validate(model);
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw ModelError("homodyne step: dt must be positive");
        }
        if (model.lambda * dt > 0.01 * (1.0 + 1e-12)) {
            throw NumericalError("homodyne step: lambda * dt = " +
                                 std::to_string(model.lambda * dt) +
                                 " exceeds 0.01; decrease dt");
        }
        Eigen::SelfAdjointEigenSolver<Operator> ey(0.5 * (model.Y + model.Y.adjoint()));
        const Operator basis = ey.eigenvectors();
        basis_ = fixed<D>(basis);
        y_ = ey.eigenvalues();
        const Operator h = basis.adjoint() * model.H * basis;
        const Operator f = basis.adjoint() * model.F * basis;
        hamiltonian_ = fixed<D>(unitary(0.5 * (h + h.adjoint()), dt));
        has_feedback_ = !model.F.isZero(0.0);
        Eigen::SelfAdjointEigenSolver<Operator> ef(0.5 * (f + f.adjoint()));
        feedback_basis_ = fixed<D>(ef.eigenvectors());
        feedback_eigenvalues_ = ef.eigenvalues();
        noise_scale_ = 1.0 / (2.0 * std::sqrt(lambda_) * dt);
    }

    [[nodiscard]] double dt() const { return dt_; }

    template <class State>
    [[nodiscard]] State to_eigenbasis(const State &s) const {
        if constexpr (State::ColsAtCompileTime == 1) {
            return basis_.adjoint() * s;
        } else {
            return basis_.adjoint() * s * basis_;
        }
    }

    [[nodiscard]] Mat<D> to_lab(const Mat<D> &rho) const {
        return basis_ * rho * basis_.adjoint();
    }

    /// Advances s (in the Y eigenbasis) with Wiener increment dw; returns z.
    template <class State>
    double step(State &s, double dw) const {
        const Eigen::Index d = s.rows();
        double mean_y = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            if constexpr (State::ColsAtCompileTime == 1) {
                mean_y += y_(i) * std::norm(s(i));
            } else {
                mean_y += y_(i) * s(i, i).real();
            }
        }
        const double z = mean_y + dw * noise_scale_;

        Eigen::Matrix<double, D, 1> kraus;
        kraus.resize(d);
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < d; ++i) {
            const double gap = z - y_(i);
            kraus(i) = -lambda_ * dt_ * gap * gap;
            top = std::max(top, kraus(i));
        }
        for (Eigen::Index i = 0; i < d; ++i) {
            kraus(i) = std::exp(kraus(i) - top);
        }
        if constexpr (State::ColsAtCompileTime == 1) {
            s = kraus.template cast<Complex>().cwiseProduct(s).eval();
        } else {
            s = (kraus.template cast<Complex>().asDiagonal() * s *
                 kraus.template cast<Complex>().asDiagonal())
                    .eval();
        }
        const double w = weight(s);
        if (!(w >= 1e-12) || !std::isfinite(w)) {
            throw NumericalError("homodyne step: conditioned state collapsed (trace " +
                                 std::to_string(w) + ")");
        }

        if (has_feedback_) {
            Eigen::Matrix<Complex, D, 1> phases;
            phases.resize(d);
            const double angle = z * dt_;
            for (Eigen::Index k = 0; k < d; ++k) {
                phases(k) = std::polar(1.0, -angle * feedback_eigenvalues_(k));
            }
            const Mat<D> kick =
                feedback_basis_ * phases.asDiagonal() * feedback_basis_.adjoint();
            apply<D>(kick, s);
        }
        apply<D>(hamiltonian_, s);
        normalize(s);
        return z;
    }

  private:
    double dt_;
    double lambda_;
    double noise_scale_ = 0.0;
    bool has_feedback_ = false;
    Mat<D> basis_;
    Eigen::VectorXd y_;
    Mat<D> hamiltonian_;
    Mat<D> feedback_basis_;
    Eigen::VectorXd feedback_eigenvalues_;
};

template <int D>
struct JumpRun {
    std::vector<long> counts;
    Mat<D> final_state;
};

/// Runs `steps` jump steps from rho0; on_jump(step_index, channel) sees each jump.
template <int D, class OnJump>
JumpRun<D> run_jump(const JumpKernel<D> &kernel, const Operator &rho0, bool pure,
                    std::size_t steps, Engine &eng, OnJump &&on_jump) {
    JumpRun<D> run;
    run.counts.assign(kernel.channels(), 0);
    auto loop = [&](auto &state) {
        for (std::size_t k = 0; k < steps; ++k) {
            const std::size_t z = kernel.step(state, uniform01(eng));
            if (z != 0) {
                ++run.counts[z - 1];
                on_jump(k, z);
            }
        }
        run.final_state = as_density<D>(state);
    };
    if (pure) {
        Vec<D> psi = dominant_vector(rho0);
        loop(psi);
    } else {
        Mat<D> rho = fixed<D>(rho0);
        loop(rho);
    }
    return run;
}

template <int D>
struct HomodyneRun {
    double Z = 0.0;
    Mat<D> final_state;
};

template <int D, class OnOutput>
HomodyneRun<D> run_homodyne(const HomodyneKernel<D> &kernel, const Operator &rho0,
                            bool pure, std::size_t steps, Engine &eng,
                            OnOutput &&on_output) {
    HomodyneRun<D> run;
    const double dt = kernel.dt();
    std::normal_distribution<double> wiener(0.0, std::sqrt(dt));
    auto loop = [&](auto &state) {
        for (std::size_t k = 0; k < steps; ++k) {
            const double z = kernel.step(state, wiener(eng));
            run.Z += z * dt;
            on_output(k, z);
        }
        run.final_state = kernel.to_lab(as_density<D>(state));
    };
    if (pure) {
        Vec<D> psi = kernel.to_eigenbasis(Vec<D>(dominant_vector(rho0)));
        loop(psi);
    } else {
        Mat<D> rho = kernel.to_eigenbasis(fixed<D>(rho0));
        loop(rho);
    }
    return run;
}

[[nodiscard]] inline double weighted_count(const JumpModelSpec &model,
                                           const std::vector<long> &counts,
                                           CountStatistic statistic) {
    double n = 0.0;
    for (std::size_t z = 0; z < counts.size(); ++z) {
        const double w = statistic == CountStatistic::weighted ? model.jumps[z].nu : 1.0;
        n += w * static_cast<double>(counts[z]);
    }
    return n;
}

template <int D>
[[nodiscard]] Operator ordered_mean(const MatList<D> &states, Eigen::Index dim) {
    Mat<D> acc = Mat<D>::Zero(dim, dim);
    for (const auto &s : states) {
        acc += s;
    }
    acc /= static_cast<double>(states.size());
    return to_operator(acc);
}

} // namespace detail

/// One jump step from rho with uniform variate u in [0, 1).
[[nodiscard]] inline JumpStepResult jump_step(const JumpModelSpec &model,
                                              const Operator &rho, double dt, double u) {
    check_density(rho, "jump_step: state");
    if (!(u >= 0.0 && u < 1.0)) {
        throw ModelError("jump_step: u must lie in [0, 1)");
    }
    detail::JumpKernel<Eigen::Dynamic> kernel(model, dt);
    if (rho.rows() != model.dim()) {
        throw DimensionError("jump_step: state dimension does not match the model");
    }
    Operator state = rho;
    const std::size_t z = kernel.step(state, u);
    return {z, state};
}

/// One homodyne step from rho with Wiener increment dw.
[[nodiscard]] inline HomodyneStepResult homodyne_step(const HomodyneModelSpec &model,
                                                      const Operator &rho, double dt,
                                                      double dw) {
    check_density(rho, "homodyne_step: state");
    detail::HomodyneKernel<Eigen::Dynamic> kernel(model, dt);
    if (rho.rows() != model.dim()) {
        throw DimensionError("homodyne_step: state dimension does not match the model");
    }
    Operator state = kernel.to_eigenbasis(rho);
    const double z = kernel.step(state, dw);
    return {z, kernel.to_lab(state)};
}

/// Jump trajectory over [0, tau] with K = round(tau / dt) steps of tau / K.
[[nodiscard]] inline JumpTrajectory simulate_jump(const JumpModelSpec &model,
                                                  const Operator &rho0, double tau,
                                                  double dt, std::uint64_t seed) {
    check_density(rho0, "simulate_jump: initial state");
    if (rho0.rows() != model.dim()) {
        throw DimensionError("simulate_jump: state dimension does not match the model");
    }
    const std::size_t steps = step_count(tau, dt);
    const double h = tau / static_cast<double>(steps);
    const bool pure = is_pure(rho0);
    return detail::dispatch_dim(model.dim(), [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const detail::JumpKernel<D> kernel(model, h);
        Engine eng = make_engine(seed);
        JumpTrajectory traj;
        auto run = detail::run_jump(kernel, rho0, pure, steps, eng,
                                    [&](std::size_t k, std::size_t z) {
                                        traj.jump_times.push_back(
                                            static_cast<double>(k + 1) * h);
                                        traj.channels.push_back(z);
                                    });
        traj.N = detail::weighted_count(model, run.counts, CountStatistic::weighted);
        traj.counts = std::move(run.counts);
        traj.final_state = detail::to_operator(run.final_state);
        return traj;
    });
}

/// Homodyne trajectory over [0, tau]; Z = sum_k z_k dt.
[[nodiscard]] inline HomodyneTrajectory
simulate_homodyne(const HomodyneModelSpec &model, const Operator &rho0, double tau,
                  double dt, std::uint64_t seed, bool keep_outputs = false) {
    check_density(rho0, "simulate_homodyne: initial state");
    if (rho0.rows() != model.dim()) {
        throw DimensionError(
            "simulate_homodyne: state dimension does not match the model");
    }
    const std::size_t steps = step_count(tau, dt);
    const double h = tau / static_cast<double>(steps);
    const bool pure = is_pure(rho0);
    return detail::dispatch_dim(model.dim(), [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const detail::HomodyneKernel<D> kernel(model, h);
        Engine eng = make_engine(seed);
        HomodyneTrajectory traj;
        if (keep_outputs) {
            traj.sampled_outputs.reserve(steps);
        }
        auto run = detail::run_homodyne(kernel, rho0, pure, steps, eng,
                                        [&](std::size_t k, double z) {
                                            if (keep_outputs) {
                                                traj.sampled_outputs.push_back(
                                                    {static_cast<double>(k) * h, z});
                                            }
                                        });
        traj.Z = run.Z;
        traj.final_state = detail::to_operator(run.final_state);
        return traj;
    });
}

/**
 * Statistics of N over n_traj independent jump trajectories. Trajectory i uses
 * seed child_seed(master_seed, i), so it reproduces simulate_jump with that
 * seed. Results are reduced in trajectory order and do not depend on the
 * number of threads.
 */
[[nodiscard]] inline EnsembleStats jump_ensemble(const JumpModelSpec &model,
                                                 const Operator &rho0, double tau,
                                                 double dt, std::size_t n_traj,
                                                 std::uint64_t master_seed,
                                                 const EnsembleOptions &options = {}) {
    if (n_traj < 2) {
        throw ModelError("jump_ensemble: n_traj must be at least 2");
    }
    check_density(rho0, "jump_ensemble: initial state");
    if (rho0.rows() != model.dim()) {
        throw DimensionError("jump_ensemble: state dimension does not match the model");
    }
    const std::size_t steps = step_count(tau, dt);
    const double h = tau / static_cast<double>(steps);
    const bool pure = is_pure(rho0);
    return detail::dispatch_dim(model.dim(), [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const detail::JumpKernel<D> kernel(model, h);
        std::vector<double> values(n_traj);
        detail::MatList<D> finals(n_traj);
        parallel_for(n_traj, options.threads, [&](std::size_t i) {
            Engine eng = make_engine(child_seed(master_seed, i));
            auto run = detail::run_jump(kernel, rho0, pure, steps, eng,
                                        [](std::size_t, std::size_t) {});
            values[i] = detail::weighted_count(model, run.counts, options.statistic);
            finals[i] = run.final_state;
        });
        return compute_stats(values, detail::ordered_mean<D>(finals, model.dim()));
    });
}

/// Full records of every trajectory of a jump ensemble (same seeds as jump_ensemble).
[[nodiscard]] inline std::vector<JumpTrajectory>
jump_trajectories(const JumpModelSpec &model, const Operator &rho0, double tau, double dt,
                  std::size_t n_traj, std::uint64_t master_seed, unsigned threads = 0) {
    std::vector<JumpTrajectory> out(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        out[i] = simulate_jump(model, rho0, tau, dt, child_seed(master_seed, i));
    });
    return out;
}

/// Statistics of Z over n_traj homodyne trajectories; seeds as in jump_ensemble.
[[nodiscard]] inline EnsembleStats
homodyne_ensemble(const HomodyneModelSpec &model, const Operator &rho0, double tau,
                  double dt, std::size_t n_traj, std::uint64_t master_seed,
                  const EnsembleOptions &options = {}) {
    if (n_traj < 2) {
        throw ModelError("homodyne_ensemble: n_traj must be at least 2");
    }
    check_density(rho0, "homodyne_ensemble: initial state");
    if (rho0.rows() != model.dim()) {
        throw DimensionError(
            "homodyne_ensemble: state dimension does not match the model");
    }
    const std::size_t steps = step_count(tau, dt);
    const double h = tau / static_cast<double>(steps);
    const bool pure = is_pure(rho0);
    return detail::dispatch_dim(model.dim(), [&](auto dim) {
        constexpr int D = decltype(dim)::value;
        const detail::HomodyneKernel<D> kernel(model, h);
        std::vector<double> values(n_traj);
        detail::MatList<D> finals(n_traj);
        parallel_for(n_traj, options.threads, [&](std::size_t i) {
            Engine eng = make_engine(child_seed(master_seed, i));
            auto run = detail::run_homodyne(kernel, rho0, pure, steps, eng,
                                            [](std::size_t, double) {});
            values[i] = run.Z;
            finals[i] = run.final_state;
        });
        return compute_stats(values, detail::ordered_mean<D>(finals, model.dim()));
    });
}

[[nodiscard]] inline std::vector<HomodyneTrajectory>
homodyne_trajectories(const HomodyneModelSpec &model, const Operator &rho0, double tau,
                      double dt, std::size_t n_traj, std::uint64_t master_seed,
                      unsigned threads = 0) {
    std::vector<HomodyneTrajectory> out(n_traj);
    parallel_for(n_traj, threads, [&](std::size_t i) {
        out[i] = simulate_homodyne(model, rho0, tau, dt, child_seed(master_seed, i));
    });
    return out;
}

/// CSV dump: trajectory_id,jump_time,channel (one row per jump).
inline void write_jump_records(std::ostream &os, std::span<const JumpTrajectory> trajs) {
    os << "trajectory_id,jump_time,channel\n";
    char buf[64];
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        for (std::size_t k = 0; k < trajs[i].jump_times.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.12g", trajs[i].jump_times[k]);
            os << i << ',' << buf << ',' << trajs[i].channels[k] << '\n';
        }
    }
}

/// CSV dump: trajectory_id,Z
inline void write_homodyne_records(std::ostream &os,
                                   std::span<const HomodyneTrajectory> trajs) {
    os << "trajectory_id,Z\n";
    char buf[64];
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", trajs[i].Z);
        os << i << ',' << buf << '\n';
    }
}

} // namespace qtur
