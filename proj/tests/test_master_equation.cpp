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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"

using namespace qtur;
using qtur::testing::Rng;
namespace tl = qtur::two_level;

namespace {

JumpModelSpec decay_model(double kappa, double nu = 0.0) {
    return rabi_model({0.0, 0.0, kappa, nu});
}

double trace_functional(const SuperOperator &s, const Operator &rho) {
    return std::abs(unvectorize(s * vectorize(rho)).trace());
}

} // namespace

TEST(LindbladGenerator, EmptyModelIsZero) {
    JumpModelSpec m;
    m.H = Operator::Zero(2, 2);
    m.F = Operator::Zero(2, 2);
    EXPECT_EQ(lindblad_generator(m), SuperOperator::Zero(4, 4));
}

TEST(LindbladGenerator, InitialDecayRate) {
    const double kappa = 1.7;
    const Operator drho =
        unvectorize(lindblad_generator(decay_model(kappa)) * vectorize(tl::excited()));
    EXPECT_NEAR(drho(1, 1).real(), -kappa, 1e-14);
    EXPECT_NEAR(drho(0, 0).real(), kappa, 1e-14);
}

TEST(LindbladGenerator, AnnihilatesTrace) {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = rng.jump_model(3, 2);
        EXPECT_LE(trace_functional(lindblad_generator(m), rng.density(3)), 1e-10);
        EXPECT_LE(trace_functional(feedback_generator(m), rng.density(3)), 1e-10);
    }
}

TEST(LindbladGenerator, RejectsInvalidModels) {
    Rng rng(12);
    JumpModelSpec m = rng.jump_model(2, 1);
    m.H = rng.complex_matrix(2);
    EXPECT_THROW((void)lindblad_generator(m), ModelError);
    m = rng.jump_model(2, 1);
    m.jumps[0].L = rng.complex_matrix(3);
    EXPECT_THROW((void)feedback_generator(m), DimensionError);
    m = rng.jump_model(2, 1);
    m.F = rng.complex_matrix(2);
    EXPECT_THROW((void)feedback_generator(m), ModelError);
}

TEST(FeedbackGenerator, ZeroWeightsReduceExactly) {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = rng.jump_model(2 + trial % 3, 2);
        for (auto &ch : m.jumps) {
            ch.nu = 0.0;
        }
        EXPECT_EQ(feedback_generator(m), lindblad_generator(m));
    }
}

TEST(FeedbackGenerator, IdentityFeedbackCommutes) {
    Rng rng(14);
    auto m = rng.jump_model(3, 2);
    m.F = identity(3);
    EXPECT_LE((feedback_generator(m) - lindblad_generator(m)).norm(), 1e-13);
}

TEST(FeedbackGenerator, QuarterTurnRecyclesToExcited) {
    const double kappa = 1.0;
    const auto m = decay_model(kappa, std::numbers::pi / 2.0);
    const Operator drho = unvectorize(feedback_generator(m) * vectorize(tl::excited()));
    // recycling kappa |e><e| minus the anticommutator kappa |e><e|
    EXPECT_LE(drho.norm(), 1e-14);
}

TEST(FeedbackGenerator, ExponentialMatchesConjugation) {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const Operator f = rng.hermitian(3);
        const double nu = rng.uniform(-2.0, 2.0);
        const Operator u = qtur::testing::unitary(f, nu);
        const SuperOperator conj = kron_sandwich(u, u.adjoint());
        EXPECT_LE((superop_exp(commutator_generator(f), nu) - conj).norm(), 1e-12);
    }
}

TEST(FeedbackGenerator, MatchesMatrixForm) {
    Rng rng(16);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = rng.jump_model(3, 2);
        const Operator rho = rng.density(3);
        const Operator ref = qtur::testing::two_sided_jump_field(m, m)(rho);
        EXPECT_LE((unvectorize(feedback_generator(m) * vectorize(rho)) - ref).norm(), 1e-12);
    }
}

TEST(WisemanMilburn, NoFeedbackIsMeasuredDynamics) {
    Rng rng(17);
    auto m = rng.homodyne_model(3);
    m.F = Operator::Zero(3, 3);
    const SuperOperator ref =
        commutator_generator(m.H) + m.lambda * dissipator(m.Y);
    EXPECT_LE((wiseman_milburn_generator(m) - ref).norm(), 1e-13);
}

TEST(WisemanMilburn, AnnihilatesTraceAndMatchesMatrixForm) {
    Rng rng(18);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = rng.homodyne_model(2 + trial % 3);
        const Operator rho = rng.density(m.dim());
        const SuperOperator gen = wiseman_milburn_generator(m);
        EXPECT_LE(trace_functional(gen, rho), 1e-10);
        const Operator ref = qtur::testing::two_sided_homodyne_field(m, m)(rho);
        EXPECT_LE((unvectorize(gen * vectorize(rho)) - ref).norm(), 1e-12);
    }
}

TEST(WisemanMilburn, RejectsNonPositiveLambda) {
    Rng rng(19);
    auto m = rng.homodyne_model(2);
    m.lambda = 0.0;
    EXPECT_THROW((void)wiseman_milburn_generator(m), ModelError);
    m.lambda = -1.0;
    EXPECT_THROW((void)wiseman_milburn_generator(m), ModelError);
}

TEST(Propagate, ZeroTimeIsIdentity) {
    Rng rng(20);
    const Operator rho = rng.density(3);
    EXPECT_LE((propagate(lindblad_generator(rng.jump_model(3, 1)), rho, 0.0) - rho).norm(),
              1e-15);
}

TEST(Propagate, ExponentialDecay) {
    const SuperOperator gen = lindblad_generator(decay_model(1.0));
    const Operator rho = propagate(gen, tl::excited(), 1.0);
    EXPECT_NEAR(rho(1, 1).real(), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(rho(1, 1).real(), 0.367879, 1e-6);
    const Operator rk = qtur::testing::rk4(
        [&](const Operator &x) { return Operator(unvectorize(gen * vectorize(x))); },
        tl::excited(), 1.0, 1000);
    EXPECT_LE((rk - rho).norm(), 1e-12);
}

TEST(Propagate, ConvergesToSteadyState) {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const SuperOperator gen = feedback_generator(rabi_model(rng.rabi(trial % 2)));
        const Operator rho = propagate(gen, rng.density(2), 1000.0);
        EXPECT_LE(trace_distance(rho, steady_state(gen)), 1e-6);
    }
}

TEST(Propagate, CptpSanity) {
    Rng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = rng.jump_model(2 + trial % 3, 1 + trial % 2);
        const SuperOperator gen = feedback_generator(m);
        const Operator rho0 = rng.density(m.dim());
        for (double tau : {0.1, 1.0, 10.0}) {
            const Operator rho = propagate(gen, rho0, tau);
            EXPECT_NEAR(rho.trace().real(), 1.0, 1e-9);
            EXPECT_LE((rho - rho.adjoint()).norm(), 1e-9);
            EXPECT_GE(hermitian_eigenvalues(rho).minCoeff(), -1e-8);
        }
    }
}

TEST(Propagate, Semigroup) {
    Rng rng(23);
    const auto m = rng.jump_model(3, 2);
    const SuperOperator gen = feedback_generator(m);
    const Operator rho0 = rng.density(3);
    const Operator two_step = propagate(gen, propagate(gen, rho0, 0.4), 0.9);
    EXPECT_LE((two_step - propagate(gen, rho0, 1.3)).norm(), 1e-10);
}

TEST(Propagate, RejectsBadInput) {
    const SuperOperator gen = lindblad_generator(decay_model(1.0));
    EXPECT_THROW((void)propagate(gen, tl::excited(), -1.0), ModelError);
    EXPECT_THROW((void)propagate(gen, 2.0 * tl::excited(), 1.0), ModelError);
    EXPECT_THROW((void)propagate(gen, identity(3) / 3.0, 1.0), DimensionError);
}
