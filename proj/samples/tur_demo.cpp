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

// Driven two-level atom with and without jump feedback: precision of the
// photon count against the activity bound.
//
//   tur_demo [n_traj] [seed]

#include <cstdio>
#include <cstdlib>

#include "qtur/qtur.hpp"

int main(int argc, char **argv) {
    const std::size_t n_traj = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;
    const double tau = 2.0;
    const qtur::Operator rho0 = qtur::two_level::excited();

    std::printf("%4s %10s %10s %10s %10s %10s\n", "nu", "<N>", "Var[N]", "precision", "1/B",
                "1/B(nu=0)");
    const double b0 =
        qtur::activity_jump(qtur::rabi_model({0.5, 0.3, 2.0, 0.0}), rho0, tau).B;
    for (double nu : {0.0, 0.5, 1.0, 1.5}) {
        const auto model = qtur::rabi_model({0.5, 0.3, 2.0, nu});
        const auto stats = qtur::jump_ensemble(model, rho0, tau, 1e-3, n_traj, seed,
                                               {0, qtur::CountStatistic::total});
        const auto act = qtur::activity_jump(model, rho0, tau);
        std::printf("%4.1f %10.4f %10.4f %10.4f %10.4f %10.4f\n", nu, stats.mean,
                    stats.variance, stats.variance / (stats.mean * stats.mean), 1.0 / act.B,
                    1.0 / b0);
    }

    const auto rate = qtur::asymptotic_activity(qtur::rabi_model({0.5, 0.3, 2.0, 1.0}));
    std::printf("long-time activity rate (nu=1): %.6f (a=%.6f, b_c=%.6f)\n", rate.rate,
                rate.a_term, rate.bc_term);
    return 0;
}
