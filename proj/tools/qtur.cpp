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

// qtur: command-line front end.
//
//   qtur simulate    ensemble statistics of N (jump) or Z (homodyne)
//   qtur activity    quantum dynamical activity, optionally its long-time rate
//   qtur sweep       randomized two-level sweep and report
//   qtur check-bound re-check the bound margins of a sweep report
//
// Every subcommand accepts --config FILE (TOML/INI); flags on the command line
// override file values, which override defaults. QTUR_THREADS is read when
// --threads is absent.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "qtur/qtur.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitFailure = 1;
constexpr int kExitNotConverged = 3;
constexpr int kExitViolation = 4;

struct RunConfig {
    std::string mode = "jump";
    std::string preset;
    std::string model_path;
    qtur::TwoLevelParams params{1.0, 1.0, 1.0, 0.0};
    double lambda = 1.0;
    double tau = 1.0;
    double dt = 1e-3;
    std::size_t n_traj = 10000;
    std::uint64_t seed = 0;
    double dtheta = qtur::kDefaultDtheta;
    std::string initial_state;
    unsigned threads = 0;
    std::string output;
    std::string format = "json";
};

struct SimulateArgs {
    std::string statistic = "weighted";
    std::string trajectories;
};

struct SweepArgs {
    std::size_t points = 200;
    double reference_nu = 0.0;
    bool no_reference = false;
    std::vector<double> delta{0.1, 3.0}, omega{0.1, 3.0}, kappa{0.1, 3.0}, tau{0.1, 3.0};
};

struct CheckArgs {
    std::string report;
    bool against_reference = false;
};

void add_model_flags(CLI::App *sub, RunConfig &c) {
    sub->add_option("--mode", c.mode, "Measurement: jump or homodyne")
        ->check(CLI::IsMember({"jump", "homodyne"}))
        ->capture_default_str();
    sub->add_option("--preset", c.preset, "Built-in model; 'rabi' is the driven two-level atom")
        ->check(CLI::IsMember({"rabi"}));
    sub->add_option("--model", c.model_path, "JSON model file (dim, H, jumps or Y, F, rho0)");
    sub->add_option("--delta", c.params.delta, "Detuning of the rabi preset")
        ->capture_default_str();
    sub->add_option("--omega", c.params.omega, "Rabi frequency of the rabi preset")
        ->capture_default_str();
    sub->add_option("--kappa", c.params.kappa, "Decay rate of the rabi preset")
        ->capture_default_str();
    sub->add_option("--nu", c.params.nu, "Feedback strength of the rabi preset")
        ->capture_default_str();
    sub->add_option("--lambda", c.lambda, "Homodyne measurement strength")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--tau", c.tau, "Observation time")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--dtheta", c.dtheta, "Finite-difference step of the activity")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--initial-state", c.initial_state,
                    "ground, excited or plus; defaults to the model's rho0, else ground")
        ->check(CLI::IsMember({"ground", "excited", "plus"}));
}

void add_output_flags(CLI::App *sub, RunConfig &c, const std::string &default_format) {
    c.format = default_format;
    sub->add_option("--output,-o", c.output, "Output file; standard output if omitted");
    sub->add_option("--format", c.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

void add_run_flags(CLI::App *sub, RunConfig &c) {
    sub->add_option("--dt", c.dt, "Time step")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--n-traj", c.n_traj, "Trajectories per ensemble (at least 2)")
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads; 0 uses all cores")
        ->envname("QTUR_THREADS")
        ->capture_default_str();
}

qtur::Operator basis_state(const std::string &name, Eigen::Index dim) {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    if (name == "ground") {
        psi(0) = 1.0;
    } else if (name == "excited") {
        if (dim < 2) {
            throw qtur::ModelError("--initial-state excited needs dim >= 2");
        }
        psi(1) = 1.0;
    } else {
        if (dim < 2) {
            throw qtur::ModelError("--initial-state plus needs dim >= 2");
        }
        psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
    }
    return psi * psi.adjoint();
}

struct LoadedModel {
    std::optional<qtur::JumpModelSpec> jump;
    std::optional<qtur::HomodyneModelSpec> homodyne;
    qtur::Operator rho0;
};

LoadedModel load_model(const RunConfig &c) {
    if (c.preset.empty() == c.model_path.empty()) {
        throw qtur::ModelError("exactly one of --preset and --model is required");
    }
    LoadedModel out;
    std::optional<qtur::Operator> file_rho0;
    Eigen::Index dim = 2;
    if (!c.model_path.empty()) {
        const auto j = qtur::read_json_file(c.model_path);
        if (c.mode == "jump") {
            out.jump = qtur::jump_model_from_json(j);
        } else {
            out.homodyne = qtur::homodyne_model_from_json(j);
        }
        file_rho0 = qtur::initial_state_from_json(j);
        dim = out.jump ? out.jump->dim() : out.homodyne->dim();
    } else if (c.mode == "jump") {
        out.jump = qtur::rabi_model(c.params);
    } else {
        out.homodyne = qtur::rabi_homodyne_model(c.params, c.lambda);
    }
    if (!c.initial_state.empty()) {
        out.rho0 = basis_state(c.initial_state, dim);
    } else if (file_rho0) {
        out.rho0 = *file_rho0;
    } else {
        out.rho0 = basis_state("ground", dim);
    }
    return out;
}

// + 0.0 folds -0 into 0
double round12(double x) { return qtur::detail::round12(x) + 0.0; }
std::string fmt(double x) { return qtur::detail::format_number(x + 0.0); }

void write_text(const std::string &path, const std::string &text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw qtur::Error("cannot write '" + path + "'");
    }
}

// Flat key/value record rendered as one-row CSV or a JSON object.
std::string render(const ordered_json &rec, const std::string &format) {
    if (format == "json") {
        return rec.dump(2) + "\n";
    }
    std::string head, row;
    for (auto it = rec.begin(); it != rec.end(); ++it) {
        if (it.value().is_structured()) {
            continue;
        }
        const bool first = head.empty();
        head += (first ? "" : ",") + it.key();
        std::string cell;
        if (it.value().is_boolean()) {
            cell = it.value().get<bool>() ? "true" : "false";
        } else if (it.value().is_number()) {
            cell = fmt(it.value().get<double>());
        } else if (it.value().is_string()) {
            cell = it.value().get<std::string>();
        }
        row += (first ? "" : ",") + cell;
    }
    return head + "\n" + row + "\n";
}

ordered_json matrix_json(const qtur::Operator &m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back({round12(m(r, c).real()), round12(m(r, c).imag())});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_simulate(const RunConfig &c, const SimulateArgs &a) {
    const LoadedModel m = load_model(c);
    if (c.n_traj < 2) {
        throw qtur::ModelError("--n-traj must be at least 2 (variance undefined)");
    }
    qtur::EnsembleOptions opts{c.threads, a.statistic == "total"
                                              ? qtur::CountStatistic::total
                                              : qtur::CountStatistic::weighted};
    const qtur::EnsembleStats s =
        m.jump ? qtur::jump_ensemble(*m.jump, m.rho0, c.tau, c.dt, c.n_traj, c.seed, opts)
               : qtur::homodyne_ensemble(*m.homodyne, m.rho0, c.tau, c.dt, c.n_traj, c.seed,
                                         opts);
    ordered_json rec;
    rec["mode"] = c.mode;
    rec["tau"] = round12(c.tau);
    rec["n_traj"] = s.n_traj;
    rec["mean"] = round12(s.mean);
    rec["variance"] = round12(s.variance);
    rec["std_error_mean"] = round12(s.std_error_mean);
    rec["std_error_variance"] = round12(s.std_error_variance);
    rec["precision"] = round12(s.variance / (s.mean * s.mean));
    rec["precision_stderr"] = round12(qtur::precision_stderr(s));
    rec["mean_state"] = matrix_json(s.mean_state);
    write_text(c.output, render(rec, c.format));

    if (!a.trajectories.empty()) {
        std::ostringstream os;
        if (m.jump) {
            const auto trajs = qtur::jump_trajectories(*m.jump, m.rho0, c.tau, c.dt, c.n_traj,
                                                       c.seed, c.threads);
            qtur::write_jump_records(os, trajs);
        } else {
            const auto trajs = qtur::homodyne_trajectories(*m.homodyne, m.rho0, c.tau, c.dt,
                                                           c.n_traj, c.seed, c.threads);
            qtur::write_homodyne_records(os, trajs);
        }
        write_text(a.trajectories, os.str());
    }
    return 0;
}

int cmd_activity(const RunConfig &c, bool asymptotic) {
    const LoadedModel m = load_model(c);
    const qtur::ActivityResult r =
        m.jump ? qtur::activity_jump(*m.jump, m.rho0, c.tau, c.dtheta)
               : qtur::activity_homodyne(*m.homodyne, m.rho0, c.tau, c.dtheta);
    ordered_json rec;
    rec["mode"] = c.mode;
    rec["tau"] = round12(r.tau);
    rec["B"] = round12(r.B);
    rec["B_half"] = round12(r.B_half);
    rec["dtheta"] = round12(r.dtheta_used);
    rec["convergence_ratio"] = round12(r.convergence_ratio);
    rec["converged"] = r.converged;
    if (asymptotic) {
        if (!m.jump) {
            throw qtur::ModelError("--asymptotic is available for jump measurement only");
        }
        const qtur::AsymptoticActivityResult a = qtur::asymptotic_activity(*m.jump);
        rec["rate"] = round12(a.rate);
        rec["a"] = round12(a.a_term);
        rec["b_c"] = round12(a.bc_term);
    }
    write_text(c.output, render(rec, c.format));
    if (!r.converged) {
        std::cerr << "qtur activity: finite difference not converged, convergence_ratio="
                  << fmt(r.convergence_ratio) << " (dtheta=" << fmt(r.dtheta_used) << ")\n";
        return kExitNotConverged;
    }
    return 0;
}

qtur::Interval interval(const std::vector<double> &v, const char *name) {
    if (v.size() != 2) {
        throw qtur::ModelError(std::string("--") + name + "-range needs two values");
    }
    return {v[0], v[1]};
}

int cmd_sweep(const RunConfig &c, const SweepArgs &a) {
    if (!c.model_path.empty()) {
        throw qtur::ModelError("sweep samples the rabi model; --model is not supported");
    }
    qtur::SweepConfig cfg;
    cfg.measurement = c.mode == "jump" ? qtur::Measurement::jump : qtur::Measurement::homodyne;
    cfg.ranges = {interval(a.delta, "delta"), interval(a.omega, "omega"),
                  interval(a.kappa, "kappa"), interval(a.tau, "tau")};
    cfg.n_points = a.points;
    cfg.n_traj = c.n_traj;
    cfg.dt = c.dt;
    cfg.nu = c.params.nu;
    cfg.reference_nu = a.no_reference ? std::nullopt : std::optional<double>(a.reference_nu);
    cfg.lambda = c.lambda;
    cfg.dtheta = c.dtheta;
    cfg.initial_state = basis_state(c.initial_state.empty() ? "ground" : c.initial_state, 2);
    cfg.master_seed = c.seed;
    cfg.threads = c.threads;

    const auto records = qtur::random_sweep(cfg);
    const qtur::ReportFormat format =
        c.format == "json" ? qtur::ReportFormat::json : qtur::ReportFormat::csv;
    if (c.output.empty()) {
        qtur::write_report(std::cout, records, format);
    } else {
        qtur::emit_report(records, c.output, format);
    }
    const qtur::SweepSummary s = qtur::summarize(records);
    const std::size_t active = s.points - s.degenerate;
    std::cout << "points=" << s.points << " degenerate=" << s.degenerate
              << " satisfied=" << s.satisfied << " violations=" << s.violations;
    if (!a.no_reference) {
        std::cout << " below_reference=" << s.below_reference
                  << " reference_violations=" << s.reference_violations
                  << " reference_violation_fraction="
                  << fmt(active ? static_cast<double>(s.reference_violations) /
                                      static_cast<double>(active)
                                : 0.0);
    }
    std::cout << " non_converged=" << s.non_converged << "\n";
    return 0;
}

int cmd_check_bound(const CheckArgs &a, const std::string &mode) {
    std::ifstream in(a.report);
    if (!in) {
        throw qtur::Error("cannot open report '" + a.report + "'");
    }
    const auto rows = qtur::parse_report_csv(in);
    const auto kind = mode == "homodyne" ? qtur::Measurement::homodyne : qtur::Measurement::jump;
    std::size_t checked = 0, violations = 0, inconsistent = 0;
    for (const auto &r : rows) {
        if (!(r.B > 0.0)) {
            continue;
        }
        const double stored = qtur::bound_margin(r.precision, r.B, kind);
        if (std::abs(stored - r.margin) > 1e-9 * std::max(1.0, std::abs(r.margin))) {
            ++inconsistent;
        }
        double margin = stored;
        if (a.against_reference) {
            if (!r.B_reference || !(*r.B_reference > 0.0)) {
                continue;
            }
            margin = qtur::bound_margin(r.precision, *r.B_reference, kind);
        }
        ++checked;
        if (margin < -3.0 * r.precision_stderr) {
            ++violations;
        }
    }
    std::cout << "rows=" << rows.size() << " checked=" << checked
              << " violations=" << violations << " inconsistent_margins=" << inconsistent
              << "\n";
    if (inconsistent > 0) {
        std::cerr << "qtur check-bound: stored margins disagree with precision - bound\n";
        return kExitFailure;
    }
    return violations > 0 ? kExitViolation : 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Quantum trajectories, dynamical activity and uncertainty bounds"};
    app.set_config("--config", "", "TOML/INI file of option values; command-line flags win");
    app.require_subcommand(1);

    RunConfig sim_cfg, act_cfg, sweep_cfg;
    SimulateArgs sim_args;
    bool asymptotic = false;
    SweepArgs sweep_args;
    CheckArgs check_args;
    std::string check_mode = "jump";

    auto *sim = app.add_subcommand("simulate", "Run a trajectory ensemble and write its statistics");
    add_model_flags(sim, sim_cfg);
    add_run_flags(sim, sim_cfg);
    add_output_flags(sim, sim_cfg, "json");
    sim->add_option("--statistic", sim_args.statistic,
                    "Jump count: weighted (sum nu_z N_z) or total (sum N_z)")
        ->check(CLI::IsMember({"weighted", "total"}))
        ->capture_default_str();
    sim->add_option("--trajectories", sim_args.trajectories,
                    "Also write per-trajectory records (CSV) to this file");

    auto *act = app.add_subcommand("activity", "Compute the quantum dynamical activity");
    add_model_flags(act, act_cfg);
    add_output_flags(act, act_cfg, "json");
    act->add_flag("--asymptotic", asymptotic, "Also report the long-time activity rate");

    auto *sweep = app.add_subcommand("sweep", "Randomized two-level sweep of the bound");
    sweep->add_option("--mode", sweep_cfg.mode, "Measurement: jump or homodyne")
        ->check(CLI::IsMember({"jump", "homodyne"}))
        ->capture_default_str();
    sweep_cfg.params.nu = 1.0;
    sweep->add_option("--nu", sweep_cfg.params.nu, "Feedback strength")->capture_default_str();
    sweep->add_option("--reference-nu", sweep_args.reference_nu,
                      "Feedback strength of the reference activity")
        ->capture_default_str();
    sweep->add_flag("--no-reference", sweep_args.no_reference,
                    "Skip the reference activity column");
    sweep->add_option("--points", sweep_args.points, "Number of random realizations")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--delta-range", sweep_args.delta, "Detuning interval LO HI")
        ->expected(2);
    sweep->add_option("--omega-range", sweep_args.omega, "Rabi frequency interval LO HI")
        ->expected(2);
    sweep->add_option("--kappa-range", sweep_args.kappa, "Decay rate interval LO HI")
        ->expected(2);
    sweep->add_option("--tau-range", sweep_args.tau, "Observation time interval LO HI")
        ->expected(2);
    sweep->add_option("--lambda", sweep_cfg.lambda, "Homodyne measurement strength")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--dtheta", sweep_cfg.dtheta, "Finite-difference step of the activity")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep->add_option("--initial-state", sweep_cfg.initial_state,
                      "ground, excited or plus (default ground)")
        ->check(CLI::IsMember({"ground", "excited", "plus"}));
    add_run_flags(sweep, sweep_cfg);
    add_output_flags(sweep, sweep_cfg, "csv");

    auto *check = app.add_subcommand("check-bound", "Re-check the margins of a CSV sweep report");
    check->add_option("--report", check_args.report, "CSV report written by 'qtur sweep'")
        ->required();
    check->add_option("--mode", check_mode, "Measurement of the report: jump or homodyne")
        ->check(CLI::IsMember({"jump", "homodyne"}))
        ->capture_default_str();
    check->add_flag("--against-reference", check_args.against_reference,
                    "Test the precision against the reference activity instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return cmd_simulate(sim_cfg, sim_args);
        }
        if (act->parsed()) {
            return cmd_activity(act_cfg, asymptotic);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_cfg, sweep_args);
        }
        return cmd_check_bound(check_args, check_mode);
    } catch (const std::exception &e) {
        std::cerr << "qtur: " << e.what() << "\n";
        return kExitFailure;
    }
}
