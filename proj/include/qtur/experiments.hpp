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
 * Driven two-level atom with sigma_x feedback and randomized TUR sweeps.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iterator>
#include <limits>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtur/error.hpp"
#include "qtur/fisher.hpp"
#include "qtur/master_equation.hpp"
#include "qtur/operator_algebra.hpp"
#include "qtur/random.hpp"
#include "qtur/trajectories.hpp"

namespace qtur {

/// Basis ordering: index 0 = |g>, index 1 = |e>.
namespace two_level {

[[nodiscard]] inline Operator ground() {
    Operator p = Operator::Zero(2, 2);
    p(0, 0) = 1.0;
    return p;
}

[[nodiscard]] inline Operator excited() {
    Operator p = Operator::Zero(2, 2);
    p(1, 1) = 1.0;
    return p;
}

/// |g><e|
[[nodiscard]] inline Operator lowering() {
    Operator p = Operator::Zero(2, 2);
    p(0, 1) = 1.0;
    return p;
}

[[nodiscard]] inline Operator sigma_x() {
    Operator p = Operator::Zero(2, 2);
    p(0, 1) = 1.0;
    p(1, 0) = 1.0;
    return p;
}

/// i|g><e| - i|e><g|, so that -i[sigma_z, sigma_x] = 2 sigma_y.
[[nodiscard]] inline Operator sigma_y() {
    Operator p = Operator::Zero(2, 2);
    p(0, 1) = Complex(0.0, 1.0);
    p(1, 0) = Complex(0.0, -1.0);
    return p;
}

/// |e><e| - |g><g|, i.e. diag(-1, 1) in (g, e) ordering.
[[nodiscard]] inline Operator sigma_z() {
    Operator p = Operator::Zero(2, 2);
    p(0, 0) = -1.0;
    p(1, 1) = 1.0;
    return p;
}

/// (|g> + |e>) / sqrt(2)
[[nodiscard]] inline Operator plus() {
    return Operator::Constant(2, 2, Complex(0.5, 0.0));
}

} // namespace two_level

struct TwoLevelParams {
    double delta = 0.0; ///< detuning
    double omega = 0.0; ///< Rabi frequency
    double kappa = 1.0; ///< decay rate
    double nu = 0.0;    ///< feedback strength
};

/// H = delta |e><e| + omega/2 sigma_x, L = sqrt(kappa) |g><e|, F = sigma_x.
[[nodiscard]] inline JumpModelSpec rabi_model(const TwoLevelParams &p) {
    if (!(p.kappa > 0.0)) {
        throw ModelError("rabi_model: kappa must be positive");
    }
    JumpModelSpec m;
    m.H = p.delta * two_level::excited() + (0.5 * p.omega) * two_level::sigma_x();
    m.jumps.push_back({std::sqrt(p.kappa) * two_level::lowering(), p.nu});
    m.F = two_level::sigma_x();
    return m;
}

/**
 * Homodyne counterpart of rabi_model: same H, measured observable
 * Y = sqrt(L^dag L / lambda) = sqrt(kappa / lambda) |e><e| and feedback
 * F = nu sigma_x.
 */
[[nodiscard]] inline HomodyneModelSpec rabi_homodyne_model(const TwoLevelParams &p,
                                                           double lambda) {
    if (!(p.kappa > 0.0)) {
        throw ModelError("rabi_homodyne_model: kappa must be positive");
    }
    HomodyneModelSpec m;
    m.H = p.delta * two_level::excited() + (0.5 * p.omega) * two_level::sigma_x();
    m.Y = std::sqrt(p.kappa / lambda) * two_level::excited();
    m.F = p.nu * two_level::sigma_x();
    m.lambda = lambda;
    return m;
}

enum class Measurement { jump, homodyne };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool valid() const { return std::isfinite(lo) && std::isfinite(hi) && lo <= hi; }
    [[nodiscard]] double sample(double u) const { return lo + (hi - lo) * u; }
};

struct SweepRanges {
    Interval delta{0.1, 3.0};
    Interval omega{0.1, 3.0};
    Interval kappa{0.1, 3.0};
    Interval tau{0.1, 3.0};
};

struct SweepConfig {
    Measurement measurement = Measurement::jump;
    SweepRanges ranges;
    std::size_t n_points = 200;
    std::size_t n_traj = 10000;
    double dt = 1e-3;
    double nu = 1.0;
    std::optional<double> reference_nu = 0.0;
    double lambda = 1.0; ///< homodyne only
    double dtheta = kDefaultDtheta;
    Operator initial_state = two_level::ground();
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
};

struct SweepRecord {
    Measurement measurement = Measurement::jump;
    TwoLevelParams params;
    double tau = 0.0;
    double mean = 0.0;     ///< <N> or <Z>
    double variance = 0.0; ///< Var[N] or Var[Z]
    double precision = 0.0;
    double precision_stderr = 0.0;
    double B = 0.0;
    std::optional<double> B_reference;
    double margin = 0.0;
    bool satisfied = false;
    bool degenerate = false; ///< mean within 3 standard errors of zero
    bool activity_converged = true;
};

/// 1/B for counting, 1/(4B) for homodyne output.
[[nodiscard]] inline double tur_bound(double B, Measurement kind) {
    if (!(B > 0.0)) {
        throw ModelError("TUR bound needs a positive activity, got " + std::to_string(B));
    }
    return kind == Measurement::homodyne ? 1.0 / (4.0 * B) : 1.0 / B;
}

[[nodiscard]] inline double bound_margin(double precision, double B, Measurement kind) {
    return precision - tur_bound(B, kind);
}

[[nodiscard]] inline double bound_margin(const SweepRecord &r) {
    return bound_margin(r.precision, r.B, r.measurement);
}

/// Margin against the reference (feedback-free) activity, if present.
[[nodiscard]] inline std::optional<double> reference_margin(const SweepRecord &r) {
    if (!r.B_reference || !(*r.B_reference > 0.0)) {
        return std::nullopt;
    }
    return bound_margin(r.precision, *r.B_reference, r.measurement);
}

namespace detail {

inline void finish_record(SweepRecord &r, const EnsembleStats &stats) {
    r.mean = stats.mean;
    r.variance = stats.variance;
    r.degenerate = !(std::abs(stats.mean) > 3.0 * stats.std_error_mean);
    r.precision = stats.variance / (stats.mean * stats.mean);
    r.precision_stderr = precision_stderr(stats);
    r.margin = r.B > 0.0 ? bound_margin(r) : std::numeric_limits<double>::quiet_NaN();
    r.satisfied = r.margin >= -3.0 * r.precision_stderr;
}

} // namespace detail

/// Evaluates one realization of the sweep.
[[nodiscard]] inline SweepRecord evaluate_point(const SweepConfig &cfg,
                                                const TwoLevelParams &params, double tau,
                                                std::uint64_t seed) {
    SweepRecord r;
    r.measurement = cfg.measurement;
    r.params = params;
    r.tau = tau;
    const EnsembleOptions opts{cfg.threads, CountStatistic::total};
    if (cfg.measurement == Measurement::jump) {
        const JumpModelSpec model = rabi_model(params);
        const EnsembleStats stats =
            jump_ensemble(model, cfg.initial_state, tau, cfg.dt, cfg.n_traj, seed, opts);
        const ActivityResult act = activity_jump(model, cfg.initial_state, tau, cfg.dtheta);
        r.B = act.B;
        r.activity_converged = act.converged;
        if (cfg.reference_nu) {
            TwoLevelParams ref = params;
            ref.nu = *cfg.reference_nu;
            r.B_reference =
                activity_jump(rabi_model(ref), cfg.initial_state, tau, cfg.dtheta).B;
        }
        detail::finish_record(r, stats);
    } else {
        const HomodyneModelSpec model = rabi_homodyne_model(params, cfg.lambda);
        const EnsembleStats stats = homodyne_ensemble(model, cfg.initial_state, tau,
                                                      cfg.dt, cfg.n_traj, seed, opts);
        const ActivityResult act =
            activity_homodyne(model, cfg.initial_state, tau, cfg.dtheta);
        r.B = act.B;
        r.activity_converged = act.converged;
        if (cfg.reference_nu) {
            TwoLevelParams ref = params;
            ref.nu = *cfg.reference_nu;
            r.B_reference = activity_homodyne(rabi_homodyne_model(ref, cfg.lambda),
                                              cfg.initial_state, tau, cfg.dtheta)
                                .B;
        }
        detail::finish_record(r, stats);
    }
    return r;
}

/**
 * Randomized sweep: (delta, omega, kappa, tau) are drawn uniformly, in that
 * order, from a parameter stream of the master seed; point i runs its
 * ensemble with seed child_seed(points stream, i).
 */
[[nodiscard]] inline std::vector<SweepRecord> random_sweep(const SweepConfig &cfg) {
    if (cfg.n_points < 1) {
        throw ModelError("random_sweep: need at least one point");
    }
    if (cfg.n_traj < 2) {
        throw ModelError("random_sweep: n_traj must be at least 2");
    }
    const auto &rg = cfg.ranges;
    if (!rg.delta.valid() || !rg.omega.valid() || !rg.kappa.valid() || !rg.tau.valid()) {
        throw ModelError("random_sweep: invalid parameter interval");
    }
    if (!(rg.kappa.lo > 0.0) || !(rg.tau.lo > 0.0)) {
        throw ModelError("random_sweep: kappa and tau ranges must be positive");
    }
    Engine params = make_engine(child_seed(cfg.master_seed, Stream::parameters));
    const std::uint64_t point_root = child_seed(cfg.master_seed, Stream::points);
    std::vector<SweepRecord> out;
    out.reserve(cfg.n_points);
    for (std::size_t i = 0; i < cfg.n_points; ++i) {
        TwoLevelParams p;
        p.delta = rg.delta.sample(uniform01(params));
        p.omega = rg.omega.sample(uniform01(params));
        p.kappa = rg.kappa.sample(uniform01(params));
        p.nu = cfg.nu;
        const double tau = rg.tau.sample(uniform01(params));
        out.push_back(evaluate_point(cfg, p, tau, child_seed(point_root, i)));
    }
    return out;
}

struct SweepSummary {
    std::size_t points = 0;
    std::size_t degenerate = 0;
    std::size_t satisfied = 0;  ///< among non-degenerate
    std::size_t violations = 0; ///< non-degenerate with margin < -3 stderr
    std::size_t reference_points = 0;
    std::size_t below_reference = 0;      ///< reference margin < 0
    std::size_t reference_violations = 0; ///< reference margin < -3 stderr
    std::size_t non_converged = 0;
};

[[nodiscard]] inline SweepSummary summarize(const std::vector<SweepRecord> &records) {
    SweepSummary s;
    s.points = records.size();
    for (const auto &r : records) {
        if (!r.activity_converged) {
            ++s.non_converged;
        }
        if (r.degenerate) {
            ++s.degenerate;
            continue;
        }
        if (r.satisfied) {
            ++s.satisfied;
        } else {
            ++s.violations;
        }
        if (auto m = reference_margin(r)) {
            ++s.reference_points;
            if (*m < 0.0) {
                ++s.below_reference;
            }
            if (*m < -3.0 * r.precision_stderr) {
                ++s.reference_violations;
            }
        }
    }
    return s;
}

enum class ReportFormat { csv, json };

inline const char *const kReportColumns[] = {
    "delta", "omega", "kappa", "nu",        "tau",           "mean_N", "var_N",
    "precision", "precision_stderr", "B",   "B_reference",   "margin", "satisfied"};

namespace detail {

[[nodiscard]] inline std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// x rounded to 12 significant digits.
[[nodiscard]] inline double round12(double x) {
    return std::strtod(format_number(x).c_str(), nullptr);
}

} // namespace detail

inline void write_report(std::ostream &os, const std::vector<SweepRecord> &records,
                         ReportFormat format) {
    if (records.empty()) {
        throw ModelError("report: no records to write");
    }
    using detail::format_number;
    if (format == ReportFormat::csv) {
        for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
            os << (c ? "," : "") << kReportColumns[c];
        }
        os << '\n';
        for (const auto &r : records) {
            os << format_number(r.params.delta) << ',' << format_number(r.params.omega)
               << ',' << format_number(r.params.kappa) << ',' << format_number(r.params.nu)
               << ',' << format_number(r.tau) << ',' << format_number(r.mean) << ','
               << format_number(r.variance) << ',' << format_number(r.precision) << ','
               << format_number(r.precision_stderr) << ',' << format_number(r.B) << ','
               << (r.B_reference ? format_number(*r.B_reference) : std::string{}) << ','
               << format_number(r.margin) << ',' << (r.satisfied ? "true" : "false")
               << '\n';
        }
        return;
    }
    using detail::round12;
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto &r : records) {
        nlohmann::ordered_json row;
        row["delta"] = round12(r.params.delta);
        row["omega"] = round12(r.params.omega);
        row["kappa"] = round12(r.params.kappa);
        row["nu"] = round12(r.params.nu);
        row["tau"] = round12(r.tau);
        row["mean_N"] = round12(r.mean);
        row["var_N"] = round12(r.variance);
        row["precision"] = round12(r.precision);
        row["precision_stderr"] = round12(r.precision_stderr);
        row["B"] = round12(r.B);
        row["B_reference"] =
            r.B_reference ? nlohmann::ordered_json(round12(*r.B_reference)) : nullptr;
        row["margin"] = round12(r.margin);
        row["satisfied"] = r.satisfied;
        doc.push_back(std::move(row));
    }
    os << doc.dump(2) << '\n';
}

/// Writes the report to `path`; throws Error if the file cannot be written.
inline void emit_report(const std::vector<SweepRecord> &records,
                        const std::filesystem::path &path, ReportFormat format) {
    if (records.empty()) {
        throw ModelError("report: no records to write");
    }
    std::ostringstream buffer;
    write_report(buffer, records, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("report: cannot open '" + path.string() + "' for writing");
    }
    out << buffer.str();
    if (!out.flush()) {
        throw Error("report: failed writing '" + path.string() + "'");
    }
}

/// One parsed CSV report row.
struct ReportRow {
    double delta, omega, kappa, nu, tau, mean_N, var_N, precision, precision_stderr, B;
    std::optional<double> B_reference;
    double margin;
    bool satisfied;
};

[[nodiscard]] inline std::vector<ReportRow> parse_report_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error("report: empty input");
    }
    std::string expected;
    for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
        expected += (c ? "," : "");
        expected += kReportColumns[c];
    }
    if (line != expected) {
        throw Error("report: unexpected header '" + line + "'");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        if (cells.size() != std::size(kReportColumns)) {
            throw Error("report: row has " + std::to_string(cells.size()) + " cells");
        }
        auto num = [&](std::size_t k) { return std::strtod(cells[k].c_str(), nullptr); };
        ReportRow r{num(0), num(1), num(2), num(3), num(4), num(5), num(6),
                    num(7), num(8), num(9), std::nullopt, num(11), cells[12] == "true"};
        if (!cells[10].empty()) {
            r.B_reference = num(10);
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace qtur
