#pragma once

// Experiment runners behind the CLI subcommands. Each returns its results and
// the files it would write, so the suite can reuse them.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "../correlation.hpp"
#include "../crystal.hpp"
#include "../estimator.hpp"
#include "../protocol.hpp"
#include "../shifts.hpp"
#include "config.hpp"
#include "io.hpp"

#ifndef LUTCLOCK_VERSION
#define LUTCLOCK_VERSION "0.0.0"
#endif

namespace lutclock::app {

/// Output file name -> exact contents.
using OutputFiles = std::map<std::string, std::string>;

inline void write_outputs(const std::filesystem::path& dir, const OutputFiles& files) {
    for (const auto& [name, text] : files) write_text(dir / name, text);
}

/// Per-level offsets (rad/s) for an ion whose 8<->7 tensor shift is s_hz.
inline TensorOffsets tensor_offsets(double s_hz, const PerLevel& weights) {
    const double scale = hz_to_angular(s_hz) / (weights[1] - weights[2]);
    return {scale * weights[0], scale * weights[1], scale * weights[2]};
}

inline PerIonShifts crystal_shifts(const ExperimentConfig& cfg, double theta) {
    TrapConfig trap = cfg.trap.trap;
    trap.theta = theta;
    const IonCrystal crystal = equilibrium_positions(trap);
    return total_shifts(crystal, trap, cfg.trap.quadrupole_moment, cfg.trap.ground_zeeman_hz_per_t);
}

/// One scenario per ion: tensor part on the levels, ground-state Zeeman part
/// as a common shift of the upper manifold.
inline std::vector<RamseyScenario> ion_scenarios(const ExperimentConfig& cfg,
                                                 const PerIonShifts& shifts) {
    std::vector<RamseyScenario> out;
    for (std::size_t i = 0; i < shifts.total.size(); ++i) {
        RamseyScenario sc{cfg.levels.levels(), {}, 0.0, cfg.protocol, cfg.fringe.microwave};
        sc.offsets = tensor_offsets(shifts.tensor(i), cfg.levels.tensor_level_weights);
        sc.common_shift = hz_to_angular(shifts.zeeman_gradient[i]);
        out.push_back(sc);
    }
    return out;
}

inline json shifts_json(const PerIonShifts& s) {
    json j;
    j["quadrupole_hz"] = s.quadrupole;
    j["zeeman_gradient_hz"] = s.zeeman_gradient;
    j["micromotion_hz"] = s.micromotion;
    j["total_hz"] = s.total;
    json diffs = json::array();
    for (const auto& d : s.differences) {
        diffs.push_back({{"pair", std::to_string(d.i + 1) + std::to_string(d.j + 1)},
                         {"delta_f_hz", d.value}});
    }
    j["differences"] = diffs;
    return j;
}

// ---------------------------------------------------------------------------
// Microwave Ramsey fringes per ion

struct FringeResult {
    PerIonShifts shifts;
    std::vector<double> centers_hz; // per ion
    OutputFiles files;

    /// Middle ion minus outer ion, for an odd ion count.
    double middle_minus(std::size_t outer) const {
        return centers_hz[centers_hz.size() / 2] - centers_hz[outer];
    }
};

inline FringeResult run_fringe(const ExperimentConfig& cfg, unsigned workers) {
    FringeResult r;
    r.shifts = crystal_shifts(cfg, cfg.trap.trap.theta);
    const auto ions = ion_scenarios(cfg, r.shifts);

    FringeTrackOptions opt;
    opt.rungs = cfg.fringe.rungs;
    opt.window_fringes = cfg.fringe.window_fringes;
    opt.points = cfg.fringe.points;
    opt.workers = workers;

    CsvTable table{{"ion [index]", "detuning [Hz]", "excitation [1]"}, {}};
    const double period = kTwoPi / cfg.fringe.microwave.ramsey_time;
    double mean = 0.0;
    for (const auto& ion : ions) {
        r.centers_hz.push_back(angular_to_hz(track_central_fringe(ion, SequenceKind::microwave, opt)));
        mean += r.centers_hz.back() / static_cast<double>(ions.size());
    }
    // Emitted scans share one grid wide enough to show every ion's central fringe.
    for (std::size_t i = 0; i < ions.size(); ++i) {
        const FringeScan scan = fringe_scan(
            [&](double x) { return excitation(ions[i], SequenceKind::microwave, x); },
            hz_to_angular(mean), cfg.fringe.window_fringes * period * 2.0, cfg.fringe.points * 2,
            workers);
        for (const auto& p : scan.points) {
            table.rows.push_back({static_cast<double>(i + 1), angular_to_hz(p.detuning), p.excitation});
        }
    }

    json j;
    j["ramsey_time_s"] = cfg.fringe.microwave.ramsey_time;
    j["centers_hz"] = r.centers_hz;
    if (r.centers_hz.size() % 2 == 1 && r.centers_hz.size() > 1) {
        j["middle_minus_first_hz"] = r.middle_minus(0);
        j["middle_minus_last_hz"] = r.middle_minus(r.centers_hz.size() - 1);
    }
    j["shifts"] = shifts_json(r.shifts);
    r.files["fringe.csv"] = to_csv(table);
    r.files["fringe.json"] = json_text(j);
    return r;
}

// ---------------------------------------------------------------------------
// Correlation spectroscopy

struct PairFit {
    IonPair pair;
    double truth_hz = 0.0; // model frequency difference the parity should show
    bool ok = false;
    std::string error;
    ParityFit fit;
};

struct CorrelationResult {
    bool decoupled = false;
    PerIonShifts shifts;
    ParityDataset dataset;
    std::vector<PairFit> fits;
    OutputFiles files;

    const PairFit& fit_for(std::size_t i, std::size_t j) const {
        for (const auto& f : fits) {
            if (f.pair.i == i && f.pair.j == j) return f;
        }
        throw DomainError("pair not fitted");
    }
};

inline std::string pair_label(const IonPair& p) {
    return std::to_string(p.i + 1) + std::to_string(p.j + 1);
}

inline CsvTable parity_table(const ParityDataset& ds) {
    CsvTable t;
    t.header.push_back("t [s]");
    for (const auto& p : ds.pairs) t.header.push_back("p" + pair_label(p) + " [1]");
    for (const auto& p : ds.pairs) t.header.push_back("se" + pair_label(p) + " [1]");
    t.header.push_back("n [count]");
    for (std::size_t k = 0; k < ds.times.size(); ++k) {
        std::vector<double> row{ds.times[k]};
        for (std::size_t q = 0; q < ds.pairs.size(); ++q) row.push_back(ds.parity[q][k]);
        for (std::size_t q = 0; q < ds.pairs.size(); ++q) row.push_back(ds.std_error[q][k]);
        row.push_back(static_cast<double>(ds.trials[k]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline json fit_json(const PairFit& f) {
    json j;
    j["pair"] = pair_label(f.pair);
    j["model_delta_f_hz"] = f.truth_hz;
    j["ok"] = f.ok;
    if (!f.ok) {
        j["error"] = f.error;
        return j;
    }
    j["delta_f_hz"] = f.fit.delta_f;
    j["delta_f_sigma_hz"] = f.fit.delta_f_error();
    j["p0"] = f.fit.p0;
    j["p0_sigma"] = f.fit.p0_error();
    j["decay_rate_per_s"] = f.fit.decay_rate;
    j["decay_rate_sigma_per_s"] = f.fit.decay_rate_error();
    j["coherence_time_s"] = json_number(f.fit.coherence_time);
    j["coherence_time_sigma_s"] = json_number(f.fit.coherence_time_error());
    j["chi2_reduced"] = f.fit.reduced_chi2();
    j["iterations"] = f.fit.iterations;
    return j;
}

inline CorrelationResult run_correlation(const ExperimentConfig& cfg, bool decoupled,
                                         unsigned workers) {
    CorrelationResult r;
    r.decoupled = decoupled;
    r.shifts = crystal_shifts(cfg, cfg.correlation.theta);
    const CorrelationRun& run = decoupled ? cfg.correlation.decoupled : cfg.correlation.plain;

    CorrelationConfig cc;
    cc.ions = ion_scenarios(cfg, r.shifts);
    cc.kind = decoupled ? SequenceKind::decoupled : SequenceKind::plain;
    cc.times = run.times();
    cc.n_trials = run.trials;
    cc.rng_seed = cfg.simulation.rng_seed;
    cc.stream_base = decoupled ? 0x20000u : 0x10000u;
    cc.dephasing = {cfg.correlation.p0, cfg.correlation.coherence_time};
    cc.workers = workers;
    r.dataset = run_correlation_trials(cc);

    for (std::size_t k = 0; k < r.dataset.pairs.size(); ++k) {
        PairFit pf;
        pf.pair = r.dataset.pairs[k];
        // Decoupling removes the tensor part; the ground-state Zeeman part stays.
        pf.truth_hz = decoupled ? r.shifts.zeeman_gradient[pf.pair.i] - r.shifts.zeeman_gradient[pf.pair.j]
                                : r.shifts.difference(pf.pair.i, pf.pair.j);
        try {
            pf.fit = fit_parity(r.dataset, k, FitOptions{});
            pf.ok = true;
        } catch (const FitError& e) {
            pf.error = e.what();
        }
        r.fits.push_back(pf);
    }

    const std::string stem = decoupled ? "correlation_decoupled" : "correlation_plain";
    json j;
    j["decoupling"] = decoupled;
    j["theta_deg"] = cfg.correlation.theta * 180.0 / kPi;
    j["trials_per_point"] = run.trials;
    j["injected_p0"] = cfg.correlation.p0;
    j["injected_coherence_time_s"] = cfg.correlation.coherence_time;
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(fit_json(f));
    j["fits"] = fits;
    j["shifts"] = shifts_json(r.shifts);
    r.files[stem + ".csv"] = to_csv(parity_table(r.dataset));
    r.files[stem + ".json"] = json_text(j);
    return r;
}

// ---------------------------------------------------------------------------
// Quadrupole moment

struct ThetaResult {
    ThetaEstimate estimate;
    ThetaPartials partials;
    OutputFiles files;
};

inline ThetaResult run_theta(const ExperimentConfig& cfg) {
    ThetaResult r;
    r.estimate = estimate_theta(cfg.estimator);
    r.partials = sensitivity_report(cfg.estimator);
    json j;
    j["theta_ea0sq"] = r.estimate.theta_q;
    j["sigma_ea0sq"] = r.estimate.sigma;
    j["theta_at_zero_angle"] = r.estimate.theta_at_zero;
    j["theta_at_bound_angle"] = r.estimate.theta_at_bound;
    json b = json::object();
    for (const auto& e : r.estimate.breakdown) b[e.name] = e.value;
    j["breakdown"] = b;
    j["partials"] = {{"delta_f_per_hz", r.partials.delta_f},
                     {"micromotion_per_hz", r.partials.micromotion},
                     {"omega_z_per_rad_s", r.partials.omega_z},
                     {"ion_mass_per_kg", r.partials.ion_mass},
                     {"theta_bound_per_rad", r.partials.theta_bound}};
    r.files["theta.json"] = json_text(j);

    std::string table = "source                          contribution [e a0^2]\n";
    for (const auto& e : r.estimate.breakdown) {
        std::string name = e.name;
        name.resize(32, ' ');
        table += name + format_double(e.value) + "\n";
    }
    table += "theta [e a0^2]                  " + format_double(r.estimate.theta_q) + "\n";
    r.files["theta.txt"] = table;
    return r;
}

// ---------------------------------------------------------------------------
// Shift budget

struct ShiftsResult {
    AcZeemanInputs ac_inputs;
    ClockShift ac_zeeman;
    QuadraticZeemanShifts quadratic;
    OutputFiles files;
};

inline ShiftsResult run_shifts(const ExperimentConfig& cfg) {
    const ShiftsSection& s = cfg.shifts;
    ShiftsResult r;
    const AcZeemanCouplings couplings = s.couplings ? *s.couplings : default_ac_zeeman_couplings(s.model);
    r.ac_inputs = ac_zeeman_inputs(couplings, s.tau_1, s.tau_2, s.ramsey_time);
    r.ac_zeeman = ac_zeeman_clock_shift(r.ac_inputs, s.clock_frequency_hz);
    r.quadratic = quadratic_zeeman(s.quadratic_b_field, s.quadratic);

    const std::string inputs_hash = sha256_hex(cfg.source_text);
    auto entry = [&](const std::string& name, double hz) {
        return json{{"name", name},
                    {"value_hz", hz},
                    {"fractional", hz / s.clock_frequency_hz},
                    {"inputs_sha256", inputs_hash}};
    };
    json entries = json::array();
    entries.push_back(entry("ac_zeeman", r.ac_zeeman.hz));
    entries.push_back(entry("ac_zeeman_delta_1_7", angular_to_hz(r.ac_inputs.delta_1_7)));
    entries.push_back(entry("ac_zeeman_delta_1_8", angular_to_hz(r.ac_inputs.delta_1_8)));
    entries.push_back(entry("ac_zeeman_delta_2_6", angular_to_hz(r.ac_inputs.delta_2_6)));
    entries.push_back(entry("ac_zeeman_delta_2_7", angular_to_hz(r.ac_inputs.delta_2_7)));
    entries.push_back(entry("quadratic_zeeman_f6", r.quadratic.level[0]));
    entries.push_back(entry("quadratic_zeeman_f7", r.quadratic.level[1]));
    entries.push_back(entry("quadratic_zeeman_f8", r.quadratic.level[2]));
    entries.push_back(entry("quadratic_zeeman_averaged", r.quadratic.averaged));
    json j;
    j["clock_frequency_hz"] = s.clock_frequency_hz;
    j["entries"] = entries;
    j["quadratic_zeeman_level_mean_hz"] = r.quadratic.level_mean;
    j["quadratic_zeeman_discrepancy"] = r.quadratic.discrepancy;
    r.files["shifts.json"] = json_text(j);
    return r;
}

// ---------------------------------------------------------------------------
// Run manifest

inline std::string manifest_text(const ExperimentConfig& cfg, const OutputFiles& files,
                                 double seconds) {
    json j;
    j["tool"] = "lutclock";
    j["version"] = LUTCLOCK_VERSION;
    j["config_sha256"] = sha256_hex(cfg.source_text);
    j["rng_seed"] = cfg.simulation.rng_seed;
    json list = json::array();
    for (const auto& [name, text] : files) list.push_back({{"file", name}, {"sha256", sha256_hex(text)}});
    j["outputs"] = list;
    j["wall_clock_s"] = seconds;
    return json_text(j);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace lutclock::app
