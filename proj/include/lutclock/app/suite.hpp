#pragma once

// Acceptance suite: each criterion runs its experiment, writes its data, and
// reports measured against expected. Criterion 10 reruns 1-9 with a different
// worker count and compares every data file byte for byte.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../correlation.hpp"
#include "../crystal.hpp"
#include "../dynamics.hpp"
#include "../estimator.hpp"
#include "../protocol.hpp"
#include "../rng.hpp"
#include "../shifts.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "io.hpp"

namespace lutclock::app {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string measured;
    std::string expected;
};

struct SuiteResult {
    std::vector<CriterionResult> criteria;
    OutputFiles files; // data written by criteria 1-9 plus criteria.json and report.xml

    bool passed() const {
        return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
    }
};

namespace suite_detail {

inline std::string fmt(double v, int digits = 6) {
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

/// Random streams for the suite's own draws; distinct from correlation runs.
inline constexpr std::uint32_t kStreamInvariance = 0x30001u;
inline constexpr std::uint32_t kStreamPhase = 0x30002u;
inline constexpr std::uint32_t kStreamNumerics = 0x30009u;

/// Zero-sum triple with every component within +-limit.
inline PerLevel zero_sum_triple(TrialRng& rng, double limit) {
    for (;;) {
        const double a = limit * (2.0 * rng.uniform() - 1.0);
        const double b = limit * (2.0 * rng.uniform() - 1.0);
        const double c = -a - b;
        if (std::abs(c) <= limit) return {a, b, c};
    }
}

// 1 -------------------------------------------------------------------------
inline CriterionResult invariance(const ExperimentConfig& cfg, unsigned workers, OutputFiles& files) {
    constexpr int kDraws = 100;
    constexpr double kLimitHz = 5.0;
    struct Row {
        PerLevel eps_hz{};
        double decoupled = 0.0, plain = 0.0, physical = 0.0; // Hz
    };
    std::vector<Row> rows(kDraws);
    FringeTrackOptions opt;
    opt.rungs = cfg.fringe.rungs;
    opt.window_fringes = cfg.fringe.window_fringes;
    opt.points = cfg.fringe.points;

    parallel_for(kDraws, workers, [&](std::size_t k) {
        TrialRng rng(cfg.simulation.rng_seed, k, kStreamInvariance);
        Row& row = rows[k];
        row.eps_hz = zero_sum_triple(rng, kLimitHz);
        RamseyScenario sc{cfg.levels.levels(), {}, 0.0, cfg.protocol, cfg.fringe.microwave};
        sc.offsets = {hz_to_angular(row.eps_hz[0]), hz_to_angular(row.eps_hz[1]),
                      hz_to_angular(row.eps_hz[2])};
        sc.params.microwave = MicrowaveModel::ideal;
        row.decoupled = angular_to_hz(track_central_fringe(sc, SequenceKind::decoupled, opt));
        row.plain = angular_to_hz(track_central_fringe(sc, SequenceKind::plain, opt));
        sc.params.microwave = MicrowaveModel::physical;
        row.physical = angular_to_hz(track_central_fringe(sc, SequenceKind::decoupled, opt));
    });

    CsvTable t{{"draw [index]", "eps6 [Hz]", "eps7 [Hz]", "eps8 [Hz]", "decoupled_center [Hz]",
                "plain_center [Hz]", "plain_error [Hz]", "physical_pulse_center [Hz]"},
               {}};
    double worst_dec = 0.0, worst_plain = 0.0, worst_phys = 0.0;
    for (int k = 0; k < kDraws; ++k) {
        const Row& r = rows[k];
        const double expect = r.eps_hz[index_of(cfg.protocol.start)];
        worst_dec = std::max(worst_dec, std::abs(r.decoupled));
        worst_plain = std::max(worst_plain, std::abs(r.plain - expect));
        worst_phys = std::max(worst_phys, std::abs(r.physical));
        t.rows.push_back({double(k), r.eps_hz[0], r.eps_hz[1], r.eps_hz[2], r.decoupled, r.plain,
                          r.plain - expect, r.physical});
    }
    files["c01_invariance.csv"] = to_csv(t);
    return {1, "hyperfine-averaging invariance", worst_dec <= 1e-3 && worst_plain <= 5e-3,
            "max |decoupled centre| = " + fmt(worst_dec * 1e3) + " mHz, max plain error = " +
                fmt(worst_plain * 1e3) + " mHz (physical pulses, not gated: " +
                fmt(worst_phys * 1e3) + " mHz)",
            "decoupled <= 1 mHz, plain <= 5 mHz over 100 draws"};
}

// 2 -------------------------------------------------------------------------
inline CriterionResult phase_ledger(const ExperimentConfig& cfg, unsigned workers, OutputFiles& files) {
    constexpr int kDraws = 1000;
    struct Row {
        PerLevel delta_hz{};
        double tau_1 = 0, tau_2 = 0, T = 0, ledger = 0, simulated = 0, diff = 0;
        bool zero_sum = true;
    };
    std::vector<Row> rows(2 * kDraws);
    parallel_for(rows.size(), workers, [&](std::size_t k) {
        TrialRng rng(cfg.simulation.rng_seed, k, kStreamPhase);
        Row& r = rows[k];
        r.zero_sum = k < kDraws;
        if (r.zero_sum) {
            r.delta_hz = zero_sum_triple(rng, 5.0);
        } else {
            for (double& d : r.delta_hz) d = 5.0 * (2.0 * rng.uniform() - 1.0);
        }
        r.tau_1 = 0.02 * rng.uniform();
        r.tau_2 = 0.02 * rng.uniform();
        r.T = 2.0 * rng.uniform();
        const double delta = hz_to_angular(5.0 * (2.0 * rng.uniform() - 1.0));
        ProtocolParams p = cfg.protocol;
        p.ramsey_time = r.T;
        p.tau_1 = r.tau_1;
        p.tau_2 = r.tau_2;
        p.microwave = MicrowaveModel::ideal;
        const FrameParams frame = explicit_frame(
            delta, {hz_to_angular(r.delta_hz[0]), hz_to_angular(r.delta_hz[1]), hz_to_angular(r.delta_hz[2])},
            p.start);
        r.ledger = upper_phase_ledger(p, frame);
        r.simulated = simulated_upper_phase(p, frame);
        r.diff = wrap_phase(r.simulated - r.ledger);
    });
    CsvTable t{{"draw [index]", "zero_sum [flag]", "delta6 [Hz]", "delta7 [Hz]", "delta8 [Hz]",
                "tau1 [s]", "tau2 [s]", "T [s]", "ledger [rad]", "simulated [rad]", "difference [rad]"},
               {}};
    double worst = 0.0, worst_free = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Row& r = rows[k];
        double& w = r.zero_sum ? worst : worst_free;
        w = std::max(w, std::abs(r.diff));
        t.rows.push_back({double(k), r.zero_sum ? 1.0 : 0.0, r.delta_hz[0], r.delta_hz[1], r.delta_hz[2],
                          r.tau_1, r.tau_2, r.T, r.ledger, r.simulated, r.diff});
    }
    files["c02_phase_ledger.csv"] = to_csv(t);
    return {2, "upper-state phase ledger", worst <= 1e-9 && worst_free <= 1e-9,
            "max |simulated - ledger| = " + fmt(worst, 3) + " rad (zero-sum), " + fmt(worst_free, 3) +
                " rad (unconstrained)",
            "<= 1e-9 rad over 1000 zero-sum and 1000 unconstrained draws"};
}

// 3 -------------------------------------------------------------------------
inline CriterionResult microwave_fringe(const ExperimentConfig& cfg, unsigned workers,
                                        OutputFiles& files) {
    const FringeResult r = run_fringe(cfg, workers);
    for (const auto& [k, v] : r.files) files["c03_" + k] = v;
    if (r.centers_hz.size() != 3) {
        return {3, "microwave fringe offset", false, "n_ions != 3", "three-ion crystal"};
    }
    const double a = r.middle_minus(0), b = r.middle_minus(2);
    const bool ok = std::abs(a - 0.59) <= 0.01 && std::abs(b - 0.59) <= 0.01;
    return {3, "microwave fringe offset", ok,
            "middle - outer = " + fmt(a) + " Hz, " + fmt(b) + " Hz", "0.59 +- 0.01 Hz"};
}

// 4 -------------------------------------------------------------------------
inline constexpr double kReferenceDifference = 0.589;      // Hz
inline constexpr double kReferenceDifferenceSigma = 0.0032; // Hz

inline CriterionResult correlation_plain(const ExperimentConfig& cfg, unsigned workers,
                                         OutputFiles& files) {
    const CorrelationResult r = run_correlation(cfg, false, workers);
    for (const auto& [k, v] : r.files) files["c04_" + k] = v;
    if (r.shifts.total.size() != 3) return {4, "correlation without decoupling", false, "n_ions != 3", ""};
    const auto& f12 = r.fit_for(0, 1);
    const auto& f23 = r.fit_for(1, 2);
    const auto& f13 = r.fit_for(0, 2);
    if (!f12.ok || !f23.ok || !f13.ok) {
        return {4, "correlation without decoupling", false, "fit failed", "converged fits"};
    }
    auto within = [](const PairFit& f) {
        const double s = std::hypot(f.fit.delta_f_error(), kReferenceDifferenceSigma);
        return std::abs(f.fit.delta_f - kReferenceDifference) <= 2.0 * s;
    };
    const double gradient_only = std::abs(r.shifts.zeeman_gradient[0] - r.shifts.zeeman_gradient[2]);
    const bool ok = within(f12) && within(f23) && f13.fit.delta_f < 0.015 &&
                    std::abs(gradient_only - 0.0087) <= 0.0002;
    return {4, "correlation without decoupling", ok,
            "Df12 = " + fmt(f12.fit.delta_f) + "(" + fmt(f12.fit.delta_f_error(), 2) + ") Hz, Df23 = " +
                fmt(f23.fit.delta_f) + "(" + fmt(f23.fit.delta_f_error(), 2) + ") Hz, |Df13| = " +
                fmt(f13.fit.delta_f * 1e3, 4) + " mHz, gradient-only Df13 = " +
                fmt(gradient_only * 1e3, 4) + " mHz",
            "Df12, Df23 within 2 sigma of 0.589(3.2 m) Hz; |Df13| < 15 mHz; gradient-only ~8.7 mHz"};
}

// 5 -------------------------------------------------------------------------
inline CriterionResult correlation_decoupled(const ExperimentConfig& cfg, unsigned workers,
                                             OutputFiles& files) {
    const CorrelationResult r = run_correlation(cfg, true, workers);
    for (const auto& [k, v] : r.files) files["c05_" + k] = v;
    if (r.shifts.total.size() != 3) return {5, "correlation with decoupling", false, "n_ions != 3", ""};
    bool ok = true;
    std::string measured;
    for (const auto& f : r.fits) {
        if (!f.ok) {
            ok = false;
            measured += "pair " + pair_label(f.pair) + " fit failed; ";
            continue;
        }
        const bool adjacent = f.pair.j == f.pair.i + 1;
        if (adjacent && !(f.fit.delta_f < 0.005)) ok = false;
        if (!(f.fit.coherence_time >= 18.0 && f.fit.coherence_time <= 30.0)) ok = false;
        measured += "pair " + pair_label(f.pair) + ": |Df| = " + fmt(f.fit.delta_f * 1e3, 4) +
                    " mHz, T_c = " + fmt(f.fit.coherence_time, 4) + " s; ";
    }
    if (measured.size() >= 2) measured.resize(measured.size() - 2);
    return {5, "correlation with decoupling", ok, measured,
            "|Df12|, |Df23| < 5 mHz; T_c in [18, 30] s"};
}

// 6 -------------------------------------------------------------------------
inline CriterionResult quadrupole_moment(const ExperimentConfig& cfg, OutputFiles& files) {
    const ThetaResult r = run_theta(cfg);
    for (const auto& [k, v] : r.files) files["c06_" + k] = v;

    // Forward through the crystal at 0.655 e a0^2, then invert.
    constexpr double kTheta0 = 0.655;
    TrapConfig trap = cfg.trap.trap;
    trap.n_ions = 3;
    trap.theta = 0.0;
    trap.micromotion_offset.clear();
    const auto q = quadrupole_shifts(equilibrium_positions(trap), trap, kTheta0);
    ThetaEstimateInputs in = cfg.estimator;
    in.delta_f = q[1] - q[0];
    in.micromotion = 0.0;
    in.delta_f_sigma = in.micromotion_sigma = in.omega_z_sigma = 0.0;
    in.theta_bound = 0.0;
    in.omega_z = trap.omega_z;
    in.ion_mass = trap.ion_mass;
    const double back = estimate_theta(in).theta_q;
    const double rel = std::abs(back - kTheta0) / kTheta0;

    const auto& e = r.estimate;
    const bool ok = e.theta_q >= 0.624 && e.theta_q <= 0.644 && e.sigma >= 0.007 && e.sigma <= 0.011 &&
                    rel <= 1e-9;
    files["c06_round_trip.json"] = json_text(json{{"theta_in_ea0sq", kTheta0},
                                                  {"delta_f_hz", in.delta_f},
                                                  {"theta_out_ea0sq", back},
                                                  {"relative_error", rel}});
    return {6, "quadrupole moment", ok,
            "Theta = " + fmt(e.theta_q, 5) + " +- " + fmt(e.sigma, 3) + " e a0^2, round trip " +
                fmt(rel, 3),
            "Theta in [0.624, 0.644], sigma in [0.007, 0.011], round trip <= 1e-9"};
}

// 7 -------------------------------------------------------------------------
inline CriterionResult ac_zeeman(const ExperimentConfig& cfg, OutputFiles& files) {
    ExperimentConfig c = cfg;
    c.shifts.tau_1 = c.shifts.tau_2 = 0.01;
    c.shifts.ramsey_time = 1.0;
    c.shifts.model.pulse_pi_time = 0.01;
    const ShiftsResult r = run_shifts(c);
    files["c07_shifts.json"] = r.files.at("shifts.json");
    const double f = std::abs(r.ac_zeeman.fractional);
    return {7, "ac Zeeman budget", f >= 5e-21 && f <= 8e-20,
            "fractional shift = " + fmt(r.ac_zeeman.fractional, 4), "[5e-21, 8e-20]"};
}

// 8 -------------------------------------------------------------------------
inline CriterionResult quadratic(const ExperimentConfig& cfg, OutputFiles& files) {
    const auto q = quadratic_zeeman(100e-6, cfg.shifts.quadratic);
    const PerLevel want{22.7, -1.2, -21.5};
    bool ok = std::abs(q.averaged - (-0.047)) <= 1e-12;
    for (int i = 0; i < 3; ++i) ok = ok && std::abs(q.level[i] - want[i]) <= 1e-12 * std::abs(want[i]);
    json j{{"b_field_t", 100e-6},
           {"level_hz", q.level},
           {"averaged_hz", q.averaged},
           {"level_mean_hz", q.level_mean},
           {"discrepancy", q.discrepancy}};
    files["c08_quadratic_zeeman.json"] = json_text(j);
    return {8, "quadratic Zeeman", ok,
            "(" + fmt(q.level[0], 12) + ", " + fmt(q.level[1], 12) + ", " + fmt(q.level[2], 12) +
                ") Hz, averaged " + fmt(q.averaged, 12) + " Hz",
            "(22.7, -1.2, -21.5) Hz, averaged -0.047 Hz"};
}

// 9 -------------------------------------------------------------------------
inline PulseSegment random_segment(TrialRng& rng) {
    auto hz = [&](double lim) { return hz_to_angular(lim * (2.0 * rng.uniform() - 1.0)); };
    PulseSegment s;
    s.duration = rng.uniform();
    s.frame = explicit_frame(hz(50.0), {hz(50.0), hz(50.0), hz(50.0)},
                             kUpperLevels[static_cast<std::size_t>(3.0 * rng.uniform()) % 3]);
    s.optical = {hz_to_angular(100.0 * rng.uniform()), kTwoPi * rng.uniform()};
    s.mw1 = {hz_to_angular(100.0 * rng.uniform()), kTwoPi * rng.uniform()};
    s.mw2 = {hz_to_angular(100.0 * rng.uniform()), kTwoPi * rng.uniform()};
    return s;
}

inline StateVector random_state(TrialRng& rng) {
    StateVector s;
    for (int i = 0; i < 4; ++i) s[i] = Complex(rng.normal(), rng.normal());
    s.amp.normalize();
    return s;
}

inline CriterionResult numerics(const ExperimentConfig& cfg, OutputFiles& files) {
    const std::uint64_t seed = cfg.simulation.rng_seed;
    json j;

    double unitarity = 0.0, composition = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        TrialRng rng(seed, k, kStreamNumerics);
        const PulseSegment seg = random_segment(rng);
        const Matrix4 u = segment_propagator(seg);
        unitarity = std::max(unitarity, (u.adjoint() * u - Matrix4::Identity()).cwiseAbs().maxCoeff());
        const StateVector psi = random_state(rng);
        unitarity = std::max(unitarity, std::abs(evolve_segment(psi, seg).norm() - 1.0));

        PulseSegment a = seg, b = seg;
        const double split = rng.uniform();
        a.duration = seg.duration * split;
        b.duration = seg.duration - a.duration;
        const StateVector two = evolve_segment(evolve_segment(psi, a), b);
        composition = std::max(composition, (two.amp - evolve_segment(psi, seg).amp).cwiseAbs().maxCoeff());
    }
    j["unitarity_max"] = unitarity;
    j["composition_max"] = composition;

    // Detuned two-level drive g <-> F against the Rabi formula.
    double rabi_err = 0.0;
    for (std::uint64_t k = 0; k < 1000; ++k) {
        TrialRng rng(seed, k + 1000, kStreamNumerics);
        const double omega = hz_to_angular(1.0 + 99.0 * rng.uniform());
        const double detuning = hz_to_angular(200.0 * (2.0 * rng.uniform() - 1.0));
        const double t = 0.1 * rng.uniform();
        PulseSegment s;
        s.duration = t;
        s.frame = explicit_frame(detuning, {0.0, 0.0, 0.0}, UpperLevel::F7);
        s.optical = {omega, kTwoPi * rng.uniform()};
        const double got = evolve_segment(StateVector::ground(), s).population(UpperLevel::F7);
        const double w2 = omega * omega + detuning * detuning;
        const double sn = std::sin(std::sqrt(w2) * t / 2.0);
        rabi_err = std::max(rabi_err, std::abs(got - omega * omega / w2 * sn * sn));
    }
    j["rabi_formula_max"] = rabi_err;

    const auto u2 = dimensionless_equilibrium(2);
    const auto u3 = dimensionless_equilibrium(3);
    const double a2 = std::cbrt(0.25), a3 = std::cbrt(1.25);
    const double eq_err = std::max({std::abs(u2[0] + a2), std::abs(u2[1] - a2), std::abs(u3[0] + a3),
                                    std::abs(u3[1]), std::abs(u3[2] - a3)});
    j["equilibrium_max"] = eq_err;

    // Analytic partials against central differences.
    double grad_err = 0.0;
    for (std::uint64_t k = 0; k < 11; ++k) {
        ThetaEstimateInputs in = cfg.estimator;
        if (k > 0) {
            TrialRng rng(seed, k + 3000, kStreamNumerics);
            in.delta_f = 0.3 + 0.6 * rng.uniform();
            in.micromotion = 0.02 * (2.0 * rng.uniform() - 1.0);
            in.omega_z = hz_to_angular(5e4 + 2e5 * rng.uniform());
            in.theta_bound = deg_to_rad(1.0 + 19.0 * rng.uniform());
        }
        const ThetaPartials p = sensitivity_report(in);
        auto check = [&](double analytic, double ThetaEstimateInputs::*field) {
            const double h = 1e-5 * std::abs(in.*field);
            ThetaEstimateInputs lo = in, hi = in;
            lo.*field -= h;
            hi.*field += h;
            const double fd = (theta_center(hi) - theta_center(lo)) / (2.0 * h);
            grad_err = std::max(grad_err, std::abs(fd - analytic) / std::abs(analytic));
        };
        check(p.delta_f, &ThetaEstimateInputs::delta_f);
        check(p.micromotion, &ThetaEstimateInputs::micromotion);
        check(p.omega_z, &ThetaEstimateInputs::omega_z);
        check(p.ion_mass, &ThetaEstimateInputs::ion_mass);
        check(p.theta_bound, &ThetaEstimateInputs::theta_bound);
    }
    j["estimator_gradient_max_rel"] = grad_err;

    // Monte-Carlo parity against the closed form.
    double mc_worst = 0.0; // in units of 1/sqrt(n)
    constexpr std::int64_t kTrials = 20000;
    const LevelSystem levels = cfg.levels.levels();
    for (std::uint64_t k = 0; k < 20; ++k) {
        TrialRng rng(seed, k + 4000, kStreamNumerics);
        const double df = 2.0 * rng.uniform();
        const double t = 0.05 + 2.0 * rng.uniform();
        const double p0 = 0.5 + 0.5 * rng.uniform();
        const double tc = 1.0 + 30.0 * rng.uniform();
        CorrelationConfig cc;
        for (double shift : {0.0, df}) {
            RamseyScenario sc{levels, {}, hz_to_angular(shift), cfg.protocol, cfg.fringe.microwave};
            cc.ions.push_back(sc);
        }
        cc.kind = SequenceKind::plain;
        cc.times = {t};
        cc.n_trials = kTrials;
        cc.rng_seed = seed;
        cc.stream_base = 0x40000u + static_cast<std::uint32_t>(k);
        cc.dephasing = {p0, tc};
        const ParityDataset ds = run_correlation_trials(cc);
        const double expect = parity_expectation(df, t, p0 * p0 * std::exp(-t / tc));
        mc_worst = std::max(mc_worst, std::abs(ds.parity[0][0] - expect) * std::sqrt(double(kTrials)));
    }
    j["monte_carlo_max_sqrt_n_deviation"] = mc_worst;
    files["c09_numerics.json"] = json_text(j);

    const bool ok = unitarity <= 1e-12 && composition <= 1e-12 && rabi_err <= 1e-10 && eq_err <= 1e-10 &&
                    grad_err <= 1e-6 && mc_worst <= 5.0;
    return {9, "numerics properties", ok,
            "unitarity " + fmt(unitarity, 3) + ", composition " + fmt(composition, 3) + ", Rabi " +
                fmt(rabi_err, 3) + ", equilibrium " + fmt(eq_err, 3) + ", gradient " + fmt(grad_err, 3) +
                ", MC " + fmt(mc_worst, 3) + "/sqrt(n)",
            "1e-12, 1e-12, 1e-10, 1e-10, 1e-6 rel, 5/sqrt(n)"};
}

inline json criteria_json(const std::vector<CriterionResult>& rs) {
    json arr = json::array();
    for (const auto& c : rs) {
        arr.push_back({{"id", c.id},
                       {"name", c.name},
                       {"passed", c.passed},
                       {"measured", c.measured},
                       {"expected", c.expected}});
    }
    return arr;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace suite_detail

inline std::string junit_report(const std::vector<CriterionResult>& rs) {
    using suite_detail::xml_escape;
    int failures = 0;
    for (const auto& c : rs) failures += c.passed ? 0 : 1;
    std::string x = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    x += "<testsuite name=\"lutclock-acceptance\" tests=\"" + std::to_string(rs.size()) +
         "\" failures=\"" + std::to_string(failures) + "\">\n";
    for (const auto& c : rs) {
        x += "  <testcase classname=\"acceptance\" name=\"criterion " + std::to_string(c.id) + ": " +
             xml_escape(c.name) + "\">\n";
        x += "    <system-out>measured: " + xml_escape(c.measured) + "\nexpected: " +
             xml_escape(c.expected) + "</system-out>\n";
        if (!c.passed) {
            x += "    <failure message=\"" + xml_escape(c.measured) + "\">expected " +
                 xml_escape(c.expected) + "</failure>\n";
        }
        x += "  </testcase>\n";
    }
    x += "</testsuite>\n";
    return x;
}

/// Criteria 1-9. `on_result` is called as each criterion finishes.
inline std::vector<CriterionResult> run_criteria(
    const ExperimentConfig& cfg, unsigned workers, OutputFiles& files,
    const std::function<void(const CriterionResult&)>& on_result = {}) {
    using namespace suite_detail;
    std::vector<std::function<CriterionResult()>> steps{
        [&] { return invariance(cfg, workers, files); },
        [&] { return phase_ledger(cfg, workers, files); },
        [&] { return microwave_fringe(cfg, workers, files); },
        [&] { return correlation_plain(cfg, workers, files); },
        [&] { return correlation_decoupled(cfg, workers, files); },
        [&] { return quadrupole_moment(cfg, files); },
        [&] { return ac_zeeman(cfg, files); },
        [&] { return quadratic(cfg, files); },
        [&] { return numerics(cfg, files); },
    };
    std::vector<CriterionResult> out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        CriterionResult r;
        try {
            r = steps[i]();
        } catch (const std::exception& e) {
            r = {static_cast<int>(i + 1), "criterion " + std::to_string(i + 1), false,
                 std::string("error: ") + e.what(), "completes without error"};
        }
        if (on_result) on_result(r);
        out.push_back(r);
    }
    files["criteria.json"] = json_text(criteria_json(out));
    return out;
}

/// Full suite: criteria 1-9 into `out`, then a rerun with another worker
/// count into `out/.determinism` for criterion 10.
inline SuiteResult run_suite(const ExperimentConfig& cfg, const std::filesystem::path& out,
                             unsigned workers,
                             const std::function<void(const CriterionResult&)>& on_result = {}) {
    SuiteResult res;
    const unsigned w1 = resolve_workers(workers);
    res.criteria = run_criteria(cfg, w1, res.files, on_result);
    write_outputs(out, res.files);

    const unsigned w2 = w1 == 1 ? 3 : 1;
    OutputFiles second;
    run_criteria(cfg, w2, second);
    const std::filesystem::path again = out / ".determinism";
    write_outputs(again, second);

    std::vector<std::string> differing;
    for (const auto& [name, text] : res.files) {
        std::string on_disk;
        try {
            on_disk = read_text(again / name);
        } catch (const Error&) {
            differing.push_back(name + " (missing)");
            continue;
        }
        if (on_disk != read_text(out / name)) differing.push_back(name);
    }
    if (second.size() != res.files.size()) differing.push_back("(file sets differ)");
    CriterionResult c10{10, "determinism", differing.empty(),
                        std::to_string(res.files.size()) + " files compared (workers " +
                            std::to_string(w1) + " vs " + std::to_string(w2) + "), " +
                            std::to_string(differing.size()) + " differ",
                        "byte-identical outputs"};
    for (const auto& d : differing) c10.measured += "; " + d;
    if (on_result) on_result(c10);
    res.criteria.push_back(c10);

    const std::string report = junit_report(res.criteria);
    res.files["report.xml"] = report;
    write_text(out / "report.xml", report);
    return res;
}

} // namespace lutclock::app
