#pragma once

// YAML experiment configuration. Keys carry their unit as a suffix; every
// quantity is converted to SI / angular units here and nowhere else.
// Unknown keys are rejected and every error names the offending key path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "../crystal.hpp"
#include "../errors.hpp"
#include "../estimator.hpp"
#include "../levels.hpp"
#include "../protocol.hpp"
#include "../shifts.hpp"
#include "../units.hpp"

namespace lutclock::app {

struct LevelsSection {
    double omega_1_hz = 10.49e9;
    double omega_2_hz = 11.29e9; // placeholder; only differences matter
    PerLevel tensor_level_weights{-1.0, 1.0, 0.0};

    LevelSystem levels() const {
        return LevelSystem::from_splittings(0.0, hz_to_angular(omega_1_hz), hz_to_angular(omega_2_hz));
    }
};

struct TrapSection {
    TrapConfig trap;
    double quadrupole_moment = 0.634;        // e a0^2
    double ground_zeeman_hz_per_t = 3.4e6;
};

struct FringeSection {
    MicrowaveRamseyParams microwave;
    std::size_t points = 121;
    int rungs = 6;
    double window_fringes = 1.2;
};

struct SimulationSection {
    std::uint64_t rng_seed = 1;
    unsigned workers = 0;
};

struct CorrelationRun {
    double t_start = 0.1;
    double t_stop = 3.0;
    std::size_t points = 30;
    std::int64_t trials = 1000000;

    std::vector<double> times() const {
        std::vector<double> t(points);
        for (std::size_t k = 0; k < points; ++k) {
            t[k] = points == 1 ? t_start
                               : t_start + (t_stop - t_start) * static_cast<double>(k) /
                                               static_cast<double>(points - 1);
        }
        return t;
    }
};

struct CorrelationSection {
    CorrelationRun plain;
    CorrelationRun decoupled{0.5, 20.0, 40, 1000000};
    double theta = deg_to_rad(4.79);
    double p0 = 0.95;
    double coherence_time = 24.0;
};

struct ShiftsSection {
    AcZeemanModel model;
    std::optional<AcZeemanCouplings> couplings; // explicit override of the model
    double tau_1 = 0.01;
    double tau_2 = 0.01;
    double ramsey_time = 1.0;
    double clock_frequency_hz = 353.5e12;
    QuadraticZeemanSensitivities quadratic;
    double quadratic_b_field = 100e-6;
};

struct ExperimentConfig {
    LevelsSection levels;
    TrapSection trap;
    ProtocolParams protocol;
    FringeSection fringe;
    SimulationSection simulation;
    CorrelationSection correlation;
    ShiftsSection shifts;
    ThetaEstimateInputs estimator;
    std::string source_text; // exact bytes parsed, for hashing
};

namespace detail {

/// A mapping node with the set of keys already consumed, so leftovers can be
/// reported as unknown.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.IsMap()) throw ConfigError(path_, "expected a mapping");
    }

    std::string key_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node raw(const std::string& key) {
        used_.insert(key);
        const YAML::Node n = node_[key];
        if (!n) throw ConfigError(key_path(key), "missing required key");
        return n;
    }

    Section sub(const std::string& key) { return Section(raw(key), key_path(key)); }

    double number(const std::string& key) {
        const YAML::Node n = raw(key);
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) throw ConfigError(key_path(key), "must be finite");
            return v;
        } catch (const YAML::Exception&) {
            throw ConfigError(key_path(key), "expected a number");
        }
    }

    double positive(const std::string& key) {
        const double v = number(key);
        if (!(v > 0.0)) throw ConfigError(key_path(key), "must be positive");
        return v;
    }

    double non_negative(const std::string& key) {
        const double v = number(key);
        if (!(v >= 0.0)) throw ConfigError(key_path(key), "must be non-negative");
        return v;
    }

    std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi) {
        const YAML::Node n = raw(key);
        std::int64_t v = 0;
        try {
            v = n.as<std::int64_t>();
        } catch (const YAML::Exception&) {
            throw ConfigError(key_path(key), "expected an integer");
        }
        if (v < lo || v > hi) {
            throw ConfigError(key_path(key), "must be in [" + std::to_string(lo) + ", " +
                                                 std::to_string(hi) + "]");
        }
        return v;
    }

    std::uint64_t unsigned64(const std::string& key) {
        const YAML::Node n = raw(key);
        try {
            return n.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            throw ConfigError(key_path(key), "expected a non-negative integer");
        }
    }

    std::string text(const std::string& key) {
        const YAML::Node n = raw(key);
        if (!n.IsScalar()) throw ConfigError(key_path(key), "expected a string");
        return n.Scalar();
    }

    std::vector<double> numbers(const std::string& key, std::size_t expected = 0) {
        const YAML::Node n = raw(key);
        if (!n.IsSequence()) throw ConfigError(key_path(key), "expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) {
            try {
                out.push_back(n[i].as<double>());
            } catch (const YAML::Exception&) {
                throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            if (!std::isfinite(out.back())) {
                throw ConfigError(key_path(key) + "[" + std::to_string(i) + "]", "must be finite");
            }
        }
        if (expected != 0 && out.size() != expected) {
            throw ConfigError(key_path(key), "expected " + std::to_string(expected) + " entries");
        }
        return out;
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string key = it->first.as<std::string>();
            if (!used_.count(key)) throw ConfigError(key_path(key), "unknown key");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

inline PerLevel per_level(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

inline std::vector<OffResonantCoupling> coupling_list(Section& s, const std::string& key) {
    const YAML::Node n = s.raw(key);
    if (!n.IsSequence()) throw ConfigError(s.key_path(key), "expected a list of couplings");
    std::vector<OffResonantCoupling> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        Section c(n[i], s.key_path(key) + "[" + std::to_string(i) + "]");
        OffResonantCoupling oc;
        oc.rabi = hz_to_angular(c.non_negative("rabi_hz"));
        oc.detuning = hz_to_angular(c.number("detuning_hz"));
        oc.sign = c.number("sign");
        if (oc.sign != 1.0 && oc.sign != -1.0) {
            throw ConfigError(c.key_path("sign"), "must be +1 or -1");
        }
        c.finish();
        out.push_back(oc);
    }
    return out;
}

inline void parse_levels(Section s, LevelsSection& out) {
    out.omega_1_hz = s.positive("omega_1_hz");
    out.omega_2_hz = s.positive("omega_2_hz");
    out.tensor_level_weights = per_level(s.numbers("tensor_level_weights", 3));
    if (out.tensor_level_weights[1] == out.tensor_level_weights[2]) {
        throw ConfigError(s.key_path("tensor_level_weights"),
                          "F=7 and F=8 weights must differ (they set the 8<->7 shift)");
    }
    s.finish();
}

inline void parse_trap(Section s, TrapSection& out) {
    TrapConfig& t = out.trap;
    t.n_ions = static_cast<int>(s.integer("n_ions", 1, 32));
    t.omega_z = hz_to_angular(s.positive("omega_z_hz"));
    t.ion_mass = s.positive("ion_mass_u") * constants::atomic_mass_unit;
    t.theta = deg_to_rad(s.number("theta_deg"));
    t.b_field = s.non_negative("b_field_ut") * 1e-6;
    t.b_gradient = s.number("b_gradient_ut_per_m") * 1e-6;
    t.micromotion_offset = s.numbers("micromotion_offset_hz", static_cast<std::size_t>(t.n_ions));
    t.quadrupole_coupling = s.number("quadrupole_coupling");
    out.quadrupole_moment = s.number("quadrupole_moment_ea0sq");
    out.ground_zeeman_hz_per_t = s.number("ground_zeeman_hz_per_t");
    s.finish();
}

inline void parse_protocol(Section s, ProtocolParams& p) {
    p.ramsey_time = s.non_negative("ramsey_time_s");
    p.tau_1 = s.non_negative("tau_1_s");
    p.tau_2 = s.non_negative("tau_2_s");
    p.start = upper_level_from_f(static_cast<int>(s.integer("start_level", 6, 8)));
    p.optical_pi_half = s.non_negative("optical_pi_half_s");
    p.second_pulse_phase = s.number("second_pulse_phase_rad");
    const std::string model = s.text("microwave_model");
    if (model == "physical") {
        p.microwave = MicrowaveModel::physical;
    } else if (model == "ideal") {
        p.microwave = MicrowaveModel::ideal;
    } else {
        throw ConfigError(s.key_path("microwave_model"), "expected 'physical' or 'ideal'");
    }
    s.finish();
}

inline void parse_fringe(Section s, FringeSection& f) {
    f.microwave.ramsey_time = s.positive("ramsey_time_s");
    f.microwave.pi_half = s.positive("pi_half_s");
    f.points = static_cast<std::size_t>(s.integer("points", 3, 100000));
    f.rungs = static_cast<int>(s.integer("rungs", 1, 30));
    f.window_fringes = s.positive("window_fringes");
    s.finish();
}

inline void parse_simulation(Section s, SimulationSection& sim) {
    sim.rng_seed = s.unsigned64("rng_seed");
    sim.workers = static_cast<unsigned>(s.integer("workers", 0, 1024));
    s.finish();
}

inline CorrelationRun parse_run(Section s) {
    CorrelationRun r;
    r.t_start = s.positive("t_start_s");
    r.t_stop = s.positive("t_stop_s");
    if (!(r.t_stop >= r.t_start)) throw ConfigError(s.key_path("t_stop_s"), "must be >= t_start_s");
    r.points = static_cast<std::size_t>(s.integer("points", 4, 100000));
    r.trials = s.integer("trials", 2, std::int64_t{1} << 40);
    s.finish();
    return r;
}

inline void parse_correlation(Section s, CorrelationSection& c) {
    c.plain = parse_run(s.sub("plain"));
    c.decoupled = parse_run(s.sub("decoupled"));
    c.theta = deg_to_rad(s.number("theta_deg"));
    c.p0 = s.number("p0");
    if (!(c.p0 >= 0.0 && c.p0 <= 1.0)) throw ConfigError(s.key_path("p0"), "must lie in [0, 1]");
    c.coherence_time = s.positive("coherence_time_s");
    s.finish();
}

inline void parse_shifts(Section s, ShiftsSection& sh) {
    AcZeemanModel& m = sh.model;
    {
        Section pt = s.sub("pi_times_ms");
        const auto f6 = pt.numbers("f6", 3);
        const auto f8 = pt.numbers("f8", 3);
        for (int i = 0; i < 3; ++i) {
            m.pi_times.f6[i] = f6[i] * 1e-3;
            m.pi_times.f8[i] = f8[i] * 1e-3;
            if (!(f6[i] > 0.0) || !(f8[i] > 0.0)) {
                throw ConfigError(pt.key_path(!(f6[i] > 0.0) ? "f6" : "f8"), "pi times must be positive");
            }
        }
        pt.finish();
    }
    m.table_rabi_reference = s.positive("table_reference_pi_time_s");
    m.pulse_pi_time = s.positive("pulse_pi_time_s");
    m.b_field = s.non_negative("b_field_ut") * 1e-6;
    m.g_factor = per_level(s.numbers("g_factors", 3));
    m.cg_ratio_8 = s.positive("cg_ratio_8");
    m.cg_ratio_6 = s.positive("cg_ratio_6");
    if (s.has("couplings")) {
        Section c = s.sub("couplings");
        AcZeemanCouplings cc;
        cc.c_1_7 = coupling_list(c, "delta_1_7");
        cc.c_1_8 = coupling_list(c, "delta_1_8");
        cc.c_2_6 = coupling_list(c, "delta_2_6");
        cc.c_2_7 = coupling_list(c, "delta_2_7");
        c.finish();
        sh.couplings = cc;
    }
    sh.tau_1 = s.positive("tau_1_s");
    sh.tau_2 = s.positive("tau_2_s");
    sh.ramsey_time = s.positive("ramsey_time_s");
    sh.clock_frequency_hz = s.positive("clock_frequency_hz");
    const auto q = s.numbers("quadratic_zeeman_mhz_per_ut2", 3);
    for (int i = 0; i < 3; ++i) sh.quadratic.level[i] = q[i] * 1e-3 * 1e12;
    sh.quadratic.averaged = s.number("quadratic_zeeman_avg_uhz_per_ut2") * 1e-6 * 1e12;
    sh.quadratic_b_field = s.non_negative("quadratic_zeeman_b_field_ut") * 1e-6;
    s.finish();
}

inline void parse_estimator(Section s, ThetaEstimateInputs& e) {
    e.delta_f = s.number("delta_f_hz");
    e.delta_f_sigma = s.non_negative("delta_f_sigma_hz");
    e.micromotion = s.number("micromotion_hz");
    e.micromotion_sigma = s.non_negative("micromotion_sigma_hz");
    e.omega_z = hz_to_angular(s.positive("omega_z_hz"));
    e.omega_z_sigma = hz_to_angular(s.non_negative("omega_z_sigma_hz"));
    e.theta_bound = deg_to_rad(s.non_negative("theta_bound_deg"));
    e.ion_mass = s.positive("ion_mass_u") * constants::atomic_mass_unit;
    try {
        e.validate();
    } catch (const DomainError& err) {
        throw ConfigError(s.key_path("theta_bound_deg"), err.what());
    }
    s.finish();
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<root>", std::string("YAML parse error: ") + e.what());
    }
    if (!root || !root.IsMap()) throw ConfigError("<root>", "expected a mapping");

    ExperimentConfig cfg;
    cfg.source_text = text;
    detail::Section s(root, "");
    detail::parse_levels(s.sub("levels"), cfg.levels);
    detail::parse_trap(s.sub("trap"), cfg.trap);
    detail::parse_protocol(s.sub("protocol"), cfg.protocol);
    detail::parse_fringe(s.sub("fringe"), cfg.fringe);
    detail::parse_simulation(s.sub("simulation"), cfg.simulation);
    detail::parse_correlation(s.sub("correlation"), cfg.correlation);
    detail::parse_shifts(s.sub("shifts"), cfg.shifts);
    detail::parse_estimator(s.sub("estimator"), cfg.estimator);
    s.finish();

    try {
        cfg.levels.levels();
        cfg.trap.trap.validate();
        cfg.protocol.validate();
    } catch (const DomainError& e) {
        throw ConfigError("<root>", e.what());
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace lutclock::app
