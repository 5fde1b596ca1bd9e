// lutclock: runs the simulated experiments and the acceptance suite from a
// YAML config.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <lutclock/app/config.hpp>
#include <lutclock/app/experiments.hpp>
#include <lutclock/app/suite.hpp>

namespace fs = std::filesystem;
using namespace lutclock;
using namespace lutclock::app;

namespace {

struct Common {
    std::string config = "configs/three_ion.yaml";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "YAML config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "override simulation.rng_seed");
    cmd->add_option("--workers", c.workers, "worker threads (0 = one per core)");
    cmd->add_option("--out", c.out, "output directory");
}

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = load_config(c.config);
    if (c.seed) cfg.simulation.rng_seed = *c.seed;
    if (c.workers) cfg.simulation.workers = *c.workers;
    return cfg;
}

void finish(const ExperimentConfig& cfg, const Common& c, const OutputFiles& files,
            const Stopwatch& clock) {
    write_outputs(c.out, files);
    write_text(fs::path(c.out) / "manifest.json", manifest_text(cfg, files, clock.seconds()));
    for (const auto& [name, text] : files) std::printf("wrote %s\n", (fs::path(c.out) / name).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperfine-averaged Ramsey spectroscopy simulator for a multi-ion Lu+ clock"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LUTCLOCK_VERSION);

    Common fringe_opt, corr_opt, theta_opt, shifts_opt, suite_opt;
    std::string decoupling = "off";

    auto* fringe = app.add_subcommand("fringe", "microwave Ramsey fringes per ion");
    add_common(fringe, fringe_opt);
    auto* corr = app.add_subcommand("correlate", "correlation spectroscopy parity data and fits");
    add_common(corr, corr_opt);
    corr->add_option("--decoupling", decoupling, "hyperfine-averaging sequence on|off")
        ->check(CLI::IsMember({"on", "off"}));
    auto* theta = app.add_subcommand("theta", "quadrupole moment estimate");
    add_common(theta, theta_opt);
    auto* shifts = app.add_subcommand("shifts", "ac and quadratic Zeeman shift budget");
    add_common(shifts, shifts_opt);
    auto* suite = app.add_subcommand("suite", "acceptance suite with JUnit report");
    add_common(suite, suite_opt);

    CLI11_PARSE(app, argc, argv);

    try {
        const Stopwatch clock;
        if (*fringe) {
            const auto cfg = load(fringe_opt);
            const auto r = run_fringe(cfg, cfg.simulation.workers);
            for (std::size_t i = 0; i < r.centers_hz.size(); ++i) {
                std::printf("ion %zu central fringe %+.6f Hz\n", i + 1, r.centers_hz[i]);
            }
            finish(cfg, fringe_opt, r.files, clock);
        } else if (*corr) {
            const auto cfg = load(corr_opt);
            const auto r = run_correlation(cfg, decoupling == "on", cfg.simulation.workers);
            for (const auto& f : r.fits) {
                if (!f.ok) {
                    std::printf("pair %s: fit failed: %s\n", pair_label(f.pair).c_str(), f.error.c_str());
                    continue;
                }
                std::printf("pair %s: |Df| = %.6f(%.6f) Hz  p0 = %.4f  T_c = %.3g s\n",
                            pair_label(f.pair).c_str(), f.fit.delta_f, f.fit.delta_f_error(), f.fit.p0,
                            f.fit.coherence_time);
            }
            finish(cfg, corr_opt, r.files, clock);
            for (const auto& f : r.fits) {
                if (!f.ok) return 2;
            }
        } else if (*theta) {
            const auto cfg = load(theta_opt);
            const auto r = run_theta(cfg);
            std::printf("%s", r.files.at("theta.txt").c_str());
            std::printf("Theta = %.4f +- %.4f e a0^2\n", r.estimate.theta_q, r.estimate.sigma);
            finish(cfg, theta_opt, r.files, clock);
        } else if (*shifts) {
            const auto cfg = load(shifts_opt);
            const auto r = run_shifts(cfg);
            std::printf("ac Zeeman: %.4g Hz (fractional %.3g)\n", r.ac_zeeman.hz, r.ac_zeeman.fractional);
            std::printf("quadratic Zeeman: F6 %.6g Hz, F7 %.6g Hz, F8 %.6g Hz, averaged %.6g Hz%s\n",
                        r.quadratic.level[0], r.quadratic.level[1], r.quadratic.level[2],
                        r.quadratic.averaged,
                        r.quadratic.discrepancy ? " (averaged value differs from level mean)" : "");
            finish(cfg, shifts_opt, r.files, clock);
        } else if (*suite) {
            const auto cfg = load(suite_opt);
            const auto r = run_suite(cfg, suite_opt.out, cfg.simulation.workers,
                                     [](const CriterionResult& c) {
                                         std::printf("[%s] criterion %d (%s): %s\n",
                                                     c.passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                                                     c.measured.c_str());
                                         std::fflush(stdout);
                                     });
            write_text(fs::path(suite_opt.out) / "manifest.json",
                       manifest_text(cfg, r.files, clock.seconds()));
            return r.passed() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
