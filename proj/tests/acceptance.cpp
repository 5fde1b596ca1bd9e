// Runs the acceptance suite and prints one line per criterion.
//   acceptance <config.yaml> <output dir>

#include <cstdio>
#include <exception>

#include <lutclock/app/config.hpp>
#include <lutclock/app/suite.hpp>

int main(int argc, char** argv) {
    using namespace lutclock::app;
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <config.yaml> <output dir>\n", argv[0]);
        return 2;
    }
    try {
        const ExperimentConfig cfg = load_config(argv[1]);
        const SuiteResult r = run_suite(cfg, argv[2], cfg.simulation.workers, [](const CriterionResult& c) {
            std::printf("criterion %2d %s: %s | measured %s | expected %s\n", c.id,
                        c.passed ? "PASS" : "FAIL", c.name.c_str(), c.measured.c_str(),
                        c.expected.c_str());
            std::fflush(stdout);
        });
        std::size_t passed = 0;
        for (const auto& c : r.criteria) passed += c.passed ? 1 : 0;
        std::printf("%zu/%zu criteria passed\n", passed, r.criteria.size());
        return r.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: %s\n", e.what());
        return 2;
    }
}
