#include <gtest/gtest.h>

#include <lutclock/correlation.hpp>

using namespace lutclock;

namespace {

std::vector<RamseyScenario> two_ions(double df_hz) {
    RamseyScenario sc{LevelSystem::from_splittings(0.0, hz_to_angular(10.49e9), hz_to_angular(11.29e9)),
                      {}, 0.0, {}, {}};
    sc.params.microwave = MicrowaveModel::ideal;
    RamseyScenario other = sc;
    other.common_shift = hz_to_angular(df_hz);
    return {sc, other};
}

} // namespace

TEST(Parity, PairsAndEstimates) {
    const auto p = all_pairs(3);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[2].i, 1u);
    EXPECT_EQ(p[2].j, 2u);

    const auto e = estimate_parity({1, 1, -1, 1}, {1, -1, -1, 1});
    EXPECT_DOUBLE_EQ(e.value, 0.5);
    EXPECT_NEAR(e.standard_error, std::sqrt(0.75 / 3.0), 1e-15);

    const auto all = estimate_parity(100, 100);
    EXPECT_DOUBLE_EQ(all.value, 1.0);
    EXPECT_GT(all.standard_error, 0.0);
    EXPECT_THROW(estimate_parity(1, 1), DomainError);
}

TEST(Parity, AccumulatorMergesExactly) {
    const auto pairs = all_pairs(3);
    ParityAccumulator a(3), b(3), all(3);
    const int o1[] = {1, -1, 1}, o2[] = {-1, -1, 1};
    a.add(pairs, o1);
    b.add(pairs, o2);
    all.add(pairs, o1);
    all.add(pairs, o2);
    a.merge(b);
    EXPECT_EQ(a.product_sum, all.product_sum);
    EXPECT_EQ(a.trials, 2);
}

TEST(Correlation, MonteCarloMatchesExpectation) {
    CorrelationConfig cfg;
    cfg.ions = two_ions(0.25);
    cfg.kind = SequenceKind::plain;
    cfg.times = {0.3, 1.0, 1.7};
    cfg.n_trials = 40000;
    cfg.rng_seed = 5;
    cfg.dephasing = {0.9, 10.0};
    const auto ds = run_correlation_trials(cfg);
    for (std::size_t k = 0; k < cfg.times.size(); ++k) {
        const double t = cfg.times[k];
        const double expect = parity_expectation(0.25, t, 0.81 * std::exp(-t / 10.0));
        EXPECT_NEAR(ds.parity[0][k], expect, 5.0 / std::sqrt(double(cfg.n_trials)));
    }
}

TEST(Correlation, DecoupledRemovesTensorDifference) {
    auto ions = two_ions(0.0);
    ions[1].offsets = {hz_to_angular(-0.5), hz_to_angular(0.5), 0.0};
    CorrelationConfig cfg;
    cfg.ions = ions;
    cfg.kind = SequenceKind::decoupled;
    cfg.times = {3.0};
    cfg.n_trials = 40000;
    const auto ds = run_correlation_trials(cfg);
    EXPECT_NEAR(ds.parity[0][0], 0.5, 5.0 / std::sqrt(double(cfg.n_trials)));
}

TEST(Correlation, WorkerCountDoesNotChangeResults) {
    CorrelationConfig cfg;
    cfg.ions = two_ions(0.4);
    cfg.times = {0.5, 1.5};
    cfg.n_trials = 3 * kTrialChunk + 17;
    cfg.dephasing = {0.95, 5.0};
    cfg.workers = 1;
    const auto a = run_correlation_trials(cfg);
    cfg.workers = 3;
    const auto b = run_correlation_trials(cfg);
    EXPECT_EQ(a.parity, b.parity);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Correlation, TrialIsAddressable) {
    CorrelationConfig cfg;
    cfg.ions = two_ions(0.4);
    cfg.times = {0.5};
    cfg.rng_seed = 11;
    EXPECT_EQ(simulate_trial(cfg, 0, 1234), simulate_trial(cfg, 0, 1234));
}

TEST(Correlation, RejectsBadConfig) {
    CorrelationConfig cfg;
    cfg.ions = two_ions(0.0);
    cfg.times = {0.5};
    cfg.dephasing.p0 = 1.5;
    EXPECT_THROW(run_correlation_trials(cfg), DomainError);
    EXPECT_THROW(ramsey_time_for(0.01, ProtocolParams{}, SequenceKind::decoupled), DomainError);
}

TEST(Fit, RecoversNoiselessParameters) {
    std::vector<double> t, y, se;
    for (int k = 0; k < 40; ++k) {
        t.push_back(0.1 + 0.075 * k);
        y.push_back(parity_model(0.95, 1.0 / 24.0, 0.589, t.back()));
        se.push_back(1e-3);
    }
    const auto fit = fit_parity(t, y, se);
    EXPECT_NEAR(fit.p0, 0.95, 1e-6);
    EXPECT_NEAR(fit.coherence_time, 24.0, 1e-3);
    EXPECT_NEAR(fit.delta_f, 0.589, 1e-7);
    EXPECT_LT(fit.chi2, 1e-10);
    EXPECT_EQ(fit.dof, 37);
}

TEST(Fit, FixedFrequencyMode) {
    std::vector<double> t, y, se;
    for (int k = 0; k < 20; ++k) {
        t.push_back(0.5 + k);
        y.push_back(parity_model(0.9, 0.05, 0.0, t.back()));
        se.push_back(1e-3);
    }
    FitOptions opt;
    opt.mode = FitMode::fixed_frequency;
    const auto fit = fit_parity(t, y, se, opt);
    EXPECT_NEAR(fit.decay_rate, 0.05, 1e-7);
    EXPECT_EQ(fit.covariance.rows(), 2);
}

TEST(Fit, ReportsFailures) {
    const std::vector<double> t{0.1, 0.2, 0.3}, y{0.1, 0.1, 0.1}, se{0.01, 0.01, 0.01};
    try {
        fit_parity(t, y, se);
        FAIL() << "expected FitError";
    } catch (const FitError& e) {
        EXPECT_EQ(e.kind(), FitError::Kind::insufficient_data);
    }
    // Every point on a node of cos(2 pi f t) leaves the amplitude unidentifiable.
    std::vector<double> tn, yn, sen;
    for (int k = 0; k < 10; ++k) {
        tn.push_back(0.5 + k);
        yn.push_back(0.0);
        sen.push_back(0.01);
    }
    FitOptions opt;
    opt.mode = FitMode::fixed_frequency;
    opt.delta_f = 0.5;
    try {
        fit_parity(tn, yn, sen, opt);
        FAIL() << "expected FitError";
    } catch (const FitError& e) {
        EXPECT_EQ(e.kind(), FitError::Kind::singular);
    }
}
