#pragma once

// Correlation spectroscopy: every ion sees the same random laser phase on its
// final Ramsey pulse, is measured projectively, and the pair parity
// <s_i s_j> (s = +1 for ground) keeps the frequency difference while the
// common phase averages out:
//
//   p_ij = (p_c / 2) cos(2 pi Df_ij t),  p_c = p0^2 exp(-t / T_c)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynamics.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "protocol.hpp"
#include "rng.hpp"

namespace lutclock {

inline double parity_expectation(double delta_f, double t, double p_c) {
    return 0.5 * p_c * std::cos(kTwoPi * delta_f * t);
}

struct IonPair {
    std::size_t i = 0;
    std::size_t j = 0;
};

inline std::vector<IonPair> all_pairs(std::size_t n_ions) {
    std::vector<IonPair> out;
    for (std::size_t i = 0; i < n_ions; ++i) {
        for (std::size_t j = i + 1; j < n_ions; ++j) out.push_back({i, j});
    }
    return out;
}

/// Integer sums of outcome products. Merging is exact, so totals do not depend
/// on how trials were partitioned.
struct ParityAccumulator {
    std::vector<std::int64_t> product_sum; // one per pair
    std::int64_t trials = 0;

    explicit ParityAccumulator(std::size_t n_pairs = 0) : product_sum(n_pairs, 0) {}

    void add(const std::vector<IonPair>& pairs, const int* outcomes) {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            product_sum[k] += outcomes[pairs[k].i] * outcomes[pairs[k].j];
        }
        ++trials;
    }

    void merge(const ParityAccumulator& other) {
        for (std::size_t k = 0; k < product_sum.size(); ++k) product_sum[k] += other.product_sum[k];
        trials += other.trials;
    }
};

struct ParityEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Mean of +-1 products with the sample standard error sqrt((1 - p^2)/(n - 1)).
/// The error is floored at the value it would take if one product had the
/// opposite sign, so all-equal samples do not get infinite weight.
inline ParityEstimate estimate_parity(std::int64_t product_sum, std::int64_t n) {
    if (n < 2) throw DomainError("parity estimate needs at least 2 trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(product_sum) / nn;
    auto se_of = [&](double q) { return std::sqrt(std::max(0.0, 1.0 - q * q) / (nn - 1.0)); };
    const double floor = se_of(1.0 - 2.0 / nn);
    return {p, std::max(se_of(p), floor)};
}

inline ParityEstimate estimate_parity(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw DomainError("outcome lists differ in length");
    std::int64_t sum = 0;
    for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
    return estimate_parity(sum, static_cast<std::int64_t>(a.size()));
}

struct ParityDataset {
    std::vector<IonPair> pairs;
    std::vector<double> times;                   // s
    std::vector<std::vector<double>> parity;     // [pair][time]
    std::vector<std::vector<double>> std_error;  // [pair][time]
    std::vector<std::int64_t> trials;            // per time

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            if (pairs[k].i == i && pairs[k].j == j) return k;
        }
        throw DomainError("pair not in dataset");
    }
};

// ---------------------------------------------------------------------------
// Trial simulation

struct DephasingModel {
    double p0 = 1.0;                                             // per-ion contrast
    double coherence_time = std::numeric_limits<double>::infinity(); // T_c, s
};

struct CorrelationConfig {
    std::vector<RamseyScenario> ions; // per-ion levels and offsets
    SequenceKind kind = SequenceKind::plain;
    std::vector<double> times;        // interrogation times t, s
    std::int64_t n_trials = 1000;
    std::uint64_t rng_seed = 1;
    std::uint32_t stream_base = 0; // time point k draws from stream stream_base + k
    DephasingModel dephasing;
    unsigned workers = 1;
};

/// Per-ion data for one time point: the ground amplitude after the final
/// pulse at laser phase phi is a + e^{-i phi} b.
struct PreparedIon {
    Complex a;
    Complex b;

    double ground_probability(double phi) const { return std::norm(a + std::polar(1.0, -phi) * b); }
};

/// Ramsey time T that gives interrogation time t for a sequence kind.
inline double ramsey_time_for(double t, const ProtocolParams& p, SequenceKind kind) {
    const double T = kind == SequenceKind::decoupled ? t / 3.0 - p.tau_1 - p.tau_2 : t;
    if (!(T >= 0.0)) throw DomainError("interrogation time too short for the microwave pulses");
    return T;
}

/// Evolves everything up to the last pulse once; the last pulse's phase is
/// applied per trial through a diagonal frame change.
inline PreparedIon prepare_ion(const RamseyScenario& scenario, SequenceKind kind, double t) {
    if (kind == SequenceKind::microwave) {
        throw DomainError("correlation spectroscopy uses an optical sequence");
    }
    RamseyScenario sc = scenario;
    sc.params.ramsey_time = ramsey_time_for(t, sc.params, kind);
    sc.params.second_pulse_phase = 0.0;
    const FrameParams frame = sc.frame(0.0);
    const Sequence seq = kind == SequenceKind::decoupled ? build_decoupled_ramsey(sc.params, frame)
                                                         : build_plain_ramsey(sc.params, frame);
    const auto body = std::span<const PulseSegment>(seq.segments).first(seq.segments.size() - 1);
    const StateVector psi = run_segments(StateVector::ground(), body);
    const Matrix4 u = segment_propagator(seq.segments.back());
    PreparedIon ion;
    ion.a = u(kGround, kGround) * psi[kGround];
    for (UpperLevel f : kUpperLevels) ion.b += u(kGround, basis_index(f)) * psi[basis_index(f)];
    return ion;
}

/// One trial: common phase, per-ion phase diffusion, contrast, measurement.
/// Writes +1 (ground) or -1 per ion.
inline void simulate_trial(const std::vector<PreparedIon>& ions, double t,
                           const DephasingModel& model, TrialRng& rng, int* outcomes) {
    const double phi = kTwoPi * rng.uniform();
    const double sigma = std::isfinite(model.coherence_time) ? std::sqrt(t / model.coherence_time)
                                                             : 0.0;
    for (std::size_t k = 0; k < ions.size(); ++k) {
        const double xi = sigma > 0.0 ? sigma * rng.normal() : 0.0;
        const double pg = ions[k].ground_probability(phi + xi);
        const double p = 0.5 + model.p0 * (pg - 0.5);
        outcomes[k] = rng.uniform() < p ? +1 : -1;
    }
}

inline std::vector<int> simulate_trial(const CorrelationConfig& cfg, std::size_t time_index,
                                       std::uint64_t trial) {
    const double t = cfg.times.at(time_index);
    std::vector<PreparedIon> ions;
    for (const auto& sc : cfg.ions) ions.push_back(prepare_ion(sc, cfg.kind, t));
    TrialRng rng(cfg.rng_seed, trial, cfg.stream_base + static_cast<std::uint32_t>(time_index));
    std::vector<int> out(ions.size());
    simulate_trial(ions, t, cfg.dephasing, rng, out.data());
    return out;
}

inline constexpr std::int64_t kTrialChunk = 4096;

inline ParityDataset run_correlation_trials(const CorrelationConfig& cfg) {
    if (cfg.ions.size() < 2) throw DomainError("correlation needs at least two ions");
    if (cfg.n_trials < 2) throw DomainError("n_trials must be at least 2");
    if (!(cfg.dephasing.p0 >= 0.0 && cfg.dephasing.p0 <= 1.0)) {
        throw DomainError("p0 must lie in [0, 1]");
    }
    if (!(cfg.dephasing.coherence_time > 0.0)) throw DomainError("T_c must be positive");

    ParityDataset ds;
    ds.pairs = all_pairs(cfg.ions.size());
    ds.times = cfg.times;
    ds.parity.assign(ds.pairs.size(), std::vector<double>(cfg.times.size()));
    ds.std_error = ds.parity;
    ds.trials.assign(cfg.times.size(), cfg.n_trials);

    for (std::size_t ti = 0; ti < cfg.times.size(); ++ti) {
        const double t = cfg.times[ti];
        std::vector<PreparedIon> ions;
        for (const auto& sc : cfg.ions) ions.push_back(prepare_ion(sc, cfg.kind, t));

        const std::size_t chunks =
            static_cast<std::size_t>((cfg.n_trials + kTrialChunk - 1) / kTrialChunk);
        std::vector<ParityAccumulator> partial(chunks, ParityAccumulator(ds.pairs.size()));
        parallel_for(chunks, cfg.workers, [&](std::size_t c) {
            const std::int64_t lo = static_cast<std::int64_t>(c) * kTrialChunk;
            const std::int64_t hi = std::min(cfg.n_trials, lo + kTrialChunk);
            std::vector<int> outcome(ions.size());
            for (std::int64_t trial = lo; trial < hi; ++trial) {
                TrialRng rng(cfg.rng_seed, static_cast<std::uint64_t>(trial),
                             cfg.stream_base + static_cast<std::uint32_t>(ti));
                simulate_trial(ions, t, cfg.dephasing, rng, outcome.data());
                partial[c].add(ds.pairs, outcome.data());
            }
        });
        ParityAccumulator total(ds.pairs.size());
        for (const auto& p : partial) total.merge(p);
        for (std::size_t k = 0; k < ds.pairs.size(); ++k) {
            const auto e = estimate_parity(total.product_sum[k], total.trials);
            ds.parity[k][ti] = e.value;
            ds.std_error[k][ti] = e.standard_error;
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Fitting

enum class FitMode {
    fixed_frequency, // fit p0 and the decay rate with Df held
    free_frequency   // fit p0, decay rate and Df
};

struct ParityFit {
    double p0 = 0.0;
    double decay_rate = 0.0;   // 1/T_c, 1/s
    double coherence_time = 0.0; // s; infinite for a non-positive rate
    double delta_f = 0.0;      // Hz, reported as |Df|
    Eigen::MatrixXd covariance; // (p0, rate[, Df])
    double chi2 = 0.0;
    int dof = 0;
    int iterations = 0;

    double p0_error() const { return std::sqrt(covariance(0, 0)); }
    double decay_rate_error() const { return std::sqrt(covariance(1, 1)); }
    double delta_f_error() const {
        return covariance.rows() > 2 ? std::sqrt(covariance(2, 2)) : 0.0;
    }
    /// Linearized error of T_c = 1/rate.
    double coherence_time_error() const {
        return decay_rate > 0.0 ? decay_rate_error() / (decay_rate * decay_rate)
                                : std::numeric_limits<double>::infinity();
    }
    double reduced_chi2() const { return dof > 0 ? chi2 / dof : 0.0; }
};

struct FitOptions {
    FitMode mode = FitMode::free_frequency;
    double delta_f = 0.0; // Hz, used as fixed value or ignored
    int max_iterations = 200;
    double relative_step = 1e-9;
};

/// Parity model p0^2/2 exp(-rate t) cos(2 pi Df t) and its gradient.
inline double parity_model(double p0, double rate, double delta_f, double t) {
    return 0.5 * p0 * p0 * std::exp(-rate * t) * std::cos(kTwoPi * delta_f * t);
}

namespace detail {

struct FitData {
    std::vector<double> t, y, w;
};

inline double fit_chi2(const FitData& d, const Eigen::Vector3d& q) {
    double c = 0.0;
    for (std::size_t k = 0; k < d.t.size(); ++k) {
        const double r = d.y[k] - parity_model(q(0), q(1), q(2), d.t[k]);
        c += d.w[k] * r * r;
    }
    return c;
}

inline Eigen::MatrixXd fit_jacobian(const FitData& d, const Eigen::Vector3d& q, int np) {
    Eigen::MatrixXd j(d.t.size(), np);
    for (std::size_t k = 0; k < d.t.size(); ++k) {
        const double t = d.t[k];
        const double e = std::exp(-q(1) * t);
        const double c = std::cos(kTwoPi * q(2) * t);
        const double s = std::sin(kTwoPi * q(2) * t);
        j(k, 0) = q(0) * e * c;
        j(k, 1) = -0.5 * q(0) * q(0) * t * e * c;
        if (np > 2) j(k, 2) = -0.5 * q(0) * q(0) * e * s * kTwoPi * t;
    }
    return j;
}

/// Coarse start: for each (Df, rate) candidate the amplitude is linear.
inline Eigen::Vector3d fit_start(const FitData& d, bool free_f, double fixed_f) {
    const double tmax = *std::max_element(d.t.begin(), d.t.end());
    std::vector<double> freqs;
    if (free_f) {
        const double step = 1.0 / (16.0 * tmax);
        double dt_min = tmax;
        for (std::size_t k = 1; k < d.t.size(); ++k) {
            dt_min = std::min(dt_min, std::abs(d.t[k] - d.t[k - 1]));
        }
        const double f_max = 0.5 / std::max(dt_min, 1e-12);
        for (double f = 0.5 * step; f <= f_max; f += step) freqs.push_back(f);
    } else {
        freqs.push_back(fixed_f);
    }
    Eigen::Vector3d best(1.0, 0.0, fixed_f);
    double best_chi2 = std::numeric_limits<double>::infinity();
    for (double f : freqs) {
        for (double k : {0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
            const double rate = k / tmax;
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < d.t.size(); ++i) {
                const double x = 0.5 * std::exp(-rate * d.t[i]) * std::cos(kTwoPi * f * d.t[i]);
                sxy += d.w[i] * x * d.y[i];
                sxx += d.w[i] * x * x;
            }
            if (!(sxx > 0.0)) continue;
            const double amp = std::clamp(sxy / sxx, 1e-3, 1.0); // p0^2
            const Eigen::Vector3d q(std::sqrt(amp), rate, f);
            const double c = fit_chi2(d, q);
            if (c < best_chi2) {
                best_chi2 = c;
                best = q;
            }
        }
    }
    return best;
}

} // namespace detail

/// Weighted Levenberg-Marquardt fit of one pair's parity curve.
inline ParityFit fit_parity(const std::vector<double>& t, const std::vector<double>& y,
                            const std::vector<double>& se, const FitOptions& opt = {}) {
    if (t.size() != y.size() || t.size() != se.size()) {
        throw FitError(FitError::Kind::insufficient_data, "time, parity and error lengths differ");
    }
    const bool free_f = opt.mode == FitMode::free_frequency;
    const int np = free_f ? 3 : 2;
    if (t.size() < 4 || static_cast<int>(t.size()) <= np) {
        throw FitError(FitError::Kind::insufficient_data, "parity fit needs at least 4 points");
    }
    detail::FitData d;
    d.t = t;
    d.y = y;
    for (double s : se) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw FitError(FitError::Kind::insufficient_data, "standard errors must be positive");
        }
        d.w.push_back(1.0 / (s * s));
    }
    const Eigen::Map<const Eigen::VectorXd> w(d.w.data(), static_cast<Eigen::Index>(d.w.size()));

    Eigen::Vector3d q = detail::fit_start(d, free_f, opt.delta_f);
    double chi2 = detail::fit_chi2(d, q);
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations && !converged; ++it) {
        const Eigen::MatrixXd j = detail::fit_jacobian(d, q, np);
        Eigen::VectorXd r(t.size());
        for (std::size_t k = 0; k < t.size(); ++k) r(k) = y[k] - parity_model(q(0), q(1), q(2), t[k]);
        const Eigen::MatrixXd a = j.transpose() * w.asDiagonal() * j;
        const Eigen::VectorXd g = j.transpose() * w.asDiagonal() * r;
        const double scale = a.diagonal().maxCoeff();
        if (!(scale > 0.0)) throw FitError(FitError::Kind::singular, "normal equations are singular");

        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = a;
            for (int k = 0; k < np; ++k) damped(k, k) += lambda * std::max(a(k, k), 1e-12 * scale);
            const Eigen::VectorXd step = damped.ldlt().solve(g);
            Eigen::Vector3d trial = q;
            trial.head(np) += step;
            const double c = detail::fit_chi2(d, trial);
            if (std::isfinite(c) && c < chi2) {
                const double rel = step.norm() / std::max(q.head(np).norm(), 1e-300);
                q = trial;
                chi2 = c;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                converged = rel < opt.relative_step;
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step exists at working precision: the minimum is reached.
        if (!accepted) converged = true;
    }
    if (!converged) {
        throw FitError(FitError::Kind::not_converged,
                       "parity fit did not converge in " + std::to_string(opt.max_iterations) +
                           " iterations");
    }

    const Eigen::MatrixXd j = detail::fit_jacobian(d, q, np);
    // A parameter is unidentifiable when the data sit where its derivative
    // vanishes (e.g. every point on a cosine node), compared with the size the
    // derivative would have with the oscillating factor at full swing.
    for (int k = 0; k < np; ++k) {
        double actual = 0.0, envelope = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-q(1) * t[i]);
            const double full = k == 0 ? q(0) * e : k == 1 ? 0.5 * q(0) * q(0) * t[i] * e
                                                            : 0.5 * q(0) * q(0) * e * kTwoPi * t[i];
            actual += d.w[i] * j(i, k) * j(i, k);
            envelope += d.w[i] * full * full;
        }
        if (!(actual > 1e-20 * envelope)) {
            throw FitError(FitError::Kind::singular, "normal equations are singular");
        }
    }
    const Eigen::MatrixXd a = j.transpose() * w.asDiagonal() * j;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw FitError(FitError::Kind::singular, "normal equations are singular");

    ParityFit fit;
    fit.p0 = std::abs(q(0));
    fit.decay_rate = q(1);
    fit.coherence_time = q(1) > 0.0 ? 1.0 / q(1) : std::numeric_limits<double>::infinity();
    fit.delta_f = std::abs(q(2));
    fit.covariance = lu.inverse();
    fit.chi2 = chi2;
    fit.dof = static_cast<int>(t.size()) - np;
    fit.iterations = it;
    return fit;
}

inline ParityFit fit_parity(const ParityDataset& ds, std::size_t pair, const FitOptions& opt = {}) {
    return fit_parity(ds.times, ds.parity.at(pair), ds.std_error.at(pair), opt);
}

} // namespace lutclock
