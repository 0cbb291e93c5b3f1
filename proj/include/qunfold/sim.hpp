// Copyright 2026 The qunfold Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qunfold/core.hpp"
#include "qunfold/parallel.hpp"
#include "qunfold/random.hpp"
#include "qunfold/response.hpp"
#include "qunfold/unfold.hpp"

namespace qunfold {

// Stream domains keep the different consumers of one user seed apart.
namespace stream_domain {
inline constexpr std::uint64_t kSample = 1;
inline constexpr std::uint64_t kReadout = 2;
inline constexpr std::uint64_t kPseudoExperiment = 3;
inline constexpr std::uint64_t kCalibration = 4;
inline constexpr std::uint64_t kBootstrapMeasurement = 5;
inline constexpr std::uint64_t kBootstrapResponse = 6;
}  // namespace stream_domain

// ---------------------------------------------------------------------------
// Truth spectra
// ---------------------------------------------------------------------------

/// t(b) proportional to exp[-(b - 2^(n-1))^2 / (2 sigma)], unit total.
/// Note the width parameter enters linearly, not squared.
inline ProbabilityVector gaussian_truth(int n_qubits, double sigma) {
    require(n_qubits >= 1 && n_qubits <= kMaxQubits, ErrorCode::InvalidArgument, "n_qubits out of range");
    require(sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
    const std::size_t dim = dimension_for_qubits(n_qubits);
    const double center = static_cast<double>(dim / 2);
    std::vector<double> t(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        const double d = static_cast<double>(b) - center;
        t[b] = std::exp(-d * d / (2.0 * sigma));
    }
    return ProbabilityVector(std::move(t)).normalized();
}

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/// Normal(mean, sd) integrated over `n_bins` equal bins whose centres run
/// from `first_center` to `last_center`; the edge bins absorb the tails.
inline ProbabilityVector binned_gaussian_truth(std::size_t n_bins = 21, double mean = 0.0, double sd = 3.0,
                                               double first_center = -10.0, double last_center = 10.0) {
    require(n_bins >= 2, ErrorCode::InvalidArgument, "n_bins must be >= 2");
    require(sd > 0.0, ErrorCode::InvalidArgument, "sd must be positive");
    require(last_center > first_center, ErrorCode::InvalidArgument, "empty bin range");
    const double width = (last_center - first_center) / static_cast<double>(n_bins - 1);
    std::vector<double> mass(n_bins);
    double lower_cdf = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
        const double upper_edge = first_center + (static_cast<double>(k) + 0.5) * width;
        const double upper_cdf = k + 1 == n_bins ? 1.0 : normal_cdf(upper_edge, mean, sd);
        mass[k] = upper_cdf - lower_cdf;
        lower_cdf = upper_cdf;
    }
    return ProbabilityVector(std::move(mass));
}

/// Uniform over the n one-hot basis states.
inline ProbabilityVector w_state_truth(int n_qubits) {
    require(n_qubits >= 1 && n_qubits <= kMaxQubits, ErrorCode::InvalidArgument, "n_qubits out of range");
    std::vector<double> t(dimension_for_qubits(n_qubits), 0.0);
    for (int q = 0; q < n_qubits; ++q) {
        t[std::size_t{1} << q] = 1.0 / n_qubits;
    }
    return ProbabilityVector(std::move(t));
}

enum class TruthKind { Gaussian, WState, BinnedGaussian };

inline TruthKind parse_truth_kind(std::string_view name) {
    if (name == "gaussian") {
        return TruthKind::Gaussian;
    }
    if (name == "w_state" || name == "w") {
        return TruthKind::WState;
    }
    if (name == "binned_gaussian") {
        return TruthKind::BinnedGaussian;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown truth kind '" + std::string(name) + "'");
}

struct TruthSpec {
    TruthKind kind = TruthKind::Gaussian;
    int n_qubits = 5;
    std::size_t n_bins = 21;
    double sigma = 3.5;

    ProbabilityVector distribution() const {
        switch (kind) {
            case TruthKind::Gaussian: return gaussian_truth(n_qubits, sigma);
            case TruthKind::WState: return w_state_truth(n_qubits);
            case TruthKind::BinnedGaussian: return binned_gaussian_truth(n_bins, 0.0, sigma);
        }
        throw Error(ErrorCode::InvalidArgument, "unknown truth kind");
    }
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

inline CountVector sample_counts(const ProbabilityVector &t, std::int64_t shots, random::Philox &rng) {
    require(shots >= 1, ErrorCode::InvalidArgument, "shots must be >= 1");
    return CountVector(random::multinomial(rng, shots, t.values()));
}

/// One multinomial draw of `shots` trials over t.
inline CountVector sample_counts(const ProbabilityVector &t, std::int64_t shots, std::uint64_t seed) {
    random::Philox rng(seed, random::derive_stream({stream_domain::kSample}));
    return sample_counts(t, shots, rng);
}

inline CountVector apply_readout_noise(const ResponseMatrix &r, const CountVector &true_counts, random::Philox &rng) {
    require(r.size() == true_counts.size(), ErrorCode::DimensionMismatch,
            "response side " + std::to_string(r.size()) + " vs counts length " + std::to_string(true_counts.size()));
    const std::size_t dim = r.size();
    std::vector<std::int64_t> measured(dim, 0);
    std::vector<double> column(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        if (true_counts[j] == 0) {
            continue;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            column[i] = r(i, j);
        }
        const auto draw = random::multinomial(rng, true_counts[j], column);
        for (std::size_t i = 0; i < dim; ++i) {
            measured[i] += draw[i];
        }
    }
    return CountVector(std::move(measured));
}

/// Each true shot in state j is re-read according to column j of R.
inline CountVector apply_readout_noise(const ResponseMatrix &r, const CountVector &true_counts, std::uint64_t seed) {
    random::Philox rng(seed, random::derive_stream({stream_domain::kReadout}));
    return apply_readout_noise(r, true_counts, rng);
}

/// Simulated calibration run: `shots_per_state` readouts of each basis state
/// through R.
inline CalibrationData simulate_calibration(const ResponseMatrix &r, std::int64_t shots_per_state, random::Philox &rng) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "calibration needs a qubit-space response");
    const std::size_t dim = r.size();
    std::vector<CountVector> histograms;
    histograms.reserve(dim);
    std::vector<double> column(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            column[i] = r(i, j);
        }
        histograms.emplace_back(random::multinomial(rng, shots_per_state, column));
    }
    return CalibrationData(r.n_qubits(), shots_per_state, std::move(histograms));
}

inline CalibrationData simulate_calibration(const ResponseMatrix &r, std::int64_t shots_per_state, std::uint64_t seed) {
    random::Philox rng(seed, random::derive_stream({stream_domain::kCalibration}));
    return simulate_calibration(r, shots_per_state, rng);
}

inline double mse(std::span<const double> estimate, std::span<const double> reference) {
    require(estimate.size() == reference.size(), ErrorCode::DimensionMismatch, "mse length mismatch");
    require(!estimate.empty(), ErrorCode::InvalidArgument, "mse of empty vectors");
    double acc = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double d = estimate[i] - reference[i];
        acc += d * d;
    }
    return acc / static_cast<double>(estimate.size());
}

// ---------------------------------------------------------------------------
// Pseudo-experiments
// ---------------------------------------------------------------------------

/// What the unfolded counts are compared against.
enum class Reference {
    /// The sampled pre-readout counts (includes the irreducible Poisson noise).
    SampledTruth,
    /// The exact truth distribution scaled to the shot count.
    Theoretical,
};

struct PseudoExperimentConfig {
    TruthSpec truth;
    std::int64_t shots = 10000;
    int n_experiments = 1000;
    std::vector<Method> methods{Method::Inversion, Method::LeastSquares, Method::Ibu};
    /// Settings shared by all methods; `method` is overridden per method.
    UnfoldConfig unfold;
    Reference reference = Reference::SampledTruth;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct MethodPool {
    Method method = Method::Ibu;
    /// Indexed experiment * n_states + state.
    std::vector<double> truth;
    std::vector<double> predicted;

    std::vector<double> differences() const {
        std::vector<double> d(truth.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] = truth[i] - predicted[i];
        }
        return d;
    }

    double mean() const {
        const auto d = differences();
        return sum(d) / static_cast<double>(d.size());
    }

    /// Sample standard deviation (divisor n - 1) of the pooled differences.
    double std_dev() const {
        const auto d = differences();
        if (d.size() < 2) {
            return 0.0;
        }
        const double mu = sum(d) / static_cast<double>(d.size());
        double acc = 0.0;
        for (double x : d) {
            acc += (x - mu) * (x - mu);
        }
        return std::sqrt(acc / static_cast<double>(d.size() - 1));
    }

    double std_error() const { return std_dev() / std::sqrt(static_cast<double>(truth.size())); }
};

struct PseudoExperimentReport {
    std::vector<MethodPool> pools;
    int n_experiments = 0;
    std::int64_t shots = 0;
    std::size_t n_states = 0;

    const MethodPool &pool(Method m) const {
        for (const auto &p : pools) {
            if (p.method == m) {
                return p;
            }
        }
        throw Error(ErrorCode::InvalidArgument, "method not part of this report");
    }
};

/// Repeats sample-truth -> readout-noise -> unfold; experiment e draws from
/// its own stream so results do not depend on `threads`.
inline PseudoExperimentReport pseudo_experiments(const ResponseMatrix &r, const PseudoExperimentConfig &cfg) {
    require(cfg.n_experiments >= 1, ErrorCode::InvalidArgument, "n_experiments must be >= 1");
    require(cfg.shots >= 1, ErrorCode::InvalidArgument, "shots must be >= 1");
    require(!cfg.methods.empty(), ErrorCode::InvalidArgument, "no unfolding methods selected");
    const auto truth = cfg.truth.distribution();
    require(truth.size() == r.size(), ErrorCode::DimensionMismatch,
            "truth has " + std::to_string(truth.size()) + " states, response side is " + std::to_string(r.size()));
    const std::size_t dim = r.size();
    const std::size_t n_exp = static_cast<std::size_t>(cfg.n_experiments);

    PseudoExperimentReport report;
    report.n_experiments = cfg.n_experiments;
    report.shots = cfg.shots;
    report.n_states = dim;
    for (Method m : cfg.methods) {
        MethodPool pool;
        pool.method = m;
        pool.truth.assign(n_exp * dim, 0.0);
        pool.predicted.assign(n_exp * dim, 0.0);
        report.pools.push_back(std::move(pool));
    }

    std::vector<double> theoretical(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        theoretical[i] = truth[i] * static_cast<double>(cfg.shots);
    }

    parallel_for(n_exp, cfg.threads, [&](std::size_t e) {
        random::Philox rng(cfg.seed, random::derive_stream({stream_domain::kPseudoExperiment, e}));
        const auto true_counts = sample_counts(truth, cfg.shots, rng);
        const auto measured = ProbabilityVector(apply_readout_noise(r, true_counts, rng));
        for (auto &pool : report.pools) {
            UnfoldConfig ucfg = cfg.unfold;
            ucfg.method = pool.method;
            const auto result = unfold(r, measured, ucfg);
            for (std::size_t i = 0; i < dim; ++i) {
                pool.truth[e * dim + i] = cfg.reference == Reference::SampledTruth
                                              ? static_cast<double>(true_counts[i])
                                              : theoretical[i];
                pool.predicted[e * dim + i] = result.estimate[i];
            }
        }
    });
    return report;
}

}  // namespace qunfold
