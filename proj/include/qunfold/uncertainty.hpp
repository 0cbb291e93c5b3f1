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

// Uncertainty components of an unfolded spectrum and their dependence on the
// number of IBU iterations.
//
//   stat_m        spread over Poisson replicas of the measured counts
//   stat_R        spread over multinomial replicas of the calibration data
//   nonclosure    |unfold(fold(t0)) - t0| with t0 the nominal unfolded result
//   systematic_R  |unfold with R_nominal - unfold with R_alt|
//
// All components are in count units. State averages are arithmetic means of
// the per-state values; the total combines the averaged stat_m, stat_R and
// nonclosure in quadrature and leaves systematic_R out.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qunfold/core.hpp"
#include "qunfold/parallel.hpp"
#include "qunfold/random.hpp"
#include "qunfold/response.hpp"
#include "qunfold/sim.hpp"
#include "qunfold/unfold.hpp"

namespace qunfold {

struct UncertaintyComponents {
    double stat_m = 0.0;
    double stat_r = 0.0;
    double nonclosure = 0.0;
    double systematic_r = 0.0;
};

struct UncertaintyReport {
    int iterations = 0;
    std::vector<UncertaintyComponents> per_state;
    UncertaintyComponents averaged;
    double total = 0.0;
};

/// Fills `averaged` and `total` from `per_state`.
inline void summarize(UncertaintyReport &report) {
    UncertaintyComponents avg;
    const auto n = static_cast<double>(report.per_state.size());
    for (const auto &c : report.per_state) {
        avg.stat_m += c.stat_m;
        avg.stat_r += c.stat_r;
        avg.nonclosure += c.nonclosure;
        avg.systematic_r += c.systematic_r;
    }
    if (n > 0) {
        avg.stat_m /= n;
        avg.stat_r /= n;
        avg.nonclosure /= n;
        avg.systematic_r /= n;
    }
    report.averaged = avg;
    report.total = std::sqrt(avg.stat_m * avg.stat_m + avg.stat_r * avg.stat_r + avg.nonclosure * avg.nonclosure);
}

struct BiasSummary {
    double bias = 0.0;  // mean |t_hat - truth|
    double mse = 0.0;   // mean (t_hat - truth)^2
};

struct ScanRow {
    int iterations = 0;
    std::optional<UncertaintyReport> report;
    std::optional<BiasSummary> truth_comparison;
};

struct ScanTable {
    std::vector<ScanRow> rows;
    /// Iteration-independent baselines, present when truth is known.
    std::optional<BiasSummary> ignis;
    std::optional<BiasSummary> inversion;
    /// Row with the smallest total uncertainty, when reports are present.
    std::optional<int> recommended_iterations;
};

namespace detail {

/// Entrywise sample standard deviation (divisor B - 1) of replicas[b][i].
inline std::vector<double> replica_std(const std::vector<std::vector<double>> &replicas) {
    const std::size_t b = replicas.size();
    const std::size_t dim = replicas.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto &r : replicas) {
        for (std::size_t i = 0; i < dim; ++i) {
            mean[i] += r[i];
        }
    }
    for (double &m : mean) {
        m /= static_cast<double>(b);
    }
    std::vector<double> var(dim, 0.0);
    for (const auto &r : replicas) {
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = r[i] - mean[i];
            var[i] += d * d;
        }
    }
    for (double &v : var) {
        v = std::sqrt(v / static_cast<double>(b - 1));
    }
    return var;
}

inline void check_iteration_list(std::span<const int> iterations) {
    require(!iterations.empty(), ErrorCode::EmptyIterationList, "no iteration counts given");
    int previous = 0;
    for (int n : iterations) {
        require(n > previous, ErrorCode::InvalidArgument, "iteration counts must be strictly increasing and >= 1");
        previous = n;
    }
}

inline BiasSummary compare_to_truth(std::span<const double> estimate, std::span<const double> truth) {
    require(estimate.size() == truth.size(), ErrorCode::DimensionMismatch, "truth length differs from estimate");
    BiasSummary s;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        s.bias += std::abs(estimate[i] - truth[i]);
    }
    s.bias /= static_cast<double>(truth.size());
    s.mse = mse(estimate, truth);
    return s;
}

inline CountVector poisson_replica(const CountVector &m, random::Philox &rng) {
    std::vector<std::int64_t> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i] = random::poisson(rng, static_cast<double>(m[i]));
    }
    return CountVector(std::move(out));
}

inline CalibrationData calibration_replica(const CalibrationData &c, random::Philox &rng) {
    std::vector<CountVector> hists;
    hists.reserve(c.size());
    for (const auto &h : c.histograms()) {
        hists.emplace_back(random::multinomial(rng, c.shots_per_state(), h.as_doubles()));
    }
    return CalibrationData(c.n_qubits(), c.shots_per_state(), std::move(hists));
}

inline random::Philox measurement_stream(std::uint64_t seed, std::size_t replica) {
    return random::Philox(seed, random::derive_stream({stream_domain::kBootstrapMeasurement, replica}));
}

inline random::Philox response_stream(std::uint64_t seed, std::size_t replica) {
    return random::Philox(seed, random::derive_stream({stream_domain::kBootstrapResponse, replica}));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Individual components
// ---------------------------------------------------------------------------

/// Per-state spread of the unfolded result over `replicas` Poisson
/// resamplings of the measured counts.
inline std::vector<double> bootstrap_measurement(const ResponseMatrix &r, const CountVector &m, const UnfoldConfig &cfg,
                                                 int replicas, std::uint64_t seed, int threads = 1) {
    require(replicas >= 2, ErrorCode::InvalidB, "need at least 2 bootstrap replicas");
    require(r.size() == m.size(), ErrorCode::DimensionMismatch, "response and measurement sizes differ");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(replicas));
    parallel_for(out.size(), threads, [&](std::size_t b) {
        auto rng = detail::measurement_stream(seed, b);
        const auto replica = detail::poisson_replica(m, rng);
        out[b] = unfold(r, ProbabilityVector(replica), cfg).estimate;
    });
    return detail::replica_std(out);
}

/// Per-state spread of the unfolded result over multinomial resamplings of
/// every calibration histogram (the response is rebuilt for each replica).
inline std::vector<double> bootstrap_response(const CalibrationData &calib, const CountVector &m,
                                              const UnfoldConfig &cfg, int replicas, std::uint64_t seed,
                                              int threads = 1) {
    require(replicas >= 2, ErrorCode::InvalidB, "need at least 2 bootstrap replicas");
    require(calib.size() == m.size(), ErrorCode::DimensionMismatch, "calibration and measurement sizes differ");
    std::vector<std::vector<double>> out(static_cast<std::size_t>(replicas));
    const ProbabilityVector measured(m);
    parallel_for(out.size(), threads, [&](std::size_t b) {
        auto rng = detail::response_stream(seed, b);
        const auto r = build_from_calibration(detail::calibration_replica(calib, rng));
        out[b] = unfold(r, measured, cfg).estimate;
    });
    return detail::replica_std(out);
}

/// Closure test with the nominal IBU result as the reweighted prior.
inline std::vector<double> nonclosure(const ResponseMatrix &r, const ProbabilityVector &m, const UnfoldConfig &cfg) {
    require(cfg.method == Method::Ibu, ErrorCode::InvalidArgument, "non-closure is defined for IBU");
    const auto reweighted = unfold_ibu(r, m, cfg).estimate;
    const auto folded = fold(r, ProbabilityVector(reweighted));
    const auto recovered = unfold_ibu(r, folded, cfg).estimate;
    std::vector<double> out(reweighted.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::abs(recovered[i] - reweighted[i]);
    }
    return out;
}

inline std::vector<double> systematic_response(const ResponseMatrix &nominal, const ResponseMatrix &alternate,
                                               const ProbabilityVector &m, const UnfoldConfig &cfg) {
    require(nominal.size() == alternate.size(), ErrorCode::DimensionMismatch, "response matrices differ in size");
    const auto a = unfold(nominal, m, cfg).estimate;
    const auto b = unfold(alternate, m, cfg).estimate;
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::abs(a[i] - b[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scans over the iteration count
// ---------------------------------------------------------------------------

/// Bias and MSE of IBU against a known truth for every N in `iterations`,
/// plus the iteration-independent least-squares and inversion baselines.
/// `cfg` supplies the prior and least-squares settings.
inline ScanTable bias_scan(std::span<const double> truth, const ResponseMatrix &r, const ProbabilityVector &m,
                           std::span<const int> iterations, const UnfoldConfig &cfg = {}) {
    detail::check_iteration_list(iterations);
    require(truth.size() == r.size(), ErrorCode::DimensionMismatch, "truth length differs from response side");
    ScanTable table;
    const auto traj = ibu_trajectory(r, m, cfg.prior, iterations);
    for (std::size_t k = 0; k < iterations.size(); ++k) {
        ScanRow row;
        row.iterations = iterations[k];
        row.truth_comparison = detail::compare_to_truth(traj[k], truth);
        table.rows.push_back(std::move(row));
    }
    table.ignis = detail::compare_to_truth(unfold_least_squares(r, m, cfg).estimate, truth);
    try {
        table.inversion = detail::compare_to_truth(unfold_inversion(r, m).estimate, truth);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::SingularMatrix) {
            throw;
        }
    }
    return table;
}

struct UncertaintyScanConfig {
    std::vector<int> iterations{1, 2, 3, 4, 5, 10, 20, 50, 100};
    int replicas = 100;
    std::uint64_t seed = 0;
    /// Strength of the composed extra flip noise used when no alternate
    /// response is supplied. Zero disables the systematic component.
    double lambda = 0.01;
    std::optional<ResponseMatrix> alternate;
    /// Known truth (simulation mode); enables bias/MSE columns.
    std::optional<std::vector<double>> truth;
    /// Prior and least-squares settings.
    UnfoldConfig unfold;
    int threads = 1;
};

/// All uncertainty components for IBU at every N, computed from shared
/// bootstrap replicas. `r` is the nominal response (usually built from `calib`).
inline ScanTable uncertainty_scan(const CalibrationData &calib, const ResponseMatrix &r, const CountVector &m,
                                  const UncertaintyScanConfig &cfg) {
    const std::span<const int> iters = cfg.iterations;
    detail::check_iteration_list(iters);
    require(cfg.replicas >= 2, ErrorCode::InvalidB, "need at least 2 bootstrap replicas");
    require(calib.size() == r.size() && m.size() == r.size(), ErrorCode::DimensionMismatch,
            "calibration, response and measurement sizes differ");
    const std::size_t dim = r.size();
    const std::size_t n_rows = iters.size();
    const auto n_rep = static_cast<std::size_t>(cfg.replicas);
    const ProbabilityVector measured(m);
    const auto &prior = cfg.unfold.prior;

    // replicas x rows x states
    std::vector<std::vector<std::vector<double>>> stat_m(n_rep), stat_r(n_rep);
    parallel_for(2 * n_rep, cfg.threads, [&](std::size_t task) {
        if (task < n_rep) {
            auto rng = detail::measurement_stream(cfg.seed, task);
            const auto replica = detail::poisson_replica(m, rng);
            stat_m[task] = ibu_trajectory(r, ProbabilityVector(replica), prior, iters);
        } else {
            const std::size_t b = task - n_rep;
            auto rng = detail::response_stream(cfg.seed, b);
            const auto rb = build_from_calibration(detail::calibration_replica(calib, rng));
            stat_r[b] = ibu_trajectory(rb, measured, prior, iters);
        }
    });

    const auto nominal = ibu_trajectory(r, measured, prior, iters);
    std::optional<std::vector<std::vector<double>>> alternate;
    if (cfg.alternate) {
        require(cfg.alternate->size() == dim, ErrorCode::DimensionMismatch, "alternate response size differs");
        alternate = ibu_trajectory(*cfg.alternate, measured, prior, iters);
    } else if (cfg.lambda > 0.0) {
        alternate = ibu_trajectory(perturb_response(r, cfg.lambda), measured, prior, iters);
    }

    ScanTable table;
    std::vector<std::vector<double>> slice(n_rep);
    for (std::size_t k = 0; k < n_rows; ++k) {
        UncertaintyReport report;
        report.iterations = iters[k];
        report.per_state.resize(dim);

        for (std::size_t b = 0; b < n_rep; ++b) {
            slice[b] = stat_m[b][k];
        }
        const auto sm = detail::replica_std(slice);
        for (std::size_t b = 0; b < n_rep; ++b) {
            slice[b] = stat_r[b][k];
        }
        const auto sr = detail::replica_std(slice);

        UnfoldConfig ibu_cfg = cfg.unfold;
        ibu_cfg.method = Method::Ibu;
        ibu_cfg.iterations = iters[k];
        const auto nc = nonclosure(r, measured, ibu_cfg);

        for (std::size_t i = 0; i < dim; ++i) {
            auto &c = report.per_state[i];
            c.stat_m = sm[i];
            c.stat_r = sr[i];
            c.nonclosure = nc[i];
            c.systematic_r = alternate ? std::abs(nominal[k][i] - (*alternate)[k][i]) : 0.0;
        }
        summarize(report);

        ScanRow row;
        row.iterations = iters[k];
        row.report = std::move(report);
        if (cfg.truth) {
            row.truth_comparison = detail::compare_to_truth(nominal[k], *cfg.truth);
        }
        table.rows.push_back(std::move(row));
    }

    if (cfg.truth) {
        require(cfg.truth->size() == dim, ErrorCode::DimensionMismatch, "truth length differs from response side");
        table.ignis = detail::compare_to_truth(unfold_least_squares(r, measured, cfg.unfold).estimate, *cfg.truth);
        try {
            table.inversion = detail::compare_to_truth(unfold_inversion(r, measured).estimate, *cfg.truth);
        } catch (const Error &e) {
            if (e.code() != ErrorCode::SingularMatrix) {
                throw;
            }
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto &row : table.rows) {
        if (row.report->total < best) {
            best = row.report->total;
            table.recommended_iterations = row.iterations;
        }
    }
    return table;
}

}  // namespace qunfold
