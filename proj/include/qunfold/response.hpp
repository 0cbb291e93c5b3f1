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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qunfold/core.hpp"

namespace qunfold {

/// Histograms of the 2^n calibration circuits. `histograms[j]` is the
/// measured distribution after preparing basis state j.
class CalibrationData {
  public:
    CalibrationData(int n_qubits, std::int64_t shots_per_state, std::vector<CountVector> histograms)
        : n_qubits_(n_qubits), shots_per_state_(shots_per_state), histograms_(std::move(histograms)) {
        require(n_qubits >= 1 && n_qubits <= kMaxQubits, ErrorCode::InvalidArgument,
                "n_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
        require(shots_per_state >= 1, ErrorCode::InvalidArgument, "shots_per_state must be >= 1");
        const std::size_t dim = dimension_for_qubits(n_qubits);
        require(histograms_.size() == dim, ErrorCode::DimensionMismatch,
                "expected " + std::to_string(dim) + " histograms, got " + std::to_string(histograms_.size()));
        for (std::size_t j = 0; j < dim; ++j) {
            require(histograms_[j].size() == dim, ErrorCode::DimensionMismatch,
                    "histogram " + std::to_string(j) + " has length " + std::to_string(histograms_[j].size()));
            require(histograms_[j].total() == shots_per_state, ErrorCode::ShotMismatch,
                    "histogram " + std::to_string(j) + " sums to " + std::to_string(histograms_[j].total()) +
                        ", expected " + std::to_string(shots_per_state));
        }
    }

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return histograms_.size(); }
    std::int64_t shots_per_state() const { return shots_per_state_; }
    const std::vector<CountVector> &histograms() const { return histograms_; }
    const CountVector &histogram(std::size_t true_state) const { return histograms_[true_state]; }

  private:
    int n_qubits_;
    std::int64_t shots_per_state_;
    std::vector<CountVector> histograms_;
};

/// Per-qubit readout flip rates: p01[q] = Pr(read 1 | qubit q is 0),
/// p10[q] = Pr(read 0 | qubit q is 1).
class NoiseModel {
  public:
    NoiseModel(std::vector<double> p01, std::vector<double> p10) : p01_(std::move(p01)), p10_(std::move(p10)) {
        require(!p01_.empty() && static_cast<int>(p01_.size()) <= kMaxQubits, ErrorCode::InvalidArgument,
                "noise model needs 1.." + std::to_string(kMaxQubits) + " qubits");
        require(p01_.size() == p10_.size(), ErrorCode::DimensionMismatch, "p01 and p10 lengths differ");
        for (std::size_t q = 0; q < p01_.size(); ++q) {
            require(p01_[q] >= 0.0 && p01_[q] <= 1.0 && p10_[q] >= 0.0 && p10_[q] <= 1.0,
                    ErrorCode::InvalidArgument, "flip probabilities must lie in [0, 1]");
        }
    }

    static NoiseModel uniform(int n_qubits, double p01, double p10) {
        require(n_qubits >= 1, ErrorCode::InvalidArgument, "n_qubits must be >= 1");
        return NoiseModel(std::vector<double>(static_cast<std::size_t>(n_qubits), p01),
                          std::vector<double>(static_cast<std::size_t>(n_qubits), p10));
    }

    int n_qubits() const { return static_cast<int>(p01_.size()); }
    const std::vector<double> &p01() const { return p01_; }
    const std::vector<double> &p10() const { return p10_; }

  private:
    std::vector<double> p01_;
    std::vector<double> p10_;
};

/// Column j is the calibration histogram for true state j over the shot count.
inline ResponseMatrix build_from_calibration(const CalibrationData &c) {
    const std::size_t dim = c.size();
    Matrix m(dim, dim);
    const double shots = static_cast<double>(c.shots_per_state());
    for (std::size_t j = 0; j < dim; ++j) {
        const auto &h = c.histogram(j);
        for (std::size_t i = 0; i < dim; ++i) {
            m(i, j) = static_cast<double>(h[i]) / shots;
        }
    }
    return ResponseMatrix::validate(std::move(m));
}

/// Single-qubit readout factor Pr(measured bit | true bit).
inline double readout_factor(double p01, double p10, int true_bit, int measured_bit) {
    if (true_bit == 0) {
        return measured_bit == 0 ? 1.0 - p01 : p01;
    }
    return measured_bit == 0 ? p10 : 1.0 - p10;
}

/// Tensor product of the per-qubit 2x2 factors [[1-p01, p10], [p01, 1-p10]],
/// qubit q acting on bit q of the state index.
inline ResponseMatrix from_noise_model(const NoiseModel &nm) {
    // Kronecker products built from the most significant qubit down so that
    // qubit 0 ends up as the fastest-varying index.
    Matrix r{{1.0}};
    for (int q = nm.n_qubits() - 1; q >= 0; --q) {
        const auto qi = static_cast<std::size_t>(q);
        const double f[2][2] = {{1.0 - nm.p01()[qi], nm.p10()[qi]}, {nm.p01()[qi], 1.0 - nm.p10()[qi]}};
        const std::size_t n = r.rows();
        Matrix next(2 * n, 2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double rij = r(i, j);
                for (int a = 0; a < 2; ++a) {
                    for (int b = 0; b < 2; ++b) {
                        next(2 * i + static_cast<std::size_t>(a), 2 * j + static_cast<std::size_t>(b)) = rij * f[a][b];
                    }
                }
            }
        }
        r = std::move(next);
    }
    return ResponseMatrix::validate(std::move(r));
}

/// Nearest-neighbour migration matrix: each bin leaks `eps` to each neighbour,
/// the edge bins only inward. Any bin count is accepted.
inline ResponseMatrix tridiagonal_example(std::size_t n_bins, double eps) {
    require(n_bins >= 2, ErrorCode::InvalidArgument, "n_bins must be >= 2");
    require(eps > 0.0 && eps < 0.5, ErrorCode::EpsOutOfRange, "eps must lie in (0, 1/2)");
    Matrix m(n_bins, n_bins);
    for (std::size_t j = 0; j < n_bins; ++j) {
        const bool edge = j == 0 || j + 1 == n_bins;
        m(j, j) = edge ? 1.0 - eps : 1.0 - 2.0 * eps;
        if (j > 0) {
            m(j - 1, j) = eps;
        }
        if (j + 1 < n_bins) {
            m(j + 1, j) = eps;
        }
    }
    return ResponseMatrix::binned(std::move(m));
}

/// The symmetric two-state matrix [[1-eps, eps], [eps, 1-eps]].
inline ResponseMatrix two_level_example(double eps) { return tridiagonal_example(2, eps); }

/// Closed-form inverse of `two_level_example(eps)`.
inline Matrix two_level_inverse(double eps) {
    require(eps > 0.0 && eps < 0.5, ErrorCode::EpsOutOfRange, "eps must lie in (0, 1/2)");
    const double s = 1.0 / (1.0 - 2.0 * eps);
    return Matrix{{s * (1.0 - eps), -s * eps}, {-s * eps, s * (1.0 - eps)}};
}

/// Composes extra uniform readout flips at rate `lambda` after `r`:
/// R_alt = N(lambda) R. Used as a stand-in for gate-noise-contaminated
/// calibration.
inline ResponseMatrix perturb_response(const ResponseMatrix &r, double lambda) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "perturbation needs a qubit-space response");
    require(lambda >= 0.0 && lambda <= 0.5, ErrorCode::InvalidArgument, "lambda must lie in [0, 1/2]");
    if (lambda == 0.0) {
        return r;
    }
    const auto extra = from_noise_model(NoiseModel::uniform(r.n_qubits(), lambda, lambda));
    return ResponseMatrix::validate(multiply(extra.matrix(), r.matrix()));
}

}  // namespace qunfold
