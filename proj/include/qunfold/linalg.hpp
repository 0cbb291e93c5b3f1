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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qunfold/core.hpp"

namespace qunfold::linalg {

/// PA = LU with partial (row) pivoting. Unit-diagonal L and U share storage.
class LuDecomposition {
  public:
    /// Returns nullopt when an exactly zero pivot is met.
    static std::optional<LuDecomposition> factor(const Matrix &a) {
        require(a.square(), ErrorCode::NonSquare, "LU needs a square matrix");
        const std::size_t n = a.rows();
        LuDecomposition lu;
        lu.lu_ = a;
        lu.perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            lu.perm_[i] = i;
        }
        Matrix &m = lu.lu_;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t pivot = k;
            double best = std::abs(m(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                if (std::abs(m(i, k)) > best) {
                    best = std::abs(m(i, k));
                    pivot = i;
                }
            }
            if (best == 0.0) {
                return std::nullopt;
            }
            if (pivot != k) {
                for (std::size_t j = 0; j < n; ++j) {
                    std::swap(m(k, j), m(pivot, j));
                }
                std::swap(lu.perm_[k], lu.perm_[pivot]);
            }
            const double inv = 1.0 / m(k, k);
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = m(i, k) * inv;
                m(i, k) = f;
                if (f == 0.0) {
                    continue;
                }
                for (std::size_t j = k + 1; j < n; ++j) {
                    m(i, j) -= f * m(k, j);
                }
            }
        }
        lu.norm1_ = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                col += std::abs(a(i, j));
            }
            lu.norm1_ = std::max(lu.norm1_, col);
        }
        return lu;
    }

    std::size_t size() const { return lu_.rows(); }

    /// Solves A x = b.
    std::vector<double> solve(std::span<const double> b) const {
        const std::size_t n = size();
        require(b.size() == n, ErrorCode::DimensionMismatch, "LU solve size mismatch");
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = b[perm_[i]];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double acc = x[i];
            for (std::size_t j = 0; j < i; ++j) {
                acc -= lu_(i, j) * x[j];
            }
            x[i] = acc;
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = x[ii];
            for (std::size_t j = ii + 1; j < n; ++j) {
                acc -= lu_(ii, j) * x[j];
            }
            x[ii] = acc / lu_(ii, ii);
        }
        return x;
    }

    /// Solves A^T x = b.
    std::vector<double> solve_transposed(std::span<const double> b) const {
        const std::size_t n = size();
        require(b.size() == n, ErrorCode::DimensionMismatch, "LU solve size mismatch");
        // A^T = U^T L^T P, so solve U^T z = b, L^T w = z, x = P^T w.
        std::vector<double> z(b.begin(), b.end());
        for (std::size_t i = 0; i < n; ++i) {
            double acc = z[i];
            for (std::size_t j = 0; j < i; ++j) {
                acc -= lu_(j, i) * z[j];
            }
            z[i] = acc / lu_(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = z[ii];
            for (std::size_t j = ii + 1; j < n; ++j) {
                acc -= lu_(j, ii) * z[j];
            }
            z[ii] = acc;
        }
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[perm_[i]] = z[i];
        }
        return x;
    }

    /// Hager's estimate of ||A^-1||_1 times ||A||_1 (a lower bound that is
    /// exact in the vast majority of cases).
    double condition_estimate() const {
        const std::size_t n = size();
        std::vector<double> x(n, 1.0 / static_cast<double>(n));
        double estimate = 0.0;
        for (int iter = 0; iter < 5; ++iter) {
            const auto y = solve(x);
            const double norm_y = l1_norm(y);
            if (!std::isfinite(norm_y)) {
                return std::numeric_limits<double>::infinity();
            }
            if (iter > 0 && norm_y <= estimate) {
                break;
            }
            estimate = norm_y;
            std::vector<double> sign(n);
            for (std::size_t i = 0; i < n; ++i) {
                sign[i] = y[i] >= 0.0 ? 1.0 : -1.0;
            }
            const auto z = solve_transposed(sign);
            std::size_t jmax = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (std::abs(z[i]) > std::abs(z[jmax])) {
                    jmax = i;
                }
            }
            double ztx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                ztx += z[i] * x[i];
            }
            if (std::abs(z[jmax]) <= ztx) {
                break;
            }
            std::fill(x.begin(), x.end(), 0.0);
            x[jmax] = 1.0;
        }
        // Higham's alternating test vector. Column-stochastic matrices map the
        // uniform start onto itself, which stalls the iteration above at 1.
        std::vector<double> alt(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ramp = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
            alt[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + ramp);
        }
        const double alt_norm = l1_norm(solve(alt));
        if (!std::isfinite(alt_norm)) {
            return std::numeric_limits<double>::infinity();
        }
        estimate = std::max(estimate, 2.0 * alt_norm / (3.0 * static_cast<double>(n)));
        return estimate * norm1_;
    }

  private:
    LuDecomposition() = default;

    Matrix lu_;
    std::vector<std::size_t> perm_;
    double norm1_ = 0.0;
};

/// Explicit inverse, column by column. Small matrices only.
inline std::optional<Matrix> inverse(const Matrix &a) {
    auto lu = LuDecomposition::factor(a);
    if (!lu) {
        return std::nullopt;
    }
    const std::size_t n = a.rows();
    Matrix inv(n, n);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        const auto col = lu->solve(e);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inv(i, j) = col[i];
        }
    }
    return inv;
}

/// Largest eigenvalue of A^T A (squared spectral norm) by power iteration
/// from the all-ones vector.
inline double largest_squared_singular_value(const Matrix &a, int iterations = 50) {
    std::vector<double> v(a.cols(), 1.0);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        double norm = 0.0;
        for (double x : v) {
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            return 0.0;
        }
        for (double &x : v) {
            x /= norm;
        }
        auto w = multiply_transposed(a, multiply(a, v));
        lambda = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            lambda += v[i] * w[i];
        }
        v = std::move(w);
    }
    return lambda;
}

}  // namespace qunfold::linalg
