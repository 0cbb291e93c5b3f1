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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qunfold/core.hpp"
#include "qunfold/linalg.hpp"

namespace qunfold {

enum class Method { Inversion, LeastSquares, Ibu };

constexpr std::string_view to_string(Method m) {
    switch (m) {
        case Method::Inversion: return "inversion";
        case Method::LeastSquares: return "ls";
        case Method::Ibu: return "ibu";
    }
    return "unknown";
}

inline Method parse_method(std::string_view name) {
    if (name == "inversion" || name == "matrix") {
        return Method::Inversion;
    }
    if (name == "ls" || name == "least_squares" || name == "ignis") {
        return Method::LeastSquares;
    }
    if (name == "ibu") {
        return Method::Ibu;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

inline constexpr double kMaxConditionNumber = 1e12;
inline constexpr double kIbuDenominatorFloor = 1e-30;

struct UnfoldConfig {
    Method method = Method::Ibu;
    /// IBU iteration count; the regularization parameter.
    int iterations = 10;
    /// IBU starting spectrum; empty means uniform with total sum(m).
    std::optional<ProbabilityVector> prior;
    double ls_tolerance = 1e-8;
    int ls_max_iterations = 100000;

    void check() const {
        if (method == Method::Ibu) {
            require(iterations >= 1, ErrorCode::InvalidArgument, "IBU needs iterations >= 1");
            if (prior) {
                for (double v : prior->values()) {
                    require(v > 0.0, ErrorCode::InvalidArgument, "IBU prior must be strictly positive");
                }
            }
        }
        if (method == Method::LeastSquares) {
            require(ls_tolerance > 0.0, ErrorCode::InvalidArgument, "ls_tolerance must be positive");
            require(ls_max_iterations >= 1, ErrorCode::InvalidArgument, "ls_max_iterations must be >= 1");
        }
    }
};

struct UnfoldResult {
    /// Signed for inversion, non-negative otherwise.
    std::vector<double> estimate;
    Method method = Method::Ibu;
    int iterations_used = 0;
    /// ||m - R t||_2 at the estimate.
    double residual_norm = 0.0;
    bool converged = true;
};

namespace detail {

inline double squared_residual(const Matrix &r, std::span<const double> t, std::span<const double> m) {
    const auto folded = multiply(r, t);
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = folded[i] - m[i];
        acc += d * d;
    }
    return acc;
}

inline void check_dimensions(const ResponseMatrix &r, const ProbabilityVector &m) {
    require(r.size() == m.size(), ErrorCode::DimensionMismatch,
            "response side " + std::to_string(r.size()) + " vs measured length " + std::to_string(m.size()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrix inversion: solve R t = m directly.
// ---------------------------------------------------------------------------

inline UnfoldResult unfold_inversion(const ResponseMatrix &r, const ProbabilityVector &m) {
    detail::check_dimensions(r, m);
    const auto lu = linalg::LuDecomposition::factor(r.matrix());
    require(lu.has_value(), ErrorCode::SingularMatrix, "response matrix has a zero pivot");
    const double cond = lu->condition_estimate();
    require(std::isfinite(cond) && cond <= kMaxConditionNumber, ErrorCode::SingularMatrix,
            "condition estimate " + std::to_string(cond) + " exceeds 1e12");
    UnfoldResult out;
    out.method = Method::Inversion;
    out.estimate = lu->solve(m.values());
    out.residual_norm = std::sqrt(detail::squared_residual(r.matrix(), out.estimate, m.values()));
    return out;
}

// ---------------------------------------------------------------------------
// Least squares on the scaled simplex {t >= 0, sum t = sum m}.
// ---------------------------------------------------------------------------

/// Euclidean projection of v onto {x >= 0, sum x = total} (sort-based).
inline std::vector<double> project_to_simplex(std::span<const double> v, double total) {
    const std::size_t n = v.size();
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        cumulative += sorted[k];
        const double candidate = (cumulative - total) / static_cast<double>(k + 1);
        if (k + 1 == n || sorted[k + 1] <= candidate) {
            theta = candidate;
            break;
        }
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::max(v[i] - theta, 0.0);
    }
    return out;
}

namespace detail {

/// Exact minimizer of ||R_S z - m||^2 subject to sum z = total over the
/// columns in `support`, via the KKT system. Empty when the system is singular.
inline std::optional<std::vector<double>> solve_on_support(const Matrix &r, std::span<const double> m,
                                                           const std::vector<std::size_t> &support,
                                                           double total) {
    const std::size_t k = support.size();
    if (k == 0) {
        return std::nullopt;
    }
    Matrix kkt(k + 1, k + 1);
    std::vector<double> rhs(k + 1, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < r.rows(); ++i) {
                acc += r(i, support[a]) * r(i, support[b]);
            }
            kkt(a, b) = acc;
            kkt(b, a) = acc;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < r.rows(); ++i) {
            acc += r(i, support[a]) * m[i];
        }
        rhs[a] = acc;
        kkt(a, k) = 1.0;
        kkt(k, a) = 1.0;
    }
    rhs[k] = total;
    const auto lu = linalg::LuDecomposition::factor(kkt);
    if (!lu || lu->condition_estimate() > 1e14) {
        return std::nullopt;
    }
    auto sol = lu->solve(rhs);
    std::vector<double> z(r.cols(), 0.0);
    for (std::size_t a = 0; a < k; ++a) {
        z[support[a]] = sol[a];
    }
    return z;
}

}  // namespace detail

/// Accelerated projected gradient (FISTA with backtracking and function-value
/// restart) on the scaled simplex, followed by an active-set polish that
/// solves the equality-constrained problem exactly on the identified support.
inline UnfoldResult unfold_least_squares(const ResponseMatrix &r, const ProbabilityVector &m,
                                         const UnfoldConfig &cfg = {}) {
    detail::check_dimensions(r, m);
    require(cfg.ls_tolerance > 0.0 && cfg.ls_max_iterations >= 1, ErrorCode::InvalidArgument,
            "invalid least-squares settings");
    const Matrix &a = r.matrix();
    const auto &mv = m.values();
    const std::size_t n = r.size();
    const double total = m.total();

    UnfoldResult out;
    out.method = Method::LeastSquares;
    if (total == 0.0) {
        out.estimate.assign(n, 0.0);
        return out;
    }

    // f(t) = 1/2 ||R t - m||^2, gradient R^T (R t - m), Lipschitz constant
    // the largest squared singular value of R.
    auto objective = [&](std::span<const double> t) { return 0.5 * detail::squared_residual(a, t, mv); };
    auto gradient = [&](std::span<const double> t) {
        auto res = multiply(a, t);
        for (std::size_t i = 0; i < n; ++i) {
            res[i] -= mv[i];
        }
        return multiply_transposed(a, res);
    };

    double lipschitz = linalg::largest_squared_singular_value(a, 50);
    if (!(lipschitz > 0.0)) {
        lipschitz = 1.0;
    }

    std::vector<double> x(n, total / static_cast<double>(n));
    double fx = objective(x);
    std::vector<double> y = x;
    double theta = 1.0;
    bool converged = false;
    int it = 0;
    const double step_tolerance = cfg.ls_tolerance * total;

    for (it = 1; it <= cfg.ls_max_iterations; ++it) {
        const auto g = gradient(y);
        const double fy = objective(y);
        std::vector<double> x_new;
        double f_new = 0.0;
        double step_l1 = 0.0;
        for (;;) {
            std::vector<double> shifted(n);
            for (std::size_t i = 0; i < n; ++i) {
                shifted[i] = y[i] - g[i] / lipschitz;
            }
            x_new = project_to_simplex(shifted, total);
            f_new = objective(x_new);
            double lin = 0.0;
            double quad = 0.0;
            step_l1 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = x_new[i] - y[i];
                lin += g[i] * d;
                quad += d * d;
                step_l1 += std::abs(d);
            }
            const double slack = 1e-12 * std::max(fy, 1.0);
            if (f_new <= fy + lin + 0.5 * lipschitz * quad + slack) {
                break;
            }
            lipschitz *= 2.0;
        }

        if (step_l1 <= step_tolerance) {
            if (f_new <= fx) {
                x = std::move(x_new);
                fx = f_new;
            }
            converged = true;
            break;
        }
        if (f_new > fx) {
            // Momentum overshoot: restart from the last accepted point.
            y = x;
            theta = 1.0;
            continue;
        }
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double beta = (theta - 1.0) / theta_next;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = x_new[i] + beta * (x_new[i] - x[i]);
        }
        theta = theta_next;
        x = std::move(x_new);
        fx = f_new;
    }

    // Active-set polish. Columns that come out negative are dropped and the
    // reduced problem re-solved; the best feasible candidate wins.
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > 1e-9 * total) {
            support.push_back(i);
        }
    }
    for (int round = 0; round < 8 && !support.empty(); ++round) {
        const auto z = detail::solve_on_support(a, mv, support, total);
        if (!z) {
            break;
        }
        std::vector<std::size_t> kept;
        for (std::size_t idx : support) {
            if ((*z)[idx] >= 0.0) {
                kept.push_back(idx);
            }
        }
        if (kept.size() == support.size()) {
            const double fz = objective(*z);
            if (fz <= fx * (1.0 + 1e-12) + 1e-300) {
                x = *z;
                fx = fz;
            }
            break;
        }
        support = std::move(kept);
    }

    out.estimate = std::move(x);
    out.iterations_used = std::min(it, cfg.ls_max_iterations);
    out.residual_norm = std::sqrt(2.0 * fx);
    out.converged = converged;
    return out;
}

// ---------------------------------------------------------------------------
// Iterative Bayesian unfolding (Richardson-Lucy / EM for Poisson data).
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> ibu_start(const ResponseMatrix &r, const ProbabilityVector &m,
                                     const std::optional<ProbabilityVector> &prior) {
    if (prior) {
        require(prior->size() == r.size(), ErrorCode::DimensionMismatch, "prior length differs from response side");
        for (double v : prior->values()) {
            require(v > 0.0, ErrorCode::InvalidArgument, "IBU prior must be strictly positive");
        }
        return prior->values();
    }
    return std::vector<double>(r.size(), m.total() / static_cast<double>(r.size()));
}

/// One application of the update
///   t_i <- sum_j R(j, i) t_i m_j / sum_k R(j, k) t_k.
inline std::vector<double> ibu_step(const Matrix &r, std::span<const double> m, std::span<const double> t) {
    const std::size_t n = t.size();
    const auto denom = multiply(r, t);
    std::vector<double> ratio(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (m[j] == 0.0) {
            continue;
        }
        require(denom[j] >= kIbuDenominatorFloor, ErrorCode::ZeroDenominator,
                "measured state " + std::to_string(j) + " is unreachable from the current estimate");
        ratio[j] = m[j] / denom[j];
    }
    auto back = multiply_transposed(r, ratio);
    for (std::size_t i = 0; i < n; ++i) {
        back[i] *= t[i];
    }
    return back;
}

}  // namespace detail

inline UnfoldResult unfold_ibu(const ResponseMatrix &r, const ProbabilityVector &m, const UnfoldConfig &cfg = {}) {
    detail::check_dimensions(r, m);
    require(cfg.iterations >= 1, ErrorCode::InvalidArgument, "IBU needs iterations >= 1");
    auto t = detail::ibu_start(r, m, cfg.prior);
    for (int n = 0; n < cfg.iterations; ++n) {
        t = detail::ibu_step(r.matrix(), m.values(), t);
    }
    UnfoldResult out;
    out.method = Method::Ibu;
    out.iterations_used = cfg.iterations;
    out.residual_norm = std::sqrt(detail::squared_residual(r.matrix(), t, m.values()));
    out.estimate = std::move(t);
    return out;
}

/// IBU estimates after each iteration count in `checkpoints` (strictly
/// increasing), sharing one run of the iteration.
inline std::vector<std::vector<double>> ibu_trajectory(const ResponseMatrix &r, const ProbabilityVector &m,
                                                       const std::optional<ProbabilityVector> &prior,
                                                       std::span<const int> checkpoints) {
    detail::check_dimensions(r, m);
    std::vector<std::vector<double>> out;
    out.reserve(checkpoints.size());
    auto t = detail::ibu_start(r, m, prior);
    int done = 0;
    int previous = 0;
    for (int target : checkpoints) {
        require(target > previous, ErrorCode::InvalidArgument, "checkpoints must be strictly increasing and >= 1");
        previous = target;
        for (; done < target; ++done) {
            t = detail::ibu_step(r.matrix(), m.values(), t);
        }
        out.push_back(t);
    }
    return out;
}

/// Poisson log-likelihood of m given the folded estimate, up to the
/// t-independent log(m!) term.
inline double poisson_log_likelihood(const ResponseMatrix &r, std::span<const double> t, std::span<const double> m) {
    const auto nu = multiply(r.matrix(), t);
    double ll = 0.0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
        if (m[j] > 0.0) {
            ll += m[j] * std::log(nu[j]);
        }
        ll -= nu[j];
    }
    return ll;
}

inline UnfoldResult unfold(const ResponseMatrix &r, const ProbabilityVector &m, const UnfoldConfig &cfg) {
    cfg.check();
    switch (cfg.method) {
        case Method::Inversion: return unfold_inversion(r, m);
        case Method::LeastSquares: return unfold_least_squares(r, m, cfg);
        case Method::Ibu: return unfold_ibu(r, m, cfg);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method");
}

}  // namespace qunfold
