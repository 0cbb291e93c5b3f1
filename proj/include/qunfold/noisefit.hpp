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

// Fitting independent-flip readout models to a measured response matrix.
//
// The model entry for (measured i, true j) is a product over qubits of
//   1 - p01  (0 read as 0)    p01  (0 read as 1)
//   p10      (1 read as 0)    1 - p10  (1 read as 1)
// and the fit minimizes the unweighted sum of squared differences to R over
// all 4^n entries, with every rate boxed to [0, 1/2].

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qunfold/core.hpp"
#include "qunfold/response.hpp"

namespace qunfold {

struct FlipExponents {
    int alpha = 0;        // 0 -> 1
    int alpha_prime = 0;  // 0 -> 0
    int beta = 0;         // 1 -> 0
    int beta_prime = 0;   // 1 -> 1

    friend bool operator==(const FlipExponents &, const FlipExponents &) = default;
};

inline FlipExponents exponent_counts(const StateIndex &true_state, const StateIndex &measured_state) {
    require(true_state.n_qubits() == measured_state.n_qubits(), ErrorCode::DimensionMismatch,
            "states have different qubit counts");
    FlipExponents e;
    for (int q = 0; q < true_state.n_qubits(); ++q) {
        const int t = true_state.bit(q);
        const int m = measured_state.bit(q);
        if (t == 0) {
            (m == 1 ? e.alpha : e.alpha_prime) += 1;
        } else {
            (m == 0 ? e.beta : e.beta_prime) += 1;
        }
    }
    return e;
}

struct FitResult {
    /// One entry for the global fit, one per qubit for the per-qubit fit.
    std::vector<double> p01;
    std::vector<double> p10;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
};

inline constexpr double kFitUpperBound = 0.5;
inline constexpr double kFitInitial = 0.05;
inline constexpr double kFitGradientTolerance = 1e-10;
inline constexpr int kFitMaxIterations = 100000;

namespace detail {

inline double int_pow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) {
        r *= x;
    }
    return r;
}

/// d/dx [x^a (1-x)^b]
inline double d_binomial_term(double x, int a, int b) {
    double d = 0.0;
    if (a > 0) {
        d += a * int_pow(x, a - 1) * int_pow(1.0 - x, b);
    }
    if (b > 0) {
        d -= b * int_pow(x, a) * int_pow(1.0 - x, b - 1);
    }
    return d;
}

/// Armijo-backtracked projected gradient descent on the box [0, 1/2]^k.
/// `eval` returns the objective and fills the gradient.
inline FitResult box_descent(std::vector<double> x,
                             const std::function<double(std::span<const double>, std::span<double>)> &eval) {
    const std::size_t k = x.size();
    std::vector<double> g(k);
    std::vector<double> g_trial(k);
    std::vector<double> trial(k);
    double f = eval(x, g);
    double step = 1.0;
    FitResult out;
    int it = 0;
    for (; it < kFitMaxIterations; ++it) {
        double pg_norm = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            double pg = g[i];
            if ((x[i] <= 0.0 && pg > 0.0) || (x[i] >= kFitUpperBound && pg < 0.0)) {
                pg = 0.0;
            }
            pg_norm = std::max(pg_norm, std::abs(pg));
        }
        if (pg_norm < kFitGradientTolerance) {
            out.converged = true;
            break;
        }
        double t = std::min(step * 2.0, 1e6);
        bool accepted = false;
        double f_trial = 0.0;
        while (t > 1e-30) {
            double decrease = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                trial[i] = std::clamp(x[i] - t * g[i], 0.0, kFitUpperBound);
                decrease += g[i] * (trial[i] - x[i]);
            }
            f_trial = eval(trial, g_trial);
            if (f_trial <= f + 1e-4 * decrease) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Stalled: no descent direction along the projected gradient.
            break;
        }
        if (trial == x) {
            break;
        }
        step = t;
        x = trial;
        f = f_trial;
        g = g_trial;
    }
    out.iterations = it;
    out.objective = f;
    // The raw parameter vector; callers split it into p01 / p10.
    out.p01 = std::move(x);
    return out;
}

}  // namespace detail

/// Objective and gradient of the two-parameter (universal-rate) model.
inline double global_fit_objective(const ResponseMatrix &r, double p01, double p10, double *grad = nullptr) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "fit needs a qubit-space response");
    const int n = r.n_qubits();
    const std::size_t dim = r.size();
    double f = 0.0;
    double g0 = 0.0;
    double g1 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            const auto e = exponent_counts(StateIndex(j, n), StateIndex(i, n));
            const double a = detail::int_pow(p01, e.alpha) * detail::int_pow(1.0 - p01, e.alpha_prime);
            const double b = detail::int_pow(p10, e.beta) * detail::int_pow(1.0 - p10, e.beta_prime);
            const double resid = r(i, j) - a * b;
            f += resid * resid;
            if (grad) {
                g0 += -2.0 * resid * detail::d_binomial_term(p01, e.alpha, e.alpha_prime) * b;
                g1 += -2.0 * resid * a * detail::d_binomial_term(p10, e.beta, e.beta_prime);
            }
        }
    }
    if (grad) {
        grad[0] = g0;
        grad[1] = g1;
    }
    return f;
}

/// Objective and gradient of the per-qubit model; `grad` (if given) holds
/// d/dp01[q] in [0, n) and d/dp10[q] in [n, 2n).
inline double per_qubit_fit_objective(const ResponseMatrix &r, std::span<const double> p01,
                                      std::span<const double> p10, std::span<double> grad = {}) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "fit needs a qubit-space response");
    const int n = r.n_qubits();
    require(p01.size() == static_cast<std::size_t>(n) && p10.size() == static_cast<std::size_t>(n),
            ErrorCode::DimensionMismatch, "one rate pair per qubit expected");
    const bool want_grad = !grad.empty();
    if (want_grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    const std::size_t dim = r.size();
    const auto nq = static_cast<std::size_t>(n);
    std::vector<double> factor(nq);
    std::vector<double> sign(nq);
    std::vector<double> prefix(nq + 1);
    std::vector<double> suffix(nq + 1);
    double f = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t q = 0; q < nq; ++q) {
                const int t = static_cast<int>((j >> q) & 1U);
                const int m = static_cast<int>((i >> q) & 1U);
                factor[q] = readout_factor(p01[q], p10[q], t, m);
                // d factor / d rate: +1 for a flip, -1 for a hold.
                sign[q] = t != m ? 1.0 : -1.0;
            }
            prefix[0] = 1.0;
            for (std::size_t q = 0; q < nq; ++q) {
                prefix[q + 1] = prefix[q] * factor[q];
            }
            const double model = prefix[nq];
            const double resid = r(i, j) - model;
            f += resid * resid;
            if (!want_grad) {
                continue;
            }
            suffix[nq] = 1.0;
            for (std::size_t q = nq; q-- > 0;) {
                suffix[q] = suffix[q + 1] * factor[q];
            }
            for (std::size_t q = 0; q < nq; ++q) {
                const double others = prefix[q] * suffix[q + 1];
                const double d = -2.0 * resid * sign[q] * others;
                const bool true_one = ((j >> q) & 1U) != 0;
                grad[true_one ? nq + q : q] += d;
            }
        }
    }
    return f;
}

inline FitResult fit_global(const ResponseMatrix &r) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "fit needs a qubit-space response");
    auto eval = [&r](std::span<const double> x, std::span<double> g) {
        return global_fit_objective(r, x[0], x[1], g.data());
    };
    auto res = detail::box_descent({kFitInitial, kFitInitial}, eval);
    const double p01 = res.p01[0];
    const double p10 = res.p01[1];
    res.p01 = {p01};
    res.p10 = {p10};
    return res;
}

inline FitResult fit_per_qubit(const ResponseMatrix &r) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "fit needs a qubit-space response");
    const auto n = static_cast<std::size_t>(r.n_qubits());
    auto eval = [&r, n](std::span<const double> x, std::span<double> g) {
        return per_qubit_fit_objective(r, x.subspan(0, n), x.subspan(n, n), g);
    };
    auto res = detail::box_descent(std::vector<double>(2 * n, kFitInitial), eval);
    const std::vector<double> x = res.p01;
    res.p01.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    res.p10.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
    return res;
}

struct ConditionedTransitions {
    /// R[s | bit q set, s] for every configuration of the other qubits, with qubit q = 0 in s.
    std::vector<double> p01_list;
    /// R[s | bit q cleared, s] for every configuration, with qubit q = 1 in s.
    std::vector<double> p10_list;
};

/// Single-qubit transition probabilities of `qubit` with the remaining
/// qubits held fixed, one entry per configuration of the others.
inline ConditionedTransitions conditioned_transitions(const ResponseMatrix &r, int qubit) {
    require(r.is_qubit_space(), ErrorCode::NotPowerOfTwo, "needs a qubit-space response");
    require(qubit >= 0 && qubit < r.n_qubits(), ErrorCode::QubitOutOfRange,
            "qubit " + std::to_string(qubit) + " outside [0, " + std::to_string(r.n_qubits()) + ")");
    const auto q = static_cast<std::size_t>(qubit);
    const std::size_t bit = std::size_t{1} << q;
    const std::size_t low_mask = bit - 1;
    const std::size_t contexts = r.size() / 2;
    ConditionedTransitions out;
    out.p01_list.reserve(contexts);
    out.p10_list.reserve(contexts);
    for (std::size_t c = 0; c < contexts; ++c) {
        const std::size_t s0 = ((c & ~low_mask) << 1) | (c & low_mask);
        const std::size_t s1 = s0 | bit;
        out.p01_list.push_back(r(s1, s0));
        out.p10_list.push_back(r(s0, s1));
    }
    return out;
}

}  // namespace qunfold
