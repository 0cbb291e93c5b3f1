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

#include "qunfold/unfold.hpp"

#include <limits>
#include <random>

#include "gtest/gtest.h"
#include "qunfold/response.hpp"
#include "test_util.hpp"

using namespace qunfold;
using namespace qunfold::testing;

namespace {

const ResponseMatrix &hand_matrix() {
    static const auto r = validate_response(Matrix{{0.9, 0.2}, {0.1, 0.8}});
    return r;
}

UnfoldConfig ibu(int n) {
    UnfoldConfig c;
    c.method = Method::Ibu;
    c.iterations = n;
    return c;
}

// Gauss-Jordan with partial pivoting on a copy; empty result if singular.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        if (std::abs(a[p][c]) < 1e-14) return {};
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

// Exhaustive active-set oracle for min ||R t - m||^2 on {t >= 0, sum t = total}:
// every support is tried and the best feasible stationary point kept.
double simplex_ls_oracle(const ResponseMatrix &r, const std::vector<double> &m) {
    const std::size_t n = r.size();
    const double total = sum(m);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> i) & 1U) s.push_back(i);
        }
        const std::size_t k = s.size();
        std::vector<std::vector<double>> a(k + 1, std::vector<double>(k + 1, 0.0));
        std::vector<double> b(k + 1, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = 0; q < k; ++q) {
                for (std::size_t i = 0; i < n; ++i) a[p][q] += r(i, s[p]) * r(i, s[q]);
            }
            for (std::size_t i = 0; i < n; ++i) b[p] += r(i, s[p]) * m[i];
            a[p][k] = a[k][p] = 1.0;
        }
        b[k] = total;
        const auto z = gauss_solve(a, b);
        if (z.empty()) continue;
        std::vector<double> t(n, 0.0);
        bool feasible = true;
        for (std::size_t p = 0; p < k; ++p) {
            if (z[p] < -1e-9 * total) feasible = false;
            t[s[p]] = std::max(z[p], 0.0);
        }
        if (!feasible) continue;
        const auto folded = naive_product(r, t);
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += (folded[i] - m[i]) * (folded[i] - m[i]);
        best = std::min(best, f);
    }
    return best;
}

}  // namespace

TEST(unfold, inversion_examples) {
    const auto id = validate_response(Matrix::identity(4));
    EXPECT_EQ(unfold_inversion(id, ProbabilityVector{3, 1, 4, 0}).estimate, (std::vector<double>{3, 1, 4, 0}));
    const auto balanced = unfold_inversion(hand_matrix(), ProbabilityVector{110, 90}).estimate;
    EXPECT_NEAR(balanced[0], 100.0, 1e-9);
    EXPECT_NEAR(balanced[1], 100.0, 1e-9);
    const auto edge = unfold_inversion(hand_matrix(), ProbabilityVector{200, 0}).estimate;
    EXPECT_NEAR(edge[0], 1600.0 / 7.0, 1e-9);
    EXPECT_NEAR(edge[1], -200.0 / 7.0, 1e-9);
}

TEST(unfold, inversion_rejects_singular) {
    const auto flat = validate_response(Matrix{{0.5, 0.5}, {0.5, 0.5}});
    EXPECT_ERROR_CODE(unfold_inversion(flat, ProbabilityVector{1, 1}), ErrorCode::SingularMatrix);
    // Nearly singular: condition number ~ 2e12.
    const double e = 0.5 - 2.5e-13;
    const auto near = validate_response(Matrix{{1 - e, e}, {e, 1 - e}});
    EXPECT_ERROR_CODE(unfold_inversion(near, ProbabilityVector{1, 1}), ErrorCode::SingularMatrix);
    const double ok = 0.5 - 1e-9;
    EXPECT_NO_THROW(unfold_inversion(validate_response(Matrix{{1 - ok, ok}, {ok, 1 - ok}}), ProbabilityVector{1, 1}));
}

TEST(unfold, dimension_mismatch) {
    EXPECT_ERROR_CODE(unfold_inversion(hand_matrix(), ProbabilityVector{1, 2, 3, 4}), ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(unfold_ibu(hand_matrix(), ProbabilityVector{1, 2, 3, 4}), ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(unfold_least_squares(hand_matrix(), ProbabilityVector{1, 2, 3, 4}),
                      ErrorCode::DimensionMismatch);
}

TEST(unfold, least_squares_examples) {
    UnfoldConfig cfg;
    const auto exact = unfold_least_squares(hand_matrix(), ProbabilityVector{110, 90}, cfg);
    EXPECT_NEAR(exact.estimate[0], 100.0, 1e-6);
    EXPECT_NEAR(exact.estimate[1], 100.0, 1e-6);
    EXPECT_NEAR(exact.residual_norm, 0.0, 1e-6);
    EXPECT_TRUE(exact.converged);

    const auto boundary = unfold_least_squares(hand_matrix(), ProbabilityVector{200, 0}, cfg);
    EXPECT_NEAR(boundary.estimate[0], 200.0, 1e-9);
    EXPECT_NEAR(boundary.estimate[1], 0.0, 1e-9);
    EXPECT_NEAR(boundary.residual_norm * boundary.residual_norm, 800.0, 800.0 * 1e-6);

    const auto id = validate_response(Matrix::identity(4));
    const auto feasible = unfold_least_squares(id, ProbabilityVector{5, 0, 5, 0}, cfg);
    EXPECT_NEAR(max_abs_diff(feasible.estimate, {5, 0, 5, 0}), 0.0, 1e-9);
    EXPECT_NEAR(feasible.residual_norm, 0.0, 1e-9);
}

TEST(unfold, least_squares_boundary_one_dimensional_scan) {
    // t = (x, 200 - x): residual^2 = 2 (160 - 0.7 x)^2, minimized at the boundary.
    double best_x = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200000; ++k) {
        const double x = k * 1e-3;
        const double f = 2.0 * (160.0 - 0.7 * x) * (160.0 - 0.7 * x);
        if (f < best) {
            best = f;
            best_x = x;
        }
    }
    EXPECT_DOUBLE_EQ(best_x, 200.0);
    EXPECT_NEAR(best, 800.0, 1e-9);
}

TEST(unfold, least_squares_matches_exhaustive_oracle) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t dim = trial % 2 == 0 ? 4 : 8;
        const auto r = random_response(dim, rng, trial % 3 == 0 ? 0.2 : 2.0);
        auto m = random_positive(dim, rng, 0.0, 500.0);
        if (trial % 4 == 1) m[trial % dim] = 0.0;
        const auto res = unfold_least_squares(r, ProbabilityVector(m));
        const double oracle = simplex_ls_oracle(r, m);
        const double achieved = res.residual_norm * res.residual_norm;
        ASSERT_LE(achieved, oracle * (1.0 + 1e-8) + 1e-8 * sum(m)) << trial;
        ASSERT_NEAR(sum(res.estimate), sum(m), 1e-9 * sum(m));
        for (double v : res.estimate) ASSERT_GE(v, 0.0);
    }
}

TEST(unfold, least_squares_reports_iteration_cap) {
    std::mt19937_64 rng(8);
    const auto r = random_response(8, rng, 0.05);
    UnfoldConfig cfg;
    cfg.ls_max_iterations = 1;
    cfg.ls_tolerance = 1e-15;
    const ProbabilityVector m(random_positive(8, rng));
    const auto res = unfold_least_squares(r, m, cfg);
    EXPECT_FALSE(res.converged);
    EXPECT_NEAR(sum(res.estimate), m.total(), 1e-9 * m.total());
}

TEST(unfold, simplex_projection) {
    const auto p = project_to_simplex(std::vector<double>{3.0, 1.0, -2.0}, 2.0);
    EXPECT_NEAR(p[0], 2.0, 1e-15);
    EXPECT_NEAR(p[1], 0.0, 1e-15);
    EXPECT_NEAR(p[2], 0.0, 1e-15);
    const auto q = project_to_simplex(std::vector<double>{1.0, 1.0}, 4.0);
    EXPECT_NEAR(q[0], 2.0, 1e-15);
    EXPECT_NEAR(q[1], 2.0, 1e-15);
}

TEST(unfold, ibu_examples) {
    const auto fixed = unfold_ibu(hand_matrix(), ProbabilityVector{110, 90}, ibu(1)).estimate;
    EXPECT_NEAR(fixed[0], 100.0, 1e-12);
    EXPECT_NEAR(fixed[1], 100.0, 1e-12);
    const auto step = unfold_ibu(hand_matrix(), ProbabilityVector{100, 100}, ibu(1)).estimate;
    EXPECT_NEAR(step[0], 9200.0 / 99.0, 1e-9);
    EXPECT_NEAR(step[1], 10600.0 / 99.0, 1e-9);
    EXPECT_NEAR(step[0], 92.9293, 1e-4);

    const auto id = validate_response(Matrix::identity(4));
    UnfoldConfig cfg = ibu(7);
    cfg.prior = ProbabilityVector{1, 2, 3, 4};
    EXPECT_EQ(unfold_ibu(id, ProbabilityVector{4, 0, 2, 9}, cfg).estimate, (std::vector<double>{4, 0, 2, 9}));
}

TEST(unfold, ibu_hand_iteration) {
    // Two steps from [100, 100] written out with the update formula.
    std::vector<double> t{100, 100};
    const std::vector<double> m{100, 100};
    const double r[2][2] = {{0.9, 0.2}, {0.1, 0.8}};
    for (int step = 0; step < 2; ++step) {
        std::vector<double> next(2, 0.0);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                next[i] += r[j][i] * t[i] * m[j] / (r[j][0] * t[0] + r[j][1] * t[1]);
            }
        }
        t = next;
    }
    const auto got = unfold_ibu(hand_matrix(), ProbabilityVector{100, 100}, ibu(2)).estimate;
    EXPECT_NEAR(max_abs_diff(got, t), 0.0, 1e-12);
}

TEST(unfold, ibu_zero_denominator) {
    // With a prior of 1e-300 on state 1 the denominator for measured state 1
    // falls below the 1e-30 floor while m_1 > 0.
    const auto r = validate_response(Matrix{{1.0, 0.0}, {0.0, 1.0}});
    UnfoldConfig cfg = ibu(1);
    cfg.prior = ProbabilityVector{1.0, 1e-300};
    EXPECT_ERROR_CODE(unfold_ibu(r, ProbabilityVector{5, 5}, cfg), ErrorCode::ZeroDenominator);
    // With m_1 = 0 the term is skipped instead.
    EXPECT_NO_THROW(unfold_ibu(r, ProbabilityVector{5, 0}, cfg));
}

TEST(unfold, ibu_config_validation) {
    EXPECT_ERROR_CODE(unfold_ibu(hand_matrix(), ProbabilityVector{1, 1}, ibu(0)), ErrorCode::InvalidArgument);
    UnfoldConfig cfg = ibu(1);
    cfg.prior = ProbabilityVector{1.0, 0.0};
    EXPECT_ERROR_CODE(unfold(hand_matrix(), ProbabilityVector{1, 1}, cfg), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE(parse_method("svd"), ErrorCode::InvalidArgument);
    EXPECT_EQ(parse_method("ignis"), Method::LeastSquares);
}

TEST(unfold, ibu_sum_and_sign_invariants) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> qubits(1, 5);
    std::uniform_int_distribution<int> steps(1, 30);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t dim = std::size_t{1} << qubits(rng);
        const auto r = random_response(dim, rng, 0.5);
        const auto m = random_positive(dim, rng, 0.0, 1000.0);
        UnfoldConfig cfg = ibu(steps(rng));
        cfg.prior = ProbabilityVector(random_positive(dim, rng, 0.1, 10.0));
        const auto t = unfold_ibu(r, ProbabilityVector(m), cfg).estimate;
        ASSERT_NEAR(sum(t), sum(m), 1e-9 * sum(m));
        for (double v : t) ASSERT_GE(v, 0.0);
    }
}

TEST(unfold, ibu_fixed_point) {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = std::size_t{1} << (1 + trial % 4);
        const auto r = random_response(dim, rng, 1.0);
        const auto t_star = random_positive(dim, rng, 1.0, 100.0);
        const auto m = naive_product(r, t_star);
        UnfoldConfig cfg = ibu(1);
        cfg.prior = ProbabilityVector(t_star);
        const auto t1 = unfold_ibu(r, ProbabilityVector(m), cfg).estimate;
        for (std::size_t i = 0; i < dim; ++i) ASSERT_NEAR(t1[i], t_star[i], 1e-12 * 100.0);
    }
}

TEST(unfold, ibu_likelihood_is_monotone) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t dim = 8;
        const auto r = random_response(dim, rng, 0.3);
        const auto m = random_positive(dim, rng, 0.0, 1000.0);
        const ProbabilityVector mv(m);
        std::vector<int> checkpoints(50);
        for (int k = 0; k < 50; ++k) checkpoints[static_cast<std::size_t>(k)] = k + 1;
        const auto traj = ibu_trajectory(r, mv, std::nullopt, checkpoints);
        double previous = poisson_log_likelihood(r, std::vector<double>(dim, sum(m) / dim), m);
        for (const auto &t : traj) {
            const double ll = poisson_log_likelihood(r, t, m);
            ASSERT_GE(ll, previous - 1e-9 * std::abs(previous));
            previous = ll;
        }
    }
}

TEST(unfold, ibu_trajectory_matches_individual_runs) {
    std::mt19937_64 rng(29);
    const auto r = random_response(8, rng, 1.0);
    const ProbabilityVector m(random_positive(8, rng));
    const std::vector<int> checkpoints{1, 3, 10};
    const auto traj = ibu_trajectory(r, m, std::nullopt, checkpoints);
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        EXPECT_EQ(traj[k], unfold_ibu(r, m, ibu(checkpoints[k])).estimate);
    }
    EXPECT_ERROR_CODE(ibu_trajectory(r, m, std::nullopt, std::vector<int>{2, 2}), ErrorCode::InvalidArgument);
}

TEST(unfold, estimator_equivalences_on_random_instances) {
    std::mt19937_64 rng(31);
    int nonnegative = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = random_response(4, rng, 3.0);
        const auto m = poisson_noise(naive_product(r, random_positive(4, rng, 100.0, 10000.0)), rng);
        const ProbabilityVector mv(m);
        const auto inv = unfold_inversion(r, mv).estimate;
        if (*std::min_element(inv.begin(), inv.end()) < 0.0) continue;
        ++nonnegative;
        const auto ls = unfold_least_squares(r, mv).estimate;
        ASSERT_LT(max_abs_diff(ls, inv), 1e-4 * sum(m));
        const auto it = unfold_ibu(r, mv, ibu(10000)).estimate;
        ASSERT_LT(l1_diff(it, inv), 1e-3 * sum(m));
    }
    EXPECT_GT(nonnegative, 50);
}

TEST(unfold, prior_independence_in_the_limit) {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = random_response(4, rng, 3.0);
        const auto m = naive_product(r, random_positive(4, rng, 100.0, 1000.0));
        UnfoldConfig a = ibu(10000);
        UnfoldConfig b = ibu(10000);
        a.prior = ProbabilityVector(random_positive(4, rng, 0.1, 1.0));
        b.prior = ProbabilityVector(random_positive(4, rng, 10.0, 100.0));
        const auto ta = unfold_ibu(r, ProbabilityVector(m), a).estimate;
        const auto tb = unfold_ibu(r, ProbabilityVector(m), b).estimate;
        ASSERT_LT(l1_diff(ta, tb), 1e-3 * sum(m));
    }
}

TEST(unfold, estimates_preserve_total) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 30; ++trial) {
        const auto r = random_response(8, rng, 1.0);
        const ProbabilityVector m(random_positive(8, rng));
        for (Method method : {Method::Inversion, Method::LeastSquares, Method::Ibu}) {
            UnfoldConfig cfg;
            cfg.method = method;
            const auto t = unfold(r, m, cfg).estimate;
            ASSERT_NEAR(sum(t), m.total(), 1e-6 * m.total()) << to_string(method);
        }
    }
}

TEST(unfold, condition_estimate_tracks_exact_value) {
    std::mt19937_64 rng(43);
    auto exact = [](const Matrix &a) {
        const auto inv = *linalg::inverse(a);
        double na = 0.0, ni = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double ca = 0.0, ci = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i) {
                ca += std::abs(a(i, j));
                ci += std::abs(inv(i, j));
            }
            na = std::max(na, ca);
            ni = std::max(ni, ci);
        }
        return na * ni;
    };
    for (double eps : {0.1, 0.3, 0.45, 0.499}) {
        const auto r = tridiagonal_example(2, eps).matrix();
        EXPECT_NEAR(linalg::LuDecomposition::factor(r)->condition_estimate(), exact(r), 1e-9 * exact(r));
    }
    for (int trial = 0; trial < 50; ++trial) {
        const auto r = random_response(8, rng, trial % 2 ? 0.05 : 1.0).matrix();
        const double est = linalg::LuDecomposition::factor(r)->condition_estimate();
        const double truth = exact(r);
        // A lower bound; in practice rarely off by more than a small factor.
        ASSERT_LE(est, truth * (1.0 + 1e-9));
        ASSERT_GE(est, truth / 10.0);
    }
    const auto tri = tridiagonal_example(16, 0.25).matrix();
    EXPECT_GE(linalg::LuDecomposition::factor(tri)->condition_estimate(), exact(tri) / 3.0);
}
