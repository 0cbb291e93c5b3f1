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

#include "qunfold/response.hpp"

#include <random>

#include "gtest/gtest.h"
#include "qunfold/linalg.hpp"
#include "qunfold/sim.hpp"
#include "test_util.hpp"

using namespace qunfold;

namespace {

// Brute-force product over bits, written from the definition of independent flips.
double per_bit_product(const std::vector<double> &p01, const std::vector<double> &p10, std::size_t measured,
                       std::size_t truth) {
    double p = 1.0;
    for (std::size_t q = 0; q < p01.size(); ++q) {
        const bool t = (truth >> q) & 1U;
        const bool m = (measured >> q) & 1U;
        if (!t && !m) p *= 1.0 - p01[q];
        if (!t && m) p *= p01[q];
        if (t && !m) p *= p10[q];
        if (t && m) p *= 1.0 - p10[q];
    }
    return p;
}

}  // namespace

TEST(response, build_from_calibration_noiseless) {
    const CalibrationData c(1, 8192, {CountVector{8192, 0}, CountVector{0, 8192}});
    EXPECT_EQ(build_from_calibration(c).matrix(), Matrix::identity(2));
}

TEST(response, build_from_calibration_normalizes_columns) {
    const CalibrationData c(1, 10000, {CountVector{7500, 2500}, CountVector{2500, 7500}});
    const auto r = build_from_calibration(c);
    EXPECT_DOUBLE_EQ(r(0, 0), 0.75);
    EXPECT_DOUBLE_EQ(r(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(r(0, 1), 0.25);
    EXPECT_DOUBLE_EQ(r(1, 1), 0.75);
}

TEST(response, build_from_calibration_leaky_state) {
    // |01> (index 1) mostly reads correctly and leaks to |00>.
    const CalibrationData c(2, 1000, {CountVector{1000, 0, 0, 0}, CountVector{120, 860, 0, 20},
                                      CountVector{0, 0, 1000, 0}, CountVector{0, 0, 0, 1000}});
    const auto r = build_from_calibration(c);
    std::size_t argmax = 0;
    for (std::size_t i = 1; i < 4; ++i) {
        if (r(i, 1) > r(argmax, 1)) argmax = i;
    }
    EXPECT_EQ(argmax, 1U);
    EXPECT_DOUBLE_EQ(r(0, 1), 0.12);
}

TEST(response, calibration_validation) {
    EXPECT_ERROR_CODE(CalibrationData(1, 100, {CountVector{60, 30}, CountVector{0, 100}}), ErrorCode::ShotMismatch);
    EXPECT_ERROR_CODE(CalibrationData(2, 100, {CountVector{100, 0}, CountVector{0, 100}}),
                      ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(CalibrationData(1, 0, {CountVector{0, 0}, CountVector{0, 0}}), ErrorCode::InvalidArgument);
}

TEST(response, from_noise_model_examples) {
    EXPECT_EQ(from_noise_model(NoiseModel({0.0}, {0.0})).matrix(), Matrix::identity(2));
    const auto r = from_noise_model(NoiseModel({0.032}, {0.075}));
    EXPECT_NEAR(r(0, 0), 0.968, 1e-15);
    EXPECT_NEAR(r(0, 1), 0.075, 1e-15);
    EXPECT_NEAR(r(1, 0), 0.032, 1e-15);
    EXPECT_NEAR(r(1, 1), 0.925, 1e-15);
    const auto r2 = from_noise_model(NoiseModel::uniform(2, 0.1, 0.2));
    EXPECT_NEAR(r2(3, 0), 0.01, 1e-15);
}

TEST(response, from_noise_model_matches_per_bit_oracle) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 0.3);
    for (int n = 1; n <= 4; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> p01(static_cast<std::size_t>(n)), p10(static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q) {
                p01[static_cast<std::size_t>(q)] = u(rng);
                p10[static_cast<std::size_t>(q)] = u(rng);
            }
            if (trial == 0) {
                std::fill(p01.begin(), p01.end(), 0.032);
                std::fill(p10.begin(), p10.end(), 0.075);
            }
            const auto r = from_noise_model(NoiseModel(p01, p10));
            for (std::size_t i = 0; i < r.size(); ++i) {
                for (std::size_t j = 0; j < r.size(); ++j) {
                    ASSERT_NEAR(r(i, j), per_bit_product(p01, p10, i, j), 1e-15) << n << " " << i << " " << j;
                }
            }
        }
    }
}

TEST(response, noise_model_validation) {
    EXPECT_ERROR_CODE(NoiseModel({0.1, 0.2}, {0.1}), ErrorCode::DimensionMismatch);
    EXPECT_ERROR_CODE(NoiseModel({1.2}, {0.1}), ErrorCode::InvalidArgument);
}

TEST(response, tridiagonal_examples) {
    const auto r3 = tridiagonal_example(3, 0.25);
    EXPECT_EQ(r3.matrix(), (Matrix{{0.75, 0.25, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.25, 0.75}}));
    EXPECT_EQ(r3.n_qubits(), 0);
    EXPECT_EQ(tridiagonal_example(2, 0.25).matrix(), (Matrix{{0.75, 0.25}, {0.25, 0.75}}));
    const auto tiny = tridiagonal_example(21, 1e-14);
    for (std::size_t i = 0; i < 21; ++i) {
        for (std::size_t j = 0; j < 21; ++j) {
            EXPECT_NEAR(tiny(i, j), i == j ? 1.0 : 0.0, 1e-13);
        }
    }
    EXPECT_ERROR_CODE(tridiagonal_example(3, 0.0), ErrorCode::EpsOutOfRange);
    EXPECT_ERROR_CODE(tridiagonal_example(3, 0.5), ErrorCode::EpsOutOfRange);
    EXPECT_ERROR_CODE(tridiagonal_example(1, 0.1), ErrorCode::InvalidArgument);
}

TEST(response, constructors_pass_validation) {
    EXPECT_NO_THROW(validate_response(from_noise_model(NoiseModel::uniform(4, 0.032, 0.075)).matrix()));
    EXPECT_NO_THROW(validate_response(tridiagonal_example(16, 0.25).matrix()));
    EXPECT_NO_THROW(validate_response(two_level_example(0.3).matrix()));
    EXPECT_NO_THROW(ResponseMatrix::binned(tridiagonal_example(21, 0.25).matrix()));
    EXPECT_NO_THROW(validate_response(perturb_response(tridiagonal_example(8, 0.2), 0.05).matrix()));
}

TEST(response, two_level_inverse_examples) {
    EXPECT_EQ(two_level_example(0.25).matrix(), (Matrix{{0.75, 0.25}, {0.25, 0.75}}));
    const auto inv = two_level_inverse(0.25);
    EXPECT_NEAR(inv(0, 0), 1.5, 1e-15);
    EXPECT_NEAR(inv(0, 1), -0.5, 1e-15);
    const auto inv4 = *linalg::inverse(two_level_example(0.4).matrix());
    EXPECT_NEAR(inv4(0, 0), 3.0, 1e-12);
    EXPECT_ERROR_CODE(two_level_example(0.5), ErrorCode::EpsOutOfRange);
}

TEST(response, inverse_amplification_grows_toward_half) {
    double previous = 0.0;
    for (double eps : {0.1, 0.25, 0.4, 0.45, 0.49}) {
        const auto inv = *linalg::inverse(two_level_example(eps).matrix());
        double largest = 0.0;
        for (double v : inv.data()) largest = std::max(largest, std::abs(v));
        EXPECT_NEAR(largest, (1 - eps) / (1 - 2 * eps), 1e-9);
        EXPECT_GT(largest, previous);
        previous = largest;
    }
}

TEST(response, calibration_converges_to_response) {
    const auto r = from_noise_model(NoiseModel({0.02, 0.05, 0.03}, {0.07, 0.04, 0.1}));
    const auto rebuilt = build_from_calibration(simulate_calibration(r, 1000000, 21));
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t j = 0; j < r.size(); ++j) {
            worst = std::max(worst, std::abs(rebuilt(i, j) - r(i, j)));
        }
    }
    EXPECT_LT(worst, 5e-3);
}

TEST(response, perturbation_composes_uniform_flips) {
    const auto r = tridiagonal_example(4, 0.2);
    EXPECT_EQ(perturb_response(r, 0.0).matrix(), r.matrix());
    const auto p = perturb_response(r, 0.01);
    // Column j of the result is the flip channel applied to column j of R.
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t i = 0; i < 4; ++i) {
            double expected = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                expected += per_bit_product({0.01, 0.01}, {0.01, 0.01}, i, k) * r(k, j);
            }
            EXPECT_NEAR(p(i, j), expected, 1e-15);
        }
    }
}

TEST(response, readout_factor_table) {
    EXPECT_DOUBLE_EQ(readout_factor(0.1, 0.2, 0, 0), 0.9);
    EXPECT_DOUBLE_EQ(readout_factor(0.1, 0.2, 0, 1), 0.1);
    EXPECT_DOUBLE_EQ(readout_factor(0.1, 0.2, 1, 0), 0.2);
    EXPECT_DOUBLE_EQ(readout_factor(0.1, 0.2, 1, 1), 0.8);
}
