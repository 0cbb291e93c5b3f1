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

#include "qunfold/core.hpp"

#include <random>

#include "gtest/gtest.h"
#include "qunfold/response.hpp"
#include "test_util.hpp"

using namespace qunfold;
using qunfold::testing::naive_product;

TEST(core, state_bitstring_examples) {
    EXPECT_EQ(state_bitstring(StateIndex(3, 5)), "00011");
    EXPECT_EQ(state_bitstring(StateIndex(0, 5)), "00000");
    EXPECT_EQ(state_bitstring(StateIndex(31, 5)), "11111");
    EXPECT_EQ(parse_bitstring("00011").index(), 3U);
}

TEST(core, state_bit_is_qubit_value) {
    StateIndex s(3, 5);
    EXPECT_EQ(s.bit(0), 1);
    EXPECT_EQ(s.bit(1), 1);
    EXPECT_EQ(s.bit(2), 0);
    EXPECT_EQ(s.bit(4), 0);
}

TEST(core, bitstring_round_trip_exhaustive) {
    for (int n = 1; n <= 10; ++n) {
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
            const StateIndex s(i, n);
            const auto text = state_bitstring(s);
            ASSERT_EQ(text.size(), static_cast<std::size_t>(n));
            ASSERT_EQ(parse_bitstring(text), s);
        }
    }
}

TEST(core, state_index_rejects_out_of_range) {
    EXPECT_ERROR_CODE(StateIndex(32, 5), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE(parse_bitstring("01a"), ErrorCode::InvalidArgument);
    EXPECT_ERROR_CODE(parse_bitstring(""), ErrorCode::InvalidArgument);
}

TEST(core, validate_response_examples) {
    EXPECT_NO_THROW(validate_response(Matrix::identity(4)));
    EXPECT_NO_THROW(validate_response(Matrix{{0.75, 0.25}, {0.25, 0.75}}));
    EXPECT_ERROR_CODE(validate_response(Matrix{{0.9, 0.2}, {0.2, 0.8}}), ErrorCode::ColumnSumViolation);
}

TEST(core, validate_response_errors) {
    EXPECT_ERROR_CODE(validate_response(Matrix(2, 4, 0.5)), ErrorCode::NonSquare);
    EXPECT_ERROR_CODE(validate_response(Matrix::identity(3)), ErrorCode::NotPowerOfTwo);
    EXPECT_ERROR_CODE(validate_response(Matrix::identity(1)), ErrorCode::NotPowerOfTwo);
    EXPECT_ERROR_CODE(validate_response(Matrix{{-0.1, 0.0}, {1.1, 1.0}}), ErrorCode::NegativeEntry);
}

TEST(core, validate_response_tolerance) {
    EXPECT_NO_THROW(validate_response(Matrix{{0.75 + 5e-7, 0.25}, {0.25, 0.75}}));
    EXPECT_ERROR_CODE(validate_response(Matrix{{0.75 + 2e-6, 0.25}, {0.25, 0.75}}), ErrorCode::ColumnSumViolation);
}

TEST(core, fold_examples) {
    const auto id = validate_response(Matrix::identity(4));
    const ProbabilityVector t{100, 200, 300, 400};
    EXPECT_EQ(fold(id, t).values(), t.values());

    const auto r = validate_response(Matrix{{0.9, 0.2}, {0.1, 0.8}});
    const auto m = fold(r, ProbabilityVector{100, 100});
    EXPECT_NEAR(m[0], 110.0, 1e-12);
    EXPECT_NEAR(m[1], 90.0, 1e-12);

    const auto tri = tridiagonal_example(3, 0.25);
    const auto col = fold(tri, ProbabilityVector{0, 1, 0});
    EXPECT_DOUBLE_EQ(col[0], 0.25);
    EXPECT_DOUBLE_EQ(col[1], 0.5);
    EXPECT_DOUBLE_EQ(col[2], 0.25);
}

TEST(core, fold_dimension_mismatch) {
    const auto r = validate_response(Matrix::identity(2));
    EXPECT_ERROR_CODE(fold(r, ProbabilityVector{1, 2, 3}), ErrorCode::DimensionMismatch);
}

TEST(core, fold_matches_naive_product_and_preserves_sum) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = std::size_t{1} << (1 + trial % 5);
        const auto r = qunfold::testing::random_response(dim, rng, 0.0);
        const auto t = qunfold::testing::random_positive(dim, rng);
        const auto m = fold(r, ProbabilityVector(t));
        const auto expected = naive_product(r, t);
        for (std::size_t i = 0; i < dim; ++i) {
            ASSERT_NEAR(m[i], expected[i], 1e-9 * (1.0 + std::abs(expected[i])));
        }
        ASSERT_NEAR(m.total(), sum(t), 1e-9 * sum(t));
    }
}

TEST(core, signed_fold_preserves_entry_sum) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = qunfold::testing::random_response(8, rng, 1.0);
        std::vector<double> t(8);
        for (double &x : t) {
            x = u(rng);
        }
        const auto m = fold_signed(r, t);
        ASSERT_NEAR(sum(m), sum(t), 1e-9 * l1_norm(t));
    }
}

TEST(core, probability_vector_invariants) {
    const ProbabilityVector v{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(v.total(), 10.0);
    EXPECT_EQ(v.n_qubits(), 2);
    EXPECT_NEAR(v.normalized().total(), 1.0, 1e-15);
    EXPECT_ERROR_CODE(ProbabilityVector({1.0, -1.0}), ErrorCode::NegativeEntry);
    EXPECT_ERROR_CODE(ProbabilityVector(std::vector<double>{}), ErrorCode::InvalidArgument);
}

TEST(core, count_vector) {
    const CountVector c(std::vector<std::int64_t>{1, 2, 3, 4});
    EXPECT_EQ(c.total(), 10);
    EXPECT_EQ(c.n_qubits(), 2);
    EXPECT_ERROR_CODE(CountVector(std::vector<std::int64_t>{1, -2}), ErrorCode::NegativeEntry);
}

TEST(core, error_classification) {
    EXPECT_TRUE(is_numerical(ErrorCode::SingularMatrix));
    EXPECT_TRUE(is_numerical(ErrorCode::ZeroDenominator));
    EXPECT_FALSE(is_numerical(ErrorCode::ColumnSumViolation));
}
