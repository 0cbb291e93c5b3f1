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
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qunfold {

/// Largest register the library accepts for qubit-indexed state spaces.
inline constexpr int kMaxQubits = 14;

/// Column-sum tolerance applied to ingested response matrices.
inline constexpr double kColumnSumTolerance = 1e-6;

enum class ErrorCode {
    NonSquare,
    NotPowerOfTwo,
    NegativeEntry,
    ColumnSumViolation,
    DimensionMismatch,
    InvalidArgument,
    EpsOutOfRange,
    ShotMismatch,
    QubitOutOfRange,
    InvalidB,
    EmptyIterationList,
    SingularMatrix,
    ZeroDenominator,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::ColumnSumViolation: return "ColumnSumViolation";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
        case ErrorCode::ShotMismatch: return "ShotMismatch";
        case ErrorCode::QubitOutOfRange: return "QubitOutOfRange";
        case ErrorCode::InvalidB: return "InvalidB";
        case ErrorCode::EmptyIterationList: return "EmptyIterationList";
        case ErrorCode::SingularMatrix: return "SingularMatrix";
        case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    }
    return "Unknown";
}

/// True for failures of the numerics rather than of the caller's input.
constexpr bool is_numerical(ErrorCode code) {
    return code == ErrorCode::SingularMatrix || code == ErrorCode::ZeroDenominator;
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string &what) {
    if (!condition) {
        throw Error(code, what);
    }
}

constexpr bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// log2 of a power of two, -1 otherwise.
constexpr int qubits_for_dimension(std::size_t dim) {
    if (!is_power_of_two(dim)) {
        return -1;
    }
    int n = 0;
    while ((std::size_t{1} << n) < dim) {
        ++n;
    }
    return n;
}

constexpr std::size_t dimension_for_qubits(int n_qubits) { return std::size_t{1} << n_qubits; }

// ---------------------------------------------------------------------------
// Basis-state indexing. Qubit q is bit q of the index (q = 0 least
// significant); bitstrings print the most significant bit first.
// ---------------------------------------------------------------------------

class StateIndex {
  public:
    StateIndex(std::uint64_t index, int n_qubits) : index_(index), n_qubits_(n_qubits) {
        require(n_qubits >= 1 && n_qubits <= 63, ErrorCode::InvalidArgument,
                "n_qubits must be in [1, 63]");
        require(index < (std::uint64_t{1} << n_qubits), ErrorCode::InvalidArgument,
                "state index " + std::to_string(index) + " out of range for " +
                    std::to_string(n_qubits) + " qubits");
    }

    std::uint64_t index() const { return index_; }
    int n_qubits() const { return n_qubits_; }
    int bit(int qubit) const { return static_cast<int>((index_ >> qubit) & 1U); }

    friend bool operator==(const StateIndex &, const StateIndex &) = default;

  private:
    std::uint64_t index_;
    int n_qubits_;
};

inline std::string state_bitstring(const StateIndex &s) {
    std::string out(static_cast<std::size_t>(s.n_qubits()), '0');
    for (int q = 0; q < s.n_qubits(); ++q) {
        if (s.bit(q)) {
            out[static_cast<std::size_t>(s.n_qubits() - 1 - q)] = '1';
        }
    }
    return out;
}

inline StateIndex parse_bitstring(std::string_view bits) {
    require(!bits.empty() && bits.size() <= 63, ErrorCode::InvalidArgument,
            "bitstring length must be in [1, 63]");
    std::uint64_t index = 0;
    for (char c : bits) {
        require(c == '0' || c == '1', ErrorCode::InvalidArgument,
                "bitstring may only contain '0' and '1'");
        index = (index << 1) | static_cast<std::uint64_t>(c - '0');
    }
    return StateIndex(index, static_cast<int>(bits.size()));
}

// ---------------------------------------------------------------------------
// Dense row-major matrix.
// ---------------------------------------------------------------------------

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto &row : rows) {
            require(row.size() == cols_, ErrorCode::DimensionMismatch, "ragged matrix literal");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix from_rows(const std::vector<std::vector<double>> &rows) {
        Matrix m;
        m.rows_ = rows.size();
        m.cols_ = rows.empty() ? 0 : rows.front().size();
        m.data_.reserve(m.rows_ * m.cols_);
        for (const auto &row : rows) {
            require(row.size() == m.cols_, ErrorCode::DimensionMismatch, "ragged matrix rows");
            m.data_.insert(m.data_.end(), row.begin(), row.end());
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

    std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            out[r].assign(row(r).begin(), row(r).end());
        }
        return out;
    }

    friend bool operator==(const Matrix &, const Matrix &) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline std::vector<double> multiply(const Matrix &a, std::span<const double> x) {
    require(a.cols() == x.size(), ErrorCode::DimensionMismatch,
            "matrix has " + std::to_string(a.cols()) + " columns, vector has " +
                std::to_string(x.size()) + " entries");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            acc += row[j] * x[j];
        }
        y[i] = acc;
    }
    return y;
}

/// y = A^T x
inline std::vector<double> multiply_transposed(const Matrix &a, std::span<const double> x) {
    require(a.rows() == x.size(), ErrorCode::DimensionMismatch, "transposed product size mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < row.size(); ++j) {
            y[j] += row[j] * xi;
        }
    }
    return y;
}

inline Matrix multiply(const Matrix &a, const Matrix &b) {
    require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "matrix product size mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

inline double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline double l1_norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) {
        acc += std::abs(x);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Histograms over basis states (or over spectrum bins).
// ---------------------------------------------------------------------------

class CountVector {
  public:
    CountVector() = default;
    explicit CountVector(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
        require(!counts_.empty(), ErrorCode::InvalidArgument, "empty count vector");
        for (auto c : counts_) {
            require(c >= 0, ErrorCode::NegativeEntry, "counts must be non-negative");
        }
    }
    CountVector(std::initializer_list<std::int64_t> counts)
        : CountVector(std::vector<std::int64_t>(counts)) {}

    std::size_t size() const { return counts_.size(); }
    int n_qubits() const { return qubits_for_dimension(counts_.size()); }
    std::int64_t operator[](std::size_t i) const { return counts_[i]; }
    const std::vector<std::int64_t> &counts() const { return counts_; }

    std::int64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

    std::vector<double> as_doubles() const { return {counts_.begin(), counts_.end()}; }

    friend bool operator==(const CountVector &, const CountVector &) = default;

  private:
    std::vector<std::int64_t> counts_;
};

/// Non-negative real histogram; `total()` is its L1 norm.
class ProbabilityVector {
  public:
    ProbabilityVector() = default;
    explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
        require(!values_.empty(), ErrorCode::InvalidArgument, "empty probability vector");
        for (double v : values_) {
            require(std::isfinite(v), ErrorCode::InvalidArgument, "non-finite entry");
            require(v >= 0.0, ErrorCode::NegativeEntry, "entries must be non-negative");
        }
        total_ = qunfold::sum(values_);
    }
    ProbabilityVector(std::initializer_list<double> values)
        : ProbabilityVector(std::vector<double>(values)) {}
    explicit ProbabilityVector(const CountVector &counts) : ProbabilityVector(counts.as_doubles()) {}

    std::size_t size() const { return values_.size(); }
    int n_qubits() const { return qubits_for_dimension(values_.size()); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double> &values() const { return values_; }
    double total() const { return total_; }

    ProbabilityVector normalized() const {
        require(total_ > 0.0, ErrorCode::InvalidArgument, "cannot normalize a zero vector");
        std::vector<double> out(values_);
        for (double &v : out) {
            v /= total_;
        }
        return ProbabilityVector(std::move(out));
    }

    ProbabilityVector scaled(double factor) const {
        std::vector<double> out(values_);
        for (double &v : out) {
            v *= factor;
        }
        return ProbabilityVector(std::move(out));
    }

  private:
    std::vector<double> values_;
    double total_ = 0.0;
};

// ---------------------------------------------------------------------------
// Response matrices: R(i, j) = Pr(measure i | true j), columns sum to one.
// ---------------------------------------------------------------------------

class ResponseMatrix {
  public:
    /// Validates a qubit-space response: square, side 2^n with n >= 1,
    /// entries in [0, 1], every column summing to one within `tolerance`.
    static ResponseMatrix validate(Matrix m, double tolerance = kColumnSumTolerance) {
        require(m.square(), ErrorCode::NonSquare,
                "response matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        const int n = qubits_for_dimension(m.rows());
        require(n >= 1, ErrorCode::NotPowerOfTwo,
                "side " + std::to_string(m.rows()) + " is not 2^n for n >= 1");
        check_stochastic(m, tolerance);
        return ResponseMatrix(std::move(m), n);
    }

    /// Binned-spectrum entry point: any side >= 1, same stochastic checks.
    static ResponseMatrix binned(Matrix m, double tolerance = kColumnSumTolerance) {
        require(m.square(), ErrorCode::NonSquare,
                "response matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        require(m.rows() >= 1, ErrorCode::InvalidArgument, "empty response matrix");
        check_stochastic(m, tolerance);
        const int n = qubits_for_dimension(m.rows());
        return ResponseMatrix(std::move(m), n >= 1 ? n : 0);
    }

    std::size_t size() const { return matrix_.rows(); }
    /// 0 for binned spectra whose side is not a power of two.
    int n_qubits() const { return n_qubits_; }
    bool is_qubit_space() const { return n_qubits_ >= 1; }

    double operator()(std::size_t measured, std::size_t truth) const { return matrix_(measured, truth); }
    const Matrix &matrix() const { return matrix_; }

  private:
    ResponseMatrix(Matrix m, int n_qubits) : matrix_(std::move(m)), n_qubits_(n_qubits) {}

    static void check_stochastic(const Matrix &m, double tolerance) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                const double v = m(i, j);
                require(std::isfinite(v), ErrorCode::InvalidArgument, "non-finite entry");
                require(v >= 0.0, ErrorCode::NegativeEntry,
                        "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative");
                require(v <= 1.0 + tolerance, ErrorCode::ColumnSumViolation,
                        "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") exceeds 1");
                col += v;
            }
            require(std::abs(col - 1.0) <= tolerance, ErrorCode::ColumnSumViolation,
                    "column " + std::to_string(j) + " sums to " + std::to_string(col));
        }
    }

    Matrix matrix_;
    int n_qubits_;
};

inline ResponseMatrix validate_response(Matrix m) { return ResponseMatrix::validate(std::move(m)); }

/// m = R t. Column-stochastic R preserves the entry sum of t.
inline ProbabilityVector fold(const ResponseMatrix &r, const ProbabilityVector &t) {
    require(r.size() == t.size(), ErrorCode::DimensionMismatch,
            "response side " + std::to_string(r.size()) + " vs vector length " + std::to_string(t.size()));
    return ProbabilityVector(multiply(r.matrix(), t.values()));
}

/// Signed variant of `fold` for vectors that may carry negative entries.
inline std::vector<double> fold_signed(const ResponseMatrix &r, std::span<const double> t) {
    require(r.size() == t.size(), ErrorCode::DimensionMismatch, "fold dimension mismatch");
    return multiply(r.matrix(), t);
}

}  // namespace qunfold
