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

// Reproducible random numbers.
//
// The engine is Philox4x32-10 (Salmon et al., SC'11): the 64-bit seed is the
// key, the 128-bit counter holds a 64-bit block index (low words) and a
// 64-bit stream id (high words). Independent streams are addressed by
// combining identifiers with the SplitMix64 finalizer, so replica b of a
// bootstrap always sees the same numbers regardless of thread scheduling.
//
// Variates are produced by fixed, documented algorithms rather than the
// implementation-defined <random> distributions:
//   uniform   53-bit mantissa from one 64-bit draw
//   poisson   inversion by sequential search (mean < 10), PTRS otherwise
//             (Hoermann 1993)
//   binomial  inversion (n min(p, 1-p) < 10), BTRD otherwise (Hoermann 1993)
//   multinomial  sequential conditional binomials

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qunfold/core.hpp"

namespace qunfold::random {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream id for a sequence of identifiers, e.g. derive_stream({domain, replica}).
inline constexpr std::uint64_t derive_stream(std::initializer_list<std::uint64_t> ids) {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (auto id : ids) {
        h = splitmix64(h ^ splitmix64(id));
    }
    return h;
}

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// The bare Philox4x32-10 bijection.
inline constexpr PhiloxBlock philox4x32_10(PhiloxBlock ctr, PhiloxKey key) {
    constexpr std::uint32_t kM0 = 0xD2511F53U;
    constexpr std::uint32_t kM1 = 0xCD9E8D57U;
    constexpr std::uint32_t kW0 = 0x9E3779B9U;
    constexpr std::uint32_t kW1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Counter-mode Philox engine; satisfies UniformRandomBitGenerator.
class Philox {
  public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (lane_ == 2) {
            refill();
        }
        const std::size_t i = 2 * lane_++;
        return (std::uint64_t{buffer_[i + 1]} << 32) | buffer_[i];
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  private:
    void refill() {
        const PhiloxBlock ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = philox4x32_10(ctr, key_);
        ++block_;
        lane_ = 0;
    }

    PhiloxKey key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    PhiloxBlock buffer_{};
    std::size_t lane_ = 2;
};

namespace detail {

/// Stirling series correction log(k!) - [(k + 1/2) log(k + 1) - (k + 1) + log(2 pi)/2].
inline double stirling_tail(double k) {
    static constexpr double kTable[10] = {0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
                                          0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
                                          0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
                                          0.008330563433362871};
    if (k < 10.0) {
        return kTable[static_cast<int>(k)];
    }
    const double r = 1.0 / (k + 1.0);
    const double r2 = r * r;
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - (1.0 / 1188.0) * r2) * r2) * r2) * r2) * r;
}

inline std::int64_t binomial_inversion(Philox &rng, std::int64_t n, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double a = static_cast<double>(n + 1) * s;
    const double r0 = std::pow(q, static_cast<double>(n));
    for (;;) {
        double r = r0;
        double u = rng.uniform();
        std::int64_t x = 0;
        bool ok = true;
        while (u > r) {
            u -= r;
            ++x;
            if (x > n) {
                ok = false;
                break;
            }
            r *= a / static_cast<double>(x) - s;
        }
        if (ok) {
            return x;
        }
    }
}

// BTRD, "The generation of binomial random variates", Hoermann (1993).
inline std::int64_t binomial_btrd(Philox &rng, std::int64_t n_int, double p) {
    const double n = static_cast<double>(n_int);
    const double q = 1.0 - p;
    const double m = std::floor((n + 1.0) * p);
    const double r = p / q;
    const double nr = (n + 1.0) * r;
    const double npq = n * p * q;
    const double sqrt_npq = std::sqrt(npq);
    const double b = 1.15 + 2.53 * sqrt_npq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = n * p + 0.5;
    const double alpha = (2.83 + 5.1 / b) * sqrt_npq;
    const double v_r = 0.92 - 4.2 / b;
    const double u_rv_r = 0.86 * v_r;

    for (;;) {
        double v = rng.uniform();
        double u;
        if (v <= u_rv_r) {
            u = v / v_r - 0.43;
            return static_cast<std::int64_t>(std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + c));
        }
        if (v >= v_r) {
            u = rng.uniform() - 0.5;
        } else {
            u = v / v_r - 0.93;
            u = (u < 0.0 ? -0.5 : 0.5) - u;
            v = rng.uniform() * v_r;
        }
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + c);
        if (k < 0.0 || k > n) {
            continue;
        }
        v = v * alpha / (a / (us * us) + b);
        const double km = std::abs(k - m);
        if (km <= 15.0) {
            // Recursive evaluation of f(k) = pmf(k) / pmf(m).
            double f = 1.0;
            if (m < k) {
                for (double i = m + 1.0; i <= k; i += 1.0) {
                    f *= nr / i - r;
                }
            } else if (m > k) {
                for (double i = k + 1.0; i <= m; i += 1.0) {
                    v *= nr / i - r;
                }
            }
            if (v <= f) {
                return static_cast<std::int64_t>(k);
            }
            continue;
        }
        v = std::log(v);
        const double rho = (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
        const double t = -km * km / (2.0 * npq);
        if (v < t - rho) {
            return static_cast<std::int64_t>(k);
        }
        if (v > t + rho) {
            continue;
        }
        const double nm = n - m + 1.0;
        const double h = (m + 0.5) * std::log((m + 1.0) / (r * nm)) + stirling_tail(m) + stirling_tail(n - m);
        const double nk = n - k + 1.0;
        if (v <= h + (n + 1.0) * std::log(nm / nk) + (k + 0.5) * std::log(nk * r / (k + 1.0)) - stirling_tail(k) -
                     stirling_tail(n - k)) {
            return static_cast<std::int64_t>(k);
        }
    }
}

inline std::int64_t poisson_inversion(Philox &rng, double mean) {
    const double p0 = std::exp(-mean);
    for (;;) {
        double u = rng.uniform();
        double p = p0;
        std::int64_t x = 0;
        while (u > p && x < 1000) {
            u -= p;
            ++x;
            p *= mean / static_cast<double>(x);
        }
        if (x < 1000) {
            return x;
        }
    }
}

// PTRS, "The transformed rejection method for generating Poisson random
// variables", Hoermann (1993).
inline std::int64_t poisson_ptrs(Philox &rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::int64_t>(k);
        }
        if (k < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * loglam - std::lgamma(k + 1.0)) {
            return static_cast<std::int64_t>(k);
        }
    }
}

}  // namespace detail

inline std::int64_t binomial(Philox &rng, std::int64_t n, double p) {
    require(n >= 0, ErrorCode::InvalidArgument, "binomial trials must be >= 0");
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "binomial probability outside [0, 1]");
    if (n == 0 || p == 0.0) {
        return 0;
    }
    if (p == 1.0) {
        return n;
    }
    if (p > 0.5) {
        return n - binomial(rng, n, 1.0 - p);
    }
    if (static_cast<double>(n) * p < 10.0) {
        return detail::binomial_inversion(rng, n, p);
    }
    return detail::binomial_btrd(rng, n, p);
}

inline std::int64_t poisson(Philox &rng, double mean) {
    require(mean >= 0.0 && std::isfinite(mean), ErrorCode::InvalidArgument, "Poisson mean must be finite and >= 0");
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 10.0) {
        return detail::poisson_inversion(rng, mean);
    }
    return detail::poisson_ptrs(rng, mean);
}

/// `trials` draws over categories with (possibly unnormalized) weights.
inline std::vector<std::int64_t> multinomial(Philox &rng, std::int64_t trials, std::span<const double> weights) {
    require(trials >= 0, ErrorCode::InvalidArgument, "multinomial trials must be >= 0");
    double remaining_mass = 0.0;
    for (double w : weights) {
        require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "multinomial weights must be >= 0");
        remaining_mass += w;
    }
    std::vector<std::int64_t> out(weights.size(), 0);
    if (trials == 0) {
        return out;
    }
    require(remaining_mass > 0.0, ErrorCode::InvalidArgument, "multinomial weights sum to zero");
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            last = i;
        }
    }
    std::int64_t remaining = trials;
    for (std::size_t i = 0; i < last && remaining > 0; ++i) {
        if (weights[i] == 0.0) {
            continue;
        }
        const double p = std::min(1.0, weights[i] / remaining_mass);
        const auto x = binomial(rng, remaining, p);
        out[i] = x;
        remaining -= x;
        remaining_mass -= weights[i];
        if (!(remaining_mass > 0.0)) {
            remaining_mass = 0.0;
        }
    }
    out[last] += remaining;
    return out;
}

}  // namespace qunfold::random
