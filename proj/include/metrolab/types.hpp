#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace metrolab {

using Index = Eigen::Index;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using ComplexVector = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealVector = Eigen::Vector<Scalar, Eigen::Dynamic>;

template <typename Scalar>
using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Dense storage is capped well below the product-dimension cap; anything
// larger must go through the diagonal or low-rank representations.
inline constexpr Index kDenseDimLimit = 4096;
inline constexpr Index kProductDimLimit = Index{1} << 16;

// Numeric thresholds used by construction-time invariant checks. The double
// values are the contractual ones; the float specialization loosens them to
// keep the single-precision instantiation usable in smoke tests.
template <typename Scalar>
struct Tolerances;

template <>
struct Tolerances<double> {
    static constexpr double norm = 1e-12;
    static constexpr double hermiticity = 1e-12;
    static constexpr double expectation_imag = 1e-10;
    static constexpr double variance_negative = 1e-10;
    static constexpr double completeness = 1e-10;
    static constexpr double effect_negativity = 1e-10;
    static constexpr double prob_clamp = 1e-12;
    static constexpr double prob_sum = 1e-10;
    static constexpr double deriv_sum = 1e-10;
    static constexpr double fisher_prob_floor = 1e-14;
    static constexpr double fisher_deriv_floor = 1e-12;
    static constexpr double resource_floor = 1e-15;
    static constexpr double tail_mass = 1e-12;
    static constexpr double ground_shift = 1e-10;
};

template <>
struct Tolerances<float> {
    static constexpr float norm = 1e-5f;
    static constexpr float hermiticity = 1e-5f;
    static constexpr float expectation_imag = 1e-4f;
    static constexpr float variance_negative = 1e-4f;
    static constexpr float completeness = 1e-4f;
    static constexpr float effect_negativity = 1e-4f;
    static constexpr float prob_clamp = 1e-6f;
    static constexpr float prob_sum = 1e-4f;
    static constexpr float deriv_sum = 1e-4f;
    static constexpr float fisher_prob_floor = 1e-7f;
    static constexpr float fisher_deriv_floor = 1e-6f;
    static constexpr float resource_floor = 1e-7f;
    static constexpr float tail_mass = 1e-6f;
    static constexpr float ground_shift = 1e-4f;
};

} // namespace metrolab
