#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "metrolab/errors.hpp"
#include "metrolab/types.hpp"

namespace metrolab {

/// Pure state on a tensor product of finite-dimensional factors. Amplitudes
/// are stored in row-major subsystem order: the basis index of the last
/// factor varies fastest.
template <typename Scalar = double>
class StateVector {
  public:
    using Vector = ComplexVector<Scalar>;

    StateVector(std::vector<Index> dims, Vector amplitudes)
        : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
        if (dims_.empty())
            throw DimensionError("state needs at least one subsystem");
        Index product = 1;
        for (Index d : dims_) {
            if (d < 2)
                throw DimensionError("subsystem dimension must be at least 2, got " +
                                     std::to_string(d));
            if (product > kProductDimLimit / d)
                throw SizeError("product dimension exceeds " +
                                std::to_string(kProductDimLimit));
            product *= d;
        }
        if (product != amplitudes_.size())
            throw DimensionError("amplitude count " +
                                 std::to_string(amplitudes_.size()) +
                                 " does not match product dimension " +
                                 std::to_string(product));
        const Scalar n = amplitudes_.norm();
        if (std::abs(n - Scalar(1)) > Tolerances<Scalar>::norm)
            throw NormalizationError("state norm is " + std::to_string(n));
    }

    /// Rescales the amplitudes to unit norm before construction.
    static StateVector normalized(std::vector<Index> dims, Vector amplitudes) {
        const Scalar n = amplitudes.norm();
        if (n == Scalar(0))
            throw NormalizationError("cannot normalize the zero vector");
        return StateVector(std::move(dims), amplitudes / n);
    }

    const std::vector<Index>& dims() const { return dims_; }
    const Vector& amplitudes() const { return amplitudes_; }
    Index dim() const { return amplitudes_.size(); }
    Index n_subsystems() const { return static_cast<Index>(dims_.size()); }

  private:
    std::vector<Index> dims_;
    Vector amplitudes_;
};

/// ⟨a|b⟩ with the conjugation on the first argument.
template <typename Scalar>
Complex<Scalar> inner_product(const StateVector<Scalar>& a,
                              const StateVector<Scalar>& b) {
    if (a.dim() != b.dim())
        throw DimensionError("inner product between states of dimension " +
                             std::to_string(a.dim()) + " and " +
                             std::to_string(b.dim()));
    return a.amplitudes().dot(b.amplitudes());
}

/// Fidelity overlap |⟨a|b⟩|².
template <typename Scalar>
Scalar overlap(const StateVector<Scalar>& a, const StateVector<Scalar>& b) {
    return std::norm(inner_product(a, b));
}

/// Hermitian operator with three storage modes: a dense matrix, a real
/// diagonal, or a low-rank factorization sum_k w_k |v_k><v_k|. The diagonal
/// and low-rank modes exist so that 2^16-dimensional register operators and
/// rank-few projectors never materialize a dense matrix.
template <typename Scalar = double>
class HermitianOperator {
  public:
    using Matrix = ComplexMatrix<Scalar>;
    using Vector = ComplexVector<Scalar>;
    using Diagonal = RealVector<Scalar>;

    enum class Storage { Dense, Diag, LowRank };

    static HermitianOperator from_dense(Matrix entries) {
        const Index d = entries.rows();
        if (d == 0 || entries.cols() != d)
            throw DimensionError("dense operator must be square and non-empty");
        if (d > kDenseDimLimit)
            throw SizeError("dense operator of dimension " + std::to_string(d) +
                            " exceeds the dense limit " +
                            std::to_string(kDenseDimLimit));
        const Scalar dev = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
        if (dev > Tolerances<Scalar>::hermiticity)
            throw HermiticityError("deviation from the conjugate transpose is " +
                                   std::to_string(dev));
        HermitianOperator op;
        if (is_exactly_diagonal(entries)) {
            op.storage_ = Storage::Diag;
            op.diag_ = entries.diagonal().real();
        } else {
            op.storage_ = Storage::Dense;
            op.entries_ = std::move(entries);
        }
        op.dim_ = d;
        return op;
    }

    static HermitianOperator from_diagonal(Diagonal values) {
        const Index d = values.size();
        if (d == 0)
            throw DimensionError("diagonal operator must be non-empty");
        if (d > kProductDimLimit)
            throw SizeError("operator dimension " + std::to_string(d) +
                            " exceeds " + std::to_string(kProductDimLimit));
        HermitianOperator op;
        op.storage_ = Storage::Diag;
        op.dim_ = d;
        op.diag_ = std::move(values);
        return op;
    }

    /// sum_k weights[k] * columns.col(k) * columns.col(k).adjoint(); the
    /// columns need not be orthonormal.
    static HermitianOperator from_low_rank(Matrix columns, Diagonal weights) {
        const Index d = columns.rows();
        if (d == 0 || columns.cols() == 0)
            throw DimensionError("low-rank operator needs at least one column");
        if (columns.cols() != weights.size())
            throw DimensionError("low-rank operator has " +
                                 std::to_string(columns.cols()) +
                                 " columns but " + std::to_string(weights.size()) +
                                 " weights");
        if (d > kProductDimLimit)
            throw SizeError("operator dimension " + std::to_string(d) +
                            " exceeds " + std::to_string(kProductDimLimit));
        HermitianOperator op;
        op.storage_ = Storage::LowRank;
        op.dim_ = d;
        op.entries_ = std::move(columns);
        op.diag_ = std::move(weights);
        return op;
    }

    Index dim() const { return dim_; }
    Storage storage() const { return storage_; }
    bool is_diagonal() const { return storage_ == Storage::Diag; }

    const Diagonal& diagonal() const {
        if (storage_ != Storage::Diag)
            throw DimensionError("operator is not stored as a diagonal");
        return diag_;
    }

    const Matrix& low_rank_columns() const {
        if (storage_ != Storage::LowRank)
            throw DimensionError("operator is not stored in low-rank form");
        return entries_;
    }

    const Diagonal& low_rank_weights() const {
        if (storage_ != Storage::LowRank)
            throw DimensionError("operator is not stored in low-rank form");
        return diag_;
    }

    /// Materializes the full matrix. Guarded by the dense size cap, so the
    /// huge diagonal operators refuse rather than allocate gigabytes.
    Matrix dense() const {
        if (dim_ > kDenseDimLimit)
            throw SizeError("refusing to materialize a " + std::to_string(dim_) +
                            "-dimensional dense matrix");
        switch (storage_) {
        case Storage::Dense:
            return entries_;
        case Storage::Diag:
            return diag_.template cast<Complex<Scalar>>().asDiagonal();
        case Storage::LowRank:
            return entries_ * diag_.asDiagonal() * entries_.adjoint();
        }
        throw NumericalError("unreachable storage mode");
    }

    Vector apply(const Vector& v) const {
        if (v.size() != dim_)
            throw DimensionError("operator of dimension " + std::to_string(dim_) +
                                 " applied to a vector of dimension " +
                                 std::to_string(v.size()));
        switch (storage_) {
        case Storage::Dense:
            return entries_ * v;
        case Storage::Diag:
            return diag_.template cast<Complex<Scalar>>().cwiseProduct(v);
        case Storage::LowRank: {
            const Vector projected = entries_.adjoint() * v;
            return entries_ *
                   diag_.template cast<Complex<Scalar>>().cwiseProduct(
                       projected);
        }
        }
        throw NumericalError("unreachable storage mode");
    }

    /// Spectrum in ascending order. The low-rank mode reduces to the span of
    /// the stored columns and pads with zeros for the orthogonal complement.
    Diagonal eigenvalues() const {
        switch (storage_) {
        case Storage::Diag: {
            Diagonal sorted = diag_;
            std::sort(sorted.begin(), sorted.end());
            return sorted;
        }
        case Storage::Dense: {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_,
                                                         Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success)
                throw NumericalError("eigenvalue computation did not converge");
            return solver.eigenvalues();
        }
        case Storage::LowRank: {
            const Index k = entries_.cols();
            Eigen::HouseholderQR<Matrix> qr(entries_);
            const Matrix q =
                qr.householderQ() * Matrix::Identity(dim_, std::min(k, dim_));
            const Matrix qv = q.adjoint() * entries_;
            const Matrix compressed = qv * diag_.asDiagonal() * qv.adjoint();
            Eigen::SelfAdjointEigenSolver<Matrix> solver(compressed,
                                                         Eigen::EigenvaluesOnly);
            if (solver.info() != Eigen::Success)
                throw NumericalError("eigenvalue computation did not converge");
            Diagonal full = Diagonal::Zero(dim_);
            full.head(solver.eigenvalues().size()) = solver.eigenvalues();
            std::sort(full.begin(), full.end());
            return full;
        }
        }
        throw NumericalError("unreachable storage mode");
    }

    Scalar min_eigenvalue() const { return spectrum_edge(true); }
    Scalar max_eigenvalue() const { return spectrum_edge(false); }

    /// this - c*I, preserving the storage mode where that is possible.
    HermitianOperator shifted(Scalar c) const {
        if (c == Scalar(0))
            return *this;
        switch (storage_) {
        case Storage::Diag:
            return from_diagonal(diag_.array() - c);
        case Storage::Dense: {
            Matrix shifted_entries = entries_;
            shifted_entries.diagonal().array() -= Complex<Scalar>(c, 0);
            return from_dense(std::move(shifted_entries));
        }
        case Storage::LowRank:
            // The identity has full rank, so the shifted operator only fits
            // the dense representation.
            return from_dense(dense() -
                              Matrix(Matrix::Identity(dim_, dim_) * c));
        }
        throw NumericalError("unreachable storage mode");
    }

  private:
    HermitianOperator() = default;

    static bool is_exactly_diagonal(const Matrix& m) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (m(j, j).imag() != Scalar(0))
                return false;
            for (Index i = 0; i < m.rows(); ++i)
                if (i != j && m(i, j) != Complex<Scalar>(0, 0))
                    return false;
        }
        return true;
    }

    Scalar spectrum_edge(bool minimum) const {
        if (storage_ == Storage::Diag)
            return minimum ? diag_.minCoeff() : diag_.maxCoeff();
        const Diagonal spectrum = eigenvalues();
        return minimum ? spectrum(0) : spectrum(spectrum.size() - 1);
    }

    Storage storage_ = Storage::Diag;
    Index dim_ = 0;
    Matrix entries_; // Dense: the matrix. LowRank: the columns.
    Diagonal diag_;  // Diag: the diagonal. LowRank: the weights.
};

/// ⟨ψ|A|ψ⟩. The result must be real up to a small rounding residue, which is
/// checked and then discarded.
template <typename Scalar>
Scalar expectation(const HermitianOperator<Scalar>& a,
                   const StateVector<Scalar>& psi) {
    const Complex<Scalar> value = psi.amplitudes().dot(a.apply(psi.amplitudes()));
    if (std::abs(value.imag()) > Tolerances<Scalar>::expectation_imag)
        throw NumericalError("expectation value has imaginary residue " +
                             std::to_string(value.imag()));
    return value.real();
}

/// ⟨ψ|A²|ψ⟩ - ⟨ψ|A|ψ⟩², computed from a single application of A so the
/// quadratic term is a plain squared norm. Tiny negative rounding results
/// clamp to zero.
template <typename Scalar>
Scalar variance(const HermitianOperator<Scalar>& a,
                const StateVector<Scalar>& psi) {
    const ComplexVector<Scalar> w = a.apply(psi.amplitudes());
    const Scalar second_moment = w.squaredNorm();
    const Complex<Scalar> first = psi.amplitudes().dot(w);
    if (std::abs(first.imag()) > Tolerances<Scalar>::expectation_imag)
        throw NumericalError("expectation value has imaginary residue " +
                             std::to_string(first.imag()));
    const Scalar var = second_moment - first.real() * first.real();
    if (var < -Tolerances<Scalar>::variance_negative)
        throw NumericalError("variance is negative: " + std::to_string(var));
    return std::max(var, Scalar(0));
}

/// exp(-i phi A)|ψ⟩. Diagonal operators phase each amplitude directly; dense
/// operators go through one spectral decomposition.
template <typename Scalar>
StateVector<Scalar> evolve(const StateVector<Scalar>& psi,
                           const HermitianOperator<Scalar>& generator,
                           Scalar phi) {
    if (generator.dim() != psi.dim())
        throw DimensionError("generator dimension " +
                             std::to_string(generator.dim()) +
                             " does not match state dimension " +
                             std::to_string(psi.dim()));
    ComplexVector<Scalar> out(psi.dim());
    if (generator.is_diagonal()) {
        const auto& d = generator.diagonal();
        for (Index i = 0; i < psi.dim(); ++i)
            out(i) = std::exp(Complex<Scalar>(0, -phi * d(i))) *
                     psi.amplitudes()(i);
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> solver(
            generator.dense());
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigenvalue computation did not converge");
        const ComplexVector<Scalar> in_eigenbasis =
            solver.eigenvectors().adjoint() * psi.amplitudes();
        ComplexVector<Scalar> phased(psi.dim());
        for (Index i = 0; i < psi.dim(); ++i)
            phased(i) = std::exp(Complex<Scalar>(0,
                                                 -phi * solver.eigenvalues()(i))) *
                        in_eigenbasis(i);
        out = solver.eigenvectors() * phased;
    }
    return StateVector<Scalar>::normalized(psi.dims(), std::move(out));
}

/// |a⟩ ⊗ |b⟩ with concatenated subsystem lists.
template <typename Scalar>
StateVector<Scalar> tensor_product(const StateVector<Scalar>& a,
                                   const StateVector<Scalar>& b) {
    std::vector<Index> dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    if (a.dim() > kProductDimLimit / b.dim())
        throw SizeError("product dimension exceeds " +
                        std::to_string(kProductDimLimit));
    ComplexVector<Scalar> amps(a.dim() * b.dim());
    for (Index i = 0; i < a.dim(); ++i)
        amps.segment(i * b.dim(), b.dim()) =
            a.amplitudes()(i) * b.amplitudes();
    return StateVector<Scalar>(std::move(dims), std::move(amps));
}

/// Computational basis state |index⟩ on the given factor structure.
template <typename Scalar = double>
StateVector<Scalar> basis_state(std::vector<Index> dims, Index index) {
    Index product = 1;
    for (Index d : dims)
        product *= d;
    if (index < 0 || index >= product)
        throw DimensionError("basis index " + std::to_string(index) +
                             " out of range for dimension " +
                             std::to_string(product));
    ComplexVector<Scalar> amps = ComplexVector<Scalar>::Zero(product);
    amps(index) = Complex<Scalar>(1, 0);
    return StateVector<Scalar>(std::move(dims), std::move(amps));
}

/// (|00...0⟩ + |11...1⟩)/√2 on n qubits.
template <typename Scalar = double>
StateVector<Scalar> ghz_state(Index n) {
    if (n < 1)
        throw ArityError("GHZ state needs at least one qubit");
    if (n > 16)
        throw SizeError("GHZ state on " + std::to_string(n) +
                        " qubits exceeds the product-dimension cap");
    const Index dim = Index{1} << n;
    ComplexVector<Scalar> amps = ComplexVector<Scalar>::Zero(dim);
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    amps(0) = Complex<Scalar>(r, 0);
    amps(dim - 1) = Complex<Scalar>(r, 0);
    return StateVector<Scalar>(std::vector<Index>(n, 2), std::move(amps));
}

/// (|0⟩ + |n⟩)/√2 on a single truncated mode with levels 0..cutoff.
template <typename Scalar = double>
StateVector<Scalar> zero_n_superposition(Index n, Index cutoff) {
    if (n < 1)
        throw DimensionError("excited level must be at least 1");
    if (cutoff < n)
        throw TruncationError("cutoff " + std::to_string(cutoff) +
                              " cannot hold level " + std::to_string(n));
    ComplexVector<Scalar> amps = ComplexVector<Scalar>::Zero(cutoff + 1);
    const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
    amps(0) = Complex<Scalar>(r, 0);
    amps(n) = Complex<Scalar>(r, 0);
    return StateVector<Scalar>({cutoff + 1}, std::move(amps));
}

/// Photon-number cutoff policy for coherent states. The automatic choice
/// keeps the discarded Poisson tail below the tail-mass tolerance for any
/// mean up to a few thousand photons.
struct FockTruncation {
    Index cutoff;

    static FockTruncation with_cutoff(Index cutoff) {
        if (cutoff < 1)
            throw TruncationError("cutoff must be at least 1");
        return FockTruncation{cutoff};
    }

    static FockTruncation auto_for(double mean_photon_number) {
        const double lambda = std::max(mean_photon_number, 0.0);
        const double guess = lambda + 10.0 * std::sqrt(lambda) + 20.0;
        return FockTruncation{static_cast<Index>(std::ceil(guess))};
    }
};

/// Coherent state |α⟩ truncated to the given Fock cutoff and renormalized.
/// Amplitudes are produced through log-space Poisson weights so large |α|
/// does not overflow, and the discarded tail mass must stay below the
/// tail-mass tolerance.
template <typename Scalar = double>
StateVector<Scalar> coherent_state(Complex<Scalar> alpha,
                                   FockTruncation truncation) {
    const Index cutoff = truncation.cutoff;
    if (cutoff < 1)
        throw TruncationError("cutoff must be at least 1");
    if (cutoff + 1 > kProductDimLimit)
        throw SizeError("cutoff " + std::to_string(cutoff) +
                        " exceeds the product-dimension cap");
    const Scalar lambda = std::norm(alpha);
    const Scalar phase = std::arg(alpha);
    ComplexVector<Scalar> amps(cutoff + 1);
    Scalar kept_mass = 0;
    for (Index n = 0; n <= cutoff; ++n) {
        // log of the Poisson weight λ^n e^{-λ} / n!
        const Scalar log_w =
            static_cast<Scalar>(n) * std::log(std::max(lambda, Scalar(1e-300))) -
            lambda - std::lgamma(static_cast<Scalar>(n) + 1);
        const Scalar magnitude =
            lambda == Scalar(0) && n > 0 ? Scalar(0)
                                         : std::exp(log_w / Scalar(2));
        amps(n) = std::polar(magnitude, phase * static_cast<Scalar>(n));
        kept_mass += magnitude * magnitude;
    }
    const Scalar tail = Scalar(1) - kept_mass;
    if (tail > Tolerances<Scalar>::tail_mass)
        throw TruncationError("discarded tail mass " + std::to_string(tail) +
                              " at cutoff " + std::to_string(cutoff));
    return StateVector<Scalar>::normalized({cutoff + 1}, std::move(amps));
}

/// Number operator diag(0, 1, ..., cutoff) on a truncated mode.
template <typename Scalar = double>
HermitianOperator<Scalar> number_operator(Index cutoff) {
    if (cutoff < 1)
        throw DimensionError("cutoff must be at least 1");
    RealVector<Scalar> d(cutoff + 1);
    for (Index n = 0; n <= cutoff; ++n)
        d(n) = static_cast<Scalar>(n);
    return HermitianOperator<Scalar>::from_diagonal(std::move(d));
}

/// Squared number operator diag(0, 1, 4, ..., cutoff²), the Kerr-style
/// nonlinear generator on a truncated mode.
template <typename Scalar = double>
HermitianOperator<Scalar> number_squared_operator(Index cutoff) {
    if (cutoff < 1)
        throw DimensionError("cutoff must be at least 1");
    RealVector<Scalar> d(cutoff + 1);
    for (Index n = 0; n <= cutoff; ++n)
        d(n) = static_cast<Scalar>(n) * static_cast<Scalar>(n);
    return HermitianOperator<Scalar>::from_diagonal(std::move(d));
}

} // namespace metrolab
