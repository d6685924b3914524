#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metrolab/errors.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/types.hpp"

namespace metrolab {

/// Single-system black-box generator. The stored matrix is the input shifted
/// so its ground energy is zero, which keeps every network term positive
/// semidefinite; the original spectral edges are kept alongside.
template <typename Scalar = double>
class AtomicGenerator {
  public:
    static AtomicGenerator from_operator(const HermitianOperator<Scalar>& op) {
        if (op.dim() < 2)
            throw DimensionError("atomic generator needs dimension at least 2");
        AtomicGenerator atom;
        atom.min_eigenvalue_ = op.min_eigenvalue();
        atom.max_eigenvalue_ = op.max_eigenvalue();
        atom.matrix_ = op.shifted(atom.min_eigenvalue_);
        const Scalar residual = atom.matrix_->min_eigenvalue();
        if (std::abs(residual) > Tolerances<Scalar>::hermiticity)
            throw NumericalError("ground shift left minimum eigenvalue " +
                                 std::to_string(residual));
        return atom;
    }

    static AtomicGenerator from_diagonal(RealVector<Scalar> values) {
        return from_operator(
            HermitianOperator<Scalar>::from_diagonal(std::move(values)));
    }

    Index dim() const { return matrix_->dim(); }
    const HermitianOperator<Scalar>& matrix() const { return *matrix_; }
    Scalar min_eigenvalue() const { return min_eigenvalue_; }
    Scalar max_eigenvalue() const { return max_eigenvalue_; }
    Scalar spread() const { return max_eigenvalue_ - min_eigenvalue_; }

  private:
    AtomicGenerator() = default;

    std::optional<HermitianOperator<Scalar>> matrix_;
    Scalar min_eigenvalue_ = 0;
    Scalar max_eigenvalue_ = 0;
};

enum class NetworkKind { GLM, BFCG, RB, Custom };

inline const char* to_string(NetworkKind kind) {
    switch (kind) {
    case NetworkKind::GLM:
        return "GLM";
    case NetworkKind::BFCG:
        return "BFCG";
    case NetworkKind::RB:
        return "RB";
    case NetworkKind::Custom:
        return "Custom";
    }
    return "?";
}

namespace detail {

inline Index checked_product_dim(const std::vector<Index>& dims) {
    Index product = 1;
    for (Index d : dims) {
        if (d < 2)
            throw DimensionError("subsystem dimension must be at least 2");
        if (product > kProductDimLimit / d)
            throw SizeError("product dimension exceeds " +
                            std::to_string(kProductDimLimit));
        product *= d;
    }
    return product;
}

// Mixed-radix strides; the last subsystem varies fastest, matching the
// amplitude layout of StateVector.
inline std::vector<Index> subsystem_strides(const std::vector<Index>& dims) {
    std::vector<Index> strides(dims.size());
    Index acc = 1;
    for (std::size_t j = dims.size(); j-- > 0;) {
        strides[j] = acc;
        acc *= dims[j];
    }
    return strides;
}

template <typename Scalar>
ComplexMatrix<Scalar> kron(const ComplexMatrix<Scalar>& a,
                           const ComplexMatrix<Scalar>& b) {
    ComplexMatrix<Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
    return out;
}

} // namespace detail

/// A network of black-box queries: a list of terms, each acting on a subset
/// of the physical systems, whose sum generates the phase evolution. Term
/// operators are materialized on demand; the register-wide total is stored
/// once, diagonally whenever the atomic generator is diagonal.
template <typename Scalar = double>
class GeneratorNetwork {
  public:
    NetworkKind kind() const { return kind_; }
    Index n_systems() const { return n_systems_; }
    Index query_count() const { return static_cast<Index>(subsets_.size()); }
    const std::vector<Index>& subsystem_dims() const { return dims_; }
    Index product_dim() const { return product_dim_; }
    const std::vector<std::vector<Index>>& terms() const { return subsets_; }
    const HermitianOperator<Scalar>& total() const { return *total_; }

    /// The i-th term embedded on the full product space.
    HermitianOperator<Scalar> term_operator(Index i) const {
        if (i < 0 || i >= query_count())
            throw DimensionError("term index " + std::to_string(i) +
                                 " out of range");
        const auto& subset = subsets_[static_cast<std::size_t>(i)];
        if (kind_ == NetworkKind::Custom)
            return embed_local(custom_locals_[static_cast<std::size_t>(i)],
                               subset);
        if (atomic_->matrix().is_diagonal())
            return embed_diagonal_product(subset);
        return embed_dense_product(subset);
    }

    /// Largest eigenvalue any single term can contribute, the per-query
    /// constant in the resource-versus-query bound.
    Scalar max_term_eigenvalue() const {
        if (kind_ == NetworkKind::Custom) {
            Scalar best = 0;
            for (const auto& local : custom_locals_)
                best = std::max(best, local.max_eigenvalue());
            return best;
        }
        const Scalar top = atomic_->matrix().max_eigenvalue();
        std::size_t largest_subset = 0;
        for (const auto& subset : subsets_)
            largest_subset = std::max(largest_subset, subset.size());
        Scalar best = 0;
        Scalar power = 1;
        for (std::size_t k = 0; k < largest_subset; ++k) {
            power *= top;
            best = std::max(best, power);
        }
        return best;
    }

    static GeneratorNetwork glm(const AtomicGenerator<Scalar>& atomic, Index n);
    static GeneratorNetwork bfcg(const AtomicGenerator<Scalar>& atomic, Index n);
    static GeneratorNetwork rb(const AtomicGenerator<Scalar>& atomic, Index n);
    static GeneratorNetwork
    custom(std::vector<Index> dims,
           std::vector<std::pair<std::vector<Index>, HermitianOperator<Scalar>>>
               terms);

  private:
    GeneratorNetwork() = default;

    // Diagonal of ⊗_{j∈subset} H_j on the full space, one pass per basis
    // state.
    HermitianOperator<Scalar>
    embed_diagonal_product(const std::vector<Index>& subset) const {
        const auto& d = atomic_->matrix().diagonal();
        const auto strides = detail::subsystem_strides(dims_);
        RealVector<Scalar> out(product_dim_);
        for (Index b = 0; b < product_dim_; ++b) {
            Scalar value = 1;
            for (Index j : subset)
                value *= d((b / strides[static_cast<std::size_t>(j)]) %
                           dims_[static_cast<std::size_t>(j)]);
            out(b) = value;
        }
        return HermitianOperator<Scalar>::from_diagonal(std::move(out));
    }

    HermitianOperator<Scalar>
    embed_dense_product(const std::vector<Index>& subset) const {
        const ComplexMatrix<Scalar> h = atomic_->matrix().dense();
        ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Identity(1, 1);
        for (Index j = 0; j < n_systems_; ++j) {
            const bool active =
                std::find(subset.begin(), subset.end(), j) != subset.end();
            out = detail::kron<Scalar>(
                out, active ? h
                            : ComplexMatrix<Scalar>::Identity(
                                  dims_[static_cast<std::size_t>(j)],
                                  dims_[static_cast<std::size_t>(j)]));
        }
        return HermitianOperator<Scalar>::from_dense(std::move(out));
    }

    HermitianOperator<Scalar>
    embed_local(const HermitianOperator<Scalar>& local,
                const std::vector<Index>& subset) const {
        const auto strides = detail::subsystem_strides(dims_);
        std::vector<Index> local_dims;
        for (Index j : subset)
            local_dims.push_back(dims_[static_cast<std::size_t>(j)]);
        const auto local_strides = detail::subsystem_strides(local_dims);
        const Index local_dim = local.dim();

        auto local_index = [&](Index b) {
            Index s = 0;
            for (std::size_t t = 0; t < subset.size(); ++t)
                s += ((b / strides[static_cast<std::size_t>(subset[t])]) %
                      dims_[static_cast<std::size_t>(subset[t])]) *
                     local_strides[t];
            return s;
        };

        if (local.is_diagonal()) {
            RealVector<Scalar> out(product_dim_);
            for (Index b = 0; b < product_dim_; ++b)
                out(b) = local.diagonal()(local_index(b));
            return HermitianOperator<Scalar>::from_diagonal(std::move(out));
        }

        if (product_dim_ > kDenseDimLimit)
            throw SizeError("dense custom term on a " +
                            std::to_string(product_dim_) +
                            "-dimensional register");
        const ComplexMatrix<Scalar> lm = local.dense();
        ComplexMatrix<Scalar> out =
            ComplexMatrix<Scalar>::Zero(product_dim_, product_dim_);
        // Pairs of full-space indices couple only when they agree on every
        // subsystem outside the subset; walk those pairs directly.
        const Index outside_dim = product_dim_ / local_dim;
        std::vector<Index> outside;
        outside.reserve(static_cast<std::size_t>(outside_dim));
        for (Index b = 0; b < product_dim_; ++b)
            if (local_index(b) == 0)
                outside.push_back(b);
        // Offset of a full-space index with local part s relative to local
        // part 0: invert local_index on the subset digits.
        std::vector<Index> offsets(static_cast<std::size_t>(local_dim), 0);
        for (Index s = 0; s < local_dim; ++s) {
            Index rem = s, off = 0;
            for (std::size_t t = 0; t < subset.size(); ++t) {
                const Index digit = (rem / local_strides[t]) %
                                    local_dims[t];
                off += digit * strides[static_cast<std::size_t>(subset[t])];
                rem -= digit * local_strides[t];
            }
            offsets[static_cast<std::size_t>(s)] = off;
        }
        for (Index base : outside)
            for (Index r = 0; r < local_dim; ++r)
                for (Index c = 0; c < local_dim; ++c)
                    out(base + offsets[static_cast<std::size_t>(r)],
                        base + offsets[static_cast<std::size_t>(c)]) = lm(r, c);
        return HermitianOperator<Scalar>::from_dense(std::move(out));
    }

    // total = Σ_j H_j as a diagonal, via per-basis-state digit sums.
    void build_diagonal_total() {
        const auto& d = atomic_->matrix().diagonal();
        const auto strides = detail::subsystem_strides(dims_);
        RealVector<Scalar> out(product_dim_);
        for (Index b = 0; b < product_dim_; ++b) {
            Scalar sum = 0, sum_sq = 0, prod = 1;
            for (Index j = 0; j < n_systems_; ++j) {
                const Scalar h = d((b / strides[static_cast<std::size_t>(j)]) %
                                   dims_[static_cast<std::size_t>(j)]);
                sum += h;
                sum_sq += h * h;
                prod *= Scalar(1) + h;
            }
            switch (kind_) {
            case NetworkKind::GLM:
                out(b) = sum;
                break;
            case NetworkKind::BFCG:
                out(b) = (sum * sum - sum_sq) / Scalar(2);
                break;
            case NetworkKind::RB:
                out(b) = prod - Scalar(1);
                break;
            case NetworkKind::Custom:
                break;
            }
        }
        total_ = HermitianOperator<Scalar>::from_diagonal(std::move(out));
    }

    void build_dense_total() {
        if (product_dim_ > kDenseDimLimit)
            throw SizeError("dense network total on a " +
                            std::to_string(product_dim_) +
                            "-dimensional register");
        const ComplexMatrix<Scalar> h = atomic_->matrix().dense();
        const Index da = atomic_->dim();
        auto embed_single = [&](Index j, const ComplexMatrix<Scalar>& m) {
            ComplexMatrix<Scalar> out = ComplexMatrix<Scalar>::Identity(1, 1);
            for (Index t = 0; t < n_systems_; ++t)
                out = detail::kron<Scalar>(
                    out, t == j ? m : ComplexMatrix<Scalar>::Identity(da, da));
            return out;
        };
        ComplexMatrix<Scalar> total;
        switch (kind_) {
        case NetworkKind::GLM: {
            total = ComplexMatrix<Scalar>::Zero(product_dim_, product_dim_);
            for (Index j = 0; j < n_systems_; ++j)
                total += embed_single(j, h);
            break;
        }
        case NetworkKind::BFCG: {
            ComplexMatrix<Scalar> sum =
                ComplexMatrix<Scalar>::Zero(product_dim_, product_dim_);
            ComplexMatrix<Scalar> sum_sq = sum;
            for (Index j = 0; j < n_systems_; ++j) {
                sum += embed_single(j, h);
                sum_sq += embed_single(j, ComplexMatrix<Scalar>(h * h));
            }
            total = (sum * sum - sum_sq) / Scalar(2);
            break;
        }
        case NetworkKind::RB: {
            // Σ over nonempty subsets of ⊗ H equals ⊗(I + H) minus the
            // identity.
            ComplexMatrix<Scalar> grown = ComplexMatrix<Scalar>::Identity(1, 1);
            const ComplexMatrix<Scalar> one_plus =
                ComplexMatrix<Scalar>::Identity(da, da) + h;
            for (Index j = 0; j < n_systems_; ++j)
                grown = detail::kron<Scalar>(grown, one_plus);
            total = grown - ComplexMatrix<Scalar>::Identity(product_dim_,
                                                            product_dim_);
            break;
        }
        case NetworkKind::Custom:
            return;
        }
        total_ = HermitianOperator<Scalar>::from_dense(std::move(total));
    }

    static GeneratorNetwork shared(NetworkKind kind,
                                   const AtomicGenerator<Scalar>& atomic,
                                   Index n,
                                   std::vector<std::vector<Index>> subsets) {
        GeneratorNetwork net;
        net.kind_ = kind;
        net.n_systems_ = n;
        net.dims_.assign(static_cast<std::size_t>(n), atomic.dim());
        net.product_dim_ = detail::checked_product_dim(net.dims_);
        net.atomic_ = atomic;
        net.subsets_ = std::move(subsets);
        if (atomic.matrix().is_diagonal())
            net.build_diagonal_total();
        else
            net.build_dense_total();
        return net;
    }

    NetworkKind kind_ = NetworkKind::Custom;
    Index n_systems_ = 0;
    Index product_dim_ = 0;
    std::vector<Index> dims_;
    std::vector<std::vector<Index>> subsets_;
    std::optional<AtomicGenerator<Scalar>> atomic_;
    std::vector<HermitianOperator<Scalar>> custom_locals_;
    std::optional<HermitianOperator<Scalar>> total_;
};

template <typename Scalar>
GeneratorNetwork<Scalar>
GeneratorNetwork<Scalar>::glm(const AtomicGenerator<Scalar>& atomic, Index n) {
    if (n < 1)
        throw ArityError("network needs at least one system");
    std::vector<std::vector<Index>> subsets;
    for (Index j = 0; j < n; ++j)
        subsets.push_back({j});
    return shared(NetworkKind::GLM, atomic, n, std::move(subsets));
}

template <typename Scalar>
GeneratorNetwork<Scalar>
GeneratorNetwork<Scalar>::bfcg(const AtomicGenerator<Scalar>& atomic, Index n) {
    if (n < 2)
        throw ArityError("pairwise network needs at least two systems");
    std::vector<std::vector<Index>> subsets;
    for (Index j = 0; j < n; ++j)
        for (Index k = j + 1; k < n; ++k)
            subsets.push_back({j, k});
    return shared(NetworkKind::BFCG, atomic, n, std::move(subsets));
}

template <typename Scalar>
GeneratorNetwork<Scalar>
GeneratorNetwork<Scalar>::rb(const AtomicGenerator<Scalar>& atomic, Index n) {
    if (n < 1)
        throw ArityError("network needs at least one system");
    if (n > 16)
        throw SizeError("subset enumeration capped at 16 systems, got " +
                        std::to_string(n));
    std::vector<std::vector<Index>> subsets;
    for (Index mask = 1; mask < (Index{1} << n); ++mask) {
        std::vector<Index> subset;
        for (Index j = 0; j < n; ++j)
            if (mask & (Index{1} << j))
                subset.push_back(j);
        subsets.push_back(std::move(subset));
    }
    return shared(NetworkKind::RB, atomic, n, std::move(subsets));
}

template <typename Scalar>
GeneratorNetwork<Scalar> GeneratorNetwork<Scalar>::custom(
    std::vector<Index> dims,
    std::vector<std::pair<std::vector<Index>, HermitianOperator<Scalar>>>
        terms) {
    if (dims.empty())
        throw ArityError("network needs at least one system");
    if (terms.empty())
        throw ArityError("custom network needs at least one term");
    GeneratorNetwork net;
    net.kind_ = NetworkKind::Custom;
    net.n_systems_ = static_cast<Index>(dims.size());
    net.dims_ = std::move(dims);
    net.product_dim_ = detail::checked_product_dim(net.dims_);

    for (auto& [subset, local] : terms) {
        if (subset.empty())
            throw ArityError("custom term must act on at least one system");
        std::vector<Index> sorted = subset;
        std::sort(sorted.begin(), sorted.end());
        Index local_dim = 1;
        for (std::size_t t = 0; t < sorted.size(); ++t) {
            const Index j = sorted[t];
            if (j < 0 || j >= net.n_systems_)
                throw DimensionError("custom term references system " +
                                     std::to_string(j));
            if (t > 0 && sorted[t - 1] == j)
                throw DimensionError("custom term repeats system " +
                                     std::to_string(j));
            local_dim *= net.dims_[static_cast<std::size_t>(j)];
        }
        if (local.dim() != local_dim)
            throw DimensionError("custom term operator has dimension " +
                                 std::to_string(local.dim()) + ", expected " +
                                 std::to_string(local_dim));
        if (local.min_eigenvalue() < -Tolerances<Scalar>::hermiticity)
            throw NumericalError(
                "custom term must be positive semidefinite; minimum "
                "eigenvalue is " +
                std::to_string(local.min_eigenvalue()));
        net.subsets_.push_back(std::move(sorted));
        net.custom_locals_.push_back(std::move(local));
    }

    // Accumulate the total in whichever representation the terms allow.
    bool all_diagonal = true;
    for (const auto& local : net.custom_locals_)
        all_diagonal = all_diagonal && local.is_diagonal();
    if (all_diagonal) {
        RealVector<Scalar> acc = RealVector<Scalar>::Zero(net.product_dim_);
        for (Index i = 0; i < net.query_count(); ++i)
            acc += net.term_operator(i).diagonal();
        net.total_ = HermitianOperator<Scalar>::from_diagonal(std::move(acc));
    } else {
        if (net.product_dim_ > kDenseDimLimit)
            throw SizeError("dense custom network on a " +
                            std::to_string(net.product_dim_) +
                            "-dimensional register");
        ComplexMatrix<Scalar> acc =
            ComplexMatrix<Scalar>::Zero(net.product_dim_, net.product_dim_);
        for (Index i = 0; i < net.query_count(); ++i)
            acc += net.term_operator(i).dense();
        net.total_ = HermitianOperator<Scalar>::from_dense(std::move(acc));
    }
    return net;
}

template <typename Scalar>
GeneratorNetwork<Scalar> build_glm(const AtomicGenerator<Scalar>& atomic,
                                   Index n) {
    return GeneratorNetwork<Scalar>::glm(atomic, n);
}

template <typename Scalar>
GeneratorNetwork<Scalar> build_bfcg(const AtomicGenerator<Scalar>& atomic,
                                    Index n) {
    return GeneratorNetwork<Scalar>::bfcg(atomic, n);
}

template <typename Scalar>
GeneratorNetwork<Scalar> build_rb(const AtomicGenerator<Scalar>& atomic,
                                  Index n) {
    return GeneratorNetwork<Scalar>::rb(atomic, n);
}

template <typename Scalar>
Index query_count(const GeneratorNetwork<Scalar>& net) {
    return net.query_count();
}

/// Generator with the energy origin fixed at its ground state, plus the
/// shift that was removed. All resource-style bounds are taken against this
/// normalized form.
template <typename Scalar = double>
class NormalizedGenerator {
  public:
    explicit NormalizedGenerator(HermitianOperator<Scalar> op, Scalar h_min)
        : op_(std::move(op)), h_min_(h_min) {
        const Scalar residual = op_.min_eigenvalue();
        if (std::abs(residual) > Tolerances<Scalar>::ground_shift)
            throw NumericalError("normalized generator has minimum eigenvalue " +
                                 std::to_string(residual));
    }

    const HermitianOperator<Scalar>& op() const { return op_; }
    Scalar h_min() const { return h_min_; }

  private:
    HermitianOperator<Scalar> op_;
    Scalar h_min_;
};

template <typename Scalar>
NormalizedGenerator<Scalar>
normalize_ground_energy(const HermitianOperator<Scalar>& op) {
    const Scalar h_min = op.min_eigenvalue();
    return NormalizedGenerator<Scalar>(op.shifted(h_min), h_min);
}

/// |⟨ψ|H|ψ⟩| of the ground-normalized generator: the number of elementary
/// energy quanta the probe actually carries.
template <typename Scalar>
Scalar resource_count(const StateVector<Scalar>& state,
                      const NormalizedGenerator<Scalar>& gen) {
    return std::abs(expectation(gen.op(), state));
}

template <typename Scalar>
struct ResourceBound {
    Scalar resource;
    Scalar bound;
    bool ok;
};

/// Checks that the probe's resource count stays below query count times the
/// largest single-term eigenvalue.
template <typename Scalar>
ResourceBound<Scalar>
resource_vs_query_check(const GeneratorNetwork<Scalar>& net,
                        const StateVector<Scalar>& state) {
    const Scalar resource = std::abs(expectation(net.total(), state));
    const Scalar bound =
        static_cast<Scalar>(net.query_count()) * net.max_term_eigenvalue();
    return ResourceBound<Scalar>{resource, bound,
                                 resource <= bound + Scalar(1e-9)};
}

} // namespace metrolab
