#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "metrolab/errors.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/types.hpp"

namespace metrolab {

/// Positive operator-valued measure. Effects may be stored explicitly, or
/// all but one explicitly with the last outcome defined as the complement
/// I - Σ others; the complement form keeps completeness exact by
/// construction and works on registers too large to materialize.
template <typename Scalar = double>
class Povm {
  public:
    static Povm from_effects(std::vector<HermitianOperator<Scalar>> effects,
                             std::vector<std::string> labels = {}) {
        return Povm(std::move(effects), std::move(labels), false, "");
    }

    static Povm with_complement(std::vector<HermitianOperator<Scalar>> effects,
                                std::vector<std::string> labels,
                                std::string complement_label) {
        return Povm(std::move(effects), std::move(labels), true,
                    std::move(complement_label));
    }

    /// Rank-1 projectors onto the given states.
    static Povm projectors(const std::vector<StateVector<Scalar>>& states,
                           std::vector<std::string> labels = {}) {
        return from_effects(rank_one(states), std::move(labels));
    }

    static Povm
    projectors_with_complement(const std::vector<StateVector<Scalar>>& states,
                               std::vector<std::string> labels,
                               std::string complement_label) {
        return with_complement(rank_one(states), std::move(labels),
                               std::move(complement_label));
    }

    /// One diagonal effect per basis state.
    static Povm computational_basis(Index dim) {
        if (dim < 2)
            throw DimensionError("basis measurement needs dimension at least 2");
        if (dim > kDenseDimLimit)
            throw SizeError("basis measurement on dimension " +
                            std::to_string(dim) +
                            " would store dim^2 diagonal entries");
        std::vector<HermitianOperator<Scalar>> effects;
        std::vector<std::string> labels;
        effects.reserve(static_cast<std::size_t>(dim));
        for (Index i = 0; i < dim; ++i) {
            RealVector<Scalar> d = RealVector<Scalar>::Zero(dim);
            d(i) = 1;
            effects.push_back(
                HermitianOperator<Scalar>::from_diagonal(std::move(d)));
            labels.push_back(std::to_string(i));
        }
        return from_effects(std::move(effects), std::move(labels));
    }

    Index dim() const { return dim_; }
    Index n_outcomes() const {
        return static_cast<Index>(effects_.size()) + (has_complement_ ? 1 : 0);
    }
    Index n_explicit() const { return static_cast<Index>(effects_.size()); }
    bool has_complement() const { return has_complement_; }
    const HermitianOperator<Scalar>& effect(Index i) const {
        return effects_.at(static_cast<std::size_t>(i));
    }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    Povm(std::vector<HermitianOperator<Scalar>> effects,
         std::vector<std::string> labels, bool has_complement,
         std::string complement_label)
        : effects_(std::move(effects)), labels_(std::move(labels)),
          has_complement_(has_complement) {
        if (effects_.empty())
            throw CompletenessError("measurement needs at least one effect");
        dim_ = effects_.front().dim();
        for (const auto& e : effects_) {
            if (e.dim() != dim_)
                throw DimensionError("effects have mixed dimensions");
            if (e.min_eigenvalue() < -Tolerances<Scalar>::effect_negativity)
                throw CompletenessError(
                    "effect has eigenvalue " +
                    std::to_string(e.min_eigenvalue()));
        }
        if (labels_.empty()) {
            for (std::size_t i = 0; i < effects_.size(); ++i)
                labels_.push_back(std::to_string(i));
            if (has_complement_)
                labels_.push_back(complement_label.empty()
                                      ? std::string("rest")
                                      : complement_label);
        } else {
            if (has_complement_)
                labels_.push_back(complement_label.empty()
                                      ? std::string("rest")
                                      : complement_label);
            if (labels_.size() != static_cast<std::size_t>(n_outcomes()))
                throw DimensionError("got " + std::to_string(labels_.size()) +
                                     " labels for " +
                                     std::to_string(n_outcomes()) +
                                     " outcomes");
        }
        check_completeness();
    }

    static std::vector<HermitianOperator<Scalar>>
    rank_one(const std::vector<StateVector<Scalar>>& states) {
        std::vector<HermitianOperator<Scalar>> effects;
        effects.reserve(states.size());
        for (const auto& s : states) {
            ComplexMatrix<Scalar> col(s.dim(), 1);
            col.col(0) = s.amplitudes();
            RealVector<Scalar> w(1);
            w(0) = 1;
            effects.push_back(HermitianOperator<Scalar>::from_low_rank(
                std::move(col), std::move(w)));
        }
        return effects;
    }

    // The explicit effects summed in the cheapest faithful representation.
    HermitianOperator<Scalar> sum_explicit() const {
        bool all_diag = true, all_low_rank = true;
        for (const auto& e : effects_) {
            all_diag = all_diag && e.is_diagonal();
            all_low_rank = all_low_rank &&
                           e.storage() ==
                               HermitianOperator<Scalar>::Storage::LowRank;
        }
        if (all_diag) {
            RealVector<Scalar> acc = RealVector<Scalar>::Zero(dim_);
            for (const auto& e : effects_)
                acc += e.diagonal();
            return HermitianOperator<Scalar>::from_diagonal(std::move(acc));
        }
        if (all_low_rank) {
            Index total_rank = 0;
            for (const auto& e : effects_)
                total_rank += e.low_rank_columns().cols();
            ComplexMatrix<Scalar> cols(dim_, total_rank);
            RealVector<Scalar> weights(total_rank);
            Index at = 0;
            for (const auto& e : effects_) {
                const Index k = e.low_rank_columns().cols();
                cols.middleCols(at, k) = e.low_rank_columns();
                weights.segment(at, k) = e.low_rank_weights();
                at += k;
            }
            return HermitianOperator<Scalar>::from_low_rank(std::move(cols),
                                                            std::move(weights));
        }
        if (dim_ > kDenseDimLimit)
            throw SizeError("cannot verify completeness of mixed-storage "
                            "effects on dimension " +
                            std::to_string(dim_));
        ComplexMatrix<Scalar> acc = ComplexMatrix<Scalar>::Zero(dim_, dim_);
        for (const auto& e : effects_)
            acc += e.dense();
        return HermitianOperator<Scalar>::from_dense(std::move(acc));
    }

    void check_completeness() const {
        const auto sum = sum_explicit();
        if (has_complement_) {
            // The complement is I - sum; it is a valid effect iff the
            // explicit part never exceeds the identity.
            if (sum.max_eigenvalue() >
                Scalar(1) + Tolerances<Scalar>::completeness)
                throw CompletenessError(
                    "explicit effects exceed the identity; largest "
                    "eigenvalue of their sum is " +
                    std::to_string(sum.max_eigenvalue()));
            return;
        }
        if (sum.is_diagonal()) {
            const Scalar dev =
                (sum.diagonal().array() - Scalar(1)).abs().maxCoeff();
            if (dev > Tolerances<Scalar>::completeness)
                throw CompletenessError("effects sum deviates from the "
                                        "identity by " +
                                        std::to_string(dev));
            return;
        }
        if (dim_ > kDenseDimLimit)
            throw SizeError("cannot verify completeness of non-diagonal "
                            "effects on dimension " +
                            std::to_string(dim_) +
                            "; use the complement form");
        const Scalar dev =
            (sum.dense() - ComplexMatrix<Scalar>::Identity(dim_, dim_))
                .cwiseAbs()
                .maxCoeff();
        if (dev > Tolerances<Scalar>::completeness)
            throw CompletenessError("effects sum deviates from the identity "
                                    "by " +
                                    std::to_string(dev));
    }

    std::vector<HermitianOperator<Scalar>> effects_;
    std::vector<std::string> labels_;
    bool has_complement_ = false;
    Index dim_ = 0;
};

/// Outcome probabilities and their φ-derivatives for one measurement at one
/// phase. Born-rule-only constructions carry all-zero derivatives.
template <typename Scalar = double>
struct OutcomeDistribution {
    RealVector<Scalar> probs;
    RealVector<Scalar> derivs;
};

namespace detail {

template <typename Scalar>
void validate_distribution(OutcomeDistribution<Scalar>& dist) {
    for (Index i = 0; i < dist.probs.size(); ++i) {
        if (dist.probs(i) < -Tolerances<Scalar>::prob_clamp)
            throw NumericalError("outcome probability " +
                                 std::to_string(dist.probs(i)));
        if (dist.probs(i) < 0)
            dist.probs(i) = 0;
    }
    const Scalar total = dist.probs.sum();
    if (std::abs(total - Scalar(1)) > Tolerances<Scalar>::prob_sum)
        throw NumericalError("outcome probabilities sum to " +
                             std::to_string(total));
    const Scalar deriv_total = dist.derivs.sum();
    if (std::abs(deriv_total) > Tolerances<Scalar>::deriv_sum)
        throw NumericalError("probability derivatives sum to " +
                             std::to_string(deriv_total));
}

} // namespace detail

/// p(x) = ⟨ψ|Ê_x|ψ⟩. Derivatives are filled with zeros; use
/// born_derivative when the φ-slope is needed.
template <typename Scalar>
OutcomeDistribution<Scalar> born_probabilities(const StateVector<Scalar>& state,
                                               const Povm<Scalar>& povm) {
    if (povm.dim() != state.dim())
        throw DimensionError("measurement dimension " +
                             std::to_string(povm.dim()) +
                             " does not match state dimension " +
                             std::to_string(state.dim()));
    OutcomeDistribution<Scalar> dist;
    dist.probs = RealVector<Scalar>::Zero(povm.n_outcomes());
    dist.derivs = RealVector<Scalar>::Zero(povm.n_outcomes());
    Scalar explicit_total = 0;
    for (Index x = 0; x < povm.n_explicit(); ++x) {
        dist.probs(x) = expectation(povm.effect(x), state);
        explicit_total += dist.probs(x);
    }
    if (povm.has_complement())
        dist.probs(povm.n_explicit()) = Scalar(1) - explicit_total;
    detail::validate_distribution(dist);
    return dist;
}

/// Distribution at phase φ with analytic derivatives: the state evolves as
/// ∂φ|ψ⟩ = -iH|ψ⟩, so dp(x)/dφ = 2·Im⟨ψ(φ)|Ê_x H|ψ(φ)⟩.
template <typename Scalar>
OutcomeDistribution<Scalar>
born_derivative(const StateVector<Scalar>& state0,
                const HermitianOperator<Scalar>& gen, Scalar phi,
                const Povm<Scalar>& povm) {
    if (povm.dim() != state0.dim() || gen.dim() != state0.dim())
        throw DimensionError("state, generator and measurement dimensions "
                             "must agree");
    const StateVector<Scalar> state = evolve(state0, gen, phi);
    const ComplexVector<Scalar> h_psi = gen.apply(state.amplitudes());

    OutcomeDistribution<Scalar> dist;
    dist.probs = RealVector<Scalar>::Zero(povm.n_outcomes());
    dist.derivs = RealVector<Scalar>::Zero(povm.n_outcomes());
    Scalar explicit_prob = 0, explicit_deriv = 0;
    for (Index x = 0; x < povm.n_explicit(); ++x) {
        const ComplexVector<Scalar> e_psi =
            povm.effect(x).apply(state.amplitudes());
        dist.probs(x) = expectation(povm.effect(x), state);
        dist.derivs(x) = Scalar(2) * e_psi.dot(h_psi).imag();
        explicit_prob += dist.probs(x);
        explicit_deriv += dist.derivs(x);
    }
    if (povm.has_complement()) {
        dist.probs(povm.n_explicit()) = Scalar(1) - explicit_prob;
        dist.derivs(povm.n_explicit()) = -explicit_deriv;
    }
    detail::validate_distribution(dist);
    return dist;
}

template <typename Scalar>
struct Moments {
    Scalar mean;
    Scalar stddev;
};

/// ⟨X⟩ and ΔX of an observable on a state.
template <typename Scalar>
Moments<Scalar> observable_moments(const StateVector<Scalar>& state,
                                   const HermitianOperator<Scalar>& obs) {
    return Moments<Scalar>{expectation(obs, state),
                           std::sqrt(variance(obs, state))};
}

/// Multinomial draw of `shots` outcomes. The stream is pinned down exactly:
/// a std::mt19937_64 seeded with `seed`, one raw draw per shot mapped to
/// [0,1) as (x >> 11) * 2^-53, resolved against the cumulative distribution
/// by linear scan. Identical (dist, shots, seed) give identical counts on
/// every platform.
template <typename Scalar>
std::vector<std::int64_t>
sample_outcomes(const OutcomeDistribution<Scalar>& dist, std::int64_t shots,
                std::uint64_t seed) {
    if (shots < 1)
        throw ArityError("sampling needs at least one shot");
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(
        static_cast<std::size_t>(dist.probs.size()), 0);
    for (std::int64_t s = 0; s < shots; ++s) {
        const double u =
            static_cast<double>(rng() >> 11) * 0x1.0p-53;
        double cumulative = 0;
        std::size_t chosen = counts.size() - 1;
        for (Index x = 0; x < dist.probs.size(); ++x) {
            cumulative += static_cast<double>(dist.probs(x));
            if (u < cumulative) {
                chosen = static_cast<std::size_t>(x);
                break;
            }
        }
        ++counts[chosen];
    }
    return counts;
}

} // namespace metrolab
