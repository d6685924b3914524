#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>

#include "metrolab/errors.hpp"
#include "metrolab/generators.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/measurement.hpp"
#include "metrolab/types.hpp"

namespace metrolab {

/// Σ_x (dp_x/dφ)² / p_x. Outcomes with vanishing probability contribute
/// nothing only while their derivative also vanishes; a finite slope out of
/// a zero-probability outcome is an infinite-information edge and is
/// reported as an error instead of being dropped. Slopes at or below the
/// derivative floor are rounding residue of an analytically flat outcome
/// and contribute nothing, so a stationary readout sums to exactly zero.
template <typename Scalar>
Scalar fisher_information(const OutcomeDistribution<Scalar>& dist) {
    Scalar fisher = 0;
    for (Index x = 0; x < dist.probs.size(); ++x) {
        const Scalar p = dist.probs(x);
        const Scalar d = dist.derivs(x);
        if (std::abs(d) <= Tolerances<Scalar>::fisher_deriv_floor)
            continue;
        if (p < Tolerances<Scalar>::fisher_prob_floor)
            throw DegenerateError("outcome " + std::to_string(x) +
                                  " has probability " + std::to_string(p) +
                                  " but derivative " + std::to_string(d));
        fisher += d * d / p;
    }
    return fisher;
}

/// 1/√(T·F), the Cramér-Rao floor on the phase error after T repetitions.
template <typename Scalar>
Scalar cramer_rao(Scalar fisher, std::int64_t t_repeats) {
    if (t_repeats < 1)
        throw ArityError("repetition count must be at least 1");
    if (fisher <= 0)
        throw NoInformationError("Fisher information is " +
                                 std::to_string(fisher) +
                                 "; the distribution carries no phase "
                                 "information");
    return Scalar(1) / std::sqrt(static_cast<Scalar>(t_repeats) * fisher);
}

/// Angle between rays: arccos|⟨a|b⟩| in [0, π/2].
template <typename Scalar>
Scalar wootters_distance(const StateVector<Scalar>& a,
                         const StateVector<Scalar>& b) {
    const Scalar fidelity = std::abs(inner_product(a, b));
    return std::acos(std::clamp(fidelity, Scalar(0), Scalar(1)));
}

/// √F(φ): how fast the outcome distribution moves along the probability
/// simplex per unit phase.
template <typename Scalar>
Scalar statistical_speed(const StateVector<Scalar>& state0,
                         const HermitianOperator<Scalar>& gen, Scalar phi,
                         const Povm<Scalar>& povm) {
    return std::sqrt(fisher_information(born_derivative(state0, gen, phi, povm)));
}

/// Quantum Fisher information of a pure state: 4(ΔH)², the ceiling on the
/// classical value over all measurements.
template <typename Scalar>
Scalar qfi_pure(const StateVector<Scalar>& state,
                const HermitianOperator<Scalar>& gen) {
    return Scalar(4) * variance(gen, state);
}

/// 1/|⟨H⟩| for the ground-normalized generator.
template <typename Scalar>
Scalar heisenberg_bound(Scalar resource) {
    if (resource <= Tolerances<Scalar>::resource_floor)
        throw NoResourceError("resource count " + std::to_string(resource) +
                              "; no resources are available to estimate the "
                              "phase");
    return Scalar(1) / resource;
}

/// 1/(2ΔH): the phase-generator uncertainty relation.
template <typename Scalar>
Scalar uncertainty_bound(const StateVector<Scalar>& state,
                         const HermitianOperator<Scalar>& gen) {
    const Scalar spread = std::sqrt(variance(gen, state));
    if (spread <= Tolerances<Scalar>::resource_floor)
        throw SharpGeneratorError("state is an eigenstate of the generator; "
                                  "its spread is " + std::to_string(spread));
    return Scalar(1) / (Scalar(2) * spread);
}

/// π/(2|⟨H⟩|): the minimal phase that can reach an orthogonal state.
template <typename Scalar>
Scalar ml_phase_bound(Scalar resource) {
    if (resource <= Tolerances<Scalar>::resource_floor)
        throw NoResourceError("resource count " + std::to_string(resource) +
                              "; no resources are available to estimate the "
                              "phase");
    return std::numbers::pi_v<Scalar> / (Scalar(2) * resource);
}

/// ΔX / |d⟨X⟩/dφ|: the phase error propagated through an observable's
/// signal curve.
template <typename Scalar>
Scalar error_propagation(Scalar mean_deriv, Scalar stddev) {
    if (std::abs(mean_deriv) <= Tolerances<Scalar>::resource_floor)
        throw FlatSignalError("signal slope is " + std::to_string(mean_deriv) +
                              "; the observable carries no first-order phase "
                              "response here");
    return stddev / std::abs(mean_deriv);
}

/// d⟨X⟩/dφ at the given evolved state: 2·Im⟨ψ|X H|ψ⟩.
template <typename Scalar>
Scalar observable_phase_derivative(const StateVector<Scalar>& state_at_phi,
                                   const HermitianOperator<Scalar>& obs,
                                   const HermitianOperator<Scalar>& gen) {
    const ComplexVector<Scalar> x_psi = obs.apply(state_at_phi.amplitudes());
    const ComplexVector<Scalar> h_psi = gen.apply(state_at_phi.amplitudes());
    return Scalar(2) * x_psi.dot(h_psi).imag();
}

/// One bound value, or the name of the error that prevented it.
template <typename Scalar = double>
struct BoundValue {
    Scalar value = std::numeric_limits<Scalar>::quiet_NaN();
    std::string error;

    bool ok() const { return error.empty(); }

    static BoundValue of(Scalar v) { return BoundValue{v, {}}; }
    static BoundValue failed(std::string name) {
        return BoundValue{std::numeric_limits<Scalar>::quiet_NaN(),
                          std::move(name)};
    }
};

/// Every figure of merit for one (probe, generator, measurement, phase)
/// configuration. Fields that cannot be computed carry the error name
/// instead of a number; the report itself is always constructible.
template <typename Scalar = double>
struct BoundReport {
    Scalar phi = 0;
    std::int64_t t_repeats = 1;
    Scalar resource = 0;
    Scalar qfi = 0;
    BoundValue<Scalar> fisher_classical;
    BoundValue<Scalar> crb;
    BoundValue<Scalar> heisenberg_eq8;
    BoundValue<Scalar> uncertainty_eq9;
    BoundValue<Scalar> ml_phase_eq10;
    BoundValue<Scalar> delta_phi_ep;
    BoundValue<Scalar> ratio_eq8;
};

namespace detail {

template <typename Scalar, typename Fn>
BoundValue<Scalar> try_bound(Fn&& fn) {
    try {
        return BoundValue<Scalar>::of(fn());
    } catch (const MetrologyError& e) {
        return BoundValue<Scalar>::failed(e.name());
    }
}

template <typename Scalar>
BoundReport<Scalar>
assemble_report(const StateVector<Scalar>& state0,
                const HermitianOperator<Scalar>& dynamics, Scalar resource,
                Scalar phi, const Povm<Scalar>& povm,
                const std::optional<HermitianOperator<Scalar>>& observable,
                std::int64_t t_repeats) {
    BoundReport<Scalar> report;
    report.phi = phi;
    report.t_repeats = t_repeats;
    report.resource = resource;
    report.qfi = qfi_pure(state0, dynamics);

    report.fisher_classical = try_bound<Scalar>([&] {
        return fisher_information(born_derivative(state0, dynamics, phi, povm));
    });
    report.crb = report.fisher_classical.ok()
                     ? try_bound<Scalar>([&] {
                           return cramer_rao(report.fisher_classical.value,
                                             t_repeats);
                       })
                     : BoundValue<Scalar>::failed(report.fisher_classical.error);
    report.heisenberg_eq8 =
        try_bound<Scalar>([&] { return heisenberg_bound(resource); });
    report.uncertainty_eq9 =
        try_bound<Scalar>([&] { return uncertainty_bound(state0, dynamics); });
    report.ml_phase_eq10 =
        try_bound<Scalar>([&] { return ml_phase_bound(resource); });

    if (observable) {
        report.delta_phi_ep = try_bound<Scalar>([&] {
            const StateVector<Scalar> at_phi = evolve(state0, dynamics, phi);
            const Moments<Scalar> m = observable_moments(at_phi, *observable);
            const Scalar slope =
                observable_phase_derivative(at_phi, *observable, dynamics);
            return error_propagation(slope, m.stddev);
        });
    } else {
        report.delta_phi_ep = BoundValue<Scalar>::failed("NotConfigured");
    }
    // Reported as-is; the attaining protocol itself lands at 1/2, so this is
    // a diagnostic, never an asserted inequality.
    report.ratio_eq8 =
        report.delta_phi_ep.ok()
            ? BoundValue<Scalar>::of(report.delta_phi_ep.value * resource)
            : BoundValue<Scalar>::failed(report.delta_phi_ep.error);

    if (report.fisher_classical.ok() &&
        report.fisher_classical.value >
            report.qfi * (Scalar(1) + Scalar(1e-6)) + Scalar(1e-12))
        throw NumericalError("classical Fisher information " +
                             std::to_string(report.fisher_classical.value) +
                             " exceeds the quantum value " +
                             std::to_string(report.qfi));
    return report;
}

} // namespace detail

/// Full report against the ground-normalized generator. The observable is
/// optional; without one, the error-propagation entries carry the
/// "NotConfigured" marker.
template <typename Scalar>
BoundReport<Scalar>
bound_report(const StateVector<Scalar>& state0,
             const NormalizedGenerator<Scalar>& gen, Scalar phi,
             const Povm<Scalar>& povm,
             const std::type_identity_t<
                 std::optional<HermitianOperator<Scalar>>>& observable,
             std::int64_t t_repeats) {
    return detail::assemble_report(state0, gen.op(),
                                   resource_count(state0, gen), phi, povm,
                                   observable, t_repeats);
}

/// Same report against the raw generator, skipping the ground shift. Only
/// for side-by-side comparison: the resource-derived bounds depend on the
/// energy origin and are physically meaningful only in normalized form.
template <typename Scalar>
BoundReport<Scalar> bound_report_unnormalized(
    const StateVector<Scalar>& state0, const HermitianOperator<Scalar>& gen,
    Scalar phi, const Povm<Scalar>& povm,
    const std::type_identity_t<
        std::optional<HermitianOperator<Scalar>>>& observable,
    std::int64_t t_repeats) {
    return detail::assemble_report(state0, gen,
                                   std::abs(expectation(gen, state0)), phi,
                                   povm, observable, t_repeats);
}

/// Smallest φ in (0, phi_max] where the evolved state becomes orthogonal to
/// the initial one. The overlap is reduced to its spectral form
/// g(φ) = Σ_i w_i e^{-iφλ_i} once, so each probe of φ costs O(dim); the
/// zeros of |g|² are bracketed on a grid and polished by bisection on
/// d|g|²/dφ.
template <typename Scalar>
Scalar first_orthogonality_phase(const StateVector<Scalar>& state0,
                                 const HermitianOperator<Scalar>& gen,
                                 Scalar phi_max, Index grid_points = 4096) {
    if (gen.dim() != state0.dim())
        throw DimensionError("generator dimension does not match the state");
    if (!(phi_max > 0))
        throw NumericalError("phase window must be positive");

    RealVector<Scalar> weights, levels;
    if (gen.is_diagonal()) {
        levels = gen.diagonal();
        weights = state0.amplitudes().cwiseAbs2();
    } else {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> solver(gen.dense());
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigenvalue computation did not converge");
        levels = solver.eigenvalues();
        weights =
            (solver.eigenvectors().adjoint() * state0.amplitudes()).cwiseAbs2();
    }

    auto overlap_at = [&](Scalar phi) {
        Complex<Scalar> g(0, 0);
        for (Index i = 0; i < levels.size(); ++i)
            g += weights(i) * std::exp(Complex<Scalar>(0, -phi * levels(i)));
        return g;
    };
    auto mag2_slope = [&](Scalar phi) {
        Complex<Scalar> g(0, 0), gp(0, 0);
        for (Index i = 0; i < levels.size(); ++i) {
            const Complex<Scalar> term =
                weights(i) * std::exp(Complex<Scalar>(0, -phi * levels(i)));
            g += term;
            gp += Complex<Scalar>(0, -levels(i)) * term;
        }
        return Scalar(2) * (std::conj(g) * gp).real();
    };

    const Scalar orthogonal_mag2 = Scalar(1e-16);
    const Scalar step = phi_max / static_cast<Scalar>(grid_points);
    Scalar prev_slope = mag2_slope(Scalar(0));
    for (Index k = 1; k <= grid_points; ++k) {
        const Scalar phi = step * static_cast<Scalar>(k);
        const Scalar slope = mag2_slope(phi);
        if (prev_slope < 0 && slope >= 0) {
            Scalar lo = phi - step, hi = phi;
            for (int it = 0; it < 200 && hi - lo > Scalar(1e-15) * phi_max;
                 ++it) {
                const Scalar mid = (lo + hi) / 2;
                (mag2_slope(mid) < 0 ? lo : hi) = mid;
            }
            const Scalar candidate = (lo + hi) / 2;
            if (std::norm(overlap_at(candidate)) < orthogonal_mag2)
                return candidate;
        }
        prev_slope = slope;
    }
    throw NumericalError("no orthogonal state is reached for phases up to " +
                         std::to_string(phi_max));
}

/// Finite-difference rate of change of the ray angle under evolution. For a
/// fixed generator this is phase-independent; it converges to ΔH as the
/// step shrinks and serves as the state-space counterpart to
/// statistical_speed.
template <typename Scalar>
Scalar wootters_speed_fd(const StateVector<Scalar>& state0,
                         const HermitianOperator<Scalar>& gen,
                         Scalar step = Scalar(1e-5)) {
    if (!(step > 0))
        throw NumericalError("step must be positive");
    return wootters_distance(state0, evolve(state0, gen, step)) / step;
}

} // namespace metrolab
