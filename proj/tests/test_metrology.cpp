#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "metrolab/generators.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/measurement.hpp"
#include "metrolab/metrology.hpp"
#include "test_support.hpp"

using namespace metrolab;
using std::numbers::pi;
using Cx = std::complex<double>;

namespace {

Povm<double> interference_povm(Index n, Index cutoff) {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(cutoff + 1);
    Eigen::VectorXcd minus = Eigen::VectorXcd::Zero(cutoff + 1);
    plus(0) = r;
    plus(n) = r;
    minus(0) = r;
    minus(n) = -r;
    return Povm<double>::projectors_with_complement(
        {StateVector<double>({cutoff + 1}, plus),
         StateVector<double>({cutoff + 1}, minus)},
        {"plus", "minus"}, "rest");
}

HermitianOperator<double> edge_exchange_observable(Index dim) {
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::MatrixXcd cols = Eigen::MatrixXcd::Zero(dim, 2);
    cols(0, 0) = r;
    cols(dim - 1, 0) = r;
    cols(0, 1) = r;
    cols(dim - 1, 1) = -r;
    Eigen::VectorXd weights(2);
    weights << 1.0, -1.0;
    return HermitianOperator<double>::from_low_rank(cols, weights);
}

struct GhzSetup {
    StateVector<double> probe;
    GeneratorNetwork<double> net;
    Povm<double> povm;
    HermitianOperator<double> parity;
};

GhzSetup ghz_setup(Index qubits) {
    const Index dim = Index{1} << qubits;
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(dim);
    Eigen::VectorXcd minus = Eigen::VectorXcd::Zero(dim);
    plus(0) = r;
    plus(dim - 1) = r;
    minus(0) = r;
    minus(dim - 1) = -r;
    auto atom = AtomicGenerator<double>::from_diagonal(
        (Eigen::VectorXd(2) << 0.0, 1.0).finished());
    return GhzSetup{ghz_state<double>(qubits), build_glm(atom, qubits),
                    Povm<double>::projectors_with_complement(
                        {StateVector<double>({dim}, plus),
                         StateVector<double>({dim}, minus)},
                        {"even", "odd"}, "rest"),
                    edge_exchange_observable(dim)};
}

} // namespace

TEST_CASE("Fisher information of the worked two-outcome models") {
    for (Index n : {2, 4, 8}) {
        auto psi0 = zero_n_superposition<double>(n, n);
        auto gen = number_squared_operator<double>(n);
        auto povm = interference_povm(n, n);
        const double phi = 0.7 / static_cast<double>(n * n);
        auto dist = born_derivative(psi0, gen, phi, povm);
        const double n4 = std::pow(static_cast<double>(n), 4);
        CHECK(fisher_information(dist) ==
              doctest::Approx(n4).epsilon(1e-10));
    }

    for (Index q : {2, 3, 4}) {
        auto setup = ghz_setup(q);
        const double phi = 0.5 / static_cast<double>(q);
        auto dist = born_derivative(setup.probe, setup.net.total(), phi,
                                    setup.povm);
        CHECK(fisher_information(dist) ==
              doctest::Approx(static_cast<double>(q * q)).epsilon(1e-10));
    }

    // No φ dependence, no information.
    auto flat = born_probabilities(zero_n_superposition<double>(2, 2),
                                   interference_povm(2, 2));
    CHECK(fisher_information(flat) == 0.0);

    OutcomeDistribution<double> degenerate;
    degenerate.probs = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    degenerate.derivs = (Eigen::VectorXd(2) << -0.5, 0.5).finished();
    CHECK_THROWS_AS(fisher_information(degenerate), DegenerateError);

    OutcomeDistribution<double> harmless;
    harmless.probs = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    harmless.derivs = Eigen::VectorXd::Zero(2);
    CHECK(fisher_information(harmless) == 0.0);
}

TEST_CASE("Cramér-Rao floor arithmetic") {
    CHECK(cramer_rao(16.0, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(cramer_rao(1.0, 100) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(cramer_rao(16.0, 4) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK_THROWS_AS(cramer_rao(0.0, 1), NoInformationError);
    CHECK_THROWS_AS(cramer_rao(-1.0, 1), NoInformationError);
    CHECK_THROWS_AS(cramer_rao(1.0, 0), ArityError);
}

TEST_CASE("ray angle distance") {
    std::mt19937 rng(123);
    auto a = random_state(6, rng);
    // arccos near unit overlap amplifies rounding to √ε; that is the honest
    // floor for the self-distance.
    CHECK(wootters_distance(a, a) < 1e-7);

    auto e0 = basis_state<double>({6}, 0);
    auto e3 = basis_state<double>({6}, 3);
    CHECK(wootters_distance(e0, e3) == doctest::Approx(pi / 2).epsilon(1e-12));

    const Index n = 4;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    const double phi = 0.13;
    auto moved = evolve(psi0, gen, phi);
    CHECK(wootters_distance(psi0, moved) ==
          doctest::Approx(std::acos(std::abs(std::cos(n * n * phi / 2))))
              .epsilon(1e-12));

    // Symmetric, global-phase blind, capped at π/2.
    auto b = random_state(6, rng);
    CHECK(wootters_distance(a, b) ==
          doctest::Approx(wootters_distance(b, a)).epsilon(1e-13));
    auto rephased = StateVector<double>(
        a.dims(), Eigen::VectorXcd(a.amplitudes() * std::polar(1.0, 0.9)));
    CHECK(wootters_distance(a, rephased) < 1e-7);
    for (int rep = 0; rep < 20; ++rep) {
        auto u = random_state(5, rng);
        auto v = random_state(5, rng);
        const double d = wootters_distance(u, v);
        CHECK(d >= 0.0);
        CHECK(d <= pi / 2 + 1e-12);
    }
    CHECK_THROWS_AS(wootters_distance(a, random_state(5, rng)),
                    DimensionError);
}

TEST_CASE("statistical speed is the square root of the Fisher information") {
    const Index n = 4;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    auto povm = interference_povm(n, n);
    CHECK(statistical_speed(psi0, gen, 0.03, povm) ==
          doctest::Approx(static_cast<double>(n * n)).epsilon(1e-10));

    auto setup = ghz_setup(3);
    CHECK(statistical_speed(setup.probe, setup.net.total(), 0.11, setup.povm) ==
          doctest::Approx(3.0).epsilon(1e-10));

    // φ-independent measurement.
    Eigen::VectorXd half = Eigen::VectorXd::Constant(n + 1, 0.5);
    auto mixed = Povm<double>::from_effects(
        {HermitianOperator<double>::from_diagonal(half),
         HermitianOperator<double>::from_diagonal(half)});
    CHECK(statistical_speed(psi0, gen, 0.3, mixed) ==
          doctest::Approx(0.0).epsilon(1e-12));

    std::mt19937 rng(321);
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Index dim = 2 + static_cast<Index>(rng() % 7);
        auto state = random_state(dim, rng);
        auto h = HermitianOperator<double>::from_dense(
            random_hermitian(dim, rng));
        auto p = random_povm(dim, 3, rng);
        const double phi = angle(rng);
        const double speed = statistical_speed(state, h, phi, p);
        const double fisher =
            fisher_information(born_derivative(state, h, phi, p));
        CHECK(speed * speed == doctest::Approx(fisher).epsilon(1e-9));
    }
}

TEST_CASE("quantum Fisher information of pure states") {
    for (Index n : {2, 4, 8}) {
        auto psi0 = zero_n_superposition<double>(n, n);
        CHECK(qfi_pure(psi0, number_squared_operator<double>(n)) ==
              doctest::Approx(std::pow(static_cast<double>(n), 4))
                  .epsilon(1e-12));
    }

    auto fock = basis_state<double>({5}, 3);
    CHECK(qfi_pure(fock, number_operator<double>(4)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const double lambda = 30.0;
    auto alpha = coherent_state<double>(Cx(std::sqrt(lambda), 0),
                                        FockTruncation::auto_for(lambda));
    CHECK(qfi_pure(alpha, number_operator<double>(
                              FockTruncation::auto_for(lambda).cutoff)) ==
          doctest::Approx(4 * lambda).epsilon(1e-9));
}

TEST_CASE("resource-derived bounds and their guard rails") {
    for (Index n : {2, 4, 8}) {
        auto psi0 = zero_n_superposition<double>(n, n);
        auto gen = normalize_ground_energy(number_squared_operator<double>(n));
        const double resource = resource_count(psi0, gen);
        CHECK(heisenberg_bound(resource) ==
              doctest::Approx(2.0 / (n * n)).epsilon(1e-12));
        CHECK(ml_phase_bound(resource) ==
              doctest::Approx(pi / (n * n)).epsilon(1e-12));
        CHECK(uncertainty_bound(psi0, gen.op()) ==
              doctest::Approx(1.0 / (n * n)).epsilon(1e-12));
    }

    for (Index q : {2, 4, 8}) {
        auto setup = ghz_setup(q);
        auto gen = normalize_ground_energy(setup.net.total());
        const double resource = resource_count(setup.probe, gen);
        CHECK(heisenberg_bound(resource) ==
              doctest::Approx(2.0 / q).epsilon(1e-12));
        CHECK(ml_phase_bound(resource) ==
              doctest::Approx(pi / q).epsilon(1e-12));
    }

    CHECK_THROWS_AS(heisenberg_bound(0.0), NoResourceError);
    CHECK_THROWS_AS(ml_phase_bound(0.0), NoResourceError);

    const double lambda = 100.0;
    const Index cutoff = FockTruncation::auto_for(lambda).cutoff;
    auto alpha =
        coherent_state<double>(Cx(std::sqrt(lambda), 0),
                               FockTruncation::with_cutoff(cutoff));
    const double var_n2 =
        4 * std::pow(lambda, 3) + 6 * lambda * lambda + lambda;
    CHECK(uncertainty_bound(alpha, number_squared_operator<double>(cutoff)) ==
          doctest::Approx(1.0 / (2 * std::sqrt(var_n2))).epsilon(1e-7));

    auto fock = basis_state<double>({5}, 2);
    CHECK_THROWS_AS(uncertainty_bound(fock, number_operator<double>(4)),
                    SharpGeneratorError);
}

TEST_CASE("error propagation through the signal curve") {
    for (Index n : {2, 4, 8}) {
        auto psi0 = zero_n_superposition<double>(n, n);
        auto gen = number_squared_operator<double>(n);
        auto x = edge_exchange_observable(n + 1);
        for (int k = 0; k < 10; ++k) {
            const double phi =
                (k + 0.5) * pi / (10.0 * static_cast<double>(n * n));
            auto at_phi = evolve(psi0, gen, phi);
            auto m = observable_moments(at_phi, x);
            const double slope = observable_phase_derivative(at_phi, x, gen);
            CHECK(slope == doctest::Approx(-(n * n) *
                                           std::sin(n * n * phi))
                               .epsilon(1e-10));
            CHECK(error_propagation(slope, m.stddev) ==
                  doctest::Approx(1.0 / (n * n)).epsilon(1e-10));
        }
    }

    auto setup = ghz_setup(4);
    const double phi = pi / 16;
    auto at_phi = evolve(setup.probe, setup.net.total(), phi);
    auto m = observable_moments(at_phi, setup.parity);
    const double slope =
        observable_phase_derivative(at_phi, setup.parity, setup.net.total());
    CHECK(error_propagation(slope, m.stddev) ==
          doctest::Approx(0.25).epsilon(1e-10));

    CHECK_THROWS_AS(error_propagation(0.0, 0.7), FlatSignalError);
}

TEST_CASE("orthogonality phase saturates the separation bound") {
    for (Index n : {2, 4, 8}) {
        auto psi0 = zero_n_superposition<double>(n, n);
        auto gen = number_squared_operator<double>(n);
        const double window = 2 * pi / (n * n);
        const double first = first_orthogonality_phase(psi0, gen, window);
        CHECK(std::abs(first - pi / (n * n)) < 1e-8);

        auto normalized =
            normalize_ground_energy(number_squared_operator<double>(n));
        CHECK(std::abs(first -
                       ml_phase_bound(resource_count(psi0, normalized))) <
              1e-8);
    }

    // A state that never reaches orthogonality: nothing below the window.
    Eigen::VectorXcd lop(3);
    lop << Cx(0.99, 0), Cx(std::sqrt(1 - 0.99 * 0.99), 0), Cx(0, 0);
    auto skewed = StateVector<double>({3}, lop);
    CHECK_THROWS_AS(
        first_orthogonality_phase(skewed, number_operator<double>(2), 10.0),
        NumericalError);
}

TEST_CASE("ray-angle speed converges to the generator spread") {
    const Index n = 4;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    const double spread = std::sqrt(variance(gen, psi0));
    CHECK(wootters_speed_fd(psi0, gen, 1e-5) ==
          doctest::Approx(spread).epsilon(1e-6));
    // This is also half the square root of the quantum Fisher information.
    CHECK(4 * std::pow(wootters_speed_fd(psi0, gen, 1e-6), 2) ==
          doctest::Approx(qfi_pure(psi0, gen)).epsilon(1e-5));
}

TEST_CASE("full report on the attaining protocol") {
    auto psi0 = zero_n_superposition<double>(2, 2);
    auto gen = normalize_ground_energy(number_squared_operator<double>(2));
    auto povm = interference_povm(2, 2);
    auto report = bound_report(psi0, gen, pi / 16, povm,
                               edge_exchange_observable(3), 1);

    CHECK(report.fisher_classical.value == doctest::Approx(16.0).epsilon(1e-10));
    CHECK(report.qfi == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(report.resource == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.crb.value == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(report.heisenberg_eq8.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.uncertainty_eq9.value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(report.ml_phase_eq10.value ==
          doctest::Approx(pi / 4).epsilon(1e-12));
    CHECK(report.delta_phi_ep.value == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(report.ratio_eq8.value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(report.t_repeats == 1);

    // Repetitions tighten the statistical floor only.
    auto repeated = bound_report(psi0, gen, pi / 16, povm,
                                 edge_exchange_observable(3), 100);
    CHECK(repeated.crb.value == doctest::Approx(0.025).epsilon(1e-10));
    CHECK(repeated.heisenberg_eq8.value ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("full report on the entangled register") {
    auto setup = ghz_setup(4);
    auto gen = normalize_ground_energy(setup.net.total());
    auto report =
        bound_report(setup.probe, gen, pi / 16, setup.povm, setup.parity, 1);
    CHECK(report.fisher_classical.value == doctest::Approx(16.0).epsilon(1e-10));
    CHECK(report.resource == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(report.delta_phi_ep.value == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(report.ratio_eq8.value == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("vacuum probe yields a partial report with named failures") {
    auto vacuum = basis_state<double>({4}, 0);
    auto gen = normalize_ground_energy(number_operator<double>(3));
    auto povm = Povm<double>::computational_basis(4);
    auto report = bound_report(vacuum, gen, 0.1, povm, std::nullopt, 1);

    CHECK(report.resource == 0.0);
    CHECK(report.qfi == 0.0);
    CHECK(report.fisher_classical.value == 0.0);
    CHECK_FALSE(report.crb.ok());
    CHECK(report.crb.error == "NoInformationError");
    CHECK_FALSE(report.heisenberg_eq8.ok());
    CHECK(report.heisenberg_eq8.error == "NoResourceError");
    CHECK_FALSE(report.uncertainty_eq9.ok());
    CHECK(report.uncertainty_eq9.error == "SharpGeneratorError");
    CHECK_FALSE(report.ml_phase_eq10.ok());
    CHECK_FALSE(report.delta_phi_ep.ok());
    CHECK(report.delta_phi_ep.error == "NotConfigured");
    CHECK_FALSE(report.ratio_eq8.ok());
}

TEST_CASE("raw-generator report differs only in the resource-derived entries") {
    auto psi0 = zero_n_superposition<double>(2, 2);
    auto raw = number_squared_operator<double>(2).shifted(-5.0); // spectrum 5,6,9
    auto povm = interference_povm(2, 2);
    auto x = edge_exchange_observable(3);

    auto normalized = bound_report(psi0, normalize_ground_energy(raw), pi / 16,
                                   povm, x, 1);
    auto unnormalized =
        bound_report_unnormalized(psi0, raw, pi / 16, povm, x, 1);

    CHECK(normalized.resource == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(unnormalized.resource == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(unnormalized.heisenberg_eq8.value ==
          doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(unnormalized.fisher_classical.value ==
          doctest::Approx(normalized.fisher_classical.value).epsilon(1e-9));
    CHECK(unnormalized.qfi == doctest::Approx(normalized.qfi).epsilon(1e-9));
    CHECK(unnormalized.delta_phi_ep.value ==
          doctest::Approx(normalized.delta_phi_ep.value).epsilon(1e-9));
}

TEST_CASE("bounds ignore constant energy offsets through normalization") {
    std::mt19937 rng(444);
    auto state = random_state(5, rng);
    auto base = HermitianOperator<double>::from_dense(random_hermitian(5, rng));
    auto reference = normalize_ground_energy(base);
    const double r0 = resource_count(state, reference);
    for (double c : {2.5, -2.5}) {
        auto shifted = normalize_ground_energy(base.shifted(-c));
        const double r1 = resource_count(state, shifted);
        CHECK(r1 == doctest::Approx(r0).epsilon(1e-10));
        CHECK(heisenberg_bound(r1) ==
              doctest::Approx(heisenberg_bound(r0)).epsilon(1e-10));
        CHECK(ml_phase_bound(r1) ==
              doctest::Approx(ml_phase_bound(r0)).epsilon(1e-10));
    }
}

TEST_CASE("classical information never exceeds the quantum ceiling") {
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    for (int rep = 0; rep < 500; ++rep) {
        const Index dim = 2 + static_cast<Index>(rng() % 7);
        auto state = random_state(dim, rng);
        auto h = HermitianOperator<double>::from_dense(
            random_hermitian(dim, rng));
        auto povm = random_povm(dim, 2 + static_cast<int>(rng() % 3), rng);
        const double phi = angle(rng);

        const double fisher =
            fisher_information(born_derivative(state, h, phi, povm));
        const double ceiling = qfi_pure(state, h);
        CHECK(fisher <= ceiling * (1 + 1e-6) + 1e-12);

        // Equivalent restatement through the bounds.
        if (fisher > 0) {
            const double floor_stat = cramer_rao(fisher, std::int64_t{1});
            try {
                const double floor_quantum = uncertainty_bound(state, h);
                CHECK(floor_quantum <= floor_stat + 1e-9);
            } catch (const SharpGeneratorError&) {
            }
        }
    }
}

TEST_CASE("eigenbasis error propagation respects the statistical floor") {
    std::mt19937 rng(666);
    std::uniform_real_distribution<double> angle(-1.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 200 && checked < 100; ++rep) {
        const Index dim = 2 + static_cast<Index>(rng() % 5);
        auto state = random_state(dim, rng);
        auto h = HermitianOperator<double>::from_dense(
            random_hermitian(dim, rng));
        Eigen::MatrixXcd xm = random_hermitian(dim, rng);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(xm);
        std::vector<StateVector<double>> basis;
        for (Index i = 0; i < dim; ++i)
            basis.push_back(StateVector<double>(
                {dim}, Eigen::VectorXcd(solver.eigenvectors().col(i))));
        auto povm = Povm<double>::projectors(basis);
        auto x = HermitianOperator<double>::from_dense(xm);
        const double phi = angle(rng);

        double fisher;
        try {
            fisher = fisher_information(born_derivative(state, h, phi, povm));
        } catch (const DegenerateError&) {
            continue;
        }
        if (fisher <= 1e-9)
            continue;
        auto at_phi = evolve(state, h, phi);
        auto m = observable_moments(at_phi, x);
        double delta;
        try {
            delta = error_propagation(
                observable_phase_derivative(at_phi, x, h), m.stddev);
        } catch (const FlatSignalError&) {
            continue;
        }
        CHECK(delta >= cramer_rao(fisher, std::int64_t{1}) - 1e-9);
        ++checked;
    }
    CHECK(checked >= 50);
}
