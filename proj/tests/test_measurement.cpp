#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "metrolab/generators.hpp"
#include "metrolab/hilbert.hpp"
#include "metrolab/measurement.hpp"
#include "test_support.hpp"

using namespace metrolab;
using std::numbers::pi;
using Cx = std::complex<double>;

namespace {

// |±⟩ = (|0⟩ ± |n⟩)/√2 projectors plus the complement of their span.
Povm<double> two_level_interference_povm(Index n, Index cutoff) {
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

// |g...g⟩⟨e...e| + h.c. as a rank-2 split into its ±1 eigenvectors.
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

} // namespace

TEST_CASE("measurement construction enforces positivity and completeness") {
    Eigen::VectorXd half(2);
    half << 0.5, 0.5;
    auto mixed = Povm<double>::from_effects(
        {HermitianOperator<double>::from_diagonal(half),
         HermitianOperator<double>::from_diagonal(half)});
    CHECK(mixed.n_outcomes() == 2);

    Eigen::VectorXd bad(2);
    bad << 1.5, -0.5;
    CHECK_THROWS_AS(Povm<double>::from_effects(
                        {HermitianOperator<double>::from_diagonal(bad),
                         HermitianOperator<double>::from_diagonal(half)}),
                    CompletenessError);

    // Explicit effects that do not reach the identity.
    CHECK_THROWS_AS(Povm<double>::from_effects(
                        {HermitianOperator<double>::from_diagonal(half)}),
                    CompletenessError);

    // Complement form rejects explicit parts that overshoot the identity.
    Eigen::VectorXd heavy(2);
    heavy << 1.2, 0.3;
    CHECK_THROWS_AS(
        Povm<double>::with_complement(
            {HermitianOperator<double>::from_diagonal(heavy)}, {"a"}, "rest"),
        CompletenessError);

    CHECK_THROWS_AS(Povm<double>::from_effects(
                        {HermitianOperator<double>::from_diagonal(half),
                         HermitianOperator<double>::from_diagonal(half)},
                        {"only-one"}),
                    DimensionError);

    auto basis = Povm<double>::computational_basis(3);
    CHECK(basis.n_outcomes() == 3);
    CHECK(basis.labels()[2] == "2");
}

TEST_CASE("interference fringe probabilities") {
    const Index n = 4;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    auto povm = two_level_interference_povm(n, n);

    const double phi = 0.2;
    auto dist = born_probabilities(evolve(psi0, gen, phi), povm);
    REQUIRE(dist.probs.size() == 3);
    const double fringe = std::cos(n * n * phi);
    CHECK(dist.probs(0) == doctest::Approx((1 + fringe) / 2).epsilon(1e-12));
    CHECK(dist.probs(1) == doctest::Approx((1 - fringe) / 2).epsilon(1e-12));
    CHECK(dist.probs(2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dist.derivs.cwiseAbs().maxCoeff() == 0.0);

    auto at_zero = born_probabilities(psi0, povm);
    CHECK(at_zero.probs(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(at_zero.probs(1) == doctest::Approx(0.0).epsilon(1e-12));

    // A maximally mixed two-outcome measurement ignores the state.
    Eigen::VectorXd half = Eigen::VectorXd::Constant(n + 1, 0.5);
    auto mixed = Povm<double>::from_effects(
        {HermitianOperator<double>::from_diagonal(half),
         HermitianOperator<double>::from_diagonal(half)});
    std::mt19937 rng(111);
    auto anything = born_probabilities(random_state(n + 1, rng), mixed);
    CHECK(anything.probs(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(anything.probs(1) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(born_probabilities(random_state(3, rng), povm),
                    DimensionError);
}

TEST_CASE("analytic fringe slope matches the closed form and finite differences") {
    const Index n = 3;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    auto povm = two_level_interference_povm(n, n);

    const double phi = 0.11;
    auto dist = born_derivative(psi0, gen, phi, povm);
    const double expected = -(n * n / 2.0) * std::sin(n * n * phi);
    CHECK(dist.derivs(0) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(dist.derivs(1) == doctest::Approx(-expected).epsilon(1e-10));

    const double h = 1e-6;
    auto up = born_probabilities(evolve(psi0, gen, phi + h), povm);
    auto down = born_probabilities(evolve(psi0, gen, phi - h), povm);
    for (Index x = 0; x < dist.probs.size(); ++x)
        CHECK(dist.derivs(x) ==
              doctest::Approx((up.probs(x) - down.probs(x)) / (2 * h))
                  .epsilon(1e-6));

    auto stationary = born_derivative(psi0, gen, 0.0, povm);
    CHECK(stationary.derivs.cwiseAbs().maxCoeff() < 1e-14);

    // Eigenstate of the generator measured in a commuting basis: nothing
    // moves.
    auto fock = basis_state<double>({n + 1}, 2);
    auto basis_povm = Povm<double>::computational_basis(n + 1);
    auto frozen = born_derivative(fock, gen, 0.4, basis_povm);
    CHECK(frozen.derivs.cwiseAbs().maxCoeff() == 0.0);
    CHECK(frozen.probs(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic derivatives agree with finite differences on random configurations") {
    std::mt19937 rng(222);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    for (int rep = 0; rep < 100; ++rep) {
        const Index dim = 2 + static_cast<Index>(rng() % 7);
        auto state = random_state(dim, rng);
        auto gen = HermitianOperator<double>::from_dense(
            random_hermitian(dim, rng));
        auto povm = random_povm(dim, 2 + static_cast<int>(rng() % 3), rng);
        const double phi = angle(rng);

        auto dist = born_derivative(state, gen, phi, povm);
        CHECK(std::abs(dist.probs.sum() - 1.0) < 1e-10);
        CHECK(std::abs(dist.derivs.sum()) < 1e-10);

        const double h = 1e-5;
        auto up = born_probabilities(evolve(state, gen, phi + h), povm);
        auto down = born_probabilities(evolve(state, gen, phi - h), povm);
        for (Index x = 0; x < dist.probs.size(); ++x)
            CHECK(std::abs(dist.derivs(x) -
                           (up.probs(x) - down.probs(x)) / (2 * h)) < 1e-6);
    }
}

TEST_CASE("observable moments on the worked protocols") {
    const Index n = 4;
    auto psi0 = zero_n_superposition<double>(n, n);
    auto gen = number_squared_operator<double>(n);
    auto x = edge_exchange_observable(n + 1);

    const double phi = 0.23;
    auto m = observable_moments(evolve(psi0, gen, phi), x);
    CHECK(m.mean == doctest::Approx(std::cos(n * n * phi)).epsilon(1e-12));
    CHECK(m.stddev ==
          doctest::Approx(std::abs(std::sin(n * n * phi))).epsilon(1e-12));

    // Eigenstates have a sharp value.
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(n + 1);
    plus(0) = r;
    plus(n) = r;
    auto sharp = observable_moments(StateVector<double>({n + 1}, plus), x);
    CHECK(sharp.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sharp.stddev == doctest::Approx(0.0).epsilon(1e-7));

    // Parity fringe of the maximally entangled register.
    const Index qubits = 3;
    auto ghz = ghz_state<double>(qubits);
    auto atom = AtomicGenerator<double>::from_diagonal(
        (Eigen::VectorXd(2) << 0.0, 1.0).finished());
    auto net = build_glm(atom, qubits);
    auto parity = edge_exchange_observable(Index{1} << qubits);
    auto pm = observable_moments(evolve(ghz, net.total(), phi), parity);
    CHECK(pm.mean == doctest::Approx(std::cos(qubits * phi)).epsilon(1e-12));
    CHECK(pm.stddev ==
          doctest::Approx(std::abs(std::sin(qubits * phi))).epsilon(1e-12));
}

TEST_CASE("sampling is deterministic and concentrates") {
    OutcomeDistribution<double> sure;
    sure.probs = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    sure.derivs = Eigen::VectorXd::Zero(2);
    auto counts = sample_outcomes(sure, 100, 7);
    CHECK(counts[0] == 100);
    CHECK(counts[1] == 0);

    OutcomeDistribution<double> fair;
    fair.probs = (Eigen::VectorXd(2) << 0.5, 0.5).finished();
    fair.derivs = Eigen::VectorXd::Zero(2);
    auto big = sample_outcomes(fair, 1000000, 42);
    CHECK(big[0] + big[1] == 1000000);
    CHECK(std::abs(static_cast<double>(big[0]) - 500000.0) < 5 * 500.0);

    auto again = sample_outcomes(fair, 1000000, 42);
    CHECK(big == again);
    auto other = sample_outcomes(fair, 1000000, 43);
    CHECK(big != other);

    CHECK_THROWS_AS(sample_outcomes(fair, 0, 1), ArityError);
}

TEST_CASE("empirical frequencies converge to the distribution") {
    OutcomeDistribution<double> dist;
    dist.probs = (Eigen::VectorXd(4) << 0.1, 0.2, 0.3, 0.4).finished();
    dist.derivs = Eigen::VectorXd::Zero(4);
    const std::int64_t shots = 1000000;
    auto counts = sample_outcomes(dist, shots, 314159);
    double tv = 0.0;
    for (Index x = 0; x < 4; ++x)
        tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(x)]) /
                           static_cast<double>(shots) -
                       dist.probs(x));
    CHECK(tv / 2 < 0.01);
}

TEST_CASE("huge registers work through the complement form") {
    // 2^16-dimensional parity measurement: two rank-1 projectors plus the
    // complement; completeness must not require materializing anything.
    const Index qubits = 16;
    const Index dim = Index{1} << qubits;
    const double r = 1.0 / std::sqrt(2.0);
    Eigen::VectorXcd plus = Eigen::VectorXcd::Zero(dim);
    Eigen::VectorXcd minus = Eigen::VectorXcd::Zero(dim);
    plus(0) = r;
    plus(dim - 1) = r;
    minus(0) = r;
    minus(dim - 1) = -r;
    auto povm = Povm<double>::projectors_with_complement(
        {StateVector<double>({dim}, plus), StateVector<double>({dim}, minus)},
        {"even", "odd"}, "rest");

    auto ghz = ghz_state<double>(qubits);
    auto atom = AtomicGenerator<double>::from_diagonal(
        (Eigen::VectorXd(2) << 0.0, 1.0).finished());
    auto net = build_glm(atom, qubits);
    const double phi = 0.05;
    auto dist = born_derivative(ghz, net.total(), phi, povm);
    CHECK(dist.probs(0) ==
          doctest::Approx((1 + std::cos(qubits * phi)) / 2).epsilon(1e-12));
    CHECK(dist.derivs(0) ==
          doctest::Approx(-(qubits / 2.0) * std::sin(qubits * phi))
              .epsilon(1e-10));
    CHECK(dist.probs(2) == doctest::Approx(0.0).epsilon(1e-12));
}
