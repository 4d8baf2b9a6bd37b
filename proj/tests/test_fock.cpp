#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "test_support.hpp"
#include "threewave/fock.hpp"
#include "threewave/linear.hpp"

using namespace threewave;
using Catch::Approx;

TEST_CASE("subspace dimension d = s2 + 1") {
    CHECK(subspace_dimension(100, 100).dimension() == 101);
    CHECK(subspace_dimension(2, 2).dimension() == 3);
    CHECK(subspace_dimension(0, 0).dimension() == 1);
    CHECK(subspace_dimension(103, 110).dimension() == 104);
}

TEST_CASE("subspace convention violations are rejected") {
    CHECK_THROWS_AS(subspace_dimension(3, 2), std::domain_error);
    CHECK_THROWS_AS(subspace_dimension(-1, 5), std::domain_error);
    CHECK_THROWS_AS(subspace_dimension(2, -3), std::domain_error);
}

TEST_CASE("basis states follow psi_i = |s2-i, s3-s2+i, i>") {
    const SubspaceSpec big(100, 100);
    const BasisState b0 = basis_state(big, 0);
    CHECK(b0.n1 == 100);
    CHECK(b0.n2 == 0);
    CHECK(b0.n3 == 0);

    const BasisState fig1 = basis_state(SubspaceSpec(103, 110), 3);
    CHECK(fig1.n1 == 100);
    CHECK(fig1.n2 == 10);
    CHECK(fig1.n3 == 3);

    const SubspaceSpec s(7, 12);
    const BasisState last = basis_state(s, 7);
    CHECK(last.n1 == 0);
    CHECK(last.n2 == 12);
    CHECK(last.n3 == 7);

    // every state keeps the two conserved sums
    for (int i = 0; i <= s.s2; ++i) {
        const BasisState b = basis_state(s, i);
        CHECK(b.n1 + b.n3 == s.s2);
        CHECK(b.n1 + b.n2 == s.s3);
    }

    CHECK_THROWS_AS(basis_state(s, -1), std::out_of_range);
    CHECK_THROWS_AS(basis_state(s, 8), std::out_of_range);
}

TEST_CASE("wave function construction enforces shape and norm") {
    const SubspaceSpec s(2, 2);
    CHECK_THROWS_AS(WaveFunction(s, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(WaveFunction(s, {0.9, 0.0, 0.0}), normalization_error);
    const WaveFunction ok = WaveFunction::renormalized(s, {complexd(3, 0), complexd(0, 4), 0.0});
    CHECK(ok.norm_error() < 1e-15);
}

TEST_CASE("expectations of basis and uniform states") {
    const WaveFunction e0 = WaveFunction::basis(SubspaceSpec(100, 100), 0);
    const Expectations a = expectations(e0);
    CHECK(a.n1 == Approx(100.0));
    CHECK(a.n2 == Approx(0.0).margin(1e-12));
    CHECK(a.n3 == Approx(0.0).margin(1e-12));

    const double u = 1.0 / std::sqrt(3.0);
    const WaveFunction uni(SubspaceSpec(2, 2), {u, u, u});
    const Expectations b = expectations(uni);
    CHECK(b.n1 == Approx(1.0));
    CHECK(b.n2 == Approx(1.0));
    CHECK(b.n3 == Approx(1.0));

    const SubspaceSpec s(9, 14);
    for (int m = 0; m <= 9; ++m) {
        const Expectations e = expectations(WaveFunction::basis(s, m));
        CHECK(e.n1 == Approx(9.0 - m));
        CHECK(e.n2 == Approx(14.0 - 9.0 + m));
        CHECK(e.n3 == Approx(static_cast<double>(m)));
    }
}

TEST_CASE("variance extremes") {
    const SubspaceSpec s(10, 10);
    for (int m = 0; m <= 10; ++m)
        CHECK(variance_n1(WaveFunction::basis(s, m)) == Approx(0.0).margin(1e-12));

    // equal superposition of the end states maximizes the variance
    std::vector<complexd> a(11, 0.0);
    a[0] = a[10] = 1.0 / std::sqrt(2.0);
    CHECK(variance_n1(WaveFunction(s, a)) == Approx(100.0 / 4.0));
}

TEST_CASE("spread state variance matches the fig1 preset value") {
    const SubspaceSpec s(103, 110);
    const WaveFunction psi = spread_state(s, SpreadSpec{3, 0.1});
    CHECK(variance_n1(psi) == Approx(0.02).margin(0.001));
}

TEST_CASE("conservation and variance bounds over random states") {
    twtest::Rng rng;
    for (int trial = 0; trial < 200; ++trial) {
        const int s2 = 1 + static_cast<int>(rng.next() % 31);
        const int s3 = s2 + static_cast<int>(rng.next() % 13);
        const SubspaceSpec spec(s2, s3);
        const WaveFunction psi = twtest::random_state(rng, spec);
        const Expectations e = expectations(psi);
        CHECK(std::abs(e.n1 + e.n3 - s2) <= 1e-10 * s2);
        CHECK(std::abs(e.n1 + e.n2 - s3) <= 1e-10 * s3);
        CHECK(e.n3 >= -1e-12);
        CHECK(e.n3 <= s2 + 1e-12);
    }
}

TEST_CASE("variance bound 0 <= var <= s2^2/4 over 10^4 random states") {
    twtest::Rng rng(12345);
    int checked = 0;
    while (checked < 10000) {
        const int s2 = 1 + static_cast<int>(rng.next() % 31);
        const SubspaceSpec spec(s2, s2 + static_cast<int>(rng.next() % 8));
        const WaveFunction psi = twtest::random_state(rng, spec);
        const double v = variance_n1(psi);
        REQUIRE(v >= -1e-12);
        REQUIRE(v <= s2 * s2 / 4.0 + 1e-9);
        ++checked;
    }
}

TEST_CASE("observables are invariant under a global phase") {
    twtest::Rng rng(777);
    const SubspaceSpec spec(12, 17);
    const WaveFunction psi = twtest::random_state(rng, spec);
    const double theta = 1.234567;
    std::vector<complexd> rotated = psi.amplitudes();
    for (complexd& x : rotated) x *= std::exp(complexd(0, theta));
    const WaveFunction chi(spec, rotated);

    const Expectations a = expectations(psi), b = expectations(chi);
    CHECK(a.n1 == Approx(b.n1).epsilon(1e-13));
    CHECK(a.n2 == Approx(b.n2).epsilon(1e-13).margin(1e-13));
    CHECK(a.n3 == Approx(b.n3).epsilon(1e-13).margin(1e-13));
    CHECK(variance_n1(psi) == Approx(variance_n1(chi)).epsilon(1e-12).margin(1e-12));
}

TEST_CASE("variance is zero only for pure basis states") {
    const SubspaceSpec s(6, 6);
    std::vector<complexd> a(7, 0.0);
    a[2] = std::sqrt(0.999);
    a[3] = std::sqrt(0.001);
    CHECK(variance_n1(WaveFunction(s, a)) > 0.0);
}
