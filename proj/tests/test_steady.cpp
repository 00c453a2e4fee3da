#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "qar/casimir.hpp"
#include "qar/steady.hpp"
#include "qar/transport.hpp"
#include "test_helpers.hpp"

using namespace qar;
using namespace qar::testing;

TEST_CASE("single-qutrit stationary current approaches the closed form") {
  auto reservoirs = fig2_reservoirs(1e6);
  const TiltedGenerator gen =
      single_qutrit_rate_matrix(QarOrientation::Normal, reservoirs, kBigGap);
  const SteadyState ss = solve_steady(gen);
  const double current = stationary_current(gen, ss, ReservoirKind::Cold);
  const double closed = 0.1 * 0.1 * (10.0 - 1.0) / (0.1 * 31.0 + 0.1 * 4.0);
  CHECK(std::abs(current / closed - 1.0) < 1e-4);
  CHECK(closed == Catch::Approx(0.0257143).margin(5e-8));
}

TEST_CASE("equilibrium gives the Gibbs state over sector energies") {
  const double beta = 0.17;
  const TiltedGenerator gen =
      pauli_rate_matrix(collective_spec(4), equilibrium_reservoirs(beta));
  const SteadyState ss = solve_steady(gen);
  RealVector gibbs(gen.dim());
  for (int k = 0; k < gen.dim(); ++k) gibbs(k) = std::exp(-beta * gen.sector->energies[k]);
  gibbs /= gibbs.sum();
  CHECK((ss.populations() - gibbs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("coarse-grained chain: solver matches the analytic product formula") {
  const int qutrits = 10;
  const TiltedGenerator gen = cg_rate_matrix(qutrits, 0.1, 10.0, 0.1, 1.0);
  const SteadyState solved = solve_steady(gen);
  const SteadyState analytic = cg_steady_analytic(qutrits, 0.1, 10.0, 0.1, 1.0);
  CHECK((solved.populations() - analytic.populations()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(analytic.method == SteadyMethod::Tridiagonal);
}

TEST_CASE("analytic coarse-grained state") {
  SECTION("two-state balance at N=1") {
    const SteadyState ss = cg_steady_analytic(1, 0.3, 4.0, 0.2, 0.5);
    const TiltedGenerator gen = cg_rate_matrix(1, 0.3, 4.0, 0.2, 0.5);
    const DenseMatrix r = DenseMatrix(gen.zero_field);
    const auto q = ss.populations();
    CHECK(q(1) / q(0) == Catch::Approx(r(1, 0).real() / r(0, 1).real()).epsilon(1e-12));
  }
  SECTION("N=200 normalization and per-link detailed balance") {
    // nbar = 5.5 for Gamma_c = Gamma_h, n_c = 10, n_h = 1
    const int qutrits = 200;
    const SteadyState ss = cg_steady_analytic(qutrits, 0.1, 10.0, 0.1, 1.0);
    const auto q = ss.populations();
    CHECK(std::abs(q.sum() - 1.0) < 1e-12);
    const TiltedGenerator gen = cg_rate_matrix(qutrits, 0.1, 10.0, 0.1, 1.0);
    const DenseMatrix r = DenseMatrix(gen.zero_field);
    for (int n = 1; n <= qutrits; ++n) {
      const double forward = r(n, n - 1).real() * q(n - 1);
      const double backward = r(n - 1, n).real() * q(n);
      CHECK(std::abs(forward - backward) < 1e-12);
    }
  }
  SECTION("induced current equals the closed form") {
    for (int qutrits : {1, 5, 40}) {
      const TiltedGenerator gen = cg_rate_matrix(qutrits, 0.1, 10.0, 0.1, 1.0);
      const SteadyState ss = cg_steady_analytic(qutrits, 0.1, 10.0, 0.1, 1.0);
      const double current = stationary_current(gen, ss, ReservoirKind::Cold);
      CHECK(std::abs(current - cg_analytic_current(qutrits, 0.1, 10.0, 0.1, 1.0)) < 1e-10);
    }
  }
}

TEST_CASE("collective full space has a degenerate null space") {
  const auto reservoirs = fig2_reservoirs();
  const TiltedGenerator gen =
      lgks_generator(collective_spec(2), reservoirs, enumerate_full(2, kBigGap));
  CHECK_THROWS_AS(solve_steady(gen), NonUniqueSteadyState);
}

TEST_CASE("evolution to stationarity") {
  const auto reservoirs = fig2_reservoirs();
  const auto full = enumerate_full(2, kBigGap);
  const TiltedGenerator gen = lgks_generator(collective_spec(2), reservoirs, full);
  const DenseMatrix sym = symmetric_embedding(2, kBigGap);

  SECTION("collective evolution from |0;0> stays in the six symmetric states") {
    Vector rho0 = Vector::Zero(81);
    rho0(0) = 1.0;  // |00><00|
    const SteadyState ss = evolve_to_stationarity(gen, rho0, 4000.0, 1e-9, 1e-12);
    CHECK(ss.method == SteadyMethod::LongTimeEvolution);
    const DenseMatrix rho = unvectorize(ss.state, 9);
    // projector on the orthogonal complement of the symmetric sector
    const DenseMatrix proj = DenseMatrix::Identity(9, 9) - sym * sym.adjoint();
    CHECK((proj * rho * proj).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-9);

    // agrees with the direct symmetric-sector solve
    const auto sym_sector = enumerate_symmetric(2, kBigGap);
    const SteadyState direct =
        solve_steady(lgks_generator(collective_spec(2), reservoirs, sym_sector));
    const DenseMatrix projected = sym.adjoint() * rho * sym;
    const DenseMatrix direct_rho = unvectorize(direct.state, sym_sector->dimension());
    CHECK((projected - direct_rho).cwiseAbs().maxCoeff() < 1e-8);
  }

  SECTION("antisymmetric initial data stays in the antisymmetric sector") {
    const auto anti = second_casimir_sector(2, kBigGap);
    const Vector psi7 = anti->embedding.col(0);
    const DenseMatrix rho0 = psi7 * psi7.adjoint();
    const SteadyState ss = evolve_to_stationarity(gen, vectorize(rho0), 4000.0, 1e-9, 1e-12);
    const DenseMatrix rho = unvectorize(ss.state, 9);
    const DenseMatrix proj =
        DenseMatrix::Identity(9, 9) - anti->embedding * anti->embedding.adjoint();
    CHECK((proj * rho * proj).cwiseAbs().maxCoeff() < 1e-9);
  }

  SECTION("a stationary initial state returns immediately") {
    const auto sym_sector = enumerate_symmetric(2, kBigGap);
    const TiltedGenerator sgen = lgks_generator(collective_spec(2), reservoirs, sym_sector);
    const SteadyState direct = solve_steady(sgen);
    const SteadyState again = evolve_to_stationarity(sgen, direct.state, 10.0, 1e-9);
    CHECK((again.state - direct.state).norm() < 1e-12);
  }

  SECTION("t_max exceeded raises a convergence failure") {
    Vector rho0 = Vector::Zero(81);
    rho0(0) = 1.0;
    CHECK_THROWS_AS(evolve_to_stationarity(gen, rho0, 0.5, 1e-13), ConvergenceError);
  }
}

TEST_CASE("null-space and evolution solutions agree when the state is unique") {
  const auto reservoirs = fig2_reservoirs();
  SystemSpec spec = collective_spec(2);
  spec.coupling = CouplingSpec::with_phases({0.07, -0.03}, {0.02, 0.09}, {-0.05, 0.04});
  const TiltedGenerator gen = lgks_generator(spec, reservoirs, enumerate_full(2, kBigGap));
  const SteadyState direct = solve_steady(gen);
  Vector rho0 = Vector::Zero(81);
  rho0(0) = 1.0;
  const SteadyState evolved = evolve_to_stationarity(gen, rho0, 8000.0, 1e-10, 1e-12);
  CHECK((direct.state - evolved.state).norm() < 1e-8);
}

TEST_CASE("Pauli mesostate populations approach the coarse-grained limit as n_w grows") {
  const int qutrits = 6;
  const SteadyState cg = cg_steady_analytic(qutrits, 0.1, 10.0, 0.1, 1.0);
  double previous_error = 1e9;
  for (double n_w : {1e4, 1e5, 1e6}) {
    const TiltedGenerator gen = pauli_rate_matrix(collective_spec(qutrits), fig2_reservoirs(n_w));
    const SteadyState ss = solve_steady(gen);
    const auto populations = ss.populations();
    RealVector meso = RealVector::Zero(qutrits + 1);
    for (int k = 0; k < gen.dim(); ++k)
      meso(gen.sector->large_counts[k] + gen.sector->small_counts[k]) += populations(k);
    const double error = (meso - cg.populations()).cwiseAbs().maxCoeff();
    CHECK(error < previous_error);
    previous_error = error;

    if (n_w == 1e5) {
      // conditional populations approach 1/(n+1)
      for (int k = 0; k < gen.dim(); ++k) {
        const int n = gen.sector->large_counts[k] + gen.sector->small_counts[k];
        if (meso(n) < 1e-12) continue;
        CHECK(std::abs(populations(k) / meso(n) - 1.0 / (n + 1)) < 1e-3);
      }
    }
  }
}

TEST_CASE("solve options guard the residual") {
  const TiltedGenerator gen = cg_rate_matrix(4, 0.1, 10.0, 0.1, 1.0);
  SolveOptions opts;
  opts.residual_tol = 1e-30;  // unattainable
  CHECK_THROWS_AS(solve_steady(gen, opts), ConvergenceError);
}
