#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qar/basis.hpp"
#include "qar/operators.hpp"
#include "qar/types.hpp"

namespace qar {

// Quadratic Casimir C_2 = sum_a J_a^2 on the full space.
inline SparseOperator casimir2_operator(const SectorPtr& full) {
  if (full->kind != SectorKind::FullSpace)
    throw ContractViolation("casimir operators are built on the full space");
  SpMat sum(full->dimension(), full->dimension());
  for (int a = 1; a <= 8; ++a) {
    SpMat j = collective_operator(a, full).matrix;
    sum += SpMat(j * j);
  }
  sum.prune([](int, int, const Complex& v) { return std::abs(v) > kZeroDropTolerance; });
  return SparseOperator{full, std::move(sum), true};
}

// Cubic Casimir C_3 = sum_abc d_abc J_a J_b J_c with the symmetric structure
// constants d_abc = tr({lambda_a, lambda_b} lambda_c)/4.
inline SparseOperator casimir3_operator(const SectorPtr& full) {
  if (full->kind != SectorKind::FullSpace)
    throw ContractViolation("casimir operators are built on the full space");
  DenseMatrix lam[9];
  for (int a = 1; a <= 8; ++a) lam[a] = DenseMatrix(gell_mann(a));
  std::vector<SpMat> j(9);
  for (int a = 1; a <= 8; ++a) j[a] = collective_operator(a, full).matrix;
  SpMat sum(full->dimension(), full->dimension());
  for (int a = 1; a <= 8; ++a)
    for (int b = 1; b <= 8; ++b) {
      SpMat jab = SpMat(j[a] * j[b]);
      for (int c = 1; c <= 8; ++c) {
        const Complex d =
            ((lam[a] * lam[b] + lam[b] * lam[a]) * lam[c]).trace() / 4.0;
        if (std::abs(d) < 1e-12) continue;
        sum += SpMat(d * (jab * j[c]));
      }
    }
  sum.prune([](int, int, const Complex& v) { return std::abs(v) > kZeroDropTolerance; });
  return SparseOperator{full, std::move(sum), true};
}

// Full-space penalty Hamiltonian (the alpha_C term needs C_2 explicitly).
inline SparseOperator penalty_hamiltonian_full(const SystemSpec& spec, const SectorPtr& full) {
  if (full->kind != SectorKind::FullSpace)
    throw ContractViolation("penalty_hamiltonian_full needs the full sector");
  const int dim = full->dimension();
  const double third = spec.qutrits / 3.0;
  std::vector<Triplet> trip;
  for (int k = 0; k < dim; ++k) {
    const double x = third - full->large_counts[k];
    const double y = third - full->small_counts[k];
    const double v = spec.penalty_central * (x * x + y * y + x * y);
    if (std::abs(v) > kZeroDropTolerance) trip.emplace_back(k, k, Complex(v, 0.0));
  }
  SpMat h = detail::from_triplets(dim, dim, trip);
  if (spec.penalty_casimir != 0.0) {
    SpMat c2 = casimir2_operator(full).matrix;
    SpMat id(dim, dim);
    id.setIdentity();
    h += spec.penalty_casimir *
         (spec.qutrits * (spec.qutrits + 3.0) / 3.0 * id - c2);
  }
  return SparseOperator{full, std::move(h), true};
}

// Normalized symmetric states embedded in the full space, built by repeated
// collective raising from |0...0>; column order matches enumerate_symmetric.
inline DenseMatrix symmetric_embedding(int qutrits, double big_gap) {
  const auto full = enumerate_full(qutrits, big_gap);
  const SystemSpec spec{qutrits, big_gap, CouplingSpec::collective(qutrits), 0.0, 0.0};
  const SpMat raise_c =
      coupling_operator(ReservoirKind::Cold, spec, Direction::Plus, full).matrix;
  const SpMat raise_h =
      coupling_operator(ReservoirKind::Hot, spec, Direction::Plus, full).matrix;
  const int dim = symmetric_dimension(qutrits);
  DenseMatrix p = DenseMatrix::Zero(full->dimension(), dim);
  int col = 0;
  for (int large = 0; large <= qutrits; ++large) {
    for (int small = 0; small + large <= qutrits; ++small, ++col) {
      Vector v = Vector::Zero(full->dimension());
      v(0) = 1.0;
      for (int s = 0; s < small; ++s) v = raise_c * v;
      for (int s = 0; s < large; ++s) v = raise_h * v;
      p.col(col) = v / v.norm();
    }
  }
  return p;
}

// Phased one-excitation representative state generating the sector with the
// second-largest C_2 eigenvalue.
inline Vector second_casimir_representative(int qutrits) {
  const int dim = pow3(qutrits);
  Vector v = Vector::Zero(dim);
  for (int site = 0; site < qutrits; ++site) {
    const int index = pow3(qutrits - 1 - site);  // '1' at this site
    v(index) = std::polar(1.0 / std::sqrt(static_cast<double>(qutrits)),
                          2.0 * M_PI * (qutrits - 1 - site) / qutrits);
  }
  return v;
}

// Build the second-Casimir sector by ladder closure: starting from the
// representative state, apply all six collective ladder operators and keep
// orthonormalizing (modified Gram-Schmidt with one re-orthogonalization pass,
// drop tolerance 1e-10) until no new directions appear.
inline SectorPtr second_casimir_sector(int qutrits, double big_gap) {
  if (qutrits < 2)
    throw ContractViolation("the second-Casimir sector needs at least two qutrits");
  const auto full = enumerate_full(qutrits, big_gap);
  const SystemSpec spec{qutrits, big_gap, CouplingSpec::collective(qutrits), 0.0, 0.0};
  std::vector<SpMat> ladders;
  for (ReservoirKind nu : {ReservoirKind::Cold, ReservoirKind::Hot, ReservoirKind::Work}) {
    SpMat plus = coupling_operator(nu, spec, Direction::Plus, full).matrix;
    ladders.push_back(plus);
    ladders.push_back(SpMat(plus.adjoint()));
  }

  constexpr double kDropTol = 1e-10;
  std::vector<Vector> basis{second_casimir_representative(qutrits)};
  const long max_applications = 10L * pow3(qutrits);
  long applications = 0;
  size_t frontier = 0;
  while (frontier < basis.size()) {
    const Vector seed = basis[frontier++];
    for (const SpMat& ladder : ladders) {
      if (++applications > max_applications)
        throw InternalError("ladder closure did not terminate; operator bug suspected");
      Vector w = ladder * seed;
      for (int pass = 0; pass < 2; ++pass)
        for (const Vector& u : basis) w -= u.dot(w) * u;
      const double norm = w.norm();
      if (norm > kDropTol) basis.push_back(w / norm);
    }
  }

  auto sector = std::make_shared<BasisSector>();
  sector->kind = SectorKind::SecondCasimir;
  sector->qutrits = qutrits;
  sector->big_gap = big_gap;
  sector->embedding = DenseMatrix(full->dimension(), static_cast<int>(basis.size()));
  for (size_t k = 0; k < basis.size(); ++k) sector->embedding.col(static_cast<int>(k)) = basis[k];

  // Every generated state keeps definite excitation counts (the ladders shift
  // them by fixed amounts), so read (M, m) off the diagonal expectations.
  for (int k = 0; k < sector->embedding.cols(); ++k) {
    const Vector& v = sector->embedding.col(k);
    double large = 0.0, small = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      const double w = std::norm(v(i));
      if (w < 1e-20) continue;
      large += w * full->large_counts[i];
      small += w * full->small_counts[i];
    }
    const int large_i = static_cast<int>(std::lround(large));
    const int small_i = static_cast<int>(std::lround(small));
    if (std::abs(large - large_i) > 1e-8 || std::abs(small - small_i) > 1e-8)
      throw InternalError("second-Casimir state without definite excitation counts");
    sector->large_counts.push_back(large_i);
    sector->small_counts.push_back(small_i);
    sector->energies.push_back(big_gap * large_i + kSmallGap * small_i);
    sector->labels.push_back("c2[" + std::to_string(k) + "](" + std::to_string(large_i) +
                             ";" + std::to_string(small_i) + ")");
  }

  const SpMat c2 = casimir2_operator(full).matrix;
  const Vector& rep = sector->embedding.col(0);
  sector->casimir2 = rep.dot(c2 * rep).real();
  const double top = qutrits * (qutrits + 3.0) / 3.0;
  if (!(sector->casimir2 < top - 1e-8))
    throw InternalError("ladder closure landed in the symmetric sector");
  return sector;
}

struct CasimirLayer {
  double casimir2 = 0.0;
  int multiplicity = 0;  // number of irreducible copies (0 if undetermined)
  int dimension = 0;     // total eigenspace dimension
};

// Eigenvalues of C_2 on the full space, clustered with tolerance 1e-8 and
// ordered by decreasing eigenvalue. The per-copy dimension follows from the
// su(3) labels (p, q) solving 3 C_2 = p^2 + q^2 + pq + 3p + 3q.
inline std::vector<CasimirLayer> casimir_sector_decomposition(int qutrits, double big_gap) {
  const auto full = enumerate_full(qutrits, big_gap);
  const DenseMatrix c2 = DenseMatrix(casimir2_operator(full).matrix);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(c2);
  RealVector eigenvalues = solver.eigenvalues();
  std::vector<double> sorted(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  constexpr double kClusterTol = 1e-8;
  std::vector<CasimirLayer> layers;
  for (double value : sorted) {
    if (!layers.empty() && std::abs(layers.back().casimir2 - value) < kClusterTol) {
      ++layers.back().dimension;
      continue;
    }
    layers.push_back(CasimirLayer{value, 0, 1});
  }
  for (auto& layer : layers) {
    const double target = 3.0 * layer.casimir2;
    for (int p = 0; p <= 2 * qutrits && layer.multiplicity == 0; ++p)
      for (int q = 0; q <= 2 * qutrits; ++q)
        if (std::abs(p * p + q * q + p * q + 3 * p + 3 * q - target) < 1e-6) {
          const int irrep_dim = (p + 1) * (q + 1) * (p + q + 2) / 2;
          if (layer.dimension % irrep_dim == 0)
            layer.multiplicity = layer.dimension / irrep_dim;
          break;
        }
  }
  return layers;
}

}  // namespace qar
