#pragma once

#include <cmath>
#include <complex>
#include <ostream>
#include <string>
#include <vector>

#include "qar/basis.hpp"
#include "qar/types.hpp"

namespace qar {

inline constexpr double kZeroDropTolerance = 1e-15;

// Sparse operator bound to the sector it acts on.
struct SparseOperator {
  SectorPtr sector;
  SpMat matrix;
  bool hermitian = false;
};

// Site coefficients h_i^nu of unit modulus, one set per reservoir.
// collective() gives h_i = 1 for all sites and reservoirs.
struct CouplingSpec {
  std::vector<Complex> cold, hot, work;
  bool collective_flag = true;

  static CouplingSpec collective(int qutrits) {
    CouplingSpec spec;
    spec.cold.assign(qutrits, Complex(1.0, 0.0));
    spec.hot.assign(qutrits, Complex(1.0, 0.0));
    spec.work.assign(qutrits, Complex(1.0, 0.0));
    spec.collective_flag = true;
    return spec;
  }

  static CouplingSpec with_phases(const std::vector<double>& cold_phases,
                                  const std::vector<double>& hot_phases,
                                  const std::vector<double>& work_phases) {
    CouplingSpec spec;
    auto fill = [](const std::vector<double>& phases, std::vector<Complex>& out) {
      out.reserve(phases.size());
      for (double p : phases) out.push_back(std::polar(1.0, p));
    };
    fill(cold_phases, spec.cold);
    fill(hot_phases, spec.hot);
    fill(work_phases, spec.work);
    spec.collective_flag = true;
    for (const auto* v : {&spec.cold, &spec.hot, &spec.work})
      for (const Complex& h : *v)
        if (std::abs(h - Complex(1.0, 0.0)) > 1e-15) spec.collective_flag = false;
    return spec;
  }

  const std::vector<Complex>& site_coefficients(ReservoirKind k) const {
    switch (k) {
      case ReservoirKind::Cold: return cold;
      case ReservoirKind::Hot: return hot;
      case ReservoirKind::Work: return work;
    }
    return cold;
  }

  void validate() const {
    for (const auto* v : {&cold, &hot, &work})
      for (const Complex& h : *v)
        if (std::abs(std::abs(h) - 1.0) > 1e-12)
          throw ContractViolation("site coefficients must have unit modulus");
  }
};

// System definition: N qutrits with gaps (Delta, delta = 1), coupling
// coefficients and the optional interaction penalty (alpha_C, alpha_P).
struct SystemSpec {
  int qutrits = 1;
  double big_gap = 10.0;
  CouplingSpec coupling = CouplingSpec::collective(1);
  double penalty_casimir = 0.0;   // alpha_C
  double penalty_central = 0.0;   // alpha_P

  void validate() const {
    require_valid_qutrit_count(qutrits);
    if (!(big_gap > kSmallGap))
      throw ConfigError("the large gap must exceed delta = 1");
    if (penalty_casimir < 0.0 || penalty_central < 0.0)
      throw ConfigError("penalty coefficients must be non-negative");
    coupling.validate();
    const auto n = static_cast<size_t>(qutrits);
    if (coupling.cold.size() != n || coupling.hot.size() != n || coupling.work.size() != n)
      throw ConfigError("coupling coefficient lists must have one entry per qutrit");
  }

  bool has_penalty() const { return penalty_casimir != 0.0 || penalty_central != 0.0; }
};

namespace detail {

inline SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trip) {
  SpMat m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.prune([](int, int, const Complex& v) { return std::abs(v) > kZeroDropTolerance; });
  m.makeCompressed();
  return m;
}

inline SpMat dense_to_sparse(const DenseMatrix& d) {
  std::vector<Triplet> trip;
  for (int c = 0; c < d.cols(); ++c)
    for (int r = 0; r < d.rows(); ++r)
      if (std::abs(d(r, c)) > kZeroDropTolerance) trip.emplace_back(r, c, d(r, c));
  return from_triplets(static_cast<int>(d.rows()), static_cast<int>(d.cols()), trip);
}

}  // namespace detail

// Single-qutrit raising operators in the |0>,|1>,|2> ordering. These pin the
// transition assignments: cold |0><->|1|, hot |0><->|2|, work |1><->|2|.
inline DenseMatrix qutrit_raising(ReservoirKind k) {
  DenseMatrix t = DenseMatrix::Zero(3, 3);
  switch (k) {
    case ReservoirKind::Cold: t(1, 0) = 1.0; break;  // |1><0|
    case ReservoirKind::Hot: t(2, 0) = 1.0; break;   // |2><0|
    case ReservoirKind::Work: t(2, 1) = 1.0; break;  // |2><1|
  }
  return t;
}

// Gell-Mann matrix lambda^alpha, ordered so the raising combinations
// (lambda^6 + i lambda^7)/2, (lambda^4 + i lambda^5)/2, (lambda^1 + i lambda^2)/2
// reproduce the cold, hot and work transitions above. Hermitian, traceless,
// tr(lambda^a lambda^b) = 2 delta_ab.
inline SpMat gell_mann(int alpha) {
  if (alpha < 1 || alpha > 8) throw ContractViolation("gell_mann index must lie in 1..8");
  DenseMatrix m = DenseMatrix::Zero(3, 3);
  const Complex i(0.0, 1.0);
  switch (alpha) {
    case 1: m(2, 1) = 1.0; m(1, 2) = 1.0; break;
    case 2: m(2, 1) = -i; m(1, 2) = i; break;
    case 3: m(1, 1) = -1.0; m(2, 2) = 1.0; break;
    case 4: m(2, 0) = 1.0; m(0, 2) = 1.0; break;
    case 5: m(2, 0) = -i; m(0, 2) = i; break;
    case 6: m(1, 0) = 1.0; m(0, 1) = 1.0; break;
    case 7: m(1, 0) = -i; m(0, 1) = i; break;
    case 8:
      m(0, 0) = -2.0 / std::sqrt(3.0);
      m(1, 1) = 1.0 / std::sqrt(3.0);
      m(2, 2) = 1.0 / std::sqrt(3.0);
      break;
  }
  return detail::dense_to_sparse(m);
}

// Embed a single-qutrit operator at the given site of the full product space.
inline SpMat embed_at_site(const DenseMatrix& op, int site, int qutrits) {
  const int left = pow3(site);
  const int right = pow3(qutrits - 1 - site);
  const int dim = pow3(qutrits);
  std::vector<Triplet> trip;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const Complex v = op(r, c);
      if (std::abs(v) <= kZeroDropTolerance) continue;
      for (int a = 0; a < left; ++a)
        for (int b = 0; b < right; ++b) {
          const int row = (a * 3 + r) * right + b;
          const int col = (a * 3 + c) * right + b;
          trip.emplace_back(row, col, v);
        }
    }
  return detail::from_triplets(dim, dim, trip);
}

// Collective generator J_alpha = (1/2) sum_i lambda_i^alpha on the full space.
inline SparseOperator collective_operator(int alpha, const SectorPtr& sector) {
  if (sector->kind != SectorKind::FullSpace)
    throw ContractViolation("collective_operator needs the full product sector");
  const DenseMatrix lam = DenseMatrix(gell_mann(alpha));
  SpMat sum(sector->dimension(), sector->dimension());
  for (int site = 0; site < sector->qutrits; ++site)
    sum += embed_at_site(lam, site, sector->qutrits);
  sum *= Complex(0.5, 0.0);
  sum.prune([](int, int, const Complex& v) { return std::abs(v) > kZeroDropTolerance; });
  return SparseOperator{sector, std::move(sum), alpha >= 1};
}

enum class Direction { Plus, Minus, Both };

// Closed-form action of the collective ladder operators within the symmetric
// sector, e.g. J^h_+ |M;m> = sqrt((N-M-m)(M+1)) |M+1;m>.
inline SparseOperator ladder_on_symmetric(ReservoirKind nu, Direction dir,
                                          const SectorPtr& sector) {
  if (sector->kind != SectorKind::Symmetric)
    throw ContractViolation("ladder_on_symmetric needs a symmetric sector");
  const int qutrits = sector->qutrits;
  const int dim = sector->dimension();
  std::vector<Triplet> trip;
  auto push_plus = [&](int large, int small, int col) {
    int row_large = large, row_small = small;
    double weight = 0.0;
    switch (nu) {
      case ReservoirKind::Cold:
        row_small = small + 1;
        weight = static_cast<double>(qutrits - large - small) * (small + 1);
        break;
      case ReservoirKind::Hot:
        row_large = large + 1;
        weight = static_cast<double>(qutrits - large - small) * (large + 1);
        break;
      case ReservoirKind::Work:
        row_large = large + 1;
        row_small = small - 1;
        weight = static_cast<double>(large + 1) * small;
        break;
    }
    if (weight <= 0.0) return;
    if (row_large < 0 || row_small < 0 || row_large + row_small > qutrits) return;
    const int row = symmetric_state_index(row_large, row_small, qutrits);
    trip.emplace_back(row, col, Complex(std::sqrt(weight), 0.0));
  };
  for (int col = 0; col < dim; ++col)
    push_plus(sector->large_counts[col], sector->small_counts[col], col);
  SpMat plus = detail::from_triplets(dim, dim, trip);
  switch (dir) {
    case Direction::Plus: return SparseOperator{sector, plus, false};
    case Direction::Minus: return SparseOperator{sector, SpMat(plus.adjoint()), false};
    case Direction::Both: {
      SpMat both = plus + SpMat(plus.adjoint());
      return SparseOperator{sector, std::move(both), true};
    }
  }
  throw InternalError("unreachable");
}

// Coupling operator S^nu (or its raising/lowering part) in the given sector.
// Site-dependent phases require the full space; collective couplings may also
// be represented on the symmetric sector (closed form) or a second-Casimir
// sector (projection through the stored embedding).
inline SparseOperator coupling_operator(ReservoirKind nu, const SystemSpec& spec,
                                        Direction dir, const SectorPtr& sector) {
  spec.validate();
  if (sector->qutrits != spec.qutrits)
    throw ContractViolation("sector and system have different qutrit counts");
  if (sector->kind == SectorKind::CoarseGrained)
    throw ContractViolation("coupling operators are not defined on mesostates");
  if (sector->kind != SectorKind::FullSpace && !spec.coupling.collective_flag)
    throw ContractViolation(
        "site-dependent couplings break permutation symmetry; use the full sector");

  if (sector->kind == SectorKind::Symmetric) return ladder_on_symmetric(nu, dir, sector);

  // Full-space raising part sum_i h_i^nu T_i.
  const auto full = sector->kind == SectorKind::FullSpace
                        ? sector
                        : enumerate_full(sector->qutrits, sector->big_gap);
  const DenseMatrix t = qutrit_raising(nu);
  const auto& coeff = spec.coupling.site_coefficients(nu);
  SpMat plus(full->dimension(), full->dimension());
  for (int site = 0; site < spec.qutrits; ++site) {
    SpMat e = embed_at_site(t, site, spec.qutrits);
    plus += coeff[site] * e;
  }

  if (sector->kind == SectorKind::SecondCasimir) {
    if (sector->embedding.size() == 0)
      throw InternalError("second-Casimir sector lacks its embedding");
    DenseMatrix projected = sector->embedding.adjoint() * (plus * sector->embedding);
    plus = detail::dense_to_sparse(projected);
  }

  switch (dir) {
    case Direction::Plus: return SparseOperator{sector, plus, false};
    case Direction::Minus: return SparseOperator{sector, SpMat(plus.adjoint()), false};
    case Direction::Both: {
      SpMat both = plus + SpMat(plus.adjoint());
      return SparseOperator{sector, std::move(both), true};
    }
  }
  throw InternalError("unreachable");
}

// Penalty Hamiltonian: alpha_C [N(N+3)/3 - C_2] + alpha_P [quadratic form in
// (N/3 - N_Delta), (N/3 - N_delta)]. Needs the C_2 operator on the full
// space, which is supplied by casimir.hpp; here only sectors with definite
// (M, m) per state are handled, which covers Symmetric and SecondCasimir.
inline SparseOperator penalty_hamiltonian(const SystemSpec& spec, const SectorPtr& sector) {
  if (sector->kind == SectorKind::CoarseGrained)
    throw ContractViolation("penalty is not defined on mesostates");
  if (sector->kind == SectorKind::FullSpace)
    throw ContractViolation(
        "full-space penalty requires the Casimir operator; use penalty_hamiltonian_full");
  const int dim = sector->dimension();
  const double third = spec.qutrits / 3.0;
  std::vector<Triplet> trip;
  const double casimir_gap =
      std::isnan(sector->casimir2)
          ? 0.0
          : spec.qutrits * (spec.qutrits + 3.0) / 3.0 - sector->casimir2;
  for (int k = 0; k < dim; ++k) {
    const double x = third - sector->large_counts[k];
    const double y = third - sector->small_counts[k];
    const double v = spec.penalty_casimir * casimir_gap +
                     spec.penalty_central * (x * x + y * y + x * y);
    if (std::abs(v) > kZeroDropTolerance) trip.emplace_back(k, k, Complex(v, 0.0));
  }
  return SparseOperator{sector, detail::from_triplets(dim, dim, trip), true};
}

// Diagonal system Hamiltonian Delta N_Delta + delta N_delta on the sector,
// plus the penalty when (alpha_C, alpha_P) != 0.
inline SparseOperator hamiltonian_operator(const SystemSpec& spec, const SectorPtr& sector) {
  if (sector->kind == SectorKind::CoarseGrained)
    throw ContractViolation("mesostates do not carry a Hamiltonian");
  const int dim = sector->dimension();
  std::vector<Triplet> trip;
  for (int k = 0; k < dim; ++k) {
    const double e = spec.big_gap * sector->large_counts[k] +
                     kSmallGap * sector->small_counts[k];
    if (std::abs(e) > kZeroDropTolerance) trip.emplace_back(k, k, Complex(e, 0.0));
  }
  SpMat h = detail::from_triplets(dim, dim, trip);
  if (spec.has_penalty()) h += penalty_hamiltonian(spec, sector).matrix;
  return SparseOperator{sector, std::move(h), true};
}

// Per-state eigenvalues of H_S + penalty, used by the rate-equation builders.
inline std::vector<double> state_energies(const SystemSpec& spec, const SectorPtr& sector) {
  std::vector<double> out(sector->dimension());
  const double third = spec.qutrits / 3.0;
  const double casimir_gap =
      std::isnan(sector->casimir2)
          ? 0.0
          : spec.qutrits * (spec.qutrits + 3.0) / 3.0 - sector->casimir2;
  for (int k = 0; k < sector->dimension(); ++k) {
    const double x = third - sector->large_counts[k];
    const double y = third - sector->small_counts[k];
    out[k] = spec.big_gap * sector->large_counts[k] + kSmallGap * sector->small_counts[k] +
             spec.penalty_casimir * casimir_gap +
             spec.penalty_central * (x * x + y * y + x * y);
  }
  return out;
}

// Matrix-market style text dump for external verification.
inline void dump_operator(std::ostream& os, const SparseOperator& op, const std::string& name) {
  os << "% sector " << to_string(op.sector->kind) << " N " << op.sector->qutrits
     << " operator " << name << "\n";
  os << "% rows cols nnz: " << op.matrix.rows() << " " << op.matrix.cols() << " "
     << op.matrix.nonZeros() << "\n";
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(op.matrix, k); it; ++it) {
      os << it.row() << " " << it.col() << " ";
      os.precision(17);
      os << it.value().real() << " " << it.value().imag() << "\n";
    }
}

}  // namespace qar
