#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qar/basis.hpp"
#include "qar/casimir.hpp"
#include "qar/operators.hpp"
#include "qar/reservoir.hpp"
#include "qar/types.hpp"

namespace qar {

enum class GeneratorKind { Redfield, LGKS, Pauli, CoarseGrained };

inline const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Redfield: return "redfield";
    case GeneratorKind::LGKS: return "lgks";
    case GeneratorKind::Pauli: return "pauli";
    case GeneratorKind::CoarseGrained: return "cg";
  }
  return "?";
}

// Superoperator building blocks for column-stacked density matrices:
// vec(rho)_k = rho(r, c) with k = r + d*c, so A rho B -> kron(B^T, A).
inline SpMat superop_left(const SpMat& a) {
  SpMat id(a.rows(), a.cols());
  id.setIdentity();
  return Eigen::kroneckerProduct(id, a).eval();
}

inline SpMat superop_right(const SpMat& b) {
  SpMat id(b.rows(), b.cols());
  id.setIdentity();
  SpMat bt = SpMat(b.transpose());
  return Eigen::kroneckerProduct(bt, id).eval();
}

inline SpMat superop_sandwich(const SpMat& a, const SpMat& b) {
  SpMat bt = SpMat(b.transpose());
  return Eigen::kroneckerProduct(bt, a).eval();
}

// One counting-field block: jump superoperator whose phase is
// exp(i * quantum * chi) when the owning reservoir is tilted. The quantum is
// the energy leaving the reservoir per jump (positive for absorption by the
// system).
struct JumpBlock {
  double quantum = 0.0;
  SpMat op;
};

struct ReservoirChannel {
  ReservoirKind kind = ReservoirKind::Cold;
  SpMat remainder;  // chi-independent dissipator part of this reservoir
  std::vector<JumpBlock> blocks;
};

// A generator decomposed into a coherent part, per-reservoir chi-independent
// remainders, and tagged jump blocks carrying the counting phases. Counting
// derivatives are exact block sums, never numerical differentiation.
struct TiltedGenerator {
  GeneratorKind kind = GeneratorKind::LGKS;
  SectorPtr sector;
  bool density_form = false;  // acts on vec(rho) rather than populations
  SpMat coherent;             // -i[H, .] (rate equations: empty)
  std::vector<ReservoirChannel> channels;
  SpMat zero_field;           // cached L(0)
  SpMat system_hamiltonian;   // d x d, includes any penalty (density form)
  std::vector<double> level_energies;  // rate forms; empty for mesostates

  int dim() const { return static_cast<int>(zero_field.rows()); }

  const ReservoirChannel& channel(ReservoirKind k) const {
    for (const auto& ch : channels)
      if (ch.kind == k) return ch;
    throw ContractViolation("generator has no such reservoir channel");
  }

  bool has_channel(ReservoirKind k) const {
    for (const auto& ch : channels)
      if (ch.kind == k) return true;
    return false;
  }

  // L'_nu(0) = i * sum_b quantum_b * B_b
  SpMat l_prime(ReservoirKind k) const {
    SpMat out(dim(), dim());
    for (const auto& block : channel(k).blocks)
      out += Complex(0.0, block.quantum) * block.op;
    return out;
  }

  // L''_nu(0) = - sum_b quantum_b^2 * B_b
  SpMat l_second(ReservoirKind k) const {
    SpMat out(dim(), dim());
    for (const auto& block : channel(k).blocks)
      out += Complex(-block.quantum * block.quantum, 0.0) * block.op;
    return out;
  }

  // Full dissipator of one reservoir (remainder plus jump blocks).
  SpMat dissipator(ReservoirKind k) const {
    SpMat out = channel(k).remainder;
    for (const auto& block : channel(k).blocks) out += block.op;
    return out;
  }

  // L(chi) with a counting field on a single reservoir.
  SpMat tilted(ReservoirKind k, double chi) const {
    SpMat out = zero_field;
    for (const auto& block : channel(k).blocks)
      out += (std::polar(1.0, block.quantum * chi) - Complex(1.0, 0.0)) * block.op;
    return out;
  }

  // Row functional implementing the trace.
  Vector trace_vector() const {
    if (!density_form) return Vector::Ones(dim());
    const int d = sector->dimension();
    Vector t = Vector::Zero(dim());
    for (int i = 0; i < d; ++i) t(i * (d + 1)) = 1.0;
    return t;
  }

  void finalize() {
    SpMat total = coherent.size() ? coherent : SpMat(channels.front().remainder.rows(),
                                                     channels.front().remainder.cols());
    for (const auto& ch : channels) {
      total += ch.remainder;
      for (const auto& block : ch.blocks) total += block.op;
    }
    total.prune([](int, int, const Complex& v) { return std::abs(v) > 1e-18; });
    total.makeCompressed();
    zero_field = std::move(total);
  }
};

namespace detail {

inline void require_density_sector(const SectorPtr& sector) {
  if (sector->kind == SectorKind::CoarseGrained)
    throw ContractViolation("density-matrix generators need a Hilbert-space sector");
}

inline void require_finite_occupations(const std::vector<Reservoir>& reservoirs) {
  for (const auto& r : reservoirs)
    if (r.infinite_occupation())
      throw ConfigError(
          "infinite work-bath occupation is representable only by the coarse-grained family");
}

inline void require_solve_cap(const SectorPtr& sector) {
  if (sector->kind == SectorKind::FullSpace && sector->qutrits > kFullSpaceSolveCap)
    throw ResourceLimit("full-space superoperators are capped at N <= " +
                        std::to_string(kFullSpaceSolveCap));
}

inline SpMat hamiltonian_for_generator(const SystemSpec& spec, const SectorPtr& sector) {
  if (sector->kind == SectorKind::FullSpace && spec.has_penalty()) {
    SpMat h = hamiltonian_operator(SystemSpec{spec.qutrits, spec.big_gap, spec.coupling, 0.0, 0.0},
                                   sector)
                  .matrix;
    return h + penalty_hamiltonian_full(spec, sector).matrix;
  }
  return hamiltonian_operator(spec, sector).matrix;
}

}  // namespace detail

// LGKS generator with rates gamma(+Omega) = Gamma (1+n), gamma(-Omega) =
// Gamma n; sandwich terms carry counting phases exp(-+ i Omega chi).
// Lamb shift omitted.
inline TiltedGenerator lgks_generator(const SystemSpec& spec,
                                      const std::vector<Reservoir>& reservoirs,
                                      const SectorPtr& sector) {
  spec.validate();
  detail::require_density_sector(sector);
  detail::require_finite_occupations(reservoirs);
  detail::require_solve_cap(sector);
  for (const auto& r : reservoirs) r.validate(spec.big_gap);

  TiltedGenerator gen;
  gen.kind = GeneratorKind::LGKS;
  gen.sector = sector;
  gen.density_form = true;
  const SpMat h = detail::hamiltonian_for_generator(spec, sector);
  gen.system_hamiltonian = h;
  gen.coherent = Complex(0.0, -1.0) * (superop_left(h) - superop_right(h));
  for (const auto& r : reservoirs) {
    const SpMat sp = coupling_operator(r.kind, spec, Direction::Plus, sector).matrix;
    const SpMat sm = coupling_operator(r.kind, spec, Direction::Minus, sector).matrix;
    const double omega = r.quantum(spec.big_gap);
    const double g_emit = r.coupling * (1.0 + r.occupation);
    const double g_abs = r.coupling * r.occupation;
    ReservoirChannel ch;
    ch.kind = r.kind;
    const SpMat pm = SpMat(sp * sm);
    const SpMat mp = SpMat(sm * sp);
    ch.remainder = Complex(-0.5 * g_emit, 0.0) * (superop_left(pm) + superop_right(pm)) +
                   Complex(-0.5 * g_abs, 0.0) * (superop_left(mp) + superop_right(mp));
    ch.blocks.push_back(JumpBlock{-omega, SpMat(g_emit * superop_sandwich(sm, sp))});
    ch.blocks.push_back(JumpBlock{+omega, SpMat(g_abs * superop_sandwich(sp, sm))});
    gen.channels.push_back(std::move(ch));
  }
  gen.finalize();
  return gen;
}

// Redfield-II generator (Lamb shift omitted) in the Schroedinger picture,
// with the microscopically derived counting replacements on the sandwich
// terms. Kept as the benchmark method; may violate positivity and the first
// law at O(Gamma^2).
inline TiltedGenerator redfield_generator(const SystemSpec& spec,
                                          const std::vector<Reservoir>& reservoirs,
                                          const SectorPtr& sector) {
  spec.validate();
  if (sector->kind != SectorKind::FullSpace && sector->kind != SectorKind::Symmetric)
    throw ContractViolation("redfield_generator runs on the full or symmetric sector");
  detail::require_finite_occupations(reservoirs);
  detail::require_solve_cap(sector);
  for (const auto& r : reservoirs) r.validate(spec.big_gap);

  TiltedGenerator gen;
  gen.kind = GeneratorKind::Redfield;
  gen.sector = sector;
  gen.density_form = true;
  const SpMat h = detail::hamiltonian_for_generator(spec, sector);
  gen.system_hamiltonian = h;
  gen.coherent = Complex(0.0, -1.0) * (superop_left(h) - superop_right(h));
  for (const auto& r : reservoirs) {
    const SpMat sp = coupling_operator(r.kind, spec, Direction::Plus, sector).matrix;
    const SpMat sm = coupling_operator(r.kind, spec, Direction::Minus, sector).matrix;
    const SpMat s = sp + sm;
    const double omega = r.quantum(spec.big_gap);
    const double g_emit = r.coupling * (1.0 + r.occupation);  // gamma(+Omega)
    const double g_abs = r.coupling * r.occupation;           // gamma(-Omega)
    ReservoirChannel ch;
    ch.kind = r.kind;
    ch.remainder =
        Complex(-0.5 * g_abs, 0.0) * (superop_left(SpMat(s * sp)) + superop_right(SpMat(sm * s))) +
        Complex(-0.5 * g_emit, 0.0) * (superop_right(SpMat(sp * s)) + superop_left(SpMat(s * sm)));
    ch.blocks.push_back(JumpBlock{
        +omega, SpMat(0.5 * g_abs * (superop_sandwich(sp, s) + superop_sandwich(s, sm)))});
    ch.blocks.push_back(JumpBlock{
        -omega, SpMat(0.5 * g_emit * (superop_sandwich(s, sp) + superop_sandwich(sm, s)))});
    gen.channels.push_back(std::move(ch));
  }
  gen.finalize();
  return gen;
}

namespace detail {

// Group per-transition counting entries into blocks of equal quantum.
struct BlockAccumulator {
  std::map<long long, std::vector<Triplet>> groups;
  void add(double quantum, int row, int col, double rate) {
    const long long key = std::llround(quantum * 1e9);
    groups[key].emplace_back(row, col, Complex(rate, 0.0));
  }
  std::vector<JumpBlock> finish(int dim) {
    std::vector<JumpBlock> blocks;
    for (auto& [key, trip] : groups)
      blocks.push_back(JumpBlock{key * 1e-9, from_triplets(dim, dim, trip)});
    return blocks;
  }
};

}  // namespace detail

// Pauli rate equation for the symmetric-sector populations. Without penalty
// the rates are the closed forms Gamma_nu n_nu (or (1+n_nu)) times the
// squared ladder coefficients; with penalty they are golden-rule rates
// gamma_nu(E_j - E_i) |<i|S^nu|j>|^2 evaluated from the reservoir betas, and
// each jump is counted with its own transferred quantum.
inline TiltedGenerator pauli_rate_matrix(const SystemSpec& spec,
                                         const std::vector<Reservoir>& reservoirs) {
  spec.validate();
  if (!spec.coupling.collective_flag)
    throw ContractViolation("the Pauli rate equation requires collective couplings");
  detail::require_finite_occupations(reservoirs);
  for (const auto& r : reservoirs) r.validate(spec.big_gap);
  const bool penalty = spec.has_penalty();
  if (penalty)
    for (const auto& r : reservoirs)
      if (!r.inverse_temperature)
        throw ConfigError("penalty rates need beta-specified reservoirs");

  const auto sector = enumerate_symmetric(spec.qutrits, spec.big_gap);
  const int dim = sector->dimension();
  const std::vector<double> energy = state_energies(spec, sector);

  TiltedGenerator gen;
  gen.kind = GeneratorKind::Pauli;
  gen.sector = sector;
  gen.density_form = false;
  gen.level_energies = energy;

  for (const auto& r : reservoirs) {
    const SpMat plus = ladder_on_symmetric(r.kind, Direction::Plus, sector).matrix;
    // Populations close into a rate equation because each ladder maps a basis
    // state to at most one basis state; degenerate energies are then harmless.
    for (int col = 0; col < plus.outerSize(); ++col)
      if (plus.col(col).nonZeros() > 1)
        throw InternalError("ladder operator with multiple targets; Pauli reduction invalid");

    detail::BlockAccumulator acc;
    std::vector<Triplet> diag;
    std::vector<double> loss(dim, 0.0);
    for (int col = 0; col < plus.outerSize(); ++col)
      for (SpMat::InnerIterator it(plus, col); it; ++it) {
        const int hi = static_cast<int>(it.row());  // upper state of the transition
        const int lo = static_cast<int>(it.col());
        const double weight = std::norm(it.value());  // squared ladder coefficient
        const double quantum = energy[hi] - energy[lo];
        double rate_up, rate_dn;
        if (penalty) {
          rate_up = golden_rate(r, -quantum) * weight;
          rate_dn = golden_rate(r, +quantum) * weight;
        } else {
          rate_up = r.coupling * r.occupation * weight;
          rate_dn = r.coupling * (1.0 + r.occupation) * weight;
        }
        acc.add(+quantum, hi, lo, rate_up);
        acc.add(-quantum, lo, hi, rate_dn);
        loss[lo] += rate_up;
        loss[hi] += rate_dn;
      }
    for (int k = 0; k < dim; ++k)
      if (loss[k] != 0.0) diag.emplace_back(k, k, Complex(-loss[k], 0.0));
    ReservoirChannel ch;
    ch.kind = r.kind;
    ch.remainder = detail::from_triplets(dim, dim, diag);
    ch.blocks = acc.finish(dim);
    gen.channels.push_back(std::move(ch));
  }
  gen.finalize();
  return gen;
}

// Coarse-grained tridiagonal rate equation over mesostates n = 0..N, exact in
// the n_w -> infinity limit. Counting is attached to the cold-bath share of
// each rate with quantum delta.
inline TiltedGenerator cg_rate_matrix(int qutrits, double gamma_c, double n_c, double gamma_h,
                                      double n_h) {
  require_valid_qutrit_count(qutrits);
  if (!(gamma_c > 0.0) || !(gamma_h > 0.0) || n_c < 0.0 || n_h < 0.0)
    throw ConfigError("coarse-grained rates need positive couplings and occupations");
  const auto sector = enumerate_coarse_grained(qutrits);
  const int dim = qutrits + 1;

  std::vector<Triplet> cold_up, cold_dn, hot_off, cold_diag, hot_diag;
  std::vector<double> loss_c(dim, 0.0), loss_h(dim, 0.0);
  for (int n = 0; n + 1 <= qutrits; ++n) {
    // de-excitation (n+1) -> n, shared by cold and hot baths
    const double shape_dn = (n + 1.0) * (qutrits - n) / 2.0;
    const double c_dn = gamma_c * (1.0 + n_c) * shape_dn;
    const double h_dn = gamma_h * (1.0 + n_h) * shape_dn;
    cold_dn.emplace_back(n, n + 1, Complex(c_dn, 0.0));
    hot_off.emplace_back(n, n + 1, Complex(h_dn, 0.0));
    loss_c[n + 1] += c_dn;
    loss_h[n + 1] += h_dn;
  }
  for (int n = 1; n <= qutrits; ++n) {
    // excitation (n-1) -> n; the n = 0 boundary only appears as a source here
    const double shape_up = (n + 1.0) * (qutrits + 1 - n) / 2.0;
    const double c_up = gamma_c * n_c * shape_up;
    const double h_up = gamma_h * n_h * shape_up;
    cold_up.emplace_back(n, n - 1, Complex(c_up, 0.0));
    hot_off.emplace_back(n, n - 1, Complex(h_up, 0.0));
    loss_c[n - 1] += c_up;
    loss_h[n - 1] += h_up;
  }
  for (int k = 0; k < dim; ++k) {
    if (loss_c[k] != 0.0) cold_diag.emplace_back(k, k, Complex(-loss_c[k], 0.0));
    if (loss_h[k] != 0.0) hot_diag.emplace_back(k, k, Complex(-loss_h[k], 0.0));
  }

  TiltedGenerator gen;
  gen.kind = GeneratorKind::CoarseGrained;
  gen.sector = sector;
  gen.density_form = false;
  ReservoirChannel cold;
  cold.kind = ReservoirKind::Cold;
  cold.remainder = detail::from_triplets(dim, dim, cold_diag);
  cold.blocks.push_back(JumpBlock{+kSmallGap, detail::from_triplets(dim, dim, cold_up)});
  cold.blocks.push_back(JumpBlock{-kSmallGap, detail::from_triplets(dim, dim, cold_dn)});
  gen.channels.push_back(std::move(cold));
  ReservoirChannel hot;
  hot.kind = ReservoirKind::Hot;
  hot.remainder = detail::from_triplets(dim, dim, hot_diag) + detail::from_triplets(dim, dim, hot_off);
  gen.channels.push_back(std::move(hot));
  gen.finalize();
  return gen;
}

enum class QarOrientation { Normal, Exchanged };

// Single-qutrit reference rate matrices R+ (cold drives 0<->1) and R-
// (cold and work exchanged), all reservoirs tilted with their quanta.
inline TiltedGenerator single_qutrit_rate_matrix(QarOrientation orientation,
                                                 const std::vector<Reservoir>& reservoirs,
                                                 double big_gap) {
  detail::require_finite_occupations(reservoirs);
  for (const auto& r : reservoirs) r.validate(big_gap);
  const bool normal = orientation == QarOrientation::Normal;

  auto sector = std::make_shared<BasisSector>();
  sector->kind = SectorKind::FullSpace;
  sector->qutrits = 1;
  sector->big_gap = big_gap;
  sector->labels = {"0", "1", "2"};
  if (normal) {
    sector->large_counts = {0, 0, 1};
    sector->small_counts = {0, 1, 0};
    sector->energies = {0.0, kSmallGap, big_gap};
  } else {
    sector->energies = {0.0, big_gap - kSmallGap, big_gap};
  }

  // Level pairs driven by each reservoir in the two orientations.
  auto pair_for = [&](ReservoirKind k) {
    switch (k) {
      case ReservoirKind::Cold: return normal ? std::pair{0, 1} : std::pair{1, 2};
      case ReservoirKind::Hot: return std::pair{0, 2};
      case ReservoirKind::Work: return normal ? std::pair{1, 2} : std::pair{0, 1};
    }
    return std::pair{0, 0};
  };

  TiltedGenerator gen;
  gen.kind = GeneratorKind::Pauli;
  gen.sector = sector;
  gen.density_form = false;
  gen.level_energies = sector->energies;
  for (const auto& r : reservoirs) {
    const auto [lo, hi] = pair_for(r.kind);
    const double omega = r.quantum(big_gap);
    const double up = r.coupling * r.occupation;
    const double dn = r.coupling * (1.0 + r.occupation);
    ReservoirChannel ch;
    ch.kind = r.kind;
    std::vector<Triplet> diag{Triplet(lo, lo, Complex(-up, 0.0)),
                              Triplet(hi, hi, Complex(-dn, 0.0))};
    ch.remainder = detail::from_triplets(3, 3, diag);
    std::vector<Triplet> up_t{Triplet(hi, lo, Complex(up, 0.0))};
    std::vector<Triplet> dn_t{Triplet(lo, hi, Complex(dn, 0.0))};
    ch.blocks.push_back(JumpBlock{+omega, detail::from_triplets(3, 3, up_t)});
    ch.blocks.push_back(JumpBlock{-omega, detail::from_triplets(3, 3, dn_t)});
    gen.channels.push_back(std::move(ch));
  }
  gen.finalize();
  return gen;
}

}  // namespace qar
