#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "qar/types.hpp"

namespace qar {

enum class SectorKind { FullSpace, Symmetric, SecondCasimir, CoarseGrained };

inline const char* to_string(SectorKind k) {
  switch (k) {
    case SectorKind::FullSpace: return "full";
    case SectorKind::Symmetric: return "symmetric";
    case SectorKind::SecondCasimir: return "casimir2";
    case SectorKind::CoarseGrained: return "coarse-grained";
  }
  return "?";
}

// An enumerated orthonormal basis of one Hilbert-space sector together with
// per-state energies (units of delta). Immutable once built; share freely.
struct BasisSector {
  SectorKind kind = SectorKind::FullSpace;
  int qutrits = 0;
  double big_gap = 0.0;  // Delta used for the stored energies

  std::vector<std::string> labels;
  std::vector<int> large_counts;  // M per state (empty for coarse-grained)
  std::vector<int> small_counts;  // m per state (empty for coarse-grained)
  std::vector<double> energies;   // empty for coarse-grained mesostates

  // Eigenvalue of C_2 shared by all states, where defined (NaN otherwise).
  double casimir2 = std::numeric_limits<double>::quiet_NaN();

  // Column k = state k expressed in the full 3^N product basis. Filled only
  // for SecondCasimir sectors, where operators are obtained by projection.
  DenseMatrix embedding;

  int dimension() const { return static_cast<int>(labels.size()); }
};

using SectorPtr = std::shared_ptr<const BasisSector>;

// Caps from the design decisions: operator construction on the full space is
// allowed up to N = 8, superoperator solves up to N = 6.
inline constexpr int kFullSpaceOperatorCap = 8;
inline constexpr int kFullSpaceSolveCap = 6;

inline int pow3(int n) {
  int r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

inline void require_valid_qutrit_count(int qutrits) {
  if (qutrits < 1) throw ConfigError("qutrit count must be at least 1");
}

// Occupation string ("0120...") <-> product-basis index, leftmost qutrit most
// significant. This fixes the lexicographic full-space ordering.
inline int full_state_index(const std::string& occupations) {
  int idx = 0;
  for (char ch : occupations) idx = idx * 3 + (ch - '0');
  return idx;
}

inline std::string full_state_label(int index, int qutrits) {
  std::string s(qutrits, '0');
  for (int j = qutrits - 1; j >= 0; --j) {
    s[j] = static_cast<char>('0' + index % 3);
    index /= 3;
  }
  return s;
}

// All 3^N occupation strings in lexicographic order, energy = Delta per '2'
// plus delta per '1'.
inline SectorPtr enumerate_full(int qutrits, double big_gap,
                                int cap = kFullSpaceOperatorCap) {
  require_valid_qutrit_count(qutrits);
  if (qutrits > cap)
    throw ResourceLimit("full-space sector for N = " + std::to_string(qutrits) +
                        " exceeds the configured cap N <= " + std::to_string(cap));
  auto sector = std::make_shared<BasisSector>();
  sector->kind = SectorKind::FullSpace;
  sector->qutrits = qutrits;
  sector->big_gap = big_gap;
  const int dim = pow3(qutrits);
  sector->labels.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    std::string label = full_state_label(i, qutrits);
    int large = 0, small = 0;
    for (char ch : label) {
      if (ch == '2') ++large;
      if (ch == '1') ++small;
    }
    sector->labels.push_back(std::move(label));
    sector->large_counts.push_back(large);
    sector->small_counts.push_back(small);
    sector->energies.push_back(big_gap * large + kSmallGap * small);
  }
  return sector;
}

inline std::string symmetric_state_label(int large, int small) {
  return "(" + std::to_string(large) + ";" + std::to_string(small) + ")";
}

// Symmetric |M;m> states, lexicographic in (M, m): (0,0), (0,1), ..., (N,0).
// Dimension (N+1)(N+2)/2; C_2 eigenvalue N(N+3)/3.
inline SectorPtr enumerate_symmetric(int qutrits, double big_gap) {
  require_valid_qutrit_count(qutrits);
  auto sector = std::make_shared<BasisSector>();
  sector->kind = SectorKind::Symmetric;
  sector->qutrits = qutrits;
  sector->big_gap = big_gap;
  sector->casimir2 = qutrits * (qutrits + 3.0) / 3.0;
  for (int large = 0; large <= qutrits; ++large) {
    for (int small = 0; small + large <= qutrits; ++small) {
      sector->labels.push_back(symmetric_state_label(large, small));
      sector->large_counts.push_back(large);
      sector->small_counts.push_back(small);
      sector->energies.push_back(big_gap * large + kSmallGap * small);
    }
  }
  return sector;
}

inline int symmetric_dimension(int qutrits) {
  return (qutrits + 1) * (qutrits + 2) / 2;
}

// Index of |M;m> in the lexicographic enumeration above.
inline int symmetric_state_index(int large, int small, int qutrits) {
  int idx = 0;
  for (int M = 0; M < large; ++M) idx += qutrits + 1 - M;
  return idx + small;
}

// Mesostates n = 0..N of total excitation number; no per-state energy is
// defined (members of a mesostate differ in energy).
inline SectorPtr enumerate_coarse_grained(int qutrits) {
  require_valid_qutrit_count(qutrits);
  auto sector = std::make_shared<BasisSector>();
  sector->kind = SectorKind::CoarseGrained;
  sector->qutrits = qutrits;
  sector->big_gap = 0.0;
  for (int n = 0; n <= qutrits; ++n) sector->labels.push_back("n=" + std::to_string(n));
  return sector;
}

}  // namespace qar
