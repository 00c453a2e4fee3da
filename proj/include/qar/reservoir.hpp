#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qar/types.hpp"

namespace qar {

inline double bose_occupation(double beta, double omega) {
  return 1.0 / std::expm1(beta * omega);
}

inline double beta_for_occupation(double occupation, double omega) {
  return std::log1p(1.0 / occupation) / omega;
}

// One thermal bath: coupling strength Gamma (flat spectral density evaluated
// at the transition it drives), Bose occupation n, and optionally the inverse
// temperature consistent with n through the transition quantum.
struct Reservoir {
  ReservoirKind kind = ReservoirKind::Cold;
  double coupling = 0.0;                                     // Gamma_nu
  double occupation = 0.0;                                   // n_nu; may be inf
  std::optional<double> inverse_temperature = std::nullopt;  // beta_nu

  static Reservoir from_occupation(ReservoirKind kind, double coupling, double occupation) {
    Reservoir r{kind, coupling, occupation, std::nullopt};
    return r;
  }

  // Also records beta; needs the big gap to know the transition quantum.
  static Reservoir from_occupation(ReservoirKind kind, double coupling, double occupation,
                                   double big_gap) {
    Reservoir r{kind, coupling, occupation, std::nullopt};
    if (std::isfinite(occupation) && occupation > 0.0)
      r.inverse_temperature = beta_for_occupation(occupation, reservoir_quantum(kind, big_gap));
    return r;
  }

  static Reservoir from_beta(ReservoirKind kind, double coupling, double beta, double big_gap) {
    Reservoir r{kind, coupling, 0.0, beta};
    r.occupation = bose_occupation(beta, reservoir_quantum(kind, big_gap));
    return r;
  }

  static Reservoir infinite_temperature(ReservoirKind kind, double coupling) {
    return Reservoir{kind, coupling, std::numeric_limits<double>::infinity(), 0.0};
  }

  bool infinite_occupation() const { return std::isinf(occupation); }
  double quantum(double big_gap) const { return reservoir_quantum(kind, big_gap); }

  void validate(double big_gap) const {
    if (!(coupling > 0.0)) throw ConfigError("reservoir coupling must be positive");
    if (occupation < 0.0) throw ConfigError("reservoir occupation must be non-negative");
    if (inverse_temperature) {
      const double n = bose_occupation(*inverse_temperature, quantum(big_gap));
      if (std::abs(occupation - n) > 1e-10 * std::max(1.0, occupation))
        throw ConfigError("reservoir beta and occupation are inconsistent");
    }
  }
};

inline const Reservoir& find_reservoir(const std::vector<Reservoir>& reservoirs,
                                       ReservoirKind kind) {
  for (const auto& r : reservoirs)
    if (r.kind == kind) return r;
  throw ConfigError("missing reservoir");
}

// gamma_nu(omega) for the flat (frequency-independent) spectral coupling
// density with odd continuation: emission gamma(+w) = Gamma (1 + n(w)),
// absorption gamma(-w) = Gamma n(w). Used at shifted Bohr frequencies by the
// penalty rate equation; requires beta.
inline double golden_rate(const Reservoir& r, double omega) {
  if (!r.inverse_temperature)
    throw ConfigError("rates at shifted frequencies need a beta-specified reservoir");
  const double beta = *r.inverse_temperature;
  if (omega == 0.0) throw ContractViolation("zero-frequency transition rate requested");
  if (omega > 0.0) return r.coupling * (1.0 + bose_occupation(beta, omega));
  const double n = bose_occupation(beta, -omega);
  return r.coupling * n;
}

}  // namespace qar
