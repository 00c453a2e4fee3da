#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qar {

using Complex = std::complex<double>;
using SpMat = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// The small gap delta fixes the energy unit: everything below is in units of
// delta = 1. The large gap Delta is passed around as "big_gap".
inline constexpr double kSmallGap = 1.0;

enum class ReservoirKind { Cold, Hot, Work };

inline const char* to_string(ReservoirKind k) {
  switch (k) {
    case ReservoirKind::Cold: return "cold";
    case ReservoirKind::Hot: return "hot";
    case ReservoirKind::Work: return "work";
  }
  return "?";
}

// Transition quantum driven by each reservoir: delta, Delta, Delta-delta.
inline double reservoir_quantum(ReservoirKind k, double big_gap) {
  switch (k) {
    case ReservoirKind::Cold: return kSmallGap;
    case ReservoirKind::Hot: return big_gap;
    case ReservoirKind::Work: return big_gap - kSmallGap;
  }
  return 0.0;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonUniqueSteadyState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace qar
