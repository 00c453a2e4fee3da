#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qar/generators.hpp"
#include "qar/types.hpp"

namespace qar {

enum class SteadyMethod { NullSpace, Tridiagonal, LongTimeEvolution };

struct SteadyState {
  SectorPtr sector;
  Vector state;  // populations, or vec(rho) for density-matrix sectors
  double residual = 0.0;
  SteadyMethod method = SteadyMethod::NullSpace;
  bool density_form = false;

  // Diagonal populations (density form) or the entries themselves.
  RealVector populations() const {
    if (!density_form) return state.real();
    const int d = sector->dimension();
    RealVector p(d);
    for (int i = 0; i < d; ++i) p(i) = state(i * (d + 1)).real();
    return p;
  }

  double min_population() const { return populations().minCoeff(); }

  // Reporting-side clip; the solve never floors populations.
  RealVector clipped_populations() const { return populations().cwiseMax(0.0); }
};

struct SolveOptions {
  double residual_tol = 1e-10;
  int dense_limit = 2048;   // below: dense rank-revealing QR
  int svd_limit = 1024;     // below: SVD uniqueness certificate
  bool check_uniqueness = true;
  bool grade_reduction = true;
};

namespace detail {

// Exact invariant-block reduction for density-matrix generators: when every
// generator entry connects vectorized pairs of equal Bohr frequency
// E_row(r) - E_col(c), the trace-carrying steady state lives in the
// zero-frequency block. Redfield's non-secular terms fail the check and fall
// through to the full solve.
struct GradePartition {
  bool applicable = false;
  std::vector<int> zero_indices;           // vec indices with E_r == E_c
  std::vector<int> position_of_full;       // -1 where outside the block
};

inline GradePartition grade_partition(const TiltedGenerator& gen) {
  GradePartition part;
  if (!gen.density_form || gen.sector->energies.empty()) return part;
  const int d = gen.sector->dimension();
  const auto& energy = gen.sector->energies;
  std::vector<long long> key(static_cast<size_t>(d) * d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r)
      key[r + static_cast<size_t>(d) * c] = std::llround((energy[r] - energy[c]) * 1e9);
  const SpMat& l = gen.zero_field;
  for (int outer = 0; outer < l.outerSize(); ++outer)
    for (SpMat::InnerIterator it(l, outer); it; ++it)
      if (key[it.row()] != key[it.col()]) return part;
  part.applicable = true;
  part.position_of_full.assign(key.size(), -1);
  for (size_t k = 0; k < key.size(); ++k)
    if (key[k] == 0) {
      part.position_of_full[k] = static_cast<int>(part.zero_indices.size());
      part.zero_indices.push_back(static_cast<int>(k));
    }
  return part;
}

inline SpMat gather_submatrix(const SpMat& m, const GradePartition& part) {
  std::vector<Triplet> trip;
  for (int outer = 0; outer < m.outerSize(); ++outer)
    for (SpMat::InnerIterator it(m, outer); it; ++it) {
      const int r = part.position_of_full[it.row()];
      const int c = part.position_of_full[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  const int n = static_cast<int>(part.zero_indices.size());
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// Solve L x = rhs under the constraint (trace | x) = trace_value by replacing
// the first row with the trace functional. Returns the full-length solution.
inline Vector solve_trace_constrained(const TiltedGenerator& gen, const Vector& rhs_full,
                                      double trace_value, const SolveOptions& opts,
                                      bool certify_uniqueness) {
  const Vector trace_row = gen.trace_vector();
  GradePartition part;
  if (opts.grade_reduction) part = grade_partition(gen);

  SpMat l_active;
  Vector rhs, trace_active;
  if (part.applicable) {
    l_active = gather_submatrix(gen.zero_field, part);
    const int n = static_cast<int>(part.zero_indices.size());
    rhs.resize(n);
    trace_active.resize(n);
    for (int k = 0; k < n; ++k) {
      rhs(k) = rhs_full(part.zero_indices[k]);
      trace_active(k) = trace_row(part.zero_indices[k]);
    }
  } else {
    l_active = gen.zero_field;
    rhs = rhs_full;
    trace_active = trace_row;
  }
  const int n = static_cast<int>(l_active.rows());

  Vector solution;
  if (n <= opts.dense_limit) {
    DenseMatrix a = DenseMatrix(l_active);
    if (certify_uniqueness && opts.check_uniqueness && n <= opts.svd_limit) {
      Eigen::BDCSVD<DenseMatrix> svd(a);
      const auto& sv = svd.singularValues();
      const double smallest = sv(sv.size() - 1);
      const double second = sv.size() > 1 ? sv(sv.size() - 2) : 0.0;
      if (!(second > 1e3 * smallest))
        throw NonUniqueSteadyState(
            "generator null space is not one-dimensional; restrict to a sector basis or "
            "use evolve_to_stationarity");
    }
    a.row(0) = trace_active.transpose();
    Vector b = rhs;
    b(0) = trace_value;
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(a);
    solution = qr.solve(b);
  } else {
    std::vector<Triplet> trip;
    trip.reserve(l_active.nonZeros() + n);
    for (int outer = 0; outer < l_active.outerSize(); ++outer)
      for (SpMat::InnerIterator it(l_active, outer); it; ++it)
        if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < n; ++c)
      if (std::abs(trace_active(c)) > 0.0) trip.emplace_back(0, c, trace_active(c));
    SpMat a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();
    Vector b = rhs;
    b(0) = trace_value;
    // AMD (minimum degree on A + A^T) keeps the fill-in manageable on the
    // larger Liouvillian blocks; COLAMD wins on the small ones.
    if (n >= 1500) {
      Eigen::SparseLU<SpMat, Eigen::AMDOrdering<int>> lu(a);
      if (lu.info() != Eigen::Success)
        throw ConvergenceError("sparse factorization of the generator failed");
      solution = lu.solve(b);
      Vector correction = lu.solve(b - a * solution);  // one refinement pass
      solution += correction;
    } else {
      Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(a);
      if (lu.info() != Eigen::Success)
        throw ConvergenceError("sparse factorization of the generator failed");
      solution = lu.solve(b);
      Vector correction = lu.solve(b - a * solution);
      solution += correction;
    }
  }

  if (!part.applicable) return solution;
  Vector full = Vector::Zero(rhs_full.size());
  for (size_t k = 0; k < part.zero_indices.size(); ++k)
    full(part.zero_indices[k]) = solution(static_cast<int>(k));
  return full;
}

inline void hermitize(Vector& vec_rho, int d) {
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < c; ++r) {
      const Complex a = vec_rho(r + d * c);
      const Complex b = vec_rho(c + d * r);
      const Complex sym = 0.5 * (a + std::conj(b));
      vec_rho(r + d * c) = sym;
      vec_rho(c + d * r) = std::conj(sym);
    }
  for (int r = 0; r < d; ++r) vec_rho(r + d * r) = vec_rho(r + d * r).real();
}

}  // namespace detail

// Unique stationary state at chi = 0 via a rank-revealing solve with one row
// replaced by the trace functional.
inline SteadyState solve_steady(const TiltedGenerator& gen, const SolveOptions& opts = {}) {
  const Vector rhs = Vector::Zero(gen.dim());
  Vector x = detail::solve_trace_constrained(gen, rhs, 1.0, opts, true);
  if (gen.density_form) detail::hermitize(x, gen.sector->dimension());

  // renormalize exactly and measure the residual against the untouched L(0)
  const Complex tr = gen.trace_vector().dot(x);
  if (std::abs(tr) < 1e-14) throw ConvergenceError("steady-state solve returned a traceless vector");
  x /= tr;
  const double residual = (gen.zero_field * x).norm();
  if (!(residual < opts.residual_tol))
    throw ConvergenceError("steady-state residual " + std::to_string(residual) +
                           " exceeds tolerance");
  return SteadyState{gen.sector, std::move(x), residual, SteadyMethod::NullSpace,
                     gen.density_form};
}

// Analytic coarse-grained stationary state from the telescoping ratio
// product, accumulated in log space.
inline SteadyState cg_steady_analytic(int qutrits, double gamma_c, double n_c, double gamma_h,
                                      double n_h) {
  require_valid_qutrit_count(qutrits);
  const int dim = qutrits + 1;
  std::vector<double> log_weight(dim, 0.0);
  for (int n = 1; n <= qutrits; ++n) {
    const double up = (gamma_c * n_c + gamma_h * n_h) * (n + 1.0) * (qutrits + 1 - n) / 2.0;
    const double dn =
        (gamma_c * (1.0 + n_c) + gamma_h * (1.0 + n_h)) * n * (qutrits - n + 1.0) / 2.0;
    log_weight[n] = log_weight[n - 1] + std::log(up) - std::log(dn);
  }
  const double shift = *std::max_element(log_weight.begin(), log_weight.end());
  double norm = 0.0;
  for (double lw : log_weight) norm += std::exp(lw - shift);
  Vector q(dim);
  for (int n = 0; n < dim; ++n) q(n) = std::exp(log_weight[n] - shift) / norm;

  const TiltedGenerator gen = cg_rate_matrix(qutrits, gamma_c, n_c, gamma_h, n_h);
  const double residual = (gen.zero_field * q).norm();
  return SteadyState{gen.sector, std::move(q), residual, SteadyMethod::Tridiagonal, false};
}

// Adaptive Dormand-Prince 5(4) integration of x' = L(0) x until the residual
// ||L x|| drops below tol. Used when the stationary state depends on the
// initial sector (e.g. collective full-space dynamics).
inline SteadyState evolve_to_stationarity(const TiltedGenerator& gen, Vector state, double t_max,
                                          double tol, double rel_tol = 1e-9) {
  if (state.size() != gen.dim())
    throw ContractViolation("initial state has the wrong dimension for this generator");
  const SpMat& l = gen.zero_field;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

  double t = 0.0;
  double h = 1e-3;
  Vector k1 = l * state;
  if (k1.norm() < tol)
    return SteadyState{gen.sector, std::move(state), k1.norm(), SteadyMethod::LongTimeEvolution,
                       gen.density_form};
  constexpr double kAbsTol = 1e-12;
  while (t < t_max) {
    h = std::min(h, t_max - t);
    const Vector k2 = l * (state + h * a21 * k1);
    const Vector k3 = l * (state + h * (a31 * k1 + a32 * k2));
    const Vector k4 = l * (state + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = l * (state + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = l * (state + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector next = state + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = l * next;
    const Vector err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < state.size(); ++i) {
      const double scale =
          kAbsTol + rel_tol * std::max(std::abs(state(i)), std::abs(next(i)));
      const double r = std::abs(err_vec(i)) / scale;
      err += r * r;
    }
    err = std::sqrt(err / state.size());

    if (err <= 1.0) {
      t += h;
      state = next;
      k1 = k7;  // FSAL
      const double residual = k1.norm();
      if (residual < tol)
        return SteadyState{gen.sector, std::move(state), residual,
                           SteadyMethod::LongTimeEvolution, gen.density_form};
    }
    const double factor = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    (void)c2; (void)c3; (void)c4; (void)c5;
  }
  throw ConvergenceError("evolution reached t_max with residual " +
                         std::to_string((l * state).norm()));
}

}  // namespace qar
