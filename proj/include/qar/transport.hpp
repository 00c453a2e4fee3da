#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qar/generators.hpp"
#include "qar/reservoir.hpp"
#include "qar/steady.hpp"
#include "qar/types.hpp"

namespace qar {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

namespace detail {

inline void require_usable_state(const TiltedGenerator& gen, const SteadyState& ss,
                                 double threshold = 1e-8) {
  if (ss.state.size() != gen.dim())
    throw ContractViolation("steady state does not match the generator dimension");
  if (!(ss.residual < threshold))
    throw ContractViolation("steady-state residual too large for transport evaluation");
}

inline double real_checked(Complex value, const char* what) {
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real())))
    throw ConvergenceError(std::string(what) + " acquired a spurious imaginary part");
  return value.real();
}

}  // namespace detail

// Reservoir-side stationary current I = -i tr(L'_nu(0) rho), in units of
// delta (= delta * Gamma-rate products).
inline double stationary_current(const TiltedGenerator& gen, const SteadyState& ss,
                                 ReservoirKind nu) {
  detail::require_usable_state(gen, ss);
  const Vector t = gen.trace_vector();
  Complex value = 0.0;
  for (const auto& block : gen.channel(nu).blocks)
    value += block.quantum * t.dot(block.op * ss.state);
  return detail::real_checked(value, "stationary current");
}

// System-side current tr(H_S D_nu[rho]) with D_nu the reservoir dissipator.
inline double system_side_current(const TiltedGenerator& gen, const SteadyState& ss,
                                  ReservoirKind nu) {
  detail::require_usable_state(gen, ss);
  const Vector y = gen.dissipator(nu) * ss.state;
  if (gen.density_form) {
    const int d = gen.sector->dimension();
    if (gen.system_hamiltonian.size() == 0)
      throw ContractViolation("generator lacks a system Hamiltonian");
    Complex value = 0.0;
    for (int outer = 0; outer < gen.system_hamiltonian.outerSize(); ++outer)
      for (SpMat::InnerIterator it(gen.system_hamiltonian, outer); it; ++it)
        value += it.value() * y(static_cast<int>(it.col()) + d * static_cast<int>(it.row()));
    return detail::real_checked(value, "system-side current");
  }
  if (gen.level_energies.empty())
    throw ContractViolation("mesostates carry no energies; system-side current undefined");
  Complex value = 0.0;
  for (int i = 0; i < gen.dim(); ++i) value += gen.level_energies[i] * y(i);
  return detail::real_checked(value, "system-side current");
}

// Stationary energy-current noise from the counting-field recipe:
// S = -tr(L'' rho) - 2i tr(L' sigma) with L(0) sigma = i L'(0) rho + I rho
// and tr sigma = 0.
inline double stationary_noise(const TiltedGenerator& gen, const SteadyState& ss,
                               ReservoirKind nu, const SolveOptions& opts = {}) {
  detail::require_usable_state(gen, ss);
  const Vector t = gen.trace_vector();
  const SpMat l_prime = gen.l_prime(nu);
  const Vector lp_rho = l_prime * ss.state;
  const double current = detail::real_checked(Complex(0, -1) * t.dot(lp_rho), "current");

  Vector rhs = Complex(0, 1) * lp_rho + current * ss.state;
  Vector sigma = detail::solve_trace_constrained(gen, rhs, 0.0, opts, false);
  const double aux_residual = (gen.zero_field * sigma - rhs).norm();
  if (!(aux_residual < 1e-8 * std::max(1.0, rhs.norm())))
    throw ConvergenceError("auxiliary noise solve is ill-conditioned; residual " +
                           std::to_string(aux_residual));

  Complex value = -t.dot(gen.l_second(nu) * ss.state) -
                  Complex(0, 2) * t.dot(l_prime * sigma);
  const double noise = detail::real_checked(value, "stationary noise");
  if (noise < -1e-10) throw ConvergenceError("stationary noise came out negative");
  return noise;
}

// Scaling factor f_N(nbar) of the analytic coarse-grained cooling current.
inline double cg_scaling_factor(int qutrits, double nbar) {
  const double alpha = nbar / (nbar + 1.0);
  const double alpha_pow = std::exp((qutrits + 1.0) * std::log(alpha));
  const double g = 2.0 * (qutrits - 3.0 * nbar) * (nbar + 1.0);
  const double h = static_cast<double>(qutrits) * qutrits + (5.0 + 4.0 * nbar) * qutrits +
                   6.0 * (nbar + 1.0) * (nbar + 1.0);
  return (g + alpha_pow * h) / (nbar + 1.0 - alpha_pow * (2.0 + nbar + qutrits));
}

// Closed-form coarse-grained cooling current
// I = Gamma_c Gamma_h delta (n_c - n_h) f_N(nbar) / (2 (Gamma_c + Gamma_h)).
inline double cg_analytic_current(int qutrits, double gamma_c, double n_c, double gamma_h,
                                  double n_h) {
  require_valid_qutrit_count(qutrits);
  const double nbar = (gamma_c * n_c + gamma_h * n_h) / (gamma_c + gamma_h);
  return gamma_c * gamma_h * kSmallGap * (n_c - n_h) * cg_scaling_factor(qutrits, nbar) /
         (2.0 * (gamma_c + gamma_h));
}

// Crossover size between quadratic and linear coarse-grained scaling.
inline double cg_crossover_size(double nbar) { return 12.0 * nbar - 3.0; }

// Predicted penalty-boost factor ((N+2)/3)^2 over the single-QAR current.
inline double boost_prediction(int qutrits) {
  const double f = (qutrits + 2.0) / 3.0;
  return f * f;
}

struct TransportReport {
  double current_cold = kNaN, current_hot = kNaN, current_work = kNaN;
  double system_cold = kNaN, system_hot = kNaN, system_work = kNaN;
  double noise_cold = kNaN;
  double entropy_production = kNaN;
  double cop = kNaN;
  double tur_quotient = kNaN;
  double residual_work = kNaN;  // |I_w - (Delta-delta)/delta I_c|
  double residual_hot = kNaN;   // |I_h + Delta/delta I_c|
  double first_law_residual = kNaN;
  bool cooling_window = false;  // beta_h Delta > beta_w (Delta-delta) + beta_c delta
  bool cooling = false;         // I_c > 0
  double min_population = kNaN;

  double current(ReservoirKind k) const {
    switch (k) {
      case ReservoirKind::Cold: return current_cold;
      case ReservoirKind::Hot: return current_hot;
      case ReservoirKind::Work: return current_work;
    }
    return kNaN;
  }
};

inline double effective_beta(const Reservoir& r, double big_gap) {
  if (r.inverse_temperature) return *r.inverse_temperature;
  if (r.infinite_occupation()) return 0.0;
  return beta_for_occupation(r.occupation, r.quantum(big_gap));
}

struct DiagnosticsOptions {
  bool with_noise = true;
  bool noise_all_reservoirs = false;  // tight coupling makes them alike; off by default
  SolveOptions solve;
};

// Assemble currents, noise, entropy production, COP, TUR and the
// tight-coupling residuals for one steady state.
inline TransportReport diagnostics(const TiltedGenerator& gen, const SteadyState& ss,
                                   const std::vector<Reservoir>& reservoirs, double big_gap,
                                   const DiagnosticsOptions& opts = {}) {
  TransportReport rep;
  rep.min_population = ss.min_population();

  auto current_if_present = [&](ReservoirKind k, double& out_res, double& out_sys) {
    if (!gen.has_channel(k)) return;
    if (!gen.channel(k).blocks.empty()) out_res = stationary_current(gen, ss, k);
    if (gen.density_form || !gen.level_energies.empty())
      out_sys = system_side_current(gen, ss, k);
  };
  current_if_present(ReservoirKind::Cold, rep.current_cold, rep.system_cold);
  current_if_present(ReservoirKind::Hot, rep.current_hot, rep.system_hot);
  current_if_present(ReservoirKind::Work, rep.current_work, rep.system_work);

  if (opts.with_noise) rep.noise_cold = stationary_noise(gen, ss, ReservoirKind::Cold, opts.solve);

  const bool all_currents = std::isfinite(rep.current_cold) && std::isfinite(rep.current_hot) &&
                            std::isfinite(rep.current_work);
  if (all_currents) {
    rep.first_law_residual = rep.current_cold + rep.current_hot + rep.current_work;
    rep.residual_work =
        std::abs(rep.current_work - (big_gap - kSmallGap) / kSmallGap * rep.current_cold);
    rep.residual_hot = std::abs(rep.current_hot + big_gap / kSmallGap * rep.current_cold);
    double entropy = 0.0;
    for (const auto& r : reservoirs)
      entropy -= effective_beta(r, big_gap) * rep.current(r.kind);
    rep.entropy_production = entropy;
    if (std::isfinite(rep.noise_cold) && rep.current_cold != 0.0)
      rep.tur_quotient =
          rep.entropy_production * rep.noise_cold / (rep.current_cold * rep.current_cold);
  }

  rep.cooling = rep.current_cold > 0.0;
  rep.cop = rep.cooling ? kSmallGap / (big_gap - kSmallGap) : 0.0;

  if (reservoirs.size() == 3) {
    const double beta_c = effective_beta(find_reservoir(reservoirs, ReservoirKind::Cold), big_gap);
    const double beta_h = effective_beta(find_reservoir(reservoirs, ReservoirKind::Hot), big_gap);
    const double beta_w = effective_beta(find_reservoir(reservoirs, ReservoirKind::Work), big_gap);
    rep.cooling_window =
        beta_h * big_gap > beta_w * (big_gap - kSmallGap) + beta_c * kSmallGap;
  }
  return rep;
}

// Sign predictor for the cooling current on the symmetric sector:
// sign(n_c (1+n_h) n_w - (1+n_c) n_h (1+n_w)).
inline double cooling_sign_predictor(double n_c, double n_h, double n_w) {
  return n_c * (1.0 + n_h) * n_w - (1.0 + n_c) * n_h * (1.0 + n_w);
}

}  // namespace qar
