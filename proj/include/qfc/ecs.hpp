#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace qfc {

/// States with eta_re at or below this floor are rejected: the position
/// variance 1/eta_re is no longer representable meaningfully.
inline constexpr double kEtaReFloor = 1e-12;

/// Gaussian pure state parametrized by its means (q_bar, p_bar) and the
/// complex inverse-variance parameter eta = eta_re + i eta_im with
/// eta_re > 0. The wavefunction is
///   (eta_re / 2 pi)^{1/4} exp{ -(eta/4)(x - q_bar)^2 + i p_bar x / hbar }.
/// Real eta gives an ordinary coherent/squeezed state; eta_im != 0 tilts the
/// phase-space ellipse, correlating position and momentum.
template <typename Scalar>
struct ExtendedCoherentStateT {
  Scalar q_bar{0};   // m
  Scalar p_bar{0};   // kg m/s
  Scalar eta_re{1};  // 1/m^2
  Scalar eta_im{0};  // 1/m^2

  std::complex<Scalar> eta() const { return {eta_re, eta_im}; }
};

using ExtendedCoherentState = ExtendedCoherentStateT<double>;

template <typename Scalar>
void require_valid(const ExtendedCoherentStateT<Scalar>& state) {
  if (!(state.eta_re > Scalar(kEtaReFloor)) || !std::isfinite(state.eta_re) ||
      !std::isfinite(state.eta_im) || !std::isfinite(state.q_bar) ||
      !std::isfinite(state.p_bar)) {
    throw std::domain_error("extended coherent state requires finite fields and eta_re > 1e-12");
  }
}

/// Symmetric second moments of position and momentum.
template <typename Scalar>
struct CovarianceTripleT {
  Scalar c_qq;  // m^2
  Scalar c_qp;  // J s; symmetrized cross covariance
  Scalar c_pp;  // kg^2 m^2 / s^2
};

using CovarianceTriple = CovarianceTripleT<double>;

template <typename Scalar>
CovarianceTripleT<Scalar> covariances(const ExtendedCoherentStateT<Scalar>& state, Scalar hbar) {
  require_valid(state);
  const Scalar ep = state.eta_re;
  const Scalar epp = state.eta_im;
  return {Scalar(1) / ep,
          -hbar * epp / (2 * ep),
          hbar * hbar / 4 * (ep + epp * epp / ep)};
}

/// C_qq C_pp - C_qp^2; equals hbar^2/4 identically for every valid state
/// (these are minimum-uncertainty states).
template <typename Scalar>
Scalar uncertainty_product(const ExtendedCoherentStateT<Scalar>& state, Scalar hbar) {
  const auto c = covariances(state, hbar);
  return c.c_qq * c.c_pp - c.c_qp * c.c_qp;
}

/// Quantum characteristic function G(r, s) = <exp(i r q + i s p)>, which for
/// a Gaussian state is exp{i r q_bar + i s p_bar
///                         - (C_qq r^2 + 2 C_qp r s + C_pp s^2) / 2}.
template <typename Scalar>
std::complex<Scalar> characteristic_fn(const ExtendedCoherentStateT<Scalar>& state, Scalar hbar,
                                       Scalar r, Scalar s) {
  const auto c = covariances(state, hbar);
  const Scalar re = -(c.c_qq * r * r + 2 * c.c_qp * r * s + c.c_pp * s * s) / 2;
  const Scalar im = r * state.q_bar + s * state.p_bar;
  return std::exp(std::complex<Scalar>(re, im));
}

/// |G(r, s) - G(r, 0) G(0, s)|. Vanishes for all (r, s) exactly when the
/// position and momentum readouts are statistically independent in the Weyl
/// sense, which happens iff eta is real.
template <typename Scalar>
Scalar weyl_independence_defect(const ExtendedCoherentStateT<Scalar>& state, Scalar hbar,
                                Scalar r, Scalar s) {
  const auto joint = characteristic_fn(state, hbar, r, s);
  const auto split = characteristic_fn(state, hbar, r, Scalar(0)) *
                     characteristic_fn(state, hbar, Scalar(0), s);
  return std::abs(joint - split);
}

}  // namespace qfc
