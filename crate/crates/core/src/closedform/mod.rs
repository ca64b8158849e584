//! Exact results for solvable engines and the special functions they use.
//!
//! Spin models share the convention `H(λ) = H_loc + λH_int` with `H_int`
//! dimensionless. Oscillator models use unit mass with stiffness parameters
//! `k`, `k₀` and coupling `g`.

mod chains;
mod elliptic;

use std::fmt;

use thiserror::Error;

use crate::numerics::{central_derivative, FdOptions};
use crate::thermo::{Fluctuations, ThermoPoint};

pub use chains::{osc_chain_finite, osc_chain_limit, tfim_limit, tfim_momentum_sum, ChainLimit, TfimSums};
pub use elliptic::ellint_e;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("elliptic parameter must satisfy m <= 1, got {0}")]
    EllipticParameter(f64),
    #[error("{model}: λ = {lambda} is outside the stable domain ({reason})")]
    Unstable { model: &'static str, lambda: f64, reason: &'static str },
    #[error("{model}: invalid parameter {name} = {value}")]
    BadParameter { model: &'static str, name: &'static str, value: f64 },
    #[error("{model}: numerical evaluation failed: {reason}")]
    Numerical { model: &'static str, reason: String },
}

/// A solvable engine with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormModel {
    /// `(ω/2)σ^z + (λ/2)σ^x`.
    SingleQubit { omega: f64 },
    /// `(ω/2)(σ^z_1 + σ^z_2) + λσ^x_1σ^x_2`.
    TwoQubits { omega: f64 },
    /// Periodic transverse-field Ising ring of `n` sites, free-fermion momentum sums.
    TfimFinite { n: usize, omega: f64 },
    /// Thermodynamic-limit expressions for the same ring, scaled to `n` sites.
    TfimLimit { n: usize, omega: f64 },
    /// `p²/2 + ω²x²/2 + λx`.
    SingleOscillator { omega: f64 },
    /// Two oscillators with fixed coupling `g`, dial `λ` scaling `−g x₁x₂`.
    TwoOscFixedG { k0: f64, g: f64 },
    /// Two oscillators of stiffness `k` with `H_int = x₁x₂`.
    TwoOscDirect { k: f64 },
    /// Open chain of `n` oscillators, nearest-neighbour coupling.
    OscChainFinite { n: usize, k0: f64 },
    /// Thermodynamic-limit expressions for the chain, scaled to `n` sites.
    OscChainLimit { n: usize, k0: f64 },
}

impl fmt::Display for ClosedFormModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a closed form provides at one coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormValues {
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub fluctuations: Fluctuations,
    /// Set where `Δ′` diverges (oscillator chain limit at `λ = 1`).
    pub singular: bool,
}

/// `(c², e)` pairs: squared matrix elements of `H_int` and excitation energies.
type Channels = Vec<(f64, f64)>;

fn spectral_from_channels(lambda: f64, channels: &[(f64, f64)], bounded: bool) -> Fluctuations {
    let live: Vec<_> = channels.iter().copied().filter(|&(c2, _)| c2 > 0.0).collect();
    if live.is_empty() {
        return Fluctuations { sigma2: Some(0.0), ..Fluctuations::default() };
    }
    let c2_sum: f64 = live.iter().map(|&(c2, _)| c2).sum();
    let inv: f64 = live.iter().map(|&(c2, e)| c2 / e).sum();
    let e_min = live.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
    let e_max = live.iter().map(|&(_, e)| e).fold(0.0, f64::max);
    Fluctuations {
        sigma2: Some(lambda * lambda * c2_sum),
        ebar: Some(c2_sum / inv),
        e_min: Some(e_min),
        e_max: bounded.then_some(e_max),
        qfi: Some(4.0 * live.iter().map(|&(c2, e)| c2 / (e * e)).sum::<f64>()),
    }
}

impl ClosedFormModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleQubit { .. } => "single_qubit",
            Self::TwoQubits { .. } => "two_qubits",
            Self::TfimFinite { .. } => "tfim_finite",
            Self::TfimLimit { .. } => "tfim_limit",
            Self::SingleOscillator { .. } => "single_oscillator",
            Self::TwoOscFixedG { .. } => "two_osc_fixed_g",
            Self::TwoOscDirect { .. } => "two_osc_direct",
            Self::OscChainFinite { .. } => "osc_chain_finite",
            Self::OscChainLimit { .. } => "osc_chain_limit",
        }
    }

    /// Checks parameter domains (positive energies, at least two sites).
    pub fn validate(&self) -> Result<(), ClosedFormError> {
        let model = self.name();
        let positive = |name: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(ClosedFormError::BadParameter { model, name, value })
            }
        };
        let sites = |n: usize| {
            if n >= 2 {
                Ok(())
            } else {
                Err(ClosedFormError::BadParameter { model, name: "n", value: n as f64 })
            }
        };
        match *self {
            Self::SingleQubit { omega }
            | Self::TwoQubits { omega }
            | Self::SingleOscillator { omega } => positive("omega", omega),
            Self::TfimFinite { n, omega } | Self::TfimLimit { n, omega } => {
                sites(n)?;
                positive("omega", omega)
            }
            Self::TwoOscFixedG { k0, g } => {
                positive("k0", k0)?;
                positive("g", g)
            }
            Self::TwoOscDirect { k } => positive("k", k),
            Self::OscChainFinite { n, k0 } | Self::OscChainLimit { n, k0 } => {
                sites(n)?;
                positive("k0", k0)
            }
        }
    }

    /// Whether the excitation spectrum reachable through `H_int` is bounded.
    pub fn bounded_spectrum(&self) -> bool {
        matches!(
            self,
            Self::SingleQubit { .. } | Self::TwoQubits { .. } | Self::TfimFinite { .. } | Self::TfimLimit { .. }
        )
    }

    /// `Δ(λ)` alone.
    pub fn delta(&self, lambda: f64) -> Result<f64, ClosedFormError> {
        self.validate()?;
        match *self {
            Self::SingleQubit { omega } => Ok(0.5 * lambda * lambda / (omega.hypot(lambda) + omega)),
            Self::TwoQubits { omega } => Ok(lambda * lambda / (omega.hypot(lambda) + omega)),
            Self::TfimFinite { n, omega } => Ok(tfim_momentum_sum(n, omega, lambda)?.delta),
            Self::TfimLimit { n, omega } => Ok(tfim_limit(n, omega, lambda)?.delta),
            Self::SingleOscillator { omega } => Ok(0.5 * lambda * lambda / (omega * omega)),
            Self::TwoOscFixedG { k0, g } => {
                Ok(direct_pair(self.name(), k0 + g, g * lambda)?.delta)
            }
            Self::TwoOscDirect { k } => Ok(direct_pair(self.name(), k, lambda)?.delta),
            Self::OscChainFinite { n, k0 } => Ok(osc_chain_finite(n, k0, lambda)?.delta),
            Self::OscChainLimit { n, k0 } => Ok(osc_chain_limit(n, k0, lambda)?.delta),
        }
    }

    /// `Δ`, `Δ′`, `Δ″` and the fluctuation data at `λ`.
    ///
    /// Thermodynamic-limit models give `Δ′` and `Δ″` by finite differences of `Δ`.
    pub fn values(&self, lambda: f64) -> Result<ClosedFormValues, ClosedFormError> {
        self.validate()?;
        let bounded = self.bounded_spectrum();
        let exact = |delta, d1, d2, fluctuations| ClosedFormValues { delta, d1, d2, fluctuations, singular: false };
        match *self {
            Self::SingleQubit { omega } => {
                let r = omega.hypot(lambda);
                let c2 = omega * omega / (4.0 * r * r);
                let mut fl = spectral_from_channels(lambda, &[(c2, r)], bounded);
                fl.sigma2 = Some(lambda * lambda * omega * omega / (4.0 * r * r));
                fl.ebar = Some(r);
                Ok(exact(
                    0.5 * lambda * lambda / (r + omega),
                    lambda / (2.0 * r),
                    omega * omega / (2.0 * r * r * r),
                    fl,
                ))
            }
            Self::TwoQubits { omega } => {
                let r = omega.hypot(lambda);
                let c2 = omega * omega / (r * r);
                let mut fl = spectral_from_channels(lambda, &[(c2, 2.0 * r)], bounded);
                fl.sigma2 = Some(lambda * lambda * omega * omega / (r * r));
                fl.ebar = Some(2.0 * r);
                Ok(exact(lambda * lambda / (r + omega), lambda / r, omega * omega / (r * r * r), fl))
            }
            Self::TfimFinite { n, omega } => {
                let s = tfim_momentum_sum(n, omega, lambda)?;
                let mut fl = spectral_from_channels(lambda, &s.channels, bounded);
                fl.sigma2 = Some(s.sigma2);
                fl.ebar = s.ebar;
                Ok(exact(s.delta, s.d1, s.d2, fl))
            }
            Self::TfimLimit { n, omega } => {
                let lim = tfim_limit(n, omega, lambda)?;
                let (d1, d2) = self.fd_derivatives(lambda)?;
                let fl = Fluctuations { sigma2: Some(lim.sigma2), ..Fluctuations::default() };
                Ok(exact(lim.delta, d1, d2, fl))
            }
            Self::SingleOscillator { omega } => {
                let mut fl = spectral_from_channels(lambda, &[(0.5 / omega, omega)], bounded);
                fl.sigma2 = Some(0.5 * lambda * lambda / omega);
                Ok(exact(0.5 * lambda * lambda / (omega * omega), lambda / (omega * omega), 1.0 / (omega * omega), fl))
            }
            Self::TwoOscFixedG { k0, g } => {
                let p = direct_pair(self.name(), k0 + g, g * lambda)?;
                let channels: Channels = p.channels.iter().map(|&(c2, e)| (g * g * c2, e)).collect();
                let mut fl = spectral_from_channels(lambda, &channels, bounded);
                fl.sigma2 = Some(lambda * lambda * g * g * p.sigma2_unit);
                Ok(exact(p.delta, g * p.d1, g * g * p.d2, fl))
            }
            Self::TwoOscDirect { k } => {
                let p = direct_pair(self.name(), k, lambda)?;
                let mut fl = spectral_from_channels(lambda, &p.channels, bounded);
                fl.sigma2 = Some(lambda * lambda * p.sigma2_unit);
                Ok(exact(p.delta, p.d1, p.d2, fl))
            }
            Self::OscChainFinite { n, k0 } => {
                let c = osc_chain_finite(n, k0, lambda)?;
                let mut fl = spectral_from_channels(lambda, &c.channels, bounded);
                fl.sigma2 = Some(c.sigma2);
                Ok(exact(c.delta, c.d1, c.d2, fl))
            }
            Self::OscChainLimit { n, k0 } => {
                let lim = osc_chain_limit(n, k0, lambda)?;
                let fl = Fluctuations { sigma2: Some(lim.sigma2), ..Fluctuations::default() };
                if lim.singular {
                    return Ok(ClosedFormValues {
                        delta: lim.delta,
                        d1: f64::INFINITY,
                        d2: f64::INFINITY,
                        fluctuations: fl,
                        singular: true,
                    });
                }
                let (d1, d2) = self.fd_derivatives(lambda)?;
                Ok(exact(lim.delta, d1, d2, fl))
            }
        }
    }

    fn fd_derivatives(&self, lambda: f64) -> Result<(f64, f64), ClosedFormError> {
        let opts = FdOptions::default();
        let d1 = central_derivative(|x| self.delta(x), lambda, 1, &opts)?;
        let d2 = central_derivative(|x| self.delta(x), lambda, 2, &opts)?;
        Ok((d1.value, d2.value))
    }

    /// `Δ″(λ)` without the fluctuation data.
    pub fn d2(&self, lambda: f64) -> Result<f64, ClosedFormError> {
        Ok(self.values(lambda)?.d2)
    }
}

struct PairValues {
    delta: f64,
    d1: f64,
    d2: f64,
    /// `Σc²` for unit coupling strength.
    sigma2_unit: f64,
    channels: Channels,
}

/// Two unit-mass oscillators with normal-mode stiffnesses `k ± x`, `H_int = x₁x₂`.
fn direct_pair(model: &'static str, k: f64, x: f64) -> Result<PairValues, ClosedFormError> {
    if x.abs() >= k || !x.is_finite() {
        return Err(ClosedFormError::Unstable { model, lambda: x, reason: "a normal-mode stiffness is not positive" });
    }
    let s = k.sqrt();
    let a = (k + x).sqrt();
    let b = (k - x).sqrt();
    let delta = x * x / ((k + a * b) * (2.0 * s + a + b));
    let d1 = x / (2.0 * a * b * (a + b));
    let d2 = 0.125 * (a.powi(-3) + b.powi(-3));
    let channels = vec![(0.125 / (a * a), 2.0 * a), (0.125 / (b * b), 2.0 * b)];
    let sigma2_unit = k / (4.0 * (k - x) * (k + x));
    Ok(PairValues { delta, d1, d2, sigma2_unit, channels })
}

/// `ThermoPoint` built entirely from closed forms.
pub fn eval_model(model: &ClosedFormModel, lambda: f64) -> Result<ThermoPoint, ClosedFormError> {
    let v = model.values(lambda)?;
    let mut point = ThermoPoint::assemble(lambda, v.delta, v.d1, Some(v.d2), v.fluctuations);
    if v.singular {
        point.valid = false;
        point.notes.push("singular: Δ′ diverges logarithmically at λ = 1".into());
    }
    Ok(point)
}

/// Mixing angle of the two-qubit ground state, `tan φ = λ/ω`.
pub fn two_qubit_ground_angle(omega: f64, lambda: f64) -> f64 {
    lambda.atan2(omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn single_qubit_at_unit_coupling() {
        let p = eval_model(&ClosedFormModel::SingleQubit { omega: 1.0 }, 1.0).unwrap();
        assert!(rel(p.delta, (2f64.sqrt() - 1.0) / 2.0) < 1e-15);
        assert!(rel(p.work, 0.146_446_609_406_726_24) < 1e-14);
        assert!(rel(p.efficiency.unwrap(), 2f64.sqrt() - 1.0) < 1e-14);
        assert!(rel(p.sigma2.unwrap(), 0.125) < 1e-15);
        assert!(rel(p.ebar.unwrap(), 2f64.sqrt()) < 1e-15);
    }

    #[test]
    fn two_qubits_at_unit_coupling() {
        let p = eval_model(&ClosedFormModel::TwoQubits { omega: 1.0 }, 1.0).unwrap();
        assert!(rel(p.delta, 2f64.sqrt() - 1.0) < 1e-15);
        assert!(rel(p.d1, 0.5f64.sqrt()) < 1e-15);
        assert!(rel(p.d2.unwrap(), 2f64.powf(-1.5)) < 1e-15);
        assert!(rel(p.work, 1.0 - 0.5f64.sqrt()) < 1e-14);
        assert!(rel(p.sigma2.unwrap(), 0.5) < 1e-15);
        assert!(rel(p.ebar.unwrap(), 2.0 * 2f64.sqrt()) < 1e-15);
        assert!(rel(p.qfi.unwrap(), 0.25) < 1e-15);
        assert!(rel(p.sigma_q.unwrap(), 2.0) < 1e-14);
    }

    #[test]
    fn single_oscillator_is_half_efficient_everywhere() {
        let p = eval_model(&ClosedFormModel::SingleOscillator { omega: 1.0 }, 0.8).unwrap();
        assert!(rel(p.delta, 0.32) < 1e-15);
        assert!(rel(p.work, 0.32) < 1e-15);
        assert!(rel(p.heat, 0.64) < 1e-15);
        assert!(rel(p.efficiency.unwrap(), 0.5) < 1e-15);
    }

    #[test]
    fn two_osc_direct_variance() {
        let p = eval_model(&ClosedFormModel::TwoOscDirect { k: 1.0 }, 0.5).unwrap();
        assert!(rel(p.sigma2.unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(p.e_max.is_none());
        assert!(eval_model(&ClosedFormModel::TwoOscDirect { k: 1.0 }, 1.0).is_err());
    }

    #[test]
    fn direct_pair_matches_naive_forms() {
        let (k, l) = (1.3f64, 0.7f64);
        let p = direct_pair("t", k, l).unwrap();
        let naive = k.sqrt() - 0.5 * ((k + l).sqrt() + (k - l).sqrt());
        assert!(rel(p.delta, naive) < 1e-13);
        let d1 = 0.25 * (1.0 / (k - l).sqrt() - 1.0 / (k + l).sqrt());
        assert!(rel(p.d1, d1) < 1e-13);
    }

    #[test]
    fn fixed_g_recovers_unit_dial() {
        let (k0, g) = (1.0f64, 0.5f64);
        let d = ClosedFormModel::TwoOscFixedG { k0, g }.delta(1.0).unwrap();
        let reference = (k0 + g).sqrt() - 0.5 * (k0.sqrt() + (k0 + 2.0 * g).sqrt());
        assert!(rel(d, reference) < 1e-13);
    }

    #[test]
    fn fixed_g_variance_formula() {
        let (k0, g, l) = (0.8f64, 0.6f64, 0.9f64);
        let p = eval_model(&ClosedFormModel::TwoOscFixedG { k0, g }, l).unwrap();
        let wp2 = k0 + (1.0 - l) * g;
        let wm2 = k0 + (1.0 + l) * g;
        let w2 = k0 + g;
        let expect = l * l * g * g * w2 / (4.0 * wp2 * wm2);
        assert!(rel(p.sigma2.unwrap(), expect) < 1e-13);
        let d2 = g * g / 8.0 * (wp2.powf(-1.5) + wm2.powf(-1.5));
        assert!(rel(p.d2.unwrap(), d2) < 1e-13);
    }

    #[test]
    fn ground_angle() {
        assert_eq!(two_qubit_ground_angle(1.0, 0.0), 0.0);
        assert!((two_qubit_ground_angle(2.0, 2.0) - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let half = 0.5 * two_qubit_ground_angle(1.0, 1.0);
        assert!((half.sin().powi(2) - 0.5 * (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn parameter_domains() {
        assert!(ClosedFormModel::SingleQubit { omega: 0.0 }.validate().is_err());
        assert!(ClosedFormModel::TfimFinite { n: 1, omega: 1.0 }.validate().is_err());
        assert!(ClosedFormModel::OscChainFinite { n: 4, k0: -1.0 }.validate().is_err());
    }
}
