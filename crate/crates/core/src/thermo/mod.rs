//! Engine observables from the bending function and the ground-state spectrum.
//!
//! Heat `Q = λΔ′`, work `W = λΔ′ − Δ`, efficiency `η = W/Q`, work variance
//! `σ² = ⟨H_loc²⟩ − ⟨H_loc⟩² = ½λ²Δ″ē`, quantum Fisher information
//! `𝓘 = 4Σc²/e²` and `Σ_Q = 2𝓘(Δ′/Δ″)²`.

mod bounds;

use thiserror::Error;

use crate::eigensolve::{ground_state_with, solve_ground_sector, EigenOptions, GroundSolution};
use crate::model::OperatorPair;
use crate::numerics::{integrate, QuadError, QuadOptions};
use crate::qvbf::{delta_second_sos, hellmann_feynman, Channel, QvbfError, QvbfSource};

pub use bounds::{check_bounds, BoundReport, Verdict, BOUND_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error(transparent)]
    Qvbf(#[from] QvbfError),
    #[error("variance routes disagree: ⟨δH_loc²⟩ = {direct:e}, λ²⟨δH_int²⟩ = {interaction:e}")]
    RouteDisagreement { direct: f64, interaction: f64 },
    #[error("no excited state is reachable through H_int; ē is undefined")]
    NoAccessibleStates,
    #[error("W″ does not change sign on [{lo}, {hi}] (values {at_lo:e}, {at_hi:e})")]
    NoSignChange { lo: f64, hi: f64, at_lo: f64, at_hi: f64 },
    #[error("Δ″(0) = 0: the engine does no work at weak coupling")]
    NoWeakCoupling,
    #[error("local ground state is degenerate with a state H_int couples to it")]
    DegenerateLocalGround,
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

/// Fluctuation and spectral data accompanying `Δ` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fluctuations {
    pub sigma2: Option<f64>,
    pub ebar: Option<f64>,
    pub e_min: Option<f64>,
    /// Absent when the accessible spectrum is unbounded.
    pub e_max: Option<f64>,
    pub qfi: Option<f64>,
}

/// All engine observables at one coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoPoint {
    pub lambda: f64,
    pub delta: f64,
    pub d1: f64,
    pub d2: Option<f64>,
    pub work: f64,
    pub heat: f64,
    /// `None` at `λ = 0` (unless the limit was requested) and for a trivial engine.
    pub efficiency: Option<f64>,
    pub sigma2: Option<f64>,
    pub ebar: Option<f64>,
    pub e_min: Option<f64>,
    pub e_max: Option<f64>,
    pub qfi: Option<f64>,
    pub sigma_q: Option<f64>,
    pub bounds: BoundReport,
    pub valid: bool,
    pub notes: Vec<String>,
}

impl ThermoPoint {
    /// Derives work, heat, efficiency, `Σ_Q` and the bound report.
    pub fn assemble(lambda: f64, delta: f64, d1: f64, d2: Option<f64>, fl: Fluctuations) -> Self {
        let mut p = Self {
            lambda,
            delta,
            d1,
            d2,
            work: work(lambda, delta, d1),
            heat: heat(lambda, d1),
            efficiency: efficiency(lambda, delta, d1, false),
            sigma2: fl.sigma2,
            ebar: fl.ebar,
            e_min: fl.e_min,
            e_max: fl.e_max,
            qfi: fl.qfi,
            sigma_q: match (fl.qfi, d2) {
                (Some(q), Some(d2)) => sigma_q(q, d1, d2),
                _ => None,
            },
            bounds: BoundReport::default(),
            valid: true,
            notes: Vec::new(),
        };
        p.bounds = check_bounds(&p);
        p
    }

    /// Replaces an undefined efficiency at `λ = 0` by its limit ½.
    pub fn with_efficiency_limit(mut self) -> Self {
        if self.lambda == 0.0 {
            self.efficiency = Some(0.5);
        }
        self
    }

    fn invalidate(&mut self, note: impl Into<String>) {
        self.valid = false;
        self.notes.push(note.into());
    }
}

/// `W = λΔ′ − Δ`.
pub fn work(lambda: f64, delta: f64, d1: f64) -> f64 {
    lambda * d1 - delta
}

/// `Q = λΔ′`.
pub fn heat(lambda: f64, d1: f64) -> f64 {
    lambda * d1
}

/// `η = 1 − Δ/(λΔ′)`. At `λ = 0` the value is only defined as the limit ½,
/// returned when `limit` is set.
pub fn efficiency(lambda: f64, delta: f64, d1: f64, limit: bool) -> Option<f64> {
    if lambda == 0.0 {
        return limit.then_some(0.5);
    }
    let q = heat(lambda, d1);
    (q != 0.0).then(|| 1.0 - delta / q)
}

/// Relative tolerance between the two variance routes.
pub const VARIANCE_ROUTE_TOL: f64 = 1e-9;

/// `σ² = ⟨H_loc²⟩ − ⟨H_loc⟩²` in the ground state, checked against
/// `λ²(⟨H_int²⟩ − ⟨H_int⟩²)`.
///
/// The routes differ by at most `2σ‖r‖ + ‖r‖²` for eigen-residual `r`, which
/// is allowed on top of the relative tolerance.
pub fn fluctuations_direct(ground: &GroundSolution, ops: &OperatorPair) -> Result<f64, ThermoError> {
    let (direct, interaction) = variance_routes(ground, ops);
    let r = ground.residual;
    let big = direct.max(interaction);
    let allowed = VARIANCE_ROUTE_TOL * big + 2.0 * big.sqrt() * r + r * r + f64::EPSILON * f64::EPSILON;
    if (direct - interaction).abs() > allowed {
        return Err(ThermoError::RouteDisagreement { direct, interaction });
    }
    Ok(direct)
}

/// `(⟨δH_loc²⟩, λ²⟨δH_int²⟩)` as centered two-pass sums.
pub fn variance_routes(ground: &GroundSolution, ops: &OperatorPair) -> (f64, f64) {
    let v = &ground.vector;
    let mean: f64 = v.iter().zip(ops.h_loc()).map(|(x, e)| x * x * e).sum();
    let direct: f64 = v.iter().zip(ops.h_loc()).map(|(x, e)| x * x * (e - mean) * (e - mean)).sum();
    let mut w = vec![0.0; v.len()];
    ops.apply_int(v, &mut w);
    let avg: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
    let spread: f64 = w.iter().zip(v).map(|(a, b)| (a - avg * b).powi(2)).sum();
    (direct, ground.lambda * ground.lambda * spread)
}

/// Channels with `c² ≤ c_tol` count as inaccessible: `c_tol = 1e-12·‖H_int‖²`.
pub fn c_tol(ops: &OperatorPair) -> f64 {
    let n = ops.int_norm_bound();
    1e-12 * n * n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbarSummary {
    pub ebar: f64,
    pub e_min: f64,
    pub e_max: f64,
}

/// Weighted harmonic mean `1/ē = Σ(c²/e)/Σc²` and the extreme accessible excitation energies.
pub fn ebar(channels: &[Channel], c_tol: f64) -> Result<EbarSummary, ThermoError> {
    let accessible: Vec<&Channel> = channels.iter().filter(|c| c.c2 > c_tol).collect();
    if accessible.is_empty() {
        return Err(ThermoError::NoAccessibleStates);
    }
    let total: f64 = channels.iter().map(|c| c.c2).sum();
    let inv: f64 = channels.iter().map(|c| c.c2 / c.e).sum();
    Ok(EbarSummary {
        ebar: total / inv,
        e_min: accessible.iter().map(|c| c.e).fold(f64::INFINITY, f64::min),
        e_max: accessible.iter().map(|c| c.e).fold(0.0, f64::max),
    })
}

/// `σ² = ½λ²Δ″ē`.
pub fn fluctuations_geometric(lambda: f64, d2: f64, ebar: f64) -> f64 {
    0.5 * lambda * lambda * d2 * ebar
}

/// `𝓘 = 4Σc²/e²`.
pub fn qfi(channels: &[Channel]) -> f64 {
    4.0 * channels.iter().map(|c| c.c2 / (c.e * c.e)).sum::<f64>()
}

/// `Σ_Q = 2𝓘(Δ′/Δ″)²`; undefined when `Δ′ = 0` or `Δ″ ≤ 0`.
pub fn sigma_q(qfi: f64, d1: f64, d2: f64) -> Option<f64> {
    (d1 != 0.0 && d2 > 0.0).then(|| 2.0 * qfi * (d1 / d2).powi(2))
}

/// Options for [`evaluate_point`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThermoOptions {
    pub eigen: EigenOptions,
    /// Skip spectral sums (`Δ″`, `ē`, `𝓘`) even when a dense solve is affordable.
    pub ground_only: bool,
    /// Report `η(0) = ½` instead of leaving it undefined.
    pub efficiency_limit: bool,
}

/// Full observable set for an operator pair at one coupling.
///
/// Solver failures are errors; degeneracy, route disagreement and missing
/// spectral data mark the point invalid with a note.
pub fn evaluate_point(ops: &OperatorPair, lambda: f64, opts: &ThermoOptions) -> Result<ThermoPoint, QvbfError> {
    let spectral_ok = !opts.ground_only && ops.dim() <= opts.eigen.dense_cap;
    let (ground, spectrum) = if spectral_ok {
        let (g, s) = solve_ground_sector(ops, lambda, &opts.eigen)?;
        (g, Some(s))
    } else {
        (ground_state_with(ops, lambda, &opts.eigen)?, None)
    };
    let delta = if lambda == 0.0 { 0.0 } else { ops.local_ground_energy() - ground.energy };
    let d1 = hellmann_feynman(ops, &ground);
    let mut notes = Vec::new();
    let mut fl = Fluctuations::default();
    match fluctuations_direct(&ground, ops) {
        Ok(s) => fl.sigma2 = Some(s),
        Err(e) => notes.push(e.to_string()),
    }
    let mut d2 = None;
    match spectrum {
        Some(s) => match delta_second_sos(&s, ops) {
            Ok(sos) => {
                d2 = Some(sos.d2);
                fl.qfi = Some(qfi(&sos.channels));
                match ebar(&sos.channels, c_tol(ops)) {
                    Ok(e) => {
                        fl.ebar = Some(e.ebar);
                        fl.e_min = Some(e.e_min);
                        fl.e_max = Some(e.e_max);
                    }
                    Err(e) => notes.push(e.to_string()),
                }
            }
            Err(e) => notes.push(e.to_string()),
        },
        None if !opts.ground_only => notes.push(format!(
            "spectral sums skipped: dimension {} exceeds dense cap {}",
            ops.dim(),
            opts.eigen.dense_cap
        )),
        None => {}
    }
    let mut p = ThermoPoint::assemble(lambda, delta, d1, d2, fl);
    if opts.efficiency_limit {
        p = p.with_efficiency_limit();
    }
    if ground.degenerate {
        p.invalidate(format!("degenerate ground state (gap {:e})", ground.gap));
    }
    for n in notes {
        p.invalidate(n);
    }
    Ok(p)
}

/// Root of `W″(λ) = Δ″(λ) + λΔ‴(λ)` on `bracket` by bisection to width `1e-8`.
pub fn critical_coupling(source: &QvbfSource, bracket: (f64, f64)) -> Result<f64, ThermoError> {
    let curvature = |x: f64| -> Result<f64, ThermoError> { Ok(source.d2(x)? + x * source.d3(x)?) };
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    let (f_lo, f_hi) = (curvature(lo)?, curvature(hi)?);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(ThermoError::NoSignChange { lo, hi, at_lo: f_lo, at_hi: f_hi });
    }
    let lo_sign = f_lo.signum();
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        let f = curvature(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if f.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Leading weak-coupling coefficients: `W ≈ w_coeff·λ²`, `η ≈ ½ + eta_slope·λ`,
/// `σ² ≈ sigma2_coeff·λ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakCoupling {
    /// `½Δ″(0)`.
    pub w_coeff: f64,
    /// `Δ‴(0)/(12Δ″(0))`.
    pub eta_slope: f64,
    /// `⟨0(0)|H_int²|0(0)⟩`.
    pub sigma2_coeff: f64,
    pub d2: f64,
    pub d3: f64,
}

/// Weak-coupling coefficients from perturbation theory in the local basis.
///
/// With `|g⟩` the local ground state, `φ = H_int|g⟩` and `u_n = φ_n/(E_n − E_g)`:
/// `Δ″(0) = 2Σφ_n²/(E_n − E_g)` and `Δ‴(0) = −6(⟨u|H_int|u⟩ − ⟨g|H_int|g⟩‖u‖²)`.
pub fn weak_expansion(ops: &OperatorPair) -> Result<WeakCoupling, ThermoError> {
    let g = ops.local_ground_index();
    let eg = ops.local_ground_energy();
    let dim = ops.dim();
    let mut phi = vec![0.0; dim];
    ops.for_each_int_entry(g, |j, v| phi[j] += v);
    let v00 = phi[g];
    let scale = eg.abs().max(1.0);
    let mut u = vec![0.0; dim];
    let mut d2 = 0.0;
    for (n, &p) in phi.iter().enumerate() {
        if n == g || p == 0.0 {
            continue;
        }
        let e = ops.h_loc()[n] - eg;
        if e <= 1e-12 * scale {
            return Err(ThermoError::DegenerateLocalGround);
        }
        u[n] = p / e;
        d2 += 2.0 * p * p / e;
    }
    if d2 == 0.0 {
        return Err(ThermoError::NoWeakCoupling);
    }
    let mut uvu = 0.0;
    let mut uu = 0.0;
    for (n, &un) in u.iter().enumerate() {
        if un == 0.0 {
            continue;
        }
        uu += un * un;
        ops.for_each_int_entry(n, |k, v| uvu += un * v * u[k]);
    }
    let d3 = -6.0 * (uvu - v00 * uu);
    Ok(WeakCoupling {
        w_coeff: 0.5 * d2,
        eta_slope: d3 / (12.0 * d2),
        sigma2_coeff: phi.iter().map(|p| p * p).sum(),
        d2,
        d3,
    })
}

/// `∫₀^λ xΔ″(x) dx`, which equals `W(λ)`.
pub fn work_integral(source: &QvbfSource, lambda: f64) -> Result<f64, ThermoError> {
    work_integral_with(source, lambda, &QuadOptions { abs_tol: 1e-13, rel_tol: 1e-8, max_intervals: 100 })
}

pub fn work_integral_with(source: &QvbfSource, lambda: f64, opts: &QuadOptions) -> Result<f64, ThermoError> {
    let r = integrate(|x| Ok::<_, QvbfError>(x * source.d2(x)?), 0.0, lambda, opts).map_err(|e| match e {
        QuadError::Integrand(e) => ThermoError::Qvbf(e),
        other => ThermoError::Quadrature(other.to_string()),
    })?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::ClosedFormModel;
    use crate::model::{build_spin_operators, SpinChainSpec};

    fn two_qubits() -> OperatorPair {
        build_spin_operators(&SpinChainSpec::two_qubits(1.0)).unwrap()
    }

    #[test]
    fn scalar_relations() {
        let s = 0.5f64.sqrt();
        assert!((work(1.0, 2f64.sqrt() - 1.0, s) - (1.0 - s)).abs() < 1e-15);
        assert_eq!(heat(0.0, 3.0), 0.0);
        assert_eq!(efficiency(0.0, 0.0, 0.0, false), None);
        assert_eq!(efficiency(0.0, 0.0, 0.0, true), Some(0.5));
        assert!((efficiency(1.5, 1.5f64.powi(4), 4.0 * 1.5f64.powi(3), false).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_point() {
        let p = evaluate_point(&two_qubits(), 1.0, &ThermoOptions::default()).unwrap();
        let expect = [
            (p.work, 1.0 - 0.5f64.sqrt()),
            (p.heat, 0.5f64.sqrt()),
            (p.efficiency.unwrap(), 2f64.sqrt() - 1.0),
            (p.sigma2.unwrap(), 0.5),
            (p.ebar.unwrap(), 2.0 * 2f64.sqrt()),
            (p.qfi.unwrap(), 0.25),
            (p.sigma_q.unwrap(), 2.0),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
        assert!(p.valid, "{:?}", p.notes);
        assert!(p.bounds.all_hold());
        assert!(p.bounds.cramer_rao.unwrap().margin.abs() < 1e-9);
    }

    #[test]
    fn zero_coupling_point() {
        let p = evaluate_point(&two_qubits(), 0.0, &ThermoOptions::default()).unwrap();
        assert_eq!((p.delta, p.work, p.heat, p.sigma2), (0.0, 0.0, 0.0, Some(0.0)));
        assert_eq!(p.efficiency, None);
        assert_eq!(p.bounds, BoundReport::default());
    }

    #[test]
    fn single_qubit_weak_coupling() {
        let ops = build_spin_operators(&SpinChainSpec::single_qubit_x(1.0)).unwrap();
        let w = weak_expansion(&ops).unwrap();
        assert!((w.w_coeff - 0.25).abs() < 1e-15);
        assert!((w.sigma2_coeff - 0.25).abs() < 1e-15);
        assert_eq!(w.eta_slope, 0.0);
        let q = weak_expansion(&two_qubits()).unwrap();
        assert_eq!(q.eta_slope, 0.0);
    }

    #[test]
    fn critical_coupling_two_qubits() {
        let s = QvbfSource::ClosedForm(ClosedFormModel::TwoQubits { omega: 1.0 });
        let lc = critical_coupling(&s, (0.2, 2.0)).unwrap();
        assert!((lc - 0.5f64.sqrt()).abs() < 1e-7, "{lc}");
        assert!(matches!(critical_coupling(&s, (1.0, 2.0)), Err(ThermoError::NoSignChange { .. })));
    }

    #[test]
    fn work_integral_oscillator() {
        let s = QvbfSource::ClosedForm(ClosedFormModel::SingleOscillator { omega: 1.0 });
        assert!((work_integral(&s, 0.8).unwrap() - 0.32).abs() < 1e-14);
        assert_eq!(work_integral(&s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ebar_needs_accessible_state() {
        let ch = [Channel { c2: 1e-30, e: 1.0 }];
        assert_eq!(ebar(&ch, 1e-12), Err(ThermoError::NoAccessibleStates));
    }
}
