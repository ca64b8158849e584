//! Fluctuation bounds and the uncertainty chain.

use super::ThermoPoint;

/// Absolute slack for every bound; saturated bounds sit at roundoff.
pub const BOUND_TOL: f64 = 1e-9;

/// Outcome of one inequality `lhs ≥ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    /// `lhs − rhs`.
    pub margin: f64,
    pub holds: bool,
}

impl Verdict {
    fn at_least(lhs: f64, rhs: f64) -> Self {
        let margin = if lhs == rhs { 0.0 } else { lhs - rhs };
        Self { margin, holds: margin >= -BOUND_TOL }
    }
}

/// All bound checks at one point. `None` means the inputs are unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundReport {
    /// `σ² ≥ ½λ²Δ″e_min`.
    pub sandwich_lower: Option<Verdict>,
    /// `½λ²Δ″e_max ≥ σ²`, only for bounded accessible spectra.
    pub sandwich_upper: Option<Verdict>,
    /// `σ²/W² ≥ σ²/Q²`.
    pub tur_work: Option<Verdict>,
    /// `σ²/Q² ≥ 2/Σ_Q`.
    pub tur_heat: Option<Verdict>,
    /// `σ² ≥ (λΔ″)²/𝓘`.
    pub cramer_rao: Option<Verdict>,
    /// `Var[λ]·𝓘 ≥ 1` with `Var[λ] = σ²/(λΔ″)²`.
    pub estimation: Option<Verdict>,
}

impl BoundReport {
    pub fn verdicts(&self) -> [(&'static str, Option<Verdict>); 6] {
        [
            ("sandwich_lower", self.sandwich_lower),
            ("sandwich_upper", self.sandwich_upper),
            ("tur_work", self.tur_work),
            ("tur_heat", self.tur_heat),
            ("cramer_rao", self.cramer_rao),
            ("estimation", self.estimation),
        ]
    }

    /// True when every evaluated bound holds.
    pub fn all_hold(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.is_none_or(|v| v.holds))
    }

    /// Smallest margin among the evaluated bounds.
    pub fn worst_margin(&self) -> Option<f64> {
        self.verdicts().iter().filter_map(|(_, v)| v.map(|v| v.margin)).reduce(f64::min)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.verdicts().iter().filter(|(_, v)| v.is_some_and(|v| !v.holds)).map(|(n, _)| *n).collect()
    }
}

/// Evaluates every bound the point has data for. Nothing is checked at `λ = 0`.
pub fn check_bounds(p: &ThermoPoint) -> BoundReport {
    let mut r = BoundReport::default();
    let (Some(sigma2), Some(d2)) = (p.sigma2, p.d2) else {
        return r;
    };
    if p.lambda == 0.0 {
        return r;
    }
    let lam2 = p.lambda * p.lambda;
    let scale = 0.5 * lam2 * d2;
    if let Some(e_min) = p.e_min {
        r.sandwich_lower = Some(Verdict::at_least(sigma2, scale * e_min));
    }
    if let Some(e_max) = p.e_max {
        r.sandwich_upper = Some(Verdict::at_least(scale * e_max, sigma2));
    }
    let over_heat = sigma2 / (p.heat * p.heat);
    if p.work > 0.0 {
        r.tur_work = Some(Verdict::at_least(sigma2 / (p.work * p.work), over_heat));
    }
    if let Some(sq) = p.sigma_q {
        r.tur_heat = Some(Verdict::at_least(over_heat, 2.0 / sq));
    }
    if let Some(qfi) = p.qfi.filter(|&q| q > 0.0) {
        let slope = p.lambda * d2;
        r.cramer_rao = Some(Verdict::at_least(sigma2, slope * slope / qfi));
        if slope != 0.0 {
            r.estimation = Some(Verdict::at_least(sigma2 / (slope * slope) * qfi, 1.0));
        }
    }
    r
}
