//! Transverse-field Ising ring and harmonic oscillator chain.

use std::f64::consts::PI;

use super::{ellint_e, ClosedFormError};
use crate::numerics::{integrate, QuadError, QuadOptions};

/// Finite-ring momentum sums for the transverse-field Ising model.
#[derive(Debug, Clone, PartialEq)]
pub struct TfimSums {
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    /// `None` when no pair mode couples to the ground state (`λ` irrelevant, `N` tiny).
    pub ebar: Option<f64>,
    pub sigma2: f64,
    pub qfi: f64,
    /// Pair excitations `(c², e)`, one per `(p, −p)` pair.
    pub channels: Vec<(f64, f64)>,
}

/// Momentum sums over the antiperiodic grid `p = (2m+1)π/N`, `m = 0..N−1`.
///
/// With `Ω_p = √(ω² + λ² + 2ωλ cos p)`:
/// `Δ = ½Σ(Ω_p − ω)`, `Δ′ = ½Σ(λ + ω cos p)/Ω_p`, `Δ″ = (ω²/2)Σ sin²p/Ω_p³`,
/// `σ² = (λ²ω²/2)Σ sin²p/Ω_p²`. Each `(p, −p)` pair is one excitation of
/// energy `2Ω_p` with `c² = ω² sin²p/Ω_p²`.
pub fn tfim_momentum_sum(n: usize, omega: f64, lambda: f64) -> Result<TfimSums, ClosedFormError> {
    if n < 2 {
        return Err(ClosedFormError::BadParameter { model: "tfim_finite", name: "n", value: n as f64 });
    }
    let (mut delta, mut d1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut channels = Vec::with_capacity(n / 2);
    for m in 0..n {
        let p = (2 * m + 1) as f64 * PI / n as f64;
        let (sin, cos) = p.sin_cos();
        let big = (omega * omega + lambda * lambda + 2.0 * omega * lambda * cos).max(0.0).sqrt();
        if big == 0.0 {
            return Err(ClosedFormError::Numerical {
                model: "tfim_finite",
                reason: format!("gapless mode at p = {p}"),
            });
        }
        delta += (lambda * lambda + 2.0 * omega * lambda * cos) / (big + omega);
        d1 += (lambda + omega * cos) / big;
        let sin2 = sin * sin;
        s2 += sin2 / (big * big);
        s3 += sin2 / (big * big * big);
        s4 += sin2 / (big * big * big * big);
        // Partner of m is N−1−m; keep the lower index of each pair.
        if 2 * m + 1 < n {
            channels.push((omega * omega * sin2 / (big * big), 2.0 * big));
        }
    }
    Ok(TfimSums {
        delta: 0.5 * delta,
        d1: if lambda == 0.0 { 0.0 } else { 0.5 * d1 },
        d2: 0.5 * omega * omega * s3,
        ebar: (s3 > 0.0).then(|| 2.0 * s2 / s3),
        sigma2: 0.5 * lambda * lambda * omega * omega * s2,
        qfi: 0.5 * omega * omega * s4,
        channels,
    })
}

/// `Δ` and `σ²` from thermodynamic-limit expressions, scaled to `n` sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainLimit {
    pub delta: f64,
    pub sigma2: f64,
    /// `Δ′` diverges here (only the oscillator chain at `λ = 1`).
    pub singular: bool,
}

/// Relative distance from `λ = ω` inside which the elliptic form is replaced by quadrature.
pub const TFIM_KINK_WINDOW: f64 = 1e-6;

/// `Δ = (N/π)|λ−ω|E(−4λω/(λ−ω)²) − Nω/2` and `σ² = (N/4)·min(λ², ω²)`.
pub fn tfim_limit(n: usize, omega: f64, lambda: f64) -> Result<ChainLimit, ClosedFormError> {
    let nf = n as f64;
    let gap = lambda - omega;
    let delta = if gap.abs() < TFIM_KINK_WINDOW * omega {
        // ½⟨Ω_p − ω⟩ over the Brillouin zone.
        let integrand = |p: f64| {
            let big = (omega * omega + lambda * lambda + 2.0 * omega * lambda * p.cos()).max(0.0).sqrt();
            Ok::<_, ClosedFormError>((lambda * lambda + 2.0 * omega * lambda * p.cos()) / (big + omega))
        };
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 400 };
        let mean = integrate(integrand, 0.0, PI, &opts).map_err(|e| match e {
            QuadError::Integrand(e) => e,
            other => ClosedFormError::Numerical { model: "tfim_limit", reason: other.to_string() },
        })?;
        0.5 * nf * mean.value / PI
    } else {
        nf / PI * gap.abs() * ellint_e(-4.0 * lambda * omega / (gap * gap))? - 0.5 * omega * nf
    };
    let scale = lambda.abs().min(omega);
    Ok(ChainLimit { delta, sigma2: 0.25 * nf * scale * scale, singular: false })
}

/// Open oscillator chain: normal-mode stiffnesses and the resulting sums.
#[derive(Debug, Clone, PartialEq)]
pub struct OscChainSums {
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub sigma2: f64,
    /// One per normal mode: `c² = k₀²cos²θ/(2k_j)`, `e = 2√k_j`.
    pub channels: Vec<(f64, f64)>,
}

/// Mode stiffnesses `k_j = 2k₀(1 − λ cos θ_j)`, `θ_j = jπ/(N+1)`.
///
/// `Δ = ½Σ(√(2k₀) − √k_j)` and `σ² = (k₀/4)Σ(1/(1 − λcos θ_j) − 1)`.
pub fn osc_chain_finite(n: usize, k0: f64, lambda: f64) -> Result<OscChainSums, ClosedFormError> {
    const MODEL: &str = "osc_chain_finite";
    if n < 2 {
        return Err(ClosedFormError::BadParameter { model: MODEL, name: "n", value: n as f64 });
    }
    let top = (PI / (n as f64 + 1.0)).cos();
    if lambda.is_nan() || lambda.abs() * top >= 1.0 {
        return Err(ClosedFormError::Unstable { model: MODEL, lambda, reason: "stiffness matrix not positive definite" });
    }
    let root = (2.0 * k0).sqrt();
    let (mut delta, mut d1, mut d2, mut sigma2) = (0.0, 0.0, 0.0, 0.0);
    let mut channels = Vec::with_capacity(n);
    for j in 1..=n {
        let c = (j as f64 * PI / (n as f64 + 1.0)).cos();
        let shrink = 1.0 - lambda * c;
        let kj = 2.0 * k0 * shrink;
        let sq = kj.sqrt();
        delta += root * lambda * c / (1.0 + shrink.sqrt());
        d1 += k0 * c / sq;
        d2 += k0 * k0 * c * c / (kj * sq);
        sigma2 += lambda * c / shrink;
        channels.push((k0 * k0 * c * c / (2.0 * kj), 2.0 * sq));
    }
    Ok(OscChainSums { delta: 0.5 * delta, d1: 0.5 * d1, d2: 0.5 * d2, sigma2: 0.25 * k0 * sigma2, channels })
}

/// `Δ = N√(k₀/2)(1 − (2√(1+λ)/π)E(2λ/(1+λ)))`, `σ² = (k₀N/4)(1/√(1−λ²) − 1)`.
///
/// Defined for `−1 < λ ≤ 1`; at `λ = 1` the variance is infinite and the
/// result is flagged singular.
pub fn osc_chain_limit(n: usize, k0: f64, lambda: f64) -> Result<ChainLimit, ClosedFormError> {
    if !(lambda > -1.0 && lambda <= 1.0) {
        return Err(ClosedFormError::Unstable {
            model: "osc_chain_limit",
            lambda,
            reason: "requires −1 < λ ≤ 1",
        });
    }
    let nf = n as f64;
    let delta = nf * (0.5 * k0).sqrt() * (1.0 - 2.0 * (1.0 + lambda).sqrt() / PI * ellint_e(2.0 * lambda / (1.0 + lambda))?);
    if lambda == 1.0 {
        return Ok(ChainLimit { delta, sigma2: f64::INFINITY, singular: true });
    }
    let r = (1.0 - lambda * lambda).sqrt();
    let sigma2 = 0.25 * k0 * nf * lambda * lambda / (r * (1.0 + r));
    Ok(ChainLimit { delta, sigma2, singular: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfim_zero_coupling() {
        let s = tfim_momentum_sum(10, 1.0, 0.0).unwrap();
        assert_eq!(s.delta, 0.0);
        assert_eq!(s.sigma2, 0.0);
        let lim = tfim_limit(10, 1.0, 0.0).unwrap();
        assert!(lim.delta.abs() < 1e-14);
    }

    #[test]
    fn tfim_three_way_identity() {
        for &l in &[0.2, 0.9, 1.7] {
            let s = tfim_momentum_sum(16, 1.0, l).unwrap();
            let geometric = 0.5 * l * l * s.d2 * s.ebar.unwrap();
            assert!((geometric - s.sigma2).abs() <= 1e-12 * s.sigma2);
            let c2: f64 = s.channels.iter().map(|c| c.0).sum();
            assert!((l * l * c2 - s.sigma2).abs() <= 1e-12 * s.sigma2);
        }
    }

    #[test]
    fn tfim_kink_fallback_is_continuous() {
        let inside = tfim_limit(1, 1.0, 1.0).unwrap().delta;
        let outside = tfim_limit(1, 1.0, 1.0 + 2e-6).unwrap().delta;
        assert!((inside - (2.0 / PI - 0.5)).abs() < 1e-12, "{inside}");
        assert!((inside - outside).abs() < 1e-5);
    }

    #[test]
    fn tfim_variance_kink_is_continuous() {
        let below = tfim_limit(100, 1.0, 1.0 - 1e-12).unwrap().sigma2;
        let at = tfim_limit(100, 1.0, 1.0).unwrap().sigma2;
        let above = tfim_limit(100, 1.0, 1.0 + 1e-12).unwrap().sigma2;
        assert_eq!(at, 25.0);
        assert!((below - at).abs() < 1e-9 && (above - at).abs() < 1e-9);
    }

    #[test]
    fn chain_zero_coupling_and_stability() {
        let c = osc_chain_finite(8, 0.5, 0.0).unwrap();
        assert_eq!((c.delta, c.sigma2), (0.0, 0.0));
        assert!(osc_chain_finite(8, 0.5, 1.0).is_ok());
        assert!(osc_chain_finite(8, 0.5, 1.1).is_err());
        assert!(osc_chain_finite(8, 0.5, 0.99).is_ok());
    }

    #[test]
    fn chain_variance_matches_channel_sum() {
        let (k0, l) = (0.7, 0.6);
        let c = osc_chain_finite(12, k0, l).unwrap();
        let c2: f64 = c.channels.iter().map(|x| x.0).sum();
        assert!((l * l * c2 - c.sigma2).abs() < 1e-13);
        let inv: f64 = c.channels.iter().map(|x| x.0 / x.1).sum();
        assert!((2.0 * inv - c.d2).abs() < 1e-13);
    }

    #[test]
    fn chain_limit_at_one() {
        let lim = osc_chain_limit(1, 0.5, 1.0).unwrap();
        assert!(lim.singular);
        assert!((lim.delta - 0.5 * (1.0 - 2.0 * 2f64.sqrt() / PI)).abs() < 1e-14);
        assert!(osc_chain_limit(1, 0.5, 1.01).is_err());
        assert!(osc_chain_limit(1, 0.5, 0.0).unwrap().delta.abs() < 1e-15);
    }
}
