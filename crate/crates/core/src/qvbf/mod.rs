//! The bending function `Δ(λ) = E₀(0) − E₀(λ)` and its derivatives.
//!
//! Operator sources use exact routes: Hellmann–Feynman for `Δ′` and the
//! spectral sum `Δ″ = 2Σ_{n>0} |⟨n|H_int|0⟩|²/(E_n − E₀)`. Finite differences
//! serve as the cross-check and supply `Δ‴`.

mod table;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::closedform::{ClosedFormError, ClosedFormModel};
use crate::eigensolve::{
    ground_energy, ground_state_with, solve_ground_sector, EigenError, EigenOptions, GroundSolution, SpectralData,
};
use crate::model::OperatorPair;
use crate::numerics::{central_derivative, FdEstimate, FdOptions};

pub use table::{DeltaTable, TableError, MIN_TABLE_POINTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QvbfError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("ground state degenerate at λ = {lambda} (gap {gap:e})")]
    Degenerate { lambda: f64, gap: f64 },
    #[error("spectral sums need a dense spectrum; dimension {dim} exceeds {cap}")]
    SpectrumUnavailable { dim: usize, cap: usize },
}

/// How a derivative was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    HellmannFeynman,
    SumOverStates,
    FiniteDifference,
    ClosedForm,
    TableSpline,
}

impl fmt::Display for DerivativeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::HellmannFeynman => "hellmann_feynman",
            Self::SumOverStates => "sum_over_states",
            Self::FiniteDifference => "finite_difference",
            Self::ClosedForm => "closed_form",
            Self::TableSpline => "table_spline",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QvbfPoint {
    pub lambda: f64,
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: Option<f64>,
    /// Method behind `d1`, `d2` and `d3`.
    pub methods: [DerivativeMethod; 3],
}

/// Where `Δ` comes from.
#[derive(Debug, Clone)]
pub enum QvbfSource {
    Operators { ops: Arc<OperatorPair>, eigen: EigenOptions },
    ClosedForm(ClosedFormModel),
    Table(DeltaTable),
}

/// One excitation reachable from the ground state: `c² = |⟨n|H_int|0⟩|²`, `e = E_n − E₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    pub c2: f64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumOverStates {
    pub d2: f64,
    pub channels: Vec<Channel>,
}

impl QvbfSource {
    pub fn operators(ops: OperatorPair) -> Self {
        Self::Operators { ops: Arc::new(ops), eigen: EigenOptions::default() }
    }

    pub fn delta(&self, lambda: f64) -> Result<f64, QvbfError> {
        delta(self, lambda)
    }

    /// `Δ′`: Hellmann–Feynman, closed form or spline derivative.
    pub fn d1(&self, lambda: f64) -> Result<f64, QvbfError> {
        match self {
            Self::Operators { ops, eigen } => delta_prime_hf_with(ops, lambda, eigen),
            Self::ClosedForm(m) => Ok(m.values(lambda)?.d1),
            Self::Table(t) => Ok(t.eval(lambda, 1)?),
        }
    }

    /// `Δ″` and how it was obtained. Operator sources beyond the dense cap fall
    /// back to differencing the Hellmann–Feynman slope.
    pub fn d2_with_method(&self, lambda: f64) -> Result<(f64, DerivativeMethod), QvbfError> {
        match self {
            Self::Operators { ops, eigen } => {
                if ops.dim() <= eigen.dense_cap {
                    let (ground, spectral) = solve_ground_sector(ops, lambda, eigen)?;
                    ensure_nondegenerate(&ground)?;
                    Ok((delta_second_sos(&spectral, ops)?.d2, DerivativeMethod::SumOverStates))
                } else {
                    let fd = central_derivative(|x| self.d1(x), lambda, 1, &FdOptions::default())?;
                    Ok((fd.value, DerivativeMethod::FiniteDifference))
                }
            }
            Self::ClosedForm(m) => Ok((m.values(lambda)?.d2, DerivativeMethod::ClosedForm)),
            Self::Table(t) => Ok((t.eval(lambda, 2)?, DerivativeMethod::TableSpline)),
        }
    }

    pub fn d2(&self, lambda: f64) -> Result<f64, QvbfError> {
        Ok(self.d2_with_method(lambda)?.0)
    }

    /// `Δ‴` by differencing `Δ″` (or `Δ` itself for tables).
    pub fn d3(&self, lambda: f64) -> Result<f64, QvbfError> {
        let opts = FdOptions::default();
        match self {
            Self::Table(_) => Ok(derivatives_fd(self, lambda, 3, &opts)?.value),
            _ => Ok(central_derivative(|x| self.d2(x), lambda, 1, &opts)?.value),
        }
    }

    /// `Δ`, `Δ′`, `Δ″` and optionally `Δ‴` at one coupling.
    pub fn point(&self, lambda: f64, with_third: bool) -> Result<QvbfPoint, QvbfError> {
        let d1_method = match self {
            Self::Operators { .. } => DerivativeMethod::HellmannFeynman,
            Self::ClosedForm(_) => DerivativeMethod::ClosedForm,
            Self::Table(_) => DerivativeMethod::TableSpline,
        };
        let (d2, d2_method) = self.d2_with_method(lambda)?;
        Ok(QvbfPoint {
            lambda,
            delta: self.delta(lambda)?,
            d1: self.d1(lambda)?,
            d2,
            d3: if with_third { Some(self.d3(lambda)?) } else { None },
            methods: [d1_method, d2_method, DerivativeMethod::FiniteDifference],
        })
    }
}

fn ensure_nondegenerate(ground: &GroundSolution) -> Result<(), QvbfError> {
    if ground.degenerate {
        Err(QvbfError::Degenerate { lambda: ground.lambda, gap: ground.gap })
    } else {
        Ok(())
    }
}

/// `Δ(λ) = E₀(0) − E₀(λ)`; exactly zero at `λ = 0`.
pub fn delta(source: &QvbfSource, lambda: f64) -> Result<f64, QvbfError> {
    if lambda == 0.0 {
        if let QvbfSource::Table(t) = source {
            return Ok(t.eval(0.0, 0)?);
        }
        return Ok(0.0);
    }
    match source {
        QvbfSource::Operators { ops, eigen } => Ok(ops.local_ground_energy() - ground_energy(ops, lambda, eigen)?),
        QvbfSource::ClosedForm(m) => Ok(m.delta(lambda)?),
        QvbfSource::Table(t) => Ok(t.eval(lambda, 0)?),
    }
}

/// `Δ′ = −⟨0(λ)|H_int|0(λ)⟩` for a solved ground state.
pub fn hellmann_feynman(ops: &OperatorPair, ground: &GroundSolution) -> f64 {
    let mut w = vec![0.0; ops.dim()];
    ops.apply_int(&ground.vector, &mut w);
    -w.iter().zip(&ground.vector).map(|(a, b)| a * b).sum::<f64>()
}

/// `Δ′(λ)` by Hellmann–Feynman with default solver options.
pub fn delta_prime_hf(ops: &OperatorPair, lambda: f64) -> Result<f64, QvbfError> {
    delta_prime_hf_with(ops, lambda, &EigenOptions::default())
}

pub fn delta_prime_hf_with(ops: &OperatorPair, lambda: f64, eigen: &EigenOptions) -> Result<f64, QvbfError> {
    let ground = ground_state_with(ops, lambda, eigen)?;
    ensure_nondegenerate(&ground)?;
    Ok(hellmann_feynman(ops, &ground))
}

/// `Δ″ = 2Σ_{n>0} c_n²/e_n` from the ground sector's eigenpairs, with the channels.
///
/// States outside `spectral.support` do not couple to the ground state, so the
/// sector spectrum from [`solve_ground_sector`] suffices.
pub fn delta_second_sos(spectral: &SpectralData, ops: &OperatorPair) -> Result<SumOverStates, QvbfError> {
    let dim = ops.dim();
    let ground = spectral.state(0, dim);
    let mut w = vec![0.0; dim];
    ops.apply_int(&ground, &mut w);
    let e0 = spectral.energies[0];
    let mut channels = Vec::with_capacity(spectral.energies.len().saturating_sub(1));
    for n in 1..spectral.energies.len() {
        let c: f64 = spectral.support.iter().enumerate().map(|(r, &i)| spectral.states[(r, n)] * w[i]).sum();
        let e = spectral.energies[n] - e0;
        if e <= 0.0 {
            if c != 0.0 {
                return Err(QvbfError::Degenerate { lambda: spectral.lambda, gap: e });
            }
            continue;
        }
        channels.push(Channel { c2: c * c, e });
    }
    let d2 = 2.0 * channels.iter().map(|ch| ch.c2 / ch.e).sum::<f64>();
    Ok(SumOverStates { d2, channels })
}

/// Central finite difference of `Δ` of order 1–3 with one Richardson level.
pub fn derivatives_fd(source: &QvbfSource, lambda: f64, order: u8, opts: &FdOptions) -> Result<FdEstimate, QvbfError> {
    if let QvbfSource::Table(t) = source {
        let (lo, hi) = t.span();
        let reach = opts.reach(order, lambda);
        if lambda - reach < lo || lambda + reach > hi {
            return Err(TableError::OutOfRange { lambda, lo, hi }.into());
        }
    }
    central_derivative(|x| delta(source, x), lambda, order, opts)
}
