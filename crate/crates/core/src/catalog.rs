//! Named engine models with default parameters.
//!
//! Numeric models are spin Hamiltonians solved by diagonalization, exact
//! models evaluate closed forms and tables interpolate a sampled `Δ(λ)`.
//! Parameters are passed as `key = value` strings; unknown keys are rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::closedform::{eval_model, ClosedFormError, ClosedFormModel};
use crate::eigensolve::EigenOptions;
use crate::model::{build_spin_operators, fixture_10q, ModelError, OperatorPair, SpinChainSpec};
use crate::qvbf::{DeltaTable, QvbfError, QvbfSource, TableError};
use crate::thermo::{evaluate_point, Fluctuations, ThermoOptions, ThermoPoint};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("model `{model}` has no parameter `{key}`")]
    UnknownParam { model: &'static str, key: String },
    #[error("parameter `{key}`: cannot parse `{value}`")]
    BadParam { key: String, value: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Qvbf(#[from] QvbfError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// A model ready to evaluate.
#[derive(Debug, Clone)]
pub enum Engine {
    Numeric(Arc<OperatorPair>),
    Exact(ClosedFormModel),
    /// Tabulated `Δ(λ)`; no fluctuation data.
    Table(DeltaTable),
}

impl Engine {
    pub fn numeric(spec: &SpinChainSpec) -> Result<Self, CatalogError> {
        Ok(Self::Numeric(Arc::new(build_spin_operators(spec)?)))
    }

    /// All observables at `lambda`.
    pub fn evaluate(&self, lambda: f64, opts: &ThermoOptions) -> Result<ThermoPoint, CatalogError> {
        match self {
            Self::Numeric(ops) => Ok(evaluate_point(ops, lambda, opts)?),
            Self::Exact(model) => {
                let p = eval_model(model, lambda)?;
                Ok(if opts.efficiency_limit { p.with_efficiency_limit() } else { p })
            }
            Self::Table(t) => {
                let (delta, d1, d2) = (t.eval(lambda, 0)?, t.eval(lambda, 1)?, t.eval(lambda, 2)?);
                let p = ThermoPoint::assemble(lambda, delta, d1, Some(d2), Fluctuations::default());
                Ok(if opts.efficiency_limit { p.with_efficiency_limit() } else { p })
            }
        }
    }

    pub fn source(&self, eigen: EigenOptions) -> QvbfSource {
        match self {
            Self::Numeric(ops) => QvbfSource::Operators { ops: Arc::clone(ops), eigen },
            Self::Exact(model) => QvbfSource::ClosedForm(*model),
            Self::Table(t) => QvbfSource::Table(t.clone()),
        }
    }

    pub fn operators(&self) -> Option<&OperatorPair> {
        match self {
            Self::Numeric(ops) => Some(ops),
            Self::Exact(_) | Self::Table(_) => None,
        }
    }
}

/// One catalog entry.
#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their defaults, as strings.
    pub params: &'static [(&'static str, &'static str)],
    /// Model this one is checked against by `compare`, sharing parameters.
    pub oracle: Option<&'static str>,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin {
        name: "single_qubit",
        summary: "one qubit, (ω/2)σz + (λ/2)σx, diagonalized",
        params: &[("omega", "1")],
        oracle: Some("single_qubit_exact"),
    },
    Builtin {
        name: "two_qubits",
        summary: "two qubits, (ω/2)(σz₁ + σz₂) + λσx₁σx₂, diagonalized",
        params: &[("omega", "1")],
        oracle: Some("two_qubits_exact"),
    },
    Builtin {
        name: "fixture_10q",
        summary: "ten qubits with the reference all-to-all coupling table",
        params: &[],
        oracle: None,
    },
    Builtin {
        name: "tfim_chain",
        summary: "transverse-field Ising ring, diagonalized",
        params: &[("n", "8"), ("omega", "1")],
        oracle: Some("tfim_momentum"),
    },
    Builtin {
        name: "random_chain",
        summary: "all-to-all chain with unit-norm random couplings",
        params: &[("n", "8"), ("omega", "1"), ("seed", "0")],
        oracle: None,
    },
    Builtin {
        name: "single_qubit_exact",
        summary: "single qubit, closed form",
        params: &[("omega", "1")],
        oracle: None,
    },
    Builtin {
        name: "two_qubits_exact",
        summary: "two qubits, closed form",
        params: &[("omega", "1")],
        oracle: None,
    },
    Builtin {
        name: "tfim_momentum",
        summary: "transverse-field Ising ring, free-fermion momentum sums",
        params: &[("n", "2000"), ("omega", "1")],
        oracle: Some("tfim_limit"),
    },
    Builtin {
        name: "tfim_limit",
        summary: "transverse-field Ising ring, thermodynamic limit scaled to n sites",
        params: &[("n", "2000"), ("omega", "1")],
        oracle: None,
    },
    Builtin {
        name: "single_oscillator",
        summary: "driven harmonic oscillator",
        params: &[("omega", "1")],
        oracle: None,
    },
    Builtin {
        name: "two_osc_fixed_g",
        summary: "two oscillators, stiffness k0, fixed coupling g scaled by λ",
        params: &[("k0", "1"), ("g", "0.5")],
        oracle: None,
    },
    Builtin {
        name: "two_osc_direct",
        summary: "two oscillators of stiffness k coupled by λx₁x₂",
        params: &[("k", "1")],
        oracle: None,
    },
    Builtin {
        name: "osc_chain",
        summary: "open oscillator chain, normal-mode sums",
        params: &[("n", "2000"), ("k0", "1")],
        oracle: Some("osc_chain_limit"),
    },
    Builtin {
        name: "osc_chain_limit",
        summary: "oscillator chain, thermodynamic limit scaled to n sites",
        params: &[("n", "2000"), ("k0", "1")],
        oracle: None,
    },
];

pub fn find_builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

impl Builtin {
    /// Defaults merged with `overrides`; unknown keys are errors.
    pub fn resolve(&self, overrides: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>, CatalogError> {
        let mut values: BTreeMap<String, String> =
            self.params.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect();
        for (key, value) in overrides {
            if !values.contains_key(key) {
                return Err(CatalogError::UnknownParam { model: self.name, key: key.clone() });
            }
            values.insert(key.clone(), value.clone());
        }
        Ok(values)
    }
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CatalogError> {
        let raw = &self.0[key];
        raw.trim().parse().map_err(|_| CatalogError::BadParam { key: key.to_string(), value: raw.clone() })
    }
}

/// Builds a catalog model, applying `overrides` to its defaults.
pub fn build(name: &str, overrides: &BTreeMap<String, String>) -> Result<Engine, CatalogError> {
    let builtin = find_builtin(name).ok_or_else(|| CatalogError::UnknownModel(name.to_string()))?;
    let p = Params(builtin.resolve(overrides)?);
    let exact = |model: ClosedFormModel| -> Result<Engine, CatalogError> {
        model.validate()?;
        Ok(Engine::Exact(model))
    };
    match builtin.name {
        "single_qubit" => Engine::numeric(&SpinChainSpec::single_qubit_x(p.parse("omega")?)),
        "two_qubits" => Engine::numeric(&SpinChainSpec::two_qubits(p.parse("omega")?)),
        "fixture_10q" => Engine::numeric(&fixture_10q()),
        "tfim_chain" => Engine::numeric(&SpinChainSpec::ring(p.parse("n")?, p.parse("omega")?, 1.0)?),
        "random_chain" => Engine::numeric(&SpinChainSpec::random(p.parse("n")?, p.parse("omega")?, p.parse("seed")?)?),
        "single_qubit_exact" => exact(ClosedFormModel::SingleQubit { omega: p.parse("omega")? }),
        "two_qubits_exact" => exact(ClosedFormModel::TwoQubits { omega: p.parse("omega")? }),
        "tfim_momentum" => exact(ClosedFormModel::TfimFinite { n: p.parse("n")?, omega: p.parse("omega")? }),
        "tfim_limit" => exact(ClosedFormModel::TfimLimit { n: p.parse("n")?, omega: p.parse("omega")? }),
        "single_oscillator" => exact(ClosedFormModel::SingleOscillator { omega: p.parse("omega")? }),
        "two_osc_fixed_g" => exact(ClosedFormModel::TwoOscFixedG { k0: p.parse("k0")?, g: p.parse("g")? }),
        "two_osc_direct" => exact(ClosedFormModel::TwoOscDirect { k: p.parse("k")? }),
        "osc_chain" => exact(ClosedFormModel::OscChainFinite { n: p.parse("n")?, k0: p.parse("k0")? }),
        "osc_chain_limit" => exact(ClosedFormModel::OscChainLimit { n: p.parse("n")?, k0: p.parse("k0")? }),
        other => unreachable!("catalog entry `{other}` has no constructor"),
    }
}

/// Builds a catalog model with its default parameters.
pub fn build_default(name: &str) -> Result<Engine, CatalogError> {
    build(name, &BTreeMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for b in BUILTINS {
            build_default(b.name).unwrap_or_else(|e| panic!("{}: {e}", b.name));
            if let Some(o) = b.oracle {
                assert!(find_builtin(o).is_some());
            }
        }
    }

    #[test]
    fn overrides_are_checked() {
        let mut o = BTreeMap::new();
        o.insert("omega".to_string(), "2".to_string());
        assert!(build("two_qubits", &o).is_ok());
        o.insert("bogus".to_string(), "1".to_string());
        assert!(matches!(build("two_qubits", &o), Err(CatalogError::UnknownParam { .. })));
        let mut bad = BTreeMap::new();
        bad.insert("omega".to_string(), "x".to_string());
        assert!(matches!(build("two_qubits", &bad), Err(CatalogError::BadParam { .. })));
        assert!(matches!(build_default("nope"), Err(CatalogError::UnknownModel(_))));
        let mut neg = BTreeMap::new();
        neg.insert("k".to_string(), "-1".to_string());
        assert!(build("two_osc_direct", &neg).is_err());
    }

    #[test]
    fn exact_and_numeric_agree_on_two_qubits() {
        let opts = ThermoOptions::default();
        let a = build_default("two_qubits").unwrap().evaluate(0.8, &opts).unwrap();
        let b = build_default("two_qubits_exact").unwrap().evaluate(0.8, &opts).unwrap();
        assert!((a.work - b.work).abs() < 1e-13);
        assert!((a.sigma2.unwrap() - b.sigma2.unwrap()).abs() < 1e-13);
    }
}
