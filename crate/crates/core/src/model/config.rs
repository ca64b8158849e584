//! TOML model configuration.
//!
//! ```toml
//! kind = "spin_chain"          # or "single_qubit_x"
//! n_qubits = 3
//! omega = 1.0                  # optional, defaults to 1
//! couplings = [[1, 2, 0.5], [2, 3, -0.25]]
//! ```
//!
//! Instead of `couplings`, a spin chain may request generated couplings:
//!
//! ```toml
//! [random]
//! seed = 7
//! ```
//!
//! Unknown keys are rejected.

use serde::Deserialize;

use super::{random_couplings, Couplings, ModelError, SpinChainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    SpinChain,
    SingleQubitX,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCouplings {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ConfigKind,
    pub n_qubits: Option<usize>,
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub couplings: Option<Vec<(usize, usize, f64)>>,
    pub random: Option<RandomCouplings>,
}

fn default_omega() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn into_spec(self) -> Result<SpinChainSpec, ModelError> {
        match self.kind {
            ConfigKind::SingleQubitX => {
                if self.couplings.is_some() || self.random.is_some() {
                    return Err(ModelError::Config(
                        "single_qubit_x takes no couplings".into(),
                    ));
                }
                if let Some(n) = self.n_qubits.filter(|&n| n != 1) {
                    return Err(ModelError::Config(format!(
                        "single_qubit_x has one qubit, got n_qubits = {n}"
                    )));
                }
                Ok(SpinChainSpec::single_qubit_x(self.omega))
            }
            ConfigKind::SpinChain => {
                let n = self
                    .n_qubits
                    .ok_or_else(|| ModelError::Config("spin_chain requires n_qubits".into()))?;
                match (self.couplings, self.random) {
                    (Some(triples), None) => Ok(SpinChainSpec::spin_chain(
                        self.omega,
                        Couplings::from_triples(n, triples)?,
                    )),
                    (None, Some(RandomCouplings { seed })) => {
                        let mut spec =
                            SpinChainSpec::spin_chain(self.omega, random_couplings(n, seed)?);
                        spec.seed = Some(seed);
                        Ok(spec)
                    }
                    _ => Err(ModelError::Config(
                        "spin_chain needs exactly one of `couplings` or `[random]`".into(),
                    )),
                }
            }
        }
    }
}

/// Parses a TOML model description into a spec.
pub fn parse_model_config(text: &str) -> Result<SpinChainSpec, ModelError> {
    let cfg: ModelConfig = toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
    cfg.into_spec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpinModelKind;

    #[test]
    fn explicit_couplings() {
        let spec = parse_model_config(
            "kind = \"spin_chain\"\nn_qubits = 3\nomega = 2.0\ncouplings = [[1, 2, 0.5], [2, 3, -1]]\n",
        )
        .unwrap();
        assert_eq!(spec.n_qubits, 3);
        assert_eq!(spec.omega, 2.0);
        assert_eq!(spec.couplings.get(1, 2), 0.5);
        assert_eq!(spec.couplings.get(2, 3), -1.0);
        assert_eq!(spec.couplings.get(1, 3), 0.0);
    }

    #[test]
    fn random_section() {
        let spec =
            parse_model_config("kind = \"spin_chain\"\nn_qubits = 4\n[random]\nseed = 9\n").unwrap();
        assert_eq!(spec.seed, Some(9));
        assert_eq!(spec.couplings, random_couplings(4, 9).unwrap());
    }

    #[test]
    fn single_qubit() {
        let spec = parse_model_config("kind = \"single_qubit_x\"\n").unwrap();
        assert_eq!(spec.kind, SpinModelKind::SingleQubitX);
        assert_eq!(spec.omega, 1.0);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_model_config("kind = \"spin_chain\"\nn_qubits = 2\nfield = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("field"), "{err}");
    }

    #[test]
    fn bad_pair_rejected() {
        assert!(parse_model_config("kind = \"spin_chain\"\nn_qubits = 2\ncouplings = [[2, 1, 0.5]]\n").is_err());
        assert!(parse_model_config("kind = \"spin_chain\"\nn_qubits = 2\n").is_err());
    }
}
