//! Ground-state energy landscapes of measurement-driven quantum engines.
//!
//! An engine is a pair `H(λ) = H_loc + λ·H_int`. Everything observable follows
//! from the bending function `Δ(λ) = E₀(0) − E₀(λ)`: heat `λΔ′`, work `λΔ′ − Δ`,
//! efficiency, work fluctuations and the bounds relating them.
//!
//! * [`model`] builds operator pairs from declarative specs.
//! * [`eigensolve`] finds ground states and spectra (dense or Lanczos).
//! * [`qvbf`] evaluates `Δ` and its derivatives from operators, closed forms or tables.
//! * [`thermo`] turns those into engine observables and checks bounds.
//! * [`cyclesim`] samples the measurement cycle by Monte Carlo.
//! * [`closedform`] holds exact results for solvable models.
//! * [`catalog`] names the bundled models.

pub mod catalog;
pub mod closedform;
pub mod cyclesim;
pub mod eigensolve;
pub mod model;
pub mod numerics;
pub mod qvbf;
pub mod thermo;
