//! Small numerical kernels shared by the engine code.

mod fd;
mod quad;

pub use fd::{central_derivative, FdEstimate, FdOptions};
pub use quad::{integrate, QuadError, QuadOptions, QuadResult};
