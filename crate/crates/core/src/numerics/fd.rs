//! Central finite differences with one Richardson level.

/// Base step sizes; the actual step is `h·max(1, |x|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Step for first and second derivatives.
    pub h_low: f64,
    /// Step for third derivatives.
    pub h_third: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h_low: 1e-3, h_third: 1e-2 }
    }
}

impl FdOptions {
    pub fn step(&self, order: u8, x: f64) -> f64 {
        let h0 = if order >= 3 { self.h_third } else { self.h_low };
        h0 * x.abs().max(1.0)
    }

    /// Outermost offset the stencil for `order` reaches from `x`.
    pub fn reach(&self, order: u8, x: f64) -> f64 {
        let h = self.step(order, x);
        if order >= 3 {
            2.0 * h
        } else {
            h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    /// `|D(h/2) − D(h)|/3`, the Richardson correction magnitude.
    pub error: f64,
}

fn stencil<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, x: f64, h: f64, order: u8) -> Result<f64, E> {
    Ok(match order {
        1 => (f(x + h)? - f(x - h)?) / (2.0 * h),
        2 => (f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h),
        _ => (f(x + 2.0 * h)? - 2.0 * f(x + h)? + 2.0 * f(x - h)? - f(x - 2.0 * h)?) / (2.0 * h * h * h),
    })
}

/// Derivative of order 1, 2 or 3 at `x`.
///
/// Each stencil is second-order accurate; combining steps `h` and `h/2` as
/// `(4D(h/2) − D(h))/3` cancels the leading error term.
///
/// # Panics
/// If `order` is not 1, 2 or 3.
pub fn central_derivative<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    x: f64,
    order: u8,
    opts: &FdOptions,
) -> Result<FdEstimate, E> {
    assert!((1..=3).contains(&order), "derivative order must be 1, 2 or 3");
    let h = opts.step(order, x);
    let coarse = stencil(&mut f, x, h, order)?;
    let fine = stencil(&mut f, x, 0.5 * h, order)?;
    Ok(FdEstimate { value: (4.0 * fine - coarse) / 3.0, error: (fine - coarse).abs() / 3.0 })
}
