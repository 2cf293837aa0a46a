//! Adaptive Simpson quadrature for the handful of 1D integrals the crate
//! needs (density normalizations, edge CDFs).

use crate::error::{CoreError, Result};

fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    width_floor: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, fa, m, fm, flm);
    let right = simpson(m, fm, b, fb, frm);
    let err = left + right - whole;
    // a jump (e.g. a positive-definiteness boundary) never converges;
    // once the interval is negligible its contribution is too
    if err.abs() <= 15.0 * tol || b - a <= width_floor {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(CoreError::QuadratureFailure(format!(
            "max recursion depth reached on [{a}, {b}]"
        )));
    }
    let l = adapt(f, a, fa, m, fm, flm, left, 0.5 * tol, width_floor, depth - 1)?;
    let r = adapt(f, m, fm, b, fb, frm, right, 0.5 * tol, width_floor, depth - 1)?;
    Ok(l + r)
}

/// Integrate `f` over the finite interval `[a, b]` to absolute tolerance
/// `tol`. The interval is pre-split into panels so a narrow bulk cannot
/// hide between the first coarse sample points.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(CoreError::InvalidParameter(format!(
            "bad integration interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    const PANELS: usize = 32;
    let mut total = 0.0;
    let width = (b - a) / PANELS as f64;
    let width_floor = (b - a) * 1e-12;
    for p in 0..PANELS {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == PANELS { b } else { lo + width };
        let flo = f(lo);
        let fhi = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = simpson(lo, flo, hi, fhi, fm);
        total += adapt(
            &f,
            lo,
            flo,
            hi,
            fhi,
            fm,
            whole,
            tol / PANELS as f64,
            width_floor,
            60,
        )?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_bulk() {
        // ∫ exp(-x²/2)/√(2π) over [-8, 8] ≈ 1
        let c = (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate(|x| (-0.5 * x * x).exp() / c, -8.0, 8.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }
}
