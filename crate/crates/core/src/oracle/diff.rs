use crate::error::{Error, Result};

/// Symmetric difference `(f(a+h) − f(a−h)) / 2h`, optionally combined with
/// the half step as `(4 D(h/2) − D(h)) / 3` to cancel the `h²` term.
pub fn central_diff<F>(f: F, at: f64, h: f64, richardson: bool) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    let sym = |h: f64| -> Result<Vec<f64>> {
        let hi = f(at + h)?;
        let lo = f(at - h)?;
        if hi.iter().chain(&lo).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("central difference evaluation"));
        }
        Ok(hi.iter().zip(&lo).map(|(a, b)| (a - b) / (2.0 * h)).collect())
    };
    let coarse = sym(h)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = sym(0.5 * h)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact() {
        let d = central_diff(|s| Ok(vec![s * s]), 3.0, 1e-3, false).unwrap();
        assert!((d[0] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let d = central_diff(|_| Ok(vec![4.0, -2.0]), 1.0, 1e-2, true).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);
    }

    #[test]
    fn richardson_improves_order() {
        let exact = 1.0f64.cos();
        let plain = central_diff(|s| Ok(vec![s.sin()]), 1.0, 1e-2, false).unwrap()[0];
        let rich = central_diff(|s| Ok(vec![s.sin()]), 1.0, 1e-2, true).unwrap()[0];
        assert!((rich - exact).abs() < 1e-3 * (plain - exact).abs());
    }

    #[test]
    fn non_finite_is_an_error() {
        assert!(central_diff(|s| Ok(vec![1.0 / s]), 0.0, 0.0, false).is_err());
        assert!(central_diff(|s| Ok(vec![(s - 1.0).ln()]), 1.0, 0.5, false).is_err());
    }
}
