//! Simple harmonic oscillator, non-dimensional frequency response.

use crate::mclr::ForwardMap;
use crate::{Error, Result};

/// `|H| = 1/√((1−β²)² + (2ζβ)²)` for `H = 1/(1 − β² + 2iζβ)`.
pub fn sho_response(beta: f64, zeta: f64) -> Result<f64> {
    let re = 1.0 - beta * beta;
    let im = 2.0 * zeta * beta;
    let denom = re.hypot(im);
    if denom.is_nan() {
        return Err(Error::Numeric(format!("response undefined at β = {beta}, ζ = {zeta}")));
    }
    if denom == 0.0 {
        return Err(Error::Numeric(format!("undamped resonance at β = {beta}, ζ = {zeta}")));
    }
    Ok(1.0 / denom)
}

/// Inputs `(β, ζ)`, output `|H|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShoMap;

impl ForwardMap for ShoMap {
    fn input_dim(&self) -> usize {
        2
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        y[0] = sho_response(x[0], x[1])?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_values() {
        assert_eq!(sho_response(0.0, 0.1).unwrap(), 1.0);
        assert_relative_eq!(sho_response(1.0, 0.1).unwrap(), 5.0, max_relative = 1e-14);
        assert!(sho_response(1e4, 0.1).unwrap() < 1e-7);
        assert_eq!(sho_response(f64::INFINITY, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn undamped_resonance_is_an_error() {
        assert!(matches!(sho_response(1.0, 0.0), Err(Error::Numeric(_))));
        assert!(matches!(sho_response(-1.0, 0.0), Err(Error::Numeric(_))));
        assert!(sho_response(1.0, 1e-300).is_ok());
    }

    #[test]
    fn symmetric_in_damping_sign() {
        assert_eq!(sho_response(0.8, 0.1).unwrap(), sho_response(0.8, -0.1).unwrap());
    }
}
