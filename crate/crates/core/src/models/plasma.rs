use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::{Domain, FieldFn, JacobianFn, SystemDef};

/// `x' = x F`, `G' = F - d G F`, `F' = -G - F^2`.
pub fn plasma_radial<T: Real>(d: u32) -> Result<SystemDef<T>> {
    build(d, T::zero(), format!("plasma_radial(d={d})"))
}

/// As [`plasma_radial`] with an extra radial force `gamma |V|^2 / r`, which
/// changes the quadratic term to `F' = -G - (1 - gamma) F^2`.
pub fn plasma_calibrated<T: Real>(d: u32, gamma: T) -> Result<SystemDef<T>> {
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be finite, got {gamma}"
        )));
    }
    build(d, gamma, format!("plasma_calibrated(d={d}, gamma={gamma})"))
}

fn build<T: Real>(d: u32, gamma: T, name: String) -> Result<SystemDef<T>> {
    if d == 0 {
        return Err(Error::InvalidParameter(
            "dimension d must be at least 1".into(),
        ));
    }
    let dd = T::from_count(d as usize);
    let quad = T::one() - gamma;
    let field: FieldFn<T> = Arc::new(move |x, y, out| {
        let (g, f) = (y[0], y[1]);
        out[0] = x * f;
        out[1] = f - dd * g * f;
        out[2] = -g - quad * f * f;
        Ok(())
    });
    let jacobian: JacobianFn<T> = Arc::new(move |x, y, jac: &mut DMatrix<T>| {
        let (g, f) = (y[0], y[1]);
        let z = T::zero();
        jac.copy_from_slice(&[
            // column-major: column 0 (d/dx), column 1 (d/dG), column 2 (d/dF)
            f,
            z,
            z,
            z,
            -dd * f,
            -T::one(),
            x,
            T::one() - dd * g,
            -T::lit(2.0) * quad * f,
        ]);
        Ok(())
    });
    Ok(SystemDef::new(name, 2, Domain::unbounded(2), field).with_jacobian(jacobian))
}

/// Standard one-parameter family of the plasma models: `x0 = 1`,
/// `Y0 = (0, h)`.
pub fn plasma_family<T: Real>(h: T) -> (T, Vec<T>) {
    (T::one(), vec![T::zero(), h])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_partials_match() {
        let sys = plasma_calibrated::<f64>(3, 0.25).unwrap();
        let pts = vec![(1.3, vec![0.2, -0.4]), (-0.7, vec![-1.1, 0.9])];
        assert!(sys.partials_mismatch(&pts).unwrap() < 1e-8);
        assert!(sys.check_zero_equilibrium(20).unwrap());
    }

    #[test]
    fn d_zero_rejected() {
        assert!(matches!(
            plasma_radial::<f64>(0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
