use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::Interval;

use super::sabatini::ScalarFn;

/// Number of grid points used to validate the involution property.
pub const INVOLUTION_CHECK_POINTS: usize = 100;
/// Tolerance of the involution checks.
pub const INVOLUTION_TOL: f64 = 1e-8;

#[derive(Clone)]
pub struct InvolutionSpec<T: Real> {
    h: ScalarFn<T>,
    dh: Option<ScalarFn<T>>,
    j: Interval<T>,
    omega: T,
}

impl<T: Real> std::fmt::Debug for InvolutionSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvolutionSpec")
            .field("j", &self.j)
            .field("omega", &self.omega)
            .field("analytic_derivative", &self.dh.is_some())
            .finish()
    }
}

impl<T: Real> InvolutionSpec<T> {
    /// Validates `H(0) = 0`, `H'(0) = -1` and `H(H(x)) = x` on a grid of `J`
    /// (points whose image leaves `J` are skipped), all to `1e-8`.
    pub fn new(h: ScalarFn<T>, dh: Option<ScalarFn<T>>, j: Interval<T>, omega: T) -> Result<Self> {
        if !(omega > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {omega}"
            )));
        }
        if !j.contains(T::zero()) || !j.lo.is_finite() || !j.hi.is_finite() {
            return Err(Error::InvalidInvolution(
                "J must be a bounded interval containing 0".into(),
            ));
        }
        let spec = Self { h, dh, j, omega };
        let tol = T::lit(INVOLUTION_TOL);
        let h0 = spec.h(T::zero());
        if h0.abs() > tol {
            return Err(Error::InvalidInvolution(format!("H(0) = {h0}")));
        }
        let dh0 = spec.h_prime(T::zero());
        if (dh0 + T::one()).abs() > tol {
            return Err(Error::InvalidInvolution(format!(
                "H'(0) = {dh0}, expected -1"
            )));
        }
        let (lo, hi) = (j.lo, j.hi);
        let n = INVOLUTION_CHECK_POINTS;
        for k in 1..=n {
            let x = lo + (hi - lo) * T::from_count(k) / T::from_count(n + 1);
            let hx = spec.h(x);
            if !j.contains(hx) {
                continue;
            }
            let back = spec.h(hx);
            if (back - x).abs() > tol {
                return Err(Error::InvalidInvolution(format!("H(H({x})) = {back}")));
            }
        }
        Ok(spec)
    }

    pub fn h(&self, x: T) -> T {
        (self.h)(x)
    }

    /// `H'(x)`, analytic when supplied, central difference otherwise.
    pub fn h_prime(&self, x: T) -> T {
        match &self.dh {
            Some(d) => d(x),
            None => {
                let step = T::lit(1e-5) * T::one().max(x.abs());
                super::sabatini::five_point_derivative(&*self.h, x, step)
            }
        }
    }

    pub fn interval(&self) -> Interval<T> {
        self.j
    }

    pub fn omega(&self) -> T {
        self.omega
    }
}

/// Potential and restoring force built from an involution.
#[derive(Debug, Clone)]
pub struct InvolutionPotential<T: Real> {
    spec: InvolutionSpec<T>,
}

/// Builds `V(x) = (omega^2/8)(x - H(x))^2` and `g = V'`.
pub fn build_involution_potential<T: Real>(spec: &InvolutionSpec<T>) -> InvolutionPotential<T> {
    InvolutionPotential { spec: spec.clone() }
}

impl<T: Real> InvolutionPotential<T> {
    pub fn spec(&self) -> &InvolutionSpec<T> {
        &self.spec
    }

    pub fn v(&self, x: T) -> T {
        let w = self.spec.omega;
        let s = x - self.spec.h(x);
        w * w / T::lit(8.0) * s * s
    }

    pub fn g(&self, x: T) -> T {
        let w = self.spec.omega;
        w * w / T::lit(4.0) * (x - self.spec.h(x)) * (T::one() - self.spec.h_prime(x))
    }

    /// Period of the small oscillations, `2 pi / omega`, shared by all orbits.
    pub fn period(&self) -> T {
        T::two_pi() / self.spec.omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn mobius(a: f64) -> InvolutionSpec<f64> {
        InvolutionSpec::new(
            Arc::new(move |x: f64| -x / (1.0 + a * x)),
            Some(Arc::new(move |x: f64| {
                -1.0 / ((1.0 + a * x) * (1.0 + a * x))
            })),
            Interval::new(-1.0, 1.0),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn trivial_involution_is_harmonic() {
        let spec = InvolutionSpec::new(Arc::new(|x: f64| -x), None, Interval::new(-1.0, 1.0), 2.0)
            .unwrap();
        let pot = build_involution_potential(&spec);
        assert!((pot.v(0.3) - 2.0 * 0.09).abs() < 1e-15);
        assert!((pot.g(0.3) - 1.2).abs() < 1e-9);
        assert!((pot.period() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn mobius_involution_force() {
        let pot = build_involution_potential(&mobius(0.3));
        let x: f64 = 0.4;
        let h = -x / (1.0 + 0.3 * x);
        let dh = -1.0 / (1.0 + 0.3 * x).powi(2);
        assert!((pot.g(x) - 0.25 * (x - h) * (1.0 - dh)).abs() < 1e-15);
        // g'(0) = omega^2.
        let slope = (pot.g(1e-6) - pot.g(-1e-6)) / 2e-6;
        assert!((slope - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_involutions() {
        let not_self_inverse = InvolutionSpec::<f64>::new(
            Arc::new(|x: f64| -x - x * x),
            None,
            Interval::new(-0.5, 0.5),
            1.0,
        );
        assert!(matches!(not_self_inverse, Err(Error::InvalidInvolution(_))));
        let wrong_slope = InvolutionSpec::<f64>::new(
            Arc::new(|x: f64| -2.0 * x),
            None,
            Interval::new(-0.5, 0.5),
            1.0,
        );
        assert!(matches!(wrong_slope, Err(Error::InvalidInvolution(_))));
    }
}
