use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::Interval;

use super::quadrature::adaptive_simpson;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Absolute tolerance of the inner integral.
pub const TAU_QUADRATURE_TOL: f64 = 1e-12;

/// A Lienard equation with its validity interval.
#[derive(Clone)]
pub struct LienardSpec<T> {
    f: ScalarFn<T>,
    g: ScalarFn<T>,
    g_prime0: T,
    validity: Interval<T>,
}

impl<T: Real> std::fmt::Debug for LienardSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LienardSpec")
            .field("g_prime0", &self.g_prime0)
            .field("validity", &self.validity)
            .finish()
    }
}

impl<T: Real> LienardSpec<T> {
    /// Checks `f(0) = g(0) = 0` and `g'(0) > 0`. When `g_prime0` is not given
    /// it is taken from a five-point central difference.
    pub fn new(
        f: ScalarFn<T>,
        g: ScalarFn<T>,
        g_prime0: Option<T>,
        validity: Interval<T>,
    ) -> Result<Self> {
        if !validity.contains(T::zero()) {
            return Err(Error::InvalidParameter(
                "validity interval must contain 0".into(),
            ));
        }
        let tiny = T::lit(1e-12);
        if f(T::zero()).abs() > tiny || g(T::zero()).abs() > tiny {
            return Err(Error::InvalidParameter(
                "Lienard data need f(0) = g(0) = 0".into(),
            ));
        }
        let g_prime0 = match g_prime0 {
            Some(v) => v,
            None => five_point_derivative(&*g, T::zero(), T::lit(1e-3)),
        };
        if !(g_prime0 > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "g'(0) must be positive, got {g_prime0}"
            )));
        }
        Ok(Self {
            f,
            g,
            g_prime0,
            validity,
        })
    }

    pub fn f(&self, z: T) -> T {
        (self.f)(z)
    }

    pub fn g(&self, z: T) -> T {
        (self.g)(z)
    }

    pub fn g_prime0(&self) -> T {
        self.g_prime0
    }

    pub fn validity(&self) -> Interval<T> {
        self.validity
    }
}

pub(crate) fn five_point_derivative<T: Real>(f: &dyn Fn(T) -> T, x: T, h: T) -> T {
    let two = T::lit(2.0);
    (f(x - two * h) - T::lit(8.0) * f(x - h) + T::lit(8.0) * f(x + h) - f(x + two * h))
        / (T::lit(12.0) * h)
}

/// Sabatini's function at `z`.
pub fn sabatini_tau<T: Real>(spec: &LienardSpec<T>, z: T) -> Result<T> {
    if !spec.validity.contains(z) {
        return Err(Error::InvalidParameter(format!(
            "z = {z} outside the validity interval"
        )));
    }
    let inner = adaptive_simpson(|s| s * spec.f(s), T::zero(), z, T::lit(TAU_QUADRATURE_TOL))?;
    Ok(inner * inner - z * z * z * (spec.g(z) - spec.g_prime0 * z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SabatiniVerdict {
    IsochronousCenter,
    NotIsochronous,
    /// `f` or `g` is not odd, so the criterion does not apply.
    HypothesesViolated,
}

impl SabatiniVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IsochronousCenter => "isochronous_center",
            Self::NotIsochronous => "not_isochronous",
            Self::HypothesesViolated => "hypotheses_violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SabatiniOutcome<T> {
    pub verdict: SabatiniVerdict,
    /// Largest `|tau(z)| / z^6` over the samples (not computed when the
    /// hypotheses fail).
    pub worst_ratio: Option<T>,
    /// Largest relative oddness defect of `f` and `g`.
    pub odd_defect: T,
}

/// Samples `z_k = k r / samples`, `k = 1..=samples` with `r` the half-width
/// of `(-r, r)`, checks oddness of `f` and `g` at `+-z_k`, then declares an
/// isochronous center iff `|tau(z_k)| <= tol z_k^6` everywhere.
pub fn sabatini_verdict<T: Real>(
    spec: &LienardSpec<T>,
    half_width: T,
    samples: usize,
    tol: T,
) -> Result<SabatiniOutcome<T>> {
    if samples == 0 {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    if !(spec.validity.contains(half_width) && spec.validity.contains(-half_width)) {
        return Err(Error::InvalidParameter(format!(
            "sampling window (-{half_width}, {half_width}) leaves the validity interval"
        )));
    }
    let grid: Vec<T> = (1..=samples)
        .map(|k| half_width * T::from_count(k) / T::from_count(samples))
        .collect();
    let mut odd_defect = T::zero();
    for &z in &grid {
        for h in [&spec.f, &spec.g] {
            let (p, m) = (h(z), h(-z));
            odd_defect = odd_defect.max((p + m).abs() / T::one().max(p.abs()).max(m.abs()));
        }
    }
    if odd_defect > tol {
        return Ok(SabatiniOutcome {
            verdict: SabatiniVerdict::HypothesesViolated,
            worst_ratio: None,
            odd_defect,
        });
    }
    let mut worst = T::zero();
    for &z in &grid {
        worst = worst.max(sabatini_tau(spec, z)?.abs() / z.powi(6));
    }
    let verdict = if worst <= tol {
        SabatiniVerdict::IsochronousCenter
    } else {
        SabatiniVerdict::NotIsochronous
    };
    Ok(SabatiniOutcome {
        verdict,
        worst_ratio: Some(worst),
        odd_defect,
    })
}

/// The Lienard form `z'' + (2+d) z z' + z + d z^3 = 0` of the radial plasma
/// oscillation in dimension `d`.
pub fn plasma_lienard<T: Real>(d: T) -> LienardSpec<T> {
    calibrated_plasma_lienard(d, T::zero())
}

/// Lienard form of the calibrated radial plasma oscillation:
/// `z'' + (2(1-gamma) + d) z z' + z + d (1-gamma) z^3 = 0`.
pub fn calibrated_plasma_lienard<T: Real>(d: T, gamma: T) -> LienardSpec<T> {
    let a = T::lit(2.0) * (T::one() - gamma) + d;
    let b = d * (T::one() - gamma);
    LienardSpec::new(
        Arc::new(move |z| a * z),
        Arc::new(move |z| z + b * z * z * z),
        Some(T::one()),
        Interval::unbounded(),
    )
    .expect("plasma Lienard data satisfy the hypotheses")
}

/// The relativistic cold-plasma oscillation with constant background `c`,
/// `P'' + c P / sqrt(1 + P^2) = 0`.
pub fn relativistic_lienard<T: Real>(c: T) -> Result<LienardSpec<T>> {
    LienardSpec::new(
        Arc::new(|_| T::zero()),
        Arc::new(move |p: T| c * p / (T::one() + p * p).sqrt()),
        Some(c),
        Interval::unbounded(),
    )
}
