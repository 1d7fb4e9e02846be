use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrate::{integrate, measure_period, IntegratorConfig, PeriodResult};
use crate::models::Family;
use crate::scalar::Real;
use crate::system::SystemDef;
use crate::variational::FundamentalField;

/// Return distance above which an orbit is reported as not closed.
pub const CLOSED_ORBIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum EntryStatus {
    Closed,
    /// A return was found but its distance exceeds the closing tolerance.
    NotClosed,
    /// No return within the horizon, or the integration failed.
    NoReturn(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEntry<T> {
    pub h: T,
    pub period: Option<T>,
    pub return_error: Option<T>,
    pub status: EntryStatus,
}

/// Measured periods along a one-parameter family, in increasing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMap<T> {
    pub family: String,
    pub entries: Vec<PeriodEntry<T>>,
}

impl<T: Real> PeriodMap<T> {
    /// `(h, T)` for the entries that returned.
    pub fn periods(&self) -> Vec<(T, T)> {
        self.entries
            .iter()
            .filter_map(|e| e.period.map(|p| (e.h, p)))
            .collect()
    }

    /// `max T - min T` over the entries that returned.
    pub fn spread(&self) -> Option<T> {
        let ps = self.periods();
        if ps.is_empty() {
            return None;
        }
        let (lo, hi) = ps
            .iter()
            .fold((T::infinity(), -T::infinity()), |(lo, hi), p| {
                (lo.min(p.1), hi.max(p.1))
            });
        Some(hi - lo)
    }

    pub fn all_closed(&self) -> bool {
        self.entries.iter().all(|e| e.status == EntryStatus::Closed)
    }
}

/// `n` equally spaced parameters of `[lo, hi]`.
pub fn parameter_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * T::from_count(i) / T::from_count(n - 1))
            .collect(),
    }
}

/// Measures the period at `n` equally spaced `h` in `range`; `config.t_max`
/// is the search horizon of each measurement. Entries are computed in
/// parallel and returned in order.
pub fn period_map<T: Real>(
    sys: &SystemDef<T>,
    family: &Family<T>,
    family_description: &str,
    range: (T, T),
    n: usize,
    config: &IntegratorConfig<T>,
) -> Result<PeriodMap<T>> {
    config.validate()?;
    if !(range.0 < range.1) && n > 1 {
        return Err(Error::InvalidParameter(
            "parameter range must be increasing".into(),
        ));
    }
    let entries = parameter_grid(range.0, range.1, n)
        .into_par_iter()
        .map(|h| {
            let (x0, y0) = family(h);
            let mut s0 = vec![x0];
            s0.extend_from_slice(&y0);
            match measure_period(sys, &s0, config) {
                Ok(r) => PeriodEntry {
                    h,
                    period: Some(r.period),
                    return_error: Some(r.return_error),
                    status: if r.return_error <= T::lit(CLOSED_ORBIT_TOL) {
                        EntryStatus::Closed
                    } else {
                        EntryStatus::NotClosed
                    },
                },
                Err(e) => PeriodEntry {
                    h,
                    period: None,
                    return_error: None,
                    status: EntryStatus::NoReturn(e.to_string()),
                },
            }
        })
        .collect();
    Ok(PeriodMap {
        family: family_description.to_string(),
        entries,
    })
}

/// `T'(h)` by central differences, one-sided at the ends, over the entries
/// that returned.
pub fn period_derivative<T: Real>(pm: &PeriodMap<T>) -> Result<Vec<(T, T)>> {
    let ps = pm.periods();
    if ps.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: ps.len(),
        });
    }
    let slope = |a: (T, T), b: (T, T)| (b.1 - a.1) / (b.0 - a.0);
    let last = ps.len() - 1;
    Ok((0..=last)
        .map(|i| {
            let d = if i == 0 {
                slope(ps[0], ps[1])
            } else if i == last {
                slope(ps[last - 1], ps[last])
            } else {
                slope(ps[i - 1], ps[i + 1])
            };
            (ps[i].0, d)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyResult<T: Real> {
    pub period: PeriodResult<T>,
    /// Fundamental matrix of the `(n+1)`-dimensional variational system
    /// after one period.
    pub matrix: DMatrix<T>,
    pub multipliers: Vec<Complex<T>>,
    /// `||M - I||` in the maximum-row-sum norm.
    pub dev_identity: T,
}

impl<T: Real> MonodromyResult<T> {
    pub fn max_multiplier_modulus(&self) -> T {
        self.multipliers
            .iter()
            .fold(T::zero(), |m, z| m.max((z.re * z.re + z.im * z.im).sqrt()))
    }
}

/// Maximum-row-sum norm.
pub fn inf_norm<T: Real>(m: &DMatrix<T>) -> T {
    m.row_iter()
        .map(|r| r.iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), |a, b| a.max(b))
}

/// Measures the period through `(x0, Y0)` (search horizon `config.t_max`)
/// and integrates the variational system from the identity over it.
pub fn monodromy<T: Real>(
    sys: &SystemDef<T>,
    x0: T,
    y0: &[T],
    config: &IntegratorConfig<T>,
) -> Result<MonodromyResult<T>> {
    let mut s0 = vec![x0];
    s0.extend_from_slice(y0);
    let period = measure_period(sys, &s0, config)?;
    let matrix = fundamental_matrix(
        sys,
        x0,
        y0,
        &DMatrix::identity(sys.dim(), sys.dim()),
        period.period,
        config,
    )?;
    let multipliers = matrix.complex_eigenvalues().iter().copied().collect();
    let dev_identity = inf_norm(&(&matrix - DMatrix::identity(sys.dim(), sys.dim())));
    Ok(MonodromyResult {
        period,
        matrix,
        multipliers,
        dev_identity,
    })
}

/// Solution at time `t` of the variational system along the characteristic
/// through `(x0, Y0)` with initial block `phi0`.
pub fn fundamental_matrix<T: Real>(
    sys: &SystemDef<T>,
    x0: T,
    y0: &[T],
    phi0: &DMatrix<T>,
    t: T,
    config: &IntegratorConfig<T>,
) -> Result<DMatrix<T>> {
    let field = FundamentalField::new(sys);
    let s0 = field.initial_state(x0, y0, phi0);
    let traj = integrate(&field, &s0, &(*config).with_t_max(t))?;
    traj.check()?;
    Ok(field.matrix(traj.final_state()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Isochronous,
    NonIsochronous,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Isochronous => "isochronous",
            Self::NonIsochronous => "non_isochronous",
            Self::Inconclusive => "inconclusive",
        }
    }
}

/// Default threshold of [`classify_isochronous`].
pub const DEFAULT_TOL_ISO: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct Classification<T: Real> {
    pub verdict: Verdict,
    pub tol_iso: T,
    pub period_map: PeriodMap<T>,
    pub spread: Option<T>,
    /// Monodromy at the low, middle and high parameter.
    pub monodromy: Vec<(T, MonodromyResult<T>)>,
    pub max_dev_identity: T,
    pub max_multiplier_modulus: T,
}

/// Isochronous when the period spread over the map is at most `tol_iso` and
/// the monodromy deviates from the identity by at most `10 tol_iso` at the
/// low, middle and high parameter; non-isochronous when the spread is at
/// least `100 tol_iso` or a multiplier exceeds `1 + 100 tol_iso` in modulus;
/// inconclusive otherwise (including maps with failed measurements).
pub fn classify_isochronous<T: Real>(
    sys: &SystemDef<T>,
    family: &Family<T>,
    family_description: &str,
    range: (T, T),
    n: usize,
    config: &IntegratorConfig<T>,
    tol_iso: T,
) -> Result<Classification<T>> {
    let pm = period_map(sys, family, family_description, range, n, config)?;
    let mid = (range.0 + range.1) * T::lit(0.5);
    let monodromy = [range.0, mid, range.1]
        .into_par_iter()
        .map(|h| {
            let (x0, y0) = family(h);
            monodromy(sys, x0, &y0, config).map(|m| (h, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_dev_identity = monodromy
        .iter()
        .fold(T::zero(), |a, (_, m)| a.max(m.dev_identity));
    let max_multiplier_modulus = monodromy
        .iter()
        .fold(T::zero(), |a, (_, m)| a.max(m.max_multiplier_modulus()));
    let spread = pm.spread();
    let complete = pm.entries.iter().all(|e| e.period.is_some());
    let hundred = T::lit(100.0);
    let verdict = match spread {
        Some(s) if complete && s <= tol_iso && max_dev_identity <= T::lit(10.0) * tol_iso => {
            Verdict::Isochronous
        }
        Some(s) if s >= hundred * tol_iso => Verdict::NonIsochronous,
        _ if max_multiplier_modulus > T::one() + hundred * tol_iso => Verdict::NonIsochronous,
        _ => Verdict::Inconclusive,
    };
    Ok(Classification {
        verdict,
        tol_iso,
        period_map: pm,
        spread,
        monodromy,
        max_dev_identity,
        max_multiplier_modulus,
    })
}
