use crate::scalar::Real;

pub(crate) const STAGES: usize = 7;

pub(crate) const C: [f64; STAGES] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

pub(crate) const A: [[f64; 6]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    // Last row equals the 5th-order weights (FSAL).
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Difference between the 5th- and 4th-order weights.
pub(crate) const E: [f64; STAGES] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dense-output weights.
pub(crate) const D: [f64; STAGES] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Number of coefficient vectors stored per step for interpolation.
pub(crate) const DENSE_ORDER: usize = 5;

/// Builds the five interpolation coefficient vectors of one step into `out`
/// (layout: `[r1 | r2 | r3 | r4 | r5]`, each of length `dim`).
pub(crate) fn dense_coefficients<T: Real>(
    h: T,
    y0: &[T],
    y1: &[T],
    k: &[Vec<T>; STAGES],
    out: &mut [T],
) {
    let dim = y0.len();
    for i in 0..dim {
        let r1 = y0[i];
        let r2 = y1[i] - y0[i];
        let r3 = h * k[0][i] - r2;
        let r4 = r2 - h * k[6][i] - r3;
        let mut acc = T::zero();
        for s in 0..STAGES {
            if D[s] != 0.0 {
                acc += T::lit(D[s]) * k[s][i];
            }
        }
        let r5 = h * acc;
        out[i] = r1;
        out[dim + i] = r2;
        out[2 * dim + i] = r3;
        out[3 * dim + i] = r4;
        out[4 * dim + i] = r5;
    }
}

/// Evaluates the interpolant at fraction `theta` of the step.
#[inline]
pub(crate) fn dense_eval<T: Real>(coeffs: &[T], dim: usize, theta: T, out: &mut [T]) {
    let one_minus = T::one() - theta;
    for i in 0..dim {
        let r1 = coeffs[i];
        let r2 = coeffs[dim + i];
        let r3 = coeffs[2 * dim + i];
        let r4 = coeffs[3 * dim + i];
        let r5 = coeffs[4 * dim + i];
        out[i] = r1 + theta * (r2 + one_minus * (r3 + theta * (r4 + one_minus * r5)));
    }
}
