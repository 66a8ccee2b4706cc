//! Matrix exponentials for 2x2 and 3x3 complex matrices.
//!
//! [`expm_small`] is general: `A` is divided by `2^k` until its 1-norm is at
//! most 1/2, a Taylor series is summed until terms drop below a quarter ulp,
//! and the result is squared `k` times. Each squaring doubles the rounding
//! error, so for a propagator with a large phase per step the unitarity defect
//! grows like `‖H‖·Δt·ε`. [`expm_hermitian`] avoids that for Hermitian `H` by
//! going through a Jacobi eigendecomposition, whose error does not scale with `‖H‖Δt`.
//! [`expm_isolated_level`] does the same for non-Hermitian 3x3 `H` whose third
//! diagonal entry sits far from the rest of the spectrum: an exact similarity
//! transform splits that level off, leaving a scalar phase and a 2x2 block of
//! modest norm for the Taylor series.

use num_complex::Complex64 as C64;

use crate::matrix::ComplexMatrix;

/// 1-norm below which the Taylor series is used without squaring.
pub const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 30;

pub fn expm_small(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let norm = a.norm_one();
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(C64::new((-squarings as f64).exp2(), 0.0));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = (term * scaled).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum + term;
        if term.norm_one() <= f64::EPSILON * 0.25 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// `exp(−i H h)` for Hermitian `H`.
pub fn expm_hermitian(hm: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let n = hm.dim();
    let (lambda, v) = hermitian_eigen(hm);
    let phases: Vec<C64> = lambda.iter().map(|&l| C64::from_polar(1.0, -l * h)).collect();
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let acc = (0..n).map(|k| v[i][k] * phases[k] * v[j][k].conj()).sum();
            out.set(i, j, acc);
        }
    }
    out
}

type M2 = [[C64; 2]; 2];

fn m2_inverse(a: &M2) -> Option<M2> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.norm() == 0.0 || !det.is_finite() {
        return None;
    }
    Some([[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]])
}

/// Required ratio between the distance of `H[2][2]` from the 2x2 block's centre
/// and the size of everything else.
const ISOLATION_RATIO: f64 = 20.0;
const RICCATI_MAX_ITER: usize = 60;

/// `exp(−i H h)` for a 3x3 `H = [[G, w], [r, z]]` whose corner `z` is isolated.
///
/// With `X` solving `X (z − G) = X w X − r` and `Y = (μ − G_eff)⁻¹ w`, where
/// `G_eff = G + w X` and `μ = z − X w`,
/// `H = L R diag(G_eff, μ) R⁻¹ L⁻¹` for `L = [[I, 0], [X, 1]]`, `R = [[I, Y], [0, 1]]`.
/// Returns `None` when `z` is not isolated enough for the iteration to converge.
pub fn expm_isolated_level(hm: &ComplexMatrix, h: f64) -> Option<ComplexMatrix> {
    if hm.dim() != 3 {
        return None;
    }
    let g: M2 = [[hm.get(0, 0), hm.get(0, 1)], [hm.get(1, 0), hm.get(1, 1)]];
    let w = [hm.get(0, 2), hm.get(1, 2)];
    let r = [hm.get(2, 0), hm.get(2, 1)];
    let z = hm.get(2, 2);
    let centre = (g[0][0] + g[1][1]) * 0.5;
    let spread = (g[0][0] - centre).norm() + (g[1][1] - centre).norm() + g[0][1].norm() + g[1][0].norm();
    let coupling = w[0].norm() + w[1].norm() + r[0].norm() + r[1].norm();
    if (z - centre).norm() < ISOLATION_RATIO * (spread + coupling) {
        return None;
    }
    let shifted = m2_inverse(&[[z - g[0][0], -g[0][1]], [-g[1][0], z - g[1][1]]])?;
    let row_times = |x: [C64; 2], m: &M2| [x[0] * m[0][0] + x[1] * m[1][0], x[0] * m[0][1] + x[1] * m[1][1]];

    let mut x = row_times([-r[0], -r[1]], &shifted);
    let mut converged = false;
    for _ in 0..RICCATI_MAX_ITER {
        let xw = x[0] * w[0] + x[1] * w[1];
        let next = row_times([xw * x[0] - r[0], xw * x[1] - r[1]], &shifted);
        let change = (next[0] - x[0]).norm() + (next[1] - x[1]).norm();
        let size = next[0].norm() + next[1].norm();
        x = next;
        if change <= f64::EPSILON * size || size == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    let g_eff: M2 = [
        [g[0][0] + w[0] * x[0], g[0][1] + w[0] * x[1]],
        [g[1][0] + w[1] * x[0], g[1][1] + w[1] * x[1]],
    ];
    let mu = z - (x[0] * w[0] + x[1] * w[1]);
    let gap_inv = m2_inverse(&[[mu - g_eff[0][0], -g_eff[0][1]], [-g_eff[1][0], mu - g_eff[1][1]]])?;
    let y = [gap_inv[0][0] * w[0] + gap_inv[0][1] * w[1], gap_inv[1][0] * w[0] + gap_inv[1][1] * w[1]];

    let block = expm_small(&ComplexMatrix::from_rows(&[&g_eff[0][..], &g_eff[1][..]]).scale(C64::new(0.0, -h)));
    let e: M2 = [[block.get(0, 0), block.get(0, 1)], [block.get(1, 0), block.get(1, 1)]];
    let phase = (mu * C64::new(0.0, -h)).exp();

    // L R diag(E, φ) R⁻¹ L⁻¹, with R⁻¹ = [[I, −Y], [0, 1]] and L⁻¹ = [[I, 0], [−X, 1]].
    // R diag(E, φ) R⁻¹ = [[E, φY − E Y], [0, φ]].
    let ey = [e[0][0] * y[0] + e[0][1] * y[1], e[1][0] * y[0] + e[1][1] * y[1]];
    let k = [phase * y[0] - ey[0], phase * y[1] - ey[1]];
    // Right-multiply by L⁻¹: top-left E − K X, top-right K, bottom-left −φ X, bottom-right φ.
    let kx: M2 = [[k[0] * x[0], k[0] * x[1]], [k[1] * x[0], k[1] * x[1]]];
    let m: [[C64; 3]; 3] = [
        [e[0][0] - kx[0][0], e[0][1] - kx[0][1], k[0]],
        [e[1][0] - kx[1][0], e[1][1] - kx[1][1], k[1]],
        [-phase * x[0], -phase * x[1], phase],
    ];
    // Left-multiply by L: the bottom row gains X times the top block.
    let mut out = ComplexMatrix::zeros(3);
    for j in 0..3 {
        out.set(0, j, m[0][j]);
        out.set(1, j, m[1][j]);
        out.set(2, j, x[0] * m[0][j] + x[1] * m[1][j] + m[2][j]);
    }
    Some(out)
}

const JACOBI_MAX_SWEEPS: usize = 30;

/// Cyclic complex Jacobi. Returns eigenvalues and eigenvectors (as columns).
/// Small eigenvalues keep relative accuracy even next to much larger ones.
pub fn hermitian_eigen(hm: &ComplexMatrix) -> ([f64; 3], [[C64; 3]; 3]) {
    let n = hm.dim();
    let zero = C64::new(0.0, 0.0);
    let mut a = [[zero; 3]; 3];
    let mut v = [[zero; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = hm.get(i, j);
        }
        v[i][i] = C64::new(1.0, 0.0);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                let mag = apq.norm();
                let (app, aqq) = (a[p][p].re, a[q][q].re);
                if mag == 0.0 || mag <= f64::EPSILON * 1e-3 * (app.abs() * aqq.abs()).sqrt() {
                    continue;
                }
                rotated = true;
                let w = apq.conj() / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (jpp, jpq, jqp, jqq) = (C64::new(c, 0.0), C64::new(s, 0.0), w * -s, w * c);
                for row in a.iter_mut().take(n) {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * jpp + xq * jqp;
                    row[q] = xp * jpq + xq * jqq;
                }
                for k in 0..n {
                    let (xp, xq) = (a[p][k], a[q][k]);
                    a[p][k] = jpp.conj() * xp + jqp.conj() * xq;
                    a[q][k] = jpq.conj() * xp + jqq.conj() * xq;
                }
                for row in v.iter_mut().take(n) {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * jpp + xq * jqp;
                    row[q] = xp * jpq + xq * jqq;
                }
                a[p][q] = zero;
                a[q][p] = zero;
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
            }
        }
        if !rotated {
            break;
        }
    }
    ([a[0][0].re, a[1][1].re, a[2][2].re], v)
}
