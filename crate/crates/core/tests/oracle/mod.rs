//! Reference computations shared by the test suites.
//!
//! `oracle_expm` sums a 60-term Taylor series in double-double arithmetic.
//! `faquad_ode` integrates the constant-s condition directly.

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use quadsim_core::ComplexMatrix;

/// Unevaluated sum `hi + lo` with |lo| ≤ ulp(hi)/2.
#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let hi = Dd::two_sum(s.hi, s.lo + t.hi);
        Dd::two_sum(hi.hi, hi.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::new(d).mul(Dd::new(q1)).neg());
        let q2 = r.hi / d;
        Dd::two_sum(q1, q2)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re.mul(o.re).add(self.im.mul(o.im).neg()),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }
}

pub fn oracle_expm(a: &ComplexMatrix) -> Vec<Vec<C64>> {
    let n = a.dim();
    let am: Vec<Vec<Cdd>> = (0..n)
        .map(|i| (0..n).map(|j| Cdd { re: Dd::new(a.get(i, j).re), im: Dd::new(a.get(i, j).im) }).collect())
        .collect();
    let ident = |i: usize, j: usize| if i == j { Cdd { re: Dd::new(1.0), im: Dd::default() } } else { Cdd::default() };
    let mut term: Vec<Vec<Cdd>> = (0..n).map(|i| (0..n).map(|j| ident(i, j)).collect()).collect();
    let mut sum = term.clone();
    for k in 1..=60 {
        let mut next = vec![vec![Cdd::default(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Cdd::default();
                for l in 0..n {
                    acc = acc.add(term[i][l].mul(am[l][j]));
                }
                next[i][j] = Cdd { re: acc.re.div_f64(k as f64), im: acc.im.div_f64(k as f64) };
            }
        }
        term = next;
        for i in 0..n {
            for j in 0..n {
                sum[i][j] = sum[i][j].add(term[i][j]);
            }
        }
    }
    sum.iter().map(|row| row.iter().map(|z| C64::new(z.re.hi + z.re.lo, z.im.hi + z.im.lo)).collect()).collect()
}

pub fn relative_frobenius(got: &ComplexMatrix, want: &[Vec<C64>]) -> f64 {
    let n = got.dim();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            num += (got.get(i, j) - want[i][j]).norm_sqr();
            den += want[i][j].norm_sqr();
        }
    }
    (num / den).sqrt()
}

/// Composite Simpson rule on `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// FAQUAD trajectory obtained without the closed form: the constant s is fixed by
/// the boundary values through a quadrature, then dδ/dt = 2 s (δ² + Ω²)^{3/2} / Ω is
/// stepped with RK4.
pub struct FaquadOracle {
    pub s: f64,
    pub times: Vec<f64>,
    pub deltas: Vec<f64>,
}

pub fn faquad_ode(duration: f64, delta_m: f64, omega: f64, steps: usize) -> FaquadOracle {
    let g = |d: f64| omega / (d * d + omega * omega).powf(1.5);
    let area = simpson(g, -delta_m, delta_m, 2_000_000);
    let s = area / (2.0 * duration);
    let rhs = |d: f64| 2.0 * s * (d * d + omega * omega).powf(1.5) / omega;
    let dt = duration / steps as f64;
    let mut d = -delta_m;
    let mut times = vec![0.0];
    let mut deltas = vec![d];
    for k in 0..steps {
        let k1 = rhs(d);
        let k2 = rhs(d + 0.5 * dt * k1);
        let k3 = rhs(d + 0.5 * dt * k2);
        let k4 = rhs(d + dt * k3);
        d += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        times.push((k + 1) as f64 * dt);
        deltas.push(d);
    }
    FaquadOracle { s, times, deltas }
}
