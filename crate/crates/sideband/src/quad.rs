//! Globally adaptive Gauss-Kronrod (7/15) quadrature for a few integrands sharing one
//! set of nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("quadrature did not reach tolerance after {intervals} intervals (error {error:e}, target {target:e})")]
pub struct QuadratureFailure {
    pub intervals: usize,
    pub error: f64,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights on the odd Kronrod nodes XK[1], XK[3], XK[5], XK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    // scalar priority: largest relative contribution to the total error budget
    key: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn gk15<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let fc = f(c);
    for n in 0..N {
        k[n] = WK[7] * fc[n];
        g[n] = WG[3] * fc[n];
    }
    for j in 0..7 {
        let x = h * XK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        for n in 0..N {
            let s = f1[n] + f2[n];
            k[n] += WK[j] * s;
            if j % 2 == 1 {
                g[n] += WG[j / 2] * s;
            }
        }
    }
    let mut val = [0.0; N];
    let mut err = [0.0; N];
    for n in 0..N {
        val[n] = k[n] * h;
        err[n] = ((k[n] - g[n]) * h).abs();
    }
    (val, err)
}

/// Integrate over consecutive intervals between sorted `points` until every component
/// meets max(abs, rel·|I|).
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<QuadResult<N>, QuadratureFailure> {
    let mut heap: BinaryHeap<Panel<N>> = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let push = |heap: &mut BinaryHeap<Panel<N>>, a: f64, b: f64, total: &mut [f64; N], total_err: &mut [f64; N]| {
        let (value, error) = gk15(&f, a, b);
        for n in 0..N {
            total[n] += value[n];
            total_err[n] += error[n];
        }
        heap.push(Panel { a, b, value, error, key: 0.0 });
    };
    for w in points.windows(2) {
        if w[1] > w[0] {
            push(&mut heap, w[0], w[1], &mut total, &mut total_err);
        }
    }
    let target = |total: &[f64; N]| -> [f64; N] {
        let mut t = [0.0; N];
        for n in 0..N {
            t[n] = tol.abs.max(tol.rel * total[n].abs());
        }
        t
    };
    // Rekey against the current budget.
    let rekey = |heap: BinaryHeap<Panel<N>>, t: &[f64; N]| -> BinaryHeap<Panel<N>> {
        heap.into_iter()
            .map(|mut p| {
                p.key = (0..N).map(|n| p.error[n] / t[n]).fold(0.0, f64::max);
                p
            })
            .collect()
    };
    let mut t = target(&total);
    heap = rekey(heap, &t);
    let mut since_rekey = 0;
    loop {
        let done = (0..N).all(|n| total_err[n] <= t[n]);
        if done {
            return Ok(QuadResult { value: total, error: total_err, intervals: heap.len() });
        }
        if heap.len() >= tol.max_intervals {
            let worst = (0..N)
                .map(|n| (total_err[n] / t[n], n))
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
                .1;
            return Err(QuadratureFailure { intervals: heap.len(), error: total_err[worst], target: t[worst] });
        }
        let p = heap.pop().expect("non-empty");
        for n in 0..N {
            total[n] -= p.value[n];
            total_err[n] -= p.error[n];
        }
        let m = 0.5 * (p.a + p.b);
        let mut fresh = BinaryHeap::new();
        push(&mut fresh, p.a, m, &mut total, &mut total_err);
        push(&mut fresh, m, p.b, &mut total, &mut total_err);
        for mut q in fresh {
            q.key = (0..N).map(|n| q.error[n] / t[n]).fold(0.0, f64::max);
            heap.push(q);
        }
        since_rekey += 1;
        if since_rekey >= 64 {
            // re-sum to shed accumulated rounding in the running totals
            total = [0.0; N];
            total_err = [0.0; N];
            for q in heap.iter() {
                for n in 0..N {
                    total[n] += q.value[n];
                    total_err[n] += q.error[n];
                }
            }
            t = target(&total);
            heap = rekey(heap, &t);
            since_rekey = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 5000 };

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| [x.powi(6), 1.0], &[0.0, 2.0], TOL).unwrap();
        assert_relative_eq!(r.value[0], 128.0 / 7.0, max_relative = 1e-14);
        assert_relative_eq!(r.value[1], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn narrow_lorentzian() {
        let w = 1e-6;
        let f = |x: f64| [w / std::f64::consts::PI / (x * x + w * w)];
        let pts = [-1.0, -10.0 * w, 0.0, 10.0 * w, 1.0];
        let r = integrate(f, &pts, TOL).unwrap();
        let exact = 2.0 * (1.0 / w).atan() / std::f64::consts::PI;
        assert_relative_eq!(r.value[0], exact, max_relative = 1e-10);
    }

    #[test]
    fn smooth_oscillatory() {
        let r = integrate(|x: f64| [x.sin().powi(2)], &[0.0, 100.0], TOL).unwrap();
        let exact = 50.0 - (200.0f64).sin() / 4.0;
        assert_relative_eq!(r.value[0], exact, max_relative = 1e-10);
    }

    #[test]
    fn reports_failure() {
        let tight = Tolerance { abs: 0.0, rel: 1e-15, max_intervals: 4 };
        assert!(integrate(|x: f64| [x.abs().sqrt()], &[-1.0, 1.0], tight).is_err());
    }
}
