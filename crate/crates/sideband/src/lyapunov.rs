//! Steady state of dV/dt = AV + VAᵀ + B for small dense systems.
//!
//! The equation is vectorized, (I⊗A + A⊗I)·vec(V) = −vec(B), and solved directly.
//! Rates are divided by a characteristic frequency first so that the entries stay
//! near unity even when the physical rates span ten decades.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Residual a solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Largest accepted 1-norm condition estimate of the equilibrated Kronecker system.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("drift matrix is not Hurwitz (max Re λ = {max_re:e} rad/s)")]
    NotStable { max_re: f64 },
    #[error("ill-conditioned Lyapunov system (condition {condition:e}, residual {residual:e})")]
    IllConditioned { condition: f64, residual: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("quadrature ordering mismatch: expected {expected:?}, got {got:?}")]
    Ordering { expected: QuadratureOrder, got: QuadratureOrder },
}

/// Meaning of the coordinates of a drift/diffusion pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadratureOrder {
    /// (δX_a, δP_a, δq, δp)
    OptoMech,
    /// (δX_a, δP_a, δq, δp, δX_d, δP_d)
    OptoMechMirror,
    /// Anything else, e.g. test problems.
    Generic(usize),
}

impl QuadratureOrder {
    pub fn dim(self) -> usize {
        match self {
            QuadratureOrder::OptoMech => 4,
            QuadratureOrder::OptoMechMirror => 6,
            QuadratureOrder::Generic(n) => n,
        }
    }

    /// Index pairs (x, p) of conjugate quadratures.
    pub fn conjugate_pairs(self) -> &'static [(usize, usize)] {
        match self {
            QuadratureOrder::OptoMech => &[(0, 1), (2, 3)],
            QuadratureOrder::OptoMechMirror => &[(0, 1), (2, 3), (4, 5)],
            QuadratureOrder::Generic(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftDiffusion {
    pub order: QuadratureOrder,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Characteristic rate (rad/s) used to nondimensionalize before solving.
    pub time_scale: f64,
}

impl DriftDiffusion {
    pub fn new(
        order: QuadratureOrder,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        time_scale: f64,
    ) -> Result<Self, LyapunovError> {
        let n = order.dim();
        if a.shape() != (n, n) || b.shape() != (n, n) {
            return Err(LyapunovError::Shape(format!(
                "A is {:?}, B is {:?}, ordering wants {n}x{n}",
                a.shape(),
                b.shape()
            )));
        }
        let scale = b.amax().max(f64::MIN_POSITIVE);
        if (&b - b.transpose()).amax() > 1e-12 * scale {
            return Err(LyapunovError::Shape("B is not symmetric".into()));
        }
        if !(time_scale > 0.0) {
            return Err(LyapunovError::Shape(format!("time scale must be positive, got {time_scale}")));
        }
        Ok(Self { order, a, b, time_scale })
    }

    /// Unscaled problem of arbitrary dimension.
    pub fn generic(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, LyapunovError> {
        let n = a.nrows();
        Self::new(QuadratureOrder::Generic(n), a, b, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.order.dim()
    }

    /// Largest real part among the eigenvalues of A, in rad/s.
    pub fn max_real_eigenvalue(&self) -> f64 {
        balance(&(&self.a / self.time_scale))
            .complex_eigenvalues()
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
            * self.time_scale
    }

    /// Every eigenvalue lies left of the axis by more than rounding of its own modulus.
    /// A pair ±iΩ computed with a tiny real part is marginal; a slow but genuinely
    /// damped mode next to much faster ones is not.
    pub fn is_strictly_stable(&self) -> bool {
        self.eigenvalues().iter().all(|l| l.re < -4.0 * f64::EPSILON * l.norm())
    }

    pub fn eigenvalues(&self) -> Vec<num_complex::Complex64> {
        balance(&(&self.a / self.time_scale))
            .complex_eigenvalues()
            .iter()
            .map(|l| num_complex::Complex64::new(l.re, l.im) * self.time_scale)
            .collect()
    }

    pub fn is_hurwitz(&self) -> bool {
        self.max_real_eigenvalue() < 0.0
    }
}

/// Symmetric steady-state covariance V̄ᵢⱼ = ½⟨{Yᵢ,Yⱼ}⟩ − ⟨Yᵢ⟩⟨Yⱼ⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub order: QuadratureOrder,
    pub v: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Entry with 1-based indices, matching the usual V̄₁₄ notation.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.v[(i - 1, j - 1)]
    }

    pub fn expect_order(&self, order: QuadratureOrder) -> Result<(), LyapunovError> {
        if self.order == order {
            Ok(())
        } else {
            Err(LyapunovError::Ordering { expected: order, got: self.order })
        }
    }

    /// Checks symmetry, positive diagonal and det ≥ 1/4 on every conjugate pair.
    pub fn physicality_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let v = &self.v;
        let asym = (v - v.transpose()).amax();
        if asym > 1e-10 * v.amax() {
            out.push(format!("asymmetry {asym:e}"));
        }
        for i in 0..v.nrows() {
            if !(v[(i, i)] > 0.0) {
                out.push(format!("diagonal entry {i} = {}", v[(i, i)]));
            }
        }
        for &(x, p) in self.order.conjugate_pairs() {
            let det = v[(x, x)] * v[(p, p)] - v[(x, p)] * v[(p, x)];
            if det < 0.25 - 1e-9 * (v[(x, x)] * v[(p, p)]).max(1.0) {
                out.push(format!("block ({x},{p}) determinant {det} below 1/4"));
            }
        }
        out
    }
}

/// Diagonal similarity with power-of-two factors that evens out row and column norms
/// (Parlett-Reinsch). Eigenvalues are unchanged; their rounding error drops with the
/// norm of the balanced matrix.
fn balance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    for _ in 0..100 {
        let mut done = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| a[(j, i)].abs()).sum();
            let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                f *= 2.0;
                c *= 4.0;
            }
            while c > r * 2.0 {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
    a
}

fn lyapunov_operator(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(n * n, n * n);
    // Column-major vec: V[i, j] sits at i + n j.
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for k in 0..n {
                m[(row, k + n * j)] += a[(i, k)];
                m[(row, i + n * k)] += a[(j, k)];
            }
        }
    }
    m
}

fn apply(a: &DMatrix<f64>, v: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * v + v * a.transpose() + b
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// ‖AV + VAᵀ + B‖_F / ‖B‖_F (absolute when B = 0).
pub fn residual(dd: &DriftDiffusion, v: &DMatrix<f64>) -> f64 {
    let r = apply(&dd.a, v, &dd.b).norm();
    let nb = dd.b.norm();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Steady-state covariance of a Hurwitz drift/diffusion pair.
pub fn solve_steady(dd: &DriftDiffusion) -> Result<CovarianceMatrix, LyapunovError> {
    if !dd.is_strictly_stable() {
        return Err(LyapunovError::NotStable { max_re: dd.max_real_eigenvalue() });
    }
    let n = dd.dim();
    let a = &dd.a / dd.time_scale;
    let b = &dd.b / dd.time_scale;
    let m = lyapunov_operator(&a);

    // Row then column equilibration.
    let nn = n * n;
    let mut r = vec![1.0; nn];
    for (i, ri) in r.iter_mut().enumerate() {
        let big = m.row(i).amax();
        if big > 0.0 {
            *ri = 1.0 / big;
        }
    }
    let mut ms = m.clone();
    for i in 0..nn {
        for j in 0..nn {
            ms[(i, j)] *= r[i];
        }
    }
    let mut c = vec![1.0; nn];
    for (j, cj) in c.iter_mut().enumerate() {
        let big = ms.column(j).amax();
        if big > 0.0 {
            *cj = 1.0 / big;
        }
    }
    for j in 0..nn {
        for i in 0..nn {
            ms[(i, j)] *= c[j];
        }
    }

    let lu = ms.clone().lu();
    let inv = lu.try_inverse().ok_or(LyapunovError::IllConditioned {
        condition: f64::INFINITY,
        residual: f64::NAN,
    })?;
    let condition = norm1(&ms) * norm1(&inv);

    let solve_vec = |rhs: &DMatrix<f64>| -> DMatrix<f64> {
        let mut x = nalgebra::DVector::zeros(nn);
        for j in 0..n {
            for i in 0..n {
                x[i + n * j] = -rhs[(i, j)] * r[i + n * j];
            }
        }
        let y = &inv * x;
        let mut v = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                v[(i, j)] = y[i + n * j] * c[i + n * j];
            }
        }
        v
    };

    let mut v = solve_vec(&b);
    v = (&v + v.transpose()) * 0.5;
    let scaled = DriftDiffusion { order: dd.order, a: a.clone(), b: b.clone(), time_scale: 1.0 };
    let mut res = residual(&scaled, &v);
    for _ in 0..3 {
        if res <= RESIDUAL_TOL * 1e-2 {
            break;
        }
        let corr = solve_vec(&apply(&a, &v, &b));
        let candidate = {
            let w = &v + corr;
            (&w + w.transpose()) * 0.5
        };
        let cres = residual(&scaled, &candidate);
        if cres < res {
            v = candidate;
            res = cres;
        } else {
            break;
        }
    }
    if condition > CONDITION_LIMIT || res > RESIDUAL_TOL {
        return Err(LyapunovError::IllConditioned { condition, residual: res });
    }
    Ok(CovarianceMatrix { order: dd.order, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax() / a.amax().max(b.amax())
    }

    #[test]
    fn decoupled_ou() {
        let dd = DriftDiffusion::generic(-DMatrix::identity(4, 4), DMatrix::identity(4, 4) * 2.0).unwrap();
        let v = solve_steady(&dd).unwrap();
        assert!(max_rel(&v.v, &DMatrix::identity(4, 4)) < 1e-14);
    }

    #[test]
    fn rotating_mode() {
        // a11 = a22 = -1, a12 = 0.5, a21 = -0.5, B = I: the three scalar equations give
        // v11 = v22 = 1/2, v12 = 0.
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, -1.0]);
        let dd = DriftDiffusion::generic(a, DMatrix::identity(2, 2)).unwrap();
        let v = solve_steady(&dd).unwrap();
        assert!(max_rel(&v.v, &(DMatrix::identity(2, 2) * 0.5)) < 1e-14);
        assert!(residual(&dd, &v.v) < 1e-15);
    }

    #[test]
    fn residual_definition() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.5, -1.0]);
        let dd = DriftDiffusion::generic(a, DMatrix::identity(2, 2)).unwrap();
        assert_eq!(residual(&dd, &DMatrix::zeros(2, 2)), 1.0);
        let v = solve_steady(&dd).unwrap().v;
        let r1 = residual(&dd, &(&v + DMatrix::identity(2, 2) * 1e-3));
        let r2 = residual(&dd, &(&v + DMatrix::identity(2, 2) * 2e-3));
        // (A + Aᵀ)·εI has Frobenius norm 2√2 ε against ‖I‖ = √2.
        assert_relative_eq!(r1, 2e-3, max_relative = 1e-9);
        assert_relative_eq!(r2 / r1, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn unstable_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, -0.1]);
        let dd = DriftDiffusion::generic(a, DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(solve_steady(&dd), Err(LyapunovError::NotStable { .. })));
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let dd = DriftDiffusion::generic(a, DMatrix::identity(2, 2)).unwrap();
        assert!(matches!(solve_steady(&dd), Err(LyapunovError::NotStable { .. })));
    }

    #[test]
    fn shape_and_symmetry_checks() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(DriftDiffusion::generic(-DMatrix::identity(2, 2), b).is_err());
        assert!(DriftDiffusion::new(QuadratureOrder::OptoMech, DMatrix::identity(2, 2), DMatrix::identity(2, 2), 1.0).is_err());
    }

    #[test]
    fn ordering_is_checked() {
        let v = CovarianceMatrix { order: QuadratureOrder::OptoMech, v: DMatrix::identity(4, 4) };
        assert!(v.expect_order(QuadratureOrder::OptoMech).is_ok());
        assert!(v.expect_order(QuadratureOrder::OptoMechMirror).is_err());
    }

    fn stable_problem(n: usize, entries: &[f64], shift: f64, lower: &[f64]) -> DriftDiffusion {
        let m = DMatrix::from_iterator(n, n, entries.iter().copied().take(n * n));
        let max_re = m.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let a = m - DMatrix::identity(n, n) * (max_re + shift);
        let l = DMatrix::from_iterator(n, n, lower.iter().copied().take(n * n)).lower_triangle();
        let b = &l * l.transpose();
        DriftDiffusion::generic(a, b).unwrap()
    }

    fn problem() -> impl Strategy<Value = DriftDiffusion> {
        (2usize..=6, 0.05f64..3.0)
            .prop_flat_map(|(n, shift)| {
                (
                    Just(n),
                    prop::collection::vec(-3.0f64..3.0, n * n),
                    Just(shift),
                    prop::collection::vec(-2.0f64..2.0, n * n),
                )
            })
            .prop_map(|(n, e, s, l)| stable_problem(n, &e, s, &l))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1200))]
        #[test]
        fn random_stable_problems_solve(dd in problem()) {
            let v = solve_steady(&dd).unwrap();
            prop_assert!(residual(&dd, &v.v) <= RESIDUAL_TOL);
            prop_assert!((&v.v - v.v.transpose()).amax() <= 1e-12 * v.v.amax().max(1e-300));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn linear_in_diffusion(dd in problem(), extra in prop::collection::vec(-2.0f64..2.0, 36)) {
            let n = dd.dim();
            let l = DMatrix::from_iterator(n, n, extra.into_iter().take(n * n)).lower_triangle();
            let b2 = &l * l.transpose();
            let sum = DriftDiffusion::generic(dd.a.clone(), &dd.b + &b2).unwrap();
            let only2 = DriftDiffusion::generic(dd.a.clone(), b2).unwrap();
            let v1 = solve_steady(&dd).unwrap().v;
            let v2 = solve_steady(&only2).unwrap().v;
            let v12 = solve_steady(&sum).unwrap().v;
            prop_assert!(max_rel(&v12, &(v1 + v2)) <= 1e-9);
        }

        #[test]
        fn scale_invariant(dd in problem(), log_s in -6.0f64..6.0) {
            let s = 10f64.powf(log_s);
            let scaled = DriftDiffusion::generic(&dd.a * s, &dd.b * s).unwrap();
            let v = solve_steady(&dd).unwrap().v;
            let vs = solve_steady(&scaled).unwrap().v;
            prop_assert!(max_rel(&v, &vs) <= 1e-9);
        }
    }
}
