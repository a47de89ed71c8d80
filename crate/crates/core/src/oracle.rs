//! Dense brute-force reference computations for tests.
//!
//! Nothing here reads solver caches or reuses the problem's own evaluation
//! code: every quantity is rebuilt from a dense copy of `A` and the raw
//! problem parameters with textbook formulas.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::problems::{Problem, SeparablePart, SmoothPart};
use crate::sparse::{LabeledDataset, SparseColumnMatrix};

/// Largest `n * d` the oracle accepts.
pub const MAX_ORACLE_ENTRIES: usize = 1_000_000;

/// Target width of the golden-section bracket.
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DenseSnapshot {
    pub a: DMatrix<f64>,
    pub x: Vec<f64>,
    pub ax: Vec<f64>,
    pub w: Vec<f64>,
    pub f: f64,
    pub f_dual: f64,
    pub gaps: Vec<f64>,
    pub kappas: Vec<f64>,
}

impl DenseSnapshot {
    /// `F(x) + F_D(w)`.
    pub fn gap(&self) -> f64 {
        self.f + self.f_dual
    }

    pub fn gap_sum(&self) -> f64 {
        self.gaps.iter().sum()
    }
}

pub fn dense_matrix(m: &SparseColumnMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.n_rows(), m.n_cols());
    for j in 0..m.n_cols() {
        let (rows, vals) = m.column(j);
        for (&r, &v) in rows.iter().zip(vals) {
            out[(r, j)] = v;
        }
    }
    out
}

fn guard(p: &Problem) -> Result<()> {
    let entries = p.dim().saturating_mul(p.n_coords());
    if entries > MAX_ORACLE_ENTRIES {
        return Err(invalid(format!(
            "oracle refuses {entries} dense entries (limit {MAX_ORACLE_ENTRIES})"
        )));
    }
    Ok(())
}

fn ln1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

fn f_value(smooth: &SmoothPart, v: &[f64]) -> f64 {
    match smooth {
        SmoothPart::Quadratic { target, curvature } => {
            let sq: f64 = v.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
            0.5 * curvature * sq
        }
        SmoothPart::Logistic { labels } => {
            let n = labels.len() as f64;
            v.iter()
                .zip(labels)
                .map(|(&vj, &y)| ln1p_exp(-y * vj))
                .sum::<f64>()
                / n
        }
    }
}

fn f_gradient(smooth: &SmoothPart, v: &[f64]) -> Vec<f64> {
    match smooth {
        SmoothPart::Quadratic { target, curvature } => v
            .iter()
            .zip(target)
            .map(|(a, b)| curvature * (a - b))
            .collect(),
        SmoothPart::Logistic { labels } => {
            let n = labels.len() as f64;
            v.iter()
                .zip(labels)
                .map(|(&vj, &y)| -y / (1.0 + (y * vj).exp()) / n)
                .collect()
        }
    }
}

fn f_conjugate(smooth: &SmoothPart, w: &[f64]) -> f64 {
    match smooth {
        SmoothPart::Quadratic { target, curvature } => {
            let ww: f64 = w.iter().map(|a| a * a).sum();
            let wt: f64 = w.iter().zip(target).map(|(a, b)| a * b).sum();
            ww / (2.0 * curvature) + wt
        }
        SmoothPart::Logistic { labels } => {
            let n = labels.len() as f64;
            let mut total = 0.0;
            for (&wj, &y) in w.iter().zip(labels) {
                let p = -n * wj * y;
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return f64::INFINITY;
                }
                let p = p.clamp(0.0, 1.0);
                total += plogp(p) + plogp(1.0 - p);
            }
            total / n
        }
    }
}

fn g_value(sep: &SeparablePart, i: usize, z: f64) -> f64 {
    match sep {
        SeparablePart::BoxedL1 { lambda, bound } => {
            if z.abs() > *bound {
                f64::INFINITY
            } else {
                lambda * z.abs()
            }
        }
        SeparablePart::Quadratic { weight, linear } => weight * z * z + linear[i] * z,
    }
}

fn g_conjugate(sep: &SeparablePart, i: usize, u: f64) -> f64 {
    match sep {
        SeparablePart::BoxedL1 { lambda, bound } => {
            if u.abs() <= *lambda {
                0.0
            } else {
                bound * (u.abs() - lambda)
            }
        }
        SeparablePart::Quadratic { weight, linear } => (u - linear[i]).powi(2) / (4.0 * weight),
    }
}

/// Projection of `x_i` onto `partial g_i^*(u)`, minus `x_i`.
fn kappa(sep: &SeparablePart, i: usize, x_i: f64, u: f64) -> f64 {
    let (lo, hi) = match sep {
        SeparablePart::BoxedL1 { lambda, bound } => {
            if u > *lambda {
                (*bound, *bound)
            } else if u < -lambda {
                (-bound, -bound)
            } else if u == *lambda {
                (0.0, *bound)
            } else if u == -lambda {
                (-bound, 0.0)
            } else {
                (0.0, 0.0)
            }
        }
        SeparablePart::Quadratic { weight, linear } => {
            let z = (u - linear[i]) / (2.0 * weight);
            (z, z)
        }
    };
    x_i.max(lo).min(hi) - x_i
}

/// Recomputes every primal and dual quantity at `x` from scratch.
pub fn oracle_eval(p: &Problem, x: &[f64]) -> Result<DenseSnapshot> {
    guard(p)?;
    if x.len() != p.n_coords() {
        return Err(invalid(format!(
            "x has length {}, expected {}",
            x.len(),
            p.n_coords()
        )));
    }
    let a = dense_matrix(p.matrix());
    let xv = DVector::from_column_slice(x);
    let ax: Vec<f64> = (&a * &xv).iter().copied().collect();
    let w = f_gradient(p.smooth(), &ax);
    let atw = a.transpose() * DVector::from_column_slice(&w);
    let sep = p.separable();

    let g_sum: f64 = x.iter().enumerate().map(|(i, &z)| g_value(sep, i, z)).sum();
    let f = f_value(p.smooth(), &ax) + g_sum;
    let f_dual = f_conjugate(p.smooth(), &w)
        + (0..x.len())
            .map(|i| g_conjugate(sep, i, -atw[i]))
            .sum::<f64>();
    let gaps = (0..x.len())
        .map(|i| g_conjugate(sep, i, -atw[i]) + g_value(sep, i, x[i]) + x[i] * atw[i])
        .collect();
    let kappas = (0..x.len()).map(|i| kappa(sep, i, x[i], -atw[i])).collect();
    Ok(DenseSnapshot {
        a,
        x: x.to_vec(),
        ax,
        w,
        f,
        f_dual,
        gaps,
        kappas,
    })
}

/// `F(x)` by dense evaluation.
pub fn oracle_objective(p: &Problem, x: &[f64]) -> Result<f64> {
    Ok(oracle_eval(p, x)?.f)
}

/// Minimizes a convex function on `[lo, hi]` by golden-section search.
pub fn golden_section<F: Fn(f64) -> f64>(phi: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (phi(c), phi(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = phi(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = phi(d);
        }
    }
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|a, b| phi(*a).total_cmp(&phi(*b)))
        .expect("three candidates")
}

/// `argmin_z f(Ax + (z - x_i) a_i) + g_i(z)` by golden-section search over the
/// support `[-B, B]` (or an expanding bracket when `g_i` has full domain).
/// With a quadratic `f` the closed-form minimizer is returned after checking
/// it against the search.
pub fn oracle_coordinate_min(p: &Problem, x: &[f64], i: usize) -> Result<f64> {
    let phi = coordinate_objective(p, x, i)?;
    let (lo, hi) = match p.separable() {
        SeparablePart::BoxedL1 { bound, .. } => (-bound, *bound),
        SeparablePart::Quadratic { .. } => bracket(&phi, x[i]),
    };
    let z = golden_section(&phi, lo, hi, GOLDEN_TOL);

    if let SmoothPart::Quadratic { target, curvature } = p.smooth() {
        // phi(z) = q/2 z^2 + b z + g_i(z) + const, with r = Ax - y
        let a = dense_matrix(p.matrix());
        let col = a.column(i);
        let r = &a * DVector::from_column_slice(x) - DVector::from_column_slice(target);
        let q = curvature * col.dot(&col);
        let b = curvature * (col.dot(&r) - col.dot(&col) * x[i]);
        let closed = match p.separable() {
            SeparablePart::Quadratic { weight, linear } => -(b + linear[i]) / (q + 2.0 * weight),
            SeparablePart::BoxedL1 { lambda, bound } => {
                if q == 0.0 {
                    0.0
                } else {
                    let u = -b / q;
                    let shrunk = u.signum() * (u.abs() - lambda / q).max(0.0);
                    shrunk.clamp(-bound, *bound)
                }
            }
        };
        let scale = 1.0 + closed.abs();
        if (closed - z).abs() > 1e-6 * scale {
            return Err(Error::Consistency(format!(
                "golden-section minimizer {z} disagrees with closed form {closed}"
            )));
        }
        return Ok(closed);
    }
    Ok(z)
}

/// The 1D restriction of `F` along coordinate `i`, evaluated densely.
pub fn coordinate_objective(p: &Problem, x: &[f64], i: usize) -> Result<impl Fn(f64) -> f64> {
    guard(p)?;
    if i >= p.n_coords() || x.len() != p.n_coords() {
        return Err(invalid("coordinate or state out of range"));
    }
    let a = dense_matrix(p.matrix());
    let base: Vec<f64> = (&a * DVector::from_column_slice(x))
        .iter()
        .copied()
        .collect();
    let col: Vec<f64> = a.column(i).iter().copied().collect();
    let smooth = p.smooth().clone();
    let sep = p.separable().clone();
    let x_i = x[i];
    Ok(move |z: f64| {
        let v: Vec<f64> = base
            .iter()
            .zip(&col)
            .map(|(b, c)| b + (z - x_i) * c)
            .collect();
        f_value(&smooth, &v) + g_value(&sep, i, z)
    })
}

fn bracket<F: Fn(f64) -> f64>(phi: &F, center: f64) -> (f64, f64) {
    let mut step = 1.0 + center.abs();
    loop {
        let (lo, hi) = (center - step, center + step);
        let f0 = phi(center);
        if phi(lo) >= f0 && phi(hi) >= f0 {
            return (lo, hi);
        }
        step *= 2.0;
        if !step.is_finite() {
            return (lo, hi);
        }
    }
}

/// Minimum-norm least-squares solution of `A x = y` and its residual norm.
pub fn least_squares(a: &DMatrix<f64>, y: &[f64]) -> Result<(Vec<f64>, f64)> {
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let residual = (a * &x - b).norm();
    Ok((x.iter().copied().collect(), residual))
}

/// Ridge primal solution of `(2/n A^T A + lambda I) x = 2/n A^T Y`.
pub fn ridge_normal_equations(data: &LabeledDataset, lambda: f64) -> Result<Vec<f64>> {
    let a = dense_matrix(&data.matrix);
    let n = data.n_samples() as f64;
    let d = a.ncols();
    let lhs = a.transpose() * &a * (2.0 / n) + DMatrix::identity(d, d) * lambda;
    let rhs = a.transpose() * DVector::from_column_slice(&data.labels) * (2.0 / n);
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular ridge system".into()))?;
    Ok(x.iter().copied().collect())
}

/// Residual `(2/n A^T A + lambda I) x - 2/n A^T Y` of the ridge normal equations.
pub fn ridge_normal_residual(data: &LabeledDataset, lambda: f64, x: &[f64]) -> Vec<f64> {
    let a = dense_matrix(&data.matrix);
    let n = data.n_samples() as f64;
    let xv = DVector::from_column_slice(x);
    let r = a.transpose() * (&a * &xv - DVector::from_column_slice(&data.labels)) * (2.0 / n)
        + xv * lambda;
    r.iter().copied().collect()
}

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `grad f(v)` by dense formulas.
pub fn smooth_gradient(p: &Problem, v: &[f64]) -> Vec<f64> {
    f_gradient(p.smooth(), v)
}

/// `f(v)` by dense formulas.
pub fn smooth_value(p: &Problem, v: &[f64]) -> f64 {
    f_value(p.smooth(), v)
}

/// `f^*(w)` by dense formulas.
pub fn smooth_conjugate(p: &Problem, w: &[f64]) -> f64 {
    f_conjugate(p.smooth(), w)
}
