//! Composite problems `F(x) = f(Ax) + sum_i g_i(x_i)` and their Fenchel duals
//! `F_D(w) = f^*(w) + sum_i g_i^*(-a_i^T w)`.
//!
//! Everything the selection rules need is expressed through the dual point
//! `w = grad f(Ax)`: the coordinate-wise duality gaps
//! `G_i = g_i^*(-a_i^T w) + g_i(x_i) + x_i a_i^T w` (which sum to
//! `F(x) + F_D(w)`) and the dual residues `kappa_i`.

mod parts;

pub use parts::{Interval, SeparablePart, SmoothPart};

use crate::error::{invalid, Error, Result};
use crate::sparse::{LabeledDataset, SparseColumnMatrix};

/// Gaps this far below zero (relative to the size of their terms) are
/// treated as rounding and clamped to zero.
const GAP_NEGATIVE_SLACK: f64 = 1e-12;

/// Whether coordinates index features of the data or datapoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `1/(2n) ||Y - Ax||^2 + lambda ||x||_1`
    Lasso,
    /// `1/n sum log(1 + exp(-y_j a^j x)) + lambda ||x||_1`
    LogisticL1,
    /// Dual of `1/n ||Y - Ax||^2 + lambda/2 ||x||^2`, one coordinate per datapoint.
    RidgeDual,
    /// `1/(2n) ||Y - Ax||^2 + lambda ||x||^2`, solved in the primal.
    L2LeastSquares,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::LogisticL1 => "logistic_l1",
            Self::RidgeDual => "ridge_dual",
            Self::L2LeastSquares => "l2_least_squares",
        }
    }
}

/// `kappa_i = u_bar - x_i`, with `u_bar` the point of
/// `partial g_i^*(-a_i^T w)` closest to `x_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualResidue {
    pub kappa: f64,
    pub u_bar: f64,
}

/// Primal data kept by the ridge dual so iterates can be mapped back.
#[derive(Debug, Clone)]
pub struct RidgePrimal {
    pub lambda: f64,
    pub data: LabeledDataset,
}

impl RidgePrimal {
    /// `1/n ||Y - Ax||^2 + lambda/2 ||x||^2`
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let n = self.data.n_samples() as f64;
        let ax = self.data.matrix.mul_vec(x)?;
        let loss: f64 = ax
            .iter()
            .zip(&self.data.labels)
            .map(|(v, y)| (y - v) * (y - v))
            .sum();
        let reg: f64 = x.iter().map(|v| v * v).sum();
        Ok(loss / n + 0.5 * self.lambda * reg)
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    kind: ProblemKind,
    direction: Direction,
    matrix: SparseColumnMatrix,
    smooth: SmoothPart,
    separable: SeparablePart,
    ridge: Option<RidgePrimal>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

/// Lasso with the L1 term restricted to `|x_i| <= B`, `B = F(0) / lambda`.
///
/// Any `x` with `|x_i| > B` has `F(x) > F(0)`, so the restriction does not
/// change the minimizer.
pub fn make_lasso(data: &LabeledDataset, lambda: f64) -> Result<Problem> {
    check_lambda(lambda)?;
    let n = data.n_samples() as f64;
    let f0 = data.labels.iter().map(|y| y * y).sum::<f64>() / (2.0 * n);
    if f0 == 0.0 {
        return Err(invalid(
            "all targets are zero; the Lasso solution is trivially 0",
        ));
    }
    Ok(Problem {
        kind: ProblemKind::Lasso,
        direction: Direction::Primal,
        matrix: data.matrix.clone(),
        smooth: SmoothPart::Quadratic {
            target: data.labels.clone(),
            curvature: 1.0 / n,
        },
        separable: SeparablePart::BoxedL1 {
            lambda,
            bound: f0 / lambda,
        },
        ridge: None,
    })
}

/// L1-regularized logistic regression; labels must be `+-1`.
/// The support bound is `B = F(0) / lambda = log(2) / lambda`.
pub fn make_logistic_l1(data: &LabeledDataset, lambda: f64) -> Result<Problem> {
    check_lambda(lambda)?;
    if !data.has_binary_labels() {
        return Err(invalid("logistic regression needs labels in {-1, +1}"));
    }
    Ok(Problem {
        kind: ProblemKind::LogisticL1,
        direction: Direction::Primal,
        matrix: data.matrix.clone(),
        smooth: SmoothPart::Logistic {
            labels: data.labels.clone(),
        },
        separable: SeparablePart::BoxedL1 {
            lambda,
            bound: std::f64::consts::LN_2 / lambda,
        },
        ridge: None,
    })
}

/// Ridge regression `P(x) = 1/n ||Y - Ax||^2 + lambda/2 ||x||^2`, solved
/// through its dual with one coordinate `alpha_j` per datapoint:
///
/// ```text
/// F(alpha) = ||A^T alpha||^2 / (2 lambda n^2) + 1/n sum_j (alpha_j^2 / 4 - y_j alpha_j)
/// ```
///
/// so the matrix is `A^T`, `f(v) = ||v||^2 / (2 lambda n^2)` and
/// `g_j(a) = a^2/(4n) - y_j a / n` (strongly convex with `mu = 1/(2n)`).
/// The dual of this problem is `F_D(w) = P(n w)`, the primal iterate is
/// `x = A^T alpha / (lambda n)` and `min F = -min P`.
pub fn make_ridge_dual(data: &LabeledDataset, lambda: f64) -> Result<Problem> {
    check_lambda(lambda)?;
    let n = data.n_samples() as f64;
    let d = data.n_features();
    Ok(Problem {
        kind: ProblemKind::RidgeDual,
        direction: Direction::Dual,
        matrix: data.matrix.transpose(),
        smooth: SmoothPart::Quadratic {
            target: vec![0.0; d],
            curvature: 1.0 / (lambda * n * n),
        },
        separable: SeparablePart::Quadratic {
            weight: 1.0 / (4.0 * n),
            linear: data.labels.iter().map(|y| -y / n).collect(),
        },
        ridge: Some(RidgePrimal {
            lambda,
            data: data.clone(),
        }),
    })
}

/// `1/(2n) ||Y - Ax||^2 + lambda ||x||^2` in the primal; every `F_i` is
/// differentiable, so the Gauss-Southwell rule applies directly.
pub fn make_l2_least_squares(data: &LabeledDataset, lambda: f64) -> Result<Problem> {
    check_lambda(lambda)?;
    let n = data.n_samples() as f64;
    Ok(Problem {
        kind: ProblemKind::L2LeastSquares,
        direction: Direction::Primal,
        matrix: data.matrix.clone(),
        smooth: SmoothPart::Quadratic {
            target: data.labels.clone(),
            curvature: 1.0 / n,
        },
        separable: SeparablePart::Quadratic {
            weight: lambda,
            linear: vec![0.0; data.n_features()],
        },
        ridge: None,
    })
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn matrix(&self) -> &SparseColumnMatrix {
        &self.matrix
    }

    pub fn smooth(&self) -> &SmoothPart {
        &self.smooth
    }

    pub fn separable(&self) -> &SeparablePart {
        &self.separable
    }

    /// Number of coordinates `d`.
    pub fn n_coords(&self) -> usize {
        self.matrix.n_cols()
    }

    /// Length `n` of `Ax` and `w`.
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn beta(&self) -> f64 {
        self.smooth.beta()
    }

    /// True when `F` is differentiable in every coordinate.
    pub fn is_differentiable(&self) -> bool {
        matches!(self.separable, SeparablePart::Quadratic { .. })
    }

    pub fn ridge_primal(&self) -> Option<&RidgePrimal> {
        self.ridge.as_ref()
    }

    /// Primal ridge iterate `A^T alpha / (lambda n)` for a dual iterate.
    pub fn primal_from_dual(&self, alpha: &[f64]) -> Option<Vec<f64>> {
        let ridge = self.ridge.as_ref()?;
        let n = ridge.data.n_samples() as f64;
        let scale = 1.0 / (ridge.lambda * n);
        let v = self.matrix.mul_vec(alpha).ok()?;
        Some(v.into_iter().map(|vi| vi * scale).collect())
    }

    fn check_dims(&self, x: &[f64], ax: &[f64]) -> Result<()> {
        if x.len() != self.n_coords() || ax.len() != self.dim() {
            return Err(invalid(format!(
                "expected x of length {} and Ax of length {}, got {} and {}",
                self.n_coords(),
                self.dim(),
                x.len(),
                ax.len()
            )));
        }
        Ok(())
    }

    /// `sum_i g_i(x_i)`
    pub fn separable_value(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| self.separable.value(i, xi))
            .sum()
    }

    /// `F(x) = f(Ax) + sum_i g_i(x_i)` given a valid `Ax`.
    pub fn primal_value(&self, x: &[f64], ax: &[f64]) -> Result<f64> {
        self.check_dims(x, ax)?;
        Ok(self.smooth.value(ax) + self.separable_value(x))
    }

    /// `F(x)`, computing `Ax` from scratch.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let ax = self.matrix.mul_vec(x)?;
        self.primal_value(x, &ax)
    }

    /// `F_D(w) = f^*(w) + sum_i g_i^*(-a_i^T w)`
    pub fn dual_value(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(invalid(format!(
                "dual point has length {}, expected {}",
                w.len(),
                self.dim()
            )));
        }
        let mut total = self.smooth.conjugate_value(w);
        for i in 0..self.n_coords() {
            total += self
                .separable
                .conjugate_value(i, -self.matrix.col_dot(i, w));
        }
        Ok(total)
    }

    /// `w = grad f(Ax)`
    pub fn dual_point(&self, ax: &[f64]) -> Vec<f64> {
        self.smooth.gradient(ax)
    }

    pub fn dual_residue(&self, i: usize, x_i: f64, a_i_dot_w: f64) -> DualResidue {
        let interval = self.separable.conjugate_subdiff(i, -a_i_dot_w);
        let u_bar = interval.clamp(x_i);
        DualResidue {
            kappa: u_bar - x_i,
            u_bar,
        }
    }

    /// `G_i = g_i^*(-a_i^T w) + g_i(x_i) + x_i a_i^T w`.
    ///
    /// Small negative values from rounding are clamped to zero; anything
    /// clearly negative means `w` is not the gradient at the current point.
    pub fn coordinate_gap(&self, i: usize, x_i: f64, a_i_dot_w: f64) -> Result<f64> {
        let conj = self.separable.conjugate_value(i, -a_i_dot_w);
        let g = self.separable.value(i, x_i);
        let cross = x_i * a_i_dot_w;
        let gap = conj + g + cross;
        if gap >= 0.0 {
            return Ok(gap);
        }
        let scale = 1.0f64.max(conj.abs() + g.abs() + cross.abs());
        if gap >= -GAP_NEGATIVE_SLACK * scale {
            Ok(0.0)
        } else {
            Err(Error::Consistency(format!(
                "coordinate gap G_{i} = {gap:e} is negative (x_i = {x_i}, a_i^T w = {a_i_dot_w})"
            )))
        }
    }

    /// `nabla_i F(x) = a_i^T w + g_i'(x_i)`, for differentiable problems.
    pub fn coordinate_gradient(&self, i: usize, x_i: f64, a_i_dot_w: f64) -> Option<f64> {
        self.separable.derivative(i, x_i).map(|g| a_i_dot_w + g)
    }

    /// `G(x) = sum_i G_i(x)` at `w = grad f(Ax)`, together with every `G_i`.
    pub fn duality_gap(&self, x: &[f64], ax: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_dims(x, ax)?;
        let w = self.dual_point(ax);
        let gaps = (0..self.n_coords())
            .map(|i| self.coordinate_gap(i, x[i], self.matrix.col_dot(i, &w)))
            .collect::<Result<Vec<_>>>()?;
        Ok((gaps.iter().sum(), gaps))
    }
}
