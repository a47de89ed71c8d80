/// Closed interval `[lo, hi]`, used for subdifferentials of `g_i^*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{-z})` without overflow.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn xlogx(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

/// The smooth term `f(v)`, `v = Ax`. Both variants are separable over the
/// entries of `v`, so `grad f(v)_j` depends on `v_j` only.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothPart {
    /// `f(v) = curvature / 2 * ||v - target||^2`
    Quadratic { target: Vec<f64>, curvature: f64 },
    /// `f(v) = 1/n * sum_j log(1 + exp(-y_j v_j))` with `y_j` in `{-1, +1}`.
    Logistic { labels: Vec<f64> },
}

impl SmoothPart {
    pub fn dim(&self) -> usize {
        match self {
            Self::Quadratic { target, .. } => target.len(),
            Self::Logistic { labels } => labels.len(),
        }
    }

    /// `f` is `1/beta`-smooth.
    pub fn beta(&self) -> f64 {
        match self {
            Self::Quadratic { curvature, .. } => 1.0 / curvature,
            // each logistic term has second derivative at most 1/4
            Self::Logistic { labels } => 4.0 * labels.len() as f64,
        }
    }

    pub fn component_value(&self, j: usize, v: f64) -> f64 {
        match self {
            Self::Quadratic { target, curvature } => {
                let r = v - target[j];
                0.5 * curvature * r * r
            }
            Self::Logistic { labels } => softplus(-labels[j] * v) / labels.len() as f64,
        }
    }

    pub fn component_derivative(&self, j: usize, v: f64) -> f64 {
        match self {
            Self::Quadratic { target, curvature } => curvature * (v - target[j]),
            Self::Logistic { labels } => {
                let y = labels[j];
                -y * sigmoid(-y * v) / labels.len() as f64
            }
        }
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        v.iter()
            .enumerate()
            .map(|(j, &vj)| self.component_value(j, vj))
            .sum()
    }

    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(j, &vj)| self.component_derivative(j, vj))
            .collect()
    }

    /// `f^*(w) = sup_v w^T v - f(v)`; `+inf` outside the domain.
    pub fn conjugate_value(&self, w: &[f64]) -> f64 {
        match self {
            Self::Quadratic { target, curvature } => w
                .iter()
                .zip(target)
                .map(|(&wj, &tj)| wj * tj + wj * wj / (2.0 * curvature))
                .sum(),
            Self::Logistic { labels } => {
                let n = labels.len() as f64;
                let mut total = 0.0;
                for (&wj, &y) in w.iter().zip(labels) {
                    // a = -sigma in (-1, 0) at a gradient; tolerate rounding at the ends
                    let mut a = n * wj * y;
                    if !(-1.0 - 1e-12..=1e-12).contains(&a) {
                        return f64::INFINITY;
                    }
                    a = a.clamp(-1.0, 0.0);
                    total += xlogx(-a) + xlogx(1.0 + a);
                }
                total / n
            }
        }
    }
}

/// The separable terms `g_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparablePart {
    /// `g_i(z) = lambda |z|` on `|z| <= bound`, `+inf` outside. The bounded
    /// support makes `g_i^*(u) = bound * max(|u| - lambda, 0)` Lipschitz.
    BoxedL1 { lambda: f64, bound: f64 },
    /// `g_i(z) = weight * z^2 + linear_i * z`, `2 * weight`-strongly convex.
    Quadratic { weight: f64, linear: Vec<f64> },
}

impl SeparablePart {
    pub fn value(&self, i: usize, z: f64) -> f64 {
        match self {
            Self::BoxedL1 { lambda, bound } => {
                if z.abs() <= *bound {
                    lambda * z.abs()
                } else {
                    f64::INFINITY
                }
            }
            Self::Quadratic { weight, linear } => weight * z * z + linear[i] * z,
        }
    }

    /// Strong convexity modulus `mu_i`.
    pub fn mu(&self, _i: usize) -> f64 {
        match self {
            Self::BoxedL1 { .. } => 0.0,
            Self::Quadratic { weight, .. } => 2.0 * weight,
        }
    }

    /// Radius `L_i` of the support when `g_i` is not strongly convex.
    pub fn support_bound(&self, _i: usize) -> Option<f64> {
        match self {
            Self::BoxedL1 { bound, .. } => Some(*bound),
            Self::Quadratic { .. } => None,
        }
    }

    pub fn conjugate_value(&self, i: usize, u: f64) -> f64 {
        match self {
            Self::BoxedL1 { lambda, bound } => bound * (u.abs() - lambda).max(0.0),
            Self::Quadratic { weight, linear } => {
                let s = u - linear[i];
                s * s / (4.0 * weight)
            }
        }
    }

    /// `partial g_i^*(u)`; a single point wherever `g_i^*` is differentiable.
    pub fn conjugate_subdiff(&self, i: usize, u: f64) -> Interval {
        match self {
            Self::BoxedL1 { lambda, bound } => {
                let a = u.abs();
                if a < *lambda {
                    Interval::point(0.0)
                } else if a > *lambda {
                    Interval::point(bound.copysign(u))
                } else if u > 0.0 {
                    Interval {
                        lo: 0.0,
                        hi: *bound,
                    }
                } else {
                    Interval {
                        lo: -bound,
                        hi: 0.0,
                    }
                }
            }
            Self::Quadratic { weight, linear } => Interval::point((u - linear[i]) / (2.0 * weight)),
        }
    }

    /// `g_i'(z)` when `g_i` is differentiable everywhere.
    pub fn derivative(&self, i: usize, z: f64) -> Option<f64> {
        match self {
            Self::BoxedL1 { .. } => None,
            Self::Quadratic { weight, linear } => Some(2.0 * weight * z + linear[i]),
        }
    }

    /// Projects `z` onto the support of `g_i`.
    pub fn project(&self, _i: usize, z: f64) -> f64 {
        match self {
            Self::BoxedL1 { bound, .. } => z.clamp(-bound, *bound),
            Self::Quadratic { .. } => z,
        }
    }

    /// L1 weight, when there is one.
    pub fn l1_weight(&self) -> Option<f64> {
        match self {
            Self::BoxedL1 { lambda, .. } => Some(*lambda),
            Self::Quadratic { .. } => None,
        }
    }
}
