//! Quadratic Lyapunov functions `L(x) = (x − x*)ᵀ Y (x − x*)` around a
//! verified equilibrium and certification of their domain.

use nalgebra::{Complex, DMatrix, DVector};

use crate::compactify::CompactifiedSystem;
use crate::equilibria::EquilibriumEnclosure;
use crate::interval::round::{div_down, div_up};
use crate::interval::{Interval, IntervalMatrix, IntervalVector, SpectrumBounds};
use crate::polyfield::PolyMatrix;

/// Eigenvalues closer than this (relative to `‖Dg‖`) to the imaginary axis
/// are rejected.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-10;

const MAX_DEPTH: usize = 4;
const MAX_BOXES: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LyapunovError {
    #[error("eigendecomposition of Dg(x*) failed")]
    EigendecompositionFailed,
    #[error("eigenvalue {0} of Dg(x*) is too close to the imaginary axis")]
    NearImaginaryAxis(String),
    #[error("Y is not certifiably positive definite (λmin ≥ {0:e} only)")]
    YNotPositiveDefinite(f64),
    #[error("Dg(x)ᵀY + YDg(x) not certified negative definite on Ñ (ε = {epsilon:e}, best upper bound {upper:e})")]
    NotNegativeDefinite { epsilon: f64, upper: f64 },
}

/// The proof object for local monotone convergence to `x*`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCertificate {
    pub x_star: EquilibriumEnclosure,
    /// Exactly symmetric point matrix.
    pub y: IntervalMatrix,
    pub epsilon: Interval,
    pub n_tilde: IntervalVector,
    /// Encloses `1/λmin(Y)`; the upper endpoint is rigorous.
    pub c1: Interval,
    /// Lower endpoint is a rigorous lower bound of `min |λ(A(x))|` on `Ñ`.
    pub c_n: Interval,
    /// Rigorous upper bound of `λmax(Y)`.
    pub lambda_max_y: f64,
    /// Eigenvalue bounds of `A` over `Ñ` (lower, upper), worst over subboxes.
    pub a_bounds: (f64, f64),
    pub subboxes: usize,
    pub stable: bool,
}

impl LyapunovCertificate {
    pub fn eval_l(&self, x: &IntervalVector) -> Interval {
        eval_l(&self.y, &self.x_star.enclosure, x)
    }

    /// Diagnostic decay rate `cN / (2 λmax(Y))`.
    pub fn delta0(&self) -> f64 {
        self.c_n.lo() / (2.0 * self.lambda_max_y)
    }

    /// Radius of the box around `x*` that contains `{L ≤ ε²}`.
    pub fn sublevel_radius(&self) -> f64 {
        sublevel_inside_box(self.c1, self.epsilon)
    }
}

/// `Y = Re(V⁻ᴴ I* V⁻¹)` from approximate unit eigenvectors `V` of
/// `mid(Dg(x*))`, with `I*` the signs of the eigenvalue real parts.
///
/// Symmetric midpoints use the real orthonormal eigenbasis. When `V` is
/// numerically singular (defective or repeated eigenvalues), `Y` solves
/// `AᵀY + YA = −I` instead.
pub fn build_y(dg_star: &IntervalMatrix) -> Result<IntervalMatrix, LyapunovError> {
    let a = dg_star.mid();
    let m = a.nrows();
    let scale = a.amax().max(1e-300);
    let asym = (&a - a.transpose()).amax();
    let y = if asym <= 1e-14 * scale {
        let eig = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, 500)
            .ok_or(LyapunovError::EigendecompositionFailed)?;
        for &l in eig.eigenvalues.iter() {
            if l.abs() < IMAGINARY_AXIS_TOL * scale {
                return Err(LyapunovError::NearImaginaryAxis(format!("{l:e}")));
            }
        }
        let signs = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| if l < 0.0 { 1.0 } else { -1.0 }));
        &eig.eigenvectors * signs * eig.eigenvectors.transpose()
    } else {
        let lambdas = a.complex_eigenvalues();
        for l in lambdas.iter() {
            if !l.re.is_finite() || !l.im.is_finite() {
                return Err(LyapunovError::EigendecompositionFailed);
            }
            if l.re.abs() < IMAGINARY_AXIS_TOL * scale {
                return Err(LyapunovError::NearImaginaryAxis(format!("{:e}{:+e}i", l.re, l.im)));
            }
        }
        match complex_eigenvector_y(&a, lambdas.as_slice()) {
            Some(y) => y,
            None => {
                if lambdas.iter().any(|l| l.re > 0.0) {
                    return Err(LyapunovError::EigendecompositionFailed);
                }
                solve_lyapunov_equation(&a).ok_or(LyapunovError::EigendecompositionFailed)?
            }
        }
    };
    let y = (&y + y.transpose()) * 0.5;
    Ok(IntervalMatrix::from_fn(m, m, |i, j| {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        Interval::point(y[(r, c)])
    }))
}

fn complex_eigenvector_y(a: &DMatrix<f64>, lambdas: &[Complex<f64>]) -> Option<DMatrix<f64>> {
    let m = a.nrows();
    let ac: DMatrix<Complex<f64>> = a.map(|v| Complex::new(v, 0.0));
    let mut v = DMatrix::<Complex<f64>>::zeros(m, m);
    for (j, &l) in lambdas.iter().enumerate() {
        let shift = l + Complex::new(1e-9 * (1.0 + l.norm()), 1e-9 * (1.0 + l.norm()));
        let shifted = &ac - DMatrix::<Complex<f64>>::identity(m, m) * shift;
        let lu = shifted.lu();
        let mut x = DVector::<Complex<f64>>::from_fn(m, |i, _| Complex::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
        for _ in 0..4 {
            x = lu.solve(&x)?;
            let n = x.norm();
            if !(n.is_finite() && n > 0.0) {
                return None;
            }
            x /= Complex::new(n, 0.0);
        }
        v.set_column(j, &x);
    }
    let vinv = v.clone().try_inverse()?;
    let cond = v.norm() * vinv.norm();
    if !cond.is_finite() || cond > 1e4 {
        return None;
    }
    let signs = DMatrix::<Complex<f64>>::from_diagonal(&DVector::from_iterator(
        m,
        lambdas.iter().map(|l| Complex::new(if l.re < 0.0 { 1.0 } else { -1.0 }, 0.0)),
    ));
    let yhat = vinv.adjoint() * signs * &vinv;
    Some(yhat.map(|c| c.re))
}

/// Solves `AᵀY + YA = −I` through the Kronecker form.
pub fn solve_lyapunov_equation(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let m = a.nrows();
    let n = m * m;
    // vec(AᵀY + YA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(Y), column-major vec.
    let mut k = DMatrix::<f64>::zeros(n, n);
    for col in 0..m {
        for row in 0..m {
            let r = col * m + row;
            for p in 0..m {
                k[(r, col * m + p)] += a[(p, row)];
                k[(r, p * m + row)] += a[(p, col)];
            }
        }
    }
    let rhs = DVector::from_fn(n, |idx, _| if idx / m == idx % m { -1.0 } else { 0.0 });
    let sol = k.lu().solve(&rhs)?;
    let y = DMatrix::from_column_slice(m, m, sol.as_slice());
    y.iter().all(|v| v.is_finite()).then_some(y)
}

/// `(x − x*)ᵀ Y (x − x*)` over the whole equilibrium box.
pub fn eval_l(y: &IntervalMatrix, x_star: &IntervalVector, x: &IntervalVector) -> Interval {
    let v = x.sub(x_star);
    let m = v.len();
    let mut acc = Interval::ZERO;
    for i in 0..m {
        acc += y.get(i, i) * v[i].sqr();
        for j in i + 1..m {
            acc += (y.get(i, j) * v[i] * v[j]).scale(2.0);
        }
    }
    acc
}

/// Radius `ε√c₁` (rounded up) of the box that contains `{L ≤ ε²}`, since
/// `‖x − x*‖² ≤ c₁ L`.
pub fn sublevel_inside_box(c1: Interval, epsilon: Interval) -> f64 {
    (epsilon * Interval::point(c1.hi()).sqrt().expect("c1 > 0")).hi()
}

/// Certifies `Y ≻ 0` and `A(x) = Dg(x)ᵀY + YDg(x) ≺ 0` on
/// `Ñ = (x* ± ε√c₁) ∩ [−1, 1]^m`, subdividing `Ñ` when one evaluation
/// is not enough.
pub fn verify_domain(
    sys: &CompactifiedSystem,
    x_star: &EquilibriumEnclosure,
    y: &IntervalMatrix,
    epsilon: f64,
) -> Result<LyapunovCertificate, LyapunovError> {
    let m = sys.dim();
    let ys = SpectrumBounds::symmetric(y);
    if !(ys.lower > 0.0) {
        return Err(LyapunovError::YNotPositiveDefinite(ys.lower));
    }
    let min_diag = (0..m).map(|i| y.get(i, i).lo()).fold(f64::INFINITY, f64::min);
    // λmin(Y) ≤ min Y_ii, so 1/min Y_ii is a lower bound of c₁.
    let c1_lo = div_down(1.0, min_diag);
    let c1 = Interval::new(c1_lo, div_up(1.0, ys.lower).max(c1_lo));
    let eps = Interval::point(epsilon);
    let radius = sublevel_inside_box(c1, eps);
    let unit = Interval::new(-1.0, 1.0);
    let n_tilde: IntervalVector = x_star
        .enclosure
        .inflate(radius)
        .iter()
        .map(|v| v.intersect(unit).unwrap_or(*v))
        .collect();

    let jac = sys.g().jacobian();
    let mut stack = vec![(n_tilde.clone(), 0usize)];
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let mut boxes = 0usize;
    while let Some((bx, depth)) = stack.pop() {
        let sb = SpectrumBounds::symmetric(&a_matrix(&jac, y, &bx));
        if sb.upper < 0.0 {
            boxes += 1;
            worst = (worst.0.min(sb.lower), worst.1.max(sb.upper));
            continue;
        }
        if depth >= MAX_DEPTH * m || boxes + stack.len() >= MAX_BOXES {
            return Err(LyapunovError::NotNegativeDefinite { epsilon, upper: sb.upper });
        }
        let (a, b) = bisect(&bx);
        stack.push((a, depth + 1));
        stack.push((b, depth + 1));
    }
    let c_lo = -worst.1;
    let center = IntervalVector::from_points(&x_star.center());
    let a_center = a_matrix(&jac, y, &center);
    let c_hi = -(0..m).map(|i| a_center.get(i, i).lo()).fold(f64::NEG_INFINITY, f64::max);
    let c_n = Interval::new(c_lo, c_hi.max(c_lo));
    Ok(LyapunovCertificate {
        x_star: x_star.clone(),
        y: y.clone(),
        epsilon: eps,
        n_tilde,
        c1,
        c_n,
        lambda_max_y: ys.upper,
        a_bounds: worst,
        subboxes: boxes,
        stable: true,
    })
}

/// `Dg(X)ᵀY + YDg(X)` with exactly mirrored off-diagonal entries.
pub fn a_matrix(jac: &PolyMatrix, y: &IntervalMatrix, x: &IntervalVector) -> IntervalMatrix {
    let dg = jac.eval(x).expect("dimension checked");
    let m = dg.rows();
    let prod = y.mul(&dg);
    let mut a = IntervalMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = prod.get(i, j) + prod.get(j, i);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

fn bisect(bx: &IntervalVector) -> (IntervalVector, IntervalVector) {
    let k = (0..bx.len())
        .max_by(|&a, &b| bx[a].width().total_cmp(&bx[b].width()))
        .expect("nonempty box");
    let mid = bx[k].mid();
    let mut left = bx.clone();
    let mut right = bx.clone();
    left[k] = Interval::new(bx[k].lo(), mid);
    right[k] = Interval::new(mid, bx[k].hi());
    (left, right)
}
