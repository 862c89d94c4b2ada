//! Critical points at infinity: floating-point search and Krawczyk
//! verification of zeros of the normalized field.

use nalgebra::{DMatrix, DVector};

use crate::compactify::CompactifiedSystem;
use crate::interval::{IntervalMatrix, IntervalVector};
use crate::polyfield::PolyVectorField;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("Krawczyk operator did not map the box of radius {radius:e} into its interior")]
    VerificationFailed { radius: f64 },
    #[error("approximate Jacobian at the center is singular")]
    SingularApproximateJacobian,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumEnclosure {
    /// Box in `x` coordinates containing exactly one zero of `g`.
    pub enclosure: IntervalVector,
    pub unique: bool,
    /// `g` evaluated over the box.
    pub residual: IntervalVector,
    /// `‖x‖²` over the box contains 1.
    pub on_boundary: bool,
}

impl EquilibriumEnclosure {
    pub fn center(&self) -> Vec<f64> {
        self.enclosure.mid()
    }
}

/// `p_d(x) − ⟨x, p_d(x)⟩x`, where `p_d` is the top homogeneous part.
pub fn characteristic_residual(field: &PolyVectorField, x: &IntervalVector) -> IntervalVector {
    let pd = field.homogeneous_parts().pop().expect("at least the constant part");
    let v = pd.eval(x).expect("dimension checked by caller");
    let radial = x.dot(&v);
    v.iter().zip(x.iter()).map(|(&vi, &xi)| vi - radial * xi).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonOutcome {
    pub candidates: Vec<Vec<f64>>,
    /// Seeds whose iteration did not reach the residual tolerance.
    pub failed_seeds: usize,
}

/// Floating-point Newton iteration on `g(x) = 0` from every seed, with
/// converged iterates deduplicated at distance `1e-6`.
pub fn newton_candidates(sys: &CompactifiedSystem, seeds: &[Vec<f64>], max_iter: usize, tol: f64) -> NewtonOutcome {
    let mut out = NewtonOutcome::default();
    for seed in seeds {
        match newton_refine(sys.g(), seed, max_iter, tol) {
            Some(x) => {
                let dup = out.candidates.iter().any(|c| dist(c, &x) < 1e-6);
                if !dup {
                    out.candidates.push(x);
                }
            }
            None => out.failed_seeds += 1,
        }
    }
    out
}

/// Newton iterates on `g`, returning the first with `‖g‖∞ < tol`.
pub fn newton_refine(g: &PolyVectorField, seed: &[f64], max_iter: usize, tol: f64) -> Option<Vec<f64>> {
    let jac = g.jacobian();
    let mut x = seed.to_vec();
    for _ in 0..=max_iter {
        let gx = g.eval_f64(&x);
        if gx.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let res = gx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let j = jac.eval_f64(&x);
        let step = j.lu().solve(&DVector::from_vec(gx));
        if res < tol {
            // One more step polishes to full precision without risking divergence.
            if let Some(step) = step {
                let polished: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
                let pres = g.eval_f64(&polished).iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if pres <= res {
                    return Some(polished);
                }
            }
            return Some(x);
        }
        let step = step?;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            *xi -= si;
        }
    }
    None
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Seed points on the unit sphere in `R^m`: `±1` for `m = 1`, `count`
/// equally spaced angles for `m = 2`, a Fibonacci lattice for `m = 3` and
/// a normalized Kronecker lattice plus the coordinate poles beyond.
pub fn sphere_seeds(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut seeds = Vec::new();
            for i in 0..m {
                for sign in [1.0, -1.0] {
                    let mut e = vec![0.0; m];
                    e[i] = sign;
                    seeds.push(e);
                }
            }
            let alphas: Vec<f64> = first_primes(m).iter().map(|&p| (p as f64).sqrt().fract()).collect();
            for k in 1..=count {
                let v: Vec<f64> = alphas.iter().map(|a| 2.0 * (a * k as f64).fract() - 1.0).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 1e-3 {
                    seeds.push(v.iter().map(|c| c / n).collect());
                }
            }
            seeds
        }
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if (2..c).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Krawczyk test on `X = center ± radius` for zeros of `g`.
///
/// On success the box is tightened by iterating `X ← K(X) ∩ X`.
pub fn krawczyk_verify(sys: &CompactifiedSystem, center: &[f64], radius: f64) -> Result<EquilibriumEnclosure, EquilibriumError> {
    krawczyk_field(sys.g(), center, radius)
}

/// As [`krawczyk_verify`] for an arbitrary square polynomial field.
pub fn krawczyk_field(g: &PolyVectorField, center: &[f64], radius: f64) -> Result<EquilibriumEnclosure, EquilibriumError> {
    let m = g.dim();
    if center.len() != m {
        return Err(EquilibriumError::DimensionMismatch { expected: m, got: center.len() });
    }
    let jac = g.jacobian();
    let jc = jac.eval_f64(center);
    let c_approx = jc.try_inverse().ok_or(EquilibriumError::SingularApproximateJacobian)?;
    if c_approx.iter().any(|v| !v.is_finite()) {
        return Err(EquilibriumError::SingularApproximateJacobian);
    }
    let mut x = IntervalVector::ball(center, radius);
    let k = krawczyk_image(g, &jac, &c_approx, center, &x);
    if !x.interior_contains(&k) {
        return Err(EquilibriumError::VerificationFailed { radius });
    }
    x = k.intersect(&x).expect("K(X) ⊂ X");
    for _ in 0..20 {
        let mid = x.mid();
        let k = krawczyk_image(g, &jac, &c_approx, &mid, &x);
        let Some(next) = k.intersect(&x) else { break };
        let shrunk = next.max_width() < 0.9 * x.max_width();
        x = next;
        if !shrunk {
            break;
        }
    }
    let residual = g.eval(&x).expect("dimension checked");
    let on_boundary = x.norm_sq().contains(1.0);
    Ok(EquilibriumEnclosure { enclosure: x, unique: true, residual, on_boundary })
}

fn krawczyk_image(
    g: &PolyVectorField,
    jac: &crate::polyfield::PolyMatrix,
    c_approx: &DMatrix<f64>,
    center: &[f64],
    x: &IntervalVector,
) -> IntervalVector {
    let m = center.len();
    let c = IntervalMatrix::from_points(c_approx);
    let xc = IntervalVector::from_points(center);
    let gc = g.eval(&xc).expect("dimension checked");
    let dgx = jac.eval(x).expect("dimension checked");
    let contraction = IntervalMatrix::identity(m).sub(&c.mul(&dgx));
    xc.sub(&c.mul_vec(&gc)).add(&contraction.mul_vec(&x.sub(&xc)))
}

/// Verification at radius `1e-3`, then shrinking and growing by factors of
/// ten, three attempts each way.
pub fn verify_with_retry(sys: &CompactifiedSystem, center: &[f64]) -> Result<EquilibriumEnclosure, EquilibriumError> {
    let mut last = EquilibriumError::VerificationFailed { radius: 1e-3 };
    let radii = [1e-3, 1e-4, 1e-5, 1e-6, 1e-2, 1e-1];
    for r in radii {
        match krawczyk_verify(sys, center, r) {
            Ok(e) => return Ok(e),
            Err(EquilibriumError::SingularApproximateJacobian) => {
                return Err(EquilibriumError::SingularApproximateJacobian)
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Index of the candidate closest to `target`.
pub fn nearest(candidates: &[Vec<f64>], target: &[f64]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by(|a, b| dist(a.1, target).total_cmp(&dist(b.1, target)))
        .map(|(i, _)| i)
}
