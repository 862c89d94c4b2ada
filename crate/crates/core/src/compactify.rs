//! Poincaré and parabolic compactifications of polynomial vector fields.
//!
//! Both map `R^m` onto the open unit ball `D`. After the time rescaling
//! `dτ/dt = κ^{d−1}` (Poincaré) or `dτ/dt = 1/((1−R²)^{d−1}(1+R²))`
//! (parabolic) the vector field extends to a polynomial field `g` on the
//! closed ball, and divergent solutions become trajectories approaching
//! equilibria on the boundary sphere.
//!
//! For integration the state is augmented to `(x, [s], t)`: `t` is the
//! original time, integrated through `dt/dτ`, and `s = 1/κ = √(1−‖x‖²)` is
//! carried as an extra polynomial state only when the Poincaré time factor
//! `s^{d−1}` has an odd exponent.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::{Interval, IntervalError, IntervalVector};
use crate::polyfield::{PolyVectorField, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompactificationKind {
    Poincare,
    Parabolic,
}

impl fmt::Display for CompactificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompactificationKind::Poincare => write!(f, "poincare"),
            CompactificationKind::Parabolic => write!(f, "parabolic"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompactifyError {
    #[error("compactification not applicable: {}", .0.message)]
    NotApplicable(ApplicabilityReport),
    #[error("point on or outside the unit sphere: ‖x‖² ∈ {0}")]
    BoundaryPoint(Interval),
    #[error("field must be square (got {dim} components over {nvars} variables)")]
    NotSquare { dim: usize, nvars: usize },
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplicabilityReport {
    pub kind: CompactificationKind,
    pub ok: bool,
    /// Degrees `j` with `p_j ≢ 0` and `d − j` odd (Poincaré only).
    pub violating_parts: Vec<u32>,
    pub message: String,
}

/// Poincaré needs every nonzero homogeneous part `p_j` to have `d − j` even,
/// so that `f̃` contains only even powers of `s = √(1−‖x‖²)` and is a
/// polynomial in `x`. Otherwise `Dg` is unbounded at the boundary. The
/// parabolic compactification always yields a polynomial field.
pub fn check_applicability(field: &PolyVectorField, kind: CompactificationKind) -> ApplicabilityReport {
    match kind {
        CompactificationKind::Parabolic => ApplicabilityReport {
            kind,
            ok: true,
            violating_parts: Vec::new(),
            message: "parabolic compactification yields a polynomial field".into(),
        },
        CompactificationKind::Poincare => {
            let d = field.degree();
            let violating: Vec<u32> = field
                .homogeneous_parts()
                .iter()
                .enumerate()
                .filter(|(j, p)| !p.is_zero() && (d - *j as u32) % 2 == 1)
                .map(|(j, _)| j as u32)
                .collect();
            let ok = violating.is_empty();
            let message = if ok {
                "all nonzero homogeneous parts have even codegree".into()
            } else {
                format!(
                    "homogeneous parts of degree {violating:?} have odd codegree relative to d = {d}; \
                     the Jacobian of the normalized field is unbounded at infinity"
                )
            };
            ApplicabilityReport { kind, ok, violating_parts: violating, message }
        }
    }
}

/// A compactified, time-normalized polynomial system.
#[derive(Debug, Clone)]
pub struct CompactifiedSystem {
    kind: CompactificationKind,
    dim: usize,
    degree: u32,
    original: PolyVectorField,
    ftilde: PolyVectorField,
    g: PolyVectorField,
    time_factor: Polynomial,
    has_s: bool,
    augmented: PolyVectorField,
}

impl CompactifiedSystem {
    pub fn kind(&self) -> CompactificationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn original(&self) -> &PolyVectorField {
        &self.original
    }

    /// `f̃` as a polynomial in `x` only.
    pub fn ftilde(&self) -> &PolyVectorField {
        &self.ftilde
    }

    /// The normalized field `g` on the closed ball (polynomial in `x`).
    pub fn g(&self) -> &PolyVectorField {
        &self.g
    }

    /// `dt/dτ` as a polynomial in the augmented variables `(x, [s])`.
    pub fn time_factor(&self) -> &Polynomial {
        &self.time_factor
    }

    pub fn has_aux_s(&self) -> bool {
        self.has_s
    }

    /// `m`, plus one when the auxiliary `s` is carried.
    pub fn aug_dim(&self) -> usize {
        self.dim + usize::from(self.has_s)
    }

    /// Full integration state size: `(x, [s], t)`.
    pub fn state_dim(&self) -> usize {
        self.aug_dim() + 1
    }

    pub fn s_index(&self) -> Option<usize> {
        self.has_s.then_some(self.dim)
    }

    pub fn t_index(&self) -> usize {
        self.aug_dim()
    }

    /// Autonomous polynomial field over `(x, [s], t)`.
    pub fn augmented(&self) -> &PolyVectorField {
        &self.augmented
    }

    /// Maps an original-space initial value to the integration state
    /// `(x0, [s0], t = 0)`.
    pub fn initial_state(&self, y0: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
        let x0 = self.forward(y0)?;
        let mut z: Vec<Interval> = x0.to_vec();
        if self.has_s {
            let kappa = (Interval::ONE + y0.norm_sq()).sqrt_clamped()?;
            let s_direct = kappa.recip()?;
            let s_from_x = (Interval::ONE - x0.norm_sq()).sqrt_clamped()?;
            z.push(s_direct.intersect(s_from_x).unwrap_or(s_direct));
        }
        z.push(Interval::ZERO);
        Ok(IntervalVector::new(z))
    }

    pub fn forward(&self, y: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
        match self.kind {
            CompactificationKind::Poincare => poincare_forward(y),
            CompactificationKind::Parabolic => parabolic_forward(y),
        }
    }

    pub fn inverse(&self, x: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
        match self.kind {
            CompactificationKind::Poincare => poincare_inverse(x),
            CompactificationKind::Parabolic => parabolic_inverse(x),
        }
    }
}

/// Builds `g`, `dt/dτ` and the augmented integration field.
pub fn build_normalized(
    field: &PolyVectorField,
    kind: CompactificationKind,
) -> Result<CompactifiedSystem, CompactifyError> {
    let m = field.dim();
    if field.nvars() != m {
        return Err(CompactifyError::NotSquare { dim: m, nvars: field.nvars() });
    }
    let report = check_applicability(field, kind);
    if !report.ok {
        return Err(CompactifyError::NotApplicable(report));
    }
    let d = field.degree();
    let parts = field.homogeneous_parts();
    // 1 − ‖x‖², the common factor of both compactifications.
    let defect = Polynomial::one(m).sub(&Polynomial::norm_sq(m, 0, m));
    let r2 = Polynomial::norm_sq(m, 0, m);

    let ftilde_comps: Vec<Polynomial> = (0..m)
        .map(|i| {
            parts.iter().enumerate().fold(Polynomial::zero(m), |acc, (j, p)| {
                let pj = &p.components()[i];
                if pj.is_zero() {
                    return acc;
                }
                let codeg = d - j as u32;
                let weight = match kind {
                    CompactificationKind::Poincare => defect.pow(codeg / 2),
                    CompactificationKind::Parabolic => defect.pow(codeg),
                };
                acc.add(&weight.mul(pj))
            })
        })
        .collect();
    let ftilde = PolyVectorField::new(ftilde_comps);
    let radial = ftilde.radial_part();

    let g_comps: Vec<Polynomial> = (0..m)
        .map(|i| {
            let fi = &ftilde.components()[i];
            let xi = Polynomial::var(m, i);
            match kind {
                CompactificationKind::Poincare => fi.sub(&radial.mul(&xi)),
                CompactificationKind::Parabolic => Polynomial::one(m)
                    .add(&r2)
                    .mul(fi)
                    .sub(&radial.mul(&xi).scale(Interval::point(2.0))),
            }
        })
        .collect();
    let g = PolyVectorField::new(g_comps);

    let has_s = kind == CompactificationKind::Poincare && d >= 1 && (d - 1) % 2 == 1;
    let aug = m + usize::from(has_s);
    let n = aug + 1;
    let lift_x: Vec<usize> = (0..m).collect();

    let time_factor = match kind {
        CompactificationKind::Parabolic => {
            let e = d.saturating_sub(1);
            defect.pow(e).mul(&Polynomial::one(m).add(&r2))
        }
        CompactificationKind::Poincare if has_s => Polynomial::var(aug, m).pow(d - 1),
        CompactificationKind::Poincare => defect.pow(d.saturating_sub(1) / 2),
    };
    let time_factor_lifted_map: Vec<usize> = (0..time_factor.nvars()).collect();

    let mut aug_comps: Vec<Polynomial> = g.components().iter().map(|c| c.relabel(n, &lift_x)).collect();
    if has_s {
        let s = Polynomial::var(n, m);
        aug_comps.push(s.mul(&radial.relabel(n, &lift_x)).neg());
    }
    aug_comps.push(time_factor.relabel(n, &time_factor_lifted_map));
    let augmented = PolyVectorField::new(aug_comps);

    Ok(CompactifiedSystem {
        kind,
        dim: m,
        degree: d,
        original: field.clone(),
        ftilde,
        g,
        time_factor,
        has_s,
        augmented,
    })
}

/// `x = y / √(1 + ‖y‖²)`.
pub fn poincare_forward(y: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
    let kappa = (Interval::ONE + y.norm_sq()).sqrt_clamped()?;
    Ok(y.iter().map(|&yi| yi.div(kappa).expect("κ ≥ 1")).collect())
}

/// `y = x / √(1 − ‖x‖²)`; requires `‖x‖² < 1` rigorously.
pub fn poincare_inverse(x: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
    let r2 = x.norm_sq();
    if r2.hi() >= 1.0 {
        return Err(CompactifyError::BoundaryPoint(r2));
    }
    let s = (Interval::ONE - r2).sqrt_clamped()?;
    x.iter()
        .map(|&xi| xi.div(s).map_err(CompactifyError::from))
        .collect::<Result<Vec<_>, _>>()
        .map(IntervalVector::new)
}

/// `x_i = 2 y_i / (1 + √(1 + 4‖y‖²))`.
pub fn parabolic_forward(y: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
    let root = (Interval::ONE + y.norm_sq().scale(4.0)).sqrt_clamped()?;
    let den = Interval::ONE + root;
    Ok(y.iter().map(|&yi| yi.scale(2.0).div(den).expect("denominator ≥ 2")).collect())
}

/// `y_j = x_j / (1 − R²)`; requires `R² < 1` rigorously.
pub fn parabolic_inverse(x: &IntervalVector) -> Result<IntervalVector, CompactifyError> {
    let r2 = x.norm_sq();
    if r2.hi() >= 1.0 {
        return Err(CompactifyError::BoundaryPoint(r2));
    }
    let den = Interval::ONE - r2;
    x.iter()
        .map(|&xi| xi.div(den).map_err(CompactifyError::from))
        .collect::<Result<Vec<_>, _>>()
        .map(IntervalVector::new)
}

/// `κ(y)` for the given kind, enclosed.
pub fn kappa(kind: CompactificationKind, y: &IntervalVector) -> Result<Interval, CompactifyError> {
    let r2 = y.norm_sq();
    Ok(match kind {
        CompactificationKind::Poincare => (Interval::ONE + r2).sqrt_clamped()?,
        CompactificationKind::Parabolic => {
            (Interval::ONE + (Interval::ONE + r2.scale(4.0)).sqrt_clamped()?).scale(0.5)
        }
    })
}

/// `⟨y, ∇κ(y)⟩`, enclosed.
fn radial_derivative(kind: CompactificationKind, y: &IntervalVector) -> Result<Interval, CompactifyError> {
    let r2 = y.norm_sq();
    Ok(match kind {
        CompactificationKind::Poincare => r2.div(kappa(kind, y)?)?,
        CompactificationKind::Parabolic => r2.scale(2.0).div((Interval::ONE + r2.scale(4.0)).sqrt_clamped()?)?,
    })
}

/// One sample of the admissibility spot check.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilitySample {
    pub y: Vec<f64>,
    /// (A0) `κ(y) > ‖y‖`, verified.
    pub a0: bool,
    /// (A3) `⟨y, ∇κ(y)⟩ < κ(y)`, verified.
    pub a3: bool,
    /// Non-rigorous (A1) diagnostic: `κ(y)/‖y‖` (bounded as ‖y‖ → ∞).
    pub a1_ratio: f64,
    /// Non-rigorous (A2) diagnostic: `‖∇κ(y) − y/‖y‖‖`.
    pub a2_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub kind: CompactificationKind,
    pub samples: Vec<AdmissibilitySample>,
}

impl AdmissibilityReport {
    /// True when (A0) and (A3) held at every sample.
    pub fn rigorous_ok(&self) -> bool {
        self.samples.iter().all(|s| s.a0 && s.a3)
    }
}

/// Checks (A0) and (A3) rigorously at each sample point and records (A1),
/// (A2) trend diagnostics, which are only meaningful at large `‖y‖`.
pub fn admissibility_spotcheck(kind: CompactificationKind, samples: &[Vec<f64>]) -> AdmissibilityReport {
    let samples = samples
        .iter()
        .map(|y| {
            let yv = IntervalVector::from_points(y);
            let k = kappa(kind, &yv).expect("κ defined everywhere");
            let norm = yv.norm_sq().sqrt_clamped().expect("nonnegative");
            let a0 = k.lo() > norm.hi();
            let a3 = radial_derivative(kind, &yv).map(|r| r.hi() < k.lo()).unwrap_or(false);
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r2 = nrm * nrm;
            let grad_scale = match kind {
                CompactificationKind::Poincare => 1.0 / (1.0 + r2).sqrt(),
                CompactificationKind::Parabolic => 2.0 / (1.0 + 4.0 * r2).sqrt(),
            };
            let (a1_ratio, a2_defect) = if nrm > 0.0 {
                let defect = y
                    .iter()
                    .map(|v| (grad_scale * v - v / nrm).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (k.mid() / nrm, defect)
            } else {
                (f64::INFINITY, f64::NAN)
            };
            AdmissibilitySample { y: y.clone(), a0, a3, a1_ratio, a2_defect }
        })
        .collect();
    AdmissibilityReport { kind, samples }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::poly;

    fn p(x: f64) -> Interval {
        Interval::point(x)
    }

    fn ex1() -> PolyVectorField {
        PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])])
    }

    fn ex2() -> PolyVectorField {
        PolyVectorField::new(vec![
            poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 2]), (-1.0, &[0, 0])]),
            poly(2, &[(5.0, &[1, 1]), (-5.0, &[0, 0])]),
        ])
    }

    fn ex3(a: f64, b: f64, c: f64) -> PolyVectorField {
        PolyVectorField::new(vec![
            poly(3, &[(a - c, &[1, 0, 1]), (-b, &[0, 1, 1])]),
            poly(3, &[(b, &[1, 0, 1]), (a - c, &[0, 1, 1])]),
            poly(3, &[(-c, &[0, 0, 2])]),
        ])
    }

    fn riccati() -> PolyVectorField {
        PolyVectorField::new(vec![
            poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 1])]),
            poly(2, &[(1.0, &[0, 0])]),
        ])
    }

    #[test]
    fn poincare_forward_examples() {
        let x = poincare_forward(&IntervalVector::from_points(&[0.0])).unwrap();
        assert_eq!(x[0], p(0.0));
        let x = poincare_forward(&IntervalVector::from_points(&[0.25])).unwrap();
        assert!(x[0].contains(1.0 / 17f64.sqrt()));
        assert!(x[0].width() < 1e-15);
        let x = poincare_forward(&IntervalVector::from_points(&[10.0, 10.0, 10.0])).unwrap();
        assert!(x.norm_sq().hi() < 1.0);
    }

    #[test]
    fn poincare_inverse_examples() {
        let y = poincare_inverse(&IntervalVector::from_points(&[0.0])).unwrap();
        assert_eq!(y[0], p(0.0));
        let half = Interval::point(0.5).sqrt().unwrap();
        let y = poincare_inverse(&IntervalVector::new(vec![half])).unwrap();
        assert!(y[0].contains(1.0));
        let y0 = IntervalVector::from_points(&[1.0, 1.0]);
        let back = poincare_inverse(&poincare_forward(&y0).unwrap()).unwrap();
        assert!(back.contains_point(&[1.0, 1.0]));
        assert!(matches!(
            poincare_inverse(&IntervalVector::from_points(&[1.0, 0.0])),
            Err(CompactifyError::BoundaryPoint(_))
        ));
    }

    #[test]
    fn parabolic_examples() {
        let x = parabolic_forward(&IntervalVector::from_points(&[0.0])).unwrap();
        assert_eq!(x[0], p(0.0));
        let x = parabolic_forward(&IntervalVector::from_points(&[0.5])).unwrap();
        assert!(x[0].contains(1.0 / (1.0 + 2f64.sqrt())));
        let y = parabolic_inverse(&IntervalVector::from_points(&[0.5])).unwrap();
        assert!(y[0].contains(2.0 / 3.0) && y[0].width() < 1e-15);
        assert!(parabolic_inverse(&IntervalVector::from_points(&[0.6, 0.8])).is_err());
    }

    #[test]
    fn applicability_examples() {
        assert!(check_applicability(&ex1(), CompactificationKind::Poincare).ok);
        let r = check_applicability(&riccati(), CompactificationKind::Poincare);
        assert!(!r.ok);
        assert_eq!(r.violating_parts, vec![1]);
        assert!(check_applicability(&riccati(), CompactificationKind::Parabolic).ok);
        assert!(matches!(
            build_normalized(&riccati(), CompactificationKind::Poincare),
            Err(CompactifyError::NotApplicable(_))
        ));
    }

    #[test]
    fn ex1_poincare_normalized_field() {
        let sys = build_normalized(&ex1(), CompactificationKind::Poincare).unwrap();
        assert_eq!(sys.g().components()[0], poly(1, &[(1.0, &[2]), (-1.0, &[4])]));
        assert!(sys.has_aux_s());
        assert_eq!(sys.state_dim(), 3);
        // s' = −s x³, t' = s.
        assert_eq!(sys.augmented().components()[1], poly(3, &[(-1.0, &[3, 1, 0])]));
        assert_eq!(sys.augmented().components()[2], poly(3, &[(1.0, &[0, 1, 0])]));
    }

    #[test]
    fn ex2_poincare_matches_displayed_field() {
        let sys = build_normalized(&ex2(), CompactificationKind::Poincare).unwrap();
        // (1−x1²)(2(x1²+x2²)−1) − 5x1x2(x1²+x1x2+x2²−1)
        let x1 = Polynomial::var(2, 0);
        let x2 = Polynomial::var(2, 1);
        let one = Polynomial::one(2);
        let r2 = Polynomial::norm_sq(2, 0, 2);
        let two_r2_m1 = r2.scale(p(2.0)).sub(&one);
        let q = x1.mul(&x1).add(&x1.mul(&x2)).add(&x2.mul(&x2)).sub(&one);
        let g1 = one.sub(&x1.mul(&x1)).mul(&two_r2_m1).sub(&x1.mul(&x2).mul(&q).scale(p(5.0)));
        let g2 = one.sub(&x2.mul(&x2)).mul(&q).scale(p(5.0)).sub(&x1.mul(&x2).mul(&two_r2_m1));
        assert_eq!(sys.g().components()[0], g1);
        assert_eq!(sys.g().components()[1], g2);
    }

    #[test]
    fn ex3_jacobian_at_pole() {
        let (a, b, c) = (-1.5, 1.0, -1.25);
        let sys = build_normalized(&ex3(a, b, c), CompactificationKind::Poincare).unwrap();
        let j = sys.g().jacobian().eval(&[p(0.0), p(0.0), p(1.0)]).unwrap();
        let expected = [[a, -b, 0.0], [b, a, 0.0], [0.0, 0.0, 2.0 * c]];
        for i in 0..3 {
            for k in 0..3 {
                assert_eq!(j.get(i, k), p(expected[i][k]), "({i},{k})");
            }
        }
        let gz = sys.g().eval(&[p(0.0), p(0.0), p(1.0)]).unwrap();
        assert!(gz.iter().all(|v| *v == p(0.0)));
    }

    #[test]
    fn riccati_parabolic_matches_displayed_field() {
        let sys = build_normalized(&riccati(), CompactificationKind::Parabolic).unwrap();
        let x1 = Polynomial::var(2, 0);
        let x2 = Polynomial::var(2, 1);
        let one = Polynomial::one(2);
        let r2 = Polynomial::norm_sq(2, 0, 2);
        let w = one.sub(&r2);
        let two = p(2.0);
        let g1 = one.add(&r2).mul(&x1.mul(&x1).add(&w.mul(&x2))).sub(
            &x1.pow(4).add(&w.mul(&x1.mul(&x1).mul(&x2))).add(&w.pow(2).mul(&x1.mul(&x2))).scale(two),
        );
        let g2 = one.add(&r2).mul(&w.pow(2)).sub(
            &x1.pow(3).mul(&x2).add(&w.mul(&x1.mul(&x2.mul(&x2)))).add(&w.pow(2).mul(&x2.mul(&x2))).scale(two),
        );
        assert_eq!(sys.g().components()[0], g1);
        assert_eq!(sys.g().components()[1], g2);
        assert!(!sys.has_aux_s());
        let expected_tf = w.mul(&one.add(&r2));
        assert_eq!(*sys.time_factor(), expected_tf);
    }

    #[test]
    fn heat3_poincare_time_factor_is_polynomial() {
        // y' = y³ + n²(...) in one variable (n = 2 gives y' = −8y + y³).
        let f = PolyVectorField::new(vec![poly(1, &[(-8.0, &[1]), (1.0, &[3])])]);
        let sys = build_normalized(&f, CompactificationKind::Poincare).unwrap();
        assert!(!sys.has_aux_s());
        assert_eq!(*sys.time_factor(), poly(1, &[(1.0, &[0]), (-1.0, &[2])]));
        // g = (1−x²)(−8x) + x³ − x·[(1−x²)(−8x²) + x⁴]
        let expected = poly(1, &[(-8.0, &[1]), (16.0, &[3]), (1.0, &[3]), (-8.0, &[5]), (-1.0, &[5])]);
        assert_eq!(sys.g().components()[0], expected);
    }

    #[test]
    fn bounded_equilibrium_maps_to_interior_zero() {
        // y' = y − y³ has the bounded equilibrium y = 1.
        let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[1]), (-1.0, &[3])])]);
        for kind in [CompactificationKind::Poincare, CompactificationKind::Parabolic] {
            let sys = build_normalized(&f, kind).unwrap();
            let x = sys.forward(&IntervalVector::from_points(&[1.0])).unwrap();
            let gx = sys.g().eval(&x).unwrap();
            assert!(gx[0].contains(0.0), "{kind}: {}", gx[0]);
        }
    }

    #[test]
    fn boundary_reduces_to_characteristic_equation() {
        for f in [ex2(), riccati()] {
            let kinds: &[CompactificationKind] = if check_applicability(&f, CompactificationKind::Poincare).ok {
                &[CompactificationKind::Poincare, CompactificationKind::Parabolic]
            } else {
                &[CompactificationKind::Parabolic]
            };
            let pd = f.homogeneous_parts().last().unwrap().clone();
            for &kind in kinds {
                let sys = build_normalized(&f, kind).unwrap();
                for x in [[1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]] {
                    let xi = IntervalVector::from_points(&x);
                    let pdx = pd.eval(&xi).unwrap();
                    let radial = xi.dot(&pdx);
                    let residual: Vec<Interval> = (0..2).map(|i| pdx[i] - radial * xi[i]).collect();
                    let gx = sys.g().eval(&xi).unwrap();
                    let factor = if kind == CompactificationKind::Parabolic { 2.0 } else { 1.0 };
                    for i in 0..2 {
                        assert!(gx[i].overlaps(residual[i].scale(factor)), "{kind} {x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn time_factor_positive_inside_ball() {
        for (f, kind) in [
            (ex2(), CompactificationKind::Poincare),
            (riccati(), CompactificationKind::Parabolic),
        ] {
            let sys = build_normalized(&f, kind).unwrap();
            let z = sys.initial_state(&IntervalVector::from_points(&[1.0, 1.0])).unwrap();
            let tf = sys.time_factor().eval(&z[..sys.aug_dim()]).unwrap();
            assert!(tf.lo() > 0.0);
        }
    }

    #[test]
    fn admissibility_examples() {
        for kind in [CompactificationKind::Poincare, CompactificationKind::Parabolic] {
            let r = admissibility_spotcheck(kind, &[vec![0.0, 0.0], vec![3.0, 4.0], vec![1e6, -2e6]]);
            assert!(r.rigorous_ok(), "{kind}");
            let far = &r.samples[2];
            assert!((far.a1_ratio - 1.0).abs() < 1e-3);
            assert!(far.a2_defect < 1e-3);
        }
        let r = admissibility_spotcheck(CompactificationKind::Poincare, &[vec![3.0, 4.0]]);
        let k = kappa(CompactificationKind::Poincare, &IntervalVector::from_points(&[3.0, 4.0])).unwrap();
        assert!(k.contains(26f64.sqrt()) && r.samples[0].a0);
        let k = kappa(CompactificationKind::Parabolic, &IntervalVector::from_points(&[3.0, 4.0])).unwrap();
        assert!(k.contains((1.0 + 101f64.sqrt()) / 2.0) && k.lo() > 5.0);
    }

    #[test]
    fn initial_state_carries_s() {
        let sys = build_normalized(&ex1(), CompactificationKind::Poincare).unwrap();
        let z = sys.initial_state(&IntervalVector::from_points(&[0.25])).unwrap();
        assert!(z[0].contains(1.0 / 17f64.sqrt()));
        assert!(z[1].contains(4.0 / 17f64.sqrt()));
        assert_eq!(z[2], p(0.0));
        let defect = z[0].sqr() + z[1].sqr() - Interval::ONE;
        assert!(defect.contains(0.0));
    }
}
