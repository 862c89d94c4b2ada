//! Validated Taylor integration of polynomial autonomous systems with
//! QR-Lohner wrapping control.
//!
//! One step from the set `c + B·r`:
//! 1. A priori box `W` for all solutions over `[0, h]` from the high-order
//!    enclosure test `Σ_{k≤p} [0,h]^k z_k(X) + [0,h]^{p+1} z_{p+1}(W) ⊆ W`.
//! 2. Mean-value form of the truncated Taylor map `T`:
//!    `φ_h(c + B r) ∈ T(c) + DT(X)·B·r + h^{p+1} z_{p+1}(W)`.
//! 3. New frame `B'` from QR of `mid(DT(X)·B)`, new center `c' = mid(T(c) + R)`.

use std::cell::Cell;
use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::compactify::CompactifiedSystem;
use crate::interval::{Interval, IntervalMatrix, IntervalVector};
use crate::polyfield::{PolyVectorField, TaylorSeries, TaylorTape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControls {
    pub order: usize,
    /// Target size of the last Taylor term, relative to `max(1, |z|)`.
    pub tol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls { order: 15, tol: 1e-18, h_min: 1e-12, h_max: 0.5, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error("a priori enclosure failed for step {h:e}")]
    EnclosureFailure { h: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `(x, [s], t)` together with the normalized time `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedState {
    pub x: IntervalVector,
    pub s: Option<Interval>,
    pub t: Interval,
    pub tau: Interval,
}

impl AugmentedState {
    pub fn from_vector(sys: &CompactifiedSystem, z: &IntervalVector, tau: Interval) -> Self {
        AugmentedState {
            x: z[..sys.dim()].iter().copied().collect(),
            s: sys.s_index().map(|i| z[i]),
            t: z[sys.t_index()],
            tau,
        }
    }

    /// Enclosure of `s² + ‖x‖² − 1`, when `s` is carried.
    pub fn manifold_defect(&self) -> Option<Interval> {
        self.s.map(|s| s.sqr() + self.x.norm_sq() - Interval::ONE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// `[τ_k, τ_k + h]`.
    pub tau: Interval,
    /// Enclosure of the state at `τ_k + h`.
    pub tight: IntervalVector,
    /// Enclosure of the state over the whole step.
    pub coarse: IntervalVector,
    pub order: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    EnteredN,
    TauBudget,
    StepFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnclosure {
    pub initial: IntervalVector,
    pub steps: Vec<StepRecord>,
    /// Final state enclosure and its `τ`.
    pub terminal: IntervalVector,
    pub tau: Interval,
    pub reason: StopReason,
}

/// The doubleton-free Lohner set `c + B·r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LohnerSet {
    pub center: Vec<f64>,
    pub basis: IntervalMatrix,
    pub r: IntervalVector,
}

impl LohnerSet {
    pub fn from_box(z: &IntervalVector) -> Self {
        let center = z.mid();
        let r = z.sub(&IntervalVector::from_points(&center));
        LohnerSet { center, basis: IntervalMatrix::identity(z.len()), r }
    }

    pub fn hull(&self) -> IntervalVector {
        IntervalVector::from_points(&self.center).add(&self.basis.mul_vec(&self.r))
    }
}

/// Validated flow of a square polynomial field.
#[derive(Debug, Clone)]
pub struct FlowIntegrator {
    tape: TaylorTape,
    controls: IntegratorControls,
    /// Ratio of accepted to suggested step, carried between steps.
    ratio: Cell<f64>,
}

impl FlowIntegrator {
    pub fn new(field: &PolyVectorField, controls: IntegratorControls) -> Self {
        FlowIntegrator { tape: TaylorTape::new(field), controls, ratio: Cell::new(1.0) }
    }

    pub fn controls(&self) -> &IntegratorControls {
        &self.controls
    }

    pub fn dim(&self) -> usize {
        self.tape.dim()
    }

    /// Box containing every solution from `x` over `[0, h]`.
    pub fn a_priori_enclosure(&self, x: &IntervalVector, h: f64) -> Result<IntervalVector, IntegratorError> {
        let ser = self.tape.series(x, self.controls.order, false);
        self.hoe(&ser, h).map(|(w, _)| w)
    }

    /// The a priori box `W` together with `z_{p+1}` over a box containing it.
    fn hoe(&self, ser_x: &TaylorSeries, h: f64) -> Result<(IntervalVector, IntervalVector), IntegratorError> {
        let p = self.controls.order;
        let span = Interval::new(0.0, h);
        let base = ser_x.sum(span, p);
        let span_pow = span.powi(p as u32 + 1);
        let mut guess = widen(&base, 0.1);
        for _ in 0..6 {
            let z = self.tape.series(&guess, p + 1, false).coeffs(p + 1);
            let w = base.add(&z.scale(span_pow));
            if guess.interior_contains(&w) {
                return Ok((w, z));
            }
            guess = widen(&guess.hull(&w), 0.5);
        }
        Err(IntegratorError::EnclosureFailure { h })
    }

    /// Step size from the last two Taylor coefficients at the center.
    fn suggest_step(&self, ser_c: &TaylorSeries, center: &[f64]) -> f64 {
        let p = self.controls.order;
        let mut h = self.controls.h_max;
        for k in [p - 1, p] {
            let a = (0..center.len())
                .map(|i| ser_c.coeff(i, k).mag() / center[i].abs().max(1.0))
                .fold(0.0, f64::max);
            if a > 0.0 {
                h = h.min(0.9 * (self.controls.tol / a).powf(1.0 / k as f64));
            }
        }
        h.max(self.controls.h_min)
    }

    /// One validated step of size at most `h_cap`, halving on enclosure
    /// failure. Returns the step actually taken.
    pub fn step(&self, set: &LohnerSet, h_cap: f64) -> Result<(LohnerSet, StepRecord), IntegratorError> {
        let p = self.controls.order;
        let n = self.dim();
        let xbox = set.hull().hull(&IntervalVector::from_points(&set.center));
        let ser_c = self.tape.series(&IntervalVector::from_points(&set.center), p, false);
        let ser_x = self.tape.series(&xbox, p, true);
        let suggested = self.suggest_step(&ser_c, &set.center);
        let mut h = (suggested * self.ratio.get()).clamp(self.controls.h_min, h_cap.max(self.controls.h_min)).min(h_cap);
        let scale: Vec<f64> = set.center.iter().map(|c| c.abs().max(1.0)).collect();
        let mut attempts = 0;
        let (coarse, rem) = loop {
            let (w, z) = match self.hoe(&ser_x, h) {
                Ok(v) => v,
                Err(e) => {
                    h *= 0.5;
                    if h < self.controls.h_min {
                        return Err(e);
                    }
                    continue;
                }
            };
            let rem = z.scale(Interval::point(h).powi(p as u32 + 1));
            let err = rem.iter().zip(&scale).map(|(r, s)| r.mag() / s).fold(0.0, f64::max);
            attempts += 1;
            // The remainder over the a priori box can be far larger than the
            // point estimate used for the first guess of h.
            if err <= 10.0 * self.controls.tol || attempts >= 4 || h <= self.controls.h_min {
                if h < h_cap {
                    let r = (h / suggested).min(1.0);
                    let grow = if err < self.controls.tol { 1.1 } else { 1.0 };
                    self.ratio.set((r * grow).clamp(1e-3, 1.0));
                }
                break (w, rem);
            }
            let shrink = (self.controls.tol / err).powf(1.0 / (p + 1) as f64);
            h = (h * shrink.clamp(0.1, 0.9)).max(self.controls.h_min);
        };
        let hi = Interval::point(h);
        let y = ser_c.sum(hi, p).add(&rem);
        let jac = ser_x.jacobian(hi, p);
        let m = jac.mul(&set.basis);

        let center = y.mid();
        let q = qr_frame(&m.mid(), &set.r);
        let basis = IntervalMatrix::from_points(&q);
        let next = match basis.enclose_inverse() {
            Some(inv) => {
                let r = inv.mul(&m).mul_vec(&set.r).add(&inv.mul_vec(&y.sub(&IntervalVector::from_points(&center))));
                LohnerSet { center: center.clone(), basis, r }
            }
            None => LohnerSet::from_box(&y.add(&m.mul_vec(&set.r))),
        };
        let direct = y.add(&m.mul_vec(&set.r));
        let tight = next.hull().intersect(&direct).unwrap_or(direct);
        debug_assert_eq!(tight.len(), n);
        let record = StepRecord { tau: Interval::new(0.0, h), tight, coarse, order: p, h };
        Ok((next, record))
    }

    /// Integrates from `z0` until `stop(tight enclosure)` holds or
    /// `tau_budget` is exhausted.
    pub fn integrate(
        &self,
        z0: &IntervalVector,
        tau_budget: f64,
        mut stop: impl FnMut(&IntervalVector) -> bool,
    ) -> Result<TrajectoryEnclosure, IntegratorError> {
        if z0.len() != self.dim() {
            return Err(IntegratorError::DimensionMismatch { expected: self.dim(), got: z0.len() });
        }
        let mut set = LohnerSet::from_box(z0);
        let mut current = z0.clone();
        let mut tau = Interval::ZERO;
        let mut steps = Vec::new();
        let mut reason = StopReason::TauBudget;
        if stop(&current) {
            reason = StopReason::EnteredN;
        } else {
            loop {
                let remaining = tau_budget - tau.lo();
                if remaining <= 0.0 || steps.len() >= self.controls.max_steps {
                    break;
                }
                let (next, mut rec) = match self.step(&set, remaining.min(self.controls.h_max)) {
                    Ok(v) => v,
                    Err(_) => {
                        reason = StopReason::StepFailure;
                        break;
                    }
                };
                let tau_next = tau + Interval::point(rec.h);
                rec.tau = tau.hull(tau_next);
                tau = tau_next;
                current = rec.tight.clone();
                set = next;
                steps.push(rec);
                if stop(&current) {
                    reason = StopReason::EnteredN;
                    break;
                }
            }
        }
        Ok(TrajectoryEnclosure { initial: z0.clone(), steps, terminal: current, tau, reason })
    }
}

fn widen(b: &IntervalVector, frac: f64) -> IntervalVector {
    b.iter()
        .map(|v| v.inflate(frac * v.width() + 1e-14 * v.mag().max(1.0) + f64::MIN_POSITIVE))
        .collect()
}

/// Orthogonal frame from QR of `M` with columns ordered by their
/// contribution `‖M_j‖·rad(r_j)`.
fn qr_frame(m: &DMatrix<f64>, r: &IntervalVector) -> DMatrix<f64> {
    let n = m.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    let weight = |j: usize| m.column(j).norm() * r[j].rad();
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)));
    let permuted = DMatrix::from_fn(n, n, |i, j| m[(i, order[j])]);
    let q = permuted.qr().q();
    if q.iter().all(|v| v.is_finite()) {
        q
    } else {
        DMatrix::identity(n, n)
    }
}

/// Integrates the augmented system of `sys` until `stop` holds on the
/// `x` part or `tau_budget` is exhausted.
pub fn integrate_until(
    sys: &CompactifiedSystem,
    z0: &IntervalVector,
    tau_budget: f64,
    controls: IntegratorControls,
    mut stop: impl FnMut(&IntervalVector) -> bool,
) -> Result<TrajectoryEnclosure, IntegratorError> {
    let m = sys.dim();
    let flow = FlowIntegrator::new(sys.augmented(), controls);
    flow.integrate(z0, tau_budget, |z| {
        let x: IntervalVector = z[..m].iter().copied().collect();
        stop(&x)
    })
}

/// Integrates until the Lyapunov sublevel set `{L < ε²}` is entered
/// rigorously, or to `tau_budget` without a certificate.
pub fn integrate_until_entry(
    sys: &CompactifiedSystem,
    z0: &IntervalVector,
    cert: Option<&crate::lyapunov::LyapunovCertificate>,
    tau_budget: f64,
    controls: IntegratorControls,
) -> Result<TrajectoryEnclosure, IntegratorError> {
    match cert {
        Some(c) => {
            let eps2 = c.epsilon.sqr();
            integrate_until(sys, z0, tau_budget, controls, |x| c.eval_l(x).hi() < eps2.lo())
        }
        None => integrate_until(sys, z0, tau_budget, controls, |_| false),
    }
}

/// Step log: `tau_lo,tau_hi,t_lo,t_hi,x1_lo,x1_hi,...` (state at step end).
pub fn write_steps_csv(sys: &CompactifiedSystem, traj: &TrajectoryEnclosure, mut out: impl Write) -> io::Result<()> {
    let m = sys.dim();
    let t = sys.t_index();
    let mut header = String::from("tau_lo,tau_hi,t_lo,t_hi");
    for i in 1..=m {
        header.push_str(&format!(",x{i}_lo,x{i}_hi"));
    }
    writeln!(out, "{header}")?;
    for rec in &traj.steps {
        let mut line = format!("{:e},{:e},{:e},{:e}", rec.tau.lo(), rec.tau.hi(), rec.tight[t].lo(), rec.tight[t].hi());
        for v in rec.tight[..m].iter() {
            line.push_str(&format!(",{:e},{:e}", v.lo(), v.hi()));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
