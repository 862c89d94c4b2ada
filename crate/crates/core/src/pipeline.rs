//! The four-stage blow-up validation: compactify, locate the critical
//! point at infinity, integrate into its Lyapunov sublevel set, and bound
//! the remaining original time.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::compactify::{build_normalized, check_applicability, CompactificationKind, CompactifiedSystem};
use crate::decimal::parse_enclosure;
use crate::equilibria::{newton_refine, verify_with_retry, EquilibriumEnclosure};
use crate::integrator::{integrate_until, IntegratorControls, StopReason, TrajectoryEnclosure};
use crate::interval::{gershgorin_bounds, Interval, IntervalVector};
use crate::lyapunov::{build_y, eval_l, verify_domain, LyapunovCertificate};
use crate::polyfield::{Monomial, PolyVectorField, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindChoice {
    Auto,
    Poincare,
    Parabolic,
}

impl From<CompactificationKind> for KindChoice {
    fn from(k: CompactificationKind) -> Self {
        match k {
            CompactificationKind::Poincare => KindChoice::Poincare,
            CompactificationKind::Parabolic => KindChoice::Parabolic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineControls {
    pub integrator: IntegratorControls,
    pub tau_budget: f64,
    /// Fixed `ε`; adaptive when `None`.
    pub epsilon: Option<f64>,
    /// Integration stops once `L(x) ≤ l_target` (adaptive `ε` only).
    pub l_target: f64,
    pub seed_direction: Option<Vec<f64>>,
}

impl Default for PipelineControls {
    fn default() -> Self {
        PipelineControls {
            integrator: IntegratorControls::default(),
            tau_budget: 200.0,
            epsilon: None,
            l_target: 1e-20,
            seed_direction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub field: PolyVectorField,
    pub y0: IntervalVector,
    pub kind: KindChoice,
    pub controls: PipelineControls,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("unknown builtin problem `{0}`")]
    UnknownProblem(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("degree {0} too low: the tail bound diverges for d ≤ 1")]
    DegreeTooLow(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Applicability,
    Setup,
    Equilibrium,
    Integration,
    LyapunovDomain,
    TailBound,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    BlowUpValidated,
    Failed { stage: Stage, reason: String },
}

impl Verdict {
    pub fn is_validated(&self) -> bool {
        matches!(self, Verdict::BlowUpValidated)
    }

    pub fn failed_stage(&self) -> Option<Stage> {
        match self {
            Verdict::Failed { stage, .. } => Some(*stage),
            Verdict::BlowUpValidated => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::BlowUpValidated => write!(f, "BlowUpValidated"),
            Verdict::Failed { stage, reason } => write!(f, "Failed({stage}): {reason}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub setup: f64,
    pub equilibrium: f64,
    pub integration: f64,
    pub lyapunov: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowUpCertificate {
    pub problem: String,
    pub dim: usize,
    pub degree: u32,
    pub kind: Option<CompactificationKind>,
    pub equilibrium: Option<EquilibriumEnclosure>,
    pub lyapunov: Option<LyapunovCertificate>,
    /// Gershgorin disks (real parts) of `Dg(x*)`.
    pub jacobian_disks: Option<Vec<Interval>>,
    pub tau_n: Option<Interval>,
    pub t_n: Option<Interval>,
    pub x_n: Option<IntervalVector>,
    pub l_n: Option<Interval>,
    pub tail: Option<Interval>,
    pub t_max: Option<Interval>,
    pub steps: usize,
    pub verdict: Verdict,
    pub timings: Timings,
    pub trajectory: Option<TrajectoryEnclosure>,
}

impl BlowUpCertificate {
    fn new(p: &Problem) -> Self {
        BlowUpCertificate {
            problem: p.name.clone(),
            dim: p.field.dim(),
            degree: p.field.degree(),
            kind: None,
            equilibrium: None,
            lyapunov: None,
            jacobian_disks: None,
            tau_n: None,
            t_n: None,
            x_n: None,
            l_n: None,
            tail: None,
            t_max: None,
            steps: 0,
            verdict: Verdict::Failed { stage: Stage::Setup, reason: "not run".into() },
            timings: Timings::default(),
            trajectory: None,
        }
    }

    /// The pattern of nonzero components of `x*` (which components blow up
    /// at the leading rate).
    pub fn blowup_pattern(&self) -> Option<Vec<bool>> {
        self.equilibrium.as_ref().map(|e| e.enclosure.iter().map(|v| !v.contains(0.0)).collect())
    }
}

/// Upper bound on `t_max − t_N` under the Poincaré compactification:
/// `[0, 2^{(d−1)/2} c₁^{(d−1)/4} λmax(Y) / c_Ñ · 4/(d−1) · L_N^{(d−1)/4}]`.
pub fn tail_bound_poincare(
    l_n: Interval,
    c1: Interval,
    c_n: Interval,
    lambda_max: f64,
    d: u32,
) -> Result<Interval, PipelineError> {
    tail_bound(l_n, c1, c_n, lambda_max, d, CompactificationKind::Poincare)
}

/// Parabolic analogue:
/// `[0, 2^d c₁^{(d−1)/2} λmax(Y) / c_Ñ · 2/(d−1) · L_N^{(d−1)/2}]`.
pub fn tail_bound_parabolic(
    l_n: Interval,
    c1: Interval,
    c_n: Interval,
    lambda_max: f64,
    d: u32,
) -> Result<Interval, PipelineError> {
    tail_bound(l_n, c1, c_n, lambda_max, d, CompactificationKind::Parabolic)
}

fn tail_bound(
    l_n: Interval,
    c1: Interval,
    c_n: Interval,
    lambda_max: f64,
    d: u32,
    kind: CompactificationKind,
) -> Result<Interval, PipelineError> {
    if d <= 1 {
        return Err(PipelineError::DegreeTooLow(d));
    }
    let bad = |what: &str| PipelineError::BadParams(format!("tail bound: {what}"));
    if !(c_n.lo() > 0.0) || !(c1.hi() > 0.0) || !(lambda_max > 0.0) {
        return Err(bad("constants must be positive"));
    }
    let l = l_n.hi().max(0.0);
    if l == 0.0 {
        return Ok(Interval::ZERO);
    }
    let e = d as i32 - 1;
    let (two_pow, c1_pow, l_pow, lead) = match kind {
        CompactificationKind::Poincare => (
            Interval::point(2.0).rational_pow(e, 2),
            Interval::point(c1.hi()).rational_pow(e, 4),
            Interval::point(l).rational_pow(e, 4),
            Interval::point(4.0),
        ),
        CompactificationKind::Parabolic => (
            Ok(Interval::point(2.0).powi(d)),
            Interval::point(c1.hi()).rational_pow(e, 2),
            Interval::point(l).rational_pow(e, 2),
            Interval::point(2.0),
        ),
    };
    let map = |r: Result<Interval, _>| r.map_err(|err: crate::interval::IntervalError| bad(&err.to_string()));
    let upper = map(two_pow)? * map(c1_pow)? * Interval::point(lambda_max) * map(l_pow)? * lead;
    let upper = map(upper.div(Interval::point(c_n.lo())))?;
    let upper = map(upper.div(Interval::point(e as f64)))?;
    Ok(Interval::new(0.0, upper.hi()))
}

/// Chooses the compactification: Poincaré when applicable under `Auto`.
pub fn select_kind(field: &PolyVectorField, choice: KindChoice) -> CompactificationKind {
    match choice {
        KindChoice::Poincare => CompactificationKind::Poincare,
        KindChoice::Parabolic => CompactificationKind::Parabolic,
        KindChoice::Auto => {
            if check_applicability(field, CompactificationKind::Poincare).ok {
                CompactificationKind::Poincare
            } else {
                CompactificationKind::Parabolic
            }
        }
    }
}

/// Runs the whole scenario; every failure is captured in the verdict.
pub fn validate_blowup(p: &Problem) -> BlowUpCertificate {
    let start = Instant::now();
    let mut cert = BlowUpCertificate::new(p);
    let verdict = run_stages(p, &mut cert);
    cert.verdict = verdict;
    cert.timings.total = start.elapsed().as_secs_f64();
    cert
}

fn fail(stage: Stage, reason: impl Into<String>) -> Verdict {
    Verdict::Failed { stage, reason: reason.into() }
}

fn run_stages(p: &Problem, cert: &mut BlowUpCertificate) -> Verdict {
    let t0 = Instant::now();
    if p.y0.len() != p.field.dim() || p.field.nvars() != p.field.dim() {
        return fail(Stage::Setup, "initial value and field dimensions disagree");
    }
    let kind = select_kind(&p.field, p.kind);
    cert.kind = Some(kind);
    let report = check_applicability(&p.field, kind);
    if !report.ok {
        return fail(Stage::Applicability, report.message);
    }
    let sys = match build_normalized(&p.field, kind) {
        Ok(s) => s,
        Err(e) => return fail(Stage::Applicability, e.to_string()),
    };
    let z0 = match sys.initial_state(&p.y0) {
        Ok(z) => z,
        Err(e) => return fail(Stage::Setup, e.to_string()),
    };
    cert.timings.setup = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let x0: Vec<f64> = z0[..sys.dim()].iter().map(|v| v.mid()).collect();
    let x_star = match locate_equilibrium(&sys, &x0, p.controls.seed_direction.as_deref()) {
        Ok(e) => e,
        Err(v) => return v,
    };
    cert.equilibrium = Some(x_star.clone());
    cert.timings.equilibrium = t1.elapsed().as_secs_f64();

    let dg = match sys.g().jacobian().eval(&x_star.enclosure) {
        Ok(j) => j,
        Err(e) => return fail(Stage::LyapunovDomain, e.to_string()),
    };
    cert.jacobian_disks = Some(gershgorin_bounds(&dg, false));
    let y = match build_y(&dg) {
        Ok(y) => y,
        Err(e) => return fail(Stage::LyapunovDomain, e.to_string()),
    };

    let mut target = p.controls.l_target;
    let mut fixed_cert = None;
    if let Some(eps) = p.controls.epsilon {
        let tl = Instant::now();
        match verify_domain(&sys, &x_star, &y, eps) {
            Ok(c) => {
                target = c.epsilon.sqr().lo();
                fixed_cert = Some(c);
            }
            Err(e) => return fail(Stage::LyapunovDomain, e.to_string()),
        }
        cert.timings.lyapunov += tl.elapsed().as_secs_f64();
    }

    // A retry continues from where the previous attempt stopped.
    let (mut start, mut tau_off, mut done) = (z0.clone(), Interval::ZERO, Vec::new());
    for _attempt in 0..3 {
        let ti = Instant::now();
        let xs = x_star.enclosure.clone();
        let strict = fixed_cert.is_some();
        let stall_accept = STALL_ACCEPT * (target / p.controls.l_target);
        let (mut best, mut since) = (f64::INFINITY, 0usize);
        let budget = p.controls.tau_budget - tau_off.lo();
        let traj = integrate_until(&sys, &start, budget, p.controls.integrator, |x| {
            let l = eval_l(&y, &xs, x).hi();
            if strict {
                return l < target;
            }
            if l < 0.9 * best {
                best = l;
                since = 0;
            } else {
                since += 1;
            }
            // Once the enclosure width dominates, L stops decreasing.
            l <= target || (l <= stall_accept && since >= STALL_STEPS)
        });
        cert.timings.integration += ti.elapsed().as_secs_f64();
        let mut traj = match traj {
            Ok(t) => t,
            Err(e) => return fail(Stage::Integration, e.to_string()),
        };
        for rec in traj.steps.iter_mut() {
            rec.tau = rec.tau + tau_off;
        }
        done.append(&mut traj.steps);
        traj.steps = std::mem::take(&mut done);
        traj.tau = traj.tau + tau_off;
        traj.initial = z0.clone();
        cert.steps = traj.steps.len();
        if traj.reason != StopReason::EnteredN {
            let why = match traj.reason {
                StopReason::StepFailure => "step size underflow before reaching the Lyapunov neighbourhood",
                _ => "τ budget exhausted before reaching the Lyapunov neighbourhood",
            };
            cert.trajectory = Some(traj);
            return fail(Stage::Integration, why);
        }
        let x_n: IntervalVector = traj.terminal[..sys.dim()].iter().copied().collect();
        let l_n = eval_l(&y, &x_star.enclosure, &x_n);
        cert.tau_n = Some(traj.tau);
        cert.t_n = Some(traj.terminal[sys.t_index()]);
        cert.x_n = Some(x_n);
        cert.l_n = Some(l_n);
        cert.trajectory = Some(traj);

        let tl = Instant::now();
        let lyap = match &fixed_cert {
            Some(c) => Ok(c.clone()),
            None => verify_domain(&sys, &x_star, &y, adaptive_epsilon(l_n)),
        };
        cert.timings.lyapunov += tl.elapsed().as_secs_f64();
        match lyap {
            Ok(c) => {
                debug_assert!(l_n.hi() < c.epsilon.sqr().lo());
                cert.lyapunov = Some(c);
                break;
            }
            Err(_) if fixed_cert.is_none() && target > 1e-200 => {
                target *= 1e-4;
                cert.lyapunov = None;
                let traj = cert.trajectory.as_ref().expect("set above");
                start = traj.terminal.clone();
                tau_off = traj.tau;
                done = traj.steps.clone();
            }
            Err(e) => return fail(Stage::LyapunovDomain, e.to_string()),
        }
    }
    let Some(lyap) = cert.lyapunov.clone() else {
        return fail(Stage::LyapunovDomain, "could not certify a Lyapunov domain around x*");
    };

    let l_n = cert.l_n.expect("set with lyapunov");
    let tail = match tail_bound(l_n, lyap.c1, lyap.c_n, lyap.lambda_max_y, sys.degree(), kind) {
        Ok(t) => t,
        Err(PipelineError::DegreeTooLow(d)) => {
            return fail(Stage::TailBound, format!("possible grow-up, blow-up not certified (degree {d})"))
        }
        Err(e) => return fail(Stage::TailBound, e.to_string()),
    };
    let t_n = cert.t_n.expect("set with lyapunov");
    let upper = (Interval::point(t_n.hi()) + Interval::point(tail.hi())).hi();
    if !upper.is_finite() {
        return fail(Stage::TailBound, "tail bound is not finite");
    }
    cert.tail = Some(tail);
    cert.t_max = Some(Interval::new(t_n.lo(), upper));
    Verdict::BlowUpValidated
}

const STALL_ACCEPT: f64 = 1e-8;
const STALL_STEPS: usize = 200;

/// `ε` with `ε² ≥ 1.01·L_N` strictly above the enclosure of `L_N`.
fn adaptive_epsilon(l_n: Interval) -> f64 {
    let l = (l_n.hi() * 1.01).max(f64::MIN_POSITIVE);
    let mut eps = Interval::point(l).sqrt().expect("positive").hi();
    while !(Interval::point(eps).sqr().lo() > l_n.hi()) {
        eps = eps.next_up();
    }
    eps
}

/// Direction seeding by a floating RK4 run of `g`, Newton refinement and
/// Krawczyk verification of the boundary critical point it approaches.
fn locate_equilibrium(
    sys: &CompactifiedSystem,
    x0: &[f64],
    user_seed: Option<&[f64]>,
) -> Result<EquilibriumEnclosure, Verdict> {
    let end = rk4_limit(sys.g(), x0, 400.0);
    let mut seeds = vec![end.clone()];
    let n = end.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        seeds.push(end.iter().map(|v| v / n).collect());
    }
    if let Some(s) = user_seed {
        if s.len() != sys.dim() {
            return Err(fail(Stage::Equilibrium, "seed direction has the wrong dimension"));
        }
        let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.0 {
            seeds.insert(0, s.iter().map(|v| v / n).collect());
        }
    }
    let mut last_err = String::from("Newton iteration did not converge near the limiting direction");
    for seed in seeds {
        let Some(c) = newton_refine(sys.g(), &seed, 60, 1e-13) else { continue };
        let r2: f64 = c.iter().map(|v| v * v).sum();
        if (r2 - 1.0).abs() > 1e-8 {
            last_err = format!("trajectory approaches a point with ‖x‖² = {r2:.6}, not a critical point at infinity");
            continue;
        }
        match verify_with_retry(sys, &c) {
            Ok(e) if e.on_boundary => return Ok(e),
            Ok(_) => last_err = "verified zero of g is not on the boundary sphere".into(),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(fail(Stage::Equilibrium, last_err))
}

/// Non-rigorous RK4 in τ until `g` is negligible or `tau_max` is reached.
pub fn rk4_limit(g: &PolyVectorField, x0: &[f64], tau_max: f64) -> Vec<f64> {
    let jac = g.jacobian();
    let mut x = x0.to_vec();
    let mut tau = 0.0;
    let axpy = |x: &[f64], k: &[f64], a: f64| -> Vec<f64> { x.iter().zip(k).map(|(u, v)| u + a * v).collect() };
    while tau < tau_max {
        let k1 = g.eval_f64(&x);
        if k1.iter().fold(0.0f64, |a, v| a.max(v.abs())) < 1e-13 {
            break;
        }
        let jn = jac.eval_f64(&x).abs().row_sum().max();
        let h = (0.5 / (1.0 + jn)).clamp(1e-5, 0.05);
        let k2 = g.eval_f64(&axpy(&x, &k1, h / 2.0));
        let k3 = g.eval_f64(&axpy(&x, &k2, h / 2.0));
        let k4 = g.eval_f64(&axpy(&x, &k3, h));
        for i in 0..x.len() {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return x0.to_vec();
        }
        tau += h;
    }
    x
}

fn param<'a>(params: &'a [(&str, &str)], key: &str) -> Option<&'a str> {
    params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn decimal_param(params: &[(&str, &str)], key: &str, default: &str) -> Result<Interval, PipelineError> {
    let s = param(params, key).unwrap_or(default);
    parse_enclosure(s).map_err(|e| PipelineError::BadParams(format!("{key} = {s}: {e}")))
}

fn term(nvars: usize, c: Interval, exps: Vec<u32>) -> Monomial {
    debug_assert_eq!(exps.len(), nvars);
    Monomial { coeff: c, exps }
}

fn unit(nvars: usize, i: usize, e: u32) -> Vec<u32> {
    let mut v = vec![0; nvars];
    v[i] = e;
    v
}

fn pair(nvars: usize, i: usize, j: usize) -> Vec<u32> {
    let mut v = vec![0; nvars];
    v[i] += 1;
    v[j] += 1;
    v
}

/// Semi-discrete heat equation `y_k' = n²(y_{k−1} − 2y_k + y_{k+1}) + y_k^q`
/// with `y_0 = y_n = 0`.
fn heat(n: usize, q: u32) -> PolyVectorField {
    let m = n - 1;
    let n2 = Interval::point((n * n) as f64);
    PolyVectorField::new(
        (0..m)
            .map(|k| {
                let mut terms = vec![
                    term(m, n2.scale(-2.0), unit(m, k, 1)),
                    term(m, Interval::ONE, unit(m, k, q)),
                ];
                if k > 0 {
                    terms.push(term(m, n2, unit(m, k - 1, 1)));
                }
                if k + 1 < m {
                    terms.push(term(m, n2, unit(m, k + 1, 1)));
                }
                Polynomial::from_terms(m, terms)
            })
            .collect(),
    )
}

/// The benchmark systems: `ex1` (`a`), `ex2`, `ex3` (`a`, `b`, `c`),
/// `heat3` (`n`), `riccati`, `heat2` (`n`). Parameters are decimal strings.
pub fn builtin_problem(name: &str, params: &[(&str, &str)]) -> Result<Problem, PipelineError> {
    let known: &[&str] = match name {
        "ex1" => &["a"],
        "ex3" => &["a", "b", "c"],
        "heat3" | "heat2" => &["n"],
        "ex2" | "riccati" => &[],
        _ => return Err(PipelineError::UnknownProblem(name.to_string())),
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(k)) {
        return Err(PipelineError::BadParams(format!("`{name}` takes no parameter `{k}`")));
    }
    let one = Interval::ONE;
    let (label, field, y0) = match name {
        "ex1" => {
            let a = decimal_param(params, "a", "0.25")?;
            let f = PolyVectorField::new(vec![Polynomial::from_terms(1, vec![term(1, one, vec![2])])]);
            (format!("ex1(a={})", param(params, "a").unwrap_or("0.25")), f, IntervalVector::new(vec![a]))
        }
        "ex2" => {
            let f = PolyVectorField::new(vec![
                Polynomial::from_terms(2, vec![term(2, one, vec![2, 0]), term(2, one, vec![0, 2]), term(2, -one, vec![0, 0])]),
                Polynomial::from_terms(2, vec![term(2, Interval::point(5.0), vec![1, 1]), term(2, Interval::point(-5.0), vec![0, 0])]),
            ]);
            ("ex2".to_string(), f, IntervalVector::from_points(&[1.0, 1.0]))
        }
        "ex3" => {
            let a = decimal_param(params, "a", "-1.5")?;
            let b = decimal_param(params, "b", "1.0")?;
            let c = decimal_param(params, "c", "-1.25")?;
            let f = PolyVectorField::new(vec![
                Polynomial::from_terms(3, vec![term(3, a - c, pair(3, 0, 2)), term(3, -b, pair(3, 1, 2))]),
                Polynomial::from_terms(3, vec![term(3, b, pair(3, 0, 2)), term(3, a - c, pair(3, 1, 2))]),
                Polynomial::from_terms(3, vec![term(3, -c, unit(3, 2, 2))]),
            ]);
            let y0 = IntervalVector::new(vec![parse_enclosure("0.1").expect("literal"); 3]);
            let label = format!(
                "ex3(a={},b={},c={})",
                param(params, "a").unwrap_or("-1.5"),
                param(params, "b").unwrap_or("1.0"),
                param(params, "c").unwrap_or("-1.25")
            );
            (label, f, y0)
        }
        "riccati" => {
            let f = PolyVectorField::new(vec![
                Polynomial::from_terms(2, vec![term(2, one, vec![2, 0]), term(2, one, vec![0, 1])]),
                Polynomial::from_terms(2, vec![term(2, one, vec![0, 0])]),
            ]);
            ("riccati".to_string(), f, IntervalVector::from_points(&[0.5, 0.0]))
        }
        "heat3" | "heat2" => {
            let raw = param(params, "n").unwrap_or("4");
            let n: usize = raw.parse().map_err(|_| PipelineError::BadParams(format!("n = {raw}")))?;
            if n < 2 {
                return Err(PipelineError::BadParams(format!("n = {n} must be at least 2")));
            }
            let q = if name == "heat3" { 3 } else { 2 };
            (format!("{name}(n={n})"), heat(n, q), IntervalVector::from_points(&vec![10.0; n - 1]))
        }
        _ => unreachable!(),
    };
    Ok(Problem { name: label, field, y0, kind: KindChoice::Auto, controls: PipelineControls::default() })
}
