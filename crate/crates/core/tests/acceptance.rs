//! One PASS/FAIL line per acceptance criterion. Runs as a plain binary so
//! the lines always reach the test log.

use std::process::ExitCode;
use std::time::Instant;

use blowup_core::compactify::{build_normalized, CompactificationKind};
use blowup_core::equilibria::{krawczyk_verify, newton_candidates, sphere_seeds};
use blowup_core::integrator::{integrate_until, AugmentedState, FlowIntegrator, IntegratorControls, StopReason};
use blowup_core::interval::{gershgorin_bounds, Interval, IntervalMatrix, IntervalVector, SpectrumBounds};
use blowup_core::pipeline::{builtin_problem, validate_blowup, BlowUpCertificate, KindChoice, Stage};
use blowup_core::polyfield::poly;
use blowup_core::polyfield::PolyVectorField;
use blowup_core::report::{contains_decimal, intersects, published_enclosure};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn timed(name: &str, params: &[(&str, &str)], kind: Option<KindChoice>) -> (BlowUpCertificate, f64) {
    let mut p = builtin_problem(name, params).expect("builtin");
    if let Some(k) = kind {
        p.kind = k;
    }
    let t = Instant::now();
    let c = validate_blowup(&p);
    (c, t.elapsed().as_secs_f64())
}

/// Validated, intersects the published enclosure, width and time limits.
fn benchmark(c: &BlowUpCertificate, secs: f64, max_width: f64, max_secs: Option<f64>) -> Outcome {
    let Some(t) = c.t_max else {
        return outcome(false, format!("{}: {}", c.problem, c.verdict));
    };
    let reference = published_enclosure(&c.problem).expect("published enclosure");
    let hit = intersects(&reference, t);
    let narrow = t.width() <= max_width;
    let quick = max_secs.is_none_or(|m| secs <= m);
    outcome(
        c.verdict.is_validated() && hit && narrow && quick,
        format!(
            "{}: t_max [{:.17}, {:.17}] width {:.2e} (≤ {max_width:e}) intersects {hit} in {secs:.2}s",
            c.problem,
            t.lo(),
            t.hi(),
            t.width()
        ),
    )
}

fn criterion1() -> Outcome {
    let (c, secs) = timed("ex1", &[("a", "0.25")], None);
    let mut o = benchmark(&c, secs, 1e-3, Some(10.0));
    let has4 = c.t_max.is_some_and(|t| t.contains(4.0));
    o.ok &= has4;
    o.detail += &format!(", contains 4: {has4}");
    o
}

fn criterion2() -> Outcome {
    let (c, secs) = timed("ex2", &[], None);
    benchmark(&c, secs, 1e-3, Some(60.0))
}

fn criterion3() -> Outcome {
    let (c, secs) = timed("ex3", &[("a", "-1.5"), ("b", "1.0"), ("c", "-1.25")], None);
    benchmark(&c, secs, 1e-2, Some(60.0))
}

fn criterion4() -> Outcome {
    let (poin, _) = timed("riccati", &[], Some(KindChoice::Poincare));
    let refused = poin.verdict.failed_stage() == Some(Stage::Applicability);
    let (para, secs) = timed("riccati", &[], Some(KindChoice::Parabolic));
    let mut o = benchmark(&para, secs, 1e-3, Some(30.0));
    o.ok &= refused;
    o.detail = format!("poincare refused at applicability: {refused}; parabolic {}", o.detail);
    o
}

fn criterion5() -> Outcome {
    let (h3, s3) = timed("heat3", &[("n", "4")], None);
    let a = benchmark(&h3, s3, 1e-6, None);
    let (h2, s2) = timed("heat2", &[("n", "4")], None);
    let b = benchmark(&h2, s2, 1e-3, None);
    outcome(a.ok && b.ok, format!("{}; {}", a.detail, b.detail))
}

fn random_interval(rng: &mut ChaCha8Rng) -> (Interval, f64) {
    let scale = 10f64.powi(rng.gen_range(-3..4));
    let a = rng.gen_range(-1.0..1.0) * scale;
    let w = rng.gen_range(0.0..1.0) * scale * if rng.gen_bool(0.2) { 0.0 } else { 1.0 };
    let x = Interval::new(a, a + w);
    let t: f64 = rng.gen_range(0.0..=1.0);
    let p = (a + t * w).clamp(x.lo(), x.hi());
    (x, p)
}

/// Interval results must contain every point result and grow with their
/// arguments.
fn soundness_intervals(cases: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    for _ in 0..cases {
        let (x, px) = random_interval(&mut rng);
        let (y, py) = random_interval(&mut rng);
        let wide = |v: Interval| v.inflate(0.5 * v.width() + 1e-3 * v.mag());
        let (xw, yw) = (wide(x), wide(y));
        let mut check = |r: Interval, rw: Interval, exact: f64| {
            if !r.contains(exact) || !rw.contains_interval(r) {
                bad += 1;
            }
        };
        check(x + y, xw + yw, px + py);
        check(x - y, xw - yw, px - py);
        check(x * y, xw * yw, px * py);
        check(x.sqr(), xw.sqr(), px * px);
        if !y.contains(0.0) && !yw.contains(0.0) {
            check(x.div(y).unwrap(), xw.div(yw).unwrap(), px / py);
        }
        if x.lo() >= 0.0 {
            check(x.sqrt().unwrap(), xw.abs().sqrt().unwrap(), px.sqrt());
        }
    }
    (cases, bad)
}

/// `y' = y²`, `y(0) = 1`, closed form `1/(1−t)`.
fn soundness_integrator() -> (usize, usize) {
    let field = PolyVectorField::new(vec![poly(2, &[(1.0, &[2, 0])]), poly(2, &[(1.0, &[0, 0])])]);
    let controls = IntegratorControls { h_max: 0.015, ..IntegratorControls::default() };
    let flow = FlowIntegrator::new(&field, controls);
    let z0 = IntervalVector::from_points(&[1.0, 0.0]);
    let traj = flow.integrate(&z0, 0.9, |_| false).expect("integrates");
    let mut bad = 0;
    for s in &traj.steps {
        let t = s.tight[1];
        let exact = Interval::ONE.div(Interval::ONE - t).expect("t < 1");
        if s.tight[0].intersect(exact).is_none() {
            bad += 1;
        }
    }
    (traj.steps.len(), bad)
}

fn soundness_defect() -> (usize, usize) {
    let mut steps = 0;
    let mut bad = 0;
    for name in ["ex1", "ex2"] {
        let p = builtin_problem(name, &[]).unwrap();
        let sys = build_normalized(&p.field, CompactificationKind::Poincare).unwrap();
        assert!(sys.has_aux_s());
        let z0 = sys.initial_state(&p.y0).unwrap();
        let traj = integrate_until(&sys, &z0, 8.0, IntegratorControls::default(), |_| false).unwrap();
        assert_eq!(traj.reason, StopReason::TauBudget);
        for s in &traj.steps {
            steps += 1;
            let state = AugmentedState::from_vector(&sys, &s.tight, s.tau);
            if !state.manifold_defect().is_some_and(|d| d.contains(0.0)) {
                bad += 1;
            }
        }
    }
    (steps, bad)
}

fn soundness_krawczyk() -> (usize, usize) {
    let mut boxes = 0;
    let mut bad = 0;
    for (name, kind) in [
        ("ex1", CompactificationKind::Poincare),
        ("ex2", CompactificationKind::Poincare),
        ("ex3", CompactificationKind::Poincare),
        ("riccati", CompactificationKind::Parabolic),
        ("heat3", CompactificationKind::Poincare),
    ] {
        let p = builtin_problem(name, &[]).unwrap();
        let sys = build_normalized(&p.field, kind).unwrap();
        let out = newton_candidates(&sys, &sphere_seeds(sys.dim(), 200), 50, 1e-13);
        for c in out.candidates {
            if let Ok(e) = krawczyk_verify(&sys, &c, 1e-6) {
                boxes += 1;
                let r = sys.g().eval(&e.enclosure).unwrap();
                if !r.iter().all(|v| v.contains(0.0)) {
                    bad += 1;
                }
            }
        }
    }
    (boxes, bad)
}

fn soundness_gershgorin(count: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    for _ in 0..count {
        let n = rng.gen_range(1..=8);
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-10.0..10.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let im = IntervalMatrix::from_points(&a);
        let disks = gershgorin_bounds(&im, true);
        let spec = SpectrumBounds::symmetric(&im);
        for &lam in a.clone().symmetric_eigen().eigenvalues.iter() {
            let in_disk = disks.iter().any(|d| d.inflate(1e-9 * (1.0 + lam.abs())).contains(lam));
            let in_range = spec.lower - 1e-9 * (1.0 + lam.abs()) <= lam && lam <= spec.upper + 1e-9 * (1.0 + lam.abs());
            if !in_disk || !in_range {
                bad += 1;
            }
        }
    }
    (count, bad)
}

fn criterion6() -> Outcome {
    let (na, ba) = soundness_intervals(10_000);
    let (nb, bb) = soundness_integrator();
    let (nc, bc) = soundness_defect();
    let (nd, bd) = soundness_krawczyk();
    let (ne, be) = soundness_gershgorin(1000);
    let ok = ba == 0 && bb == 0 && nb >= 50 && bc == 0 && bd == 0 && nd > 0 && be == 0;
    outcome(
        ok,
        format!(
            "(a) {ba}/{na} interval violations; (b) {bb}/{nb} checkpoints off y'=y²; (c) {bc}/{nc} steps with defect ∌ 0; (d) {bd}/{nd} Krawczyk boxes with 0 ∉ g; (e) {be}/{ne} matrices with escaping eigenvalues"
        ),
    )
}

fn criterion7() -> Outcome {
    let (p, _) = timed("ex1", &[], Some(KindChoice::Poincare));
    let (q, _) = timed("ex1", &[], Some(KindChoice::Parabolic));
    match (p.t_max, q.t_max) {
        (Some(a), Some(b)) => outcome(
            p.verdict.is_validated() && q.verdict.is_validated() && a.overlaps(b),
            format!("poincare [{:.17}, {:.17}], parabolic [{:.17}, {:.17}]", a.lo(), a.hi(), b.lo(), b.hi()),
        ),
        _ => outcome(false, format!("poincare: {}; parabolic: {}", p.verdict, q.verdict)),
    }
}

fn criterion8() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (a, inv) in [("0.25", "4"), ("0.5", "2"), ("1", "1")] {
        let (c, _) = timed("ex1", &[("a", a)], None);
        let hit = c.t_max.is_some_and(|t| contains_decimal(t, inv));
        ok &= hit && c.verdict.is_validated();
        parts.push(format!("a={a}: ∋ {inv} {hit}"));
    }
    outcome(ok, parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("ex1 blow-up time", criterion1),
        ("ex2 blow-up time", criterion2),
        ("ex3 spiral blow-up time", criterion3),
        ("riccati refusal and parabolic enclosure", criterion4),
        ("heat3(4) and heat2(4)", criterion5),
        ("soundness suite", criterion6),
        ("ex1 cross-compactification", criterion7),
        ("ex1(a) contains 1/a", criterion8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        if !o.ok {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {} [{:.1}s]",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
