use proptest::prelude::*;

use super::*;

fn p(x: f64) -> Interval {
    Interval::point(x)
}

fn pts(x: &[f64]) -> Vec<Interval> {
    x.iter().map(|&v| p(v)).collect()
}

fn ex2_field() -> PolyVectorField {
    PolyVectorField::new(vec![
        poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 2]), (-1.0, &[0, 0])]),
        poly(2, &[(5.0, &[1, 1]), (-5.0, &[0, 0])]),
    ])
}

#[test]
fn eval_examples() {
    let sq = poly(1, &[(1.0, &[2])]);
    assert_eq!(sq.eval(&[p(2.0)]).unwrap(), p(4.0));
    let f = ex2_field();
    assert_eq!(f.components()[0].eval(&[p(1.0), p(1.0)]).unwrap(), p(1.0));
    let g = poly(1, &[(1.0, &[2]), (-1.0, &[4])]);
    assert_eq!(g.eval(&[p(1.0)]).unwrap(), p(0.0));
    assert!(matches!(sq.eval(&[p(1.0), p(2.0)]), Err(PolyError::DimensionMismatch { .. })));
}

#[test]
fn horner_skips_exponent_gaps() {
    let q = poly(2, &[(3.0, &[5, 1]), (-2.0, &[1, 3]), (1.0, &[0, 0]), (4.0, &[2, 0])]);
    let x = [1.5, -0.5];
    let v = q.eval(&pts(&x)).unwrap();
    let exact = 3.0 * 1.5f64.powi(5) * -0.5 - 2.0 * 1.5 * (-0.5f64).powi(3) + 1.0 + 4.0 * 2.25;
    assert!(v.contains(exact));
    assert!(v.width() < 1e-13);
}

#[test]
fn canonical_form_merges_and_drops_zeros() {
    let a = poly(1, &[(1.0, &[2]), (2.0, &[2]), (1.0, &[1]), (-1.0, &[1])]);
    assert_eq!(a, poly(1, &[(3.0, &[2])]));
    assert_eq!(a.sub(&a), Polynomial::zero(1));
    assert_eq!(a.degree(), 2);
}

#[test]
fn jacobian_examples() {
    let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])]);
    assert_eq!(*f.jacobian().entry(0, 0), poly(1, &[(2.0, &[1])]));
    let g = PolyVectorField::new(vec![poly(1, &[(1.0, &[2]), (-1.0, &[4])])]);
    let j = g.jacobian();
    assert_eq!(*j.entry(0, 0), poly(1, &[(2.0, &[1]), (-4.0, &[3])]));
    assert_eq!(j.eval(&[p(1.0)]).unwrap().get(0, 0), p(-2.0));
}

#[test]
fn homogeneous_parts_examples() {
    let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])]);
    let parts = f.homogeneous_parts();
    assert_eq!(parts.len(), 3);
    assert!(parts[0].is_zero() && parts[1].is_zero());
    assert_eq!(parts[2], f);

    let parts = ex2_field().homogeneous_parts();
    assert_eq!(parts[0].components()[0], poly(2, &[(-1.0, &[0, 0])]));
    assert_eq!(parts[0].components()[1], poly(2, &[(-5.0, &[0, 0])]));
    assert!(parts[1].is_zero());
    assert_eq!(parts[2].components()[0], poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 2])]));
    assert_eq!(parts[2].components()[1], poly(2, &[(5.0, &[1, 1])]));

    let riccati = PolyVectorField::new(vec![
        poly(2, &[(1.0, &[2, 0]), (1.0, &[0, 1])]),
        poly(2, &[(1.0, &[0, 0])]),
    ]);
    assert_eq!(riccati.degree(), 2);
    let parts = riccati.homogeneous_parts();
    assert_eq!(parts[1].components()[0], poly(2, &[(1.0, &[0, 1])]));
    assert!(parts[1].components()[1].is_zero());
    assert!(!parts[1].is_zero());
}

#[test]
fn compose_scale_examples() {
    // y² with y = x/s, times s²: no s survives.
    let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])]);
    let ft = f.compose_scale(2);
    assert_eq!(ft.components()[0], poly(2, &[(1.0, &[2, 0])]));
    // ex2: s² p_0 + p_2.
    let ft = ex2_field().compose_scale(2);
    assert_eq!(
        ft.components()[1],
        poly(3, &[(5.0, &[1, 1, 0]), (-5.0, &[0, 0, 2])])
    );
    let id: Vec<Polynomial> = (0..2).map(|i| Polynomial::var(2, i)).collect();
    assert_eq!(ex2_field().compose(&id), ex2_field());
}

#[test]
fn compose_substitutes_polynomials() {
    // (y1 + y2)² with y1 = x², y2 = 1.
    let q = poly(2, &[(1.0, &[2, 0]), (2.0, &[1, 1]), (1.0, &[0, 2])]);
    let subs = vec![poly(1, &[(1.0, &[2])]), Polynomial::one(1)];
    assert_eq!(q.compose(&subs), poly(1, &[(1.0, &[4]), (2.0, &[2]), (1.0, &[0])]));
}

#[test]
fn taylor_geometric_series() {
    let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])]);
    let s = TaylorTape::new(&f).series(&[p(1.0)], 12, false);
    for k in 0..=12 {
        assert_eq!(s.coeff(0, k), p(1.0), "k={k}");
    }
    let mut coeffs = vec![IntervalVector::new(vec![p(1.0)])];
    for k in 0..6 {
        let next = taylor_recurrence_step(&f, &coeffs, k);
        assert_eq!(next[0], p(1.0));
        coeffs.push(next);
    }
}

#[test]
fn taylor_zero_and_exponential() {
    let zero = PolyVectorField::new(vec![Polynomial::zero(1)]);
    let s = TaylorTape::new(&zero).series(&[p(3.0)], 5, false);
    assert_eq!(s.coeff(0, 0), p(3.0));
    for k in 1..=5 {
        assert_eq!(s.coeff(0, k), p(0.0));
    }
    let lin = PolyVectorField::new(vec![poly(1, &[(1.0, &[1])])]);
    let s = TaylorTape::new(&lin).series(&[p(1.0)], 15, false);
    let mut fact = 1.0f64;
    for k in 0..=15 {
        if k > 0 {
            fact *= k as f64;
        }
        assert!(s.coeff(0, k).contains(1.0 / fact), "k={k}");
        assert!(s.coeff(0, k).width() <= 1e-14 / fact);
    }
}

#[test]
fn taylor_gradients_match_variational_equation() {
    // x' = x²: x(t; x0) = x0/(1 − x0 t), coefficient k is x0^{k+1},
    // so ∂/∂x0 of coefficient k is (k+1) x0^k.
    let f = PolyVectorField::new(vec![poly(1, &[(1.0, &[2])])]);
    let s = TaylorTape::new(&f).series(&[p(0.5)], 8, true);
    for k in 0..=8 {
        let expected = (k + 1) as f64 * 0.5f64.powi(k as i32);
        assert!(s.grad(0, k)[0].contains(expected), "k={k}");
    }
    let jac = s.jacobian(p(0.25), 8);
    // d/dx0 of truncated x0/(1 − x0 t) at t = 1/4, x0 = 1/2 ≈ 1/(1 − 1/8)².
    assert!((jac.get(0, 0).mid() - 1.0 / (0.875f64 * 0.875)).abs() < 1e-6);
}

#[test]
fn taylor_tape_shares_prefix_nodes() {
    let f = PolyVectorField::new(vec![
        poly(2, &[(1.0, &[3, 0]), (1.0, &[2, 1])]),
        poly(2, &[(1.0, &[2, 0])]),
    ]);
    // x, y, x², x³, x²y.
    assert_eq!(TaylorTape::new(&f).node_count(), 5);
}

fn arb_poly(nvars: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (-4i32..=4, prop::collection::vec(0u32..=3, nvars)),
        1..8,
    )
    .prop_map(move |terms| {
        Polynomial::from_terms(
            nvars,
            terms
                .into_iter()
                .map(|(c, e)| Monomial { coeff: Interval::point(c as f64 * 0.5), exps: e })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn homogeneous_scaling(q in arb_poly(2), lam in -2.0f64..2.0, x in prop::array::uniform2(-1.5f64..1.5)) {
        let f = PolyVectorField::new(vec![q]);
        for (j, part) in f.homogeneous_parts().iter().enumerate() {
            let c = &part.components()[0];
            let scaled = c.eval(&pts(&[lam * x[0], lam * x[1]])).unwrap();
            let base = c.eval(&pts(&x)).unwrap() * Interval::point(lam).powi(j as u32);
            prop_assert!(scaled.overlaps(base.inflate(1e-12 * (1.0 + base.mag()))));
        }
    }

    #[test]
    fn parts_sum_to_field(q in arb_poly(3), x in prop::array::uniform3(-1.0f64..1.0)) {
        let f = PolyVectorField::new(vec![q]);
        let whole = f.eval(&pts(&x)).unwrap()[0];
        let split: Interval = f.homogeneous_parts().iter().map(|part| part.eval(&pts(&x)).unwrap()[0]).sum();
        prop_assert!(whole.overlaps(split));
    }

    #[test]
    fn jacobian_matches_finite_differences(q0 in arb_poly(2), q1 in arb_poly(2), x in prop::array::uniform2(-1.0f64..1.0)) {
        let f = PolyVectorField::new(vec![q0, q1]);
        let jac = f.jacobian().eval_f64(&x);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x; xp[j] += h;
            let mut xm = x; xm[j] -= h;
            let fp = f.eval_f64(&xp);
            let fm = f.eval_f64(&xm);
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                prop_assert!((fd - jac[(i, j)]).abs() <= 1e-6 * (1.0 + jac[(i, j)].abs()), "fd {} vs {}", fd, jac[(i, j)]);
            }
        }
    }

    #[test]
    fn interval_eval_encloses_points(q in arb_poly(2), lo in prop::array::uniform2(-1.0f64..1.0), w in prop::array::uniform2(0.0f64..0.5), t in prop::array::uniform2(0.0f64..1.0)) {
        let bx: Vec<Interval> = (0..2).map(|i| Interval::new(lo[i], lo[i] + w[i])).collect();
        let pt = [lo[0] + t[0] * w[0], lo[1] + t[1] * w[1]];
        let encl = q.eval(&bx).unwrap();
        let at = q.eval(&pts(&pt)).unwrap();
        prop_assert!(encl.contains_interval(at));
    }
}
