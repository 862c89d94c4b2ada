//! Sparse multivariate polynomials with interval coefficients, polynomial
//! vector fields, and the Taylor-coefficient machinery used by the validated
//! integrator.

mod taylor;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::interval::{Interval, IntervalVector};

pub use taylor::{taylor_recurrence_step, TaylorSeries, TaylorTape};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// `coeff · x^exps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Interval,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Graded lexicographic order on exponent tuples.
fn grlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

#[derive(Clone, PartialEq, Eq)]
struct GrlexKey(Vec<u32>);

impl Ord for GrlexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex(&self.0, &other.0)
    }
}

impl PartialOrd for GrlexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `nvars` variables, kept in canonical form: terms sorted
/// by graded lex order, no repeated exponent tuples, no exact-zero
/// coefficients.
#[derive(Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Interval) -> Self {
        Self::from_terms(nvars, vec![Monomial { coeff: c, exps: vec![0; nvars] }])
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Interval::ONE)
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Polynomial {
            nvars,
            terms: vec![Monomial { coeff: Interval::ONE, exps }],
        }
    }

    /// Builds the canonical form, merging duplicate exponent tuples.
    pub fn from_terms(nvars: usize, terms: Vec<Monomial>) -> Self {
        let mut acc: BTreeMap<GrlexKey, Interval> = BTreeMap::new();
        for t in terms {
            assert_eq!(t.exps.len(), nvars, "monomial arity mismatch");
            *acc.entry(GrlexKey(t.exps)).or_insert(Interval::ZERO) += t.coeff;
        }
        Polynomial {
            nvars,
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != Interval::ZERO)
                .map(|(k, coeff)| Monomial { coeff, exps: k.0 })
                .collect(),
        }
    }

    /// `Σ_i x_i²`.
    pub fn norm_sq(nvars: usize, first: usize, count: usize) -> Self {
        let terms = (first..first + count)
            .map(|i| {
                let mut exps = vec![0; nvars];
                exps[i] = 2;
                Monomial { coeff: Interval::ONE, exps }
            })
            .collect();
        Self::from_terms(nvars, terms)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest exponent of variable `i` in any term.
    pub fn max_exponent(&self, i: usize) -> u32 {
        self.terms.iter().map(|t| t.exps[i]).max().unwrap_or(0)
    }

    pub fn homogeneous_part(&self, j: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|t| t.degree() == j).cloned().collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        Self::from_terms(self.nvars, self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(Interval::point(-1.0))
    }

    pub fn scale(&self, c: Interval) -> Polynomial {
        Self::from_terms(
            self.nvars,
            self.terms
                .iter()
                .map(|t| Monomial { coeff: t.coeff * c, exps: t.exps.clone() })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    exps: a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect(),
                });
            }
        }
        Self::from_terms(self.nvars, terms)
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exps[i] > 0)
            .map(|t| {
                let mut exps = t.exps.clone();
                let e = exps[i];
                exps[i] -= 1;
                Monomial { coeff: t.coeff.scale(e as f64), exps }
            })
            .collect();
        Self::from_terms(self.nvars, terms)
    }

    /// Re-embeds into `nvars` variables, mapping old variable `i` to
    /// `map[i]`.
    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.nvars);
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut exps = vec![0; nvars];
                for (i, &e) in t.exps.iter().enumerate() {
                    exps[map[i]] += e;
                }
                Monomial { coeff: t.coeff, exps }
            })
            .collect();
        Self::from_terms(nvars, terms)
    }

    /// Symbolic substitution `x_i ↦ subs[i]`; all substitutes must share one
    /// variable count, which becomes the result's.
    pub fn compose(&self, subs: &[Polynomial]) -> Polynomial {
        assert_eq!(subs.len(), self.nvars, "compose: one substitute per variable");
        let n = subs.first().map_or(0, |s| s.nvars);
        let mut powers: Vec<Vec<Polynomial>> = Vec::with_capacity(self.nvars);
        for (i, s) in subs.iter().enumerate() {
            assert_eq!(s.nvars, n);
            let mut p = vec![Polynomial::one(n)];
            for k in 1..=self.max_exponent(i) as usize {
                let next = p[k - 1].mul(s);
                p.push(next);
            }
            powers.push(p);
        }
        let mut acc = Polynomial::zero(n);
        for t in &self.terms {
            let mut m = Polynomial::constant(n, t.coeff);
            for (i, &e) in t.exps.iter().enumerate() {
                if e > 0 {
                    m = m.mul(&powers[i][e as usize]);
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// Interval evaluation in nested Horner form, one variable at a time.
    pub fn eval(&self, x: &[Interval]) -> Result<Interval, PolyError> {
        if x.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, got: x.len() });
        }
        let refs: Vec<&Monomial> = self.terms.iter().collect();
        Ok(horner(&refs, x, 0))
    }

    /// Floating-point evaluation at coefficient midpoints (non-rigorous).
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms
            .iter()
            .map(|t| {
                t.exps
                    .iter()
                    .zip(x)
                    .fold(t.coeff.mid(), |acc, (&e, &v)| acc * v.powi(e as i32))
            })
            .sum()
    }
}

fn horner(terms: &[&Monomial], x: &[Interval], var: usize) -> Interval {
    if terms.is_empty() {
        return Interval::ZERO;
    }
    if var == x.len() {
        return terms.iter().map(|t| t.coeff).sum();
    }
    let mut sorted: Vec<&Monomial> = terms.to_vec();
    sorted.sort_by(|a, b| b.exps[var].cmp(&a.exps[var]));
    let mut acc = Interval::ZERO;
    let mut prev: Option<u32> = None;
    let mut start = 0;
    while start < sorted.len() {
        let e = sorted[start].exps[var];
        let end = start + sorted[start..].iter().take_while(|t| t.exps[var] == e).count();
        let inner = horner(&sorted[start..end], x, var + 1);
        acc = match prev {
            None => inner,
            Some(pe) => acc * x[var].powi(pe - e) + inner,
        };
        prev = Some(e);
        start = end;
    }
    acc * x[var].powi(prev.unwrap_or(0))
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if t.coeff.is_point() {
                write!(f, "{}", t.coeff.lo())?;
            } else {
                write!(f, "{}", t.coeff)?;
            }
            for (i, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// A polynomial map `R^n → R^m`; `m` components over a shared variable
/// count `n` (square for autonomous ODE right-hand sides).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Polynomial>) -> Self {
        if let Some(first) = components.first() {
            let n = first.nvars();
            assert!(
                components.iter().all(|c| c.nvars() == n),
                "components must share the variable count"
            );
        }
        PolyVectorField { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn nvars(&self) -> usize {
        self.components.first().map_or(0, |c| c.nvars())
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[Interval]) -> Result<IntervalVector, PolyError> {
        self.components.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>, _>>().map(IntervalVector::new)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(x)).collect()
    }

    /// Symbolic Jacobian: entry `(i, j)` is `∂F_i/∂x_j`.
    pub fn jacobian(&self) -> PolyMatrix {
        let n = self.nvars();
        PolyMatrix {
            rows: self
                .components
                .iter()
                .map(|c| (0..n).map(|j| c.derivative(j)).collect())
                .collect(),
        }
    }

    /// `[p_0, …, p_d]` with `p_j` the total-degree-`j` terms of each component.
    pub fn homogeneous_parts(&self) -> Vec<PolyVectorField> {
        (0..=self.degree())
            .map(|j| PolyVectorField::new(self.components.iter().map(|c| c.homogeneous_part(j)).collect()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn compose(&self, subs: &[Polynomial]) -> PolyVectorField {
        PolyVectorField::new(self.components.iter().map(|c| c.compose(subs)).collect())
    }

    /// `s^d · F(x / s)`: the field rescaled by `y = x/s` and multiplied by
    /// `s^d`, where `s` is a new last variable. Equals `Σ_j s^{d−j} p_j(x)`.
    pub fn compose_scale(&self, d: u32) -> PolyVectorField {
        let n = self.nvars();
        let map: Vec<usize> = (0..n).collect();
        let s = Polynomial::var(n + 1, n);
        let parts = self.homogeneous_parts();
        let comps = (0..self.dim())
            .map(|i| {
                parts.iter().enumerate().fold(Polynomial::zero(n + 1), |acc, (j, p)| {
                    let lifted = p.components[i].relabel(n + 1, &map);
                    acc.add(&lifted.mul(&s.pow(d - j as u32)))
                })
            })
            .collect();
        PolyVectorField::new(comps)
    }

    /// `⟨x, F(x)⟩` over the first `dim` variables.
    pub fn radial_part(&self) -> Polynomial {
        let n = self.nvars();
        self.components
            .iter()
            .enumerate()
            .fold(Polynomial::zero(n), |acc, (i, c)| acc.add(&Polynomial::var(n, i).mul(c)))
    }
}

/// A matrix of polynomials (symbolic Jacobians).
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    rows: Vec<Vec<Polynomial>>,
}

impl PolyMatrix {
    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.rows[i][j]
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn eval(&self, x: &[Interval]) -> Result<crate::interval::IntervalMatrix, PolyError> {
        let mut out = crate::interval::IntervalMatrix::zeros(self.nrows(), self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.set(i, j, self.rows[i][j].eval(x)?);
            }
        }
        Ok(out)
    }

    pub fn eval_f64(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.nrows(), self.ncols(), |i, j| self.rows[i][j].eval_f64(x))
    }
}

/// Shorthand for building polynomials from `(coeff, exps)` pairs with
/// exactly representable coefficients.
pub fn poly(nvars: usize, terms: &[(f64, &[u32])]) -> Polynomial {
    Polynomial::from_terms(
        nvars,
        terms
            .iter()
            .map(|(c, e)| Monomial { coeff: Interval::point(*c), exps: e.to_vec() })
            .collect(),
    )
}

#[cfg(test)]
mod tests;
