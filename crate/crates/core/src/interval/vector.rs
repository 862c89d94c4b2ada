use std::ops::{Deref, DerefMut};

use super::Interval;

/// A box in R^n.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(entries: Vec<Interval>) -> Self {
        IntervalVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        IntervalVector(vec![Interval::ZERO; n])
    }

    pub fn from_points(x: &[f64]) -> Self {
        x.iter().map(|&v| Interval::point(v)).collect()
    }

    /// `center_i ± radius` in every coordinate.
    pub fn ball(center: &[f64], radius: f64) -> Self {
        center.iter().map(|&c| Interval::around(c, radius)).collect()
    }

    pub fn into_inner(self) -> Vec<Interval> {
        self.0
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.mid()).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(|x| x.width()).fold(0.0, f64::max)
    }

    pub fn dot(&self, other: &IntervalVector) -> Interval {
        assert_eq!(self.len(), other.len(), "dot: dimension mismatch");
        self.0.iter().zip(other.iter()).map(|(a, b)| *a * *b).sum()
    }

    pub fn norm_sq(&self) -> Interval {
        self.0.iter().map(|a| a.sqr()).sum()
    }

    pub fn add(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(other.iter()).map(|(a, b)| *a + *b).collect()
    }

    pub fn sub(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(other.iter()).map(|(a, b)| *a - *b).collect()
    }

    pub fn scale(&self, c: Interval) -> IntervalVector {
        self.0.iter().map(|a| *a * c).collect()
    }

    pub fn hull(&self, other: &IntervalVector) -> IntervalVector {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(other.iter()).map(|(a, b)| a.hull(*b)).collect()
    }

    pub fn intersect(&self, other: &IntervalVector) -> Option<IntervalVector> {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(other.iter())
            .map(|(a, b)| a.intersect(*b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalVector)
    }

    /// `other ⊆ self` componentwise.
    pub fn contains_box(&self, other: &IntervalVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(other.iter()).all(|(a, b)| a.contains_interval(*b))
    }

    /// `other ⊂ int(self)` componentwise.
    pub fn interior_contains(&self, other: &IntervalVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(other.iter()).all(|(a, b)| a.interior_contains(*b))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    pub fn inflate(&self, r: f64) -> IntervalVector {
        self.0.iter().map(|a| a.inflate(r)).collect()
    }
}

impl Deref for IntervalVector {
    type Target = [Interval];
    fn deref(&self) -> &[Interval] {
        &self.0
    }
}

impl DerefMut for IntervalVector {
    fn deref_mut(&mut self) -> &mut [Interval] {
        &mut self.0
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

impl From<Vec<Interval>> for IntervalVector {
    fn from(v: Vec<Interval>) -> Self {
        IntervalVector(v)
    }
}

impl std::fmt::Display for IntervalVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}
