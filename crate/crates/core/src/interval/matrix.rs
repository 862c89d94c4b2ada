use nalgebra::DMatrix;

use super::round::{add_up, div_down, div_up, sub_down};
use super::{Interval, IntervalVector};

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Interval::ONE } else { Interval::ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntervalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_points(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Interval::point(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Interval) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mid())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, other: &IntervalMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &IntervalMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn mul(&self, other: &IntervalMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product: inner dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        })
    }

    pub fn mul_vec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(self.cols, v.len(), "matrix-vector: dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// Upper bound on the induced infinity norm.
    pub fn norm_inf_upper(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(0.0, |acc, j| add_up(acc, self.get(i, j).mag())))
            .fold(0.0, f64::max)
    }

    /// Rigorous enclosure of the inverse of every member matrix, or `None`
    /// when the midpoint inverse does not contract (`‖I − C·A‖∞ ≥ 1`).
    pub fn enclose_inverse(&self) -> Option<IntervalMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let approx = self.mid().try_inverse()?;
        if approx.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let c = IntervalMatrix::from_points(&approx);
        let residual = IntervalMatrix::identity(n).sub(&c.mul(self));
        let delta = residual.norm_inf_upper();
        if !(delta < 1.0) {
            return None;
        }
        // (I - Δ)^{-1} = I + E with ‖E‖∞ ≤ δ / (1 - δ).
        let eta = div_up(delta, sub_down(1.0, delta));
        let correction = Self::from_fn(n, n, |i, j| {
            let e = Interval::new(-eta, eta);
            if i == j {
                Interval::ONE + e
            } else {
                e
            }
        });
        Some(correction.mul(&c))
    }
}

/// Gershgorin disks projected onto the real axis.
///
/// Row `i` gives `[M_ii.lo − r_i, M_ii.hi + r_i]` with
/// `r_i = Σ_{j≠i} max |M_ij|`. For symmetric members these contain all
/// (real) eigenvalues; in general they contain all real parts.
pub fn gershgorin_bounds(m: &IntervalMatrix, _symmetric: bool) -> Vec<Interval> {
    assert!(m.is_square(), "gershgorin_bounds: matrix must be square");
    (0..m.rows())
        .map(|i| {
            let r = (0..m.cols())
                .filter(|&j| j != i)
                .fold(0.0, |acc, j| add_up(acc, m.get(i, j).mag()));
            let d = m.get(i, i);
            Interval::new(sub_down(d.lo(), r), add_up(d.hi(), r))
        })
        .collect()
}

/// Certified range `[lower, upper]` of the Rayleigh quotient of every
/// symmetric member of an interval matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectrumBounds {
    /// Bounds for symmetric members of `m`.
    ///
    /// Takes the better of plain Gershgorin and Gershgorin applied to the
    /// congruence `Wᵀ M W`, where `W` is an approximate eigenbasis of
    /// `mid(M)`. The congruence result is rescaled by the certified
    /// singular-value range of `W`.
    pub fn symmetric(m: &IntervalMatrix) -> SpectrumBounds {
        let direct = disk_range(&gershgorin_bounds(m, true));
        let Some(rotated) = congruence_range(m) else {
            return direct;
        };
        SpectrumBounds {
            lower: direct.lower.max(rotated.lower),
            upper: direct.upper.min(rotated.upper),
        }
    }
}

fn disk_range(disks: &[Interval]) -> SpectrumBounds {
    SpectrumBounds {
        lower: disks.iter().map(|d| d.lo()).fold(f64::INFINITY, f64::min),
        upper: disks.iter().map(|d| d.hi()).fold(f64::NEG_INFINITY, f64::max),
    }
}

fn congruence_range(m: &IntervalMatrix) -> Option<SpectrumBounds> {
    let n = m.rows();
    let mid = m.mid();
    let sym = (&mid + mid.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, 200)?;
    let w = IntervalMatrix::from_points(&eig.eigenvectors);
    let wt = w.transpose();
    let b = wt.mul(m).mul(&w);
    let beta = disk_range(&gershgorin_bounds(&b, true));
    let gram_defect = wt.mul(&w).sub(&IntervalMatrix::identity(n));
    let delta = gram_defect.norm_inf_upper();
    if !(delta < 0.5) {
        return None;
    }
    let s_lo = sub_down(1.0, delta);
    let s_hi = add_up(1.0, delta);
    let lower = if beta.lower >= 0.0 {
        div_down(beta.lower, s_hi)
    } else {
        div_down(beta.lower, s_lo)
    };
    let upper = if beta.upper >= 0.0 {
        div_up(beta.upper, s_lo)
    } else {
        div_up(beta.upper, s_hi)
    };
    Some(SpectrumBounds { lower, upper })
}
