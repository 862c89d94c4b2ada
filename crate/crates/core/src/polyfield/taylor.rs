//! Taylor coefficients of solutions of polynomial ODEs by automatic
//! differentiation on a product tape.
//!
//! For `z' = F(z)` the coefficients satisfy
//! `z_{k+1} = [F(z)]_k / (k + 1)`, where `[·]_k` is the k-th coefficient of
//! the composed power series. Every monomial is a chain of binary products
//! over shared prefixes, so each coefficient costs one Cauchy product per
//! tape node. Optionally each coefficient also carries its gradient with
//! respect to the initial value (the variational equation), which the
//! integrator uses for mean-value propagation.

use std::collections::HashMap;

use crate::interval::{Interval, IntervalMatrix, IntervalVector};

use super::PolyVectorField;

#[derive(Clone, Copy, Debug)]
enum Node {
    Var,
    Mul(usize, usize),
}

/// Compiled form of a square polynomial vector field.
#[derive(Clone, Debug)]
pub struct TaylorTape {
    dim: usize,
    nodes: Vec<Node>,
    /// Per component: `(coefficient, node)`; `None` marks the constant term.
    outputs: Vec<Vec<(Interval, Option<usize>)>>,
}

impl TaylorTape {
    pub fn new(field: &PolyVectorField) -> Self {
        let dim = field.dim();
        assert_eq!(dim, field.nvars(), "Taylor tape needs a square field");
        let mut nodes: Vec<Node> = (0..dim).map(|_| Node::Var).collect();
        let mut memo: HashMap<Vec<u32>, usize> = HashMap::new();
        for v in 0..dim {
            let mut e = vec![0; dim];
            e[v] = 1;
            memo.insert(e, v);
        }
        let outputs = field
            .components()
            .iter()
            .map(|c| {
                c.terms()
                    .iter()
                    .map(|t| {
                        if t.degree() == 0 {
                            (t.coeff, None)
                        } else {
                            (t.coeff, Some(monomial_node(&t.exps, &mut nodes, &mut memo)))
                        }
                    })
                    .collect()
            })
            .collect();
        TaylorTape { dim, nodes, outputs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Taylor coefficients `0..=order` of the solution through `z0`.
    ///
    /// With `with_gradient`, each coefficient also carries its derivative
    /// with respect to `z0`, evaluated over the box `z0`.
    pub fn series(&self, z0: &[Interval], order: usize, with_gradient: bool) -> TaylorSeries {
        assert_eq!(z0.len(), self.dim);
        let ng = if with_gradient { self.dim } else { 0 };
        let mut ws = Workspace::new(self.nodes.len(), order, ng);
        for (v, &x) in z0.iter().enumerate() {
            ws.set_val(v, 0, x);
            if ng > 0 {
                ws.grad_mut(v, 0)[v] = Interval::ONE;
            }
        }
        for k in 0..=order {
            self.fill_products(&mut ws, k);
            if k == order {
                break;
            }
            let kk = Interval::point((k + 1) as f64);
            for c in 0..self.dim {
                let (val, grad) = self.component_coefficient(&ws, c, k);
                ws.set_val(c, k + 1, divide(val, kk));
                if ng > 0 {
                    let g = ws.grad_mut(c, k + 1);
                    for (dst, src) in g.iter_mut().zip(grad) {
                        *dst = divide(src, kk);
                    }
                }
            }
        }
        TaylorSeries {
            dim: self.dim,
            order,
            ng,
            val: (0..self.dim).flat_map(|v| (0..=order).map(move |k| (v, k))).map(|(v, k)| ws.val(v, k)).collect(),
            grad: if ng > 0 {
                (0..self.dim)
                    .flat_map(|v| (0..=order).map(move |k| (v, k)))
                    .flat_map(|(v, k)| ws.grad(v, k).to_vec())
                    .collect()
            } else {
                Vec::new()
            },
        }
    }

    /// Coefficient `k` of every product node, given coefficients `0..=k` of
    /// the variables and `0..k` of all nodes.
    fn fill_products(&self, ws: &mut Workspace, k: usize) {
        let ng = ws.ng;
        for (idx, node) in self.nodes.iter().enumerate() {
            let Node::Mul(a, b) = *node else { continue };
            let mut acc = Interval::ZERO;
            for i in 0..=k {
                acc += ws.val(a, i) * ws.val(b, k - i);
            }
            ws.set_val(idx, k, acc);
            if ng > 0 {
                let mut g = std::mem::take(&mut ws.scratch);
                g.clear();
                g.resize(ng, Interval::ZERO);
                for i in 0..=k {
                    let (av, bv) = (ws.val(a, i), ws.val(b, k - i));
                    let ga = ws.grad(a, i);
                    let gb = ws.grad(b, k - i);
                    for j in 0..ng {
                        g[j] = g[j].add_loose(ga[j].mul_loose(bv)).add_loose(av.mul_loose(gb[j]));
                    }
                }
                ws.grad_mut(idx, k).copy_from_slice(&g);
                ws.scratch = g;
            }
        }
    }

    fn component_coefficient(&self, ws: &Workspace, c: usize, k: usize) -> (Interval, Vec<Interval>) {
        let mut val = Interval::ZERO;
        let mut grad = vec![Interval::ZERO; ws.ng];
        for &(coeff, node) in &self.outputs[c] {
            match node {
                None => {
                    if k == 0 {
                        val += coeff;
                    }
                }
                Some(n) => {
                    val += coeff * ws.val(n, k);
                    if ws.ng > 0 {
                        for (g, &d) in grad.iter_mut().zip(ws.grad(n, k)) {
                            *g = g.add_loose(coeff.mul_loose(d));
                        }
                    }
                }
            }
        }
        (val, grad)
    }
}

#[inline]
fn divide(a: Interval, k: Interval) -> Interval {
    a.div(k).expect("positive divisor")
}

fn monomial_node(exps: &[u32], nodes: &mut Vec<Node>, memo: &mut HashMap<Vec<u32>, usize>) -> usize {
    if let Some(&n) = memo.get(exps) {
        return n;
    }
    let v = exps.iter().rposition(|&e| e > 0).expect("nonconstant monomial");
    let mut rest = exps.to_vec();
    rest[v] -= 1;
    let left = monomial_node(&rest, nodes, memo);
    nodes.push(Node::Mul(left, v));
    let idx = nodes.len() - 1;
    memo.insert(exps.to_vec(), idx);
    idx
}

struct Workspace {
    order: usize,
    ng: usize,
    val: Vec<Interval>,
    grad: Vec<Interval>,
    scratch: Vec<Interval>,
}

impl Workspace {
    fn new(nodes: usize, order: usize, ng: usize) -> Self {
        Workspace {
            order,
            ng,
            val: vec![Interval::ZERO; nodes * (order + 1)],
            grad: vec![Interval::ZERO; nodes * (order + 1) * ng],
            scratch: Vec::with_capacity(ng),
        }
    }

    #[inline]
    fn val(&self, node: usize, k: usize) -> Interval {
        self.val[node * (self.order + 1) + k]
    }

    #[inline]
    fn set_val(&mut self, node: usize, k: usize, v: Interval) {
        self.val[node * (self.order + 1) + k] = v;
    }

    #[inline]
    fn grad(&self, node: usize, k: usize) -> &[Interval] {
        let base = (node * (self.order + 1) + k) * self.ng;
        &self.grad[base..base + self.ng]
    }

    #[inline]
    fn grad_mut(&mut self, node: usize, k: usize) -> &mut [Interval] {
        let base = (node * (self.order + 1) + k) * self.ng;
        &mut self.grad[base..base + self.ng]
    }
}

/// Solution Taylor coefficients `z_0..z_order` (and optionally their
/// gradients with respect to the initial value).
#[derive(Clone, Debug)]
pub struct TaylorSeries {
    dim: usize,
    order: usize,
    ng: usize,
    val: Vec<Interval>,
    grad: Vec<Interval>,
}

impl TaylorSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, var: usize, k: usize) -> Interval {
        self.val[var * (self.order + 1) + k]
    }

    pub fn coeffs(&self, k: usize) -> IntervalVector {
        (0..self.dim).map(|v| self.coeff(v, k)).collect()
    }

    /// `∂ z_k[var] / ∂ z0`; panics without gradients.
    pub fn grad(&self, var: usize, k: usize) -> &[Interval] {
        assert!(self.ng > 0, "series computed without gradients");
        let base = (var * (self.order + 1) + k) * self.ng;
        &self.grad[base..base + self.ng]
    }

    /// `Σ_{k ≤ upto} z_k · t^k` for each component (Horner in `t`).
    pub fn sum(&self, t: Interval, upto: usize) -> IntervalVector {
        (0..self.dim)
            .map(|v| (0..=upto).rev().fold(Interval::ZERO, |acc, k| acc * t + self.coeff(v, k)))
            .collect()
    }

    /// Jacobian `Σ_{k ≤ upto} t^k ∂z_k/∂z0` of the truncated Taylor map.
    pub fn jacobian(&self, t: Interval, upto: usize) -> IntervalMatrix {
        IntervalMatrix::from_fn(self.dim, self.dim, |i, j| {
            (0..=upto).rev().fold(Interval::ZERO, |acc, k| acc * t + self.grad(i, k)[j])
        })
    }
}

/// Coefficient `k + 1` of the solution series, given coefficients `0..=k`.
pub fn taylor_recurrence_step(field: &PolyVectorField, coeffs: &[IntervalVector], k: usize) -> IntervalVector {
    assert!(coeffs.len() > k, "need coefficients 0..=k");
    let tape = TaylorTape::new(field);
    let mut ws = Workspace::new(tape.nodes.len(), k, 0);
    for (i, c) in coeffs.iter().take(k + 1).enumerate() {
        assert_eq!(c.len(), tape.dim);
        for v in 0..tape.dim {
            ws.set_val(v, i, c[v]);
        }
    }
    for i in 0..=k {
        tape.fill_products(&mut ws, i);
    }
    let kk = Interval::point((k + 1) as f64);
    (0..tape.dim).map(|c| divide(tape.component_coefficient(&ws, c, k).0, kk)).collect()
}
