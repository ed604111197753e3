//! Sparse multivariate polynomials over `F_q^n` and polynomial families.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order
//! (and therefore formatting) is deterministic. Polynomials are stored as
//! written; Frobenius identities like `x^q = x` only take effect through
//! evaluation, never through term rewriting.

mod degree;
mod parse;
mod rank;

pub use degree::variety_degree_estimate;
pub use parse::{format_poly, parse_poly};
pub use rank::{
    classical_quadratic_rank, family_rank, is_function_of, schmidt_rank, symmetric_matrix,
    RankBound,
};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::Result;

pub type Monomial = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    pub n: usize,
    /// exponent vector -> nonzero coefficient
    pub terms: BTreeMap<Monomial, FqElem>,
}

impl MultiPoly {
    pub fn zero(n: usize) -> Self {
        MultiPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: FqElem) -> Self {
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    /// The variable `x_i` as a polynomial.
    pub fn var(n: usize, i: usize, f: &Field) -> Self {
        let mut exps = vec![0u16; n];
        exps[i] = 1;
        let mut p = Self::zero(n);
        p.terms.insert(exps, f.one());
        p
    }

    pub fn monomial(n: usize, exps: Monomial, c: FqElem) -> Self {
        debug_assert_eq!(exps.len(), n);
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max total degree (zero polynomial has degree 0 by convention here).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|m| m.iter().map(|&e| e as u32).sum::<u32>());
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn coeff(&self, exps: &[u16]) -> FqElem {
        self.terms.get(exps).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, f: &Field, exps: Monomial, c: FqElem) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(exps.len(), self.n);
        match self.terms.entry(exps) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let s = f.add(*e.get(), c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, f: &Field, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(f, m.clone(), c);
        }
        out
    }

    pub fn neg(&self, f: &Field) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for (m, &c) in &self.terms {
            out.terms.insert(m.clone(), f.neg(c));
        }
        out
    }

    pub fn sub(&self, f: &Field, other: &MultiPoly) -> MultiPoly {
        self.add(f, &other.neg(f))
    }

    pub fn scale(&self, f: &Field, c: FqElem) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (m, &a) in &self.terms {
            out.terms.insert(m.clone(), f.mul(a, c));
        }
        out
    }

    pub fn mul(&self, f: &Field, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.n, other.n);
        let mut out = MultiPoly::zero(self.n);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let exps: Monomial = ma.iter().zip(mb).map(|(&a, &b)| a + b).collect();
                out.add_term(f, exps, f.mul(ca, cb));
            }
        }
        out
    }

    /// Evaluate at a point under field arithmetic.
    pub fn eval(&self, f: &Field, x: &[FqElem]) -> Result<FqElem> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok(self.eval_unchecked(f, x))
    }

    pub fn eval_unchecked(&self, f: &Field, x: &[FqElem]) -> FqElem {
        let mut acc = f.zero();
        for (m, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = f.mul(t, f.pow(x[i], e as u64));
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    seen[i] = true;
                }
            }
        }
        (0..self.n).filter(|&i| seen[i]).collect()
    }

    /// `P(x + s)`, expanded.
    pub fn shift(&self, f: &Field, s: &[FqElem]) -> MultiPoly {
        debug_assert_eq!(s.len(), self.n);
        let mut out = MultiPoly::zero(self.n);
        for (m, &c) in &self.terms {
            let mut term = MultiPoly::constant(self.n, c);
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let lin = MultiPoly::var(self.n, i, f).add(f, &MultiPoly::constant(self.n, s[i]));
                for _ in 0..e {
                    term = term.mul(f, &lin);
                }
            }
            out = out.add(f, &term);
        }
        out
    }

    /// Substitute `x_i <- sum_j A[i][j] y_j`, producing a polynomial in
    /// `m = A[i].len()` variables. Used for linear changes of variables and
    /// for restricting to parametrized subspaces.
    pub fn substitute_linear(&self, f: &Field, images: &[Vec<FqElem>]) -> MultiPoly {
        debug_assert_eq!(images.len(), self.n);
        let m = images.first().map(|v| v.len()).unwrap_or(0);
        let mut out = MultiPoly::zero(m);
        for (mono, &c) in &self.terms {
            let mut term = MultiPoly::constant(m, c);
            for (i, &e) in mono.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut lin = MultiPoly::zero(m);
                for (j, &a) in images[i].iter().enumerate() {
                    if !a.is_zero() {
                        let mut exps = vec![0u16; m];
                        exps[j] = 1;
                        lin.add_term(f, exps, a);
                    }
                }
                for _ in 0..e {
                    term = term.mul(f, &lin);
                }
            }
            out = out.add(f, &term);
        }
        out
    }

    /// Homogeneous component of the given total degree.
    pub fn homogeneous_part(&self, d: u32) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n);
        for (m, &c) in &self.terms {
            if m.iter().map(|&e| e as u32).sum::<u32>() == d {
                out.terms.insert(m.clone(), c);
            }
        }
        out
    }
}

/// A family `{P_i}` over a common ambient dimension; the codimension is the
/// member count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFamily {
    pub n: usize,
    pub members: Vec<MultiPoly>,
}

impl PolyFamily {
    pub fn new(n: usize, members: Vec<MultiPoly>) -> Self {
        debug_assert!(members.iter().all(|p| p.n == n));
        PolyFamily { n, members }
    }

    pub fn codimension(&self) -> usize {
        self.members.len()
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.members.iter().map(|p| p.degree()).collect()
    }

    /// `D = sum d_i`, the quantity in the `D`-large bound.
    pub fn degree_sum(&self) -> u32 {
        self.degrees().iter().sum()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.members.iter().all(|p| p.is_homogeneous())
    }

    pub fn vanishes_at(&self, f: &Field, x: &[FqElem]) -> bool {
        self.members.iter().all(|p| p.eval_unchecked(f, x).is_zero())
    }
}

/// Monomials of exact total degree `d` in `n` variables, lexicographic.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fn rec(out: &mut Vec<Monomial>, cur: &mut Monomial, i: usize, rem: u32) {
        if i + 1 == cur.len() {
            cur[i] = rem as u16;
            out.push(cur.clone());
            cur[i] = 0;
            return;
        }
        for e in 0..=rem {
            cur[i] = e as u16;
            rec(out, cur, i + 1, rem - e);
        }
        cur[i] = 0;
    }
    if n == 0 {
        return out;
    }
    rec(&mut out, &mut cur, 0, d);
    out
}

/// Monomials of total degree `<= d`, optionally capping each exponent (used
/// for reduced function fitting when `q` is small).
pub fn monomials_up_to(n: usize, d: u32, per_var_cap: Option<u16>) -> Vec<Monomial> {
    let mut out = Vec::new();
    for deg in 0..=d {
        for m in monomials_of_degree(n, deg) {
            if let Some(cap) = per_var_cap {
                if m.iter().any(|&e| e > cap) {
                    continue;
                }
            }
            out.push(m);
        }
    }
    out
}
