//! Rank computations: decomposition rank (minimal `r` with
//! `P = sum_{i<=r} l_i R_i`, factors of positive degree), the classical rank
//! of the symmetric matrix of a quadratic, and the is-a-function-of
//! predicate.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::linalg::Mat;
use crate::Result;

use super::{monomials_of_degree, Monomial, MultiPoly};

/// Result of a bounded rank search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankBound {
    Exact(u32),
    /// No decomposition with at most `bound` summands was found; the true
    /// rank is at least this value.
    AtLeast(u32),
}

impl RankBound {
    pub fn min(self, other: RankBound) -> RankBound {
        use RankBound::*;
        match (self, other) {
            (Exact(a), Exact(b)) => Exact(a.min(b)),
            (Exact(a), AtLeast(b)) | (AtLeast(b), Exact(a)) => {
                if a <= b {
                    Exact(a)
                } else {
                    // inconclusive region; keep the certified side
                    AtLeast(b)
                }
            }
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
        }
    }
}

struct RankSearch<'a> {
    f: &'a Field,
    budget: u64,
    tested: u64,
}

impl<'a> RankSearch<'a> {
    fn charge(&mut self) -> Result<()> {
        self.tested += 1;
        if self.tested > self.budget {
            Err(Error::InfeasibleSearch { tested: self.tested, budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// Does `P` decompose into at most `r` products? Products are searched
    /// with factor degrees `(a, d-a)` summing to `deg P` (homogeneous factors
    /// when `P` is homogeneous), the class named in the design notes.
    fn decomposes(&mut self, p: &MultiPoly, r: u32) -> Result<bool> {
        if p.is_zero() {
            return Ok(true);
        }
        if r == 0 {
            return Ok(false);
        }
        let d = p.degree();
        if d < 2 {
            // a product of positive-degree factors has degree >= 2
            return Ok(false);
        }
        let homogeneous = p.is_homogeneous();
        for a in 1..=d / 2 {
            let b = d - a;
            let left_basis = factor_basis(p.n, a, homogeneous);
            let right_basis = factor_basis(p.n, b, homogeneous);
            // normalize the left factor projectively: first nonzero coeff = 1
            let mut left = CoeffIter::new(self.f, left_basis.len());
            while let Some(coeffs) = left.next_normalized() {
                let l = assemble(self.f, p.n, &left_basis, coeffs);
                if l.degree() != a {
                    continue;
                }
                let mut right = CoeffIter::new(self.f, right_basis.len());
                while let Some(rc) = right.next_any() {
                    let rp = assemble(self.f, p.n, &right_basis, rc);
                    if rp.degree() != b {
                        continue;
                    }
                    self.charge()?;
                    let rest = p.sub(self.f, &l.mul(self.f, &rp));
                    if self.decomposes(&rest, r - 1)? {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }
}

fn factor_basis(n: usize, degree: u32, homogeneous: bool) -> Vec<Monomial> {
    if homogeneous {
        monomials_of_degree(n, degree)
    } else {
        super::monomials_up_to(n, degree, None)
            .into_iter()
            .filter(|m| m.iter().any(|&e| e > 0)) // positive degree
            .collect()
    }
}

fn assemble(f: &Field, n: usize, basis: &[Monomial], coeffs: &[u32]) -> MultiPoly {
    let mut p = MultiPoly::zero(n);
    for (m, &c) in basis.iter().zip(coeffs) {
        if c != 0 {
            p.add_term(f, m.clone(), f.elem(c));
        }
    }
    p
}

/// Odometer over coefficient vectors in `[0,q)^k`.
struct CoeffIter<'a> {
    f: &'a Field,
    cur: Vec<u32>,
    done: bool,
    started: bool,
}

impl<'a> CoeffIter<'a> {
    fn new(f: &'a Field, k: usize) -> Self {
        CoeffIter { f, cur: vec![0; k], done: k == 0, started: false }
    }

    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let q = self.f.q();
        for slot in self.cur.iter_mut() {
            *slot += 1;
            if *slot < q {
                return true;
            }
            *slot = 0;
        }
        self.done = true;
        false
    }

    /// Next nonzero vector whose first nonzero entry is 1.
    fn next_normalized(&mut self) -> Option<&[u32]> {
        while self.advance() {
            if let Some(first) = self.cur.iter().find(|&&c| c != 0) {
                if *first == 1 {
                    return Some(&self.cur);
                }
            }
        }
        None
    }

    /// Next nonzero vector.
    fn next_any(&mut self) -> Option<&[u32]> {
        while self.advance() {
            if self.cur.iter().any(|&c| c != 0) {
                return Some(&self.cur);
            }
        }
        None
    }
}

/// Decomposition rank of `P` up to `search_bound`, or a lower-bound
/// certificate. `budget` caps the number of candidate products tested.
pub fn schmidt_rank(
    f: &Field,
    p: &MultiPoly,
    search_bound: u32,
    budget: u64,
) -> Result<RankBound> {
    if p.is_zero() {
        return Err(Error::PreconditionViolated("rank of the zero polynomial".into()));
    }
    let mut search = RankSearch { f, budget, tested: 0 };
    for r in 1..=search_bound {
        if search.decomposes(p, r)? {
            return Ok(RankBound::Exact(r));
        }
    }
    Ok(RankBound::AtLeast(search_bound + 1))
}

/// Family rank: minimum decomposition rank over nonzero linear combinations,
/// identically-zero combinations skipped. Combinations are enumerated
/// projectively (rank is scale-invariant).
pub fn family_rank(
    f: &Field,
    members: &[MultiPoly],
    search_bound: u32,
    budget: u64,
) -> Result<RankBound> {
    if members.is_empty() {
        return Err(Error::PreconditionViolated("empty family".into()));
    }
    let n = members[0].n;
    let l = members.len();
    let combos = (f.q() as u64).pow(l as u32);
    if combos > 1 << 22 {
        return Err(Error::InfeasibleSearch { tested: combos, budget });
    }
    let mut best: Option<RankBound> = None;
    let mut coeffs = CoeffIter::new(f, l);
    while let Some(cs) = coeffs.next_normalized() {
        let mut combo = MultiPoly::zero(n);
        for (i, &c) in cs.iter().enumerate() {
            if c != 0 {
                combo = combo.add(f, &members[i].scale(f, f.elem(c)));
            }
        }
        if combo.is_zero() {
            continue;
        }
        let r = schmidt_rank(f, &combo, search_bound, budget)?;
        best = Some(match best {
            None => r,
            Some(b) => b.min(r),
        });
        if matches!(best, Some(RankBound::Exact(1))) {
            break;
        }
    }
    best.ok_or_else(|| Error::PreconditionViolated("all combinations vanish".into()))
}

/// Rank of the symmetric matrix of a homogeneous quadratic (odd
/// characteristic; the diagonalized `r`).
pub fn classical_quadratic_rank(f: &Field, q: &MultiPoly) -> Result<usize> {
    if f.has_char_two() {
        return Err(Error::CharTwo);
    }
    let m = symmetric_matrix(f, q)?;
    Ok(m.rank(f))
}

/// The symmetric matrix `M` with `Q(x) = x^T M x` (odd characteristic).
pub fn symmetric_matrix(f: &Field, q: &MultiPoly) -> Result<Mat> {
    if f.has_char_two() {
        return Err(Error::CharTwo);
    }
    if q.is_zero() || q.degree() != 2 || !q.is_homogeneous() {
        return Err(Error::NotQuadratic);
    }
    let n = q.n;
    let mut m = Mat::zeros(n, n);
    for (mono, &c) in &q.terms {
        let vars: Vec<usize> = mono
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
            .collect();
        match vars.len() {
            1 => m.set(vars[0], vars[0], c),
            2 => {
                let h = f.half(c);
                m.set(vars[0], vars[1], f.add(m.at(vars[0], vars[1]), h));
                m.set(vars[1], vars[0], f.add(m.at(vars[1], vars[0]), h));
            }
            _ => unreachable!("degree-2 monomial touches at most 2 variables"),
        }
    }
    Ok(m)
}

/// Is `P` constant on every nonempty fiber of `x -> (Q_1(x),..,Q_r(x))`?
/// Decided by exhaustive bucketing over `F_q^n`.
pub fn is_function_of(
    f: &Field,
    p: &MultiPoly,
    qs: &[MultiPoly],
    budget: u64,
) -> Result<bool> {
    let n = p.n;
    let total = (f.q() as u64).checked_pow(n as u32).filter(|&t| t <= budget).ok_or(
        Error::BudgetExceeded { needed: u64::MAX, budget },
    )?;
    let mut buckets: BTreeMap<Vec<FqElem>, FqElem> = BTreeMap::new();
    let mut x = vec![f.zero(); n];
    for _ in 0..total {
        let key: Vec<FqElem> = qs.iter().map(|q| q.eval_unchecked(f, &x)).collect();
        let val = p.eval_unchecked(f, &x);
        match buckets.entry(key) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(val);
            }
            alloc::collections::btree_map::Entry::Occupied(e) => {
                if *e.get() != val {
                    return Ok(false);
                }
            }
        }
        // odometer
        for slot in x.iter_mut() {
            let nxt = slot.packed() + 1;
            if nxt < f.q() {
                *slot = f.elem(nxt);
                break;
            }
            *slot = f.zero();
        }
    }
    Ok(true)
}
