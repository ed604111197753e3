//! Varieties `X = {P_i = 0}` inside `V = F_q^n`, point enumeration, function
//! tables, m-cubes and the difference operators `f_m`, `f'_m`.
//!
//! Points are handled as base-`q` indices (`sum packed(x_i) * q^i`), so a
//! point's index doubles as its position in dense tables. Heavy loops run on
//! indices; the `Cube` / `Vec<FqElem>` forms are for the public surface and
//! witnesses.

mod sets;
mod weak;

pub use sets::{
    ancillary_e_density, ancillary_f_density, e_witness_count, f_witness_count,
    fubini_check, measure_homogeneity, y2_count, y3_count, CountMode, DensityReport,
    FiniteMap, FubiniReport,
};
pub use weak::{is_weakly_linear, is_weakly_quadratic, quadratic_on_span, Witness, WitnessReport};

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::poly::PolyFamily;
use crate::Result;

/// Default enumeration budget: `q^n <= 2^26`.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 26;
/// Default budget for triple loops (`q^{3n}` and friends).
pub const DEFAULT_TRIPLE_BUDGET: u64 = 1 << 24;

/// The ambient space `F_q^n` with its index codec.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointSpace {
    pub q: u32,
    pub n: usize,
    pub size: u64,
}

impl PointSpace {
    pub fn new(field: &Field, n: usize) -> Result<PointSpace> {
        let mut size = 1u64;
        for _ in 0..n {
            size = size.checked_mul(field.q() as u64).ok_or(Error::BudgetExceeded {
                needed: u64::MAX,
                budget: DEFAULT_ENUM_BUDGET,
            })?;
        }
        Ok(PointSpace { q: field.q(), n, size })
    }

    #[inline]
    pub fn index_of(&self, pt: &[FqElem]) -> u64 {
        debug_assert_eq!(pt.len(), self.n);
        let mut idx = 0u64;
        for &x in pt.iter().rev() {
            idx = idx * self.q as u64 + x.packed() as u64;
        }
        idx
    }

    #[inline]
    pub fn decode_into(&self, mut idx: u64, out: &mut [FqElem]) {
        for slot in out.iter_mut() {
            *slot = FqElem((idx % self.q as u64) as u32);
            idx /= self.q as u64;
        }
    }

    pub fn decode(&self, idx: u64) -> Vec<FqElem> {
        let mut out = vec![FqElem::default(); self.n];
        self.decode_into(idx, &mut out);
        out
    }

    /// Pointwise field addition on indices.
    pub fn add_idx(&self, f: &Field, a: u64, b: u64) -> u64 {
        let (mut a, mut b) = (a, b);
        let q = self.q as u64;
        let mut out = 0u64;
        let mut base = 1u64;
        for _ in 0..self.n {
            let s = f.add(FqElem((a % q) as u32), FqElem((b % q) as u32));
            out += s.packed() as u64 * base;
            a /= q;
            b /= q;
            base *= q;
        }
        out
    }

    pub fn neg_idx(&self, f: &Field, a: u64) -> u64 {
        let mut a = a;
        let q = self.q as u64;
        let mut out = 0u64;
        let mut base = 1u64;
        for _ in 0..self.n {
            out += f.neg(FqElem((a % q) as u32)).packed() as u64 * base;
            a /= q;
            base *= q;
        }
        out
    }

    pub fn sub_idx(&self, f: &Field, a: u64, b: u64) -> u64 {
        self.add_idx(f, a, self.neg_idx(f, b))
    }
}

/// Streaming enumeration of all points of a space, reusing one buffer.
pub struct PointIter<'a> {
    field: &'a Field,
    buf: Vec<FqElem>,
    next_idx: u64,
    size: u64,
}

impl<'a> PointIter<'a> {
    pub fn new(field: &'a Field, space: PointSpace) -> Self {
        PointIter { field, buf: vec![FqElem::default(); space.n], next_idx: 0, size: space.size }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<(u64, &[FqElem])> {
        if self.next_idx >= self.size {
            return None;
        }
        let idx = self.next_idx;
        self.next_idx += 1;
        if idx == 0 {
            for s in self.buf.iter_mut() {
                *s = FqElem::default();
            }
        } else {
            // odometer increment
            for slot in self.buf.iter_mut() {
                let nxt = slot.packed() + 1;
                if nxt < self.field.q() {
                    *slot = FqElem(nxt);
                    break;
                }
                *slot = FqElem(0);
            }
        }
        Some((idx, &self.buf))
    }
}

/// Precomputed index-addition table for small spaces; turns vertex sums into
/// array lookups inside cube loops.
pub struct AddTable {
    size: usize,
    add: Vec<u32>,
    neg: Vec<u32>,
}

impl AddTable {
    /// Build when `size^2` fits the given entry budget.
    pub fn build(f: &Field, space: &PointSpace, max_entries: u64) -> Option<AddTable> {
        let size = space.size;
        if size.checked_mul(size).map(|t| t > max_entries).unwrap_or(true) {
            return None;
        }
        let size = size as usize;
        let mut add = vec![0u32; size * size];
        let mut neg = vec![0u32; size];
        for a in 0..size {
            neg[a] = space.neg_idx(f, a as u64) as u32;
            for b in 0..=a {
                let s = space.add_idx(f, a as u64, b as u64) as u32;
                add[a * size + b] = s;
                add[b * size + a] = s;
            }
        }
        Some(AddTable { size, add, neg })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        self.add[a as usize * self.size + b as usize] as u64
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.neg[a as usize] as u64
    }
}

/// Either a lookup table or digit arithmetic, whichever the space admits.
pub enum IndexArith<'a> {
    Table(AddTable),
    Direct(&'a Field, PointSpace),
}

impl<'a> IndexArith<'a> {
    pub fn new(f: &'a Field, space: PointSpace) -> Self {
        match AddTable::build(f, &space, 1 << 22) {
            Some(t) => IndexArith::Table(t),
            None => IndexArith::Direct(f, space),
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match self {
            IndexArith::Table(t) => t.add(a, b),
            IndexArith::Direct(f, s) => s.add_idx(f, a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        match self {
            IndexArith::Table(t) => t.neg(a),
            IndexArith::Direct(f, s) => s.neg_idx(f, a),
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }
}

/// An enumerated point set with constant-time membership.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub space: PointSpace,
    /// sorted point indices
    pub idx: Vec<u64>,
    pub mask: BitSet,
}

impl PointSet {
    pub fn from_indices(space: PointSpace, idx: Vec<u64>) -> PointSet {
        let mut mask = BitSet::new(space.size);
        for &i in &idx {
            mask.set(i);
        }
        PointSet { space, idx, mask }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    #[inline]
    pub fn contains(&self, idx: u64) -> bool {
        self.mask.get(idx)
    }
}

/// The zero set of a polynomial family.
#[derive(Clone, Debug)]
pub struct Variety {
    pub field: Field,
    pub family: PolyFamily,
}

impl Variety {
    pub fn new(field: Field, family: PolyFamily) -> Variety {
        Variety { field, family }
    }

    pub fn n(&self) -> usize {
        self.family.n
    }

    pub fn space(&self) -> Result<PointSpace> {
        PointSpace::new(&self.field, self.family.n)
    }

    pub fn contains_point(&self, x: &[FqElem]) -> bool {
        self.family.vanishes_at(&self.field, x)
    }

    /// Exactly the `k`-points of `X`, enumerated. The count can be
    /// cross-checked against the character-sum counter.
    pub fn enumerate_points(&self, budget: u64) -> Result<PointSet> {
        let space = self.space()?;
        if space.size > budget {
            return Err(Error::BudgetExceeded { needed: space.size, budget });
        }
        let mut idx = Vec::new();
        let mut it = PointIter::new(&self.field, space);
        while let Some((i, pt)) = it.next() {
            if self.family.vanishes_at(&self.field, pt) {
                idx.push(i);
            }
        }
        Ok(PointSet::from_indices(space, idx))
    }
}

/// An m-cube `(u | v_1..v_m)`; its vertices are `u + omega . v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    pub base: Vec<FqElem>,
    pub gens: Vec<Vec<FqElem>>,
}

impl Cube {
    pub fn from_indices(space: &PointSpace, base: u64, gens: &[u64]) -> Cube {
        Cube {
            base: space.decode(base),
            gens: gens.iter().map(|&g| space.decode(g)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    /// Vertex `u + omega . v` for a bitmask `omega`.
    pub fn vertex(&self, f: &Field, omega: u32) -> Vec<FqElem> {
        let mut v = self.base.clone();
        for (j, g) in self.gens.iter().enumerate() {
            if omega >> j & 1 == 1 {
                for (vi, gi) in v.iter_mut().zip(g) {
                    *vi = f.add(*vi, *gi);
                }
            }
        }
        v
    }
}

/// A finite function table `f: domain -> F_q`, total on its domain. Lookups
/// outside the domain are errors, never defaults.
#[derive(Clone, Debug)]
pub struct FunctionTable {
    pub space: PointSpace,
    /// sorted domain indices
    pub idx: Vec<u64>,
    pub val: Vec<FqElem>,
    dense: Option<Vec<u32>>,
}

const DENSE_LIMIT: u64 = 1 << 24;

impl FunctionTable {
    pub fn new(space: PointSpace, mut pairs: Vec<(u64, FqElem)>) -> FunctionTable {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let idx: Vec<u64> = pairs.iter().map(|&(i, _)| i).collect();
        let val: Vec<FqElem> = pairs.iter().map(|&(_, v)| v).collect();
        let mut t = FunctionTable { space, idx, val, dense: None };
        t.build_dense();
        t
    }

    /// Table of a function evaluated on an enumerated point set.
    pub fn from_fn(
        field: &Field,
        pts: &PointSet,
        mut f: impl FnMut(&[FqElem]) -> FqElem,
    ) -> FunctionTable {
        let mut buf = vec![FqElem::default(); pts.space.n];
        let mut pairs = Vec::with_capacity(pts.len());
        for &i in &pts.idx {
            pts.space.decode_into(i, &mut buf);
            pairs.push((i, f(&buf)));
        }
        let _ = field;
        FunctionTable::new(pts.space, pairs)
    }

    pub fn from_poly(field: &Field, pts: &PointSet, p: &crate::poly::MultiPoly) -> FunctionTable {
        FunctionTable::from_fn(field, pts, |x| p.eval_unchecked(field, x))
    }

    fn build_dense(&mut self) {
        if self.space.size <= DENSE_LIMIT {
            let mut d = vec![u32::MAX; self.space.size as usize];
            for (&i, &v) in self.idx.iter().zip(&self.val) {
                d[i as usize] = v.packed();
            }
            self.dense = Some(d);
        }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// Is the table total on the whole space?
    pub fn is_total(&self) -> bool {
        self.idx.len() as u64 == self.space.size
    }

    #[inline]
    pub fn get(&self, index: u64) -> Option<FqElem> {
        if let Some(d) = &self.dense {
            let raw = d[index as usize];
            return if raw == u32::MAX { None } else { Some(FqElem(raw)) };
        }
        self.idx.binary_search(&index).ok().map(|p| self.val[p])
    }

    pub fn get_or_err(&self, index: u64) -> Result<FqElem> {
        self.get(index).ok_or(Error::VertexOutsideDomain(index))
    }

    /// Overwrite the value at a domain point (for corruption experiments).
    pub fn set(&mut self, index: u64, v: FqElem) {
        if let Ok(p) = self.idx.binary_search(&index) {
            self.val[p] = v;
            if let Some(d) = &mut self.dense {
                d[index as usize] = v.packed();
            }
        }
    }

    pub fn domain_contains(&self, index: u64) -> bool {
        self.get(index).is_some()
    }
}

/// `f_m(u|v) = sum over omega of (-1)^{|omega|} f(u + omega . v)`; vanishes
/// for polynomials of degree `< m`.
pub fn derivative_fm(field: &Field, f: &FunctionTable, cube: &Cube) -> Result<FqElem> {
    signed_vertex_sum(field, f, cube, false)
}

/// The almost-cube sum: same signs, base vertex omitted.
pub fn derivative_fm_prime(field: &Field, f: &FunctionTable, cube: &Cube) -> Result<FqElem> {
    signed_vertex_sum(field, f, cube, true)
}

fn signed_vertex_sum(
    field: &Field,
    f: &FunctionTable,
    cube: &Cube,
    skip_base: bool,
) -> Result<FqElem> {
    let m = cube.dim();
    let mut acc = field.zero();
    for omega in 0..(1u32 << m) {
        if skip_base && omega == 0 {
            continue;
        }
        let v = cube.vertex(field, omega);
        let idx = f.space.index_of(&v);
        let fv = f.get_or_err(idx)?;
        acc = if omega.count_ones() % 2 == 0 {
            field.add(acc, fv)
        } else {
            field.sub(acc, fv)
        };
    }
    Ok(acc)
}

/// Signed vertex sum on index tuples, for hot loops. All vertices must be in
/// the table's domain.
#[inline]
pub fn fm_on_indices(
    field: &Field,
    arith: &IndexArith,
    f: &FunctionTable,
    base: u64,
    gens: &[u64],
) -> Result<FqElem> {
    let m = gens.len();
    let mut acc = field.zero();
    for omega in 0..(1u32 << m) {
        let mut v = base;
        for (j, &g) in gens.iter().enumerate() {
            if omega >> j & 1 == 1 {
                v = arith.add(v, g);
            }
        }
        let fv = f.get_or_err(v)?;
        acc = if omega.count_ones() % 2 == 0 {
            field.add(acc, fv)
        } else {
            field.sub(acc, fv)
        };
    }
    Ok(acc)
}

/// Exhaustively visit `C_m(X)` as `(base, generators)` index tuples; the
/// visitor returns `false` to stop early. Returns the number of cubes
/// visited. Tuples are visited in lexicographic order of `(u, v_1, .., v_m)`.
pub fn for_each_cube(
    field: &Field,
    xset: &PointSet,
    m: usize,
    budget: u64,
    mut visit: impl FnMut(u64, &[u64]) -> bool,
) -> Result<u64> {
    let space = xset.space;
    let tuples = (xset.len() as u64)
        .checked_mul(space.size.checked_pow(m as u32).ok_or(Error::BudgetExceeded {
            needed: u64::MAX,
            budget,
        })?)
        .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
    if tuples > budget {
        return Err(Error::BudgetExceeded { needed: tuples, budget });
    }
    let arith = IndexArith::new(field, space);
    let mut gens = vec![0u64; m];
    let mut count = 0u64;
    for &u in &xset.idx {
        gens.iter_mut().for_each(|g| *g = 0);
        'outer: loop {
            // all vertices beyond the base must lie in X
            let mut ok = true;
            for omega in 1..(1u32 << m) {
                let mut v = u;
                for (j, &g) in gens.iter().enumerate() {
                    if omega >> j & 1 == 1 {
                        v = arith.add(v, g);
                    }
                }
                if !xset.contains(v) {
                    ok = false;
                    break;
                }
            }
            if ok {
                count += 1;
                if !visit(u, &gens) {
                    return Ok(count);
                }
            }
            // advance generator odometer
            for g in gens.iter_mut() {
                *g += 1;
                if *g < space.size {
                    continue 'outer;
                }
                *g = 0;
            }
            break;
        }
    }
    Ok(count)
}

/// Uniformly sample `(u, v) in X x V^m` and keep members of `C_m(X)`;
/// reports the acceptance rate.
pub fn sample_cubes(
    field: &Field,
    xset: &PointSet,
    m: usize,
    count: u64,
    seed: u64,
) -> (Vec<(u64, Vec<u64>)>, f64) {
    let space = xset.space;
    let arith = IndexArith::new(field, space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut drawn = 0u64;
    let max_draws = count.saturating_mul(1000).max(1000);
    while (out.len() as u64) < count && drawn < max_draws {
        drawn += 1;
        let u = xset.idx[rng.gen_range(0..xset.len())];
        let gens: Vec<u64> = (0..m).map(|_| rng.gen_range(0..space.size)).collect();
        let mut ok = true;
        for omega in 1..(1u32 << m) {
            let mut v = u;
            for (j, &g) in gens.iter().enumerate() {
                if omega >> j & 1 == 1 {
                    v = arith.add(v, g);
                }
            }
            if !xset.contains(v) {
                ok = false;
                break;
            }
        }
        if ok {
            out.push((u, gens));
        }
    }
    let acceptance = if drawn == 0 { 0.0 } else { out.len() as f64 / drawn as f64 };
    (out, acceptance)
}

/// Materialized cube stream (exhaustive, budgeted) for the public surface.
pub fn cubes(field: &Field, xset: &PointSet, m: usize, budget: u64) -> Result<Vec<Cube>> {
    let mut out = Vec::new();
    let space = xset.space;
    for_each_cube(field, xset, m, budget, |u, gens| {
        out.push(Cube::from_indices(&space, u, gens));
        true
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn quadric_f2() -> (Field, Variety) {
        let f = Field::new(2, 1).unwrap();
        let p = parse_poly("x0*x1 + x2*x3", 4, &f).unwrap();
        let v = Variety::new(f.clone(), PolyFamily::new(4, vec![p]));
        (f, v)
    }

    #[test]
    fn enumerate_quadric_f2_has_ten_points() {
        let (_, v) = quadric_f2();
        let pts = v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap();
        assert_eq!(pts.len(), 10);
    }

    #[test]
    fn enumerate_hyperplane_f3() {
        let f = Field::new(3, 1).unwrap();
        let p = parse_poly("x0", 3, &f).unwrap();
        let v = Variety::new(f, PolyFamily::new(3, vec![p]));
        assert_eq!(v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap().len(), 9);
    }

    #[test]
    fn enumerate_affine_circle_f3() {
        let f = Field::new(3, 1).unwrap();
        let p = parse_poly("x0^2 + x1^2 + 1", 2, &f).unwrap();
        let v = Variety::new(f, PolyFamily::new(2, vec![p]));
        // x^2 + y^2 = 2 has the four solutions (+-1, +-1)
        assert_eq!(v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap().len(), 4);
    }

    #[test]
    fn index_codec_roundtrip() {
        let f = Field::new(3, 2).unwrap();
        let space = PointSpace::new(&f, 3).unwrap();
        for idx in [0u64, 1, 17, 100, space.size - 1] {
            let pt = space.decode(idx);
            assert_eq!(space.index_of(&pt), idx);
        }
        let a = space.decode(17);
        let b = space.decode(100);
        let s: Vec<FqElem> = a.iter().zip(&b).map(|(&x, &y)| f.add(x, y)).collect();
        assert_eq!(space.add_idx(&f, 17, 100), space.index_of(&s));
    }

    #[test]
    fn derivative_second_difference_of_product() {
        let f = Field::new(2, 1).unwrap();
        let space = PointSpace::new(&f, 2).unwrap();
        let all = PointSet::from_indices(space, (0..space.size).collect());
        let p = parse_poly("x0*x1", 2, &f).unwrap();
        let table = FunctionTable::from_poly(&f, &all, &p);
        let cube = Cube {
            base: vec![f.zero(), f.zero()],
            gens: vec![vec![f.one(), f.zero()], vec![f.zero(), f.one()]],
        };
        assert_eq!(derivative_fm(&f, &table, &cube).unwrap(), f.one());
    }

    #[test]
    fn fm_kills_low_degree() {
        // f_m = 0 on all of C_m(V) for deg f < m
        let f = Field::new(3, 1).unwrap();
        let space = PointSpace::new(&f, 2).unwrap();
        let all = PointSet::from_indices(space, (0..space.size).collect());
        for (text, m) in [("x0 + 2*x1", 2), ("x0*x1 + x0^2", 3)] {
            let p = parse_poly(text, 2, &f).unwrap();
            let table = FunctionTable::from_poly(&f, &all, &p);
            let arith = IndexArith::Direct(&f, space);
            for_each_cube(&f, &all, m, 1 << 22, |u, gens| {
                let v = fm_on_indices(&f, &arith, &table, u, gens).unwrap();
                assert!(v.is_zero());
                true
            })
            .unwrap();
        }
    }

    #[test]
    fn vertex_outside_domain_is_an_error() {
        let f = Field::new(2, 1).unwrap();
        let space = PointSpace::new(&f, 2).unwrap();
        let dom = PointSet::from_indices(space, vec![0, 1]);
        let table = FunctionTable::from_fn(&f, &dom, |_| f.zero());
        let cube = Cube {
            base: vec![f.zero(), f.zero()],
            gens: vec![vec![f.zero(), f.one()], vec![f.one(), f.zero()]],
        };
        assert!(matches!(
            derivative_fm(&f, &table, &cube),
            Err(Error::VertexOutsideDomain(_))
        ));
    }

    #[test]
    fn cube_count_subspace_is_cubed() {
        // a linear subspace W is closed under the cube map: count = |W|^3
        let f = Field::new(2, 1).unwrap();
        let p = parse_poly("x0", 3, &f).unwrap();
        let v = Variety::new(f.clone(), PolyFamily::new(3, vec![p]));
        let pts = v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap();
        let n = for_each_cube(&f, &pts, 2, 1 << 22, |_, _| true).unwrap();
        assert_eq!(n, 4 * 4 * 4);
    }

    #[test]
    fn cube_count_matches_triple_loop() {
        let (f, v) = quadric_f2();
        let pts = v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap();
        let space = pts.space;
        // oracle: raw triple loop over (u, v1, v2)
        let mut expected = 0u64;
        for &u in &pts.idx {
            for v1 in 0..space.size {
                for v2 in 0..space.size {
                    let a = space.add_idx(&f, u, v1);
                    let b = space.add_idx(&f, u, v2);
                    let c = space.add_idx(&f, a, v2);
                    if pts.contains(a) && pts.contains(b) && pts.contains(c) {
                        expected += 1;
                    }
                }
            }
        }
        let got = for_each_cube(&f, &pts, 2, 1 << 22, |_, _| true).unwrap();
        assert_eq!(got, expected);
        // degenerate generators are legal cubes
        let mut saw_degenerate = false;
        for_each_cube(&f, &pts, 2, 1 << 22, |_, gens| {
            if gens.iter().all(|&g| g == 0) {
                saw_degenerate = true;
                false
            } else {
                true
            }
        })
        .unwrap();
        assert!(saw_degenerate);
    }

    #[test]
    fn sampled_cubes_are_cubes() {
        let (f, v) = quadric_f2();
        let pts = v.enumerate_points(DEFAULT_ENUM_BUDGET).unwrap();
        let (cubes, acc) = sample_cubes(&f, &pts, 2, 50, 9);
        assert!(acc > 0.0);
        let arith = IndexArith::new(&f, pts.space);
        for (u, gens) in cubes {
            for omega in 1..4u32 {
                let mut v = u;
                for (j, &g) in gens.iter().enumerate() {
                    if omega >> j & 1 == 1 {
                        v = arith.add(v, g);
                    }
                }
                assert!(pts.contains(v));
            }
        }
    }

    #[test]
    fn cube_decomposition_identities() {
        // f2(x|v1,v2) = f2(x+w|v1-w,v2) + f2(x|w,v2) for arbitrary tables,
        // and the 3-cube analogues used by the extension arguments
        let f = Field::new(3, 1).unwrap();
        let space = PointSpace::new(&f, 2).unwrap();
        let all = PointSet::from_indices(space, (0..space.size).collect());
        use rand::{Rng, SeedableRng};
        let mut vrng = ChaCha8Rng::seed_from_u64(3);
        let table = FunctionTable::from_fn(&f, &all, |_| f.elem(vrng.gen_range(0..3)));
        let arith = IndexArith::new(&f, space);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = rng.gen_range(0..space.size);
            let v1 = rng.gen_range(0..space.size);
            let v2 = rng.gen_range(0..space.size);
            let w = rng.gen_range(0..space.size);
            let lhs = fm_on_indices(&f, &arith, &table, x, &[v1, v2]).unwrap();
            let a = fm_on_indices(&f, &arith, &table, arith.add(x, w), &[arith.sub(v1, w), v2])
                .unwrap();
            let b = fm_on_indices(&f, &arith, &table, x, &[w, v2]).unwrap();
            assert_eq!(lhs, f.add(a, b));

            // (x|v1,v2,v3) = (0|v1,v2,x+v3) - (0|v1,v2,x) as f3 values
            let v3 = rng.gen_range(0..space.size);
            let lhs3 = fm_on_indices(&f, &arith, &table, x, &[v1, v2, v3]).unwrap();
            let c = fm_on_indices(&f, &arith, &table, 0, &[v1, v2, arith.add(x, v3)]).unwrap();
            let d = fm_on_indices(&f, &arith, &table, 0, &[v1, v2, x]).unwrap();
            assert_eq!(lhs3, f.sub(c, d));

            // first-generator telescoping for 3-cubes
            let a3 = fm_on_indices(
                &f,
                &arith,
                &table,
                arith.add(x, w),
                &[arith.sub(v1, w), v2, v3],
            )
            .unwrap();
            let b3 = fm_on_indices(&f, &arith, &table, x, &[w, v2, v3]).unwrap();
            assert_eq!(lhs3, f.add(a3, b3));
        }
    }
}
