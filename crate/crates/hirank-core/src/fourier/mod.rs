//! Character-sum kernels: bias, the `U2` norm, Gowers–Cauchy–Schwarz, and
//! the exact solution-counting engine.
//!
//! All exact magnitudes flow through integer residue histograms; floating
//! point appears only in one final complex evaluation. The counting engine
//! evaluates the standard character-sum representation of a solution count
//! by building the joint value histogram of the constraint tuple, splitting
//! the variables into blocks no monomial crosses and convolving the
//! per-block histograms. For additively separable systems (diagonal forms,
//! cube-vertex constraints of diagonal quadrics) this collapses exponential
//! sums to polynomial work; with a single block it degenerates to plain
//! enumeration.

pub mod fft;

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::flt;
use crate::geometry::{FunctionTable, PointIter, PointSpace};
use crate::poly::{MultiPoly, PolyFamily};
use crate::Result;

/// Hoeffding half-width for `[0,1]`-bounded sampling.
pub fn hoeffding_half_width(confidence: f64, samples: u64) -> f64 {
    flt::sqrt(flt::ln(2.0 / (1.0 - confidence)) / (2.0 * samples as f64))
}

/// A sampled estimate with its Hoeffding confidence interval.
#[derive(Clone, Copy, Debug)]
pub struct EstimateWithCI {
    pub value: f64,
    pub half_width: f64,
    pub confidence: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    pub fn new(value: f64, confidence: f64, samples: u64, seed: u64) -> Self {
        EstimateWithCI {
            value,
            half_width: hoeffding_half_width(confidence, samples),
            confidence,
            samples,
            seed,
        }
    }
}

/// Exact accumulator for sums of additive-character values: counts per trace
/// residue class in `Z/p`.
#[derive(Clone, Debug)]
pub struct CharacterSumAccumulator {
    pub p: u32,
    pub hist: Vec<u128>,
    pub total: u128,
}

impl CharacterSumAccumulator {
    pub fn new(p: u32) -> Self {
        CharacterSumAccumulator { p, hist: vec![0; p as usize], total: 0 }
    }

    #[inline]
    pub fn push(&mut self, residue: u32) {
        self.hist[residue as usize] += 1;
        self.total += 1;
    }

    #[inline]
    pub fn push_n(&mut self, residue: u32, count: u128) {
        self.hist[residue as usize] += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &CharacterSumAccumulator) {
        debug_assert_eq!(self.p, other.p);
        for (a, b) in self.hist.iter_mut().zip(&other.hist) {
            *a += b;
        }
        self.total += other.total;
    }

    /// The complex sum `sum_r hist[r] e^{2 pi i r / p}`.
    pub fn complex_sum(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (r, &c) in self.hist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let theta = 2.0 * core::f64::consts::PI * r as f64 / self.p as f64;
            re += c as f64 * flt::cos(theta);
            im += c as f64 * flt::sin(theta);
        }
        (re, im)
    }

    /// `|E e_q(..)|`, the averaged magnitude. 0 on an empty accumulator.
    pub fn magnitude(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let (re, im) = self.complex_sum();
        flt::sqrt(re * re + im * im) / self.total as f64
    }

    /// Exact histogram of `|sum|^2` as coefficients of `zeta^delta`: the
    /// autocorrelation of the residue histogram. Stays in integers.
    pub fn magnitude_squared_histogram(&self) -> Vec<u128> {
        let p = self.p as usize;
        let mut out = vec![0u128; p];
        for r in 0..p {
            if self.hist[r] == 0 {
                continue;
            }
            for s in 0..p {
                if self.hist[s] == 0 {
                    continue;
                }
                let delta = (r + p - s) % p;
                out[delta] += self.hist[r] * self.hist[s];
            }
        }
        out
    }
}

/// Evaluate `sum_delta coeffs[delta] zeta^delta` for `zeta = e^{2 pi i/p}`
/// (real part; the histograms fed here are symmetric).
pub fn zeta_poly_real(p: u32, coeffs: &[u128]) -> f64 {
    let mut re = 0.0;
    for (d, &c) in coeffs.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let theta = 2.0 * core::f64::consts::PI * d as f64 / p as f64;
        re += c as f64 * flt::cos(theta);
    }
    re
}

// ---------------------------------------------------------------------------
// the block-factorized counting engine

struct BlockTerm {
    constraint: usize,
    coeff: FqElem,
    /// (position inside the block's variable list, exponent)
    powers: Vec<(usize, u16)>,
}

struct Block {
    vars: Vec<usize>,
    terms: Vec<BlockTerm>,
}

/// Joint value histogram of the constraint tuple `(P_1(v+s_1), ...,
/// P_M(v+s_M))` over `v in F_q^n`, indexed by packed tuples
/// `sum value_i q^i`. Exact integer counts.
pub fn value_histogram(
    field: &Field,
    n: usize,
    polys: &[MultiPoly],
    shifts: &[Vec<FqElem>],
    budget: u64,
) -> Result<Vec<u128>> {
    let m = polys.len();
    if !shifts.is_empty() && shifts.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: shifts.len() });
    }
    let q = field.q() as u64;
    let tuple_space = q.checked_pow(m as u32).filter(|&t| t <= 1 << 22).ok_or(
        Error::BudgetExceeded { needed: u64::MAX, budget },
    )?;

    // expand shifts; constants go to a fixed offset tuple
    let shifted: Vec<MultiPoly> = polys
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if shifts.is_empty() {
                p.clone()
            } else {
                p.shift(field, &shifts[i])
            }
        })
        .collect();

    // union-find over variables, linked within each monomial
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut constants = vec![field.zero(); m];
    for (ci, p) in shifted.iter().enumerate() {
        for (mono, &c) in &p.terms {
            let vars: Vec<usize> = mono
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, _)| i)
                .collect();
            if vars.is_empty() {
                constants[ci] = field.add(constants[ci], c);
                continue;
            }
            let root = find(&mut parent, vars[0]);
            for &v in &vars[1..] {
                let r = find(&mut parent, v);
                parent[r] = root;
            }
        }
    }

    // group variables into blocks; variables with no monomial stay free
    let mut block_of: Vec<Option<usize>> = vec![None; n];
    let mut blocks: Vec<Block> = Vec::new();
    let mut used = vec![false; n];
    for p in &shifted {
        for (mono, _) in &p.terms {
            for (i, &e) in mono.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
    }
    for v in 0..n {
        if !used[v] {
            continue;
        }
        let root = find(&mut parent, v);
        let bi = match block_of[root] {
            Some(b) => b,
            None => {
                blocks.push(Block { vars: Vec::new(), terms: Vec::new() });
                block_of[root] = Some(blocks.len() - 1);
                blocks.len() - 1
            }
        };
        block_of[v] = Some(bi);
        blocks[bi].vars.push(v);
    }
    let free_vars = (0..n).filter(|&v| !used[v]).count();

    // attach monomials to their blocks
    for (ci, p) in shifted.iter().enumerate() {
        for (mono, &c) in &p.terms {
            let vars: Vec<(usize, u16)> = mono
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i, e))
                .collect();
            if vars.is_empty() {
                continue;
            }
            let bi = block_of[vars[0].0].unwrap();
            let positions: Vec<(usize, u16)> = vars
                .iter()
                .map(|&(v, e)| {
                    let pos = blocks[bi].vars.iter().position(|&x| x == v).unwrap();
                    (pos, e)
                })
                .collect();
            blocks[bi].terms.push(BlockTerm { constraint: ci, coeff: c, powers: positions });
        }
    }

    // cost guard: per-block enumeration and the convolutions
    let mut work: u64 = 0;
    for b in &blocks {
        let w = q.checked_pow(b.vars.len() as u32).ok_or(Error::BudgetExceeded {
            needed: u64::MAX,
            budget,
        })?;
        work = work.saturating_add(w);
    }
    let conv_work =
        (blocks.len() as u64).saturating_mul(tuple_space.saturating_mul(tuple_space));
    if work > budget || conv_work > (1u64 << 34) {
        return Err(Error::BudgetExceeded { needed: work.max(conv_work), budget });
    }

    // tuple addition on packed tuples is digitwise field addition
    let tuple_add = |a: u64, b: u64| -> u64 {
        let (mut a, mut b) = (a, b);
        let mut out = 0u64;
        let mut base = 1u64;
        for _ in 0..m {
            let s = field.add(FqElem((a % q) as u32), FqElem((b % q) as u32));
            out += s.packed() as u64 * base;
            a /= q;
            b /= q;
            base *= q;
        }
        out
    };

    // start with the constants tuple
    let mut hist = vec![0u128; tuple_space as usize];
    let mut const_tuple = 0u64;
    {
        let mut base = 1u64;
        for &c in &constants {
            const_tuple += c.packed() as u64 * base;
            base *= q;
        }
    }
    hist[const_tuple as usize] = 1;

    for b in &blocks {
        let nv = b.vars.len();
        let count = q.pow(nv as u32);
        let mut bh = vec![0u128; tuple_space as usize];
        let mut assign = vec![field.zero(); nv];
        let mut tuple_vals = vec![field.zero(); m];
        for step in 0..count {
            if step > 0 {
                for slot in assign.iter_mut() {
                    let nxt = slot.packed() + 1;
                    if nxt < field.q() {
                        *slot = FqElem(nxt);
                        break;
                    }
                    *slot = field.zero();
                }
            }
            for t in tuple_vals.iter_mut() {
                *t = field.zero();
            }
            for term in &b.terms {
                let mut v = term.coeff;
                for &(pos, e) in &term.powers {
                    v = field.mul(v, field.pow(assign[pos], e as u64));
                }
                tuple_vals[term.constraint] = field.add(tuple_vals[term.constraint], v);
            }
            let mut t = 0u64;
            let mut base = 1u64;
            for &val in &tuple_vals {
                t += val.packed() as u64 * base;
                base *= q;
            }
            bh[t as usize] += 1;
        }
        // convolve
        let mut next = vec![0u128; tuple_space as usize];
        for (a, &ca) in hist.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (bidx, &cb) in bh.iter().enumerate() {
                if cb == 0 {
                    continue;
                }
                let t = tuple_add(a as u64, bidx as u64);
                next[t as usize] += ca * cb;
            }
        }
        hist = next;
    }

    // free variables multiply every cell
    let factor = (q as u128).pow(free_vars as u32);
    if factor > 1 {
        for c in hist.iter_mut() {
            *c *= factor;
        }
    }
    Ok(hist)
}

/// Exact number of `v` with `P_i(v + shift_i) = target_i` for all `i`.
/// Equals brute-force enumeration; factorizes where the system allows.
pub fn count_via_characters(
    field: &Field,
    n: usize,
    polys: &[MultiPoly],
    shifts: &[Vec<FqElem>],
    targets: &[FqElem],
    budget: u64,
) -> Result<u128> {
    if targets.len() != polys.len() {
        return Err(Error::DimensionMismatch { expected: polys.len(), got: targets.len() });
    }
    if polys.is_empty() {
        let mut total = 1u128;
        for _ in 0..n {
            total *= field.q() as u128;
        }
        return Ok(total);
    }
    let hist = value_histogram(field, n, polys, shifts, budget)?;
    let q = field.q() as u64;
    let mut t = 0u64;
    let mut base = 1u64;
    for &c in targets {
        t += c.packed() as u64 * base;
        base *= q;
    }
    Ok(hist[t as usize])
}

/// Convenience wrapper over a family.
pub fn count_family(
    field: &Field,
    fam: &PolyFamily,
    shifts: &[Vec<FqElem>],
    targets: &[FqElem],
    budget: u64,
) -> Result<u128> {
    count_via_characters(field, fam.n, &fam.members, shifts, targets, budget)
}

/// `b(P) = |E_x e_q(P(x))|`, exact via the value histogram.
pub fn bias(field: &Field, p: &MultiPoly, budget: u64) -> Result<f64> {
    let hist = value_histogram(field, p.n, core::slice::from_ref(p), &[], budget)?;
    let mut acc = CharacterSumAccumulator::new(field.p());
    for (valpacked, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let residue = field.trace(FqElem(valpacked as u32));
        acc.push_n(residue, count);
    }
    Ok(acc.magnitude())
}

/// Sampled bias estimate.
pub fn bias_sampled(
    field: &Field,
    p: &MultiPoly,
    samples: u64,
    seed: u64,
    confidence: f64,
) -> Result<EstimateWithCI> {
    let space = PointSpace::new(field, p.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = CharacterSumAccumulator::new(field.p());
    let mut buf = vec![field.zero(); p.n];
    for _ in 0..samples {
        let idx = rng.gen_range(0..space.size);
        space.decode_into(idx, &mut buf);
        acc.push(field.trace(p.eval_unchecked(field, &buf)));
    }
    Ok(EstimateWithCI::new(acc.magnitude(), confidence, samples, seed))
}

/// Folded `U2` norm: `||f||^4 = E_h |E_v e_q(f(v) - f(v+h))|^2`, kept exact
/// through histogram autocorrelations until a single final evaluation.
pub fn u2_norm(field: &Field, f: &FunctionTable, budget: u64) -> Result<f64> {
    if !f.is_total() {
        return Err(Error::PreconditionViolated("U2 norm needs a table total on V".into()));
    }
    let space = f.space;
    let work = space.size.checked_mul(space.size).ok_or(Error::BudgetExceeded {
        needed: u64::MAX,
        budget,
    })?;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let p = field.p() as usize;
    let mut acc = vec![0u128; p];
    for h in 0..space.size {
        let mut d = CharacterSumAccumulator::new(field.p());
        for v in 0..space.size {
            let vh = space.add_idx(field, v, h);
            let g = field.sub(f.get_or_err(v)?, f.get_or_err(vh)?);
            d.push(field.trace(g));
        }
        let sq = d.magnitude_squared_histogram();
        for (i, &c) in sq.iter().enumerate() {
            acc[i] += c;
        }
    }
    let total = (space.size as f64).powi(3);
    let fourth = zeta_poly_real(field.p(), &acc) / total;
    Ok(flt::sqrt(flt::sqrt(fourth.max(0.0))))
}

/// Naive `U2` via the full `q^{3n}` triple loop; the oracle for the folded
/// computation.
pub fn u2_norm_naive(field: &Field, f: &FunctionTable, budget: u64) -> Result<f64> {
    if !f.is_total() {
        return Err(Error::PreconditionViolated("U2 norm needs a table total on V".into()));
    }
    let space = f.space;
    let work = space
        .size
        .checked_mul(space.size)
        .and_then(|x| x.checked_mul(space.size))
        .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let mut acc = CharacterSumAccumulator::new(field.p());
    for v in 0..space.size {
        let fv = f.get_or_err(v)?;
        for v1 in 0..space.size {
            let a = space.add_idx(field, v, v1);
            let fa = f.get_or_err(a)?;
            for v2 in 0..space.size {
                let b = space.add_idx(field, v, v2);
                let c = space.add_idx(field, a, v2);
                let val = field.add(
                    field.sub(fv, fa),
                    field.sub(f.get_or_err(c)?, f.get_or_err(b)?),
                );
                acc.push(field.trace(val));
            }
        }
    }
    let (re, im) = acc.complex_sum();
    let mag = flt::sqrt(re * re + im * im) / acc.total as f64;
    Ok(flt::sqrt(flt::sqrt(mag)))
}

/// The Gowers–Cauchy–Schwarz comparison: the four-function parallelogram
/// average against the minimum `U2` norm.
pub fn gowers_cs_verify(
    field: &Field,
    fs: [&FunctionTable; 4],
    budget: u64,
) -> Result<(f64, f64, bool)> {
    let space = fs[0].space;
    for f in &fs {
        if !f.is_total() || f.space != space {
            return Err(Error::PreconditionViolated(
                "Gowers-CS needs four total tables on one space".into(),
            ));
        }
    }
    let work = space
        .size
        .checked_mul(space.size)
        .and_then(|x| x.checked_mul(space.size))
        .ok_or(Error::BudgetExceeded { needed: u64::MAX, budget })?;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let mut acc = CharacterSumAccumulator::new(field.p());
    for v in 0..space.size {
        for v1 in 0..space.size {
            let a = space.add_idx(field, v, v1);
            for v2 in 0..space.size {
                let b = space.add_idx(field, v, v2);
                let c = space.add_idx(field, a, v2);
                let mut s = fs[0].get_or_err(v)?;
                s = field.add(s, fs[1].get_or_err(a)?);
                s = field.add(s, fs[2].get_or_err(b)?);
                s = field.add(s, fs[3].get_or_err(c)?);
                acc.push(field.trace(s));
            }
        }
    }
    let lhs = acc.magnitude();
    let mut rhs = f64::INFINITY;
    for f in &fs {
        rhs = rhs.min(u2_norm(field, f, budget)?);
    }
    Ok((lhs, rhs, lhs <= rhs + 1e-9))
}

/// Exhaust all homogeneous linear forms and return the one maximizing
/// `bias(P + l)`, ties broken by packed coefficient order.
pub fn best_linear_correlation(
    field: &Field,
    p: &MultiPoly,
    budget: u64,
) -> Result<(Vec<FqElem>, f64)> {
    let space = PointSpace::new(field, p.n)?;
    let work = space.size.checked_mul(space.size).ok_or(Error::BudgetExceeded {
        needed: u64::MAX,
        budget,
    })?;
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    // precompute P on all points
    let mut pv = vec![FqElem::default(); space.size as usize];
    let mut it = PointIter::new(field, space);
    while let Some((i, pt)) = it.next() {
        pv[i as usize] = p.eval_unchecked(field, pt);
    }
    let mut best_w = 0u64;
    let mut best_mag = -1.0f64;
    let mut wbuf = vec![field.zero(); p.n];
    let mut vbuf = vec![field.zero(); p.n];
    for w in 0..space.size {
        space.decode_into(w, &mut wbuf);
        let mut acc = CharacterSumAccumulator::new(field.p());
        // dot product follows the odometer: every digit the carry chain
        // touches adds w_j (a wrap contributes q * w_j = 0)
        let mut dot = field.zero();
        for slot in vbuf.iter_mut() {
            *slot = field.zero();
        }
        for v in 0..space.size {
            if v > 0 {
                for (j, slot) in vbuf.iter_mut().enumerate() {
                    dot = field.add(dot, wbuf[j]);
                    let nxt = slot.packed() + 1;
                    if nxt < field.q() {
                        *slot = FqElem(nxt);
                        break;
                    }
                    *slot = field.zero();
                }
            }
            acc.push(field.trace(field.add(pv[v as usize], dot)));
        }
        let mag = acc.magnitude();
        if mag > best_mag + 1e-12 {
            best_mag = mag;
            best_w = w;
        }
    }
    Ok((space.decode(best_w), best_mag))
}

/// One row of the bias-decay experiment.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub n: usize,
    pub d: u32,
    pub rank_bucket: u32,
    pub max_bias: f64,
    pub samples: u64,
}

/// Bias-versus-rank scan: polynomials are constructed per rank bucket
/// (diagonal quadratics in odd characteristic, sums of `r` random products
/// otherwise) and the observed maximal bias per bucket is reported. This is
/// an experiment emitter, not a pass/fail check.
pub fn bias_rank_scan(
    field: &Field,
    d: u32,
    n_list: &[usize],
    samples_per_cell: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<ScanRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in n_list {
        let max_bucket = if d == 2 && !field.has_char_two() {
            (n / 2) as u32
        } else {
            (n as u32 / 2).clamp(1, 4)
        };
        for bucket in 0..=max_bucket {
            let mut max_bias = 0.0f64;
            let samples = if bucket == 0 { 1 } else { samples_per_cell };
            for _ in 0..samples {
                let p = if bucket == 0 {
                    MultiPoly::constant(n, field.elem(rng.gen_range(0..field.q())))
                } else if d == 2 && !field.has_char_two() {
                    // diagonal with classical rank 2 * bucket
                    let mut p = MultiPoly::zero(n);
                    for i in 0..(2 * bucket as usize).min(n) {
                        let mut exps = vec![0u16; n];
                        exps[i] = 2;
                        let c = field.elem(rng.gen_range(1..field.q()));
                        p.add_term(field, exps, c);
                    }
                    p
                } else {
                    let mut p = MultiPoly::zero(n);
                    for _ in 0..bucket {
                        let l = random_homogeneous(field, n, 1, &mut rng);
                        let r = random_homogeneous(field, n, d - 1, &mut rng);
                        p = p.add(field, &l.mul(field, &r));
                    }
                    p
                };
                let b = bias(field, &p, budget)?;
                if b > max_bias {
                    max_bias = b;
                }
            }
            out.push(ScanRow { n, d, rank_bucket: bucket, max_bias, samples });
        }
    }
    Ok(out)
}

pub fn random_homogeneous(
    field: &Field,
    n: usize,
    d: u32,
    rng: &mut ChaCha8Rng,
) -> MultiPoly {
    let monos = crate::poly::monomials_of_degree(n, d);
    loop {
        let mut p = MultiPoly::zero(n);
        for m in &monos {
            let c = field.elem(rng.gen_range(0..field.q()));
            p.add_term(field, m.clone(), c);
        }
        if !p.is_zero() {
            return p;
        }
    }
}
