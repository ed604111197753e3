//! The weakly-quadratic extension pipeline for quadric hypersurfaces
//! `X = {Q = 0}`: even/odd reduction, 3-cube vanishing, majority correction,
//! extension through the level sets `X_a` and the hyperplane `V_0`, the lift
//! to `V`, and a certificate verified exactly on all of `X(k)`.
//!
//! The measure-theoretic almost-everywhere cascades of the source argument
//! are replaced by strict-majority votes over solver-generated completion
//! cubes, with every cube membership-verified before its value is counted.
//! Verdicts never rest on sampling: `Extended` requires exact agreement on
//! the enumerated `X`.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::extend_linear::{
    extend_weakly_linear, CertStatus, LinearConfig, LinearForm, VoteMode,
};
use crate::field::{Field, FqElem};
use crate::geometry::{
    is_weakly_quadratic, quadratic_on_span, FunctionTable, IndexArith, PointSet, Witness,
    WitnessReport,
};
use crate::linalg::{solve as lin_solve, Mat};
use crate::poly::{monomials_up_to, MultiPoly};
use crate::solve::{affine_quadric_solve_sampled, complete_cube_v0, QuadForm};
use crate::Result;

/// The `v_0 / V_0 / X_a` scaffolding of the extension argument. `quad` is
/// the defining form rescaled so that `quad(v0) = 1` (the zero set is
/// unchanged; the rescaling is recorded).
#[derive(Clone, Debug)]
pub struct QuadraticSetting {
    pub quad: QuadForm,
    pub v0: Vec<FqElem>,
    pub v0_idx: u64,
    pub rescaled_by: Option<FqElem>,
}

impl QuadraticSetting {
    /// Pick `v0` as the first point in index order with `Q(v0) = 1`,
    /// rescaling `Q` by a represented value when it never takes 1.
    pub fn new(field: &Field, q: QuadForm, space: &crate::geometry::PointSpace) -> Result<Self> {
        if field.has_char_two() {
            return Err(Error::CharTwo);
        }
        let mut buf = vec![field.zero(); space.n];
        for idx in 0..space.size {
            space.decode_into(idx, &mut buf);
            if q.eval(field, &buf) == field.one() {
                return Ok(QuadraticSetting {
                    quad: q,
                    v0: buf,
                    v0_idx: idx,
                    rescaled_by: None,
                });
            }
        }
        // Q never represents 1: rescale by the first represented value
        for idx in 0..space.size {
            space.decode_into(idx, &mut buf);
            let val = q.eval(field, &buf);
            if !val.is_zero() {
                let inv = field.inv(val);
                let scaled = QuadForm::new(field, q.poly.scale(field, inv))?;
                return Ok(QuadraticSetting {
                    quad: scaled,
                    v0: buf,
                    v0_idx: idx,
                    rescaled_by: Some(inv),
                });
            }
        }
        Err(Error::PreconditionViolated("the form vanishes identically".to_string()))
    }

    pub fn in_v0(&self, field: &Field, v: &[FqElem]) -> bool {
        self.quad.pair(field, v, &self.v0).is_zero()
    }
}

/// Split `f` (with `f(0) = 0`) into odd and even parts; `X` must be closed
/// under negation, which homogeneous varieties are.
pub fn even_odd_split(
    field: &Field,
    f: &FunctionTable,
    xset: &PointSet,
) -> Result<(FunctionTable, FunctionTable)> {
    if field.has_char_two() {
        return Err(Error::CharTwo);
    }
    if !f.get_or_err(0)?.is_zero() {
        return Err(Error::PreconditionViolated("normalize f(0) to 0 first".to_string()));
    }
    let space = xset.space;
    for &x in &xset.idx {
        if !xset.contains(space.neg_idx(field, x)) {
            return Err(Error::PreconditionViolated("X is not symmetric under negation".to_string()));
        }
    }
    let mut odd = Vec::with_capacity(xset.len());
    let mut even = Vec::with_capacity(xset.len());
    for &x in &xset.idx {
        let fx = f.get_or_err(x)?;
        let fneg = f.get_or_err(space.neg_idx(field, x))?;
        odd.push((x, field.half(field.sub(fx, fneg))));
        even.push((x, field.half(field.add(fx, fneg))));
    }
    Ok((FunctionTable::new(space, odd), FunctionTable::new(space, even)))
}

/// Exhaustively check `f_3(0|x1,x2,x3) = 0` over all 3-cubes based at the
/// origin with vertices in `X`.
pub fn check_3cubes_origin(
    field: &Field,
    f: &FunctionTable,
    xset: &PointSet,
    budget: u64,
) -> Result<WitnessReport> {
    let work = (xset.len() as u64).pow(3);
    if work > budget {
        return Err(Error::BudgetExceeded { needed: work, budget });
    }
    let arith = IndexArith::new(field, xset.space);
    let f0 = f.get_or_err(0)?;
    let mut checked = 0u64;
    for &x1 in &xset.idx {
        for &x2 in &xset.idx {
            let s12 = arith.add(x1, x2);
            if !xset.contains(s12) {
                continue;
            }
            for &x3 in &xset.idx {
                let s13 = arith.add(x1, x3);
                let s23 = arith.add(x2, x3);
                let s123 = arith.add(s12, x3);
                if !xset.contains(s13) || !xset.contains(s23) || !xset.contains(s123) {
                    continue;
                }
                checked += 1;
                let mut v = f0;
                for idx in [x1, x2, x3] {
                    v = field.sub(v, f.get_or_err(idx)?);
                }
                for idx in [s12, s13, s23] {
                    v = field.add(v, f.get_or_err(idx)?);
                }
                v = field.sub(v, f.get_or_err(s123)?);
                if !v.is_zero() {
                    let space = xset.space;
                    return Ok(WitnessReport::fail(
                        checked,
                        Witness::BadCube {
                            base: vec![field.zero(); space.n],
                            gens: vec![
                                space.decode(x1),
                                space.decode(x2),
                                space.decode(x3),
                            ],
                        },
                    ));
                }
            }
        }
    }
    Ok(WitnessReport::pass(checked))
}

/// Sampled variant of the origin-cube check.
pub fn sample_3cubes_origin(
    field: &Field,
    f: &FunctionTable,
    xset: &PointSet,
    samples: u64,
    seed: u64,
) -> Result<WitnessReport> {
    let arith = IndexArith::new(field, xset.space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f0 = f.get_or_err(0)?;
    let mut checked = 0u64;
    let mut draws = 0u64;
    while checked < samples && draws < samples * 400 {
        draws += 1;
        let x1 = xset.idx[rng.gen_range(0..xset.len())];
        let x2 = xset.idx[rng.gen_range(0..xset.len())];
        let x3 = xset.idx[rng.gen_range(0..xset.len())];
        let s12 = arith.add(x1, x2);
        let s13 = arith.add(x1, x3);
        let s23 = arith.add(x2, x3);
        let s123 = arith.add(s12, x3);
        if !xset.contains(s12)
            || !xset.contains(s13)
            || !xset.contains(s23)
            || !xset.contains(s123)
        {
            continue;
        }
        checked += 1;
        let mut v = f0;
        for idx in [x1, x2, x3] {
            v = field.sub(v, f.get_or_err(idx)?);
        }
        for idx in [s12, s13, s23] {
            v = field.add(v, f.get_or_err(idx)?);
        }
        v = field.sub(v, f.get_or_err(s123)?);
        if !v.is_zero() {
            let space = xset.space;
            return Ok(WitnessReport::fail(
                checked,
                Witness::BadCube {
                    base: vec![field.zero(); space.n],
                    gens: vec![space.decode(x1), space.decode(x2), space.decode(x3)],
                },
            ));
        }
    }
    Ok(WitnessReport::pass(checked))
}

#[derive(Clone, Debug)]
pub struct Correction3Result {
    pub h: FunctionTable,
    pub min_margin: f64,
    pub no_majority: Vec<u64>,
    pub agreement: f64,
}

/// Majority correction against the 3-cube window: `h(x)` is the strict
/// majority of `sum_{w != 0} (-1)^{|w|+1} f(x + w.(y,z,w3))` over sampled
/// completions with all seven non-base vertices in `X`. Completions are
/// drawn with two `X`-difference legs and one solver leg.
pub fn testing_correct_3(
    field: &Field,
    quad: &QuadForm,
    f: &FunctionTable,
    xset: &PointSet,
    votes: u32,
    seed: u64,
) -> Result<Correction3Result> {
    let space = xset.space;
    let q = field.q() as usize;
    let mut pairs = Vec::with_capacity(xset.len());
    let mut min_margin = 1.0f64;
    let mut no_majority = Vec::new();
    let mut agree = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xbuf = vec![field.zero(); space.n];
    for &x in &xset.idx {
        space.decode_into(x, &mut xbuf);
        let mut counts = vec![0u64; q];
        let mut got = 0u32;
        let mut attempts = 0u32;
        let budget_attempts = votes * 60 + 240;
        while got < votes && attempts < budget_attempts {
            attempts += 1;
            if let Some(val) = window_vote_3(field, quad, f, xset, x, &xbuf, &mut rng)? {
                counts[val.packed() as usize] += 1;
                got += 1;
            }
        }
        let total: u64 = counts.iter().sum();
        let best = counts.iter().enumerate().max_by_key(|(_, &c)| c).unwrap();
        if total == 0 || 2 * *best.1 <= total {
            no_majority.push(x);
            pairs.push((x, f.get_or_err(x)?));
        } else {
            let margin = *best.1 as f64 / total as f64;
            if margin < min_margin {
                min_margin = margin;
            }
            let winner = FqElem(best.0 as u32);
            if winner == f.get_or_err(x)? {
                agree += 1;
            }
            pairs.push((x, winner));
        }
    }
    let agreement = if xset.is_empty() { 1.0 } else { agree as f64 / xset.len() as f64 };
    Ok(Correction3Result {
        h: FunctionTable::new(space, pairs),
        min_margin,
        no_majority,
        agreement,
    })
}

/// One sampled 3-cube window at `x`: vertices `a, b` drawn from `X`
/// (accepting when `a + b - x` lands in `X`), the third leg solved for.
fn window_vote_3(
    field: &Field,
    quad: &QuadForm,
    f: &FunctionTable,
    xset: &PointSet,
    x: u64,
    xpt: &[FqElem],
    rng: &mut ChaCha8Rng,
) -> Result<Option<FqElem>> {
    let space = xset.space;
    let a = xset.idx[rng.gen_range(0..xset.len())];
    let b = xset.idx[rng.gen_range(0..xset.len())];
    let d = space.add_idx(field, space.add_idx(field, a, b), space.neg_idx(field, x));
    if !xset.contains(d) {
        return Ok(None);
    }
    // third generator w: Q(x + w) = 0 with the three pairings fixed so the
    // remaining vertices stay on X
    let apt = space.decode(a);
    let bpt = space.decode(b);
    let dpt = space.decode(d);
    let sub = |u: &[FqElem], w: &[FqElem]| -> Vec<FqElem> {
        u.iter().zip(w).map(|(&p, &r)| field.sub(p, r)).collect()
    };
    let constraints = vec![
        (quad.gradient(field, &sub(&apt, xpt)), field.zero()),
        (quad.gradient(field, &sub(&bpt, xpt)), field.zero()),
        (quad.gradient(field, &sub(&dpt, xpt)), field.zero()),
    ];
    let w = match affine_quadric_solve_sampled(
        field,
        quad,
        &constraints,
        xpt,
        field.zero(),
        rng.gen(),
    ) {
        Ok(w) => w,
        Err(Error::NoSolutionFound) => return Ok(None),
        Err(e) => return Err(e),
    };
    let widx = space.index_of(&w);
    let xw = space.add_idx(field, x, widx);
    let aw = space.add_idx(field, a, widx);
    let bw = space.add_idx(field, b, widx);
    let dw = space.add_idx(field, d, widx);
    // membership of every vertex is verified before the vote counts
    for idx in [xw, aw, bw, dw] {
        if !xset.contains(idx) {
            return Ok(None);
        }
    }
    let mut val = field.zero();
    for idx in [a, b, xw] {
        val = field.add(val, f.get_or_err(idx)?);
    }
    for idx in [d, aw, bw] {
        val = field.sub(val, f.get_or_err(idx)?);
    }
    val = field.add(val, f.get_or_err(dw)?);
    Ok(Some(val))
}

#[derive(Clone, Debug, Default)]
pub struct QuadStats {
    pub weakly_quadratic: Option<bool>,
    pub spans_checked: u64,
    pub odd_status: Option<CertStatus>,
    pub cubes0_ok: Option<bool>,
    pub cubes0_checked: u64,
    pub h_min_margin: f64,
    pub h_no_majority: u64,
    pub h_agreement: f64,
    pub h3_vanish_fraction: f64,
    pub vote_margin_floor: f64,
    pub fit_samples: u64,
    pub disagreements: u64,
    pub rescaled: bool,
}

#[derive(Clone, Debug)]
pub struct QuadCertificate {
    pub status: CertStatus,
    /// total-degree-<=2 polynomial on `V`, gauge-fixed to vanish at `v0`
    pub g: Option<MultiPoly>,
    pub witness: Option<Witness>,
    pub stats: QuadStats,
}

#[derive(Clone, Debug)]
pub struct QuadConfig {
    pub force: bool,
    /// use exhaustive gates when the budgets admit them
    pub budget: u64,
    pub gate_samples: u32,
    pub votes_h: u32,
    pub votes_xsq: u32,
    pub votes_v0: u32,
    pub min_margin: f64,
    pub seed: u64,
    pub linear: LinearConfig,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            force: false,
            budget: 1 << 24,
            gate_samples: 60,
            votes_h: 5,
            votes_xsq: 5,
            votes_v0: 5,
            min_margin: 0.9,
            seed: 0,
            linear: LinearConfig::default(),
        }
    }
}

/// Lazy evaluator for the `X_sq -> V_0` cascade with memoization.
struct Cascade<'a> {
    field: &'a Field,
    setting: &'a QuadraticSetting,
    xset: &'a PointSet,
    h: &'a FunctionTable,
    votes_xsq: u32,
    votes_v0: u32,
    min_margin: f64,
    rng: ChaCha8Rng,
    memo_sq: BTreeMap<u64, FqElem>,
    memo_v0: BTreeMap<u64, FqElem>,
    margin_floor: f64,
}

impl<'a> Cascade<'a> {
    fn new(
        field: &'a Field,
        setting: &'a QuadraticSetting,
        xset: &'a PointSet,
        h: &'a FunctionTable,
        cfg: &QuadConfig,
    ) -> Self {
        Cascade {
            field,
            setting,
            xset,
            h,
            votes_xsq: cfg.votes_xsq,
            votes_v0: cfg.votes_v0,
            min_margin: cfg.min_margin,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xc0ffee),
            memo_sq: BTreeMap::new(),
            memo_v0: BTreeMap::new(),
            margin_floor: 1.0,
        }
    }

    /// `g` on `X_sq`: points of `V_0` whose `Q`-value is a square.
    fn g_xsq(&mut self, vidx: u64, vpt: &[FqElem]) -> Result<FqElem> {
        if let Some(&v) = self.memo_sq.get(&vidx) {
            return Ok(v);
        }
        let field = self.field;
        let quad = &self.setting.quad;
        let s = quad.eval(field, vpt);
        let a = field
            .sqrt(s)
            .ok_or_else(|| Error::PreconditionViolated("Q(v) must be a square on X_sq".to_string()))?;
        let val = if a.is_zero() {
            // v lies on X itself
            self.h.get_or_err(vidx)?
        } else {
            self.majority_xsq(vidx, vpt, a)?
        };
        self.memo_sq.insert(vidx, val);
        Ok(val)
    }

    /// Strict majority of the forced value over completion cubes with an
    /// `(a v0, v)` edge and the remaining six vertices on `X`.
    fn majority_xsq(&mut self, vidx: u64, vpt: &[FqElem], a: FqElem) -> Result<FqElem> {
        let field = self.field;
        let quad = &self.setting.quad;
        let space = self.xset.space;
        let neg_a2 = field.neg(field.mul(a, a));
        let a2 = field.mul(a, a);
        let av0: Vec<FqElem> =
            self.setting.v0.iter().map(|&c| field.mul(a, c)).collect();
        let grad_v0 = quad.gradient(field, &self.setting.v0);
        let grad_v = quad.gradient(field, vpt);
        let zero_pt = vec![field.zero(); space.n];

        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut got = 0u32;
        let mut attempts = 0u32;
        let target = self.votes_xsq;
        let max_attempts = target * 30 + 90;
        while got < target && attempts < max_attempts {
            attempts += 1;
            let seed: u64 = self.rng.gen();
            // y with Q(y) = -a^2 orthogonal to v0 and v
            let cons_y =
                vec![(grad_v0.clone(), field.zero()), (grad_v.clone(), field.zero())];
            let y = match affine_quadric_solve_sampled(field, quad, &cons_y, &zero_pt, neg_a2, seed) {
                Ok(y) => y,
                Err(Error::NoSolutionFound) => continue,
                Err(e) => return Err(e),
            };
            // z likewise with (z, y) = a^2
            let mut cons_z = cons_y.clone();
            cons_z.push((quad.gradient(field, &y), a2));
            let z = match affine_quadric_solve_sampled(
                field,
                quad,
                &cons_z,
                &zero_pt,
                neg_a2,
                seed ^ 0x5bd1,
            ) {
                Ok(z) => z,
                Err(Error::NoSolutionFound) => continue,
                Err(e) => return Err(e),
            };
            // six window vertices, membership-verified
            let add = |u: &[FqElem], w: &[FqElem]| -> Vec<FqElem> {
                u.iter().zip(w).map(|(&p, &r)| field.add(p, r)).collect()
            };
            let yz = add(&y, &z);
            let verts = [
                add(&av0, &y),
                add(&av0, &z),
                add(&av0, &yz),
                add(vpt, &y),
                add(vpt, &z),
                add(vpt, &yz),
            ];
            let mut idxs = [0u64; 6];
            let mut ok = true;
            for (k, pt) in verts.iter().enumerate() {
                let idx = space.index_of(pt);
                if !self.xset.contains(idx) {
                    ok = false;
                    break;
                }
                idxs[k] = idx;
            }
            if !ok {
                continue;
            }
            // forced value from the vanishing 3-cube through (a v0 | v - a v0, y, z)
            // with the homogeneous gauge g(a v0) = 0
            let mut val = field.zero();
            val = field.sub(val, self.h.get_or_err(idxs[0])?);
            val = field.sub(val, self.h.get_or_err(idxs[1])?);
            val = field.add(val, self.h.get_or_err(idxs[2])?);
            val = field.add(val, self.h.get_or_err(idxs[3])?);
            val = field.add(val, self.h.get_or_err(idxs[4])?);
            val = field.sub(val, self.h.get_or_err(idxs[5])?);
            *counts.entry(val.packed()).or_insert(0) += 1;
            got += 1;
        }
        self.strict_majority(vidx, counts)
    }

    /// `g` on all of `V_0`, via completion cubes into `X_sq`.
    fn g_v0(&mut self, vidx: u64, vpt: &[FqElem]) -> Result<FqElem> {
        if let Some(&v) = self.memo_v0.get(&vidx) {
            return Ok(v);
        }
        let field = self.field;
        let quad = &self.setting.quad;
        let s = quad.eval(field, vpt);
        if field.sqrt(s).is_some() {
            let val = self.g_xsq(vidx, vpt)?;
            self.memo_v0.insert(vidx, val);
            return Ok(val);
        }
        let space = self.xset.space;
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut got = 0u32;
        let mut attempts = 0u32;
        let target = self.votes_v0;
        let max_attempts = target * 30 + 90;
        while got < target && attempts < max_attempts {
            attempts += 1;
            // random square split s = a + b with both parts squares
            let c = field.elem(self.rng.gen_range(0..field.q()));
            let aval = field.mul(c, c);
            let bval = field.sub(s, aval);
            if field.sqrt(bval).is_none() {
                continue;
            }
            let seed: u64 = self.rng.gen();
            let (v1, v2, v3) = match complete_cube_v0(
                field,
                quad,
                &self.setting.v0,
                vpt,
                aval,
                bval,
                seed,
            ) {
                Ok(t) => t,
                Err(Error::NoSolutionFound) => continue,
                Err(e) => return Err(e),
            };
            // forced value: solve the vanishing f_3 window for the base
            let mut val = field.zero();
            let mut ok = true;
            for w in 1..8u32 {
                let mut pt = vpt.to_vec();
                for (i, vi) in [&v1, &v2, &v3].iter().enumerate() {
                    if w >> i & 1 == 1 {
                        for (slot, &c) in pt.iter_mut().zip(vi.iter()) {
                            *slot = field.add(*slot, c);
                        }
                    }
                }
                let idx = space.index_of(&pt);
                let gval = match self.g_xsq(idx, &pt) {
                    Ok(g) => g,
                    Err(Error::NoMajority(_)) | Err(Error::EmptyZ(_)) => {
                        ok = false;
                        break;
                    }
                    Err(e) => return Err(e),
                };
                val = if w.count_ones() % 2 == 1 {
                    field.add(val, gval)
                } else {
                    field.sub(val, gval)
                };
            }
            if !ok {
                continue;
            }
            *counts.entry(val.packed()).or_insert(0) += 1;
            got += 1;
        }
        let val = self.strict_majority(vidx, counts)?;
        self.memo_v0.insert(vidx, val);
        Ok(val)
    }

    fn strict_majority(&mut self, vidx: u64, counts: BTreeMap<u32, u64>) -> Result<FqElem> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::EmptyZ(vidx));
        }
        let (&best, &cnt) = counts.iter().max_by_key(|(_, &c)| c).unwrap();
        let margin = cnt as f64 / total as f64;
        if 2 * cnt <= total || margin < self.min_margin {
            return Err(Error::NoMajority(vidx));
        }
        if margin < self.margin_floor {
            self.margin_floor = margin;
        }
        Ok(FqElem(best))
    }
}

/// Materialized `g` on `X_sq` (enumerates `V_0`; desk scale only).
pub fn extend_to_xsq(
    field: &Field,
    setting: &QuadraticSetting,
    h: &FunctionTable,
    xset: &PointSet,
    cfg: &QuadConfig,
) -> Result<FunctionTable> {
    let space = xset.space;
    if space.size > cfg.budget {
        return Err(Error::BudgetExceeded { needed: space.size, budget: cfg.budget });
    }
    let mut cascade = Cascade::new(field, setting, xset, h, cfg);
    let mut pairs = Vec::new();
    let mut buf = vec![field.zero(); space.n];
    for v in 0..space.size {
        space.decode_into(v, &mut buf);
        if !setting.in_v0(field, &buf) {
            continue;
        }
        if field.sqrt(setting.quad.eval(field, &buf)).is_none() {
            continue;
        }
        pairs.push((v, cascade.g_xsq(v, &buf)?));
    }
    Ok(FunctionTable::new(space, pairs))
}

/// Materialized `g` on all of `V_0` (desk scale only).
pub fn extend_to_v0(
    field: &Field,
    setting: &QuadraticSetting,
    h: &FunctionTable,
    xset: &PointSet,
    cfg: &QuadConfig,
) -> Result<FunctionTable> {
    let space = xset.space;
    if space.size > cfg.budget {
        return Err(Error::BudgetExceeded { needed: space.size, budget: cfg.budget });
    }
    let mut cascade = Cascade::new(field, setting, xset, h, cfg);
    let mut pairs = Vec::new();
    let mut buf = vec![field.zero(); space.n];
    for v in 0..space.size {
        space.decode_into(v, &mut buf);
        if !setting.in_v0(field, &buf) {
            continue;
        }
        pairs.push((v, cascade.g_v0(v, &buf)?));
    }
    Ok(FunctionTable::new(space, pairs))
}

/// Basis of `V_0 = {(v, v0) = 0}`.
fn v0_basis(field: &Field, setting: &QuadraticSetting, n: usize) -> Vec<Vec<FqElem>> {
    let grad = setting.quad.gradient(field, &setting.v0);
    let mat = Mat::from_rows(&[grad]);
    let (_, kernel) = lin_solve(field, &mat, &[field.zero()]).expect("homogeneous system");
    let _ = n;
    kernel
}

/// Fit a polynomial of total degree <= 2 in `dim` coordinates from samples.
fn fit_quadratic(
    field: &Field,
    dim: usize,
    samples: &[(Vec<FqElem>, FqElem)],
) -> Option<MultiPoly> {
    let monos = monomials_up_to(dim, 2, None);
    let rows: Vec<Vec<FqElem>> = samples
        .iter()
        .map(|(t, _)| {
            monos
                .iter()
                .map(|m| {
                    let mut v = field.one();
                    for (j, &e) in m.iter().enumerate() {
                        for _ in 0..e {
                            v = field.mul(v, t[j]);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();
    let rhs: Vec<FqElem> = samples.iter().map(|(_, v)| *v).collect();
    let (coeffs, _) = lin_solve(field, &Mat::from_rows(&rows), &rhs)?;
    let mut p = MultiPoly::zero(dim);
    for (m, c) in monos.into_iter().zip(coeffs) {
        p.add_term(field, m, c);
    }
    Some(p)
}

/// The constructive `V_0 -> V` lift: subtract the known quadratic through
/// `x0`, fit the residual affine piece on `(x0 + M) cap X`, verify the
/// residual dies on `N cap X`, descend through `W' = W cap N`, re-fit the
/// final quadratic and re-add the subtracted parts.
#[allow(clippy::too_many_arguments)]
fn lift_v0_to_v(
    field: &Field,
    setting: &QuadraticSetting,
    xset: &PointSet,
    f_even: &FunctionTable,
    g_v0: &mut dyn FnMut(u64, &[FqElem]) -> Result<FqElem>,
    w_basis: &[Vec<FqElem>],
    seed: u64,
) -> Result<MultiPoly> {
    let space = xset.space;
    let n = space.n;
    let quad = &setting.quad;
    let dim = w_basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11f7);

    // fit gV0 as a quadratic in W-coordinates
    let mut samples: Vec<(Vec<FqElem>, FqElem)> = Vec::new();
    let monos_w = monomials_up_to(dim, 2, None).len();
    let tspace = crate::geometry::PointSpace::new(field, dim)?;
    for _ in 0..(monos_w + 24) {
        let t: Vec<FqElem> = (0..dim).map(|_| field.elem(rng.gen_range(0..field.q()))).collect();
        let mut v = vec![field.zero(); n];
        for (j, &tj) in t.iter().enumerate() {
            for i in 0..n {
                v[i] = field.add(v[i], field.mul(tj, w_basis[j][i]));
            }
        }
        let idx = space.index_of(&v);
        samples.push((t, g_v0(idx, &v)?));
    }
    let _ = tspace;
    let h_w = fit_quadratic(field, dim, &samples)
        .ok_or_else(|| Error::InconsistentFit("gV0 quadratic fit".to_string()))?;
    // hold-out verification of the fit
    for _ in 0..20 {
        let t: Vec<FqElem> = (0..dim).map(|_| field.elem(rng.gen_range(0..field.q()))).collect();
        let mut v = vec![field.zero(); n];
        for (j, &tj) in t.iter().enumerate() {
            for i in 0..n {
                v[i] = field.add(v[i], field.mul(tj, w_basis[j][i]));
            }
        }
        let idx = space.index_of(&v);
        if h_w.eval_unchecked(field, &t) != g_v0(idx, &v)? {
            return Err(Error::InconsistentFit("gV0 is not quadratic on V_0".to_string()));
        }
    }

    // x0: first point of X outside W
    let mut x0 = None;
    let mut buf = vec![field.zero(); n];
    for &x in &xset.idx {
        space.decode_into(x, &mut buf);
        if !quad.pair(field, &buf, &setting.v0).is_zero() {
            x0 = Some((x, buf.clone()));
            break;
        }
    }
    let (x0_idx, x0_pt) = x0.ok_or(Error::NoX0Found)?;
    let _ = x0_idx;

    // coordinates: S = [w_basis | x0], v = B t + c x0
    let mut s = Mat::zeros(n, n);
    for (j, col) in w_basis.iter().enumerate() {
        for i in 0..n {
            s.set(i, j, col[i]);
        }
    }
    for i in 0..n {
        s.set(i, dim, x0_pt[i]);
    }
    let sinv = crate::linalg::invert(field, &s)
        .ok_or_else(|| Error::InconsistentFit("x0 does not complete the V_0 basis".to_string()))?;
    // c(v) = last row of S^{-1}; t(v) = first dim rows
    let c_row: Vec<FqElem> = (0..n).map(|i| sinv.at(dim, i)).collect();
    let mut c_poly = MultiPoly::zero(n);
    for (i, &c) in c_row.iter().enumerate() {
        if !c.is_zero() {
            let mut exps = vec![0u16; n];
            exps[i] = 1;
            c_poly.add_term(field, exps, c);
        }
    }
    // w(v) = v - c(v) x0; t(w(v)) = first rows of S^{-1} applied to v
    // (the x0 component is exactly removed by construction)
    let t_images: Vec<Vec<FqElem>> = (0..n)
        .map(|i| (0..dim).map(|r| sinv.at(r, i)).collect::<Vec<FqElem>>())
        .collect();
    // h_w composed with t(v): substitute t_r = sum_i sinv[r][i] v_i
    let images_for_sub: Vec<Vec<FqElem>> = (0..dim)
        .map(|r| (0..n).map(|i| t_images[i][r]).collect())
        .collect();
    let hw_on_v = h_w.substitute_linear(field, &images_for_sub);
    let fx0 = f_even.get_or_err(x0_idx)?;
    let q_sub = hw_on_v.add(field, &c_poly.mul(field, &c_poly).scale(field, fx0));

    // residual r1 = f_even - q_sub on X; fit the linear correction on
    // (x0 + M) cap X with M = W cap x0-orthogonal
    let grad_x0 = quad.gradient(field, &x0_pt);
    let grad_v0 = quad.gradient(field, &setting.v0);
    let sample_m_cap_x = |rng: &mut ChaCha8Rng| -> Result<Vec<FqElem>> {
        let cons = vec![
            (grad_v0.clone(), field.zero()),
            (grad_x0.clone(), field.zero()),
        ];
        affine_quadric_solve_sampled(
            field,
            quad,
            &cons,
            &vec![field.zero(); n],
            field.zero(),
            rng.gen(),
        )
    };
    let mut rows: Vec<Vec<FqElem>> = Vec::new();
    let mut rhs: Vec<FqElem> = Vec::new();
    for _ in 0..(n + 12) {
        let u = sample_m_cap_x(&mut rng)?;
        let pt: Vec<FqElem> = x0_pt.iter().zip(&u).map(|(&a, &b)| field.add(a, b)).collect();
        let idx = space.index_of(&pt);
        if !xset.contains(idx) {
            return Err(Error::InconsistentFit("sampled point left X".to_string()));
        }
        let r1 = field.sub(f_even.get_or_err(idx)?, q_sub.eval_unchecked(field, &pt));
        rows.push(pt);
        rhs.push(r1);
    }
    // homogeneous linear fit: lambda(x0 + u) = r1
    let (lambda_coeffs, _) = lin_solve(field, &Mat::from_rows(&rows), &rhs)
        .ok_or_else(|| Error::InconsistentFit("residual not affine on x0 + M".to_string()))?;
    let mut lambda = MultiPoly::zero(n);
    for (i, &c) in lambda_coeffs.iter().enumerate() {
        if !c.is_zero() {
            let mut exps = vec![0u16; n];
            exps[i] = 1;
            lambda.add_term(field, exps, c);
        }
    }
    let lambda_mu = lambda.mul(field, &c_poly);
    let q_total = q_sub.add(field, &lambda_mu);

    // residual must vanish on N cap X = {c x0 + u}
    for _ in 0..24 {
        let u = sample_m_cap_x(&mut rng)?;
        let c = field.elem(rng.gen_range(0..field.q()));
        let pt: Vec<FqElem> = x0_pt
            .iter()
            .zip(&u)
            .map(|(&a, &b)| field.add(field.mul(c, a), b))
            .collect();
        let idx = space.index_of(&pt);
        if !xset.contains(idx) {
            return Err(Error::InconsistentFit("N cap X sample left X".to_string()));
        }
        let r2 = field.sub(f_even.get_or_err(idx)?, q_total.eval_unchecked(field, &pt));
        if !r2.is_zero() {
            return Err(Error::InconsistentFit("residual nonzero on N cap X".to_string()));
        }
    }

    // descent: F(v) = residual at x_v where v - x_v in W' = W cap N
    let descend = |v: &[FqElem], rng: &mut ChaCha8Rng| -> Result<FqElem> {
        let cons = vec![
            (grad_v0.clone(), quad.pair(field, v, &setting.v0)),
            (grad_x0.clone(), quad.pair(field, v, &x0_pt)),
        ];
        let x = affine_quadric_solve_sampled(
            field,
            quad,
            &cons,
            &vec![field.zero(); n],
            field.zero(),
            rng.gen(),
        )?;
        let idx = space.index_of(&x);
        if !xset.contains(idx) {
            return Err(Error::InconsistentFit("descent point left X".to_string()));
        }
        Ok(field.sub(f_even.get_or_err(idx)?, q_total.eval_unchecked(field, &x)))
    };
    let monos_v = monomials_up_to(n, 2, None).len();
    let mut fsamples: Vec<(Vec<FqElem>, FqElem)> = Vec::new();
    for _ in 0..(monos_v + 30) {
        let v: Vec<FqElem> = (0..n).map(|_| field.elem(rng.gen_range(0..field.q()))).collect();
        let val = descend(&v, &mut rng)?;
        fsamples.push((v, val));
    }
    let g_desc = fit_quadratic(field, n, &fsamples)
        .ok_or_else(|| Error::InconsistentFit("descended function not quadratic".to_string()))?;
    // hold-out checks, including well-definedness of the descent
    for _ in 0..20 {
        let v: Vec<FqElem> = (0..n).map(|_| field.elem(rng.gen_range(0..field.q()))).collect();
        let val = descend(&v, &mut rng)?;
        let val2 = descend(&v, &mut rng)?;
        if val != val2 {
            return Err(Error::InconsistentFit("descent value representation-dependent".to_string()));
        }
        if g_desc.eval_unchecked(field, &v) != val {
            return Err(Error::InconsistentFit("final quadratic fit fails hold-out".to_string()));
        }
    }
    Ok(g_desc.add(field, &q_total))
}

/// Public lift: `g_v0` given as a table total on `V_0`.
pub fn lift_v0_to_v_table(
    field: &Field,
    setting: &QuadraticSetting,
    xset: &PointSet,
    f_even: &FunctionTable,
    g_v0: &FunctionTable,
    seed: u64,
) -> Result<MultiPoly> {
    let w_basis = v0_basis(field, setting, xset.space.n);
    let mut eval = |idx: u64, _pt: &[FqElem]| g_v0.get_or_err(idx);
    lift_v0_to_v(field, setting, xset, f_even, &mut eval, &w_basis, seed)
}

/// Sampled weak-quadraticity gate via solver-generated isotropic 3-spaces.
fn sampled_weak_quadratic_gate(
    field: &Field,
    quad: &QuadForm,
    f: &FunctionTable,
    xset: &PointSet,
    samples: u32,
    seed: u64,
) -> Result<WitnessReport> {
    let space = xset.space;
    let arith = IndexArith::new(field, space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0u64;
    let mut attempts = 0u32;
    while checked < samples as u64 && attempts < samples * 40 {
        attempts += 1;
        let x = xset.idx[rng.gen_range(0..xset.len())];
        if x == 0 {
            continue;
        }
        let xpt = space.decode(x);
        let zero_pt = vec![field.zero(); space.n];
        let gx = quad.gradient(field, &xpt);
        let y = match affine_quadric_solve_sampled(
            field,
            quad,
            &[(gx.clone(), field.zero())],
            &zero_pt,
            field.zero(),
            rng.gen(),
        ) {
            Ok(y) => y,
            Err(Error::NoSolutionFound) => continue,
            Err(e) => return Err(e),
        };
        let gy = quad.gradient(field, &y);
        let z = match affine_quadric_solve_sampled(
            field,
            quad,
            &[(gx.clone(), field.zero()), (gy, field.zero())],
            &zero_pt,
            field.zero(),
            rng.gen(),
        ) {
            Ok(z) => z,
            Err(Error::NoSolutionFound) => continue,
            Err(e) => return Err(e),
        };
        let yidx = space.index_of(&y);
        let zidx = space.index_of(&z);
        let rows = vec![xpt.clone(), y.clone(), z.clone()];
        if Mat::from_rows(&rows).rank(field) < 3 {
            continue;
        }
        checked += 1;
        if !quadratic_on_span(field, f, &arith, &[x, yidx, zidx])? {
            return Ok(WitnessReport::fail(
                checked,
                Witness::Space3 { v1: xpt, v2: y, v3: z },
            ));
        }
    }
    Ok(WitnessReport::pass(checked))
}

/// Fraction of sampled 3-cubes in `X` on which `h_3` vanishes.
fn h3_vanish_sampled(
    field: &Field,
    h: &FunctionTable,
    xset: &PointSet,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    let (cubes, _) = crate::geometry::sample_cubes(field, xset, 3, samples, seed);
    if cubes.is_empty() {
        return Ok(1.0);
    }
    let arith = IndexArith::new(field, xset.space);
    let mut good = 0u64;
    for (u, gens) in &cubes {
        let v = crate::geometry::fm_on_indices(field, &arith, h, *u, gens)?;
        if v.is_zero() {
            good += 1;
        }
    }
    Ok(good as f64 / cubes.len() as f64)
}

/// Full weakly-quadratic extension for `X = {Q = 0}`.
pub fn extend_weakly_quadratic(
    field: &Field,
    quad: &QuadForm,
    xset: &PointSet,
    f: &FunctionTable,
    cfg: &QuadConfig,
) -> Result<QuadCertificate> {
    if field.has_char_two() {
        return Err(Error::CharTwo);
    }
    let space = xset.space;
    let n = space.n;
    let mut stats = QuadStats { h_min_margin: 1.0, vote_margin_floor: 1.0, ..Default::default() };

    // normalize f(0) = 0; the constant is restored in the certificate
    let f0 = f.get_or_err(0)?;
    let f_norm = if f0.is_zero() {
        f.clone()
    } else {
        let pairs: Vec<(u64, FqElem)> = xset
            .idx
            .iter()
            .map(|&x| Ok((x, field.sub(f.get_or_err(x)?, f0))))
            .collect::<Result<_>>()?;
        FunctionTable::new(space, pairs)
    };

    // gate: weak quadraticity
    let gate_work = (xset.len() as u64)
        .saturating_pow(3)
        .saturating_mul((field.q() as u64).pow(3));
    let gate = if gate_work <= cfg.budget {
        is_weakly_quadratic(field, &f_norm, xset, cfg.budget)?
    } else {
        sampled_weak_quadratic_gate(field, quad, &f_norm, xset, cfg.gate_samples, cfg.seed ^ 0x9)?
    };
    stats.weakly_quadratic = Some(gate.verdict);
    stats.spans_checked = gate.checked;
    if !gate.verdict && !cfg.force {
        return Ok(QuadCertificate {
            status: CertStatus::NotExtendable,
            g: None,
            witness: gate.witness,
            stats,
        });
    }

    // odd part goes through the linear pipeline
    let (f_odd, f_even) = even_odd_split(field, &f_norm, xset)?;
    let odd_cert = extend_weakly_linear(field, xset, &f_odd, &cfg.linear)?;
    stats.odd_status = Some(odd_cert.status);
    let g_lin: LinearForm = match (odd_cert.status, odd_cert.g) {
        (CertStatus::Extended, Some(g)) => g,
        (CertStatus::NotExtendable, _) => {
            return Ok(QuadCertificate {
                status: CertStatus::NotExtendable,
                g: None,
                witness: odd_cert.witness,
                stats,
            })
        }
        _ => {
            return Ok(QuadCertificate {
                status: CertStatus::Inconclusive,
                g: None,
                witness: odd_cert.witness,
                stats,
            })
        }
    };

    // 3-cubes through the origin for the even part
    let cube_work = (xset.len() as u64).saturating_pow(3);
    let cubes = if cube_work <= cfg.budget {
        check_3cubes_origin(field, &f_even, xset, cfg.budget)?
    } else {
        sample_3cubes_origin(
            field,
            &f_even,
            xset,
            cfg.gate_samples as u64 * 8,
            cfg.seed ^ 0x33,
        )?
    };
    stats.cubes0_ok = Some(cubes.verdict);
    stats.cubes0_checked = cubes.checked;
    if !cubes.verdict && !cfg.force {
        // the third difference of a quadratic vanishes on every cube, so a
        // violating origin cube refutes extendability
        return Ok(QuadCertificate {
            status: CertStatus::NotExtendable,
            g: None,
            witness: cubes.witness,
            stats,
        });
    }

    // majority correction
    let correction =
        testing_correct_3(field, quad, &f_even, xset, cfg.votes_h, cfg.seed ^ 0x71)?;
    stats.h_min_margin = correction.min_margin;
    stats.h_no_majority = correction.no_majority.len() as u64;
    stats.h_agreement = correction.agreement;
    if !correction.no_majority.is_empty() || correction.min_margin < cfg.min_margin {
        return Ok(QuadCertificate {
            status: CertStatus::Inconclusive,
            g: None,
            witness: None,
            stats,
        });
    }
    let h = correction.h;

    // h_3 should vanish on C_3(X)
    let h3 = h3_vanish_sampled(field, &h, xset, 400, cfg.seed ^ 0x55)?;
    stats.h3_vanish_fraction = h3;
    if h3 < 1.0 && !cfg.force {
        return Ok(QuadCertificate {
            status: CertStatus::Inconclusive,
            g: None,
            witness: None,
            stats,
        });
    }

    // the v0 / V_0 scaffolding and the cascade
    let setting = QuadraticSetting::new(field, quad.clone(), &space)?;
    stats.rescaled = setting.rescaled_by.is_some();
    let w_basis = v0_basis(field, &setting, n);
    let mut cascade = Cascade::new(field, &setting, xset, &h, cfg);
    let g_even = {
        let mut eval = |idx: u64, pt: &[FqElem]| cascade.g_v0(idx, pt);
        match lift_v0_to_v(field, &setting, xset, &f_even, &mut eval, &w_basis, cfg.seed ^ 0xd1) {
            Ok(g) => g,
            Err(Error::NoMajority(_)) | Err(Error::EmptyZ(_)) | Err(Error::InconsistentFit(_))
            | Err(Error::NoSolutionFound) | Err(Error::NoX0Found) => {
                stats.vote_margin_floor = cascade.margin_floor;
                return Ok(QuadCertificate {
                    status: CertStatus::Inconclusive,
                    g: None,
                    witness: None,
                    stats,
                });
            }
            Err(e) => return Err(e),
        }
    };
    stats.vote_margin_floor = cascade.margin_floor;

    // assemble: even + odd + constant, then gauge-fix at v0
    let mut g_total = g_even;
    for (i, &c) in g_lin.coeffs.iter().enumerate() {
        if !c.is_zero() {
            let mut exps = vec![0u16; n];
            exps[i] = 1;
            g_total.add_term(field, exps, c);
        }
    }
    let const_term = field.add(g_lin.constant, f0);
    g_total = g_total.add(field, &MultiPoly::constant(n, const_term));
    let gv0 = g_total.eval_unchecked(field, &setting.v0);
    if !gv0.is_zero() {
        g_total = g_total.sub(field, &setting.quad.poly.scale(field, gv0));
    }

    // final exact verification on all of X
    let mut disagreements = 0u64;
    let mut buf = vec![field.zero(); n];
    for &x in &xset.idx {
        space.decode_into(x, &mut buf);
        let want = if cfg.force {
            // compare against the corrected parts: h for even, the decoded
            // linear form for odd, plus the removed constant
            let mut w = h.get_or_err(x)?;
            w = field.add(w, g_lin.eval(field, &buf));
            field.add(w, f0)
        } else {
            f.get_or_err(x)?
        };
        if g_total.eval_unchecked(field, &buf) != want {
            disagreements += 1;
        }
    }
    stats.disagreements = disagreements;
    if disagreements == 0 {
        Ok(QuadCertificate {
            status: CertStatus::Extended,
            g: Some(g_total),
            witness: None,
            stats,
        })
    } else {
        Ok(QuadCertificate {
            status: CertStatus::Inconclusive,
            g: None,
            witness: None,
            stats,
        })
    }
}

/// Convenience: the linear configuration a quadratic run should use at a
/// given scale.
pub fn scaled_linear_config(space_size: u64, seed: u64) -> LinearConfig {
    // exact stages walk |X|^2-sized loops; past ~2^13 points they are no
    // longer desk-scale and the sampled stages take over
    if space_size <= 1 << 13 {
        LinearConfig { budget: 1 << 32, ..Default::default() }
    } else {
        LinearConfig {
            votes: VoteMode::Sampled { votes: 24, seed },
            decode: crate::extend_linear::DecodeMode::Character,
            rep_checks: Some(2),
            budget: 1 << 28,
            ..Default::default()
        }
    }
}
