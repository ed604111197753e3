//! Ancillary sets: `Y_2`, `Y_3` (cube-completion counts), `F` and `E`
//! (pairs/triples admitting no witness in `X`), and the finitary Fubini
//! check for `C`-homogeneous maps.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::fourier::{count_via_characters, EstimateWithCI};
use crate::poly::{MultiPoly, PolyFamily};
use crate::Result;

use super::{IndexArith, PointSet, Variety};

#[derive(Clone, Copy, Debug)]
pub enum CountMode {
    Exact,
    Sampled { samples: u64, seed: u64, confidence: f64 },
}

#[derive(Clone, Debug)]
pub enum DensityReport {
    Exact { members: u128, total: u128 },
    Estimate(EstimateWithCI),
}

impl DensityReport {
    pub fn density(&self) -> f64 {
        match self {
            DensityReport::Exact { members, total } => {
                if *total == 0 {
                    0.0
                } else {
                    *members as f64 / *total as f64
                }
            }
            DensityReport::Estimate(e) => e.value,
        }
    }
}

/// Number of `x in X` with `x + v in X` and `x + v' in X`; the inner witness
/// search of the `F` membership test (early exit is the caller's business).
pub fn f_witness_count(
    field: &Field,
    arith: &IndexArith,
    xset: &PointSet,
    v: u64,
    vp: u64,
) -> u64 {
    let _ = field;
    let mut n = 0;
    for &x in &xset.idx {
        if xset.contains(arith.add(x, v)) && xset.contains(arith.add(x, vp)) {
            n += 1;
        }
    }
    n
}

fn f_has_witness(arith: &IndexArith, xset: &PointSet, v: u64, vp: u64) -> bool {
    xset.idx
        .iter()
        .any(|&x| xset.contains(arith.add(x, v)) && xset.contains(arith.add(x, vp)))
}

/// Number of `y in X` with `y + v, y + v + v', -y + v'' in X`.
pub fn e_witness_count(
    field: &Field,
    arith: &IndexArith,
    xset: &PointSet,
    v: u64,
    vp: u64,
    vpp: u64,
) -> u64 {
    let _ = field;
    let mut n = 0;
    let vsum = arith.add(v, vp);
    for &y in &xset.idx {
        if xset.contains(arith.add(y, v))
            && xset.contains(arith.add(y, vsum))
            && xset.contains(arith.add(arith.neg(y), vpp))
        {
            n += 1;
        }
    }
    n
}

fn e_has_witness(arith: &IndexArith, xset: &PointSet, v: u64, vp: u64, vpp: u64) -> bool {
    let vsum = arith.add(v, vp);
    xset.idx.iter().any(|&y| {
        xset.contains(arith.add(y, v))
            && xset.contains(arith.add(y, vsum))
            && xset.contains(arith.add(arith.neg(y), vpp))
    })
}

/// Density of `F(X) = {(v, v') : no x in X has x+v, x+v' in X}` in `V^2`.
pub fn ancillary_f_density(
    field: &Field,
    xset: &PointSet,
    mode: CountMode,
    budget: u64,
) -> Result<DensityReport> {
    let space = xset.space;
    let arith = IndexArith::new(field, space);
    match mode {
        CountMode::Exact => {
            let total = (space.size as u128) * (space.size as u128);
            if total > budget as u128 {
                return Err(Error::BudgetExceeded { needed: u64::MAX, budget });
            }
            let mut members = 0u128;
            for v in 0..space.size {
                for vp in 0..space.size {
                    if !f_has_witness(&arith, xset, v, vp) {
                        members += 1;
                    }
                }
            }
            Ok(DensityReport::Exact { members, total })
        }
        CountMode::Sampled { samples, seed, confidence } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            for _ in 0..samples {
                let v = rng.gen_range(0..space.size);
                let vp = rng.gen_range(0..space.size);
                if !f_has_witness(&arith, xset, v, vp) {
                    hits += 1;
                }
            }
            Ok(DensityReport::Estimate(EstimateWithCI::new(
                hits as f64 / samples as f64,
                confidence,
                samples,
                seed,
            )))
        }
    }
}

/// Density of `E(X) = {(v,v',v'') : no y in X has y+v, y+v+v', -y+v'' in X}`
/// in `V^3`.
pub fn ancillary_e_density(
    field: &Field,
    xset: &PointSet,
    mode: CountMode,
    budget: u64,
) -> Result<DensityReport> {
    let space = xset.space;
    let arith = IndexArith::new(field, space);
    match mode {
        CountMode::Exact => {
            let total = (space.size as u128).pow(3);
            if total > budget as u128 {
                return Err(Error::BudgetExceeded { needed: u64::MAX, budget });
            }
            let mut members = 0u128;
            for v in 0..space.size {
                for vp in 0..space.size {
                    for vpp in 0..space.size {
                        if !e_has_witness(&arith, xset, v, vp, vpp) {
                            members += 1;
                        }
                    }
                }
            }
            Ok(DensityReport::Exact { members, total })
        }
        CountMode::Sampled { samples, seed, confidence } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            for _ in 0..samples {
                let v = rng.gen_range(0..space.size);
                let vp = rng.gen_range(0..space.size);
                let vpp = rng.gen_range(0..space.size);
                if !e_has_witness(&arith, xset, v, vp, vpp) {
                    hits += 1;
                }
            }
            Ok(DensityReport::Estimate(EstimateWithCI::new(
                hits as f64 / samples as f64,
                confidence,
                samples,
                seed,
            )))
        }
    }
}

/// Constraint polynomials in `(m+1) n` variables expressing that every
/// vertex of the cube `(x | v_1..v_m)` lies on `X`: one polynomial per
/// (family member, vertex) pair.
fn cube_vertex_constraints(field: &Field, fam: &PolyFamily, m: usize) -> Vec<MultiPoly> {
    let n = fam.n;
    let big_n = (m + 1) * n;
    let mut out = Vec::new();
    for omega in 0..(1u32 << m) {
        for p in &fam.members {
            // substitute x_i -> x_i + sum_{j: omega_j = 1} v_{j,i}
            let images: Vec<Vec<FqElem>> = (0..n)
                .map(|i| {
                    let mut row = vec![field.zero(); big_n];
                    row[i] = field.one();
                    for j in 0..m {
                        if omega >> j & 1 == 1 {
                            row[(j + 1) * n + i] = field.one();
                        }
                    }
                    row
                })
                .collect();
            out.push(p.substitute_linear(field, &images));
        }
    }
    out
}

/// `|Y_2(X)|`: tuples `(x, v1, v2)` with the full parallelogram in `X`,
/// counted by the character-sum engine.
pub fn y2_count(variety: &Variety, budget: u64) -> Result<u128> {
    ym_count(variety, 2, budget)
}

/// `|Y_3(X)|`: tuples `(x, v1, v2, v3)` with the full 3-cube in `X`.
pub fn y3_count(variety: &Variety, budget: u64) -> Result<u128> {
    ym_count(variety, 3, budget)
}

fn ym_count(variety: &Variety, m: usize, budget: u64) -> Result<u128> {
    let field = &variety.field;
    let constraints = cube_vertex_constraints(field, &variety.family, m);
    let targets = vec![field.zero(); constraints.len()];
    let big_n = (m + 1) * variety.family.n;
    count_via_characters(field, big_n, &constraints, &[], &targets, budget)
}

/// A finite map `p: S -> T` presented as a table of target indices.
#[derive(Clone, Debug)]
pub struct FiniteMap {
    pub target_size: usize,
    pub image: Vec<usize>,
}

impl FiniteMap {
    pub fn fiber_sizes(&self) -> Result<Vec<u64>> {
        let mut sizes = vec![0u64; self.target_size];
        for &t in &self.image {
            if t >= self.target_size {
                return Err(Error::PreconditionViolated("image index out of range".into()));
            }
            sizes[t] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyFiber(empty));
        }
        Ok(sizes)
    }
}

/// `C >= 1` with `|S_y| / |S_{y'}| <= C` for all fibers.
pub fn measure_homogeneity(map: &FiniteMap) -> Result<f64> {
    let sizes = map.fiber_sizes()?;
    let max = *sizes.iter().max().unwrap() as f64;
    let min = *sizes.iter().min().unwrap() as f64;
    Ok(max / min)
}

#[derive(Clone, Debug)]
pub struct FubiniReport {
    pub c: f64,
    /// fraction of targets whose fiber is `(1 - C^2 eps / 2)`-covered
    pub good_fraction: f64,
    pub threshold: f64,
    /// `|P|/|S| >= 1 - eps` and `eps <= C^{-2}` actually held
    pub preconditions_met: bool,
    pub holds: bool,
}

/// The finitary Fubini transfer: if `P` covers `(1-eps)` of the source and
/// the map is `C`-homogeneous, then `(1 - C^2 eps/2)` of the fibers are
/// `(1 - C^2 eps/2)`-covered. Vacuously true when the preconditions fail.
pub fn fubini_check(map: &FiniteMap, subset: &[bool], eps: f64) -> Result<FubiniReport> {
    if subset.len() != map.image.len() {
        return Err(Error::DimensionMismatch { expected: map.image.len(), got: subset.len() });
    }
    let c = measure_homogeneity(map)?;
    let sizes = map.fiber_sizes()?;
    let mut covered = vec![0u64; map.target_size];
    let mut in_p = 0u64;
    for (i, &t) in map.image.iter().enumerate() {
        if subset[i] {
            covered[t] += 1;
            in_p += 1;
        }
    }
    let threshold = 1.0 - c * c * eps / 2.0;
    let mut good = 0u64;
    for (t, &sz) in sizes.iter().enumerate() {
        if covered[t] as f64 / sz as f64 >= threshold {
            good += 1;
        }
    }
    let good_fraction = good as f64 / map.target_size as f64;
    let density_ok = in_p as f64 / map.image.len() as f64 >= 1.0 - eps;
    let eps_ok = eps <= 1.0 / (c * c);
    let preconditions_met = density_ok && eps_ok;
    let holds = !preconditions_met || good_fraction >= threshold;
    Ok(FubiniReport { c, good_fraction, threshold, preconditions_met, holds })
}
