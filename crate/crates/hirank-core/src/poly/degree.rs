//! Degree-of-variety estimation: sample subspaces over an extension field,
//! count intersection points with the projectivized variety, and return the
//! modal count.
//!
//! For hypersurfaces (`L = 1`) the sampled subspace is a projective line and
//! intersection points are counted over the algebraic closure, as the number
//! of distinct roots of the restricted binary form (degree of its radical).
//! For higher codimension the count is of `k_m`-rational points, which
//! converges to the geometric count only as the extension grows.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::linalg::Mat;
use crate::Result;

use super::{MultiPoly, PolyFamily};

/// Modal number of projective intersection points of `X` with sampled
/// `(L+1)`-dimensional subspaces over the extension of degree `ext_degree`.
pub fn variety_degree_estimate(
    f: &Field,
    fam: &PolyFamily,
    ext_degree: u32,
    trials: u32,
    seed: u64,
) -> Result<u64> {
    if !fam.is_homogeneous() {
        return Err(Error::PreconditionViolated(
            "degree estimation needs a homogeneous family".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::PreconditionViolated("need at least one trial".into()));
    }
    let big = Field::new(f.p(), f.l() * ext_degree)?;
    let embed = Embedding::new(f, &big)?;
    let lifted: Vec<MultiPoly> =
        fam.members.iter().map(|p| embed.lift_poly(f, &big, p)).collect();
    let l = fam.codimension();
    let n = fam.n;
    let dim_m = l + 1;
    if n < dim_m {
        return Err(Error::PreconditionViolated(
            "ambient dimension below subspace dimension".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::new();
    let mut attempts = 0u32;
    while counts.len() < trials as usize {
        attempts += 1;
        if attempts > trials.saturating_mul(50) {
            return Err(Error::DegenerateSampling(counts));
        }
        let basis: Vec<Vec<FqElem>> = (0..dim_m)
            .map(|_| (0..n).map(|_| big.elem(rng.gen_range(0..big.q()))).collect())
            .collect();
        if Mat::from_rows(&basis).rank(&big) < dim_m {
            continue;
        }
        let cnt = if l == 1 {
            match line_intersection_closure(&big, &lifted[0], &basis[0], &basis[1]) {
                Some(c) => c,
                None => continue, // line inside the hypersurface
            }
        } else {
            rational_intersection(&big, &lifted, &basis)
        };
        counts.push(cnt);
    }

    let mut freq: BTreeMap<u64, u32> = BTreeMap::new();
    for &c in &counts {
        *freq.entry(c).or_insert(0) += 1;
    }
    let (&mode, &occ) = freq.iter().max_by_key(|(c, occ)| (**occ, core::cmp::Reverse(**c))).unwrap();
    if occ < 2 && counts.len() > 1 {
        return Err(Error::DegenerateSampling(counts));
    }
    Ok(mode)
}

/// Distinct closure points of `{P = 0}` on the line spanned by `u`, `w`:
/// the radical degree of the restricted binary form. `None` when the form
/// vanishes identically.
fn line_intersection_closure(
    big: &Field,
    p: &MultiPoly,
    u: &[FqElem],
    w: &[FqElem],
) -> Option<u64> {
    let images: Vec<Vec<FqElem>> = (0..p.n).map(|i| vec![u[i], w[i]]).collect();
    let restricted = p.substitute_linear(big, &images);
    if restricted.is_zero() {
        return None;
    }
    let d = restricted.degree();
    // binary form sum c_j s^(d-j) t^j; dehomogenize at s = 1
    let mut coeffs = vec![big.zero(); d as usize + 1];
    for (mono, &c) in &restricted.terms {
        debug_assert_eq!(mono[0] as u32 + mono[1] as u32, d);
        coeffs[mono[1] as usize] = c;
    }
    let deg_f = (0..coeffs.len()).rev().find(|&i| !coeffs[i].is_zero()).unwrap();
    let affine_roots = radical_degree(big, &coeffs[..=deg_f]);
    let root_at_infinity = (deg_f as u32) < d;
    Some(affine_roots as u64 + root_at_infinity as u64)
}

fn rational_intersection(big: &Field, polys: &[MultiPoly], basis: &[Vec<FqElem>]) -> u64 {
    let dim = basis.len();
    let n = basis[0].len();
    let mut count = 0u64;
    // projective reps: first nonzero coordinate = 1
    for lead in 0..dim {
        let free = dim - lead - 1;
        let total = (big.q() as u64).pow(free as u32);
        let mut t = vec![big.zero(); dim];
        t[lead] = big.one();
        let mut odo = vec![0u32; free];
        for _ in 0..total {
            for (k, &o) in odo.iter().enumerate() {
                t[lead + 1 + k] = big.elem(o);
            }
            let mut pt = vec![big.zero(); n];
            for (j, tj) in t.iter().enumerate() {
                if tj.is_zero() {
                    continue;
                }
                for i in 0..n {
                    pt[i] = big.add(pt[i], big.mul(*tj, basis[j][i]));
                }
            }
            if polys.iter().all(|p| p.eval_unchecked(big, &pt).is_zero()) {
                count += 1;
            }
            for slot in odo.iter_mut() {
                *slot += 1;
                if *slot < big.q() {
                    break;
                }
                *slot = 0;
            }
        }
    }
    count
}

/// Embedding of a base field into an extension of its own tower, fixed by
/// sending the base generator to the first root of the base modulus.
pub struct Embedding {
    base_l: u32,
    gen_image: FqElem,
}

impl Embedding {
    pub fn new(base: &Field, big: &Field) -> Result<Embedding> {
        if big.p() != base.p() || big.l() % base.l() != 0 {
            return Err(Error::UnsupportedField("not an extension of the base field".into()));
        }
        if base.l() == 1 {
            return Ok(Embedding { base_l: 1, gen_image: big.one() });
        }
        // first root of the base modulus in the big field, packed order
        let root = big.elems().find(|&x| {
            let mut v = big.pow(x, base.l() as u64); // leading monic term
            for (i, &c) in base.modulus().iter().enumerate() {
                let term = big.mul(big.from_int(c as i64), big.pow(x, i as u64));
                v = big.add(v, term);
            }
            v.is_zero()
        });
        let gen_image = root.ok_or_else(|| {
            Error::UnsupportedField("modulus has no root in the extension".into())
        })?;
        Ok(Embedding { base_l: base.l(), gen_image })
    }

    pub fn lift(&self, base: &Field, big: &Field, a: FqElem) -> FqElem {
        if self.base_l == 1 {
            return big.from_int(a.packed() as i64);
        }
        let c = base.coeffs(a);
        let mut acc = big.zero();
        let mut pw = big.one();
        for &ci in c.iter().take(self.base_l as usize) {
            acc = big.add(acc, big.mul(big.from_int(ci as i64), pw));
            pw = big.mul(pw, self.gen_image);
        }
        acc
    }

    pub fn lift_poly(&self, base: &Field, big: &Field, p: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(p.n);
        for (m, &c) in &p.terms {
            out.terms.insert(m.clone(), self.lift(base, big, c));
        }
        out
    }
}

// --- univariate helpers over F_q (coefficients ascending, no trailing zeros)

fn trim(f: &mut Vec<FqElem>) {
    while f.last().map(|c| c.is_zero()).unwrap_or(false) {
        f.pop();
    }
}

fn monic(field: &Field, f: &mut Vec<FqElem>) {
    if let Some(&lead) = f.last() {
        if lead != field.one() {
            let inv = field.inv(lead);
            for c in f.iter_mut() {
                *c = field.mul(*c, inv);
            }
        }
    }
}

fn rem(field: &Field, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
    let mut r: Vec<FqElem> = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = field.inv(*b.last().unwrap());
    while r.len() > db {
        let da = r.len() - 1;
        let factor = field.mul(*r.last().unwrap(), lead_inv);
        for i in 0..=db {
            let idx = da - db + i;
            r[idx] = field.sub(r[idx], field.mul(factor, b[i]));
        }
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    r
}

fn div_exact(field: &Field, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
    let mut r: Vec<FqElem> = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let mut q = vec![field.zero(); r.len().saturating_sub(db)];
    let lead_inv = field.inv(*b.last().unwrap());
    while r.len() > db {
        let da = r.len() - 1;
        let factor = field.mul(*r.last().unwrap(), lead_inv);
        q[da - db] = factor;
        for i in 0..=db {
            let idx = da - db + i;
            r[idx] = field.sub(r[idx], field.mul(factor, b[i]));
        }
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    debug_assert!(r.is_empty() || r.len() <= db);
    q
}

fn gcd(field: &Field, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
    let mut x: Vec<FqElem> = a.to_vec();
    let mut y: Vec<FqElem> = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(field, &x, &y);
        x = y;
        y = r;
    }
    monic(field, &mut x);
    x
}

fn derivative(field: &Field, f: &[FqElem]) -> Vec<FqElem> {
    let mut out = Vec::new();
    for (i, &c) in f.iter().enumerate().skip(1) {
        out.push(field.mul(field.from_int(i as i64), c));
    }
    trim(&mut out);
    out
}

/// Degree of the radical of `f`: the number of distinct roots in the
/// algebraic closure.
pub fn radical_degree(field: &Field, f: &[FqElem]) -> usize {
    let mut f: Vec<FqElem> = f.to_vec();
    trim(&mut f);
    if f.len() <= 1 {
        return 0;
    }
    monic(field, &mut f);
    let d = derivative(field, &f);
    if d.is_empty() {
        // f = e(x^p): pull back through Frobenius
        return radical_degree(field, &pth_root(field, &f));
    }
    let g = gcd(field, &f, &d);
    let u = div_exact(field, &f, &g); // squarefree, multiplicities not divisible by p
    // strip all u-factors; the residue collects factors with multiplicity
    // divisible by p and is therefore a p-th power
    let mut h = f;
    loop {
        let c = gcd(field, &h, &u);
        if c.len() <= 1 {
            break;
        }
        h = div_exact(field, &h, &c);
    }
    let mut total = u.len() - 1;
    if h.len() > 1 {
        total += radical_degree(field, &pth_root(field, &h));
    }
    total
}

fn pth_root(field: &Field, f: &[FqElem]) -> Vec<FqElem> {
    let p = field.p() as usize;
    let mut out = Vec::new();
    for i in (0..f.len()).step_by(p) {
        // inverse Frobenius: c -> c^(p^(l-1))
        let e = field.p().pow(field.l() - 1) as u64;
        out.push(field.pow(f[i], e));
    }
    trim(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn radical_degree_counts_distinct_roots() {
        let f = Field::new(3, 1).unwrap();
        // (x - 1)^2 (x - 2) = x^3 + x^2 + ... compute directly: roots {1, 2}
        let x = [f.zero(), f.one()];
        let lin1 = [f.from_int(-1), f.one()];
        let lin2 = [f.from_int(-2), f.one()];
        let sq = mul_uni(&f, &lin1, &lin1);
        let p = mul_uni(&f, &sq, &lin2);
        assert_eq!(radical_degree(&f, &p), 2);
        // x^3 over F_3: p-th power, single root
        let x3 = mul_uni(&f, &mul_uni(&f, &x, &x), &x);
        assert_eq!(radical_degree(&f, &x3), 1);
        // irreducible quadratic x^2 + 1 has two closure roots
        let irr = [f.one(), f.zero(), f.one()];
        assert_eq!(radical_degree(&f, &irr), 2);
    }

    fn mul_uni(f: &Field, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
        let mut out = vec![f.zero(); a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
        out
    }

    #[test]
    fn hyperplane_degree_is_one() {
        let f = Field::new(3, 1).unwrap();
        let fam = PolyFamily::new(3, vec![parse_poly("x0 + x1", 3, &f).unwrap()]);
        assert_eq!(variety_degree_estimate(&f, &fam, 2, 11, 5).unwrap(), 1);
    }

    #[test]
    fn conic_degree_is_two() {
        let f = Field::new(3, 1).unwrap();
        let fam = PolyFamily::new(3, vec![parse_poly("x0*x1 - x2^2", 3, &f).unwrap()]);
        assert_eq!(variety_degree_estimate(&f, &fam, 2, 15, 1).unwrap(), 2);
    }

    #[test]
    fn conic_modal_count_matches_exhaustive_lines() {
        // oracle: enumerate every line of P^2(F_9) instead of sampling
        let base = Field::new(3, 1).unwrap();
        let big = Field::new(3, 2).unwrap();
        let p = parse_poly("x0*x1 - x2^2", 3, &base).unwrap();
        let emb = Embedding::new(&base, &big).unwrap();
        let lifted = {
            let mut out = MultiPoly::zero(3);
            for (m, &c) in &p.terms {
                out.terms.insert(m.clone(), emb.lift(&base, &big, c));
            }
            out
        };
        // all projective points of P^2(F_9)
        let mut pts: Vec<Vec<FqElem>> = Vec::new();
        for lead in 0..3usize {
            let free = 2 - lead;
            let total = (big.q() as u64).pow(free as u32);
            let mut odo = vec![0u32; free];
            for _ in 0..total {
                let mut v = vec![big.zero(); 3];
                v[lead] = big.one();
                for (k, &o) in odo.iter().enumerate() {
                    v[lead + 1 + k] = big.elem(o);
                }
                pts.push(v);
                for s in odo.iter_mut() {
                    *s += 1;
                    if *s < big.q() {
                        break;
                    }
                    *s = 0;
                }
            }
        }
        let mut freq: BTreeMap<u64, u32> = BTreeMap::new();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                if let Some(c) =
                    line_intersection_closure(&big, &lifted, &pts[i], &pts[j])
                {
                    *freq.entry(c).or_insert(0) += 1;
                }
            }
        }
        let (&mode, _) = freq.iter().max_by_key(|(_, occ)| **occ).unwrap();
        assert_eq!(mode, 2);
    }

    #[test]
    fn cubic_surface_degree_is_three() {
        let f = Field::new(7, 1).unwrap();
        let fam = PolyFamily::new(
            4,
            vec![parse_poly("x0^3 + x1^3 + x2^3 + x3^3", 4, &f).unwrap()],
        );
        assert_eq!(variety_degree_estimate(&f, &fam, 2, 15, 3).unwrap(), 3);
    }
}
