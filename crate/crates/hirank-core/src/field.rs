//! Exact arithmetic in `F_q`, `q = p^l` with `p <= 101` prime and `l <= 3`.
//!
//! Elements are packed as `c0 + c1*p + c2*p^2` into a [`FqElem`] (a `u32`),
//! which doubles as the element's index in the canonical enumeration order
//! `0..q`. Extension arithmetic reduces modulo the lexicographically smallest
//! monic irreducible polynomial of degree `l`, so results reproduce across
//! machines.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::error::Error;
use crate::Result;

pub const MAX_P: u32 = 101;
pub const MAX_L: u32 = 3;

/// A field element, packed into `[0, q)`. Only meaningful together with the
/// [`Field`] it came from.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FqElem(pub(crate) u32);

impl FqElem {
    /// Packed value, also the element's index in enumeration order.
    pub fn packed(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Descriptor of `F_q` together with precomputed reduction and square-root
/// data. Immutable after construction; all operations are pure.
#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    l: u32,
    q: u32,
    /// Coefficients `c_0..c_{l-1}` of the monic modulus `x^l + sum c_i x^i`.
    /// Empty for `l = 1`.
    modulus: Vec<u32>,
    /// `g^l` and `g^(l+1)` reduced, as coefficient vectors of length `l`.
    red_l: Vec<u32>,
    red_l1: Vec<u32>,
    /// Traces of the basis powers `g^i`, `i < l`.
    tr_basis: Vec<u32>,
    /// `sqrt_tab[x] = y` with `y*y = x`, `u32::MAX` if `x` is a non-square.
    sqrt_tab: Vec<u32>,
    inv2: u32,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.l == other.l && self.modulus == other.modulus
    }
}
impl Eq for Field {}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// `make_field(p, l)`: the field `F_{p^l}` with the lexicographically
    /// smallest monic irreducible modulus (coefficient list `[c0,..]` compared
    /// ascending-power). Deterministic across runs.
    pub fn new(p: u32, l: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrime(p));
        }
        if p > MAX_P || l == 0 || l > MAX_L {
            return Err(Error::UnsupportedField(format!(
                "p={p}, l={l} outside supported range p<={MAX_P}, 1<=l<={MAX_L}"
            )));
        }
        let q = p.pow(l);
        let modulus = if l == 1 {
            Vec::new()
        } else {
            find_modulus(p, l).expect("an irreducible polynomial of each degree exists")
        };
        let mut f = Field {
            p,
            l,
            q,
            modulus,
            red_l: vec![0; l as usize],
            red_l1: vec![0; l as usize],
            tr_basis: vec![0; l as usize],
            sqrt_tab: Vec::new(),
            inv2: 0,
        };
        if l > 1 {
            // g^l = -modulus tail; g^(l+1) = g * g^l reduced.
            for i in 0..l as usize {
                f.red_l[i] = (p - f.modulus[i]) % p;
            }
            let mut shifted = vec![0u32; l as usize + 1];
            for i in 0..l as usize {
                shifted[i + 1] = f.red_l[i];
            }
            let top = shifted[l as usize];
            for i in 0..l as usize {
                f.red_l1[i] = (shifted[i] + top * f.red_l[i]) % p;
            }
        }
        // trace(g^i) by explicit Frobenius orbits
        for i in 0..l as usize {
            let gi = f.basis_power(i);
            let mut acc = gi;
            let mut sum = gi;
            for _ in 1..l {
                acc = f.pow(acc, p as u64);
                sum = f.add(sum, acc);
            }
            let c = f.coeffs(sum);
            debug_assert!(c[1..].iter().all(|&x| x == 0), "trace must be in F_p");
            f.tr_basis[i] = c[0];
        }
        let mut sqrt_tab = vec![u32::MAX; q as usize];
        for x in 0..q {
            let e = FqElem(x);
            let sq = f.mul(e, e).0;
            if sqrt_tab[sq as usize] == u32::MAX {
                sqrt_tab[sq as usize] = x;
            }
        }
        f.sqrt_tab = sqrt_tab;
        if p != 2 {
            f.inv2 = f.inv(FqElem(2)).0;
        }
        Ok(f)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Modulus coefficients `c0..c_{l-1}` (empty in the prime case).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn has_char_two(&self) -> bool {
        self.p == 2
    }

    pub fn zero(&self) -> FqElem {
        FqElem(0)
    }
    pub fn one(&self) -> FqElem {
        FqElem(1)
    }

    /// Element of the prime subfield from an integer.
    pub fn from_int(&self, v: i64) -> FqElem {
        FqElem(v.rem_euclid(self.p as i64) as u32)
    }

    /// Element by packed index; panics if out of range.
    pub fn elem(&self, packed: u32) -> FqElem {
        assert!(packed < self.q, "packed value {packed} out of range for q={}", self.q);
        FqElem(packed)
    }

    pub fn elem_from_coeffs(&self, coeffs: &[i64]) -> Result<FqElem> {
        if coeffs.len() > self.l as usize {
            return Err(Error::UnsupportedField(format!(
                "coefficient list of length {} for extension degree {}",
                coeffs.len(),
                self.l
            )));
        }
        let mut packed = 0u32;
        let mut base = 1u32;
        for i in 0..self.l as usize {
            let c = coeffs.get(i).copied().unwrap_or(0).rem_euclid(self.p as i64) as u32;
            packed += c * base;
            base *= self.p;
        }
        Ok(FqElem(packed))
    }

    /// Coefficients `[c0, c1, c2]` of an element (unused slots zero).
    pub fn coeffs(&self, a: FqElem) -> [u32; 3] {
        let mut v = a.0;
        let mut out = [0u32; 3];
        for slot in out.iter_mut().take(self.l as usize) {
            *slot = v % self.p;
            v /= self.p;
        }
        out
    }

    fn basis_power(&self, i: usize) -> FqElem {
        FqElem(self.p.pow(i as u32))
    }

    pub fn add(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.l == 1 {
            let s = a.0 + b.0;
            return FqElem(if s >= self.p { s - self.p } else { s });
        }
        let (p, mut out, mut base) = (self.p, 0u32, 1u32);
        let (mut x, mut y) = (a.0, b.0);
        for _ in 0..self.l {
            let s = x % p + y % p;
            out += (if s >= p { s - p } else { s }) * base;
            x /= p;
            y /= p;
            base *= p;
        }
        FqElem(out)
    }

    pub fn neg(&self, a: FqElem) -> FqElem {
        if self.l == 1 {
            return FqElem(if a.0 == 0 { 0 } else { self.p - a.0 });
        }
        let (p, mut out, mut base) = (self.p, 0u32, 1u32);
        let mut x = a.0;
        for _ in 0..self.l {
            let c = x % p;
            out += (if c == 0 { 0 } else { p - c }) * base;
            x /= p;
            base *= p;
        }
        FqElem(out)
    }

    pub fn sub(&self, a: FqElem, b: FqElem) -> FqElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FqElem, b: FqElem) -> FqElem {
        let p = self.p as u64;
        match self.l {
            1 => FqElem(((a.0 as u64 * b.0 as u64) % p) as u32),
            2 => {
                let (a0, a1) = ((a.0 % self.p) as u64, (a.0 / self.p) as u64);
                let (b0, b1) = ((b.0 % self.p) as u64, (b.0 / self.p) as u64);
                let t2 = a1 * b1 % p;
                let c0 = (a0 * b0 + t2 * self.red_l[0] as u64) % p;
                let c1 = (a0 * b1 + a1 * b0 + t2 * self.red_l[1] as u64) % p;
                FqElem((c0 + c1 * p) as u32)
            }
            _ => {
                let pa = self.p;
                let (a0, a1, a2) =
                    ((a.0 % pa) as u64, (a.0 / pa % pa) as u64, (a.0 / (pa * pa)) as u64);
                let (b0, b1, b2) =
                    ((b.0 % pa) as u64, (b.0 / pa % pa) as u64, (b.0 / (pa * pa)) as u64);
                let t3 = (a1 * b2 + a2 * b1) % p;
                let t4 = a2 * b2 % p;
                let c0 =
                    (a0 * b0 + t3 * self.red_l[0] as u64 + t4 * self.red_l1[0] as u64) % p;
                let c1 = (a0 * b1 + a1 * b0 + t3 * self.red_l[1] as u64
                    + t4 * self.red_l1[1] as u64)
                    % p;
                let c2 = (a0 * b2 + a1 * b1 + a2 * b0
                    + t3 * self.red_l[2] as u64
                    + t4 * self.red_l1[2] as u64)
                    % p;
                FqElem((c0 + c1 * p + c2 * p * p) as u32)
            }
        }
    }

    pub fn pow(&self, a: FqElem, mut e: u64) -> FqElem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: FqElem) -> FqElem {
        assert!(a.0 != 0, "inverse of zero");
        self.pow(a, self.q as u64 - 2)
    }

    /// Inverse of 2 (odd characteristic only).
    pub fn half(&self, a: FqElem) -> FqElem {
        debug_assert!(self.p != 2);
        self.mul(a, FqElem(self.inv2))
    }

    /// Trace down to `F_p`, returned as a residue in `Z/p`. Linear over the
    /// prime subfield, so it reduces to a dot product with the basis traces.
    pub fn trace(&self, a: FqElem) -> u32 {
        if self.l == 1 {
            return a.0;
        }
        let c = self.coeffs(a);
        let mut t = 0u64;
        for i in 0..self.l as usize {
            t += c[i] as u64 * self.tr_basis[i] as u64;
        }
        (t % self.p as u64) as u32
    }

    /// The additive character `e_q(a) = exp(2 pi i tr(a) / p)`.
    pub fn char_eq(&self, a: FqElem) -> CharacterValue {
        CharacterValue { p: self.p, residue: self.trace(a) }
    }

    /// Some square root of `a` (smallest in packed order), if one exists.
    pub fn sqrt(&self, a: FqElem) -> Option<FqElem> {
        let r = self.sqrt_tab[a.0 as usize];
        if r == u32::MAX {
            None
        } else {
            Some(FqElem(r))
        }
    }

    pub fn is_square(&self, a: FqElem) -> bool {
        self.sqrt_tab[a.0 as usize] != u32::MAX
    }

    pub fn elems(&self) -> impl Iterator<Item = FqElem> {
        (0..self.q).map(FqElem)
    }

    /// Render an element the way the CLI serializes it: plain integer over
    /// prime fields, `[c0,..,c_{l-1}]` over extensions.
    pub fn format_elem(&self, a: FqElem) -> String {
        if self.l == 1 {
            format!("{}", a.0)
        } else {
            let c = self.coeffs(a);
            let parts: Vec<String> =
                (0..self.l as usize).map(|i| format!("{}", c[i])).collect();
            format!("[{}]", parts.join(","))
        }
    }

    /// Parse a field spec of the form `"p"` or `"p^l"`.
    pub fn parse_spec(spec: &str) -> Result<Field> {
        let spec = spec.trim();
        let bad = || Error::UnsupportedField(format!("cannot parse field spec {spec:?}"));
        if let Some((ps, ls)) = spec.split_once('^') {
            let p: u32 = ps.trim().parse().map_err(|_| bad())?;
            let l: u32 = ls.trim().parse().map_err(|_| bad())?;
            Field::new(p, l)
        } else {
            let p: u32 = spec.parse().map_err(|_| bad())?;
            Field::new(p, 1)
        }
    }

    pub fn spec_string(&self) -> String {
        if self.l == 1 {
            format!("{}", self.p)
        } else {
            format!("{}^{}", self.p, self.l)
        }
    }
}

fn find_modulus(p: u32, l: u32) -> Option<Vec<u32>> {
    // Degree 2 or 3: irreducible over F_p iff no root in F_p.
    let mut coeffs = vec![0u32; l as usize];
    loop {
        if irreducible(p, l, &coeffs) {
            return Some(coeffs);
        }
        // next coefficient list in lexicographic order [c0, c1, ..]
        let mut i = l as usize;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

fn irreducible(p: u32, l: u32, tail: &[u32]) -> bool {
    debug_assert!(l == 2 || l == 3);
    for x in 0..p as u64 {
        let mut v = 1u64; // leading monic coefficient
        for i in (0..l as usize).rev() {
            v = (v * x + tail[i] as u64) % p as u64;
        }
        if v == 0 {
            return false;
        }
    }
    true
}

/// An additive-character value, kept exact as a trace residue; the complex
/// unit is produced only on demand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharacterValue {
    p: u32,
    pub residue: u32,
}

impl CharacterValue {
    pub fn complex(&self) -> (f64, f64) {
        let theta = 2.0 * core::f64::consts::PI * self.residue as f64 / self.p as f64;
        (crate::flt::cos(theta), crate::flt::sin(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composite_p() {
        assert_eq!(Field::new(4, 1).unwrap_err(), Error::NonPrime(4));
        assert_eq!(Field::new(1, 1).unwrap_err(), Error::NonPrime(1));
    }

    #[test]
    fn rejects_oversize_fields() {
        assert!(matches!(Field::new(103, 1), Err(Error::UnsupportedField(_))));
        assert!(matches!(Field::new(3, 4), Err(Error::UnsupportedField(_))));
    }

    #[test]
    fn f4_modulus_is_x2_x_1() {
        // the only monic irreducible quadratic over F_2
        let f = Field::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1]);
    }

    #[test]
    fn f9_modulus_is_lex_smallest() {
        // [c0,c1] order: x^2, x^2+x, x^2+2x reducible; x^2+1 irreducible
        let f = Field::new(3, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 0]);
    }

    #[test]
    fn trace_prime_field_is_identity() {
        let f = Field::new(5, 1).unwrap();
        assert_eq!(f.trace(f.from_int(3)), 3);
        assert_eq!(f.trace(f.zero()), 0);
    }

    #[test]
    fn trace_f4_generator() {
        // g + g^2 = g + (g+1) = 1 in F_4
        let f = Field::new(2, 2).unwrap();
        let g = f.elem(2); // coefficients [0,1]
        assert_eq!(f.trace(g), 1);
    }

    #[test]
    fn trace_additive() {
        for (p, l) in [(2, 2), (3, 2), (2, 3), (5, 2), (3, 3)] {
            let f = Field::new(p, l).unwrap();
            for a in f.elems() {
                for b in f.elems() {
                    let lhs = f.trace(f.add(a, b));
                    let rhs = (f.trace(a) + f.trace(b)) % p;
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn character_values() {
        let f2 = Field::new(2, 1).unwrap();
        let (re, im) = f2.char_eq(f2.one()).complex();
        assert!((re + 1.0).abs() < 1e-12 && im.abs() < 1e-12);
        let f3 = Field::new(3, 1).unwrap();
        let (mut sre, mut sim) = (0.0, 0.0);
        for a in f3.elems() {
            let (re, im) = f3.char_eq(a).complex();
            sre += re;
            sim += im;
        }
        assert!(sre.abs() < 1e-9 && sim.abs() < 1e-9);
    }

    #[test]
    fn character_orthogonality_histogram() {
        // sum over a of e_q(c*a) vanishes exactly for c != 0: every residue
        // class is hit equally often
        for (p, l) in [(3, 1), (2, 2), (3, 2), (5, 1), (2, 3)] {
            let f = Field::new(p, l).unwrap();
            for c in f.elems().skip(1) {
                let mut hist = alloc::vec![0u32; p as usize];
                for a in f.elems() {
                    hist[f.trace(f.mul(c, a)) as usize] += 1;
                }
                assert!(hist.iter().all(|&h| h == hist[0]), "p={p} l={l}");
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        // associativity, distributivity, inverses for q <= 49
        for (p, l) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3), (7, 2)] {
            let f = Field::new(p, l).unwrap();
            if f.q() > 49 {
                continue;
            }
            for a in f.elems() {
                for b in f.elems() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elems() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a)), f.one());
                }
                assert_eq!(f.add(a, f.neg(a)), f.zero());
            }
        }
    }

    #[test]
    fn sqrt_table_consistent() {
        let f = Field::new(7, 1).unwrap();
        for a in f.elems() {
            if let Some(r) = f.sqrt(a) {
                assert_eq!(f.mul(r, r), a);
            }
        }
        // char 2: squaring is a bijection, everything has a root
        let f4 = Field::new(2, 2).unwrap();
        for a in f4.elems() {
            assert!(f4.sqrt(a).is_some());
        }
    }

    #[test]
    fn parse_spec_roundtrip() {
        let f = Field::parse_spec("2^2").unwrap();
        assert_eq!((f.p(), f.l()), (2, 2));
        let f = Field::parse_spec(" 11 ").unwrap();
        assert_eq!((f.p(), f.l()), (11, 1));
        assert_eq!(f.spec_string(), "11");
    }

    #[test]
    fn largest_supported_field_constructs() {
        let f = Field::new(101, 3).unwrap();
        let a = f.elem(1030300);
        assert_eq!(f.mul(a, f.inv(a)), f.one());
    }
}
