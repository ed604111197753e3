//! Polynomial text grammar: terms joined by `+`/`-`; a term is an optional
//! coefficient (integer, or `[a0,a1,..]` over extension fields) and `*`-joined
//! variable powers `x<i>[^e]`. Whitespace is insignificant.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::field::{Field, FqElem};
use crate::Result;

use super::MultiPoly;

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn err(&self, msg: &str) -> Error {
        Error::SyntaxError { pos: self.pos, msg: msg.to_string() }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        let mut neg = false;
        if self.src.get(self.pos) == Some(&b'-') {
            neg = true;
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.err("expected integer"));
        }
        let s = core::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let v: i64 = s.parse().map_err(|_| self.err("integer out of range"))?;
        Ok(if neg { -v } else { v })
    }
}

pub fn parse_poly(text: &str, n: usize, field: &Field) -> Result<MultiPoly> {
    let mut lx = Lexer::new(text);
    let mut poly = MultiPoly::zero(n);
    let mut first = true;
    loop {
        lx.skip_ws();
        if lx.pos >= lx.src.len() {
            if first {
                return Err(lx.err("empty polynomial"));
            }
            break;
        }
        let mut sign = false;
        match lx.peek() {
            Some(b'+') => {
                lx.bump();
            }
            Some(b'-') => {
                sign = true;
                lx.bump();
            }
            _ if first => {}
            _ => return Err(lx.err("expected '+' or '-' between terms")),
        }
        first = false;
        let (exps, coeff) = parse_term(&mut lx, n, field)?;
        let c = if sign { field.neg(coeff) } else { coeff };
        poly.add_term(field, exps, c);
    }
    Ok(poly)
}

fn parse_term(lx: &mut Lexer, n: usize, field: &Field) -> Result<(Vec<u16>, FqElem)> {
    let mut coeff = field.one();
    let mut exps = vec![0u16; n];

    loop {
        match lx.peek() {
            Some(b'[') => {
                lx.bump();
                let mut cs = Vec::new();
                loop {
                    cs.push(lx.integer()?);
                    match lx.bump() {
                        Some(b',') => continue,
                        Some(b']') => break,
                        _ => return Err(lx.err("expected ',' or ']' in coefficient list")),
                    }
                }
                coeff = field.mul(coeff, field.elem_from_coeffs(&cs)?);
            }
            Some(c) if c.is_ascii_digit() => {
                let v = lx.integer()?;
                coeff = field.mul(coeff, field.from_int(v));
            }
            Some(b'x') => {
                lx.bump();
                let idx = lx.integer()?;
                if idx < 0 || idx as usize >= n {
                    return Err(Error::UnknownVariable { index: idx.max(0) as usize, n });
                }
                let mut e = 1u16;
                if lx.peek() == Some(b'^') {
                    lx.bump();
                    let p = lx.integer()?;
                    if p < 0 || p > u16::MAX as i64 {
                        return Err(lx.err("exponent out of range"));
                    }
                    e = p as u16;
                }
                exps[idx as usize] = exps[idx as usize]
                    .checked_add(e)
                    .ok_or_else(|| lx.err("exponent overflow"))?;
            }
            _ => return Err(lx.err("expected coefficient or variable")),
        }
        if lx.peek() == Some(b'*') {
            lx.bump();
            continue;
        }
        break;
    }
    Ok((exps, coeff))
}

/// Canonical rendering; `parse(format(p)) == p`.
pub fn format_poly(p: &MultiPoly, field: &Field) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (mono, &c) in &p.terms {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        let is_const = mono.iter().all(|&e| e == 0);
        let coeff_str = field.format_elem(c);
        let mut factors: Vec<String> = Vec::new();
        if is_const || c != field.one() {
            factors.push(coeff_str);
        }
        for (i, &e) in mono.iter().enumerate() {
            if e == 1 {
                factors.push(alloc::format!("x{i}"));
            } else if e > 1 {
                factors.push(alloc::format!("x{i}^{e}"));
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        let f = Field::new(3, 1).unwrap();
        let p = parse_poly("x0*x1 + 2*x2^2", 3, &f).unwrap();
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.degree(), 2);

        let p = parse_poly("x0^4", 1, &f).unwrap();
        assert_eq!(p.degree(), 4);

        assert!(matches!(
            parse_poly("x9", 3, &f),
            Err(Error::UnknownVariable { index: 9, n: 3 })
        ));
    }

    #[test]
    fn parse_signs_and_constants() {
        let f = Field::new(5, 1).unwrap();
        let p = parse_poly("-x0 + 3 - 2*x1", 2, &f).unwrap();
        assert_eq!(p.coeff(&[1, 0]), f.from_int(-1));
        assert_eq!(p.coeff(&[0, 0]), f.from_int(3));
        assert_eq!(p.coeff(&[0, 1]), f.from_int(-2));
    }

    #[test]
    fn parse_extension_coefficients() {
        let f = Field::new(2, 2).unwrap();
        let p = parse_poly("[0,1]*x0 + [1,1]", 1, &f).unwrap();
        assert_eq!(p.coeff(&[1]), f.elem(2));
        assert_eq!(p.coeff(&[0]), f.elem(3));
        let text = format_poly(&p, &f);
        assert_eq!(parse_poly(&text, 1, &f).unwrap(), p);
    }

    #[test]
    fn syntax_error_has_position() {
        let f = Field::new(3, 1).unwrap();
        match parse_poly("x0 + + x1", 2, &f) {
            Err(Error::SyntaxError { pos, .. }) => assert!(pos >= 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(seed in 0u64..5000) {
            use rand::{Rng, SeedableRng};
            let f = Field::new(3, 1).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 3usize;
            let mut p = MultiPoly::zero(n);
            for _ in 0..rng.gen_range(0..6) {
                let exps: Vec<u16> = (0..n).map(|_| rng.gen_range(0..4u16)).collect();
                let c = f.elem(rng.gen_range(0..3));
                p.add_term(&f, exps, c);
            }
            let text = format_poly(&p, &f);
            let back = parse_poly(&text, n, &f);
            prop_assert!(back.is_ok());
            prop_assert_eq!(back.unwrap(), p);
        }
    }
}
