//! Quadratic extension pipeline: stage behavior and full plant-and-recover.

use hirank_core::extend_linear::CertStatus;
use hirank_core::extend_quadratic::*;
use hirank_core::field::{Field, FqElem};
use hirank_core::geometry::{FunctionTable, PointSet, Variety, DEFAULT_ENUM_BUDGET};
use hirank_core::poly::{parse_poly, MultiPoly, PolyFamily};
use hirank_core::solve::QuadForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag_variety(field: &Field, n: usize) -> (QuadForm, PointSet) {
    let mut p = MultiPoly::zero(n);
    for i in 0..n {
        let mut exps = vec![0u16; n];
        exps[i] = 2;
        p.add_term(field, exps, field.one());
    }
    let q = QuadForm::new(field, p.clone()).unwrap();
    let pts = Variety::new(field.clone(), PolyFamily::new(n, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    (q, pts)
}

fn random_deg2(field: &Field, n: usize, rng: &mut ChaCha8Rng) -> MultiPoly {
    let mut p = MultiPoly::zero(n);
    for m in hirank_core::poly::monomials_up_to(n, 2, None) {
        p.add_term(field, m, field.elem(rng.gen_range(0..field.q())));
    }
    p
}

#[test]
fn even_odd_split_examples() {
    let f3 = Field::new(3, 1).unwrap();
    let (_, pts) = diag_variety(&f3, 4);
    // f = x0 + x0 x1: odd part x0, even part x0 x1
    let mixed = parse_poly("x0 + x0*x1", 4, &f3).unwrap();
    let table = FunctionTable::from_poly(&f3, &pts, &mixed);
    let (odd, even) = even_odd_split(&f3, &table, &pts).unwrap();
    let x0 = parse_poly("x0", 4, &f3).unwrap();
    let x0x1 = parse_poly("x0*x1", 4, &f3).unwrap();
    for &x in &pts.idx {
        let pt = pts.space.decode(x);
        assert_eq!(odd.get(x).unwrap(), x0.eval_unchecked(&f3, &pt));
        assert_eq!(even.get(x).unwrap(), x0x1.eval_unchecked(&f3, &pt));
    }

    // already even: odd part vanishes
    let table = FunctionTable::from_poly(&f3, &pts, &x0x1);
    let (odd, _) = even_odd_split(&f3, &table, &pts).unwrap();
    assert!(odd.val.iter().all(|v| v.is_zero()));

    // odd monomial over F_5
    let f5 = Field::new(5, 1).unwrap();
    let (_, pts5) = diag_variety(&f5, 3);
    let cubic = parse_poly("x0^3", 3, &f5).unwrap();
    let table = FunctionTable::from_poly(&f5, &pts5, &cubic);
    let (odd, even) = even_odd_split(&f5, &table, &pts5).unwrap();
    for &x in &pts5.idx {
        assert_eq!(odd.get(x), table.get(x));
    }
    assert!(even.val.iter().all(|v| v.is_zero()));
}

#[test]
fn even_odd_split_rejects_char_two() {
    let f2 = Field::new(2, 1).unwrap();
    let p = parse_poly("x0*x1", 2, &f2).unwrap();
    let pts = Variety::new(f2.clone(), PolyFamily::new(2, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    let t = FunctionTable::from_fn(&f2, &pts, |_| f2.zero());
    assert!(matches!(
        even_odd_split(&f2, &t, &pts),
        Err(hirank_core::Error::CharTwo)
    ));
}

#[test]
fn origin_cubes_vanish_for_quadratics() {
    let f3 = Field::new(3, 1).unwrap();
    let (_, pts) = diag_variety(&f3, 4);
    let q0 = parse_poly("x0*x1 + x2^2", 4, &f3).unwrap();
    let table = FunctionTable::from_poly(&f3, &pts, &q0);
    let rep = check_3cubes_origin(&f3, &table, &pts, 1 << 26).unwrap();
    assert!(rep.verdict);
}

#[test]
fn origin_cubes_catch_a_cubic() {
    // X = {x0 = 0} over F_5^3 has plenty of origin cubes; x1^3 fails f_3 = 0
    let f5 = Field::new(5, 1).unwrap();
    let p = parse_poly("x0", 3, &f5).unwrap();
    let pts = Variety::new(f5.clone(), PolyFamily::new(3, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    let cubic = parse_poly("x1^3", 3, &f5).unwrap();
    let table = FunctionTable::from_poly(&f5, &pts, &cubic);
    let rep = check_3cubes_origin(&f5, &table, &pts, 1 << 26).unwrap();
    assert!(!rep.verdict);
    // witness re-checks: the signed vertex sum over the returned cube is
    // nonzero
    match rep.witness.unwrap() {
        hirank_core::geometry::Witness::BadCube { base, gens } => {
            let cube = hirank_core::geometry::Cube { base, gens };
            let v = hirank_core::geometry::derivative_fm(&f5, &table, &cube).unwrap();
            assert!(!v.is_zero());
        }
        w => panic!("unexpected witness {w:?}"),
    }
}

#[test]
fn correction_3_identity_on_restriction() {
    let f3 = Field::new(3, 1).unwrap();
    let (q, pts) = diag_variety(&f3, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let q0 = {
        let mut p = random_deg2(&f3, 6, &mut rng).homogeneous_part(2);
        if p.is_zero() {
            p = parse_poly("x0*x1", 6, &f3).unwrap();
        }
        p
    };
    let table = FunctionTable::from_poly(&f3, &pts, &q0);
    let out = testing_correct_3(&f3, &q, &table, &pts, 4, 7).unwrap();
    assert!(out.no_majority.is_empty());
    assert_eq!(out.min_margin, 1.0);
    assert_eq!(out.agreement, 1.0);
    for &x in &pts.idx {
        assert_eq!(out.h.get(x), table.get(x));
    }
}

#[test]
fn xsq_extension_matches_gauged_plant() {
    let f3 = Field::new(3, 1).unwrap();
    let (q, pts) = diag_variety(&f3, 8);
    let setting = QuadraticSetting::new(&f3, q.clone(), &pts.space).unwrap();
    assert!(setting.rescaled_by.is_none());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // even homogeneous plant
    let q0 = {
        let mut p = random_deg2(&f3, 8, &mut rng).homogeneous_part(2);
        if p.is_zero() {
            p = parse_poly("x0*x1", 8, &f3).unwrap();
        }
        p
    };
    let h = FunctionTable::from_poly(&f3, &pts, &q0);
    let cfg = QuadConfig { budget: 1 << 26, votes_xsq: 4, ..Default::default() };
    let gsq = extend_to_xsq(&f3, &setting, &h, &pts, &cfg).unwrap();
    // expected: the gauge representative q0 - q0(v0) Q on X_sq
    let c = q0.eval_unchecked(&f3, &setting.v0);
    let gauged = q0.sub(&f3, &setting.quad.poly.scale(&f3, c));
    assert!(!gsq.is_empty());
    for (&idx, &val) in gsq.idx.iter().zip(&gsq.val) {
        let pt = pts.space.decode(idx);
        assert_eq!(val, gauged.eval_unchecked(&f3, &pt), "at {pt:?}");
    }
}

#[test]
fn v0_extension_and_lift_roundtrip() {
    let f3 = Field::new(3, 1).unwrap();
    let (q, pts) = diag_variety(&f3, 8);
    let setting = QuadraticSetting::new(&f3, q.clone(), &pts.space).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q0 = {
        let mut p = random_deg2(&f3, 8, &mut rng).homogeneous_part(2);
        if p.is_zero() {
            p = parse_poly("x0*x2", 8, &f3).unwrap();
        }
        p
    };
    let h = FunctionTable::from_poly(&f3, &pts, &q0);
    let cfg = QuadConfig { budget: 1 << 26, votes_xsq: 4, votes_v0: 4, ..Default::default() };
    let gv0 = extend_to_v0(&f3, &setting, &h, &pts, &cfg).unwrap();
    let c = q0.eval_unchecked(&f3, &setting.v0);
    let gauged = q0.sub(&f3, &setting.quad.poly.scale(&f3, c));
    for (&idx, &val) in gv0.idx.iter().zip(&gv0.val) {
        let pt = pts.space.decode(idx);
        assert_eq!(val, gauged.eval_unchecked(&f3, &pt));
    }

    // lift back to V: the common extension of gv0 and the plant on X
    let g = lift_v0_to_v_table(&f3, &setting, &pts, &h, &gv0, 11).unwrap();
    for &x in &pts.idx {
        let pt = pts.space.decode(x);
        assert_eq!(g.eval_unchecked(&f3, &pt), q0.eval_unchecked(&f3, &pt));
    }
    // and g agrees with gv0 on V_0
    for (&idx, &val) in gv0.idx.iter().zip(&gv0.val) {
        let pt = pts.space.decode(idx);
        assert_eq!(g.eval_unchecked(&f3, &pt), val);
    }
}

#[test]
fn pipeline_extends_quadratic_restriction_midscale() {
    let f3 = Field::new(3, 1).unwrap();
    let n = 10;
    let (q, pts) = diag_variety(&f3, n);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let q0 = random_deg2(&f3, n, &mut rng);
    let table = FunctionTable::from_poly(&f3, &pts, &q0);
    let cfg = QuadConfig {
        linear: scaled_linear_config(pts.space.size, 1),
        seed: 1,
        ..Default::default()
    };
    let cert = extend_weakly_quadratic(&f3, &q, &pts, &table, &cfg).unwrap();
    assert_eq!(cert.status, CertStatus::Extended, "stats: {:?}", cert.stats);
    let g = cert.g.unwrap();
    // exact agreement on X and the gauge at v0
    for &x in &pts.idx {
        let pt = pts.space.decode(x);
        assert_eq!(g.eval_unchecked(&f3, &pt), table.get(x).unwrap());
    }
    let setting = QuadraticSetting::new(&f3, q.clone(), &pts.space).unwrap();
    assert!(g.eval_unchecked(&f3, &setting.v0).is_zero());
    // uniqueness modulo the gauge: g == q0 - q0(v0) Q as polynomials
    let c = q0.eval_unchecked(&f3, &setting.v0);
    let gauged = q0.sub(&f3, &setting.quad.poly.scale(&f3, c));
    assert_eq!(g, gauged);
}

#[test]
fn pipeline_extends_degenerate_product_restriction() {
    // f = (l * l')|_X has a rank-2 quadratic extension
    let f3 = Field::new(3, 1).unwrap();
    let n = 10;
    let (q, pts) = diag_variety(&f3, n);
    let prod = {
        let l1 = parse_poly("x0 + 2*x3 + x7", n, &f3).unwrap();
        let l2 = parse_poly("x1 + x4", n, &f3).unwrap();
        l1.mul(&f3, &l2)
    };
    let table = FunctionTable::from_poly(&f3, &pts, &prod);
    let cfg = QuadConfig {
        linear: scaled_linear_config(pts.space.size, 2),
        seed: 2,
        ..Default::default()
    };
    let cert = extend_weakly_quadratic(&f3, &q, &pts, &table, &cfg).unwrap();
    assert_eq!(cert.status, CertStatus::Extended, "stats: {:?}", cert.stats);
}

#[test]
fn pipeline_never_wrongly_extends_a_cubic_twist() {
    // a function that is not weakly quadratic must not come back Extended
    let f5 = Field::new(5, 1).unwrap();
    let n = 6;
    let mut p = MultiPoly::zero(n);
    for i in 0..n {
        let mut exps = vec![0u16; n];
        exps[i] = 2;
        p.add_term(&f5, exps, f5.one());
    }
    let q = QuadForm::new(&f5, p.clone()).unwrap();
    let pts = Variety::new(f5.clone(), PolyFamily::new(n, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    let cubic = parse_poly("x0^3", n, &f5).unwrap();
    let table = FunctionTable::from_poly(&f5, &pts, &cubic);
    let cfg = QuadConfig {
        linear: scaled_linear_config(pts.space.size, 3),
        seed: 3,
        gate_samples: 120,
        ..Default::default()
    };
    let cert = extend_weakly_quadratic(&f5, &q, &pts, &table, &cfg).unwrap();
    assert_ne!(cert.status, CertStatus::Extended);
}

#[test]
fn low_rank_degrades_honestly() {
    // rank 2 sits below every threshold; the verdict must not be a wrong
    // Extended, and inconclusive outcomes are expected
    let f3 = Field::new(3, 1).unwrap();
    let n = 4;
    let p = parse_poly("x0^2 + x1^2", n, &f3).unwrap();
    let q = QuadForm::new(&f3, p.clone()).unwrap();
    let pts = Variety::new(f3.clone(), PolyFamily::new(n, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let q0 = random_deg2(&f3, n, &mut rng);
    let table = FunctionTable::from_poly(&f3, &pts, &q0);
    let cfg = QuadConfig {
        linear: scaled_linear_config(pts.space.size, 4),
        seed: 4,
        ..Default::default()
    };
    let cert = extend_weakly_quadratic(&f3, &q, &pts, &table, &cfg).unwrap();
    if cert.status == CertStatus::Extended {
        let g = cert.g.unwrap();
        for &x in &pts.idx {
            let pt = pts.space.decode(x);
            assert_eq!(g.eval_unchecked(&f3, &pt), table.get(x).unwrap());
        }
    }
}
