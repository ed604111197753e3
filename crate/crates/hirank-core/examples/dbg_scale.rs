use hirank_core::extend_quadratic::*;
use hirank_core::field::Field;
use hirank_core::geometry::{FunctionTable, Variety, DEFAULT_ENUM_BUDGET};
use hirank_core::poly::{MultiPoly, PolyFamily};
use hirank_core::solve::QuadForm;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn main() {
    let f3 = Field::new(3, 1).unwrap();
    let n = 14;
    let mut p = MultiPoly::zero(n);
    for i in 0..n {
        let mut exps = vec![0u16; n];
        exps[i] = 2;
        p.add_term(&f3, exps, f3.one());
    }
    let q = QuadForm::new(&f3, p.clone()).unwrap();
    let t0 = Instant::now();
    let pts = Variety::new(f3.clone(), PolyFamily::new(n, vec![p]))
        .enumerate_points(DEFAULT_ENUM_BUDGET)
        .unwrap();
    eprintln!("enumerate |X|={} in {:?}", pts.len(), t0.elapsed());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    let mut q0 = MultiPoly::zero(n);
    for m in hirank_core::poly::monomials_up_to(n, 2, None) {
        q0.add_term(&f3, m, f3.elem(rng.gen_range(0..3)));
    }
    let t = Instant::now();
    let table = FunctionTable::from_poly(&f3, &pts, &q0);
    eprintln!("table {:?}", t.elapsed());
    let cfg = QuadConfig {
        linear: scaled_linear_config(pts.space.size, 7),
        seed: 7,
        ..Default::default()
    };
    let t = Instant::now();
    let cert = extend_weakly_quadratic(&f3, &q, &pts, &table, &cfg).unwrap();
    eprintln!("QUAD FULL {:?} -> {:?}", t.elapsed(), cert.status);
    eprintln!("stats {:?}", cert.stats);
    if let Some(g) = cert.g {
        let setting = QuadraticSetting::new(&f3, q.clone(), &pts.space).unwrap();
        let c = q0.eval_unchecked(&f3, &setting.v0);
        let gauged = q0.sub(&f3, &setting.quad.poly.scale(&f3, c));
        eprintln!("g == gauged plant: {}", g == gauged);
    }
}
