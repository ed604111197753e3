//! Solver behavior: every returned witness re-verifies by direct evaluation.

use hirank_core::field::{Field, FqElem};
use hirank_core::linalg::Mat;
use hirank_core::poly::{parse_poly, MultiPoly, PolyFamily};
use hirank_core::solve::*;
use hirank_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag_form(field: &Field, n: usize, r: usize) -> QuadForm {
    let mut p = MultiPoly::zero(n);
    for i in 0..r {
        let mut exps = vec![0u16; n];
        exps[i] = 2;
        p.add_term(field, exps, field.one());
    }
    QuadForm::new(field, p).unwrap()
}

fn add(f: &Field, a: &[FqElem], b: &[FqElem]) -> Vec<FqElem> {
    a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
}

#[test]
fn bilinear_pairing_consistency() {
    // (u,v) = Q(u+v) - Q(u) - Q(v) and (v,v) = 2 Q(v), random pairs
    let f = Field::new(5, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = QuadForm::new(
        &f,
        parse_poly("x0^2 + 2*x0*x1 + 3*x1*x2 + x3^2", 4, &f).unwrap(),
    )
    .unwrap();
    for _ in 0..100 {
        let u: Vec<FqElem> = (0..4).map(|_| f.elem(rng.gen_range(0..5))).collect();
        let v: Vec<FqElem> = (0..4).map(|_| f.elem(rng.gen_range(0..5))).collect();
        let direct = f.sub(
            f.sub(q.eval(&f, &add(&f, &u, &v)), q.eval(&f, &u)),
            q.eval(&f, &v),
        );
        assert_eq!(q.pair(&f, &u, &v), direct);
        assert_eq!(q.pair(&f, &v, &v), f.mul(f.from_int(2), q.eval(&f, &v)));
        // gradient realizes the pairing as a dot product
        let g = q.gradient(&f, &v);
        let dot = hirank_core::linalg::dot(&f, &g, &u);
        assert_eq!(dot, q.pair(&f, &u, &v));
    }
}

#[test]
fn affine_solve_first_in_order() {
    // no constraints, u0 = 0, a = 1 for Q = x0 x1 over F_3^2: (1,1) is the
    // first solution in parametrization order
    let f = Field::new(3, 1).unwrap();
    let q = QuadForm::new(&f, parse_poly("x0*x1", 2, &f).unwrap()).unwrap();
    let u = affine_quadric_solve(&f, &q, &[], &[f.zero(), f.zero()], f.one(), 0).unwrap();
    assert_eq!(u, vec![f.one(), f.one()]);
}

#[test]
fn affine_solve_degenerate_restriction() {
    // Q = x0^2 restricted to {x0 = 0} never takes the value 1
    let f = Field::new(3, 1).unwrap();
    let q = QuadForm::new(&f, parse_poly("x0^2", 2, &f).unwrap()).unwrap();
    let e0 = vec![f.one(), f.zero()];
    let res = affine_quadric_solve(
        &f,
        &q,
        &[(e0, f.zero())],
        &[f.zero(), f.zero()],
        f.one(),
        0,
    );
    assert!(matches!(res, Err(Error::NoSolutionFound)));
}

#[test]
fn affine_solve_random_constrained() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 6, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100u64 {
        // random consistent linear constraints: take a random point and use
        // its constraint values
        let pt: Vec<FqElem> = (0..6).map(|_| f.elem(rng.gen_range(0..3))).collect();
        let mut constraints = Vec::new();
        for _ in 0..3 {
            let w: Vec<FqElem> = (0..6).map(|_| f.elem(rng.gen_range(0..3))).collect();
            let c = hirank_core::linalg::dot(&f, &w, &pt);
            constraints.push((w, c));
        }
        let u0: Vec<FqElem> = (0..6).map(|_| f.elem(rng.gen_range(0..3))).collect();
        let a = f.elem(rng.gen_range(0..3));
        match affine_quadric_solve(&f, &q, &constraints, &u0, a, trial) {
            Ok(u) => {
                assert_eq!(q.eval(&f, &add(&f, &u0, &u)), a);
                for (w, c) in &constraints {
                    assert_eq!(hirank_core::linalg::dot(&f, w, &u), *c);
                }
            }
            Err(Error::NoSolutionFound) => {
                // legal only when the restriction genuinely misses `a`;
                // verify by exhausting the subspace
                let space = hirank_core::geometry::PointSpace::new(&f, 6).unwrap();
                let mut found = false;
                let mut it = hirank_core::geometry::PointIter::new(&f, space);
                while let Some((_, cand)) = it.next() {
                    let ok = constraints
                        .iter()
                        .all(|(w, c)| hirank_core::linalg::dot(&f, w, cand) == *c);
                    if ok && q.eval(&f, &add(&f, &u0, cand)) == a {
                        found = true;
                        break;
                    }
                }
                assert!(!found, "solver missed an existing solution");
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn gram_realize_identity_targets() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    // two orthonormal vectors: greedy order finds e0, e1
    let mut d = Mat::zeros(2, 2);
    d.set(0, 0, f.one());
    d.set(1, 1, f.one());
    let vs = gram_realize(&f, &q, &d, 0).unwrap();
    assert_eq!(q.eval(&f, &vs[0]), f.one());
    assert_eq!(q.eval(&f, &vs[1]), f.one());
    assert!(q.pair(&f, &vs[0], &vs[1]).is_zero());
}

#[test]
fn gram_realize_isotropic_vector() {
    let f = Field::new(3, 1).unwrap();
    let q = QuadForm::new(&f, parse_poly("x0*x1 + x2*x3", 4, &f).unwrap()).unwrap();
    let d = Mat::zeros(1, 1);
    let vs = gram_realize(&f, &q, &d, 0).unwrap();
    assert!(q.eval(&f, &vs[0]).is_zero());
}

#[test]
fn gram_realize_random_six_by_six() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..25u64 {
        let mut d = Mat::zeros(6, 6);
        for i in 0..6 {
            for j in 0..=i {
                let v = f.elem(rng.gen_range(0..3));
                d.set(i, j, v);
                d.set(j, i, v);
            }
        }
        let vs = gram_realize(&f, &q, &d, trial).unwrap();
        for i in 0..6 {
            assert_eq!(q.eval(&f, &vs[i]), d.at(i, i));
            for j in 0..6 {
                if i != j {
                    assert_eq!(q.pair(&f, &vs[i], &vs[j]), d.at(i, j));
                }
            }
        }
    }
}

#[test]
fn gram_rejects_asymmetric_target() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    let mut d = Mat::zeros(2, 2);
    d.set(0, 1, f.one());
    assert!(matches!(
        gram_realize(&f, &q, &d, 0),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn sum_two_squares_examples() {
    let f3 = Field::new(3, 1).unwrap();
    let (a, b) = sum_two_squares(&f3, f3.from_int(2));
    assert_eq!((a, b), (f3.one(), f3.one()));
    let (a, b) = sum_two_squares(&f3, f3.zero());
    assert_eq!((a, b), (f3.zero(), f3.zero()));
    let f7 = Field::new(7, 1).unwrap();
    let (a, b) = sum_two_squares(&f7, f7.from_int(3));
    assert_eq!((a, b), (f7.one(), f7.from_int(3)));
}

#[test]
fn sum_two_squares_exhaustive_all_odd_primes() {
    for p in [3u32, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73,
        79, 83, 89, 97, 101]
    {
        let f = Field::new(p, 1).unwrap();
        for c in f.elems() {
            let (a, b) = sum_two_squares(&f, c);
            assert_eq!(f.add(f.mul(a, a), f.mul(b, b)), c, "p={p} c={}", c.packed());
        }
    }
}

#[test]
fn opposite_face_example() {
    // Q = sum x_i^2 over F_3^6, square (e0 | e1, e2): a = (1,2,2,0), b = 0
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 6, 6);
    let mut u = vec![f.zero(); 6];
    u[0] = f.one();
    let mut u1 = vec![f.zero(); 6];
    u1[1] = f.one();
    let mut u2 = vec![f.zero(); 6];
    u2[2] = f.one();
    let y = opposite_face(&f, &q, &u, &u1, &u2, OppositeMode::Opposite { b: f.zero() }, 0)
        .unwrap();
    let yu = add(&f, &y, &u);
    assert_eq!(q.eval(&f, &yu), f.zero());
    assert!(q.eval(&f, &add(&f, &yu, &u1)).is_zero());
    assert!(q.eval(&f, &add(&f, &yu, &u2)).is_zero());
    assert!(q.eval(&f, &add(&f, &add(&f, &yu, &u1), &u2)).is_zero());

    // opposite1 with t = s on the same square (b = 0)
    let y = opposite_face(
        &f,
        &q,
        &u,
        &u1,
        &u2,
        OppositeMode::Opposite1 { t: f.one(), s: f.one() },
        0,
    )
    .unwrap();
    let yu = add(&f, &y, &u);
    assert_eq!(q.eval(&f, &yu), f.one());
    assert_eq!(q.eval(&f, &add(&f, &yu, &u1)), f.one());
    assert!(q.eval(&f, &add(&f, &yu, &u2)).is_zero());
}

#[test]
fn opposite_face_degenerate_square() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 6, 6);
    let u = vec![f.zero(); 6];
    let mut u1 = vec![f.zero(); 6];
    u1[1] = f.one();
    let res = opposite_face(
        &f,
        &q,
        &u,
        &u1,
        &u1.clone(),
        OppositeMode::Opposite { b: f.zero() },
        0,
    );
    assert!(matches!(res, Err(Error::DegenerateSquare)));
}

#[test]
fn opposite_face_fuzz_against_exhaustive_oracle() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 6, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let space = hirank_core::geometry::PointSpace::new(&f, 6).unwrap();
    let mut tried = 0;
    while tried < 30 {
        let u = space.decode(rng.gen_range(0..space.size));
        let u1 = space.decode(rng.gen_range(0..space.size));
        let u2 = space.decode(rng.gen_range(0..space.size));
        let result = opposite_face(&f, &q, &u, &u1, &u2, OppositeMode::Opposite { b: {
            // compute the forced b
            let a00 = q.eval(&f, &u);
            let a10 = q.eval(&f, &add(&f, &u, &u1));
            let a01 = q.eval(&f, &add(&f, &u, &u2));
            let a11 = q.eval(&f, &add(&f, &add(&f, &u, &u1), &u2));
            f.add(f.sub(a00, f.add(a01, a10)), a11)
        } }, tried);
        match result {
            Err(Error::DegenerateSquare) => continue,
            Ok(y) => {
                tried += 1;
                let yu = add(&f, &y, &u);
                assert!(q.eval(&f, &add(&f, &yu, &u1)).is_zero());
                assert!(q.eval(&f, &add(&f, &yu, &u2)).is_zero());
            }
            Err(Error::NoSolutionFound) => {
                tried += 1;
                // oracle: no y in all of F_3^6 satisfies the window
                let mut found = false;
                let mut it = hirank_core::geometry::PointIter::new(&f, space);
                let a00 = q.eval(&f, &u);
                let a10 = q.eval(&f, &add(&f, &u, &u1));
                let a01 = q.eval(&f, &add(&f, &u, &u2));
                let a11 = q.eval(&f, &add(&f, &add(&f, &u, &u1), &u2));
                let b = f.add(f.sub(a00, f.add(a01, a10)), a11);
                while let Some((_, y)) = it.next() {
                    let yu = add(&f, y, &u);
                    if q.eval(&f, &yu) == b
                        && q.eval(&f, &add(&f, &yu, &u1)).is_zero()
                        && q.eval(&f, &add(&f, &yu, &u2)).is_zero()
                        && q.eval(&f, &add(&f, &add(&f, &yu, &u1), &u2)).is_zero()
                    {
                        found = true;
                        break;
                    }
                }
                assert!(!found, "solver missed a solution");
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }
}

#[test]
fn sol_array_zero_case() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    let zeros = [f.zero(); 8];
    let (zp, zpp) = sol_array(&f, &q, &zeros, &zeros, &zeros, 0).unwrap();
    for z in zp.iter().chain(&zpp) {
        assert!(q.eval(&f, z).is_zero());
    }
}

#[test]
fn sol_array_rejects_bad_preconditions() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    let mut alpha = [f.zero(); 8];
    alpha[0] = f.one();
    let zeros = [f.zero(); 8];
    assert!(matches!(
        sol_array(&f, &q, &alpha, &zeros, &zeros, 0),
        Err(Error::PreconditionViolated(_))
    ));
}

/// Admissible value array: base 0 and vanishing alternating sum.
fn admissible_array(f: &Field, rng: &mut ChaCha8Rng) -> [FqElem; 8] {
    let mut arr = [f.zero(); 8];
    for w in 1..7usize {
        arr[w] = f.elem(rng.gen_range(0..f.q()));
    }
    // choose arr[7] (|w| = 3, sign -1) to kill the alternating sum:
    // sum_{w<7} (-1)^{|w|} arr[w] - arr[7] = 0
    let mut acc = f.zero();
    for (w, &v) in arr.iter().enumerate().take(7) {
        acc = if (w as u32).count_ones() % 2 == 0 {
            f.add(acc, v)
        } else {
            f.sub(acc, v)
        };
    }
    arr[7] = acc;
    arr
}

#[test]
fn sol_array_random_admissible() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 13, 13);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10u64 {
        let alpha = admissible_array(&f, &mut rng);
        let beta = admissible_array(&f, &mut rng);
        let gamma = admissible_array(&f, &mut rng);
        let (zp, zpp) = sol_array(&f, &q, &alpha, &beta, &gamma, trial).unwrap();
        // spot-check the third system directly
        for w in 0..8usize {
            let mut pt = vec![f.zero(); 13];
            for i in 0..3 {
                if w >> i & 1 == 1 {
                    pt = add(&f, &pt, &add(&f, &zp[i], &zpp[i]));
                }
            }
            assert_eq!(q.eval(&f, &pt), f.neg(gamma[w]));
        }
    }
}

#[test]
fn complete_cube_examples() {
    let f = Field::new(3, 1).unwrap();
    let q = diag_form(&f, 16, 16);
    // v0 with Q(v0) = 1
    let mut v0 = vec![f.zero(); 16];
    v0[15] = f.one();
    // v = e0 + e1 in V_0, s = 2, a = b = 1
    let mut v = vec![f.zero(); 16];
    v[0] = f.one();
    v[1] = f.one();
    assert!(q.pair(&f, &v, &v0).is_zero());
    let (v1, v2, v3) = complete_cube_v0(&f, &q, &v0, &v, f.one(), f.one(), 0).unwrap();
    assert_eq!(q.eval(&f, &add(&f, &v, &v1)), f.one());
    assert_eq!(q.eval(&f, &add(&f, &v, &v2)), f.one());
    assert!(q.eval(&f, &add(&f, &v, &v3)).is_zero());

    // a + b != s is rejected
    assert!(matches!(
        complete_cube_v0(&f, &q, &v0, &v, f.one(), f.zero(), 0),
        Err(Error::PreconditionViolated(_))
    ));

    // isotropic v with s = 0, a = b = 0 admits a completion
    let mut w = vec![f.zero(); 16];
    w[0] = f.one();
    w[1] = f.from_int(1);
    w[2] = f.one();
    // Q(w) = 3 = 0, and (w, v0) = 0
    assert!(q.eval(&f, &w).is_zero());
    complete_cube_v0(&f, &q, &v0, &w, f.zero(), f.zero(), 0).unwrap();
}

#[test]
fn ax_solution_examples() {
    let f3 = Field::new(3, 1).unwrap();
    // n = 3 > D = 2: guaranteed nonzero zero of x0^2+x1^2+x2^2
    let fam = PolyFamily::new(3, vec![parse_poly("x0^2 + x1^2 + x2^2", 3, &f3).unwrap()]);
    let out = ax_nonzero_solution(&f3, &fam, 0).unwrap();
    assert!(out.precondition_met);
    assert!(out.point.iter().any(|c| !c.is_zero()));
    assert!(fam.vanishes_at(&f3, &out.point));

    // n = D: only the origin vanishes; a no-solution report is legal
    let fam2 = PolyFamily::new(2, vec![parse_poly("x0^2 + x1^2", 2, &f3).unwrap()]);
    assert!(matches!(ax_nonzero_solution(&f3, &fam2, 0), Err(Error::NoSolutionFound)));

    // precondition fails but a point still exists: returned with the flag off
    let f2 = Field::new(2, 1).unwrap();
    let fam3 = PolyFamily::new(2, vec![parse_poly("x0*x1", 2, &f2).unwrap()]);
    let out = ax_nonzero_solution(&f2, &fam3, 0).unwrap();
    assert!(!out.precondition_met);
    assert!(fam3.vanishes_at(&f2, &out.point));
}

#[test]
fn d_large_examples() {
    let f = Field::new(3, 1).unwrap();
    // {x0 x1} in F_3^4: |P(V)| = 40, bound < 1
    let fam = PolyFamily::new(4, vec![parse_poly("x0*x1", 4, &f).unwrap()]);
    let rep = d_large_verify(&f, &fam, 1 << 26).unwrap();
    assert_eq!(rep.projective_space, 40);
    assert_eq!(rep.bound_ceil, 1);
    assert!(rep.holds);

    // {x0^2+x1^2+x2^2} in F_3^5: 121 projective points in P(V)
    let fam = PolyFamily::new(5, vec![parse_poly("x0^2 + x1^2 + x2^2", 5, &f).unwrap()]);
    let rep = d_large_verify(&f, &fam, 1 << 26).unwrap();
    assert_eq!(rep.projective_space, 121);
    assert_eq!(rep.projective_points, 40);
    assert!(rep.holds);

    // empty family: Y = P(V)
    let fam = PolyFamily::new(3, vec![]);
    let rep = d_large_verify(&f, &fam, 1 << 26).unwrap();
    assert_eq!(rep.projective_points, rep.projective_space);
    assert!(rep.holds);
}

#[test]
fn shifted_zero_examples() {
    let f2 = Field::new(2, 1).unwrap();
    let fam = PolyFamily::new(4, vec![parse_poly("x0*x1 + x2*x3", 4, &f2).unwrap()]);
    let origin = vec![f2.zero(); 4];
    let (count, density) = shifted_zero_count(&f2, &fam, &[origin], 1 << 26).unwrap();
    assert_eq!(count, 10);
    assert!((density - 10.0 / 16.0).abs() < 1e-12);

    // repeated linear constraint
    let f3 = Field::new(3, 1).unwrap();
    let fam = PolyFamily::new(2, vec![parse_poly("x0", 2, &f3).unwrap()]);
    let a1 = vec![f3.zero(), f3.one()];
    let a2 = vec![f3.zero(), f3.from_int(2)];
    let (count, _) = shifted_zero_count(&f3, &fam, &[a1, a2], 1 << 26).unwrap();
    assert_eq!(count, 3);

    // basepoint off the variety is rejected
    let bad = vec![f3.one(), f3.zero()];
    assert!(matches!(
        shifted_zero_count(&f3, &fam, &[bad], 1 << 26),
        Err(Error::BasepointNotOnVariety(0))
    ));
}
