//! Randomized properties of the exact linear algebra kernel, plus a
//! from-scratch enumeration oracle over tiny prime-field spaces.
//!
//! The randomized layer drives rank-nullity, rref canonicity, and the
//! subspace dimension formula over Q and F_2. The enumeration layer
//! rebuilds spans, intersections, and sums by brute force over every
//! vector of F_2^n and F_3^n for n <= 3 and demands agreement.

use projres::linalg::{kernel_basis, rref, Field, Mat, Scalar, Subspace};
use proptest::prelude::*;

fn entry(field: Field) -> impl Strategy<Value = i64> {
    match field {
        Field::Rationals => (-4i64..=4).boxed(),
        Field::Prime(p) => (0i64..p as i64).boxed(),
    }
}

fn small_mat(field: Field) -> impl Strategy<Value = Mat> {
    (1usize..=5, 1usize..=5).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(entry(field), r * c).prop_map(move |flat| {
            Mat::from_fn(field, r, c, |i, j| field.from_i64(flat[i * c + j]))
        })
    })
}

fn rows_strategy(field: Field, ambient: usize) -> impl Strategy<Value = Vec<Vec<Scalar>>> {
    proptest::collection::vec(proptest::collection::vec(entry(field), ambient), 0..=4).prop_map(
        move |rows| {
            rows.into_iter()
                .map(|r| r.into_iter().map(|n| field.from_i64(n)).collect())
                .collect()
        },
    )
}

fn check_rank_nullity(m: &Mat) {
    let r = rref(m);
    let k = kernel_basis(m);
    assert_eq!(r.rank + k.dim(), m.cols(), "rank-nullity on {m:?}");
    // every reported kernel vector really is one
    for row in k.basis().row_vecs() {
        let image = m.matmul(&Mat::from_rows(m.field(), vec![row.to_vec()]).unwrap().transpose())
            .unwrap();
        assert!(image.is_zero(), "kernel vector fails m x^T = 0");
    }
}

fn check_rref_canonical(m: &Mat) {
    let r = rref(m);
    // idempotence
    let again = rref(&r.mat);
    assert_eq!(again.mat, r.mat, "rref not idempotent");
    assert_eq!(again.pivots, r.pivots);
    // invariance under row reversal (a row-space-preserving shuffle)
    let mut reversed: Vec<Vec<Scalar>> = m.row_vecs().map(<[Scalar]>::to_vec).collect();
    reversed.reverse();
    if !reversed.is_empty() {
        let shuffled = Mat::from_rows(m.field(), reversed).unwrap();
        assert_eq!(rref(&shuffled).mat, r.mat, "rref depends on row order");
    }
    // pivot structure: each pivot column is a standard basis vector
    for (i, &p) in r.pivots.iter().enumerate() {
        for row in 0..r.mat.rows() {
            let expect = if row == i { m.field().one() } else { m.field().zero() };
            assert_eq!(*r.mat.at(row, p), expect, "pivot column {p} not reduced");
        }
    }
}

fn meet_join_inputs(
    field: Field,
) -> impl Strategy<Value = (usize, Vec<Vec<Scalar>>, Vec<Vec<Scalar>>)> {
    (1usize..=4).prop_flat_map(move |n| {
        (Just(n), rows_strategy(field, n), rows_strategy(field, n))
    })
}

fn check_dimension_formula(field: Field, ambient: usize, a: Vec<Vec<Scalar>>, b: Vec<Vec<Scalar>>) {
    let u = Subspace::from_rows(field, ambient, a).unwrap();
    let w = Subspace::from_rows(field, ambient, b).unwrap();
    let meet = u.intersect(&w);
    let join = u.sum(&w);
    assert_eq!(
        meet.dim() + join.dim(),
        u.dim() + w.dim(),
        "dim(U meet W) + dim(U + W) != dim U + dim W"
    );
    assert!(meet.leq(&u) && meet.leq(&w), "intersection not below both");
    assert!(u.leq(&join) && w.leq(&join), "sum not above both");
}

macro_rules! field_props {
    ($module:ident, $field:expr) => {
        mod $module {
            use super::*;

            proptest! {
                #![proptest_config(ProptestConfig::with_cases(200))]

                #[test]
                fn rank_nullity(m in small_mat($field)) {
                    check_rank_nullity(&m);
                }

                #[test]
                fn rref_canonical(m in small_mat($field)) {
                    check_rref_canonical(&m);
                }

                #[test]
                fn dimension_formula((n, a, b) in meet_join_inputs($field)) {
                    check_dimension_formula($field, n, a, b);
                }
            }
        }
    };
}

field_props!(over_q, Field::Rationals);
field_props!(over_f2, Field::Prime(2));

/// Every vector of F_p^n, as scalar rows.
fn all_vectors(field: Field, p: u64, n: usize) -> Vec<Vec<Scalar>> {
    let total = p.pow(n as u32);
    (0..total)
        .map(|code| {
            let mut v = Vec::with_capacity(n);
            let mut c = code;
            for _ in 0..n {
                v.push(field.from_i64((c % p) as i64));
                c /= p;
            }
            v
        })
        .collect()
}

/// Brute-force span: close the generator set under addition and scaling
/// by walking every coefficient tuple.
fn brute_span(field: Field, p: u64, n: usize, gens: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let tuples = p.pow(gens.len() as u32);
    let mut seen: Vec<Vec<Scalar>> = Vec::new();
    for code in 0..tuples {
        let mut c = code;
        let mut acc = vec![field.zero(); n];
        for g in gens {
            let coeff = field.from_i64((c % p) as i64);
            c /= p;
            for (a, x) in acc.iter_mut().zip(g) {
                *a = a.clone() + coeff.clone() * x.clone();
            }
        }
        if !seen.contains(&acc) {
            seen.push(acc);
        }
    }
    seen
}

fn pow_dim(p: u64, count: usize) -> usize {
    // count = p^dim for subspaces of F_p^n
    let mut dim = 0;
    let mut acc = 1;
    while acc < count as u64 {
        acc *= p;
        dim += 1;
    }
    assert_eq!(acc, count as u64, "subspace cardinality is not a power of {p}");
    dim
}

#[test]
fn enumeration_oracle_agrees_on_tiny_prime_spaces() {
    for p in [2u64, 3] {
        let field = Field::Prime(p);
        for n in 1..=3usize {
            let vectors = all_vectors(field, p, n);
            // every subset of <= 2 ambient vectors as generators keeps the
            // closure loop small while exercising all dims 0..=n
            let mut generator_sets: Vec<Vec<Vec<Scalar>>> = vec![vec![]];
            for (i, v) in vectors.iter().enumerate() {
                generator_sets.push(vec![v.clone()]);
                for w in vectors.iter().skip(i + 1) {
                    generator_sets.push(vec![v.clone(), w.clone()]);
                }
            }
            for gens in &generator_sets {
                let sub = Subspace::from_rows(field, n, gens.clone()).unwrap();
                let brute = brute_span(field, p, n, gens);
                assert_eq!(sub.dim(), pow_dim(p, brute.len()), "dim mismatch over F_{p}^{n}");
                for v in &vectors {
                    assert_eq!(
                        sub.contains(v),
                        brute.contains(v),
                        "membership mismatch over F_{p}^{n}"
                    );
                }
            }
            // pairwise meet/join against set arithmetic on a thinned sample
            for (si, a) in generator_sets.iter().enumerate().step_by(7) {
                for b in generator_sets.iter().skip(si).step_by(11) {
                    let u = Subspace::from_rows(field, n, a.clone()).unwrap();
                    let w = Subspace::from_rows(field, n, b.clone()).unwrap();
                    let span_u = brute_span(field, p, n, a);
                    let span_w = brute_span(field, p, n, b);
                    let meet = u.intersect(&w);
                    let brute_meet: Vec<_> =
                        span_u.iter().filter(|v| span_w.contains(v)).cloned().collect();
                    assert_eq!(meet.dim(), pow_dim(p, brute_meet.len()));
                    for v in &brute_meet {
                        assert!(meet.contains(v), "meet misses a brute vector");
                    }
                    let join = u.sum(&w);
                    let mut union_gens = a.clone();
                    union_gens.extend(b.iter().cloned());
                    let brute_join = brute_span(field, p, n, &union_gens);
                    assert_eq!(join.dim(), pow_dim(p, brute_join.len()));
                }
            }
        }
    }
}

#[test]
fn solve_agrees_with_kernel_translation() {
    // x * m = rhs solutions form a coset of the left kernel; spot-check
    // that solve finds one exactly when brute rref rank test says so
    let field = Field::Rationals;
    let m = Mat::from_i64(field, &[&[1, 2, 0], &[0, 1, 1]]);
    let rhs = vec![field.from_i64(1), field.from_i64(4), field.from_i64(2)];
    let x = projres::linalg::solve(&m, &rhs).expect("consistent system solves");
    let image = Mat::from_rows(field, vec![x]).unwrap().matmul(&m).unwrap();
    let got: Vec<Scalar> = image.row(0).to_vec();
    assert_eq!(got, rhs);
    let bad = vec![field.from_i64(0), field.from_i64(0), field.from_i64(1)];
    assert!(
        projres::linalg::solve(&m, &bad).is_none(),
        "inconsistent system must not solve"
    );
}
