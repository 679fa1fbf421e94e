mod common;

use common::*;
use pinv_minres::oracle::{
    check_rank_assumptions, grade, hermitian_eigen, lifted_problem_pinv, matrix_rank, matvec, pinv, takagi,
    verify_moore_penrose,
};
use pinv_minres::precon_factory::rank_member;
use pinv_minres::random::{
    self, complex_normal_matrix, complex_normal_vec, complex_symmetric_with_rank, hermitian_with_rank, CMat,
};
use pinv_minres::vector::sub;
use pinv_minres::{solve, DenseOperator, Preconditioner, Symmetry, C64};
use proptest::prelude::*;

#[test]
fn pinv_of_scaled_first_coordinate() {
    let a = 4.0;
    let m = diag(&[a, 0.0]);
    let b = cvec(&[1.0, 1.0]);
    let x = matvec(&pinv(&m), &b);
    assert_close(&x, &cvec(&[1.0 / a, 0.0]), 1e-15);
    assert_close(&sub(&b, &matvec(&m, &x)), &cvec(&[0.0, 1.0]), 1e-15);
}

#[test]
fn moore_penrose_verifier() {
    let id = CMat::identity(4, 4);
    assert!(verify_moore_penrose(&id, &id).passed);
    let a = complex_normal_matrix(&mut random::rng(1), 6, 6);
    assert!(verify_moore_penrose(&a, &pinv(&a)).passed);
    // A^T is not a pseudo-inverse of a generic non-normal A.
    let check = verify_moore_penrose(&a, &a.transpose());
    assert!(!check.passed, "{:?}", check.residuals);
}

#[test]
fn takagi_of_rank_one_nilpotent() {
    let i = C64::i();
    let a = CMat::from_row_slice(2, 2, &[c(1.0), i, i, c(-1.0)]);
    let dec = takagi(&a).unwrap();
    assert_eq!(dec.rank, 1);
    assert!((dec.values[0] - 2.0).abs() < 1e-12);
    // u = [1, i]/sqrt(2) up to a unit phase, which U Σ U^T fixes to ±1.
    let u = dec.u.column(0);
    let want = [c(1.0 / 2f64.sqrt()), i / 2f64.sqrt()];
    let phase = u[0] / want[0];
    assert!((phase.norm() - 1.0).abs() < 1e-12);
    assert!((u[1] - phase * want[1]).norm() < 1e-12);
    assert!((dec.reconstruct() - &a).norm() < 1e-12);
}

#[test]
fn takagi_of_real_psd_matrix_is_its_eigendecomposition() {
    let g = complex_normal_matrix(&mut random::rng(2), 5, 3).map(|z| c(z.re));
    let a = &g * g.transpose();
    let tk = takagi(&a).unwrap();
    let he = hermitian_eigen(&a).unwrap();
    assert_eq!(tk.rank, 3);
    for (s, l) in tk.values.iter().zip(&he.values) {
        assert!((s - l).abs() < 1e-10 * he.values[0]);
    }
    assert!((tk.reconstruct() - &a).norm() < 1e-10 * a.norm());
}

#[test]
fn asymmetric_input_is_rejected() {
    let a = real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
    assert!(takagi(&a).is_err());
    assert!(hermitian_eigen(&a).is_err());
}

#[test]
fn grade_small_cases() {
    assert_eq!(grade(&CMat::identity(3, 3), &cvec(&[1.0, 2.0, 3.0]), Symmetry::Hermitian), 1);
    assert_eq!(grade(&diag(&[1.0, 0.0]), &cvec(&[1.0, 1.0]), Symmetry::Hermitian), 2);
    assert_eq!(grade(&diag(&[1.0, 0.0]), &cvec(&[0.0, 0.0]), Symmetry::Hermitian), 0);
}

#[test]
fn grade_matches_solver_termination() {
    let a = hermitian_with_rank(&mut random::rng(3), 20, 15);
    let b = complex_normal_vec(&mut random::rng(4), 20);
    let rep = solve(&DenseOperator::hermitian(a.clone()).unwrap(), &b, &reorth(20)).unwrap();
    assert_eq!(rep.grade(), Some(grade(&a, &b, Symmetry::Hermitian)));
}

#[test]
fn projected_pinv_special_cases() {
    let a = hermitian_with_rank(&mut random::rng(5), 12, 8);
    let b = complex_normal_vec(&mut random::rng(6), 12);
    let want = matvec(&pinv(&a), &b);
    let full = Preconditioner::from_dense(random::random_psd(&mut random::rng(7), 12)).unwrap();
    assert_close(&lifted_problem_pinv(&a, &full, &b, Symmetry::Hermitian).unwrap(), &want, 1e-8);
    let dec = hermitian_eigen(&a).unwrap();
    let range = rank_member(&dec.u, &[1.0; 8], 8).unwrap();
    assert_close(&lifted_problem_pinv(&a, &range, &b, Symmetry::Hermitian).unwrap(), &want, 1e-8);
}

#[test]
fn rank_assumption_cases() {
    for kind in [Symmetry::Hermitian, Symmetry::ComplexSymmetric] {
        let a = match kind {
            Symmetry::ComplexSymmetric => complex_symmetric_with_rank(&mut random::rng(8), 12, 8),
            _ => hermitian_with_rank(&mut random::rng(8), 12, 8),
        };
        let dec = pinv_minres::oracle::range_decomposition(&a, kind).unwrap();
        let full = Preconditioner::from_dense(random::random_psd(&mut random::rng(9), 12)).unwrap();
        let r = check_rank_assumptions(&a, &full, kind).unwrap();
        assert!(r.a_holds && !r.b_holds, "{kind}: full-rank M {r:?}");

        // The CS checks use P^T U, so the matching P is conj(U).
        let p = if kind == Symmetry::ComplexSymmetric { dec.u.map(|z| z.conj()) } else { dec.u.clone() };
        let exact = rank_member(&p, &[1.0; 8], 8).unwrap();
        let r = check_rank_assumptions(&a, &exact, kind).unwrap();
        assert!(r.a_holds && r.b_holds, "{kind}: exact range {r:?}");

        let inside = rank_member(&p, &[1.0; 8], 5).unwrap();
        let r = check_rank_assumptions(&a, &inside, kind).unwrap();
        assert!(!r.a_holds && r.b_holds, "{kind}: rank-5 inside {r:?}");
    }
}

fn singular(kind: Symmetry) -> impl Strategy<Value = CMat> {
    (2usize..=16, any::<u64>()).prop_flat_map(move |(d, seed)| {
        (1..d).prop_map(move |r| {
            let mut g = random::rng(seed);
            match kind {
                Symmetry::ComplexSymmetric => complex_symmetric_with_rank(&mut g, d, r),
                _ => hermitian_with_rank(&mut g, d, r),
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pinv_is_an_involution_on_the_truncated_rank(a in singular(Symmetry::Hermitian)) {
        let back = pinv(&pinv(&a));
        prop_assert!((&back - &a).norm() <= 1e-8 * a.norm());
        prop_assert!(verify_moore_penrose(&a, &pinv(&a)).passed);
    }

    #[test]
    fn grade_is_at_most_rank_plus_one(a in singular(Symmetry::Hermitian), seed in any::<u64>()) {
        let b = complex_normal_vec(&mut random::rng(seed), a.nrows());
        let g = grade(&a, &b, Symmetry::Hermitian);
        prop_assert!(g <= matrix_rank(&a) + 1, "grade {g} rank {}", matrix_rank(&a));
    }

    #[test]
    fn saunders_grade_is_at_most_rank_plus_one(a in singular(Symmetry::ComplexSymmetric), seed in any::<u64>()) {
        let b = complex_normal_vec(&mut random::rng(seed), a.nrows());
        let g = grade(&a, &b, Symmetry::ComplexSymmetric);
        prop_assert!(g <= matrix_rank(&a) + 1, "grade {g} rank {}", matrix_rank(&a));
    }

    #[test]
    fn takagi_reconstructs(a in singular(Symmetry::ComplexSymmetric)) {
        let dec = takagi(&a).unwrap();
        prop_assert!((dec.reconstruct() - &a).norm() <= 1e-8 * a.norm());
        prop_assert!((dec.pinv() - pinv(&a)).norm() <= 1e-8 * pinv(&a).norm());
    }
}
