mod common;

use common::*;
use pinv_minres::oracle::{hermitian_eigen, matrix_rank, matvec};
use pinv_minres::precon_factory::{
    error_csv, inertia, make_basis, make_npc_suite, make_rank_family, rank_member, run_error_sweep,
    sweep_complex_symmetric, sweep_hermitian, BasisSource, NpcProblem, RankFamilySpec, ERROR_CSV_HEADER,
};
use pinv_minres::random::{self, complex_normal_vec, CMat};
use pinv_minres::vector::{dot, norm};
use pinv_minres::{Error, Symmetry, C64};
use proptest::prelude::*;

fn ones(d: usize) -> Vec<C64> {
    vec![c(1.0); d]
}

fn orthonormality_defect(p: &CMat) -> f64 {
    (p.adjoint() * p - CMat::identity(p.ncols(), p.ncols())).norm()
}

#[test]
fn family_members_are_psd_with_their_rank() {
    let a = sweep_hermitian(12, 8, 1);
    for source in [BasisSource::RandomPsdSvd, BasisSource::RangePreserved, BasisSource::EigenAll] {
        let spec = RankFamilySpec::new(12, source, 2);
        let family = make_rank_family(&spec, Some(&a), Symmetry::Hermitian).unwrap();
        assert_eq!(family.len(), 12);
        for (k, m) in family.iter().enumerate() {
            let dense = m.dense_matrix().unwrap();
            assert!((&dense - dense.adjoint()).norm() <= 1e-14 * dense.norm());
            let eig = hermitian_eigen(&dense).unwrap();
            assert!(eig.values.iter().all(|&v| v > 0.0), "{}: i={}", source.name(), k + 1);
            assert_eq!(matrix_rank(&dense), k + 1, "{}", source.name());
            assert_eq!(m.rank(), Some(k + 1));
        }
    }
}

#[test]
fn bases_are_orthonormal() {
    let a = sweep_complex_symmetric(10, 6, 3);
    for source in
        [BasisSource::RandomPsdSvd, BasisSource::RangePreserved, BasisSource::EigenAll, BasisSource::Sketch(4)]
    {
        let spec = RankFamilySpec::new(10, source, 4);
        let p = make_basis(&spec, Some(&a), Symmetry::ComplexSymmetric).unwrap();
        assert!(orthonormality_defect(&p) <= 1e-12, "{}", source.name());
    }
    let h = sweep_hermitian(10, 6, 3);
    let p = make_basis(&RankFamilySpec::new(10, BasisSource::EigenPositive, 0), Some(&h), Symmetry::Hermitian).unwrap();
    let (pos, _, _) = inertia(&h, 1e-10);
    assert_eq!(p.ncols(), pos);
}

#[test]
fn range_preserved_basis_leads_with_the_range() {
    let a = sweep_hermitian(12, 7, 5);
    let p =
        make_basis(&RankFamilySpec::new(12, BasisSource::RangePreserved, 6), Some(&a), Symmetry::Hermitian).unwrap();
    let lead = p.columns(0, 7).into_owned();
    // Projecting A's columns on the first rank(A) columns of P loses nothing.
    let residual = &a - &lead * (lead.adjoint() * &a);
    assert!(residual.norm() <= 1e-10 * a.norm());
}

#[test]
fn source_compatibility_errors() {
    let spec = RankFamilySpec::new(6, BasisSource::RangePreserved, 0);
    assert!(matches!(make_basis(&spec, None, Symmetry::Hermitian), Err(Error::IncompatibleSource(_))));
    let a = sweep_complex_symmetric(6, 4, 0);
    let spec = RankFamilySpec::new(6, BasisSource::EigenPositive, 0);
    assert!(matches!(make_basis(&spec, Some(&a), Symmetry::ComplexSymmetric), Err(Error::IncompatibleSource(_))));
    let spec = RankFamilySpec::new(6, BasisSource::Sketch(7), 0);
    assert!(make_basis(&spec, None, Symmetry::Hermitian).is_err());
    let mut spec = RankFamilySpec::new(6, BasisSource::RandomPsdSvd, 0);
    spec.weights[2] = 0.0;
    assert!(make_rank_family(&spec, None, Symmetry::Hermitian).is_err());
    assert!(make_rank_family(
        &RankFamilySpec::new(6, BasisSource::RandomPsdSvd, 0),
        Some(&sweep_hermitian(5, 3, 0)),
        Symmetry::Hermitian
    )
    .is_err());
}

#[test]
fn npc_suite_structure() {
    let problem = NpcProblem::generate(3);
    assert_eq!(inertia(&problem.a, 1e-10), (NpcProblem::R_PLUS, 1, NpcProblem::D - NpcProblem::R));
    let suite = make_npc_suite(&problem, 3).unwrap();
    let rank = |m: &pinv_minres::Preconditioner| matrix_rank(&m.dense_matrix().unwrap());
    assert_eq!(rank(&suite.m1), NpcProblem::R);
    assert_eq!(rank(&suite.m2), NpcProblem::D);
    assert_eq!(rank(&suite.m3), NpcProblem::R);
    assert_eq!(rank(&suite.m4), NpcProblem::R_PLUS);
    assert!(norm(&suite.m4.apply_m(&problem.u_minus).unwrap()) <= 1e-12);
    // M3 sees the negative direction.
    let m3u = suite.m3.apply_m(&problem.u_minus).unwrap();
    assert!(dot(&problem.u_minus, &m3u).re > 1e-6);
    // Restricted to range(M3) the operator keeps A's nonzero inertia.
    let p3 = suite.m3.economy().unwrap().range_projector();
    let (_, neg, _) = inertia(&(&p3 * &problem.a * &p3), 1e-10);
    assert_eq!(neg, 1);
}

#[test]
fn sweep_separates_range_preserved_from_random() {
    for kind in [Symmetry::Hermitian, Symmetry::ComplexSymmetric] {
        let (d, r) = (20, 15);
        let a = match kind {
            Symmetry::Hermitian => sweep_hermitian(d, r, 0),
            _ => sweep_complex_symmetric(d, r, 0),
        };
        let b = ones(d);
        let preserved =
            make_rank_family(&RankFamilySpec::new(d, BasisSource::RangePreserved, 1), Some(&a), kind).unwrap();
        let rows = run_error_sweep(&a, &b, &preserved, kind, &reorth(d)).unwrap();
        let at_r = rows.iter().find(|row| row.i == r).unwrap();
        assert!(at_r.e_x <= 1e-8, "{kind}: E_x at i = r is {:.3e}", at_r.e_x);
        assert!(at_r.assumptions.a_holds && at_r.assumptions.b_holds, "{kind}");
        for row in rows.iter().filter(|row| row.assumptions.b_holds) {
            assert!(row.e_p <= 1e-8, "{kind}: i={} E_P {:.3e}", row.i, row.e_p);
        }

        let random = make_rank_family(&RankFamilySpec::new(d, BasisSource::RandomPsdSvd, 1), Some(&a), kind).unwrap();
        let rows = run_error_sweep(&a, &b, &random, kind, &reorth(d)).unwrap();
        let min = rows.iter().map(|row| row.e_x).fold(f64::INFINITY, f64::min);
        assert!(min > 1e-3, "{kind}: random family reached E_x = {min:.3e}");
    }
}

#[test]
fn error_csv_layout() {
    let a = sweep_hermitian(6, 4, 2);
    let family =
        make_rank_family(&RankFamilySpec::new(6, BasisSource::RangePreserved, 2), Some(&a), Symmetry::Hermitian)
            .unwrap();
    let rows = run_error_sweep(&a, &ones(6), &family, Symmetry::Hermitian, &reorth(6)).unwrap();
    let text = error_csv(&rows);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(ERROR_CSV_HEADER));
    let body: Vec<_> = lines.collect();
    assert_eq!(body.len(), 6);
    for (k, line) in body.iter().enumerate() {
        let fields: Vec<_> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[0], (k + 1).to_string());
        assert!(fields[1..].iter().all(|f| f.parse::<f64>().is_ok()), "{line}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn factored_and_dense_application_agree(d in 2usize..14, seed in any::<u64>()) {
        let spec = RankFamilySpec::new(d, BasisSource::RandomPsdSvd, seed);
        let p = make_basis(&spec, None, Symmetry::Hermitian).unwrap();
        let v = complex_normal_vec(&mut random::rng(seed ^ 1), d);
        for i in 1..=d {
            let m = rank_member(&p, &spec.weights, i).unwrap();
            let dense = m.dense_matrix().unwrap();
            let want = matvec(&dense, &v);
            let got = m.apply_m(&v).unwrap();
            let err = norm(&pinv_minres::vector::sub(&got, &want));
            prop_assert!(err <= 1e-12 * (1.0 + norm(&want)), "i={} err {:.2e}", i, err);
        }
    }
}
