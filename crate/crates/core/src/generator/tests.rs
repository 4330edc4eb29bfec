use std::f64::consts::{FRAC_1_SQRT_2, PI};

use proptest::prelude::*;

use super::*;
use crate::fixtures::fixture;
use crate::spectral_map::{boundary_subspaces_with, discriminant_spectrum};
use crate::szegedy::random_instance;

struct Built {
    inst: WalkInstance,
    atlas: SubspaceAtlas,
    dpm: DpmOperators,
    gen: GeneratorDecomposition,
}

fn build(inst: WalkInstance) -> Built {
    let tdec = discriminant_spectrum(&inst).unwrap();
    let atlas = boundary_subspaces_with(&inst, &tdec);
    let dpm = build_dpm(&inst, &tdec);
    let kernels = kernels_of_u(&inst, &tdec, &atlas).unwrap();
    let gen = build_generator(&inst, &dpm, &kernels).unwrap();
    Built { inst, atlas, dpm, gen }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn single_edge_generator() {
    let b = build(fixture("single-edge").unwrap());
    assert_eq!(b.dpm.d_plus.norm(), 0.0);
    assert_eq!(b.dpm.d_minus.norm(), 0.0);
    assert_eq!(b.gen.block_dims(), [0, 0, 1, 1]);
    let plus = Subspace::from_orthonormal(b.gen.b_ker_plus.clone());
    let minus = Subspace::from_orthonormal(b.gen.b_ker_minus.clone());
    let h = FRAC_1_SQRT_2;
    let sym = Subspace::from_orthonormal(Operator::from_column_slice(2, 1, &[linop::re(h), linop::re(h)]));
    let anti = Subspace::from_orthonormal(Operator::from_column_slice(2, 1, &[linop::re(h), linop::re(-h)]));
    assert!(projector_distance(&plus, &sym) < 1e-14);
    assert!(projector_distance(&minus, &anti) < 1e-14);
    let values = hermitian_eig(&b.gen.h).unwrap().eigenvalues;
    assert!((values[0] - 0.0).abs() < 1e-14 && (values[1] - PI).abs() < 1e-14);
    assert!(verify_generator(&b.inst, &b.gen).passed);
}

#[test]
fn cycle3_generator_spectrum() {
    let b = build(fixture("cycle:3").unwrap());
    let rank: f64 = (0..3).map(|i| (&b.dpm.d_plus * b.dpm.d_plus.adjoint())[(i, i)].re).sum();
    assert!((rank - 2.0).abs() < 1e-12);
    let got = hermitian_eig(&b.gen.h).unwrap().eigenvalues;
    // the circulating flow (+1 forward, -1 backward) lies in A^⊥ ∩ ker(S + 1),
    // so the odd cycle has a second eigenvalue 0 and no eigenvalue pi
    let third = 2.0 * PI / 3.0;
    let expected = sorted(vec![0.0, 0.0, third, third, 2.0 * third, 2.0 * third]);
    for (a, e) in got.iter().zip(&expected) {
        assert!((a - e).abs() < 1e-10, "{got:?}");
    }
    assert!(distance(&exp_i_hermitian(&b.gen.h).unwrap(), b.inst.u()) < 1e-10);
}

#[test]
fn cycle4_kernels_split() {
    let b = build(fixture("cycle:4").unwrap());
    assert_eq!(b.gen.b_ker_plus.ncols(), 2);
    assert_eq!(b.gen.b_ker_minus.ncols(), 2);
    assert_eq!((b.atlas.d0_plus.dim(), b.atlas.m_plus), (1, 1));
}

#[test]
fn generic_random_instance_has_empty_kernels() {
    // dim_H = 2 dim_K with no ±1 eigenvalues of T leaves no room for D_perp
    let mut seen = 0;
    for seed in 1..=40 {
        let b = build(random_instance(6, 3, seed).unwrap());
        if b.dpm.interior_values.len() == 3 {
            assert_eq!(b.gen.block_dims(), [3, 3, 0, 0], "seed {seed}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn fixtures_verify() {
    for name in ["single-edge", "cycle:3", "cycle:4", "cycle:7", "complete:4", "path-loops:3", "star:4"] {
        let b = build(fixture(name).unwrap());
        let r = verify_generator(&b.inst, &b.gen);
        assert!(r.passed, "{name}: {r}");
        let r = verify_identities(&b.inst, &b.dpm, &b.atlas);
        assert!(r.passed, "{name}: {r}");
        let r = verify_eigenspace_classes(&b.inst, &b.dpm, &b.gen);
        assert!(r.passed, "{name}: {r}");
    }
}

#[test]
fn perturbed_generator_fails_exponential_check() {
    let b = build(fixture("cycle:5").unwrap());
    let bad = b.gen.with_shifted_eigenvalue(0, 1e-3);
    let r = verify_generator(&b.inst, &bad);
    assert!(!r.passed);
    let m = r.max_magnitude("exp-ih").expect("exp-ih violated");
    assert!((0.5e-3..2e-3).contains(&m), "{m}");
}

#[test]
fn wave_equation_cycle3() {
    let b = build(fixture("cycle:3").unwrap());
    let mut delta = State::zeros(6);
    delta[0] = linop::re(1.0);
    let r = wave_equation_check(&b.inst, &b.dpm, &delta, 50).unwrap();
    assert!(r.passed, "{r}");
    assert!(r.max_magnitude("wave-equation").is_none());
}

#[test]
fn wave_equation_single_eigenvector_is_geometric() {
    let b = build(random_instance(7, 3, 5).unwrap());
    let psi = b.dpm.plus_basis().column(1).into_owned();
    let lambda = b.dpm.interior_values[1];
    let theta = lambda.acos();
    let f0 = &b.dpm.d_plus * &psi;
    let mut state = psi.clone();
    for n in 0..6 {
        let expected = &f0 * Complex64::from_polar(1.0, n as f64 * theta);
        assert!((&b.dpm.d_plus * &state - expected).norm() < 1e-12);
        state = b.inst.u() * state;
    }
    assert!(wave_equation_check(&b.inst, &b.dpm, &psi, 20).unwrap().passed);
}

#[test]
fn wave_equation_needs_d1_plus() {
    let b = build(fixture("single-edge").unwrap());
    let mut delta = State::zeros(2);
    delta[0] = linop::re(1.0);
    assert!(matches!(wave_equation_check(&b.inst, &b.dpm, &delta, 5), Err(Error::Domain(_))));
    assert!(matches!(
        wave_equation_check(&b.inst, &b.dpm, &State::zeros(3), 5),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn product_identities_random() {
    for seed in 1..=4 {
        let b = build(random_instance(8, 3, seed).unwrap());
        let r = verify_identities(&b.inst, &b.dpm, &b.atlas);
        assert!(r.passed, "seed {seed}: {r}");
        assert!(r.has_rule("matrix-route") || r.checks > 0);
    }
}

#[test]
fn tampered_dpm_is_caught() {
    let b = build(fixture("cycle:5").unwrap());
    let mut dpm = b.dpm.clone();
    dpm.d_plus[(0, 0)] += linop::re(1e-3);
    assert!(!dpm.check_invariants().passed);
    let mut dpm = b.dpm.clone();
    dpm.phase_t[(1, 1)] *= Complex64::from_polar(1.0, 1e-3);
    assert!(verify_identities(&b.inst, &dpm, &b.atlas).has_rule("product-identity"));
}

#[test]
fn eigenpairs_match_h() {
    let b = build(fixture("complete:4").unwrap());
    let (values, basis) = b.gen.eigenpairs();
    for (k, &v) in values.iter().enumerate() {
        let col = basis.column(k);
        assert!((&b.gen.h * col - col * linop::re(v)).norm() < 1e-12);
    }
    assert!(values.iter().all(|&v| (0.0..2.0 * PI).contains(&v)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_instances_satisfy_generator_contract(h in 2usize..20, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let k = 1 + ((h - 1) as f64 * k_frac) as usize;
        let b = build(random_instance(h, k, seed).unwrap());
        let r = verify_generator(&b.inst, &b.gen);
        prop_assert!(r.passed, "{}", r);
        let r = verify_identities(&b.inst, &b.dpm, &b.atlas);
        prop_assert!(r.passed, "{}", r);
        let r = verify_eigenspace_classes(&b.inst, &b.dpm, &b.gen);
        prop_assert!(r.passed, "{}", r);
        let mut psi = State::from_fn(h, |i, _| Complex64::new((i as f64).sin(), 0.3));
        psi /= linop::re(psi.norm());
        if let Ok(r) = wave_equation_check(&b.inst, &b.dpm, &psi, 40) {
            prop_assert!(r.passed, "{}", r);
        }
    }
}
