use super::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

fn real(rows: usize, cols: usize, data: &[f64]) -> Operator {
    Operator::from_row_slice(rows, cols, &data.iter().map(|&x| re(x)).collect::<Vec<_>>())
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> Operator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Operator::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

fn random_hermitian(n: usize, seed: u64) -> Operator {
    let g = gaussian(n, n, seed);
    (&g + g.adjoint()) * re(0.5)
}

fn assert_values(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
    }
}

#[test]
fn identity_eigenvalues() {
    let dec = hermitian_eig(&Operator::identity(3, 3)).unwrap();
    assert_values(&dec.eigenvalues, &[1.0, 1.0, 1.0], 1e-15);
    assert!(dec.bands.iter().all(|&b| b == Band::PlusOne));
}

#[test]
fn pauli_x_eigenvalues() {
    let x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let dec = hermitian_eig(&x).unwrap();
    assert_values(&dec.eigenvalues, &[-1.0, 1.0], 1e-15);
    assert!(dec.check_against(&x).passed);
}

#[test]
fn triangle_transition_matrix() {
    // cos(2 pi k / 3) for k = 0, 1, 2
    let p = real(3, 3, &[0.0, 0.5, 0.5, 0.5, 0.0, 0.5, 0.5, 0.5, 0.0]);
    let dec = hermitian_eig(&p).unwrap();
    assert_values(&dec.eigenvalues, &[-0.5, -0.5, 1.0], 1e-14);
    assert_eq!(dec.bands, vec![Band::Interior, Band::Interior, Band::PlusOne]);
}

#[test]
fn complex_hermitian_pair() {
    // [[0, -i], [i, 0]] (Pauli-Y) has eigenvectors with complex phases
    let y = Operator::from_row_slice(
        2,
        2,
        &[re(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), re(0.0)],
    );
    let dec = hermitian_eig(&y).unwrap();
    assert_values(&dec.eigenvalues, &[-1.0, 1.0], 1e-15);
    assert!(dec.check_against(&y).passed);
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(
        hermitian_eig(&Operator::zeros(2, 3)),
        Err(Error::Dimension(_))
    ));
    let a = real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    assert!(matches!(hermitian_eig(&a), Err(Error::Domain(_))));
}

#[test]
fn band_classification() {
    assert_eq!(Band::classify(1.0 - 1e-12, TOL_KER), Band::PlusOne);
    assert_eq!(Band::classify(-1.0 + 5e-10, TOL_KER), Band::MinusOne);
    assert_eq!(Band::classify(0.999, TOL_KER), Band::Interior);
    assert_eq!(Band::classify(1.5, TOL_KER), Band::Other);
}

#[test]
fn arccos_of_flip() {
    let x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let theta = apply_function(&hermitian_eig(&x).unwrap(), |l| arccos_clamped(l).map(re)).unwrap();
    let dec = hermitian_eig(&theta).unwrap();
    // arccos has infinite slope at ±1: eps drift in λ becomes ~sqrt(eps)
    assert_values(&dec.eigenvalues, &[0.0, PI], 1e-7);
}

#[test]
fn identity_function_reconstructs() {
    let a = random_hermitian(7, 3);
    let back = apply_function(&hermitian_eig(&a).unwrap(), |l| Some(re(l))).unwrap();
    assert!(distance(&a, &back) <= 1e-11 * 7.0 * a.norm());
}

#[test]
fn euler_on_diagonal() {
    let d = real(2, 2, &[0.0, 0.0, 0.0, PI]);
    let e = apply_function(&hermitian_eig(&d).unwrap(), |l| Some(Complex64::from_polar(1.0, l)))
        .unwrap();
    assert!(distance(&e, &real(2, 2, &[1.0, 0.0, 0.0, -1.0])) < 1e-15);
}

#[test]
fn arccos_outside_clamp_is_domain_error() {
    let d = real(2, 2, &[1.1, 0.0, 0.0, 0.2]);
    let res = apply_function(&hermitian_eig(&d).unwrap(), |l| arccos_clamped(l).map(re));
    assert!(matches!(res, Err(Error::Domain(_))));
    assert_eq!(arccos_clamped(1.0 + 1e-10), Some(0.0));
}

#[test]
fn nullspace_examples() {
    assert_eq!(nullspace(&Operator::zeros(2, 2), TOL_KER).dim(), 2);
    let inv = real(2, 2, &[2.0, 1.0, 1.0, 3.0]);
    assert_eq!(nullspace(&inv, TOL_KER).dim(), 0);
    // wide operator: kernel of a 1x3 row
    let row = real(1, 3, &[1.0, 1.0, 0.0]);
    let k = nullspace(&row, TOL_KER);
    assert_eq!(k.dim(), 2);
    assert!((&row * k.basis()).norm() < 1e-15);
}

#[test]
fn nullspace_resolves_tiny_singular_values() {
    // singular values {1, 1e-7, 1e-12}: only the last counts at tol 1e-9
    let q = {
        let g = gaussian(3, 3, 11);
        range_space(&g, 1e-14).into_basis()
    };
    let d = real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1e-7, 0.0, 0.0, 0.0, 1e-12]);
    let a = &q * d * q.adjoint();
    assert_eq!(nullspace(&a, TOL_KER).dim(), 1);
    assert_eq!(rank(&a, TOL_KER), 2);
}

fn coord(n: usize, idx: &[usize]) -> Subspace {
    let mut b = Operator::zeros(n, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        b[(i, c)] = re(1.0);
    }
    Subspace::from_orthonormal(b)
}

#[test]
fn intersection_examples() {
    let x = coord(3, &[0, 1]);
    let same = intersect_subspaces(&x, &x, TOL_KER).unwrap();
    assert!(projector_distance(&same, &x) < 1e-12);

    let l1 = Subspace::from_orthonormal(real(2, 1, &[1.0, 0.0]));
    let l2 = Subspace::from_orthonormal(real(2, 1, &[0.0, 1.0]));
    assert_eq!(intersect_subspaces(&l1, &l2, TOL_KER).unwrap().dim(), 0);

    let a = coord(4, &[0, 1]);
    let b = coord(4, &[1, 2]);
    let i = intersect_subspaces(&a, &b, TOL_KER).unwrap();
    assert!(projector_distance(&i, &coord(4, &[1])) < 1e-12);

    assert!(matches!(
        intersect_subspaces(&coord(3, &[0]), &coord(4, &[0]), TOL_KER),
        Err(Error::Dimension(_))
    ));
}

#[test]
fn projector_examples() {
    let p = coord(2, &[0]).projector();
    assert!(distance(&p, &real(2, 2, &[1.0, 0.0, 0.0, 0.0])) < 1e-15);
    assert_eq!(Subspace::zero(3).projector(), Operator::zeros(3, 3));
    let s = 0.5f64.sqrt();
    let diag = Subspace::from_orthonormal(real(2, 1, &[s, s]));
    assert!(distance(&diag.projector(), &real(2, 2, &[0.5; 4])) < 1e-15);
}

#[test]
fn complement_round_trip() {
    let x = range_space(&gaussian(6, 2, 5), 1e-12);
    let c = x.complement(TOL_KER);
    assert_eq!(c.dim(), 4);
    let sum = x.projector() + c.projector();
    assert!(distance(&sum, &Operator::identity(6, 6)) < 1e-12);
    assert_eq!(Subspace::zero(3).complement(TOL_KER).dim(), 3);
    assert_eq!(Subspace::full(3).complement(TOL_KER).dim(), 0);
}

#[test]
fn operator_json_round_trip() {
    let a = gaussian(2, 3, 9);
    let j = OperatorJson::from(&a);
    let back = Operator::try_from(&j).unwrap();
    assert_eq!(a, back);
    let bad = OperatorJson { rows: 2, cols: 2, re: vec![vec![0.0; 2]], im: vec![vec![0.0; 2]; 2] };
    assert!(Operator::try_from(&bad).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eig_contract_random_hermitian(n in 1usize..=64, seed in any::<u64>()) {
        let a = random_hermitian(n, seed);
        let dec = hermitian_eig(&a).unwrap();
        let report = dec.check_against(&a);
        prop_assert!(report.passed, "{}", report);
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_contract_degenerate(n in 2usize..=24, seed in any::<u64>()) {
        // unitary involution: two eigenvalues with large multiplicities
        let q = range_space(&gaussian(n, n, seed), 1e-14).into_basis();
        let signs = Operator::from_fn(n, n, |i, j| if i == j { re(if i % 3 == 0 { 1.0 } else { -1.0 }) } else { re(0.0) });
        let s = &q * signs * q.adjoint();
        let dec = hermitian_eig(&s).unwrap();
        prop_assert!(dec.check_against(&s).passed);
        let plus = dec.bands.iter().filter(|&&b| b == Band::PlusOne).count();
        prop_assert_eq!(plus, n.div_ceil(3));
    }

    #[test]
    fn functional_calculus_is_multiplicative(n in 1usize..=16, seed in any::<u64>()) {
        let a = random_hermitian(n, seed);
        let dec = hermitian_eig(&a).unwrap();
        let f = |x: f64| Some(re(x * x - 2.0 * x + 0.5));
        let g = |x: f64| Some(re(3.0 * x * x * x + x));
        let fg = |x: f64| Some(f(x).unwrap() * g(x).unwrap());
        let lhs = apply_function(&dec, fg).unwrap();
        let rhs = apply_function(&dec, f).unwrap() * apply_function(&dec, g).unwrap();
        let scale = lhs.norm().max(1.0);
        prop_assert!(distance(&lhs, &rhs) <= 1e-9 * n as f64 * scale);
    }

    #[test]
    fn projector_is_orthogonal_idempotent(n in 1usize..=16, k in 0usize..=16, seed in any::<u64>()) {
        let k = k.min(n);
        let x = if k == 0 { Subspace::zero(n) } else { range_space(&gaussian(n, k, seed), 1e-12) };
        let p = x.projector();
        prop_assert!(distance(&(&p * &p), &p) <= 1e-10 * n as f64);
        prop_assert!(hermiticity_defect(&p) <= 1e-10 * n as f64);
        let trace: f64 = (0..n).map(|i| p[(i, i)].re).sum();
        prop_assert!((trace - x.dim() as f64).abs() <= 1e-9);
    }

    #[test]
    fn grassmann_dimension_formula(n in 2usize..=12, kx in 1usize..=12, ky in 1usize..=12, shared in 0usize..=4, seed in any::<u64>()) {
        // x and y share `shared` random directions, otherwise generic
        let kx = kx.min(n);
        let ky = ky.min(n);
        let common = shared.min(kx).min(ky);
        let g = gaussian(n, kx + ky, seed);
        let mut yc = g.columns(kx, ky).into_owned();
        for c in 0..common {
            yc.set_column(c, &g.column(c));
        }
        let x = range_space(&g.columns(0, kx).into_owned(), 1e-12);
        let y = range_space(&yc, 1e-12);
        let cap = intersect_subspaces(&x, &y, TOL_KER).unwrap();
        let cup = span_union(&x, &y, TOL_KER).unwrap();
        prop_assert_eq!(cap.dim() + cup.dim(), x.dim() + y.dim());
        prop_assert!(cap.dim() >= common);
    }
}
