//! The operators `d_±`, the generator `H` with `U = e^{iH}` and spectrum in
//! `[0, 2pi)`, and the identities tying them to `d_A`, `d_B` and `T`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linop::{
    self, apply_function, arccos_clamped, distance, exp_i_hermitian, hermitian_eig, nullspace_scaled,
    projector_distance, span_union, Band, Operator, SpectralDecomposition, State, Subspace,
    TOL_KER,
};
use crate::report::ValidationReport;
use crate::spectral_map::{SubspaceAtlas, SUBSPACE_TOL};
use crate::szegedy::WalkInstance;

/// Relative tolerance of operator identities, multiplied by `dim_H`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Interior spectra with `1 - lambda^2` below this skip the pseudo-inverse
/// cross-check of `d_±`.
pub const CROSS_CHECK_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DpmOperators {
    /// `K x H`.
    pub d_plus: Operator,
    pub d_minus: Operator,
    /// `theta(T)`, with `theta(1) = 0` and `theta(-1) = pi`.
    pub theta_t: Operator,
    /// `e^{i theta(T)}`.
    pub phase_t: Operator,
    /// Projection onto `ker(T^2 - 1)^⊥` in `K`.
    pub interior_projector: Operator,
    /// Interior eigenvalues `lambda_k` of `T`.
    pub interior_values: Vec<f64>,
    /// Matching eigenvectors `f_k` as columns.
    pub interior_vectors: Operator,
}

impl DpmOperators {
    /// `d_+^* f_k` as columns, an orthonormal basis of `D_1^+`.
    pub fn plus_basis(&self) -> Operator {
        self.d_plus.adjoint() * &self.interior_vectors
    }

    pub fn minus_basis(&self) -> Operator {
        self.d_minus.adjoint() * &self.interior_vectors
    }

    pub fn check_invariants(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        let n = self.d_plus.ncols();
        let tol = IDENTITY_TOL * n.max(1) as f64;
        let pi = &self.interior_projector;
        let (dp, dm) = (&self.d_plus, &self.d_minus);
        r.check("dpm-coisometry", "d_+ d_+^*", distance(&(dp * dp.adjoint()), pi), tol);
        r.check("dpm-coisometry", "d_- d_-^*", distance(&(dm * dm.adjoint()), pi), tol);
        r.check("dpm-cross", "d_+ d_-^*", (dp * dm.adjoint()).norm(), tol);
        r.check("dpm-cross", "d_- d_+^*", (dm * dp.adjoint()).norm(), tol);
        let pp = dp.adjoint() * dp;
        let pm = dm.adjoint() * dm;
        for (name, p) in [("d_+^* d_+", &pp), ("d_-^* d_-", &pm)] {
            r.check("dpm-projector-hermitian", name, linop::hermiticity_defect(p), tol);
            r.check("dpm-projector-idempotent", name, distance(&(p * p), p), tol);
        }
        r.check("dpm-ranges-orthogonal", "D_1^+ vs D_1^-", (&pp * &pm).norm(), tol);
        let r_dim = self.interior_values.len();
        let id = Operator::identity(r_dim, r_dim);
        for (name, b) in [("d_+^*", self.plus_basis()), ("d_-^*", self.minus_basis())] {
            r.check("dpm-isometry", name, distance(&(b.adjoint() * &b), &id), 1e-10);
        }
        r
    }
}

/// `theta(x) = arccos x`, taken exactly as `0` or `pi` on the `±1` bands so
/// eigenvalues drifting by rounding do not pick up `sqrt(eps)` angles.
fn band_angle(x: f64, tol: f64) -> Option<f64> {
    match Band::classify(x, tol) {
        Band::PlusOne => Some(0.0),
        Band::MinusOne => Some(PI),
        Band::Interior => arccos_clamped(x),
        Band::Other => None,
    }
}

/// `d_±` assembled from the interior eigenpairs of `T`.
pub fn build_dpm(inst: &WalkInstance, tdec: &SpectralDecomposition) -> DpmOperators {
    let (values, f) = tdec.band_pairs(Band::Interior);
    let d_a_star_f = inst.d_a().adjoint() * &f;
    let d_b_star_f = inst.d_b().adjoint() * &f;
    let mut u_plus = d_a_star_f.clone();
    let mut u_minus = d_a_star_f;
    for (k, &lambda) in values.iter().enumerate() {
        let theta = arccos_clamped(lambda).expect("interior eigenvalue lies in (-1, 1)");
        let e = Complex64::from_polar(1.0, theta);
        let scale = linop::re(1.0 / (2.0 * (1.0 - lambda * lambda)).sqrt());
        let a = u_plus.column(k).into_owned();
        let b = d_b_star_f.column(k);
        u_plus.set_column(k, &((&a - b * e) * scale));
        u_minus.set_column(k, &((a * e - b) * scale));
    }
    let tol = tdec.tol_ker;
    let phase = |x: f64| band_angle(x, tol).map(|t| Complex64::from_polar(1.0, t));
    DpmOperators {
        d_plus: &f * u_plus.adjoint(),
        d_minus: &f * u_minus.adjoint(),
        theta_t: apply_function(tdec, |x| band_angle(x, tol).map(linop::re))
            .expect("discriminant spectrum lies in [-1, 1]"),
        phase_t: apply_function(tdec, phase).expect("discriminant spectrum lies in [-1, 1]"),
        interior_projector: &f * f.adjoint(),
        interior_values: values,
        interior_vectors: f,
    }
}

/// `(d_A - e^{-i theta(T)} d_B, e^{-i theta(T)} d_A - d_B)`.
fn unnormalized_dpm(inst: &WalkInstance, dpm: &DpmOperators) -> (Operator, Operator) {
    let conj_phase = dpm.phase_t.adjoint();
    let d_b = inst.d_b();
    (inst.d_a() - &conj_phase * &d_b, &conj_phase * inst.d_a() - d_b)
}

/// Orthonormal bases of `ker(U - 1)` and `ker(U + 1)` assembled from
/// `d_A^* ker(T ∓ 1)` and `D_±^⊥`, confirmed against the kernels of `U ∓ 1`.
pub fn kernels_of_u(
    inst: &WalkInstance,
    tdec: &SpectralDecomposition,
    atlas: &SubspaceAtlas,
) -> Result<(Subspace, Subspace)> {
    let n = inst.dim_h();
    let id = Operator::identity(n, n);
    let mut out = Vec::with_capacity(2);
    for (band, sign, perp) in [
        (Band::PlusOne, 1.0, &atlas.d_perp_plus),
        (Band::MinusOne, -1.0, &atlas.d_perp_minus),
    ] {
        let (_, f) = tdec.band_pairs(band);
        let lifted = Subspace::from_orthonormal(inst.d_a().adjoint() * f);
        let assembled = span_union(&lifted, perp, TOL_KER)?;
        let direct = nullspace_scaled(&(inst.u() - &id * linop::re(sign)), TOL_KER, 1.0);
        let gap = projector_distance(&assembled, &direct);
        if gap > SUBSPACE_TOL || assembled.dim() != lifted.dim() + perp.dim() {
            return Err(Error::Consistency(format!(
                "ker(U {} 1): assembled dimension {}, direct dimension {}, projector distance {gap:.3e}",
                if sign > 0.0 { "-" } else { "+" },
                assembled.dim(),
                direct.dim()
            )));
        }
        out.push(assembled);
    }
    let minus = out.pop().expect("two kernels");
    let plus = out.pop().expect("two kernels");
    Ok((plus, minus))
}

#[derive(Debug, Clone)]
pub struct GeneratorDecomposition {
    pub h: Operator,
    /// Orthonormal basis of `D_1^+`, columns `d_+^* f_k`.
    pub b_plus: Operator,
    pub b_minus: Operator,
    pub b_ker_plus: Operator,
    pub b_ker_minus: Operator,
    /// `theta(lambda_k)`, in `(0, pi)`.
    pub spectrum_plus: Vec<f64>,
    /// `2pi - theta(lambda_k)`, in `(pi, 2pi)`.
    pub spectrum_minus: Vec<f64>,
}

impl GeneratorDecomposition {
    /// `[dim D_1^+, dim D_1^-, dim ker(U - 1), dim ker(U + 1)]`.
    pub fn block_dims(&self) -> [usize; 4] {
        [
            self.b_plus.ncols(),
            self.b_minus.ncols(),
            self.b_ker_plus.ncols(),
            self.b_ker_minus.ncols(),
        ]
    }

    pub fn blocks(&self) -> [(&'static str, &Operator); 4] {
        [
            ("D1_plus", &self.b_plus),
            ("D1_minus", &self.b_minus),
            ("ker(U-1)", &self.b_ker_plus),
            ("ker(U+1)", &self.b_ker_minus),
        ]
    }

    /// Eigenvalues of `H` with the matching orthonormal eigenvectors as columns.
    pub fn eigenpairs(&self) -> (Vec<f64>, Operator) {
        let n = self.b_plus.nrows();
        let mut values = Vec::with_capacity(n);
        values.extend_from_slice(&self.spectrum_plus);
        values.extend_from_slice(&self.spectrum_minus);
        values.extend(std::iter::repeat_n(0.0, self.b_ker_plus.ncols()));
        values.extend(std::iter::repeat_n(PI, self.b_ker_minus.ncols()));
        let mut basis = Operator::zeros(n, values.len());
        let mut col = 0;
        for (_, b) in self.blocks() {
            basis.columns_mut(col, b.ncols()).copy_from(b);
            col += b.ncols();
        }
        (values, basis)
    }

    /// Rebuilds `H` with one eigenvalue shifted by `delta`, keeping the bases.
    pub fn with_shifted_eigenvalue(&self, index: usize, delta: f64) -> GeneratorDecomposition {
        let (mut values, basis) = self.eigenpairs();
        values[index] += delta;
        let mut out = self.clone();
        out.h = assemble_h(&values, &basis);
        out
    }
}

fn assemble_h(values: &[f64], basis: &Operator) -> Operator {
    let mut scaled = basis.clone();
    for (k, &v) in values.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    let h = scaled * basis.adjoint();
    (&h + h.adjoint()) * linop::re(0.5)
}

/// `H = sum theta u_k^+ u_k^+^* + sum (2pi - theta) u_k^- u_k^-^* + pi P_{ker(U+1)}`.
pub fn build_generator(
    inst: &WalkInstance,
    dpm: &DpmOperators,
    kernels: &(Subspace, Subspace),
) -> Result<GeneratorDecomposition> {
    let thetas: Vec<f64> = dpm
        .interior_values
        .iter()
        .map(|&l| arccos_clamped(l).expect("interior eigenvalue lies in (-1, 1)"))
        .collect();
    let gen = GeneratorDecomposition {
        h: Operator::zeros(0, 0),
        b_plus: dpm.plus_basis(),
        b_minus: dpm.minus_basis(),
        b_ker_plus: kernels.0.basis().clone(),
        b_ker_minus: kernels.1.basis().clone(),
        spectrum_plus: thetas.clone(),
        spectrum_minus: thetas.iter().map(|t| 2.0 * PI - t).collect(),
    };
    let total: usize = gen.block_dims().iter().sum();
    if total != inst.dim_h() {
        return Err(Error::Consistency(format!(
            "generator blocks {:?} sum to {total}, expected {}",
            gen.block_dims(),
            inst.dim_h()
        )));
    }
    let (values, basis) = gen.eigenpairs();
    Ok(GeneratorDecomposition { h: assemble_h(&values, &basis), ..gen })
}

/// Eigenvalue classes of `H` by position in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Arc {
    Upper,
    Lower,
    Boundary,
}

fn classify_angle(x: f64, margin: f64) -> Arc {
    if x.abs() <= margin || (x - PI).abs() <= margin {
        Arc::Boundary
    } else if x < PI {
        Arc::Upper
    } else {
        Arc::Lower
    }
}

/// `e^{iH} = U`, block invariance, block spectra and `sigma(H) ⊂ [0, 2pi)`,
/// all through the eigendecomposition of `H` itself.
pub fn verify_generator(inst: &WalkInstance, gen: &GeneratorDecomposition) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = inst.dim_h();
    let tol = IDENTITY_TOL * n.max(1) as f64;
    r.check("h-hermitian", "H", linop::hermiticity_defect(&gen.h), 1e-12 * n.max(1) as f64);
    let hdec = match hermitian_eig(&gen.h) {
        Ok(d) => d,
        Err(e) => {
            r.violate("h-eig", e.to_string(), f64::INFINITY);
            return r;
        }
    };
    match exp_i_hermitian(&gen.h) {
        Ok(e) => {
            r.check("exp-ih", "||e^{iH} - U||", distance(&e, inst.u()), tol);
        }
        Err(e) => r.violate("exp-ih", e.to_string(), f64::INFINITY),
    }
    let u = inst.u();
    let mut completeness = Operator::zeros(n, n);
    for (name, b) in gen.blocks() {
        let p = b * b.adjoint();
        r.check("block-invariance", name, distance(&(u * &p), &(&p * u)), tol);
        completeness += p;
    }
    r.check("block-completeness", "sum of block projectors", distance(&completeness, &Operator::identity(n, n)), tol);

    let margin = 1e-9;
    for (name, b, lo, hi) in [
        ("D1_plus", &gen.b_plus, 0.0, PI),
        ("D1_minus", &gen.b_minus, PI, 2.0 * PI),
    ] {
        if b.ncols() == 0 {
            continue;
        }
        let rayleigh = b.adjoint() * &gen.h * b;
        let leak = (&gen.h * b - b * &rayleigh).norm();
        r.check("block-spectrum-invariance", name, leak, tol);
        match hermitian_eig(&rayleigh) {
            Ok(d) => {
                for x in d.eigenvalues {
                    let outside = if x <= lo { lo - x + margin } else if x >= hi { x - hi + margin } else { 0.0 };
                    r.check("block-spectrum-interval", format!("{name}: {x:.12}"), outside, 0.0);
                }
            }
            Err(e) => r.violate("block-spectrum-interval", e.to_string(), f64::INFINITY),
        }
    }
    for (name, b, target) in [("ker(U-1)", &gen.b_ker_plus, 0.0), ("ker(U+1)", &gen.b_ker_minus, PI)] {
        let id = Operator::identity(b.ncols(), b.ncols());
        let rayleigh = b.adjoint() * &gen.h * b;
        r.check("block-spectrum-interval", name, distance(&rayleigh, &(id * linop::re(target))), tol);
    }
    for &x in &hdec.eigenvalues {
        let outside = if x < -margin { -x } else if x >= 2.0 * PI - margin { x - 2.0 * PI + margin } else { 0.0 };
        r.check("h-spectrum-range", format!("{x:.12}"), outside, 0.0);
    }
    r
}

/// `f_n = d_+ U^n psi_0` solves `(f_{n+1} + f_{n-1}) / 2 = T f_n` for
/// `1 <= n < n_max`, after projecting `psi_0` onto `D_1^+`.
pub fn wave_equation_check(
    inst: &WalkInstance,
    dpm: &DpmOperators,
    psi0: &State,
    n_max: usize,
) -> Result<ValidationReport> {
    if psi0.len() != inst.dim_h() {
        return Err(Error::Dimension(format!(
            "state of length {} for a {}-dimensional walk",
            psi0.len(),
            inst.dim_h()
        )));
    }
    let projected = dpm.d_plus.adjoint() * (&dpm.d_plus * psi0);
    let norm = projected.norm();
    if norm <= 1e-12 * psi0.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Domain("initial state has no component in D_1^+".into()));
    }
    let mut psi = projected / linop::re(norm);
    let mut f = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        f.push(&dpm.d_plus * &psi);
        if n < n_max {
            psi = inst.u() * psi;
        }
    }
    let mut r = ValidationReport::new();
    let mut worst = (0.0f64, 0);
    for n in 1..n_max {
        let lhs = (&f[n + 1] + &f[n - 1]) * linop::re(0.5);
        let residual = (lhs - inst.t() * &f[n]).norm();
        if residual > worst.0 {
            worst = (residual, n);
        }
    }
    r.check("wave-equation", format!("max over n at n={}", worst.1), worst.0, 1e-9);
    Ok(r)
}

/// Product identities of `d_A`, `d_B` and `e^{± i theta(T)}`, the vanishing
/// of `d_±` on `D_0 ⊕ D^⊥`, and the pseudo-inverse route to `d_±`.
pub fn verify_identities(inst: &WalkInstance, dpm: &DpmOperators, atlas: &SubspaceAtlas) -> ValidationReport {
    let mut r = dpm.check_invariants();
    let n = inst.dim_h();
    let k = inst.dim_k();
    let tol = IDENTITY_TOL * n.max(1) as f64;
    let phase = &dpm.phase_t;
    let d_a = inst.d_a();
    let d_b = inst.d_b();
    let (x_plus, x_minus) = unnormalized_dpm(inst, dpm);
    let y_plus = d_a.adjoint() - d_b.adjoint() * phase;
    let y_minus = d_a.adjoint() * phase - d_b.adjoint();
    let t = inst.t();
    let two_one_minus_t2 = (Operator::identity(k, k) - t * t) * linop::re(2.0);
    r.check("product-identity", "(i) mixed +-", (&x_plus * &y_minus).norm(), tol);
    r.check("product-identity", "(ii) mixed -+", (&x_minus * &y_plus).norm(), tol);
    r.check("product-identity", "(iii) matched +", distance(&(&x_plus * &y_plus), &two_one_minus_t2), tol);
    r.check("product-identity", "(iv) matched -", distance(&(&x_minus * &y_minus), &two_one_minus_t2), tol);

    let boundary = span_union(&atlas.d0(), &atlas.d_perp, TOL_KER).expect("same ambient space");
    r.check("boundary-annihilation", "d_A - e^{-i theta(T)} d_B", (&x_plus * boundary.basis()).norm(), 1e-9);
    r.check("boundary-annihilation", "e^{-i theta(T)} d_A - d_B", (&x_minus * boundary.basis()).norm(), 1e-9);
    r.check("boundary-annihilation", "d_+", (&dpm.d_plus * boundary.basis()).norm(), 1e-9);
    r.check("boundary-annihilation", "d_-", (&dpm.d_minus * boundary.basis()).norm(), 1e-9);

    let separated = dpm.interior_values.iter().all(|l| 1.0 - l * l >= CROSS_CHECK_GAP);
    if separated {
        if let Ok(tdec) = hermitian_eig(t) {
            let g = apply_function(&tdec, |x| match Band::classify(x, tdec.tol_ker) {
                Band::Interior => Some(linop::re(1.0 / (2.0 * (1.0 - x * x)).sqrt())),
                _ => Some(linop::re(0.0)),
            });
            if let Ok(g) = g {
                r.check("matrix-route", "d_+", distance(&(&g * &x_plus), &dpm.d_plus), 1e-8 * n as f64);
                r.check("matrix-route", "d_-", distance(&(&g * &x_minus), &dpm.d_minus), 1e-8 * n as f64);
            }
        }
    }
    r
}

/// Eigenvectors of `H` in `(0, pi)` span `d_+^*` of the interior eigenvectors
/// of `T`, those in `(pi, 2pi)` span `d_-^*` of them, and those at `0` or
/// `pi` span `ker(U^2 - 1)` as computed from `U`.
pub fn verify_eigenspace_classes(inst: &WalkInstance, dpm: &DpmOperators, gen: &GeneratorDecomposition) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = inst.dim_h();
    let hdec = match hermitian_eig(&gen.h) {
        Ok(d) => d,
        Err(e) => {
            r.violate("eigenspace-classes", e.to_string(), f64::INFINITY);
            return r;
        }
    };
    let pick = |class| {
        let idx: Vec<usize> = (0..n).filter(|&k| classify_angle(hdec.eigenvalues[k], 1e-7) == class).collect();
        Subspace::from_orthonormal(hdec.eigenvectors.select_columns(&idx))
    };
    let id = Operator::identity(n, n);
    let u2 = inst.u() * inst.u();
    for (name, class, expected) in [
        ("(0, pi)", Arc::Upper, Subspace::from_orthonormal(dpm.plus_basis())),
        ("(pi, 2pi)", Arc::Lower, Subspace::from_orthonormal(dpm.minus_basis())),
        ("{0, pi}", Arc::Boundary, nullspace_scaled(&(u2 - id), TOL_KER, 1.0)),
    ] {
        let got = pick(class);
        r.require("eigenspace-class-dimension", format!("{name}: {} vs {}", got.dim(), expected.dim()), got.dim() == expected.dim());
        r.check("eigenspace-class", name, projector_distance(&got, &expected), SUBSPACE_TOL);
    }
    r
}

#[cfg(test)]
mod tests;
