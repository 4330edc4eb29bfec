//! The subspace atlas of a walk instance and the spectrum of `U` predicted
//! from the spectrum of `T`, checked against `U` by nullspace dimensions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{
    self, arccos_clamped, hermitian_eig, intersect_subspaces, nullspace_scaled, orth_complement,
    projector_distance, span_union, Band, Operator, SpectralDecomposition, Subspace, TOL_KER,
};
use crate::report::ValidationReport;
use crate::sim::{cluster_indices, CLUSTER_GAP};
use crate::szegedy::WalkInstance;

/// Tolerance for comparing subspaces obtained by different routes.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// Relative singular-value cutoff for `dim ker(U - z)`.
pub const VERIFY_TOL: f64 = 1e-8;
/// Predicted angles closer than this are checked as one point.
pub const ANGLE_MERGE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SubspaceAtlas {
    /// `Ran(d_A^* d_A)`.
    pub a: Subspace,
    pub a_perp: Subspace,
    /// `ker(S - 1)`.
    pub s_plus: Subspace,
    /// `ker(S + 1)`.
    pub s_minus: Subspace,
    /// `ker d_A ∩ ker d_B`.
    pub d_perp: Subspace,
    /// `A^⊥ ∩ ker(S + 1)`, where `U = 1`.
    pub d_perp_plus: Subspace,
    /// `A^⊥ ∩ ker(S - 1)`, where `U = -1`.
    pub d_perp_minus: Subspace,
    /// `d_A^* ker(T - 1)`.
    pub d0_plus: Subspace,
    /// `d_A^* ker(T + 1)`.
    pub d0_minus: Subspace,
    /// `ker(U^2 - 1)^⊥`.
    pub d1: Subspace,
    pub m_plus: usize,
    pub m_minus: usize,
}

impl SubspaceAtlas {
    pub fn dim_h(&self) -> usize {
        self.a.ambient()
    }

    /// `D_0 = D_0^+ ⊕ D_0^-`.
    pub fn d0(&self) -> Subspace {
        direct_sum(&self.d0_plus, &self.d0_minus)
    }

    /// Dimension bookkeeping, orthogonality, cross-route agreement and
    /// `U`-invariance of the atlas.
    pub fn check_invariants(&self, inst: &WalkInstance) -> ValidationReport {
        let mut r = ValidationReport::new();
        let n = self.dim_h();
        let u = inst.u();

        r.require(
            "d-perp-split",
            format!("{} = {} + {}", self.d_perp.dim(), self.m_plus, self.m_minus),
            self.d_perp.dim() == self.m_plus + self.m_minus,
        );
        let split = direct_sum(&self.d_perp_plus, &self.d_perp_minus);
        r.check("d-perp-split-projector", "D_perp", projector_distance(&self.d_perp, &split), SUBSPACE_TOL);

        let a_perp_route = orth_complement(&self.a, TOL_KER);
        r.check("a-perp-routes", "A_perp", projector_distance(&self.a_perp, &a_perp_route), SUBSPACE_TOL);
        let kernel_route = intersect_subspaces(
            &nullspace_scaled(inst.d_a(), TOL_KER, 1.0),
            &nullspace_scaled(&inst.d_b(), TOL_KER, 1.0),
            TOL_KER,
        );
        match kernel_route {
            Ok(k) => {
                r.check("d-perp-kernels", "ker d_A ∩ ker d_B", projector_distance(&self.d_perp, &k), SUBSPACE_TOL);
            }
            Err(e) => r.violate("d-perp-kernels", e.to_string(), f64::INFINITY),
        }

        for (name, x) in [("D0_plus", &self.d0_plus), ("D0_minus", &self.d0_minus)] {
            r.check("d0-isometric-image", name, x.orthonormality_defect(), 1e-10);
        }
        let total = self.d1.dim() + self.d0_plus.dim() + self.d0_minus.dim() + self.m_plus + self.m_minus;
        r.require("dimension-identity", format!("{total} vs {n}"), total == n);

        for (name, x, y) in [
            ("D0_plus ⊥ D_perp_plus", &self.d0_plus, &self.d_perp_plus),
            ("D0_minus ⊥ D_perp_minus", &self.d0_minus, &self.d_perp_minus),
            ("D0 ⊥ D_perp", &self.d0(), &self.d_perp),
            ("D1 ⊥ D0", &self.d1, &self.d0()),
            ("D1 ⊥ D_perp", &self.d1, &self.d_perp),
        ] {
            r.check("orthogonality", name, (x.basis().adjoint() * y.basis()).norm(), 1e-9);
        }

        let id = Operator::identity(n, n);
        for (name, sign, d0, dp) in [
            ("ker(U-1)", 1.0, &self.d0_plus, &self.d_perp_plus),
            ("ker(U+1)", -1.0, &self.d0_minus, &self.d_perp_minus),
        ] {
            let direct = nullspace_scaled(&(u - &id * linop::re(sign)), TOL_KER, 1.0);
            let assembled = direct_sum(d0, dp);
            r.check("kernel-decomposition", name, projector_distance(&direct, &assembled), SUBSPACE_TOL);
        }

        for (name, x) in [("D1", &self.d1), ("D0", &self.d0()), ("D_perp", &self.d_perp)] {
            let p = x.projector();
            r.check("u-invariance", name, ((&id - &p) * u * &p).norm(), 1e-9);
        }
        r
    }
}

/// Span of two subspaces known to be orthogonal.
fn direct_sum(x: &Subspace, y: &Subspace) -> Subspace {
    span_union(x, y, TOL_KER).expect("subspaces share the ambient space")
}

pub fn discriminant_spectrum(inst: &WalkInstance) -> Result<SpectralDecomposition> {
    hermitian_eig(inst.t())
}

pub fn boundary_subspaces(inst: &WalkInstance) -> Result<SubspaceAtlas> {
    let tdec = discriminant_spectrum(inst)?;
    Ok(boundary_subspaces_with(inst, &tdec))
}

/// Kernels of `S ∓ 1`, `U^2 - 1` and `[d_A; d_B]` use an absolute cutoff:
/// these operators have unit scale even when they vanish numerically.
pub fn boundary_subspaces_with(inst: &WalkInstance, tdec: &SpectralDecomposition) -> SubspaceAtlas {
    let n = inst.dim_h();
    let id = Operator::identity(n, n);
    let d_a = inst.d_a();
    let a = Subspace::from_orthonormal(d_a.adjoint());
    let a_perp = nullspace_scaled(d_a, TOL_KER, 1.0);
    let s_plus = nullspace_scaled(&(inst.s() - &id), TOL_KER, 1.0);
    let s_minus = nullspace_scaled(&(inst.s() + &id), TOL_KER, 1.0);
    let mut stacked = Operator::zeros(2 * inst.dim_k(), n);
    stacked.rows_mut(0, inst.dim_k()).copy_from(d_a);
    stacked.rows_mut(inst.dim_k(), inst.dim_k()).copy_from(&inst.d_b());
    let d_perp = nullspace_scaled(&stacked, TOL_KER, 1.0);
    let d_perp_plus = intersect_subspaces(&a_perp, &s_minus, TOL_KER).expect("same ambient");
    let d_perp_minus = intersect_subspaces(&a_perp, &s_plus, TOL_KER).expect("same ambient");
    let lift = |band| {
        let (_, f) = tdec.band_pairs(band);
        Subspace::from_orthonormal(d_a.adjoint() * f)
    };
    let d0_plus = lift(Band::PlusOne);
    let d0_minus = lift(Band::MinusOne);
    let u2 = inst.u() * inst.u();
    let d1 = orth_complement(&nullspace_scaled(&(u2 - &id), TOL_KER, 1.0), TOL_KER);
    SubspaceAtlas {
        m_plus: d_perp_plus.dim(),
        m_minus: d_perp_minus.dim(),
        a,
        a_perp,
        s_plus,
        s_minus,
        d_perp,
        d_perp_plus,
        d_perp_minus,
        d0_plus,
        d0_minus,
        d1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    MappedFromLambda,
    PlusCorrection,
    MinusCorrection,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::MappedFromLambda => "mapped-from-lambda",
            Provenance::PlusCorrection => "plus-correction",
            Provenance::MinusCorrection => "minus-correction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// `xi` in `[0, 2pi)`; the eigenvalue is `e^{i xi}`.
    pub angle: f64,
    pub multiplicity: usize,
    pub provenance: Provenance,
}

impl SpectralLine {
    pub fn eigenvalue(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumPrediction {
    pub dim_h: usize,
    pub lines: Vec<SpectralLine>,
}

impl SpectrumPrediction {
    pub fn total_multiplicity(&self) -> usize {
        self.lines.iter().map(|l| l.multiplicity).sum()
    }

    /// Lines within `tol` of each other merged into `(angle, multiplicity)`.
    pub fn merged(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for l in &self.lines {
            match out.last_mut() {
                Some((a, m)) if (l.angle - *a).abs() <= tol => *m += l.multiplicity,
                _ => out.push((l.angle, l.multiplicity)),
            }
        }
        out
    }

    pub fn check_invariants(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        let total = self.total_multiplicity();
        r.require("multiplicity-sum", format!("{total} vs {}", self.dim_h), total == self.dim_h);
        r.require(
            "angles-sorted",
            "lines",
            self.lines.windows(2).all(|w| w[0].angle <= w[1].angle),
        );
        for l in &self.lines {
            r.require("angle-range", format!("{}", l.angle), (0.0..2.0 * PI).contains(&l.angle));
            if l.provenance == Provenance::MappedFromLambda && l.angle > 0.0 && l.angle != PI {
                let partner = 2.0 * PI - l.angle;
                let found = self.lines.iter().any(|p| {
                    p.provenance == Provenance::MappedFromLambda
                        && (p.angle - partner).abs() <= 1e-12
                        && p.multiplicity == l.multiplicity
                });
                r.require("conjugate-pair", format!("{}", l.angle), found);
            }
        }
        r
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("angle,re,im,multiplicity,provenance\n");
        for l in &self.lines {
            let z = l.eigenvalue();
            writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{},{}",
                l.angle,
                z.re,
                z.im,
                l.multiplicity,
                l.provenance.as_str()
            )
            .expect("writing to a String");
        }
        s
    }
}

/// `sigma(U)` from `sigma(T)` and the correction dimensions `M_±`.
pub fn mapped_spectrum(tdec: &SpectralDecomposition, atlas: &SubspaceAtlas) -> Result<SpectrumPrediction> {
    let mut lines = Vec::new();
    for cluster in cluster_indices(&tdec.eigenvalues, CLUSTER_GAP) {
        let m = cluster.len();
        let lambda = cluster.iter().map(|&i| tdec.eigenvalues[i]).sum::<f64>() / m as f64;
        let band = tdec.bands[cluster[0]];
        if cluster.iter().any(|&i| tdec.bands[i] != band) {
            return Err(Error::Domain(format!(
                "eigenvalue cluster near {lambda} straddles a band boundary"
            )));
        }
        let mut push = |angle| lines.push(SpectralLine { angle, multiplicity: m, provenance: Provenance::MappedFromLambda });
        match band {
            Band::PlusOne => push(0.0),
            Band::MinusOne => push(PI),
            Band::Interior => {
                let theta = arccos_clamped(lambda)
                    .ok_or_else(|| Error::Domain(format!("eigenvalue {lambda} outside [-1, 1]")))?;
                push(theta);
                push(2.0 * PI - theta);
            }
            Band::Other => {
                return Err(Error::Domain(format!("discriminant eigenvalue {lambda} outside [-1, 1]")))
            }
        }
    }
    if atlas.m_plus > 0 {
        lines.push(SpectralLine { angle: 0.0, multiplicity: atlas.m_plus, provenance: Provenance::PlusCorrection });
    }
    if atlas.m_minus > 0 {
        lines.push(SpectralLine { angle: PI, multiplicity: atlas.m_minus, provenance: Provenance::MinusCorrection });
    }
    lines.sort_by(|a, b| a.angle.total_cmp(&b.angle).then(a.provenance.cmp(&b.provenance)));
    Ok(SpectrumPrediction { dim_h: atlas.dim_h(), lines })
}

/// `dim ker(U - e^{i xi})` at every predicted point, plus total-count
/// conservation so no eigenvalue can be left unpredicted.
pub fn verify_spectral_mapping(inst: &WalkInstance, pred: &SpectrumPrediction) -> ValidationReport {
    let mut r = ValidationReport::new();
    let n = inst.dim_h();
    let total = pred.total_multiplicity();
    r.require("total-multiplicity", format!("{total} vs {n}"), total == n);
    let id = Operator::identity(n, n);
    for (angle, m) in pred.merged(ANGLE_MERGE) {
        let shifted = inst.u() - &id * Complex64::from_polar(1.0, angle);
        let k = nullspace_scaled(&shifted, VERIFY_TOL, 1.0).dim();
        r.require("eigenspace-dimension", format!("xi={angle:.12}: predicted {m}, found {k}"), k == m);
    }
    r
}
