//! The full chain from a walk instance to its generator, plus the combined
//! invariant suite run by `validate` and `fuzz`.

use crate::error::Result;
use crate::generator::{
    build_dpm, build_generator, kernels_of_u, verify_eigenspace_classes, verify_generator,
    verify_identities, DpmOperators, GeneratorDecomposition,
};
use crate::graph::validate_structures;
use crate::linop::{hermitian_eig_with, SpectralDecomposition, State, TOL_KER};
use crate::report::ValidationReport;
use crate::sim::{block_unitarity_check, check_graph_support, Partition};
use crate::spectral_map::{
    boundary_subspaces_with, mapped_spectrum, verify_spectral_mapping, SpectrumPrediction,
    SubspaceAtlas,
};
use crate::szegedy::WalkInstance;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub inst: WalkInstance,
    pub tdec: SpectralDecomposition,
    pub atlas: SubspaceAtlas,
    pub prediction: SpectrumPrediction,
    pub dpm: DpmOperators,
    pub gen: GeneratorDecomposition,
}

impl Analysis {
    pub fn new(inst: WalkInstance) -> Result<Self> {
        Self::with_tol(inst, TOL_KER)
    }

    /// `tol_ker` sets the band classification of the discriminant spectrum.
    pub fn with_tol(inst: WalkInstance, tol_ker: f64) -> Result<Self> {
        let tdec = hermitian_eig_with(inst.t(), tol_ker)?;
        let atlas = boundary_subspaces_with(&inst, &tdec);
        let prediction = mapped_spectrum(&tdec, &atlas)?;
        let dpm = build_dpm(&inst, &tdec);
        let kernels = kernels_of_u(&inst, &tdec, &atlas)?;
        let gen = build_generator(&inst, &dpm, &kernels)?;
        Ok(Analysis { inst, tdec, atlas, prediction, dpm, gen })
    }

    /// The attached partition, or singletons for abstract instances.
    pub fn partition(&self) -> Partition {
        self.inst
            .partition()
            .cloned()
            .unwrap_or_else(|| Partition::singletons(self.inst.dim_h()))
    }

    /// Every structural, spectral and generator check.
    pub fn full_report(&self) -> ValidationReport {
        let mut r = self.inst.check_invariants();
        if let Some(g) = self.inst.graph() {
            r.merge(validate_structures(g, None, None));
            r.merge(check_graph_support(&self.inst));
        }
        r.merge(self.tdec.check_against(self.inst.t()));
        r.merge(self.atlas.check_invariants(&self.inst));
        r.merge(self.prediction.check_invariants());
        r.merge(verify_spectral_mapping(&self.inst, &self.prediction));
        r.merge(verify_generator(&self.inst, &self.gen));
        r.merge(verify_identities(&self.inst, &self.dpm, &self.atlas));
        r.merge(verify_eigenspace_classes(&self.inst, &self.dpm, &self.gen));
        r.merge(block_unitarity_check(self.inst.u(), &self.partition()));
        r
    }

    /// Normalized projection of `psi` onto `D_1^+`, if it has one.
    pub fn project_d1_plus(&self, psi: &State) -> Option<State> {
        let p = self.dpm.d_plus.adjoint() * (&self.dpm.d_plus * psi);
        let n = p.norm();
        (n > 1e-12).then(|| p / crate::linop::re(n))
    }
}
