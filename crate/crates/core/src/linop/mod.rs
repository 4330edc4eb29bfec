//! Dense complex linear algebra: Hermitian eigendecomposition, functional
//! calculus, nullspaces and subspace algebra.

mod jacobi;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::ValidationReport;


pub type Operator = DMatrix<Complex64>;
pub type State = DVector<Complex64>;

/// Relative kernel tolerance used for every kernel and band classification.
pub const TOL_KER: f64 = 1e-9;
/// Eigen-residual tolerance, relative to `||A||`.
pub const TOL_EIG: f64 = 1e-11;
/// Orthonormality tolerance for computed bases.
pub const TOL_ORTH: f64 = 1e-11;
/// Hermiticity tolerance accepted by [`hermitian_eig`], relative to `||A||`.
pub const TOL_HERMITIAN: f64 = 1e-12;
/// How far outside `[-1, 1]` an argument of `arccos` may drift and still be clamped.
pub const ARCCOS_CLAMP: f64 = 1e-9;

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Frobenius norm of `a - b`.
pub fn distance(a: &Operator, b: &Operator) -> f64 {
    (a - b).norm()
}

/// Frobenius norm of `a - a^*`.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    (a - a.adjoint()).norm()
}

/// Frobenius norm of `a^* a - I`.
pub fn unitarity_defect(a: &Operator) -> f64 {
    let n = a.ncols();
    (a.adjoint() * a - Operator::identity(n, n)).norm()
}

/// `arccos` on `[-1, 1]`, clamping arguments that drifted out by at most
/// [`ARCCOS_CLAMP`]. Returns `None` beyond that.
pub fn arccos_clamped(x: f64) -> Option<f64> {
    if x.is_nan() || x.abs() > 1.0 + ARCCOS_CLAMP {
        return None;
    }
    Some(x.clamp(-1.0, 1.0).acos())
}

/// Spectral band of an eigenvalue relative to the interval `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// `|lambda| < 1 - tol_ker`
    Interior,
    PlusOne,
    MinusOne,
    Other,
}

impl Band {
    pub fn classify(lambda: f64, tol_ker: f64) -> Band {
        if (lambda - 1.0).abs() <= tol_ker {
            Band::PlusOne
        } else if (lambda + 1.0).abs() <= tol_ker {
            Band::MinusOne
        } else if lambda.abs() < 1.0 - tol_ker {
            Band::Interior
        } else {
            Band::Other
        }
    }
}

/// Eigenvalues in ascending order with an orthonormal eigenvector family.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: Operator,
    pub bands: Vec<Band>,
    pub tol_ker: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthonormal basis of the eigenvectors tagged with `band`.
    pub fn band_subspace(&self, band: Band) -> Subspace {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| self.bands[k] == band).collect();
        Subspace::from_orthonormal(self.eigenvectors.select_columns(&idx))
    }

    /// `(lambda_k, v_k)` pairs restricted to one band.
    pub fn band_pairs(&self, band: Band) -> (Vec<f64>, Operator) {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| self.bands[k] == band).collect();
        let values = idx.iter().map(|&k| self.eigenvalues[k]).collect();
        (values, self.eigenvectors.select_columns(&idx))
    }

    /// Residual, orthonormality and reconstruction checks against `a`.
    pub fn check_against(&self, a: &Operator) -> ValidationReport {
        let mut report = ValidationReport::new();
        let n = self.dim();
        let scale = a.norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = self.eigenvectors.column(k);
            let r = (a * v - v * re(self.eigenvalues[k])).norm();
            worst = worst.max(r);
        }
        report.check("eig-residual", "max_k", worst, TOL_EIG * scale);
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let orth = (gram - Operator::identity(n, n)).norm();
        report.check("eig-orthonormality", "V^*V - I", orth, TOL_ORTH);
        let rebuilt = apply_function(self, |x| Some(re(x))).unwrap_or_else(|_| a.clone());
        report.check(
            "eig-reconstruction",
            "A - sum lambda v v^*",
            distance(a, &rebuilt),
            TOL_EIG * (n.max(1) as f64) * scale,
        );
        report
    }
}

/// Eigendecomposition of a Hermitian operator using the default kernel tolerance.
pub fn hermitian_eig(a: &Operator) -> Result<SpectralDecomposition> {
    hermitian_eig_with(a, TOL_KER)
}

/// Eigendecomposition of a Hermitian operator; `tol_ker` drives band tags.
///
/// The input is symmetrized before decomposition, so a Hermiticity defect up
/// to `TOL_HERMITIAN * ||a||` is accepted.
pub fn hermitian_eig_with(a: &Operator, tol_ker: f64) -> Result<SpectralDecomposition> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "hermitian_eig needs a square operator, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("operator has non-finite entries".into()));
    }
    let defect = hermiticity_defect(a);
    if defect > TOL_HERMITIAN * a.norm() {
        return Err(Error::Domain(format!(
            "operator is not Hermitian: ||A - A^*|| = {defect:.3e}"
        )));
    }
    let sym = (a + a.adjoint()) * re(0.5);
    let (values, vectors) = jacobi::hermitian_jacobi(&sym);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = vectors.select_columns(&order);
    let bands = eigenvalues
        .iter()
        .map(|&x| Band::classify(x, tol_ker))
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        bands,
        tol_ker,
    })
}

/// `sum_k f(lambda_k) v_k v_k^*`.
///
/// `f` returns `None` where it is undefined; that becomes a domain error.
pub fn apply_function<F>(dec: &SpectralDecomposition, f: F) -> Result<Operator>
where
    F: Fn(f64) -> Option<Complex64>,
{
    let n = dec.dim();
    let mut scaled = dec.eigenvectors.clone();
    for (k, &lambda) in dec.eigenvalues.iter().enumerate() {
        let fk = f(lambda).ok_or_else(|| {
            Error::Domain(format!("function undefined at eigenvalue {lambda:.17e}"))
        })?;
        if !fk.re.is_finite() || !fk.im.is_finite() {
            return Err(Error::Domain(format!(
                "function value not finite at eigenvalue {lambda:.17e}"
            )));
        }
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    Ok(scaled * dec.eigenvectors.adjoint())
}

/// `e^{iH}` for Hermitian `H`, through its own eigendecomposition.
pub fn exp_i_hermitian(h: &Operator) -> Result<Operator> {
    let dec = hermitian_eig(h)?;
    apply_function(&dec, |x| Some(Complex64::from_polar(1.0, x)))
}

/// Orthonormal basis of `{v : ||a v|| <= tol ||a|| ||v||}`.
///
/// Singular values come from a one-sided Jacobi SVD of `a` itself, which
/// resolves them to about `eps ||a||`; going through `a^* a` would limit the
/// usable relative tolerance to about `sqrt(eps)`.
pub fn nullspace(a: &Operator, tol: f64) -> Subspace {
    let (sigma, _, v) = jacobi::one_sided_jacobi(a);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    kernel_columns(&sigma, &v, tol * smax)
}

/// Kernel with the cutoff `tol * scale` on singular values.
///
/// For operators with a natural unit scale (differences of unitaries or of
/// projectors), `scale = 1` keeps a numerically zero operator from being
/// judged against its own rounding noise.
pub fn nullspace_scaled(a: &Operator, tol: f64, scale: f64) -> Subspace {
    let (sigma, _, v) = jacobi::one_sided_jacobi(a);
    kernel_columns(&sigma, &v, tol * scale)
}

fn kernel_columns(sigma: &[f64], v: &Operator, cutoff: f64) -> Subspace {
    let idx: Vec<usize> = (0..sigma.len()).filter(|&j| sigma[j] <= cutoff).collect();
    Subspace::from_orthonormal(v.select_columns(&idx))
}

/// Orthonormal basis of the column space of `a`, dropping directions with
/// singular value at most `tol ||a||`.
pub fn range_space(a: &Operator, tol: f64) -> Subspace {
    let (sigma, w, _) = jacobi::one_sided_jacobi(a);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..sigma.len())
        .filter(|&j| sigma[j] > tol * smax)
        .collect();
    let mut basis = w.select_columns(&idx);
    for (col, &j) in idx.iter().enumerate() {
        let s = sigma[j];
        basis.column_mut(col).iter_mut().for_each(|z| *z /= s);
    }
    Subspace {
        ambient: a.nrows(),
        basis,
    }
}

/// Numerical rank with the same relative threshold as [`range_space`].
pub fn rank(a: &Operator, tol: f64) -> usize {
    let (sigma, _, _) = jacobi::one_sided_jacobi(a);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    sigma.iter().filter(|&&s| s > tol * smax).count()
}

/// A subspace of `C^ambient` carried by an orthonormal basis (possibly empty).
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Operator,
}

impl Subspace {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: Operator) -> Self {
        Subspace {
            ambient: basis.nrows(),
            basis,
        }
    }

    /// Orthonormal basis of the span of arbitrary columns.
    pub fn from_spanning(columns: &Operator, tol: f64) -> Self {
        range_space(columns, tol)
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Operator::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Operator::identity(ambient, ambient),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &Operator {
        &self.basis
    }

    pub fn into_basis(self) -> Operator {
        self.basis
    }

    pub fn projector(&self) -> Operator {
        projector(self)
    }

    pub fn complement(&self, tol: f64) -> Subspace {
        orth_complement(self, tol)
    }

    /// `||B^* B - I||_F` for the stored basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.dim();
        (self.basis.adjoint() * &self.basis - Operator::identity(k, k)).norm()
    }

    /// Image under a linear map, re-orthonormalized.
    pub fn mapped(&self, map: &Operator, tol: f64) -> Subspace {
        if self.dim() == 0 {
            return Subspace::zero(map.nrows());
        }
        Subspace::from_spanning(&(map * &self.basis), tol)
    }
}

/// Orthogonal projector `B B^*` onto `x`.
pub fn projector(x: &Subspace) -> Operator {
    if x.dim() == 0 {
        return Operator::zeros(x.ambient, x.ambient);
    }
    &x.basis * x.basis.adjoint()
}

/// `x^perp`, computed as the kernel of the projector onto `x`.
pub fn orth_complement(x: &Subspace, tol: f64) -> Subspace {
    if x.dim() == 0 {
        return Subspace::full(x.ambient);
    }
    nullspace_scaled(&projector(x), tol, 1.0)
}

fn check_ambient(x: &Subspace, y: &Subspace) -> Result<()> {
    if x.ambient != y.ambient {
        return Err(Error::Dimension(format!(
            "ambient dimensions differ: {} vs {}",
            x.ambient, y.ambient
        )));
    }
    Ok(())
}

/// `x ∩ y` as the kernel of the stacked operator `[I - P_x; I - P_y]`.
pub fn intersect_subspaces(x: &Subspace, y: &Subspace, tol: f64) -> Result<Subspace> {
    check_ambient(x, y)?;
    let n = x.ambient;
    if x.dim() == 0 || y.dim() == 0 {
        return Ok(Subspace::zero(n));
    }
    let id = Operator::identity(n, n);
    let mut stacked = Operator::zeros(2 * n, n);
    stacked.rows_mut(0, n).copy_from(&(&id - projector(x)));
    stacked.rows_mut(n, n).copy_from(&(&id - projector(y)));
    Ok(nullspace_scaled(&stacked, tol, 1.0))
}

/// `x + y` (not necessarily orthogonal) with an orthonormal basis.
pub fn span_union(x: &Subspace, y: &Subspace, tol: f64) -> Result<Subspace> {
    check_ambient(x, y)?;
    if x.dim() + y.dim() == 0 {
        return Ok(Subspace::zero(x.ambient));
    }
    let mut cols = Operator::zeros(x.ambient, x.dim() + y.dim());
    cols.columns_mut(0, x.dim()).copy_from(&x.basis);
    cols.columns_mut(x.dim(), y.dim()).copy_from(&y.basis);
    Ok(Subspace::from_spanning(&cols, tol))
}

/// `||P_x - P_y||_F`; zero exactly when the subspaces coincide.
pub fn projector_distance(x: &Subspace, y: &Subspace) -> f64 {
    distance(&projector(x), &projector(y))
}

/// Serialized form of an operator: `{"rows","cols","re","im"}` with
/// row-major nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Operator> for OperatorJson {
    fn from(a: &Operator) -> Self {
        let (rows, cols) = a.shape();
        let re = (0..rows)
            .map(|i| (0..cols).map(|j| a[(i, j)].re).collect())
            .collect();
        let im = (0..rows)
            .map(|i| (0..cols).map(|j| a[(i, j)].im).collect())
            .collect();
        OperatorJson { rows, cols, re, im }
    }
}

impl TryFrom<&OperatorJson> for Operator {
    type Error = Error;

    fn try_from(j: &OperatorJson) -> Result<Operator> {
        let shape_ok = j.re.len() == j.rows
            && j.im.len() == j.rows
            && j.re.iter().chain(j.im.iter()).all(|r| r.len() == j.cols);
        if !shape_ok {
            return Err(Error::Dimension(format!(
                "operator JSON entries do not match declared shape {}x{}",
                j.rows, j.cols
            )));
        }
        let a = Operator::from_fn(j.rows, j.cols, |i, k| Complex64::new(j.re[i][k], j.im[i][k]));
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("operator JSON has non-finite entries".into()));
        }
        Ok(a)
    }
}

#[cfg(test)]
mod tests;

/// Unitary from a complex Gaussian matrix (entries `(x + iy)/sqrt(2)`,
/// `x, y ~ N(0,1)` drawn column by column) orthonormalized by modified
/// Gram-Schmidt applied twice.
pub fn random_unitary<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Operator {
    use rand_distr::{Distribution, StandardNormal};
    let s = 0.5f64.sqrt();
    let mut q = Operator::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let x: f64 = StandardNormal.sample(rng);
            let y: f64 = StandardNormal.sample(rng);
            q[(i, j)] = Complex64::new(s * x, s * y);
        }
    }
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let qk = q.column(k).into_owned();
                q.column_mut(j).axpy(-proj, &qk, re(1.0));
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).iter_mut().for_each(|z| *z /= norm);
    }
    q
}

/// Largest singular value.
pub fn spectral_norm(a: &Operator) -> f64 {
    let (sigma, _, _) = jacobi::one_sided_jacobi(a);
    sigma.into_iter().fold(0.0, f64::max)
}
