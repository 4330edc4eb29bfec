//! Cyclic Jacobi kernels for dense complex matrices.
//!
//! Both routines work on 2x2 Hermitian pivots. The unitary `G` returned by
//! [`pivot`] satisfies `G^* [[a_pp, a_pq], [conj(a_pq), a_qq]] G = diag`.

use nalgebra::DMatrix;
use num_complex::Complex64;

const MAX_SWEEPS: usize = 80;

/// Entries of the 2x2 rotation `[[g_pp, g_pq], [g_qp, g_qq]]`.
#[derive(Clone, Copy)]
struct Rotation {
    pp: Complex64,
    pq: Complex64,
    qp: Complex64,
    qq: Complex64,
}

fn pivot(app: f64, aqq: f64, apq: Complex64) -> Rotation {
    let r = apq.norm();
    let phase = apq / r;
    let phase = phase / phase.norm();
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
    Rotation {
        pp: Complex64::new(c, 0.0),
        pq: Complex64::new(s, 0.0),
        qp: -phase.conj() * s,
        qq: phase.conj() * c,
    }
}

/// Right-multiplies columns `p`, `q` of `m` by the rotation.
fn rotate_columns(m: &mut DMatrix<Complex64>, p: usize, q: usize, g: Rotation) {
    for k in 0..m.nrows() {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * g.pp + mq * g.qp;
        m[(k, q)] = mp * g.pq + mq * g.qq;
    }
}

/// Left-multiplies rows `p`, `q` of `m` by the adjoint of the rotation.
fn rotate_rows_adjoint(m: &mut DMatrix<Complex64>, p: usize, q: usize, g: Rotation) {
    for k in 0..m.ncols() {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = g.pp.conj() * mp + g.qp.conj() * mq;
        m[(q, k)] = g.pq.conj() * mp + g.qq.conj() * mq;
    }
}

/// Eigenvalues (unsorted) and eigenvector columns of a Hermitian matrix.
///
/// The input is assumed Hermitian; only its Hermitian part is meaningful.
pub(crate) fn hermitian_jacobi(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let scale = m.norm();
    if n == 0 || scale == 0.0 {
        return ((0..n).map(|i| m[(i, i)].re).collect(), v);
    }
    let threshold = f64::EPSILON * scale / n as f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.norm() <= threshold {
                    continue;
                }
                rotated = true;
                let g = pivot(m[(p, p)].re, m[(q, q)].re, apq);
                rotate_columns(&mut m, p, q, g);
                rotate_rows_adjoint(&mut m, p, q, g);
                rotate_columns(&mut v, p, q, g);
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
            }
        }
        if !rotated {
            break;
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), v)
}

/// One-sided (Hestenes) Jacobi SVD of an `m x n` matrix.
///
/// Returns `(sigma, w, v)` with `a v = w`, `v` unitary `n x n`, and the
/// columns of `w` mutually orthogonal with norms `sigma`. Singular values
/// are accurate to roughly `eps * ||a||` in absolute terms, so tiny
/// singular values can be told apart from zero far below `sqrt(eps)`.
pub(crate) fn one_sided_jacobi(
    a: &DMatrix<Complex64>,
) -> (Vec<f64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let (rows, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let tol = f64::EPSILON * (rows.max(1) as f64);
    // Columns below this squared norm are numerical zeros and stay put.
    let floor = (f64::EPSILON * a.norm()).powi(2) * 1e-4;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta) = (0.0, 0.0);
                let mut gamma = Complex64::new(0.0, 0.0);
                for k in 0..rows {
                    let wp = w[(k, p)];
                    let wq = w[(k, q)];
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                if alpha <= floor || beta <= floor || gamma.norm() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let g = pivot(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, g);
                rotate_columns(&mut v, p, q, g);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = (0..n).map(|j| w.column(j).norm()).collect();
    (sigma, w, v)
}
