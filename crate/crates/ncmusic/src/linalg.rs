//! Thin wrappers around nalgebra decompositions for dense complex matrices:
//! Hermitian EVD with sorted eigenvalues, SVD with sorted singular values,
//! and an SVD-based pseudo-inverse with a relative cutoff.

use crate::{C64, CMatrix, CVector};

/// Hermitian symmetrization `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let half = C64::new(0.5, 0.0);
    (a + a.adjoint()) * half
}

/// Symmetrization `(A + A^T) / 2` (no conjugation).
pub fn symmetric_part(a: &CMatrix) -> CMatrix {
    let half = C64::new(0.5, 0.0);
    (a + a.transpose()) * half
}

/// Eigendecomposition of a Hermitian matrix. Returns `(values, vectors)`
/// with eigenvalues sorted ascending and eigenvector columns reordered to
/// match. The input is symmetrized first so structural Hermitianity does not
/// depend on the caller.
pub fn hermitian_eigen_ascending(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(a);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Eigenvectors of a Hermitian matrix associated with its `k` smallest
/// eigenvalues, as an orthonormal `n × k` matrix.
pub fn smallest_eigenvectors(a: &CMatrix, k: usize) -> CMatrix {
    let (_, vectors) = hermitian_eigen_ascending(a);
    vectors.columns(0, k).into_owned()
}

/// Economy SVD `a = u diag(sigma) v^H` by one-sided Jacobi, singular values
/// descending. Matrices in this crate are tiny (at most a few dozen rows),
/// where Jacobi is both robust and accurate down to the smallest singular
/// values. (nalgebra's complex SVD silently returns inconsistent factors for
/// some inputs, so it is not used.)
pub fn jacobi_svd(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    if a.nrows() < a.ncols() {
        let (u, sigma, v) = jacobi_svd(&a.adjoint());
        return (v, sigma, u);
    }
    let m = a.nrows();
    let n = a.ncols();
    let mut b = a.clone();
    let mut v = CMatrix::identity(n, n);

    let tol = 1e-15;
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut g = C64::new(0.0, 0.0);
                for r in 0..m {
                    aii += b[(r, i)].norm_sqr();
                    ajj += b[(r, j)].norm_sqr();
                    g += b[(r, i)].conj() * b[(r, j)];
                }
                if g.norm() <= tol * (aii * ajj).sqrt() || g.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                // Unitary 2x2 that zeroes the off-diagonal Gram entry:
                // a phase alignment followed by a real Jacobi rotation.
                let phase = g / C64::new(g.norm(), 0.0);
                let zeta = (ajj - aii) / (2.0 * g.norm());
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                let cs = C64::new(cs, 0.0);
                let sn_p = phase * sn;
                for r in 0..m {
                    let bi = b[(r, i)];
                    let bj = b[(r, j)];
                    b[(r, i)] = cs * bi - sn_p.conj() * bj;
                    b[(r, j)] = sn_p * bi + cs * bj;
                }
                for r in 0..n {
                    let vi = v[(r, i)];
                    let vj = v[(r, j)];
                    v[(r, i)] = cs * vi - sn_p.conj() * vj;
                    v[(r, j)] = sn_p * vi + cs * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| b.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma.first().copied().unwrap_or(0.0);
    let mut u = CMatrix::zeros(m, n);
    let mut null_slots = Vec::new();
    for (col, &j) in order.iter().enumerate() {
        if norms[j] > smax * 1e-14 && norms[j] > 0.0 {
            let scaled = b.column(j) / C64::new(norms[j], 0.0);
            u.column_mut(col).copy_from(&scaled);
        } else {
            null_slots.push(col);
        }
    }
    // Columns annihilated by convergence get an orthonormal completion so
    // the returned factor always has orthonormal columns.
    if !null_slots.is_empty() {
        let filled: Vec<usize> = (0..n).filter(|c| !null_slots.contains(c)).collect();
        let mut basis: Vec<CVector> = filled.iter().map(|&c| u.column(c).into_owned()).collect();
        let mut slot_iter = null_slots.into_iter();
        'candidates: for k in 0..m {
            if basis.len() == n {
                break;
            }
            let mut cand = CVector::zeros(m);
            cand[k] = C64::new(1.0, 0.0);
            for existing in &basis {
                let coeff = existing.dotc(&cand);
                cand -= existing * coeff;
            }
            let norm = cand.norm();
            if norm > 1e-6 {
                let cand = cand / C64::new(norm, 0.0);
                let slot = match slot_iter.next() {
                    Some(s) => s,
                    None => break 'candidates,
                };
                u.column_mut(slot).copy_from(&cand);
                basis.push(cand);
            }
        }
    }

    let v_sorted = CMatrix::from_columns(
        &order.iter().map(|&j| v.column(j).into_owned()).collect::<Vec<_>>(),
    );
    (u, sigma, v_sorted)
}

/// Singular values of `a`, descending.
pub fn singular_values_descending(a: &CMatrix) -> Vec<f64> {
    jacobi_svd(a).1
}

/// Left singular vectors of `a` associated with its `k` largest singular
/// values.
pub fn largest_left_singular_vectors(a: &CMatrix, k: usize) -> CMatrix {
    let (u, _, _) = jacobi_svd(a);
    u.columns(0, k).into_owned()
}

/// Moore-Penrose pseudo-inverse. Singular values below
/// `rel_cutoff * sigma_max` are treated as zero.
pub fn pseudo_inverse(a: &CMatrix, rel_cutoff: f64) -> CMatrix {
    let (u, sigma, v) = jacobi_svd(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = rel_cutoff * smax;
    let mut pinv = CMatrix::zeros(a.ncols(), a.nrows());
    for (i, &s) in sigma.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            pinv += v.column(i) * u.column(i).adjoint() / C64::new(s, 0.0);
        }
    }
    pinv
}

/// Smallest singular value of `a`.
pub fn smallest_singular_value(a: &CMatrix) -> f64 {
    singular_values_descending(a).last().copied().unwrap_or(0.0)
}

/// Frobenius norm of `B^H B - I`; zero for a matrix with orthonormal columns.
pub fn orthonormality_defect(b: &CMatrix) -> f64 {
    let gram = b.adjoint() * b;
    let eye = CMatrix::identity(b.ncols(), b.ncols());
    (gram - eye).norm()
}

/// Numerical rank: number of singular values above `threshold`.
#[cfg(test)]
pub fn rank_with_threshold(a: &CMatrix, threshold: f64) -> usize {
    singular_values_descending(a)
        .iter()
        .filter(|&&s| s > threshold)
        .count()
}
