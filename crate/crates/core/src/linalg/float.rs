//! Floating-point helpers on top of nalgebra's SVD.

use nalgebra::DMatrix;

/// Right kernel of `a`, returned as orthonormal columns. A singular value
/// counts as zero when it is at most `rel_tol` times the largest one.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    kernel(a, |smax| rel_tol * smax)
}

/// Right kernel with the cutoff `tol * max(1, largest)` used by
/// [`rank_floor`].
pub fn nullspace_floor(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    kernel(a, |smax| tol * smax.max(1.0))
}

fn kernel(a: &DMatrix<f64>, cutoff: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad so the SVD exposes a full n x n right factor.
    let padded = if a.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = cutoff(smax);
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| smax == 0.0 || s <= cutoff)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    a.ncols() - nullspace(a, rel_tol).ncols()
}

/// Rank with an absolute floor: singular values at most
/// `tol * max(1, largest)` are treated as zero.
pub fn rank_floor(a: &DMatrix<f64>, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let s = a.clone().svd(false, false).singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Orthonormal basis of the column span of `n`, chosen independently of
/// how `n` parametrizes it: Gram-Schmidt on the columns of the orthogonal
/// projector onto the span, taken in index order.
pub fn canonical_basis(n: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = n.ncols();
    if dim == 0 {
        return DMatrix::zeros(n.nrows(), 0);
    }
    let proj = n * n.transpose();
    let mut out: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(dim);
    // Residual columns of the remaining projector sum (in squares) to the
    // remaining dimension, so some column always clears this threshold.
    for c in 0..proj.ncols() {
        if out.len() == dim {
            break;
        }
        let mut v = proj.column(c).clone_owned();
        for _ in 0..2 {
            for b in &out {
                let d = b.dot(&v);
                v -= b * d;
            }
        }
        let norm = v.norm();
        if norm > 1e-3 {
            out.push(v / norm);
        }
    }
    for b in out.iter_mut() {
        // Sign convention: first entry above noise is positive.
        if let Some(x) = b.iter().find(|x| x.abs() > 1e-9) {
            if *x < 0.0 {
                *b = -b.clone();
            }
        }
    }
    DMatrix::from_columns(&out)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&a * &ns)) < 1e-12);
    }

    #[test]
    fn canonical_basis_ignores_parametrization() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let b = DMatrix::from_column_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 2.0, -1.0]);
        let qa = canonical_basis(&a.clone().qr().q());
        let qb = canonical_basis(&b.clone().qr().q());
        assert!(max_abs(&(qa - qb)) < 1e-12);
    }

    #[test]
    fn rank_of_zero_matrix() {
        assert_eq!(rank(&DMatrix::zeros(2, 3), 1e-10), 0);
        assert_eq!(rank_floor(&DMatrix::zeros(2, 3), 1e-8), 0);
    }
}
