//! Finite-dimensional real Lie algebras given by structure constants.

mod structure;

pub use structure::{
    hypothesis_report, is_compact, structure_report, Compactness, HypothesisReport, Ideal,
    StructureReport,
};

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{exact, to_f64, QMatrix, Rational};

/// A real Lie algebra with `[e_i, e_j] = Σ_m c[i][j][m] e_m`.
///
/// Construction goes through [`LieAlgebra::from_table`], which checks
/// antisymmetry and the Jacobi identity exactly, so every value of this
/// type is a genuine Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    name: String,
    basis_labels: Vec<String>,
    dim: usize,
    table: Vec<Rational>,
    table_f64: Vec<f64>,
}

/// Unvalidated structure constants, `entries[(i * dim + j) * dim + m]`.
#[derive(Debug, Clone)]
pub struct RawBracketTable {
    pub name: String,
    pub basis_labels: Vec<String>,
    pub dim: usize,
    pub entries: Vec<Rational>,
}

impl RawBracketTable {
    pub fn zero(name: &str, labels: &[&str]) -> Self {
        let dim = labels.len();
        RawBracketTable {
            name: name.to_string(),
            basis_labels: labels.iter().map(|s| s.to_string()).collect(),
            dim,
            entries: vec![Rational::zero(); dim * dim * dim],
        }
    }

    /// Sets `[e_i, e_j] = coeffs` and `[e_j, e_i] = -coeffs`.
    pub fn set(&mut self, i: usize, j: usize, coeffs: &[Rational]) {
        let d = self.dim;
        for (m, c) in coeffs.iter().enumerate() {
            self.entries[(i * d + j) * d + m] = c.clone();
            self.entries[(j * d + i) * d + m] = -c.clone();
        }
    }
}

pub fn validate_lie_algebra(raw: RawBracketTable) -> Result<LieAlgebra> {
    LieAlgebra::from_table(raw)
}

impl LieAlgebra {
    pub fn from_table(raw: RawBracketTable) -> Result<Self> {
        let d = raw.dim;
        if raw.entries.len() != d * d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d * d,
                found: raw.entries.len(),
            });
        }
        if raw.basis_labels.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: raw.basis_labels.len(),
            });
        }
        let c = |i: usize, j: usize, m: usize| &raw.entries[(i * d + j) * d + m];
        for i in 0..d {
            for j in i..d {
                for m in 0..d {
                    if *c(i, j, m) != -c(j, i, m).clone() {
                        return Err(Error::AntisymmetryViolation { i, j, m });
                    }
                }
            }
        }
        let alg = LieAlgebra {
            table_f64: raw.entries.iter().map(to_f64).collect(),
            name: raw.name,
            basis_labels: raw.basis_labels,
            dim: d,
            table: raw.entries,
        };
        // With antisymmetry in place, triples with a repeated index satisfy
        // Jacobi automatically.
        for i in 0..d {
            for j in i + 1..d {
                for l in j + 1..d {
                    let sum = alg.jacobi_sum(i, j, l);
                    if !exact::vec_is_zero(&sum) {
                        return Err(Error::jacobi(i, j, l, &sum));
                    }
                }
            }
        }
        Ok(alg)
    }

    fn jacobi_sum(&self, i: usize, j: usize, l: usize) -> Vec<Rational> {
        let e = |k: usize| self.basis_vector(k);
        let t1 = self.bracket_unchecked(&e(i), &self.bracket_unchecked(&e(j), &e(l)));
        let t2 = self.bracket_unchecked(&e(j), &self.bracket_unchecked(&e(l), &e(i)));
        let t3 = self.bracket_unchecked(&e(l), &self.bracket_unchecked(&e(i), &e(j)));
        t1.iter()
            .zip(&t2)
            .zip(&t3)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn structure_constant(&self, i: usize, j: usize, m: usize) -> &Rational {
        &self.table[(i * self.dim + j) * self.dim + m]
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn basis_vector(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim];
        v[i] = exact::q(1);
        v
    }

    pub fn is_abelian(&self) -> bool {
        self.table.iter().all(Zero::is_zero)
    }

    /// Same structure constants, ignoring names and labels.
    pub fn same_table(&self, other: &LieAlgebra) -> bool {
        self.dim == other.dim && self.table == other.table
    }

    fn check_len(&self, v: &[impl Sized]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let d = self.dim;
        let mut out = vec![Rational::zero(); d];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let base = (i * d + j) * d;
                let coef = xi * yj;
                for (m, o) in out.iter_mut().enumerate() {
                    let c = &self.table[base + m];
                    if !c.is_zero() {
                        *o += &coef * c;
                    }
                }
            }
        }
        out
    }

    pub fn bracket_f64(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut out = vec![0.0; self.dim];
        self.bracket_f64_into(x, y, &mut out);
        Ok(out)
    }

    /// Float bracket without shape checks; `out` is overwritten.
    pub(crate) fn bracket_f64_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj == 0.0 {
                    continue;
                }
                let coef = xi * yj;
                let row = &self.table_f64[(i * d + j) * d..(i * d + j + 1) * d];
                for (o, c) in out.iter_mut().zip(row) {
                    *o += coef * c;
                }
            }
        }
    }

    pub(crate) fn bracket_vec(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        self.bracket_f64_into(x.as_slice(), y.as_slice(), out.as_mut_slice());
        out
    }

    /// Matrix of `ad(x)`; column `n` is `[x, e_n]`.
    pub fn adjoint_rep(&self, x: &[Rational]) -> Result<QMatrix> {
        self.check_len(x)?;
        let cols: Vec<Vec<Rational>> = (0..self.dim)
            .map(|n| self.bracket_unchecked(x, &self.basis_vector(n)))
            .collect();
        Ok(QMatrix::from_columns(self.dim, &cols))
    }

    pub fn adjoint_rep_f64(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(x)?;
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for n in 0..d {
                for r in 0..d {
                    m[(r, n)] += xi * self.table_f64[(i * d + n) * d + r];
                }
            }
        }
        Ok(m)
    }

    pub(crate) fn ad_basis(&self, i: usize) -> QMatrix {
        self.adjoint_rep(&self.basis_vector(i))
            .expect("basis vector has ambient length")
    }

    pub fn killing_form(&self) -> BilinearForm {
        let d = self.dim;
        let mut k = QMatrix::zeros(d, d);
        // tr(ad e_i ad e_j) = Σ_{m,n} c[i][n][m] c[j][m][n]
        for i in 0..d {
            for j in i..d {
                let mut s = Rational::zero();
                for m in 0..d {
                    for n in 0..d {
                        let a = self.structure_constant(i, n, m);
                        if a.is_zero() {
                            continue;
                        }
                        let b = self.structure_constant(j, m, n);
                        if !b.is_zero() {
                            s += a * b;
                        }
                    }
                }
                k[(i, j)] = s.clone();
                k[(j, i)] = s;
            }
        }
        BilinearForm { matrix: k }
    }

    pub fn is_subalgebra(&self, s: &Subspace) -> bool {
        self.subalgebra_violation(s).is_none()
    }

    /// First basis pair of `s` whose bracket leaves `span(s)`.
    pub fn subalgebra_violation(&self, s: &Subspace) -> Option<(usize, usize)> {
        let basis = s.matrix();
        let r = s.dim();
        for i in 0..r {
            for j in i + 1..r {
                let b = self.bracket_unchecked(&s.basis[i], &s.basis[j]);
                if !exact::in_span(&basis, &b) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Center `{z : [z, x] = 0 ∀x}`, exact.
    pub fn center(&self) -> Subspace {
        let d = self.dim;
        // z ↦ [z, e_n] stacked over n; column i of block n is c[i][n][·].
        let mut rows = Vec::with_capacity(d * d);
        for n in 0..d {
            for m in 0..d {
                rows.push(
                    (0..d)
                        .map(|i| self.structure_constant(i, n, m).clone())
                        .collect(),
                );
            }
        }
        Subspace::new_unchecked(d, QMatrix::from_rows(rows).nullspace())
    }

    /// Direct sum `self ⊕ other` with labels suffixed by factor index.
    pub fn direct_sum(&self, other: &LieAlgebra, name: &str) -> LieAlgebra {
        let (d1, d2) = (self.dim, other.dim);
        let d = d1 + d2;
        let mut labels: Vec<String> = self.basis_labels.iter().map(|l| format!("{l}_1")).collect();
        labels.extend(other.basis_labels.iter().map(|l| format!("{l}_2")));
        let mut entries = vec![Rational::zero(); d * d * d];
        for i in 0..d1 {
            for j in 0..d1 {
                for m in 0..d1 {
                    entries[(i * d + j) * d + m] = self.structure_constant(i, j, m).clone();
                }
            }
        }
        for i in 0..d2 {
            for j in 0..d2 {
                for m in 0..d2 {
                    entries[((i + d1) * d + j + d1) * d + m + d1] =
                        other.structure_constant(i, j, m).clone();
                }
            }
        }
        LieAlgebra::from_table(RawBracketTable {
            name: name.to_string(),
            basis_labels: labels,
            dim: d,
            entries,
        })
        .expect("direct sum of Lie algebras is a Lie algebra")
    }
}

/// A linear subspace of a Lie algebra, spanned by independent columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Rational>>,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(v) = basis.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        let s = Subspace { ambient_dim, basis };
        if s.matrix().rank() != s.basis.len() {
            return Err(Error::InvalidSubspace(
                "basis vectors are linearly dependent".into(),
            ));
        }
        Ok(s)
    }

    pub(crate) fn new_unchecked(ambient_dim: usize, basis: Vec<Vec<Rational>>) -> Self {
        Subspace { ambient_dim, basis }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let basis = indices
            .iter()
            .map(|&i| {
                let mut v = vec![Rational::zero(); ambient_dim];
                v[i] = exact::q(1);
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self::coordinate(ambient_dim, &(0..ambient_dim).collect::<Vec<_>>())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Rational>] {
        &self.basis
    }

    /// `ambient_dim x dim` matrix with the basis as columns.
    pub fn matrix(&self) -> QMatrix {
        QMatrix::from_columns(self.ambient_dim, &self.basis)
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        self.matrix().to_f64()
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        exact::in_span(&self.matrix(), v)
    }
}

/// Symmetric bilinear form on a Lie algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    pub matrix: QMatrix,
}

impl BilinearForm {
    pub fn eval(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let ky = self.matrix.mul_vec(y);
        x.iter()
            .zip(&ky)
            .fold(Rational::zero(), |s, (a, b)| s + a * b)
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.matrix.determinant().is_zero()
    }

    /// Gram matrix of the form on the basis of `s`.
    pub fn restrict(&self, s: &Subspace) -> QMatrix {
        let b = s.matrix();
        b.transpose().mul(&self.matrix).mul(&b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::q;
    use crate::presets;

    fn vq(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn su2_brackets_and_killing() {
        let su2 = presets::su2();
        assert_eq!(
            su2.bracket(&vq(&[1, 0, 0]), &vq(&[0, 1, 0])).unwrap(),
            vq(&[0, 0, 1])
        );
        assert_eq!(
            su2.killing_form().matrix,
            QMatrix::identity(3).scale(&q(-2))
        );
    }

    #[test]
    fn abelian_is_valid_with_zero_killing() {
        let ab = LieAlgebra::from_table(RawBracketTable::zero("r2", &["a", "b"])).unwrap();
        assert!(ab.is_abelian());
        assert!(ab.killing_form().matrix.is_zero());
        assert!(ab.adjoint_rep(&vq(&[3, -1])).unwrap().is_zero());
    }

    #[test]
    fn broken_jacobi_is_rejected_with_cyclic_sum() {
        let mut raw = RawBracketTable::zero("bad", &["e1", "e2", "e3"]);
        raw.set(0, 1, &vq(&[0, 0, 1]));
        raw.set(1, 2, &vq(&[1, 0, 0]));
        raw.set(2, 0, &vq(&[1, 0, 0]));
        match LieAlgebra::from_table(raw) {
            Err(Error::JacobiViolation { i, j, l, sum }) => {
                assert_eq!((i, j, l), (0, 1, 2));
                // [e1,[e2,e3]] + [e2,[e3,e1]] + [e3,[e1,e2]] = 0 - e3 + 0
                assert_eq!(sum, vec!["0", "0", "-1"]);
            }
            other => panic!("expected Jacobi violation, got {other:?}"),
        }
    }

    #[test]
    fn antisymmetry_violation_is_located() {
        let mut raw = RawBracketTable::zero("bad", &["a", "b"]);
        // c[0][1][1] = 1 without the matching c[1][0][1] = -1
        raw.entries[3] = q(1);
        assert_eq!(
            LieAlgebra::from_table(raw).unwrap_err(),
            Error::AntisymmetryViolation { i: 0, j: 1, m: 1 }
        );
    }

    #[test]
    fn bracket_rejects_wrong_length() {
        let su2 = presets::su2();
        assert!(matches!(
            su2.bracket(&vq(&[1, 0]), &vq(&[0, 1, 0])),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(su2.adjoint_rep(&vq(&[1])).is_err());
    }

    #[test]
    fn su2_adjoint_of_e1() {
        let ad = presets::su2().adjoint_rep(&vq(&[1, 0, 0])).unwrap();
        assert_eq!(
            ad,
            QMatrix::from_i64(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]])
        );
    }

    #[test]
    fn subalgebra_tests() {
        let sl2 = presets::sl2r();
        assert!(!sl2.is_subalgebra(&Subspace::coordinate(3, &[1, 2])));
        assert!(sl2.is_subalgebra(&Subspace::coordinate(3, &[0])));
        let line = Subspace::new(3, vec![vq(&[1, 2, -3])]).unwrap();
        assert!(sl2.is_subalgebra(&line));
    }

    #[test]
    fn dependent_subspace_rejected() {
        assert!(Subspace::new(2, vec![vq(&[1, 1]), vq(&[2, 2])]).is_err());
    }

    #[test]
    fn center_of_reductive_algebra() {
        let u1 = presets::u1();
        let g = presets::su2().direct_sum(&u1, "u2");
        let z = g.center();
        assert_eq!(z.dim(), 1);
        assert!(z.contains(&vq(&[0, 0, 0, 1])));
    }
}
