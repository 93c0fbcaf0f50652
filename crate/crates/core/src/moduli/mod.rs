//! Pre-quotient moduli data: isotropy homomorphisms `χ: h₀ → k`, maps
//! `μ: s → k` in the intertwiner space of `χ`, their curvature, and the
//! type-(1,1) defect `F_J`.
//!
//! `μ` is stored on the complement `s` rather than on `a/h₀`; the two are
//! identified through `proj_s`.

mod solver;

pub use solver::{
    solve_holomorphic_locus, FlatComponent, HolomorphicLocus, LocusPoint, SolverOptions,
    StartFailure, Type11System,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg::{float, to_f64, Solution};
use crate::reductive::{ComplexStructure, ReductiveSplit};

pub const EQUIVARIANCE_TOL: f64 = 1e-10;
pub const HOMOMORPHISM_TOL: f64 = 1e-12;
/// Singular values below this fraction of the largest count as zero when
/// sizing the intertwiner space.
pub const INTERTWINER_RANK_TOL: f64 = 1e-10;

/// Lie algebra homomorphism `χ: h₀ → k` as a `dim k x dim h₀` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LieHomChi {
    matrix: DMatrix<f64>,
}

impl LieHomChi {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn zero(dim_k: usize, dim_h: usize) -> Self {
        LieHomChi {
            matrix: DMatrix::zeros(dim_k, dim_h),
        }
    }

    /// No bracket check. For matrices already known to be homomorphisms, or
    /// for points that are only fingerprinted or canonicalized.
    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        LieHomChi { matrix }
    }

    pub fn image(&self, a: usize) -> DVector<f64> {
        self.matrix.column(a).clone_owned()
    }
}

/// Linear map `μ: s → k` as a `dim k x dim s` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MuMap {
    pub matrix: DMatrix<f64>,
}

impl MuMap {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        MuMap { matrix }
    }

    pub fn zero(dim_k: usize, dim_s: usize) -> Self {
        MuMap {
            matrix: DMatrix::zeros(dim_k, dim_s),
        }
    }

    /// `Σ_a y_a basis_a`.
    pub fn combination(basis: &[MuMap], coords: &[f64], dim_k: usize, dim_s: usize) -> Self {
        let mut m = DMatrix::zeros(dim_k, dim_s);
        for (b, &y) in basis.iter().zip(coords) {
            m += &b.matrix * y;
        }
        MuMap { matrix: m }
    }
}

/// A pair `(χ, μ)` with `μ` in the intertwiner space of `χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantConnectionPoint {
    pub chi: LieHomChi,
    pub mu: MuMap,
}

impl InvariantConnectionPoint {
    pub fn new(split: &ReductiveSplit, k: &LieAlgebra, chi: LieHomChi, mu: MuMap) -> Result<Self> {
        let check = equivariance_check(split, k, &chi, &mu)?;
        if !check.holds {
            return Err(Error::SplitMismatch(format!(
                "mu is not an intertwiner for chi (violation {:e})",
                check.max_violation
            )));
        }
        Ok(InvariantConnectionPoint { chi, mu })
    }

    /// No equivariance check; for pairs that are only compared or
    /// canonicalized.
    pub fn new_unchecked(chi: LieHomChi, mu: MuMap) -> Self {
        InvariantConnectionPoint { chi, mu }
    }

    /// Columns of `χ` followed by columns of `μ`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (dk, r) = self.chi.matrix.shape();
        let ds = self.mu.matrix.ncols();
        let mut m = DMatrix::zeros(dk, r + ds);
        m.columns_mut(0, r).copy_from(&self.chi.matrix);
        m.columns_mut(r, ds).copy_from(&self.mu.matrix);
        m
    }

    pub(crate) fn from_stacked(m: &DMatrix<f64>, r: usize) -> Self {
        let ds = m.ncols() - r;
        InvariantConnectionPoint {
            chi: LieHomChi::from_matrix_unchecked(m.columns(0, r).clone_owned()),
            mu: MuMap::new(m.columns(r, ds).clone_owned()),
        }
    }
}

fn shape_error(what: &str, expected: (usize, usize), found: (usize, usize)) -> Error {
    Error::ShapeMismatch {
        what: what.to_string(),
        expected,
        found,
    }
}

fn check_chi(split: &ReductiveSplit, k: &LieAlgebra, chi: &LieHomChi) -> Result<()> {
    let expected = (k.dim(), split.dim_h());
    if chi.matrix.shape() != expected {
        return Err(shape_error("chi", expected, chi.matrix.shape()));
    }
    Ok(())
}

fn check_mu(split: &ReductiveSplit, k: &LieAlgebra, mu: &MuMap) -> Result<()> {
    let expected = (k.dim(), split.dim_s());
    if mu.matrix.shape() != expected {
        return Err(shape_error("mu", expected, mu.matrix.shape()));
    }
    Ok(())
}

pub fn validate_chi(
    a: &LieAlgebra,
    h0: &Subspace,
    k: &LieAlgebra,
    matrix: DMatrix<f64>,
) -> Result<LieHomChi> {
    let r = h0.dim();
    if matrix.shape() != (k.dim(), r) {
        return Err(shape_error("chi", (k.dim(), r), matrix.shape()));
    }
    let basis = h0.matrix();
    let scale = float::max_abs(&matrix).max(1.0);
    let tol = HOMOMORPHISM_TOL * scale * scale;
    for i in 0..r {
        for j in i + 1..r {
            let br = a.bracket(&h0.basis()[i], &h0.basis()[j])?;
            let coords = match basis.solve(&br) {
                Solution::Consistent(x) => x,
                Solution::Inconsistent { .. } => return Err(Error::NotASubalgebra { i, j }),
            };
            let coords = DVector::from_iterator(r, coords.iter().map(to_f64));
            let lhs = &matrix * coords;
            let rhs = k.bracket_vec(
                &matrix.column(i).clone_owned(),
                &matrix.column(j).clone_owned(),
            );
            let defect = (lhs - rhs).amax();
            if defect > tol {
                return Err(Error::NotAHomomorphism { a: i, b: j, defect });
            }
        }
    }
    Ok(LieHomChi { matrix })
}

pub fn validate_chi_on_split(
    split: &ReductiveSplit,
    k: &LieAlgebra,
    matrix: DMatrix<f64>,
) -> Result<LieHomChi> {
    validate_chi(split.algebra(), split.isotropy(), k, matrix)
}

#[derive(Debug, Clone)]
pub struct IntertwinerSpace {
    /// Orthonormal (in the Frobenius inner product) basis of `S`.
    pub basis: Vec<MuMap>,
    pub dim_k: usize,
    pub dim_s: usize,
}

impl IntertwinerSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, coords: &[f64]) -> MuMap {
        MuMap::combination(&self.basis, coords, self.dim_k, self.dim_s)
    }

    /// Coordinates of `mu` after orthogonal projection onto `S`.
    pub fn coords_of(&self, mu: &MuMap) -> Vec<f64> {
        self.basis
            .iter()
            .map(|b| b.matrix.dot(&mu.matrix))
            .collect()
    }
}

/// Stacked operator `vec(μ) ↦ (μ ∘ ad(h_a)|_s - ad(χ(h_a)) ∘ μ)_a` with
/// column-major `vec`.
fn intertwiner_operator(split: &ReductiveSplit, k: &LieAlgebra, chi: &LieHomChi) -> DMatrix<f64> {
    let (dk, ds, r) = (k.dim(), split.dim_s(), split.dim_h());
    let n = dk * ds;
    let mut op = DMatrix::zeros(r * n, n);
    for a in 0..r {
        let rs = &split.cache().ad_on_s[a];
        let x = k
            .adjoint_rep_f64(chi.matrix.column(a).as_slice())
            .expect("chi column has dim k entries");
        for j in 0..ds {
            for i in 0..dk {
                let mut u = DMatrix::zeros(dk, ds);
                u[(i, j)] = 1.0;
                let img = &u * rs - &x * &u;
                let col = j * dk + i;
                for (t, v) in img.iter().enumerate() {
                    op[(a * n + t, col)] = *v;
                }
            }
        }
    }
    op
}

pub fn intertwiner_space(
    split: &ReductiveSplit,
    k: &LieAlgebra,
    chi: &LieHomChi,
) -> Result<IntertwinerSpace> {
    check_chi(split, k, chi)?;
    let (dk, ds) = (k.dim(), split.dim_s());
    let op = intertwiner_operator(split, k, chi);
    let null = if op.nrows() == 0 {
        DMatrix::identity(dk * ds, dk * ds)
    } else {
        float::nullspace(&op, INTERTWINER_RANK_TOL)
    };
    let null = float::canonical_basis(&null);
    let basis = null
        .column_iter()
        .map(|c| MuMap::new(DMatrix::from_column_slice(dk, ds, c.as_slice())))
        .collect();
    Ok(IntertwinerSpace {
        basis,
        dim_k: dk,
        dim_s: ds,
    })
}

/// The affine space of invariant connections: the canonical connection
/// (`μ = 0`) plus the intertwiner space as direction space.
#[derive(Debug, Clone)]
pub struct AffineConnectionSpace {
    pub reference: MuMap,
    pub directions: IntertwinerSpace,
}

impl AffineConnectionSpace {
    pub fn dim(&self) -> usize {
        self.directions.dim()
    }
}

pub fn connection_space_description(
    split: &ReductiveSplit,
    k: &LieAlgebra,
    chi: &LieHomChi,
) -> Result<AffineConnectionSpace> {
    let directions = intertwiner_space(split, k, chi)?;
    Ok(AffineConnectionSpace {
        reference: MuMap::zero(k.dim(), split.dim_s()),
        directions,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceCheck {
    pub holds: bool,
    pub max_violation: f64,
}

pub fn equivariance_check(
    split: &ReductiveSplit,
    k: &LieAlgebra,
    chi: &LieHomChi,
    mu: &MuMap,
) -> Result<EquivarianceCheck> {
    check_chi(split, k, chi)?;
    check_mu(split, k, mu)?;
    let mut worst = 0.0f64;
    for a in 0..split.dim_h() {
        let x = k.adjoint_rep_f64(chi.matrix.column(a).as_slice())?;
        let d = &mu.matrix * &split.cache().ad_on_s[a] - x * &mu.matrix;
        worst = worst.max(float::max_abs(&d));
    }
    Ok(EquivarianceCheck {
        holds: worst <= EQUIVARIANCE_TOL,
        max_violation: worst,
    })
}

/// `k`-valued alternating form on `s`, stored densely over all basis pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim_s: usize,
    dim_k: usize,
    values: Vec<DVector<f64>>,
}

impl CurvatureTensor {
    fn zeros(dim_s: usize, dim_k: usize) -> Self {
        CurvatureTensor {
            dim_s,
            dim_k,
            values: vec![DVector::zeros(dim_k); dim_s * dim_s],
        }
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn get(&self, p: usize, q: usize) -> &DVector<f64> {
        &self.values[p * self.dim_s + q]
    }

    fn set_pair(&mut self, p: usize, q: usize, v: DVector<f64>) {
        self.values[q * self.dim_s + p] = -&v;
        self.values[p * self.dim_s + q] = v;
    }

    /// Bilinear extension to arbitrary s-coordinate vectors.
    pub fn eval(&self, xi: &DVector<f64>, zeta: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_k);
        for p in 0..self.dim_s {
            if xi[p] == 0.0 {
                continue;
            }
            for q in 0..self.dim_s {
                if zeta[q] != 0.0 {
                    out += self.get(p, q) * (xi[p] * zeta[q]);
                }
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.amax()).fold(0.0, f64::max)
    }

    /// Values over pairs `p < q`, concatenated.
    pub fn pair_values(&self) -> DVector<f64> {
        let mut out = Vec::new();
        for p in 0..self.dim_s {
            for q in p + 1..self.dim_s {
                out.extend(self.get(p, q).iter());
            }
        }
        DVector::from_vec(out)
    }
}

/// `F(ξ, ζ) = -μ(π_s[ξ, ζ]) + [μ(ξ), μ(ζ)]` on s-basis pairs.
pub fn curvature_mu(split: &ReductiveSplit, k: &LieAlgebra, mu: &MuMap) -> Result<CurvatureTensor> {
    check_mu(split, k, mu)?;
    let ds = split.dim_s();
    let cache = split.cache();
    let mut f = CurvatureTensor::zeros(ds, k.dim());
    let cols: Vec<DVector<f64>> = (0..ds).map(|p| mu.matrix.column(p).clone_owned()).collect();
    for p in 0..ds {
        for q in p + 1..ds {
            let lin = &mu.matrix * &cache.s_bracket[p * ds + q];
            let quad = k.bracket_vec(&cols[p], &cols[q]);
            f.set_pair(p, q, quad - lin);
        }
    }
    Ok(f)
}

#[derive(Debug, Clone)]
pub struct Type11Defect {
    pub tensor: CurvatureTensor,
    pub max_norm: f64,
}

/// `F_J(μ)(ξ,ζ) = F(ξ,ζ) - F(Jξ,Jζ)` with `F` from [`curvature_mu`].
pub fn type11_defect(cs: &ComplexStructure, k: &LieAlgebra, mu: &MuMap) -> Result<Type11Defect> {
    let split = cs.split();
    let f = curvature_mu(split, k, mu)?;
    let ds = split.dim_s();
    let j = cs.j_f64();
    let mut out = CurvatureTensor::zeros(ds, k.dim());
    for p in 0..ds {
        for q in p + 1..ds {
            let jp = j.column(p).clone_owned();
            let jq = j.column(q).clone_owned();
            out.set_pair(p, q, f.get(p, q) - f.eval(&jp, &jq));
        }
    }
    let max_norm = out.max_norm();
    Ok(Type11Defect {
        tensor: out,
        max_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn chi_su2(x: [f64; 3]) -> LieHomChi {
        let split = presets::halfplane_split();
        validate_chi_on_split(
            &split,
            &presets::su2(),
            DMatrix::from_column_slice(3, 1, &x),
        )
        .unwrap()
    }

    #[test]
    fn one_dimensional_isotropy_accepts_any_chi() {
        let split = presets::halfplane_split();
        let k = presets::su2();
        assert!(validate_chi_on_split(
            &split,
            &k,
            DMatrix::from_column_slice(3, 1, &[0.3, -2.0, 7.0])
        )
        .is_ok());
        assert!(validate_chi_on_split(&split, &k, DMatrix::zeros(3, 1)).is_ok());
        assert!(matches!(
            validate_chi_on_split(&split, &k, DMatrix::zeros(2, 1)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn orientation_reversing_chi_is_not_a_homomorphism() {
        let su2 = presets::su2();
        let h0 = Subspace::full(3);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0]));
        match validate_chi(&su2, &h0, &su2, m) {
            Err(Error::NotAHomomorphism { a, b, defect }) => {
                assert_eq!((a, b), (0, 1));
                assert!((defect - 2.0).abs() < 1e-12);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(validate_chi(&su2, &h0, &su2, DMatrix::identity(3, 3)).is_ok());
        assert!(validate_chi(&su2, &h0, &su2, DMatrix::zeros(3, 3)).is_ok());
    }

    #[test]
    fn halfplane_intertwiner_dimensions() {
        let split = presets::halfplane_split();
        let su2 = presets::su2();
        assert_eq!(
            intertwiner_space(&split, &su2, &chi_su2([2.0, 0.0, 0.0]))
                .unwrap()
                .dim(),
            2
        );
        assert_eq!(
            intertwiner_space(&split, &su2, &chi_su2([1.0, 0.0, 0.0]))
                .unwrap()
                .dim(),
            0
        );
        let u1 = presets::u1();
        let chi = LieHomChi::from_matrix_unchecked(DMatrix::from_element(1, 1, 2.0));
        assert_eq!(intertwiner_space(&split, &u1, &chi).unwrap().dim(), 0);
    }

    #[test]
    fn trivial_isotropy_gives_all_maps() {
        let ab = presets::abelian(2);
        let split = ReductiveSplit::new(ab, Subspace::zero(2), Subspace::full(2)).unwrap();
        let u1 = presets::u1();
        let space = connection_space_description(&split, &u1, &LieHomChi::zero(1, 0)).unwrap();
        assert_eq!(space.dim(), 2);
        assert_eq!(space.reference, MuMap::zero(1, 2));
    }

    #[test]
    fn halfplane_curvature_is_bracket_of_values() {
        let split = presets::halfplane_split();
        let su2 = presets::su2();
        let mu = MuMap::new(DMatrix::from_column_slice(
            3,
            2,
            &[0.0, 0.3, -1.2, 0.5, 0.0, 2.0],
        ));
        let f = curvature_mu(&split, &su2, &mu).unwrap();
        let b = mu.matrix.column(0).clone_owned();
        let c = mu.matrix.column(1).clone_owned();
        assert!((f.get(0, 1) - su2.bracket_vec(&b, &c)).amax() < 1e-15);
        assert!((f.get(1, 0) + f.get(0, 1)).amax() == 0.0);
        assert_eq!(
            curvature_mu(&split, &su2, &MuMap::zero(3, 2))
                .unwrap()
                .max_norm(),
            0.0
        );
    }

    #[test]
    fn equivariance_detects_eigenvalue_mismatch() {
        let split = presets::halfplane_split();
        let su2 = presets::su2();
        let chi2 = chi_su2([2.0, 0.0, 0.0]);
        let s = intertwiner_space(&split, &su2, &chi2).unwrap();
        let mu = s.point(&[0.6, -0.8]);
        assert!(equivariance_check(&split, &su2, &chi2, &mu).unwrap().holds);
        let chi1 = chi_su2([1.0, 0.0, 0.0]);
        assert!(!equivariance_check(&split, &su2, &chi1, &mu).unwrap().holds);
        assert!(
            equivariance_check(&split, &su2, &chi1, &MuMap::zero(3, 2))
                .unwrap()
                .holds
        );
    }

    #[test]
    fn type11_vanishes_on_halfplane() {
        let cs = presets::halfplane_complex_structure();
        let su2 = presets::su2();
        let mu = MuMap::new(DMatrix::from_column_slice(
            3,
            2,
            &[1.0, -2.0, 0.5, 0.25, 3.0, -1.0],
        ));
        assert!(type11_defect(&cs, &su2, &mu).unwrap().max_norm < 1e-12);
        assert!(matches!(
            type11_defect(&cs, &su2, &MuMap::zero(3, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
