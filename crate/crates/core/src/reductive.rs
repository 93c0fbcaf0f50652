//! Reductive splits `a = h₀ ⊕ s` with `ad(h₀) s ⊆ s`, invariant complex
//! structures on `s`, and the two hypotheses of the holomorphic
//! classification (integrability and type (1,1) of the canonical curvature).

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg::{exact, q, to_f64, QMatrix, Rational, Solution};

/// Tolerance on float paths; exact inputs are checked exactly.
pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ReductiveSplit {
    algebra: LieAlgebra,
    isotropy: Subspace,
    complement: Subspace,
    proj_h: QMatrix,
    proj_s: QMatrix,
    coords_h: QMatrix,
    coords_s: QMatrix,
    ad_on_s: Vec<QMatrix>,
    cache: FloatCache,
}

/// Float copies of the data the moduli computations touch repeatedly.
#[derive(Debug, Clone)]
pub(crate) struct FloatCache {
    pub ad_on_s: Vec<DMatrix<f64>>,
    /// `s_bracket[p * ds + q]`: s-coordinates of `[s_p, s_q]`.
    pub s_bracket: Vec<DVector<f64>>,
}

/// Why a triple `(a, h₀, s)` is not a reductive split.
#[derive(Debug, Clone, PartialEq)]
pub enum ComplementViolation {
    AmbientMismatch {
        algebra: usize,
        isotropy: usize,
        complement: usize,
    },
    IsotropyNotSubalgebra {
        i: usize,
        j: usize,
    },
    DimensionSum {
        isotropy: usize,
        complement: usize,
        ambient: usize,
    },
    /// `h₀ + s` has rank below `dim a`.
    NotTransversal {
        rank: usize,
    },
    /// `ad(h_i) s_j` leaves `s`.
    NotInvariant {
        h_index: usize,
        s_index: usize,
        image: Vec<Rational>,
    },
}

/// Inconsistency certificate for the equivariant-projector system: a
/// vector `y` with `yᵀA = 0` and `yᵀb = pairing ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoComplementCertificate {
    /// Unknowns are the entries of `Q` (`dim h₀ x dim a`, column-major) in
    /// `P = B Q`; rows encode `Q B = I` followed by `Q ad(h_a) = R_a Q`.
    pub system: QMatrix,
    pub rhs: Vec<Rational>,
    pub witness: Vec<Rational>,
    pub pairing: Rational,
}

impl NoComplementCertificate {
    pub fn verify(&self) -> bool {
        let ya = self.system.transpose().mul_vec(&self.witness);
        let yb = self
            .witness
            .iter()
            .zip(&self.rhs)
            .fold(Rational::zero(), |s, (y, b)| s + y * b);
        exact::vec_is_zero(&ya) && yb == self.pairing && !yb.is_zero()
    }
}

#[derive(Debug, Clone)]
pub enum ComplementOutcome {
    Found(Box<ReductiveSplit>),
    NoComplement(NoComplementCertificate),
}

impl ReductiveSplit {
    pub fn new(algebra: LieAlgebra, isotropy: Subspace, complement: Subspace) -> Result<Self> {
        if let Some(v) = complement_violation(&algebra, &isotropy, &complement) {
            return Err(Error::InvalidSubspace(format!(
                "not a reductive split: {v:?}"
            )));
        }
        let n = algebra.dim();
        let r = isotropy.dim();
        let b = isotropy.matrix();
        let s = complement.matrix();
        let inv = b.hcat(&s).inverse().expect("transversality checked above");
        let rows = inv.rows_vec();
        let coords_h = QMatrix::from_rows(rows[..r].to_vec());
        let coords_s = QMatrix::from_rows(rows[r..].to_vec());
        let (coords_h, coords_s) = (
            if r == 0 {
                QMatrix::zeros(0, n)
            } else {
                coords_h
            },
            if r == n {
                QMatrix::zeros(0, n)
            } else {
                coords_s
            },
        );
        let proj_h = b.mul(&coords_h);
        let proj_s = s.mul(&coords_s);
        let ad_on_s: Vec<QMatrix> = isotropy
            .basis()
            .iter()
            .map(|h| {
                let ad = algebra.adjoint_rep(h).expect("isotropy vector length");
                coords_s.mul(&ad).mul(&s)
            })
            .collect();
        let ds = complement.dim();
        let mut s_bracket = Vec::with_capacity(ds * ds);
        for p in 0..ds {
            for qq in 0..ds {
                let br = algebra.bracket_unchecked(&complement.basis()[p], &complement.basis()[qq]);
                s_bracket.push(DVector::from_iterator(
                    ds,
                    coords_s.mul_vec(&br).iter().map(to_f64),
                ));
            }
        }
        let cache = FloatCache {
            ad_on_s: ad_on_s.iter().map(QMatrix::to_f64).collect(),
            s_bracket,
        };
        Ok(ReductiveSplit {
            algebra,
            isotropy,
            complement,
            proj_h,
            proj_s,
            coords_h,
            coords_s,
            ad_on_s,
            cache,
        })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn isotropy(&self) -> &Subspace {
        &self.isotropy
    }

    pub fn complement(&self) -> &Subspace {
        &self.complement
    }

    pub fn proj_h(&self) -> &QMatrix {
        &self.proj_h
    }

    pub fn proj_s(&self) -> &QMatrix {
        &self.proj_s
    }

    /// `dim h₀ x dim a` map to isotropy coordinates.
    pub fn coords_h(&self) -> &QMatrix {
        &self.coords_h
    }

    /// `dim s x dim a` map to complement coordinates.
    pub fn coords_s(&self) -> &QMatrix {
        &self.coords_s
    }

    /// `ad(h_a)` restricted to `s`, in s-coordinates.
    pub fn ad_on_s(&self) -> &[QMatrix] {
        &self.ad_on_s
    }

    pub fn dim_h(&self) -> usize {
        self.isotropy.dim()
    }

    pub fn dim_s(&self) -> usize {
        self.complement.dim()
    }

    pub(crate) fn cache(&self) -> &FloatCache {
        &self.cache
    }

    /// Bracket of two s-basis vectors (in s-coordinates) split into its
    /// isotropy and complement coordinates.
    fn bracket_parts(&self, x: &[Rational], y: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let s = self.complement.matrix();
        let br = self.algebra.bracket_unchecked(&s.mul_vec(x), &s.mul_vec(y));
        (self.coords_h.mul_vec(&br), self.coords_s.mul_vec(&br))
    }

    /// Curvature of the canonical invariant connection,
    /// `F₀(s_p, s_q) = -proj_h [s_p, s_q]`, in isotropy coordinates.
    pub fn canonical_curvature(&self) -> Vec<Vec<Vec<Rational>>> {
        let ds = self.dim_s();
        let e = |i: usize| unit(ds, i);
        (0..ds)
            .map(|p| {
                (0..ds)
                    .map(|qq| {
                        let (h, _) = self.bracket_parts(&e(p), &e(qq));
                        h.into_iter().map(|x| -x).collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn canonical_connection_is_flat(&self) -> bool {
        self.canonical_curvature()
            .iter()
            .flatten()
            .all(|v| exact::vec_is_zero(v))
    }
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = q(1);
    v
}

/// `None` when `(a, h₀, s)` is a reductive split.
pub fn complement_violation(
    a: &LieAlgebra,
    h0: &Subspace,
    s: &Subspace,
) -> Option<ComplementViolation> {
    let n = a.dim();
    if h0.ambient_dim() != n || s.ambient_dim() != n {
        return Some(ComplementViolation::AmbientMismatch {
            algebra: n,
            isotropy: h0.ambient_dim(),
            complement: s.ambient_dim(),
        });
    }
    if let Some((i, j)) = a.subalgebra_violation(h0) {
        return Some(ComplementViolation::IsotropyNotSubalgebra { i, j });
    }
    if h0.dim() + s.dim() != n {
        return Some(ComplementViolation::DimensionSum {
            isotropy: h0.dim(),
            complement: s.dim(),
            ambient: n,
        });
    }
    let rank = h0.matrix().hcat(&s.matrix()).rank();
    if rank != n {
        return Some(ComplementViolation::NotTransversal { rank });
    }
    let sm = s.matrix();
    for (hi, h) in h0.basis().iter().enumerate() {
        for (si, v) in s.basis().iter().enumerate() {
            let image = a.bracket_unchecked(h, v);
            if !exact::in_span(&sm, &image) {
                return Some(ComplementViolation::NotInvariant {
                    h_index: hi,
                    s_index: si,
                    image,
                });
            }
        }
    }
    None
}

pub fn check_invariant_complement(
    a: &LieAlgebra,
    h0: &Subspace,
    s: &Subspace,
) -> (bool, Option<ComplementViolation>) {
    let v = complement_violation(a, h0, s);
    (v.is_none(), v)
}

/// Solve exactly for a projector `P: a → h₀` with `P|h₀ = id` commuting with
/// `ad(h₀)`; the complement is `ker P`. Among all such projectors the one
/// of least Frobenius norm is returned.
pub fn find_invariant_complement(a: &LieAlgebra, h0: &Subspace) -> Result<ComplementOutcome> {
    let n = a.dim();
    if h0.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h0.ambient_dim(),
        });
    }
    if let Some((i, j)) = a.subalgebra_violation(h0) {
        return Err(Error::NotASubalgebra { i, j });
    }
    let r = h0.dim();
    if r == 0 {
        let split = ReductiveSplit::new(a.clone(), h0.clone(), Subspace::full(n))?;
        return Ok(ComplementOutcome::Found(Box::new(split)));
    }
    let b = h0.matrix();
    let (system, rhs) = projector_system(a, h0);

    if let Solution::Inconsistent { witness, pairing } = system.solve(&rhs) {
        return Ok(ComplementOutcome::NoComplement(NoComplementCertificate {
            system,
            rhs,
            witness,
            pairing,
        }));
    }

    // Minimize ‖B Q‖_F² = Σ_cols Q_colᵀ (BᵀB) Q_col subject to the system,
    // through the KKT equations on an independent set of constraint rows.
    let nv = r * n;
    let (reduced, pivots) = system
        .hcat(&QMatrix::from_columns(
            rhs.len(),
            std::slice::from_ref(&rhs),
        ))
        .rref();
    let m = pivots.iter().filter(|&&p| p < nv).count();
    let gram = b.transpose().mul(&b);
    let mut kkt = QMatrix::zeros(nv + m, nv + m);
    for col in 0..n {
        for i in 0..r {
            for j in 0..r {
                kkt[(col * r + i, col * r + j)] = &gram[(i, j)] * q(2);
            }
        }
    }
    let mut kkt_rhs = vec![Rational::zero(); nv + m];
    for row in 0..m {
        for v in 0..nv {
            kkt[(nv + row, v)] = reduced[(row, v)].clone();
            kkt[(v, nv + row)] = reduced[(row, v)].clone();
        }
        kkt_rhs[nv + row] = reduced[(row, nv)].clone();
    }
    let sol = match kkt.solve(&kkt_rhs) {
        Solution::Consistent(x) => x,
        Solution::Inconsistent { .. } => unreachable!("KKT system of a consistent problem"),
    };
    let mut qmat = QMatrix::zeros(r, n);
    for col in 0..n {
        for i in 0..r {
            qmat[(i, col)] = sol[col * r + i].clone();
        }
    }
    let complement = Subspace::new_unchecked(n, qmat.nullspace());
    let split = ReductiveSplit::new(a.clone(), h0.clone(), complement)?;
    Ok(ComplementOutcome::Found(Box::new(split)))
}

/// Linear system in the entries of `Q` (column-major) expressing
/// `Q B = I` and `Q ad(h_a) = R_a Q` where `ad(h_a) B = B R_a`.
fn projector_system(a: &LieAlgebra, h0: &Subspace) -> (QMatrix, Vec<Rational>) {
    let n = a.dim();
    let r = h0.dim();
    let b = h0.matrix();
    let var = |i: usize, col: usize| col * r + i;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..r {
        for j in 0..r {
            let mut row = vec![Rational::zero(); r * n];
            for c in 0..n {
                row[var(i, c)] = b[(c, j)].clone();
            }
            rows.push(row);
            rhs.push(if i == j { q(1) } else { q(0) });
        }
    }
    for h in h0.basis() {
        let ad = a.adjoint_rep(h).expect("isotropy vector length");
        let image = ad.mul(&b);
        let ra = QMatrix::from_columns(
            r,
            &image
                .columns()
                .iter()
                .map(|col| match b.solve(col) {
                    Solution::Consistent(x) => x,
                    Solution::Inconsistent { .. } => unreachable!("h0 is a subalgebra"),
                })
                .collect::<Vec<_>>(),
        );
        for i in 0..r {
            for c in 0..n {
                let mut row = vec![Rational::zero(); r * n];
                for k in 0..n {
                    row[var(i, k)] += &ad[(k, c)];
                }
                for l in 0..r {
                    row[var(l, c)] -= &ra[(i, l)];
                }
                if !exact::vec_is_zero(&row) {
                    rows.push(row);
                    rhs.push(q(0));
                }
            }
        }
    }
    (QMatrix::from_rows(rows), rhs)
}

/// A complex structure `J` on `s` commuting with `ad(h₀)|_s`.
#[derive(Debug, Clone)]
pub struct ComplexStructure {
    split: ReductiveSplit,
    j: QMatrix,
    j_f64: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexStructureViolation {
    Shape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    /// `J² + I ≠ 0`.
    SquareNotMinusOne { j_squared_plus_id: QMatrix },
    /// `[J, ad(h_i)|_s] ≠ 0`.
    NotEquivariant { h_index: usize, commutator: QMatrix },
}

pub fn check_complex_structure(
    split: &ReductiveSplit,
    j: &QMatrix,
) -> (bool, Option<ComplexStructureViolation>) {
    let ds = split.dim_s();
    if j.nrows() != ds || j.ncols() != ds {
        return (
            false,
            Some(ComplexStructureViolation::Shape {
                expected: ds,
                rows: j.nrows(),
                cols: j.ncols(),
            }),
        );
    }
    let sq = j.mul(j).add(&QMatrix::identity(ds));
    if !sq.is_zero() {
        return (
            false,
            Some(ComplexStructureViolation::SquareNotMinusOne {
                j_squared_plus_id: sq,
            }),
        );
    }
    for (h_index, ad) in split.ad_on_s().iter().enumerate() {
        let comm = j.mul(ad).sub(&ad.mul(j));
        if !comm.is_zero() {
            return (
                false,
                Some(ComplexStructureViolation::NotEquivariant {
                    h_index,
                    commutator: comm,
                }),
            );
        }
    }
    (true, None)
}

impl ComplexStructure {
    pub fn new(split: ReductiveSplit, j: QMatrix) -> Result<Self> {
        if let (false, Some(v)) = check_complex_structure(&split, &j) {
            return Err(Error::InvalidJ(format!("{v:?}")));
        }
        let j_f64 = j.to_f64();
        Ok(ComplexStructure { split, j, j_f64 })
    }

    pub fn split(&self) -> &ReductiveSplit {
        &self.split
    }

    pub fn j(&self) -> &QMatrix {
        &self.j
    }

    pub fn j_f64(&self) -> &DMatrix<f64> {
        &self.j_f64
    }

    /// The conjugate structure `-J`.
    pub fn conjugate(&self) -> ComplexStructure {
        let j = self.j.scale(&q(-1));
        ComplexStructure {
            split: self.split.clone(),
            j_f64: j.to_f64(),
            j,
        }
    }
}

/// Max-norm over s-basis pairs of the s-projected Nijenhuis expression
/// `π_s([Jξ,Jζ] - [ξ,ζ]) - J π_s([Jξ,ζ] + [ξ,Jζ])`, computed exactly.
pub fn nijenhuis_defect(cs: &ComplexStructure) -> f64 {
    let split = cs.split();
    let ds = split.dim_s();
    let j = cs.j();
    let mut worst = 0.0f64;
    for p in 0..ds {
        for qq in p + 1..ds {
            let (xi, zeta) = (unit(ds, p), unit(ds, qq));
            let (jxi, jzeta) = (j.mul_vec(&xi), j.mul_vec(&zeta));
            let (_, a) = split.bracket_parts(&jxi, &jzeta);
            let (_, b) = split.bracket_parts(&xi, &zeta);
            let (_, c) = split.bracket_parts(&jxi, &zeta);
            let (_, d) = split.bracket_parts(&xi, &jzeta);
            let cd: Vec<Rational> = c.iter().zip(&d).map(|(x, y)| x + y).collect();
            let jcd = j.mul_vec(&cd);
            for k in 0..ds {
                let v = &a[k] - &b[k] - &jcd[k];
                worst = worst.max(to_f64(&v).abs());
            }
        }
    }
    worst
}

/// Result of testing `F₀(Jξ, Jζ) = F₀(ξ, ζ)` for the canonical curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Type11Check {
    pub holds: bool,
    pub max_defect: f64,
    pub worst_pair: Option<(usize, usize)>,
}

pub fn gamma0_type11_check(cs: &ComplexStructure) -> Type11Check {
    let split = cs.split();
    let ds = split.dim_s();
    let j = cs.j();
    let mut max_defect = 0.0f64;
    let mut worst_pair = None;
    for p in 0..ds {
        for qq in p + 1..ds {
            let (xi, zeta) = (unit(ds, p), unit(ds, qq));
            let (h, _) = split.bracket_parts(&xi, &zeta);
            let (hj, _) = split.bracket_parts(&j.mul_vec(&xi), &j.mul_vec(&zeta));
            // F₀ = -π_h[·,·]; the sign cancels in the difference.
            let d = h
                .iter()
                .zip(&hj)
                .map(|(a, b)| to_f64(&(a - b)).abs())
                .fold(0.0, f64::max);
            if d > max_defect {
                max_defect = d;
                worst_pair = Some((p, qq));
            }
        }
    }
    Type11Check {
        holds: max_defect <= FLOAT_TOL,
        max_defect,
        worst_pair,
    }
}
