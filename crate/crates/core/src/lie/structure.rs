//! Semisimplicity, simple-ideal splitting and compactness flags.
//!
//! Ideals of a semisimple algebra are the real invariant subspaces of a
//! generic element of the commutant of the adjoint representation. Each
//! simple ideal contributes either one real eigenvalue (commutant ℝ) or a
//! conjugate pair (commutant ℂ), so the commutant dimension certifies that
//! no two ideals were merged by an eigenvalue collision.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LieAlgebra, Subspace};
use crate::error::{Error, Result};
use crate::linalg::{exact, float, rationalize, QMatrix, Rational};

const MAX_ATTEMPTS: u64 = 8;
const CLUSTER_TOL: f64 = 1e-6;
const COLLISION_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Compactness {
    Compact,
    Noncompact,
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct Ideal {
    /// Orthonormal columns spanning the ideal.
    pub basis: DMatrix<f64>,
    /// Rational basis, when the float basis could be snapped to one and
    /// verified exactly.
    pub exact: Option<Subspace>,
    pub compactness: Compactness,
    /// Whether the commutant on this ideal is ℂ (a complex simple algebra
    /// viewed as a real one).
    pub complex_type: bool,
}

impl Ideal {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub is_semisimple: bool,
    pub killing_determinant: Rational,
    pub simple_ideals: Vec<Ideal>,
    /// Algebra-level compactness: admits an ad-invariant inner product.
    pub is_compact: bool,
    /// Seed offset that produced a collision-free split.
    pub attempts: u64,
    pub notes: Vec<String>,
}

impl StructureReport {
    pub fn compactness_flags(&self) -> Vec<Compactness> {
        if !self.is_semisimple {
            return vec![Compactness::Undetermined];
        }
        self.simple_ideals.iter().map(|i| i.compactness).collect()
    }

    pub fn all_ideals_noncompact(&self) -> bool {
        self.is_semisimple
            && self
                .simple_ideals
                .iter()
                .all(|i| i.compactness == Compactness::Noncompact)
    }

    /// Whether the hypotheses of the holomorphic classification (semisimple
    /// algebra, all simple summands non-compact, compact structure group)
    /// hold, with a reason when they do not.
    pub fn quotient_identification_applies(&self, target_compact: bool) -> (bool, Option<String>) {
        if !self.is_semisimple {
            return (
                false,
                Some("algebra is not semisimple (Killing form degenerate)".into()),
            );
        }
        if !self.all_ideals_noncompact() {
            return (false, Some("algebra has a compact simple summand".into()));
        }
        if !target_compact {
            return (false, Some("structure group algebra is not compact".into()));
        }
        (true, None)
    }
}

pub fn structure_report(alg: &LieAlgebra, seed: u64) -> Result<StructureReport> {
    let killing = alg.killing_form().matrix;
    let det = killing.determinant();
    let is_semisimple = !det.is_zero();
    let is_compact = compact_algebra(alg, &killing);
    let mut notes = Vec::new();
    if !is_semisimple {
        notes.push(
            "not semisimple: compactness of summands is undetermined and no ideal split is attempted"
                .to_string(),
        );
        return Ok(StructureReport {
            is_semisimple,
            killing_determinant: det,
            simple_ideals: Vec::new(),
            is_compact,
            attempts: 0,
            notes,
        });
    }
    let commutant = commutant_basis(alg);
    let (ideals, attempts) = split_ideals(alg, &commutant, seed)?;
    let killing_f = killing.to_f64();
    let exact_bases = snap_to_rational(alg, &ideals);
    let simple_ideals = ideals
        .into_iter()
        .enumerate()
        .map(|(idx, (basis, complex_type))| {
            let exact = exact_bases.as_ref().map(|b| b[idx].clone());
            let negdef = match &exact {
                Some(s) => s
                    .matrix()
                    .transpose()
                    .mul(&killing)
                    .mul(&s.matrix())
                    .is_negative_definite(),
                None => {
                    let g = basis.transpose() * &killing_f * &basis;
                    let scale = float::max_abs(&g).max(1.0);
                    SymmetricEigen::new(g)
                        .eigenvalues
                        .iter()
                        .all(|&e| e < -1e-9 * scale)
                }
            };
            Ideal {
                basis,
                exact,
                compactness: if negdef {
                    Compactness::Compact
                } else {
                    Compactness::Noncompact
                },
                complex_type,
            }
        })
        .collect();
    Ok(StructureReport {
        is_semisimple,
        killing_determinant: det,
        simple_ideals,
        is_compact,
        attempts,
        notes,
    })
}

/// `K ≤ 0` with `ker K` equal to the center: exactly the algebras that are
/// a compact semisimple algebra plus an abelian one.
/// Exact compactness test: the Killing form is negative semidefinite with
/// kernel equal to the center.
pub fn is_compact(alg: &LieAlgebra) -> bool {
    compact_algebra(alg, &alg.killing_form().matrix)
}

fn compact_algebra(alg: &LieAlgebra, killing: &QMatrix) -> bool {
    let ker = killing.nullspace();
    if ker.len() != alg.center().dim() {
        return false;
    }
    // Column space of a symmetric matrix complements its kernel.
    let (_, pivots) = killing.rref();
    if pivots.is_empty() {
        return true;
    }
    let w = QMatrix::from_columns(
        alg.dim(),
        &pivots
            .iter()
            .map(|&c| killing.column(c))
            .collect::<Vec<_>>(),
    );
    w.transpose().mul(killing).mul(&w).is_negative_definite()
}

/// Basis of `{T : T ad(e_i) = ad(e_i) T ∀i}`, as float matrices.
fn commutant_basis(alg: &LieAlgebra) -> Vec<DMatrix<f64>> {
    let n = alg.dim();
    let ads: Vec<QMatrix> = (0..n).map(|i| alg.ad_basis(i)).collect();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for ad in &ads {
        for r in 0..n {
            for c in 0..n {
                let mut row = vec![Rational::zero(); n * n];
                for k in 0..n {
                    // (T ad)[r][c] = Σ_k T[r][k] ad[k][c]
                    row[r * n + k] += &ad[(k, c)];
                    // (ad T)[r][c] = Σ_k ad[r][k] T[k][c]
                    row[k * n + c] -= &ad[(r, k)];
                }
                if !exact::vec_is_zero(&row) {
                    rows.push(row);
                }
            }
        }
    }
    let sys = if rows.is_empty() {
        QMatrix::zeros(1, n * n)
    } else {
        QMatrix::from_rows(rows)
    };
    sys.nullspace()
        .into_iter()
        .map(|v| DMatrix::from_fn(n, n, |r, c| exact::to_f64(&v[r * n + c])))
        .collect()
}

type RawIdeal = (DMatrix<f64>, bool);

fn split_ideals(
    alg: &LieAlgebra,
    commutant: &[DMatrix<f64>],
    seed: u64,
) -> Result<(Vec<RawIdeal>, u64)> {
    let n = alg.dim();
    let mut last_reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut t = DMatrix::<f64>::zeros(n, n);
        for c in commutant {
            let w: f64 = rng.random_range(-1.0..1.0);
            t += c * w;
        }
        match split_by_eigenspaces(&t, commutant.len()) {
            Ok(mut ideals) => {
                ideals.sort_by_key(|(b, _)| leading_support(b));
                return Ok((ideals, attempt));
            }
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::DecompositionFailed(format!(
        "no collision-free commutant element after {MAX_ATTEMPTS} seeds: {last_reason}"
    )))
}

fn leading_support(b: &DMatrix<f64>) -> usize {
    (0..b.nrows())
        .find(|&r| b.row(r).norm() > 1e-6)
        .unwrap_or(usize::MAX)
}

fn split_by_eigenspaces(
    t: &DMatrix<f64>,
    commutant_dim: usize,
) -> std::result::Result<Vec<RawIdeal>, String> {
    let n = t.nrows();
    let eig: Vec<Complex64> = t.clone().complex_eigenvalues().iter().cloned().collect();
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = CLUSTER_TOL * scale;

    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in eig {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() < tol) {
            Some((_, count)) => *count += 1,
            None => clusters.push((z, 1)),
        }
    }
    for (a, (za, _)) in clusters.iter().enumerate() {
        for (zb, _) in &clusters[a + 1..] {
            if (za - zb).norm() < COLLISION_GAP * scale {
                return Err("eigenvalue gap below collision threshold".into());
            }
        }
    }

    let mut ideals = Vec::new();
    let mut certified_dim = 0;
    let id = DMatrix::<f64>::identity(n, n);
    for (z, mult) in &clusters {
        if z.im < -tol {
            continue;
        }
        let (op, kdim, complex_type) = if z.im.abs() <= tol {
            (t - &id * z.re, *mult, false)
        } else {
            (
                t * t - t * (2.0 * z.re) + &id * z.norm_sqr(),
                2 * mult,
                true,
            )
        };
        let basis = smallest_right_singular(&op, kdim, 1e-6 * scale * scale)
            .ok_or_else(|| format!("eigenspace for {z} is not {kdim}-dimensional"))?;
        certified_dim += if complex_type { 2 } else { 1 };
        ideals.push((basis, complex_type));
    }
    let total: usize = ideals.iter().map(|(b, _)| b.ncols()).sum();
    if total != n {
        return Err(format!(
            "invariant subspaces cover {total} of {n} dimensions"
        ));
    }
    if certified_dim != commutant_dim {
        return Err(format!(
            "commutant has dimension {commutant_dim} but the split accounts for {certified_dim}"
        ));
    }
    Ok(ideals)
}

/// Right singular vectors of the `k` smallest singular values, provided
/// those are all below `tol`.
fn smallest_right_singular(a: &DMatrix<f64>, k: usize, tol: f64) -> Option<DMatrix<f64>> {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]));
    let picked = &order[..k];
    if picked.iter().any(|&i| svd.singular_values[i] > tol) {
        return None;
    }
    if k < order.len() && svd.singular_values[order[k]] <= tol {
        return None;
    }
    let cols: Vec<_> = picked.iter().map(|&i| v_t.row(i).transpose()).collect();
    Some(float::canonical_basis(&DMatrix::from_columns(&cols)))
}

/// Snap every ideal to a rational basis through its reduced row echelon
/// form and verify the result exactly; all-or-nothing.
fn snap_to_rational(alg: &LieAlgebra, ideals: &[RawIdeal]) -> Option<Vec<Subspace>> {
    let n = alg.dim();
    let mut out = Vec::with_capacity(ideals.len());
    for (basis, _) in ideals {
        let rows = float_rref(&basis.transpose());
        let mut vecs = Vec::with_capacity(rows.nrows());
        for r in 0..rows.nrows() {
            let v: Option<Vec<Rational>> = rows
                .row(r)
                .iter()
                .map(|&x| rationalize(x, 10_000))
                .collect();
            let v = v?;
            let back: f64 = v
                .iter()
                .zip(rows.row(r).iter())
                .map(|(a, b)| (exact::to_f64(a) - b).abs())
                .fold(0.0, f64::max);
            if back > 1e-9 {
                return None;
            }
            vecs.push(v);
        }
        let sub = Subspace::new(n, vecs).ok()?;
        let m = sub.matrix();
        for i in 0..n {
            for v in sub.basis() {
                let img = alg.bracket_unchecked(&alg.basis_vector(i), v);
                if !exact::in_span(&m, &img) {
                    return None;
                }
            }
        }
        out.push(sub);
    }
    let all: Vec<Vec<Rational>> = out.iter().flat_map(|s| s.basis().to_vec()).collect();
    if QMatrix::from_columns(n, &all).rank() != n {
        return None;
    }
    Some(out)
}

fn float_rref(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = a.clone();
    let (rows, cols) = m.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, m[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best < 1e-9 {
            continue;
        }
        m.swap_rows(r, p);
        let piv = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        r += 1;
    }
    m.rows(0, r).clone_owned()
}

/// Combined check of the hypotheses for identifying invariant holomorphic
/// bundles with the moduli quotient.
#[derive(Debug, Clone)]
pub struct HypothesisReport {
    pub algebra: StructureReport,
    pub target: StructureReport,
    pub quotient_identification_applies: bool,
    pub reason: Option<String>,
}

pub fn hypothesis_report(a: &LieAlgebra, k: &LieAlgebra, seed: u64) -> Result<HypothesisReport> {
    let algebra = structure_report(a, seed)?;
    let target = structure_report(k, seed)?;
    let (applies, reason) = algebra.quotient_identification_applies(target.is_compact);
    Ok(HypothesisReport {
        algebra,
        target,
        quotient_identification_applies: applies,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn sl2r_is_noncompact_simple() {
        let r = structure_report(&presets::sl2r(), 0).unwrap();
        assert!(r.is_semisimple);
        assert_eq!(r.simple_ideals.len(), 1);
        assert_eq!(r.compactness_flags(), vec![Compactness::Noncompact]);
        assert!(!r.is_compact);
    }

    #[test]
    fn su2_is_compact_simple() {
        let r = structure_report(&presets::su2(), 0).unwrap();
        assert!(r.is_semisimple && r.is_compact);
        assert_eq!(r.compactness_flags(), vec![Compactness::Compact]);
    }

    #[test]
    fn product_splits_into_two_noncompact_ideals() {
        let r = structure_report(&presets::sl2r_squared(), 3).unwrap();
        assert_eq!(r.simple_ideals.len(), 2);
        assert!(r.all_ideals_noncompact());
        assert_eq!(r.simple_ideals.iter().map(Ideal::dim).sum::<usize>(), 6);
        let first = r.simple_ideals[0].exact.as_ref().unwrap();
        assert_eq!(first, &Subspace::coordinate(6, &[0, 1, 2]));
    }

    #[test]
    fn mixed_compactness() {
        let g = presets::sl2r().direct_sum(&presets::su2(), "sl2+su2");
        let r = structure_report(&g, 1).unwrap();
        assert_eq!(
            r.compactness_flags(),
            vec![Compactness::Noncompact, Compactness::Compact]
        );
        assert!(!r.quotient_identification_applies(true).0);
    }

    #[test]
    fn complexified_sl2_is_one_complex_type_ideal() {
        // sl(2,C) as a real 6-dimensional algebra is simple with commutant C.
        let r = structure_report(&presets::sl2c_real(), 0).unwrap();
        assert_eq!(r.simple_ideals.len(), 1);
        assert!(r.simple_ideals[0].complex_type);
        assert_eq!(r.compactness_flags(), vec![Compactness::Noncompact]);
    }

    #[test]
    fn non_semisimple_is_undetermined() {
        let r = structure_report(&presets::aff1(), 0).unwrap();
        assert!(!r.is_semisimple);
        assert_eq!(r.compactness_flags(), vec![Compactness::Undetermined]);
        let (applies, reason) = r.quotient_identification_applies(true);
        assert!(!applies && reason.is_some());
    }

    #[test]
    fn abelian_and_reductive_compactness() {
        assert!(structure_report(&presets::u1(), 0).unwrap().is_compact);
        let u2 = presets::su2().direct_sum(&presets::u1(), "u2");
        assert!(structure_report(&u2, 0).unwrap().is_compact);
        assert!(!structure_report(&presets::aff1(), 0).unwrap().is_compact);
    }
}
