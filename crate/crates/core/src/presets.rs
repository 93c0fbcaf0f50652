//! Built-in algebras, splits and complex structures, plus the half-plane
//! moduli stratification and its eigenvalue oracle.
//!
//! Basis conventions (fixed once, used everywhere):
//!
//! * `sl2r`: `(h0, E, F)` with `h0 = [[0,-1],[1,0]]`, `E = diag(1,-1)`,
//!   `F = [[0,1],[1,0]]`, so `[h0,E] = 2F`, `[h0,F] = -2E`, `[E,F] = -2h0`.
//! * `su2`: `(e1, e2, e3)` with `[e1,e2] = e3` cyclically.
//! * `aff1`: `(f1, f2)` with `[f1,f2] = f2`.
//! * `su3`: `(H1, H2, X12, Y12, X13, Y13, X23, Y23)` with
//!   `H1 = i·diag(1,-1,0)`, `H2 = i·diag(0,1,-1)`, `X_jk = E_jk - E_kj`,
//!   `Y_jk = i(E_jk + E_kj)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lie::{LieAlgebra, RawBracketTable, Subspace};
use crate::linalg::{q, QMatrix, Rational, Solution};
use crate::quotient::{self, TargetFamily};
use crate::reductive::{ComplexStructure, ReductiveSplit};

pub const PRESET_NAMES: &[&str] = &[
    "sl2r",
    "su2",
    "u1",
    "abelian_n",
    "aff1",
    "halfplane_split",
    "product_halfplane_split",
    "su3",
    "sl2c",
];

/// Gaussian rational `re + i·im`.
#[derive(Clone, Debug, PartialEq)]
struct Gq {
    re: Rational,
    im: Rational,
}

impl Gq {
    fn new(re: i64, im: i64) -> Self {
        Gq {
            re: q(re),
            im: q(im),
        }
    }
    fn mul(&self, o: &Gq) -> Gq {
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn add(&self, o: &Gq) -> Gq {
        Gq {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    fn sub(&self, o: &Gq) -> Gq {
        Gq {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

type GMat = Vec<Vec<Gq>>;

fn gmat(entries: &[&[(i64, i64)]]) -> GMat {
    entries
        .iter()
        .map(|r| r.iter().map(|&(a, b)| Gq::new(a, b)).collect())
        .collect()
}

fn gmul(a: &GMat, b: &GMat) -> GMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Gq::new(0, 0), |s, k| s.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

fn gcomm(a: &GMat, b: &GMat) -> GMat {
    let (ab, ba) = (gmul(a, b), gmul(b, a));
    ab.iter()
        .zip(&ba)
        .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x.sub(y)).collect())
        .collect()
}

fn flatten(m: &GMat) -> Vec<Rational> {
    let mut v: Vec<Rational> = m.iter().flatten().map(|z| z.re.clone()).collect();
    v.extend(m.iter().flatten().map(|z| z.im.clone()));
    v
}

/// Structure constants of the real span of a matrix basis closed under the
/// commutator, solved exactly.
fn from_matrix_basis(name: &str, labels: &[&str], mats: &[GMat]) -> LieAlgebra {
    let flat: Vec<Vec<Rational>> = mats.iter().map(flatten).collect();
    let basis = QMatrix::from_columns(flat[0].len(), &flat);
    let mut raw = RawBracketTable::zero(name, labels);
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let c = flatten(&gcomm(&mats[i], &mats[j]));
            match basis.solve(&c) {
                Solution::Consistent(x) => raw.set(i, j, &x),
                Solution::Inconsistent { .. } => {
                    panic!("{name}: basis not closed under commutator")
                }
            }
        }
    }
    LieAlgebra::from_table(raw).expect("matrix commutators satisfy Jacobi")
}

pub fn sl2r() -> LieAlgebra {
    from_matrix_basis(
        "sl2r",
        &["h0", "E", "F"],
        &[
            gmat(&[&[(0, 0), (-1, 0)], &[(1, 0), (0, 0)]]),
            gmat(&[&[(1, 0), (0, 0)], &[(0, 0), (-1, 0)]]),
            gmat(&[&[(0, 0), (1, 0)], &[(1, 0), (0, 0)]]),
        ],
    )
}

pub fn su2() -> LieAlgebra {
    let mut raw = RawBracketTable::zero("su2", &["e1", "e2", "e3"]);
    raw.set(0, 1, &[q(0), q(0), q(1)]);
    raw.set(1, 2, &[q(1), q(0), q(0)]);
    raw.set(2, 0, &[q(0), q(1), q(0)]);
    LieAlgebra::from_table(raw).expect("su2 table")
}

pub fn u1() -> LieAlgebra {
    LieAlgebra::from_table(RawBracketTable::zero("u1", &["u"])).expect("abelian")
}

pub fn abelian(n: usize) -> LieAlgebra {
    let labels: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    LieAlgebra::from_table(RawBracketTable::zero(&format!("abelian_{n}"), &refs)).expect("abelian")
}

pub fn aff1() -> LieAlgebra {
    let mut raw = RawBracketTable::zero("aff1", &["f1", "f2"]);
    raw.set(0, 1, &[q(0), q(1)]);
    LieAlgebra::from_table(raw).expect("aff1 table")
}

pub fn sl2r_squared() -> LieAlgebra {
    let s = sl2r();
    s.direct_sum(&s, "sl2r_x2")
}

pub fn su3() -> LieAlgebra {
    let z = (0, 0);
    let mut mats = vec![
        gmat(&[&[(0, 1), z, z], &[z, (0, -1), z], &[z, z, z]]),
        gmat(&[&[z, z, z], &[z, (0, 1), z], &[z, z, (0, -1)]]),
    ];
    let mut labels = vec!["H1".to_string(), "H2".to_string()];
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        let mut x = vec![vec![Gq::new(0, 0); 3]; 3];
        x[j][k] = Gq::new(1, 0);
        x[k][j] = Gq::new(-1, 0);
        let mut y = vec![vec![Gq::new(0, 0); 3]; 3];
        y[j][k] = Gq::new(0, 1);
        y[k][j] = Gq::new(0, 1);
        mats.push(x);
        mats.push(y);
        labels.push(format!("X{}{}", j + 1, k + 1));
        labels.push(format!("Y{}{}", j + 1, k + 1));
    }
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    from_matrix_basis("su3", &refs, &mats)
}

/// sl(2, ℂ) as a 6-dimensional real Lie algebra.
pub fn sl2c_real() -> LieAlgebra {
    let z = (0, 0);
    from_matrix_basis(
        "sl2c",
        &["h", "e", "f", "ih", "ie", "if"],
        &[
            gmat(&[&[(1, 0), z], &[z, (-1, 0)]]),
            gmat(&[&[z, (1, 0)], &[z, z]]),
            gmat(&[&[z, z], &[(1, 0), z]]),
            gmat(&[&[(0, 1), z], &[z, (0, -1)]]),
            gmat(&[&[z, (0, 1)], &[z, z]]),
            gmat(&[&[z, z], &[(0, 1), z]]),
        ],
    )
}

/// `(sl2r, span{h0}, span{E, F})`.
pub fn halfplane_split() -> ReductiveSplit {
    ReductiveSplit::new(
        sl2r(),
        Subspace::coordinate(3, &[0]),
        Subspace::coordinate(3, &[1, 2]),
    )
    .expect("half-plane split")
}

/// `J(E) = F`, `J(F) = -E` on the half-plane split.
pub fn halfplane_complex_structure() -> ComplexStructure {
    ComplexStructure::new(halfplane_split(), rotation_j(1)).expect("half-plane J")
}

/// Block-diagonal rotation: `J(s_{2k}) = s_{2k+1}`, `J(s_{2k+1}) = -s_{2k}`.
fn rotation_j(blocks: usize) -> QMatrix {
    let mut j = QMatrix::zeros(2 * blocks, 2 * blocks);
    for b in 0..blocks {
        j[(2 * b + 1, 2 * b)] = q(1);
        j[(2 * b, 2 * b + 1)] = q(-1);
    }
    j
}

/// `(sl2r ⊕ sl2r, span{h0_1, h0_2}, span{E_1, F_1, E_2, F_2})`.
pub fn product_halfplane_split() -> ReductiveSplit {
    ReductiveSplit::new(
        sl2r_squared(),
        Subspace::coordinate(6, &[0, 3]),
        Subspace::coordinate(6, &[1, 2, 4, 5]),
    )
    .expect("product split")
}

pub fn product_complex_structure() -> ComplexStructure {
    ComplexStructure::new(product_halfplane_split(), rotation_j(2)).expect("product J")
}

/// `χ = (2e1, 0)` into su2 for the product split: only the first factor
/// carries a nonzero intertwiner space.
pub fn su2_product_chi() -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 2, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0])
}

/// `χ(h0_1) = (4H1 + 2H2)/3`, `χ(h0_2) = (2H1 + 4H2)/3` into su3 for the
/// product split. Both factors see a `2i`-eigenspace of complex dimension
/// one, so the intertwiner space is 4-dimensional and `F_J` cuts out the
/// union of the two coordinate planes.
pub fn su3_product_chi() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(8, 2);
    m[(0, 0)] = 4.0 / 3.0;
    m[(1, 0)] = 2.0 / 3.0;
    m[(0, 1)] = 2.0 / 3.0;
    m[(1, 1)] = 4.0 / 3.0;
    m
}

#[derive(Debug, Clone)]
pub struct PresetEntry {
    pub name: String,
    pub algebra: LieAlgebra,
    pub isotropy: Option<Subspace>,
    pub split: Option<ReductiveSplit>,
    pub complex_structure: Option<ComplexStructure>,
}

impl PresetEntry {
    fn algebra(name: &str, algebra: LieAlgebra) -> Self {
        PresetEntry {
            name: name.to_string(),
            algebra,
            isotropy: None,
            split: None,
            complex_structure: None,
        }
    }

    fn with_structure(name: &str, cs: ComplexStructure) -> Self {
        let split = cs.split().clone();
        PresetEntry {
            name: name.to_string(),
            algebra: split.algebra().clone(),
            isotropy: Some(split.isotropy().clone()),
            split: Some(split),
            complex_structure: Some(cs),
        }
    }
}

pub fn load_preset(name: &str) -> Result<PresetEntry> {
    let entry = match name {
        "sl2r" => PresetEntry::algebra(name, sl2r()),
        "su2" => PresetEntry::algebra(name, su2()),
        "u1" => PresetEntry::algebra(name, u1()),
        "abelian_n" => PresetEntry::algebra(name, abelian(2)),
        "aff1" => PresetEntry {
            isotropy: Some(Subspace::coordinate(2, &[1])),
            ..PresetEntry::algebra(name, aff1())
        },
        "halfplane_split" => PresetEntry::with_structure(name, halfplane_complex_structure()),
        "product_halfplane_split" => PresetEntry::with_structure(name, product_complex_structure()),
        "su3" => PresetEntry::algebra(name, su3()),
        "sl2c" => PresetEntry::algebra(name, sl2c_real()),
        other => match other
            .strip_prefix("abelian_")
            .and_then(|n| n.parse::<usize>().ok())
        {
            Some(n) if n > 0 => PresetEntry::algebra(name, abelian(n)),
            _ => return Err(Error::UnknownPreset(name.to_string())),
        },
    };
    Ok(entry)
}

/// Whether a constraint on `‖χ₀‖` is free or pinned.
#[derive(Debug, Clone, PartialEq)]
pub enum ChiNormConstraint {
    /// Any `χ₀` (abelian targets: no normalization is possible).
    Any,
    /// `‖χ₀‖ = t` with `t ≥ 0`.
    NonNegative,
    Exactly(f64),
}

impl fmt::Display for ChiNormConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiNormConstraint::Any => write!(f, "chi0 in k arbitrary"),
            ChiNormConstraint::NonNegative => write!(f, "chi0 = t*e1, t >= 0"),
            ChiNormConstraint::Exactly(t) => write!(f, "chi0 = {t}*e1"),
        }
    }
}

/// A representative `(χ₀, μ)` with `μ = (B, C) = (μ(E), μ(F))` and
/// `A = C + iB`.
#[derive(Debug, Clone)]
pub struct StratumPoint {
    pub chi0: Vec<f64>,
    pub mu: DMatrix<f64>,
    /// `A = c·v` where `v` spans the `2i`-eigenspace (zero when `A = 0`).
    pub c: Complex64,
    /// Max-norm of `([χ₀,B] - 2C, [χ₀,C] + 2B)`.
    pub eq_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Stratum {
    pub name: String,
    pub description: String,
    pub chi_norm: ChiNormConstraint,
    pub mu_complex_dim: usize,
    pub parameters: Vec<String>,
    pub representatives: Vec<StratumPoint>,
}

#[derive(Debug, Clone)]
pub struct HalfPlaneStratification {
    pub target: String,
    pub strata: Vec<Stratum>,
}

fn eq_residual(k: &LieAlgebra, chi0: &[f64], mu: &DMatrix<f64>) -> f64 {
    let b: Vec<f64> = mu.column(0).iter().cloned().collect();
    let c: Vec<f64> = mu.column(1).iter().cloned().collect();
    let xb = k.bracket_f64(chi0, &b).expect("shape");
    let xc = k.bracket_f64(chi0, &c).expect("shape");
    let mut r = 0.0f64;
    for i in 0..k.dim() {
        r = r.max((xb[i] - 2.0 * c[i]).abs());
        r = r.max((xc[i] + 2.0 * b[i]).abs());
    }
    r
}

pub fn halfplane_moduli(k: &LieAlgebra) -> Result<HalfPlaneStratification> {
    let family = quotient::target_family(k)?;
    let strata = match (family, k.dim()) {
        (TargetFamily::Abelian, 1) => {
            let reps = [-1.0, 0.0, 1.0, 2.0]
                .iter()
                .map(|&x| {
                    let mu = DMatrix::zeros(1, 2);
                    StratumPoint {
                        eq_residual: eq_residual(k, &[x], &mu),
                        chi0: vec![x],
                        mu,
                        c: Complex64::zero(),
                    }
                })
                .collect();
            vec![Stratum {
                name: "I".into(),
                description:
                    "A = 0; abelian bracket forces the eigen-equation to vanish; moduli = R".into(),
                chi_norm: ChiNormConstraint::Any,
                mu_complex_dim: 0,
                parameters: vec!["chi0 in R".into()],
                representatives: reps,
            }]
        }
        (TargetFamily::Su2, _) => {
            let stratum_one = [0.0, 1.0, 2.0, 3.0]
                .iter()
                .map(|&t| {
                    let chi0 = vec![t, 0.0, 0.0];
                    let mu = DMatrix::zeros(3, 2);
                    StratumPoint {
                        eq_residual: eq_residual(k, &chi0, &mu),
                        chi0,
                        mu,
                        c: Complex64::zero(),
                    }
                })
                .collect();
            let stratum_two = [0.5, 1.0, 2.0]
                .iter()
                .map(|&c| {
                    let chi0 = vec![2.0, 0.0, 0.0];
                    // A = c (e2 - i e3): C = c e2, B = -c e3.
                    let mu = DMatrix::from_column_slice(3, 2, &[0.0, 0.0, -c, 0.0, c, 0.0]);
                    StratumPoint {
                        eq_residual: eq_residual(k, &chi0, &mu),
                        chi0,
                        mu,
                        c: Complex64::new(c, 0.0),
                    }
                })
                .collect();
            vec![
                Stratum {
                    name: "I".into(),
                    description: "A = 0, chi0 conjugated to t*e1".into(),
                    chi_norm: ChiNormConstraint::NonNegative,
                    mu_complex_dim: 0,
                    parameters: vec!["t in [0, inf)".into()],
                    representatives: stratum_one,
                },
                Stratum {
                    name: "II".into(),
                    description:
                        "chi0 = 2*e1, A = c*(e2 - i*e3) in the 2i-eigenspace, phase absorbed by the stabilizer circle"
                            .into(),
                    chi_norm: ChiNormConstraint::Exactly(2.0),
                    mu_complex_dim: 1,
                    parameters: vec!["c in (0, inf)".into()],
                    representatives: stratum_two,
                },
            ]
        }
        _ => {
            return Err(Error::UnsupportedTargetAlgebra(format!(
                "{} (half-plane moduli are tabulated for u1 and su2)",
                k.name()
            )))
        }
    };
    Ok(HalfPlaneStratification {
        target: k.name().to_string(),
        strata,
    })
}

/// Independent eigenvalue oracle for the half-plane equation
/// `[χ₀, A] = 2iA`.
#[derive(Debug, Clone)]
pub struct EigenStratum {
    pub admissible: bool,
    pub eigenvalues: Vec<Complex64>,
    /// Basis of the `2i`-eigenspace, each normalized so its first nonzero
    /// entry equals one.
    pub eigenvectors: Vec<DVector<Complex64>>,
}

pub const EIGEN_TOL: f64 = 1e-9;

pub fn oracle_eigen_stratum(k: &LieAlgebra, chi0: &[f64]) -> Result<EigenStratum> {
    let ad = k.adjoint_rep_f64(chi0)?;
    let n = k.dim();
    let target = Complex64::new(0.0, 2.0);
    let mut eigenvalues: Vec<Complex64> =
        ad.clone().complex_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let admissible = eigenvalues.iter().any(|z| (z - target).norm() <= EIGEN_TOL);
    let mut eigenvectors = Vec::new();
    if admissible {
        let shifted: DMatrix<Complex64> =
            ad.map(|x| Complex64::new(x, 0.0)) - DMatrix::<Complex64>::identity(n, n) * target;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= EIGEN_TOL * smax.max(1.0) {
                let v: DVector<Complex64> = v_t.row(i).adjoint();
                let lead = v
                    .iter()
                    .find(|z| z.norm() > 1e-9)
                    .cloned()
                    .unwrap_or(Complex64::new(1.0, 0.0));
                eigenvectors.push(v / lead);
            }
        }
    }
    Ok(EigenStratum {
        admissible,
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductive::check_invariant_complement;

    #[test]
    fn every_preset_loads_and_splits_are_invariant() {
        for name in PRESET_NAMES {
            let e = load_preset(name).unwrap();
            if let Some(split) = &e.split {
                assert!(
                    check_invariant_complement(&e.algebra, split.isotropy(), split.complement()).0
                );
            }
        }
        assert_eq!(load_preset("abelian_4").unwrap().algebra.dim(), 4);
        assert!(matches!(load_preset("so5"), Err(Error::UnknownPreset(_))));
        assert!(matches!(
            load_preset("abelian_0"),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn u1_is_one_dimensional_abelian() {
        let e = load_preset("u1").unwrap();
        assert_eq!(e.algebra.dim(), 1);
        assert!(e.algebra.is_abelian());
    }

    #[test]
    fn halfplane_matches_basis_relations() {
        let s = sl2r();
        let e = |i| s.basis_vector(i);
        assert_eq!(s.bracket(&e(0), &e(1)).unwrap(), vec![q(0), q(0), q(2)]);
        assert_eq!(s.bracket(&e(0), &e(2)).unwrap(), vec![q(0), q(-2), q(0)]);
        assert_eq!(s.bracket(&e(1), &e(2)).unwrap(), vec![q(-2), q(0), q(0)]);
    }

    #[test]
    fn su2_eigen_oracle() {
        let k = su2();
        let hit = oracle_eigen_stratum(&k, &[2.0, 0.0, 0.0]).unwrap();
        assert!(hit.admissible);
        assert_eq!(hit.eigenvectors.len(), 1);
        let v = &hit.eigenvectors[0];
        // e2 - i e3
        assert!((v[0]).norm() < 1e-12);
        assert!((v[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((v[2] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(
            !oracle_eigen_stratum(&k, &[1.0, 0.0, 0.0])
                .unwrap()
                .admissible
        );
        assert!(!oracle_eigen_stratum(&u1(), &[3.7]).unwrap().admissible);
    }

    #[test]
    fn stratification_points_satisfy_the_eigen_equation() {
        for k in [u1(), su2()] {
            let strat = halfplane_moduli(&k).unwrap();
            for st in &strat.strata {
                for p in &st.representatives {
                    assert!(p.eq_residual <= 1e-10, "{} {}", st.name, p.eq_residual);
                }
            }
        }
        assert_eq!(halfplane_moduli(&u1()).unwrap().strata.len(), 1);
        assert_eq!(halfplane_moduli(&su2()).unwrap().strata.len(), 2);
        assert!(halfplane_moduli(&sl2r()).is_err());
    }

    #[test]
    fn su3_has_integer_structure_constants_and_is_compact() {
        let k = su3();
        assert_eq!(k.dim(), 8);
        let r = crate::lie::structure_report(&k, 0).unwrap();
        assert!(r.is_semisimple && r.is_compact);
        assert_eq!(r.simple_ideals.len(), 1);
    }
}
