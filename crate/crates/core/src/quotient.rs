//! Conjugation action of `K` on pairs `(χ, μ)`: invariant fingerprints,
//! orbit matching and canonical forms for abelian and su2 targets.
//!
//! Only the identity component is used: group elements are `exp(ad x)`.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::{is_compact, LieAlgebra};
use crate::linalg::{QMatrix, Rational};
use crate::moduli::InvariantConnectionPoint;
use crate::presets;

pub const DEFAULT_DEGREE: usize = 3;
pub const MAX_DEGREE: usize = 4;
/// Fingerprints farther apart than this certify distinct orbits.
pub const FINGERPRINT_SEPARATION: f64 = 1e-6;
/// Matching residuals below this certify a common orbit.
pub const MATCH_TOL: f64 = 1e-8;

const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetFamily {
    Abelian,
    Su2,
}

/// Families with closed-form canonical representatives. su2 is recognized
/// only in the preset basis.
pub fn target_family(k: &LieAlgebra) -> Result<TargetFamily> {
    if k.is_abelian() {
        Ok(TargetFamily::Abelian)
    } else if k.same_table(&presets::su2()) {
        Ok(TargetFamily::Su2)
    } else {
        Err(Error::UnsupportedTargetAlgebra(format!(
            "{} (canonical forms exist for abelian targets and su2 in its preset basis)",
            k.name()
        )))
    }
}

/// Column space basis of the given vectors.
fn span_basis(n: usize, vectors: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = QMatrix::from_columns(n, vectors);
    let (_, pivots) = m.rref();
    pivots.iter().map(|&c| m.column(c)).collect()
}

/// Ad-invariant inner product `-K/c + πᵀπ`, where `K` is the Killing form,
/// `c` its largest diagonal magnitude and `π` the projection onto the center
/// along the derived algebra.
pub fn invariant_inner_product(k: &LieAlgebra) -> Result<DMatrix<f64>> {
    Ok(center_data(k)?.0)
}

fn center_data(k: &LieAlgebra) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !is_compact(k) {
        return Err(Error::NoInvariantInnerProduct);
    }
    let n = k.dim();
    let killing = k.killing_form().matrix.to_f64();
    let c = (0..n).map(|i| -killing[(i, i)]).fold(0.0, f64::max);
    let mut g = if c > 0.0 {
        -killing / c
    } else {
        DMatrix::zeros(n, n)
    };

    let center = k.center();
    let mut brackets = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let b = k.bracket_unchecked(&k.basis_vector(i), &k.basis_vector(j));
            if b.iter().any(|x| !x.is_zero()) {
                brackets.push(b);
            }
        }
    }
    let derived = span_basis(n, &brackets);
    let z = center.dim();
    let pi = if z == 0 {
        DMatrix::zeros(0, n)
    } else {
        let mut cols = center.basis().to_vec();
        cols.extend(derived);
        let inv = QMatrix::from_columns(n, &cols)
            .inverse()
            .expect("compact algebra is center plus derived algebra");
        inv.to_f64().rows(0, z).clone_owned()
    };
    g += pi.transpose() * &pi;
    Ok((g, pi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantFingerprint {
    pub degree: usize,
    pub values: Vec<f64>,
}

impl InvariantFingerprint {
    pub fn distance(&self, other: &InvariantFingerprint) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the invariant words on the stacked columns `v = (χ | μ)`:
/// center coordinates `π(v_a)`, `⟨v_a, v_b⟩`, `⟨v_a, [v_b, v_c]⟩` and
/// `⟨[v_a, v_b], [v_c, v_d]⟩`, up to the requested degree.
#[derive(Debug, Clone)]
pub struct Fingerprinter {
    k: LieAlgebra,
    g: DMatrix<f64>,
    pi: DMatrix<f64>,
    degree: usize,
}

impl Fingerprinter {
    pub fn new(k: &LieAlgebra) -> Result<Self> {
        Self::with_degree(k, DEFAULT_DEGREE)
    }

    pub fn with_degree(k: &LieAlgebra, degree: usize) -> Result<Self> {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::InvalidArgument(format!(
                "fingerprint degree must be between 1 and {MAX_DEGREE}, got {degree}"
            )));
        }
        let (g, pi) = center_data(k)?;
        Ok(Fingerprinter {
            k: k.clone(),
            g,
            pi,
            degree,
        })
    }

    pub fn inner_product(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub(crate) fn fingerprint_parts(&self, chi: &DMatrix<f64>, mu: &DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<DVector<f64>> = chi.column_iter().map(|c| c.clone_owned()).collect();
        v.extend(mu.column_iter().map(|c| c.clone_owned()));
        self.words(&v)
    }

    pub fn fingerprint(&self, point: &InvariantConnectionPoint) -> InvariantFingerprint {
        InvariantFingerprint {
            degree: self.degree,
            values: self.fingerprint_parts(point.chi.matrix(), &point.mu.matrix),
        }
    }

    fn ip(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.g * y)[(0, 0)]
    }

    #[allow(clippy::needless_range_loop)]
    fn words(&self, v: &[DVector<f64>]) -> Vec<f64> {
        let m = v.len();
        let mut out = Vec::new();
        for x in v {
            out.extend((&self.pi * x).iter());
        }
        if self.degree >= 2 {
            for a in 0..m {
                for b in a..m {
                    out.push(self.ip(&v[a], &v[b]));
                }
            }
        }
        if self.degree >= 3 {
            let mut br = vec![vec![None; m]; m];
            for a in 0..m {
                for b in a + 1..m {
                    br[a][b] = Some(self.k.bracket_vec(&v[a], &v[b]));
                }
            }
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        out.push(self.ip(&v[a], br[b][c].as_ref().expect("b < c")));
                    }
                }
            }
            if self.degree >= 4 {
                let pairs: Vec<(usize, usize)> = (0..m)
                    .flat_map(|a| (a + 1..m).map(move |b| (a, b)))
                    .collect();
                for (i, &(a, b)) in pairs.iter().enumerate() {
                    for &(c, d) in &pairs[i..] {
                        out.push(self.ip(
                            br[a][b].as_ref().expect("a < b"),
                            br[c][d].as_ref().expect("c < d"),
                        ));
                    }
                }
            }
        }
        out
    }
}

pub fn fingerprint(
    k: &LieAlgebra,
    point: &InvariantConnectionPoint,
    degree: usize,
) -> Result<InvariantFingerprint> {
    Ok(Fingerprinter::with_degree(k, degree)?.fingerprint(point))
}

/// `exp(ad x)`.
pub fn group_element(k: &LieAlgebra, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(k.adjoint_rep_f64(x)?.exp())
}

/// `exp(ad x)·(χ, μ)`: both maps are post-composed with `exp(ad x)`.
pub fn conjugate(
    k: &LieAlgebra,
    x: &[f64],
    point: &InvariantConnectionPoint,
) -> Result<InvariantConnectionPoint> {
    let g = group_element(k, x)?;
    Ok(apply(&g, point))
}

fn apply(g: &DMatrix<f64>, point: &InvariantConnectionPoint) -> InvariantConnectionPoint {
    let r = point.chi.matrix().ncols();
    InvariantConnectionPoint::from_stacked(&(g * point.stacked()), r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Same,
    Different,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitVerdict {
    pub verdict: Verdict,
    pub fingerprint_distance: Option<f64>,
    /// Frobenius distance `‖exp(ad x)·p - q‖` at the best generator found.
    pub matching_distance: Option<f64>,
    pub generator: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitOptions {
    pub seed: u64,
    /// Random restarts in addition to `x = 0`.
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            seed: 0,
            starts: 16,
            max_iter: 200,
            tol: MATCH_TOL,
        }
    }
}

fn matching_residual(
    k: &LieAlgebra,
    x: &DVector<f64>,
    vp: &DMatrix<f64>,
    vq: &DMatrix<f64>,
) -> DVector<f64> {
    let g = k
        .adjoint_rep_f64(x.as_slice())
        .expect("generator has dim k entries")
        .exp();
    let d = g * vp - vq;
    DVector::from_column_slice(d.as_slice())
}

/// Levenberg–Marquardt on `x ↦ exp(ad x)·V_p - V_q` with a central
/// difference Jacobian.
fn match_from(
    k: &LieAlgebra,
    mut x: DVector<f64>,
    vp: &DMatrix<f64>,
    vq: &DMatrix<f64>,
    opts: &OrbitOptions,
) -> (DVector<f64>, f64) {
    let n = x.len();
    let mut r = matching_residual(k, &x, vp, vq);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let h = 1e-7;
    for _ in 0..opts.max_iter {
        if cost.sqrt() < opts.tol * 1e-2 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), n);
        for a in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[a] += h;
            xm[a] -= h;
            let col =
                (matching_residual(k, &xp, vp, vq) - matching_residual(k, &xm, vp, vq)) / (2.0 * h);
            jac.set_column(a, &col);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = lhs.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let xt = &x + &step;
            let rt = matching_residual(k, &xt, vp, vq);
            let ct = rt.norm_squared();
            if ct < cost {
                x = xt;
                r = rt;
                cost = ct;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt())
}

fn check_same_shape(p: &InvariantConnectionPoint, q: &InvariantConnectionPoint) -> Result<()> {
    if p.chi.matrix().shape() != q.chi.matrix().shape()
        || p.mu.matrix.shape() != q.mu.matrix.shape()
    {
        return Err(Error::ShapeMismatch {
            what: "second point".into(),
            expected: p.stacked().shape(),
            found: q.stacked().shape(),
        });
    }
    Ok(())
}

pub fn same_orbit(
    k: &LieAlgebra,
    p: &InvariantConnectionPoint,
    q: &InvariantConnectionPoint,
    opts: &OrbitOptions,
) -> Result<OrbitVerdict> {
    check_same_shape(p, q)?;
    let fingerprint_distance = match Fingerprinter::new(k) {
        Ok(f) => Some(f.fingerprint(p).distance(&f.fingerprint(q))),
        Err(Error::NoInvariantInnerProduct) => None,
        Err(e) => return Err(e),
    };
    if let Some(d) = fingerprint_distance {
        if d > FINGERPRINT_SEPARATION {
            return Ok(OrbitVerdict {
                verdict: Verdict::Different,
                fingerprint_distance,
                matching_distance: None,
                generator: None,
            });
        }
    }
    let (vp, vq) = (p.stacked(), q.stacked());
    let n = k.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(DVector<f64>, f64)> = None;
    for start in 0..=opts.starts {
        let x0 = if start == 0 {
            DVector::zeros(n)
        } else {
            DVector::from_fn(n, |_, _| {
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
            })
        };
        let (x, d) = match_from(k, x0, &vp, &vq, opts);
        if best.as_ref().is_none_or(|(_, bd)| d < *bd) {
            best = Some((x, d));
        }
        if d < opts.tol {
            break;
        }
    }
    let (x, d) = best.expect("at least one start");
    Ok(OrbitVerdict {
        verdict: if d < opts.tol {
            Verdict::Same
        } else {
            Verdict::Unknown
        },
        fingerprint_distance,
        matching_distance: Some(d),
        generator: Some(x.iter().copied().collect()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPoint {
    pub point: InvariantConnectionPoint,
    /// `x` with `point = exp(ad x)·input`.
    pub generator: Vec<f64>,
    /// su2 only: `χ₀ = t·e1` after canonicalization.
    pub t: Option<f64>,
    /// su2 only: the leading coordinate of `A = μ(F) + iμ(E)` along
    /// `e2 - i e3`, real and nonnegative after canonicalization.
    pub c: Option<Complex64>,
}

pub fn canonicalize(k: &LieAlgebra, point: &InvariantConnectionPoint) -> Result<CanonicalPoint> {
    match target_family(k)? {
        TargetFamily::Abelian => Ok(CanonicalPoint {
            point: point.clone(),
            generator: vec![0.0; k.dim()],
            t: None,
            c: None,
        }),
        TargetFamily::Su2 => canonicalize_su2(point),
    }
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Rotation by `angle` about the unit vector `axis`.
fn rotation(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let k = skew(axis);
    Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos())
}

/// Minimal rotation taking the unit vector `u` to `e1`.
fn align_to_e1(u: &Vector3<f64>) -> Matrix3<f64> {
    let e1 = Vector3::x();
    let cos = u.dot(&e1).clamp(-1.0, 1.0);
    let axis = u.cross(&e1);
    let s = axis.norm();
    if s < ZERO_TOL {
        if cos > 0.0 {
            Matrix3::identity()
        } else {
            rotation(&Vector3::z(), std::f64::consts::PI)
        }
    } else {
        rotation(&(axis / s), s.atan2(cos))
    }
}

/// Generator `x` with `exp([x]×) = r`.
fn rotation_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    // w = 2 sin θ · axis
    let sin = w.norm() / 2.0;
    let cos = (r.trace() - 1.0) / 2.0;
    let theta = sin.atan2(cos);
    if sin < 1e-6 && cos < 0.0 {
        let b = (r + Matrix3::identity()) / 2.0;
        let col = (0..3)
            .max_by(|&i, &j| b.column(i).norm().total_cmp(&b.column(j).norm()))
            .expect("three columns");
        let mut axis = b.column(col).normalize();
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
        return axis * theta;
    }
    if sin < 1e-12 {
        return w / 2.0;
    }
    w * (theta / (2.0 * sin))
}

fn su2_leading(b: &Vector3<f64>, c: &Vector3<f64>) -> (Complex64, Complex64) {
    let a2 = Complex64::new(c[1], b[1]);
    let a3 = Complex64::new(c[2], b[2]);
    let i = Complex64::i();
    ((a2 + i * a3) / 2.0, (a2 - i * a3) / 2.0)
}

fn canonicalize_su2(point: &InvariantConnectionPoint) -> Result<CanonicalPoint> {
    let chi = point.chi.matrix();
    let mu = &point.mu.matrix;
    if chi.shape() != (3, 1) || mu.shape() != (3, 2) {
        return Err(Error::UnsupportedTargetAlgebra(
            "su2 canonical forms cover half-plane-type points (dim h0 = 1, dim s = 2)".into(),
        ));
    }
    let chi0 = Vector3::new(chi[(0, 0)], chi[(1, 0)], chi[(2, 0)]);
    let b = Vector3::new(mu[(0, 0)], mu[(1, 0)], mu[(2, 0)]);
    let c = Vector3::new(mu[(0, 1)], mu[(1, 1)], mu[(2, 1)]);
    let t = chi0.norm();
    let scale = b.norm().max(c.norm()).max(1.0);

    let rot = if t > ZERO_TOL {
        let r1 = align_to_e1(&(chi0 / t));
        let (cp, cm) = su2_leading(&(r1 * b), &(r1 * c));
        let phi = if cp.norm() > ZERO_TOL * scale {
            -cp.arg()
        } else if cm.norm() > ZERO_TOL * scale {
            cm.arg()
        } else {
            0.0
        };
        rotation(&Vector3::x(), phi) * r1
    } else {
        // Whole SO(3) stabilizes χ₀ = 0: align the singular frame of (B C).
        let m = nalgebra::Matrix3x2::from_columns(&[b, c]);
        let svd = m.svd(true, false);
        let u = svd.u.expect("requested U");
        let (mut u1, mut u2) = (u.column(0).clone_owned(), u.column(1).clone_owned());
        if svd.singular_values[1] > svd.singular_values[0] {
            std::mem::swap(&mut u1, &mut u2);
        }
        let u3 = u1.cross(&u2);
        let mut r1 = Matrix3::from_rows(&[u1.transpose(), u2.transpose(), u3.transpose()]);
        let m1 = r1 * m;
        let lead_negative = |row: usize, m1: &nalgebra::Matrix3x2<f64>| {
            let (a, bb) = (m1[(row, 0)], m1[(row, 1)]);
            let v = if a.abs() >= bb.abs() { a } else { bb };
            v < 0.0
        };
        if lead_negative(0, &m1) {
            r1 = rotation(&Vector3::y(), std::f64::consts::PI) * r1;
        }
        let m1 = r1 * m;
        if lead_negative(1, &m1) {
            r1 = rotation(&Vector3::x(), std::f64::consts::PI) * r1;
        }
        r1
    };

    let x = rotation_log(&rot);
    let g = DMatrix::from_column_slice(3, 3, rot.as_slice());
    let canon = apply(&g, point);
    let (t_out, c_out) = if t > ZERO_TOL {
        let cb = canon.mu.matrix.column(0);
        let cc = canon.mu.matrix.column(1);
        let (cp, _) = su2_leading(
            &Vector3::new(cb[0], cb[1], cb[2]),
            &Vector3::new(cc[0], cc[1], cc[2]),
        );
        (Some(canon.chi.matrix()[(0, 0)]), Some(cp))
    } else {
        (Some(0.0), None)
    };
    Ok(CanonicalPoint {
        point: canon,
        generator: x.iter().copied().collect(),
        t: t_out,
        c: c_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{LieHomChi, MuMap};

    fn hp_point(chi0: [f64; 3], c: Complex64) -> InvariantConnectionPoint {
        // A = c (e2 - i e3) when χ₀ = 2 e1: C = Re A, B = Im A.
        let cr = [0.0, c.re, c.im];
        let bi = [0.0, c.im, -c.re];
        InvariantConnectionPoint::new_unchecked(
            LieHomChi::from_matrix_unchecked(DMatrix::from_column_slice(3, 1, &chi0)),
            MuMap::new(DMatrix::from_column_slice(
                3,
                2,
                &[bi[0], bi[1], bi[2], cr[0], cr[1], cr[2]],
            )),
        )
    }

    #[test]
    fn su2_inner_product_is_identity() {
        let g = invariant_inner_product(&presets::su2()).unwrap();
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-15);
        let g = invariant_inner_product(&presets::u1()).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert!(matches!(
            invariant_inner_product(&presets::sl2r()),
            Err(Error::NoInvariantInnerProduct)
        ));
    }

    #[test]
    fn fingerprint_is_conjugation_invariant() {
        let k = presets::su2();
        let p = hp_point([2.0, 0.0, 0.0], Complex64::new(0.7, -0.2));
        let q = conjugate(&k, &[0.4, -1.3, 2.2], &p).unwrap();
        for degree in 1..=4 {
            let a = fingerprint(&k, &p, degree).unwrap();
            let b = fingerprint(&k, &q, degree).unwrap();
            assert!(a.distance(&b) < 1e-9, "degree {degree}");
        }
        assert!(matches!(
            fingerprint(&k, &p, 5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn fingerprints_separate_norms() {
        let k = presets::su2();
        let one = hp_point([2.0, 0.0, 0.0], Complex64::new(1.0, 0.0));
        let two = hp_point([2.0, 0.0, 0.0], Complex64::new(2.0, 0.0));
        assert!(
            fingerprint(&k, &one, 3)
                .unwrap()
                .distance(&fingerprint(&k, &two, 3).unwrap())
                > 1e-6
        );
        let z1 = hp_point([1.0, 0.0, 0.0], Complex64::new(0.0, 0.0));
        let z2 = hp_point([2.0, 0.0, 0.0], Complex64::new(0.0, 0.0));
        let v = same_orbit(&k, &z1, &z2, &OrbitOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Different);
    }

    #[test]
    fn same_orbit_finds_the_rotation() {
        let k = presets::su2();
        let p = hp_point([2.0, 0.0, 0.0], Complex64::new(1.0, 0.0));
        let q = conjugate(&k, &[0.3, 0.9, -0.6], &p).unwrap();
        let v = same_orbit(&k, &p, &q, &OrbitOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Same, "{v:?}");
        // χ₀ = 2e2 with the eigenvector rotated accordingly
        let r = conjugate(&k, &[0.0, 0.0, std::f64::consts::FRAC_PI_2], &p).unwrap();
        assert!((r.chi.matrix()[(1, 0)] - 2.0).abs() < 1e-12);
        assert_eq!(
            same_orbit(&k, &p, &r, &OrbitOptions::default())
                .unwrap()
                .verdict,
            Verdict::Same
        );
    }

    #[test]
    fn canonical_forms() {
        let k = presets::su2();
        let p = hp_point([0.0, 2.0, 0.0], Complex64::new(0.0, 0.0));
        let cp = canonicalize(&k, &p).unwrap();
        assert!(
            (cp.point.chi.matrix() - DMatrix::from_column_slice(3, 1, &[2.0, 0.0, 0.0])).amax()
                < 1e-12
        );
        let back = conjugate(&k, &cp.generator, &p).unwrap();
        assert!((back.stacked() - cp.point.stacked()).amax() < 1e-12);

        let p = hp_point([2.0, 0.0, 0.0], Complex64::new(0.0, 1.0));
        let cp = canonicalize(&k, &p).unwrap();
        let c = cp.c.unwrap();
        assert!((c - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{c}");

        let u1 = presets::u1();
        let p = InvariantConnectionPoint::new_unchecked(
            LieHomChi::from_matrix_unchecked(DMatrix::from_element(1, 1, 3.0)),
            MuMap::zero(1, 2),
        );
        assert_eq!(canonicalize(&u1, &p).unwrap().point, p);
        assert!(matches!(
            canonicalize(&presets::su3(), &p),
            Err(Error::UnsupportedTargetAlgebra(_))
        ));
    }

    #[test]
    fn rotation_log_round_trips() {
        for x in [
            [0.0, 0.0, 0.0],
            [1e-9, 0.0, 2e-9],
            [0.3, -0.2, 1.0],
            [0.0, 0.0, std::f64::consts::PI - 3e-6],
            [2.0, 1.0, -2.0],
        ] {
            let v = Vector3::from(x);
            let r = if v.norm() > 0.0 {
                rotation(&v.normalize(), v.norm())
            } else {
                Matrix3::identity()
            };
            let back = rotation_log(&r);
            let r2 = if back.norm() > 0.0 {
                rotation(&back.normalize(), back.norm())
            } else {
                Matrix3::identity()
            };
            assert!((r - r2).amax() < 1e-9, "{x:?} {back:?} {r} {r2}");
        }
    }
}
