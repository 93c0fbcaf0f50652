//! Multistart Gauss–Newton on `F_J(μ) = 0` restricted to the intertwiner
//! space.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{intertwiner_space, LieHomChi, MuMap};
use crate::error::Result;
use crate::lie::LieAlgebra;
use crate::linalg::float;
use crate::quotient::Fingerprinter;
use crate::reductive::ComplexStructure;

const ZERO_COEFF_TOL: f64 = 1e-12;
const LOCAL_RANK_TOL: f64 = 1e-8;
const FLAT_TOL: f64 = 1e-8;
const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Starting coordinates are uniform in `[-init_radius, init_radius]`.
    pub init_radius: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            seed: 0,
            starts: 64,
            max_iter: 200,
            tol: 1e-10,
            init_radius: 1.0,
        }
    }
}

/// `F_J` as a polynomial map on intertwiner coordinates: residual over
/// s-basis pairs `p < q`, `dim k` entries per pair.
pub struct Type11System {
    k: LieAlgebra,
    dim_k: usize,
    pairs: Vec<(usize, usize)>,
    /// Per pair: `π_s[s_p, s_q] - π_s[J s_p, J s_q]` in s-coordinates.
    lin_dir: Vec<DVector<f64>>,
    j: DMatrix<f64>,
    basis: Vec<DMatrix<f64>>,
    linear_basis: Vec<DVector<f64>>,
}

impl Type11System {
    pub fn new(cs: &ComplexStructure, k: &LieAlgebra, basis: &[MuMap]) -> Self {
        let split = cs.split();
        let ds = split.dim_s();
        let sbr = &split.cache().s_bracket;
        let j = cs.j_f64().clone();
        let mut pairs = Vec::new();
        let mut lin_dir = Vec::new();
        for p in 0..ds {
            for q in p + 1..ds {
                let mut d = sbr[p * ds + q].clone();
                for a in 0..ds {
                    for b in 0..ds {
                        let w = j[(a, p)] * j[(b, q)];
                        if w != 0.0 {
                            d -= &sbr[a * ds + b] * w;
                        }
                    }
                }
                pairs.push((p, q));
                lin_dir.push(d);
            }
        }
        let mut sys = Type11System {
            k: k.clone(),
            dim_k: k.dim(),
            pairs,
            lin_dir,
            j,
            basis: basis.iter().map(|m| m.matrix.clone()).collect(),
            linear_basis: Vec::new(),
        };
        sys.linear_basis = sys.basis.iter().map(|m| sys.linear(m)).collect();
        sys
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn residual_len(&self) -> usize {
        self.pairs.len() * self.dim_k
    }

    pub fn mu(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim_k, self.j.nrows());
        for (b, &c) in self.basis.iter().zip(y) {
            m += b * c;
        }
        m
    }

    fn linear(&self, mu: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.residual_len());
        for (idx, d) in self.lin_dir.iter().enumerate() {
            let v = -(mu * d);
            out.rows_mut(idx * self.dim_k, self.dim_k).copy_from(&v);
        }
        out
    }

    /// `(p,q) ↦ [μ s_p, ν s_q] - [μ J s_p, ν J s_q]`.
    pub fn bilinear(&self, mu: &DMatrix<f64>, nu: &DMatrix<f64>) -> DVector<f64> {
        let mj = mu * &self.j;
        let nj = nu * &self.j;
        let mut out = DVector::zeros(self.residual_len());
        for (idx, &(p, q)) in self.pairs.iter().enumerate() {
            let a = self
                .k
                .bracket_vec(&mu.column(p).clone_owned(), &nu.column(q).clone_owned());
            let b = self
                .k
                .bracket_vec(&mj.column(p).clone_owned(), &nj.column(q).clone_owned());
            out.rows_mut(idx * self.dim_k, self.dim_k)
                .copy_from(&(a - b));
        }
        out
    }

    pub fn residual_of_mu(&self, mu: &DMatrix<f64>) -> DVector<f64> {
        self.linear(mu) + self.bilinear(mu, mu)
    }

    pub fn residual(&self, y: &[f64]) -> DVector<f64> {
        self.residual_of_mu(&self.mu(y))
    }

    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let mu = self.mu(y);
        let mut jac = DMatrix::zeros(self.residual_len(), self.dim());
        for (a, m) in self.basis.iter().enumerate() {
            let col = &self.linear_basis[a] + self.bilinear(m, &mu) + self.bilinear(&mu, m);
            jac.set_column(a, &col);
        }
        jac
    }

    /// Symmetrized quadratic coefficient `B(M_a, M_b) + B(M_b, M_a)` along
    /// coordinate directions `u`, `v`.
    fn quadratic(&self, u: &[f64], v: &[f64]) -> DVector<f64> {
        let mu = self.mu(u);
        let nu = self.mu(v);
        self.bilinear(&mu, &nu) + self.bilinear(&nu, &mu)
    }

    fn identically_zero(&self) -> bool {
        let d = self.dim();
        if self.linear_basis.iter().any(|l| l.amax() > ZERO_COEFF_TOL) {
            return false;
        }
        for a in 0..d {
            for b in a..d {
                let q = self.bilinear(&self.basis[a], &self.basis[b])
                    + self.bilinear(&self.basis[b], &self.basis[a]);
                if q.amax() > ZERO_COEFF_TOL {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusPoint {
    pub mu: MuMap,
    /// Coordinates in the intertwiner basis.
    pub coords: Vec<f64>,
    pub residual: f64,
    /// `dim S - rank J` at the point.
    pub local_dim: usize,
    pub fingerprint: Option<Vec<f64>>,
    pub start: usize,
}

/// Affine subspace `point + span(directions)` of intertwiner coordinates on
/// which `F_J` vanishes identically.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatComponent {
    /// Minimal-norm point of the subspace.
    pub point: Vec<f64>,
    /// Orthonormal directions.
    pub directions: Vec<Vec<f64>>,
    /// Number of starts that converged onto this component.
    pub hits: usize,
}

impl FlatComponent {
    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn distance(&self, y: &[f64]) -> f64 {
        let mut r: Vec<f64> = y.iter().zip(&self.point).map(|(a, b)| a - b).collect();
        for d in &self.directions {
            let t: f64 = r.iter().zip(d).map(|(a, b)| a * b).sum();
            for (ri, di) in r.iter_mut().zip(d) {
                *ri -= t * di;
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn projector(&self) -> DMatrix<f64> {
        let n = self.point.len();
        let mut p = DMatrix::zeros(n, n);
        for d in &self.directions {
            let v = DVector::from_column_slice(d);
            p += &v * v.transpose();
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartFailure {
    pub start: usize,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct HolomorphicLocus {
    pub dim_s: usize,
    pub basis: Vec<MuMap>,
    /// `F_J` vanishes on all of `S`.
    pub identically_zero: bool,
    pub empty_intertwiner: bool,
    pub solutions: Vec<LocusPoint>,
    pub components: Vec<FlatComponent>,
    pub failures: Vec<StartFailure>,
}

impl HolomorphicLocus {
    /// Distance in intertwiner coordinates from `y` to the nearest reported
    /// component or solution point.
    pub fn distance(&self, y: &[f64]) -> f64 {
        let comps = self.components.iter().map(|c| c.distance(y));
        let pts = self.solutions.iter().map(|s| dist(&s.coords, y));
        comps.chain(pts).fold(f64::INFINITY, f64::min)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn cmp_coords(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

enum StartOutcome {
    Converged { y: Vec<f64>, residual: f64 },
    Failed(StartFailure),
}

fn gauss_newton(
    sys: &Type11System,
    mut y: Vec<f64>,
    opts: &SolverOptions,
    start: usize,
) -> StartOutcome {
    let mut r = sys.residual(&y);
    for _ in 0..opts.max_iter {
        let rmax = r.amax();
        if rmax <= opts.tol {
            return StartOutcome::Converged { y, residual: rmax };
        }
        let jac = sys.jacobian(&y);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = match svd.solve(&(-&r), 1e-12 * smax.max(1e-300)) {
            Ok(s) => s,
            Err(e) => {
                return StartOutcome::Failed(StartFailure {
                    start,
                    residual: rmax,
                    reason: format!("least-squares step failed: {e}"),
                })
            }
        };
        let norm0 = r.norm();
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = y
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + alpha * s)
                .collect();
            let rt = sys.residual(&trial);
            if rt.norm() < (1.0 - 1e-4 * alpha) * norm0 {
                y = trial;
                r = rt;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-10 {
                return StartOutcome::Failed(StartFailure {
                    start,
                    residual: rmax,
                    reason: "line search stalled".into(),
                });
            }
        }
    }
    let rmax = r.amax();
    if rmax <= opts.tol {
        return StartOutcome::Converged { y, residual: rmax };
    }
    StartOutcome::Failed(StartFailure {
        start,
        residual: rmax,
        reason: format!("no convergence after {} iterations", opts.max_iter),
    })
}

/// Tangent directions at a converged point, and whether the affine span
/// through the point is contained in the locus.
fn tangent_analysis(sys: &Type11System, y: &[f64]) -> (DMatrix<f64>, bool) {
    let jac = sys.jacobian(y);
    let full = float::nullspace_floor(&jac, LOCAL_RANK_TOL);
    if full.ncols() == 0 {
        return (full, false);
    }
    let tangent = float::canonical_basis(&full);
    let scale = 1.0 + DVector::from_column_slice(y).norm();
    let mut flat = true;
    'outer: for a in 0..tangent.ncols() {
        for b in a..tangent.ncols() {
            let q = sys.quadratic(tangent.column(a).as_slice(), tangent.column(b).as_slice());
            if q.amax() > FLAT_TOL * scale {
                flat = false;
                break 'outer;
            }
        }
    }
    (tangent, flat)
}

fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("INVMOD_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        b = b.num_threads(n);
    }
    b.build().expect("thread pool")
}

pub fn solve_holomorphic_locus(
    cs: &ComplexStructure,
    k: &LieAlgebra,
    chi: &LieHomChi,
    opts: &SolverOptions,
) -> Result<HolomorphicLocus> {
    let split = cs.split();
    let space = intertwiner_space(split, k, chi)?;
    let d = space.dim();
    let fp = Fingerprinter::new(k).ok();
    let make_point = |y: Vec<f64>, residual: f64, local_dim: usize, start: usize| {
        let mu = space.point(&y);
        let fingerprint = fp
            .as_ref()
            .map(|f| f.fingerprint_parts(&chi.matrix, &mu.matrix));
        LocusPoint {
            mu,
            coords: y,
            residual,
            local_dim,
            fingerprint,
            start,
        }
    };

    if d == 0 {
        return Ok(HolomorphicLocus {
            dim_s: 0,
            basis: Vec::new(),
            identically_zero: true,
            empty_intertwiner: true,
            solutions: vec![make_point(Vec::new(), 0.0, 0, 0)],
            components: Vec::new(),
            failures: Vec::new(),
        });
    }

    let sys = Type11System::new(cs, k, &space.basis);
    if sys.identically_zero() {
        let directions = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        return Ok(HolomorphicLocus {
            dim_s: d,
            basis: space.basis.clone(),
            identically_zero: true,
            empty_intertwiner: false,
            solutions: Vec::new(),
            components: vec![FlatComponent {
                point: vec![0.0; d],
                directions,
                hits: 0,
            }],
            failures: Vec::new(),
        });
    }

    let outcomes: Vec<StartOutcome> = thread_pool().install(|| {
        (0..opts.starts)
            .into_par_iter()
            .map(|start| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(start as u64);
                let y0: Vec<f64> = (0..d)
                    .map(|_| rng.random_range(-opts.init_radius..=opts.init_radius))
                    .collect();
                gauss_newton(&sys, y0, opts, start)
            })
            .collect()
    });

    let mut components: Vec<FlatComponent> = Vec::new();
    let mut solutions: Vec<LocusPoint> = Vec::new();
    let mut failures = Vec::new();
    for (start, outcome) in outcomes.into_iter().enumerate() {
        let (y, residual) = match outcome {
            StartOutcome::Converged { y, residual } => (y, residual),
            StartOutcome::Failed(f) => {
                failures.push(f);
                continue;
            }
        };
        if let Some(c) = components.iter_mut().find(|c| c.distance(&y) <= DEDUP_TOL) {
            c.hits += 1;
            continue;
        }
        let (tangent, flat) = tangent_analysis(&sys, &y);
        if flat && tangent.ncols() > 0 {
            let yv = DVector::from_column_slice(&y);
            let proj = &tangent * (tangent.transpose() * &yv);
            let point: Vec<f64> = (yv - proj).iter().copied().collect();
            let directions = tangent
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect();
            let comp = FlatComponent {
                point,
                directions,
                hits: 1,
            };
            let dup = components.iter_mut().find(|c| {
                c.dim() == comp.dim()
                    && dist(&c.point, &comp.point) <= DEDUP_TOL
                    && float::max_abs(&(c.projector() - comp.projector())) <= DEDUP_TOL
            });
            match dup {
                Some(c) => c.hits += 1,
                None => components.push(comp),
            }
            continue;
        }
        let p = make_point(y, residual, tangent.ncols(), start);
        let dup = solutions.iter().any(|s| {
            let fp_close = match (&s.fingerprint, &p.fingerprint) {
                (Some(a), Some(b)) => dist(a, b) <= DEDUP_TOL,
                _ => true,
            };
            fp_close && dist(&s.coords, &p.coords) <= DEDUP_TOL
        });
        if !dup {
            solutions.push(p);
        }
    }
    // points found before a component that contains them
    solutions.retain(|s| components.iter().all(|c| c.distance(&s.coords) > DEDUP_TOL));
    solutions.sort_by(|a, b| cmp_coords(&a.coords, &b.coords));
    components.sort_by(|a, b| {
        a.dim()
            .cmp(&b.dim())
            .then_with(|| cmp_coords(&a.point, &b.point))
            .then_with(|| {
                let fa: Vec<f64> = a.directions.concat();
                let fb: Vec<f64> = b.directions.concat();
                cmp_coords(&fa, &fb)
            })
    });
    Ok(HolomorphicLocus {
        dim_s: d,
        basis: space.basis,
        identically_zero: false,
        empty_intertwiner: false,
        solutions,
        components,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moduli::{type11_defect, validate_chi_on_split};
    use crate::presets;

    #[test]
    fn system_residual_matches_defect() {
        let cs = presets::product_complex_structure();
        let k = presets::su3();
        let chi = validate_chi_on_split(cs.split(), &k, presets::su3_product_chi()).unwrap();
        let space = intertwiner_space(cs.split(), &k, &chi).unwrap();
        assert_eq!(space.dim(), 4);
        let sys = Type11System::new(&cs, &k, &space.basis);
        let y = [0.3, -0.7, 1.1, 0.2];
        let mu = space.point(&y);
        let defect = type11_defect(&cs, &k, &mu).unwrap();
        assert!((sys.residual(&y) - defect.tensor.pair_values()).amax() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let cs = presets::product_complex_structure();
        let k = presets::su3();
        let chi = validate_chi_on_split(cs.split(), &k, presets::su3_product_chi()).unwrap();
        let space = intertwiner_space(cs.split(), &k, &chi).unwrap();
        let sys = Type11System::new(&cs, &k, &space.basis);
        let y = [0.4, 0.1, -0.5, 0.9];
        let jac = sys.jacobian(&y);
        let h = 1e-6;
        for a in 0..4 {
            let mut yp = y;
            let mut ym = y;
            yp[a] += h;
            ym[a] -= h;
            let fd = (sys.residual(&yp) - sys.residual(&ym)) / (2.0 * h);
            assert!((fd - jac.column(a)).amax() < 1e-7);
        }
    }

    #[test]
    fn halfplane_locus_is_whole_space() {
        let cs = presets::halfplane_complex_structure();
        let k = presets::su2();
        let chi = validate_chi_on_split(
            cs.split(),
            &k,
            DMatrix::from_column_slice(3, 1, &[0.0, 2.0, 0.0]),
        )
        .unwrap();
        let locus = solve_holomorphic_locus(&cs, &k, &chi, &SolverOptions::default()).unwrap();
        assert!(locus.identically_zero);
        assert_eq!(locus.components.len(), 1);
        assert_eq!(locus.components[0].dim(), 2);
    }

    #[test]
    fn empty_intertwiner_returns_zero() {
        let cs = presets::halfplane_complex_structure();
        let k = presets::u1();
        let chi = validate_chi_on_split(cs.split(), &k, DMatrix::from_element(1, 1, 0.5)).unwrap();
        let locus = solve_holomorphic_locus(&cs, &k, &chi, &SolverOptions::default()).unwrap();
        assert!(locus.empty_intertwiner);
        assert_eq!(locus.solutions.len(), 1);
        assert_eq!(locus.solutions[0].mu, MuMap::zero(1, 2));
    }

    #[test]
    fn su3_product_locus_is_two_planes() {
        let cs = presets::product_complex_structure();
        let k = presets::su3();
        let chi = validate_chi_on_split(cs.split(), &k, presets::su3_product_chi()).unwrap();
        let opts = SolverOptions {
            starts: 16,
            ..SolverOptions::default()
        };
        let locus = solve_holomorphic_locus(&cs, &k, &chi, &opts).unwrap();
        assert!(!locus.identically_zero);
        assert_eq!(locus.components.len(), 2, "{:?}", locus.components);
        assert!(locus
            .components
            .iter()
            .all(|c| c.dim() == 2 && c.point.iter().all(|x| x.abs() < 1e-8)));
        let again = solve_holomorphic_locus(&cs, &k, &chi, &opts).unwrap();
        assert_eq!(again.components, locus.components);
    }
}
