//! Command-line front end. [`run`] parses arguments, performs one
//! computation and returns the exit code with the rendered report.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 unsatisfiable
//! request (e.g. no invariant complement). Codes 2 and 3 still produce a
//! report.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::io::{self, float_value, float_vec_value, matrix_value, qmatrix_value, rational_value};
use crate::lie::{hypothesis_report, structure_report, LieAlgebra, StructureReport, Subspace};
use crate::moduli::{
    connection_space_description, curvature_mu, equivariance_check, solve_holomorphic_locus,
    type11_defect, validate_chi_on_split, CurvatureTensor, InvariantConnectionPoint, LieHomChi,
    MuMap, SolverOptions,
};
use crate::presets::{self, PresetEntry};
use crate::quotient::{self, Fingerprinter};
use crate::reductive::{
    check_invariant_complement, find_invariant_complement, gamma0_type11_check, nijenhuis_defect,
    ComplementOutcome, ComplementViolation, ComplexStructure, ReductiveSplit,
};

pub const WARN_LIE_LEVEL: &str = "results are at Lie algebra level: group statements hold for the simply connected cover (PSL(2,R) and SL(2,R) are not distinguished)";
pub const WARN_CONNECTED: &str =
    "invariance is checked for ad(h0); this agrees with Ad(H0)-invariance only for connected H0";
pub const WARN_CONJUGATION: &str = "conjugation uses the identity component exp(ad k); components of a disconnected K are not handled";
pub const WARN_INTEGRABILITY: &str = "integrability (projected-Nijenhuis criterion): the s-projected Nijenhuis test is not known to be equivalent to integrability for every reductive split";

#[derive(Parser, Debug)]
#[command(
    name = "invmod",
    version,
    about = "Invariant connections and holomorphic bundles on homogeneous spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Validate an algebra and optional isotropy, split and J.
    Validate,
    /// Find an ad(h0)-invariant complement or a certificate that none exists.
    Complement,
    /// Intertwiner space S of a homomorphism chi.
    Intertwiners,
    /// Curvature of the connection given by mu.
    Curvature,
    /// Type-(1,1) defect F_J of mu.
    Type11,
    /// Solve F_J(mu) = 0 on the intertwiner space.
    Holomorphic,
    /// Fingerprint and canonical form of a point (chi, mu).
    Moduli,
    /// Strata of the half-plane moduli space for a target k.
    Halfplane,
    /// Check the hypotheses identifying holomorphic bundles with the moduli quotient.
    ReportHypotheses,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Complement => "complement",
            Command::Intertwiners => "intertwiners",
            Command::Curvature => "curvature",
            Command::Type11 => "type11",
            Command::Holomorphic => "holomorphic",
            Command::Moduli => "moduli",
            Command::Halfplane => "halfplane",
            Command::ReportHypotheses => "report-hypotheses",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(clap::Args, Debug, Clone)]
struct Opts {
    /// Lie algebra JSON file.
    #[arg(long, global = true, value_name = "FILE")]
    algebra: Option<PathBuf>,
    /// Isotropy subspace JSON file.
    #[arg(long, global = true, value_name = "FILE")]
    isotropy: Option<PathBuf>,
    /// Reductive split JSON file.
    #[arg(long, global = true, value_name = "FILE")]
    split: Option<PathBuf>,
    /// Homomorphism chi JSON file ({"matrix": ...}, dim k rows).
    #[arg(long, global = true, value_name = "FILE")]
    chi: Option<PathBuf>,
    /// Map mu JSON file ({"matrix": ...}, dim k rows, dim s columns).
    #[arg(long, global = true, value_name = "FILE")]
    mu: Option<PathBuf>,
    /// Complex structure JSON file ({"J": ...} in s-coordinates).
    #[arg(long = "J", global = true, value_name = "FILE")]
    j: Option<PathBuf>,
    /// Target algebra: JSON file or preset name.
    #[arg(long, global = true, value_name = "FILE|NAME")]
    k: Option<String>,
    /// Built-in algebra or split.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solver residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Solver starts.
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// Solver iterations per start.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Invalid(Error),
    Unsatisfiable(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type Step<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Step<T> {
    Err(Failure::Usage(msg.into()))
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::ShapeMismatch { .. } => "ShapeMismatch",
        Error::AntisymmetryViolation { .. } => "AntisymmetryViolation",
        Error::JacobiViolation { .. } => "JacobiViolation",
        Error::NotASubalgebra { .. } => "NotASubalgebra",
        Error::InvalidSubspace(_) => "InvalidSubspace",
        Error::DecompositionFailed(_) => "DecompositionFailed",
        Error::InvalidJ(_) => "InvalidJ",
        Error::NotAHomomorphism { .. } => "NotAHomomorphism",
        Error::SplitMismatch(_) => "SplitMismatch",
        Error::NoInvariantInnerProduct => "NoInvariantInnerProduct",
        Error::UnsupportedTargetAlgebra(_) => "UnsupportedTargetAlgebra",
        Error::UnknownPreset(_) => "UnknownPreset",
        Error::InvalidArgument(_) => "InvalidArgument",
        Error::Parse(_) => "Parse",
    }
}

struct Ctx {
    opts: Opts,
    warnings: BTreeSet<&'static str>,
}

fn read(path: &Path) -> Step<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(Error::Parse(format!("{}: {e}", path.display()))))
}

impl Ctx {
    fn preset(&self) -> Step<Option<PresetEntry>> {
        Ok(match &self.opts.preset {
            Some(name) => Some(presets::load_preset(name)?),
            None => None,
        })
    }

    fn algebra(&self) -> Step<LieAlgebra> {
        if let Some(p) = &self.opts.algebra {
            return Ok(io::parse_algebra(&read(p)?)?);
        }
        if let Some(p) = &self.opts.split {
            return Ok(io::parse_split(&read(p)?)?.algebra().clone());
        }
        match self.preset()? {
            Some(e) => Ok(e.algebra),
            None => usage("an algebra is required: pass --algebra, --split or --preset"),
        }
    }

    fn isotropy(&self, a: &LieAlgebra) -> Step<Option<Subspace>> {
        if let Some(p) = &self.opts.isotropy {
            return Ok(Some(io::parse_subspace(&read(p)?, a.dim())?));
        }
        if self.opts.algebra.is_some() {
            return Ok(None);
        }
        if let Some(p) = &self.opts.split {
            return Ok(Some(io::parse_split(&read(p)?)?.isotropy().clone()));
        }
        Ok(self.preset()?.and_then(|e| e.isotropy))
    }

    /// Split from `--split`, a preset, or by solving for a complement of
    /// `--isotropy`.
    fn split(&mut self) -> Step<ReductiveSplit> {
        if let Some(p) = &self.opts.split {
            return Ok(io::parse_split(&read(p)?)?);
        }
        if self.opts.algebra.is_none() && self.opts.isotropy.is_none() {
            if let Some(split) = self.preset()?.and_then(|e| e.split) {
                return Ok(split);
            }
        }
        let a = self.algebra()?;
        let Some(h0) = self.isotropy(&a)? else {
            return usage(
                "a split is required: pass --split, a split preset, or an algebra with --isotropy",
            );
        };
        self.warnings.insert(WARN_CONNECTED);
        match find_invariant_complement(&a, &h0)? {
            ComplementOutcome::Found(split) => Ok(*split),
            ComplementOutcome::NoComplement(cert) => Err(Failure::Unsatisfiable(json!({
                "found": false,
                "certificate": certificate_value(&cert),
            }))),
        }
    }

    fn complex_structure(&mut self) -> Step<ComplexStructure> {
        if let Some(p) = self.opts.j.clone() {
            let split = self.split()?;
            return Ok(io::parse_complex_structure(&read(&p)?, split)?);
        }
        if self.opts.split.is_none() && self.opts.algebra.is_none() {
            if let Some(cs) = self.preset()?.and_then(|e| e.complex_structure) {
                return Ok(cs);
            }
        }
        usage("a complex structure is required: pass --J or a preset that carries one")
    }

    fn optional_complex_structure(&mut self) -> Step<Option<ComplexStructure>> {
        if self.opts.j.is_some() {
            return self.complex_structure().map(Some);
        }
        if self.opts.split.is_none() && self.opts.algebra.is_none() {
            return Ok(self.preset()?.and_then(|e| e.complex_structure));
        }
        Ok(None)
    }

    fn k(&self) -> Step<LieAlgebra> {
        let Some(name) = &self.opts.k else {
            return usage("a target algebra is required: pass --k FILE or --k PRESET");
        };
        let path = Path::new(name);
        if path.is_file() {
            return Ok(io::parse_algebra(&read(path)?)?);
        }
        Ok(presets::load_preset(name)?.algebra)
    }

    fn chi(&self, split: &ReductiveSplit, k: &LieAlgebra) -> Step<LieHomChi> {
        let Some(p) = &self.opts.chi else {
            return usage("--chi FILE is required");
        };
        let m = io::parse_matrix(&read(p)?, k.dim(), split.dim_h())?;
        Ok(validate_chi_on_split(split, k, m)?)
    }

    fn mu(&self, split: &ReductiveSplit, k: &LieAlgebra) -> Step<Option<MuMap>> {
        match &self.opts.mu {
            Some(p) => Ok(Some(MuMap::new(io::parse_matrix(
                &read(p)?,
                k.dim(),
                split.dim_s(),
            )?))),
            None => Ok(None),
        }
    }

    fn solver_options(&self) -> SolverOptions {
        let d = SolverOptions::default();
        SolverOptions {
            seed: self.opts.seed,
            starts: self.opts.starts.unwrap_or(d.starts),
            max_iter: self.opts.max_iter.unwrap_or(d.max_iter),
            tol: self.opts.tol.unwrap_or(d.tol),
            ..d
        }
    }
}

fn certificate_value(cert: &crate::reductive::NoComplementCertificate) -> Value {
    json!({
        "system": qmatrix_value(&cert.system),
        "rhs": cert.rhs.iter().map(rational_value).collect::<Vec<_>>(),
        "witness": cert.witness.iter().map(rational_value).collect::<Vec<_>>(),
        "pairing": rational_value(&cert.pairing),
        "verified": cert.verify(),
    })
}

fn rational_rows(rows: &[Vec<crate::linalg::Rational>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(rational_value).collect()))
            .collect(),
    )
}

fn structure_value(r: &StructureReport) -> Value {
    let ideals: Vec<Value> = r
        .simple_ideals
        .iter()
        .map(|i| {
            json!({
                "dim": i.dim(),
                "compactness": io::to_value(&i.compactness),
                "complex_type": i.complex_type,
                "basis": match &i.exact {
                    Some(s) => rational_rows(s.basis()),
                    None => matrix_value(&i.basis.transpose()),
                },
            })
        })
        .collect();
    json!({
        "is_semisimple": r.is_semisimple,
        "is_compact": r.is_compact,
        "killing_determinant": rational_value(&r.killing_determinant),
        "compactness_flags": r.compactness_flags().iter().map(io::to_value).collect::<Vec<_>>(),
        "simple_ideals": ideals,
        "attempts": r.attempts,
        "notes": r.notes,
    })
}

fn algebra_value(a: &LieAlgebra) -> Value {
    json!({
        "name": a.name(),
        "dim": a.dim(),
        "basis": a.basis_labels(),
    })
}

fn tensor_value(t: &CurvatureTensor) -> Value {
    let mut pairs = Vec::new();
    for p in 0..t.dim_s() {
        for q in p + 1..t.dim_s() {
            pairs.push(json!({"p": p, "q": q, "value": float_vec_value(t.get(p, q).as_slice())}));
        }
    }
    json!({"pairs": pairs, "max_norm": float_value(t.max_norm())})
}

fn complex_value(z: num_complex::Complex64) -> Value {
    json!([float_value(z.re), float_value(z.im)])
}

fn split_value(split: &ReductiveSplit) -> Value {
    io::to_value(&io::SplitJson::from_split(split))
}

fn violation_value(v: &ComplementViolation) -> Value {
    match v {
        ComplementViolation::AmbientMismatch {
            algebra,
            isotropy,
            complement,
        } => json!({
            "kind": "ambient_mismatch", "algebra": algebra, "isotropy": isotropy, "complement": complement,
        }),
        ComplementViolation::IsotropyNotSubalgebra { i, j } => json!({
            "kind": "isotropy_not_subalgebra", "i": i, "j": j,
        }),
        ComplementViolation::DimensionSum {
            isotropy,
            complement,
            ambient,
        } => json!({
            "kind": "dimension_sum", "isotropy": isotropy, "complement": complement, "ambient": ambient,
        }),
        ComplementViolation::NotTransversal { rank } => {
            json!({"kind": "not_transversal", "rank": rank})
        }
        ComplementViolation::NotInvariant {
            h_index,
            s_index,
            image,
        } => json!({
            "kind": "not_invariant", "h_index": h_index, "s_index": s_index,
            "image": image.iter().map(rational_value).collect::<Vec<_>>(),
        }),
    }
}

fn complex_structure_value(ctx: &mut Ctx, cs: &ComplexStructure) -> Value {
    ctx.warnings.insert(WARN_INTEGRABILITY);
    let defect = nijenhuis_defect(cs);
    let t = gamma0_type11_check(cs);
    json!({
        "J": qmatrix_value(cs.j()),
        "integrability": {
            "criterion": "projected-Nijenhuis",
            "holds": defect == 0.0,
            "defect": float_value(defect),
        },
        "gamma0_type11": {
            "holds": t.holds,
            "max_defect": float_value(t.max_defect),
            "worst_pair": t.worst_pair.map(|(p, q)| json!([p, q])),
        },
    })
}

fn cmd_validate(ctx: &mut Ctx) -> Step<Value> {
    let a = ctx.algebra()?;
    let report = structure_report(&a, ctx.opts.seed)?;
    let mut out = Map::new();
    out.insert(
        "algebra".into(),
        json!({
            "name": a.name(),
            "dim": a.dim(),
            "basis": a.basis_labels(),
            "lie_algebra": true,
            "killing_form": qmatrix_value(&a.killing_form().matrix),
            "structure": structure_value(&report),
        }),
    );
    let has_split = ctx.opts.split.is_some()
        || (ctx.opts.algebra.is_none() && ctx.preset()?.is_some_and(|e| e.split.is_some()));
    if let Some(h0) = ctx.isotropy(&a)? {
        ctx.warnings.insert(WARN_CONNECTED);
        let v = a.subalgebra_violation(&h0);
        out.insert(
            "isotropy".into(),
            json!({
                "dim": h0.dim(),
                "is_subalgebra": v.is_none(),
                "violation": v.map(|(i, j)| json!([i, j])),
            }),
        );
    }
    if has_split {
        let split = ctx.split()?;
        let (ok, violation) =
            check_invariant_complement(split.algebra(), split.isotropy(), split.complement());
        out.insert(
            "split".into(),
            json!({
                "invariant": ok,
                "violation": violation.as_ref().map(violation_value),
                "s_is_subalgebra": split.algebra().is_subalgebra(split.complement()),
                "canonical_connection_flat": split.canonical_connection_is_flat(),
            }),
        );
    }
    if let Some(cs) = ctx.optional_complex_structure()? {
        let v = complex_structure_value(ctx, &cs);
        out.insert("complex_structure".into(), v);
    }
    Ok(Value::Object(out))
}

fn cmd_complement(ctx: &mut Ctx) -> Step<Value> {
    let a = ctx.algebra()?;
    let Some(h0) = ctx.isotropy(&a)? else {
        return usage(
            "complement needs an isotropy subspace: pass --isotropy or a preset with one",
        );
    };
    ctx.warnings.insert(WARN_CONNECTED);
    match find_invariant_complement(&a, &h0)? {
        ComplementOutcome::Found(split) => Ok(json!({
            "found": true,
            "complement": rational_rows(split.complement().basis()),
            "s_is_subalgebra": split.algebra().is_subalgebra(split.complement()),
            "split": split_value(&split),
        })),
        ComplementOutcome::NoComplement(cert) => Err(Failure::Unsatisfiable(json!({
            "found": false,
            "certificate": certificate_value(&cert),
        }))),
    }
}

fn cmd_intertwiners(ctx: &mut Ctx) -> Step<Value> {
    ctx.warnings.insert(WARN_LIE_LEVEL);
    let split = ctx.split()?;
    let k = ctx.k()?;
    let chi = ctx.chi(&split, &k)?;
    let space = connection_space_description(&split, &k, &chi)?;
    Ok(json!({
        "target": algebra_value(&k),
        "chi": matrix_value(chi.matrix()),
        "dim_s": space.dim(),
        "basis": space.directions.basis.iter().map(|m| matrix_value(&m.matrix)).collect::<Vec<_>>(),
        "reference": matrix_value(&space.reference.matrix),
    }))
}

fn cmd_curvature(ctx: &mut Ctx) -> Step<Value> {
    let split = ctx.split()?;
    let k = ctx.k()?;
    let Some(mu) = ctx.mu(&split, &k)? else {
        return usage("--mu FILE is required");
    };
    let f = curvature_mu(&split, &k, &mu)?;
    let mut out = Map::new();
    out.insert("curvature".into(), tensor_value(&f));
    out.insert("mu".into(), matrix_value(&mu.matrix));
    if ctx.opts.chi.is_some() {
        let chi = ctx.chi(&split, &k)?;
        let e = equivariance_check(&split, &k, &chi, &mu)?;
        out.insert(
            "equivariance".into(),
            json!({"holds": e.holds, "max_violation": float_value(e.max_violation)}),
        );
    }
    Ok(Value::Object(out))
}

fn cmd_type11(ctx: &mut Ctx) -> Step<Value> {
    let cs = ctx.complex_structure()?;
    let k = ctx.k()?;
    let Some(mu) = ctx.mu(cs.split(), &k)? else {
        return usage("--mu FILE is required");
    };
    let d = type11_defect(&cs, &k, &mu)?;
    Ok(json!({
        "mu": matrix_value(&mu.matrix),
        "defect": tensor_value(&d.tensor),
        "max_norm": float_value(d.max_norm),
    }))
}

fn cmd_holomorphic(ctx: &mut Ctx) -> Step<Value> {
    ctx.warnings.insert(WARN_LIE_LEVEL);
    let cs = ctx.complex_structure()?;
    let k = ctx.k()?;
    let chi = ctx.chi(cs.split(), &k)?;
    let opts = ctx.solver_options();
    let locus = solve_holomorphic_locus(&cs, &k, &chi, &opts)?;
    let solutions: Vec<Value> = locus
        .solutions
        .iter()
        .map(|s| {
            json!({
                "coords": float_vec_value(&s.coords),
                "mu": matrix_value(&s.mu.matrix),
                "residual": float_value(s.residual),
                "local_dim": s.local_dim,
                "fingerprint": s.fingerprint.as_deref().map(float_vec_value),
                "start": s.start,
            })
        })
        .collect();
    let components: Vec<Value> = locus
        .components
        .iter()
        .map(|c| {
            json!({
                "dim": c.dim(),
                "point": float_vec_value(&c.point),
                "directions": c.directions.iter().map(|d| float_vec_value(d)).collect::<Vec<_>>(),
                "hits": c.hits,
            })
        })
        .collect();
    let failures: Vec<Value> = locus
        .failures
        .iter()
        .map(|f| json!({"start": f.start, "residual": float_value(f.residual), "reason": f.reason}))
        .collect();
    Ok(json!({
        "target": algebra_value(&k),
        "chi": matrix_value(chi.matrix()),
        "dim_s": locus.dim_s,
        "basis": locus.basis.iter().map(|m| matrix_value(&m.matrix)).collect::<Vec<_>>(),
        "identically_zero": locus.identically_zero,
        "empty_intertwiner": locus.empty_intertwiner,
        "solutions": solutions,
        "components": components,
        "failures": failures,
        "solver": {
            "seed": opts.seed,
            "starts": opts.starts,
            "max_iter": opts.max_iter,
            "tol": float_value(opts.tol),
        },
    }))
}

fn cmd_moduli(ctx: &mut Ctx) -> Step<Value> {
    ctx.warnings.insert(WARN_LIE_LEVEL);
    ctx.warnings.insert(WARN_CONJUGATION);
    let split = ctx.split()?;
    let k = ctx.k()?;
    let chi = ctx.chi(&split, &k)?;
    let mu = ctx
        .mu(&split, &k)?
        .unwrap_or_else(|| MuMap::zero(k.dim(), split.dim_s()));
    let e = equivariance_check(&split, &k, &chi, &mu)?;
    let point = InvariantConnectionPoint::new_unchecked(chi, mu);
    let fingerprint = match Fingerprinter::new(&k) {
        Ok(f) => float_vec_value(&f.fingerprint(&point).values),
        Err(Error::NoInvariantInnerProduct) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let canonical = match quotient::canonicalize(&k, &point) {
        Ok(c) => json!({
            "chi": matrix_value(c.point.chi.matrix()),
            "mu": matrix_value(&c.point.mu.matrix),
            "generator": float_vec_value(&c.generator),
            "t": c.t.map(float_value),
            "c": c.c.map(complex_value),
        }),
        Err(Error::UnsupportedTargetAlgebra(msg)) => json!({"unsupported": msg}),
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "target": algebra_value(&k),
        "equivariance": {"holds": e.holds, "max_violation": float_value(e.max_violation)},
        "fingerprint": fingerprint,
        "fingerprint_degree": quotient::DEFAULT_DEGREE,
        "canonical": canonical,
    }))
}

fn cmd_halfplane(ctx: &mut Ctx) -> Step<Value> {
    ctx.warnings.insert(WARN_LIE_LEVEL);
    ctx.warnings.insert(WARN_CONJUGATION);
    let k = ctx.k()?;
    let strat = presets::halfplane_moduli(&k)?;
    let split = presets::halfplane_split();
    let mut strata = Vec::new();
    for st in &strat.strata {
        let mut reps = Vec::new();
        for p in &st.representatives {
            let chi =
                validate_chi_on_split(&split, &k, DMatrix::from_column_slice(k.dim(), 1, &p.chi0))?;
            let dim_s = crate::moduli::intertwiner_space(&split, &k, &chi)?.dim();
            let oracle = presets::oracle_eigen_stratum(&k, &p.chi0)?;
            let eq = equivariance_check(&split, &k, &chi, &MuMap::new(p.mu.clone()))?;
            reps.push(json!({
                "chi0": float_vec_value(&p.chi0),
                "mu": matrix_value(&p.mu),
                "c": complex_value(p.c),
                "eq_residual": float_value(p.eq_residual),
                "dim_s": dim_s,
                "oracle_admissible": oracle.admissible,
                "equivariant": eq.holds,
            }));
        }
        strata.push(json!({
            "name": st.name,
            "description": st.description,
            "chi_norm": st.chi_norm.to_string(),
            "mu_complex_dim": st.mu_complex_dim,
            "parameters": st.parameters,
            "representatives": reps,
        }));
    }
    Ok(json!({"target": strat.target, "strata": strata}))
}

fn cmd_report_hypotheses(ctx: &mut Ctx) -> Step<Value> {
    ctx.warnings.insert(WARN_LIE_LEVEL);
    let a = ctx.algebra()?;
    let k = ctx.k()?;
    let h = hypothesis_report(&a, &k, ctx.opts.seed)?;
    let mut out = Map::new();
    out.insert("algebra".into(), algebra_value(&a));
    out.insert("target".into(), algebra_value(&k));
    out.insert("algebra_structure".into(), structure_value(&h.algebra));
    out.insert("target_structure".into(), structure_value(&h.target));
    out.insert(
        "quotient_identification_applies".into(),
        Value::Bool(h.quotient_identification_applies),
    );
    out.insert("reason".into(), h.reason.map_or(Value::Null, Value::String));
    if let Some(cs) = ctx.optional_complex_structure()? {
        let v = complex_structure_value(ctx, &cs);
        out.insert("complex_structure".into(), v);
    }
    Ok(Value::Object(out))
}

fn config_value(cmd: Command, o: &Opts) -> Value {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| Value::String(p.display().to_string()));
    json!({
        "command": cmd.name(),
        "seed": o.seed,
        "tol": o.tol.map(float_value),
        "format": match o.format { Format::Json => "json", Format::Table => "table" },
        "starts": o.starts,
        "max_iter": o.max_iter,
        "inputs": {
            "algebra": path(&o.algebra),
            "isotropy": path(&o.isotropy),
            "split": path(&o.split),
            "chi": path(&o.chi),
            "mu": path(&o.mu),
            "J": path(&o.j),
            "k": o.k,
            "preset": o.preset,
        },
    })
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let cmd = cli.command;
    let config = config_value(cmd, &cli.opts);
    let format = cli.opts.format;
    let mut ctx = Ctx {
        opts: cli.opts,
        warnings: BTreeSet::new(),
    };
    let result = match cmd {
        Command::Validate => cmd_validate(&mut ctx),
        Command::Complement => cmd_complement(&mut ctx),
        Command::Intertwiners => cmd_intertwiners(&mut ctx),
        Command::Curvature => cmd_curvature(&mut ctx),
        Command::Type11 => cmd_type11(&mut ctx),
        Command::Holomorphic => cmd_holomorphic(&mut ctx),
        Command::Moduli => cmd_moduli(&mut ctx),
        Command::Halfplane => cmd_halfplane(&mut ctx),
        Command::ReportHypotheses => cmd_report_hypotheses(&mut ctx),
    };
    let (code, status, results, error) = match result {
        Ok(v) => (0, "ok", v, Value::Null),
        Err(Failure::Usage(msg)) => {
            return Outcome {
                code: 1,
                stdout: String::new(),
                stderr: format!("error: {msg}\n"),
            }
        }
        Err(Failure::Invalid(e)) => (
            2,
            "validation_error",
            Value::Null,
            json!({"kind": error_kind(&e), "message": e.to_string()}),
        ),
        Err(Failure::Unsatisfiable(v)) => (3, "unsatisfiable", v, Value::Null),
    };
    let mut report = json!({
        "command": cmd.name(),
        "config": config,
        "status": status,
        "results": results,
        "warnings": ctx.warnings.iter().copied().collect::<Vec<_>>(),
    });
    if !error.is_null() {
        report["error"] = error;
    }
    let stdout = match format {
        Format::Json => io::to_canonical_json(&report),
        Format::Table => io::to_table(&report),
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}
