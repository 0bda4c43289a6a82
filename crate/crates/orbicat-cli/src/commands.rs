use std::path::Path;

use serde_json::{json, Value};

use orbicat::centre::{centre_modular_data, centre_simples, compare_modular_data, CentreError, MatchResult};
use orbicat::fusion_data::{builtin_by_name, check_category, ModularData, SkeletalCategory};
use orbicat::locmod::{check_algebra, local_modules, locmod_modular_data, AlgebraInMFC, LocmodError};
use orbicat::orbifold::{build_from_spherical, trace_psi4, verify_orbifold, OrbifoldDatum};
use orbicat::wilson::{
    check_wilson, compute_modular_data, datum_is_simple, fusion_rules, qdim,
    simples_with_seed, twist_scalar, expected_global_dim, WilsonObject,
};
use orbicat::{CategoryError, ConditionReport, Error, OrbifoldError, C64};

use crate::RunArgs;

pub struct Outcome {
    pub body: Value,
    pub passed: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub message: String,
    pub location: Option<(usize, usize)>,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        CliError { code: 2, kind: "usage".into(), message, location: None }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: 2, kind: "io".into(), message: format!("{}: {e}", path.display()), location: None }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (code, kind, location) = match &e {
            Error::Json(j) => (2, "parse", Some((j.line(), j.column()))),
            Error::Category(CategoryError::MalformedData(_) | CategoryError::UnknownBuiltin(_)) => (2, "input", None),
            Error::Orbifold(OrbifoldError::MalformedDatum(_)) => (2, "input", None),
            Error::Locmod(LocmodError::MalformedAlgebra(_)) => (2, "input", None),
            Error::Numeric(_) => (1, "numeric", None),
            Error::Category(_) => (1, "category", None),
            Error::Graded(_) => (1, "graded", None),
            Error::Orbifold(_) => (1, "orbifold", None),
            Error::Wilson(_) => (1, "wilson", None),
            Error::Centre(_) => (1, "centre", None),
            Error::Locmod(_) => (1, "locmod", None),
        };
        CliError { code, kind: kind.into(), message, location }
    }
}

macro_rules! lib_err {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
lib_err!(CategoryError, OrbifoldError, orbicat::WilsonError, CentreError, LocmodError, serde_json::Error);

type Res = Result<Outcome, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load_cat(src: &str) -> Result<SkeletalCategory, CliError> {
    if let Some(name) = src.strip_prefix("builtin:") {
        return Ok(builtin_by_name(name)?);
    }
    Ok(SkeletalCategory::from_json(&read(Path::new(src))?)?)
}

fn load_datum(path: &Path) -> Result<OrbifoldDatum, CliError> {
    Ok(OrbifoldDatum::from_json(&read(path)?)?)
}

/// A bare modular data file, or any report carrying one under `modular_data`.
fn load_modular(path: &Path) -> Result<ModularData, CliError> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(Error::from)?;
    let inner = match v.get("modular_data") {
        Some(m) => m.clone(),
        None => v,
    };
    Ok(serde_json::from_value(inner).map_err(Error::from)?)
}

fn header(r: &RunArgs, command: &str) -> Value {
    json!({
        "tool": "orbicat",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "tol": r.tol,
        "seed": r.seed,
        "psi_branch": "principal",
    })
}

fn finish(mut body: Value, passed: bool) -> Res {
    body["passed"] = json!(passed);
    Ok(Outcome { body, passed })
}

fn checks(rep: &ConditionReport) -> Value {
    serde_json::to_value(rep).expect("report serializes")
}

fn grading(s: &WilsonObject) -> Value {
    s.m.grades().map(|((x, y), d)| json!([x, y, d])).collect()
}

pub fn cat_builtin(name: &str) -> Res {
    let cat = builtin_by_name(name)?;
    let body: Value = serde_json::from_str(&cat.to_json())?;
    Ok(Outcome { body, passed: true })
}

pub fn cat_check(r: &RunArgs, src: &str) -> Res {
    let cat = load_cat(src)?;
    let chk = check_category(&cat, &r.tolerance())?;
    let mut body = header(r, "cat check");
    body["labels"] = json!(cat.labels);
    body["global_dim"] = json!(cat.global_dimension());
    body["modular"] = json!(chk.modular);
    body["report"] = checks(&chk.report);
    finish(body, chk.report.passed())
}

pub fn build_spherical(src: &str) -> Res {
    let cat = load_cat(src)?;
    let d = build_from_spherical(&cat)?;
    let body: Value = serde_json::from_str(&d.to_json())?;
    Ok(Outcome { body, passed: true })
}

fn datum_report(r: &RunArgs, d: &OrbifoldDatum) -> Result<(Value, bool), CliError> {
    let rep = verify_orbifold(d, &r.tolerance());
    let simple = datum_is_simple(d)?;
    let v = json!({
        "report": checks(&rep),
        "simple": simple,
        "phi": d.phi,
        "trace_psi4": trace_psi4(d),
    });
    Ok((v, rep.passed() && simple))
}

pub fn orbifold_check(r: &RunArgs, path: &Path) -> Res {
    let d = load_datum(path)?;
    let mut body = header(r, "orbifold check");
    let (v, ok) = datum_report(r, &d)?;
    body["orbifold"] = v;
    finish(body, ok)
}

pub fn ca_simples(r: &RunArgs, path: &Path, fusion: bool) -> Res {
    let d = load_datum(path)?;
    let simples = simples_with_seed(&d, r.seed, &r.tolerance())?;
    let mut ok = true;
    let mut rows = Vec::new();
    for (k, s) in simples.iter().enumerate() {
        let rep = check_wilson(s, &d, &r.tolerance())?;
        ok &= rep.passed();
        rows.push(json!({
            "label": format!("W{k}"),
            "grading": grading(s),
            "qdim": qdim(s, &d),
            "twist": twist_scalar(s, &d)?,
            "worst_residual": rep.worst(),
        }));
    }
    let mut body = header(r, "ca simples");
    body["count"] = json!(simples.len());
    body["simples"] = Value::Array(rows);
    if fusion {
        body["fusion_rules"] = json!(fusion_rules(&simples, &d)?);
    }
    finish(body, ok)
}

pub fn ca_modular(r: &RunArgs, path: &Path) -> Res {
    let d = load_datum(path)?;
    let md = compute_modular_data(&d, r.seed, &r.tolerance())?;
    let mut body = header(r, "ca modular");
    body["count"] = json!(md.simples.len());
    body["expected_global_dim"] = json!(expected_global_dim(&d));
    body["report"] = checks(&md.report);
    body["modular_data"] = serde_json::to_value(&md.data)?;
    finish(body, md.report.passed())
}

fn centre_value(r: &RunArgs, cat: &SkeletalCategory) -> Result<(Value, ModularData, bool), CliError> {
    let z = centre_simples(cat, r.seed)?;
    let hex: Vec<f64> = z.iter().map(|h| h.hexagon_residual(cat)).collect();
    let ok = hex.iter().all(|&x| x <= r.tol);
    let md = centre_modular_data(cat, &z)?;
    let v = json!({
        "count": z.len(),
        "hexagon_residuals": hex,
        "multiplicities": z.iter().map(|h| h.mult.clone()).collect::<Vec<_>>(),
        "modular_data": serde_json::to_value(&md)?,
    });
    Ok((v, md, ok))
}

pub fn centre(r: &RunArgs, src: &str) -> Res {
    let cat = load_cat(src)?;
    let (v, _, ok) = centre_value(r, &cat)?;
    let mut body = header(r, "centre");
    if let (Some(b), Value::Object(m)) = (body.as_object_mut(), v) {
        b.extend(m);
    }
    finish(body, ok)
}

fn match_value(m: &MatchResult) -> Value {
    serde_json::to_value(m).expect("match serializes")
}

pub fn compare(r: &RunArgs, a: &Path, b: &Path) -> Res {
    let (x, y) = (load_modular(a)?, load_modular(b)?);
    let mut body = header(r, "compare");
    let m = match compare_modular_data(&x, &y, r.tol) {
        Ok(m) => m,
        Err(CentreError::SizeMismatch(p, q)) => {
            body["reason"] = json!(format!("sizes differ: {p} vs {q}"));
            MatchResult::NoMatch { best_residual: f64::INFINITY }
        }
        Err(e) => return Err(e.into()),
    };
    body["match"] = match_value(&m);
    finish(body, m.is_match())
}

pub fn locmod(r: &RunArgs, src: &str, alg_path: &Path) -> Res {
    let cat = load_cat(src)?;
    let alg = AlgebraInMFC::from_json(&cat, &read(alg_path)?)?;
    let chk = check_algebra(&cat, &alg, &r.tolerance())?;
    let mut body = header(r, "locmod");
    body["unit_rescale"] = json!(chk.unit_rescale);
    body["algebra_dim"] = json!(alg.dim(&cat));
    body["algebra_report"] = checks(&chk.report);
    if !chk.report.passed() {
        return finish(body, false);
    }
    let loc = local_modules(&cat, &alg, r.seed)?;
    let md = locmod_modular_data(&cat, &alg, &loc)?;
    let want: C64 = cat.global_dimension() / (alg.dim(&cat) * alg.dim(&cat));
    body["count"] = json!(loc.len());
    body["modules"] = loc
        .iter()
        .enumerate()
        .map(|(k, m)| json!({ "label": format!("L{k}"), "mult": m.mult, "locality": m.locality }))
        .collect();
    body["expected_global_dim"] = json!(want);
    body["modular_data"] = serde_json::to_value(&md)?;
    finish(body, true)
}

pub fn centre_check(r: &RunArgs, src: &str) -> Res {
    let cat = load_cat(src)?;
    let d = build_from_spherical(&cat)?;
    let mut body = header(r, "pipeline centre-check");
    let (orb, orb_ok) = datum_report(r, &d)?;
    body["orbifold"] = orb;
    body["dim_s"] = json!(cat.global_dimension());
    let ca = compute_modular_data(&d, r.seed, &r.tolerance())?;
    body["ca"] = json!({
        "count": ca.simples.len(),
        "report": checks(&ca.report),
        "modular_data": serde_json::to_value(&ca.data)?,
    });
    let (zv, zmd, z_ok) = centre_value(r, &cat)?;
    body["centre"] = zv;
    let m = compare_modular_data(&ca.data, &zmd, r.tol.max(1e-12))?;
    body["match"] = match_value(&m);
    let ok = orb_ok && ca.report.passed() && z_ok && m.is_match();
    finish(body, ok)
}
