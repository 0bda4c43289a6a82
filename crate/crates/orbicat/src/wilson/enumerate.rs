//! Simple objects of C_A and their modular data.

use rayon::prelude::*;

use crate::fusion_data::ModularData;
use crate::graded_vect::{GradedBimodule, GradedMap};
use crate::numeric::{primitive_idempotents, svd, CMat, Tolerance, C64};
use crate::orbifold::{trace_psi4, OrbifoldDatum};
use crate::report::{ConditionReport, MaxResidual};

use super::{
    braiding, datum_is_simple, hom_basis, hom_dim, pipe, qdim, retract, tensor, trace_ca, twist_scalar, unit_object,
    WilsonError, WilsonObject,
};

/// Retracts of P(E_ij) cut out by primitive idempotents of End(P(E_ij)).
fn candidates(d: &OrbifoldDatum, i: usize, j: usize, seed: u64, tol: &Tolerance) -> Result<Vec<WilsonObject>, WilsonError> {
    let p = pipe(d, &GradedBimodule::elementary(d.n(), i, j))?;
    if p.is_zero() {
        return Ok(vec![]);
    }
    let basis = hom_basis(&p, &p, d);
    let dense: Vec<CMat> = basis.iter().map(|f| f.to_dense()).collect();
    let idems = primitive_idempotents(&dense, seed, tol)?;
    let mut out = Vec::with_capacity(idems.len());
    for e in idems {
        let em = GradedMap::from_dense(&p.m, &p.m, &e);
        let s = retract(&p, &em, d, tol)?;
        if !s.is_zero() {
            out.push(s);
        }
    }
    Ok(out)
}

/// Pairwise non-isomorphic simples, unit first.
pub fn simples_with_seed(d: &OrbifoldDatum, seed: u64, tol: &Tolerance) -> Result<Vec<WilsonObject>, WilsonError> {
    let n = d.n();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let found: Vec<Result<Vec<WilsonObject>, WilsonError>> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| candidates(d, i, j, seed.wrapping_add(k as u64), tol))
        .collect();
    let mut simples: Vec<WilsonObject> = Vec::new();
    for cands in found {
        for s in cands? {
            if !simples.iter().any(|t| hom_dim(&s, t, d) > 0) {
                simples.push(s);
            }
        }
    }
    let unit = unit_object(d);
    if let Some(k) = simples.iter().position(|s| hom_dim(&unit, s, d) > 0) {
        let u = simples.remove(k);
        simples.insert(0, u);
    }
    Ok(simples)
}

pub fn enumerate_simples(d: &OrbifoldDatum, seed: u64) -> Result<Vec<WilsonObject>, WilsonError> {
    simples_with_seed(d, seed, &Tolerance::default())
}

/// N_{ab}^c = dim Hom(S_a ⊗ S_b, S_c).
pub fn fusion_rules(simples: &[WilsonObject], d: &OrbifoldDatum) -> Result<Vec<Vec<Vec<usize>>>, WilsonError> {
    let k = simples.len();
    let rows: Vec<Result<Vec<Vec<usize>>, WilsonError>> = (0..k)
        .into_par_iter()
        .map(|a| {
            (0..k)
                .map(|b| {
                    let t = tensor(&simples[a], &simples[b], d)?;
                    Ok(simples.iter().map(|c| hom_dim(&t, c, d)).collect())
                })
                .collect()
        })
        .collect();
    rows.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct CaModularData {
    pub simples: Vec<WilsonObject>,
    pub data: ModularData,
    pub report: ConditionReport,
}

/// Expected Dim C_A for the Vect backend: 1/(φ⁴ (tr ψ⁴)²).
pub fn expected_global_dim(d: &OrbifoldDatum) -> C64 {
    let t = trace_psi4(d);
    C64::new(1.0, 0.0) / (d.phi.powi(4) * t * t)
}

/// Modular data with the checks recorded; fails only on construction errors.
pub fn compute_modular_data(d: &OrbifoldDatum, seed: u64, tol: &Tolerance) -> Result<CaModularData, WilsonError> {
    if !datum_is_simple(d)? {
        return Err(WilsonError::SimplenessRequired);
    }
    let simples = simples_with_seed(d, seed, tol)?;
    let k = simples.len();
    let qd: Vec<C64> = simples.iter().map(|s| qdim(s, d)).collect();
    let theta: Vec<C64> = simples.iter().map(|s| twist_scalar(s, d)).collect::<Result<_, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a..k).map(move |b| (a, b))).collect();
    let entries: Vec<Result<C64, WilsonError>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let c1 = braiding(&simples[a], &simples[b], d)?;
            let c2 = braiding(&simples[b], &simples[a], d)?;
            Ok(trace_ca(&c2.compose(&c1), d))
        })
        .collect();
    let mut s = CMat::zeros(k, k);
    for (&(a, b), v) in pairs.iter().zip(entries) {
        let v = v?;
        s[(a, b)] = v;
        s[(b, a)] = v;
    }
    let global_dim: C64 = qd.iter().map(|&q| q * q).sum();
    let data = ModularData {
        labels: (0..k).map(|x| format!("W{x}")).collect(),
        qdim: qd,
        smatrix: s,
        tdiag: theta,
        global_dim,
    };

    let mut report = ConditionReport::new(tol);
    let sv = svd(&data.smatrix).s;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    report.record_flag("s_invertible", k > 0 && smin > 1e-8 * smax.max(1.0), smin);
    let want = expected_global_dim(d);
    let rel = (global_dim - want).norm() / want.norm();
    report.record_flag("dimension_formula", rel < 1e-6, rel);
    let kr = data.killing_ring_residual();
    report.record_flag("killing_ring", kr < 1e-6 * global_dim.norm().max(1.0), kr);
    let mut inv = MaxResidual::default();
    inv.update(data.invariant_residual());
    report.record_flag("modular_data_invariants", inv.0 < 1e-6, inv.0);
    Ok(CaModularData { simples, data, report })
}

/// As `compute_modular_data`, but a failed check is an error.
pub fn modular_data(d: &OrbifoldDatum, seed: u64, tol: &Tolerance) -> Result<CaModularData, WilsonError> {
    let out = compute_modular_data(d, seed, tol)?;
    if let Some((name, r)) = out.report.failures().first() {
        return Err(WilsonError::ModularityCheckFailed(format!("{name} (residual {r:e})")));
    }
    Ok(out)
}
