//! The category C_A of Wilson lines over an orbifold datum in Vect.

mod enumerate;
mod monoidal;
mod pipe;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::graded_vect::{GradedBimodule, GradedMap, Grade};
use crate::numeric::{column_space, eye, inverse, kron, max_abs, null_space, rank, zeros, CMat, NumericError, Tolerance, C64, ONE};
use crate::orbifold::{verify_orbifold, OrbifoldDatum};
use crate::report::{ConditionReport, MaxResidual};

pub use enumerate::{
    compute_modular_data, enumerate_simples, expected_global_dim, fusion_rules, modular_data, simples_with_seed, CaModularData,
};
pub use monoidal::{
    braiding, braiding_inverse, coev, coev_tilde, dual, ev, ev_tilde, left_trace, left_unitor, qdim, right_trace,
    right_unitor, tensor, trace_ca, twist, twist_scalar, zigzag_residuals,
};
pub use pipe::{pipe, pipe_h1, pipe_h2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WilsonError {
    #[error("object is graded over {got} labels, datum has {expected}")]
    GradeMismatch { expected: usize, got: usize },
    #[error("crossing block {which} is not invertible")]
    NotInvertible { which: String },
    #[error("object is not simple; twist is not a scalar")]
    NonScalarTwist,
    #[error("datum is not simple")]
    SimplenessRequired,
    #[error("modularity check failed: {0}")]
    ModularityCheckFailed(String),
    #[error("simple counts differ across seeds: {0:?}")]
    Nondeterminism(Vec<usize>),
    #[error("datum fails {condition} (residual {residual:e})")]
    DatumInvalid { condition: String, residual: f64 },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Crossing blocks keyed by [l, i, j, out, in].
pub type Crossings = BTreeMap<[usize; 5], CMat>;

/// A bimodule M with T-crossings.
///
/// tau1[l,i,j,b,a]: M_{la} → M_{bi};  tau2[l,i,j,b,a]: M_{la} → M_{bj};
/// tau1_bar[l,i,j,a,b]: M_{bi} → M_{la};  tau2_bar[l,i,j,a,b]: M_{bj} → M_{la}.
#[derive(Debug, Clone, PartialEq)]
pub struct WilsonObject {
    pub m: GradedBimodule,
    pub tau1: Crossings,
    pub tau2: Crossings,
    pub tau1_bar: Crossings,
    pub tau2_bar: Crossings,
}

impl WilsonObject {
    pub fn empty(m: GradedBimodule) -> Self {
        WilsonObject { m, tau1: BTreeMap::new(), tau2: BTreeMap::new(), tau1_bar: BTreeMap::new(), tau2_bar: BTreeMap::new() }
    }

    pub fn d(&self, x: usize, y: usize) -> usize {
        self.m.dim(x, y)
    }

    pub fn t1(&self, l: usize, i: usize, j: usize, b: usize, a: usize) -> Option<&CMat> {
        self.tau1.get(&[l, i, j, b, a])
    }

    pub fn t2(&self, l: usize, i: usize, j: usize, b: usize, a: usize) -> Option<&CMat> {
        self.tau2.get(&[l, i, j, b, a])
    }

    pub fn tb1(&self, l: usize, i: usize, j: usize, a: usize, b: usize) -> Option<&CMat> {
        self.tau1_bar.get(&[l, i, j, a, b])
    }

    pub fn tb2(&self, l: usize, i: usize, j: usize, a: usize, b: usize) -> Option<&CMat> {
        self.tau2_bar.get(&[l, i, j, a, b])
    }

    pub fn identity(&self) -> GradedMap {
        GradedMap::identity(&self.m)
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }
}

fn require_grading(obj: &WilsonObject, d: &OrbifoldDatum) -> Result<(), WilsonError> {
    if obj.m.n != d.n() {
        return Err(WilsonError::GradeMismatch { expected: d.n(), got: obj.m.n });
    }
    Ok(())
}

/// Which T-leg a crossing passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Leg {
    One,
    Two,
}

impl Leg {
    /// Target grade of τ_leg(l,i,j)[b←a].
    pub(crate) fn target(self, i: usize, j: usize, b: usize) -> Grade {
        match self {
            Leg::One => (b, i),
            Leg::Two => (b, j),
        }
    }

    /// Is τ_leg(l,i,j)[b←·] allowed by T on the output side.
    pub(crate) fn out_ok(self, d: &OrbifoldDatum, l: usize, i: usize, j: usize, b: usize) -> bool {
        match self {
            Leg::One => d.t_adm(l, b, j),
            Leg::Two => d.t_adm(l, i, b),
        }
    }
}

/// Fill τ̄ by inverting τ per (l,i,j): τ̄ = diag(1/ω(a)) τ⁻¹ diag(1/ω(b)).
pub fn complete_bars(obj: &mut WilsonObject, d: &OrbifoldDatum) -> Result<(), WilsonError> {
    require_grading(obj, d)?;
    let n = d.n();
    for leg in [Leg::One, Leg::Two] {
        let mut bars = BTreeMap::new();
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let srcs: Vec<usize> = (0..n).filter(|&a| d.t_adm(a, i, j) && obj.d(l, a) > 0).collect();
                    let tgts: Vec<usize> = (0..n)
                        .filter(|&b| {
                            let g = leg.target(i, j, b);
                            leg.out_ok(d, l, i, j, b) && obj.d(g.0, g.1) > 0
                        })
                        .collect();
                    if srcs.is_empty() && tgts.is_empty() {
                        continue;
                    }
                    let so: Vec<usize> = prefix(srcs.iter().map(|&a| obj.d(l, a)));
                    let to: Vec<usize> = prefix(tgts.iter().map(|&b| {
                        let g = leg.target(i, j, b);
                        obj.d(g.0, g.1)
                    }));
                    let (rows, cols) = (to[tgts.len()], so[srcs.len()]);
                    if rows != cols {
                        return Err(WilsonError::NotInvertible { which: format!("tau{} ({l},{i},{j}) is {rows}x{cols}", leg_no(leg)) });
                    }
                    let mut big = zeros(rows, cols);
                    let table = match leg {
                        Leg::One => &obj.tau1,
                        Leg::Two => &obj.tau2,
                    };
                    for (x, &a) in srcs.iter().enumerate() {
                        for (y, &b) in tgts.iter().enumerate() {
                            if let Some(m) = table.get(&[l, i, j, b, a]) {
                                big.view_mut((to[y], so[x]), m.shape()).copy_from(m);
                            }
                        }
                    }
                    let inv = inverse(&big).map_err(|_| WilsonError::NotInvertible {
                        which: format!("tau{} ({l},{i},{j})", leg_no(leg)),
                    })?;
                    for (x, &a) in srcs.iter().enumerate() {
                        for (y, &b) in tgts.iter().enumerate() {
                            let blk = inv.view((so[x], to[y]), (so[x + 1] - so[x], to[y + 1] - to[y])).into_owned();
                            bars.insert([l, i, j, a, b], blk / (d.w(a) * d.w(b)));
                        }
                    }
                }
            }
        }
        match leg {
            Leg::One => obj.tau1_bar = bars,
            Leg::Two => obj.tau2_bar = bars,
        }
    }
    Ok(())
}

fn leg_no(leg: Leg) -> u8 {
    match leg {
        Leg::One => 1,
        Leg::Two => 2,
    }
}

pub(crate) fn prefix(sizes: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v = vec![0];
    for s in sizes {
        let last = *v.last().unwrap();
        v.push(last + s);
    }
    v
}

/// Crossing convention of the unit object: the single ψ² insertion sits on leg i/j (λ = 1) or on l (λ = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnitConvention {
    #[default]
    LegInsertion,
    LineInsertion,
}

pub fn unit_object(d: &OrbifoldDatum) -> WilsonObject {
    unit_object_with(d, UnitConvention::LegInsertion)
}

pub fn unit_object_with(d: &OrbifoldDatum, conv: UnitConvention) -> WilsonObject {
    let n = d.n();
    let mut u = WilsonObject::empty(GradedBimodule::unit(n));
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                if !d.t_adm(l, i, j) {
                    continue;
                }
                let (s1, s2) = match conv {
                    UnitConvention::LegInsertion => (d.w(i), d.w(j)),
                    UnitConvention::LineInsertion => (d.w(l), d.w(l)),
                };
                u.tau1.insert([l, i, j, i, l], CMat::from_element(1, 1, ONE / s1));
                u.tau2.insert([l, i, j, j, l], CMat::from_element(1, 1, ONE / s2));
            }
        }
    }
    complete_bars(&mut u, d).expect("unit crossings are invertible");
    u
}

// ---------------------------------------------------------------- checks

#[derive(Default)]
struct Acc(Option<CMat>);

impl Acc {
    fn add(&mut self, m: CMat) {
        match &mut self.0 {
            Some(x) => *x += m,
            None => self.0 = Some(m),
        }
    }
}

fn diff(a: &Option<CMat>, b: &Option<CMat>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => max_abs(&(x - y)),
        (Some(x), None) | (None, Some(x)) => max_abs(x),
        (None, None) => 0.0,
    }
}

fn scaled(m: Option<&CMat>, z: C64) -> Option<CMat> {
    if z == C64::new(0.0, 0.0) {
        return None;
    }
    m.map(|x| x * z)
}

fn prod(a: Option<&CMat>, b: Option<&CMat>, z: C64) -> Option<CMat> {
    if z == C64::new(0.0, 0.0) {
        return None;
    }
    match (a, b) {
        (Some(x), Some(y)) => Some((x * y) * z),
        _ => None,
    }
}

/// Residuals of T1–T7 and of the derived identities T8′–T16′.
pub fn check_wilson(obj: &WilsonObject, d: &OrbifoldDatum, tol: &Tolerance) -> Result<ConditionReport, WilsonError> {
    require_grading(obj, d)?;
    let mut rep = ConditionReport::new(tol);
    let names = ["T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8'", "T9'", "T10'", "T11'", "T12'", "T13'", "T14'", "T15'", "T16'"];
    let n = d.n();
    let parts: Vec<[f64; 16]> = (0..n).into_par_iter().map(|l| check_slice(obj, d, l)).collect();
    for (k, name) in names.iter().enumerate() {
        let mut m = MaxResidual::default();
        for p in &parts {
            m.update(p[k]);
        }
        rep.record(*name, m.0);
    }
    Ok(rep)
}

/// Only T1–T7.
pub fn check_wilson_core(obj: &WilsonObject, d: &OrbifoldDatum, tol: &Tolerance) -> Result<ConditionReport, WilsonError> {
    let full = check_wilson(obj, d, tol)?;
    let mut rep = ConditionReport::new(tol);
    for k in ["T1", "T2", "T3", "T4", "T5", "T6", "T7"] {
        rep.record(k, full.residual(k).unwrap_or(f64::INFINITY));
    }
    Ok(rep)
}

fn check_slice(x: &WilsonObject, d: &OrbifoldDatum, l: usize) -> [f64; 16] {
    let n = d.n();
    let w = |s: usize| d.w(s);
    let al = |l: usize, i: usize, j: usize, k: usize, b: usize, a: usize| d.alpha(l, i, j, k, b, a);
    let mut r = [MaxResidual::default(); 16];
    let r_ = &mut r;

    // T1–T3 and T8′–T16′ share the outer loop over (i,j,k,a) with d(l,a) > 0.
    for a in 0..n {
        if x.d(l, a) == 0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for c in 0..n {
                        // T1, T2, T3 need T_{a;i,c} T_{c;j,k}
                        if d.t_adm(a, i, c) && d.t_adm(c, j, k) {
                            for dd in 0..n {
                                for b in 0..n {
                                    let lhs = scaled(x.t1(l, i, c, b, a), al(l, b, j, k, dd, c));
                                    let mut rhs = Acc::default();
                                    for e in 0..n {
                                        if let Some(m) = prod(x.t1(dd, i, j, b, e), x.t1(l, e, k, dd, a), w(e) * al(a, i, j, k, e, c)) {
                                            rhs.add(m);
                                        }
                                    }
                                    r_[0].update(diff(&lhs, &rhs.0));
                                }
                            }
                            for e in 0..n {
                                for dd in 0..n {
                                    let mut lhs = Acc::default();
                                    let mut rhs = Acc::default();
                                    for b in 0..n {
                                        if let Some(m) = prod(x.t1(b, j, k, dd, c), x.t2(l, i, c, b, a), al(l, i, dd, k, e, b) * w(b)) {
                                            lhs.add(m);
                                        }
                                    }
                                    for f in 0..n {
                                        if let Some(m) = prod(x.t2(e, i, j, dd, f), x.t1(l, f, k, e, a), w(f) * al(a, i, j, k, f, c)) {
                                            rhs.add(m);
                                        }
                                    }
                                    r_[1].update(diff(&lhs.0, &rhs.0));
                                    let mut lhs = Acc::default();
                                    for b in 0..n {
                                        if let Some(m) = prod(x.t2(b, j, k, dd, c), x.t2(l, i, c, b, a), w(b) * al(l, i, j, dd, e, b)) {
                                            lhs.add(m);
                                        }
                                    }
                                    let rhs = scaled(x.t2(l, e, k, dd, a), al(a, i, j, k, e, c));
                                    r_[2].update(diff(&lhs.0, &rhs));
                                }
                            }
                        }
                    }
                    derived_identities(x, d, l, i, j, k, a, r_);
                }
            }
        }
    }

    // T4, T5 on fixed (l,i,j)
    for i in 0..n {
        for j in 0..n {
            for leg in [Leg::One, Leg::Two] {
                let t = |b: usize, a: usize| match leg {
                    Leg::One => x.t1(l, i, j, b, a),
                    Leg::Two => x.t2(l, i, j, b, a),
                };
                let tb = |a: usize, b: usize| match leg {
                    Leg::One => x.tb1(l, i, j, a, b),
                    Leg::Two => x.tb2(l, i, j, a, b),
                };
                for a in 0..n {
                    for a2 in 0..n {
                        if !(d.t_adm(a, i, j) && d.t_adm(a2, i, j)) || x.d(l, a) == 0 || x.d(l, a2) == 0 {
                            continue;
                        }
                        let mut s = Acc::default();
                        for b in (0..n).filter(|&b| leg.out_ok(d, l, i, j, b)) {
                            if let Some(m) = prod(tb(a2, b), t(b, a), w(a) * w(b)) {
                                s.add(m);
                            }
                        }
                        let want = (a == a2).then(|| eye(x.d(l, a)));
                        r_[3].update(diff(&s.0, &want));
                    }
                }
                let dm = |b: usize| {
                    let g = leg.target(i, j, b);
                    x.d(g.0, g.1)
                };
                for b in 0..n {
                    for b2 in 0..n {
                        if !(leg.out_ok(d, l, i, j, b) && leg.out_ok(d, l, i, j, b2)) || dm(b) == 0 || dm(b2) == 0 {
                            continue;
                        }
                        let mut s = Acc::default();
                        for a in (0..n).filter(|&a| d.t_adm(a, i, j)) {
                            if let Some(m) = prod(t(b2, a), tb(a, b), w(a) * w(b)) {
                                s.add(m);
                            }
                        }
                        let want = (b == b2).then(|| eye(dm(b)));
                        r_[4].update(diff(&s.0, &want));
                    }
                }
            }
        }
    }

    // T6: here `l` plays the role of the fixed label i of the lune, summing over the line label.
    let i = l;
    for j in 0..n {
        for a in 0..n {
            if !d.t_adm(a, i, j) {
                continue;
            }
            for b in 0..n {
                if x.d(b, i) > 0 {
                    let mut s = Acc::default();
                    for ll in (0..n).filter(|&ll| d.t_adm(ll, b, j)) {
                        if let Some(m) = prod(x.t1(ll, i, j, b, a), x.tb1(ll, i, j, a, b), w(ll) * w(i)) {
                            s.add(m);
                        }
                    }
                    r_[5].update(diff(&s.0, &Some(eye(x.d(b, i)))));
                }
                if x.d(b, j) > 0 {
                    let mut s = Acc::default();
                    for ll in (0..n).filter(|&ll| d.t_adm(ll, i, b)) {
                        if let Some(m) = prod(x.t2(ll, i, j, b, a), x.tb2(ll, i, j, a, b), w(ll) * w(j)) {
                            s.add(m);
                        }
                    }
                    r_[5].update(diff(&s.0, &Some(eye(x.d(b, j)))));
                }
            }
        }
    }

    // T7 where some admissible term exists
    for a in 0..n {
        if x.d(l, a) == 0 {
            continue;
        }
        for b in 0..n {
            for jj in 0..n {
                let terms: Vec<usize> =
                    (0..n).filter(|&ii| d.t_adm(a, ii, jj) && d.t_adm(l, b, jj)).collect();
                if terms.iter().any(|&ii| x.d(b, ii) > 0) {
                    let mut s = Acc::default();
                    for &ii in &terms {
                        if let Some(m) = prod(x.tb1(l, ii, jj, a, b), x.t1(l, ii, jj, b, a), w(ii) * w(l)) {
                            s.add(m);
                        }
                    }
                    r_[6].update(diff(&s.0, &Some(eye(x.d(l, a)))));
                }
            }
            for ii in 0..n {
                let terms: Vec<usize> =
                    (0..n).filter(|&jj| d.t_adm(a, ii, jj) && d.t_adm(l, ii, b)).collect();
                if terms.iter().any(|&jj| x.d(b, jj) > 0) {
                    let mut s = Acc::default();
                    for &jj in &terms {
                        if let Some(m) = prod(x.tb2(l, ii, jj, a, b), x.t2(l, ii, jj, b, a), w(jj) * w(l)) {
                            s.add(m);
                        }
                    }
                    r_[6].update(diff(&s.0, &Some(eye(x.d(l, a)))));
                }
            }
        }
    }
    r.map(|m| m.0)
}

#[allow(clippy::too_many_arguments)]
fn derived_identities(x: &WilsonObject, d: &OrbifoldDatum, l: usize, i: usize, j: usize, k: usize, a: usize, r: &mut [MaxResidual; 16]) {
    let n = d.n();
    let w = |s: usize| d.w(s);
    let al = |l: usize, i: usize, j: usize, k: usize, b: usize, a: usize| d.alpha(l, i, j, k, b, a);
    let ab = |l: usize, i: usize, j: usize, k: usize, a: usize, b: usize| d.alpha_bar(l, i, j, k, a, b);
    for p in 0..n {
        for q in 0..n {
            for s in 0..n {
                // T8′ with (e,c,b) = (p,q,s)
                {
                    let (e, c, b) = (p, q, s);
                    let lhs = scaled(x.t1(l, i, c, b, a), ab(a, i, j, k, c, e));
                    let mut rhs = Acc::default();
                    for dd in 0..n {
                        if let Some(m) = prod(x.t1(dd, i, j, b, e), x.t1(l, e, k, dd, a), w(dd) * ab(l, b, j, k, c, dd)) {
                            rhs.add(m);
                        }
                    }
                    r[7].update(diff(&lhs, &rhs.0));
                }
                // T9′, T10′ with (b,dd,f|e) = (p,q,s)
                {
                    let (b, dd, f) = (p, q, s);
                    let mut lhs = Acc::default();
                    let mut lhs10 = Acc::default();
                    for c in 0..n {
                        if let Some(m) = prod(x.t1(b, j, k, dd, c), x.t2(l, i, c, b, a), w(c) * ab(a, i, j, k, c, f)) {
                            lhs.add(m);
                        }
                        if let Some(m) = prod(x.t2(b, j, k, dd, c), x.t2(l, i, c, b, a), w(c) * ab(a, i, j, k, c, f)) {
                            lhs10.add(m);
                        }
                    }
                    let mut rhs = Acc::default();
                    for e in 0..n {
                        if let Some(m) = prod(x.t2(e, i, j, dd, f), x.t1(l, f, k, e, a), w(e) * ab(l, i, dd, k, b, e)) {
                            rhs.add(m);
                        }
                    }
                    r[8].update(diff(&lhs.0, &rhs.0));
                    let e = f;
                    let rhs10 = scaled(x.t2(l, e, k, dd, a), ab(l, i, j, dd, b, e));
                    r[9].update(diff(&lhs10.0, &rhs10));
                }
                // T11′ with (b,c,dd) = (p,q,s)
                {
                    let (b, c, dd) = (p, q, s);
                    let lhs = scaled(x.tb1(l, i, c, a, b), ab(l, b, j, k, c, dd));
                    let mut rhs = Acc::default();
                    for e in 0..n {
                        if let Some(m) = prod(x.tb1(l, e, k, a, dd), x.tb1(dd, i, j, e, b), w(e) * ab(a, i, j, k, c, e)) {
                            rhs.add(m);
                        }
                    }
                    r[10].update(diff(&lhs, &rhs.0));
                }
                // T12′, T13′ with (c,dd,e) = (p,q,s)
                {
                    let (c, dd, e) = (p, q, s);
                    let mut lhs = Acc::default();
                    let mut lhs13 = Acc::default();
                    for b in 0..n {
                        if let Some(m) = prod(x.tb2(l, i, c, a, b), x.tb1(b, j, k, c, dd), w(b) * ab(l, i, dd, k, b, e)) {
                            lhs.add(m);
                        }
                        if let Some(m) = prod(x.tb2(l, i, c, a, b), x.tb2(b, j, k, c, dd), w(b) * ab(l, i, j, dd, b, e)) {
                            lhs13.add(m);
                        }
                    }
                    let mut rhs = Acc::default();
                    for f in 0..n {
                        if let Some(m) = prod(x.tb1(l, f, k, a, e), x.tb2(e, i, j, f, dd), w(f) * ab(a, i, j, k, c, f)) {
                            rhs.add(m);
                        }
                    }
                    r[11].update(diff(&lhs.0, &rhs.0));
                    let rhs13 = scaled(x.tb2(l, e, k, a, dd), ab(a, i, j, k, c, e));
                    r[12].update(diff(&lhs13.0, &rhs13));
                }
                // T14′ with (b,c,e) = (p,q,s)
                {
                    let (b, c, e) = (p, q, s);
                    let lhs = scaled(x.tb1(l, i, c, a, b), al(a, i, j, k, e, c));
                    let mut rhs = Acc::default();
                    for dd in 0..n {
                        if let Some(m) = prod(x.tb1(l, e, k, a, dd), x.tb1(dd, i, j, e, b), w(dd) * al(l, b, j, k, dd, c)) {
                            rhs.add(m);
                        }
                    }
                    r[13].update(diff(&lhs, &rhs.0));
                }
                // T15′, T16′ with (b,dd,f|e) = (p,q,s)
                {
                    let (b, dd, f) = (p, q, s);
                    let mut lhs = Acc::default();
                    let mut lhs16 = Acc::default();
                    for c in 0..n {
                        if let Some(m) = prod(x.tb2(l, i, c, a, b), x.tb1(b, j, k, c, dd), w(c) * al(a, i, j, k, f, c)) {
                            lhs.add(m);
                        }
                        if let Some(m) = prod(x.tb2(l, i, c, a, b), x.tb2(b, j, k, c, dd), w(c) * al(a, i, j, k, f, c)) {
                            lhs16.add(m);
                        }
                    }
                    let mut rhs = Acc::default();
                    for e in 0..n {
                        if let Some(m) = prod(x.tb1(l, f, k, a, e), x.tb2(e, i, j, f, dd), w(e) * al(l, i, dd, k, e, b)) {
                            rhs.add(m);
                        }
                    }
                    r[14].update(diff(&lhs.0, &rhs.0));
                    let e = f;
                    let rhs16 = scaled(x.tb2(l, e, k, a, dd), al(l, i, j, dd, e, b));
                    r[15].update(diff(&lhs16.0, &rhs16));
                }
            }
        }
    }
}

// ---------------------------------------------------------------- morphisms

/// Worst violation of τ_i^N ∘ f = f ∘ τ_i^M.
pub fn morphism_residual(src: &WilsonObject, tgt: &WilsonObject, f: &GradedMap) -> f64 {
    let mut m = MaxResidual::default();
    for leg in [Leg::One, Leg::Two] {
        let (tm, tn) = match leg {
            Leg::One => (&src.tau1, &tgt.tau1),
            Leg::Two => (&src.tau2, &tgt.tau2),
        };
        let mut keys: Vec<&[usize; 5]> = tm.keys().chain(tn.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let [l, i, j, b, a] = *key;
            let tg = leg.target(i, j, b);
            let lhs = match (tn.get(key), f.blocks.get(&(l, a))) {
                (Some(bm), Some(fm)) => Some(bm * fm),
                _ => None,
            };
            let rhs = match (f.blocks.get(&tg), tm.get(key)) {
                (Some(fm), Some(am)) => Some(fm * am),
                _ => None,
            };
            m.update(diff(&lhs, &rhs));
        }
    }
    m.0
}

/// One averaging pass along leg 1 or 2, as a matrix on row-major block vectors.
fn average_pass(src: &WilsonObject, tgt: &WilsonObject, d: &OrbifoldDatum, leg: Leg) -> CMat {
    let n = d.n();
    let grades = GradedMap::shared_grades(&src.m, &tgt.m);
    let mut off = BTreeMap::new();
    let mut o = 0;
    for g in &grades {
        off.insert(*g, o);
        o += src.m.dim(g.0, g.1) * tgt.m.dim(g.0, g.1);
    }
    let mut op = zeros(o, o);
    for &(l, a) in &grades {
        let out_off = off[&(l, a)];
        for i in 0..n {
            for j in 0..n {
                if !d.t_adm(a, i, j) {
                    continue;
                }
                for b in 0..n {
                    let mid = leg.target(i, j, b);
                    let Some(&in_off) = off.get(&mid) else { continue };
                    let (tm, tbn) = match leg {
                        Leg::One => (src.t1(l, i, j, b, a), tgt.tb1(l, i, j, a, b)),
                        Leg::Two => (src.t2(l, i, j, b, a), tgt.tb2(l, i, j, a, b)),
                    };
                    let (Some(am), Some(bm)) = (tm, tbn) else { continue };
                    let z = d.phi * d.w(i) * d.w(j) * d.w(b);
                    let blk = kron(bm, &am.transpose()) * z;
                    let mut view = op.view_mut((out_off, in_off), blk.shape());
                    view += &blk;
                }
            }
        }
    }
    op
}

/// The averaging projector on grade-preserving maps src → tgt (row-major block vectors).
pub fn average_operator(src: &WilsonObject, tgt: &WilsonObject, d: &OrbifoldDatum) -> CMat {
    let p1 = average_pass(src, tgt, d, Leg::One);
    let p2 = average_pass(src, tgt, d, Leg::Two);
    p2 * p1
}

pub fn average(f: &GradedMap, src: &WilsonObject, tgt: &WilsonObject, d: &OrbifoldDatum) -> Result<GradedMap, WilsonError> {
    require_grading(src, d)?;
    require_grading(tgt, d)?;
    if f.src != src.m || f.tgt != tgt.m {
        return Err(WilsonError::GradeMismatch { expected: src.m.total_dim(), got: f.src.total_dim() });
    }
    let op = average_operator(src, tgt, d);
    let v = nalgebra::DVector::from_vec(f.to_vec());
    let out = op * v;
    Ok(GradedMap::from_vec(&src.m, &tgt.m, out.as_slice()))
}

/// Basis of Hom_{C_A}(src, tgt): column space of the averaging projector.
pub fn hom_basis(src: &WilsonObject, tgt: &WilsonObject, d: &OrbifoldDatum) -> Vec<GradedMap> {
    let nv = GradedMap::var_count(&src.m, &tgt.m);
    if nv == 0 {
        return vec![];
    }
    let op = average_operator(src, tgt, d);
    let cs = column_space(&op, &Tolerance::uniform(1e-8));
    (0..cs.ncols())
        .map(|k| {
            let col: Vec<C64> = cs.column(k).iter().copied().collect();
            GradedMap::from_vec(&src.m, &tgt.m, &col)
        })
        .collect()
}

pub fn hom_dim(src: &WilsonObject, tgt: &WilsonObject, d: &OrbifoldDatum) -> usize {
    let nv = GradedMap::var_count(&src.m, &tgt.m);
    if nv == 0 {
        return 0;
    }
    rank(&average_operator(src, tgt, d), &Tolerance::uniform(1e-8))
}

/// Dimension of the solution space of condition (M), computed independently of averaging.
pub fn hom_dim_by_constraints(src: &WilsonObject, tgt: &WilsonObject) -> usize {
    let grades = GradedMap::shared_grades(&src.m, &tgt.m);
    let mut off = BTreeMap::new();
    let mut o = 0;
    for g in &grades {
        off.insert(*g, o);
        o += src.m.dim(g.0, g.1) * tgt.m.dim(g.0, g.1);
    }
    if o == 0 {
        return 0;
    }
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for leg in [Leg::One, Leg::Two] {
        let (tm, tn) = match leg {
            Leg::One => (&src.tau1, &tgt.tau1),
            Leg::Two => (&src.tau2, &tgt.tau2),
        };
        let mut keys: Vec<&[usize; 5]> = tm.keys().chain(tn.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let [l, i, j, b, a] = *key;
            let s = (l, a);
            let t = leg.target(i, j, b);
            let (r0, c0) = (tgt.m.dim(t.0, t.1), src.m.dim(s.0, s.1));
            for r in 0..r0 {
                for c in 0..c0 {
                    let mut row = vec![C64::new(0.0, 0.0); o];
                    if let (Some(bm), Some(&so)) = (tn.get(key), off.get(&s)) {
                        let cols = src.m.dim(s.0, s.1);
                        for k in 0..tgt.m.dim(s.0, s.1) {
                            row[so + k * cols + c] += bm[(r, k)];
                        }
                    }
                    if let (Some(am), Some(&to)) = (tm.get(key), off.get(&t)) {
                        let cols = src.m.dim(t.0, t.1);
                        for k in 0..cols {
                            row[to + r * cols + k] -= am[(k, c)];
                        }
                    }
                    if row.iter().any(|z| z.norm() > 0.0) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let mut mat = zeros(rows.len(), o);
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            mat[(r, c)] = *z;
        }
    }
    null_space(&mat, &Tolerance::uniform(1e-9)).ncols()
}

/// dim End(unit) = 1, after verifying O1–O8.
pub fn datum_is_simple(d: &OrbifoldDatum) -> Result<bool, WilsonError> {
    let rep = verify_orbifold(d, &Tolerance::uniform(1e-8));
    if let Some((name, res)) = rep.failures().first() {
        return Err(WilsonError::DatumInvalid { condition: name.to_string(), residual: *res });
    }
    let u = unit_object(d);
    Ok(hom_dim(&u, &u, d) == 1)
}

/// Retract of `obj` along the idempotent `e` (an endomorphism in C_A), split per grade.
pub fn retract(obj: &WilsonObject, e: &GradedMap, d: &OrbifoldDatum, tol: &Tolerance) -> Result<WilsonObject, WilsonError> {
    let mut embeds = BTreeMap::new();
    let mut retracts = BTreeMap::new();
    let mut dims = GradedBimodule::zero(obj.m.n);
    for (g, blk) in &e.blocks {
        let (em, rm) = crate::numeric::split_idempotent(blk, tol)?;
        if em.ncols() > 0 {
            dims.set(*g, em.ncols());
            embeds.insert(*g, em);
            retracts.insert(*g, rm);
        }
    }
    let mut out = WilsonObject::empty(dims);
    for leg in [Leg::One, Leg::Two] {
        let table = match leg {
            Leg::One => &obj.tau1,
            Leg::Two => &obj.tau2,
        };
        let mut res = BTreeMap::new();
        for (key, m) in table {
            let [l, i, j, b, a] = *key;
            let tg = leg.target(i, j, b);
            if let (Some(em), Some(rm)) = (embeds.get(&(l, a)), retracts.get(&tg)) {
                res.insert(*key, rm * m * em);
            }
        }
        match leg {
            Leg::One => out.tau1 = res,
            Leg::Two => out.tau2 = res,
        }
    }
    complete_bars(&mut out, d)?;
    Ok(out)
}
