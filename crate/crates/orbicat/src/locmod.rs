//! Commutative algebras in a modular category, their local modules, and the modular data
//! of the category of local modules.
//!
//! Fusion trees are paired so that ⟨a(bc)_f| = Σ_e F^{abc}_d[e,f] ⟨(ab)_e c|; every
//! structure map below is a list of vertex coefficients in that basis.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fusion_data::{CategoryError, ModularData, SkeletalCategory};
use crate::numeric::{
    eye, idempotent_classes, max_abs, null_space, pinv, primitive_idempotents, split_idempotent, zeros, CMat,
    NumericError, Tolerance, C64,
};
use crate::report::{ConditionReport, MaxResidual};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// A module is kept when its locality residual is below this.
pub const LOCALITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocmodError {
    #[error("malformed algebra: {0}")]
    MalformedAlgebra(String),
    #[error("category carries no braiding")]
    NotBraided,
    #[error("category has fusion multiplicities > 1")]
    MultiplicityUnsupported,
    #[error("algebra fails {0:?}")]
    AlgebraCheckFailed(Vec<String>),
    #[error("idempotent splitting failed: {0}")]
    SplitFailure(#[from] NumericError),
    #[error("twist is not scalar on a simple local module (spread {0:e})")]
    NonScalarTwist(f64),
    #[error("global dimension {got} differs from Dim C/|A|^2 = {want}")]
    DimensionMismatch { got: f64, want: f64 },
}

impl From<CategoryError> for LocmodError {
    fn from(e: CategoryError) -> Self {
        match e {
            CategoryError::MultiplicityUnsupported => LocmodError::MultiplicityUnsupported,
            other => LocmodError::MalformedAlgebra(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------- algebra

/// A = ⊕_{a ∈ support} a with multiplication components m^{ab}_c, keyed [a, b, c].
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraInMFC {
    pub support: Vec<usize>,
    pub mult: BTreeMap<[usize; 3], C64>,
}

/// Label reference in algebra files: either a name or an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultEntry {
    pub idx: [LabelRef; 3],
    pub val: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub support: Vec<LabelRef>,
    pub mult: Vec<MultEntry>,
}

fn resolve(cat: &SkeletalCategory, r: &LabelRef) -> Result<usize, LocmodError> {
    match r {
        LabelRef::Index(k) if *k < cat.n() => Ok(*k),
        LabelRef::Index(k) => Err(LocmodError::MalformedAlgebra(format!("label index {k} out of range"))),
        LabelRef::Name(s) => cat
            .label_index(s)
            .ok_or_else(|| LocmodError::MalformedAlgebra(format!("unknown label `{s}`"))),
    }
}

impl AlgebraInMFC {
    /// The trivial algebra A = 1.
    pub fn trivial() -> Self {
        AlgebraInMFC { support: vec![0], mult: BTreeMap::from([([0, 0, 0], ONE)]) }
    }

    /// All admissible components inside `support` set to 1; the canonical choice for
    /// pointed categories with trivial associator on the support.
    pub fn with_unit_coefficients(cat: &SkeletalCategory, support: &[usize]) -> Self {
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        let mut mult = BTreeMap::new();
        for &a in &support {
            for &b in &support {
                for &c in &support {
                    if cat.adm(a, b, c) {
                        mult.insert([a, b, c], ONE);
                    }
                }
            }
        }
        AlgebraInMFC { support, mult }
    }

    pub fn from_file(cat: &SkeletalCategory, f: &AlgebraFile) -> Result<Self, LocmodError> {
        let mut support = f.support.iter().map(|r| resolve(cat, r)).collect::<Result<Vec<_>, _>>()?;
        let before = support.len();
        support.sort_unstable();
        support.dedup();
        if support.len() != before {
            return Err(LocmodError::MalformedAlgebra("support repeats a label".into()));
        }
        if !support.contains(&0) {
            return Err(LocmodError::MalformedAlgebra("support lacks the unit label".into()));
        }
        let mut mult = BTreeMap::new();
        for e in &f.mult {
            let k = [resolve(cat, &e.idx[0])?, resolve(cat, &e.idx[1])?, resolve(cat, &e.idx[2])?];
            if !k.iter().all(|x| support.contains(x)) {
                return Err(LocmodError::MalformedAlgebra(format!("component {k:?} leaves the support")));
            }
            if !cat.adm(k[0], k[1], k[2]) {
                return Err(LocmodError::MalformedAlgebra(format!("component {k:?} is not a fusion channel")));
            }
            if mult.insert(k, C64::new(e.val[0], e.val[1])).is_some() {
                return Err(LocmodError::MalformedAlgebra(format!("component {k:?} given twice")));
            }
        }
        Ok(AlgebraInMFC { support, mult })
    }

    pub fn from_json(cat: &SkeletalCategory, text: &str) -> Result<Self, crate::Error> {
        let f: AlgebraFile = serde_json::from_str(text)?;
        Ok(Self::from_file(cat, &f)?)
    }

    pub fn to_file(&self) -> AlgebraFile {
        AlgebraFile {
            support: self.support.iter().map(|&a| LabelRef::Index(a)).collect(),
            mult: self
                .mult
                .iter()
                .map(|(k, v)| MultEntry { idx: k.map(LabelRef::Index), val: [v.re, v.im] })
                .collect(),
        }
    }

    pub fn m(&self, a: usize, b: usize, c: usize) -> C64 {
        self.mult.get(&[a, b, c]).copied().unwrap_or(ZERO)
    }

    pub fn contains(&self, a: usize) -> bool {
        self.support.binary_search(&a).is_ok()
    }

    /// |A| = Σ_{a ∈ support} |a|.
    pub fn dim(&self, cat: &SkeletalCategory) -> C64 {
        self.support.iter().map(|&a| cat.qdim[a]).sum()
    }
}

/// Coproduct Δ^c_{ab} (keyed [c, a, b]) and counit, fixed by μ∘Δ = id.
#[derive(Debug, Clone, PartialEq)]
pub struct Frobenius {
    pub comult: BTreeMap<[usize; 3], C64>,
    pub counit: C64,
}

impl Frobenius {
    pub fn delta(&self, c: usize, a: usize, b: usize) -> C64 {
        self.comult.get(&[c, a, b]).copied().unwrap_or(ZERO)
    }
}

#[derive(Debug, Clone)]
pub struct AlgebraCheck {
    pub report: ConditionReport,
    pub frobenius: Frobenius,
    /// Factor the supplied multiplication was divided by so that m^{11}_1 = 1.
    pub unit_rescale: C64,
}

fn triples(cat: &SkeletalCategory, alg: &AlgebraInMFC) -> Vec<[usize; 3]> {
    let s = &alg.support;
    let mut out = Vec::new();
    for &a in s {
        for &b in s {
            for &c in s {
                if cat.adm(a, b, c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Least-squares coproduct: Frobenius relations plus μ∘Δ = id.
fn solve_frobenius(cat: &SkeletalCategory, alg: &AlgebraInMFC) -> (Frobenius, f64, f64, f64) {
    let n = cat.n();
    let s = &alg.support;
    let unknowns = triples(cat, alg);
    let col: BTreeMap<[usize; 3], usize> = unknowns.iter().enumerate().map(|(k, &[a, b, c])| ([c, a, b], k)).collect();
    let u = unknowns.len();
    // rows: (coefficients, rhs, kind) with kind 0 = Frobenius, 1 = separability
    let mut rows: Vec<(Vec<C64>, C64, u8)> = Vec::new();
    for &a in s {
        for &b in s {
            for &c in s {
                for &d in s {
                    for x in (0..n).filter(|&x| cat.adm(a, b, x) && cat.adm(c, d, x)) {
                        // (id⊗μ)(Δ⊗id) = Δμ
                        let mut r1 = vec![ZERO; u];
                        // (μ⊗id)(id⊗Δ) = Δμ
                        let mut r2 = vec![ZERO; u];
                        for &e in s {
                            if let Some(&k) = col.get(&[a, c, e]) {
                                r1[k] += alg.m(e, b, d) * cat.fsym(c, e, b, x, a, d);
                            }
                            if let Some(&k) = col.get(&[b, e, d]) {
                                r2[k] += alg.m(a, e, c) * cat.finv(a, e, d, x, b, c);
                            }
                        }
                        if let Some(&k) = col.get(&[x, c, d]) {
                            r1[k] -= alg.m(a, b, x);
                            r2[k] -= alg.m(a, b, x);
                        }
                        rows.push((r1, ZERO, 0));
                        rows.push((r2, ZERO, 0));
                    }
                }
            }
        }
    }
    for &c in s {
        let mut r = vec![ZERO; u];
        for (&[cc, a, b], &k) in &col {
            if cc == c {
                r[k] = alg.m(a, b, c);
            }
        }
        rows.push((r, ONE, 1));
    }
    let mut lhs = zeros(rows.len(), u);
    let mut rhs = zeros(rows.len(), 1);
    for (i, (r, v, _)) in rows.iter().enumerate() {
        for (k, z) in r.iter().enumerate() {
            lhs[(i, k)] = *z;
        }
        rhs[(i, 0)] = *v;
    }
    let sol = pinv(&lhs, &Tolerance::uniform(1e-12)) * &rhs;
    let resid = &lhs * &sol - &rhs;
    let (mut frob, mut sep) = (MaxResidual::default(), MaxResidual::default());
    for (i, (_, _, kind)) in rows.iter().enumerate() {
        match kind {
            0 => frob.update(resid[(i, 0)].norm()),
            _ => sep.update(resid[(i, 0)].norm()),
        }
    }
    let comult: BTreeMap<[usize; 3], C64> = col.iter().map(|(k, &i)| (*k, sol[(i, 0)])).collect();
    let d00 = comult.get(&[0, 0, 0]).copied().unwrap_or(ZERO);
    let counit = if d00.norm() > 0.0 { ONE / d00 } else { ZERO };
    let mut cu = MaxResidual::default();
    for &c in s {
        let l = counit * comult.get(&[c, 0, c]).copied().unwrap_or(ZERO);
        let r = counit * comult.get(&[c, c, 0]).copied().unwrap_or(ZERO);
        cu.update((l - ONE).norm().max((r - ONE).norm()));
    }
    (Frobenius { comult, counit }, frob.0, sep.0, cu.0)
}

/// Residuals of every algebra axiom; the multiplication is first rescaled so that m^{11}_1 = 1.
pub fn check_algebra(cat: &SkeletalCategory, alg: &AlgebraInMFC, tol: &Tolerance) -> Result<AlgebraCheck, LocmodError> {
    cat.require_multiplicity_free()?;
    if !cat.is_braided() {
        return Err(LocmodError::NotBraided);
    }
    if alg.support.iter().any(|&a| a >= cat.n()) {
        return Err(LocmodError::MalformedAlgebra("support label out of range".into()));
    }
    let lam = alg.m(0, 0, 0);
    if lam.norm() == 0.0 {
        return Err(LocmodError::MalformedAlgebra("m^{11}_1 vanishes".into()));
    }
    let alg = &normalized(alg);
    let s = &alg.support;
    let mut report = ConditionReport::new(tol);

    let mut assoc = MaxResidual::default();
    for &a in s {
        for &b in s {
            for &c in s {
                for &d in s {
                    for &f in s {
                        let lhs: C64 = s.iter().map(|&e| alg.m(a, b, e) * alg.m(e, c, d) * cat.finv(a, b, c, d, f, e)).sum();
                        assoc.update((lhs - alg.m(b, c, f) * alg.m(a, f, d)).norm());
                    }
                }
            }
        }
    }
    report.record("associativity", assoc.0);

    let mut unit = MaxResidual::default();
    for &a in s {
        unit.update((alg.m(0, a, a) - ONE).norm());
        unit.update((alg.m(a, 0, a) - ONE).norm());
    }
    report.record("unit", unit.0);

    let mut comm = MaxResidual::default();
    for &[a, b, c] in &triples(cat, alg) {
        comm.update((alg.m(b, a, c) * cat.rsym(a, b, c) - alg.m(a, b, c)).norm());
    }
    report.record("commutativity", comm.0);

    let (frob, fr, sep, cu) = solve_frobenius(cat, alg);
    report.record("frobenius", fr);
    report.record("delta_separability", sep);
    report.record("counit", cu);

    let mut sym = MaxResidual::default();
    for &a in s {
        let ab = cat.dual[a];
        if !alg.contains(ab) {
            sym.update(1.0);
            continue;
        }
        let pivot = cat.qdim[a] * cat.fsym(a, ab, a, a, 0, 0);
        sym.update((alg.m(a, ab, 0) - alg.m(ab, a, 0) * pivot).norm());
    }
    report.record("symmetry", sym.0);

    let haploid = alg.contains(0);
    report.record_flag("haploid", haploid, if haploid { 0.0 } else { 1.0 });

    let mut tw = MaxResidual::default();
    for &a in s {
        tw.update((cat.theta(a).unwrap_or(ZERO) - ONE).norm());
    }
    report.record("twist_trivial", tw.0);

    Ok(AlgebraCheck { report, frobenius: frob, unit_rescale: lam })
}

fn normalized(alg: &AlgebraInMFC) -> AlgebraInMFC {
    let lam = alg.m(0, 0, 0);
    AlgebraInMFC { support: alg.support.clone(), mult: alg.mult.iter().map(|(k, v)| (*k, v / lam)).collect() }
}

// ---------------------------------------------------------------- modules

/// Left A-module M = ⊕ W_m ⊗ m with action components ρ^{b,m}_{m'}: W_m → W_{m'} keyed [b, m', m].
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleInMFC {
    pub mult: Vec<usize>,
    pub action: BTreeMap<[usize; 3], CMat>,
    pub locality: f64,
}

impl ModuleInMFC {
    pub fn rho(&self, b: usize, mp: usize, m: usize) -> Option<&CMat> {
        self.action.get(&[b, mp, m])
    }

    pub fn qdim_in_c(&self, cat: &SkeletalCategory) -> C64 {
        self.mult.iter().zip(&cat.qdim).map(|(&w, &d)| d * w as f64).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        crate::wilson::prefix(self.mult.iter().copied())
    }

    fn total(&self) -> usize {
        self.mult.iter().sum()
    }

    fn block_or_zero(&self, b: usize, mp: usize, m: usize) -> CMat {
        self.rho(b, mp, m).cloned().unwrap_or_else(|| zeros(self.mult[mp], self.mult[m]))
    }
}

/// The induced module A ⊗ x, with W_m spanned by the a ∈ support with N_{ax}^m.
pub fn induced(cat: &SkeletalCategory, alg: &AlgebraInMFC, x: usize) -> ModuleInMFC {
    let n = cat.n();
    let rows: Vec<Vec<usize>> = (0..n).map(|m| alg.support.iter().copied().filter(|&a| cat.adm(a, x, m)).collect()).collect();
    let mult: Vec<usize> = rows.iter().map(Vec::len).collect();
    let mut action = BTreeMap::new();
    for &b in &alg.support {
        for m in (0..n).filter(|&m| mult[m] > 0) {
            for mp in (0..n).filter(|&mp| mult[mp] > 0 && cat.adm(b, m, mp)) {
                let mut blk = zeros(mult[mp], mult[m]);
                for (ci, &c) in rows[mp].iter().enumerate() {
                    for (ai, &a) in rows[m].iter().enumerate() {
                        blk[(ci, ai)] = alg.m(b, a, c) * cat.finv(b, a, x, mp, m, c);
                    }
                }
                action.insert([b, mp, m], blk);
            }
        }
    }
    let mut out = ModuleInMFC { mult, action, locality: 0.0 };
    out.locality = locality_residual(cat, alg, &out);
    out
}

/// Associativity and unit residual of the action.
pub fn module_residual(cat: &SkeletalCategory, alg: &AlgebraInMFC, md: &ModuleInMFC) -> f64 {
    let n = cat.n();
    let s = &alg.support;
    let w = &md.mult;
    let mut r = MaxResidual::default();
    for &b in s {
        for &c in s {
            for m in (0..n).filter(|&m| w[m] > 0) {
                for mpp in (0..n).filter(|&x| w[x] > 0) {
                    for f in (0..n).filter(|&f| cat.adm(c, m, f) && cat.adm(b, f, mpp)) {
                        let mut lhs = zeros(w[mpp], w[m]);
                        for &e in s {
                            let z = alg.m(b, c, e) * cat.finv(b, c, m, mpp, f, e);
                            if z.norm() > 0.0 {
                                if let Some(x) = md.rho(e, mpp, m) {
                                    lhs += x * z;
                                }
                            }
                        }
                        let rhs = if w[f] > 0 { md.block_or_zero(b, mpp, f) * md.block_or_zero(c, f, m) } else { zeros(w[mpp], w[m]) };
                        r.update(max_abs(&(lhs - rhs)));
                    }
                }
            }
        }
    }
    for m in (0..n).filter(|&m| w[m] > 0) {
        r.update(max_abs(&(md.block_or_zero(0, m, m) - eye(w[m]))));
    }
    r.0
}

/// Residual of ρ∘c_{M,A}∘c_{A,M} = ρ, evaluated with both the braiding and its inverse.
pub fn locality_residual(cat: &SkeletalCategory, _alg: &AlgebraInMFC, md: &ModuleInMFC) -> f64 {
    let mut r = MaxResidual::default();
    for (&[b, mp, m], blk) in &md.action {
        let mono = cat.rsym(m, b, mp) * cat.rsym(b, m, mp);
        let size = max_abs(blk);
        r.update(size * (mono - ONE).norm());
        if mono.norm() > 0.0 {
            r.update(size * (ONE / mono - ONE).norm());
        }
    }
    r.0
}

/// Module maps M → N as dense block-diagonal matrices.
pub fn module_homs(cat: &SkeletalCategory, alg: &AlgebraInMFC, src: &ModuleInMFC, tgt: &ModuleInMFC, tol: &Tolerance) -> Vec<CMat> {
    let n = cat.n();
    // unknown f_m[r, c] at index base[m] + r * src.mult[m] + c
    let mut base = vec![0; n + 1];
    for m in 0..n {
        base[m + 1] = base[m] + tgt.mult[m] * src.mult[m];
    }
    let u = base[n];
    if u == 0 {
        return vec![];
    }
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for &b in &alg.support {
        for m in 0..n {
            for mp in (0..n).filter(|&mp| cat.adm(b, m, mp)) {
                let (ws, wt, wsp, wtp) = (src.mult[m], tgt.mult[m], src.mult[mp], tgt.mult[mp]);
                if wtp * ws == 0 {
                    continue;
                }
                let rs = src.block_or_zero(b, mp, m);
                let rt = tgt.block_or_zero(b, mp, m);
                // f_{m'} ρ^src - ρ^tgt f_m
                for r in 0..wtp {
                    for c in 0..ws {
                        let mut row = vec![ZERO; u];
                        for k in 0..wsp {
                            row[base[mp] + r * wsp + k] += rs[(k, c)];
                        }
                        for k in 0..wt {
                            row[base[m] + k * ws + c] -= rt[(r, k)];
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    let mut mat = zeros(rows.len(), u);
    for (i, row) in rows.iter().enumerate() {
        for (k, z) in row.iter().enumerate() {
            mat[(i, k)] = *z;
        }
    }
    let ns = null_space(&mat, tol);
    let (so, to) = (src.offsets(), tgt.offsets());
    (0..ns.ncols())
        .map(|j| {
            let mut f = zeros(tgt.total(), src.total());
            for m in 0..n {
                for r in 0..tgt.mult[m] {
                    for c in 0..src.mult[m] {
                        f[(to[m] + r, so[m] + c)] = ns[(base[m] + r * src.mult[m] + c, j)];
                    }
                }
            }
            f
        })
        .collect()
}

/// Image of an idempotent module endomorphism.
fn retract(cat: &SkeletalCategory, md: &ModuleInMFC, e: &CMat, tol: &Tolerance) -> Result<ModuleInMFC, NumericError> {
    let n = cat.n();
    let off = md.offsets();
    let mut parts: Vec<Option<(CMat, CMat)>> = vec![None; n];
    let mut mult = vec![0; n];
    for m in (0..n).filter(|&m| md.mult[m] > 0) {
        let blk = e.view((off[m], off[m]), (md.mult[m], md.mult[m])).into_owned();
        let (emb, ret) = split_idempotent(&blk, tol)?;
        if emb.ncols() > 0 {
            mult[m] = emb.ncols();
            parts[m] = Some((emb, ret));
        }
    }
    let mut action = BTreeMap::new();
    for (&[b, mp, m], blk) in &md.action {
        if let (Some((emb, _)), Some((_, ret))) = (&parts[m], &parts[mp]) {
            action.insert([b, mp, m], ret * blk * emb);
        }
    }
    Ok(ModuleInMFC { mult, action, locality: 0.0 })
}

/// Simple summands of A ⊗ x, one per isomorphism class.
fn summands(cat: &SkeletalCategory, alg: &AlgebraInMFC, x: usize, seed: u64, tol: &Tolerance) -> Result<Vec<ModuleInMFC>, LocmodError> {
    let ind = induced(cat, alg, x);
    let end = module_homs(cat, alg, &ind, &ind, &Tolerance::uniform(1e-10));
    let idems = primitive_idempotents(&end, seed, tol)?;
    let classes = idempotent_classes(&idems, &end, tol);
    let mut out = Vec::new();
    for cl in classes {
        let mut s = retract(cat, &ind, &idems[cl[0]], tol)?;
        s.locality = locality_residual(cat, alg, &s);
        out.push(s);
    }
    Ok(out)
}

/// Pairwise non-isomorphic simple local modules, A itself first.
pub fn local_modules(cat: &SkeletalCategory, alg: &AlgebraInMFC, seed: u64) -> Result<Vec<ModuleInMFC>, LocmodError> {
    let tol = Tolerance::default();
    let chk = check_algebra(cat, alg, &Tolerance::uniform(1e-8))?;
    let bad: Vec<String> = chk.report.failures().iter().map(|(k, _)| k.to_string()).collect();
    if !bad.is_empty() {
        return Err(LocmodError::AlgebraCheckFailed(bad));
    }
    let alg = &normalized(alg);
    let found: Vec<Result<Vec<ModuleInMFC>, LocmodError>> = (0..cat.n())
        .into_par_iter()
        .map(|x| summands(cat, alg, x, seed.wrapping_add(x as u64), &tol))
        .collect();
    let hom_tol = Tolerance::uniform(1e-8);
    let mut out: Vec<ModuleInMFC> = Vec::new();
    for s in found {
        for m in s? {
            if m.locality >= LOCALITY_THRESHOLD {
                continue;
            }
            if !out.iter().any(|t| !module_homs(cat, alg, &m, t, &hom_tol).is_empty()) {
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// Modular data of the local modules: qdim_A = qdim_C/|A|, θ from C, s = s^C/|A|².
pub fn locmod_modular_data(cat: &SkeletalCategory, alg: &AlgebraInMFC, simples: &[ModuleInMFC]) -> Result<ModularData, LocmodError> {
    let sc = cat.smatrix().ok_or(LocmodError::NotBraided)?;
    let n = cat.n();
    let da = alg.dim(cat);
    let k = simples.len();
    let qdim: Vec<C64> = simples.iter().map(|m| m.qdim_in_c(cat) / da).collect();
    let mut tdiag = Vec::with_capacity(k);
    for md in simples {
        let ths: Vec<C64> = (0..n).filter(|&m| md.mult[m] > 0).map(|m| cat.theta(m).unwrap_or(ZERO)).collect();
        let first = ths.first().copied().unwrap_or(ONE);
        let spread = ths.iter().map(|t| (t - first).norm()).fold(0.0, f64::max);
        if spread > 1e-8 {
            return Err(LocmodError::NonScalarTwist(spread));
        }
        tdiag.push(first);
    }
    let mut s = CMat::zeros(k, k);
    for (u, x) in simples.iter().enumerate() {
        for (v, y) in simples.iter().enumerate() {
            let mut acc = ZERO;
            for a in (0..n).filter(|&a| x.mult[a] > 0) {
                for b in (0..n).filter(|&b| y.mult[b] > 0) {
                    acc += sc[(a, b)] * (x.mult[a] * y.mult[b]) as f64;
                }
            }
            s[(u, v)] = acc / (da * da);
        }
    }
    let global_dim: C64 = qdim.iter().map(|q| q * q).sum();
    let want = cat.global_dimension() / (da * da);
    if (global_dim - want).norm() > 1e-6 * want.norm() {
        return Err(LocmodError::DimensionMismatch { got: global_dim.norm(), want: want.norm() });
    }
    Ok(ModularData { labels: (0..k).map(|x| format!("L{x}")).collect(), qdim, smatrix: s, tdiag, global_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion_data::builtin_by_name;

    fn tol() -> Tolerance {
        Tolerance::uniform(1e-8)
    }

    #[test]
    fn toric_boson_condenses_to_one() {
        let cat = builtin_by_name("toric_code").unwrap();
        let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
        assert!(check_algebra(&cat, &alg, &tol()).unwrap().report.passed());
        let loc = local_modules(&cat, &alg, 0).unwrap();
        assert_eq!(loc.len(), 1);
        let md = locmod_modular_data(&cat, &alg, &loc).unwrap();
        assert!((md.global_dim - ONE).norm() < 1e-10);
    }

    #[test]
    fn fermion_fails_only_twist() {
        let cat = builtin_by_name("toric_code").unwrap();
        let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 3]);
        let rep = check_algebra(&cat, &alg, &tol()).unwrap().report;
        let failed: Vec<&str> = rep.failures().iter().map(|(k, _)| *k).collect();
        assert!(failed.contains(&"twist_trivial"), "{failed:?}");
    }

    #[test]
    fn induced_with_m_is_not_local() {
        let cat = builtin_by_name("toric_code").unwrap();
        let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
        let ind = induced(&cat, &alg, 2);
        assert!(ind.locality >= 0.1);
        assert!(module_residual(&cat, &alg, &ind) < 1e-12);
    }

    #[test]
    fn parses_names_and_indices() {
        let cat = builtin_by_name("toric_code").unwrap();
        let text = r#"{"support":["1",1],"mult":[
            {"idx":[0,0,0],"val":[1,0]},{"idx":["1","e","e"],"val":[1,0]},
            {"idx":["e",0,1],"val":[1,0]},{"idx":["e","e","1"],"val":[1,0]}]}"#;
        let alg = AlgebraInMFC::from_json(&cat, text).unwrap();
        assert_eq!(alg, AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]));
    }
}
