//! Drinfeld centre of a spherical fusion category via its tube algebra.
//!
//! A half-braided object is stored in G-form: X = ⊕_m W_m ⊗ m and, for every fusion
//! channel m ⊗ j → l ← j ⊗ m', a linear map G^{l,j}_{m'←m}: W_m → W_{m'}.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fusion_data::{CategoryError, ModularData, SkeletalCategory};
use crate::graded_vect::GradedBimodule;
use crate::numeric::{
    column_space, eye, idempotent_classes, inverse, max_abs, pinv, primitive_idempotents, zeros, CMat, NumericError,
    Tolerance, C64,
};
use crate::orbifold::build_from_spherical;
use crate::report::MaxResidual;
use crate::wilson::{check_wilson, WilsonObject};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CentreError {
    #[error("category has fusion multiplicities > 1")]
    MultiplicityUnsupported,
    #[error("idempotent splitting failed: {0}")]
    SplitFailure(#[from] NumericError),
    #[error("centre is incomplete: sum of squared dimensions {got} vs {want}")]
    Incomplete { got: f64, want: f64 },
    #[error("global dimension {got} differs from (Dim)^2 = {want}")]
    DimensionMismatch { got: f64, want: f64 },
    #[error("bridge object fails {condition} (residual {residual:e})")]
    CheckFailed { condition: String, residual: f64 },
    #[error("modular data sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("category is invalid: {0}")]
    Category(String),
}

impl From<CategoryError> for CentreError {
    fn from(e: CategoryError) -> Self {
        match e {
            CategoryError::MultiplicityUnsupported => CentreError::MultiplicityUnsupported,
            other => CentreError::Category(other.to_string()),
        }
    }
}

/// Blocks keyed by [l, j, m', m].
pub type GammaBlocks = BTreeMap<[usize; 4], CMat>;

#[derive(Debug, Clone, PartialEq)]
pub struct HalfBraidedObject {
    pub mult: Vec<usize>,
    pub gamma: GammaBlocks,
}

impl HalfBraidedObject {
    pub fn g(&self, l: usize, j: usize, mp: usize, m: usize) -> Option<&CMat> {
        self.gamma.get(&[l, j, mp, m])
    }

    pub fn qdim(&self, cat: &SkeletalCategory) -> C64 {
        self.mult.iter().zip(&cat.qdim).map(|(&w, &d)| d * w as f64).sum()
    }

    /// The tensor unit with its trivial half-braiding.
    pub fn unit(cat: &SkeletalCategory) -> Self {
        let n = cat.n();
        let mut mult = vec![0; n];
        mult[0] = 1;
        let mut gamma = BTreeMap::new();
        for j in 0..n {
            gamma.insert([j, j, 0, 0], eye(1));
        }
        HalfBraidedObject { mult, gamma }
    }

    /// G^{l,j} assembled over all m (columns) and m' (rows).
    fn block(&self, cat: &SkeletalCategory, l: usize, j: usize) -> (Vec<usize>, Vec<usize>, CMat) {
        let n = cat.n();
        let ms: Vec<usize> = (0..n).filter(|&m| self.mult[m] > 0 && cat.adm(m, j, l)).collect();
        let mps: Vec<usize> = (0..n).filter(|&m| self.mult[m] > 0 && cat.adm(j, m, l)).collect();
        let co = crate::wilson::prefix(ms.iter().map(|&m| self.mult[m]));
        let ro = crate::wilson::prefix(mps.iter().map(|&m| self.mult[m]));
        let mut big = zeros(ro[mps.len()], co[ms.len()]);
        for (x, &m) in ms.iter().enumerate() {
            for (y, &mp) in mps.iter().enumerate() {
                if let Some(b) = self.g(l, j, mp, m) {
                    big.view_mut((ro[y], co[x]), b.shape()).copy_from(b);
                }
            }
        }
        (ms, mps, big)
    }

    /// G-form inverse blocks keyed [l, j, m, m'].
    pub fn gamma_inverse(&self, cat: &SkeletalCategory) -> Result<GammaBlocks, CentreError> {
        let n = cat.n();
        let mut out = BTreeMap::new();
        for l in 0..n {
            for j in 0..n {
                let (ms, mps, big) = self.block(cat, l, j);
                if ms.is_empty() && mps.is_empty() {
                    continue;
                }
                let inv = inverse(&big)?;
                let co = crate::wilson::prefix(ms.iter().map(|&m| self.mult[m]));
                let ro = crate::wilson::prefix(mps.iter().map(|&m| self.mult[m]));
                for (x, &m) in ms.iter().enumerate() {
                    for (y, &mp) in mps.iter().enumerate() {
                        let b = inv.view((co[x], ro[y]), (self.mult[m], self.mult[mp])).into_owned();
                        out.insert([l, j, m, mp], b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Hexagon residual in G-form, together with γ_1 = id and invertibility of each γ_j.
    pub fn hexagon_residual(&self, cat: &SkeletalCategory) -> f64 {
        let n = cat.n();
        let mut r = MaxResidual::default();
        let w = &self.mult;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            for a in (0..n).filter(|&a| w[a] > 0) {
                                for e in (0..n).filter(|&e| w[e] > 0) {
                                    let mut lhs = zeros(w[e], w[a]);
                                    for b in (0..n).filter(|&b| w[b] > 0) {
                                        let f = cat.fsym(i, b, j, l, c, d);
                                        if f.norm() == 0.0 {
                                            continue;
                                        }
                                        if let (Some(x), Some(y)) = (self.g(d, j, e, b), self.g(c, i, b, a)) {
                                            lhs += (x * y) * f;
                                        }
                                    }
                                    let mut rhs = zeros(w[e], w[a]);
                                    for f in 0..n {
                                        let z = cat.fsym(i, j, e, l, f, d) * cat.fsym(a, i, j, l, c, f);
                                        if z.norm() == 0.0 {
                                            continue;
                                        }
                                        if let Some(x) = self.g(l, f, e, a) {
                                            rhs += x * z;
                                        }
                                    }
                                    r.update(max_abs(&(lhs - rhs)));
                                }
                            }
                        }
                    }
                }
            }
        }
        for m in (0..n).filter(|&m| w[m] > 0) {
            match self.g(m, 0, m, m) {
                Some(b) => r.update(max_abs(&(b - eye(w[m])))),
                None => r.update(f64::INFINITY),
            }
        }
        if self.gamma_inverse(cat).is_err() {
            r.update(f64::INFINITY);
        }
        r.0
    }
}

// ---------------------------------------------------------------- tube algebra

/// Tube algebra with basis t(a, j, l, b): a → b through the channel a⊗j → l ← j⊗b.
pub struct TubeAlgebra {
    pub basis: Vec<[usize; 4]>,
    index: HashMap<[usize; 4], usize>,
    /// left[p] is left multiplication by basis element p.
    pub left: Vec<CMat>,
}

impl TubeAlgebra {
    pub fn new(cat: &SkeletalCategory) -> Result<Self, CentreError> {
        cat.require_multiplicity_free()?;
        let n = cat.n();
        let mut basis = Vec::new();
        for a in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for b in 0..n {
                        if cat.adm(a, j, l) && cat.adm(j, b, l) {
                            basis.push([a, j, l, b]);
                        }
                    }
                }
            }
        }
        let index: HashMap<[usize; 4], usize> = basis.iter().enumerate().map(|(k, t)| (*t, k)).collect();
        let dim = basis.len();
        let products: Vec<Vec<(usize, usize, Vec<C64>)>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut out = Vec::new();
                for e in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            for c in 0..n {
                                for d in 0..n {
                                    let bs: Vec<usize> = (0..n)
                                        .filter(|&b| index.contains_key(&[a, i, c, b]) && index.contains_key(&[b, j, d, e]))
                                        .collect();
                                    if bs.is_empty() {
                                        continue;
                                    }
                                    let mut fm = zeros(n, bs.len());
                                    for l in 0..n {
                                        for (x, &b) in bs.iter().enumerate() {
                                            fm[(l, x)] = cat.fsym(i, b, j, l, c, d);
                                        }
                                    }
                                    let k = pinv(&fm, &Tolerance::uniform(1e-12));
                                    for (x, &b) in bs.iter().enumerate() {
                                        let mut v = vec![C64::new(0.0, 0.0); dim];
                                        for l in 0..n {
                                            if k[(x, l)].norm() == 0.0 {
                                                continue;
                                            }
                                            for f in 0..n {
                                                if let Some(&t) = index.get(&[a, f, l, e]) {
                                                    v[t] += k[(x, l)] * cat.fsym(i, j, e, l, f, d) * cat.fsym(a, i, j, l, c, f);
                                                }
                                            }
                                        }
                                        out.push((index[&[b, j, d, e]], index[&[a, i, c, b]], v));
                                    }
                                }
                            }
                        }
                    }
                }
                out
            })
            .collect();
        let mut left = vec![zeros(dim, dim); dim];
        for (p, q, v) in products.into_iter().flatten() {
            for (r, z) in v.into_iter().enumerate() {
                left[p][(r, q)] = z;
            }
        }
        Ok(TubeAlgebra { basis, index, left })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn unit_vector(&self, n: usize) -> CMat {
        let mut u = zeros(self.dim(), 1);
        for a in 0..n {
            u[(self.index[&[a, 0, a, a]], 0)] = C64::new(1.0, 0.0);
        }
        u
    }

    pub fn element(&self, t: [usize; 4]) -> Option<usize> {
        self.index.get(&t).copied()
    }

    /// Max deviation from associativity and unitality on basis triples.
    pub fn associativity_residual(&self, n: usize) -> f64 {
        let mut r = MaxResidual::default();
        let u = self.unit_vector(n);
        let mut lu = zeros(self.dim(), self.dim());
        for k in 0..self.dim() {
            lu += &self.left[k] * u[(k, 0)];
        }
        r.update(max_abs(&(lu - eye(self.dim()))));
        for p in 0..self.dim() {
            for q in 0..self.dim() {
                // L_p L_q = L_{p q}
                let pq = self.left[p].column(q).into_owned();
                let mut lpq = zeros(self.dim(), self.dim());
                for k in 0..self.dim() {
                    if pq[k].norm() > 0.0 {
                        lpq += &self.left[k] * pq[k];
                    }
                }
                r.update(max_abs(&(&self.left[p] * &self.left[q] - lpq)));
            }
        }
        r.0
    }
}

/// Simple objects of the centre, unit first.
pub fn centre_simples(cat: &SkeletalCategory, seed: u64) -> Result<Vec<HalfBraidedObject>, CentreError> {
    let tol = Tolerance::default();
    let tube = TubeAlgebra::new(cat)?;
    let n = cat.n();
    let idems = primitive_idempotents(&tube.left, seed, &tol)?;
    let classes = idempotent_classes(&idems, &tube.left, &tol);
    let unit = tube.unit_vector(n);
    let rank_tol = Tolerance::uniform(1e-8);
    let mut out = Vec::new();
    for cl in classes {
        let e = &idems[cl[0]] * &unit;
        let mut span = zeros(tube.dim(), tube.dim());
        for k in 0..tube.dim() {
            span.set_column(k, &(&tube.left[k] * &e).column(0));
        }
        let q = column_space(&span, &rank_tol);
        let mut parts: Vec<Option<CMat>> = vec![None; n];
        let mut mult = vec![0; n];
        for (b, part) in parts.iter_mut().enumerate() {
            let ub = &tube.left[tube.index[&[b, 0, b, b]]];
            let qb = column_space(&(ub * &q), &rank_tol);
            if qb.ncols() > 0 {
                mult[b] = qb.ncols();
                *part = Some(qb);
            }
        }
        let mut gamma = BTreeMap::new();
        for (k, &[a, i, c, b]) in tube.basis.iter().enumerate() {
            if let (Some(qa), Some(qb)) = (&parts[a], &parts[b]) {
                gamma.insert([c, i, b, a], qb.adjoint() * &tube.left[k] * qa);
            }
        }
        out.push(HalfBraidedObject { mult, gamma });
    }
    let trivial = HalfBraidedObject::unit(cat);
    let is_unit = |h: &HalfBraidedObject| {
        h.mult == trivial.mult
            && trivial.gamma.iter().all(|(k, g)| h.gamma.get(k).is_some_and(|x| max_abs(&(x - g)) < 1e-8))
    };
    if let Some(k) = out.iter().position(is_unit) {
        let u = out.remove(k);
        out.insert(0, u);
    }
    let got: f64 = out.iter().map(|h| h.qdim(cat).norm_sqr()).sum();
    let want = cat.global_dimension().norm().powi(2);
    if (got - want).abs() > 1e-6 * want {
        return Err(CentreError::Incomplete { got, want });
    }
    Ok(out)
}

/// qdim, twists and unnormalized S of a list of centre objects.
pub fn centre_modular_data(cat: &SkeletalCategory, simples: &[HalfBraidedObject]) -> Result<ModularData, CentreError> {
    let n = cat.n();
    let q = &cat.qdim;
    let qd: Vec<C64> = simples.iter().map(|h| h.qdim(cat)).collect();
    let theta: Vec<C64> = simples
        .iter()
        .zip(&qd)
        .map(|(h, &d)| {
            let mut t = C64::new(0.0, 0.0);
            for a in (0..n).filter(|&a| h.mult[a] > 0) {
                for l in (0..n).filter(|&l| cat.adm(a, a, l)) {
                    if let Some(g) = h.g(l, a, a, a) {
                        t += q[l] * g.trace();
                    }
                }
            }
            t / d
        })
        .collect();
    let k = simples.len();
    let mut s = CMat::zeros(k, k);
    for u in 0..k {
        for v in 0..k {
            let (x, y) = (&simples[u], &simples[v]);
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..n {
                for a in (0..n).filter(|&a| x.mult[a] > 0) {
                    for b in (0..n).filter(|&b| y.mult[b] > 0 && cat.adm(a, b, l)) {
                        if let (Some(gy), Some(gx)) = (y.g(l, a, b, b), x.g(l, b, a, a)) {
                            acc += q[l] * gy.trace() * gx.trace();
                        }
                    }
                }
            }
            s[(u, v)] = acc;
        }
    }
    let global_dim: C64 = qd.iter().map(|&d| d * d).sum();
    let want = cat.global_dimension() * cat.global_dimension();
    if (global_dim - want).norm() > 1e-6 * want.norm() {
        return Err(CentreError::DimensionMismatch { got: global_dim.norm(), want: want.norm() });
    }
    Ok(ModularData {
        labels: (0..k).map(|x| format!("Z{x}")).collect(),
        qdim: qd,
        smatrix: s,
        tdiag: theta,
        global_dim,
    })
}

/// The Wilson object of a centre object: M_{lk} = ⊕_{m: N_{mk}^l} W_m.
pub fn centre_to_wilson(cat: &SkeletalCategory, hb: &HalfBraidedObject) -> Result<WilsonObject, CentreError> {
    let datum = build_from_spherical(cat).map_err(|e| CentreError::Category(e.to_string()))?;
    let obj = centre_to_wilson_unchecked(cat, hb)?;
    let rep = check_wilson(&obj, &datum, &Tolerance::uniform(1e-8)).map_err(|e| CentreError::Category(e.to_string()))?;
    let core = ["T1", "T2", "T3", "T4", "T5", "T6", "T7"];
    for name in core {
        if rep.pass_of(name) == Some(false) {
            return Err(CentreError::CheckFailed { condition: name.into(), residual: rep.residual(name).unwrap_or(f64::NAN) });
        }
    }
    Ok(obj)
}

/// As `centre_to_wilson`, without running the T-checks.
pub fn centre_to_wilson_unchecked(cat: &SkeletalCategory, hb: &HalfBraidedObject) -> Result<WilsonObject, CentreError> {
    let n = cat.n();
    let q = &cat.qdim;
    let w = &hb.mult;
    let ginv = hb.gamma_inverse(cat)?;
    // summands of M_{lk}, with offsets
    let mut summands: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    let mut dims = GradedBimodule::zero(n);
    for l in 0..n {
        for k in 0..n {
            let mut off = 0;
            let mut v = Vec::new();
            for m in (0..n).filter(|&m| w[m] > 0 && cat.adm(m, k, l)) {
                v.push((m, off));
                off += w[m];
            }
            if off > 0 {
                dims.set((l, k), off);
                summands.insert((l, k), v);
            }
        }
    }
    let mut x = WilsonObject::empty(dims.clone());
    let t = |l: usize, i: usize, j: usize| cat.adm(i, j, l);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    let Some(src) = summands.get(&(l, a)) else { continue };
                    if !t(a, i, j) {
                        continue;
                    }
                    for b in 0..n {
                        if t(l, b, j) {
                            if let Some(tgt) = summands.get(&(b, i)) {
                                let mut fwd = zeros(dims.dim(b, i), dims.dim(l, a));
                                let mut bwd = zeros(dims.dim(l, a), dims.dim(b, i));
                                for &(m, so) in src {
                                    for &(mm, to) in tgt {
                                        if m == mm {
                                            let id = eye(w[m]);
                                            fwd.view_mut((to, so), (w[m], w[m])).copy_from(&(&id * (cat.finv(m, i, j, l, a, b) / q[b])));
                                            bwd.view_mut((so, to), (w[m], w[m])).copy_from(&(&id * (cat.fsym(m, i, j, l, b, a) / q[a])));
                                        }
                                    }
                                }
                                x.tau1.insert([l, i, j, b, a], fwd);
                                x.tau1_bar.insert([l, i, j, a, b], bwd);
                            }
                        }
                        if t(l, i, b) {
                            if let Some(tgt) = summands.get(&(b, j)) {
                                let mut fwd = zeros(dims.dim(b, j), dims.dim(l, a));
                                let mut bwd = zeros(dims.dim(l, a), dims.dim(b, j));
                                for &(m, so) in src {
                                    for &(mp, to) in tgt {
                                        let mut f = zeros(w[mp], w[m]);
                                        let mut g = zeros(w[m], w[mp]);
                                        for p in 0..n {
                                            if let Some(gm) = hb.g(p, i, mp, m) {
                                                let z = cat.fsym(i, mp, j, l, p, b) * cat.finv(m, i, j, l, a, p) / q[b];
                                                f += gm * z;
                                            }
                                            if let Some(gm) = ginv.get(&[p, i, m, mp]) {
                                                let z = cat.fsym(m, i, j, l, p, a) * cat.finv(i, mp, j, l, b, p) / q[a];
                                                g += gm * z;
                                            }
                                        }
                                        fwd.view_mut((to, so), f.shape()).copy_from(&f);
                                        bwd.view_mut((so, to), g.shape()).copy_from(&g);
                                    }
                                }
                                x.tau2.insert([l, i, j, b, a], fwd);
                                x.tau2_bar.insert([l, i, j, a, b], bwd);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------- comparison

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum MatchResult {
    Match { permutation: Vec<usize>, residual: f64 },
    NoMatch { best_residual: f64 },
}

impl MatchResult {
    pub fn is_match(&self) -> bool {
        matches!(self, MatchResult::Match { .. })
    }
}

/// Unit-fixing bijection π with a_i ≈ b_{π(i)} for S, T and qdim.
pub fn compare_modular_data(a: &ModularData, b: &ModularData, tol: f64) -> Result<MatchResult, CentreError> {
    let n = a.len();
    if n != b.len() {
        return Err(CentreError::SizeMismatch(n, b.len()));
    }
    if n == 0 {
        return Ok(MatchResult::Match { permutation: vec![], residual: 0.0 });
    }
    let diag = |i: usize, j: usize| -> f64 {
        (a.qdim[i] - b.qdim[j])
            .norm()
            .max((a.tdiag[i] - b.tdiag[j]).norm())
            .max((a.smatrix[(i, i)] - b.smatrix[(j, j)]).norm())
    };
    struct Search<'a> {
        a: &'a ModularData,
        b: &'a ModularData,
        perm: Vec<usize>,
        used: Vec<bool>,
        best: f64,
        best_perm: Vec<usize>,
    }
    fn dfs(s: &mut Search, i: usize, cur: f64, diag: &dyn Fn(usize, usize) -> f64) {
        let n = s.a.len();
        if cur >= s.best {
            return;
        }
        if i == n {
            s.best = cur;
            s.best_perm = s.perm.clone();
            return;
        }
        let mut opts: Vec<(f64, usize)> = (0..n)
            .filter(|&j| !s.used[j])
            .map(|j| {
                let mut r = cur.max(diag(i, j));
                for p in 0..i {
                    r = r.max((s.a.smatrix[(i, p)] - s.b.smatrix[(j, s.perm[p])]).norm());
                    r = r.max((s.a.smatrix[(p, i)] - s.b.smatrix[(s.perm[p], j)]).norm());
                }
                (r, j)
            })
            .collect();
        opts.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (r, j) in opts {
            s.used[j] = true;
            s.perm.push(j);
            dfs(s, i + 1, r, diag);
            s.perm.pop();
            s.used[j] = false;
        }
    }
    let mut s = Search { a, b, perm: vec![0], used: vec![false; n], best: f64::INFINITY, best_perm: vec![] };
    s.used[0] = true;
    let start = diag(0, 0);
    dfs(&mut s, 1, start, &diag);
    if s.best <= tol {
        Ok(MatchResult::Match { permutation: s.best_perm, residual: s.best })
    } else {
        Ok(MatchResult::NoMatch { best_residual: s.best })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion_data::builtin_by_name;

    #[test]
    fn tube_is_associative() {
        let cat = builtin_by_name("fibonacci").unwrap();
        let t = TubeAlgebra::new(&cat).unwrap();
        assert!(t.associativity_residual(cat.n()) < 1e-10);
    }

    #[test]
    fn z2_centre_has_four_simples() {
        let cat = builtin_by_name("vec_z2").unwrap();
        let s = centre_simples(&cat, 0).unwrap();
        assert_eq!(s.len(), 4);
        let over_zero = s.iter().filter(|h| h.mult == vec![1, 0]).count();
        assert_eq!(over_zero, 2);
        for h in &s {
            assert!(h.hexagon_residual(&cat) < 1e-10);
        }
    }

    #[test]
    fn compare_with_self_is_identity() {
        let cat = builtin_by_name("toric_code").unwrap();
        let md = ModularData::from_category(&cat).unwrap();
        match compare_modular_data(&md, &md, 1e-9).unwrap() {
            MatchResult::Match { permutation, .. } => assert_eq!(permutation, vec![0, 1, 2, 3]),
            m => panic!("{m:?}"),
        }
    }
}
