//! Skeletal fusion categories: data, file format, axiom checks and builtins.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::numeric::{self, c, inverse, pair, principal_sqrt, CMat, Tolerance, C64, ONE, ZERO};
use crate::report::{ConditionReport, MaxResidual};

pub type FKey = ([usize; 6], [usize; 4]);
pub type RKey = ([usize; 3], [usize; 2]);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CategoryError {
    #[error("malformed category data: {0}")]
    MalformedData(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("cocycle condition violated (residual {residual:e})")]
    InvalidCocycle { residual: f64 },
    #[error("fusion multiplicities above one are not supported here")]
    MultiplicityUnsupported,
}

/// One F-matrix block F^{abc}_d with its row labels e and column labels f.
#[derive(Debug, Clone)]
struct FBlock {
    rows: Vec<usize>,
    cols: Vec<usize>,
    m: CMat,
    inv: CMat,
}

#[derive(Debug, Clone)]
pub struct SkeletalCategory {
    pub labels: Vec<String>,
    pub dual: Vec<usize>,
    pub qdim: Vec<C64>,
    fusion: Vec<u32>,
    pub f: BTreeMap<FKey, C64>,
    pub r: Option<BTreeMap<RKey, C64>>,
    pub twist: Option<Vec<C64>>,
    blocks: HashMap<[usize; 4], FBlock>,
}

impl SkeletalCategory {
    /// Validate shapes and build the F-matrix tables.
    pub fn new(
        labels: Vec<String>,
        dual: Vec<usize>,
        qdim: Vec<C64>,
        fusion_entries: &[[usize; 4]],
        f: BTreeMap<FKey, C64>,
        r: Option<BTreeMap<RKey, C64>>,
        twist: Option<Vec<C64>>,
    ) -> Result<Self, CategoryError> {
        let n = labels.len();
        let bad = |m: String| Err(CategoryError::MalformedData(m));
        if n == 0 {
            return bad("no labels".into());
        }
        if dual.len() != n || qdim.len() != n {
            return bad(format!("dual/qdim arity must equal label count {n}"));
        }
        if let Some(t) = &twist {
            if t.len() != n {
                return bad(format!("twist arity {} differs from label count {n}", t.len()));
            }
        }
        if dual.iter().any(|&d| d >= n) {
            return bad("dual index out of range".into());
        }
        let mut fusion = vec![0u32; n * n * n];
        for e in fusion_entries {
            if e[0] >= n || e[1] >= n || e[2] >= n {
                return bad(format!("fusion entry {e:?} out of range"));
            }
            fusion[(e[0] * n + e[1]) * n + e[2]] = e[3] as u32;
        }
        for (idx, mu) in f.keys() {
            if idx.iter().any(|&x| x >= n) {
                return bad(format!("F index {idx:?} out of range"));
            }
            let _ = mu;
        }
        if let Some(rr) = &r {
            if rr.keys().any(|(idx, _)| idx.iter().any(|&x| x >= n)) {
                return bad("R index out of range".into());
            }
        }
        if qdim.iter().chain(twist.iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return bad("non-finite scalar".into());
        }
        let mut cat = SkeletalCategory { labels, dual, qdim, fusion, f, r, twist, blocks: HashMap::new() };
        if cat.is_multiplicity_free() {
            cat.build_blocks()?;
        }
        Ok(cat)
    }

    fn build_blocks(&mut self) -> Result<(), CategoryError> {
        let n = self.n();
        let mut blocks = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let rows: Vec<usize> =
                            (0..n).filter(|&e| self.adm(a, b, e) && self.adm(e, cc, d)).collect();
                        let cols: Vec<usize> =
                            (0..n).filter(|&f| self.adm(b, cc, f) && self.adm(a, f, d)).collect();
                        if rows.is_empty() && cols.is_empty() {
                            continue;
                        }
                        if rows.len() != cols.len() {
                            return Err(CategoryError::MalformedData(format!(
                                "F block ({a},{b},{cc},{d}) is {}x{}",
                                rows.len(),
                                cols.len()
                            )));
                        }
                        let m = CMat::from_fn(rows.len(), cols.len(), |x, y| {
                            self.f_raw(a, b, cc, d, rows[x], cols[y])
                        });
                        let inv = inverse(&m).map_err(|_| {
                            CategoryError::MalformedData(format!("F block ({a},{b},{cc},{d}) is singular"))
                        })?;
                        blocks.insert([a, b, cc, d], FBlock { rows, cols, m, inv });
                    }
                }
            }
        }
        self.blocks = blocks;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn nmult(&self, i: usize, j: usize, k: usize) -> u32 {
        let n = self.n();
        self.fusion[(i * n + j) * n + k]
    }

    /// N_{ij}^k > 0
    pub fn adm(&self, i: usize, j: usize, k: usize) -> bool {
        self.nmult(i, j, k) > 0
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.fusion.iter().all(|&x| x <= 1)
    }

    pub fn require_multiplicity_free(&self) -> Result<(), CategoryError> {
        if self.is_multiplicity_free() {
            Ok(())
        } else {
            Err(CategoryError::MultiplicityUnsupported)
        }
    }

    pub fn fusion_entries(&self) -> Vec<[usize; 4]> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let m = self.nmult(i, j, k);
                    if m > 0 {
                        out.push([i, j, k, m as usize]);
                    }
                }
            }
        }
        out
    }

    fn f_raw(&self, a: usize, b: usize, cc: usize, d: usize, e: usize, f: usize) -> C64 {
        self.f.get(&([a, b, cc, d, e, f], [0; 4])).copied().unwrap_or(ZERO)
    }

    /// F^{abc}_d[e,f]: (ab)_e c -> a(bc)_f.
    pub fn fsym(&self, a: usize, b: usize, cc: usize, d: usize, e: usize, f: usize) -> C64 {
        match self.blocks.get(&[a, b, cc, d]) {
            Some(bl) => match (bl.rows.iter().position(|&x| x == e), bl.cols.iter().position(|&x| x == f)) {
                (Some(x), Some(y)) => bl.m[(x, y)],
                _ => ZERO,
            },
            None => ZERO,
        }
    }

    /// Inverse F-move a(bc)_f -> (ab)_e.
    pub fn finv(&self, a: usize, b: usize, cc: usize, d: usize, f: usize, e: usize) -> C64 {
        match self.blocks.get(&[a, b, cc, d]) {
            Some(bl) => match (bl.rows.iter().position(|&x| x == e), bl.cols.iter().position(|&x| x == f)) {
                (Some(x), Some(y)) => bl.inv[(y, x)],
                _ => ZERO,
            },
            None => ZERO,
        }
    }

    pub fn rsym(&self, a: usize, b: usize, cc: usize) -> C64 {
        self.r
            .as_ref()
            .and_then(|r| r.get(&([a, b, cc], [0; 2])).copied())
            .unwrap_or(ZERO)
    }

    pub fn is_braided(&self) -> bool {
        self.r.is_some()
    }

    /// Twist from the data if supplied, else from R: θ_x = Σ_c |c| R^{xx}_c / |x|.
    pub fn theta(&self, x: usize) -> Option<C64> {
        if let Some(t) = &self.twist {
            return Some(t[x]);
        }
        self.r.as_ref()?;
        let n = self.n();
        let s: C64 = (0..n).filter(|&k| self.adm(x, x, k)).map(|k| self.qdim[k] * self.rsym(x, x, k)).sum();
        Some(s / self.qdim[x])
    }

    /// Unnormalized s_{ab} = Σ_c N_{ab}^c R^{ba}_c R^{ab}_c |c|.
    pub fn smatrix(&self) -> Option<CMat> {
        self.r.as_ref()?;
        let n = self.n();
        Some(CMat::from_fn(n, n, |a, b| {
            (0..n)
                .filter(|&k| self.adm(a, b, k))
                .map(|k| self.rsym(b, a, k) * self.rsym(a, b, k) * self.qdim[k])
                .sum()
        }))
    }

    pub fn global_dimension(&self) -> C64 {
        global_dimension(self)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == name)
    }

    /// Copy with one F-entry shifted by `delta` (tables rebuilt).
    pub fn with_f_shift(&self, key: [usize; 6], delta: C64) -> Result<Self, CategoryError> {
        let mut f = self.f.clone();
        *f.entry((key, [0; 4])).or_insert(ZERO) += delta;
        SkeletalCategory::new(
            self.labels.clone(),
            self.dual.clone(),
            self.qdim.clone(),
            &self.fusion_entries(),
            f,
            self.r.clone(),
            self.twist.clone(),
        )
    }

    /// Square root of |i| on the principal branch.
    pub fn sqrt_qdim(&self, i: usize) -> C64 {
        principal_sqrt(self.qdim[i])
    }

    pub fn to_file(&self) -> CategoryFile {
        CategoryFile {
            labels: self.labels.clone(),
            dual: self.dual.clone(),
            qdim: self.qdim.iter().map(|&z| pair(z)).collect(),
            fusion: self.fusion_entries(),
            f: self
                .f
                .iter()
                .map(|((idx, mu), v)| FEntry { idx: *idx, mu: *mu, val: pair(*v) })
                .collect(),
            r: self.r.as_ref().map(|r| {
                r.iter().map(|((idx, mu), v)| REntry { idx: *idx, mu: *mu, val: pair(*v) }).collect()
            }),
            twist: self.twist.as_ref().map(|t| t.iter().map(|&z| pair(z)).collect()),
        }
    }

    pub fn from_file(file: &CategoryFile) -> Result<Self, CategoryError> {
        let f = file
            .f
            .iter()
            .map(|e| ((e.idx, e.mu), numeric::from_pair(e.val)))
            .collect();
        let r = file
            .r
            .as_ref()
            .map(|r| r.iter().map(|e| ((e.idx, e.mu), numeric::from_pair(e.val))).collect());
        SkeletalCategory::new(
            file.labels.clone(),
            file.dual.clone(),
            file.qdim.iter().map(|&p| numeric::from_pair(p)).collect(),
            &file.fusion,
            f,
            r,
            file.twist.as_ref().map(|t| t.iter().map(|&p| numeric::from_pair(p)).collect()),
        )
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let file: CategoryFile = serde_json::from_str(text)?;
        Ok(SkeletalCategory::from_file(&file)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("category serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FEntry {
    pub idx: [usize; 6],
    #[serde(default)]
    pub mu: [usize; 4],
    pub val: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct REntry {
    pub idx: [usize; 3],
    #[serde(default)]
    pub mu: [usize; 2],
    pub val: [f64; 2],
}

/// On-disk category description. Missing F/R entries read as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryFile {
    pub labels: Vec<String>,
    pub dual: Vec<usize>,
    pub qdim: Vec<[f64; 2]>,
    #[serde(rename = "N")]
    pub fusion: Vec<[usize; 4]>,
    #[serde(rename = "F")]
    pub f: Vec<FEntry>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<REntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<[f64; 2]>>,
}

pub fn global_dimension(cat: &SkeletalCategory) -> C64 {
    cat.qdim.iter().map(|&d| d * d).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCheck {
    pub report: ConditionReport,
    /// None when no braiding is supplied.
    pub modular: Option<bool>,
}

pub fn check_category(cat: &SkeletalCategory, tol: &Tolerance) -> Result<CategoryCheck, CategoryError> {
    cat.require_multiplicity_free()?;
    let n = cat.n();
    let mut rep = ConditionReport::new(tol);

    let mut unit = MaxResidual::default();
    for j in 0..n {
        for k in 0..n {
            let want = if j == k { 1.0 } else { 0.0 };
            unit.update((cat.nmult(0, j, k) as f64 - want).abs());
            unit.update((cat.nmult(j, 0, k) as f64 - want).abs());
        }
    }
    if cat.dual[0] != 0 {
        unit.update(1.0);
    }
    rep.record("unit", unit.0);

    let mut dual = MaxResidual::default();
    for i in 0..n {
        if cat.dual[cat.dual[i]] != i {
            dual.update(1.0);
        }
        for j in 0..n {
            let want = if j == cat.dual[i] { 1.0 } else { 0.0 };
            dual.update((cat.nmult(i, j, 0) as f64 - want).abs());
        }
    }
    rep.record("duality", dual.0);

    let mut qd = MaxResidual::default();
    qd.update((cat.qdim[0] - ONE).norm());
    for i in 0..n {
        qd.update((cat.qdim[i] - cat.qdim[cat.dual[i]]).norm());
        if cat.qdim[i].norm() == 0.0 {
            qd.update(f64::INFINITY);
        }
        for j in 0..n {
            let s: C64 = (0..n).map(|k| c(cat.nmult(i, j, k) as f64) * cat.qdim[k]).sum();
            qd.update((cat.qdim[i] * cat.qdim[j] - s).norm());
        }
    }
    rep.record("qdim", qd.0);

    rep.record("pentagon", pentagon_residual(cat));

    let mut modular = None;
    if cat.is_braided() {
        rep.record("hexagon", hexagon_residual(cat, false));
        rep.record("hexagon_inverse", hexagon_residual(cat, true));
        let mut rib = MaxResidual::default();
        let th: Vec<C64> = (0..n).map(|x| cat.theta(x).expect("braided")).collect();
        rib.update((th[0] - ONE).norm());
        for i in 0..n {
            rib.update((th[i] - th[cat.dual[i]]).norm());
            for j in 0..n {
                for k in 0..n {
                    if cat.adm(i, j, k) {
                        let mono = cat.rsym(j, i, k) * cat.rsym(i, j, k);
                        rib.update((th[k] - th[i] * th[j] * mono).norm());
                    }
                }
            }
        }
        rep.record("ribbon", rib.0);
        let s = cat.smatrix().expect("braided");
        let sv = numeric::svd(&s);
        let smax = sv.s.first().copied().unwrap_or(0.0);
        let smin = sv.s.last().copied().unwrap_or(0.0);
        modular = Some(smin > 0.0 && smax / smin < 1.0 / tol.abs_eps);
    }
    Ok(CategoryCheck { report: rep, modular })
}

/// F^{fcd}_e[g,l] F^{abl}_e[f,k] = Σ_h F^{abc}_g[f,h] F^{ahd}_e[g,k] F^{bcd}_k[h,l]
pub fn pentagon_residual(cat: &SkeletalCategory) -> f64 {
    let n = cat.n();
    let mut worst = MaxResidual::default();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    for f in (0..n).filter(|&f| cat.adm(a, b, f)) {
                        for g in (0..n).filter(|&g| cat.adm(f, cc, g)) {
                            for e in (0..n).filter(|&e| cat.adm(g, d, e)) {
                                for l in (0..n).filter(|&l| cat.adm(cc, d, l)) {
                                    for k in (0..n).filter(|&k| cat.adm(b, l, k) && cat.adm(a, k, e)) {
                                        let lhs = cat.fsym(f, cc, d, e, g, l) * cat.fsym(a, b, l, e, f, k);
                                        let rhs: C64 = (0..n)
                                            .map(|h| {
                                                cat.fsym(a, b, cc, g, f, h)
                                                    * cat.fsym(a, h, d, e, g, k)
                                                    * cat.fsym(b, cc, d, k, h, l)
                                            })
                                            .sum();
                                        worst.update((lhs - rhs).norm());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    worst.0
}

/// R^{ca}_e F^{acb}_d[e,g] R^{cb}_g = Σ_f F^{cab}_d[e,f] R^{cf}_d F^{abc}_d[f,g],
/// or the same with R^{xy}_z replaced by (R^{yx}_z)^{-1}.
pub fn hexagon_residual(cat: &SkeletalCategory, inverse_braiding: bool) -> f64 {
    let n = cat.n();
    let rr = |x: usize, y: usize, z: usize| -> C64 {
        if !inverse_braiding {
            cat.rsym(x, y, z)
        } else {
            let v = cat.rsym(y, x, z);
            if v.norm() == 0.0 {
                C64::new(f64::INFINITY, 0.0)
            } else {
                ONE / v
            }
        }
    };
    let mut worst = MaxResidual::default();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    for e in (0..n).filter(|&e| cat.adm(cc, a, e) && cat.adm(e, b, d)) {
                        for g in (0..n).filter(|&g| cat.adm(cc, b, g) && cat.adm(a, g, d)) {
                            let lhs = rr(cc, a, e) * cat.fsym(a, cc, b, d, e, g) * rr(cc, b, g);
                            let rhs: C64 = (0..n)
                                .filter(|&f| cat.adm(a, b, f) && cat.adm(cc, f, d))
                                .map(|f| cat.fsym(cc, a, b, d, e, f) * rr(cc, f, d) * cat.fsym(a, b, cc, d, f, g))
                                .sum();
                            worst.update((lhs - rhs).norm());
                        }
                    }
                }
            }
        }
    }
    worst.0
}

/// Finite group by multiplication table; element 0 must be the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTable {
    pub names: Vec<String>,
    pub mul: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn cyclic(n: usize) -> Self {
        GroupTable {
            names: (0..n).map(|k| k.to_string()).collect(),
            mul: (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect(),
        }
    }

    /// Z2 x Z2 with elements ordered (0,0), (1,0), (0,1), (1,1).
    pub fn klein(names: [&str; 4]) -> Self {
        let code = |k: usize| (k & 1, k >> 1);
        let mul = (0..4)
            .map(|a| {
                (0..4)
                    .map(|b| {
                        let (a1, a2) = code(a);
                        let (b1, b2) = code(b);
                        (a1 ^ b1) | ((a2 ^ b2) << 1)
                    })
                    .collect()
            })
            .collect();
        GroupTable { names: names.iter().map(|s| s.to_string()).collect(), mul }
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn inverse_of(&self, a: usize) -> usize {
        (0..self.order()).find(|&b| self.mul[a][b] == 0).expect("validated group")
    }

    fn validate(&self) -> Result<(), CategoryError> {
        let n = self.order();
        let bad = |m: &str| Err(CategoryError::MalformedData(m.to_string()));
        if n == 0 || self.names.len() != n || self.mul.iter().any(|r| r.len() != n) {
            return bad("group table shape");
        }
        for a in 0..n {
            if self.mul[0][a] != a || self.mul[a][0] != a {
                return bad("element 0 is not the identity");
            }
            let mut seen = vec![false; n];
            for b in 0..n {
                let p = self.mul[a][b];
                if p >= n || seen[p] {
                    return bad("table is not a Latin square");
                }
                seen[p] = true;
            }
            for b in 0..n {
                for cc in 0..n {
                    if self.mul[self.mul[a][b]][cc] != self.mul[a][self.mul[b][cc]] {
                        return bad("multiplication is not associative");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Normalized 3-cocycle values ω(a,b,c), indexed [a][b][c].
pub type Cocycle = Vec<Vec<Vec<C64>>>;

pub fn trivial_cocycle(n: usize) -> Cocycle {
    vec![vec![vec![ONE; n]; n]; n]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    VecG { group: GroupTable, cocycle: Cocycle },
    Fibonacci,
    Ising,
    ToricCode,
}

pub const BUILTIN_NAMES: [&str; 6] = ["vect", "vec_z2", "vec_z3", "fibonacci", "ising", "toric_code"];

pub fn builtin_by_name(name: &str) -> Result<SkeletalCategory, CategoryError> {
    let b = match name {
        "vect" => Builtin::VecG { group: GroupTable::cyclic(1), cocycle: trivial_cocycle(1) },
        "vec_z2" => Builtin::VecG { group: GroupTable::cyclic(2), cocycle: trivial_cocycle(2) },
        "vec_z3" => Builtin::VecG { group: GroupTable::cyclic(3), cocycle: trivial_cocycle(3) },
        "fibonacci" => Builtin::Fibonacci,
        "ising" => Builtin::Ising,
        "toric_code" => Builtin::ToricCode,
        other => return Err(CategoryError::UnknownBuiltin(other.to_string())),
    };
    builtin(&b)
}

pub fn builtin(which: &Builtin) -> Result<SkeletalCategory, CategoryError> {
    match which {
        Builtin::VecG { group, cocycle } => vec_g(group, cocycle),
        Builtin::Fibonacci => Ok(fibonacci()),
        Builtin::Ising => Ok(ising()),
        Builtin::ToricCode => Ok(toric_code()),
    }
}

pub fn cocycle_residual(group: &GroupTable, w: &Cocycle) -> f64 {
    let n = group.order();
    let m = &group.mul;
    let mut worst = MaxResidual::default();
    for a in 0..n {
        for b in 0..n {
            worst.update((w[0][a][b] - ONE).norm());
            worst.update((w[a][0][b] - ONE).norm());
            worst.update((w[a][b][0] - ONE).norm());
            for cc in 0..n {
                for d in 0..n {
                    let lhs = w[m[a][b]][cc][d] * w[a][b][m[cc][d]];
                    let rhs = w[a][b][cc] * w[a][m[b][cc]][d] * w[b][cc][d];
                    worst.update((lhs - rhs).norm());
                }
            }
        }
    }
    worst.0
}

/// Vec_G^ω; braided by R = 1 only when G is abelian and ω trivial.
pub fn vec_g(group: &GroupTable, cocycle: &Cocycle) -> Result<SkeletalCategory, CategoryError> {
    group.validate()?;
    let n = group.order();
    if cocycle.len() != n || cocycle.iter().any(|r| r.len() != n || r.iter().any(|s| s.len() != n)) {
        return Err(CategoryError::MalformedData("cocycle table shape".into()));
    }
    let res = cocycle_residual(group, cocycle);
    if res > 1e-9 {
        return Err(CategoryError::InvalidCocycle { residual: res });
    }
    let m = &group.mul;
    let mut fusion = Vec::new();
    for a in 0..n {
        for b in 0..n {
            fusion.push([a, b, m[a][b], 1]);
        }
    }
    let mut f = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                let key = [a, b, cc, m[m[a][b]][cc], m[a][b], m[b][cc]];
                f.insert((key, [0; 4]), cocycle[a][b][cc]);
            }
        }
    }
    let abelian = (0..n).all(|a| (0..n).all(|b| m[a][b] == m[b][a]));
    let trivial = cocycle.iter().flatten().flatten().all(|z| (z - ONE).norm() == 0.0);
    let r = (abelian && trivial).then(|| {
        let mut r = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                r.insert(([a, b, m[a][b]], [0; 2]), ONE);
            }
        }
        r
    });
    let dual = (0..n).map(|a| group.inverse_of(a)).collect();
    SkeletalCategory::new(group.names.clone(), dual, vec![ONE; n], &fusion, f, r, None)
}

/// Every admissible F-entry not listed in `special` is 1.
fn fill_f(n: usize, fusion: &[[usize; 4]], special: &[([usize; 6], C64)]) -> BTreeMap<FKey, C64> {
    let mut nm = vec![false; n * n * n];
    for e in fusion {
        nm[(e[0] * n + e[1]) * n + e[2]] = e[3] > 0;
    }
    let adm = |i: usize, j: usize, k: usize| nm[(i * n + j) * n + k];
    let mut f = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            for cc in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        for g in 0..n {
                            if adm(a, b, e) && adm(e, cc, d) && adm(b, cc, g) && adm(a, g, d) {
                                f.insert(([a, b, cc, d, e, g], [0; 4]), ONE);
                            }
                        }
                    }
                }
            }
        }
    }
    for (k, v) in special {
        f.insert((*k, [0; 4]), *v);
    }
    f
}

fn braid_table(entries: &[([usize; 3], C64)]) -> BTreeMap<RKey, C64> {
    entries.iter().map(|(k, v)| ((*k, [0; 2]), *v)).collect()
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

pub fn fibonacci() -> SkeletalCategory {
    let phi = golden_ratio();
    let fusion = vec![[0, 0, 0, 1], [0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 1]];
    let a = 1.0 / phi;
    let b = 1.0 / phi.sqrt();
    let f = fill_f(
        2,
        &fusion,
        &[
            ([1, 1, 1, 1, 0, 0], c(a)),
            ([1, 1, 1, 1, 0, 1], c(b)),
            ([1, 1, 1, 1, 1, 0], c(b)),
            ([1, 1, 1, 1, 1, 1], c(-a)),
        ],
    );
    let pi = std::f64::consts::PI;
    let r = braid_table(&[
        ([0, 0, 0], ONE),
        ([0, 1, 1], ONE),
        ([1, 0, 1], ONE),
        ([1, 1, 0], C64::from_polar(1.0, -4.0 * pi / 5.0)),
        ([1, 1, 1], C64::from_polar(1.0, 3.0 * pi / 5.0)),
    ]);
    SkeletalCategory::new(
        vec!["1".into(), "tau".into()],
        vec![0, 1],
        vec![ONE, c(phi)],
        &fusion,
        f,
        Some(r),
        None,
    )
    .expect("fibonacci data is well formed")
}

pub fn ising() -> SkeletalCategory {
    let fusion = vec![
        [0, 0, 0, 1],
        [0, 1, 1, 1],
        [1, 0, 1, 1],
        [0, 2, 2, 1],
        [2, 0, 2, 1],
        [1, 1, 0, 1],
        [1, 1, 2, 1],
        [1, 2, 1, 1],
        [2, 1, 1, 1],
        [2, 2, 0, 1],
    ];
    let h = 1.0 / 2f64.sqrt();
    let f = fill_f(
        3,
        &fusion,
        &[
            ([1, 1, 1, 1, 0, 0], c(h)),
            ([1, 1, 1, 1, 0, 2], c(h)),
            ([1, 1, 1, 1, 2, 0], c(h)),
            ([1, 1, 1, 1, 2, 2], c(-h)),
            ([1, 2, 1, 2, 1, 1], c(-1.0)),
            ([2, 1, 2, 1, 1, 1], c(-1.0)),
        ],
    );
    let pi = std::f64::consts::PI;
    let r = braid_table(&[
        ([0, 0, 0], ONE),
        ([0, 1, 1], ONE),
        ([1, 0, 1], ONE),
        ([0, 2, 2], ONE),
        ([2, 0, 2], ONE),
        ([1, 1, 0], C64::from_polar(1.0, -pi / 8.0)),
        ([1, 1, 2], C64::from_polar(1.0, 3.0 * pi / 8.0)),
        ([1, 2, 1], C64::new(0.0, -1.0)),
        ([2, 1, 1], C64::new(0.0, -1.0)),
        ([2, 2, 0], c(-1.0)),
    ]);
    SkeletalCategory::new(
        vec!["1".into(), "sigma".into(), "psi".into()],
        vec![0, 1, 2],
        vec![ONE, c(2f64.sqrt()), ONE],
        &fusion,
        f,
        Some(r),
        None,
    )
    .expect("ising data is well formed")
}

/// Z2 x Z2 with bicharacter braiding R^{ab} = (-1)^{a_2 b_1}; twists 1, 1, 1, -1.
pub fn toric_code() -> SkeletalCategory {
    let g = GroupTable::klein(["1", "e", "m", "f"]);
    let mut cat = vec_g(&g, &trivial_cocycle(4)).expect("klein group is valid");
    let mut r = BTreeMap::new();
    for a in 0..4usize {
        for b in 0..4usize {
            let sign = if (a >> 1) & (b & 1) == 1 { -1.0 } else { 1.0 };
            r.insert(([a, b, g.mul[a][b]], [0; 2]), c(sign));
        }
    }
    cat.r = Some(r);
    cat.twist = Some((0..4).map(|x| cat.theta(x).expect("braided")).collect());
    cat
}

/// Modular data of a ribbon category, used for comparisons between pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModularDataFile", from = "ModularDataFile")]
pub struct ModularData {
    pub labels: Vec<String>,
    pub qdim: Vec<C64>,
    pub smatrix: CMat,
    pub tdiag: Vec<C64>,
    pub global_dim: C64,
}

/// JSON form: complex numbers as [re, im].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModularDataFile {
    pub labels: Vec<String>,
    pub qdim: Vec<[f64; 2]>,
    pub smatrix: Vec<Vec<[f64; 2]>>,
    pub tdiag: Vec<[f64; 2]>,
    pub global_dim: [f64; 2],
}

impl From<ModularData> for ModularDataFile {
    fn from(m: ModularData) -> Self {
        ModularDataFile {
            smatrix: (0..m.smatrix.nrows()).map(|i| (0..m.smatrix.ncols()).map(|j| pair(m.smatrix[(i, j)])).collect()).collect(),
            qdim: m.qdim.iter().map(|&z| pair(z)).collect(),
            tdiag: m.tdiag.iter().map(|&z| pair(z)).collect(),
            global_dim: pair(m.global_dim),
            labels: m.labels,
        }
    }
}

impl From<ModularDataFile> for ModularData {
    fn from(f: ModularDataFile) -> Self {
        let n = f.smatrix.len();
        let mut s = CMat::zeros(n, n);
        for (i, row) in f.smatrix.iter().enumerate() {
            for (j, z) in row.iter().enumerate().take(n) {
                s[(i, j)] = numeric::from_pair(*z);
            }
        }
        ModularData {
            labels: f.labels,
            qdim: f.qdim.into_iter().map(numeric::from_pair).collect(),
            smatrix: s,
            tdiag: f.tdiag.into_iter().map(numeric::from_pair).collect(),
            global_dim: numeric::from_pair(f.global_dim),
        }
    }
}

impl ModularData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Worst violation of: s symmetric, s_{1j} = |j|, global_dim = Σ|i|².
    pub fn invariant_residual(&self) -> f64 {
        let n = self.len();
        let mut w = MaxResidual::default();
        for i in 0..n {
            for j in 0..n {
                w.update((self.smatrix[(i, j)] - self.smatrix[(j, i)]).norm());
            }
            if n > 0 {
                w.update((self.smatrix[(0, i)] - self.qdim[i]).norm());
            }
        }
        let gd: C64 = self.qdim.iter().map(|&d| d * d).sum();
        w.update((gd - self.global_dim).norm());
        w.0
    }

    /// max over i ≠ unit of |Σ_k d_k s_{ik}|: the killing-ring criterion.
    pub fn killing_ring_residual(&self) -> f64 {
        let n = self.len();
        let mut w = MaxResidual::default();
        for i in 1..n {
            let s: C64 = (0..n).map(|k| self.qdim[k] * self.smatrix[(i, k)]).sum();
            w.update(s.norm());
        }
        w.0
    }

    pub fn from_category(cat: &SkeletalCategory) -> Option<ModularData> {
        let s = cat.smatrix()?;
        let n = cat.n();
        Some(ModularData {
            labels: cat.labels.clone(),
            qdim: cat.qdim.clone(),
            smatrix: s,
            tdiag: (0..n).map(|x| cat.theta(x).expect("braided")).collect(),
            global_dim: cat.global_dimension(),
        })
    }
}
