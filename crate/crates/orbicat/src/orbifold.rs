//! Orbifold data in Vect over the diagonal algebra, built from spherical categories and verified.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fusion_data::SkeletalCategory;
use crate::graded_vect::GradedTrimodule;
use crate::numeric::{from_pair, pair, principal_sqrt, Tolerance, C64, ONE, ZERO};
use crate::report::{ConditionReport, MaxResidual};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbifoldError {
    #[error("malformed datum: {0}")]
    MalformedDatum(String),
    #[error("non-spherical input: {0}")]
    NonsphericalInput(String),
}

/// (A, T, α, ᾱ, ψ, φ) with T of dimension at most one per grade.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbifoldDatum {
    pub labels: Vec<String>,
    pub t: GradedTrimodule,
    adm: Vec<bool>,
    alpha: Vec<C64>,
    alpha_bar: Vec<C64>,
    pub psi: Vec<C64>,
    pub phi: C64,
}

impl OrbifoldDatum {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    fn i3(&self, l: usize, i: usize, j: usize) -> usize {
        let n = self.n();
        (l * n + i) * n + j
    }

    #[inline]
    fn i6(&self, x: [usize; 6]) -> usize {
        let n = self.n();
        x.iter().fold(0, |acc, &v| acc * n + v)
    }

    /// T_{l;i,j} ≠ 0
    #[inline]
    pub fn t_adm(&self, l: usize, i: usize, j: usize) -> bool {
        self.adm[self.i3(l, i, j)]
    }

    /// α(l,i,j,k)[b←a]: T_{l;i,a}T_{a;j,k} → T_{l;b,k}T_{b;i,j}.
    #[inline]
    pub fn alpha(&self, l: usize, i: usize, j: usize, k: usize, b: usize, a: usize) -> C64 {
        self.alpha[self.i6([l, i, j, k, b, a])]
    }

    /// ᾱ(l,i,j,k)[a←b], the reverse direction.
    #[inline]
    pub fn alpha_bar(&self, l: usize, i: usize, j: usize, k: usize, a: usize, b: usize) -> C64 {
        self.alpha_bar[self.i6([l, i, j, k, a, b])]
    }

    /// ω insertion ψ(x)².
    #[inline]
    pub fn w(&self, x: usize) -> C64 {
        self.psi[x] * self.psi[x]
    }

    fn legs_ok(&self, l: usize, i: usize, j: usize, k: usize, a: usize, b: usize) -> bool {
        self.t_adm(l, i, a) && self.t_adm(a, j, k) && self.t_adm(l, b, k) && self.t_adm(b, i, j)
    }

    pub fn new(
        labels: Vec<String>,
        t: GradedTrimodule,
        alpha: Vec<C64>,
        alpha_bar: Vec<C64>,
        psi: Vec<C64>,
        phi: C64,
    ) -> Result<Self, OrbifoldError> {
        let n = labels.len();
        let bad = |m: String| Err(OrbifoldError::MalformedDatum(m));
        if t.n != n || psi.len() != n {
            return bad("index set sizes disagree".into());
        }
        if alpha.len() != n.pow(6) || alpha_bar.len() != n.pow(6) {
            return bad("alpha tables have wrong size".into());
        }
        let mut adm = vec![false; n * n * n];
        for ((l, i, j), d) in t.grades() {
            if d > 1 {
                return bad(format!("T_{{{l};{i},{j}}} has dimension {d}; only dimensions 0 and 1 are supported"));
            }
            adm[(l * n + i) * n + j] = true;
        }
        if psi.iter().any(|z| z.norm() == 0.0) || phi.norm() == 0.0 {
            return bad("psi and phi must be invertible".into());
        }
        let d = OrbifoldDatum { labels, t, adm, alpha, alpha_bar, psi, phi };
        for x in 0..n.pow(6) {
            let mut idx = [0usize; 6];
            let mut r = x;
            for s in (0..6).rev() {
                idx[s] = r % n;
                r /= n;
            }
            let [l, i, j, k, p, q] = idx;
            if d.alpha[x] != ZERO && !d.legs_ok(l, i, j, k, q, p) {
                return bad(format!("alpha entry {idx:?} outside the grading of T"));
            }
            if d.alpha_bar[x] != ZERO && !d.legs_ok(l, i, j, k, p, q) {
                return bad(format!("alpha_bar entry {idx:?} outside the grading of T"));
            }
        }
        Ok(d)
    }

    pub fn with_phi(&self, phi: C64) -> Self {
        OrbifoldDatum { phi, ..self.clone() }
    }

    pub fn with_psi(&self, x: usize, value: C64) -> Self {
        let mut d = self.clone();
        d.psi[x] = value;
        d
    }

    pub fn with_alpha_shift(&self, idx: [usize; 6], delta: C64) -> Self {
        let mut d = self.clone();
        let k = d.i6(idx);
        d.alpha[k] += delta;
        d
    }

    pub fn to_file(&self) -> DatumFile {
        let n = self.n();
        let mut alpha = Vec::new();
        let mut alpha_bar = Vec::new();
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let src: Vec<usize> =
                            (0..n).filter(|&a| self.t_adm(l, i, a) && self.t_adm(a, j, k)).collect();
                        let tgt: Vec<usize> =
                            (0..n).filter(|&b| self.t_adm(l, b, k) && self.t_adm(b, i, j)).collect();
                        if src.is_empty() || tgt.is_empty() {
                            continue;
                        }
                        let m = tgt
                            .iter()
                            .map(|&b| src.iter().map(|&a| pair(self.alpha(l, i, j, k, b, a))).collect())
                            .collect();
                        let mb = src
                            .iter()
                            .map(|&a| tgt.iter().map(|&b| pair(self.alpha_bar(l, i, j, k, a, b))).collect())
                            .collect();
                        alpha.push(AlphaBlock { key: [l, i, j, k], rows: tgt.clone(), cols: src.clone(), m });
                        alpha_bar.push(AlphaBlock { key: [l, i, j, k], rows: src, cols: tgt, m: mb });
                    }
                }
            }
        }
        DatumFile {
            labels: self.labels.clone(),
            t: self.t.grades().map(|((l, i, j), d)| [l, i, j, d]).collect(),
            alpha,
            alpha_bar,
            psi: self.psi.iter().map(|&z| pair(z)).collect(),
            phi: pair(self.phi),
        }
    }

    pub fn from_file(f: &DatumFile) -> Result<Self, OrbifoldError> {
        let n = f.labels.len();
        let mut t = GradedTrimodule::zero(n);
        for e in &f.t {
            if e[..3].iter().any(|&x| x >= n) {
                return Err(OrbifoldError::MalformedDatum(format!("T entry {e:?} out of range")));
            }
            t.set(e[0], e[1], e[2], e[3]);
        }
        let mut alpha = vec![ZERO; n.pow(6)];
        let mut alpha_bar = vec![ZERO; n.pow(6)];
        let idx6 = |x: [usize; 6]| x.iter().fold(0, |acc, &v| acc * n + v);
        for (blocks, table) in [(&f.alpha, &mut alpha), (&f.alpha_bar, &mut alpha_bar)] {
            for bl in blocks {
                let oob = bl.key.iter().chain(&bl.rows).chain(&bl.cols).any(|&x| x >= n);
                if oob || bl.m.len() != bl.rows.len() || bl.m.iter().any(|r| r.len() != bl.cols.len()) {
                    return Err(OrbifoldError::MalformedDatum(format!("block {:?} malformed", bl.key)));
                }
                let [l, i, j, k] = bl.key;
                for (r, &row) in bl.rows.iter().enumerate() {
                    for (c, &col) in bl.cols.iter().enumerate() {
                        table[idx6([l, i, j, k, row, col])] = from_pair(bl.m[r][c]);
                    }
                }
            }
        }
        OrbifoldDatum::new(
            f.labels.clone(),
            t,
            alpha,
            alpha_bar,
            f.psi.iter().map(|&p| from_pair(p)).collect(),
            from_pair(f.phi),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("datum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let f: DatumFile = serde_json::from_str(text)?;
        Ok(OrbifoldDatum::from_file(&f)?)
    }
}

/// A dense block of α or ᾱ over the listed row and column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaBlock {
    pub key: [usize; 4],
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub m: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumFile {
    pub labels: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<[usize; 4]>,
    pub alpha: Vec<AlphaBlock>,
    pub alpha_bar: Vec<AlphaBlock>,
    pub psi: Vec<[f64; 2]>,
    pub phi: [f64; 2],
}

/// The datum A^S: T = ⊕ S(l, ij), α from inverse F-moves with |b|⁻¹, ψ = |i|^{1/2}, φ = 1/Dim S.
pub fn build_from_spherical(cat: &SkeletalCategory) -> Result<OrbifoldDatum, crate::Error> {
    cat.require_multiplicity_free()?;
    let n = cat.n();
    let tol = Tolerance::uniform(1e-8);
    if !tol.close(cat.qdim[0], ONE) {
        return Err(OrbifoldError::NonsphericalInput("qdim of the unit is not 1".into()).into());
    }
    for i in 0..n {
        if cat.qdim[i].norm() == 0.0 || !tol.close(cat.qdim[i], cat.qdim[cat.dual[i]]) {
            return Err(OrbifoldError::NonsphericalInput(format!("qdim of label {i} is inconsistent")).into());
        }
        for j in 0..n {
            let s: C64 = (0..n).map(|k| cat.qdim[k] * cat.nmult(i, j, k) as f64).sum();
            if !tol.close(cat.qdim[i] * cat.qdim[j], s) {
                return Err(OrbifoldError::NonsphericalInput(format!(
                    "qdim violates the fusion rule for ({i},{j})"
                ))
                .into());
            }
        }
    }
    let mut t = GradedTrimodule::zero(n);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                t.set(l, i, j, cat.nmult(i, j, l) as usize);
            }
        }
    }
    let mut alpha = vec![ZERO; n.pow(6)];
    let mut alpha_bar = vec![ZERO; n.pow(6)];
    let idx6 = |x: [usize; 6]| x.iter().fold(0, |acc, &v| acc * n + v);
    let adm = |l: usize, i: usize, j: usize| cat.adm(i, j, l);
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for a in 0..n {
                        for b in 0..n {
                            if adm(l, i, a) && adm(a, j, k) && adm(l, b, k) && adm(b, i, j) {
                                alpha[idx6([l, i, j, k, b, a])] = cat.finv(i, j, k, l, a, b) / cat.qdim[b];
                                alpha_bar[idx6([l, i, j, k, a, b])] = cat.fsym(i, j, k, l, b, a) / cat.qdim[a];
                            }
                        }
                    }
                }
            }
        }
    }
    let psi = cat.qdim.iter().map(|&d| principal_sqrt(d)).collect();
    let phi = ONE / cat.global_dimension();
    Ok(OrbifoldDatum::new(cat.labels.clone(), t, alpha, alpha_bar, psi, phi)?)
}

/// tr ψ⁴ on the diagonal algebra.
pub fn trace_psi4(d: &OrbifoldDatum) -> C64 {
    d.psi.iter().map(|&p| p * p * p * p).sum()
}

/// Block-diagonal union of two data with equal φ.
pub fn direct_sum(x: &OrbifoldDatum, y: &OrbifoldDatum) -> Result<OrbifoldDatum, OrbifoldError> {
    if (x.phi - y.phi).norm() > 1e-12 {
        return Err(OrbifoldError::MalformedDatum("direct sum needs equal phi".into()));
    }
    let (n1, n2) = (x.n(), y.n());
    let n = n1 + n2;
    let mut labels: Vec<String> = x.labels.iter().map(|s| format!("{s}.0")).collect();
    labels.extend(y.labels.iter().map(|s| format!("{s}.1")));
    let mut t = GradedTrimodule::zero(n);
    for ((l, i, j), d) in x.t.grades() {
        t.set(l, i, j, d);
    }
    for ((l, i, j), d) in y.t.grades() {
        t.set(l + n1, i + n1, j + n1, d);
    }
    let mut alpha = vec![ZERO; n.pow(6)];
    let mut alpha_bar = vec![ZERO; n.pow(6)];
    let idx6 = |v: [usize; 6]| v.iter().fold(0, |acc, &s| acc * n + s);
    for (src, off) in [(x, 0usize), (y, n1)] {
        let m = src.n();
        for k in 0..m.pow(6) {
            let mut v = [0usize; 6];
            let mut r = k;
            for s in (0..6).rev() {
                v[s] = r % m + off;
                r /= m;
            }
            alpha[idx6(v)] = src.alpha[k];
            alpha_bar[idx6(v)] = src.alpha_bar[k];
        }
    }
    let mut psi = x.psi.clone();
    psi.extend(&y.psi);
    OrbifoldDatum::new(labels, t, alpha, alpha_bar, psi, x.phi)
}

fn max_over<F>(outer: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = (0..outer).into_par_iter().map(f).collect();
    let mut m = MaxResidual::default();
    for p in parts {
        m.update(p);
    }
    m.0
}

fn for_tuples(n: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut v = vec![0usize; len];
    loop {
        f(&v);
        let mut p = len;
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            v[p] += 1;
            if v[p] < n {
                break;
            }
            v[p] = 0;
        }
    }
}

/// O1 (α-pentagon).
pub fn o1_residual(d: &OrbifoldDatum) -> f64 {
    let n = d.n();
    max_over(n, |l| {
        let mut m = MaxResidual::default();
        for_tuples(n, 8, |v| {
            let [i, j, k, mm, a, b, c, dd] = [v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]];
            let lhs = d.alpha(l, c, k, mm, dd, b) * d.alpha(l, i, j, b, c, a);
            let rhs: C64 = (0..n)
                .map(|e| d.alpha(dd, i, j, k, c, e) * d.alpha(l, i, e, mm, dd, a) * d.w(e) * d.alpha(a, j, k, mm, e, b))
                .sum();
            m.update((lhs - rhs).norm());
        });
        m.0
    })
}

/// ᾱ-pentagon, the mirror of O1.
pub fn o9_residual(d: &OrbifoldDatum) -> f64 {
    let n = d.n();
    max_over(n, |l| {
        let mut m = MaxResidual::default();
        for_tuples(n, 8, |v| {
            let [i, j, k, mm, a, b, c, dd] = [v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]];
            let lhs = d.alpha_bar(l, i, j, b, a, c) * d.alpha_bar(l, c, k, mm, b, dd);
            let rhs: C64 = (0..n)
                .map(|e| {
                    d.alpha_bar(a, j, k, mm, b, e)
                        * d.alpha_bar(l, i, e, mm, a, dd)
                        * d.w(e)
                        * d.alpha_bar(dd, i, j, k, e, c)
                })
                .sum();
            m.update((lhs - rhs).norm());
        });
        m.0
    })
}

/// α ω ᾱ ω α = α.
pub fn o10_residual(d: &OrbifoldDatum) -> f64 {
    let n = d.n();
    max_over(n, |l| {
        let mut m = MaxResidual::default();
        for_tuples(n, 5, |v| {
            let [i, j, k, a, b] = [v[0], v[1], v[2], v[3], v[4]];
            let mut s = ZERO;
            for a2 in 0..n {
                for b2 in 0..n {
                    s += d.alpha(l, i, j, k, b, a2)
                        * d.w(a2)
                        * d.alpha_bar(l, i, j, k, a2, b2)
                        * d.w(b2)
                        * d.alpha(l, i, j, k, b2, a);
                }
            }
            m.update((s - d.alpha(l, i, j, k, b, a)).norm());
        });
        m.0
    })
}

/// Position of each label (l,i,j,k,a,b) in a lune: the loop label and the duplicated label.
#[derive(Debug, Clone, Copy)]
struct Lune {
    name: &'static str,
    x: usize,
    y: usize,
}

const LUNES: [Lune; 6] = [
    Lune { name: "O2", x: 4, y: 5 },
    Lune { name: "O3", x: 5, y: 4 },
    Lune { name: "O4", x: 2, y: 0 },
    Lune { name: "O5", x: 0, y: 2 },
    Lune { name: "O6", x: 1, y: 3 },
    Lune { name: "O7", x: 3, y: 1 },
];

/// Legs of the α vertex as label positions in (l,i,j,k,a,b).
const LEGS: [[usize; 3]; 4] = [[0, 1, 4], [4, 2, 3], [0, 5, 3], [5, 1, 2]];

/// Σ_x ω(x) α(L[y=y1]) ᾱ(L[y=y2]) ω(y1) = δ_{y1y2}·[open legs admissible].
fn lune_residual(d: &OrbifoldDatum, lune: Lune) -> f64 {
    let n = d.n();
    let free: Vec<usize> = (0..6).filter(|&p| p != lune.x && p != lune.y).collect();
    max_over(n, |first| {
        let mut m = MaxResidual::default();
        for_tuples(n, 5, |v| {
            // the first free label is fixed per task
            let (rest, y1, y2) = ([first, v[0], v[1], v[2]], v[3], v[4]);
            let mut lab = [0usize; 6];
            for (p, &f) in free.iter().zip(rest.iter()) {
                lab[*p] = f;
            }
            let mut s = ZERO;
            for x in 0..n {
                lab[lune.x] = x;
                lab[lune.y] = y1;
                let a1 = d.alpha(lab[0], lab[1], lab[2], lab[3], lab[5], lab[4]);
                lab[lune.y] = y2;
                let a2 = d.alpha_bar(lab[0], lab[1], lab[2], lab[3], lab[4], lab[5]);
                s += d.w(x) * a1 * a2;
            }
            s *= d.w(y1);
            lab[lune.y] = y1;
            let open_ok = LEGS
                .iter()
                .filter(|leg| !leg.contains(&lune.x))
                .all(|leg| d.t_adm(lab[leg[0]], lab[leg[1]], lab[leg[2]]));
            let want = if y1 == y2 && open_ok { ONE } else { ZERO };
            m.update((s - want).norm());
        });
        m.0
    })
}

/// For each leg and grade g: Σ_{T-grades with that leg = g} Π ω(other legs) = φ⁻¹ ω(g).
pub fn o8_residual(d: &OrbifoldDatum) -> f64 {
    let n = d.n();
    let mut m = MaxResidual::default();
    for leg in 0..3 {
        for g in 0..n {
            let mut s = ZERO;
            for p in 0..n {
                for q in 0..n {
                    let (l, i, j) = match leg {
                        0 => (g, p, q),
                        1 => (p, g, q),
                        _ => (p, q, g),
                    };
                    if d.t_adm(l, i, j) {
                        s += d.w(p) * d.w(q);
                    }
                }
            }
            m.update((s - d.w(g) / d.phi).norm());
        }
    }
    m.0
}

/// O1–O8 plus the derived O9′/O10′.
pub fn verify_orbifold(d: &OrbifoldDatum, tol: &Tolerance) -> ConditionReport {
    let mut rep = ConditionReport::new(tol);
    rep.record("O1", o1_residual(d));
    for lune in LUNES {
        rep.record(lune.name, lune_residual(d, lune));
    }
    rep.record("O8", o8_residual(d));
    rep.record("O9'", o9_residual(d));
    rep.record("O10'", o10_residual(d));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion_data::builtin_by_name;

    #[test]
    fn vec_z2_datum_values() {
        let d = build_from_spherical(&builtin_by_name("vec_z2").unwrap()).unwrap();
        assert_eq!(d.t.total_dim(), 4);
        assert!((d.phi - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(d.psi.iter().all(|p| (p - ONE).norm() < 1e-15));
    }

    #[test]
    fn json_round_trip_preserves_datum() {
        let d = build_from_spherical(&builtin_by_name("fibonacci").unwrap()).unwrap();
        let back = OrbifoldDatum::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn doubling_phi_only_breaks_o8() {
        let d = build_from_spherical(&builtin_by_name("vec_z2").unwrap()).unwrap();
        let r = verify_orbifold(&d.with_phi(d.phi * 2.0), &Tolerance::uniform(1e-8));
        assert_eq!(r.pass_of("O8"), Some(false));
        for k in ["O1", "O2", "O3", "O4", "O5", "O6", "O7"] {
            assert_eq!(r.pass_of(k), Some(true), "{k}");
        }
    }
}
