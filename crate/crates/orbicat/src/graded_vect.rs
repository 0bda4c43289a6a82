//! Bimodules over the diagonal algebra ⊕_{i∈I} k as I×I-graded vector spaces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numeric::{eye, kron, max_abs, zeros, CMat, C64};

pub type Grade = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GradedError {
    #[error("index sets differ ({0} vs {1})")]
    IndexMismatch(usize, usize),
    #[error("block at grade {grade:?} has shape {got:?}, expected {want:?}")]
    BlockShape { grade: Grade, got: (usize, usize), want: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradedBimodule {
    pub n: usize,
    dims: BTreeMap<Grade, usize>,
}

impl GradedBimodule {
    pub fn zero(n: usize) -> Self {
        GradedBimodule { n, dims: BTreeMap::new() }
    }

    pub fn from_dims(n: usize, dims: impl IntoIterator<Item = (Grade, usize)>) -> Self {
        let mut m = GradedBimodule::zero(n);
        for (g, d) in dims {
            m.set(g, d);
        }
        m
    }

    /// E_{ij}: one-dimensional at grade (i,j).
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        GradedBimodule::from_dims(n, [((i, j), 1)])
    }

    /// The algebra itself, one-dimensional on the diagonal.
    pub fn unit(n: usize) -> Self {
        GradedBimodule::from_dims(n, (0..n).map(|i| ((i, i), 1)))
    }

    pub fn set(&mut self, g: Grade, d: usize) {
        assert!(g.0 < self.n && g.1 < self.n, "grade {g:?} outside index set of size {}", self.n);
        if d == 0 {
            self.dims.remove(&g);
        } else {
            self.dims.insert(g, d);
        }
    }

    pub fn dim(&self, x: usize, y: usize) -> usize {
        self.dims.get(&(x, y)).copied().unwrap_or(0)
    }

    /// Nonzero grades in lexicographic order.
    pub fn grades(&self) -> impl Iterator<Item = (Grade, usize)> + '_ {
        self.dims.iter().map(|(g, d)| (*g, *d))
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }
}

/// I³-graded space; grade (l; i, j).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedTrimodule {
    pub n: usize,
    dims: BTreeMap<(usize, usize, usize), usize>,
}

impl GradedTrimodule {
    pub fn zero(n: usize) -> Self {
        GradedTrimodule { n, dims: BTreeMap::new() }
    }

    pub fn set(&mut self, l: usize, i: usize, j: usize, d: usize) {
        if d == 0 {
            self.dims.remove(&(l, i, j));
        } else {
            self.dims.insert((l, i, j), d);
        }
    }

    pub fn dim(&self, l: usize, i: usize, j: usize) -> usize {
        self.dims.get(&(l, i, j)).copied().unwrap_or(0)
    }

    pub fn grades(&self) -> impl Iterator<Item = ((usize, usize, usize), usize)> + '_ {
        self.dims.iter().map(|(g, d)| (*g, *d))
    }

    pub fn total_dim(&self) -> usize {
        self.dims.values().sum()
    }
}

fn same_index(a: usize, b: usize) -> Result<(), GradedError> {
    if a == b {
        Ok(())
    } else {
        Err(GradedError::IndexMismatch(a, b))
    }
}

/// (M⊗_A N)_{ik} = ⊕_j M_{ij}⊗N_{jk}.
pub fn tensor_over_a(m: &GradedBimodule, n: &GradedBimodule) -> Result<GradedBimodule, GradedError> {
    Ok(TensorLayout::new(m, n)?.product)
}

/// Where each summand M_{xa}⊗N_{ay} sits inside (M⊗N)_{xy}; summands ordered by a.
#[derive(Debug, Clone)]
pub struct TensorLayout {
    pub product: GradedBimodule,
    pub blocks: BTreeMap<Grade, Vec<TensorBlock>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorBlock {
    pub mid: usize,
    pub offset: usize,
    pub left: usize,
    pub right: usize,
}

impl TensorBlock {
    pub fn size(&self) -> usize {
        self.left * self.right
    }
}

impl TensorLayout {
    pub fn new(m: &GradedBimodule, n: &GradedBimodule) -> Result<Self, GradedError> {
        same_index(m.n, n.n)?;
        let k = m.n;
        let mut product = GradedBimodule::zero(k);
        let mut blocks = BTreeMap::new();
        for x in 0..k {
            for y in 0..k {
                let mut off = 0;
                let mut v = Vec::new();
                for a in 0..k {
                    let (l, r) = (m.dim(x, a), n.dim(a, y));
                    if l * r > 0 {
                        v.push(TensorBlock { mid: a, offset: off, left: l, right: r });
                        off += l * r;
                    }
                }
                if off > 0 {
                    product.set((x, y), off);
                    blocks.insert((x, y), v);
                }
            }
        }
        Ok(TensorLayout { product, blocks })
    }

    pub fn block(&self, g: Grade, mid: usize) -> Option<TensorBlock> {
        self.blocks.get(&g)?.iter().find(|b| b.mid == mid).copied()
    }
}

/// (M⊗₀T)_{l;i,j} = ⊕_a M_{la}⊗T_{a;i,j}; (T⊗₁M)_{l;i,j} = ⊕_b T_{l;b,j}⊗M_{bi};
/// (T⊗₂M)_{l;i,j} = ⊕_a T_{l;i,a}⊗M_{aj}.
pub fn partial_tensor(t: &GradedTrimodule, m: &GradedBimodule, leg: usize) -> Result<GradedTrimodule, GradedError> {
    same_index(t.n, m.n)?;
    let k = t.n;
    let mut out = GradedTrimodule::zero(k);
    for l in 0..k {
        for i in 0..k {
            for j in 0..k {
                let d: usize = (0..k)
                    .map(|a| match leg {
                        0 => m.dim(l, a) * t.dim(a, i, j),
                        1 => t.dim(l, a, j) * m.dim(a, i),
                        _ => t.dim(l, i, a) * m.dim(a, j),
                    })
                    .sum();
                out.set(l, i, j, d);
            }
        }
    }
    Ok(out)
}

pub fn dual_bimodule(m: &GradedBimodule) -> GradedBimodule {
    GradedBimodule::from_dims(m.n, m.grades().map(|((x, y), d)| ((y, x), d)))
}

/// Vector-space pairing M*_{yx}⊗M_{xy} → k as a row vector (kron order dual-major).
pub fn pairing_row(d: usize) -> CMat {
    let mut r = zeros(1, d * d);
    for mu in 0..d {
        r[(0, mu * d + mu)] = C64::new(1.0, 0.0);
    }
    r
}

/// Copairing k → M_{xy}⊗M*_{yx} as a column vector.
pub fn copairing_col(d: usize) -> CMat {
    pairing_row(d).transpose()
}

/// Grade-preserving linear map; blocks absent from the map are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMap {
    pub src: GradedBimodule,
    pub tgt: GradedBimodule,
    pub blocks: BTreeMap<Grade, CMat>,
}

impl GradedMap {
    pub fn zero(src: &GradedBimodule, tgt: &GradedBimodule) -> Self {
        GradedMap { src: src.clone(), tgt: tgt.clone(), blocks: BTreeMap::new() }
    }

    pub fn identity(m: &GradedBimodule) -> Self {
        let blocks = m.grades().map(|(g, d)| (g, eye(d))).collect();
        GradedMap { src: m.clone(), tgt: m.clone(), blocks }
    }

    pub fn from_blocks(
        src: &GradedBimodule,
        tgt: &GradedBimodule,
        blocks: BTreeMap<Grade, CMat>,
    ) -> Result<Self, GradedError> {
        for (g, b) in &blocks {
            let want = (tgt.dim(g.0, g.1), src.dim(g.0, g.1));
            if b.shape() != want {
                return Err(GradedError::BlockShape { grade: *g, got: b.shape(), want });
            }
        }
        let blocks = blocks.into_iter().filter(|(_, b)| b.nrows() * b.ncols() > 0).collect();
        Ok(GradedMap { src: src.clone(), tgt: tgt.clone(), blocks })
    }

    /// Block at grade g, materialized as zero if absent.
    pub fn block(&self, g: Grade) -> CMat {
        self.blocks
            .get(&g)
            .cloned()
            .unwrap_or_else(|| zeros(self.tgt.dim(g.0, g.1), self.src.dim(g.0, g.1)))
    }

    /// Grades carrying variables (both sides nonzero), in order.
    pub fn shared_grades(src: &GradedBimodule, tgt: &GradedBimodule) -> Vec<Grade> {
        src.grades().map(|(g, _)| g).filter(|g| tgt.dim(g.0, g.1) > 0).collect()
    }

    pub fn compose(&self, first: &GradedMap) -> GradedMap {
        let mut blocks = BTreeMap::new();
        for (g, b) in &self.blocks {
            if let Some(a) = first.blocks.get(g) {
                blocks.insert(*g, b * a);
            }
        }
        GradedMap { src: first.src.clone(), tgt: self.tgt.clone(), blocks }
    }

    pub fn scale(&self, z: C64) -> GradedMap {
        let blocks = self.blocks.iter().map(|(g, b)| (*g, b * z)).collect();
        GradedMap { src: self.src.clone(), tgt: self.tgt.clone(), blocks }
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        let mut out = self.clone();
        for (g, b) in &other.blocks {
            match out.blocks.get_mut(g) {
                Some(x) => *x += b,
                None => {
                    out.blocks.insert(*g, b.clone());
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &GradedMap) -> f64 {
        let mut keys: Vec<Grade> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|g| max_abs(&(self.block(g) - other.block(g))))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(max_abs).fold(0.0, f64::max)
    }

    /// Concatenate shared-grade blocks (row-major) into one vector.
    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = Vec::new();
        for g in GradedMap::shared_grades(&self.src, &self.tgt) {
            let b = self.block(g);
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    v.push(b[(r, c)]);
                }
            }
        }
        v
    }

    pub fn from_vec(src: &GradedBimodule, tgt: &GradedBimodule, v: &[C64]) -> GradedMap {
        let mut blocks = BTreeMap::new();
        let mut off = 0;
        for g in GradedMap::shared_grades(src, tgt) {
            let (r, c) = (tgt.dim(g.0, g.1), src.dim(g.0, g.1));
            blocks.insert(g, CMat::from_row_slice(r, c, &v[off..off + r * c]));
            off += r * c;
        }
        GradedMap { src: src.clone(), tgt: tgt.clone(), blocks }
    }

    pub fn var_count(src: &GradedBimodule, tgt: &GradedBimodule) -> usize {
        GradedMap::shared_grades(src, tgt)
            .iter()
            .map(|g| src.dim(g.0, g.1) * tgt.dim(g.0, g.1))
            .sum()
    }

    /// Block-diagonal matrix of an endomorphism over all grades of the source.
    pub fn to_dense(&self) -> CMat {
        let tot_r = self.tgt.total_dim();
        let tot_c = self.src.total_dim();
        let mut m = zeros(tot_r, tot_c);
        let ro = offsets(&self.tgt);
        let co = offsets(&self.src);
        for (g, b) in &self.blocks {
            m.view_mut((ro[g], co[g]), b.shape()).copy_from(b);
        }
        m
    }

    pub fn from_dense(src: &GradedBimodule, tgt: &GradedBimodule, m: &CMat) -> GradedMap {
        let ro = offsets(tgt);
        let co = offsets(src);
        let mut blocks = BTreeMap::new();
        for g in GradedMap::shared_grades(src, tgt) {
            let (r, c) = (tgt.dim(g.0, g.1), src.dim(g.0, g.1));
            blocks.insert(g, m.view((ro[&g], co[&g]), (r, c)).into_owned());
        }
        GradedMap { src: src.clone(), tgt: tgt.clone(), blocks }
    }
}

/// Offset of each grade in the concatenation of all grades.
pub fn offsets(m: &GradedBimodule) -> BTreeMap<Grade, usize> {
    let mut off = 0;
    let mut out = BTreeMap::new();
    for (g, d) in m.grades() {
        out.insert(g, off);
        off += d;
    }
    out
}

/// f⊗g : X⊗Y → X'⊗Y', blockwise Kronecker products.
pub fn tensor_maps(f: &GradedMap, g: &GradedMap) -> Result<GradedMap, GradedError> {
    let ls = TensorLayout::new(&f.src, &g.src)?;
    let lt = TensorLayout::new(&f.tgt, &g.tgt)?;
    let mut blocks = BTreeMap::new();
    for (grade, sb) in &ls.blocks {
        let Some(tb) = lt.blocks.get(grade) else { continue };
        let mut m = zeros(lt.product.dim(grade.0, grade.1), ls.product.dim(grade.0, grade.1));
        for s in sb {
            let Some(t) = tb.iter().find(|t| t.mid == s.mid) else { continue };
            let (x, y) = *grade;
            let (Some(fb), Some(gb)) = (f.blocks.get(&(x, s.mid)), g.blocks.get(&(s.mid, y))) else {
                continue;
            };
            m.view_mut((t.offset, s.offset), (t.size(), s.size())).copy_from(&kron(fb, gb));
        }
        blocks.insert(*grade, m);
    }
    Ok(GradedMap { src: ls.product, tgt: lt.product, blocks })
}

/// Canonical regrouping (X⊗Y)⊗Z → X⊗(Y⊗Z).
pub fn associator(x: &GradedBimodule, y: &GradedBimodule, z: &GradedBimodule) -> Result<GradedMap, GradedError> {
    let lxy = TensorLayout::new(x, y)?;
    let l_left = TensorLayout::new(&lxy.product, z)?;
    let lyz = TensorLayout::new(y, z)?;
    let l_right = TensorLayout::new(x, &lyz.product)?;
    let mut blocks = BTreeMap::new();
    for (grade, outer) in &l_left.blocks {
        let (p, q) = *grade;
        let mut m = zeros(l_right.product.dim(p, q), l_left.product.dim(p, q));
        for ob in outer {
            let b = ob.mid;
            for ib in lxy.blocks.get(&(p, b)).into_iter().flatten() {
                let a = ib.mid;
                let (dx, dy, dz) = (x.dim(p, a), y.dim(a, b), z.dim(b, q));
                let rb = l_right.block((p, q), a).expect("summand present on both sides");
                let yb = lyz.block((a, q), b).expect("summand present on both sides");
                for u in 0..dx {
                    for v in 0..dy {
                        for w in 0..dz {
                            let src = ob.offset + (ib.offset + u * dy + v) * dz + w;
                            let tgt = rb.offset + u * (lyz.product.dim(a, q)) + yb.offset + v * dz + w;
                            m[(tgt, src)] = C64::new(1.0, 0.0);
                        }
                    }
                }
            }
        }
        blocks.insert(*grade, m);
    }
    Ok(GradedMap { src: l_left.product, tgt: l_right.product, blocks })
}
