//! Tensor product, duals, braiding and traces in C_A.

use std::collections::BTreeMap;

use crate::graded_vect::{
    associator, copairing_col, dual_bimodule, pairing_row, tensor_maps, GradedBimodule, GradedMap, TensorLayout,
};
use crate::numeric::{eye, inverse, kron, zeros, CMat, C64};
use crate::orbifold::{trace_psi4, OrbifoldDatum};

use super::{complete_bars, hom_dim, require_grading, WilsonError, WilsonObject};

fn layout(x: &GradedBimodule, y: &GradedBimodule) -> Result<TensorLayout, WilsonError> {
    TensorLayout::new(x, y).map_err(|_| WilsonError::GradeMismatch { expected: x.n, got: y.n })
}

fn tmaps(f: &GradedMap, g: &GradedMap) -> GradedMap {
    tensor_maps(f, g).expect("index sets already checked")
}

/// X ⊗_A Y with crossings ψ(a)ψ(d)·τ^X ⊗ τ^Y over the middle labels.
pub fn tensor(x: &WilsonObject, y: &WilsonObject, d: &OrbifoldDatum) -> Result<WilsonObject, WilsonError> {
    require_grading(x, d)?;
    require_grading(y, d)?;
    let lay = layout(&x.m, &y.m)?;
    let n = d.n();
    let mut z = WilsonObject::empty(lay.product.clone());
    for l in 0..n {
        for c in 0..n {
            let Some(src) = lay.blocks.get(&(l, c)) else { continue };
            for i in 0..n {
                for j in 0..n {
                    if !d.t_adm(c, i, j) {
                        continue;
                    }
                    for b in 0..n {
                        if d.t_adm(l, b, j) {
                            if let Some(tgt) = lay.blocks.get(&(b, i)) {
                                let mut m = zeros(lay.product.dim(b, i), lay.product.dim(l, c));
                                for sa in src {
                                    for td in tgt {
                                        let (a, dd) = (sa.mid, td.mid);
                                        let (Some(p), Some(q)) = (x.t1(l, dd, j, b, a), y.t1(a, i, j, dd, c)) else { continue };
                                        let k = kron(p, q) * (d.psi[a] * d.psi[dd]);
                                        let mut v = m.view_mut((td.offset, sa.offset), k.shape());
                                        v += &k;
                                    }
                                }
                                z.tau1.insert([l, i, j, b, c], m);
                            }
                        }
                        if d.t_adm(l, i, b) {
                            if let Some(tgt) = lay.blocks.get(&(b, j)) {
                                let mut m = zeros(lay.product.dim(b, j), lay.product.dim(l, c));
                                for sa in src {
                                    for td in tgt {
                                        let (a, dd) = (sa.mid, td.mid);
                                        let (Some(p), Some(q)) = (x.t2(l, i, dd, b, a), y.t2(a, i, j, dd, c)) else { continue };
                                        let k = kron(p, q) * (d.psi[a] * d.psi[dd]);
                                        let mut v = m.view_mut((td.offset, sa.offset), k.shape());
                                        v += &k;
                                    }
                                }
                                z.tau2.insert([l, i, j, b, c], m);
                            }
                        }
                    }
                }
            }
        }
    }
    complete_bars(&mut z, d)?;
    Ok(z)
}

/// Dual object: (X*)_{xy} = (X_{yx})*, crossings are transposes of the inverse crossings.
pub fn dual(x: &WilsonObject, d: &OrbifoldDatum) -> Result<WilsonObject, WilsonError> {
    require_grading(x, d)?;
    let mut z = WilsonObject::empty(dual_bimodule(&x.m));
    for (&[a, b, j, l, i], m) in &x.tau1_bar {
        // τ̄1^X(a,b,j)[l←i] : X_{ib} → X_{al}
        if d.t_adm(a, i, j) && d.t_adm(l, b, j) {
            z.tau1.insert([l, i, j, b, a], m.transpose());
        }
    }
    for (&[a, i, b, l, j], m) in &x.tau2_bar {
        if d.t_adm(a, i, j) && d.t_adm(l, i, b) {
            z.tau2.insert([l, i, j, b, a], m.transpose());
        }
    }
    complete_bars(&mut z, d)?;
    Ok(z)
}

fn unit_bimodule(n: usize) -> GradedBimodule {
    GradedBimodule::unit(n)
}

fn scalar_blocks(m: &GradedBimodule, f: impl Fn(usize, usize) -> C64) -> BTreeMap<(usize, usize), CMat> {
    m.grades().map(|((x, y), dim)| ((x, y), eye(dim) * f(x, y))).collect()
}

/// λ: 1⊗X → X, ψ(x) on grade (x,y).
pub fn left_unitor(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    let src = TensorLayout::new(&unit_bimodule(x.n), x).expect("same index set").product;
    GradedMap { src, tgt: x.clone(), blocks: scalar_blocks(x, |a, _| d.psi[a]) }
}

/// ρ: X⊗1 → X, ψ(y) on grade (x,y).
pub fn right_unitor(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    let src = TensorLayout::new(x, &unit_bimodule(x.n)).expect("same index set").product;
    GradedMap { src, tgt: x.clone(), blocks: scalar_blocks(x, |_, b| d.psi[b]) }
}

fn invert(f: &GradedMap) -> Result<GradedMap, WilsonError> {
    let mut blocks = BTreeMap::new();
    for (g, b) in &f.blocks {
        let inv = inverse(b).map_err(|_| WilsonError::NotInvertible { which: format!("block {g:?}") })?;
        blocks.insert(*g, inv);
    }
    Ok(GradedMap { src: f.tgt.clone(), tgt: f.src.clone(), blocks })
}

fn transpose_map(f: &GradedMap) -> GradedMap {
    let blocks = f.blocks.iter().map(|(g, b)| (*g, b.transpose())).collect();
    GradedMap { src: f.tgt.clone(), tgt: f.src.clone(), blocks }
}

/// Pairing P⊗Q → 1 where the summand over middle a has dimension dims(x, a), scaled by ψ(a)/ω(x).
fn pairing(p: &GradedBimodule, q: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    let lay = TensorLayout::new(p, q).expect("same index set");
    let u = unit_bimodule(p.n);
    let mut blocks = BTreeMap::new();
    for x in 0..p.n {
        let Some(bl) = lay.blocks.get(&(x, x)) else { continue };
        let mut row = zeros(1, lay.product.dim(x, x));
        for tb in bl {
            let z = d.psi[tb.mid] / d.w(x);
            row.view_mut((0, tb.offset), (1, tb.size())).copy_from(&(pairing_row(tb.left) * z));
        }
        blocks.insert((x, x), row);
    }
    GradedMap { src: lay.product, tgt: u, blocks }
}

fn copairing(p: &GradedBimodule, q: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    let lay = TensorLayout::new(p, q).expect("same index set");
    let u = unit_bimodule(p.n);
    let mut blocks = BTreeMap::new();
    for x in 0..p.n {
        let Some(bl) = lay.blocks.get(&(x, x)) else { continue };
        let mut col = zeros(lay.product.dim(x, x), 1);
        for tb in bl {
            col.view_mut((tb.offset, 0), (tb.size(), 1)).copy_from(&(copairing_col(tb.left) * d.psi[tb.mid]));
        }
        blocks.insert((x, x), col);
    }
    GradedMap { src: u, tgt: lay.product, blocks }
}

/// ev: X*⊗X → 1.
pub fn ev(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    pairing(&dual_bimodule(x), x, d)
}

/// ẽv: X⊗X* → 1.
pub fn ev_tilde(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    pairing(x, &dual_bimodule(x), d)
}

/// coev: 1 → X⊗X*.
pub fn coev(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    copairing(x, &dual_bimodule(x), d)
}

/// c̃oev: 1 → X*⊗X.
pub fn coev_tilde(x: &GradedBimodule, d: &OrbifoldDatum) -> GradedMap {
    copairing(&dual_bimodule(x), x, d)
}

fn assoc(x: &GradedBimodule, y: &GradedBimodule, z: &GradedBimodule) -> GradedMap {
    associator(x, y, z).expect("same index set")
}

/// Worst deviation from the identity over the four snake identities.
pub fn zigzag_residuals(x: &GradedBimodule, d: &OrbifoldDatum) -> Result<[f64; 4], WilsonError> {
    let xd = dual_bimodule(x);
    let (id, idd) = (GradedMap::identity(x), GradedMap::identity(&xd));
    let lam = left_unitor(x, d);
    let rho = right_unitor(x, d);
    let lam_d = left_unitor(&xd, d);
    let rho_d = right_unitor(&xd, d);
    let (e, et, c, ct) = (ev(x, d), ev_tilde(x, d), coev(x, d), coev_tilde(x, d));

    let z1 = rho
        .compose(&tmaps(&id, &e))
        .compose(&assoc(x, &xd, x))
        .compose(&tmaps(&c, &id))
        .compose(&invert(&lam)?);
    let z2 = lam_d
        .compose(&tmaps(&e, &idd))
        .compose(&transpose_map(&assoc(&xd, x, &xd)))
        .compose(&tmaps(&idd, &c))
        .compose(&invert(&rho_d)?);
    let z3 = lam
        .compose(&tmaps(&et, &id))
        .compose(&transpose_map(&assoc(x, &xd, x)))
        .compose(&tmaps(&id, &ct))
        .compose(&invert(&rho)?);
    let z4 = rho_d
        .compose(&tmaps(&idd, &et))
        .compose(&assoc(&xd, x, &xd))
        .compose(&tmaps(&ct, &idd))
        .compose(&invert(&lam_d)?);
    Ok([z1.max_abs_diff(&id), z2.max_abs_diff(&idd), z3.max_abs_diff(&id), z4.max_abs_diff(&idd)])
}

fn swap(p: usize, q: usize) -> CMat {
    // M(p)⊗N(q) → N(q)⊗M(p)
    let mut s = zeros(p * q, p * q);
    for u in 0..p {
        for v in 0..q {
            s[(v * p + u, u * q + v)] = C64::new(1.0, 0.0);
        }
    }
    s
}

/// c_{M,N}: M⊗N → N⊗M.
pub fn braiding(m: &WilsonObject, nn: &WilsonObject, d: &OrbifoldDatum) -> Result<GradedMap, WilsonError> {
    require_grading(m, d)?;
    require_grading(nn, d)?;
    let ls = layout(&m.m, &nn.m)?;
    let lt = layout(&nn.m, &m.m)?;
    let n = d.n();
    let mut blocks = BTreeMap::new();
    for (&(x, y), sbl) in &ls.blocks {
        let Some(tbl) = lt.blocks.get(&(x, y)) else { continue };
        let mut out = zeros(lt.product.dim(x, y), ls.product.dim(x, y));
        for sb in sbl {
            let a = sb.mid;
            for tb in tbl {
                let e = tb.mid;
                let mut acc = zeros(tb.size(), sb.size());
                for i in 0..n {
                    for j in 0..n {
                        if !d.t_adm(y, i, j) {
                            continue;
                        }
                        for c in 0..n {
                            let Some(n1) = nn.t1(a, i, j, c, y) else { continue };
                            for dd in 0..n {
                                let (Some(m2), Some(nb), Some(mb)) =
                                    (m.t2(x, c, j, dd, a), nn.tb1(x, i, dd, e, c), m.tb2(e, i, j, y, dd))
                                else {
                                    continue;
                                };
                                let z = d.psi[a] * d.psi[e] * d.w(c) * d.w(dd) * d.w(i) * d.w(j);
                                acc += kron(&(nb * n1), &(mb * m2)) * z;
                            }
                        }
                    }
                }
                let blk = acc * swap(sb.left, sb.right) * d.phi;
                out.view_mut((tb.offset, sb.offset), blk.shape()).copy_from(&blk);
            }
        }
        blocks.insert((x, y), out);
    }
    Ok(GradedMap { src: ls.product, tgt: lt.product, blocks })
}

pub fn braiding_inverse(m: &WilsonObject, nn: &WilsonObject, d: &OrbifoldDatum) -> Result<GradedMap, WilsonError> {
    invert(&braiding(m, nn, d)?)
}

/// Σ ω(x)ω(y) tr f_{xy} / Σ ψ⁴.
pub fn trace_ca(f: &GradedMap, d: &OrbifoldDatum) -> C64 {
    let s: C64 = f.blocks.iter().map(|(&(x, y), b)| d.w(x) * d.w(y) * b.trace()).sum();
    s / trace_psi4(d)
}

pub fn qdim(x: &WilsonObject, d: &OrbifoldDatum) -> C64 {
    trace_ca(&x.identity(), d)
}

/// ẽv ∘ (f⊗id) ∘ coev : 1 → 1.
pub fn right_trace(f: &GradedMap, d: &OrbifoldDatum) -> GradedMap {
    let x = &f.src;
    let idd = GradedMap::identity(&dual_bimodule(x));
    ev_tilde(x, d).compose(&tmaps(f, &idd)).compose(&coev(x, d))
}

/// ev ∘ (id⊗f) ∘ c̃oev : 1 → 1.
pub fn left_trace(f: &GradedMap, d: &OrbifoldDatum) -> GradedMap {
    let x = &f.src;
    let idd = GradedMap::identity(&dual_bimodule(x));
    ev(x, d).compose(&tmaps(&idd, f)).compose(&coev_tilde(x, d))
}

/// θ_X = ρ ∘ (id⊗ẽv) ∘ a ∘ (c_{X,X}⊗id) ∘ a⁻¹ ∘ (id⊗coev) ∘ ρ⁻¹.
pub fn twist(x: &WilsonObject, d: &OrbifoldDatum) -> Result<GradedMap, WilsonError> {
    let m = &x.m;
    let md = dual_bimodule(m);
    let id = x.identity();
    let idd = GradedMap::identity(&md);
    let rho = right_unitor(m, d);
    let c = braiding(x, x, d)?;
    let a = assoc(m, m, &md);
    Ok(rho
        .compose(&tmaps(&id, &ev_tilde(m, d)))
        .compose(&a)
        .compose(&tmaps(&c, &idd))
        .compose(&transpose_map(&a))
        .compose(&tmaps(&id, &coev(m, d)))
        .compose(&invert(&rho)?))
}

/// θ as a scalar; requires End(X) to be one-dimensional.
pub fn twist_scalar(x: &WilsonObject, d: &OrbifoldDatum) -> Result<C64, WilsonError> {
    if hom_dim(x, x, d) != 1 {
        return Err(WilsonError::NonScalarTwist);
    }
    let c = braiding(x, x, d)?;
    Ok(trace_ca(&c, d) / qdim(x, d))
}
