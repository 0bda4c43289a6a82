//! Pipe functor P = H2 ∘ H1: graded vector spaces to Wilson lines.

use std::collections::{BTreeMap, HashMap};

use crate::graded_vect::{GradedBimodule, Grade};
use crate::numeric::zeros;
use crate::orbifold::OrbifoldDatum;

use super::{complete_bars, WilsonError, WilsonObject};

type Basis<K> = BTreeMap<Grade, Vec<K>>;

fn index<K: Copy + Eq + std::hash::Hash>(basis: &Basis<K>) -> HashMap<Grade, HashMap<K, usize>> {
    basis
        .iter()
        .map(|(g, v)| (*g, v.iter().enumerate().map(|(k, e)| (*e, k)).collect()))
        .collect()
}

fn dims_of<K>(n: usize, basis: &Basis<K>) -> GradedBimodule {
    let mut m = GradedBimodule::zero(n);
    for (g, v) in basis {
        m.set(*g, v.len());
    }
    m
}

/// First half-pipe; only τ1 is produced. Basis of H_{p,q}: (a, r, b, μ) with T_{p;a,r}, T_{q;b,r}.
pub fn pipe_h1(d: &OrbifoldDatum, m: &GradedBimodule) -> WilsonObject {
    let n = d.n();
    let mut basis: Basis<(usize, usize, usize, usize)> = BTreeMap::new();
    for p in 0..n {
        for q in 0..n {
            let mut bl = Vec::new();
            for a in 0..n {
                for r in 0..n {
                    for b in 0..n {
                        if d.t_adm(p, a, r) && d.t_adm(q, b, r) {
                            bl.extend((0..m.dim(a, b)).map(|mu| (a, r, b, mu)));
                        }
                    }
                }
            }
            if !bl.is_empty() {
                basis.insert((p, q), bl);
            }
        }
    }
    let idx = index(&basis);
    let mut x = WilsonObject::empty(dims_of(n, &basis));
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for c in 0..n {
                    let Some(src) = basis.get(&(l, c)) else { continue };
                    if !d.t_adm(c, i, j) {
                        continue;
                    }
                    for bp in 0..n {
                        let Some(tgt) = basis.get(&(bp, i)) else { continue };
                        if !d.t_adm(l, bp, j) {
                            continue;
                        }
                        let ti = &idx[&(bp, i)];
                        let mut a_mat = zeros(tgt.len(), src.len());
                        for (col, &(a, r, b, mu)) in src.iter().enumerate() {
                            for rp in 0..n {
                                let Some(&row) = ti.get(&(a, rp, b, mu)) else { continue };
                                a_mat[(row, col)] += d.alpha(c, b, rp, j, i, r) * d.alpha(l, a, rp, j, bp, r) * d.w(c);
                            }
                        }
                        x.tau1.insert([l, i, j, bp, c], a_mat);
                    }
                }
            }
        }
    }
    x
}

/// Second half-pipe, built from the τ1 crossings of `k`. Basis of H_{l,k}: (s, p, q, κ) with T_{l;s,p}, T_{k;s,q}.
pub fn pipe_h2(d: &OrbifoldDatum, k: &WilsonObject) -> WilsonObject {
    let n = d.n();
    let mut basis: Basis<(usize, usize, usize, usize)> = BTreeMap::new();
    for l in 0..n {
        for kk in 0..n {
            let mut bl = Vec::new();
            for s in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        if d.t_adm(l, s, p) && d.t_adm(kk, s, q) {
                            bl.extend((0..k.d(p, q)).map(|kap| (s, p, q, kap)));
                        }
                    }
                }
            }
            if !bl.is_empty() {
                basis.insert((l, kk), bl);
            }
        }
    }
    let idx = index(&basis);
    let mut x = WilsonObject::empty(dims_of(n, &basis));
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                for c in 0..n {
                    let Some(src) = basis.get(&(l, c)) else { continue };
                    if !d.t_adm(c, i, j) {
                        continue;
                    }
                    for dd in 0..n {
                        let Some(tgt) = basis.get(&(dd, j)) else { continue };
                        if !d.t_adm(l, i, dd) {
                            continue;
                        }
                        let ti = &idx[&(dd, j)];
                        let mut a_mat = zeros(tgt.len(), src.len());
                        for (col, &(s, p, q, kap)) in src.iter().enumerate() {
                            for y in 0..n {
                                let Some(&row) = ti.get(&(y, p, q, kap)) else { continue };
                                a_mat[(row, col)] += d.alpha(c, i, y, q, s, j) * d.alpha_bar(l, i, y, p, dd, s) * d.w(s);
                            }
                        }
                        x.tau2.insert([l, i, j, dd, c], a_mat);
                    }
                    for bp in 0..n {
                        let Some(tgt) = basis.get(&(bp, i)) else { continue };
                        if !d.t_adm(l, bp, j) {
                            continue;
                        }
                        let ti = &idx[&(bp, i)];
                        let mut a_mat = zeros(tgt.len(), src.len());
                        for (col, &(s, p, q, kap)) in src.iter().enumerate() {
                            for u in 0..n {
                                let a1 = d.alpha(c, s, u, j, i, q);
                                if a1.norm() == 0.0 {
                                    continue;
                                }
                                for pp in 0..n {
                                    let a2 = d.alpha(l, s, pp, j, bp, p);
                                    if a2.norm() == 0.0 {
                                        continue;
                                    }
                                    let Some(tk) = k.t1(p, u, j, pp, q) else { continue };
                                    let z = a1 * a2 * d.w(i) * d.w(pp);
                                    for kp in 0..k.d(pp, u) {
                                        let row = ti[&(s, pp, u, kp)];
                                        a_mat[(row, col)] += z * tk[(kp, kap)];
                                    }
                                }
                            }
                        }
                        x.tau1.insert([l, i, j, bp, c], a_mat);
                    }
                }
            }
        }
    }
    x
}

/// The pipe object P(M).
pub fn pipe(d: &OrbifoldDatum, m: &GradedBimodule) -> Result<WilsonObject, WilsonError> {
    if m.n != d.n() {
        return Err(WilsonError::GradeMismatch { expected: d.n(), got: m.n });
    }
    let k = pipe_h1(d, m);
    let mut p = pipe_h2(d, &k);
    complete_bars(&mut p, d)?;
    Ok(p)
}

