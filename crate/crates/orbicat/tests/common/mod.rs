#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use orbicat::numeric::CMat;
use orbicat::{GradedBimodule, GradedMap, C64};

pub fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_map(src: &GradedBimodule, tgt: &GradedBimodule, rng: &mut ChaCha8Rng) -> GradedMap {
    let v: Vec<C64> = (0..GradedMap::var_count(src, tgt)).map(|_| random_c64(rng)).collect();
    GradedMap::from_vec(src, tgt, &v)
}

/// Random combination of a basis of morphisms.
pub fn random_combination(src: &GradedBimodule, tgt: &GradedBimodule, basis: &[GradedMap], rng: &mut ChaCha8Rng) -> GradedMap {
    basis.iter().fold(GradedMap::zero(src, tgt), |acc, b| acc.add(&b.scale(random_c64(rng))))
}

/// Apply an operator on row-major vectorized maps.
pub fn apply(op: &CMat, f: &GradedMap) -> GradedMap {
    let w = op * nalgebra::DVector::from_vec(f.to_vec());
    GradedMap::from_vec(&f.src, &f.tgt, w.as_slice())
}

/// Inverse of a permutation-type map.
pub fn transpose_inverse(a: &GradedMap) -> GradedMap {
    GradedMap::from_dense(&a.tgt, &a.src, &a.to_dense().adjoint())
}
