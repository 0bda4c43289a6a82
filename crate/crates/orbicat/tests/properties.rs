use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

use common::{apply, random_combination, random_map, transpose_inverse as inverse_assoc};
use orbicat::fusion_data::builtin_by_name;
use orbicat::graded_vect::{associator, tensor_maps};
use orbicat::orbifold::{build_from_spherical, trace_psi4, verify_orbifold};
use orbicat::wilson::*;
use orbicat::{GradedBimodule, GradedMap, OrbifoldDatum, Tolerance, C64};

struct Fixture {
    name: &'static str,
    d: OrbifoldDatum,
    simples: Vec<WilsonObject>,
    pipe: WilsonObject,
    avg: orbicat::numeric::CMat,
    ends: Vec<GradedMap>,
}

fn build(name: &'static str) -> Fixture {
    let d = build_from_spherical(&builtin_by_name(name).unwrap()).unwrap();
    let simples = enumerate_simples(&d, 0).unwrap();
    let pipe = pipe(&d, &GradedBimodule::elementary(d.n(), 0, 0)).unwrap();
    let avg = average_operator(&pipe, &pipe, &d);
    let ends = hom_basis(&pipe, &pipe, &d);
    Fixture { name, d, simples, pipe, avg, ends }
}

fn fixtures() -> &'static [Fixture] {
    static F: OnceLock<Vec<Fixture>> = OnceLock::new();
    F.get_or_init(|| ["vec_z2", "fibonacci", "ising"].into_iter().map(build).collect())
}

fn random_endo(f: &Fixture, rng: &mut ChaCha8Rng) -> GradedMap {
    random_combination(&f.pipe.m, &f.pipe.m, &f.ends, rng)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn averaging_is_an_idempotent_projection_onto_morphisms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in fixtures() {
            let x = random_map(&f.pipe.m, &f.pipe.m, &mut rng);
            let a = apply(&f.avg, &x);
            prop_assert!(apply(&f.avg, &a).max_abs_diff(&a) < 1e-8, "{}", f.name);
            prop_assert!(morphism_residual(&f.pipe, &f.pipe, &a) < 1e-8, "{}", f.name);
            let g = random_endo(f, &mut rng);
            prop_assert!(apply(&f.avg, &g).max_abs_diff(&g) < 1e-8, "{}", f.name);
        }
    }

    #[test]
    fn spherical_traces_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in fixtures() {
            let g = random_endo(f, &mut rng);
            let (l, r) = (left_trace(&g, &f.d), right_trace(&g, &f.d));
            prop_assert!(l.max_abs_diff(&r) < 1e-8, "{}", f.name);
        }
    }

    #[test]
    fn trace_formula_matches_duality_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in fixtures() {
            let g = random_endo(f, &mut rng);
            let r = right_trace(&g, &f.d);
            let lam = r.block((0, 0))[(0, 0)];
            let id = GradedMap::identity(&r.src);
            prop_assert!(r.max_abs_diff(&id.scale(lam)) < 1e-8, "{}: trace is not a scalar", f.name);
            let formula = trace_ca(&g, &f.d);
            prop_assert!((lam - formula).norm() < 1e-8, "{}: {lam} vs {formula}", f.name);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn braiding_hexagons(k in any::<[usize; 3]>()) {
        for f in fixtures() {
            let s = &f.simples;
            let (x, y, z) = (&s[k[0] % s.len()], &s[k[1] % s.len()], &s[k[2] % s.len()]);
            let d = &f.d;
            let xy = tensor(x, y, d).unwrap();
            let yz = tensor(y, z, d).unwrap();
            let a = |p: &WilsonObject, q: &WilsonObject, r: &WilsonObject| associator(&p.m, &q.m, &r.m).unwrap();
            let lhs = a(y, z, x).compose(&braiding(x, &yz, d).unwrap()).compose(&a(x, y, z));
            let rhs = tensor_maps(&y.identity(), &braiding(x, z, d).unwrap())
                .unwrap()
                .compose(&a(y, x, z))
                .compose(&tensor_maps(&braiding(x, y, d).unwrap(), &z.identity()).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8, "{}: first hexagon", f.name);

            let lhs = inverse_assoc(&a(z, x, y)).compose(&braiding(&xy, z, d).unwrap()).compose(&inverse_assoc(&a(x, y, z)));
            let rhs = tensor_maps(&braiding(x, z, d).unwrap(), &y.identity())
                .unwrap()
                .compose(&inverse_assoc(&a(x, z, y)))
                .compose(&tensor_maps(&x.identity(), &braiding(y, z, d).unwrap()).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8, "{}: second hexagon", f.name);
        }
    }

    #[test]
    fn braiding_is_invertible_and_natural(k in any::<usize>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for f in fixtures() {
            let d = &f.d;
            let y = &f.simples[k % f.simples.len()];
            let c = braiding(&f.pipe, y, d).unwrap();
            let ci = braiding_inverse(&f.pipe, y, d).unwrap();
            let id = GradedMap::identity(&c.src);
            prop_assert!(ci.compose(&c).max_abs_diff(&id) < 1e-8, "{}", f.name);
            let g = random_endo(f, &mut rng);
            let lhs = c.compose(&tensor_maps(&g, &y.identity()).unwrap());
            let rhs = tensor_maps(&y.identity(), &g).unwrap().compose(&c);
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-8, "{}: naturality", f.name);
        }
    }
}

#[test]
fn averaging_operator_matches_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in fixtures() {
        let x = random_map(&f.pipe.m, &f.pipe.m, &mut rng);
        let a = average(&x, &f.pipe, &f.pipe, &f.d).unwrap();
        assert!(a.max_abs_diff(&apply(&f.avg, &x)) < 1e-10, "{}", f.name);
    }
}

#[test]
fn derived_identities_hold_on_all_constructed_data() {
    let tol = Tolerance::uniform(1e-8);
    for name in ["vec_z2", "vec_z3", "fibonacci", "ising", "toric_code"] {
        let d = build_from_spherical(&builtin_by_name(name).unwrap()).unwrap();
        let rep = verify_orbifold(&d, &tol);
        for k in ["O9'", "O10'"] {
            assert_eq!(rep.pass_of(k), Some(true), "{name} {k}");
        }
        let mut objs = vec![unit_object(&d), pipe(&d, &GradedBimodule::elementary(d.n(), 0, 0)).unwrap()];
        objs.extend(enumerate_simples(&d, 0).unwrap());
        for (i, o) in objs.iter().enumerate() {
            let rep = check_wilson(o, &d, &tol).unwrap();
            for k in ["T8'", "T9'", "T10'", "T11'", "T12'", "T13'", "T14'", "T15'", "T16'"] {
                assert_eq!(rep.pass_of(k), Some(true), "{name} object {i} {k}: {:?}", rep.residual(k));
            }
        }
    }
}

#[test]
fn fusion_respects_dimensions() {
    for f in fixtures() {
        let n = fusion_rules(&f.simples, &f.d).unwrap();
        let q: Vec<C64> = f.simples.iter().map(|s| qdim(s, &f.d)).collect();
        for a in 0..q.len() {
            for b in 0..q.len() {
                let s: C64 = (0..q.len()).map(|c| q[c] * n[a][b][c] as f64).sum();
                assert!((s - q[a] * q[b]).norm() < 1e-8, "{} ({a},{b})", f.name);
            }
        }
    }
}

#[test]
fn pipe_end_dimension_agrees_with_constraint_count() {
    for f in fixtures() {
        assert_eq!(f.ends.len(), hom_dim_by_constraints(&f.pipe, &f.pipe), "{}", f.name);
    }
}

#[test]
fn twists_are_preserved_by_duality() {
    for f in fixtures() {
        for s in &f.simples {
            let sd = dual(s, &f.d).unwrap();
            let (a, b) = (twist_scalar(s, &f.d).unwrap(), twist_scalar(&sd, &f.d).unwrap());
            assert!((a - b).norm() < 1e-8, "{}", f.name);
        }
    }
}

#[test]
fn trace_of_psi4_is_global_dimension() {
    for f in fixtures() {
        let cat = builtin_by_name(f.name).unwrap();
        assert!((trace_psi4(&f.d) - cat.global_dimension()).norm() < 1e-9);
    }
}
