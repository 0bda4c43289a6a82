use proptest::prelude::*;

use orbicat::centre::*;
use orbicat::fusion_data::{builtin_by_name, ModularData};
use orbicat::locmod::*;
use orbicat::numeric::{max_abs, primitive_idempotents, svd, CMat, Tolerance};
use orbicat::orbifold::build_from_spherical;
use orbicat::wilson::{check_wilson_core, enumerate_simples, hom_dim, twist_scalar};
use orbicat::C64;

const BUILTINS: [&str; 4] = ["vec_z2", "vec_z3", "fibonacci", "ising"];

#[test]
fn tube_algebras_are_unital_and_associative() {
    for name in ["vec_z2", "fibonacci", "ising"] {
        let cat = builtin_by_name(name).unwrap();
        let t = TubeAlgebra::new(&cat).unwrap();
        assert!(t.associativity_residual(cat.n()) < 1e-10, "{name}");
    }
}

#[test]
fn centre_simples_are_half_braided_and_complete() {
    for name in ["vect", "vec_z2", "vec_z3", "fibonacci", "ising", "toric_code"] {
        let cat = builtin_by_name(name).unwrap();
        let z = centre_simples(&cat, 0).unwrap();
        for h in &z {
            assert!(h.hexagon_residual(&cat) < 1e-10, "{name}");
        }
        let unit = HalfBraidedObject::unit(&cat);
        assert_eq!(z[0].mult, unit.mult, "{name}: unit first");
        for (k, g) in &unit.gamma {
            assert!(max_abs(&(&z[0].gamma[k] - g)) < 1e-12, "{name}: unit first");
        }
        let md = centre_modular_data(&cat, &z).unwrap();
        let want = cat.global_dimension() * cat.global_dimension();
        assert!((md.global_dim - want).norm() < 1e-8 * want.norm(), "{name}");
        assert!(md.invariant_residual() < 1e-8, "{name}");
    }
}

#[test]
fn centre_counts_of_known_doubles() {
    for (name, count) in [("vec_z2", 4), ("vec_z3", 9), ("fibonacci", 4), ("ising", 9), ("toric_code", 16)] {
        let cat = builtin_by_name(name).unwrap();
        assert_eq!(centre_simples(&cat, 3).unwrap().len(), count, "{name}");
    }
}

#[test]
fn broken_half_braiding_is_detected() {
    let cat = builtin_by_name("fibonacci").unwrap();
    let z = centre_simples(&cat, 0).unwrap();
    let mut h = z[2].clone();
    let key = *h.gamma.keys().find(|k| k[1] == 1).unwrap();
    h.gamma.get_mut(&key).unwrap()[(0, 0)] *= C64::new(1.001, 0.0);
    assert!(h.hexagon_residual(&cat) > 1e-5);
}

#[test]
fn bridge_lands_on_enumerated_simples() {
    for name in BUILTINS {
        let cat = builtin_by_name(name).unwrap();
        let d = build_from_spherical(&cat).unwrap();
        let simples = enumerate_simples(&d, 0).unwrap();
        let z = centre_simples(&cat, 0).unwrap();
        let zmd = centre_modular_data(&cat, &z).unwrap();
        let mut hit = vec![0usize; simples.len()];
        for (k, h) in z.iter().enumerate() {
            let w = centre_to_wilson(&cat, h).unwrap();
            assert!(check_wilson_core(&w, &d, &Tolerance::uniform(1e-8)).unwrap().passed());
            assert!((twist_scalar(&w, &d).unwrap() - zmd.tdiag[k]).norm() < 1e-8, "{name} twist {k}");
            let row: Vec<usize> = simples.iter().map(|s| hom_dim(&w, s, &d)).collect();
            assert_eq!(row.iter().sum::<usize>(), 1, "{name}: image {k} is not simple");
            hit[row.iter().position(|&x| x == 1).unwrap()] += 1;
        }
        assert!(hit.iter().all(|&h| h == 1), "{name}: {hit:?}");
    }
}

#[test]
fn condensing_bosons_of_the_toric_code() {
    let cat = builtin_by_name("toric_code").unwrap();
    for boson in [1, 2] {
        let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, boson]);
        let loc = local_modules(&cat, &alg, 0).unwrap();
        assert_eq!(loc.len(), 1);
        assert_eq!(loc[0].mult, {
            let mut m = vec![0; 4];
            m[0] = 1;
            m[boson] = 1;
            m
        });
        let md = locmod_modular_data(&cat, &alg, &loc).unwrap();
        assert!((md.global_dim - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((md.smatrix[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn trivial_algebra_reproduces_the_category() {
    for name in ["toric_code", "fibonacci", "ising"] {
        let cat = builtin_by_name(name).unwrap();
        let alg = AlgebraInMFC::trivial();
        let loc = local_modules(&cat, &alg, 0).unwrap();
        let md = locmod_modular_data(&cat, &alg, &loc).unwrap();
        assert_eq!(md.smatrix, ModularData::from_category(&cat).unwrap().smatrix, "{name}");
        assert_eq!(md.tdiag, ModularData::from_category(&cat).unwrap().tdiag, "{name}");
    }
}

#[test]
fn induced_modules_satisfy_the_module_axioms() {
    let cat = builtin_by_name("toric_code").unwrap();
    let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
    for x in 0..4 {
        let m = induced(&cat, &alg, x);
        assert!(module_residual(&cat, &alg, &m) < 1e-12, "{x}");
        let local = m.locality < LOCALITY_THRESHOLD;
        assert_eq!(local, x == 0 || x == 1, "{x}");
    }
}

#[test]
fn rescaled_multiplication_is_reported() {
    let cat = builtin_by_name("toric_code").unwrap();
    let mut alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
    for v in alg.mult.values_mut() {
        *v *= 2.0;
    }
    let chk = check_algebra(&cat, &alg, &Tolerance::uniform(1e-8)).unwrap();
    assert!(chk.report.passed());
    assert!((chk.unit_rescale - C64::new(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn degenerate_multiplication_is_not_separable() {
    let cat = builtin_by_name("toric_code").unwrap();
    let mut alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
    *alg.mult.get_mut(&[1, 1, 0]).unwrap() = C64::new(0.0, 0.0);
    let rep = check_algebra(&cat, &alg, &Tolerance::uniform(1e-8)).unwrap().report;
    assert_eq!(rep.pass_of("associativity"), Some(true));
    assert!(!rep.passed());
    assert!(matches!(local_modules(&cat, &alg, 0), Err(LocmodError::AlgebraCheckFailed(_))));
}

#[test]
fn broken_unit_is_caught() {
    let cat = builtin_by_name("toric_code").unwrap();
    let mut alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
    *alg.mult.get_mut(&[1, 0, 1]).unwrap() = C64::new(2.0, 0.0);
    let rep = check_algebra(&cat, &alg, &Tolerance::uniform(1e-8)).unwrap().report;
    assert_eq!(rep.pass_of("unit"), Some(false));
    assert_eq!(rep.pass_of("associativity"), Some(false));
}

fn relabel(md: &ModularData, p: &[usize]) -> ModularData {
    let k = md.len();
    let mut out = md.clone();
    for i in 0..k {
        out.qdim[p[i]] = md.qdim[i];
        out.tdiag[p[i]] = md.tdiag[i];
        out.labels[p[i]] = md.labels[i].clone();
        for j in 0..k {
            out.smatrix[(p[i], p[j])] = md.smatrix[(i, j)];
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn compare_recovers_relabellings(perm in Just((1..9usize).collect::<Vec<_>>()).prop_shuffle()) {
        let cat = builtin_by_name("ising").unwrap();
        let z = centre_simples(&cat, 0).unwrap();
        let md = centre_modular_data(&cat, &z).unwrap();
        let mut p = vec![0];
        p.extend(perm);
        let shuffled = relabel(&md, &p);
        match compare_modular_data(&md, &shuffled, 1e-9).unwrap() {
            MatchResult::Match { permutation, residual } => {
                prop_assert!(residual < 1e-9);
                let back = relabel(&md, &permutation);
                prop_assert!(max_abs(&(back.smatrix - shuffled.smatrix.clone())) < 1e-9);
            }
            m => prop_assert!(false, "{m:?}"),
        }
    }

    #[test]
    fn compare_rejects_perturbed_data(i in 0..4usize, j in 0..4usize) {
        let cat = builtin_by_name("fibonacci").unwrap();
        let md = centre_modular_data(&cat, &centre_simples(&cat, 0).unwrap()).unwrap();
        let mut bad = md.clone();
        bad.smatrix[(i, j)] += C64::new(1e-3, 0.0);
        prop_assert!(!compare_modular_data(&md, &bad, 1e-6).unwrap().is_match());
    }

    #[test]
    fn svd_recomposes(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 30)) {
        let m = CMat::from_fn(5, 6, |r, c| {
            let (a, b) = entries[r * 6 + c];
            C64::new(a, b)
        });
        let d = svd(&m);
        let mut s = CMat::zeros(5, 5);
        for k in 0..5 {
            s[(k, k)] = C64::new(d.s[k], 0.0);
        }
        let v = d.v.columns(0, 5).into_owned();
        prop_assert!(max_abs(&(&d.u * s * v.adjoint() - m)) < 1e-12);
    }

    #[test]
    fn idempotents_of_a_conjugated_matrix_algebra(seed in any::<u64>(), shift in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 25)) {
        // M_2 ⊕ C ⊕ C inside 5×5 matrices, conjugated by a generic invertible matrix
        let g = CMat::from_fn(5, 5, |r, c| {
            let (a, b) = shift[r * 5 + c];
            C64::new(a * 0.3 + if r == c { 2.0 } else { 0.0 }, b * 0.3)
        });
        let gi = g.clone().try_inverse().unwrap();
        let mut basis = Vec::new();
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (3, 3), (4, 4)] {
            let mut e = CMat::zeros(5, 5);
            e[(r, c)] = C64::new(1.0, 0.0);
            if r == 0 && c == 0 {
                e[(2, 2)] = C64::new(0.0, 0.0);
            }
            basis.push(&g * e * &gi);
        }
        let idems = primitive_idempotents(&basis, seed, &Tolerance::default()).unwrap();
        prop_assert_eq!(idems.len(), 5);
        let mut sum = CMat::zeros(5, 5);
        for e in &idems {
            prop_assert!(max_abs(&(e * e - e)) < 1e-8);
            sum += e;
        }
        prop_assert!(max_abs(&(sum - CMat::identity(5, 5))) < 1e-8);
    }
}
