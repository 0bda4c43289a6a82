//! End-to-end acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

use common::{apply, random_combination, random_map, transpose_inverse};
use orbicat::centre::{centre_modular_data, centre_simples, centre_to_wilson_unchecked, compare_modular_data, MatchResult};
use orbicat::fusion_data::{builtin_by_name, check_category, ModularData};
use orbicat::graded_vect::{associator, tensor_maps};
use orbicat::locmod::{local_modules, locmod_modular_data, AlgebraInMFC};
use orbicat::orbifold::{build_from_spherical, trace_psi4, verify_orbifold};
use orbicat::wilson::*;
use orbicat::{ConditionReport, GradedBimodule, GradedMap, OrbifoldDatum, SkeletalCategory, Tolerance, C64};

const BUILTINS: [&str; 4] = ["vec_z2", "vec_z3", "fibonacci", "ising"];
const O_CHECKS: [&str; 8] = ["O1", "O2", "O3", "O4", "O5", "O6", "O7", "O8"];

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

trait Context<T> {
    fn at(self, ctx: &str) -> Result<T, String>;
}

impl<T, E: std::fmt::Display> Context<T> for Result<T, E> {
    fn at(self, ctx: &str) -> Result<T, String> {
        self.map_err(|e| format!("{ctx}: {e}"))
    }
}

struct Fixture {
    name: &'static str,
    cat: SkeletalCategory,
    d: OrbifoldDatum,
    build_time: Duration,
}

fn fixtures() -> Result<Vec<Fixture>, String> {
    BUILTINS
        .iter()
        .map(|&name| {
            let cat = builtin_by_name(name).map_err(err(name))?;
            let t = Instant::now();
            let d = build_from_spherical(&cat).map_err(err(name))?;
            Ok(Fixture { name, cat, d, build_time: t.elapsed() })
        })
        .collect()
}

fn worst_of(rep: &ConditionReport, names: &[&str]) -> f64 {
    names.iter().map(|k| rep.residual(k).unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

fn orbifold_axioms(fx: &[Fixture]) -> Verdict {
    let mut notes = Vec::new();
    for f in fx {
        let t = Instant::now();
        let rep = verify_orbifold(&f.d, &Tolerance::uniform(1e-8));
        let elapsed = f.build_time + t.elapsed();
        let w = worst_of(&rep, &O_CHECKS);
        ensure(w < 1e-8, || format!("{}: max O1–O8 residual {w:.2e}", f.name))?;
        ensure(elapsed.as_secs_f64() < 10.0, || format!("{}: took {elapsed:?}", f.name))?;
        notes.push(format!("{} {w:.1e}/{:.2}s", f.name, elapsed.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn simplicity(fx: &[Fixture]) -> Verdict {
    for f in fx {
        ensure(datum_is_simple(&f.d).map_err(err(f.name))?, || format!("{}: not simple", f.name))?;
    }
    Ok("all four simple".into())
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn dimension_formula(fx: &[Fixture], runs: &[CaModularData]) -> Verdict {
    let phi = (5.0 + 5f64.sqrt()) / 2.0;
    let literal = [4.0, 9.0, phi * phi, 16.0];
    let mut notes = Vec::new();
    for ((f, md), lit) in fx.iter().zip(runs).zip(literal) {
        let got: C64 = md.data.qdim.iter().map(|q| q * q).sum();
        let formula = expected_global_dim(&f.d);
        let dim_s = f.cat.global_dimension();
        for (what, want) in [("1/(φ⁴(trψ⁴)²)", formula), ("literal", C64::new(lit, 0.0)), ("(Dim S)²", dim_s * dim_s)] {
            let r = rel(got, want);
            ensure(r < 1e-6, || format!("{}: Σqdim² = {got} vs {what} {want} (rel {r:.1e})", f.name))?;
        }
        notes.push(format!("{} {:.4}", f.name, got.re));
    }
    Ok(notes.join(", "))
}

fn trace_psi(fx: &[Fixture]) -> Verdict {
    let mut worst = 0f64;
    for f in fx {
        let r = (trace_psi4(&f.d) - f.cat.global_dimension()).norm();
        ensure(r < 1e-9, || format!("{}: |trψ⁴ − Dim S| = {r:.2e}", f.name))?;
        worst = worst.max(r);
    }
    Ok(format!("max deviation {worst:.1e}"))
}

fn centre_equivalence(fx: &[Fixture], runs: &[CaModularData], ca_time: Duration) -> Verdict {
    let t = Instant::now();
    let counts = [4, 9, 4, 9];
    let mut notes = Vec::new();
    for ((f, md), want) in fx.iter().zip(runs).zip(counts) {
        let z = centre_simples(&f.cat, 0).map_err(err(f.name))?;
        let zmd = centre_modular_data(&f.cat, &z).map_err(err(f.name))?;
        ensure(md.data.len() == want && zmd.len() == want, || {
            format!("{}: counts {} / {} (want {want})", f.name, md.data.len(), zmd.len())
        })?;
        match compare_modular_data(&md.data, &zmd, 1e-6).map_err(err(f.name))? {
            MatchResult::Match { residual, .. } => notes.push(format!("{} {want} ({residual:.0e})", f.name)),
            MatchResult::NoMatch { best_residual } => return Err(format!("{}: no match, best {best_residual:.2e}", f.name)),
        }
    }
    let total = fx.iter().map(|f| f.build_time).sum::<Duration>() + ca_time + t.elapsed();
    ensure(total.as_secs() < 300, || format!("pipeline took {total:?}"))?;
    Ok(format!("{}; {:.1}s total", notes.join(", "), total.as_secs_f64()))
}

fn bridge(fx: &[Fixture], runs: &[CaModularData]) -> Verdict {
    let tol = Tolerance::uniform(1e-8);
    let mut worst = 0f64;
    for (f, md) in fx.iter().zip(runs) {
        let z = centre_simples(&f.cat, 0).map_err(err(f.name))?;
        let zmd = centre_modular_data(&f.cat, &z).map_err(err(f.name))?;
        let mut hit = vec![0usize; md.simples.len()];
        for (k, h) in z.iter().enumerate() {
            let w = centre_to_wilson_unchecked(&f.cat, h).map_err(err(f.name))?;
            let rep = check_wilson_core(&w, &f.d, &tol).map_err(err(f.name))?;
            ensure(rep.passed(), || format!("{} Z{k}: {:?}", f.name, rep.failures()))?;
            worst = worst.max(rep.worst());
            let dt = (twist_scalar(&w, &f.d).map_err(err(f.name))? - zmd.tdiag[k]).norm();
            ensure(dt < 1e-8, || format!("{} Z{k}: twist moved by {dt:.2e}", f.name))?;
            let row: Vec<usize> = md.simples.iter().map(|s| hom_dim(&w, s, &f.d)).collect();
            ensure(row.iter().sum::<usize>() == 1, || format!("{} Z{k}: image decomposes as {row:?}", f.name))?;
            hit[row.iter().position(|&x| x == 1).unwrap()] += 1;
        }
        ensure(hit.iter().all(|&h| h == 1), || format!("{}: image multiplicities {hit:?}", f.name))?;
    }
    Ok(format!("bijective on all four, worst T residual {worst:.1e}"))
}

fn local_modules_check() -> Verdict {
    let cat = builtin_by_name("toric_code").map_err(err("toric_code"))?;
    let alg = AlgebraInMFC::with_unit_coefficients(&cat, &[0, 1]);
    let loc = local_modules(&cat, &alg, 0).map_err(err("1⊕e"))?;
    let md = locmod_modular_data(&cat, &alg, &loc).map_err(err("1⊕e"))?;
    let a = alg.dim(&cat);
    let want = cat.global_dimension() / (a * a);
    ensure(loc.len() == 1, || format!("1⊕e: {} local modules", loc.len()))?;
    ensure((md.global_dim - want).norm() < 1e-9 && (want - C64::new(1.0, 0.0)).norm() < 1e-12, || {
        format!("1⊕e: global dim {} vs {want}", md.global_dim)
    })?;

    let triv = AlgebraInMFC::trivial();
    let loc = local_modules(&cat, &triv, 0).map_err(err("A=1"))?;
    let md = locmod_modular_data(&cat, &triv, &loc).map_err(err("A=1"))?;
    let c = ModularData::from_category(&cat).ok_or("toric code carries no modular data")?;
    ensure(md.smatrix == c.smatrix && md.tdiag == c.tdiag && md.qdim == c.qdim, || "A=1 differs from the category".into())?;
    Ok("1⊕e: 1 module, Dim 1; A=1 exact".into())
}

fn property_suites(fx: &[Fixture], runs: &[CaModularData]) -> Verdict {
    const TOL: f64 = 1e-8;
    let strict = Tolerance::uniform(TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut samples = 0usize;
    for (f, md) in fx.iter().zip(runs) {
        let d = &f.d;
        let p = pipe(d, &GradedBimodule::elementary(d.n(), 0, 0)).map_err(err(f.name))?;
        let avg = average_operator(&p, &p, d);
        let ends = hom_basis(&p, &p, d);
        let name = f.name;

        // (a) averaging
        for _ in 0..100 {
            let x = random_map(&p.m, &p.m, &mut rng);
            let a = apply(&avg, &x);
            let r = apply(&avg, &a).max_abs_diff(&a).max(morphism_residual(&p, &p, &a));
            ensure(r < TOL, || format!("(a) {name}: averaging residual {r:.2e}"))?;
            let g = random_combination(&p.m, &p.m, &ends, &mut rng);
            let r = apply(&avg, &g).max_abs_diff(&g);
            ensure(r < TOL, || format!("(a) {name}: f̄ ≠ f, {r:.2e}"))?;
            samples += 1;
        }

        // (b) braiding
        let s = &md.simples[..];
        let k = s.len();
        for t in 0..6 {
            let (x, y, z) = (&s[t % k], &s[(t * 5 + 1) % k], &s[(t * 7 + 2) % k]);
            let a = |p: &WilsonObject, q: &WilsonObject, r: &WilsonObject| associator(&p.m, &q.m, &r.m).at(name);
            let yz = tensor(y, z, d).at(name)?;
            let xy = tensor(x, y, d).at(name)?;
            let lhs = a(y, z, x)?.compose(&braiding(x, &yz, d).at(name)?).compose(&a(x, y, z)?);
            let rhs = tensor_maps(&y.identity(), &braiding(x, z, d).at(name)?)
                .at(name)?
                .compose(&a(y, x, z)?)
                .compose(&tensor_maps(&braiding(x, y, d).at(name)?, &z.identity()).at(name)?);
            let r = lhs.max_abs_diff(&rhs);
            ensure(r < TOL, || format!("(b) {name}: hexagon {r:.2e}"))?;
            let lhs = transpose_inverse(&a(z, x, y)?)
                .compose(&braiding(&xy, z, d).at(name)?)
                .compose(&transpose_inverse(&a(x, y, z)?));
            let rhs = tensor_maps(&braiding(x, z, d).at(name)?, &y.identity())
                .at(name)?
                .compose(&transpose_inverse(&a(x, z, y)?))
                .compose(&tensor_maps(&x.identity(), &braiding(y, z, d).at(name)?).at(name)?);
            let r = lhs.max_abs_diff(&rhs);
            ensure(r < TOL, || format!("(b) {name}: second hexagon {r:.2e}"))?;

            let c = braiding(&p, y, d).at(name)?;
            let ci = braiding_inverse(&p, y, d).at(name)?;
            let r = ci.compose(&c).max_abs_diff(&GradedMap::identity(&c.src));
            let r = r.max(c.compose(&ci).max_abs_diff(&GradedMap::identity(&c.tgt)));
            ensure(r < TOL, || format!("(b) {name}: c∘c⁻¹ {r:.2e}"))?;
            let g = random_combination(&p.m, &p.m, &ends, &mut rng);
            let lhs = c.compose(&tensor_maps(&g, &y.identity()).at(name)?);
            let rhs = tensor_maps(&y.identity(), &g).at(name)?.compose(&c);
            let r = lhs.max_abs_diff(&rhs);
            ensure(r < TOL, || format!("(b) {name}: naturality {r:.2e}"))?;
        }

        for _ in 0..20 {
            let g = random_combination(&p.m, &p.m, &ends, &mut rng);
            // (c) sphericality
            let (l, r) = (left_trace(&g, d), right_trace(&g, d));
            let dev = l.max_abs_diff(&r);
            ensure(dev < TOL, || format!("(c) {name}: left/right trace {dev:.2e}"))?;
            // (e) trace formula against the ev/coev trace
            let lam = r.block((0, 0))[(0, 0)];
            let dev = r.max_abs_diff(&GradedMap::identity(&r.src).scale(lam)).max((lam - trace_ca(&g, d)).norm());
            ensure(dev < TOL, || format!("(e) {name}: trace formula {dev:.2e}"))?;
        }

        // (d) derived identities
        let rep = verify_orbifold(d, &strict);
        for key in ["O9'", "O10'"] {
            ensure(rep.pass_of(key) == Some(true), || format!("(d) {name}: {key} {:?}", rep.residual(key)))?;
        }
        let mut objs = vec![unit_object(d), p.clone()];
        objs.extend(md.simples.iter().cloned());
        for o in &objs {
            let rep = check_wilson(o, d, &strict).map_err(err(name))?;
            for key in ["T8'", "T9'", "T10'", "T11'", "T12'", "T13'", "T14'", "T15'", "T16'"] {
                ensure(rep.pass_of(key) == Some(true), || format!("(d) {name}: {key} {:?}", rep.residual(key)))?;
            }
        }

        // (f) fusion dimensions
        let n = fusion_rules(s, d).map_err(err(name))?;
        let q = &md.data.qdim;
        for a in 0..k {
            for b in 0..k {
                let sum: C64 = (0..k).map(|c| q[c] * n[a][b][c] as f64).sum();
                let dev = (sum - q[a] * q[b]).norm();
                ensure(dev < TOL, || format!("(f) {name}: ({a},{b}) off by {dev:.2e}"))?;
            }
        }
    }
    Ok(format!("(a)–(f) hold; {samples} averaged maps over {} fixtures", fx.len()))
}

const KICK: f64 = 1e-3;
const DETECT: f64 = 1e-5;

/// Largest residual among the checks that failed; zero when all passed.
fn failed_residual(rep: &ConditionReport) -> f64 {
    rep.failures().iter().map(|(_, r)| *r).fold(0.0, f64::max)
}

fn negative_controls(fx: &[Fixture]) -> Verdict {
    let tol = Tolerance::uniform(1e-8);
    let delta = C64::new(KICK, 0.0);
    let mut tried = 0usize;
    let mut weakest = f64::INFINITY;
    let mut tally = |what: String, r: f64| -> Result<(), String> {
        tried += 1;
        weakest = weakest.min(r);
        ensure(r >= DETECT, || format!("{what}: best failing residual {r:.2e}"))
    };
    for f in fx {
        let keys: Vec<[usize; 6]> = f.cat.f.keys().map(|(k, _)| *k).collect();
        for key in keys {
            let bad = f.cat.with_f_shift(key, delta).map_err(err(f.name))?;
            let mut rep = check_category(&bad, &tol).map_err(err(f.name))?.report;
            if let Ok(d) = build_from_spherical(&bad) {
                rep.merge(&verify_orbifold(&d, &tol));
            }
            tally(format!("{} F{key:?}", f.name), failed_residual(&rep))?;
        }
        let n = f.d.n();
        for x in 0..n.pow(6) {
            let mut idx = [0usize; 6];
            let mut r = x;
            for s in (0..6).rev() {
                idx[s] = r % n;
                r /= n;
            }
            let [l, i, j, k, b, a] = idx;
            if f.d.alpha(l, i, j, k, b, a).norm() == 0.0 {
                continue;
            }
            let rep = verify_orbifold(&f.d.with_alpha_shift(idx, delta), &tol);
            tally(format!("{} α{idx:?}", f.name), failed_residual(&rep))?;
        }
        for x in 0..n {
            let rep = verify_orbifold(&f.d.with_psi(x, f.d.psi[x] + delta), &tol);
            tally(format!("{} ψ{x}", f.name), failed_residual(&rep))?;
        }
        let rep = verify_orbifold(&f.d.with_phi(f.d.phi + delta), &tol);
        tally(format!("{} φ", f.name), failed_residual(&rep))?;
    }
    Ok(format!("{tried} perturbations all caught, weakest residual {weakest:.1e}"))
}

fn report_bytes(f: &Fixture, seed: u64) -> Result<String, String> {
    let tol = Tolerance::default();
    let md = compute_modular_data(&f.d, seed, &tol).map_err(err(f.name))?;
    let z = centre_simples(&f.cat, seed).map_err(err(f.name))?;
    let zmd = centre_modular_data(&f.cat, &z).map_err(err(f.name))?;
    let v = serde_json::json!({
        "orbifold": verify_orbifold(&f.d, &tol),
        "ca_report": md.report,
        "ca": md.data,
        "centre": zmd,
        "match": compare_modular_data(&md.data, &zmd, 1e-6).map_err(err(f.name))?,
    });
    serde_json::to_string(&v).map_err(err(f.name))
}

fn determinism(fx: &[Fixture], runs: &[CaModularData]) -> Verdict {
    for f in fx {
        let (a, b) = (report_bytes(f, 7)?, report_bytes(f, 7)?);
        ensure(a == b, || format!("{}: repeated reports differ", f.name))?;
    }
    for (f, md) in fx.iter().zip(runs) {
        let want = md.simples.len();
        for seed in [1, 2, 3, 5, 8] {
            let w = simples_with_seed(&f.d, seed, &Tolerance::default()).map_err(err(f.name))?.len();
            let z = centre_simples(&f.cat, seed).map_err(err(f.name))?.len();
            ensure(w == want && z == want, || format!("{} seed {seed}: {w} / {z} simples, want {want}", f.name))?;
        }
    }
    Ok("byte-identical reports; counts stable over 5 seeds".into())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let fx = match fixtures() {
        Ok(fx) => fx,
        Err(e) => {
            println!("FAIL setup: {e}");
            return ExitCode::FAILURE;
        }
    };
    let t = Instant::now();
    let runs: Result<Vec<CaModularData>, String> = fx
        .iter()
        .map(|f| compute_modular_data(&f.d, 0, &Tolerance::default()).map_err(err(f.name)))
        .collect();
    let ca_time = t.elapsed();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL setup: {e}");
            return ExitCode::FAILURE;
        }
    };

    let results: Vec<(&str, Verdict)> = vec![
        ("orbifold axioms O1–O8", orbifold_axioms(&fx)),
        ("simplicity of A^S", simplicity(&fx)),
        ("dimension formula", dimension_formula(&fx, &runs)),
        ("tr ψ⁴ = Dim S", trace_psi(&fx)),
        ("centre equivalence", centre_equivalence(&fx, &runs, ca_time)),
        ("centre → Wilson bridge", bridge(&fx, &runs)),
        ("local modules", local_modules_check()),
        ("property suites", property_suites(&fx, &runs)),
        ("negative controls", negative_controls(&fx)),
        ("determinism", determinism(&fx, &runs)),
    ];
    let mut failed = 0;
    for (k, (title, v)) in results.iter().enumerate() {
        match v {
            Ok(msg) => println!("PASS {:>2} {title}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {title}: {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass ({:.1}s)", results.len() - failed, results.len(), started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
