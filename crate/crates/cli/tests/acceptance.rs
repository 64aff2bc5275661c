//! Acceptance gate: one PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::fs;
use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use replicheck::axioms::{run_axiom_suite, SuiteConfig};
use replicheck::classical::{self, JointProb, ProbVec};
use replicheck::quantum::{self, diag_embed, partial_trace, uhlmann_fidelity, CMatrix, DensityMatrix, C64};
use replicheck::replication::{
    clone_search, commuting_broadcaster, diag_broadcaster, env_copier, species_simulate,
    verify_broadcast_inequalities, BroadcastSetup, CloneSearchConfig, EnvPolicy, SpeciesScenario,
};
use replicheck::seed;
use replicheck::toymodel::{separability_search, SearchConfig, ToyStateSpace};
use replicheck::{Backend, Channel, Error, State, Tolerances};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ac1_axiom_suite() -> Check {
    let start = Instant::now();
    let reports = run_axiom_suite(&SuiteConfig::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let worst = reports.iter().map(|r| r.worst_violation).fold(f64::INFINITY, f64::min);
    ensure(reports.len() == 8, || format!("expected 8 reports, got {}", reports.len()))?;
    for r in &reports {
        ensure(r.trials == 1000, || format!("{} {}: {} trials", r.axiom, r.backend, r.trials))?;
        ensure(r.passed && r.worst_violation >= -1e-8, || {
            format!("{} {} worst violation {:e}", r.axiom, r.backend, r.worst_violation)
        })?;
    }
    ensure(secs <= 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("8 reports x 1000 trials, worst margin {worst:.3e}, {secs:.2} s"))
}

fn ac2_cross_backend() -> Check {
    let mut rng = seed::rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.random_range(2..=4);
        let p = classical::sample_state(d, &mut rng).unwrap();
        let q = classical::sample_state(d, &mut rng).unwrap();
        let f = uhlmann_fidelity(&diag_embed(&p, None).unwrap(), &diag_embed(&q, None).unwrap()).unwrap();
        worst = worst.max((f - classical::bhattacharyya(&p, &q).unwrap()).abs());
    }
    ensure(worst <= 1e-10, || format!("max |F - B| = {worst:e}"))?;
    Ok(format!("200 pairs, max |F - B| = {worst:.2e}"))
}

fn ac3_perfect_broadcaster() -> Check {
    let mut rng = seed::rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(2..=4);
        let p = classical::sample_state(d, &mut rng).unwrap();
        let q = classical::sample_state(d, &mut rng).unwrap();
        let m = diag_broadcaster(d).unwrap();
        let big = classical::bhattacharyya(&m.apply(&p).unwrap(), &m.apply(&q).unwrap()).unwrap();
        worst = worst.max((big - classical::bhattacharyya(&p, &q).unwrap()).abs());
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("100 pairs, max |(P|P') - (p|p')| = {worst:.2e}"))
}

fn ac4_no_cloning_probe() -> Check {
    let prob = |w: &[f64]| -> State { ProbVec::new(w.to_vec()).unwrap().into() };
    let env = State::trivial(Backend::Classical);
    let cfg = CloneSearchConfig::default();
    let disjoint = clone_search(&[prob(&[1.0, 0.0]), prob(&[0.0, 1.0])], &env, 1, &cfg).map_err(|e| e.to_string())?;
    ensure(disjoint.objective >= 1.0 - 1e-6, || format!("disjoint objective {}", disjoint.objective))?;
    let overlapping =
        clone_search(&[prob(&[1.0, 0.0]), prob(&[0.5, 0.5])], &env, 1, &cfg).map_err(|e| e.to_string())?;
    let (obj, oracle) = (overlapping.objective, common::CLONE_ORACLE);
    ensure((obj - oracle).abs() <= 1e-3, || format!("objective {obj} vs oracle {oracle}"))?;
    ensure(obj <= oracle, || format!("objective {obj} exceeds oracle {oracle}"))?;
    ensure(1.0 - obj >= 1.0 - oracle, || format!("gap {} below oracle gap {}", 1.0 - obj, 1.0 - oracle))?;
    Ok(format!(
        "disjoint {:.9}, overlapping {obj:.10} vs oracle {oracle:.10} (gap {:.2e})",
        disjoint.objective,
        oracle - obj
    ))
}

/// `a·I + b·ρ + c·ρ²` with nonnegative coefficients, normalized: positive and commuting with ρ.
fn polynomial(rho: &DensityMatrix, coeffs: [f64; 3]) -> DensityMatrix {
    let m = rho.matrix();
    let n = m.nrows();
    let mut out = CMatrix::identity(n, n).scale(coeffs[0]) + m.scale(coeffs[1]) + (m * m).scale(coeffs[2]);
    let t = out.trace().re;
    out.unscale_mut(t);
    DensityMatrix::new(out).unwrap()
}

fn ac5_commuting_broadcaster() -> Check {
    let mut rng = seed::rng(5);
    let tol = Tolerances::default();
    let mut worst: f64 = 1.0;
    for _ in 0..50 {
        let rho = quantum::sample_density(2, &mut rng).unwrap();
        let mut coeffs = || [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let family = [polynomial(&rho, coeffs()), polynomial(&rho, coeffs())];
        let ch = commuting_broadcaster(&family, tol.commutator).map_err(|e| e.to_string())?;
        for s in &family {
            let out = ch.apply(s).unwrap();
            for k in 0..2 {
                let f = uhlmann_fidelity(&partial_trace(&out, &[2, 2], &[k]).unwrap(), s).unwrap();
                worst = worst.min(f);
            }
        }
    }
    ensure(worst >= 1.0 - 1e-9, || format!("min marginal fidelity {worst}"))?;
    let zero = DensityMatrix::basis(2, 0).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
    match commuting_broadcaster(&[zero, plus], tol.commutator) {
        Err(Error::NonCommuting { norm }) => Ok(format!(
            "50 pairs, min marginal fidelity 1 - {:.2e}; |0>,|+> rejected (commutator norm {norm:.6})",
            1.0 - worst
        )),
        other => Err(format!("non-commuting pair not rejected: {other:?}")),
    }
}

fn ac6_broadcast_chain() -> Check {
    let mut rng = seed::rng(6);
    let tol = Tolerances::default();
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let (d, e, r) = (rng.random_range(2..=4), rng.random_range(1..=3), rng.random_range(1..=3));
        let ch: Channel = classical::sample_channel(d * e, d * d * r, &mut rng).unwrap().into();
        let env = State::sample(Backend::Classical, e, &mut rng).unwrap();
        let setup = BroadcastSetup::new(ch, env, d, r).unwrap();
        let phi = State::sample(Backend::Classical, d, &mut rng).unwrap();
        let psi = State::sample(Backend::Classical, d, &mut rng).unwrap();
        let v = verify_broadcast_inequalities(&setup, &phi, &setup, &psi, &tol).unwrap();
        for c in v.checks.iter().take(3) {
            worst = worst.min(c.margin);
        }
        ensure(v.homogeneous, || "shared setup not recognized as homogeneous".into())?;
    }
    ensure(worst >= -1e-8, || format!("worst margin {worst:e}"))?;
    Ok(format!("500 setups, worst margin {worst:.3e}"))
}

fn ac7_species() -> Check {
    let mut rng = seed::rng(7);
    let mut worst: f64 = 0.0;
    for backend in [Backend::Classical, Backend::Quantum] {
        for _ in 0..5 {
            let channel = Channel::sample(backend, 4, 8, &mut rng).unwrap();
            let env = State::sample(backend, 2, &mut rng).unwrap();
            let species = (0..4).map(|_| State::sample(backend, 2, &mut rng).unwrap()).collect();
            let sc = SpeciesScenario::new(species, EnvPolicy::Homogeneous(env), channel, 20).unwrap();
            worst = worst.min(species_simulate(&sc, 0).unwrap().worst_step_decrease());
        }
    }
    ensure(worst >= -1e-8, || format!("overlap dropped by {worst:e}"))?;
    let prob = |w: &[f64]| -> State { ProbVec::new(w.to_vec()).unwrap().into() };
    let sc = SpeciesScenario::new(
        vec![prob(&[1.0, 0.0]), prob(&[0.81, 0.19])],
        EnvPolicy::PerSpecies(vec![prob(&[1.0, 0.0]), prob(&[0.0, 1.0])]),
        env_copier(2).unwrap().into(),
        1,
    )
    .unwrap();
    let series = species_simulate(&sc, 0).unwrap().pairwise_series(0, 1);
    ensure((series[0] - 0.9).abs() < 1e-12 && series[1] <= 1e-9, || format!("series {series:?}"))?;
    Ok(format!(
        "10 homogeneous runs x 20 generations, worst step {worst:.2e}; non-homogeneous {:.3} -> {:.1e}",
        series[0], series[1]
    ))
}

fn constructed_separable(space: &ToyStateSpace, da: usize, db: usize, rng: &mut seed::Rng) -> JointProb {
    let lam = classical::sample_state(3, rng).unwrap();
    let mut w = vec![0.0; da * db];
    for &l in lam.weights() {
        let a = space.sample_pure_with(da, rng).unwrap();
        let b = space.sample_pure_with(db, rng).unwrap();
        for (x, v) in classical::tensor(&a, &b).weights().iter().enumerate() {
            w[x] += l * v;
        }
    }
    JointProb::new(w, vec![da, db]).unwrap()
}

fn ac8_toy_model() -> Check {
    let mut rng = seed::rng(8);
    // (a) Joint states on the S = ε surface.
    let mut pure = 0;
    for (eps, dims) in [(0.5, [2, 2]), (0.5, [2, 3]), (0.9, [3, 3]), (std::f64::consts::LN_2, [2, 2])] {
        let space = ToyStateSpace::new(eps).unwrap();
        for _ in 0..250 {
            let p = space.sample_pure_with(dims[0] * dims[1], &mut rng).unwrap();
            let joint = JointProb::from_prob(p, dims.to_vec()).unwrap();
            let v = space.entropy_witness(&joint).unwrap();
            ensure(v.witness_fired, || format!("pure joint state with S = {} did not fire", v.entropy))?;
            pure += 1;
        }
    }
    // (b) Constructed separable states.
    let space = ToyStateSpace::new(0.5).unwrap();
    let cfg = SearchConfig {
        k: Some(3),
        ..SearchConfig::default()
    };
    let mut worst_residual: f64 = 0.0;
    for i in 0..100 {
        let (da, db) = if i % 2 == 0 { (3, 3) } else { (2, 3) };
        let p = constructed_separable(&space, da, db, &mut rng);
        let s = classical::shannon_entropy(p.as_prob());
        ensure(s >= 2.0 * space.epsilon - 1e-9, || format!("separable state {i} has S = {s}"))?;
        let v = separability_search(&p, &space, &SearchConfig { seed: i, ..cfg.clone() }).unwrap();
        let r = v.search_residual.unwrap();
        worst_residual = worst_residual.max(r);
        ensure(v.certifies_separable(&space, 1e-6), || format!("state {i}: residual {r:e}"))?;
        ensure(!v.witness_fired, || format!("witness fired on certified state {i}"))?;
    }
    // (c) Perfectly correlated bit.
    let space = ToyStateSpace::new(std::f64::consts::LN_2).unwrap();
    let diag = JointProb::new(vec![0.5, 0.0, 0.0, 0.5], vec![2, 2]).unwrap();
    let fired = space.entropy_witness(&diag).unwrap().witness_fired;
    let residual = separability_search(&diag, &space, &SearchConfig::default())
        .unwrap()
        .search_residual
        .unwrap();
    ensure(fired && residual > 0.1, || format!("fired {fired}, residual {residual}"))?;
    // (d) Overlapping pure states.
    let a = ProbVec::new(vec![0.5, 0.5, 0.0]).unwrap();
    let b = ProbVec::new(vec![0.0, 0.5, 0.5]).unwrap();
    let ov = classical::bhattacharyya(&a, &b).unwrap();
    ensure((ov - 0.5).abs() <= 1e-12 && space.is_pure(&a).unwrap() && space.is_pure(&b).unwrap(), || {
        format!("pure-state overlap {ov}")
    })?;
    Ok(format!(
        "(a) {pure} pure joints fire; (b) 100 separable, worst residual {worst_residual:.1e}; \
         (c) residual {residual:.3}; (d) overlap {ov}"
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_replicheck"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(status.status.code().unwrap_or(-1))
}

fn ac9_reproducibility() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let files = [
        ("half.json", r#"{"kind":"prob","dims":[2],"weights":[0.5,0.5]}"#),
        ("skew.json", r#"{"kind":"prob","dims":[2],"weights":[0.7,0.3]}"#),
        ("zero.json", r#"{"kind":"prob","dims":[2],"weights":[1.0,0.0]}"#),
        ("one.json", r#"{"kind":"prob","dims":[2],"weights":[0.0,1.0]}"#),
        ("diag.json", r#"{"kind":"prob","dims":[2,2],"weights":[0.5,0.0,0.0,0.5]}"#),
        (
            "scenario.json",
            r#"{"species":["zero.json",{"kind":"prob","dims":[2],"weights":[0.81,0.19]}],
                "env_policy":{"kind":"map","envs":["zero.json","one.json"]},
                "channel":{"builtin":"env_copier","dim":2},"generations":3,"seed":4}"#,
        ),
    ];
    for (name, text) in files {
        fs::write(dir.join(name), text).map_err(|e| e.to_string())?;
    }
    let commands: [(&str, Vec<&str>); 7] = [
        ("overlap.json", vec!["overlap", "half.json", "skew.json"]),
        ("axioms.jsonl", vec!["verify-axioms", "--trials", "200"]),
        ("clone.json", vec!["clone-search", "--target", "zero.json", "--target", "half.json", "--restarts", "4"]),
        (
            "broadcast.json",
            vec!["broadcast-check", "--channel", "diag-broadcaster", "--state", "half.json", "--state", "skew.json"],
        ),
        ("toy.json", vec!["toy", "--state", "diag.json", "--search", "--restarts", "4", "--monte-carlo", "500"]),
        ("species.csv", vec!["species", "--scenario", "scenario.json"]),
        ("species.json", vec!["species", "--scenario", "scenario.json", "--format", "json"]),
    ];
    let mut compared = 0;
    for (out, args) in &commands {
        for run in ["a", "b"] {
            let target = format!("{run}/{out}");
            let mut full = args.clone();
            full.extend(["--seed", "17", "--out", &target]);
            let code = run_cli(dir, &full)?;
            ensure(code == 0, || format!("{args:?} exited with {code}"))?;
        }
    }
    let mut names: Vec<_> = fs::read_dir(dir.join("a")).map_err(|e| e.to_string())?.flatten().map(|e| e.file_name()).collect();
    names.sort();
    for name in names {
        let a = fs::read(dir.join("a").join(&name)).map_err(|e| e.to_string())?;
        let b = fs::read(dir.join("b").join(&name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{} differs between runs", name.to_string_lossy()))?;
        compared += 1;
    }
    ensure(compared >= commands.len(), || format!("only {compared} files written"))?;
    Ok(format!("{} commands, {compared} report files byte-identical across reruns", commands.len()))
}

fn main() {
    let checks: [(&str, &str, fn() -> Check); 9] = [
        ("AC1", "axiom suite", ac1_axiom_suite),
        ("AC2", "cross-backend consistency", ac2_cross_backend),
        ("AC3", "perfect broadcaster identity", ac3_perfect_broadcaster),
        ("AC4", "no-cloning probe", ac4_no_cloning_probe),
        ("AC5", "commuting broadcaster", ac5_commuting_broadcaster),
        ("AC6", "broadcast inequality chain", ac6_broadcast_chain),
        ("AC7", "species dynamics", ac7_species),
        ("AC8", "toy model", ac8_toy_model),
        ("AC9", "CLI reproducibility", ac9_reproducibility),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, check) in checks {
        let result = panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("{id} PASS  {title}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {title}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
