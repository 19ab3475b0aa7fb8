//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Failures are reported but do not fail the test binary unless
//! `CLOUD_ACCEPTANCE_STRICT=1` is set.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use cloud_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: &str = "7";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cloud(args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cloud"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CLOUD_THREADS", t),
        None => cmd.env_remove("CLOUD_THREADS"),
    };
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "cloud {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn log2_brute_force(k: usize, n: usize) -> f64 {
    let mut total = 0.0;
    for mut code in 0..k.pow(n as u32) {
        let mut counts = vec![0u32; k];
        for _ in 0..n {
            counts[code % k] += 1;
            code /= k;
        }
        total += counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| (c as f64 / n as f64).powi(c as i32))
            .product::<f64>();
    }
    total.log2()
}

fn complexity_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut ours = Vec::new();
    for k in 1..=4 {
        for n in 1..=8u64 {
            ours.push((k, n, log_multinomial_complexity(k, n).unwrap()));
        }
    }
    let elapsed = start.elapsed();
    for (k, n, v) in ours {
        let brute = log2_brute_force(k, n as usize);
        let rel = if brute == 0.0 { v.abs() } else { ((v - brute) / brute).abs() };
        worst = worst.max(rel);
    }
    outcome(
        worst <= 1e-9 && elapsed.as_secs_f64() < 1.0,
        format!("max relative error {worst:.2e}, {:.3} ms", elapsed.as_secs_f64() * 1e3),
    )
}

fn spot_values() -> Outcome {
    let spots = [(2, 2.5), (3, 4.5), (4, 7.0)];
    let worst = spots
        .iter()
        .map(|&(k, c)| (log_multinomial_complexity(k, 2).unwrap() - f64::log2(c)).abs())
        .fold(0.0, f64::max);
    let unit_ok = (1..=1_000_000u64).all(|n| log_multinomial_complexity(1, n).unwrap() == 0.0);
    outcome(worst <= 1e-12 && unit_ok, format!("max spot error {worst:.1e}, C(1,n)=1 up to 1e6: {unit_ok}"))
}

fn random_table(rng: &mut impl Rng, max_m: usize, max_n: u64) -> JointCounts {
    let mx = rng.random_range(1..=max_m);
    let my = rng.random_range(1..=max_m);
    let n = rng.random_range(1..=max_n);
    let mut cells = vec![0u64; mx * my];
    for _ in 0..n {
        cells[rng.random_range(0..mx * my)] += 1;
    }
    JointCounts::from_flat(cells, mx, my).unwrap()
}

fn random_function(rng: &mut impl Rng, m_in: usize, m_out: usize) -> FunctionMap {
    loop {
        let v: Vec<usize> = (0..m_in).map(|_| rng.random_range(0..m_out)).collect();
        if let Ok(f) = FunctionMap::new(v, m_out) {
            return f;
        }
    }
}

fn identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = BTreeMap::<&str, usize>::new();
    let mut flag = |name, ok: bool| {
        if !ok {
            *violations.entry(name).or_default() += 1;
        }
    };
    for _ in 0..1000 {
        let t = random_table(&mut rng, 4, 30);
        let tt = t.transpose();
        flag("confounded", codelength_confounded(&t) == sc_categorical(&t.flatten()));
        flag("transpose indep", codelength_indep(&t) == codelength_indep(&tt));
        let joint = joint_nll(&t);
        let lx = categorical_nll(&t.x_marginal());
        let ly = categorical_nll(&t.y_marginal());
        let slack = 1e-9 * (t.n() as f64);
        flag("dominance indep", joint <= lx + ly + slack);
        if t.m_x() < 2 || t.m_y() < 2 {
            continue;
        }
        let f = random_function(&mut rng, t.m_x(), t.m_y());
        let g = random_function(&mut rng, t.m_y(), t.m_x());
        let c = rng.random_range(1..8);
        let d = codelength_directed(&t, CausalModel::XToY, &f).unwrap();
        flag("shift", d == codelength_directed(&t, CausalModel::XToY, &f.shifted(c)).unwrap());
        let e = codelength_directed(&t, CausalModel::YToX, &g).unwrap();
        flag("shift", e == codelength_directed(&t, CausalModel::YToX, &g.shifted(c)).unwrap());
        flag("transpose directed", d == codelength_directed(&tt, CausalModel::YToX, &f).unwrap());
        flag("transpose directed", e == codelength_directed(&tt, CausalModel::XToY, &g).unwrap());
        flag(
            "transpose search",
            score_discrete(&t, CausalModel::XToY, DEFAULT_MAX_SWEEPS).unwrap()
                == score_discrete(&tt, CausalModel::YToX, DEFAULT_MAX_SWEEPS).unwrap(),
        );
        flag("dominance directed", joint <= lx + conditional_nll(&t, &f).unwrap() + slack);
        flag("dominance directed", joint <= ly + conditional_nll(&tt, &g).unwrap() + slack);
        let best = optimize_function(&t, DEFAULT_MAX_SWEEPS).unwrap();
        flag("dominance directed", joint <= lx + conditional_nll(&t, &best).unwrap() + slack);
    }
    let total: usize = violations.values().sum();
    outcome(total == 0, format!("{total} violations {violations:?}"))
}

fn search_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut hits, mut monotone_violations, mut trials) = (0, 0, 0);
    while trials < 500 {
        let t = random_table(&mut rng, 3, 12);
        if t.m_x() < 2 || t.m_y() < 2 {
            continue;
        }
        trials += 1;
        let (mx, my) = (t.m_x(), t.m_y());
        let best = (0..my.pow(mx as u32))
            .filter_map(|mut code| {
                let v: Vec<usize> = (0..mx)
                    .map(|_| {
                        let a = code % my;
                        code /= my;
                        a
                    })
                    .collect();
                FunctionMap::new(v, my).ok()
            })
            .map(|f| conditional_nll(&t, &f).unwrap())
            .fold(f64::INFINITY, f64::min);
        let trace = optimize_function_traced(&t, DEFAULT_MAX_SWEEPS).unwrap();
        if conditional_nll(&t, &trace.function).unwrap() <= best + 1e-9 {
            hits += 1;
        }
        monotone_violations += trace.nll_history.windows(2).filter(|w| w[1] > w[0]).count();
    }
    let rate = hits as f64 / trials as f64;
    outcome(
        rate >= 0.95 && monotone_violations == 0,
        format!("optimal in {hits}/{trials} ({rate:.3}), {monotone_violations} monotonicity violations"),
    )
}

/// Accuracy per (data kind, variant, n, truth) from a bench report.
type Accuracy = BTreeMap<(String, String, u64, String), f64>;

fn bench_suite(dir: &Path, suite: &str, sizes: &str) -> (Accuracy, Value) {
    let data = dir.join(format!("{suite}-data"));
    let res = dir.join(format!("{suite}-res"));
    cloud(&["gen", "--suite", suite, "--n", sizes, "--count", "100", "--seed", SEED, "-o", path(&data)], None);
    cloud(&["bench", path(&data.join("manifest.json")), "-o", path(&res)], None);
    let report: Value = serde_json::from_slice(&fs::read(res.join("bench.json")).unwrap()).unwrap();
    let mut acc = Accuracy::new();
    for g in report["groups"].as_array().unwrap() {
        for (truth, tally) in g["per_truth"].as_object().unwrap() {
            let key = (
                g["data_kind"].as_str().unwrap().to_owned(),
                g["variant"].as_str().unwrap_or("").to_owned(),
                g["n"].as_u64().unwrap(),
                truth.clone(),
            );
            acc.insert(key, tally["accuracy"].as_f64().unwrap());
        }
    }
    (acc, report)
}

fn standard_suite(acc: &Accuracy) -> Outcome {
    let mut failures = Vec::new();
    let mut cells = 0;
    for ((kind, _, n, truth), &a) in acc {
        let floor = match (*n, kind.as_str(), truth.as_str()) {
            (10_000, _, _) => 0.95,
            (1000, "discrete", "confounded") => 0.80,
            (1000, _, _) => 0.90,
            _ => continue,
        };
        cells += 1;
        if a < floor {
            failures.push(format!("{kind}/{truth}@{n}={a:.2}<{floor}"));
        }
    }
    outcome(failures.is_empty() && cells == 24, format!("{cells} cells checked; below floor: {failures:?}"))
}

fn non_cyclic_suite(acc: &Accuracy) -> Outcome {
    let targets = [
        ("discrete", "non_cyclic", "x_to_y", 0.98),
        ("mixed", "non_cyclic", "x_to_y", 0.99),
        ("continuous", "linear", "x_to_y", 0.96),
        ("continuous", "cubic", "x_to_y", 0.99),
        ("discrete", "", "confounded", 0.88),
        ("mixed", "", "confounded", 1.00),
        ("continuous", "", "confounded", 1.00),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (kind, variant, truth, target) in targets {
        let key = (kind.to_owned(), variant.to_owned(), 500, truth.to_owned());
        let a = acc.get(&key).copied().unwrap_or(f64::NAN);
        let ok = (a - target).abs() <= 0.07 + 1e-12;
        pass &= ok;
        let label = if variant.is_empty() { format!("{kind}/{truth}") } else { format!("{kind}/{variant}") };
        lines.push(format!("{label}={a:.2}(target {target:.2}){}", if ok { "" } else { " OUT" }));
    }
    outcome(pass, lines.join(", "))
}

fn consistency(acc: &Accuracy) -> Outcome {
    let mut worse = Vec::new();
    let mut checked = 0;
    for ((kind, variant, n, truth), &small) in acc {
        if *n != 100 {
            continue;
        }
        let Some(&large) = acc.get(&(kind.clone(), variant.clone(), 10_000, truth.clone())) else { continue };
        checked += 1;
        if large < small {
            worse.push(format!("{kind}/{truth}: {small:.2} -> {large:.2}"));
        }
    }
    outcome(worse.is_empty() && checked == 12, format!("{checked} scenarios; regressions: {worse:?}"))
}

fn decision_rate(dir: &Path) -> Outcome {
    let data = dir.join("rate-data");
    let res = dir.join("rate-res");
    cloud(&["gen", "--suite", "standard", "--n", "100", "--count", "250", "--seed", SEED, "-o", path(&data)], None);
    let manifest: Vec<Value> = serde_json::from_slice(&fs::read(data.join("manifest.json")).unwrap()).unwrap();
    let discrete: Vec<&Value> = manifest.iter().filter(|e| e["data_kind"] == "discrete").collect();
    fs::write(data.join("discrete.json"), serde_json::to_vec(&discrete).unwrap()).unwrap();
    cloud(&["bench", path(&data.join("discrete.json")), "-o", path(&res)], None);
    let report: Value = serde_json::from_slice(&fs::read(res.join("bench.json")).unwrap()).unwrap();
    let curve = report["decision_rate"].as_array().unwrap();
    let at = |rate: u64| curve.iter().find(|p| p["rate"] == rate).unwrap()["accuracy"].as_f64().unwrap();
    let (top, all) = (at(10), at(100));
    outcome(
        discrete.len() == 1000 && top >= all - 0.05,
        format!("{} trials: accuracy {top:.3} at 10%, {all:.3} at 100%", discrete.len()),
    )
}

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn real_pairs() -> Outcome {
    let expected = [("pair0023.txt", "x_to_y"), ("pair0077.txt", "y_to_x"), ("pair0101.txt", "x_to_y")];
    let mut lines = Vec::new();
    let mut pass = true;
    for (file, want) in expected {
        let out = cloud(
            &["infer", path(&data_file(file)), "--x-type", "continuous", "--y-type", "continuous"],
            None,
        );
        let v: Value = serde_json::from_slice(&out).unwrap();
        let got = v["selected"].as_str().unwrap().to_owned();
        pass &= got == want;
        lines.push(format!("{file}: {got} (delta {:.3})", v["delta"].as_f64().unwrap()));
    }
    outcome(pass, lines.join(", "))
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn determinism(dir: &Path) -> Outcome {
    let mut mismatches = Vec::new();
    let mut gens = Vec::new();
    let mut benches = Vec::new();
    let mut infers = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "1"), ("c", "8")] {
        let data = dir.join(format!("det-{run}"));
        let res = dir.join(format!("det-res-{run}"));
        cloud(
            &["gen", "--suite", "standard", "--n", "60,300", "--count", "3", "--seed", SEED, "-o", path(&data)],
            Some(threads),
        );
        gens.push(read_dir_bytes(&data));
        cloud(&["bench", path(&data.join("manifest.json")), "-o", path(&res)], Some(threads));
        let mut bench = read_dir_bytes(&res);
        bench.insert("stdout".into(), cloud(&["bench", path(&data.join("manifest.json"))], Some(threads)));
        benches.push(bench);
        let infer = ["pair0023.txt", "pair0101.txt"]
            .iter()
            .map(|f| cloud(&["infer", path(&data_file(f)), "--seed", SEED], Some(threads)))
            .collect::<Vec<_>>();
        infers.push(infer);
    }
    for (name, runs) in [("gen", &gens), ("bench", &benches)] {
        if runs.windows(2).any(|w| w[0] != w[1]) {
            mismatches.push(name);
        }
    }
    if infers.windows(2).any(|w| w[0] != w[1]) {
        mismatches.push("infer");
    }
    let files = gens[0].len() + benches[0].len() + infers[0].len();
    outcome(mismatches.is_empty(), format!("{files} outputs compared over 3 runs (threads 1, 1, 8); differing: {mismatches:?}"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "parametric complexity matches enumeration", complexity_oracle()),
        (2, "complexity spot values", spot_values()),
        (3, "codelength identities on random tables", identities()),
        (4, "function search versus exhaustive optimum", search_oracle()),
    ];
    let (standard, _) = bench_suite(dir.path(), "standard", "100,1000,10000");
    results.push((5, "synthetic accuracy at n=1e3 and n=1e4", standard_suite(&standard)));
    let (non_cyclic, _) = bench_suite(dir.path(), "non-cyclic", "500");
    results.push((6, "non-modular and confounded accuracy at n=500", non_cyclic_suite(&non_cyclic)));
    results.push((7, "accuracy does not drop from n=1e2 to n=1e4", consistency(&standard)));
    results.push((8, "decision-rate ordering on discrete data", decision_rate(dir.path())));
    results.push((9, "real cause-effect pairs", real_pairs()));
    results.push((10, "byte-identical output across runs and threads", determinism(dir.path())));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, o) in &results {
        failed += usize::from(!o.pass);
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.0} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 && std::env::var("CLOUD_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
