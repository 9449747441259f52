use annihilate::cli::run_cli_with;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("annihilate").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn exact_k1_n2() {
    let (code, out, _) = run(&["exact", "--law", "k1", "--n", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("probs: 0.25,0.75"), "{out}");
    assert!((field(&out, "mean:") - 16.0 / 3.0).abs() < 1e-12);
}

#[test]
fn exact_with_samples() {
    let (code, out, _) = run(&["exact", "--law", "sp1", "--n", "1", "--samples", "20000", "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(field(&out, "mean:"), 4.0);
    assert!((field(&out, "sample_mean:") - 4.0).abs() < 0.15, "{out}");
}

#[test]
fn simulate_star_p1() {
    let (code, out, _) = run(&[
        "simulate", "--system", "two", "--graph", "star", "--n", "1", "--p", "1", "--trials", "100000", "--seed", "7",
    ]);
    assert_eq!(code, 0, "{out}");
    let mean = field(&out, "mean_T:");
    let line = out.lines().find(|l| l.starts_with("mean_T:")).unwrap();
    let se: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((mean - 4.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).0, 2);
    assert_eq!(run(&["simulate"]).0, 2);
    assert_eq!(run(&["simulate", "--n", "3", "--p", "0.3"]).0, 2);
    assert_eq!(run(&["simulate", "--system", "one", "--n", "3", "--p", "0.8"]).0, 2);
    assert_eq!(run(&["exact", "--law", "k1", "--n", "0"]).0, 2);
    assert_eq!(run(&["bogus"]).0, 2);
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn verify_quick_passes() {
    let (code, out, _) = run(&["verify", "--quick"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains(" 0 failed"), "{out}");
}

#[test]
fn sweep_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{"system": "two_type", "topology": "star", "n_grid": [16, 32, 64, 128], "p_grid": [0.5], "trials": 200, "base_seed": 5}"#,
    )
    .unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    for csv in [&csv_a, &csv_b] {
        let (code, out, err) =
            run(&["--jobs", "2", "sweep", "--config", config.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}{err}");
    }
    let strip = |p: &std::path::Path| -> Vec<String> {
        std::fs::read_to_string(p).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    let a = strip(&csv_a);
    assert_eq!(a, strip(&csv_b));
    assert_eq!(a[0], "system,topology,n,p,trials,mean_T,stderr_T,mean_M,mean_maxocc,verdicts,seed");
    assert_eq!(a.len(), 5);

    let (code, out, _) = run(&["fit", "--csv", csv_a.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("sqrt_n ") && out.contains("coefficient"), "{out}");
}

#[test]
fn fit_recovers_synthetic_model() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("synthetic.csv");
    let mut text = String::from("system,topology,n,p,trials,mean_T,stderr_T,mean_M,mean_maxocc,verdicts,seed,wall_ms\n");
    for n in [100u32, 200, 400, 800, 1600] {
        let nf = n as f64;
        let mean = 2.0 * nf + 3.0 * nf.sqrt() * nf.ln();
        text.push_str(&format!("two,star,{n},0.5,1000,{mean},1.0,0,0,,1,0\n"));
    }
    std::fs::write(&csv, text).unwrap();
    let (code, out, _) = run(&["fit", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let line = out.lines().find(|l| l.trim_start().starts_with("sqrt_n_log_n")).unwrap();
    let coef: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((coef - 3.0).abs() < 1e-6, "{line}");
}
