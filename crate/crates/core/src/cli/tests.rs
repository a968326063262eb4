use super::*;

fn args(mode: JobMode, a: &[&str]) -> Args {
    let mut x = Args {
        q: Some(2),
        mode: Some(mode),
        precision: Some(32),
        ..Args::default()
    };
    let slots = [&mut x.a1, &mut x.a2, &mut x.a3, &mut x.a4];
    for (slot, v) in slots.into_iter().zip(a) {
        *slot = Some(v.to_string());
    }
    x
}

#[test]
fn flags_make_a_rank_two_job() {
    let c = parse_config(&args(JobMode::Tower, &["theta^5", "1"])).unwrap();
    assert_eq!((c.p, c.m, c.coefficients.len()), (2, 1, 2));
    assert_eq!(c.mode, JobMode::Tower);
}

#[test]
fn file_gives_carlitz_and_flags_override() {
    let c = JobConfig::from_toml("q = 3\na = [\"1\"]\nmode = \"period\"\n").unwrap();
    assert_eq!((c.p, c.coefficients.len(), c.mode), (3, 1, JobMode::Period));
    assert_eq!(c.precision, 64);
    let dir = std::env::temp_dir().join(format!("drinfeld-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("job.toml");
    std::fs::write(&path, "q = 3\na = [\"1\"]\nprecision = 10\n").unwrap();
    let a = Args {
        config: Some(path),
        precision: Some(20),
        ..Args::default()
    };
    let c = parse_config(&a).unwrap();
    assert_eq!((c.p, c.precision), (3, 20));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn zero_leading_coefficient_is_rejected() {
    assert_eq!(
        parse_config(&args(JobMode::Classify, &["theta", "0"])).unwrap_err(),
        ConfigError::LeadingZero(2)
    );
    assert_eq!(
        parse_config(&Args {
            q: Some(6),
            a1: Some("1".into()),
            ..Args::default()
        })
        .unwrap_err(),
        ConfigError::NotPrimePower(6)
    );
    assert!(matches!(
        parse_config(&args(JobMode::Classify, &["theta +"])).unwrap_err(),
        ConfigError::Expr { index: 1, .. }
    ));
}

#[test]
fn classify_job_case_b() {
    let out = run(&parse_config(&args(JobMode::Classify, &["theta^5", "1"])).unwrap());
    let r = &out.report.runs[0];
    let c = r.classification.as_ref().unwrap();
    assert_eq!(
        (c.n, r.bounds.as_ref().unwrap().upper_divisor),
        (Some(2), 8)
    );
    assert_eq!(r.bounds.as_ref().unwrap().lower_divisor, Some(8));
    assert_eq!(out.exit_code, 0);
}

#[test]
fn verify_all_case_a_passes_and_is_deterministic() {
    let cfg = parse_config(&args(JobMode::VerifyAll, &["1", "1"])).unwrap();
    let a = run(&cfg);
    assert!(a.report.passed, "{}", render(&a));
    assert_eq!(a.exit_code, 0);
    assert_eq!(6 % a.report.runs[0].field.unwrap().degree, 0);
    let b = run(&cfg);
    assert_eq!(a.report.to_json(), b.report.to_json());
    let back: Report = serde_json::from_str(&a.report.to_json()).unwrap();
    assert_eq!(back, a.report);
}

#[test]
fn carlitz_period_job() {
    let out = run(&parse_config(&args(JobMode::Period, &["1"])).unwrap());
    let p = &out.report.runs[0].periods[0];
    assert!(p.certified);
    assert_eq!(p.valuation, crate::field_tower::Q::from_integer(-2));
    assert_eq!(out.exit_code, 0, "{}", render(&out));
}

#[test]
fn grid_runs_every_pair() {
    let a = Args {
        q: Some(2),
        grid: Some("-2:0,0:1".into()),
        mode: Some(JobMode::Classify),
        ..Args::default()
    };
    let out = run(&parse_config(&a).unwrap());
    assert_eq!(out.report.runs.len(), 6);
    assert_eq!(out.report.runs[0].module.coefficients, vec!["theta^2", "1"]);
    assert_eq!(
        out.report.runs[5].module.coefficients,
        vec!["1", "1/theta^1"]
    );
}
