use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loewner_pencil::cli::files::{MatrixFile, MeasureFile, PointFile, RealizationFile, ReportFile};
use loewner_pencil::measures::DiscreteMeasure;
use loewner_pencil::numlin::random::{random_pd, random_pd_tuple, rng_from_seed};
use loewner_pencil::numlin::{MatrixTuple, SymMatrix};
use loewner_pencil::pencil::EvalOptions;
use loewner_pencil::shorted::{shorted_operator, ShortOptions};
use tempfile::TempDir;

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn put(&self, name: &str, json: &str) -> String {
        let p = self.path(name);
        fs::write(&p, json).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn put_matrix(&self, name: &str, m: &SymMatrix) -> String {
        self.put(name, &serde_json::to_string(&MatrixFile::from_real(m.as_matrix())).unwrap())
    }

    fn put_measure(&self, name: &str, mu: &DiscreteMeasure) -> String {
        self.put(name, &serde_json::to_string(&MeasureFile::new(mu)).unwrap())
    }

    fn realize(&self, name: &str, function: &str) -> String {
        let p = self.path(name);
        let out = loewner(&["realize", "--function", function, "--nodes", "24", "-o", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        p.to_str().unwrap().to_string()
    }
}

fn stdout_matrix(out: &Output) -> MatrixFile {
    serde_json::from_slice(&out.stdout).expect("stdout is a matrix file")
}

fn read<T: serde::de::DeserializeOwned>(p: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn schur_examples() {
    let w = Work::new();
    let z = w.put("z.json", r#"{"rows":2,"cols":2,"re":[[2,1],[1,1]]}"#);
    let out = loewner(&["schur", "--input", &z, "--pivot-dim", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_matrix(&out).to_sym().unwrap(), SymMatrix::scalar(1, 1.0));

    let id = w.put_matrix("id.json", &SymMatrix::identity(3));
    let out = loewner(&["schur", "--input", &id, "--pivot-dim", "3"]);
    assert_eq!(stdout_matrix(&out).to_sym().unwrap(), SymMatrix::identity(3));
}

#[test]
fn schur_through_files_is_bit_exact() {
    let w = Work::new();
    let mut rng = rng_from_seed(200);
    let z = random_pd(6, (0.1, 10.0), &mut rng);
    let path = w.put_matrix("z.json", &z);
    let out = loewner(&["schur", "--input", &path, "--pivot-dim", "2"]);
    assert_eq!(code(&out), 0);
    let direct = shorted_operator(&z, 2, &ShortOptions::default()).unwrap().short;
    assert_eq!(stdout_matrix(&out).to_sym().unwrap(), direct);
}

#[test]
fn schur_rejects_bad_input() {
    let w = Work::new();
    let neg = w.put("neg.json", r#"{"rows":2,"cols":2,"re":[[1,0],[0,-1]]}"#);
    assert_eq!(code(&loewner(&["schur", "--input", &neg, "--pivot-dim", "1"])), 2);
    let asym = w.put("asym.json", r#"{"rows":2,"cols":2,"re":[[1,0],[1,1]]}"#);
    assert_eq!(code(&loewner(&["schur", "--input", &asym, "--pivot-dim", "1"])), 2);
    let junk = w.put("junk.json", "not json");
    let out = loewner(&["schur", "--input", &junk, "--pivot-dim", "1"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&loewner(&["schur", "--input", "/nonexistent/z.json", "--pivot-dim", "1"])), 2);
}

#[test]
fn realize_examples() {
    let w = Work::new();
    let p = w.realize("c.json", "cauchy:1");
    let file: RealizationFile = read(Path::new(&p));
    assert_eq!(file.m, 2);
    assert_eq!(file.a0.to_sym().unwrap(), SymMatrix::from_diagonal(&[0.0, 1.0]));
    let r = file.to_realization().unwrap();
    let one = MatrixTuple::single(SymMatrix::scalar(1, 3.0));
    let v = r.eval(&one, &EvalOptions::default()).unwrap().as_matrix()[(0, 0)];
    assert!((v - 0.75).abs() <= 1e-15);

    let p = w.realize("a.json", "arithmetic:0.5,0.5");
    assert_eq!(read::<RealizationFile>(Path::new(&p)).m, 1);

    let out = loewner(&["realize", "--function", "harmonic", "--weights", "0.25,0.75"]);
    assert_eq!(code(&out), 0);
    let file: RealizationFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(file.function.as_deref(), Some("harmonic:0.25,0.75"));

    let out = loewner(&["realize", "--function", "power", "--t", "0.25", "--nodes", "16"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn realize_rejects_bad_specs() {
    for args in [
        &["realize", "--function", "power:1.5"][..],
        &["realize", "--function", "harmonic:0.5,0.6"],
        &["realize", "--function", "nope:1"],
        &["realize", "--function", "power:0.5", "--t", "0.5"],
        &["realize", "--function", "sqrt", "--nodes", "2"],
        &["realize"],
    ] {
        assert_eq!(code(&loewner(args)), 2, "{args:?}");
    }
}

#[test]
fn eval_examples() {
    let w = Work::new();
    let id = w.realize("id.json", "identity");
    let mut rng = rng_from_seed(201);
    let x = random_pd(3, (0.5, 2.0), &mut rng);
    let xp = w.put_matrix("x.json", &x);
    let out = loewner(&["eval", "--realization", &id, "--point", &xp]);
    assert_eq!(code(&out), 0);
    assert!(stdout_matrix(&out).to_sym().unwrap().sub(&x).norm() <= 1e-15);

    let c = w.realize("c.json", "cauchy:1");
    let one = w.put("one.json", r#"{"rows":1,"cols":1,"re":[[1]]}"#);
    let out = loewner(&["eval", "--realization", &c, "--point", &one]);
    let v = stdout_matrix(&out).to_real().unwrap()[(0, 0)];
    assert!((v - 0.5).abs() <= 1e-15);

    let zc = w.put("zc.json", r#"{"rows":1,"cols":1,"re":[[1]],"im":[[0.5]]}"#);
    let out = loewner(&["eval", "--realization", &c, "--point", &zc, "--complex"]);
    assert_eq!(code(&out), 0);
    let f = stdout_matrix(&out).to_complex().unwrap()[(0, 0)];
    assert!(f.im >= 0.0 && f.re.is_finite());
    // Real evaluation refuses complex data.
    assert_eq!(code(&loewner(&["eval", "--realization", &c, "--point", &zc])), 2);
}

#[test]
fn eval_outside_domain_is_exit_one() {
    let w = Work::new();
    let s = w.realize("s.json", "sqrt");
    let neg = w.put("neg.json", r#"{"rows":2,"cols":2,"re":[[1,0],[0,-1]]}"#);
    let out = loewner(&["eval", "--realization", &s, "--point", &neg]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside"));
    // Arity mismatch is structural.
    let g = w.realize("g.json", "geomean:0.5");
    assert_eq!(code(&loewner(&["eval", "--realization", &g, "--point", &neg])), 2);
}

#[test]
fn realization_loading_enforces_invariants() {
    let w = Work::new();
    let bad_e = w.put(
        "bad.json",
        r#"{"k":1,"m":1,"e":[2],"A0":{"rows":1,"cols":1,"re":[[0]]},"A":[{"rows":1,"cols":1,"re":[[1]]}]}"#,
    );
    let one = w.put("one.json", r#"{"rows":1,"cols":1,"re":[[1]]}"#);
    assert_eq!(code(&loewner(&["eval", "--realization", &bad_e, "--point", &one])), 2);
    let not_psd = w.put(
        "np.json",
        r#"{"k":1,"m":1,"e":[1],"A0":{"rows":1,"cols":1,"re":[[0]]},"A":[{"rows":1,"cols":1,"re":[[-1]]}]}"#,
    );
    assert_eq!(code(&loewner(&["eval", "--realization", &not_psd, "--point", &one])), 2);
}

#[test]
fn verify_reports_are_deterministic() {
    let w = Work::new();
    let h = w.realize("h.json", "harmonic:0.3,0.7");
    let run = |name: &str| {
        let p = w.path(name);
        let out = loewner(&[
            "verify", "--suite", "monotone", "--realization", &h, "--dims", "2,3", "--trials", "15", "--seed", "4",
            "--tol", "1e-8", "--report", p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(p).unwrap()
    };
    let a = run("r1.json");
    let b = run("r2.json");
    assert_eq!(a, b);
    let report: ReportFile = serde_json::from_slice(&a).unwrap();
    assert!(report.pass && report.failures == 0);
    assert_eq!(report.dims, vec![2, 3]);
    assert_eq!(report.trials, 15);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains("time") && !text.contains("elapsed"));

    let seq = w.path("seq.json");
    let out = loewner(&[
        "verify", "--suite", "monotone", "--realization", &h, "--dims", "2,3", "--trials", "15", "--seed", "4",
        "--tol", "1e-8", "--sequential", "--report", seq.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(seq).unwrap(), b);
}

#[test]
fn verify_exit_codes() {
    let w = Work::new();
    let s = w.realize("s.json", "sqrt");
    for suite in ["axioms", "monotone", "concave", "jensen", "herglotz", "hypograph"] {
        let out = loewner(&["verify", "--suite", suite, "--realization", &s, "--dims", "2", "--trials", "4"]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stderr));
        let report: ReportFile = serde_json::from_slice(&out.stdout).unwrap();
        assert!(!report.suite.is_empty());
    }
    assert_eq!(code(&loewner(&["verify", "--suite", "bogus", "--realization", &s, "--dims", "2"])), 2);
    assert_eq!(code(&loewner(&["verify", "--suite", "monotone", "--realization", &s, "--dims", "0"])), 2);
    assert_eq!(code(&loewner(&["verify", "--suite", "monotone", "--realization", &s, "--dims", "2", "--trials", "0"])), 2);
}

#[test]
fn verify_failure_is_exit_one() {
    // Unitary invariance holds only up to roundoff, so a tolerance far below
    // machine precision must report failures.
    let w = Work::new();
    let s = w.realize("s.json", "sqrt");
    let p = w.path("r.json");
    let out = loewner(&[
        "verify", "--suite", "axioms", "--realization", &s, "--dims", "3", "--trials", "5", "--tol", "1e-300",
        "--report", p.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let report: ReportFile = read(&p);
    assert!(!report.pass && report.failures > 0 && report.first_failing_seed.is_some());
    let out = loewner(&["verify", "--suite", "monotone", "--realization", &s, "--dims", "2", "--tol", "-1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn order_examples() {
    let w = Work::new();
    let i = w.put_measure("i.json", &DiscreteMeasure::dirac(SymMatrix::identity(2)).unwrap());
    let ii = w.put_measure("ii.json", &DiscreteMeasure::dirac(SymMatrix::scalar(2, 2.0)).unwrap());
    let a = w.put_measure("a.json", &DiscreteMeasure::dirac(SymMatrix::from_diagonal(&[2.0, 1.0])).unwrap());
    let b = w.put_measure("b.json", &DiscreteMeasure::dirac(SymMatrix::from_diagonal(&[1.0, 2.0])).unwrap());

    let cert = w.path("c.json");
    let out = loewner(&["order", "--mu", &i, "--nu", &ii, "--certificate", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = read(&cert);
    assert_eq!(v["verdict"], "leq");
    let gamma: MatrixFile = serde_json::from_value(v["coupling"].clone()).unwrap();
    assert_eq!(gamma.to_real().unwrap()[(0, 0)], 1.0);

    let out = loewner(&["order", "--mu", &a, "--nu", &b, "--certificate", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let v: serde_json::Value = read(&cert);
    assert_eq!(v["verdict"], "not_leq");
    assert_eq!(v["U"], serde_json::json!([0]));

    let mut rng = rng_from_seed(202);
    let mu = DiscreteMeasure::new((0..3).map(|_| random_pd(2, (0.5, 2.0), &mut rng)).collect(), vec![0.2, 0.3, 0.5])
        .unwrap();
    let m = w.put_measure("m.json", &mu);
    let out = loewner(&["order", "--mu", &m, "--nu", &m]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma: MatrixFile = serde_json::from_value(v["coupling"].clone()).unwrap();
    let g = gamma.to_real().unwrap();
    for r in 0..3 {
        for c in 0..3 {
            if r != c {
                assert_eq!(g[(r, c)], 0.0);
            }
        }
    }

    let three = w.put_measure("three.json", &DiscreteMeasure::dirac(SymMatrix::identity(3)).unwrap());
    assert_eq!(code(&loewner(&["order", "--mu", &i, "--nu", &three])), 2);
    let bad = w.put("bad.json", r#"{"n":1,"atoms":[{"rows":1,"cols":1,"re":[[1]]}],"weights":[0.5]}"#);
    assert_eq!(code(&loewner(&["order", "--mu", &bad, "--nu", &bad])), 2);
}

#[test]
fn mean_examples() {
    let w = Work::new();
    let mut rng = rng_from_seed(203);
    let a = random_pd(3, (0.5, 2.0), &mut rng);
    let b = random_pd(3, (0.5, 2.0), &mut rng);
    let single = w.put_measure("s.json", &DiscreteMeasure::dirac(a.clone()).unwrap());
    let out = loewner(&["mean", "--spec", "power:0.5", "--measure", &single]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_matrix(&out).to_sym().unwrap(), a);

    let pair = w.put_measure("p.json", &DiscreteMeasure::new(vec![a.clone(), b.clone()], vec![0.5, 0.5]).unwrap());
    let out = loewner(&["mean", "--spec", "power:1", "--measure", &pair]);
    let arith = loewner(&["mean", "--spec", "arithmetic", "--measure", &pair]);
    assert_eq!(out.stdout, arith.stdout);
    assert_eq!(stdout_matrix(&out).to_sym().unwrap(), a.scale(0.5).add(&b.scale(0.5)));

    let split = w.put_measure(
        "split.json",
        &DiscreteMeasure::new(vec![a.clone(), b.clone(), a.clone()], vec![0.25, 0.5, 0.25]).unwrap(),
    );
    let whole = loewner(&["mean", "--spec", "power:0.3", "--measure", &pair]);
    let parts = loewner(&["mean", "--spec", "power:0.3", "--measure", &split]);
    assert_eq!(code(&whole), 0);
    assert_eq!(whole.stdout, parts.stdout);
    assert!(String::from_utf8_lossy(&whole.stderr).contains("residual"));

    let harmonic = loewner(&["mean", "--spec", "harmonic", "--measure", &pair]);
    assert_eq!(code(&harmonic), 0);

    assert_eq!(code(&loewner(&["mean", "--spec", "geometric", "--measure", &pair])), 2);
    assert_eq!(code(&loewner(&["mean", "--spec", "power:2", "--measure", &pair])), 2);
    // An unattainable residual target is a verified-false outcome.
    assert_eq!(code(&loewner(&["mean", "--spec", "power:0.3", "--measure", &pair, "--tol", "0"])), 1);
}

#[test]
fn decompose_examples() {
    let w = Work::new();
    let scalar = w.put_matrix("s.json", &SymMatrix::scalar(3, 2.0));
    let out_path = w.path("cert.json");
    let out = loewner(&["decompose", "--point", &scalar, "-o", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = read(&out_path);
    assert_eq!(v["k"], 1);

    let mut rng = rng_from_seed(204);
    let x = random_pd_tuple(2, 3, (0.2, 5.0), &mut rng);
    let xp = w.put("x.json", &serde_json::to_string(&PointFile::from_tuple(&x)).unwrap());
    let out = loewner(&["decompose", "--point", &xp, "-o", out_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let cert: loewner_pencil::cli::files::HullCertificateFile = read(&out_path);
    assert!(cert.to_certificate().unwrap().check(&x).unwrap().passes());

    let neg = w.put("neg.json", r#"{"rows":2,"cols":2,"re":[[1,0],[0,0]]}"#);
    let none = w.path("none.json");
    assert_eq!(code(&loewner(&["decompose", "--point", &neg, "-o", none.to_str().unwrap()])), 2);
    assert!(!none.exists());
}

#[test]
fn inputs_are_not_modified() {
    let w = Work::new();
    let z = w.put("z.json", r#"{"rows":2,"cols":2,"re":[[2,1],[1,1]]}"#);
    let before = fs::read(&z).unwrap();
    loewner(&["schur", "--input", &z, "--pivot-dim", "1"]);
    loewner(&["decompose", "--point", &z, "-o", w.path("c.json").to_str().unwrap()]);
    assert_eq!(fs::read(&z).unwrap(), before);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&loewner(&["--help"])), 0);
    assert_eq!(code(&loewner(&["--version"])), 0);
    assert_eq!(code(&loewner(&[])), 2);
}
