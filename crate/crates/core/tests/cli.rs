use std::path::PathBuf;
use std::process::{Command, Output};

use pinv_minres::experiments::CSV_MAGIC;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinv-minres"))
        .args(args)
        .env_remove("PINV_MINRES_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header lines and data rows of a CSV document.
fn parse(csv: &str) -> (String, Vec<Vec<String>>) {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_MAGIC));
    assert!(lines.next().unwrap().starts_with("# config: command="));
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pinv-minres-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn synthetic_defaults() {
    let out = bin(&["synthetic", "--assert"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = parse(&stdout(&out));
    assert_eq!(header, "t,err_plain,err_lifted,kind");
    let last = rows.last().unwrap();
    let plain: f64 = last[1].parse().unwrap();
    let lifted: f64 = last[2].parse().unwrap();
    assert!(plain > 1e-2, "plain {plain}");
    assert!(lifted <= 1e-8, "lifted {lifted}");
    assert!(rows.iter().all(|r| r[3] == "hermitian"));
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (k + 1).to_string());
    }
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        &["synthetic", "--kind", "cs", "--seed", "4"][..],
        &["precon-sweep", "--d", "10", "--rank", "6", "--seed", "2"],
        &["npc", "--seed", "3"],
        &["equiv", "--seed", "5"],
        &["deblur", "--n", "24", "--rank", "6", "--seed", "1"],
    ] {
        let a = bin(args);
        let b = bin(args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    assert_ne!(bin(&["synthetic", "--seed", "1"]).stdout, bin(&["synthetic", "--seed", "2"]).stdout);
}

#[test]
fn seed_from_environment() {
    let flag = bin(&["synthetic", "--seed", "9"]);
    let env = Command::new(env!("CARGO_BIN_EXE_pinv-minres"))
        .args(["synthetic"])
        .env("PINV_MINRES_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn headers() {
    let cases = [
        (
            &["precon-sweep", "--d", "8", "--rank", "5"][..],
            "family,i,E_x,E_x_hat,E_r,E_P,norm_Mr,norm_AMr,norm_A_rhat,norm_rhat,a_holds,b_holds,iterations",
        ),
        (&["npc"], "preconditioner,t,lambda_min,model,xb,mdag_norm,npc_test,detected"),
        (&["equiv", "--kind", "cs"], "pair,comparison,iterations,max_rel_gap,first_divergence"),
        (&["deblur", "--n", "16", "--rank", "4"], "solver,rank_ratio,psnr,ssim,seconds"),
    ];
    for (args, want) in cases {
        let out = bin(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let (header, rows) = parse(&stdout(&out));
        assert_eq!(header, want, "{args:?}");
        let width = want.split(',').count();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.len() == width), "{args:?}");
    }
}

#[test]
fn precon_sweep_rows() {
    let out = bin(&["precon-sweep", "--assert"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse(&stdout(&out));
    assert_eq!(rows.len(), 40);
    let at_rank = rows.iter().find(|r| r[0] == "range_preserved" && r[1] == "15").unwrap();
    assert!(at_rank[2].parse::<f64>().unwrap() <= 1e-8);
}

#[test]
fn npc_detects_for_first_three() {
    let out = bin(&["npc", "--assert"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse(&stdout(&out));
    for name in ["M1", "M2", "M3"] {
        assert!(rows.iter().any(|r| r[0] == name && r[7] == "true"), "{name}");
    }
    assert!(rows.iter().filter(|r| r[0] == "M4").all(|r| r[7] == "false"));
}

#[test]
fn deblur_with_identity_blur_recovers_the_image() {
    let out = bin(&["deblur", "--n", "16", "--bandwidth", "1", "--sigma-noise", "0", "--rank", "16"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse(&stdout(&out));
    for solver in ["minres", "minres_lifted", "lsqr", "tsvd"] {
        let row = rows.iter().find(|r| r[0] == solver).unwrap();
        let psnr: f64 = row[2].parse().unwrap();
        assert!(psnr > 100.0, "{solver}: {psnr}");
        assert!((row[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(row[4], "NA");
    }
}

#[test]
fn deblur_writes_images_and_csv_file() {
    let dir = scratch("deblur");
    let csv = dir.join("out.csv");
    let images = dir.join("img");
    let out = bin(&[
        "deblur",
        "--n",
        "16",
        "--rank",
        "4",
        "--color",
        "--timings",
        "--out",
        csv.to_str().unwrap(),
        "--out-dir",
        images.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = parse(&std::fs::read_to_string(&csv).unwrap());
    assert!(rows.iter().all(|r| r[4].parse::<f64>().is_ok()));
    for name in ["original", "blurred", "observed", "minres", "pminres_s1_lifted", "tsvd"] {
        let img = pinv_minres::imaging::read_image(images.join(format!("{name}.ppm"))).unwrap();
        assert_eq!((img.n(), img.channel_count()), (16, 3));
    }
    // The summary goes to stdout when the CSV goes to a file.
    assert!(stdout(&out).contains("PSNR"));

    let input = images.join("original.ppm");
    let again = bin(&["deblur", "--input", input.to_str().unwrap(), "--rank", "4"]);
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert!(stdout(&again).contains(&format!("input={}", input.display())));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["--version"]).status.code(), Some(0));
    // Usage, configuration and I/O errors.
    assert_eq!(bin(&[]).status.code(), Some(1));
    assert_eq!(bin(&["synthetic", "--kind", "normal"]).status.code(), Some(1));
    assert_eq!(bin(&["synthetic", "--bogus"]).status.code(), Some(1));
    assert_eq!(bin(&["synthetic", "--rank", "30"]).status.code(), Some(1));
    assert_eq!(bin(&["precon-sweep", "--kind", "skew"]).status.code(), Some(1));
    assert_eq!(bin(&["deblur", "--input", "/nonexistent/image.pgm"]).status.code(), Some(1));
    // A failed check only changes the status under --assert.
    let weak = ["synthetic", "--max-iter", "2"];
    assert_eq!(bin(&weak).status.code(), Some(0));
    let mut strict = weak.to_vec();
    strict.push("--assert");
    let out = bin(&strict);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("property failed"));
}
