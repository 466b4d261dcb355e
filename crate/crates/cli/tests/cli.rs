use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bungee_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bungee-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("BUNGEE_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn orbit_labels_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = bungee_lab(dir.path(), &["orbit", "--map", "f", "--point", "0,101.5", "--max-steps", "50000000"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("BUNGEE"));
    let csv = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,x,y,modulus"));
    assert_eq!(lines.next(), Some("0,0,101.5,101.5"));
    assert!(csv.lines().count() <= 100_001);

    let o = bungee_lab(dir.path(), &["orbit", "--map", "f", "--point", "5,5", "-o", "fixed.csv"]);
    assert_eq!(stdout(&o).lines().next(), Some("BOUNDED"));
    assert!(dir.path().join("fixed.csv").exists());

    let o = bungee_lab(dir.path(), &["orbit", "--map", "h", "--point", "0,-4.5"]);
    assert_eq!(stdout(&o).lines().next(), Some("ESCAPING"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["orbit", "--point", "0,101.5", "--bogus"][..],
        &["orbit"][..],
        &["orbit", "--point", "1,2,3"][..],
        &["orbit", "--point", "0,101.5", "--map", "q"][..],
        &["orbit", "--point", "0,101.5", "--low-threshold", "500"][..],
        &["raster", "--viewport", "1,0,0,1"][..],
        &["geometry", "--n-max", "26"][..],
    ] {
        let o = bungee_lab(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn psi_orbit_outside_strip_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bungee_lab(dir.path(), &["orbit", "--map", "psi", "--point", "1,200"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn geometry_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = bungee_lab(dir.path(), &["geometry", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 8);
    let kinds: Vec<&str> = out.lines().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    assert_eq!(kinds, ["kind=S1", "kind=S2", "kind=S3", "kind=S4"].repeat(2));

    let o = bungee_lab(dir.path(), &["geometry", "--n-max", "1"]);
    assert!(stdout(&o).starts_with("n=1 kind=S1 y_lo=101 y_hi=103 "));

    let o = bungee_lab(dir.path(), &["geometry", "--n-max", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn verify_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let o = bungee_lab(dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL "));

    let o = bungee_lab(dir.path(), &["verify", "--n-max", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("disjoint n=").count(), 20);

    let o = bungee_lab(dir.path(), &["verify", "--delta", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL g lower band"));
}

#[test]
fn raster_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o =
        bungee_lab(dir.path(), &["raster", "--viewport", "2,3,2,3", "--width", "16", "--height", "8", "-o", "out.ppm"]);
    assert_eq!(o.status.code(), Some(0));
    let bytes = fs::read(dir.path().join("out.ppm")).unwrap();
    let header = b"P6\n16 8\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    assert_eq!(bytes.len(), header.len() + 3 * 16 * 8);
    assert!(bytes[header.len()..].iter().all(|&b| b == 0), "uniform BOUNDED black");

    // A single pixel centred on an escaping start.
    let o = bungee_lab(
        dir.path(),
        &["raster", "--map", "h", "--viewport", "-0.001,0.001,-4.501,-4.499", "--width", "1", "--height", "1"],
    );
    assert_eq!(o.status.code(), Some(0));
    let bytes = fs::read(dir.path().join("raster.ppm")).unwrap();
    assert_eq!(&bytes[bytes.len() - 3..], &[255, 255, 255]);
}

#[test]
fn raster_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args =
        ["raster", "--viewport", "-0.02,0.02,100.5,104", "--width", "40", "--height", "40", "--max-steps", "1000000"];
    let mut images = Vec::new();
    for threads in ["1", "2"] {
        let o = Command::new(env!("CARGO_BIN_EXE_bungee-lab"))
            .args(args)
            .args(["-o", &format!("t{threads}.ppm")])
            .current_dir(dir.path())
            .env("BUNGEE_LAB_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        images.push(fs::read(dir.path().join(format!("t{threads}.ppm"))).unwrap());
    }
    assert_eq!(images[0], images[1]);

    let o = Command::new(env!("CARGO_BIN_EXE_bungee-lab"))
        .args(args)
        .current_dir(dir.path())
        .env("BUNGEE_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_print_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.conf"),
        "# orbit settings\nmap = h\npoint = 0,101.5\nmax_steps = 1000  # short run\ndelta = 0.02\n",
    )
    .unwrap();
    let o = bungee_lab(dir.path(), &["--config", "run.conf", "--print-config", "orbit", "--max-steps", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("map = h\n"));
    assert!(out.contains("point = 0,101.5\n"));
    // The flag overrides the file.
    assert!(out.contains("max-steps = 2000\n"));
    assert!(out.contains("delta = 0.02\n"));
    assert!(out.contains("y0 = 101\n"));
    assert!(!dir.path().join("orbit.csv").exists(), "print-config must not run the orbit");

    let o = bungee_lab(dir.path(), &["--config", "run.conf", "orbit"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("steps=1000 "));

    fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let o = bungee_lab(dir.path(), &["--config", "bad.conf", "geometry"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bungee_lab(dir.path(), &["--config", "missing.conf", "geometry"]);
    assert_eq!(o.status.code(), Some(2));
}
