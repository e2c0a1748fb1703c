use owwe::gridio::{Grid2D, Seismogram};
use owwe_cli::output::read_csv;
use std::path::Path;
use std::process::Command;

fn owwe(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_owwe"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stability_default_run_matches_expectations() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = owwe(&["stability", "-o", dir_arg(tmp.path())]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("neutrally_stable"));
    let (hash, header, rows) = read_csv(&tmp.path().join("classification.csv")).unwrap();
    assert_eq!(hash.len(), 64);
    assert_eq!(header[4], "classification");
    for r in &rows {
        assert_ne!(r[6], "no", "{r:?}");
        if r[0] == "CN" {
            assert_eq!(r[4], "neutrally_stable");
        }
        if r[0] == "FWD1" && !r[1].starts_with('-') {
            assert_eq!(r[4], "unstable");
        }
    }
    let (h2, header, gains) = read_csv(&tmp.path().join("gain_CN_beta10.csv")).unwrap();
    assert_eq!(h2, hash);
    assert_eq!(header, ["theta", "abs_g"]);
    assert_eq!(gains.len(), 512);
}

#[test]
fn stability_rejects_empty_beta_list() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, stderr) = owwe(&["stability", "-o", dir_arg(tmp.path()), "--betas"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("beta"));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let (code, _, _) = owwe(&[
            "stability",
            "-o",
            dir_arg(d.path()),
            "--schemes",
            "AM5,CN",
            "--betas",
            "0.5",
        ]);
        assert_eq!(code, 0);
    }
    for f in ["classification.csv", "gain_AM5_beta0.5.csv", "config.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap()
        );
    }
    let c = tempfile::tempdir().unwrap();
    owwe(&[
        "stability",
        "-o",
        dir_arg(c.path()),
        "--schemes",
        "AM5,CN",
        "--betas",
        "0.25",
    ]);
    let (h1, _, _) = read_csv(&a.path().join("classification.csv")).unwrap();
    let (h2, _, _) = read_csv(&c.path().join("classification.csv")).unwrap();
    assert_ne!(h1, h2);
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"stability","schemes":["BWD1"],"betas":[1.0,2.0]}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let (code, _, stderr) = owwe(&[
        "stability",
        "--config",
        cfg.to_str().unwrap(),
        "-o",
        dir_arg(&out),
        "--betas",
        "3",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let (_, _, rows) = read_csv(&out.join("classification.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "BWD1");
    assert_eq!(rows[0][4], "stable");

    let (code, _, stderr) = owwe(&[
        "table1",
        "--config",
        cfg.to_str().unwrap(),
        "-o",
        dir_arg(&out),
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("not table1"));
}

#[test]
fn table1_on_two_meshes_writes_errors_and_orders() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = owwe(&[
        "table1",
        "-o",
        dir_arg(tmp.path()),
        "--meshes",
        "1000,2000",
        "--schemes",
        "AM5-I5,CN",
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("AM5-I5"));
    let (_, header, rows) = read_csv(&tmp.path().join("table1.csv")).unwrap();
    assert_eq!(header, ["n_x", "AM5-I5", "CN"]);
    let e2000: f64 = rows[1][1].parse().unwrap();
    assert!((e2000 / 1.72e-2 - 1.0).abs() < 0.5);
    let (_, _, orders) = read_csv(&tmp.path().join("orders.csv")).unwrap();
    assert_eq!(orders.len(), 2);
    let (_, header, energy) = read_csv(&tmp.path().join("energy_nx1000.csv")).unwrap();
    assert_eq!(header, ["x", "exact", "AM5-I5", "CN"]);
    assert_eq!(energy.len(), 1001);
}

fn small_impulse(dir: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec![
        "impulse2d",
        "-o",
        dir_arg(dir),
        "--width",
        "600",
        "--depth",
        "200",
        "--terms",
        "60",
        "--times",
        "3,4",
    ];
    args.extend_from_slice(extra);
    let (code, _, stderr) = owwe(&args);
    (code, stderr)
}

#[test]
fn zero_wavelet_gives_zero_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stderr) = small_impulse(tmp.path(), &["--amplitude", "0"]);
    assert_eq!(code, 0, "{stderr}");
    let g = Grid2D::read(&tmp.path().join("snapshot_t3.000.f32")).unwrap();
    assert_eq!((g.nx, g.nz), (61, 81));
    assert!(g.data.iter().all(|v| *v == 0.0));
}

#[test]
fn impulse_snapshots_and_amplitude_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stderr) = small_impulse(tmp.path(), &["--sigma", "3"]);
    assert_eq!(code, 0, "{stderr}");
    let g = Grid2D::read(&tmp.path().join("snapshot_t4.000.f32")).unwrap();
    assert!((g.hz - 2.5).abs() < 1e-12);
    assert!(g.data.iter().any(|v| *v != 0.0));
    let (_, header, rows) = read_csv(&tmp.path().join("max_amplitude.csv")).unwrap();
    assert_eq!(header, ["depth_m", "max_abs"]);
    assert_eq!(rows.len(), 81);
}

#[test]
fn impulse_alarm_exits_with_its_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, stderr) = owwe(&[
        "impulse2d",
        "-o",
        dir_arg(tmp.path()),
        "--width",
        "1200",
        "--depth",
        "1500",
        "--terms",
        "50",
        "--ratio",
        "0.5",
    ]);
    assert_eq!(code, 4, "{stderr}");
}

#[test]
fn zero_section_from_files_gives_zero_image() {
    let tmp = tempfile::tempdir().unwrap();
    let (nx, nz, nt) = (41, 61, 200);
    let sec = tmp.path().join("section.f32");
    Seismogram::new(nt, nx, 2e-3, 10.0, "amplitude", vec![0.0; nt * nx])
        .unwrap()
        .write(&sec)
        .unwrap();
    let model = tmp.path().join("v.f32");
    Grid2D::new(nx, nz, 10.0, 2.5, "m/s", vec![500.0; nx * nz])
        .unwrap()
        .write(&model)
        .unwrap();
    let out = tmp.path().join("o");
    let (code, _, stderr) = owwe(&[
        "migrate",
        "-o",
        dir_arg(&out),
        "--section",
        sec.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--terms",
        "40",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let img = Grid2D::read(&out.join("image.f32")).unwrap();
    assert_eq!((img.nx, img.nz), (nx, nz));
    assert!(img.data.iter().all(|v| *v == 0.0));
    let v = Grid2D::read(&out.join("velocity.f32")).unwrap();
    assert!(v.data.iter().all(|c| (*c - 250.0).abs() < 1e-4));
}

#[test]
fn migrate_rejects_missing_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, stderr) = owwe(&[
        "migrate",
        "-o",
        dir_arg(tmp.path()),
        "--section",
        "/nonexistent/s.f32",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("missing"));
}

#[test]
fn flat_reflector_migration_from_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("m.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"migrate","n_terms":150,"smoothing_passes":0}"#,
    )
    .unwrap();
    let out = tmp.path().join("o");
    let (code, stdout, stderr) = owwe(&[
        "migrate",
        "--config",
        cfg.to_str().unwrap(),
        "-o",
        dir_arg(&out),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("centroid"));
    let (_, header, rows) = read_csv(&out.join("image_profile.csv")).unwrap();
    assert_eq!(header, ["x_m", "peak_depth_m", "centroid_depth_m"]);
    let centroid: f64 = rows[60][2].parse().unwrap();
    assert!((centroid - 500.0).abs() <= 5.0, "{centroid}");
}

#[test]
fn eta_select_marks_the_chosen_candidate() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, stdout, stderr) = owwe(&[
        "eta-select",
        "-o",
        dir_arg(tmp.path()),
        "--terms",
        "600",
        "--t-max",
        "1",
    ]);
    assert_eq!(code, 0, "{stderr}");
    let (_, header, rows) = read_csv(&tmp.path().join("eta_select.csv")).unwrap();
    assert_eq!(header, ["eta", "projection_error", "selected"]);
    let last = rows.last().unwrap();
    assert_eq!(last[2], "1");
    assert!(last[1].parse::<f64>().unwrap() < 1e-10);
    assert!(rows[..rows.len() - 1].iter().all(|r| r[2] == "0"));
    assert!(stdout.starts_with("eta = "));
}

#[test]
fn unattainable_tolerance_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, stderr) = owwe(&[
        "eta-select",
        "-o",
        dir_arg(tmp.path()),
        "--terms",
        "20",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("eta"), "{stderr}");
    assert!(tmp.path().join("eta_select.csv").is_file());
}
