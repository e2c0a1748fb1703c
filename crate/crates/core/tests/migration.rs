use owwe::solver2d::*;
use owwe::SourceWavelet;

fn wavelet() -> SourceWavelet {
    SourceWavelet::new(0.0, 4.0, 3.0)
}

#[test]
fn reversal_is_an_involution() {
    let data: Vec<f64> = (0..12).map(|k| k as f64).collect();
    let s = ZeroOffsetSection::new(4, 3, 0.5, data).unwrap();
    let r = s.reversed();
    assert_eq!(&r.data[..3], &[9.0, 10.0, 11.0]);
    assert_eq!(r.reversed(), s);
    assert!((s.duration() - 1.5).abs() < 1e-15);
    assert!(ZeroOffsetSection::new(4, 3, 0.5, vec![0.0; 11]).is_err());
}

#[test]
fn flat_section_peaks_at_two_way_time() {
    let s = flat_reflector_section(5, 1501, 2e-3, 500.0, 500.0, &wavelet()).unwrap();
    // The wavelet is odd about its centre; its envelope peaks there.
    let col: Vec<f64> = (0..s.nt).map(|it| s.data[it * s.nx + 2].abs()).collect();
    let energy_time: f64 = col
        .iter()
        .enumerate()
        .map(|(it, v)| it as f64 * s.dt * v * v)
        .sum::<f64>()
        / col.iter().map(|v| v * v).sum::<f64>();
    assert!((energy_time - 2.0).abs() < 1e-6);
}

#[test]
fn diffraction_section_of_a_flat_reflector_arrives_at_two_way_time() {
    let depths = vec![500.0; 121];
    let s = diffraction_section(&depths, 10.0, 1501, 2e-3, 500.0, &wavelet()).unwrap();
    let col: Vec<f64> = (0..s.nt).map(|it| s.data[it * s.nx + 60]).collect();
    let peak =
        col.iter().enumerate().fold(
            (0, 0.0f64),
            |b, (it, v)| if v.abs() > b.1 { (it, v.abs()) } else { b },
        );
    // The stationary-phase sum is shifted by a fraction of a period.
    assert!((peak.0 as f64 * s.dt - 2.0).abs() < 0.35 / 3.0);
}

#[test]
fn flat_reflector_is_imaged_at_its_depth() {
    let (nx, hx, hz, depth) = (121, 10.0, 2.5, 500.0);
    let nz = 321;
    let sec = flat_reflector_section(nx, 1501, 2e-3, depth, 500.0, &wavelet()).unwrap();
    let model = VelocityModel2D::constant(nx, nz, hx, hz, 500.0).unwrap();
    let cfg = MigrationConfig {
        eta: 60.0,
        n_terms: 150,
        smoothing_passes: 0,
        solver: Solver2DConfig::default(),
    };
    let img = migrate(&sec, &model, &cfg).unwrap();
    let z = img.centroid_depth(nx / 2 - 10..nx / 2 + 10);
    assert!((z - depth).abs() <= 2.0 * hz, "imaged at {z}");
    assert!(img.velocity.c.iter().all(|v| (*v - 250.0).abs() < 1e-12));
}

#[test]
fn migration_checks_shapes() {
    let sec = flat_reflector_section(10, 100, 1e-2, 100.0, 500.0, &wavelet()).unwrap();
    let model = VelocityModel2D::constant(12, 21, 10.0, 2.5, 500.0).unwrap();
    let cfg = MigrationConfig {
        eta: 60.0,
        n_terms: 10,
        smoothing_passes: 0,
        solver: Solver2DConfig::default(),
    };
    assert!(migrate(&sec, &model, &cfg).is_err());
}
