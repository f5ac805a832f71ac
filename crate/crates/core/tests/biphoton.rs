use std::f64::consts::PI;

use klyshko_core::analysis::{argmax, envelope_first_zero, fringe_period, magnification, sharpness, visibility};
use klyshko_core::biphoton::{
    coincidence_amplitude_matrix, coincidence_rate, copropagating_intensity, double_slit_grid,
    ghost_image, ghost_interference, lithography_pattern, singles_pattern, two_path_pattern, Arm, BiphotonSetup,
    DetectionMode, GhostImage, GhostInterference, SourceModel,
};
use klyshko_core::wavefield::{
    apply_system, propagate_fresnel, ComplexField1D, ComplexMatrix, Grid1D, OpticalSystem, TransmissionMask,
};
use klyshko_core::{CoincidencePattern, Error, PatternMetadata};
use num_complex::Complex64;

const LAMBDA: f64 = 702e-9;

fn small_setup(source: SourceModel) -> BiphotonSetup {
    // n = 64, dx = 1e-5: hops up to ~9 mm pass the sampling guard
    let g = Grid1D::new(64, 1e-5).unwrap();
    let signal = OpticalSystem::new()
        .free(3e-3)
        .mask(TransmissionMask::offset_slit(1.7e-4, 2e-5).unwrap())
        .lens(0.02)
        .free(4e-3);
    let idler = OpticalSystem::new().free(5e-3).mask(TransmissionMask::double_slit(4e-5, 1.2e-4).unwrap()).free(2e-3);
    BiphotonSetup::new(source, signal, idler, g).unwrap()
}

/// Arm kernel `K[x, xc]` assembled column by column from propagated point
/// sources, without the matrix helpers.
fn arm_kernel(arm: &OpticalSystem, g: Grid1D) -> Vec<Vec<Complex64>> {
    let cols: Vec<Vec<Complex64>> = (0..g.n())
        .map(|j| {
            let src = ComplexField1D::point_source(g, LAMBDA, j).unwrap();
            apply_system(&src, arm).unwrap().into_amplitude()
        })
        .collect();
    (0..g.n()).map(|i| (0..g.n()).map(|j| cols[j][i]).collect()).collect()
}

fn max_rel(a: &ComplexMatrix, b: &dyn Fn(usize, usize) -> Complex64) -> f64 {
    let n = a.n();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            d = d.max((a.get(i, j) - b(i, j)).norm());
        }
    }
    d / a.max_abs()
}

#[test]
fn matrix_engine_matches_triple_sum() {
    let setup = small_setup(SourceModel::degenerate(LAMBDA));
    let g = setup.grid;
    let n = g.n();
    let ks = arm_kernel(&setup.signal_arm, g);
    let ki = arm_kernel(&setup.idler_arm, g);
    let mut brute = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for x1 in 0..n {
        for x2 in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for xc in 0..n {
                acc += ks[x1][xc] * ki[x2][xc] * g.dx();
            }
            brute[x1][x2] = acc;
        }
    }
    let a = coincidence_amplitude_matrix(&setup).unwrap();
    let err = max_rel(&a, &|i, j| brute[i][j]);
    assert!(err < 1e-10, "{err}");

    // advanced-wave rows against the same oracle
    let fixed = coincidence_rate(&setup, DetectionMode::FixedD1ScanD2 { x1: g.x(29) }).unwrap();
    let peak = brute[29].iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    for x2 in 0..n {
        assert!((fixed[x2] - brute[29][x2].norm_sqr()).abs() < 1e-10 * peak);
    }
    let diag = coincidence_rate(&setup, DetectionMode::CoincidentScan).unwrap();
    let dpeak = (0..n).map(|i| brute[i][i].norm_sqr()).fold(0.0, f64::max);
    for i in 0..n {
        assert!((diag[i] - brute[i][i].norm_sqr()).abs() < 1e-10 * dpeak);
    }
    let bucket = coincidence_rate(&setup, DetectionMode::BucketD1ScanD2 { window: None }).unwrap();
    let want: Vec<f64> = (0..n).map(|x2| (0..n).map(|x1| brute[x1][x2].norm_sqr() * g.dx()).sum()).collect();
    let bpeak = want.iter().cloned().fold(0.0, f64::max);
    for x2 in 0..n {
        assert!((bucket[x2] - want[x2]).abs() < 1e-10 * bpeak);
    }
}

#[test]
fn gaussian_pump_matches_quadruple_sum() {
    let sigma = 3e-5;
    let setup = small_setup(SourceModel::degenerate(LAMBDA).with_gaussian_pump(sigma));
    let g = setup.grid;
    let n = g.n();
    let ks = arm_kernel(&setup.signal_arm, g);
    let ki = arm_kernel(&setup.idler_arm, g);
    let c = |a: usize, b: usize| (-(g.x(a) - g.x(b)).powi(2) / (4.0 * sigma * sigma)).exp();
    // contract over xi first, then xs
    let mut half = vec![vec![Complex64::new(0.0, 0.0); n]; n]; // [xs][x2]
    for xs in 0..n {
        for x2 in 0..n {
            half[xs][x2] = (0..n).map(|xi| ki[x2][xi] * c(xs, xi)).sum::<Complex64>() * g.dx();
        }
    }
    let a = coincidence_amplitude_matrix(&setup).unwrap();
    let brute = |x1: usize, x2: usize| (0..n).map(|xs| ks[x1][xs] * half[xs][x2]).sum::<Complex64>() * g.dx();
    let err = max_rel(&a, &brute);
    assert!(err < 1e-10, "{err}");

    let row = coincidence_rate(&setup, DetectionMode::FixedD1ScanD2 { x1: g.x(35) }).unwrap();
    let peak = (0..n).map(|j| brute(35, j).norm_sqr()).fold(0.0, f64::max);
    for x2 in 0..n {
        assert!((row[x2] - brute(35, x2).norm_sqr()).abs() < 1e-10 * peak);
    }
}

#[test]
fn empty_arms_give_point_correlation() {
    let g = Grid1D::new(64, 1e-5).unwrap();
    let setup = BiphotonSetup::new(SourceModel::degenerate(LAMBDA), OpticalSystem::new(), OpticalSystem::new(), g).unwrap();
    let a = coincidence_amplitude_matrix(&setup).unwrap();
    let err = max_rel(&a, &|i, j| Complex64::new(if i == j { 1.0 / g.dx() } else { 0.0 }, 0.0));
    assert!(err < 1e-12, "{err}");
}

#[test]
fn mismatched_sampling_rejected() {
    let g = Grid1D::new(64, 1e-5).unwrap();
    let r = BiphotonSetup::new(SourceModel::degenerate(LAMBDA), OpticalSystem::new().free(1.0), OpticalSystem::new(), g);
    assert!(matches!(r, Err(Error::SamplingGuard { .. })));
    let t = TransmissionMask::tabulated(vec![Complex64::new(1.0, 0.0); 32]).unwrap();
    let r = BiphotonSetup::new(SourceModel::degenerate(LAMBDA), OpticalSystem::new().mask(t), OpticalSystem::new(), g);
    assert!(matches!(r, Err(Error::GridMismatch(_))));
}

#[test]
fn ghost_interference_follows_young_formula() {
    for &(a, d, z2) in &[(5e-5, 2e-4, 1.0), (5e-5, 1.5e-4, 0.8), (6e-5, 2.5e-4, 1.2), (4e-5, 1.6e-4, 0.6)] {
        let p = GhostInterference::new(LAMBDA, a, d, 0.25, z2, 4096).unwrap();
        let pat = ghost_interference(&p).unwrap();
        let period = fringe_period(&pat, None).unwrap();
        let zero = envelope_first_zero(&pat).unwrap();
        let (wp, wz) = (LAMBDA * z2 / d, LAMBDA * z2 / a);
        assert!((period / wp - 1.0).abs() < 0.01, "a={a} d={d} z2={z2}: period {period} vs {wp}");
        assert!((zero / wz - 1.0).abs() < 0.01, "a={a} d={d} z2={z2}: zero {zero} vs {wz}");
    }
}

#[test]
fn ghost_interference_default_numbers() {
    let p = GhostInterference::new(LAMBDA, 5e-5, 2e-4, 0.25, 1.0, 4096).unwrap();
    let pat = ghost_interference(&p).unwrap();
    assert!((fringe_period(&pat, None).unwrap() / 3.51e-3 - 1.0).abs() < 0.01);
    assert!((envelope_first_zero(&pat).unwrap() / 1.404e-2 - 1.0).abs() < 0.01);
    let mid = pat.nearest(0.0);
    assert_eq!(pat.rate()[mid], 1.0);
}

#[test]
fn wider_separation_refines_fringes_only() {
    let a = 6e-5;
    let g = GhostInterference::default_grid(8192, LAMBDA, a, 1.5).unwrap();
    let run = |d: f64| {
        let mut p = GhostInterference::new(LAMBDA, a, d, 0.25, 1.5, 8192).unwrap();
        p.grid = g;
        let pat = ghost_interference(&p).unwrap();
        (fringe_period(&pat, None).unwrap(), envelope_first_zero(&pat).unwrap())
    };
    let (p1, e1) = run(2e-4);
    let (p2, e2) = run(3e-4);
    assert!((p1 / p2 - 1.5).abs() < 0.015, "{p1} {p2}");
    assert!((e1 / e2 - 1.0).abs() < 0.01, "{e1} {e2}");
}

#[test]
fn far_field_guard_rejects_short_distance() {
    let r = GhostInterference::new(LAMBDA, 5e-5, 2e-4, 0.1, 0.3, 4096).and_then(|p| ghost_interference(&p));
    match r {
        Err(Error::FarField { required, .. }) => assert!((required - 10.0 * 4e-8 / LAMBDA).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_path_is_pure_cosine() {
    let (d, z2) = (2e-4, 1.0);
    let g = Grid1D::new(4096, 1e-5).unwrap();
    let pat = two_path_pattern(LAMBDA, d, z2, g).unwrap();
    assert!(pat.rate()[g.n() / 2] > 1.0 - 1e-12);
    for (x, r) in pat.coordinate().iter().zip(pat.rate()) {
        let want = (PI * d * x / (LAMBDA * z2)).cos().powi(2);
        assert!((r - want).abs() < 1e-9);
    }
    let zero = LAMBDA * z2 / (2.0 * d);
    assert!(pat.rate_at(zero) < 1e-4);
}

#[test]
fn two_path_is_narrow_slit_limit() {
    let (d, z2) = (2e-4, 1.0);
    // slit centres on cell centres and one-cell slits
    let n = 16384;
    let base = GhostInterference::default_grid(n, LAMBDA, 5e-5, z2).unwrap();
    let cells = (0.5 * d / base.dx()).floor();
    let g = Grid1D::new(n, 0.5 * d / cells).unwrap();
    let mut p = GhostInterference::new(LAMBDA, g.dx(), d, 0.25, z2, n).unwrap();
    p.grid = g;
    let engine = ghost_interference(&p).unwrap();
    let analytic = two_path_pattern(LAMBDA, d, z2, g).unwrap();
    // A one-cell source is band-limited: its propagated chirp only reaches
    // lambda z / (2 dx) and rings near that edge. Compare four fringes either
    // side, far from the edge, after rescaling to the peak in that window.
    let window = 4.0 * LAMBDA * z2 / d;
    let inside: Vec<usize> = (0..g.n()).filter(|&i| g.x(i).abs() <= window).collect();
    let peak = |r: &[f64]| inside.iter().map(|&i| r[i]).fold(0.0, f64::max);
    let (pe, pa) = (peak(engine.rate()), peak(analytic.rate()));
    let worst = inside.iter().map(|&i| (engine.rate()[i] / pe - analytic.rate()[i] / pa).abs()).fold(0.0, f64::max);
    assert!(worst < 0.02, "{worst}");
}

fn double_slit_object() -> TransmissionMask {
    TransmissionMask::double_slit(5e-5, 2e-4).unwrap()
}

#[test]
fn crystal_position_does_not_matter() {
    let g = GhostImage::default_grid(2048, LAMBDA, 1.3).unwrap();
    let mut p = GhostImage::new(LAMBDA, 0.4, 0.6, 1.2, double_slit_object(), g);
    let reference = ghost_image(&p).unwrap();
    for &c in &[0.3, 0.77, 1.2] {
        p.crystal_offset = c;
        let moved = ghost_image(&p).unwrap();
        let worst = reference.rate().iter().zip(moved.rate()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "offset {c}: {worst}");
    }
}

#[test]
fn sharpest_plane_obeys_thin_lens_equation() {
    for &(f, s_o) in &[(0.4, 0.6), (0.3, 0.6), (0.25, 0.5)] {
        let s_i = GhostImage::image_distance(f, s_o).unwrap();
        let planes: Vec<f64> = (-4..=4).map(|k| s_i * (1.0 + 0.05 * k as f64)).collect();
        let g = GhostImage::default_grid(4096, LAMBDA, planes[8].max(s_o)).unwrap();
        let scores: Vec<f64> = planes
            .iter()
            .map(|&s| sharpness(&ghost_image(&GhostImage::new(LAMBDA, f, s_o, s, double_slit_object(), g)).unwrap()))
            .collect();
        assert_eq!(argmax(&scores), Some(4), "f={f} S_o={s_o}: {scores:?}");

        let focused = ghost_image(&GhostImage::new(LAMBDA, f, s_o, s_i, double_slit_object(), g)).unwrap();
        let m = magnification(&focused, 2e-4).unwrap();
        assert!((m / (s_i / s_o) - 1.0).abs() < 0.02, "f={f} S_o={s_o}: m={m}");
    }
}

#[test]
fn image_is_inverted() {
    let g = GhostImage::default_grid(4096, LAMBDA, 1.2).unwrap();
    let object = TransmissionMask::offset_slit(8e-5, 2e-4).unwrap();
    let img = ghost_image(&GhostImage::new(LAMBDA, 0.4, 0.6, 1.2, object, g)).unwrap();
    let peak = img.coordinate()[argmax(img.rate()).unwrap()];
    assert!((peak + 4e-4).abs() < 6e-5, "{peak}");
}

#[test]
fn defocused_image_is_unresolved() {
    let g = GhostImage::default_grid(4096, LAMBDA, 2.4).unwrap();
    let img = ghost_image(&GhostImage::new(LAMBDA, 0.4, 0.6, 2.4, double_slit_object(), g)).unwrap();
    assert_eq!(magnification(&img, 2e-4), Err(Error::Unresolved));
}

#[test]
fn open_object_images_flat() {
    let g = GhostImage::default_grid(1024, LAMBDA, 1.2).unwrap();
    let img = ghost_image(&GhostImage::new(LAMBDA, 0.4, 0.6, 1.2, TransmissionMask::Open, g)).unwrap();
    let min = img.rate().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(min > 1.0 - 1e-9, "{min}");
}

#[test]
fn pair_at_half_wavelength_matches_joint_amplitude() {
    // both photons cross the slits together and are detected at the same x:
    // A(x, x) = sum_c t(c)^2 h(x - c)^2 dx with the analytic kernel h
    let g = Grid1D::new(1024, 2e-6).unwrap();
    let z = 0.01;
    let (a, d) = (4e-5, 1.2e-4);
    let slits = TransmissionMask::double_slit(a, d).unwrap();
    let t = slits.transmission(&g).unwrap();
    let h = |u: f64| Complex64::from_polar(1.0, PI * u * u / (LAMBDA * z)) / Complex64::new(0.0, LAMBDA * z).sqrt();
    let joint: Vec<f64> = g
        .coordinates()
        .into_iter()
        .map(|x| {
            let amp: Complex64 = (0..g.n()).filter(|&c| t[c].re > 0.0).map(|c| t[c] * t[c] * h(x - g.x(c)).powi(2)).sum();
            (amp * g.dx()).norm_sqr()
        })
        .collect();
    let joint = CoincidencePattern::on_grid(g, joint, PatternMetadata::new("joint", g)).unwrap();
    let single = CoincidencePattern::on_grid(
        g,
        copropagating_intensity(&slits, z, LAMBDA, g).unwrap(),
        PatternMetadata::new("pair", g),
    )
    .unwrap();
    // the squared kernel is resolved on this grid while |x - c| < lambda z / (4 dx)
    let reach = LAMBDA * z / (4.0 * g.dx()) - 0.5 * (d + a);
    let mut worst: f64 = 0.0;
    for (i, x) in g.coordinates().into_iter().enumerate() {
        if x.abs() <= reach {
            worst = worst.max((joint.rate()[i] - single.rate()[i]).abs());
        }
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn lithography_halves_period_and_envelope() {
    let (a, d, z) = (5e-5, 2e-4, 1.0);
    let g = double_slit_grid(4096, LAMBDA, a, z).unwrap();
    let quantum = lithography_pattern(a, d, z, LAMBDA, g).unwrap();
    let plane = ComplexField1D::new(g, LAMBDA, double_slit_object().transmission(&g).unwrap()).unwrap();
    let young = propagate_fresnel(&plane, z).unwrap().intensity();
    let classical = CoincidencePattern::on_grid(g, young, PatternMetadata::new("young", g)).unwrap();
    let rp = fringe_period(&classical, None).unwrap() / fringe_period(&quantum, None).unwrap();
    let re = envelope_first_zero(&classical).unwrap() / envelope_first_zero(&quantum).unwrap();
    assert!((rp - 2.0).abs() < 0.02, "{rp}");
    assert!((re - 2.0).abs() < 0.04, "{re}");
    assert_eq!(argmax(quantum.rate()), Some(g.n() / 2));
}

#[test]
fn idler_singles_are_flat() {
    let p = GhostInterference::new(LAMBDA, 5e-5, 2e-4, 0.25, 1.0, 4096).unwrap();
    let singles = singles_pattern(&p.setup().unwrap(), Arm::Idler).unwrap();
    let v = visibility(&singles, LAMBDA / 2e-4).unwrap();
    assert!(v < 0.02, "{v}");
}

#[test]
fn singles_without_masks_are_flat() {
    let g = Grid1D::new(512, 1e-5).unwrap();
    let setup = BiphotonSetup::new(
        SourceModel::degenerate(LAMBDA),
        OpticalSystem::new().free(0.05).lens(0.1),
        OpticalSystem::new().free(0.03),
        g,
    )
    .unwrap();
    for arm in [Arm::Signal, Arm::Idler] {
        let s = singles_pattern(&setup, arm).unwrap();
        let min = s.rate().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.995, "{arm:?}: {min}");
    }
}

#[test]
fn signal_singles_behind_slits_show_transmission() {
    let g = Grid1D::new(512, 1e-5).unwrap();
    let slits = TransmissionMask::double_slit(5e-5, 2e-4).unwrap();
    let t = slits.transmission(&g).unwrap();
    let setup = BiphotonSetup::new(
        SourceModel::degenerate(LAMBDA),
        OpticalSystem::new().mask(slits),
        OpticalSystem::new().free(0.03),
        g,
    )
    .unwrap();
    let s = singles_pattern(&setup, Arm::Signal).unwrap();
    for (r, t) in s.rate().iter().zip(&t) {
        assert!((r - t.norm_sqr()).abs() < 1e-9);
    }
}

#[test]
fn emitted_patterns_are_normalised() {
    let gi = ghost_interference(&GhostInterference::new(LAMBDA, 5e-5, 2e-4, 0.25, 1.0, 1024).unwrap()).unwrap();
    let g = GhostImage::default_grid(1024, LAMBDA, 1.2).unwrap();
    let im = ghost_image(&GhostImage::new(LAMBDA, 0.4, 0.6, 1.2, double_slit_object(), g)).unwrap();
    let lg = double_slit_grid(1024, LAMBDA, 5e-5, 1.0).unwrap();
    let li = lithography_pattern(5e-5, 2e-4, 1.0, LAMBDA, lg).unwrap();
    let tp = two_path_pattern(LAMBDA, 2e-4, 1.0, lg).unwrap();
    for p in [gi, im, li, tp] {
        let max = p.rate().iter().cloned().fold(0.0, f64::max);
        assert_eq!(max, 1.0, "{}", p.metadata.preset);
        assert!(p.rate().iter().all(|r| *r >= 0.0));
    }
}

#[test]
fn opaque_object_is_zero_pattern() {
    let g = GhostImage::default_grid(256, LAMBDA, 1.2).unwrap();
    let opaque = TransmissionMask::tabulated(vec![Complex64::new(0.0, 0.0); 256]).unwrap();
    assert_eq!(ghost_image(&GhostImage::new(LAMBDA, 0.4, 0.6, 1.2, opaque, g)), Err(Error::ZeroPattern));
}
