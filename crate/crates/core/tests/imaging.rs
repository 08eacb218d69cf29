mod common;

use genspace::generative_space::Pol;
use genspace::imaging::{angular_spectrum, backproject, backproject_at, GridSpec, RangeProfile, VirtualElement};
use genspace::polarimetry::FabricSetup;
use genspace::scene::Scene;
use genspace::{Complex64, Error, Vec3};

use common::{case_setup, linspace, matched_filter_peak, noiseless, unit_scene};

type Profiles = Vec<(VirtualElement, RangeProfile)>;

fn acquire(setup: &FabricSetup, scene: &Scene) -> (Profiles, Vec<(Vec3, genspace::fmcw::BeatSignal)>) {
    let traj = setup.trajectory(&[Pol::H]).unwrap();
    let acq = setup.acquire(&traj, scene, &noiseless(), &[Pol::H]).unwrap();
    let mut profiles: Profiles = acq.iter().map(|a| (a.element, a.profile.clone())).collect();
    profiles.sort_by_key(|(el, _)| el.index);
    let signals = acq.into_iter().map(|a| (a.element.position, a.signal)).collect();
    (profiles, signals)
}

fn local_grid(center: Vec3) -> GridSpec {
    GridSpec {
        x_min: center[0] - 0.06,
        x_max: center[0] + 0.06,
        x_step: 0.002,
        z_min: center[2] - 0.03,
        z_max: center[2] + 0.03,
        z_step: 0.001,
        y_plane: 0.0,
    }
}

const TARGET: Vec3 = [0.05, 0.0, 2.0];

#[test]
fn one_element_peaks_on_its_range_circle() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &unit_scene(TARGET));
    let one = &profiles[10..11];
    let r_true = genspace::scene::range_to(&genspace::scene::PointScatterer {
        position: TARGET,
        scattering: genspace::scene::ScatteringMatrix::identity(),
    }, &one[0].0.position)
    .unwrap();
    let img = backproject(one, &local_grid(TARGET), setup.c_mps).unwrap();
    let p = img.peak_position();
    let el = one[0].0.position;
    let r_peak = ((p[0] - el[0]).powi(2) + (p[2] - el[2]).powi(2)).sqrt();
    assert!((r_peak - r_true).abs() < 0.5 * setup.c_mps / (2.0 * 300e6));
}

#[test]
fn full_aperture_agrees_with_matched_filter() {
    let setup = case_setup(3e8);
    let (profiles, signals) = acquire(&setup, &unit_scene(TARGET));
    let grid = GridSpec {
        x_min: 0.02,
        x_max: 0.08,
        x_step: 0.002,
        z_min: 1.985,
        z_max: 2.015,
        z_step: 0.001,
        y_plane: 0.0,
    };
    let img = backproject(&profiles, &grid, setup.c_mps).unwrap();
    let bp = img.peak_position();
    let mf = matched_filter_peak(
        &signals,
        &linspace(grid.x_min, grid.x_max, grid.nx()),
        &linspace(grid.z_min, grid.z_max, grid.nz()),
    );
    let range_cell = setup.c_mps / (2.0 * 21e9);
    let cross_cell = setup.c_mps / 70.5e9 * 2.0 / (2.0 * setup.geometry.length_m());
    assert!((bp[2] - mf[2]).abs() <= range_cell, "bp {bp:?} mf {mf:?}");
    assert!((bp[0] - mf[0]).abs() <= cross_cell, "bp {bp:?} mf {mf:?}");
}

#[test]
fn backprojection_is_linear() {
    let setup = case_setup(3e8);
    let (pa, _) = acquire(&setup, &unit_scene(TARGET));
    let (pb, _) = acquire(&setup, &unit_scene([-0.03, 0.0, 2.01]));
    let (alpha, beta) = (Complex64::new(0.3, 1.1), Complex64::new(-2.0, 0.5));
    let mixed: Profiles = pa
        .iter()
        .zip(&pb)
        .map(|((el, a), (_, b))| {
            let mut p = a.scaled(alpha);
            for (v, w) in p.values.iter_mut().zip(&b.values) {
                *v += beta * w;
            }
            (*el, p)
        })
        .collect();
    let pts: Vec<Vec3> = (0..25).map(|i| [-0.06 + 0.005 * i as f64, 0.0, 1.99 + 0.001 * i as f64]).collect();
    let ia = backproject_at(&pa, &pts, setup.c_mps).unwrap();
    let ib = backproject_at(&pb, &pts, setup.c_mps).unwrap();
    let im = backproject_at(&mixed, &pts, setup.c_mps).unwrap();
    let scale = ia.iter().chain(&ib).map(|z| z.norm()).fold(0.0, f64::max);
    for ((m, a), b) in im.iter().zip(&ia).zip(&ib) {
        assert!((m - (alpha * a + beta * b)).norm() <= 1e-10 * scale);
    }
}

#[test]
fn coherent_gain_grows_linearly() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &unit_scene(TARGET));
    let single: f64 = profiles
        .iter()
        .map(|p| backproject_at(std::slice::from_ref(p), &[TARGET], setup.c_mps).unwrap()[0].norm())
        .sum::<f64>()
        / profiles.len() as f64;
    for n in [8, 16, 32, 64] {
        let g = backproject_at(&profiles[..n], &[TARGET], setup.c_mps).unwrap()[0].norm();
        let ratio = g / (n as f64 * single);
        assert!((ratio - 1.0).abs() < 0.05, "n={n} ratio={ratio}");
    }
}

#[test]
fn sub_aperture_still_localizes() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &unit_scene(TARGET));
    let chain0: Profiles = profiles.iter().filter(|(el, _)| el.chain == 0).cloned().collect();
    assert_eq!(chain0.len(), 32);
    let img = backproject(&chain0, &local_grid(TARGET), setup.c_mps).unwrap();
    let p = img.peak_position();
    // half the band and half the aperture: cells double
    let range_cell = setup.c_mps / (2.0 * 10.5e9);
    let len = setup.geometry.spacing_m * 31.0;
    let cross_cell = setup.c_mps / 70.5e9 * 2.0 / (2.0 * len);
    assert!((p[2] - TARGET[2]).abs() <= range_cell, "{p:?}");
    assert!((p[0] - TARGET[0]).abs() <= cross_cell, "{p:?}");
}

#[test]
fn global_phase_leaves_magnitude_unchanged() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &unit_scene(TARGET));
    let rot = Complex64::from_polar(1.0, 1.234);
    let rotated: Profiles = profiles.iter().map(|(el, p)| (*el, p.scaled(rot))).collect();
    let grid = local_grid(TARGET);
    let a = backproject(&profiles, &grid, setup.c_mps).unwrap();
    let b = backproject(&rotated, &grid, setup.c_mps).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x.norm() - y.norm()).abs() <= 1e-12 * x.norm().max(1.0));
    }
    let ((ax, az, _), (bx, bz, _)) = (a.peak(), b.peak());
    assert_eq!((ax, az), (bx, bz));
}

#[test]
fn empty_scene_images_to_zero() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &Scene::new("empty", vec![]));
    let img = backproject(&profiles, &local_grid(TARGET), setup.c_mps).unwrap();
    assert!(img.values.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn grid_beyond_range_support_is_rejected() {
    let setup = case_setup(3e8);
    let (profiles, _) = acquire(&setup, &unit_scene(TARGET));
    let far = local_grid([0.0, 0.0, 500.0]);
    assert!(matches!(
        backproject(&profiles, &far, setup.c_mps),
        Err(Error::GridExceedsRangeSupport { .. })
    ));
}

fn far_target(setup: &FabricSetup, sin_theta: f64, r: f64) -> (Profiles, usize) {
    let cos = (1.0 - sin_theta * sin_theta).sqrt();
    let (profiles, _) = acquire(setup, &unit_scene([r * sin_theta, 0.0, r * cos]));
    let bin = (r / profiles[0].1.bin_size_m).round() as usize;
    (profiles, bin)
}

#[test]
fn angular_spectrum_finds_broadside() {
    let setup = case_setup(3e8);
    let (profiles, bin) = far_target(&setup, 0.0, 20.0);
    let spec = angular_spectrum(&profiles, bin, 64, 2000).unwrap();
    assert!(spec.peak_sin_theta().abs() <= spec.bin_width());
}

#[test]
fn angular_spectrum_finds_offset_bearing() {
    let setup = case_setup(3e8);
    let theta0: f64 = 0.01;
    let (profiles, bin) = far_target(&setup, theta0.sin(), 20.0);
    let spec = angular_spectrum(&profiles, bin, 64, 2000).unwrap();
    assert!((spec.peak_angle() - theta0).abs() <= spec.bin_width(), "peak {}", spec.peak_angle());

    let rot = Complex64::from_polar(1.0, -0.77);
    let rotated: Profiles = profiles.iter().map(|(el, p)| (*el, p.scaled(rot))).collect();
    let again = angular_spectrum(&rotated, bin, 64, 2000).unwrap();
    assert_eq!(again.peak_sin_theta(), spec.peak_sin_theta());
}

#[test]
fn angular_spectrum_reports_missing_elements() {
    let setup = case_setup(3e8);
    let (mut profiles, bin) = far_target(&setup, 0.0, 20.0);
    profiles.remove(17);
    match angular_spectrum(&profiles, bin, 64, 256) {
        Err(Error::MissingElements(v)) => assert_eq!(v, vec![17]),
        other => panic!("unexpected {other:?}"),
    }
}
