mod common;

use genspace::fmcw::{simulate_state, BeatSignal, NoiseConfig};
use genspace::generative_space::{ControlPoint, Pol};
use genspace::scene::{PointScatterer, ScatteringMatrix, Scene};
use genspace::Complex64;

use common::{case_setup, model_samples, noiseless, unit_scene};

fn first_points() -> (genspace::polarimetry::FabricSetup, Vec<ControlPoint>) {
    let setup = case_setup(3e8);
    let traj = setup.trajectory(&Pol::BOTH).unwrap();
    let pts = traj.points().iter().step_by(9).copied().collect();
    (setup, pts)
}

fn sim(setup: &genspace::polarimetry::FabricSetup, u: &ControlPoint, scene: &Scene, rx: Pol, noise: &NoiseConfig) -> BeatSignal {
    let chirp = setup.chirp_for(u.f.center_hz).unwrap();
    simulate_state(u, scene, &chirp, noise, rx, setup.c_mps).unwrap()
}

fn scaled(scene: &Scene, alpha: Complex64) -> Scene {
    let mut out = scene.clone();
    for s in &mut out.scatterers {
        s.scattering = s.scattering.scale(alpha);
    }
    out
}

fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn matches_independent_model() {
    let (setup, pts) = first_points();
    let target = [0.05, 0.0, 2.0];
    for u in &pts {
        let sig = sim(&setup, u, &unit_scene(target), u.s.pol_tx, &noiseless());
        let model = model_samples(&sig.chirp, &u.q.element_position, &target, setup.c_mps);
        assert!(max_rel(&sig.samples, &model) < 1e-9);
    }
}

#[test]
fn superposition_is_linear() {
    let (setup, pts) = first_points();
    let a = Scene::new(
        "a",
        vec![PointScatterer {
            position: [0.1, 0.0, 1.5],
            scattering: ScatteringMatrix::new(
                Complex64::new(0.7, 0.2),
                Complex64::new(0.1, -0.3),
                Complex64::new(0.1, -0.3),
                Complex64::new(-0.4, 0.5),
            ),
        }],
    );
    let b = unit_scene([-0.2, 0.0, 3.1]);
    let (alpha, beta) = (Complex64::new(1.3, -0.4), Complex64::new(-0.6, 2.0));
    let both = scaled(&a, alpha).union(&scaled(&b, beta));
    for u in &pts {
        for rx in Pol::BOTH {
            let sa = sim(&setup, u, &a, rx, &noiseless());
            let sb = sim(&setup, u, &b, rx, &noiseless());
            let sab = sim(&setup, u, &both, rx, &noiseless());
            let expect: Vec<Complex64> = sa.samples.iter().zip(&sb.samples).map(|(x, y)| alpha * x + beta * y).collect();
            assert!(max_rel(&sab.samples, &expect) < 1e-12);
        }
    }
}

#[test]
fn polarization_selects_one_entry() {
    let (setup, pts) = first_points();
    for tx in Pol::BOTH {
        for rx in Pol::BOTH {
            let mut s = ScatteringMatrix::ZERO;
            s.set_entry(tx, rx, Complex64::new(1.0, 0.0));
            let scene = Scene::new(
                "one",
                vec![PointScatterer {
                    position: [0.0, 0.0, 2.0],
                    scattering: s,
                }],
            );
            for u in &pts {
                for r in Pol::BOTH {
                    let p = sim(&setup, u, &scene, r, &noiseless()).power();
                    if u.s.pol_tx == tx && r == rx {
                        assert!((p - 1.0).abs() < 1e-9);
                    } else {
                        assert_eq!(p, 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn noise_is_seeded() {
    let (setup, pts) = first_points();
    let scene = unit_scene([0.05, 0.0, 2.0]);
    let u = &pts[3];
    let a = sim(&setup, u, &scene, Pol::H, &NoiseConfig::gaussian(10.0, 7));
    let b = sim(&setup, u, &scene, Pol::H, &NoiseConfig::gaussian(10.0, 7));
    let c = sim(&setup, u, &scene, Pol::H, &NoiseConfig::gaussian(10.0, 8));
    let d = sim(&setup, u, &scene, Pol::V, &NoiseConfig::gaussian(10.0, 7));
    assert_eq!(a.samples, b.samples);
    assert_ne!(a.samples, c.samples);
    assert_ne!(a.samples, d.samples);
}

#[test]
fn zero_range_is_rejected() {
    let (setup, pts) = first_points();
    let u = &pts[0];
    let scene = unit_scene(u.q.element_position);
    let chirp = setup.chirp_for(u.f.center_hz).unwrap();
    assert!(simulate_state(u, &scene, &chirp, &noiseless(), Pol::H, setup.c_mps).is_err());
}
