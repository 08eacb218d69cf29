mod common;

use genspace::generative_space::Pol;
use genspace::polarimetry::{acquire_pol_frame, dof_count, estimate_scattering, Channel, PolFrame};
use genspace::scene::{PointScatterer, ScatteringMatrix, Scene};
use genspace::Complex64;

use common::{case_setup, noiseless};

const LOC: [f64; 3] = [0.05, 0.0, 2.0];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn frame_for(s: ScatteringMatrix, spreading: bool) -> PolFrame {
    let mut scene = Scene::new(
        "target",
        vec![PointScatterer {
            position: LOC,
            scattering: s,
        }],
    );
    scene.spreading_loss = spreading;
    acquire_pol_frame(&scene, &case_setup(3e8), &noiseless()).unwrap()
}

fn rel_err(est: &ScatteringMatrix, truth: &ScatteringMatrix) -> f64 {
    est.sub(truth).frobenius_norm() / truth.frobenius_norm()
}

#[test]
fn closure_on_canonical_targets() {
    let zero = c(0.0, 0.0);
    let cases = [
        ScatteringMatrix::identity(),
        ScatteringMatrix::new(c(1.0, 0.0), zero, zero, c(-1.0, 0.0)),
        ScatteringMatrix::new(zero, c(0.0, 1.0), c(0.0, 1.0), zero),
    ];
    for s in cases {
        assert!(s.is_reciprocal());
        let est = estimate_scattering(&frame_for(s, false), &LOC).unwrap();
        assert!(rel_err(&est, &s) <= 1e-6, "{s:?} -> {est:?}");
    }
}

#[test]
fn closure_with_spreading_loss() {
    let s = ScatteringMatrix::new(c(0.4, 0.1), c(0.0, -0.2), c(0.0, -0.2), c(0.9, 0.0));
    let est = estimate_scattering(&frame_for(s, true), &LOC).unwrap();
    assert!(rel_err(&est, &s) <= 1e-6);
}

#[test]
fn frame_shape() {
    let f = frame_for(ScatteringMatrix::identity(), false);
    assert_eq!(f.channels.len(), 4);
    for ch in &f.channels {
        assert_eq!(ch.profiles.len(), 64);
    }
    assert_eq!(f.slot_span, 64);
    assert_eq!(dof_count(f.n_vir()), 256);
}

#[test]
fn channels_are_isolated() {
    for target in Channel::ALL {
        let mut s = ScatteringMatrix::ZERO;
        s.set_entry(target.tx, target.rx, c(1.0, 0.0));
        let f = frame_for(s, false);
        for ch in &f.channels {
            let energy: f64 = ch.profiles.iter().flat_map(|(_, p)| &p.values).map(|z| z.norm_sqr()).sum();
            if ch.channel == target {
                assert!(energy > 0.0);
            } else {
                assert_eq!(energy, 0.0, "{} leaked into {}", target.label(), ch.channel.label());
            }
        }
    }
}

#[test]
fn estimate_is_linear_in_scale() {
    let s = ScatteringMatrix::new(c(0.8, -0.1), c(0.2, 0.3), c(0.2, 0.3), c(-0.5, 0.6));
    let base = estimate_scattering(&frame_for(s, false), &LOC).unwrap();
    for alpha in [c(2.5, 0.0), c(0.0, -1.0), c(-0.3, 0.7)] {
        let est = estimate_scattering(&frame_for(s.scale(alpha), false), &LOC).unwrap();
        let want = base.scale(alpha);
        assert!(est.sub(&want).frobenius_norm() <= 1e-9 * want.frobenius_norm());
    }
}

#[test]
fn single_entry_perturbation_stays_local() {
    let s = ScatteringMatrix::identity();
    let base = estimate_scattering(&frame_for(s, false), &LOC).unwrap();
    let mut bumped = s;
    bumped.set_entry(Pol::V, Pol::H, c(0.25, 0.0));
    let est = estimate_scattering(&frame_for(bumped, false), &LOC).unwrap();
    let delta = est.sub(&base);
    for ch in Channel::ALL {
        let d = delta.entry(ch.tx, ch.rx);
        if ch.tx == Pol::V && ch.rx == Pol::H {
            assert!((d - c(0.25, 0.0)).norm() < 1e-9);
        } else {
            assert!(d.norm() < 1e-12);
        }
    }
}

#[test]
fn channel_labels_read_receive_then_transmit() {
    let labels: Vec<String> = Channel::ALL.iter().map(|c| c.label()).collect();
    assert_eq!(labels, ["hh", "hv", "vh", "vv"]);
    assert_eq!(Channel::ALL[1], Channel { tx: Pol::V, rx: Pol::H });
}
