use std::f64::consts::FRAC_PI_2;

use egoflow::motion_model::{field_correspondences, ransac_pairs, Correspondence};
use egoflow::{
    average_gyro, compensate_rotation, fit_rigid_2d, ransac_iterations, ransac_rigid, CameraIntrinsics, Error,
    FlowField, GyroSample, MotionVector, RansacParams, RigidTransform2D,
};
use proptest::prelude::*;

fn cam() -> CameraIntrinsics {
    CameraIntrinsics::centered(640.0, 480, 480).unwrap()
}

/// Exact correspondences for every block centre of a 30x30 grid, relative to
/// the principal point.
fn grid_pairs(xf: &RigidTransform2D) -> Vec<Correspondence> {
    let field = FlowField::zeros(0, 0.0, 30, 30, 16);
    let c = cam();
    let (pairs, _) = field_correspondences(&field, (c.cx, c.cy));
    pairs
        .into_iter()
        .map(|p| Correspondence::new((p.src_u, p.src_v), xf.apply((p.src_u, p.src_v))))
        .collect()
}

#[test]
fn fit_examples() {
    let src = [(1.0, 2.0), (-3.0, 0.5), (4.0, -1.0)];
    let same: Vec<_> = src.iter().map(|&s| Correspondence::new(s, s)).collect();
    let x = fit_rigid_2d(&same).unwrap();
    assert_eq!((x.theta, x.tx, x.ty), (0.0, 0.0, 0.0));

    let shifted: Vec<_> = src.iter().map(|&(u, v)| Correspondence::new((u, v), (u + 4.0, v - 2.0))).collect();
    let x = fit_rigid_2d(&shifted).unwrap();
    assert!(x.theta.abs() < 1e-12 && (x.tx - 4.0).abs() < 1e-12 && (x.ty + 2.0).abs() < 1e-12);

    let rot = [
        Correspondence::new((1.0, 0.0), (0.0, 1.0)),
        Correspondence::new((0.0, 1.0), (-1.0, 0.0)),
    ];
    let x = fit_rigid_2d(&rot).unwrap();
    assert!((x.theta - FRAC_PI_2).abs() < 1e-12 && x.tx.abs() < 1e-12 && x.ty.abs() < 1e-12);
    assert!(rot.iter().all(|p| p.residual(&x) < 1e-12));

    assert!(matches!(fit_rigid_2d(&rot[..1]), Err(Error::Degenerate(_))));
    let coincident = [Correspondence::new((1.0, 1.0), (2.0, 2.0)); 3];
    assert!(matches!(fit_rigid_2d(&coincident), Err(Error::Degenerate(_))));
}

#[test]
fn clean_field_recovered_exactly() {
    let truth = RigidTransform2D::new(0.02, 5.0, -3.0);
    let out = ransac_pairs(&grid_pairs(&truth), &RansacParams::default()).unwrap();
    assert!((out.transform.theta - truth.theta).abs() <= 1e-6);
    assert!((out.transform.tx - truth.tx).abs() <= 1e-6 && (out.transform.ty - truth.ty).abs() <= 1e-6);
    assert_eq!(out.inlier_count, 900);
}

#[test]
fn zero_outliers_equals_plain_fit() {
    let truth = RigidTransform2D::new(-0.01, 2.5, 7.0);
    let pairs: Vec<_> = grid_pairs(&truth)
        .into_iter()
        .enumerate()
        .map(|(k, p)| Correspondence {
            dst_u: p.dst_u + ((k * 7919) % 11) as f64 * 0.05 - 0.25,
            ..p
        })
        .collect();
    let all = fit_rigid_2d(&pairs).unwrap();
    let r = ransac_pairs(&pairs, &RansacParams::default()).unwrap();
    assert_eq!(r.inlier_count, pairs.len());
    assert!((r.transform.theta - all.theta).abs() < 1e-9);
    assert!((r.transform.tx - all.tx).abs() < 1e-9 && (r.transform.ty - all.ty).abs() < 1e-9);
}

#[test]
fn single_vector_has_no_consensus() {
    let f = FlowField::new(0, 0.0, 1, 1, 16, vec![MotionVector::new(2, 2, 0)]).unwrap();
    assert!(matches!(
        ransac_rigid(&f, &cam(), &RansacParams::default()),
        Err(Error::NoConsensus { .. })
    ));
}

#[test]
fn ransac_deterministic_and_mask_by_block() {
    let mut f = FlowField::zeros(0, 0.0, 30, 30, 16);
    for (k, v) in f.vectors.iter_mut().enumerate() {
        *v = if k % 3 == 0 {
            MotionVector::new((k as i32 * 37) % 120 - 60, (k as i32 * 53) % 120 - 60, 0)
        } else {
            MotionVector::new(-8, 4, 0)
        };
    }
    f.vectors[5] = MotionVector::new(0, 0, MotionVector::REJECTED_SAD);
    let p = RansacParams::default();
    let a = ransac_rigid(&f, &cam(), &p).unwrap();
    let b = ransac_rigid(&f, &cam(), &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.inliers.len(), 900);
    assert!(!a.inliers[5]);
    assert_eq!(a.inliers.iter().filter(|&&m| m).count(), a.inlier_count);
    assert!((a.transform.tx + 8.0).abs() < 1e-9 && (a.transform.ty - 4.0).abs() < 1e-9);
}

#[test]
fn iteration_formula() {
    assert_eq!(ransac_iterations(0.85, 2, 0.99).unwrap(), 203);
    assert_eq!(ransac_iterations(0.0, 2, 0.99).unwrap(), 1);
    assert_eq!(ransac_iterations(0.5, 2, 0.99).unwrap(), 17);
    assert!(ransac_iterations(1.0, 2, 0.99).is_err());
    assert!(ransac_iterations(0.5, 0, 0.99).is_err());
    assert!(ransac_iterations(0.5, 2, 1.0).is_err());
}

proptest! {
    #[test]
    fn iterations_monotone(e1 in 0.0f64..0.95, e2 in 0.0f64..0.95, p1 in 0.5f64..0.999, p2 in 0.5f64..0.999) {
        let (elo, ehi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (plo, phi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(ransac_iterations(elo, 2, plo).unwrap() <= ransac_iterations(ehi, 2, plo).unwrap());
        prop_assert!(ransac_iterations(elo, 2, plo).unwrap() <= ransac_iterations(elo, 2, phi).unwrap());
    }
}

#[test]
fn gyro_average_examples() {
    let constant: Vec<_> = (0..20)
        .map(|j| GyroSample {
            timestamp: j as f64 * 0.01,
            wx: 0.1,
            wy: -0.2,
            wz: 0.05,
        })
        .collect();
    let (wx, wy, wz) = average_gyro(&constant, 0.03, 0.12).unwrap();
    assert!((wx - 0.1).abs() < 1e-12 && (wy + 0.2).abs() < 1e-12 && (wz - 0.05).abs() < 1e-12);

    let ramp: Vec<_> = (0..=1000)
        .map(|j| GyroSample {
            timestamp: j as f64 * 1e-3,
            wx: j as f64 * 1e-3,
            wy: 0.0,
            wz: 0.0,
        })
        .collect();
    assert!((average_gyro(&ramp, 0.0, 1.0).unwrap().0 - 0.5).abs() < 1e-3);

    let before = [
        GyroSample { timestamp: 0.0, wx: 1.0, wy: 1.0, wz: 1.0 },
        GyroSample { timestamp: 0.1, wx: 0.3, wy: 0.2, wz: 0.1 },
    ];
    assert_eq!(average_gyro(&before, 5.0, 6.0).unwrap(), (0.3, 0.2, 0.1));
    assert!(average_gyro(&[], 0.0, 1.0).is_err());
}

#[test]
fn compensation_examples() {
    let c = cam();
    assert_eq!(compensate_rotation((1.5, -2.0), (0.0, 0.0), 0.02, &c).unwrap(), (1.5, -2.0));

    let (wy, dt) = (0.3f64, 1.0 / 30.0);
    let (rx, ry) = compensate_rotation((640.0 * (wy * dt).tan(), 0.0), (0.0, wy), dt, &c).unwrap();
    assert!(rx.abs() < 1e-12 && ry == 0.0);

    let (rx, _) = compensate_rotation((0.0, 0.0), (0.0, 0.1), 1.0 / 30.0, &c).unwrap();
    assert!((rx + 2.1334).abs() < 1e-4);

    // wx moves the image along v
    let (rx, ry) = compensate_rotation((0.0, 0.0), (0.1, 0.0), 1.0 / 30.0, &c).unwrap();
    assert!(rx == 0.0 && (ry + 2.1334).abs() < 1e-4);

    assert!(compensate_rotation((0.0, 0.0), (16.0, 0.0), 0.1, &c).is_err());
}
