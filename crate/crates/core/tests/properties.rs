use std::collections::{BTreeMap, BTreeSet};

use num_complex::{Complex, Complex64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdbev::baselines::{beamform_projection, range_energy_profile, range_energy_projection};
use rdbev::container::FrameRecord;
use rdbev::dataset::split_sequences;
use rdbev::lidar::{first_hit, simulate_lidar, LidarConfig};
use rdbev::metrics::average_precision_map;
use rdbev::pipeline::{generate_frame, GenerateConfig};
use rdbev::radar::{collapse_dim, normalize_rd, simulate_rd, CollapseDim, PropagationParams};
use rdbev::rd::RdShape;
use rdbev::supervision::supervise_cloud;
use rdbev::{hfov_mask, world_to_cell, BevGridSpec, Chirp, PredictionMap, RadarConfig, RdFrame, Scatterer, Scene};

fn quiet() -> RadarConfig {
    RadarConfig {
        snr_db: f64::INFINITY,
        ..RadarConfig::default()
    }
}

fn target() -> impl Strategy<Value = Scatterer> {
    (4.0..60.0f64, -30.0..30.0f64, 0.2..3.0f64, -12.0..12.0f64).prop_map(|(r, az, refl, v)| {
        let a = az.to_radians();
        Scatterer {
            reflectivity: refl,
            vx: v * a.cos(),
            vy: v * a.sin(),
            ..Scatterer::polar(r, az)
        }
    })
}

fn max_abs(frame: &RdFrame<f64>) -> f64 {
    frame.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_frame(shape: RdShape, seed: u64) -> RdFrame<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..shape.len())
        .map(|_| {
            if rng.random_bool(0.1) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            }
        })
        .collect();
    RdFrame::from_data(shape, data, "test").unwrap()
}

fn small_shape() -> impl Strategy<Value = RdShape> {
    (1..3usize, 1..5usize, 1..6usize, 1..6usize).prop_map(|(chirps, rx, range, doppler)| RdShape {
        chirps,
        rx,
        range,
        doppler,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rd_is_linear_in_scatterers(a in target(), b in target(), k in 0.1..4.0f64) {
        let radar = quiet();
        let prop = PropagationParams::default();
        let fa = simulate_rd(&Scene::new(vec![a]), &radar, &prop).unwrap();
        let fb = simulate_rd(&Scene::new(vec![b]), &radar, &prop).unwrap();
        let both = simulate_rd(&Scene::new(vec![a, b]), &radar, &prop).unwrap();
        let scaled = simulate_rd(&Scene::new(vec![Scatterer { reflectivity: a.reflectivity * k, ..a }]), &radar, &prop).unwrap();
        let tol = 1e-12 * (max_abs(&fa) + max_abs(&fb));
        for i in 0..both.data().len() {
            prop_assert!((both.data()[i] - fa.data()[i] - fb.data()[i]).norm() <= tol);
            prop_assert!((scaled.data()[i] - fa.data()[i] * k).norm() <= k * tol);
        }
    }

    #[test]
    fn chirp_b_over_a_is_one_complex_factor(t in target()) {
        let radar = quiet();
        let f = simulate_rd(&Scene::new(vec![t]), &radar, &PropagationParams::default()).unwrap();
        let s = f.shape();
        let floor = 1e-6 * max_abs(&f);
        let mut ratio: Option<Complex64> = None;
        for j in 0..s.rx {
            for r in 0..s.range {
                for d in 0..s.doppler {
                    let a = f.get(0, j, r, d);
                    if a.norm() <= floor {
                        continue;
                    }
                    let q = f.get(1, j, r, d) / a;
                    match ratio {
                        None => ratio = Some(q),
                        Some(q0) => prop_assert!((q - q0).norm() <= 1e-9 * q0.norm().max(1.0)),
                    }
                }
            }
        }
        prop_assert!(ratio.is_some());
    }

    #[test]
    fn range_energy_ignores_rx_order_and_chirp_order(seed in any::<u64>(), shape in small_shape()) {
        let f = random_frame(shape, seed);
        let base = range_energy_profile(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let mut perm: Vec<usize> = (0..shape.rx).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut permuted = vec![Complex::new(0.0, 0.0); shape.len()];
        let mut swapped = permuted.clone();
        for c in 0..shape.chirps {
            for j in 0..shape.rx {
                for r in 0..shape.range {
                    for d in 0..shape.doppler {
                        let z = f.get(c, j, r, d);
                        permuted[shape.index(c, perm[j], r, d)] = z;
                        swapped[shape.index(shape.chirps - 1 - c, j, r, d)] = z;
                    }
                }
            }
        }
        for data in [permuted, swapped] {
            let e = range_energy_profile(&RdFrame::from_data(shape, data, "test").unwrap());
            for (x, y) in e.iter().zip(&base) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), shape in small_shape()) {
        let once = normalize_rd(&random_frame(shape, seed));
        let twice = normalize_rd(&once);
        for (a, b) in once.data().iter().zip(twice.data()) {
            prop_assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn collapse_is_a_fixed_point(seed in any::<u64>(), shape in small_shape()) {
        let f = random_frame(shape, seed);
        for dim in [CollapseDim::Doppler, CollapseDim::Range] {
            let once = collapse_dim(&f, dim);
            let twice = collapse_dim(&once, dim);
            for (a, b) in once.data().iter().zip(twice.data()) {
                prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn world_to_cell_agrees_with_centers(res_idx in 0..3usize, fx in 0.0..1.0f64, fy in 0.0..1.0f64) {
        let grid = BevGridSpec::new([0.5, 0.4, 0.35][res_idx]).unwrap();
        let x = grid.x_min + fx * (grid.x_max - grid.x_min);
        let y = grid.y_min + fy * (grid.y_max - grid.y_min);
        if let Some((i, j)) = world_to_cell(x, y, &grid) {
            let (cx, cy) = grid.cell_center(i, j);
            prop_assert!((cx - x).hypot(cy - y) <= grid.resolution / 2f64.sqrt() + 1e-9);
        }
        // nominal centers of the clipped last row/column (0.35 m) fall outside the extent
        let i = (fx * grid.height as f64) as usize % grid.height;
        let j = (fy * grid.width as f64) as usize % grid.width;
        let (cx, cy) = grid.cell_center(i, j);
        let inside = cx < grid.x_max && cy < grid.y_max;
        prop_assert_eq!(world_to_cell(cx, cy, &grid), inside.then_some((i, j)));
    }

    #[test]
    fn splits_keep_sequences_whole(sizes in prop::collection::vec(1..30u64, 2..25), ratio in 0.0..1.0f64, seed in any::<u64>()) {
        let mut frames = Vec::new();
        for (seq, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                frames.push((frames.len() as u64, seq as u64));
            }
        }
        let (train, val) = split_sequences(&frames, ratio, seed).unwrap();
        prop_assert!(!train.is_empty() && !val.is_empty());
        prop_assert_eq!(train.len() + val.len(), frames.len());
        let seq_of: BTreeMap<u64, u64> = frames.iter().copied().collect();
        let train_seqs: BTreeSet<u64> = train.iter().map(|f| seq_of[f]).collect();
        let val_seqs: BTreeSet<u64> = val.iter().map(|f| seq_of[f]).collect();
        prop_assert!(train_seqs.is_disjoint(&val_seqs));
        prop_assert_eq!(train_seqs.len() + val_seqs.len(), sizes.len());
    }

    #[test]
    fn lidar_returns_stop_at_first_surface(seed in any::<u64>(), n in 1..12usize) {
        let scene = random_scene(seed, n);
        let cfg = LidarConfig { seed, ..LidarConfig::default() };
        let cloud = simulate_lidar(&scene, &cfg).unwrap();
        for (p, ground) in cloud.iter() {
            let dist = p.x.hypot(p.y);
            let hit = first_hit(&scene, p.x / dist, p.y / dist);
            match (ground, hit) {
                (true, Some((_, t))) => prop_assert!(dist <= t + 1e-9),
                (false, Some((k, t))) => {
                    prop_assert!((dist - t).abs() <= 1e-9);
                    prop_assert!(p.z > cfg.ground_threshold && p.z <= scene.scatterers[k].height.max(cfg.ground_threshold + 0.05));
                }
                (false, None) => prop_assert!(false, "obstacle return without a surface"),
                (true, None) => prop_assert!(dist <= cfg.max_range + 1e-9),
            }
        }
    }

    #[test]
    fn lidar_is_local_to_shadowed_rays(seed in any::<u64>(), n in 1..8usize) {
        let scene = random_scene(seed, n);
        let extra = random_scene(seed ^ 0xabc, 1).scatterers[0];
        let mut bigger = scene.clone();
        bigger.scatterers.push(extra);
        let cfg = LidarConfig { seed, ..LidarConfig::default() };
        let before = rays_xy(&simulate_lidar(&scene, &cfg).unwrap(), &cfg);
        let after = rays_xy(&simulate_lidar(&bigger, &cfg).unwrap(), &cfg);
        for k in 0..cfg.num_rays() {
            let (uy, ux) = cfg.ray_azimuth(k).sin_cos();
            let shadowed = first_hit(&bigger, ux, uy).is_some_and(|(idx, _)| idx == n);
            if !shadowed {
                prop_assert_eq!(before.get(&k), after.get(&k), "ray {} changed", k);
            }
        }
    }
}

fn random_scene(seed: u64, n: usize) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scatterers = (0..n)
        .map(|_| {
            let r = rng.random_range(4.0..70.0);
            let az: f64 = rng.random_range(-180.0..180.0);
            Scatterer {
                radius: rng.random_range(0.3..3.0f64).min(r - 1.0),
                height: rng.random_range(0.2..3.0),
                ..Scatterer::polar(r, az)
            }
        })
        .collect();
    Scene::new(scatterers)
}

/// Point positions (z ignored) grouped by the ray that produced them.
fn rays_xy(cloud: &rdbev::PointCloud, cfg: &LidarConfig) -> BTreeMap<usize, Vec<(u64, u64, bool)>> {
    let mut out: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for (p, ground) in cloud.iter() {
        let az = p.y.atan2(p.x).to_degrees();
        let k = ((az + 180.0) / cfg.azimuth_step_deg).round() as usize % cfg.num_rays();
        out.entry(k).or_default().push((p.x.to_bits(), p.y.to_bits(), ground));
    }
    out
}

#[test]
fn dense_rays_cover_every_in_fov_cell_at_each_resolution() {
    // one ray per 0.05 degree azimuth bin
    let radar = RadarConfig::default();
    let cfg = LidarConfig {
        azimuth_step_deg: 0.05,
        ..LidarConfig::default()
    };
    let cloud = simulate_lidar(&Scene::default(), &cfg).unwrap();
    for res in [0.5, 0.4, 0.35] {
        let grid = BevGridSpec::new(res).unwrap();
        let hfov = hfov_mask(&grid, (0.0, 0.0), radar.hfov_deg, radar.max_range);
        let sup = supervise_cloud(&cloud, &grid, &hfov, cfg.ground_threshold, 0.05).unwrap();
        let gaps = hfov.and_not(&sup.sup).unwrap();
        let missing = gaps.count();
        assert_eq!(missing, 0, "uncovered in-HFOV cells at {res} m");
        assert_eq!(sup.unknown.count(), 0);
    }
}

#[test]
fn container_round_trips_randomized_records() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100u64 {
        let cfg = GenerateConfig {
            seed: rng.random(),
            resolution: [0.5, 0.4, 0.35][case as usize % 3],
            snr_db: rng.random_range(-5.0..30.0),
            store_points: rng.random_bool(0.5),
            min_scatterers: 1,
            max_scatterers: 8,
            ..GenerateConfig::default()
        };
        let mut record = generate_frame(&cfg, rng.random_range(0..1000)).unwrap();
        if rng.random_bool(0.5) {
            let grid = *record.grid();
            let probs = (0..grid.num_cells()).map(|_| rng.random::<f32>()).collect();
            record.prediction = Some(("random".into(), PredictionMap::new(grid, probs).unwrap()));
        }
        let bytes = record.to_container().to_bytes();
        let back = FrameRecord::from_container(&rdbev::container::Container::from_bytes(&bytes).unwrap()).unwrap();
        assert!(back == record, "case {case} did not round trip");
        assert_eq!(back.to_container().to_bytes(), bytes);
    }
}

#[test]
fn range_energy_rarely_beats_the_oracle_on_single_targets() {
    let radar = quiet();
    let grid = BevGridSpec::new(0.5).unwrap();
    let hfov = hfov_mask(&grid, (0.0, 0.0), radar.hfov_deg, radar.max_range);
    let lidar = LidarConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut frames, mut violations) = (0, 0);
    while frames < 120 {
        let r = rng.random_range(6.0..55.0);
        let az = rng.random_range(-28.0..28.0);
        let t = Scatterer {
            radius: rng.random_range(0.3..2.0),
            ..Scatterer::polar(r, az)
        };
        let scene = Scene::new(vec![t]);
        let prop = PropagationParams {
            seed: rng.random(),
            ..PropagationParams::default()
        };
        let rd = simulate_rd(&scene, &radar, &prop).unwrap();
        let sup = supervise_cloud(&simulate_lidar(&scene, &lidar).unwrap(), &grid, &hfov, 0.3, 0.05).unwrap();
        if sup.label.occupancy().and(&sup.sup).unwrap().count() == 0 {
            continue;
        }
        frames += 1;
        let re = range_energy_projection(&rd, &grid, &radar, (0.0, 0.0)).unwrap();
        let bf = beamform_projection(&rd, &grid, &radar, (0.0, 0.0), Chirp::A).unwrap();
        let ap_re = average_precision_map(&re, &sup.label, &sup.sup).unwrap();
        let ap_bf = average_precision_map(&bf, &sup.label, &sup.sup).unwrap();
        violations += usize::from(ap_re > ap_bf);
    }
    assert!(
        violations * 20 <= frames,
        "range energy beat the oracle on {violations} of {frames} frames"
    );
}
