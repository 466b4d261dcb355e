use bungee_core::analysis::{conjugacy_check, CONJUGACY_SEED};
use bungee_core::dynamics::*;
use bungee_core::maps::psi_apply;
use bungee_core::snake::t_of;
use bungee_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(which: MapKind) -> GlobalMapConfig {
    GlobalMapConfig::default_for(which).unwrap()
}

fn direct() -> OrbitOptions {
    OrbitOptions { path: PathMode::Direct, keep_trail: false }
}

#[test]
fn conjugacy_over_first_twelve_bends() {
    let err = conjugacy_check(&cfg(MapKind::F), 12, 10_000, CONJUGACY_SEED).unwrap();
    assert!(err < 1e-8, "{err}");
}

#[test]
fn upper_half_plane_is_invariant_under_h() {
    let h = cfg(MapKind::H);
    let table = h.table().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10_000 {
        let z = match i % 3 {
            // Broad sample, mostly identity regime and the rectangle.
            0 => Point::new(rng.random_range(-1.0..1.0), rng.random_range(1e-6..300.0)),
            1 => Point::new(rng.random_range(-0.0099..0.0099), rng.random_range(1e-6..101.0)),
            // Points of the snake.
            _ => {
                let rec = &table[rng.random_range(0..48)];
                let y = rng.random_range(rec.y_lo..=rec.y_hi);
                rec.apply(Point::new(rng.random_range(-1.0..=1.0) / y, y))
            }
        };
        assert!(z.y > 0.0);
        let w = h.h_apply(z).unwrap();
        assert!(w.y > 0.0, "{z} -> {w}");
    }
}

#[test]
fn f_is_continuous_across_regime_boundaries() {
    let f = cfg(MapKind::F);
    let table = f.table().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let eps = 1e-11;
    let mut worst: f64 = 0.0;
    let mut probe = |q: Point| {
        let fq = f.f_apply(q).unwrap();
        for (dx, dy) in [(eps, 0.0), (-eps, 0.0), (0.0, eps), (0.0, -eps)] {
            let d = f.f_apply(Point::new(q.x + dx, q.y + dy)).unwrap().dist(fq);
            worst = worst.max(d);
        }
    };
    let y0 = 101.0;
    for _ in 0..2_000 {
        // Snake side walls.
        let rec = &table[rng.random_range(0..48)];
        let y = rng.random_range(rec.y_lo..=rec.y_hi);
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        probe(rec.apply(Point::new(side / y, y)));
        // Side walls of the rectangle, and its top where it meets the strip.
        probe(Point::new(side / y0, rng.random_range(0.0..y0)));
        probe(Point::new(rng.random_range(-1.0..1.0) / y0, y0));
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn complement_is_fixed_and_bounded() {
    let f = cfg(MapKind::F);
    let cc = ClassifierConfig { max_steps: 1_000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut seen = 0;
    while seen < 2_000 {
        let z = Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..300.0));
        if f.regime(z, None) != Regime::Identity {
            continue;
        }
        seen += 1;
        assert_eq!(f.f_apply(z).unwrap(), z);
        if seen % 100 == 0 {
            assert_eq!(iterate_orbit(z, &f, &cc).unwrap().label, Label::Bounded);
        }
    }
}

#[test]
fn fast_and_direct_agree_after_a_thousand_steps() {
    let cc = ClassifierConfig { max_steps: 1_000, ..Default::default() };
    let starts = [
        (MapKind::F, Point::new(0.0, 101.5)),
        (MapKind::F, Point::new(0.007, 102.3)),
        (MapKind::F, Point::new(-0.004, 103.01)),
        (MapKind::F, Point::new(0.003, 60.0)),
        (MapKind::H, Point::new(0.0, 101.5)),
        (MapKind::Psi, Point::new(0.0095, 101.0)),
    ];
    for (which, z) in starts {
        let c = cfg(which);
        let fast = iterate_orbit(z, &c, &cc).unwrap();
        let slow = iterate_orbit_with(z, &c, &cc, direct()).unwrap();
        assert_eq!(fast.steps_taken, slow.steps_taken);
        let gap = fast.final_point.dist(slow.final_point);
        assert!(gap < 1e-6, "{which} from {z}: {gap}");
    }
}

#[test]
fn fast_and_direct_agree_on_events() {
    // Long enough for the first three oscillations of the axis orbit.
    let cc = ClassifierConfig { max_steps: 3_000_000, min_oscillations: 3, ..Default::default() };
    let f = cfg(MapKind::F);
    for z in [Point::new(0.0, 101.5), Point::new(0.005, 102.0)] {
        let fast = iterate_orbit(z, &f, &cc).unwrap();
        let slow = iterate_orbit_with(z, &f, &cc, direct()).unwrap();
        assert_eq!(fast.label, slow.label);
        assert!(!fast.oscillation_events.is_empty());
        assert_eq!(fast.oscillation_events.len(), slow.oscillation_events.len());
        for (a, b) in fast.oscillation_events.iter().zip(&slow.oscillation_events) {
            assert_eq!(a.direction, b.direction);
            assert!(a.step.abs_diff(b.step) <= 1, "{a:?} vs {b:?}");
        }
        for (a, b) in fast.oscillation_maxima.iter().zip(&slow.oscillation_maxima) {
            assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
        }
    }
}

#[test]
fn fast_and_direct_agree_on_trivial_witnesses() {
    let cc = ClassifierConfig::default();
    for (which, z, label) in [
        (MapKind::F, Point::new(5.0, 5.0), Label::Bounded),
        (MapKind::F, Point::new(1.0 / 102.0, 102.0), Label::Bounded),
        (MapKind::H, Point::new(0.0, -4.5), Label::Escaping),
    ] {
        let c = cfg(which);
        assert_eq!(iterate_orbit(z, &c, &cc).unwrap().label, label);
        assert_eq!(iterate_orbit_with(z, &c, &cc, direct()).unwrap().label, label);
    }
}

#[test]
fn axis_orbit_oscillations_grow() {
    let rec = iterate_orbit(Point::new(0.0, 101.5), &cfg(MapKind::F), &ClassifierConfig::default()).unwrap();
    assert_eq!(rec.label, Label::Bungee);
    let maxima = &rec.oscillation_maxima;
    assert!(maxima.len() >= 4);
    for (k, m) in maxima.iter().enumerate().take(8) {
        let k = k + 1;
        assert!(*m >= 0.9 * (101.0 + t_of(k)), "maximum {k} = {m}");
    }
    // Each maximum is the top of a bend: y0 + t_n plus a sliver of the arch.
    for m in maxima {
        let n = (m - 101.0).log2().floor() as i32;
        let t = 2f64.powi(n);
        assert!(*m >= 101.0 + t && *m < 101.0 + t + 1.0, "{m}");
    }
}

#[test]
fn psi_orbit_matches_corridor_map() {
    let c = cfg(MapKind::Psi);
    let cc = ClassifierConfig { max_steps: 1, ..Default::default() };
    let z = Point::new(0.004, 150.0);
    let rec = iterate_orbit_with(z, &c, &cc, direct()).unwrap();
    assert_eq!(rec.final_point, psi_apply(z, c.strip()).unwrap());
}

#[test]
fn classify_rejects_inconsistent_config() {
    let rec = iterate_orbit(Point::new(5.0, 5.0), &cfg(MapKind::F), &ClassifierConfig::default()).unwrap();
    let bad = ClassifierConfig { low_threshold: 500.0, ..Default::default() };
    assert!(classify(&rec, &bad).is_err());
    assert!(iterate_orbit(Point::new(5.0, 5.0), &cfg(MapKind::F), &bad).is_err());
}

#[test]
fn orbit_export_format() {
    let cc = ClassifierConfig { max_steps: 10, ..Default::default() };
    let opts = OrbitOptions { path: PathMode::Fast, keep_trail: true };
    let rec = iterate_orbit_with(Point::new(0.0, 101.5), &cfg(MapKind::F), &cc, opts).unwrap();
    let mut buf = Vec::new();
    rec.write_trail(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,x,y,modulus");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 10.0);
    assert!((last[3] - last[1].hypot(last[2])).abs() < 1e-12);
}
