#![allow(dead_code)]

use spi_core::geom::{Disc, Segment};
use spi_core::{Pose, Scenario, Vec2};

/// Exact origin avoidance of uniform random exploration, by enumerating how
/// `n` agents split over the four effective directions
/// (+x 1/6, -x 1/6, +y 1/3, -y 1/3). Returns `(score, compositions)`.
pub fn exact_random_origin_avoidance(n: u32) -> (f64, usize) {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let probs: [f64; 4] = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0];
    let mut near = 0.0;
    let mut terms = 0;
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                let d = n - a - b - c;
                terms += 1;
                let counts = [a, b, c, d];
                let coeff = fact(n) / counts.iter().map(|&k| fact(k)).product::<f64>();
                let p = coeff
                    * counts
                        .iter()
                        .zip(probs)
                        .map(|(&k, p)| p.powi(k as i32))
                        .product::<f64>();
                let dx = a as i64 - b as i64;
                let dy = c as i64 - d as i64;
                // near the origin: |d| < n / 3, compared in integers
                if 9 * (dx * dx + dy * dy) < (n * n) as i64 {
                    near += p;
                }
            }
        }
    }
    (1.0 - near, terms)
}

/// Box at the origin facing +x with obstacles in octants 3 and 6, a wall
/// spanning octants 4 and 5, and the goal at a bearing of 30 degrees.
pub fn fig3_scenario() -> (Scenario, Pose) {
    let mut s = Scenario::open_field();
    let at = |deg: f64, r: f64| Vec2::from_angle(deg.to_radians()) * r;
    s.obstacles = vec![Disc::new(at(112.5, 90.0), 10.0), Disc::new(at(247.5, 90.0), 10.0)];
    s.walls = vec![Segment::new(Vec2::new(-100.0, 90.0), Vec2::new(-100.0, -90.0))];
    s.goal = Disc::new(at(30.0, 400.0), 20.0);
    (s, Pose::new(Vec2::ZERO, 0.0))
}
