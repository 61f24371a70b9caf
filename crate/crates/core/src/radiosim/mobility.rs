//! UE track sampling: one position per 1-second tick.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{MobilityKind, UeTrack};
use crate::seeding;

/// Walks a track and yields the UE position at every tick. Tick `i` is the
/// position after `i` seconds of travel; tick 0 is the starting waypoint.
pub struct TrackWalker {
    waypoints: Vec<[f64; 2]>,
    speeds: Vec<f64>,
    kind: MobilityKind,
    position: [f64; 2],
    target_idx: usize,
    forward: bool,
    leg_speed: f64,
    rng: ChaCha8Rng,
    speed_range: (f64, f64),
    roam_box: (f64, f64, f64, f64),
}

impl TrackWalker {
    pub fn new(track: &UeTrack, base_seed: u64, ue_index: u64) -> Self {
        let waypoints: Vec<[f64; 2]> = track.waypoints.iter().map(|w| w.position).collect();
        let speeds: Vec<f64> = track.waypoints.iter().map(|w| w.speed_mps).collect();
        let lo = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = speeds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let roam_box = bounding_box(&waypoints);
        let mut walker = Self {
            position: waypoints[0],
            waypoints,
            speeds,
            kind: track.mobility_kind,
            target_idx: 0,
            forward: true,
            leg_speed: 0.0,
            rng: seeding::rng(seeding::derive_seed(base_seed, 0x6d6f62, ue_index)),
            speed_range: (lo, hi),
            roam_box,
        };
        walker.pick_next_target();
        walker
    }

    /// Advance by `dt` seconds and return the new position.
    pub fn step(&mut self, dt: f64) -> [f64; 2] {
        if self.waypoints.len() == 1 {
            return self.position;
        }
        let mut remaining = self.leg_speed * dt;
        // A zero-speed leg pins the UE in place.
        while remaining > 1e-12 && self.leg_speed > 0.0 {
            let target = self.waypoints[self.target_idx];
            let dx = target[0] - self.position[0];
            let dy = target[1] - self.position[1];
            let dist = (dx * dx + dy * dy).sqrt();
            if dist <= remaining {
                self.position = target;
                remaining -= dist;
                let ratio = if self.leg_speed > 0.0 { remaining / self.leg_speed } else { 0.0 };
                self.pick_next_target();
                remaining = self.leg_speed * ratio;
            } else {
                self.position[0] += dx / dist * remaining;
                self.position[1] += dy / dist * remaining;
                remaining = 0.0;
            }
        }
        self.position
    }

    fn pick_next_target(&mut self) {
        let n = self.waypoints.len();
        if n == 1 {
            self.leg_speed = 0.0;
            return;
        }
        match self.kind {
            MobilityKind::Linear => {
                // Ping-pong along the polyline.
                if self.forward {
                    if self.target_idx + 1 < n {
                        self.target_idx += 1;
                    } else {
                        self.forward = false;
                        self.target_idx -= 1;
                    }
                } else if self.target_idx > 0 {
                    self.target_idx -= 1;
                } else {
                    self.forward = true;
                    self.target_idx += 1;
                }
                let from = if self.forward { self.target_idx - 1 } else { self.target_idx + 1 };
                self.leg_speed = self.speeds[from.min(n - 1)];
            }
            MobilityKind::Circular => {
                // Closed loop through the waypoints.
                let from = self.target_idx;
                self.target_idx = (self.target_idx + 1) % n;
                self.leg_speed = self.speeds[from];
            }
            MobilityKind::RandomWaypoint => {
                // Uniform target inside the waypoint bounding box, uniform
                // speed between the slowest and fastest listed waypoint.
                let (min_x, max_x, min_y, max_y) = self.roam_box;
                let x = self.rng.gen_range(min_x..=max_x);
                let y = self.rng.gen_range(min_y..=max_y);
                // Reuse slot 0 as the roaming target.
                self.waypoints[0] = [x, y];
                self.target_idx = 0;
                let (lo, hi) = self.speed_range;
                self.leg_speed = if hi > lo { self.rng.gen_range(lo..=hi) } else { lo };
            }
        }
    }
}

fn bounding_box(points: &[[f64; 2]]) -> (f64, f64, f64, f64) {
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in points {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    (min_x, max_x, min_y, max_y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiosim::Waypoint;

    fn track(kind: MobilityKind, points: &[([f64; 2], f64)]) -> UeTrack {
        UeTrack {
            ue_id: "ue-0".into(),
            waypoints: points
                .iter()
                .map(|&(position, speed_mps)| Waypoint { position, speed_mps })
                .collect(),
            mobility_kind: kind,
        }
    }

    #[test]
    fn single_waypoint_is_stationary() {
        let t = track(MobilityKind::Linear, &[([5.0, 5.0], 6.0)]);
        let mut w = TrackWalker::new(&t, 1, 0);
        for _ in 0..10 {
            assert_eq!(w.step(1.0), [5.0, 5.0]);
        }
    }

    #[test]
    fn linear_ping_pong_reverses() {
        let t = track(MobilityKind::Linear, &[([0.0, 0.0], 10.0), ([30.0, 0.0], 10.0)]);
        let mut w = TrackWalker::new(&t, 1, 0);
        assert_eq!(w.step(1.0), [10.0, 0.0]);
        assert_eq!(w.step(1.0), [20.0, 0.0]);
        assert_eq!(w.step(1.0), [30.0, 0.0]);
        // Reversal consumes the leftover distance in the same tick.
        assert_eq!(w.step(1.0), [20.0, 0.0]);
    }

    #[test]
    fn circular_wraps_around() {
        let t = track(
            MobilityKind::Circular,
            &[([0.0, 0.0], 10.0), ([10.0, 0.0], 10.0), ([10.0, 10.0], 10.0), ([0.0, 10.0], 10.0)],
        );
        let mut w = TrackWalker::new(&t, 1, 0);
        // Perimeter is 40 m at 10 m/s: back at the start after 4 s.
        for _ in 0..3 {
            w.step(1.0);
        }
        assert_eq!(w.step(1.0), [0.0, 0.0]);
    }

    #[test]
    fn random_waypoint_stays_in_box() {
        let t = track(
            MobilityKind::RandomWaypoint,
            &[([0.0, 0.0], 3.0), ([100.0, 50.0], 8.0)],
        );
        let mut w = TrackWalker::new(&t, 7, 0);
        for _ in 0..500 {
            let p = w.step(1.0);
            assert!(p[0] >= -1e-9 && p[0] <= 100.0 + 1e-9);
            assert!(p[1] >= -1e-9 && p[1] <= 50.0 + 1e-9);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let t = track(
            MobilityKind::RandomWaypoint,
            &[([0.0, 0.0], 3.0), ([100.0, 50.0], 8.0)],
        );
        let mut a = TrackWalker::new(&t, 7, 3);
        let mut b = TrackWalker::new(&t, 7, 3);
        for _ in 0..100 {
            assert_eq!(a.step(1.0), b.step(1.0));
        }
    }
}
