use crate::geometry::{wrap_pi, Pose, Position2D};

/// Omnidirectional waypoint follower that shuttles between the two ends of its
/// path. Translation runs at constant speed; the heading slews toward the
/// direction of travel.
#[derive(Debug, Clone)]
pub struct Mover {
    path: Vec<Position2D>,
    target: usize,
    forward: bool,
    pose: Pose,
    speed: f64,
    turn_rate: f64,
}

impl Mover {
    pub fn new(path: Vec<Position2D>, start: Pose, speed: f64, turn_rate: f64) -> Self {
        assert!(!path.is_empty(), "path needs a waypoint");
        let target = if path.len() > 1 { 1 } else { 0 };
        Self {
            path,
            target,
            forward: true,
            pose: start,
            speed,
            turn_rate,
        }
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    fn advance_target(&mut self) {
        if self.path.len() < 2 {
            return;
        }
        if self.forward && self.target + 1 == self.path.len() {
            self.forward = false;
        } else if !self.forward && self.target == 0 {
            self.forward = true;
        }
        if self.forward {
            self.target += 1;
        } else {
            self.target -= 1;
        }
    }

    /// Advances by `dt` seconds and returns the new pose.
    pub fn step(&mut self, dt: f64) -> Pose {
        let mut budget = self.speed * dt;
        let mut pos = self.pose.position();
        let mut direction = None;
        // a path shorter than the step budget would otherwise loop forever
        let mut hops = 0;
        while budget > 0.0 && self.path.len() > 1 && hops < 2 * self.path.len() + 2 {
            let goal = self.path[self.target];
            let d = pos.distance(&goal);
            if d > 1e-12 {
                direction = Some((goal.y - pos.y).atan2(goal.x - pos.x));
            }
            if d <= budget {
                pos = goal;
                budget -= d;
                self.advance_target();
                hops += 1;
            } else {
                let f = budget / d;
                pos = Position2D::new(pos.x + f * (goal.x - pos.x), pos.y + f * (goal.y - pos.y));
                budget = 0.0;
            }
        }
        let mut theta = self.pose.theta;
        if let Some(want) = direction {
            let err = wrap_pi(want - theta);
            let max = self.turn_rate * dt;
            theta += err.clamp(-max, max);
        }
        self.pose = Pose::new(pos.x, pos.y, theta);
        self.pose
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shuttles_between_ends() {
        let path = vec![Position2D::new(0.0, 0.0), Position2D::new(1.0, 0.0)];
        let mut m = Mover::new(path, Pose::new(0.0, 0.0, 0.0), 0.4, 2.0);
        // 0.02 m per step: 1 m out, 1 m back
        for _ in 0..100 {
            m.step(0.05);
        }
        assert!(m.pose().x.abs() < 1e-9, "{:?}", m.pose());
        for _ in 0..25 {
            m.step(0.05);
        }
        assert!((m.pose().x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn single_waypoint_stays() {
        let p = Pose::new(1.0, 2.0, 0.3);
        let mut m = Mover::new(vec![p.position()], p, 0.4, 2.0);
        assert_eq!(m.step(0.05), p);
    }
}
