use crate::Point;

/// Callbacks issued while a path is integrated in fast coordinates.
pub trait PathObserver {
    /// State after a grid step (`grid = true`) or after a jump.
    fn node(&mut self, _tau: f64, _z: &Point, _y: f64, _grid: bool) {}
    /// Drift segment `[tau0, tau1)` started from `z` with potential `y`.
    fn segment(&mut self, _tau0: f64, _tau1: f64, _z: &Point, _y: f64) {}
    /// Jump of size `dz` from the pre-jump state `z`.
    fn jump(&mut self, _tau: f64, _z: &Point, _dz: &Point) {}
}

/// Observer that ignores everything.
impl PathObserver for () {}

/// Stores every node in physical units.
#[derive(Clone, Debug, Default)]
pub struct Recorder {
    time_scale: f64,
    space_scale: f64,
    pub times: Vec<f64>,
    pub states: Vec<Point>,
    pub ys: Vec<f64>,
    pub jumps: Vec<super::RecordedJump>,
}

impl Recorder {
    pub fn new(time_scale: f64, space_scale: f64) -> Self {
        Self {
            time_scale,
            space_scale,
            ..Default::default()
        }
    }
}

impl PathObserver for Recorder {
    fn node(&mut self, tau: f64, z: &Point, y: f64, _grid: bool) {
        self.times.push(tau * self.time_scale);
        self.states.push([z[0] * self.space_scale, z[1] * self.space_scale]);
        self.ys.push(y);
    }

    fn jump(&mut self, tau: f64, z: &Point, dz: &Point) {
        let s = self.space_scale;
        self.jumps.push(super::RecordedJump {
            t: tau * self.time_scale,
            pre: [z[0] * s, z[1] * s],
            size: [dz[0] * s, dz[1] * s],
        });
    }
}
