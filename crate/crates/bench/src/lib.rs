//! Shared fixtures for the benchmarks: the default scenario with the focus
//! placed at a representative offset on the driving disk.

use ushaptic_core::device::{focus_world_position, DeviceState};
use ushaptic_core::{PhasePattern, Scenario, Vec3};

/// Focus offset used by the load benchmarks, m.
pub const BENCH_X_FO: f64 = 0.006;

pub struct Fixture {
    pub scenario: Scenario,
    pub state: DeviceState,
    pub focus: Vec3,
    pub phases: PhasePattern,
}

impl Fixture {
    pub fn new() -> Self {
        let scenario = Scenario::default_scenario();
        let state = DeviceState::new(scenario.mount_pose);
        let focus = focus_world_position(&state, &scenario.device, BENCH_X_FO, scenario.control.stroke_axis)
            .expect("offset lies on the disk");
        let phases = scenario.array.solve_focus_phases(&focus).expect("focus clear of the array");
        Self {
            scenario,
            state,
            focus,
            phases,
        }
    }
}

impl Default for Fixture {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_focus_sits_on_the_disk() {
        let f = Fixture::new();
        assert_eq!(f.phases.len(), 996);
        assert!((f.focus - Vec3::new(BENCH_X_FO, 0.0, 0.2)).norm() < 1e-15);
    }
}
