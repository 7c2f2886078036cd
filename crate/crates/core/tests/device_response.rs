//! Static response of the default device to a focus held at offset x_fo.

use ushaptic_core::device::{contact_point, equilibrium_tilt, focus_world_position, DeviceState};
use ushaptic_core::sim::hinge_load;
use ushaptic_core::{Scenario, Vec2};

/// Equilibrium tilt and contact offset with the focus at `x_fo` on the disk.
fn response(s: &Scenario, x_fo: f64) -> (Vec2, Vec2) {
    let state = DeviceState::new(s.mount_pose);
    let focus = focus_world_position(&state, &s.device, x_fo, s.control.stroke_axis).unwrap();
    let phases = s.array.solve_focus_phases(&focus).unwrap();
    let eq = equilibrium_tilt(&s.device, |tilt| Ok(hinge_load(s, &state.with_tilt(tilt), &phases)?.1)).unwrap();
    (eq.tilt, contact_point(&s.device, eq.tilt, s.skin_gain).offset)
}

#[test]
fn contact_is_monotone_and_odd_away_from_the_rim() {
    let s = Scenario::default_scenario();
    // r_drive minus roughly one focal-spot width along the stroke
    let limit = 0.015;
    let offsets: Vec<f64> = (-6..=6).map(|i| limit * i as f64 / 6.0).collect();
    let contacts: Vec<f64> = offsets.iter().map(|&x| response(&s, x).1.x).collect();
    for w in contacts.windows(2) {
        // pushing further out on +x tips the disk further toward −x
        assert!(w[1] <= w[0], "{contacts:?}");
    }
    for i in 0..offsets.len() {
        let (a, b) = (contacts[i], contacts[offsets.len() - 1 - i]);
        let anti = 0.5 * (a - b);
        assert!((a + b).abs() * 0.5 <= 1e-3 * anti.abs().max(1e-12), "{a} vs {b}");
    }
    assert_eq!(contacts[6], 0.0);
}

#[test]
fn tilt_falls_off_once_the_spot_spills_past_the_rim() {
    let s = Scenario::default_scenario();
    let inner = response(&s, 0.014).0.x.abs();
    let rim = response(&s, 0.020).0.x.abs();
    assert!(rim < 0.75 * inner, "inner {inner}, rim {rim}");
}
