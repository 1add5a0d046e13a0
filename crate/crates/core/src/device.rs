//! Physics of the keystone above the electromagnet.
//!
//! Kinematics are exposed in mm and mm/s; force integration runs in SI.
//! The magnet pulls the keystone toward the surface, so magnetic force acts
//! to reduce the gap. The surface is a rigid, perfectly inelastic stop at
//! gap 0.

use crate::config::DeviceConfig;
use crate::error::{contract, Error, Result};

const MM: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    /// Keystone-to-surface distance, mm.
    pub gap: f64,
    /// Rate of change of gap, mm/s.
    pub velocity: f64,
    /// Coil temperature, °C.
    pub coil_temp: f64,
    /// Simulation time, s.
    pub time: f64,
}

impl PlantState {
    pub fn at_rest(gap: f64, coil_temp: f64) -> Self {
        Self { gap, velocity: 0.0, coil_temp, time: 0.0 }
    }

    fn check_finite(&self) -> Result<()> {
        let ok =
            self.gap.is_finite() && self.velocity.is_finite() && self.coil_temp.is_finite() && self.time.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::SimulationFault {
                time: self.time,
                reason: format!(
                    "non-finite state (gap={}, velocity={}, coil_temp={})",
                    self.gap, self.velocity, self.coil_temp
                ),
            })
        }
    }
}

/// What the finger is trying to do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerIntent {
    /// Rest position of the finger spring, mm.
    pub target_gap: f64,
    /// 0 = maximally loose, 1 = maximally rigid.
    pub rigidity_intent: f64,
}

impl FingerIntent {
    /// Validated constructor: `target_gap` within `[0, range]`, rigidity within `[0, 1]`.
    pub fn new(target_gap: f64, rigidity_intent: f64, range: f64) -> Result<Self> {
        if !(0.0..=range).contains(&target_gap) {
            return Err(contract(format!("target gap {target_gap} mm outside [0, {range}] mm")));
        }
        check_unit("rigidity intent", rigidity_intent)?;
        Ok(Self { target_gap, rigidity_intent })
    }
}

fn check_unit(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(contract(format!("{what} {v} outside [0, 1]")))
    }
}

/// Inverse-square force law with an offset, `F = K·drive / (gap + d0)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel {
    /// N·mm² per unit drive.
    pub gain: f64,
    /// mm.
    pub offset: f64,
    pub max_drive: f64,
}

impl ForceModel {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self { gain: cfg.force_gain, offset: cfg.force_offset_mm, max_drive: cfg.max_drive }
    }

    /// Attractive force in N at `gap` mm for normalized `drive`.
    pub fn magnetic_force(&self, gap: f64, drive: f64) -> Result<f64> {
        if !(gap >= 0.0) {
            return Err(contract(format!("negative gap {gap} mm")));
        }
        if !(0.0..=self.max_drive).contains(&drive) {
            return Err(contract(format!("drive {drive} outside [0, {}]", self.max_drive)));
        }
        let d = gap + self.offset;
        Ok(self.gain * drive / (d * d))
    }

    /// Magnitude of dF/dgap in N/m: the negative stiffness the field adds.
    pub fn gradient(&self, gap: f64, drive: f64) -> f64 {
        let d = gap + self.offset;
        2.0 * self.gain * drive / (d * d * d) / MM
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impedance {
    /// N/m.
    pub stiffness: f64,
    /// N·s/m.
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerModel {
    /// Effective moving mass, kg.
    pub mass: f64,
    pub stiffness_min: f64,
    pub stiffness_max: f64,
    pub damping_min: f64,
    pub damping_max: f64,
}

impl FingerModel {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self {
            mass: cfg.finger_mass_kg,
            stiffness_min: cfg.stiffness_min,
            stiffness_max: cfg.stiffness_max,
            damping_min: cfg.damping_min,
            damping_max: cfg.damping_max,
        }
    }

    /// Linear map from rigidity intent to stiffness and damping.
    pub fn impedance(&self, rigidity_intent: f64) -> Result<Impedance> {
        check_unit("rigidity intent", rigidity_intent)?;
        let r = rigidity_intent;
        Ok(Impedance {
            stiffness: self.stiffness_min + (self.stiffness_max - self.stiffness_min) * r,
            damping: self.damping_min + (self.damping_max - self.damping_min) * r,
        })
    }
}

/// First-order coil thermal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalModel {
    pub ambient: f64,
    /// s.
    pub tau: f64,
    /// °C/W.
    pub resistance: f64,
}

impl ThermalModel {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self { ambient: cfg.ambient_c, tau: cfg.thermal_tau_s, resistance: cfg.thermal_resistance }
    }

    pub fn steady_state(&self, power: f64) -> f64 {
        self.ambient + power * self.resistance
    }

    /// Explicit Euler step of `dT/dt = (ambient + P·R_th − T) / τ`. Time is
    /// left to [`Plant::step_plant`].
    pub fn step_thermal(&self, state: PlantState, power: f64, dt: f64) -> Result<PlantState> {
        if !(power >= 0.0) {
            return Err(contract(format!("negative electrical power {power} W")));
        }
        let mut next = state;
        next.coil_temp += dt * (self.steady_state(power) - state.coil_temp) / self.tau;
        next.check_finite()?;
        Ok(next)
    }
}

/// The finger/keystone plant: force field, finger impedance and thermal state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plant {
    pub force: ForceModel,
    pub finger: FingerModel,
    pub thermal: ThermalModel,
}

impl Plant {
    pub fn from_config(cfg: &DeviceConfig) -> Self {
        Self {
            force: ForceModel::from_config(cfg),
            finger: FingerModel::from_config(cfg),
            thermal: ThermalModel::from_config(cfg),
        }
    }

    /// Advance the mechanics by `dt`.
    ///
    /// Solves `m·a = −k·(gap − target) − c·v − F_mag` with the linear spring
    /// and damper treated implicitly (midpoint rule) and the magnetic force
    /// evaluated at the start of the step. For `drive = 0` the mechanical
    /// energy therefore never increases, whatever `dt` is.
    pub fn step_plant(&self, state: PlantState, intent: FingerIntent, drive: f64, dt: f64) -> Result<PlantState> {
        state.check_finite()?;
        if !intent.target_gap.is_finite() {
            return Err(Error::SimulationFault { time: state.time, reason: "non-finite target gap".into() });
        }
        if !(dt > 0.0) {
            return Err(contract(format!("time step {dt} s must be positive")));
        }
        let Impedance { stiffness: k, damping: c } = self.finger.impedance(intent.rigidity_intent)?;
        let f_mag = self.force.magnetic_force(state.gap, drive)?;
        let m = self.finger.mass;

        let y = (state.gap - intent.target_gap) * MM;
        let v = state.velocity * MM;
        let a = dt / m * (k * dt / 4.0 + c / 2.0);
        let v_next = (v * (1.0 - a) - dt / m * (k * y + f_mag)) / (1.0 + a);

        let mut next = state;
        next.gap = state.gap + 0.5 * dt * (v + v_next) / MM;
        next.velocity = v_next / MM;
        if next.gap < 0.0 {
            next.gap = 0.0;
            next.velocity = 0.0;
        }
        next.time = state.time + dt;
        next.check_finite()?;
        Ok(next)
    }

    /// Spring plus kinetic energy about `intent`, J.
    pub fn mechanical_energy(&self, state: &PlantState, intent: &FingerIntent) -> Result<f64> {
        let imp = self.finger.impedance(intent.rigidity_intent)?;
        let y = (state.gap - intent.target_gap) * MM;
        let v = state.velocity * MM;
        Ok(0.5 * self.finger.mass * v * v + 0.5 * imp.stiffness * y * y)
    }

    /// Static offset `F / k` in mm the spring needs to balance the mean pull at `gap`.
    pub fn static_pull(&self, gap: f64, mean_drive: f64, rigidity_intent: f64) -> Result<f64> {
        let f = self.force.magnetic_force(gap.max(0.0), mean_drive)?;
        let k = self.finger.impedance(rigidity_intent)?.stiffness;
        Ok(f / k / MM)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec_force() -> ForceModel {
        ForceModel { gain: 50.0, offset: 5.0, max_drive: 1.0 }
    }

    #[test]
    fn zero_drive_gives_zero_force() {
        let f = spec_force();
        for gap in [0.0, 1.0, 17.0, 1000.0] {
            assert_eq!(f.magnetic_force(gap, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn force_examples_with_k50_d5() {
        let f = spec_force();
        assert_relative_eq!(f.magnetic_force(0.0, 1.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(f.magnetic_force(5.0, 1.0).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn force_contract_violations() {
        let f = spec_force();
        assert!(matches!(f.magnetic_force(-0.1, 0.5), Err(Error::Contract(_))));
        assert!(matches!(f.magnetic_force(1.0, -0.1), Err(Error::Contract(_))));
        assert!(matches!(f.magnetic_force(1.0, 1.5), Err(Error::Contract(_))));
        assert!(matches!(f.magnetic_force(f64::NAN, 0.5), Err(Error::Contract(_))));
    }

    #[test]
    fn force_monotone_and_linear_on_grid() {
        let f = ForceModel::from_config(&DeviceConfig::default());
        for di in 1..=10 {
            let drive = di as f64 / 10.0;
            let mut prev = f64::INFINITY;
            for gi in 0..=170 {
                let gap = gi as f64 * 0.1;
                let v = f.magnetic_force(gap, drive).unwrap();
                assert!(v < prev);
                let unit = f.magnetic_force(gap, 1.0).unwrap();
                assert_relative_eq!(v, unit * drive, max_relative = 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn impedance_endpoints_and_midpoint() {
        let finger = FingerModel::from_config(&DeviceConfig::default());
        let lo = finger.impedance(0.0).unwrap();
        let hi = finger.impedance(1.0).unwrap();
        let mid = finger.impedance(0.5).unwrap();
        assert_eq!(lo.stiffness, finger.stiffness_min);
        assert_eq!(lo.damping, finger.damping_min);
        assert_eq!(hi.stiffness, finger.stiffness_max);
        assert_eq!(hi.damping, finger.damping_max);
        assert_relative_eq!(mid.stiffness, 0.5 * (lo.stiffness + hi.stiffness));
        assert_relative_eq!(mid.damping, 0.5 * (lo.damping + hi.damping));
        assert!(finger.impedance(1.01).is_err());
        assert!(finger.impedance(-0.01).is_err());
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let plant = Plant::from_config(&DeviceConfig::default());
        let s = PlantState::at_rest(8.0, 20.0);
        let intent = FingerIntent { target_gap: 8.0, rigidity_intent: 0.3 };
        let next = plant.step_plant(s, intent, 0.0, 1.0 / 8000.0).unwrap();
        assert_eq!(next.gap, s.gap);
        assert_eq!(next.velocity, 0.0);
        assert_eq!(next.coil_temp, s.coil_temp);
    }

    /// Undamped oscillator: measure the period from upward zero crossings and
    /// compare with 2π√(m/k).
    #[test]
    fn undamped_period_matches_analytic() {
        let cfg = DeviceConfig { damping_min: 0.0, ..Default::default() };
        let plant = Plant::from_config(&cfg);
        let intent = FingerIntent { target_gap: 8.0, rigidity_intent: 0.0 };
        let k = plant.finger.impedance(0.0).unwrap().stiffness;
        let period = 2.0 * std::f64::consts::PI * (plant.finger.mass / k).sqrt();
        let dt = 1.0 / 8000.0;
        let mut s = PlantState::at_rest(9.0, 20.0);
        let mut crossings = Vec::new();
        let mut prev = s.gap - intent.target_gap;
        while crossings.len() < 11 {
            s = plant.step_plant(s, intent, 0.0, dt).unwrap();
            let y = s.gap - intent.target_gap;
            if prev < 0.0 && y >= 0.0 {
                // linear interpolation of the crossing instant
                crossings.push(s.time - dt * y / (y - prev));
            }
            prev = y;
        }
        let measured = (crossings[10] - crossings[0]) / 10.0;
        assert!(((measured - period) / period).abs() < 0.01, "{measured} vs {period}");
    }

    #[test]
    fn contact_clamps_and_stops() {
        let plant = Plant::from_config(&DeviceConfig::default());
        let intent = FingerIntent { target_gap: 0.0, rigidity_intent: 0.0 };
        let mut s = PlantState::at_rest(0.05, 20.0);
        s.velocity = -500.0;
        for _ in 0..100 {
            s = plant.step_plant(s, intent, 1.0, 1.0 / 8000.0).unwrap();
            assert!(s.gap >= 0.0);
        }
        assert_eq!(s.gap, 0.0);
        assert_eq!(s.velocity, 0.0);
    }

    #[test]
    fn nan_state_is_simulation_fault() {
        let plant = Plant::from_config(&DeviceConfig::default());
        let intent = FingerIntent { target_gap: 5.0, rigidity_intent: 0.0 };
        let mut s = PlantState::at_rest(5.0, 20.0);
        s.velocity = f64::NAN;
        s.time = 1.25;
        match plant.step_plant(s, intent, 0.0, 1e-4) {
            Err(Error::SimulationFault { time, .. }) => assert_eq!(time, 1.25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn thermal_equilibrium_and_decay() {
        let th = ThermalModel::from_config(&DeviceConfig::default());
        let s = PlantState::at_rest(5.0, 20.0);
        assert_eq!(th.step_thermal(s, 0.0, 0.01).unwrap().coil_temp, 20.0);

        let mut hot = PlantState::at_rest(5.0, 100.0);
        let mut prev = hot.coil_temp;
        for _ in 0..10_000 {
            hot = th.step_thermal(hot, 0.0, 0.01).unwrap();
            assert!(hot.coil_temp < prev && hot.coil_temp > 20.0);
            prev = hot.coil_temp;
        }
        assert!(th.step_thermal(s, -1.0, 0.01).is_err());
    }

    #[test]
    fn thermal_step_response_reaches_steady_state() {
        let th = ThermalModel::from_config(&DeviceConfig::default());
        let power = 1.5;
        let target = th.steady_state(power);
        let dt = 0.01;
        let mut s = PlantState::at_rest(5.0, th.ambient);
        let steps = (5.0 * th.tau / dt).round() as usize;
        for _ in 0..steps {
            s = th.step_thermal(s, power, dt).unwrap();
        }
        assert!(((s.coil_temp - target) / target).abs() < 0.01, "{} vs {target}", s.coil_temp);
    }

    proptest! {
        #[test]
        fn passive_energy_never_increases(
            gap0 in 0.5f64..16.0,
            target in 0.0f64..17.0,
            v0 in -200.0f64..200.0,
            r in 0.0f64..=1.0,
        ) {
            let plant = Plant::from_config(&DeviceConfig::default());
            let intent = FingerIntent { target_gap: target, rigidity_intent: r };
            let mut s = PlantState { gap: gap0, velocity: v0, coil_temp: 20.0, time: 0.0 };
            let mut e = plant.mechanical_energy(&s, &intent).unwrap();
            for _ in 0..2000 {
                s = plant.step_plant(s, intent, 0.0, 1.0 / 8000.0).unwrap();
                let e_next = plant.mechanical_energy(&s, &intent).unwrap();
                prop_assert!(e_next <= e * (1.0 + 1e-12) + 1e-18, "{e_next} > {e}");
                e = e_next;
            }
        }

        #[test]
        fn gap_never_negative(gap0 in 0.0f64..17.0, drive in 0.0f64..=1.0, r in 0.0f64..=1.0) {
            let plant = Plant::from_config(&DeviceConfig::default());
            let intent = FingerIntent { target_gap: gap0, rigidity_intent: r };
            let mut s = PlantState::at_rest(gap0, 20.0);
            for _ in 0..800 {
                s = plant.step_plant(s, intent, drive, 1.0 / 8000.0).unwrap();
                prop_assert!(s.gap >= 0.0);
            }
        }
    }
}
