use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Below this reference spread (mm) the rigidity normalization is undefined.
pub const DEGENERATE_SPREAD_MM: f64 = 1e-6;

/// Per-nearness amplitude references for a maximally rigid and a maximally
/// loose finger.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    nearness: Vec<f64>,
    a_rigid: Vec<f64>,
    a_loose: Vec<f64>,
}

impl CalibrationTable {
    pub fn new(nearness: Vec<f64>, a_rigid: Vec<f64>, a_loose: Vec<f64>) -> Result<Self> {
        if nearness.len() < 2 {
            return Err(Error::Calibration {
                nearness: nearness.first().copied().unwrap_or(f64::NAN),
                reason: "at least 2 points required for interpolation".into(),
            });
        }
        if a_rigid.len() != nearness.len() || a_loose.len() != nearness.len() {
            return Err(Error::Config("calibration columns differ in length".into()));
        }
        if nearness.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("calibration grid must be strictly ascending".into()));
        }
        for i in 0..nearness.len() {
            let (r, l) = (a_rigid[i], a_loose[i]);
            if !(r >= 0.0 && l >= 0.0) {
                return Err(Error::Config(format!("negative or non-finite amplitude at {} mm", nearness[i])));
            }
            if r >= l {
                return Err(Error::ModelDirection { nearness: nearness[i], rigid: r, loose: l });
            }
        }
        Ok(Self { nearness, a_rigid, a_loose })
    }

    pub fn nearness(&self) -> &[f64] {
        &self.nearness
    }

    pub fn a_rigid(&self) -> &[f64] {
        &self.a_rigid
    }

    pub fn a_loose(&self) -> &[f64] {
        &self.a_loose
    }

    pub fn len(&self) -> usize {
        self.nearness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nearness.is_empty()
    }

    /// Piecewise-linear `(a_rigid, a_loose)` at `nearness`, clamped to the end
    /// knots outside the grid.
    pub fn interpolate_bounds(&self, nearness: f64) -> (f64, f64) {
        let g = &self.nearness;
        let last = g.len() - 1;
        if !(nearness > g[0]) {
            return (self.a_rigid[0], self.a_loose[0]);
        }
        if nearness >= g[last] {
            return (self.a_rigid[last], self.a_loose[last]);
        }
        // first knot strictly greater than nearness
        let hi = g.partition_point(|&x| x <= nearness);
        let lo = hi - 1;
        if g[lo] == nearness {
            return (self.a_rigid[lo], self.a_loose[lo]);
        }
        let t = (nearness - g[lo]) / (g[hi] - g[lo]);
        let lerp = |v: &[f64]| v[lo] + t * (v[hi] - v[lo]);
        (lerp(&self.a_rigid), lerp(&self.a_loose))
    }

    /// Normalized rigidity: 1 at the rigid reference, 0 at the loose one,
    /// clamped to `[0, 1]`.
    pub fn compute_rigidity(&self, amplitude: f64, nearness: f64) -> Result<f64> {
        let (rigid, loose) = self.interpolate_bounds(nearness);
        let spread = loose - rigid;
        if spread < DEGENERATE_SPREAD_MM {
            return Err(Error::DegenerateCalibration { nearness });
        }
        Ok(((loose - amplitude) / spread).clamp(0.0, 1.0))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("nearness_mm,a_rigid_mm,a_loose_mm\n");
        for i in 0..self.len() {
            let _ = writeln!(out, "{:.6},{:.6},{:.6}", self.nearness[i], self.a_rigid[i], self.a_loose[i]);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "nearness_mm,a_rigid_mm,a_loose_mm" => {}
            Some((i, h)) => {
                return Err(Error::Parse { line: i + 1, reason: format!("unexpected calibration header {h:?}") })
            }
            None => return Err(Error::Parse { line: 1, reason: "empty calibration file".into() }),
        }
        let (mut n, mut r, mut l) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: Option<Vec<f64>> =
                (fields.len() == 3).then(|| fields.iter().map(|f| f.parse::<f64>().ok()).collect()).flatten();
            let v = parsed
                .ok_or_else(|| Error::Parse { line: i + 1, reason: format!("expected three numbers, got {line:?}") })?;
            n.push(v[0]);
            r.push(v[1]);
            l.push(v[2]);
        }
        Self::new(n, r, l)
    }
}

/// A closed loop that calibration can hold at a nearness and watch settle.
pub trait CalibrationLoop {
    /// Ticks per second.
    fn tick_rate(&self) -> f64;
    /// Restart the loop with the finger held at `nearness` mm.
    fn hold(&mut self, nearness: f64, rigidity_intent: f64) -> Result<()>;
    /// Advance one sensor tick; returns the current amplitude estimate in mm.
    fn tick(&mut self) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SettleCriterion {
    /// Span over which the estimate must be steady, s.
    pub window: f64,
    /// Allowed relative difference between the means of the two halves of
    /// the window.
    pub tolerance: f64,
    /// Give up after this long, s.
    pub max_time: f64,
}

impl Default for SettleCriterion {
    fn default() -> Self {
        Self { window: 0.5, tolerance: 0.01, max_time: 10.0 }
    }
}

/// Hold the loop until its amplitude estimate settles; returns the mean
/// estimate over the final settle window.
pub fn settle_amplitude<L: CalibrationLoop + ?Sized>(
    lp: &mut L,
    nearness: f64,
    rigidity_intent: f64,
    settle: &SettleCriterion,
) -> Result<f64> {
    lp.hold(nearness, rigidity_intent)?;
    let rate = lp.tick_rate();
    let max_ticks = (settle.max_time * rate).round() as usize;
    // Mean over each half of the window: drift shows up as a difference,
    // while ripple from quantization and the tactile wave averages out.
    let half = ((settle.window * rate / 2.0).round() as usize).max(1);
    let mut history = std::collections::VecDeque::with_capacity(2 * half);
    let mut change = f64::INFINITY;
    for _ in 0..max_ticks {
        if history.len() == 2 * half {
            history.pop_front();
        }
        history.push_back(lp.tick()?);
        if history.len() == 2 * half {
            let older: f64 = history.iter().take(half).sum::<f64>() / half as f64;
            let newer: f64 = history.iter().skip(half).sum::<f64>() / half as f64;
            let mean = 0.5 * (older + newer);
            if mean <= f64::EPSILON {
                return Ok(0.0);
            }
            change = (newer - older).abs() / mean;
            if change < settle.tolerance {
                return Ok(mean);
            }
        }
    }
    Err(Error::Calibration {
        nearness,
        reason: format!(
            "amplitude did not settle within {} s at rigidity intent {rigidity_intent} (relative change {change:.4})",
            settle.max_time
        ),
    })
}

/// Sweep the grid holding the finger maximally rigid and then maximally
/// loose at each point.
pub fn run_calibration<L: CalibrationLoop + ?Sized>(
    lp: &mut L,
    grid: &[f64],
    settle: &SettleCriterion,
) -> Result<CalibrationTable> {
    if grid.len() < 2 {
        return Err(Error::Calibration {
            nearness: grid.first().copied().unwrap_or(f64::NAN),
            reason: "at least 2 points required for interpolation".into(),
        });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] < 0.0 {
        return Err(Error::Config("calibration grid must be non-negative and strictly ascending".into()));
    }
    let mut rigid = Vec::with_capacity(grid.len());
    let mut loose = Vec::with_capacity(grid.len());
    for &n in grid {
        let r = settle_amplitude(lp, n, 1.0, settle)?;
        let l = settle_amplitude(lp, n, 0.0, settle)?;
        log::debug!("calibration {n:.3} mm: rigid {r:.6} mm, loose {l:.6} mm");
        rigid.push(r);
        loose.push(l);
    }
    CalibrationTable::new(grid.to_vec(), rigid, loose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demux::{AmplitudeState, NearnessState};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn table() -> CalibrationTable {
        CalibrationTable::new(vec![2.0, 4.0, 6.0], vec![0.2, 0.15, 0.1], vec![1.0, 0.8, 0.6]).unwrap()
    }

    /// Stationary loop whose RMS vibration follows a closed-form law; the
    /// samples go through the real estimators.
    struct AnalyticLoop {
        law: fn(f64, f64) -> f64,
        nearness: NearnessState,
        amplitude: AmplitudeState,
        center: f64,
        rms: f64,
        tick: u64,
    }

    impl AnalyticLoop {
        fn new(law: fn(f64, f64) -> f64) -> Self {
            Self {
                law,
                nearness: NearnessState::new(40),
                amplitude: AmplitudeState::new(0.2, 400.0),
                center: 0.0,
                rms: 0.0,
                tick: 0,
            }
        }
    }

    impl CalibrationLoop for AnalyticLoop {
        fn tick_rate(&self) -> f64 {
            400.0
        }
        fn hold(&mut self, nearness: f64, r: f64) -> Result<()> {
            self.nearness = NearnessState::new(40);
            self.amplitude = AmplitudeState::new(0.2, 400.0);
            self.center = nearness;
            self.rms = (self.law)(nearness, r);
            self.tick = 0;
            Ok(())
        }
        fn tick(&mut self) -> Result<f64> {
            let t = self.tick as f64 / 400.0;
            self.tick += 1;
            let x = self.center + 2f64.sqrt() * self.rms * (2.0 * PI * 50.0 * t).sin();
            let n = self.nearness.update(x);
            Ok(self.amplitude.update(x, n))
        }
    }

    fn stub_law(n: f64, r: f64) -> f64 {
        (1.0 - 0.8 * r) * (0.5 + 0.1 * (17.0 - n))
    }

    #[test]
    fn knots_midpoints_and_clamps() {
        let t = table();
        assert_eq!(t.interpolate_bounds(4.0), (0.15, 0.8));
        let (r, l) = t.interpolate_bounds(3.0);
        assert!((r - 0.175).abs() < 1e-12 && (l - 0.9).abs() < 1e-12);
        assert_eq!(t.interpolate_bounds(0.5), (0.2, 1.0));
        assert_eq!(t.interpolate_bounds(9.0), (0.1, 0.6));
    }

    #[test]
    fn rigidity_endpoints() {
        let t = table();
        assert_eq!(t.compute_rigidity(0.8, 4.0).unwrap(), 0.0);
        assert_eq!(t.compute_rigidity(0.15, 4.0).unwrap(), 1.0);
        assert!((t.compute_rigidity(0.475, 4.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(t.compute_rigidity(2.0, 4.0).unwrap(), 0.0);
        assert_eq!(t.compute_rigidity(0.0, 4.0).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_spread_is_error() {
        // build through from_csv to bypass nothing: the constructor would reject
        // rigid >= loose, so place the references 1e-9 apart
        let t = CalibrationTable::new(vec![1.0, 2.0], vec![0.5, 0.5], vec![0.5 + 1e-9, 0.6]).unwrap();
        assert!(matches!(t.compute_rigidity(0.5, 1.0), Err(Error::DegenerateCalibration { .. })));
    }

    #[test]
    fn constructor_rejects_bad_tables() {
        assert!(CalibrationTable::new(vec![1.0], vec![0.1], vec![0.2]).is_err());
        assert!(CalibrationTable::new(vec![2.0, 1.0], vec![0.1, 0.1], vec![0.2, 0.2]).is_err());
        assert!(matches!(
            CalibrationTable::new(vec![1.0, 2.0], vec![0.3, 0.1], vec![0.2, 0.2]),
            Err(Error::ModelDirection { nearness, .. }) if nearness == 1.0
        ));
    }

    #[test]
    fn csv_format() {
        let csv = table().to_csv();
        assert!(csv.starts_with("nearness_mm,a_rigid_mm,a_loose_mm\n2.000000,0.200000,1.000000\n"));
        assert_eq!(CalibrationTable::from_csv(&csv).unwrap(), table());
        assert!(CalibrationTable::from_csv("nope\n").is_err());
        assert!(matches!(
            CalibrationTable::from_csv("nearness_mm,a_rigid_mm,a_loose_mm\n1,2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn calibration_recovers_analytic_law() {
        let grid: Vec<f64> = (0..8).map(|i| 2.0 + 2.0 * i as f64).collect();
        let mut lp = AnalyticLoop::new(stub_law);
        let t = run_calibration(&mut lp, &grid, &SettleCriterion::default()).unwrap();
        for (i, &n) in grid.iter().enumerate() {
            let (wr, wl) = (stub_law(n, 1.0), stub_law(n, 0.0));
            assert!(((t.a_rigid()[i] - wr) / wr).abs() < 0.02, "{n}: {} vs {wr}", t.a_rigid()[i]);
            assert!(((t.a_loose()[i] - wl) / wl).abs() < 0.02, "{n}: {} vs {wl}", t.a_loose()[i]);
        }
    }

    #[test]
    fn single_point_grid_is_rejected() {
        let mut lp = AnalyticLoop::new(stub_law);
        let err = run_calibration(&mut lp, &[8.0], &SettleCriterion::default()).unwrap_err();
        assert!(err.to_string().contains("at least 2 points"), "{err}");
    }

    #[test]
    fn reversed_direction_is_reported() {
        let mut lp = AnalyticLoop::new(|n, r| (0.2 + 0.8 * r) * (0.5 + 0.1 * (17.0 - n)));
        assert!(matches!(
            run_calibration(&mut lp, &[4.0, 8.0], &SettleCriterion::default()),
            Err(Error::ModelDirection { .. })
        ));
    }

    struct Wobbly(u64);
    impl CalibrationLoop for Wobbly {
        fn tick_rate(&self) -> f64 {
            400.0
        }
        fn hold(&mut self, _: f64, _: f64) -> Result<()> {
            Ok(())
        }
        fn tick(&mut self) -> Result<f64> {
            self.0 += 1;
            Ok(1.0 + 0.001 * self.0 as f64)
        }
    }

    #[test]
    fn non_settling_loop_names_grid_point() {
        let err = run_calibration(&mut Wobbly(0), &[3.0, 9.0], &SettleCriterion::default()).unwrap_err();
        match err {
            Error::Calibration { nearness, .. } => assert_eq!(nearness, 3.0),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn rigidity_monotone_in_amplitude(n in 0.0f64..10.0, a1 in 0.0f64..2.0, a2 in 0.0f64..2.0) {
            let t = table();
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let r_lo = t.compute_rigidity(lo, n).unwrap();
            let r_hi = t.compute_rigidity(hi, n).unwrap();
            prop_assert!(r_hi <= r_lo);
            prop_assert!((0.0..=1.0).contains(&r_lo));
        }
    }
}
