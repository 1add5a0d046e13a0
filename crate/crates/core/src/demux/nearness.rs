use std::collections::VecDeque;

/// Moving average over a whole number of tactile cycles.
#[derive(Debug, Clone)]
pub struct NearnessState {
    window: usize,
    buf: VecDeque<f64>,
    sum: f64,
    since_resync: usize,
    nearness: f64,
}

impl NearnessState {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "nearness window must be non-empty");
        Self { window, buf: VecDeque::with_capacity(window), sum: 0.0, since_resync: 0, nearness: 0.0 }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// True until the window has been filled once.
    pub fn warming_up(&self) -> bool {
        self.buf.len() < self.window
    }

    pub fn nearness(&self) -> f64 {
        self.nearness
    }

    /// Push one proximity value in mm and return the mean of the last
    /// `window` values (or of all values seen, during warm-up).
    pub fn update(&mut self, sample: f64) -> f64 {
        if self.buf.len() == self.window {
            let old = self.buf.pop_front().unwrap_or(0.0);
            self.sum -= old;
        }
        self.buf.push_back(sample);
        self.sum += sample;
        self.since_resync += 1;
        // re-sum once per window so rounding in the running sum cannot drift
        if self.since_resync >= self.window {
            self.sum = self.buf.iter().sum();
            self.since_resync = 0;
        }
        self.nearness = self.sum / self.buf.len() as f64;
        self.nearness
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn quantize(x: f64) -> f64 {
        (x / 0.2).round_ties_even() * 0.2
    }

    #[test]
    fn constant_stream() {
        let mut n = NearnessState::new(40);
        let mut last = 0.0;
        for _ in 0..100 {
            last = n.update(8.4);
        }
        assert!((last - 8.4).abs() < 1e-12);
    }

    #[test]
    fn warm_up_uses_available_samples() {
        let mut n = NearnessState::new(4);
        assert!(n.warming_up());
        assert_eq!(n.update(1.0), 1.0);
        assert_eq!(n.update(3.0), 2.0);
        assert_eq!(n.update(5.0), 3.0);
        assert_eq!(n.update(7.0), 4.0);
        assert!(!n.warming_up());
        assert_eq!(n.update(9.0), 6.0);
    }

    #[test]
    fn fifty_hz_sine_cancels_over_whole_cycles() {
        let mut n = NearnessState::new(40);
        for i in 0..2000 {
            let t = i as f64 / 400.0;
            let v = n.update(8.4 + (2.0 * PI * 50.0 * t).sin());
            if i >= 40 {
                assert!((v - 8.4).abs() < 1e-9, "i={i} err={}", v - 8.4);
            }
        }
    }

    #[test]
    fn forty_eight_hz_sine_cancels_over_fifty_samples() {
        let mut n = NearnessState::new(50);
        for i in 0..2000 {
            let t = i as f64 / 400.0;
            let v = n.update(8.4 + 1.3 * (2.0 * PI * 48.0 * t + 0.3).sin());
            if i >= 50 {
                assert!((v - 8.4).abs() < 1e-9, "i={i} err={}", v - 8.4);
            }
        }
    }

    #[test]
    fn quantized_sine_within_half_step() {
        let mut n = NearnessState::new(40);
        for i in 0..2000 {
            let t = i as f64 / 400.0;
            let v = n.update(quantize(8.4 + (2.0 * PI * 50.0 * t).sin()));
            if i >= 40 {
                assert!((v - 8.4).abs() <= 0.1 + 1e-12, "i={i} err={}", v - 8.4);
            }
        }
    }
}
