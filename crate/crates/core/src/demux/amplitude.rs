/// Exponentially averaged RMS deviation of proximity from nearness.
///
/// The average is divided by the weight accumulated so far, so it carries
/// no start-up bias toward zero.
#[derive(Debug, Clone)]
pub struct AmplitudeState {
    alpha: f64,
    mean_square: f64,
    /// `1 - (1 - alpha)^n` after n updates.
    weight: f64,
    amplitude: f64,
}

impl AmplitudeState {
    /// `tau` is the averaging time constant in s, `sample_rate` in Hz.
    pub fn new(tau: f64, sample_rate: f64) -> Self {
        Self { alpha: 1.0 - (-1.0 / (tau * sample_rate)).exp(), mean_square: 0.0, weight: 0.0, amplitude: 0.0 }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn update(&mut self, sample: f64, nearness: f64) -> f64 {
        let d = sample - nearness;
        self.mean_square += self.alpha * (d * d - self.mean_square);
        self.weight += self.alpha * (1.0 - self.weight);
        self.amplitude = (self.mean_square / self.weight).max(0.0).sqrt();
        self.amplitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const RATE: f64 = 400.0;
    const TAU: f64 = 0.2;

    fn run(signal: impl Fn(f64) -> f64) -> f64 {
        let mut a = AmplitudeState::new(TAU, RATE);
        let n = (5.0 * TAU * RATE).ceil() as usize;
        let mut out = 0.0;
        for i in 0..n {
            out = a.update(8.0 + signal(i as f64 / RATE), 8.0);
        }
        out
    }

    #[test]
    fn first_sample_is_unbiased() {
        let mut a = AmplitudeState::new(TAU, RATE);
        assert!((a.update(8.5, 8.0) - 0.5).abs() < 1e-12);
        assert!((a.update(7.5, 8.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_stream_has_no_amplitude() {
        assert_eq!(run(|_| 0.0), 0.0);
    }

    #[test]
    fn sine_converges_to_rms() {
        let amp = 1.5;
        let got = run(|t| amp * (2.0 * PI * 50.0 * t).sin());
        let want = amp / 2f64.sqrt();
        assert!(((got - want) / want).abs() < 0.02, "{got} vs {want}");
    }

    #[test]
    fn square_converges_to_amplitude() {
        let amp = 0.8;
        let got = run(|t| if (2.0 * PI * 50.0 * t + 0.1).sin() >= 0.0 { amp } else { -amp });
        assert!(((got - amp) / amp).abs() < 0.02, "{got} vs {amp}");
    }
}
