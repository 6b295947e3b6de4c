//! Seeded background noise: `1/f^alpha` shaped Gaussian noise plus white noise.

use std::cell::RefCell;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

/// Background model. The colored part has one-sided power spectral density
/// `pink_density / f^exponent` (uV^2/Hz); the white part has standard
/// deviation `white_sigma_uv` over the full band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub pink_density: f64,
    pub exponent: f64,
    pub white_sigma_uv: f64,
    /// Fraction of noise power shared by every channel of the group.
    pub spatial_correlation: f64,
}

impl NoiseConfig {
    pub fn silent() -> Self {
        NoiseConfig {
            pink_density: 0.0,
            exponent: 1.0,
            white_sigma_uv: 0.0,
            spatial_correlation: 0.0,
        }
    }

    /// Expected noise power (uV^2) between `lo_hz` and `hi_hz`.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64, fs_hz: f64) -> f64 {
        let colored = if (self.exponent - 1.0).abs() < 1e-12 {
            self.pink_density * (hi_hz / lo_hz).ln()
        } else {
            let e = 1.0 - self.exponent;
            self.pink_density * (hi_hz.powf(e) - lo_hz.powf(e)) / e
        };
        let white = self.white_sigma_uv.powi(2) * (hi_hz - lo_hz) / (fs_hz / 2.0);
        colored + white
    }

    pub fn is_silent(&self) -> bool {
        self.pink_density == 0.0 && self.white_sigma_uv == 0.0
    }
}

/// Smallest length `>= n` whose only prime factors are 2, 3 and 5.
fn fast_len(n: usize) -> usize {
    (n.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("unbounded range")
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `n` samples of the configured background. The colored part is shaped over
/// a slightly longer circular record and truncated.
pub fn colored_noise(rng: &mut ChaCha8Rng, n: usize, fs_hz: f64, cfg: &NoiseConfig) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if n == 0 || cfg.is_silent() {
        return out;
    }
    if cfg.pink_density > 0.0 {
        let m = fast_len(n);
        let mut buf: Vec<Complex<f64>> = (0..m)
            .map(|_| Complex::new(rng.sample::<f64, _>(StandardNormal), 0.0))
            .collect();
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(m), p.plan_fft_inverse(m))
        });
        forward.process(&mut buf);
        let df = fs_hz / m as f64;
        let scale = (cfg.pink_density * fs_hz / 2.0).sqrt();
        let half_exp = -cfg.exponent / 2.0;
        buf[0] = Complex::new(0.0, 0.0);
        for j in 1..=m / 2 {
            let g = scale * (j as f64 * df).powf(half_exp);
            buf[j] *= g;
            if j != m - j {
                buf[m - j] *= g;
            }
        }
        inverse.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re / m as f64;
        }
    }
    if cfg.white_sigma_uv > 0.0 {
        for o in out.iter_mut() {
            *o += cfg.white_sigma_uv * rng.sample::<f64, _>(StandardNormal);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn band_power_of(x: &[f64], fs: f64, lo: f64, hi: f64) -> f64 {
        let n = x.len();
        let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let df = fs / n as f64;
        (1..n / 2)
            .filter(|&k| (k as f64 * df) >= lo && (k as f64 * df) < hi)
            .map(|k| 2.0 * buf[k].norm_sqr() / (n as f64 * n as f64))
            .sum()
    }

    #[test]
    fn band_power_matches_model() {
        let cfg = NoiseConfig {
            pink_density: 50.0,
            exponent: 1.0,
            white_sigma_uv: 2.0,
            spatial_correlation: 0.0,
        };
        let fs = 1200.0;
        let mut acc = 0.0;
        let reps = 20;
        for s in 0..reps {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            acc += band_power_of(&colored_noise(&mut rng, 12_000, fs, &cfg), fs, 4.0, 50.0);
        }
        let measured = acc / reps as f64;
        let expected = cfg.band_power(4.0, 50.0, fs);
        assert!(
            (measured / expected - 1.0).abs() < 0.05,
            "{measured} vs {expected}"
        );
    }

    #[test]
    fn spectral_slope_is_one_over_f() {
        let cfg = NoiseConfig {
            pink_density: 10.0,
            exponent: 1.0,
            white_sigma_uv: 0.0,
            spatial_correlation: 0.0,
        };
        let fs = 1200.0;
        let mut lo = 0.0;
        let mut hi = 0.0;
        for s in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
            let x = colored_noise(&mut rng, 24_000, fs, &cfg);
            lo += band_power_of(&x, fs, 5.0, 10.0);
            hi += band_power_of(&x, fs, 40.0, 80.0);
        }
        // equal log-width bands carry equal power for 1/f
        assert!((lo / hi - 1.0).abs() < 0.1, "{}", lo / hi);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = NoiseConfig {
            pink_density: 1.0,
            exponent: 1.0,
            white_sigma_uv: 1.0,
            spatial_correlation: 0.0,
        };
        let a = colored_noise(&mut ChaCha8Rng::seed_from_u64(7), 1000, 1200.0, &cfg);
        let b = colored_noise(&mut ChaCha8Rng::seed_from_u64(7), 1000, 1200.0, &cfg);
        assert_eq!(a, b);
        assert!(colored_noise(
            &mut ChaCha8Rng::seed_from_u64(7),
            10,
            1200.0,
            &NoiseConfig::silent()
        )
        .iter()
        .all(|&v| v == 0.0));
    }
}
