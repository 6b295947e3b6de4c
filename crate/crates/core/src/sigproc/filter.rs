//! IIR filter design and zero-phase application.
//!
//! Band-pass is a Butterworth high-pass cascaded with a Butterworth
//! low-pass, each realized as second-order sections from the bilinear
//! transform with pre-warped corner frequencies. The notch is the bilinear
//! image of the first-order analog band-stop `(s^2 + w0^2) / (s^2 + B s + w0^2)`
//! with its -3 dB edges placed exactly at the requested band.
//!
//! Filters run forward and backward (magnitude squared, zero phase), over an
//! odd-symmetric extension of the signal with steady-state initial
//! conditions on both passes.

use std::f64::consts::PI;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default high-pass order of the analysis band-pass.
pub const BANDPASS_HIGHPASS_ORDER: usize = 4;
/// Default low-pass order of the analysis band-pass.
pub const BANDPASS_LOWPASS_ORDER: usize = 8;

/// One section in transposed direct form II, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Biquad {
            b: [b[0] / a[0], b[1] / a[0], b[2] / a[0]],
            a: [a[1] / a[0], a[2] / a[0]],
        }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that leaves the section at rest for a unit constant input.
    fn steady_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * g;
        let z1 = self.b[1] - self.a[0] * g + z2;
        [z1, z2]
    }

    /// Largest pole magnitude.
    fn pole_radius(&self) -> f64 {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let s = disc.sqrt();
            ((-a1 + s) / 2.0).abs().max(((-a1 - s) / 2.0).abs())
        }
    }

    /// Magnitude response at `hz`.
    pub fn gain(&self, hz: f64, fs_hz: f64) -> f64 {
        let w = 2.0 * PI * hz / fs_hz;
        let (c1, s1, c2, s2) = (w.cos(), w.sin(), (2.0 * w).cos(), (2.0 * w).sin());
        let nr = self.b[0] + self.b[1] * c1 + self.b[2] * c2;
        let ni = -(self.b[1] * s1 + self.b[2] * s2);
        let dr = 1.0 + self.a[0] * c1 + self.a[1] * c2;
        let di = -(self.a[0] * s1 + self.a[1] * s2);
        ((nr * nr + ni * ni) / (dr * dr + di * di)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pass {
    Low,
    High,
}

/// Butterworth sections of the given order. Odd orders get one
/// first-order section (stored as a biquad with zero second-order terms).
fn butterworth(order: usize, corner_hz: f64, fs_hz: f64, pass: Pass) -> Vec<Biquad> {
    let w0 = 2.0 * PI * corner_hz / fs_hz;
    let (sw, cw) = (w0.sin(), w0.cos());
    let mut out = Vec::with_capacity(order.div_ceil(2));
    for k in 0..order / 2 {
        let q = 1.0 / (2.0 * ((2 * k + 1) as f64 * PI / (2 * order) as f64).sin());
        let alpha = sw / (2.0 * q);
        let a = [1.0 + alpha, -2.0 * cw, 1.0 - alpha];
        let b = match pass {
            Pass::Low => [(1.0 - cw) / 2.0, 1.0 - cw, (1.0 - cw) / 2.0],
            Pass::High => [(1.0 + cw) / 2.0, -(1.0 + cw), (1.0 + cw) / 2.0],
        };
        out.push(Biquad::normalized(b, a));
    }
    if order % 2 == 1 {
        let k = (w0 / 2.0).tan();
        let a = [1.0 + k, k - 1.0, 0.0];
        let b = match pass {
            Pass::Low => [k, k, 0.0],
            Pass::High => [1.0, -1.0, 0.0],
        };
        out.push(Biquad::normalized(b, a));
    }
    out
}

fn check_band(lo_hz: f64, hi_hz: f64, fs_hz: f64) -> Result<()> {
    if !(fs_hz.is_finite() && fs_hz > 0.0) {
        return Err(Error::param(
            "fs_hz",
            format!("must be positive, got {fs_hz}"),
        ));
    }
    if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs_hz / 2.0) {
        return Err(Error::param(
            "band",
            format!("need 0 < lo < hi < fs/2, got [{lo_hz}, {hi_hz}] at fs {fs_hz}"),
        ));
    }
    Ok(())
}

/// A cascade of second-order sections applied forward-backward.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPhaseFilter {
    sections: Vec<Biquad>,
    fs_hz: f64,
    pad_len: usize,
}

impl ZeroPhaseFilter {
    fn from_sections(sections: Vec<Biquad>, fs_hz: f64) -> Self {
        // Extension long enough for the slowest pole to decay by ~e^-8.
        let slowest = sections
            .iter()
            .map(Biquad::pole_radius)
            .fold(0.0_f64, f64::max);
        let tau = if slowest > 0.0 && slowest < 1.0 {
            -1.0 / slowest.ln()
        } else {
            0.0
        };
        let pad_len = (8.0 * tau).ceil() as usize + 3 * (2 * sections.len() + 1);
        ZeroPhaseFilter {
            sections,
            fs_hz,
            pad_len,
        }
    }

    pub fn bandpass(lo_hz: f64, hi_hz: f64, fs_hz: f64) -> Result<Self> {
        Self::bandpass_with_orders(
            lo_hz,
            hi_hz,
            fs_hz,
            BANDPASS_HIGHPASS_ORDER,
            BANDPASS_LOWPASS_ORDER,
        )
    }

    pub fn bandpass_with_orders(
        lo_hz: f64,
        hi_hz: f64,
        fs_hz: f64,
        highpass_order: usize,
        lowpass_order: usize,
    ) -> Result<Self> {
        check_band(lo_hz, hi_hz, fs_hz)?;
        if highpass_order == 0 || lowpass_order == 0 {
            return Err(Error::param("order", "filter orders must be at least 1"));
        }
        let mut sections = butterworth(highpass_order, lo_hz, fs_hz, Pass::High);
        sections.extend(butterworth(lowpass_order, hi_hz, fs_hz, Pass::Low));
        Ok(Self::from_sections(sections, fs_hz))
    }

    /// Band-stop with -3 dB (single pass) edges at `lo_hz` and `hi_hz`.
    pub fn notch(lo_hz: f64, hi_hz: f64, fs_hz: f64) -> Result<Self> {
        check_band(lo_hz, hi_hz, fs_hz)?;
        let wl = (PI * lo_hz / fs_hz).tan();
        let wh = (PI * hi_hz / fs_hz).tan();
        let w0sq = wl * wh;
        let bw = wh - wl;
        let b = [1.0 + w0sq, 2.0 * (w0sq - 1.0), 1.0 + w0sq];
        let a = [1.0 + bw + w0sq, 2.0 * (w0sq - 1.0), 1.0 - bw + w0sq];
        Ok(Self::from_sections(vec![Biquad::normalized(b, a)], fs_hz))
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn fs_hz(&self) -> f64 {
        self.fs_hz
    }

    /// Samples of odd extension added on each side; inputs must be longer.
    pub fn warm_up_len(&self) -> usize {
        self.pad_len
    }

    /// Zero-phase magnitude response (single-pass gain squared).
    pub fn gain(&self, hz: f64) -> f64 {
        self.sections
            .iter()
            .map(|s| s.gain(hz, self.fs_hz))
            .product::<f64>()
            .powi(2)
    }

    fn run(&self, x: &mut [f64]) {
        let mut carry = 1.0;
        let x0 = x[0];
        for s in &self.sections {
            let zi = s.steady_state();
            let (mut z1, mut z2) = (zi[0] * x0 * carry, zi[1] * x0 * carry);
            carry *= s.dc_gain();
            for v in x.iter_mut() {
                let xin = *v;
                let y = s.b[0] * xin + z1;
                z1 = s.b[1] * xin - s.a[0] * y + z2;
                z2 = s.b[2] * xin - s.a[1] * y;
                *v = y;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let pad = self.pad_len;
        if n <= pad {
            return Err(Error::SignalTooShort {
                len: n,
                required: pad + 1,
            });
        }
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));

        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }

    /// Filters every row (channel) of a channels x time matrix.
    pub fn apply_rows(&self, data: &Array2<f64>) -> Result<Array2<f64>> {
        let rows: Vec<Vec<f64>> = (0..data.nrows())
            .into_par_iter()
            .map(|i| self.apply(&data.row(i).to_vec()))
            .collect::<Result<_>>()?;
        let (nc, ns) = data.dim();
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Ok(Array2::from_shape_vec((nc, ns), flat).expect("shape preserved"))
    }
}
