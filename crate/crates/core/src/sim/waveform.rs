use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FaultSpec, LoadScenario};
use crate::error::{Error, Result};
use crate::grid::PHASES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformParams {
    /// Sampling rate in hertz.
    pub fs: f64,
    /// System frequency in hertz.
    pub f0: f64,
    /// Record length in seconds.
    pub duration: f64,
}

impl Default for WaveformParams {
    fn default() -> Self {
        Self {
            fs: 1000.0,
            f0: 60.0,
            duration: 1.0,
        }
    }
}

impl WaveformParams {
    pub fn n_samples(&self) -> usize {
        (self.duration * self.fs).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 2.0 * self.f0) || !(self.f0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sampling rate {} Hz aliases a {} Hz signal",
                self.fs, self.f0
            )));
        }
        if !(self.duration > 0.0) || self.n_samples() == 0 {
            return Err(Error::InvalidArgument(format!("record duration {} is empty", self.duration)));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.fs
    }
}

/// Per-bus three-phase voltage samples, bus-major, phase-major, time-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    pub n_buses: usize,
    pub params: WaveformParams,
    pub onset: f64,
    pub samples: Vec<f64>,
    pub fault: Option<FaultSpec>,
    pub scenario: Option<LoadScenario>,
}

impl WaveformRecord {
    pub fn n_samples(&self) -> usize {
        self.params.n_samples()
    }

    pub fn trace(&self, bus: usize, phase: usize) -> &[f64] {
        let t = self.n_samples();
        let start = (bus * PHASES + phase) * t;
        &self.samples[start..start + t]
    }

    /// First sample index at or after the onset instant.
    pub fn onset_index(&self) -> usize {
        (0..self.n_samples())
            .find(|&k| self.params.time(k) >= self.onset)
            .unwrap_or(self.n_samples())
    }
}

fn check(pre: &[[Complex64; PHASES]], post: &[[Complex64; PHASES]], onset: f64, params: &WaveformParams) -> Result<()> {
    params.validate()?;
    if pre.len() != post.len() {
        return Err(Error::shape("synthesize_waveforms", &[pre.len(), PHASES], &[post.len(), PHASES]));
    }
    if !(onset > 0.0 && onset < params.duration) {
        return Err(Error::InvalidArgument(format!(
            "onset {onset} s outside (0, {}) s",
            params.duration
        )));
    }
    Ok(())
}

/// Samples `start..start + len` of every bus-phase trace, laid out like
/// [`WaveformRecord::samples`] but with `len` samples per trace.
pub fn synthesize_span(
    pre: &[[Complex64; PHASES]],
    post: &[[Complex64; PHASES]],
    onset: f64,
    params: &WaveformParams,
    start: usize,
    len: usize,
) -> Result<Vec<f64>> {
    check(pre, post, onset, params)?;
    if start + len > params.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "span {start}..{} exceeds {} samples",
            start + len,
            params.n_samples()
        )));
    }
    let omega = 2.0 * PI * params.f0;
    let mut out = Vec::with_capacity(pre.len() * PHASES * len);
    for (v_pre, v_post) in pre.iter().zip(post) {
        for p in 0..PHASES {
            let (mag_pre, ang_pre) = v_pre[p].to_polar();
            let (mag_post, ang_post) = v_post[p].to_polar();
            for k in start..start + len {
                let t = params.time(k);
                let value = if t < onset {
                    mag_pre * (omega * t + ang_pre).cos()
                } else {
                    mag_post * (omega * t + ang_post).cos()
                };
                out.push(value);
            }
        }
    }
    Ok(out)
}

/// Full-length record switching from the `pre` to the `post` phasors at
/// `onset`.
pub fn synthesize_waveforms(
    pre: &[[Complex64; PHASES]],
    post: &[[Complex64; PHASES]],
    onset: f64,
    params: &WaveformParams,
) -> Result<WaveformRecord> {
    let samples = synthesize_span(pre, post, onset, params, 0, params.n_samples())?;
    Ok(WaveformRecord {
        n_buses: pre.len(),
        params: *params,
        onset,
        samples,
        fault: None,
        scenario: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phasors(mag: f64, shift: f64) -> Vec<[Complex64; PHASES]> {
        vec![[0.0, -120.0, 120.0].map(|deg: f64| Complex64::from_polar(mag, (deg + shift).to_radians()))]
    }

    #[test]
    fn no_transition_is_a_pure_sinusoid() {
        let v = phasors(1.0, 10.0);
        let params = WaveformParams::default();
        let rec = synthesize_waveforms(&v, &v, 0.5, &params).unwrap();
        assert_eq!(rec.n_samples(), 1000);
        assert_eq!(rec.samples.len(), 3000);
        for k in 0..1000 {
            let t = k as f64 / 1000.0;
            let expected = (2.0 * PI * 60.0 * t + 10f64.to_radians()).cos();
            assert!((rec.trace(0, 0)[k] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn switch_happens_at_onset_sample() {
        let pre = phasors(1.0, 0.0);
        let post = phasors(0.3, -25.0);
        let params = WaveformParams::default();
        let rec = synthesize_waveforms(&pre, &post, 0.5, &params).unwrap();
        let only_pre = synthesize_waveforms(&pre, &pre, 0.5, &params).unwrap();
        let only_post = synthesize_waveforms(&post, &post, 0.5, &params).unwrap();
        assert_eq!(rec.onset_index(), 500);
        for p in 0..3 {
            assert_eq!(rec.trace(0, p)[..500], only_pre.trace(0, p)[..500]);
            assert_eq!(rec.trace(0, p)[500..], only_post.trace(0, p)[500..]);
        }
    }

    #[test]
    fn span_matches_full_record() {
        let pre = phasors(1.0, 0.0);
        let post = phasors(0.5, 30.0);
        let params = WaveformParams::default();
        let full = synthesize_waveforms(&pre, &post, 0.437, &params).unwrap();
        let span = synthesize_span(&pre, &post, 0.437, &params, 420, 20).unwrap();
        for p in 0..3 {
            assert_eq!(&span[p * 20..(p + 1) * 20], &full.trace(0, p)[420..440]);
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        let v = phasors(1.0, 0.0);
        let params = WaveformParams {
            fs: 100.0,
            f0: 60.0,
            duration: 1.0,
        };
        assert!(synthesize_waveforms(&v, &v, 0.5, &params).is_err());
    }

    #[test]
    fn onset_must_lie_inside_record() {
        let v = phasors(1.0, 0.0);
        let params = WaveformParams::default();
        assert!(synthesize_waveforms(&v, &v, 0.0, &params).is_err());
        assert!(synthesize_waveforms(&v, &v, 1.0, &params).is_err());
    }

    #[test]
    fn cycle_rms_is_constant_at_fifty_hertz() {
        let v = phasors(0.97, 17.0);
        let params = WaveformParams {
            fs: 1000.0,
            f0: 50.0,
            duration: 1.0,
        };
        let rec = synthesize_waveforms(&v, &v, 0.5, &params).unwrap();
        for p in 0..3 {
            let rms: Vec<f64> = rec
                .trace(0, p)
                .chunks_exact(20)
                .map(|c| (c.iter().map(|x| x * x).sum::<f64>() / 20.0).sqrt())
                .collect();
            for r in &rms {
                assert!((r - rms[0]).abs() <= 1e-9 * rms[0]);
            }
        }
    }
}
