use crate::dual::MAX_CHANNELS;
use crate::error::{Error, Result};
use crate::temporal::FrameSpec;

/// Per-pixel time-resolved intensity with one gradient plane per parameter.
///
/// Planes are `H × W × N_f` row-major: bin `(row, col, frame)` lives at
/// `(row * W + col) * N_f + frame`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransientHistogram {
    pub height: usize,
    pub width: usize,
    pub frames: usize,
    pub t0: f64,
    pub dt: f64,
    pub c: f64,
    pub intensity: Vec<f64>,
    pub grads: Vec<Vec<f64>>,
    pub samples_interior: u64,
    pub samples_boundary: u64,
    /// Non-finite contributions dropped during accumulation.
    pub nonfinite: u64,
}

impl TransientHistogram {
    pub fn zeros(frames: &FrameSpec, c: f64, params: usize) -> TransientHistogram {
        let n = frames.width * frames.height * frames.count;
        TransientHistogram {
            height: frames.height,
            width: frames.width,
            frames: frames.count,
            t0: frames.start,
            dt: frames.exposure,
            c,
            intensity: vec![0.0; n],
            grads: vec![vec![0.0; n]; params],
            samples_interior: 0,
            samples_boundary: 0,
            nonfinite: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn num_params(&self) -> usize {
        self.grads.len()
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, frame: usize) -> usize {
        (row * self.width + col) * self.frames + frame
    }

    /// One frame of a plane as an `H × W` image.
    pub fn frame_of(&self, plane: &[f64], frame: usize) -> Vec<f64> {
        (0..self.height * self.width).map(|p| plane[p * self.frames + frame]).collect()
    }

    /// Sum over frames of a plane.
    pub fn time_integrated(&self, plane: &[f64]) -> Vec<f64> {
        plane.chunks(self.frames).map(|c| c.iter().sum()).collect()
    }

    pub fn same_dims(&self, o: &TransientHistogram) -> bool {
        self.height == o.height && self.width == o.width && self.frames == o.frames
    }

    pub fn check_dims(&self, o: &TransientHistogram) -> Result<()> {
        if self.same_dims(o) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.frames, o.height, o.width, o.frames
            )))
        }
    }

    /// Adds the intensity and gradient planes of `o`.
    pub fn accumulate(&mut self, o: &TransientHistogram) -> Result<()> {
        self.check_dims(o)?;
        if self.grads.len() != o.grads.len() {
            return Err(Error::DimensionMismatch(format!("{} vs {} parameters", self.grads.len(), o.grads.len())));
        }
        for (a, b) in self.intensity.iter_mut().zip(&o.intensity) {
            *a += b;
        }
        for (ga, gb) in self.grads.iter_mut().zip(&o.grads) {
            for (a, b) in ga.iter_mut().zip(gb) {
                *a += b;
            }
        }
        self.samples_interior += o.samples_interior;
        self.samples_boundary += o.samples_boundary;
        self.nonfinite += o.nonfinite;
        Ok(())
    }
}

/// Per-worker accumulator over derivative channels.
#[derive(Clone, Debug)]
pub(crate) struct Accumulator {
    pub intensity: Vec<f64>,
    pub channels: Vec<Vec<f64>>,
    pub nonfinite: u64,
}

impl Accumulator {
    pub fn new(bins: usize, channels: usize, with_intensity: bool) -> Accumulator {
        debug_assert!(channels <= MAX_CHANNELS);
        Accumulator {
            intensity: if with_intensity { vec![0.0; bins] } else { Vec::new() },
            channels: vec![vec![0.0; bins]; channels],
            nonfinite: 0,
        }
    }

    #[inline]
    pub fn add_value(&mut self, idx: usize, v: f64) {
        if v.is_finite() {
            self.intensity[idx] += v;
        } else {
            self.nonfinite += 1;
        }
    }

    #[inline]
    pub fn add_grad(&mut self, idx: usize, g: &[f64; MAX_CHANNELS]) {
        for (ch, plane) in self.channels.iter_mut().enumerate() {
            let v = g[ch];
            if v.is_finite() {
                plane[idx] += v;
            } else {
                self.nonfinite += 1;
            }
        }
    }

    pub fn merge(&mut self, o: &Accumulator) {
        for (a, b) in self.intensity.iter_mut().zip(&o.intensity) {
            *a += b;
        }
        for (pa, pb) in self.channels.iter_mut().zip(&o.channels) {
            for (a, b) in pa.iter_mut().zip(pb) {
                *a += b;
            }
        }
        self.nonfinite += o.nonfinite;
    }

    /// Divides every plane by `n`.
    pub fn scaled(mut self, n: f64) -> Accumulator {
        for v in self.intensity.iter_mut().chain(self.channels.iter_mut().flatten()) {
            *v /= n;
        }
        self
    }

    /// Folds channels into their parameters.
    pub fn into_histogram(self, frames: &FrameSpec, c: f64, channel_param: &[usize], params: usize) -> TransientHistogram {
        let mut h = TransientHistogram::zeros(frames, c, params);
        h.nonfinite = self.nonfinite;
        if !self.intensity.is_empty() {
            h.intensity = self.intensity;
        }
        for (ch, plane) in self.channels.iter().enumerate() {
            let g = &mut h.grads[channel_param[ch]];
            for (a, b) in g.iter_mut().zip(plane) {
                *a += b;
            }
        }
        h
    }
}
