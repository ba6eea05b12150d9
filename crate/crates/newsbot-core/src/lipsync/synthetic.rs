//! Deterministic synthetic training data.
//!
//! The real training corpus (video with fitted per-frame blendshape weights)
//! is replaced by a desk-scale task: every phoneme id gets a fixed pose
//! vector — silence is the zero pose — and each training window's target is
//! the poses of its covered frames plus small seeded noise. Frame sequences
//! alternate silence runs with phoneme runs so the network sees plenty of
//! silence context at sequence edges.

use super::{DatasetSample, FrameWindowing, LipsyncError};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct SyntheticTask {
    windowing: FrameWindowing,
    inventory_size: usize,
    /// `poses[id]` is the target blendshape vector for phoneme `id`;
    /// `poses[0]` (silence) is all zeros.
    poses: Vec<Vec<f64>>,
}

impl SyntheticTask {
    /// Fixed per-phoneme poses drawn uniformly from `[0.1, 0.9]`, silence at
    /// zero.
    pub fn new(
        inventory_size: usize,
        windowing: FrameWindowing,
        seed: u64,
    ) -> Result<Self, LipsyncError> {
        windowing.validate()?;
        if inventory_size < 2 {
            return Err(LipsyncError::InvalidShape(
                "synthetic task needs silence plus at least one phoneme".into(),
            ));
        }
        let mut rng = SplitMix64::new(seed);
        let mut poses = vec![vec![0.0; windowing.num_blendshapes]];
        for _ in 1..inventory_size {
            poses.push(
                (0..windowing.num_blendshapes)
                    .map(|_| rng.next_range(0.1, 0.9))
                    .collect(),
            );
        }
        Ok(Self {
            windowing,
            inventory_size,
            poses,
        })
    }

    pub fn inventory_size(&self) -> usize {
        self.inventory_size
    }

    pub fn windowing(&self) -> FrameWindowing {
        self.windowing
    }

    pub fn pose(&self, id: usize) -> Option<&[f64]> {
        self.poses.get(id).map(Vec::as_slice)
    }

    /// A frame sequence alternating silence runs (2-5 frames) and phoneme
    /// runs (2-7 frames of one random id).
    fn frame_sequence(&self, length: usize, rng: &mut SplitMix64) -> Vec<usize> {
        let mut frames = Vec::with_capacity(length);
        let mut silence = true;
        while frames.len() < length {
            let (run, id) = if silence {
                (2 + rng.next_bounded(4) as usize, 0)
            } else {
                (
                    2 + rng.next_bounded(6) as usize,
                    1 + rng.next_bounded(self.inventory_size as u64 - 1) as usize,
                )
            };
            for _ in 0..run {
                frames.push(id);
            }
            silence = !silence;
        }
        frames.truncate(length);
        frames
    }

    /// The noise-free target block for frame `t` of a sequence: one pose row
    /// per output-window position, silence-padded at the edges.
    pub fn target_for(&self, frames: &[usize], t: usize) -> Vec<f64> {
        let half = (self.windowing.output_window / 2) as isize;
        let mut target = Vec::with_capacity(self.windowing.output_dim());
        for row in 0..self.windowing.output_window {
            let f = t as isize + row as isize - half;
            let id = if f < 0 || f >= frames.len() as isize {
                0
            } else {
                frames[f as usize]
            };
            target.extend_from_slice(&self.poses[id]);
        }
        target
    }

    /// Generate `count` training samples with uniform `±noise_amplitude`
    /// target noise. Deterministic in `seed`.
    pub fn generate(&self, count: usize, noise_amplitude: f64, seed: u64) -> Vec<DatasetSample> {
        let mut rng = SplitMix64::new(seed);
        let in_half = (self.windowing.input_window / 2) as isize;
        let mut samples = Vec::with_capacity(count);
        while samples.len() < count {
            let frames = self.frame_sequence(64, &mut rng);
            for t in 0..frames.len() {
                if samples.len() == count {
                    break;
                }
                let input_ids: Vec<usize> = (t as isize - in_half..=t as isize + in_half)
                    .map(|f| {
                        if f < 0 || f >= frames.len() as isize {
                            0
                        } else {
                            frames[f as usize]
                        }
                    })
                    .collect();
                let target = self
                    .target_for(&frames, t)
                    .into_iter()
                    .map(|v| v + rng.next_range(-noise_amplitude, noise_amplitude))
                    .collect();
                samples.push(DatasetSample { input_ids, target });
            }
        }
        samples
    }
}
