//! Input windowing and output blending.

use super::{FrameWindowing, LipsyncError};

/// One-hot encode a single window of phoneme ids. Slot-major layout: slot 0
/// occupies components `0..P`, slot 1 components `P..2P`, and so on.
pub(crate) fn encode_window(
    ids: &[usize],
    inventory_size: usize,
) -> Result<Vec<f64>, LipsyncError> {
    let mut encoded = vec![0.0; ids.len() * inventory_size];
    for (slot, &id) in ids.iter().enumerate() {
        if id >= inventory_size {
            return Err(LipsyncError::IdOutOfRange { id, inventory_size });
        }
        encoded[slot * inventory_size + id] = 1.0;
    }
    Ok(encoded)
}

/// Build one input vector per frame: frame `t`'s window covers frames
/// `t-half ..= t+half` (`half = input_window / 2`), with out-of-range
/// positions padded by silence (id 0).
pub fn one_hot_windows(
    frame_ids: &[usize],
    inventory_size: usize,
    windowing: &FrameWindowing,
) -> Result<Vec<Vec<f64>>, LipsyncError> {
    windowing.validate()?;
    if inventory_size == 0 {
        return Err(LipsyncError::InvalidShape("empty inventory".into()));
    }
    if let Some(&id) = frame_ids.iter().find(|&&id| id >= inventory_size) {
        return Err(LipsyncError::IdOutOfRange { id, inventory_size });
    }
    let half = (windowing.input_window / 2) as isize;
    let mut windows = Vec::with_capacity(frame_ids.len());
    for t in 0..frame_ids.len() as isize {
        let ids: Vec<usize> = (t - half..=t + half)
            .map(|f| {
                if f < 0 || f >= frame_ids.len() as isize {
                    0
                } else {
                    frame_ids[f as usize]
                }
            })
            .collect();
        windows.push(encode_window(&ids, inventory_size)?);
    }
    Ok(windows)
}

/// Blend overlapping window predictions into per-frame weights.
///
/// Window `t` predicts frames `t-half ..= t+half` (`half = output_window/2`),
/// one `num_blendshapes`-row per frame. Each output frame is the mean of
/// every prediction row covering it — edge frames average over fewer windows
/// — and is then clamped to `[0, 1]`.
pub fn blend_windows(
    predictions: &[Vec<f64>],
    frame_count: usize,
    windowing: &FrameWindowing,
) -> Result<Vec<Vec<f64>>, LipsyncError> {
    windowing.validate()?;
    if predictions.len() != frame_count {
        return Err(LipsyncError::InvalidShape(format!(
            "expected one prediction per frame ({frame_count}), got {}",
            predictions.len()
        )));
    }
    let nb = windowing.num_blendshapes;
    let expected_len = windowing.output_dim();
    let half = (windowing.output_window / 2) as isize;
    let mut sums = vec![vec![0.0f64; nb]; frame_count];
    let mut counts = vec![0usize; frame_count];
    for (t, prediction) in predictions.iter().enumerate() {
        if prediction.len() != expected_len {
            return Err(LipsyncError::InvalidShape(format!(
                "prediction {t}: expected {expected_len} values, got {}",
                prediction.len()
            )));
        }
        for row in 0..windowing.output_window {
            let frame = t as isize + row as isize - half;
            if frame < 0 || frame >= frame_count as isize {
                continue;
            }
            let frame = frame as usize;
            let values = &prediction[row * nb..(row + 1) * nb];
            for (sum, &v) in sums[frame].iter_mut().zip(values) {
                *sum += v;
            }
            counts[frame] += 1;
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(sum, count)| {
            sum.into_iter()
                .map(|s| (s / count as f64).clamp(0.0, 1.0))
                .collect()
        })
        .collect())
}
