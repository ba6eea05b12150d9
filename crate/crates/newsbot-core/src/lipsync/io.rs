//! File formats for models, datasets and animations.
//!
//! All three are plain UTF-8 text. Floats are written with Rust's shortest
//! round-trip formatting, so write → parse is exact and repeated runs are
//! byte-identical.
//!
//! Model (versioned, shape header then tensors, one matrix row per line):
//!
//! ```text
//! newsbot-mlp v1
//! windowing 11 5 32
//! input_dim 88
//! hidden_widths 64 64 64
//! layer 0 weights
//! <row 0>
//! ...
//! layer 0 bias
//! <one line>
//! ... bn_scale / bn_shift / bn_running_mean / bn_running_var ...
//! output weights
//! <rows>
//! output bias
//! <one line>
//! end
//! ```
//!
//! Dataset: one sample per line, `input-ids TAB target-values`, both
//! space-separated. Animation: `fps` / `num_blendshapes` / `frame_count`
//! headers, then one line of weights per frame.

use super::{
    BlendshapeAnimation, DatasetSample, FrameWindowing, HiddenLayer, LipsyncError, MlpParameters,
    OutputLayer,
};

const MODEL_MAGIC: &str = "newsbot-mlp v1";

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serialize a model.
pub fn write_model(params: &MlpParameters) -> String {
    let mut out = String::new();
    out.push_str(MODEL_MAGIC);
    out.push('\n');
    let w = params.windowing;
    out.push_str(&format!(
        "windowing {} {} {}\n",
        w.input_window, w.output_window, w.num_blendshapes
    ));
    out.push_str(&format!("input_dim {}\n", params.input_dim));
    out.push_str(&format!(
        "hidden_widths {}\n",
        params
            .hidden
            .iter()
            .map(|l| l.out_dim.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    ));
    for (k, layer) in params.hidden.iter().enumerate() {
        out.push_str(&format!("layer {k} weights\n"));
        for o in 0..layer.out_dim {
            out.push_str(&join_floats(
                &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim],
            ));
            out.push('\n');
        }
        for (name, values) in [
            ("bias", &layer.bias),
            ("bn_scale", &layer.bn_scale),
            ("bn_shift", &layer.bn_shift),
            ("bn_running_mean", &layer.bn_running_mean),
            ("bn_running_var", &layer.bn_running_var),
        ] {
            out.push_str(&format!("layer {k} {name}\n"));
            out.push_str(&join_floats(values));
            out.push('\n');
        }
    }
    out.push_str("output weights\n");
    for o in 0..params.output.out_dim {
        out.push_str(&join_floats(
            &params.output.weights[o * params.output.in_dim..(o + 1) * params.output.in_dim],
        ));
        out.push('\n');
    }
    out.push_str("output bias\n");
    out.push_str(&join_floats(&params.output.bias));
    out.push_str("\nend\n");
    out
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn new(input: &'a str) -> Self {
        Self {
            lines: input.lines().enumerate(),
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str), LipsyncError> {
        self.lines
            .next()
            .map(|(i, line)| (i + 1, line))
            .ok_or(LipsyncError::ModelFormat {
                line: 0,
                message: "unexpected end of file".to_string(),
            })
    }

    fn expect(&mut self, expected: &str) -> Result<(), LipsyncError> {
        let (line_no, line) = self.next()?;
        if line.trim() != expected {
            return Err(LipsyncError::ModelFormat {
                line: line_no,
                message: format!("expected {expected:?}, found {line:?}"),
            });
        }
        Ok(())
    }

    fn floats(&mut self, expected_len: usize) -> Result<Vec<f64>, LipsyncError> {
        let (line_no, line) = self.next()?;
        let values: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let values = values.map_err(|e| LipsyncError::ModelFormat {
            line: line_no,
            message: format!("bad float: {e}"),
        })?;
        if values.len() != expected_len {
            return Err(LipsyncError::ModelFormat {
                line: line_no,
                message: format!("expected {expected_len} values, got {}", values.len()),
            });
        }
        Ok(values)
    }

    fn usizes_after(&mut self, prefix: &str) -> Result<Vec<usize>, LipsyncError> {
        let (line_no, line) = self.next()?;
        let rest = line
            .strip_prefix(prefix)
            .ok_or_else(|| LipsyncError::ModelFormat {
                line: line_no,
                message: format!("expected {prefix:?} header, found {line:?}"),
            })?;
        rest.split_whitespace()
            .map(|v| {
                v.parse::<usize>().map_err(|_| LipsyncError::ModelFormat {
                    line: line_no,
                    message: format!("bad integer {v:?}"),
                })
            })
            .collect()
    }
}

/// Parse a model file and validate the result.
pub fn parse_model(input: &str) -> Result<MlpParameters, LipsyncError> {
    let mut reader = LineReader::new(input);
    reader.expect(MODEL_MAGIC)?;
    let windowing_values = reader.usizes_after("windowing ")?;
    if windowing_values.len() != 3 {
        return Err(LipsyncError::ModelFormat {
            line: 2,
            message: "windowing header needs 3 integers".to_string(),
        });
    }
    let windowing = FrameWindowing::new(
        windowing_values[0],
        windowing_values[1],
        windowing_values[2],
    )?;
    let input_dim =
        *reader
            .usizes_after("input_dim ")?
            .first()
            .ok_or(LipsyncError::ModelFormat {
                line: 3,
                message: "missing input_dim value".to_string(),
            })?;
    let hidden_widths = reader.usizes_after("hidden_widths ")?;

    let mut hidden = Vec::with_capacity(hidden_widths.len());
    let mut in_dim = input_dim;
    for (k, &out_dim) in hidden_widths.iter().enumerate() {
        reader.expect(&format!("layer {k} weights"))?;
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..out_dim {
            weights.extend(reader.floats(in_dim)?);
        }
        reader.expect(&format!("layer {k} bias"))?;
        let bias = reader.floats(out_dim)?;
        reader.expect(&format!("layer {k} bn_scale"))?;
        let bn_scale = reader.floats(out_dim)?;
        reader.expect(&format!("layer {k} bn_shift"))?;
        let bn_shift = reader.floats(out_dim)?;
        reader.expect(&format!("layer {k} bn_running_mean"))?;
        let bn_running_mean = reader.floats(out_dim)?;
        reader.expect(&format!("layer {k} bn_running_var"))?;
        let bn_running_var = reader.floats(out_dim)?;
        hidden.push(HiddenLayer {
            in_dim,
            out_dim,
            weights,
            bias,
            bn_scale,
            bn_shift,
            bn_running_mean,
            bn_running_var,
        });
        in_dim = out_dim;
    }
    let out_dim = windowing.output_dim();
    reader.expect("output weights")?;
    let mut weights = Vec::with_capacity(in_dim * out_dim);
    for _ in 0..out_dim {
        weights.extend(reader.floats(in_dim)?);
    }
    reader.expect("output bias")?;
    let bias = reader.floats(out_dim)?;
    reader.expect("end")?;

    let params = MlpParameters {
        input_dim,
        hidden,
        output: OutputLayer {
            in_dim,
            out_dim,
            weights,
            bias,
        },
        windowing,
    };
    params.validate()?;
    Ok(params)
}

/// Serialize a dataset: `ids TAB targets` per sample.
pub fn write_dataset(samples: &[DatasetSample]) -> String {
    let mut out = String::new();
    for sample in samples {
        let ids = sample
            .input_ids
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&ids);
        out.push('\t');
        out.push_str(&join_floats(&sample.target));
        out.push('\n');
    }
    out
}

/// Parse a dataset file.
pub fn parse_dataset(input: &str) -> Result<Vec<DatasetSample>, LipsyncError> {
    let mut samples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (ids_part, target_part) =
            line.split_once('\t')
                .ok_or_else(|| LipsyncError::DatasetFormat {
                    line: line_no,
                    message: "expected 'ids TAB targets'".to_string(),
                })?;
        let input_ids: Result<Vec<usize>, _> = ids_part
            .split_whitespace()
            .map(str::parse::<usize>)
            .collect();
        let target: Result<Vec<f64>, _> = target_part
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect();
        samples.push(DatasetSample {
            input_ids: input_ids.map_err(|e| LipsyncError::DatasetFormat {
                line: line_no,
                message: format!("bad id: {e}"),
            })?,
            target: target.map_err(|e| LipsyncError::DatasetFormat {
                line: line_no,
                message: format!("bad target value: {e}"),
            })?,
        });
    }
    Ok(samples)
}

/// Serialize an animation.
pub fn write_animation(animation: &BlendshapeAnimation) -> String {
    let mut out = format!(
        "fps {}\nnum_blendshapes {}\nframe_count {}\n",
        animation.fps,
        animation.num_blendshapes,
        animation.frames.len()
    );
    for frame in &animation.frames {
        out.push_str(&join_floats(frame));
        out.push('\n');
    }
    out
}

/// Parse an animation file.
pub fn parse_animation(input: &str) -> Result<BlendshapeAnimation, LipsyncError> {
    let bad = |line: usize, message: String| LipsyncError::AnimationFormat { line, message };
    let mut lines = input.lines().enumerate();
    let mut header = |prefix: &str, line_no: usize| -> Result<String, LipsyncError> {
        let (i, line) = lines
            .next()
            .ok_or_else(|| bad(line_no, "missing header".to_string()))?;
        line.strip_prefix(prefix)
            .map(str::to_string)
            .ok_or_else(|| bad(i + 1, format!("expected {prefix:?} header")))
    };
    let fps: f64 = header("fps ", 1)?
        .parse()
        .map_err(|_| bad(1, "bad fps value".to_string()))?;
    let num_blendshapes: usize = header("num_blendshapes ", 2)?
        .parse()
        .map_err(|_| bad(2, "bad num_blendshapes value".to_string()))?;
    let frame_count: usize = header("frame_count ", 3)?
        .parse()
        .map_err(|_| bad(3, "bad frame_count value".to_string()))?;
    let mut frames = Vec::with_capacity(frame_count);
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let frame: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let frame = frame.map_err(|e| bad(line_no, format!("bad weight: {e}")))?;
        if frame.len() != num_blendshapes {
            return Err(bad(
                line_no,
                format!("expected {num_blendshapes} weights, got {}", frame.len()),
            ));
        }
        frames.push(frame);
    }
    if frames.len() != frame_count {
        return Err(bad(
            input.lines().count(),
            format!("expected {frame_count} frames, got {}", frames.len()),
        ));
    }
    Ok(BlendshapeAnimation {
        fps,
        num_blendshapes,
        frames,
    })
}
