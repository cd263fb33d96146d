use std::path::PathBuf;
use std::sync::Arc;

use image::RgbImage;
use tract_onnx::prelude::*;

use super::{Backend, ChannelOrder, OutputKind, ValidManifest};
use crate::boxcrop::CROP_SIZE;
use crate::error::{Error, Result};
use crate::score::{Gender, GenderScore};

/// ONNX graph executed on the CPU through tract.
pub struct OnnxBackend {
    plan: Arc<TypedRunnableModel>,
    path: PathBuf,
    channel_order: ChannelOrder,
    mean: [f32; 3],
    scale: [f32; 3],
    class_order: [Gender; 2],
    output: OutputKind,
}

impl OnnxBackend {
    pub fn load(valid: &ValidManifest) -> Result<Self> {
        let manifest = &valid.manifest;
        let path = manifest.model_path.clone().unwrap_or_default();
        let load_err = |e: TractError| Error::ModelLoad {
            path: path.clone(),
            message: format!("{e:#}"),
        };
        if !path.is_file() {
            return Err(Error::ModelLoad {
                path: path.clone(),
                message: "model file not found".into(),
            });
        }
        let side = CROP_SIZE as usize;
        let plan = tract_onnx::onnx()
            .model_for_path(&path)
            .and_then(|m| m.with_input_fact(0, f32::fact([1, 3, side, side]).into()))
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(load_err)?;
        let norm = manifest
            .normalization
            .as_ref()
            .expect("validated manifests carry normalization for neural backends");
        Ok(OnnxBackend {
            plan,
            path,
            channel_order: manifest.channel_order,
            mean: [norm.mean[0], norm.mean[1], norm.mean[2]],
            scale: [norm.scale[0], norm.scale[1], norm.scale[2]],
            class_order: valid.class_order,
            output: manifest.output,
        })
    }

    fn input_tensor(&self, crop: &RgbImage) -> Tensor {
        let side = CROP_SIZE as usize;
        let src = match self.channel_order {
            ChannelOrder::Rgb => [0, 1, 2],
            ChannelOrder::Bgr => [2, 1, 0],
        };
        tract_ndarray::Array4::from_shape_fn((1, 3, side, side), |(_, c, y, x)| {
            let pixel = f32::from(crop.get_pixel(x as u32, y as u32)[src[c]]);
            (pixel - self.mean[c]) * self.scale[c]
        })
        .into()
    }
}

impl Backend for OnnxBackend {
    fn classify(&self, crop: &RgbImage) -> Result<GenderScore> {
        let outputs = self
            .plan
            .run(tvec!(self.input_tensor(crop).into()))
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        let view = outputs[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| Error::Inference(format!("{e:#}")))?;
        let raw: Vec<f64> = view.iter().map(|&v| f64::from(v)).collect();
        if raw.len() != 2 {
            return Err(Error::Inference(format!(
                "expected 2 outputs from {}, got {}",
                self.path.display(),
                raw.len()
            )));
        }
        let probs = match self.output {
            OutputKind::Logits => softmax2(raw[0], raw[1]),
            OutputKind::Probabilities => [raw[0], raw[1]],
        };
        let (man, woman) = match self.class_order {
            [Gender::Man, _] => (probs[0], probs[1]),
            _ => (probs[1], probs[0]),
        };
        GenderScore::from_masses(man, woman)
    }

    fn describe(&self) -> String {
        format!("onnx:{}", self.path.display())
    }
}

fn softmax2(a: f64, b: f64) -> [f64; 2] {
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    [ea / (ea + eb), eb / (ea + eb)]
}
