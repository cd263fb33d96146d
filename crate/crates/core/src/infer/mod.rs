//! Per-crop gender classification behind a pluggable backend.

mod manifest;
mod mock;
#[cfg(feature = "onnx")]
mod onnx;

use std::sync::{Arc, Mutex};

use image::RgbImage;
use sha2::{Digest, Sha256};

pub use manifest::{
    BackendKind, ChannelOrder, MockRule, MockSpec, ModelManifest, Normalization, OutputKind, ValidManifest,
    DEFAULT_MOCK_THRESHOLD,
};
pub use mock::MockBackend;
#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;

use crate::boxcrop::{CropSet, CROP_SIZE};
use crate::error::{Error, Result};
use crate::score::GenderScore;

/// Whether a backend tolerates simultaneous `classify` calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concurrency {
    Concurrent,
    Serial,
}

/// A loaded model. Implementations receive crops already checked to be
/// `CROP_SIZE`×`CROP_SIZE` RGB.
pub trait Backend: Send + Sync {
    fn classify(&self, crop: &RgbImage) -> Result<GenderScore>;

    fn concurrency(&self) -> Concurrency {
        Concurrency::Concurrent
    }

    fn describe(&self) -> String;
}

/// Shareable classifier. Serial backends are guarded internally, so callers
/// never need to coordinate.
#[derive(Clone)]
pub struct ClassifierHandle {
    backend: Arc<dyn Backend>,
    guard: Option<Arc<Mutex<()>>>,
}

impl std::fmt::Debug for ClassifierHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassifierHandle")
            .field("backend", &self.backend.describe())
            .field("serial", &self.guard.is_some())
            .finish()
    }
}

impl ClassifierHandle {
    pub fn from_backend(backend: Arc<dyn Backend>) -> Self {
        let guard = match backend.concurrency() {
            Concurrency::Serial => Some(Arc::new(Mutex::new(()))),
            Concurrency::Concurrent => None,
        };
        ClassifierHandle { backend, guard }
    }

    pub fn concurrency(&self) -> Concurrency {
        self.backend.concurrency()
    }

    pub fn describe(&self) -> String {
        self.backend.describe()
    }

    pub fn is_mock(&self) -> bool {
        self.backend.describe().starts_with("mock")
    }
}

/// Validates the manifest and builds the matching backend.
pub fn load_backend(manifest: &ModelManifest) -> Result<ClassifierHandle> {
    let valid = manifest.validate()?;
    let backend: Arc<dyn Backend> = match valid.manifest.backend_kind {
        BackendKind::Mock => Arc::new(MockBackend::new(
            valid.manifest.mock.clone().unwrap_or_default(),
            valid.class_order,
        )),
        BackendKind::Neural => load_neural(&valid)?,
    };
    Ok(ClassifierHandle::from_backend(backend))
}

#[cfg(feature = "onnx")]
fn load_neural(valid: &ValidManifest) -> Result<Arc<dyn Backend>> {
    Ok(Arc::new(OnnxBackend::load(valid)?))
}

#[cfg(not(feature = "onnx"))]
fn load_neural(valid: &ValidManifest) -> Result<Arc<dyn Backend>> {
    Err(Error::ModelLoad {
        path: valid.manifest.model_path.clone().unwrap_or_default(),
        message: "built without the `onnx` feature".into(),
    })
}

/// Classifies one 224×224×3 crop.
pub fn classify_crop(handle: &ClassifierHandle, crop: &RgbImage) -> Result<GenderScore> {
    if crop.dimensions() != (CROP_SIZE, CROP_SIZE) {
        return Err(Error::InvalidInput(format!(
            "crop must be {CROP_SIZE}x{CROP_SIZE}x3, got {}x{}x3",
            crop.width(),
            crop.height()
        )));
    }
    match &handle.guard {
        Some(lock) => {
            let _held = lock.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
            handle.backend.classify(crop)
        }
        None => handle.backend.classify(crop),
    }
}

/// Classifies the three crops sequentially, in (Left, Middle, Right) order.
pub fn classify_cropset(handle: &ClassifierHandle, crops: &CropSet) -> Result<[GenderScore; 3]> {
    Ok([
        classify_crop(handle, &crops.images[0])?,
        classify_crop(handle, &crops.images[1])?,
        classify_crop(handle, &crops.images[2])?,
    ])
}

/// Classifies the three crops on `pool`; the result order is the same as
/// [`classify_cropset`].
pub fn classify_cropset_parallel(
    handle: &ClassifierHandle,
    crops: &CropSet,
    pool: &rayon::ThreadPool,
) -> Result<[GenderScore; 3]> {
    let (left, (middle, right)) = pool.join(
        || classify_crop(handle, &crops.images[0]),
        || {
            rayon::join(
                || classify_crop(handle, &crops.images[1]),
                || classify_crop(handle, &crops.images[2]),
            )
        },
    );
    Ok([left?, middle?, right?])
}

/// SHA-256 hex digest of a crop's raw RGB bytes; the key used by fixed-table mocks.
pub fn crop_digest(crop: &RgbImage) -> String {
    hex::encode(Sha256::digest(crop.as_raw()))
}
