use std::fs;
use std::io::Cursor;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use image::ImageFormat;

use crate::classify::{
    build_prompt, classify_image, parse_response_with, ClassifierBackend, ImagePayload, InvalidReason,
    ParseOptions, ParsedLabel, ResponseLog, ResponseRecord,
};

use super::{BenchError, DatasetRecord};

/// Produces the PNG bytes sent for a record.
pub type ImageLoader = dyn Fn(&DatasetRecord) -> Result<Vec<u8>, String> + Sync;

/// Reads the record's image; anything that is not already PNG is re-encoded.
pub fn load_image_file(record: &DatasetRecord) -> Result<Vec<u8>, String> {
    let bytes = fs::read(&record.image).map_err(|e| format!("{}: {e}", record.image.display()))?;
    if image::guess_format(&bytes).ok() == Some(ImageFormat::Png) {
        return Ok(bytes);
    }
    let img = image::load_from_memory(&bytes).map_err(|e| format!("{}: {e}", record.image.display()))?;
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).map_err(|e| e.to_string())?;
    Ok(out.into_inner())
}

/// For backends that never look at pixels (mock, replay).
pub fn no_image(_record: &DatasetRecord) -> Result<Vec<u8>, String> {
    Ok(Vec::new())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalOptions {
    pub concurrency: usize,
    pub parse: ParseOptions,
    /// Free-form tag copied into every record, e.g. the GPU model.
    pub hardware: Option<String>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            concurrency: 1,
            parse: ParseOptions::default(),
            hardware: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalFailure {
    pub id: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub log: ResponseLog,
    /// Requests that got no answer; they appear in the log as `invalid(transport)`.
    pub failures: Vec<EvalFailure>,
}

impl Evaluation {
    pub fn summary(&self) -> Option<String> {
        if self.failures.is_empty() {
            return None;
        }
        let first = &self.failures[0];
        Some(format!(
            "{} of {} requests failed (first: {}: {})",
            self.failures.len(),
            self.log.len(),
            first.id,
            first.error
        ))
    }
}

enum Outcome {
    Answered(ResponseRecord),
    Failed(ResponseRecord, String),
    NoImage(String),
}

/// Classifies every record once. Workers pull records in manifest order and
/// the log is assembled by index, so scheduling never changes the output.
pub fn evaluate(
    backend: &dyn ClassifierBackend,
    dataset: &[DatasetRecord],
    opts: &EvalOptions,
    load: &ImageLoader,
) -> Result<Evaluation, BenchError> {
    if opts.concurrency == 0 {
        return Err(BenchError::InvalidOptions("concurrency must be at least 1".into()));
    }
    let model = backend.model_name().to_string();
    let prompt = build_prompt(&model);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..dataset.len()).map(|_| None).collect());

    let run_one = |rec: &DatasetRecord| -> Outcome {
        let png = match load(rec) {
            Ok(p) => p,
            Err(e) => return Outcome::NoImage(e),
        };
        let payload = ImagePayload::declared(&rec.id, png, rec.label);
        match classify_image(backend, &payload, &prompt) {
            Ok(raw) => Outcome::Answered(ResponseRecord {
                id: rec.id.clone(),
                model: raw.model_name.clone(),
                parsed: parse_response_with(&raw, opts.parse),
                raw: raw.text,
                latency_s: raw.latency_s,
                hardware: opts.hardware.clone(),
            }),
            Err(e) => Outcome::Failed(
                ResponseRecord {
                    id: rec.id.clone(),
                    model: model.clone(),
                    raw: String::new(),
                    parsed: ParsedLabel::Invalid(InvalidReason::Transport),
                    latency_s: 0.0,
                    hardware: opts.hardware.clone(),
                },
                e.to_string(),
            ),
        }
    };

    let workers = opts.concurrency.min(dataset.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= dataset.len() {
                    break;
                }
                let out = run_one(&dataset[i]);
                slots.lock().expect("result slots")[i] = Some(out);
            });
        }
    });

    let mut records = Vec::with_capacity(dataset.len());
    let mut failures = Vec::new();
    for (rec, slot) in dataset.iter().zip(slots.into_inner().expect("result slots")) {
        match slot.expect("every record is processed") {
            Outcome::Answered(r) => records.push(r),
            Outcome::Failed(r, error) => {
                failures.push(EvalFailure { id: r.id.clone(), error });
                records.push(r);
            }
            Outcome::NoImage(msg) => return Err(BenchError::Image { id: rec.id.clone(), msg }),
        }
    }
    Ok(Evaluation {
        log: ResponseLog::new(records),
        failures,
    })
}
