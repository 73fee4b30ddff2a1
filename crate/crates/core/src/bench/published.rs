//! Reference accuracy and timing figures of nine vision-language models on
//! the 223-image inspection set, as published. Percentages are transcribed
//! verbatim.

/// Per-class image counts in reporting order
/// (shirt, sock, trousers, underwear, other, empty).
pub const CLASS_COUNTS: [u64; 6] = [38, 64, 43, 12, 65, 4];

/// Stated image count. Note that `CLASS_COUNTS` sums to 226.
pub const IMAGE_COUNT: u64 = 223;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedAccuracy {
    pub model: &'static str,
    pub overall_pct: f64,
    pub per_class_pct: [f64; 6],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedTiming {
    pub model: &'static str,
    pub gpu: &'static str,
    pub mean_s: f64,
    pub p10_s: f64,
    pub p90_s: f64,
}

const fn acc(model: &'static str, overall_pct: f64, per_class_pct: [f64; 6]) -> PublishedAccuracy {
    PublishedAccuracy {
        model,
        overall_pct,
        per_class_pct,
    }
}

const fn time(model: &'static str, mean_s: f64, p10_s: f64, p90_s: f64) -> PublishedTiming {
    PublishedTiming {
        model,
        gpu: "H200",
        mean_s,
        p10_s,
        p90_s,
    }
}

pub const ACCURACY: [PublishedAccuracy; 9] = [
    acc("gemma3:12b", 76.23, [55.26, 95.31, 67.44, 50.00, 76.92, 100.00]),
    acc("llama3.2-vision:90b", 60.09, [18.42, 87.50, 34.88, 58.33, 73.85, 25.00]),
    acc("llama4:16x17b", 71.30, [31.58, 89.06, 60.47, 50.00, 89.23, 0.00]),
    acc("llava:34b", 50.67, [23.68, 76.56, 2.33, 41.67, 72.31, 50.00]),
    acc("minicpm-v:8b", 65.02, [71.05, 95.31, 51.16, 58.33, 43.08, 50.00]),
    acc("qwen3-vl:235b", 87.89, [97.37, 100.00, 60.47, 83.33, 93.85, 25.00]),
    acc("qwen3-vl:8b", 83.86, [86.84, 93.75, 55.81, 66.67, 95.38, 50.00]),
    acc("qwen3.5:35b*", 87.89, [89.47, 100.00, 76.74, 75.00, 90.77, 0.00]),
    acc("qwen3.5:122b*", 86.10, [73.68, 98.44, 69.77, 83.33, 95.38, 25.00]),
];

pub const TIMING: [PublishedTiming; 9] = [
    time("gemma3:12b", 0.653, 0.620, 0.689),
    time("llama3.2-vision:90b", 0.953, 0.620, 0.690),
    time("llama4:16x17b", 0.969, 0.904, 1.016),
    time("qwen3-vl:235b", 2.444, 1.739, 3.072),
    time("llava:34b", 0.409, 0.378, 0.411),
    time("minicpm-v:8b", 0.461, 0.411, 0.534),
    time("qwen3-vl:8b", 1.595, 0.993, 2.550),
    time("qwen3.5:35b*", 12.299, 2.807, 27.266),
    time("qwen3.5:122b*", 20.480, 3.892, 55.869),
];

pub fn accuracy(model: &str) -> Option<&'static PublishedAccuracy> {
    ACCURACY.iter().find(|a| a.model == model)
}

pub fn timing(model: &str) -> Option<&'static PublishedTiming> {
    TIMING.iter().find(|t| t.model == model)
}
