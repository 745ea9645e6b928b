//! Generators for the LED-24 and Waveform artificial datasets.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Attribute, Dataset, Instance, Schema, Value};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Seven-segment patterns (top, upper-left, upper-right, middle, lower-left,
/// lower-right, bottom) for the digits 0..=9.
pub const LED_SEGMENTS: [[u8; 7]; 10] = [
    [1, 1, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 0, 1, 0],
    [1, 0, 1, 1, 1, 0, 1],
    [1, 0, 1, 1, 0, 1, 1],
    [0, 1, 1, 1, 0, 1, 0],
    [1, 1, 0, 1, 0, 1, 1],
    [1, 1, 0, 1, 1, 1, 1],
    [1, 0, 1, 0, 0, 1, 0],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 1, 1, 1, 0, 1, 1],
];

pub const LED_RELEVANT: usize = 7;
pub const LED_IRRELEVANT: usize = 17;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Led24Params {
    pub n: usize,
    /// Probability that each of the seven segment bits is flipped.
    pub noise: f64,
    pub seed: u64,
}

impl Led24Params {
    pub fn new(n: usize, seed: u64) -> Self {
        Led24Params { n, noise: 0.1, seed }
    }
}

pub fn led24_schema() -> Schema {
    let attributes = (0..LED_RELEVANT + LED_IRRELEVANT)
        .map(|i| {
            let name = if i < LED_RELEVANT {
                format!("seg{}", i + 1)
            } else {
                format!("irr{}", i + 1 - LED_RELEVANT)
            };
            Attribute::binary(name, ["0", "1"])
        })
        .collect();
    Schema::new(attributes, (0..10).map(|d| d.to_string()).collect()).expect("static schema is valid")
}

pub fn gen_led24(params: &Led24Params) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&params.noise) {
        return Err(Error::param(format!("LED noise {} outside [0, 1]", params.noise)));
    }
    let mut rng = rng_from_seed(params.seed);
    let instances = (0..params.n)
        .map(|_| {
            let digit = rng.random_range(0..10usize);
            let mut values = Vec::with_capacity(LED_RELEVANT + LED_IRRELEVANT);
            for &bit in &LED_SEGMENTS[digit] {
                let flip = rng.random_bool(params.noise);
                values.push(Value::Nominal(usize::from(bit ^ u8::from(flip))));
            }
            for _ in 0..LED_IRRELEVANT {
                values.push(Value::Nominal(usize::from(rng.random_bool(0.5))));
            }
            Instance::new(values, digit)
        })
        .collect();
    Dataset::new(led24_schema(), instances)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveformVariant {
    /// The 21 wave attributes only.
    Plain21,
    /// 21 wave attributes plus 19 irrelevant standard-normal attributes.
    Noisy40,
}

impl WaveformVariant {
    pub fn from_width(width: usize) -> Result<Self> {
        match width {
            21 => Ok(WaveformVariant::Plain21),
            40 => Ok(WaveformVariant::Noisy40),
            w => Err(Error::param(format!("waveform variant must be 21 or 40, got {w}"))),
        }
    }

    pub fn width(self) -> usize {
        match self {
            WaveformVariant::Plain21 => WAVE_LEN,
            WaveformVariant::Noisy40 => 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveformParams {
    pub n: usize,
    pub variant: WaveformVariant,
    pub seed: u64,
}

pub const WAVE_LEN: usize = 21;

/// Triangular base wave `h`, `wave` in 0..3, `m` in 1..=21: height 6 peaking
/// at position 11, 15 and 7 respectively.
pub fn base_wave(wave: usize, m: usize) -> f64 {
    let peak = [11.0, 15.0, 7.0][wave];
    (6.0 - (m as f64 - peak).abs()).max(0.0)
}

/// Base waves mixed by each class.
pub const WAVE_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Noise-free 21 wave attributes for `class` and mixing weight `u`.
pub fn waveform_clean(class: usize, u: f64) -> [f64; WAVE_LEN] {
    let (a, b) = WAVE_PAIRS[class];
    std::array::from_fn(|i| u * base_wave(a, i + 1) + (1.0 - u) * base_wave(b, i + 1))
}

/// Latent draws behind one generated waveform instance.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveformTrace {
    pub class: usize,
    pub u: f64,
    pub clean: [f64; WAVE_LEN],
}

pub fn waveform_schema(variant: WaveformVariant) -> Schema {
    let attributes = (1..=variant.width()).map(|m| Attribute::continuous(format!("x{m}"))).collect();
    Schema::new(attributes, vec!["0".into(), "1".into(), "2".into()]).expect("static schema is valid")
}

pub fn gen_waveform(params: &WaveformParams) -> Result<Dataset> {
    gen_waveform_traced(params).map(|(ds, _)| ds)
}

/// As [`gen_waveform`], also returning the per-instance latent draws.
pub fn gen_waveform_traced(params: &WaveformParams) -> Result<(Dataset, Vec<WaveformTrace>)> {
    let mut rng = rng_from_seed(params.seed);
    let width = params.variant.width();
    let mut traces = Vec::with_capacity(params.n);
    let instances = (0..params.n)
        .map(|_| {
            let class = rng.random_range(0..3usize);
            let u: f64 = rng.random();
            let clean = waveform_clean(class, u);
            let values = (0..width)
                .map(|i| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    Value::Continuous(clean.get(i).copied().unwrap_or(0.0) + eps)
                })
                .collect();
            traces.push(WaveformTrace { class, u, clean });
            Instance::new(values, class)
        })
        .collect();
    Ok((Dataset::new(waveform_schema(params.variant), instances)?, traces))
}
