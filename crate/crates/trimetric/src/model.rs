//! Small feedforward models with canonical serialization.
//!
//! The model is the concrete system under measurement: its canonical byte
//! serialization feeds the complexity estimate, and its exact forward pass
//! and Jacobians (analytic chain rule plus central finite differences as an
//! independent route) feed the stability estimate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::XorShiftStar;

/// Canonical artifact magic.
pub const ARTIFACT_MAGIC: &[u8; 4] = b"AIMM";
/// Canonical artifact version.
pub const ARTIFACT_VERSION: u32 = 1;

// Guards against absurd allocations when parsing untrusted artifacts.
const MAX_DIM: u32 = 1 << 20;
const MAX_LAYERS: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed artifact: {0}")]
    MalformedArtifact(String),
    #[error("invalid input spec: {0}")]
    InvalidInputSpec(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite result at point {point:?}")]
    NonFiniteResult { point: Vec<f64> },
}

/// Declares the quantized input box. The input-space size is
/// `2^(dims * bits_per_dim)`, so `log2_input_space_size` is exactly
/// `dims * bits_per_dim` bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    pub dims: u32,
    pub bits_per_dim: u32,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl InputSpec {
    pub fn new(
        dims: u32,
        bits_per_dim: u32,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let spec = InputSpec {
            dims,
            bits_per_dim,
            lower,
            upper,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dims == 0 {
            return Err(ModelError::InvalidInputSpec("dims must be >= 1".into()));
        }
        if self.bits_per_dim == 0 {
            return Err(ModelError::InvalidInputSpec(
                "bits_per_dim must be >= 1".into(),
            ));
        }
        if self.lower.len() != self.dims as usize || self.upper.len() != self.dims as usize {
            return Err(ModelError::InvalidInputSpec(
                "lower/upper must each have `dims` entries".into(),
            ));
        }
        for i in 0..self.dims as usize {
            if !self.lower[i].is_finite() || !self.upper[i].is_finite() {
                return Err(ModelError::InvalidInputSpec(format!(
                    "non-finite bound at dimension {i}"
                )));
            }
            if self.lower[i] >= self.upper[i] {
                return Err(ModelError::InvalidInputSpec(format!(
                    "lower[{i}] must be strictly below upper[{i}]"
                )));
            }
        }
        Ok(())
    }

    /// log2 of the quantized input-space cardinality, in bits.
    pub fn log2_input_space_size(&self) -> f64 {
        u64::from(self.dims) as f64 * u64::from(self.bits_per_dim) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Identity => z,
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at pre-activation `z`. The relu subgradient at 0 is 0.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }

    fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// One dense layer: `activation(W x + b)`, weights row-major `out x in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }
}

/// A feedforward network over an [`InputSpec`] box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub input_spec: InputSpec,
    pub layers: Vec<Layer>,
}

impl MlpModel {
    pub fn new(input_spec: InputSpec, layers: Vec<Layer>) -> Result<Self, ModelError> {
        let model = MlpModel { input_spec, layers };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.input_spec.validate()?;
        if self.layers.is_empty() {
            return Err(ModelError::InvalidModel(
                "model needs at least one layer".into(),
            ));
        }
        let mut width = self.input_spec.dims as usize;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.weights.is_empty() {
                return Err(ModelError::InvalidModel(format!("layer {k} has no rows")));
            }
            let (out, inp) = (layer.out_dim(), layer.in_dim());
            if inp == 0 {
                return Err(ModelError::InvalidModel(format!(
                    "layer {k} has empty rows"
                )));
            }
            if inp != width {
                return Err(ModelError::DimensionMismatch(format!(
                    "layer {k} expects input width {inp}, previous width is {width}"
                )));
            }
            if layer.bias.len() != out {
                return Err(ModelError::InvalidModel(format!(
                    "layer {k} bias length {} does not match {out} rows",
                    layer.bias.len()
                )));
            }
            for row in &layer.weights {
                if row.len() != inp {
                    return Err(ModelError::InvalidModel(format!("layer {k} is ragged")));
                }
                if row.iter().any(|w| !w.is_finite()) {
                    return Err(ModelError::InvalidModel(format!(
                        "layer {k} has a non-finite weight"
                    )));
                }
            }
            if layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(ModelError::InvalidModel(format!(
                    "layer {k} has a non-finite bias"
                )));
            }
            width = out;
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_spec.dims as usize
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, Layer::out_dim)
    }

    /// Parses the human-authorable JSON model document and validates it.
    pub fn from_json_str(json: &str) -> Result<Self, ModelError> {
        let model: MlpModel = serde_json::from_str(json)
            .map_err(|e| ModelError::MalformedArtifact(format!("model JSON: {e}")))?;
        model.validate()?;
        Ok(model)
    }
}

/// Canonical byte serialization of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelArtifact {
    pub bytes: Vec<u8>,
    pub source_model_id: String,
}

impl ModelArtifact {
    /// Appends a raw data blob (e.g. training data) to the serialized bytes
    /// so it participates in the complexity estimate.
    pub fn attach_data(&mut self, data: &[u8]) {
        self.bytes.extend_from_slice(data);
    }
}

/// Serializes a model to its canonical, unique byte form: magic, version,
/// input spec, then each layer's dimensions, activation tag, row-major
/// weights and biases as little-endian 64-bit floats.
pub fn serialize_canonical(model: &MlpModel, source_model_id: impl Into<String>) -> ModelArtifact {
    let spec = &model.input_spec;
    let mut bytes = Vec::new();
    bytes.extend_from_slice(ARTIFACT_MAGIC);
    bytes.extend_from_slice(&ARTIFACT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&spec.dims.to_le_bytes());
    bytes.extend_from_slice(&spec.bits_per_dim.to_le_bytes());
    for &v in spec.lower.iter().chain(spec.upper.iter()) {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&(model.layers.len() as u32).to_le_bytes());
    for layer in &model.layers {
        bytes.extend_from_slice(&(layer.out_dim() as u32).to_le_bytes());
        bytes.extend_from_slice(&(layer.in_dim() as u32).to_le_bytes());
        bytes.push(layer.activation.tag());
        for row in &layer.weights {
            for &w in row {
                bytes.extend_from_slice(&w.to_le_bytes());
            }
        }
        for &b in &layer.bias {
            bytes.extend_from_slice(&b.to_le_bytes());
        }
    }
    ModelArtifact {
        bytes,
        source_model_id: source_model_id.into(),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        if self.pos + n > self.bytes.len() {
            return Err(ModelError::MalformedArtifact("truncated payload".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        Ok(self.take(1)?[0])
    }

    fn f64_finite(&mut self) -> Result<f64, ModelError> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(ModelError::MalformedArtifact("non-finite float".into()));
        }
        Ok(v)
    }
}

/// Reconstructs the exact model from a canonical artifact.
pub fn deserialize(artifact: &ModelArtifact) -> Result<MlpModel, ModelError> {
    let mut cur = Cursor {
        bytes: &artifact.bytes,
        pos: 0,
    };
    if cur.take(4)? != ARTIFACT_MAGIC {
        return Err(ModelError::MalformedArtifact("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != ARTIFACT_VERSION {
        return Err(ModelError::MalformedArtifact(format!(
            "unsupported version {version}"
        )));
    }
    let dims = cur.u32()?;
    let bits_per_dim = cur.u32()?;
    if dims == 0 || dims > MAX_DIM {
        return Err(ModelError::MalformedArtifact("implausible dims".into()));
    }
    let mut lower = Vec::with_capacity(dims as usize);
    let mut upper = Vec::with_capacity(dims as usize);
    for _ in 0..dims {
        lower.push(cur.f64_finite()?);
    }
    for _ in 0..dims {
        upper.push(cur.f64_finite()?);
    }
    let layer_count = cur.u32()?;
    if layer_count == 0 || layer_count > MAX_LAYERS {
        return Err(ModelError::MalformedArtifact(
            "implausible layer count".into(),
        ));
    }
    let mut layers = Vec::with_capacity(layer_count as usize);
    for _ in 0..layer_count {
        let out = cur.u32()?;
        let inp = cur.u32()?;
        if out == 0 || out > MAX_DIM || inp == 0 || inp > MAX_DIM {
            return Err(ModelError::MalformedArtifact(
                "implausible layer dims".into(),
            ));
        }
        let activation = Activation::from_tag(cur.u8()?)
            .ok_or_else(|| ModelError::MalformedArtifact("unknown activation tag".into()))?;
        let mut weights = Vec::with_capacity(out as usize);
        for _ in 0..out {
            let mut row = Vec::with_capacity(inp as usize);
            for _ in 0..inp {
                row.push(cur.f64_finite()?);
            }
            weights.push(row);
        }
        let mut bias = Vec::with_capacity(out as usize);
        for _ in 0..out {
            bias.push(cur.f64_finite()?);
        }
        layers.push(Layer {
            weights,
            bias,
            activation,
        });
    }
    if cur.pos != artifact.bytes.len() {
        return Err(ModelError::MalformedArtifact("trailing bytes".into()));
    }
    let model = MlpModel {
        input_spec: InputSpec {
            dims,
            bits_per_dim,
            lower,
            upper,
        },
        layers,
    };
    // Dimension chain and bound ordering are re-checked on the way in.
    model.validate().map_err(|e| match e {
        ModelError::MalformedArtifact(_) => e,
        other => ModelError::MalformedArtifact(other.to_string()),
    })?;
    Ok(model)
}

fn check_input(model: &MlpModel, x: &[f64]) -> Result<(), ModelError> {
    if x.len() != model.input_dim() {
        return Err(ModelError::DimensionMismatch(format!(
            "input has {} entries, model expects {}",
            x.len(),
            model.input_dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::InvalidParameter("non-finite input".into()));
    }
    Ok(())
}

/// Evaluates the network: each layer applies `activation(W h + b)`.
pub fn forward(model: &MlpModel, x: &[f64]) -> Result<Vec<f64>, ModelError> {
    check_input(model, x)?;
    let mut h = x.to_vec();
    for layer in &model.layers {
        let mut next = Vec::with_capacity(layer.out_dim());
        for (row, &b) in layer.weights.iter().zip(&layer.bias) {
            let z: f64 = row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b;
            next.push(layer.activation.apply(z));
        }
        h = next;
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFiniteResult { point: x.to_vec() });
    }
    Ok(h)
}

/// Exact Jacobian of the network output with respect to the input, by the
/// chain rule: `J = D_L W_L ... D_1 W_1` with `D_k = diag(act'(z_k))`.
pub fn jacobian_analytic(model: &MlpModel, x: &[f64]) -> Result<Vec<Vec<f64>>, ModelError> {
    check_input(model, x)?;
    let d = model.input_dim();
    // J starts as the identity on the input space.
    let mut jac: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut h = x.to_vec();
    for layer in &model.layers {
        let out = layer.out_dim();
        let mut z = Vec::with_capacity(out);
        for (row, &b) in layer.weights.iter().zip(&layer.bias) {
            z.push(row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>() + b);
        }
        let mut next_jac = Vec::with_capacity(out);
        for (r, row) in layer.weights.iter().enumerate() {
            let gate = layer.activation.derivative(z[r]);
            let mut jac_row = vec![0.0; d];
            if gate != 0.0 {
                for (k, &w) in row.iter().enumerate() {
                    if w != 0.0 {
                        for c in 0..d {
                            jac_row[c] += w * jac[k][c];
                        }
                    }
                }
                for v in &mut jac_row {
                    *v *= gate;
                }
            }
            next_jac.push(jac_row);
        }
        jac = next_jac;
        h = z.iter().map(|&v| layer.activation.apply(v)).collect();
    }
    Ok(jac)
}

/// Central-difference Jacobian: column `i` is
/// `(f(x + h e_i) - f(x - h e_i)) / (2h)`.
pub fn jacobian_fd(model: &MlpModel, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>, ModelError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(ModelError::InvalidParameter(
            "fd step must be positive".into(),
        ));
    }
    check_input(model, x)?;
    let d = model.input_dim();
    let out = model.output_dim();
    let mut jac = vec![vec![0.0; d]; out];
    let mut probe = x.to_vec();
    for i in 0..d {
        probe[i] = x[i] + h;
        let plus = forward(model, &probe)?;
        probe[i] = x[i] - h;
        let minus = forward(model, &probe)?;
        probe[i] = x[i];
        for r in 0..out {
            let v = (plus[r] - minus[r]) / (2.0 * h);
            if !v.is_finite() {
                return Err(ModelError::NonFiniteResult { point: x.to_vec() });
            }
            jac[r][i] = v;
        }
    }
    Ok(jac)
}

/// Draws `m` points uniformly from the spec's box, deterministically from
/// `seed`. Dimension values are consumed in order within each sample.
pub fn sample_inputs(spec: &InputSpec, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = XorShiftStar::new(seed);
    (0..m)
        .map(|_| {
            (0..spec.dims as usize)
                .map(|i| rng.next_in_range(spec.lower[i], spec.upper[i]))
                .collect()
        })
        .collect()
}
