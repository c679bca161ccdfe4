use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which estimation problem a network scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pose,
    Camera,
}

impl Task {
    pub fn default_hidden(self) -> &'static [usize] {
        match self {
            Task::Pose => &[1000, 900, 900, 900, 700],
            Task::Camera => &[1000, 900, 900],
        }
    }

    fn tag(self) -> u8 {
        match self {
            Task::Pose => 0,
            Task::Camera => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Task::Pose),
            1 => Ok(Task::Camera),
            t => Err(Error::Weights(format!("unknown task tag {t}"))),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Pose => "pose",
            Task::Camera => "camera",
        })
    }
}

/// Update rule applied by [`ScoringNetwork::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Adam,
    Sgd,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Affine map `out = W x + b`; `W` is `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Layer {
    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weights: DMatrix::zeros(out, inp),
            bias: DVector::zeros(out),
        }
    }

    fn zeros_like(&self) -> Self {
        Self::zeros(self.weights.nrows(), self.weights.ncols())
    }

    fn same_shape(&self, other: &Layer) -> bool {
        self.weights.shape() == other.weights.shape() && self.bias.len() == other.bias.len()
    }
}

/// Parameter gradients, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.layers.len() != other.layers.len() || self.layers.iter().zip(&other.layers).any(|(a, b)| !a.same_shape(b)) {
            return Err(Error::ShapeMismatch("gradient shapes differ".into()));
        }
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights;
            a.bias += &b.bias;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for l in &mut self.layers {
            l.weights *= s;
            l.bias *= s;
        }
    }

    /// All entries in parameter order (see [`ScoringNetwork::parameters`]).
    pub fn flatten(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn is_zero(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(l.bias.iter()).all(|&v| v == 0.0))
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(l.weights.as_slice());
        out.extend_from_slice(l.bias.as_slice());
    }
    out
}

#[derive(Debug, Clone)]
struct ForwardCache {
    /// Input of every layer, `in × N`.
    inputs: Vec<DMatrix<f64>>,
}

/// Fully-connected scoring network: rectified hidden layers, linear scalar
/// output interpreted as a logit.
#[derive(Debug, Clone)]
pub struct ScoringNetwork {
    pub task: Task,
    /// Multiplies every input feature before the first layer.
    pub input_scale: f64,
    pub layers: Vec<Layer>,
    adam_step: u64,
    adam_m: Vec<Layer>,
    adam_v: Vec<Layer>,
    cache: Option<ForwardCache>,
}

impl PartialEq for ScoringNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.task == other.task
            && self.input_scale.to_bits() == other.input_scale.to_bits()
            && self.layers == other.layers
            && self.adam_step == other.adam_step
            && self.adam_m == other.adam_m
            && self.adam_v == other.adam_v
    }
}

impl ScoringNetwork {
    /// He-uniform initialized weights, zero biases.
    pub fn new(task: Task, input_width: usize, hidden: &[usize], input_scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_width;
        for &out in hidden.iter().chain(std::iter::once(&1)) {
            let limit = (6.0 / fan_in as f64).sqrt();
            let weights = DMatrix::from_fn(out, fan_in, |_, _| rng.random_range(-limit..limit));
            layers.push(Layer {
                weights,
                bias: DVector::zeros(out),
            });
            fan_in = out;
        }
        Self::from_layers(task, input_scale, layers)
    }

    pub fn from_layers(task: Task, input_scale: f64, layers: Vec<Layer>) -> Self {
        let zeros: Vec<Layer> = layers.iter().map(Layer::zeros_like).collect();
        Self {
            task,
            input_scale,
            adam_m: zeros.clone(),
            adam_v: zeros,
            layers,
            adam_step: 0,
            cache: None,
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].weights.ncols()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(|l| l.bias.len()).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters: each layer's weights (column-major) then its bias.
    pub fn parameters(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters given, network has {}",
                values.len(),
                self.parameter_count()
            )));
        }
        let mut it = values.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|w| *w = it.next().unwrap());
        }
        self.cache = None;
        Ok(())
    }

    fn input_matrix(&self, features: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let w = self.input_width();
        if let Some(f) = features.iter().find(|f| f.len() != w) {
            return Err(Error::WidthMismatch {
                expected: w,
                got: f.len(),
            });
        }
        Ok(DMatrix::from_fn(w, features.len(), |r, c| features[c][r] * self.input_scale))
    }

    fn run(&self, x: DMatrix<f64>, keep: bool) -> (Vec<f64>, Option<ForwardCache>) {
        let last = self.layers.len() - 1;
        let mut inputs = Vec::new();
        let mut a = x;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.weights * &a;
            for mut col in z.column_iter_mut() {
                col += &l.bias;
            }
            if i < last {
                z.apply(|v| *v = v.max(0.0));
            }
            if keep {
                inputs.push(std::mem::replace(&mut a, z));
            } else {
                a = z;
            }
        }
        (a.row(0).iter().copied().collect(), keep.then_some(ForwardCache { inputs }))
    }

    /// Raw score (logit) of one feature vector.
    pub fn forward(&self, feature: &[f64]) -> Result<f64> {
        let x = self.input_matrix(std::slice::from_ref(&feature.to_vec()))?;
        Ok(self.run(x, false).0[0])
    }

    /// Logits of a whole pool without touching the cache.
    pub fn score_pool(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        let x = self.input_matrix(features)?;
        Ok(self.run(x, false).0)
    }

    /// Logits of a whole pool; activations are cached for [`Self::backward`].
    pub fn forward_pool(&mut self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        let x = self.input_matrix(features)?;
        let (out, cache) = self.run(x, true);
        self.cache = cache;
        Ok(out)
    }

    /// Parameter gradients given the loss gradient on the cached logits.
    pub fn backward(&self, dlogits: &[f64]) -> Result<Gradients> {
        let cache = self.cache.as_ref().ok_or(Error::NoCachedForward)?;
        let n = cache.inputs[0].ncols();
        if dlogits.len() != n {
            return Err(Error::LengthMismatch {
                left: dlogits.len(),
                right: n,
            });
        }
        let mut delta = DMatrix::from_row_slice(1, n, dlogits);
        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for i in (0..self.layers.len()).rev() {
            let a = &cache.inputs[i];
            let weights = &delta * a.transpose();
            let bias = delta.column_sum();
            if i > 0 {
                let mut next = self.layers[i].weights.transpose() * &delta;
                // rectifier mask: the input of layer i is the activation of layer i-1
                next.zip_apply(a, |d, act| {
                    if act <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = next;
            }
            grads.push(Layer { weights, bias });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// Applies one optimizer update.
    pub fn step(&mut self, grads: &Gradients, lr: f64, optimizer: Optimizer) -> Result<()> {
        if grads.layers.len() != self.layers.len() || grads.layers.iter().zip(&self.layers).any(|(g, l)| !g.same_shape(l)) {
            return Err(Error::ShapeMismatch("gradients do not match the network".into()));
        }
        self.cache = None;
        match optimizer {
            Optimizer::Sgd => {
                for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
                    l.weights -= &g.weights * lr;
                    l.bias -= &g.bias * lr;
                }
            }
            Optimizer::Adam => {
                self.adam_step += 1;
                let t = self.adam_step as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                let update = |p: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
                    for i in 0..p.len() {
                        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                        p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
                    }
                };
                for (((l, m), v), g) in self.layers.iter_mut().zip(&mut self.adam_m).zip(&mut self.adam_v).zip(&grads.layers) {
                    update(
                        l.weights.as_mut_slice(),
                        m.weights.as_mut_slice(),
                        v.weights.as_mut_slice(),
                        g.weights.as_slice(),
                    );
                    update(l.bias.as_mut_slice(), m.bias.as_mut_slice(), v.bias.as_mut_slice(), g.bias.as_slice());
                }
            }
        }
        Ok(())
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self.layers.iter().map(Layer::zeros_like).collect(),
        }
    }
}

const MAGIC: &[u8; 8] = b"STOCHNET";
const VERSION: u32 = 1;

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64s(w: &mut impl Write, vs: &[f64]) -> std::io::Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| Error::Weights(format!("truncated weight file: {e}")))?;
        Ok(b)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn layer(&mut self, out: usize, inp: usize) -> Result<Layer> {
        let mut l = Layer::zeros(out, inp);
        for v in l.weights.iter_mut().chain(l.bias.iter_mut()) {
            *v = self.f64()?;
        }
        Ok(l)
    }
}

impl ScoringNetwork {
    /// Little-endian binary container: magic, version, task tag, input
    /// scale, layer shapes, parameters and optimizer moments.
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[self.task.tag()])?;
        put_f64s(w, &[self.input_scale])?;
        put_u64(w, self.layers.len() as u64)?;
        for l in &self.layers {
            put_u64(w, l.weights.nrows() as u64)?;
            put_u64(w, l.weights.ncols() as u64)?;
        }
        put_u64(w, self.adam_step)?;
        for set in [&self.layers, &self.adam_m, &self.adam_v] {
            for l in set {
                put_f64s(w, l.weights.as_slice())?;
                put_f64s(w, l.bias.as_slice())?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut r = Reader { inner: r };
        if &r.bytes::<8>()? != MAGIC {
            return Err(Error::Weights("not a scoring network file".into()));
        }
        let version = u32::from_le_bytes(r.bytes()?);
        if version != VERSION {
            return Err(Error::Weights(format!("unsupported weight file version {version}")));
        }
        let task = Task::from_tag(r.bytes::<1>()?[0])?;
        let input_scale = r.f64()?;
        let count = r.u64()? as usize;
        if count == 0 || count > 64 {
            return Err(Error::Weights(format!("implausible layer count {count}")));
        }
        let mut shapes = Vec::with_capacity(count);
        for _ in 0..count {
            let out = r.u64()? as usize;
            let inp = r.u64()? as usize;
            if out == 0 || inp == 0 || out > 1 << 20 || inp > 1 << 20 {
                return Err(Error::Weights(format!("implausible layer shape {out}x{inp}")));
            }
            if let Some(&(prev, _)) = shapes.last() {
                if prev != inp {
                    return Err(Error::Weights("layer shapes do not chain".into()));
                }
            }
            shapes.push((out, inp));
        }
        if shapes.last().map(|s| s.0) != Some(1) {
            return Err(Error::Weights("output layer must have width 1".into()));
        }
        let step = r.u64()?;
        let mut sets: Vec<Vec<Layer>> = Vec::with_capacity(3);
        for _ in 0..3 {
            sets.push(shapes.iter().map(|&(o, i)| r.layer(o, i)).collect::<Result<_>>()?);
        }
        let mut extra = [0u8; 1];
        if r.inner.read(&mut extra).map_err(|e| Error::Weights(e.to_string()))? != 0 {
            return Err(Error::Weights("trailing bytes after weights".into()));
        }
        let adam_v = sets.pop().unwrap();
        let adam_m = sets.pop().unwrap();
        let layers = sets.pop().unwrap();
        Ok(Self {
            task,
            input_scale,
            layers,
            adam_step: step,
            adam_m,
            adam_v,
            cache: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::Weights(format!("{}: {e}", path.display())))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ScoringNetwork {
        ScoringNetwork::new(Task::Pose, 5, &[4, 3], 1.0, 11)
    }

    #[test]
    fn zero_network_scores_zero() {
        let mut net = tiny();
        net.set_parameters(&vec![0.0; net.parameter_count()]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5, 9.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_layer_is_affine() {
        let layer = Layer {
            weights: DMatrix::from_row_slice(1, 3, &[0.5, -1.0, 2.0]),
            bias: DVector::from_element(1, 0.25),
        };
        let net = ScoringNetwork::from_layers(Task::Camera, 1.0, vec![layer]);
        assert_eq!(net.forward(&[2.0, 1.0, 0.5]).unwrap(), 1.0 - 1.0 + 1.0 + 0.25);
    }

    #[test]
    fn width_and_cache_errors() {
        let net = tiny();
        assert!(matches!(net.forward(&[1.0]), Err(Error::WidthMismatch { expected: 5, got: 1 })));
        assert!(matches!(net.backward(&[1.0]), Err(Error::NoCachedForward)));
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let layer = Layer {
            weights: DMatrix::from_element(1, 1, 0.0),
            bias: DVector::from_element(1, 0.0),
        };
        let mut net = ScoringNetwork::from_layers(Task::Pose, 1.0, vec![layer]);
        let mut g = net.zero_gradients();
        g.layers[0].weights[(0, 0)] = 1.0;
        net.step(&g, 0.1, Optimizer::Adam).unwrap();
        assert!((net.layers[0].weights[(0, 0)] + 0.1).abs() < 1e-6);
        assert_eq!(net.layers[0].bias[0], 0.0);
    }

    #[test]
    fn zero_lr_changes_nothing() {
        let mut net = tiny();
        let before = net.parameters();
        net.forward_pool(&[vec![1.0; 5], vec![0.5; 5]]).unwrap();
        let g = net.backward(&[1.0, -1.0]).unwrap();
        net.step(&g, 0.0, Optimizer::Adam).unwrap();
        assert_eq!(net.parameters(), before);
    }

    #[test]
    fn binary_round_trip() {
        let mut net = tiny();
        net.forward_pool(&[vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap();
        let g = net.backward(&[1.0]).unwrap();
        net.step(&g, 1e-3, Optimizer::Adam).unwrap();
        let mut buf = Vec::new();
        net.write_to(&mut buf).unwrap();
        let back = ScoringNetwork::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, net);
        buf.truncate(buf.len() - 3);
        assert!(ScoringNetwork::read_from(buf.as_slice()).is_err());
    }
}
