use std::fmt::Debug;
use std::ops::AddAssign;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, LinalgScalar, ScalarOperand, Zip};
use num_traits::{Float, FromPrimitive};

use crate::encoder::{ENCODER_VERSION, FEATURES};
use crate::error::{Error, Result};
use crate::rng::DetRng;

pub const HIDDEN: usize = 512;

/// Element type of a network. Training runs in `f32`; gradient checks use `f64`.
pub trait Scalar:
    Float + FromPrimitive + LinalgScalar + ScalarOperand + AddAssign + Send + Sync + Debug + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[inline]
pub(crate) fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("representable constant")
}

/// One-hidden-layer perceptron: `sigmoid(w2 . relu(w1 x + b1) + b2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T = f32> {
    /// `hidden x inputs`, row-major.
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array1<T>,
    pub b2: T,
    pub encoder_version: u16,
}

/// Same shapes as [`Mlp`]; used for gradients and optimizer moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T = f32> {
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array1<T>,
    pub b2: T,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Gradients {
            w1: Array2::zeros((hidden, inputs)),
            b1: Array1::zeros(hidden),
            w2: Array1::zeros(hidden),
            b2: T::zero(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.w1.ncols(), self.w1.nrows())
    }

    fn add_assign(&mut self, other: &Gradients<T>) {
        self.w1 += &other.w1;
        self.b1 += &other.b1;
        self.w2 += &other.w2;
        self.b2 += other.b2;
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> T {
        self.w1
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(std::iter::once(&self.b2))
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Binary cross entropy, predictions clamped to `[1e-7, 1 - 1e-7]`.
    Bce,
    /// Mean squared error.
    Mse,
}

pub const BCE_CLAMP: f64 = 1e-7;

/// Training minibatch: one row per sample, binary targets.
#[derive(Clone, Debug)]
pub struct Batch<T = f32> {
    pub inputs: Array2<T>,
    pub targets: Array1<T>,
}

impl<T: Scalar> Batch<T> {
    pub fn new(inputs: Array2<T>, targets: Array1<T>) -> Result<Self> {
        if inputs.nrows() == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if inputs.nrows() != targets.len() {
            return Err(Error::LengthMismatch(inputs.nrows(), targets.len()));
        }
        if targets.iter().any(|&g| g != T::zero() && g != T::one()) {
            return Err(Error::Shape("targets must be 0 or 1".into()));
        }
        Ok(Batch { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Mlp {
            w1: Array2::zeros((hidden, inputs)),
            b1: Array1::zeros(hidden),
            w2: Array1::zeros(hidden),
            b2: T::zero(),
            encoder_version: ENCODER_VERSION,
        }
    }

    /// He-normal hidden weights (variance 2/inputs), Xavier-uniform output weights
    /// (bound sqrt(6/(hidden+1))), zero biases.
    pub fn init_with(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = DetRng::new(seed);
        let mut mlp = Self::zeros(inputs, hidden);
        let std = (2.0 / inputs as f64).sqrt();
        for w in mlp.w1.iter_mut() {
            *w = lit(rng.normal() * std);
        }
        let bound = (6.0 / (hidden as f64 + 1.0)).sqrt();
        for w in mlp.w2.iter_mut() {
            *w = lit((2.0 * rng.unit_f64() - 1.0) * bound);
        }
        mlp
    }

    /// The standard 173 -> 512 -> 1 network.
    pub fn init(seed: u64) -> Self {
        Self::init_with(FEATURES, HIDDEN, seed)
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(std::iter::once(&self.b2))
            .all(|v| v.is_finite())
    }

    pub fn forward(&self, x: &[T]) -> Result<T> {
        if x.len() != self.inputs() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.len(),
                self.inputs()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let x = ArrayView1::from(x);
        let mut h = self.w1.dot(&x);
        h += &self.b1;
        let z = h
            .iter()
            .zip(self.w2.iter())
            .fold(self.b2, |acc, (&a, &w)| acc + a.max(T::zero()) * w);
        Ok(sigmoid(z))
    }

    /// Row-wise forward pass.
    pub fn forward_batch(&self, inputs: ArrayView2<T>) -> Result<Array1<T>> {
        if inputs.ncols() != self.inputs() {
            return Err(Error::Shape(format!(
                "batch has {} features, network expects {}",
                inputs.ncols(),
                self.inputs()
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let (_, _, out) = self.activations(inputs);
        Ok(out)
    }

    /// Pre-activations, hidden activations and outputs.
    fn activations(&self, inputs: ArrayView2<T>) -> (Array2<T>, Array2<T>, Array1<T>) {
        let mut pre = inputs.dot(&self.w1.t());
        pre += &self.b1;
        let hidden = pre.mapv(|v| v.max(T::zero()));
        let mut z = hidden.dot(&self.w2);
        z.mapv_inplace(|v| sigmoid(v + self.b2));
        (pre, hidden, z)
    }

    /// Exact gradients of the mean loss over `batch`.
    pub fn backward(&self, batch: &Batch<T>, kind: LossKind) -> Gradients<T> {
        self.loss_and_gradients(batch, kind).1
    }

    /// Mean loss and its gradients. The batch is processed in fixed-size row chunks whose
    /// partial gradients are summed in chunk order, so the result does not depend on whether
    /// chunks run in parallel.
    pub fn loss_and_gradients(&self, batch: &Batch<T>, kind: LossKind) -> (T, Gradients<T>) {
        const CHUNK: usize = 128;
        let n = batch.len();
        let scale = T::one() / lit::<T>(n as f64);
        let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
        let work = |&start: &usize| {
            let end = (start + CHUNK).min(n);
            self.chunk_gradients(
                batch.inputs.slice(ndarray::s![start..end, ..]),
                batch.targets.slice(ndarray::s![start..end]),
                kind,
                scale,
            )
        };
        let parts: Vec<(T, Gradients<T>)> = crate::par::map(&starts, work);
        let mut total = Gradients::zeros(self.inputs(), self.hidden());
        let mut loss = T::zero();
        for (l, g) in &parts {
            loss += *l;
            total.add_assign(g);
        }
        (loss, total)
    }

    fn chunk_gradients(
        &self,
        inputs: ArrayView2<T>,
        targets: ArrayView1<T>,
        kind: LossKind,
        scale: T,
    ) -> (T, Gradients<T>) {
        let (pre, hidden, out) = self.activations(inputs);
        let mut loss = T::zero();
        // dL/dz per row, already divided by the full batch size.
        let mut dz = Array1::zeros(out.len());
        Zip::from(&mut dz)
            .and(&out)
            .and(&targets)
            .for_each(|d, &y, &g| match kind {
                LossKind::Bce => {
                    let eps = lit::<T>(BCE_CLAMP);
                    let yc = y.max(eps).min(T::one() - eps);
                    loss = loss - (g * yc.ln() + (T::one() - g) * (T::one() - yc).ln());
                    *d = (y - g) * scale;
                }
                LossKind::Mse => {
                    let diff = y - g;
                    loss += diff * diff;
                    *d = lit::<T>(2.0) * diff * y * (T::one() - y) * scale;
                }
            });
        let w2 = hidden.t().dot(&dz);
        let b2 = dz.sum();
        // dL/dpre = dz * w2, masked where the ReLU was inactive.
        let mut dpre = dz
            .view()
            .insert_axis(Axis(1))
            .dot(&self.w2.view().insert_axis(Axis(0)));
        Zip::from(&mut dpre).and(&pre).for_each(|d, &p| {
            if p <= T::zero() {
                *d = T::zero();
            }
        });
        let w1 = dpre.t().dot(&inputs);
        let b1 = dpre.sum_axis(Axis(0));
        (loss * scale, Gradients { w1, b1, w2, b2 })
    }

    /// Converts parameters to another precision.
    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        let conv = |v: &T| U::from_f64(v.to_f64().unwrap()).unwrap();
        Mlp {
            w1: self.w1.map(conv),
            b1: self.b1.map(conv),
            w2: self.w2.map(conv),
            b2: conv(&self.b2),
            encoder_version: self.encoder_version,
        }
    }
}

/// Mean loss of `predictions` against `targets`.
pub fn loss<T: Scalar>(predictions: &[T], targets: &[T], kind: LossKind) -> Result<T> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(Error::Shape("empty prediction list".into()));
    }
    let eps = lit::<T>(BCE_CLAMP);
    let sum = predictions
        .iter()
        .zip(targets)
        .fold(T::zero(), |acc, (&y, &g)| match kind {
            LossKind::Bce => {
                let yc = y.max(eps).min(T::one() - eps);
                acc - (g * yc.ln() + (T::one() - g) * (T::one() - yc).ln())
            }
            LossKind::Mse => acc + (y - g) * (y - g),
        });
    Ok(sum / lit::<T>(predictions.len() as f64))
}
