use ndarray::Zip;

use super::mlp::{lit, Gradients, Mlp, Scalar};
use crate::error::{Error, Result};

pub const DEFAULT_LR: f64 = 5e-4;
pub const DEFAULT_WEIGHT_DECAY: f64 = 1e-5;

/// Adam with bias correction. Weight decay is added to the gradient (L2, coupled) for the two
/// weight tensors only; biases are not decayed.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T = f32> {
    pub m: Gradients<T>,
    pub v: Gradients<T>,
    pub t: u64,
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(inputs: usize, hidden: usize, lr: f64, weight_decay: f64) -> Self {
        AdamState {
            m: Gradients::zeros(inputs, hidden),
            v: Gradients::zeros(inputs, hidden),
            t: 0,
            lr,
            weight_decay,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn for_model(mlp: &Mlp<T>, lr: f64, weight_decay: f64) -> Self {
        Self::new(mlp.inputs(), mlp.hidden(), lr, weight_decay)
    }

    /// One update of `mlp` in place.
    pub fn step(&mut self, mlp: &mut Mlp<T>, grads: &Gradients<T>) -> Result<()> {
        let want = (mlp.inputs(), mlp.hidden());
        if grads.shape() != want || self.m.shape() != want {
            return Err(Error::Shape(format!(
                "gradients {:?} / moments {:?} vs network {:?}",
                grads.shape(),
                self.m.shape(),
                want
            )));
        }
        self.t += 1;
        let t = self.t as i32;
        let k = Coefficients {
            b1: lit(self.beta1),
            b2: lit(self.beta2),
            c1: lit(1.0 / (1.0 - self.beta1.powi(t))),
            c2: lit(1.0 / (1.0 - self.beta2.powi(t))),
            lr: lit(self.lr),
            eps: lit(self.eps),
        };
        let wd: T = lit(self.weight_decay);
        let zero = T::zero();

        Zip::from(&mut mlp.w1)
            .and(&grads.w1)
            .and(&mut self.m.w1)
            .and(&mut self.v.w1)
            .for_each(|p, &g, m, v| update(&k, p, g, m, v, wd));
        Zip::from(&mut mlp.w2)
            .and(&grads.w2)
            .and(&mut self.m.w2)
            .and(&mut self.v.w2)
            .for_each(|p, &g, m, v| update(&k, p, g, m, v, wd));
        Zip::from(&mut mlp.b1)
            .and(&grads.b1)
            .and(&mut self.m.b1)
            .and(&mut self.v.b1)
            .for_each(|p, &g, m, v| update(&k, p, g, m, v, zero));
        update(
            &k,
            &mut mlp.b2,
            grads.b2,
            &mut self.m.b2,
            &mut self.v.b2,
            zero,
        );
        Ok(())
    }
}

struct Coefficients<T> {
    b1: T,
    b2: T,
    c1: T,
    c2: T,
    lr: T,
    eps: T,
}

#[inline]
fn update<T: Scalar>(k: &Coefficients<T>, p: &mut T, g: T, m: &mut T, v: &mut T, wd: T) {
    let g = g + wd * *p;
    *m = k.b1 * *m + (T::one() - k.b1) * g;
    *v = k.b2 * *v + (T::one() - k.b2) * g * g;
    let m_hat = *m * k.c1;
    let v_hat = *v * k.c2;
    *p = *p - k.lr * m_hat / (v_hat.sqrt() + k.eps);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(value: f64) -> Mlp<f64> {
        let mut m = Mlp::<f64>::zeros(1, 1);
        m.w1[[0, 0]] = value;
        m
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut m = single(0.1);
        let mut g = Gradients::<f64>::zeros(1, 1);
        g.w1[[0, 0]] = 1.0;
        let mut adam = AdamState::for_model(&m, 5e-4, 1e-5);
        adam.step(&mut m, &g).unwrap();
        assert!((m.w1[[0, 0]] - 0.0995).abs() < 1e-9, "{}", m.w1[[0, 0]]);
        assert_eq!(adam.t, 1);
    }

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let mut m = Mlp::<f64>::init_with(5, 3, 1);
        m.b1.fill(0.25);
        let before = m.clone();
        let g = Gradients::zeros(5, 3);
        let mut adam = AdamState::for_model(&m, 1e-3, 0.0);
        for _ in 0..10 {
            adam.step(&mut m, &g).unwrap();
        }
        assert_eq!(m, before);
    }

    #[test]
    fn biases_are_not_decayed() {
        let mut m = Mlp::<f64>::zeros(2, 2);
        m.b1.fill(1.0);
        m.w2.fill(1.0);
        let g = Gradients::zeros(2, 2);
        let mut adam = AdamState::for_model(&m, 1e-3, 0.1);
        adam.step(&mut m, &g).unwrap();
        assert_eq!(m.b1[0], 1.0);
        assert!(m.w2[0] < 1.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut m = Mlp::<f64>::zeros(2, 2);
        let g = Gradients::zeros(3, 2);
        let mut adam = AdamState::for_model(&m, 1e-3, 0.0);
        assert!(matches!(adam.step(&mut m, &g), Err(Error::Shape(_))));
    }
}
