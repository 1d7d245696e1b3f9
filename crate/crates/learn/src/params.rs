//! Named parameters with Adam state.

use rand::Rng;

use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    first_moment: Tensor,
    second_moment: Tensor,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    params: Vec<Parameter>,
    steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Adam { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> usize {
        let name = name.into();
        assert!(self.index_of(&name).is_none(), "duplicate parameter {name}");
        let (r, c) = value.shape();
        self.params.push(Parameter {
            name,
            value,
            first_moment: Tensor::zeros(r, c),
            second_moment: Tensor::zeros(r, c),
        });
        self.params.len() - 1
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn value(&self, i: usize) -> &Tensor {
        &self.params[i].value
    }

    pub fn value_mut(&mut self, i: usize) -> &mut Tensor {
        &mut self.params[i].value
    }

    pub fn name(&self, i: usize) -> &str {
        &self.params[i].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    /// One bias-corrected Adam update.
    pub fn adam_step(&mut self, grads: &[Tensor], adam: &Adam) {
        assert_eq!(grads.len(), self.params.len(), "one gradient per parameter");
        self.steps += 1;
        let t = self.steps as i32;
        let c1 = 1.0 - adam.beta1.powi(t);
        let c2 = 1.0 - adam.beta2.powi(t);
        for (p, g) in self.params.iter_mut().zip(grads) {
            assert_eq!(p.value.shape(), g.shape(), "gradient shape for {}", p.name);
            let m = p.first_moment.data_mut();
            let v = p.second_moment.data_mut();
            for (i, (w, &gi)) in p.value.data_mut().iter_mut().zip(g.data()).enumerate() {
                m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * gi;
                v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * gi * gi;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                *w -= adam.lr * mh / (vh.sqrt() + adam.eps);
            }
        }
    }
}

/// Glorot-uniform matrix scaled by `gain`.
pub fn glorot<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, gain: f64) -> Tensor {
    let a = gain * (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-a..=a)).collect();
    Tensor::new(fan_in, fan_out, data)
}
