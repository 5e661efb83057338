//! Flat parameter store and matching gradient buffers.

use ndarray::{ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::real::Real;

/// Fixed architecture sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub hidden: usize,
    /// Feed the rescheduled flag to the graph layer as a third input feature.
    pub include_flag: bool,
    pub batch_norm: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self { hidden: 128, include_flag: false, batch_norm: true }
    }
}

impl NetConfig {
    pub fn input_dim(&self) -> usize {
        if self.include_flag {
            3
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    GinMlp,
    Epsilon,
    BnAffine,
    Actor,
    Critic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tensor {
    GinW1,
    GinB1,
    GinW2,
    GinB2,
    Epsilon,
    BnScale,
    BnShift,
    ActorW1,
    ActorB1,
    ActorW2,
    ActorB2,
    CriticW1,
    CriticB1,
    CriticW2,
    CriticB2,
}

impl Tensor {
    pub const ALL: [Tensor; 15] = [
        Tensor::GinW1,
        Tensor::GinB1,
        Tensor::GinW2,
        Tensor::GinB2,
        Tensor::Epsilon,
        Tensor::BnScale,
        Tensor::BnShift,
        Tensor::ActorW1,
        Tensor::ActorB1,
        Tensor::ActorW2,
        Tensor::ActorB2,
        Tensor::CriticW1,
        Tensor::CriticB1,
        Tensor::CriticW2,
        Tensor::CriticB2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tensor::GinW1 => "gin.w1",
            Tensor::GinB1 => "gin.b1",
            Tensor::GinW2 => "gin.w2",
            Tensor::GinB2 => "gin.b2",
            Tensor::Epsilon => "gin.epsilon",
            Tensor::BnScale => "gin.bn.scale",
            Tensor::BnShift => "gin.bn.shift",
            Tensor::ActorW1 => "actor.w1",
            Tensor::ActorB1 => "actor.b1",
            Tensor::ActorW2 => "actor.w2",
            Tensor::ActorB2 => "actor.b2",
            Tensor::CriticW1 => "critic.w1",
            Tensor::CriticB1 => "critic.b1",
            Tensor::CriticW2 => "critic.w2",
            Tensor::CriticB2 => "critic.b2",
        }
    }

    pub fn group(self) -> Group {
        match self {
            Tensor::GinW1 | Tensor::GinB1 | Tensor::GinW2 | Tensor::GinB2 => Group::GinMlp,
            Tensor::Epsilon => Group::Epsilon,
            Tensor::BnScale | Tensor::BnShift => Group::BnAffine,
            Tensor::ActorW1 | Tensor::ActorB1 | Tensor::ActorW2 | Tensor::ActorB2 => Group::Actor,
            Tensor::CriticW1 | Tensor::CriticB1 | Tensor::CriticW2 | Tensor::CriticB2 => Group::Critic,
        }
    }

    /// `(rows, cols)`; vectors are single rows.
    pub fn shape(self, cfg: &NetConfig) -> (usize, usize) {
        let h = cfg.hidden;
        match self {
            Tensor::GinW1 => (cfg.input_dim(), h),
            Tensor::GinW2 | Tensor::CriticW1 => (h, h),
            Tensor::ActorW1 => (2 * h, h),
            Tensor::ActorW2 | Tensor::CriticW2 => (h, 1),
            Tensor::Epsilon | Tensor::ActorB2 | Tensor::CriticB2 => (1, 1),
            Tensor::GinB1 | Tensor::GinB2 | Tensor::BnScale | Tensor::BnShift | Tensor::ActorB1 | Tensor::CriticB1 => {
                (1, h)
            }
        }
    }

    fn is_weight(self) -> bool {
        matches!(
            self,
            Tensor::GinW1 | Tensor::GinW2 | Tensor::ActorW1 | Tensor::ActorW2 | Tensor::CriticW1 | Tensor::CriticW2
        )
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Trainable tensors plus batch-norm running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub cfg: NetConfig,
    data: Vec<Vec<T>>,
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
}

impl<T: Real> Params<T> {
    /// All trainable values zero, batch-norm scale one.
    pub fn zeros(cfg: NetConfig) -> Self {
        let data = Tensor::ALL
            .iter()
            .map(|t| {
                let (r, c) = t.shape(&cfg);
                let fill = if *t == Tensor::BnScale { T::one() } else { T::zero() };
                vec![fill; r * c]
            })
            .collect();
        Self { cfg, data, running_mean: vec![T::zero(); cfg.hidden], running_var: vec![T::one(); cfg.hidden] }
    }

    /// Glorot-uniform weights, zero biases and epsilon, unit scale, zero shift.
    pub fn init<R: Rng + ?Sized>(cfg: NetConfig, rng: &mut R) -> Self {
        let mut p = Self::zeros(cfg);
        for t in Tensor::ALL {
            if t.is_weight() {
                let (r, c) = t.shape(&cfg);
                let bound = (6.0 / (r + c) as f64).sqrt();
                for x in p.get_mut(t) {
                    *x = T::lit(rng.gen_range(-bound..bound));
                }
            }
        }
        p
    }

    pub fn get(&self, t: Tensor) -> &[T] {
        &self.data[t.index()]
    }

    pub fn get_mut(&mut self, t: Tensor) -> &mut [T] {
        &mut self.data[t.index()]
    }

    pub fn mat(&self, t: Tensor) -> ArrayView2<'_, T> {
        ArrayView2::from_shape(t.shape(&self.cfg), self.get(t)).expect("shape")
    }

    pub fn vec(&self, t: Tensor) -> ArrayView1<'_, T> {
        ArrayView1::from(self.get(t))
    }

    pub fn scalar(&self, t: Tensor) -> T {
        self.get(t)[0]
    }

    pub fn num_trainable(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().flatten().chain(&self.running_mean).chain(&self.running_var).all(|x| x.is_finite())
    }

    /// Same values in another precision.
    pub fn cast<U: Real>(&self) -> Params<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::lit(x.to_f64().expect("finite"))).collect::<Vec<U>>();
        Params {
            cfg: self.cfg,
            data: self.data.iter().map(conv).collect(),
            running_mean: conv(&self.running_mean),
            running_var: conv(&self.running_var),
        }
    }

    /// Blends batch statistics into the running statistics.
    pub fn update_running(&mut self, mean: &[T], var: &[T], momentum: T) {
        let keep = momentum;
        let take = T::one() - momentum;
        for (r, &m) in self.running_mean.iter_mut().zip(mean) {
            *r = keep * *r + take * m;
        }
        for (r, &v) in self.running_var.iter_mut().zip(var) {
            *r = keep * *r + take * v;
        }
    }
}

/// Gradient accumulators with the shapes of [`Params`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradTape<T> {
    data: Vec<Vec<T>>,
}

impl<T: Real> GradTape<T> {
    pub fn zeros(cfg: &NetConfig) -> Self {
        let data = Tensor::ALL
            .iter()
            .map(|t| {
                let (r, c) = t.shape(cfg);
                vec![T::zero(); r * c]
            })
            .collect();
        Self { data }
    }

    pub fn zero(&mut self) {
        for v in &mut self.data {
            v.iter_mut().for_each(|x| *x = T::zero());
        }
    }

    pub fn get(&self, t: Tensor) -> &[T] {
        &self.data[t.index()]
    }

    pub fn get_mut(&mut self, t: Tensor) -> &mut [T] {
        &mut self.data[t.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().flatten().all(|x| *x == T::zero())
    }

    pub fn norm(&self) -> T {
        self.data.iter().flatten().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn scale(&mut self, factor: T) {
        for x in self.data.iter_mut().flatten() {
            *x = *x * factor;
        }
    }
}

pub(crate) fn raw<T>(p: &Params<T>) -> &Vec<Vec<T>> {
    &p.data
}

pub(crate) fn raw_mut<T>(p: &mut Params<T>) -> &mut Vec<Vec<T>> {
    &mut p.data
}

pub(crate) fn tape_raw<T>(g: &GradTape<T>) -> &Vec<Vec<T>> {
    &g.data
}
