//! Forward passes and their hand-written backward passes.

use ndarray::{s, Array1, Array2, Axis, Zip};
use thiserror::Error;

use crate::graph::GraphInput;
use crate::params::{GradTape, Params, Tensor};
use crate::real::Real;

pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node {0} out of range")]
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics over the nodes of the graph.
    Train,
    /// Running statistics.
    Eval,
}

fn relu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

fn relu_mask<T: Real>(d: &mut Array2<T>, pre: &Array2<T>) {
    Zip::from(d).and(pre).for_each(|d, &p| {
        if p <= T::zero() {
            *d = T::zero();
        }
    });
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn add_into<T: Real>(dst: &mut [T], src: impl IntoIterator<Item = T>) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

/// Intermediate values of one graph-layer pass.
#[derive(Debug, Clone)]
pub struct GinCache<T> {
    mode: Mode,
    agg: Array2<T>,
    pre1: Array2<T>,
    act1: Array2<T>,
    xhat: Array2<T>,
    inv_std: Array1<T>,
    out_pre: Array2<T>,
    /// Per-feature mean and variance of the batch (train mode).
    pub batch_mean: Array1<T>,
    pub batch_var: Array1<T>,
}

#[derive(Debug, Clone)]
pub struct GinOutput<T> {
    /// Node embeddings, one row per node.
    pub h: Array2<T>,
    pub cache: GinCache<T>,
}

/// One graph isomorphism layer with a two-layer MLP, batch norm and ReLU.
pub fn gin_forward<T: Real>(p: &Params<T>, g: &GraphInput<T>, mode: Mode) -> GinOutput<T> {
    let x0 = &g.features;
    let self_weight = T::one() + p.scalar(Tensor::Epsilon);
    let mut agg = x0.mapv(|x| x * self_weight);
    for (v, nbrs) in g.in_neighbors.iter().enumerate() {
        for &u in nbrs {
            let row = x0.row(u).to_owned();
            let mut dst = agg.row_mut(v);
            dst += &row;
        }
    }
    let pre1 = agg.dot(&p.mat(Tensor::GinW1)) + p.vec(Tensor::GinB1);
    let act1 = pre1.mapv(relu);
    let pre_bn = act1.dot(&p.mat(Tensor::GinW2)) + p.vec(Tensor::GinB2);
    let hidden = p.cfg.hidden;
    let n = T::lit(x0.nrows() as f64);
    let eps = T::lit(BN_EPS);
    let (xhat, inv_std, batch_mean, batch_var, out_pre) = if p.cfg.batch_norm {
        let (mean, var) = match mode {
            Mode::Train => {
                let mean = pre_bn.sum_axis(Axis(0)) / n;
                let centered = &pre_bn - &mean;
                let var = centered.mapv(|x| x * x).sum_axis(Axis(0)) / n;
                (mean, var)
            }
            Mode::Eval => (Array1::from(p.running_mean.clone()), Array1::from(p.running_var.clone())),
        };
        let inv_std = var.mapv(|v| T::one() / (v + eps).sqrt());
        let xhat = (&pre_bn - &mean) * &inv_std;
        let out_pre = &xhat * &p.vec(Tensor::BnScale) + p.vec(Tensor::BnShift);
        (xhat, inv_std, mean, var, out_pre)
    } else {
        let zeros = Array1::zeros(hidden);
        (pre_bn.clone(), Array1::ones(hidden), zeros.clone(), zeros, pre_bn)
    };
    let h = out_pre.mapv(relu);
    GinOutput { h, cache: GinCache { mode, agg, pre1, act1, xhat, inv_std, out_pre, batch_mean, batch_var } }
}

/// Accumulates parameter gradients of the graph layer given `dh = dL/dh`.
pub fn gin_backward<T: Real>(p: &Params<T>, g: &GraphInput<T>, c: &GinCache<T>, dh: &Array2<T>, tape: &mut GradTape<T>) {
    let mut d_out = dh.clone();
    relu_mask(&mut d_out, &c.out_pre);
    let d_pre_bn = if p.cfg.batch_norm {
        add_into(tape.get_mut(Tensor::BnScale), (&d_out * &c.xhat).sum_axis(Axis(0)));
        add_into(tape.get_mut(Tensor::BnShift), d_out.sum_axis(Axis(0)));
        let dxhat = &d_out * &p.vec(Tensor::BnScale);
        match c.mode {
            Mode::Train => {
                let n = T::lit(dxhat.nrows() as f64);
                let sum_d = dxhat.sum_axis(Axis(0));
                let sum_dx = (&dxhat * &c.xhat).sum_axis(Axis(0));
                let inner = dxhat.mapv(|x| x * n) - &sum_d - &(&c.xhat * &sum_dx);
                let d = inner * &c.inv_std.mapv(|s| s / n);
                // columns sum to zero exactly; remove the rounding residue
                let residue = d.sum_axis(Axis(0)) / n;
                d - &residue
            }
            Mode::Eval => dxhat * &c.inv_std,
        }
    } else {
        d_out
    };
    add_into(tape.get_mut(Tensor::GinW2), c.act1.t().dot(&d_pre_bn));
    add_into(tape.get_mut(Tensor::GinB2), d_pre_bn.sum_axis(Axis(0)));
    let mut d_pre1 = d_pre_bn.dot(&p.mat(Tensor::GinW2).t());
    relu_mask(&mut d_pre1, &c.pre1);
    add_into(tape.get_mut(Tensor::GinW1), c.agg.t().dot(&d_pre1));
    add_into(tape.get_mut(Tensor::GinB1), d_pre1.sum_axis(Axis(0)));
    let d_agg = d_pre1.dot(&p.mat(Tensor::GinW1).t());
    let d_eps = (&d_agg * &g.features).sum();
    let e = tape.get_mut(Tensor::Epsilon);
    e[0] += d_eps;
}

#[derive(Debug, Clone)]
pub struct ActorCache<T> {
    pub first: usize,
    pub second: usize,
    input: Array1<T>,
    pre: Array1<T>,
    act: Array1<T>,
    pub logit: T,
    /// Probability of the swap action.
    pub prob: T,
}

/// Swap probability from the embeddings of `first` (the train ahead) and
/// `second` (the candidate behind it).
pub fn actor_forward<T: Real>(p: &Params<T>, h: &Array2<T>, first: usize, second: usize) -> Result<ActorCache<T>, NetError> {
    for v in [first, second] {
        if v >= h.nrows() {
            return Err(NetError::Node(v));
        }
    }
    let hidden = p.cfg.hidden;
    let mut input = Array1::zeros(2 * hidden);
    input.slice_mut(s![..hidden]).assign(&h.row(first));
    input.slice_mut(s![hidden..]).assign(&h.row(second));
    let pre = input.dot(&p.mat(Tensor::ActorW1)) + p.vec(Tensor::ActorB1);
    let act = pre.mapv(relu);
    let logit = act.dot(&p.vec(Tensor::ActorW2)) + p.scalar(Tensor::ActorB2);
    Ok(ActorCache { first, second, input, pre, act, logit, prob: sigmoid(logit) })
}

pub fn actor_backward<T: Real>(p: &Params<T>, c: &ActorCache<T>, d_logit: T, tape: &mut GradTape<T>, dh: &mut Array2<T>) {
    let hidden = p.cfg.hidden;
    add_into(tape.get_mut(Tensor::ActorW2), c.act.iter().map(|&a| a * d_logit));
    let b = tape.get_mut(Tensor::ActorB2);
    b[0] += d_logit;
    let mut d_pre = p.vec(Tensor::ActorW2).mapv(|w| w * d_logit);
    Zip::from(&mut d_pre).and(&c.pre).for_each(|d, &x| {
        if x <= T::zero() {
            *d = T::zero();
        }
    });
    {
        let w1 = tape.get_mut(Tensor::ActorW1);
        for (r, &x) in c.input.iter().enumerate() {
            if x != T::zero() {
                add_into(&mut w1[r * hidden..(r + 1) * hidden], d_pre.iter().map(|&d| d * x));
            }
        }
    }
    add_into(tape.get_mut(Tensor::ActorB1), d_pre.iter().copied());
    let d_input = p.mat(Tensor::ActorW1).dot(&d_pre);
    let mut row = dh.row_mut(c.first);
    row += &d_input.slice(s![..hidden]);
    let mut row = dh.row_mut(c.second);
    row += &d_input.slice(s![hidden..]);
}

#[derive(Debug, Clone)]
pub struct CriticCache<T> {
    nodes: usize,
    pooled: Array1<T>,
    pre: Array1<T>,
    act: Array1<T>,
    pub value: T,
}

/// State value from the mean node embedding.
pub fn critic_forward<T: Real>(p: &Params<T>, h: &Array2<T>) -> Result<CriticCache<T>, NetError> {
    if h.nrows() == 0 {
        return Err(NetError::EmptyGraph);
    }
    let pooled = h.mean_axis(Axis(0)).expect("non-empty");
    let pre = pooled.dot(&p.mat(Tensor::CriticW1)) + p.vec(Tensor::CriticB1);
    let act = pre.mapv(relu);
    let value = act.dot(&p.vec(Tensor::CriticW2)) + p.scalar(Tensor::CriticB2);
    Ok(CriticCache { nodes: h.nrows(), pooled, pre, act, value })
}

pub fn critic_backward<T: Real>(p: &Params<T>, c: &CriticCache<T>, d_value: T, tape: &mut GradTape<T>, dh: &mut Array2<T>) {
    let hidden = p.cfg.hidden;
    add_into(tape.get_mut(Tensor::CriticW2), c.act.iter().map(|&a| a * d_value));
    let b = tape.get_mut(Tensor::CriticB2);
    b[0] += d_value;
    let mut d_pre = p.vec(Tensor::CriticW2).mapv(|w| w * d_value);
    Zip::from(&mut d_pre).and(&c.pre).for_each(|d, &x| {
        if x <= T::zero() {
            *d = T::zero();
        }
    });
    {
        let w1 = tape.get_mut(Tensor::CriticW1);
        for (r, &x) in c.pooled.iter().enumerate() {
            if x != T::zero() {
                add_into(&mut w1[r * hidden..(r + 1) * hidden], d_pre.iter().map(|&d| d * x));
            }
        }
    }
    add_into(tape.get_mut(Tensor::CriticB1), d_pre.iter().copied());
    let d_pooled = p.mat(Tensor::CriticW1).dot(&d_pre) / T::lit(c.nodes as f64);
    for mut row in dh.rows_mut() {
        row += &d_pooled;
    }
}

/// Graph layer, actor and critic evaluated on one decision state.
#[derive(Debug, Clone)]
pub struct Evaluation<T> {
    pub gin: GinOutput<T>,
    pub actor: ActorCache<T>,
    pub critic: CriticCache<T>,
}

impl<T: Real> Evaluation<T> {
    pub fn run(p: &Params<T>, g: &GraphInput<T>, first: usize, second: usize, mode: Mode) -> Result<Self, NetError> {
        if g.num_nodes() == 0 {
            return Err(NetError::EmptyGraph);
        }
        let gin = gin_forward(p, g, mode);
        let actor = actor_forward(p, &gin.h, first, second)?;
        let critic = critic_forward(p, &gin.h)?;
        Ok(Self { gin, actor, critic })
    }

    pub fn prob(&self) -> T {
        self.actor.prob
    }

    pub fn value(&self) -> T {
        self.critic.value
    }

    /// Accumulates gradients of a loss whose derivatives with respect to the
    /// actor logit and the value are given.
    pub fn backward(&self, p: &Params<T>, g: &GraphInput<T>, d_logit: T, d_value: T, tape: &mut GradTape<T>) {
        let mut dh = Array2::zeros(self.gin.h.raw_dim());
        if d_logit != T::zero() {
            actor_backward(p, &self.actor, d_logit, tape, &mut dh);
        }
        if d_value != T::zero() {
            critic_backward(p, &self.critic, d_value, tape, &mut dh);
        }
        gin_backward(p, g, &self.gin.cache, &dh, tape);
    }
}

/// `dL/dlogit` from `dL/dp` through the sigmoid.
pub fn logit_grad_from_prob<T: Real>(prob: T, d_prob: T) -> T {
    d_prob * prob * (T::one() - prob)
}
