use std::fmt::Debug;
use std::iter::Sum;
use std::ops::AddAssign;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};

/// Floating-point element type of the network.
pub trait Real: Float + FromPrimitive + LinalgScalar + ScalarOperand + Debug + Default + Sum + AddAssign + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
