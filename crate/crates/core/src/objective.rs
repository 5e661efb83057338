use crate::model::{Instance, Minutes, ModelError, ObjectiveConfig, Solution};
use crate::scalar::Scalar;

/// Penalty for one arrival: lateness in full, earliness weighted by λ.
pub fn delay_penalty<S: Scalar>(actual: Minutes, planned: Minutes, cfg: &ObjectiveConfig<S>) -> S {
    deviation_penalty(actual - planned, cfg)
}

/// Penalty for a signed deviation `actual - planned`.
pub fn deviation_penalty<S: Scalar>(deviation: Minutes, cfg: &ObjectiveConfig<S>) -> S {
    if deviation > 0 {
        S::from_minutes(deviation)
    } else {
        cfg.lambda * S::from_minutes(-deviation)
    }
}

/// Total penalty over every arrival event.
pub fn objective<S: Scalar>(sol: &Solution, inst: &Instance, cfg: &ObjectiveConfig<S>) -> Result<S, ModelError> {
    sol.check_dimensions(inst)?;
    Ok(objective_unchecked(&sol.arrival, inst, cfg))
}

pub(crate) fn objective_unchecked<S: Scalar>(arrival: &[Vec<Minutes>], inst: &Instance, cfg: &ObjectiveConfig<S>) -> S {
    let mut late = 0;
    let mut early = 0;
    for (row, plan) in arrival.iter().zip(&inst.planned_arrival) {
        for (&a, &p) in row.iter().zip(plan) {
            if a > p {
                late += a - p;
            } else {
                early += p - a;
            }
        }
    }
    S::from_minutes(late) + cfg.lambda * S::from_minutes(early)
}
