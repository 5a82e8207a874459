// SPDX-License-Identifier: MIT OR Apache-2.0

//! Activation edits that make a probe read a different board, and the
//! closed-loop evaluation of their effect on next-move predictions.

mod direct;
mod model;
mod moves;
mod sweep;

pub use direct::{
    bilinear_delta, compose_intervene, linear_intervene, tpr_intervene, trilinear_delta,
    trilinear_intervene, InterventionPlan, Intervener,
};
pub use model::{ModelAdapter, SyntheticModel, LEGAL_LOGIT};
pub use moves::{moves_from_logits, MoveSet, MOVE_THRESHOLD};
pub use sweep::{
    build_cases, default_grid, sweep_evaluate, CaseResult, InterventionCase, SweepReport,
    COORDINATE_PASSES, MAX_CARTESIAN_EDITS,
};
