// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-loop evaluation: intervene toward a target board, read the
//! model's next-move set, and count disagreements with the target's legal
//! moves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{moves_from_logits, InterventionPlan, Intervener, ModelAdapter, MoveSet};
use crate::encodings::mix_seed;
use crate::error::{Error, Result};
use crate::othello::{make_target_board_k, random_game, Edit, TargetBoard, Transcript, MAX_GAME_LEN};

/// The scale grid 0.25, 0.5, ..., 2.5.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.25).collect()
}

/// Full Cartesian search is used up to this many edits.
pub const MAX_CARTESIAN_EDITS: usize = 2;
/// Coordinate-wise passes for larger plans.
pub const COORDINATE_PASSES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionCase {
    pub transcript: Transcript,
    pub target: TargetBoard,
}

impl InterventionCase {
    pub fn original_moves(&self) -> MoveSet {
        MoveSet(self.transcript.final_board().legal_mask())
    }

    pub fn target_moves(&self) -> MoveSet {
        MoveSet(self.target.board.legal_mask())
    }
}

const STREAM_CASES: u64 = 0x6361_7365;
const MAX_CASE_DRAWS: u64 = 10_000;

/// Builds `n` cases with `k` edits each from random games.
///
/// Each case draws a game truncated to a length uniform in `[k + 2, 58]`
/// and a target board. Draws are skipped when no valid target exists or
/// when the original or target position has no legal move (the model's
/// move set is then undefined).
pub fn build_cases(n: usize, k: usize, seed: u64) -> Result<Vec<InterventionCase>> {
    if k == 0 || k + 2 > MAX_GAME_LEN - 2 {
        return Err(Error::InvalidArgument(format!("edit count {k} out of range")));
    }
    let mut out = Vec::with_capacity(n);
    let mut draw = 0u64;
    while out.len() < n {
        if draw >= MAX_CASE_DRAWS * (n as u64).max(1) {
            return Err(Error::NoValidTarget { attempts: draw as usize });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, STREAM_CASES + k as u64, draw));
        draw += 1;
        let len = rng.random_range(k + 2..=MAX_GAME_LEN - 2);
        let transcript = random_game(rng.random(), len);
        let board = transcript.final_board();
        if board.legal_mask() == 0 {
            continue;
        }
        let Ok(target) = make_target_board_k(&board, k, rng.random(), crate::othello::DEFAULT_TARGET_ATTEMPTS) else {
            continue;
        };
        if target.board.legal_mask() == 0 {
            continue;
        }
        out.push(InterventionCase { transcript, target });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub transcript: String,
    pub edits: Vec<Edit>,
    pub original_moves: MoveSet,
    pub target_moves: MoveSet,
    pub best_error: usize,
    pub best_scales: Vec<f64>,
    pub null_error: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub n_cases: usize,
    pub k_edits: usize,
    pub grid: Vec<f64>,
    pub mean_best_error: f64,
    pub null_baseline_error: f64,
    pub per_case: Vec<CaseResult>,
}

struct Search<'a, M: ModelAdapter + ?Sized> {
    model: &'a M,
    iv: &'a Intervener,
    h: Vec<f64>,
    edits: Vec<Edit>,
    target: MoveSet,
    best: Option<(usize, Vec<f64>)>,
    evaluations: usize,
}

impl<M: ModelAdapter + ?Sized> Search<'_, M> {
    fn eval(&mut self, scales: &[f64]) -> Result<usize> {
        let plan = InterventionPlan {
            edits: self.edits.clone(),
            scales: scales.to_vec(),
        };
        let h = self.iv.compose(&self.h, &plan)?;
        let err = moves_from_logits(&self.model.next_move_logits(&h)?).error_count(self.target);
        self.evaluations += 1;
        if self.best.as_ref().is_none_or(|(b, _)| err < *b) {
            self.best = Some((err, scales.to_vec()));
        }
        Ok(err)
    }

    fn done(&self) -> bool {
        matches!(self.best, Some((0, _)))
    }

    fn cartesian(&mut self, grid: &[f64]) -> Result<()> {
        let k = self.edits.len();
        let mut idx = vec![0usize; k];
        loop {
            let scales: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            self.eval(&scales)?;
            if self.done() {
                return Ok(());
            }
            // Odometer increment, last edit fastest.
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < grid.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn coordinate(&mut self, grid: &[f64]) -> Result<()> {
        let k = self.edits.len();
        // Shared scale first, then refine one edit at a time.
        let mut cur = vec![grid[0]; k];
        let mut cur_err = usize::MAX;
        for &g in grid {
            let s = vec![g; k];
            let e = self.eval(&s)?;
            if e < cur_err {
                cur_err = e;
                cur = s;
            }
            if self.done() {
                return Ok(());
            }
        }
        for _ in 0..COORDINATE_PASSES {
            for i in 0..k {
                for &g in grid {
                    if g == cur[i] {
                        continue;
                    }
                    let mut s = cur.clone();
                    s[i] = g;
                    let e = self.eval(&s)?;
                    if e < cur_err {
                        cur_err = e;
                        cur = s;
                    }
                    if self.done() {
                        return Ok(());
                    }
                }
            }
        }
        Ok(())
    }
}

fn evaluate_case<M: ModelAdapter + ?Sized>(
    model: &M,
    iv: &Intervener,
    case: &InterventionCase,
    grid: &[f64],
) -> Result<CaseResult> {
    let target = case.target_moves();
    let original = case.original_moves();
    let mut search = Search {
        model,
        iv,
        h: model.encode(&case.transcript)?,
        edits: case.target.edits.clone(),
        target,
        best: None,
        evaluations: 0,
    };
    if search.edits.len() <= MAX_CARTESIAN_EDITS {
        search.cartesian(grid)?;
    } else {
        search.coordinate(grid)?;
    }
    let (best_error, best_scales) = search.best.take().expect("grid is non-empty");
    Ok(CaseResult {
        transcript: case.transcript.to_string(),
        edits: case.target.edits.clone(),
        original_moves: original,
        target_moves: target,
        best_error,
        best_scales,
        null_error: original.error_count(target),
        evaluations: search.evaluations,
    })
}

/// Best error count per case over the scale search, with the
/// no-intervention baseline alongside.
pub fn sweep_evaluate<M: ModelAdapter + ?Sized>(
    model: &M,
    iv: &Intervener,
    cases: &[InterventionCase],
    grid: &[f64],
) -> Result<SweepReport> {
    if grid.is_empty() || grid.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidArgument("grid must be non-empty and positive".into()));
    }
    if model.d_model() != iv.d_model() {
        return Err(Error::dims(model.d_model(), iv.d_model(), "probe width vs model width"));
    }
    let per_case: Vec<CaseResult> = cases
        .par_iter()
        .map(|c| evaluate_case(model, iv, c, grid))
        .collect::<Result<_>>()?;
    let n = per_case.len();
    let mean = |f: fn(&CaseResult) -> usize| {
        if n == 0 {
            0.0
        } else {
            per_case.iter().map(f).sum::<usize>() as f64 / n as f64
        }
    };
    Ok(SweepReport {
        n_cases: n,
        k_edits: cases.iter().map(|c| c.target.edits.len()).max().unwrap_or(0),
        grid: grid.to_vec(),
        mean_best_error: mean(|c| c.best_error),
        null_baseline_error: mean(|c| c.null_error),
        per_case,
    })
}
