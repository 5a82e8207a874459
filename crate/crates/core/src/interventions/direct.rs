// SPDX-License-Identifier: MIT OR Apache-2.0

//! Moving an activation so that a probe reads a different board.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, pinv};
use crate::othello::{CellColor, Edit, Square};
use crate::probes::{AnyProbe, BilinearTprProbe, LinearProbe, Probe, TrilinearTprProbe};

const MIN_NORM: f64 = 1e-12;

/// Edits to apply together, each with its own positive scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionPlan {
    pub edits: Vec<Edit>,
    pub scales: Vec<f64>,
}

impl InterventionPlan {
    pub fn new(edits: Vec<Edit>, scales: Vec<f64>) -> Result<Self> {
        let p = InterventionPlan { edits, scales };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.edits.len() != self.scales.len() {
            return Err(Error::dims(self.edits.len(), self.scales.len(), "plan scales"));
        }
        for (i, e) in self.edits.iter().enumerate() {
            if e.from == e.to {
                return Err(Error::InvalidArgument(format!("edit on {} does not change color", e.square)));
            }
            if self.edits[..i].iter().any(|o| o.square == e.square) {
                return Err(Error::InvalidArgument(format!("square {} edited twice", e.square)));
            }
        }
        if self.scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidArgument("scales must be positive".into()));
        }
        Ok(())
    }
}

fn check_h(h: &[f64], d: usize) -> Result<()> {
    if h.len() != d {
        return Err(Error::dims(d, h.len(), "activation length"));
    }
    Ok(())
}

fn add_scaled(h: &[f64], dir: &[f64], by: f64) -> Vec<f64> {
    h.iter().zip(dir).map(|(x, d)| x + by * d).collect()
}

/// `h + alpha * w_{s,c} / |w_{s,c}|`.
pub fn linear_intervene(h: &[f64], p: &LinearProbe, s: Square, c: CellColor, alpha: f64) -> Result<Vec<f64>> {
    check_h(h, p.d_model())?;
    let w = p.row(s.offset(), c);
    let n = norm(w);
    if n < MIN_NORM {
        return Err(Error::ZeroDirection);
    }
    Ok(add_scaled(h, w, alpha / n))
}

/// Binding-space change that moves square `s` from color `y` to `y_hat`
/// under a bilinear probe: `r_s (f_yhat - f_y)^T`, flattened.
pub fn bilinear_delta(p: &BilinearTprProbe, s: Square, y: CellColor, y_hat: CellColor) -> Vec<f64> {
    let r = p.role(s.offset());
    let df: Vec<f64> = p.filler(y_hat.idx()).iter().zip(p.filler(y.idx())).map(|(a, b)| a - b).collect();
    r.iter().flat_map(|ra| df.iter().map(move |d| ra * d)).collect()
}

/// `u_i (x) v_j (x) (f_yhat - f_y)`, flattened.
pub fn trilinear_delta(p: &TrilinearTprProbe, s: Square, y: CellColor, y_hat: CellColor) -> Vec<f64> {
    let u = p.row_embedding(s.row());
    let v = p.col_embedding(s.col());
    let df: Vec<f64> = p.filler(y_hat.idx()).iter().zip(p.filler(y.idx())).map(|(a, b)| a - b).collect();
    let mut out = Vec::with_capacity(u.len() * v.len() * df.len());
    for a in u {
        for b in v {
            out.extend(df.iter().map(|d| a * b * d));
        }
    }
    out
}

/// A probe prepared for repeated interventions (the pseudo-inverse of the
/// binding map is computed once).
#[derive(Debug, Clone)]
pub enum Intervener {
    Linear(LinearProbe),
    Bilinear { probe: BilinearTprProbe, pinv: DMatrix<f64> },
    Trilinear { probe: TrilinearTprProbe, pinv: DMatrix<f64> },
}

impl Intervener {
    pub fn new(p: &AnyProbe) -> Self {
        match p {
            AnyProbe::Linear(l) => Intervener::Linear(l.clone()),
            AnyProbe::Bilinear(b) => Intervener::Bilinear {
                pinv: pinv(&b.m_flat()),
                probe: b.clone(),
            },
            AnyProbe::Trilinear(t) => Intervener::Trilinear {
                pinv: pinv(&t.m_flat()),
                probe: t.clone(),
            },
        }
    }

    pub fn d_model(&self) -> usize {
        match self {
            Intervener::Linear(p) => p.d_model(),
            Intervener::Bilinear { probe, .. } => probe.d_model(),
            Intervener::Trilinear { probe, .. } => probe.d_model(),
        }
    }

    fn delta(&self, e: &Edit) -> Option<Vec<f64>> {
        match self {
            Intervener::Linear(_) => None,
            Intervener::Bilinear { probe, .. } => Some(bilinear_delta(probe, e.square, e.from, e.to)),
            Intervener::Trilinear { probe, .. } => Some(trilinear_delta(probe, e.square, e.from, e.to)),
        }
    }

    fn map(&self, delta: &[f64]) -> Vec<f64> {
        let pinv = match self {
            Intervener::Bilinear { pinv, .. } | Intervener::Trilinear { pinv, .. } => pinv,
            Intervener::Linear(_) => unreachable!("linear probes have no binding space"),
        };
        (pinv * DVector::from_column_slice(delta)).as_slice().to_vec()
    }

    /// Unnormalized activation-space direction for one edit: the probe row
    /// for the linear family, `M_flat^+ vec(delta)` otherwise.
    pub fn raw_direction(&self, e: &Edit) -> Vec<f64> {
        match self {
            Intervener::Linear(p) => p.row(e.square.offset(), e.to).to_vec(),
            _ => self.map(&self.delta(e).expect("tpr family")),
        }
    }

    /// `h + alpha * z / |z|` for a single edit.
    pub fn single(&self, h: &[f64], e: &Edit, alpha: f64) -> Result<Vec<f64>> {
        check_h(h, self.d_model())?;
        let z = self.raw_direction(e);
        let n = norm(&z);
        if n < MIN_NORM {
            return Err(Error::ZeroDirection);
        }
        Ok(add_scaled(h, &z, alpha / n))
    }

    /// Applies every edit of `plan` at once.
    ///
    /// Linear probes add one unit probe row per edit. TPR probes sum the
    /// binding-space changes, each weighted by its scale over the norm of
    /// its own mapped direction, and map the sum through the pseudo-inverse
    /// once; a one-edit plan therefore equals [`Intervener::single`].
    pub fn compose(&self, h: &[f64], plan: &InterventionPlan) -> Result<Vec<f64>> {
        plan.validate()?;
        check_h(h, self.d_model())?;
        match self {
            Intervener::Linear(p) => {
                let mut out = h.to_vec();
                for (e, &a) in plan.edits.iter().zip(&plan.scales) {
                    let w = p.row(e.square.offset(), e.to);
                    let n = norm(w);
                    if n < MIN_NORM {
                        return Err(Error::ZeroDirection);
                    }
                    for (o, x) in out.iter_mut().zip(w) {
                        *o += a / n * x;
                    }
                }
                Ok(out)
            }
            _ => {
                let mut total: Option<Vec<f64>> = None;
                for (e, &b) in plan.edits.iter().zip(&plan.scales) {
                    let d = self.delta(e).expect("tpr family");
                    let n = norm(&self.map(&d));
                    if n < MIN_NORM {
                        return Err(Error::ZeroDirection);
                    }
                    let acc = total.get_or_insert_with(|| vec![0.0; d.len()]);
                    for (t, x) in acc.iter_mut().zip(&d) {
                        *t += b / n * x;
                    }
                }
                match total {
                    Some(t) => Ok(add_scaled(h, &self.map(&t), 1.0)),
                    None => Ok(h.to_vec()),
                }
            }
        }
    }
}

/// Bilinear intervention on square `s` from `y` to `y_hat` with step `alpha`.
pub fn tpr_intervene(
    h: &[f64],
    p: &BilinearTprProbe,
    s: Square,
    y: CellColor,
    y_hat: CellColor,
    alpha: f64,
) -> Result<Vec<f64>> {
    Intervener::new(&p.clone().into()).single(h, &Edit { square: s, from: y, to: y_hat }, alpha)
}

/// Trilinear intervention on square `(i, j)` from `y` to `y_hat`.
pub fn trilinear_intervene(
    h: &[f64],
    p: &TrilinearTprProbe,
    s: Square,
    y: CellColor,
    y_hat: CellColor,
    alpha: f64,
) -> Result<Vec<f64>> {
    Intervener::new(&p.clone().into()).single(h, &Edit { square: s, from: y, to: y_hat }, alpha)
}

pub fn compose_intervene(h: &[f64], p: &AnyProbe, plan: &InterventionPlan) -> Result<Vec<f64>> {
    Intervener::new(p).compose(h, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(t: &str) -> Square {
        t.parse().unwrap()
    }

    #[test]
    fn linear_displacement_is_alpha() {
        let p = LinearProbe::random(16, 0);
        let h: Vec<f64> = (0..16).map(|k| k as f64 * 0.1).collect();
        assert_eq!(linear_intervene(&h, &p, sq("C3"), CellColor::Current, 0.0).unwrap(), h);
        let g = linear_intervene(&h, &p, sq("C3"), CellColor::Current, 1.75).unwrap();
        let d: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a - b).collect();
        assert!((norm(&d) - 1.75).abs() < 1e-12);
        let back = linear_intervene(&g, &p, sq("C3"), CellColor::Current, -1.75).unwrap();
        assert!(back.iter().zip(&h).all(|(a, b)| (a - b).abs() < 1e-7));
    }

    #[test]
    fn zero_row_rejected() {
        let p = LinearProbe::zeros(4);
        assert!(matches!(
            linear_intervene(&[0.0; 4], &p, sq("A1"), CellColor::Empty, 1.0),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn trilinear_delta_norm() {
        let p = TrilinearTprProbe::random(3, 2, 2, 4, 1);
        let s = sq("F2");
        let d = trilinear_delta(&p, s, CellColor::Current, CellColor::Empty);
        let fd: Vec<f64> = p.filler(0).iter().zip(p.filler(1)).map(|(a, b)| a - b).collect();
        let want = norm(p.row_embedding(s.row())) * norm(p.col_embedding(s.col())) * norm(&fd);
        assert!((norm(&d) - want).abs() < 1e-15);
    }

    #[test]
    fn plan_validation() {
        let e = |t: &str, a, b| Edit { square: sq(t), from: a, to: b };
        use CellColor::*;
        assert!(InterventionPlan::new(vec![e("A1", Empty, Empty)], vec![1.0]).is_err());
        assert!(InterventionPlan::new(vec![e("A1", Empty, Current), e("A1", Current, Empty)], vec![1.0, 1.0]).is_err());
        assert!(InterventionPlan::new(vec![e("A1", Empty, Current)], vec![0.0]).is_err());
        assert!(InterventionPlan::new(vec![e("A1", Empty, Current)], vec![]).is_err());
        assert!(InterventionPlan::new(vec![e("A1", Empty, Current)], vec![0.5]).is_ok());
    }
}
