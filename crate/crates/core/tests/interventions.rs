// SPDX-License-Identifier: MIT OR Apache-2.0

use nalgebra::DVector;
use proptest::prelude::*;
use tprlab::encodings::RandomCodingBook;
use tprlab::interventions::{
    bilinear_delta, build_cases, linear_intervene, trilinear_delta, InterventionPlan, Intervener, ModelAdapter,
    SyntheticModel,
};
use tprlab::othello::{random_game, CellColor, Edit, Square};
use tprlab::probes::{AnyProbe, BilinearTprProbe, LinearProbe, TrilinearTprProbe};

fn colors() -> impl Strategy<Value = (CellColor, CellColor)> {
    (0usize..3, 1usize..3).prop_map(|(a, step)| {
        (CellColor::from_idx(a).unwrap(), CellColor::from_idx((a + step) % 3).unwrap())
    })
}

fn activation(d: usize, seed: u64) -> Vec<f64> {
    (0..d).map(|k| ((k as u64 * 2654435761 + seed * 97) % 1000) as f64 / 500.0 - 1.0).collect()
}

fn binding_of(p: &AnyProbe, h: &[f64]) -> Vec<f64> {
    match p {
        AnyProbe::Bilinear(b) => b.binding(h).unwrap(),
        AnyProbe::Trilinear(t) => t.binding(h).unwrap(),
        AnyProbe::Linear(_) => unreachable!(),
    }
}

fn delta_of(p: &AnyProbe, e: &Edit) -> Vec<f64> {
    match p {
        AnyProbe::Bilinear(b) => bilinear_delta(b, e.square, e.from, e.to),
        AnyProbe::Trilinear(t) => trilinear_delta(t, e.square, e.from, e.to),
        AnyProbe::Linear(_) => unreachable!(),
    }
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn binding_roundtrip_with_full_row_rank(
        seed in 0u64..500,
        sq in 0usize..64,
        (from, to) in colors(),
        tri in any::<bool>(),
    ) {
        let d = 64;
        let p: AnyProbe = if tri {
            TrilinearTprProbe::random(3, 3, 2, d, seed).into()
        } else {
            BilinearTprProbe::random(12, 2, d, seed).into()
        };
        let e = Edit { square: Square::from_offset(sq).unwrap(), from, to };
        let h = activation(d, seed);
        let z = Intervener::new(&p).raw_direction(&e);
        let moved: Vec<f64> = h.iter().zip(&z).map(|(a, b)| a + b).collect();
        let want: Vec<f64> = binding_of(&p, &h).iter().zip(delta_of(&p, &e)).map(|(b, db)| b + db).collect();
        prop_assert!(max_rel(&binding_of(&p, &moved), &want) < 1e-5);
    }

    #[test]
    fn single_edit_plan_matches_single_step(
        seed in 0u64..500,
        sq in 0usize..64,
        (from, to) in colors(),
        alpha in 0.1f64..3.0,
        which in 0usize..3,
    ) {
        let d = 40;
        let p: AnyProbe = match which {
            0 => LinearProbe::random(d, seed).into(),
            1 => BilinearTprProbe::random(6, 2, d, seed).into(),
            _ => TrilinearTprProbe::random(2, 3, 2, d, seed).into(),
        };
        let iv = Intervener::new(&p);
        let e = Edit { square: Square::from_offset(sq).unwrap(), from, to };
        let h = activation(d, seed + 1);
        let a = iv.single(&h, &e, alpha).unwrap();
        let b = iv.compose(&h, &InterventionPlan::new(vec![e], vec![alpha]).unwrap()).unwrap();
        prop_assert!(max_rel(&a, &b) < 1e-12);
    }

    #[test]
    fn linear_edits_add(seed in 0u64..500, a in 0.1f64..2.0, b in 0.1f64..2.0) {
        let d = 24;
        let p = LinearProbe::random(d, seed);
        let (s1, s2) = (Square::from_offset(10).unwrap(), Square::from_offset(50).unwrap());
        let e1 = Edit { square: s1, from: CellColor::Empty, to: CellColor::Current };
        let e2 = Edit { square: s2, from: CellColor::Opponent, to: CellColor::Empty };
        let h = activation(d, seed);
        let both = Intervener::new(&p.clone().into())
            .compose(&h, &InterventionPlan::new(vec![e1, e2], vec![a, b]).unwrap())
            .unwrap();
        let step = linear_intervene(&h, &p, s1, e1.to, a).unwrap();
        let seq = linear_intervene(&step, &p, s2, e2.to, b).unwrap();
        prop_assert!(max_rel(&both, &seq) < 1e-12);
    }
}

#[test]
fn synthetic_model_decodes_what_it_encodes() {
    let m = SyntheticModel::new(RandomCodingBook::new(3, 256)).unwrap();
    for g in 0..1000u64 {
        let t = random_game(g, (g % 60) as usize);
        let labels = t.final_board().egocentric_labels();
        let h = m.encode(&t).unwrap();
        assert_eq!(m.decode(&h).unwrap(), labels, "game {g}");
    }
}

#[test]
fn synthetic_model_reports_legal_moves() {
    let m = SyntheticModel::new(RandomCodingBook::new(1, 192)).unwrap();
    for c in build_cases(30, 1, 8).unwrap() {
        let logits = m.next_move_logits(&m.encode(&c.transcript).unwrap()).unwrap();
        let legal = c.transcript.final_board().legal_mask();
        for (i, l) in logits.iter().enumerate() {
            assert_eq!(*l > 0.0, legal & (1 << i) != 0);
        }
    }
}

#[test]
fn direction_is_pseudo_inverse_of_delta() {
    let p = BilinearTprProbe::random(8, 2, 32, 1);
    let e = Edit {
        square: "C5".parse().unwrap(),
        from: CellColor::Current,
        to: CellColor::Opponent,
    };
    let z = Intervener::new(&p.clone().into()).raw_direction(&e);
    let back = p.m_flat() * DVector::from_column_slice(&z);
    let want = bilinear_delta(&p, e.square, e.from, e.to);
    assert!(max_rel(back.as_slice(), &want) < 1e-8);
}

#[test]
fn cases_are_reproducible() {
    let a = build_cases(20, 3, 4).unwrap();
    assert_eq!(a, build_cases(20, 3, 4).unwrap());
    for c in &a {
        assert_eq!(c.target.edits.len(), 3);
        assert!(!c.original_moves().is_empty());
        assert!(!c.target_moves().is_empty());
        assert_ne!(c.original_moves(), c.target_moves());
        assert!((5..=58).contains(&c.transcript.len()));
    }
}
