// SPDX-License-Identifier: MIT OR Apache-2.0

//! The exported functions called directly, as a C caller would.

use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use tprlab::encodings::{build_dataset, write_dataset, RandomCodingBook, Source, Split, SplitSizes};
use tprlab::othello::Transcript;
use tprlab::probes::{save_probe, train, AnyProbe, BilinearTprProbe, Probe, TrainConfig};
use tprlab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn c_path(p: &Path) -> CString {
    c(p.to_str().unwrap())
}

fn last_error() -> String {
    let p = tpr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tpr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn board_lifecycle() {
    unsafe {
        let b = tpr_board_new();
        assert_eq!(tpr_board_legal_mask(b).count_ones(), 4);
        let mut side = TprPlayer::White;
        assert_eq!(tpr_board_to_move(b, &mut side), TprStatus::Ok);
        assert_eq!(side, TprPlayer::Black);

        assert_eq!(tpr_board_apply(b, c("D3").as_ptr()), TprStatus::Ok);
        assert_eq!(tpr_board_to_move(b, &mut side), TprStatus::Ok);
        assert_eq!(side, TprPlayer::White);

        let before = tpr_board_legal_mask(b);
        assert_eq!(tpr_board_apply(b, c("A1").as_ptr()), TprStatus::IllegalMove);
        assert!(last_error().contains("A1"));
        assert_eq!(tpr_board_legal_mask(b), before);
        assert_eq!(tpr_board_apply(b, c("Z9").as_ptr()), TprStatus::Format);

        let mut from_t = ptr::null_mut();
        assert_eq!(tpr_board_from_transcript(c("D3").as_ptr(), &mut from_t), TprStatus::Ok);
        let (mut a, mut z) = ([9u8; 64], [9u8; 64]);
        assert_eq!(tpr_board_labels(b, a.as_mut_ptr()), TprStatus::Ok);
        assert_eq!(tpr_board_labels(from_t, z.as_mut_ptr()), TprStatus::Ok);
        assert_eq!(a, z);
        let want: Vec<u8> = "D3".parse::<Transcript>()
            .unwrap()
            .final_board()
            .egocentric_labels()
            .iter()
            .map(|c| c.idx() as u8)
            .collect();
        assert_eq!(a.to_vec(), want);

        tpr_board_free(b);
        tpr_board_free(from_t);
        tpr_board_free(ptr::null_mut());
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(tpr_probe_load(ptr::null(), &mut out), TprStatus::NullPointer);
        assert!(out.is_null());
        assert!(last_error().contains("null"));
        assert_eq!(tpr_board_apply(ptr::null_mut(), c("D3").as_ptr()), TprStatus::NullPointer);
        assert_eq!(tpr_board_labels(tpr_board_new(), ptr::null_mut()), TprStatus::NullPointer);
        assert_eq!(tpr_dataset_len(ptr::null()), 0);
        assert_eq!(tpr_probe_param_count(ptr::null()), 0);
    }
}

#[test]
fn io_and_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = c_path(&dir.path().join("nope.tprpb"));
    let junk = dir.path().join("junk.tprpb");
    std::fs::write(&junk, b"not a probe").unwrap();
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(tpr_probe_load(missing.as_ptr(), &mut p), TprStatus::Io);
        assert_eq!(tpr_probe_load(c_path(&junk).as_ptr(), &mut p), TprStatus::Format);
        let mut d = ptr::null_mut();
        assert_eq!(tpr_dataset_read(c_path(&junk).as_ptr(), &mut d), TprStatus::Format);
        assert!(p.is_null() && d.is_null());
    }
}

#[test]
fn probe_and_dataset_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = 192;
    let book = RandomCodingBook::new(2, d);
    let splits = build_dataset(Source::RandomCoding, &book, SplitSizes { train: 1500, val: 100, test: 200 }, 2).unwrap();
    let mut probe = BilinearTprProbe::random(16, 2, d, 2);
    train(&mut probe, splits.get(Split::Train), splits.get(Split::Val), &TrainConfig::default()).unwrap();
    let probe: AnyProbe = probe.into();
    let (probe_path, data_path) = (dir.path().join("p.tprpb"), dir.path().join("test.tprds"));
    save_probe(&probe_path, &probe).unwrap();
    let test = splits.get(Split::Test);
    write_dataset(&data_path, test).unwrap();

    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(tpr_probe_load(c_path(&probe_path).as_ptr(), &mut p), TprStatus::Ok);
        let mut kind = TprProbeKind::Linear;
        assert_eq!(tpr_probe_kind(p, &mut kind), TprStatus::Ok);
        assert_eq!(kind, TprProbeKind::Bilinear);
        assert_eq!(tpr_probe_d_model(p), d);
        assert_eq!(tpr_probe_param_count(p), probe.param_count());

        let mut ds = ptr::null_mut();
        assert_eq!(tpr_dataset_read(c_path(&data_path).as_ptr(), &mut ds), TprStatus::Ok);
        assert_eq!(tpr_dataset_len(ds), 200);
        assert_eq!(tpr_dataset_d_model(ds), d);

        let mut acc = 0.0;
        assert_eq!(tpr_probe_accuracy(p, ds, &mut acc), TprStatus::Ok);
        assert_eq!(acc, tprlab::probes::accuracy(&probe, test).unwrap());

        let mut h32 = vec![0f32; d];
        let mut labels = [0u8; 64];
        assert_eq!(tpr_dataset_sample(ds, 7, h32.as_mut_ptr(), d, labels.as_mut_ptr()), TprStatus::Ok);
        let s = test.get(7);
        assert_eq!(h32, s.h);
        assert!(labels.iter().zip(s.labels).all(|(a, b)| *a as usize == b.idx()));
        assert_eq!(tpr_dataset_sample(ds, 200, h32.as_mut_ptr(), d, labels.as_mut_ptr()), TprStatus::InvalidArgument);
        assert_eq!(tpr_dataset_sample(ds, 0, h32.as_mut_ptr(), d - 1, labels.as_mut_ptr()), TprStatus::DimensionMismatch);

        let h: Vec<f64> = h32.iter().map(|&x| x as f64).collect();
        let mut logits = [0f64; TPR_LOGITS_LEN];
        assert_eq!(tpr_probe_forward(p, h.as_ptr(), d, logits.as_mut_ptr()), TprStatus::Ok);
        let want = probe.forward(&h).unwrap();
        assert!(logits.iter().zip(want.iter().flatten()).all(|(a, b)| a == b));
        assert_eq!(tpr_probe_forward(p, h.as_ptr(), d - 1, logits.as_mut_ptr()), TprStatus::DimensionMismatch);

        let mut lin = ptr::null_mut();
        assert_eq!(tpr_probe_effective(p, &mut lin), TprStatus::Ok);
        assert_eq!(tpr_probe_kind(lin, &mut kind), TprStatus::Ok);
        assert_eq!(kind, TprProbeKind::Linear);
        let mut eff = [0f64; TPR_LOGITS_LEN];
        assert_eq!(tpr_probe_forward(lin, h.as_ptr(), d, eff.as_mut_ptr()), TprStatus::Ok);
        for (a, b) in eff.iter().zip(&logits) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }

        // Flip the sample's first empty square to the current player.
        let sq = labels.iter().position(|&l| l == 0).unwrap();
        let token = c(&format!("{}{}", (b'A' + (sq / 8) as u8) as char, sq % 8 + 1));
        let mut moved = vec![0f64; d];
        let mut margins = Vec::new();
        for alpha in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            assert_eq!(tpr_intervene(p, h.as_ptr(), d, token.as_ptr(), 0, 1, alpha, moved.as_mut_ptr()), TprStatus::Ok);
            assert_eq!(tpr_probe_forward(p, moved.as_ptr(), d, logits.as_mut_ptr()), TprStatus::Ok);
            let row = &logits[3 * sq..3 * sq + 3];
            margins.push(row[1] - row[0].max(row[2]));
        }
        assert!(margins.windows(2).all(|w| w[1] > w[0]), "{margins:?}");
        assert!(margins[0] < 0.0 && *margins.last().unwrap() > 0.0, "{margins:?}");
        assert_eq!(tpr_intervene(p, h.as_ptr(), d, token.as_ptr(), 1, 1, 1.0, moved.as_mut_ptr()), TprStatus::InvalidArgument);
        assert_eq!(tpr_intervene(p, h.as_ptr(), d, token.as_ptr(), 0, 3, 1.0, moved.as_mut_ptr()), TprStatus::InvalidArgument);
        assert_eq!(tpr_intervene(p, h.as_ptr(), d, token.as_ptr(), 0, 1, -1.0, moved.as_mut_ptr()), TprStatus::InvalidArgument);

        let copy = dir.path().join("copy.tprpb");
        assert_eq!(tpr_probe_save(p, c_path(&copy).as_ptr()), TprStatus::Ok);
        assert_eq!(std::fs::read(&copy).unwrap(), std::fs::read(&probe_path).unwrap());

        tpr_probe_free(lin);
        tpr_probe_free(p);
        tpr_dataset_free(ds);
    }
}
