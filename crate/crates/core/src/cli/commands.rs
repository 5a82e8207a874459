// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use super::args::*;
use crate::analysis::report::{write_csv_cells, write_json};
use crate::analysis::{
    effective_linear_probe, gapsim, gapsim_r2, gram_report, isomap, knn_neighbor_classification,
    mean_centered_cosine, mean_similarity, pca, svd_sweep,
};
use crate::encodings::{
    build_dataset, default_std, read_dataset, write_dataset, Dataset, RandomCodingBook, Source, Split,
    SplitSizes,
};
use crate::error::{Error, Result};
use crate::interventions::{build_cases, default_grid, sweep_evaluate, Intervener, SyntheticModel};
use crate::persist::atomic_write;
use crate::probes::{
    accuracy, load_probe, mean_loss, save_probe, train, AnyProbe, BilinearTprProbe, LinearProbe, Probe,
    TrainConfig, TrilinearTprProbe,
};

pub(super) fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenData(a) => gen_data(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Eval(a) => eval(&a),
        Command::Analyze(a) => match a {
            AnalyzeCommand::Effective(a) => effective(&a),
            AnalyzeCommand::Cosine(a) => cosine(&a),
            AnalyzeCommand::SvdSweep(a) => svd(&a),
            AnalyzeCommand::Knn(a) => knn(&a),
            AnalyzeCommand::Gapsim(a) => gapsim_cmd(&a),
            AnalyzeCommand::Pca(a) => pca_cmd(&a),
            AnalyzeCommand::Isomap(a) => isomap_cmd(&a),
            AnalyzeCommand::Gram(a) => gram(&a),
        },
        Command::Intervene(a) => intervene(&a),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Prints the report and, when a path is given, writes it there too.
fn emit(report: &Value, path: Option<&Path>) -> Result<()> {
    if let Some(p) = path {
        write_json(p, report)?;
    }
    let text = serde_json::to_string_pretty(report).expect("serializable");
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        // A closed reader (e.g. `| head`) is not a failure of the command.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn split_file(dir: &Path, s: Split) -> PathBuf {
    dir.join(format!("{}.tprds", s.name()))
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    if a.d_model == 0 || a.train == 0 || a.val == 0 || a.test == 0 {
        return Err(Error::InvalidArgument("sizes and d_model must be positive".into()));
    }
    let book_seed = a.book_seed.unwrap_or(a.seed);
    let book_std = a.book_std.unwrap_or_else(|| default_std(a.d_model));
    if !(book_std.is_finite() && book_std > 0.0) {
        return Err(Error::InvalidArgument("book std must be positive".into()));
    }
    let book = RandomCodingBook::with_std(book_seed, a.d_model, book_std);
    let source = match a.source {
        SourceArg::RandomCoding => Source::RandomCoding,
        SourceArg::Ood => Source::Ood,
    };
    let sizes = SplitSizes {
        train: a.train,
        val: a.val,
        test: a.test,
    };
    let mut splits = build_dataset(source, &book, sizes, a.seed)?;
    let mut files = serde_json::Map::new();
    for s in Split::ALL {
        let d: &mut Dataset = match s {
            Split::Train => &mut splits.train,
            Split::Val => &mut splits.val,
            Split::Test => &mut splits.test,
        };
        d.layer = a.layer;
        let path = split_file(&a.out, s);
        write_dataset(&path, d)?;
        files.insert(s.name().into(), json!({"path": path, "count": d.len()}));
    }
    let mut config = to_value(a);
    config["book_seed"] = json!(book_seed);
    config["book_std"] = json!(book_std);
    let report = json!({"command": "gen-data", "config": config, "files": files});
    emit(&report, Some(&a.out.join("manifest.json")))
}

fn load_split(dir: &Path, s: Split, d_model: Option<usize>) -> Result<Dataset> {
    let d = read_dataset(&split_file(dir, s))?;
    if let Some(w) = d_model {
        if d.d_model() != w {
            return Err(Error::dims(w, d.d_model(), "dataset width"));
        }
    }
    Ok(d)
}

fn new_probe(shape: &ProbeShape, d_model: usize, seed: u64) -> Result<AnyProbe> {
    let positive = |v: usize, n: &str| {
        if v == 0 {
            Err(Error::InvalidArgument(format!("--{n} must be positive")))
        } else {
            Ok(v)
        }
    };
    Ok(match shape.probe {
        ProbeArg::Linear => LinearProbe::random(d_model, seed).into(),
        ProbeArg::Bilinear => {
            BilinearTprProbe::random(positive(shape.dr, "dr")?, positive(shape.df, "df")?, d_model, seed).into()
        }
        ProbeArg::Trilinear => TrilinearTprProbe::random(
            positive(shape.du, "du")?,
            positive(shape.dv, "dv")?,
            positive(shape.df, "df")?,
            d_model,
            seed,
        )
        .into(),
    })
}

fn train_cmd(a: &TrainArgs) -> Result<()> {
    let tr = load_split(&a.data, Split::Train, a.d_model)?;
    let d_model = tr.d_model();
    let va = load_split(&a.data, Split::Val, Some(d_model))?;
    let te = load_split(&a.data, Split::Test, Some(d_model))?;
    let cfg = TrainConfig {
        lr: a.lr,
        weight_decay: a.weight_decay,
        batch_size: a.batch_size,
        epochs: a.epochs,
        patience: a.patience,
        validate_every: a.validate_every,
        seed: a.seed,
    };
    cfg.validate()?;
    let mut probe = new_probe(&a.shape, d_model, a.seed)?;
    let history = train(&mut probe, &tr, &va, &cfg)?;
    let test_accuracy = accuracy(&probe, &te)?;
    let test_loss = mean_loss(&probe, &te)?;
    save_probe(&a.out, &probe)?;
    let metrics_path = a.metrics.clone().unwrap_or_else(|| a.out.with_extension("json"));
    let report = json!({
        "command": "train",
        "config": a,
        "d_model": d_model,
        "param_count": probe.param_count(),
        "test_accuracy": test_accuracy,
        "test_loss": test_loss,
        "history": history,
    });
    emit(&report, Some(&metrics_path))
}

fn eval(a: &EvalArgs) -> Result<()> {
    let probe = load_probe(&a.probe)?;
    let d = read_dataset(&a.data)?;
    if d.d_model() != probe.d_model() {
        return Err(Error::dims(probe.d_model(), d.d_model(), "dataset width"));
    }
    let report = json!({
        "command": "eval",
        "config": a,
        "probe_kind": probe.kind(),
        "param_count": probe.param_count(),
        "count": d.len(),
        "accuracy": accuracy(&probe, &d)?,
        "mean_loss": mean_loss(&probe, &d)?,
    });
    emit(&report, a.out.as_deref())
}

fn effective(a: &EffectiveArgs) -> Result<()> {
    let p = load_probe(&a.probe)?;
    let mut lin = effective_linear_probe(&p);
    lin.quantize();
    save_probe(&a.out, &lin.into())?;
    emit(&json!({"command": "analyze effective", "config": a, "source_kind": p.kind()}), None)
}

fn cosine(a: &CosineArgs) -> Result<()> {
    let lin = effective_linear_probe(&load_probe(&a.linear)?);
    let tpr = effective_linear_probe(&load_probe(&a.tpr)?);
    let sim = mean_centered_cosine(&lin, &tpr)?;
    atomic_write(&a.out, |w| write_csv_cells(w, 64, 3, |r, c| Some(sim[r][c])))?;
    let report = json!({"metric": "mean_centered_cosine", "value": mean_similarity(&sim), "config": a});
    emit(&report, a.summary.as_deref())
}

fn svd(a: &SvdSweepArgs) -> Result<()> {
    let lin = effective_linear_probe(&load_probe(&a.probe)?);
    let test = read_dataset(&a.data)?;
    if test.d_model() != lin.d_model() {
        return Err(Error::dims(lin.d_model(), test.d_model(), "dataset width"));
    }
    let sweep = svd_sweep(&lin, &a.k, &test)?;
    atomic_write(&a.out, |w| {
        writeln!(w, "k,params,accuracy,frobenius_error")?;
        for p in &sweep.points {
            writeln!(w, "{},{},{},{}", p.k, p.params, p.accuracy, p.frobenius_error)?;
        }
        Ok(())
    })?;
    let report = json!({
        "metric": "svd_sweep",
        "value": sweep,
        "accuracy_non_decreasing": sweep.accuracy_drops.is_empty(),
        "config": a,
    });
    emit(&report, a.summary.as_deref())
}

fn embedding(p: &AnyProbe, which: MatrixArg) -> Result<DMatrix<f64>> {
    let unsupported = || {
        Err(Error::InvalidArgument(format!(
            "matrix {which:?} is not available for a {} probe",
            p.kind()
        )))
    };
    match (p, which) {
        (AnyProbe::Bilinear(b), MatrixArg::Roles) => Ok(b.roles()),
        (AnyProbe::Bilinear(b), MatrixArg::Fillers) => Ok(b.fillers()),
        (AnyProbe::Trilinear(t), MatrixArg::Rows) => Ok(t.rows()),
        (AnyProbe::Trilinear(t), MatrixArg::Cols) => Ok(t.cols()),
        (AnyProbe::Trilinear(t), MatrixArg::Fillers) => Ok(t.fillers()),
        _ => unsupported(),
    }
}

fn bindings(p: &AnyProbe, d: &Dataset, limit: usize) -> Result<DMatrix<f64>> {
    if d.d_model() != p.d_model() {
        return Err(Error::dims(p.d_model(), d.d_model(), "dataset width"));
    }
    let n = limit.min(d.len());
    let mut rows = Vec::with_capacity(n);
    for s in d.iter().take(n) {
        let h: Vec<f64> = s.h.iter().map(|&x| x as f64).collect();
        rows.push(match p {
            AnyProbe::Bilinear(b) => b.binding(&h)?,
            AnyProbe::Trilinear(t) => t.binding(&h)?,
            AnyProbe::Linear(_) => {
                return Err(Error::InvalidArgument("linear probes have no binding matrices".into()))
            }
        });
    }
    let k = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(n, k, |i, j| rows[i][j]))
}

fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    atomic_write(path, |w| write_csv_cells(w, m.nrows(), m.ncols(), |r, c| Some(m[(r, c)])))
}

fn knn(a: &ProbeMatrixArgs) -> Result<()> {
    let r = embedding(&load_probe(&a.probe)?, a.matrix)?;
    let rep = knn_neighbor_classification(&r)?;
    let report = json!({"metric": "knn_neighbor_classification", "value": rep, "config": a});
    write_json(&a.out, &report)?;
    emit(&report, a.summary.as_deref())
}

fn gapsim_cmd(a: &ProbeMatrixArgs) -> Result<()> {
    let r = embedding(&load_probe(&a.probe)?, a.matrix)?;
    let g = gapsim(&r)?;
    atomic_write(&a.out, |w| write_csv_cells(w, 8, 8, |i, j| g.mean[i][j]))?;
    let r2 = match gapsim_r2(&r) {
        Ok(v) => Some(v),
        Err(Error::DegenerateVariance(_)) => None,
        Err(e) => return Err(e),
    };
    let report = json!({"metric": "gapsim_r2", "value": r2, "group_sizes": g.counts, "config": a});
    emit(&report, a.summary.as_deref())
}

fn pca_cmd(a: &PcaArgs) -> Result<()> {
    let p = load_probe(&a.probe)?;
    let x = if a.matrix == MatrixArg::Bindings {
        let path = a
            .data
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("--matrix bindings needs --data".into()))?;
        bindings(&p, &read_dataset(path)?, a.limit)?
    } else {
        embedding(&p, a.matrix)?
    };
    let res = pca(&x, a.dims)?;
    write_matrix(&a.out, &res.coords)?;
    let report = json!({"metric": "pca_explained_variance", "value": res.explained, "config": a});
    emit(&report, a.summary.as_deref())
}

fn isomap_cmd(a: &IsomapArgs) -> Result<()> {
    let x = embedding(&load_probe(&a.probe)?, a.matrix)?;
    let res = isomap(&x, a.neighbors, a.dims)?;
    write_matrix(&a.out, &res.coords)?;
    let report = json!({
        "metric": "isomap",
        "value": {"eigenvalues": res.eigenvalues, "clipped": res.clipped},
        "config": a,
    });
    emit(&report, a.summary.as_deref())
}

fn gram(a: &ProbeMatrixArgs) -> Result<()> {
    let x = embedding(&load_probe(&a.probe)?, a.matrix)?;
    let rep = gram_report(&x)?;
    write_matrix(&a.out, &rep.gram)?;
    let report = json!({"metric": "singular_values", "value": rep.singular_values, "config": a});
    emit(&report, a.summary.as_deref())
}

fn intervene(a: &InterveneArgs) -> Result<()> {
    let probe = load_probe(&a.probe)?;
    let d = probe.d_model();
    let std = a.book_std.unwrap_or_else(|| default_std(d));
    let model = SyntheticModel::new(RandomCodingBook::with_std(a.book_seed, d, std))?;
    let grid = a.grid.clone().unwrap_or_else(default_grid);
    let cases = build_cases(a.cases, a.edits, a.seed)?;
    let report = sweep_evaluate(&model, &Intervener::new(&probe), &cases, &grid)?;
    let mut config = to_value(a);
    config["book_std"] = json!(std);
    config["grid"] = json!(grid);
    config["search"] = json!(if a.edits <= crate::interventions::MAX_CARTESIAN_EDITS {
        "cartesian"
    } else {
        "coordinate"
    });
    let mut out = to_value(&report);
    out["config"] = config;
    out["probe_kind"] = json!(probe.kind());
    out["command"] = json!("intervene");
    write_json(&a.out, &out)?;
    let summary = json!({
        "command": "intervene",
        "n_cases": report.n_cases,
        "k_edits": report.k_edits,
        "mean_best_error": report.mean_best_error,
        "null_baseline_error": report.null_baseline_error,
        "config": out["config"],
    });
    emit(&summary, None)
}
