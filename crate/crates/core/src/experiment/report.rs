//! Plot-ready CSV and JSON files from a result bundle.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::pipeline::{ResultBundle, Stage};
use super::ExperimentError;

#[derive(Serialize)]
struct PopulationRow<'a> {
    step: usize,
    stage: &'static str,
    basis_label: &'a str,
    value: f64,
    err_lo: f64,
    err_hi: f64,
}

#[derive(Serialize)]
struct FidelityRow {
    step: usize,
    stage: &'static str,
    fidelity: f64,
    unnormalized: f64,
    err_lo: f64,
    err_hi: f64,
}

#[derive(Serialize)]
struct SpinChargeRow {
    step: usize,
    stage: &'static str,
    site: usize,
    spin: f64,
    charge: f64,
}

fn csv_text<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

fn population_csv(b: &ResultBundle, keep: impl Fn(Stage) -> bool) -> String {
    csv_text(b.populations.iter().filter(|r| keep(r.stage)).flat_map(|r| {
        b.labels.iter().enumerate().map(move |(k, label)| PopulationRow {
            step: r.step,
            stage: r.stage.as_str(),
            basis_label: label,
            value: r.values[k],
            err_lo: r.err_lo[k],
            err_hi: r.err_hi[k],
        })
    }))
}

fn json<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("bundle serializes") + "\n"
}

/// File name and contents of every report file, in write order.
pub fn render(b: &ResultBundle) -> Result<Vec<(&'static str, String)>, ExperimentError> {
    if b.is_empty() {
        return Err(ExperimentError::EmptyBundle);
    }
    let mut files = vec![
        ("populations_raw.csv", population_csv(b, |s| !s.is_mitigated())),
        ("populations_mitigated.csv", population_csv(b, Stage::is_mitigated)),
        (
            "fidelity.csv",
            csv_text(b.fidelities.iter().map(|r| FidelityRow {
                step: r.step,
                stage: r.stage.as_str(),
                fidelity: r.fidelity,
                unnormalized: r.unnormalized,
                err_lo: r.err_lo,
                err_hi: r.err_hi,
            })),
        ),
        ("fidelity_fit.json", json(&serde_json::json!({ "gates_per_step": b.gates_per_step, "fits": b.fits }))),
        ("costs.csv", csv_text(&b.steps)),
    ];
    if !b.spin_charge.is_empty() {
        files.push((
            "spin_charge.csv",
            csv_text(b.spin_charge.iter().map(|r| SpinChargeRow {
                step: r.step,
                stage: r.stage.as_str(),
                site: r.site,
                spin: r.spin,
                charge: r.charge,
            })),
        ));
    }
    files.push(("characterization.json", json(&b.characterizations)));
    files.push(("decompositions.json", json(&b.decompositions)));
    files.push(("sector.json", json(&b.sector)));
    Ok(files)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.display().to_string(), source }
}

/// Write all report files under `dir`. Contents are rendered before anything
/// touches the disk, and files already written are removed if a later write
/// fails.
pub fn write_report(b: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let files = render(b)?;
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        if let Err(e) = std::fs::write(&path, text) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(io_err(&path)(e));
        }
        written.push(path);
    }
    Ok(written)
}
