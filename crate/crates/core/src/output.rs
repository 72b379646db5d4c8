//! Snapshot CSV files, the centerline series, the run manifest and the
//! plotting script.
//!
//! Numbers are written with Rust's shortest round-trip formatting (at most
//! 17 significant digits), so reading a file back reproduces every value
//! bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::StepStats;
use crate::params::NondimParams;
use crate::study::{CenterlineSample, ConcentrationMonitor, RunOutput, RunStatus, Snapshot, StudyConfig};

pub const SNAPSHOT_HEADER: &str = "r_hat,v_hat,w_hat,c_hat,mu_hat,h_hat";
pub const CENTERLINE_HEADER: &str = "t_hat,cycle,v_hat,w_hat,c_hat,mu_hat";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CENTERLINE_FILE: &str = "centerline.csv";
pub const PLOT_FILE: &str = "plot.py";

/// Shortest text that parses back to the same double. Positional notation
/// for ordinary magnitudes, exponent notation for tiny or huge ones.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

pub fn snapshot_csv(snapshot: &Snapshot) -> String {
    let mut s = String::with_capacity(64 * (snapshot.n_nodes() + 1));
    s.push_str(SNAPSHOT_HEADER);
    s.push('\n');
    for j in 0..snapshot.n_nodes() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            Num(snapshot.r[j]),
            Num(snapshot.v[j]),
            Num(snapshot.w[j]),
            Num(snapshot.c[j]),
            Num(snapshot.mu[j]),
            Num(snapshot.h[j])
        );
    }
    s
}

pub fn write_snapshot_csv(snapshot: &Snapshot, path: &Path) -> Result<()> {
    fs::write(path, snapshot_csv(snapshot))?;
    Ok(())
}

/// Columns of a snapshot file, in header order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotColumns {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub c: Vec<f64>,
    pub mu: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn parse_snapshot_csv(text: &str) -> Result<SnapshotColumns> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SNAPSHOT_HEADER => {}
        _ => {
            return Err(Error::ConfigParse {
                line: 1,
                message: format!("expected header `{SNAPSHOT_HEADER}`"),
            })
        }
    }
    let mut cols: [Vec<f64>; 6] = Default::default();
    for (idx, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::ConfigParse {
                line: idx + 1,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        for (col, field) in cols.iter_mut().zip(fields) {
            col.push(field.parse().map_err(|_| Error::ConfigParse {
                line: idx + 1,
                message: format!("not a number: `{field}`"),
            })?);
        }
    }
    let [r, v, w, c, mu, h] = cols;
    Ok(SnapshotColumns { r, v, w, c, mu, h })
}

pub fn centerline_csv(samples: &[CenterlineSample]) -> String {
    let mut s = String::with_capacity(96 * (samples.len() + 1));
    s.push_str(CENTERLINE_HEADER);
    s.push('\n');
    for x in samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            Num(x.t_hat),
            Num(x.t_hat / std::f64::consts::TAU),
            Num(x.v),
            Num(x.w),
            Num(x.c),
            Num(x.mu)
        );
    }
    s
}

/// File name of the `k`-th snapshot.
pub fn snapshot_file_name(k: usize, cycles: f64) -> String {
    format!("snapshot_{k:02}_cycle_{cycles}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub cycle_count: f64,
    pub t_hat: f64,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub detail: String,
}

/// Everything needed to locate and interpret the files of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub solver_version: String,
    pub config: StudyConfig,
    pub params: NondimParams,
    pub snapshots: Vec<SnapshotEntry>,
    pub centerline_file: String,
    pub plot_script: String,
    pub stats: StepStats,
    pub monitor: ConcentrationMonitor,
    pub status: RunStatus,
    pub wall_clock_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance: Option<Vec<CriterionSummary>>,
}

impl RunManifest {
    pub fn new(config: &StudyConfig, output: &RunOutput) -> Self {
        RunManifest {
            solver_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            params: output.params,
            snapshots: output
                .snapshots
                .iter()
                .enumerate()
                .map(|(k, s)| SnapshotEntry {
                    cycle_count: s.cycle_count,
                    t_hat: s.t_hat,
                    file: snapshot_file_name(k, s.cycle_count),
                })
                .collect(),
            centerline_file: CENTERLINE_FILE.to_string(),
            plot_script: PLOT_FILE.to_string(),
            stats: output.stats,
            monitor: output.monitor,
            status: output.status.clone(),
            wall_clock_s: output.wall_clock_s,
            acceptance: None,
        }
    }
}

/// Plotting script for matplotlib; reads the CSV files next to it.
pub fn plot_script(manifest: &RunManifest) -> String {
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    let _ = writeln!(
        s,
        "# Profiles and mid-gap history for model {}.",
        manifest.config.model.kind.name()
    );
    s.push_str("import csv\nimport os\n\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("HERE = os.path.dirname(os.path.abspath(__file__))\n");
    s.push_str("SNAPSHOTS = [\n");
    for e in &manifest.snapshots {
        let _ = writeln!(s, "    ({}, {:?}),", e.cycle_count, e.file);
    }
    s.push_str("]\n");
    let _ = writeln!(s, "CENTERLINE = {:?}", manifest.centerline_file);
    let _ = writeln!(s, "TITLE = {:?}", plot_title(manifest));
    s.push_str(PLOT_BODY);
    s
}

fn plot_title(m: &RunManifest) -> String {
    let p = &m.params;
    format!(
        "{}: Re={}, Pe={}, p_g={}, p_A={}, p_B={}",
        m.config.model.kind.name(),
        short(p.re),
        short(p.pe),
        short(p.p_g),
        short(p.p_a),
        short(p.p_b)
    )
}

/// Six significant digits, shortest form.
fn short(x: f64) -> String {
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    format!("{rounded}")
}

const PLOT_BODY: &str = r#"

def read(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    return {key: [float(row[i]) for row in body] for i, key in enumerate(header)}


def main():
    fields = [("v_hat", "v"), ("w_hat", "w"), ("c_hat", "c"), ("mu_hat", "mu")]
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for cycle, name in SNAPSHOTS:
        data = read(name)
        for ax, (key, label) in zip(axes.flat, fields):
            ax.plot(data["r_hat"], data[key], label="cycle %g" % cycle)
            ax.set_xlabel("r")
            ax.set_ylabel(label)
    for ax in axes.flat:
        ax.legend()
    fig.suptitle(TITLE)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "profiles.png"), dpi=150)

    series = read(CENTERLINE)
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(series["cycle"], series["mu_hat"])
    axes[0].set_ylabel("mu at r = 0.5")
    axes[1].plot(series["cycle"], series["w_hat"])
    axes[1].set_ylabel("w at r = 0.5")
    axes[1].set_xlabel("cycles")
    fig.suptitle(TITLE)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "centerline.png"), dpi=150)


if __name__ == "__main__":
    main()
"#;

pub fn emit_plot_script(manifest: &RunManifest, path: &Path) -> Result<()> {
    fs::write(path, plot_script(manifest))?;
    Ok(())
}

/// Writes snapshots, centerline series, plot script and manifest into `dir`.
pub fn write_run(dir: &Path, config: &StudyConfig, output: &RunOutput) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let manifest = RunManifest::new(config, output);
    for (entry, snap) in manifest.snapshots.iter().zip(&output.snapshots) {
        write_snapshot_csv(snap, &dir.join(&entry.file))?;
    }
    fs::write(dir.join(CENTERLINE_FILE), centerline_csv(&output.centerline))?;
    emit_plot_script(&manifest, &dir.join(PLOT_FILE))?;
    write_manifest(&manifest, &dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Io(e.into()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Paths of every file a manifest refers to, relative to `dir`.
pub fn manifest_files(dir: &Path, manifest: &RunManifest) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = manifest.snapshots.iter().map(|e| dir.join(&e.file)).collect();
    files.push(dir.join(&manifest.centerline_file));
    files.push(dir.join(&manifest.plot_script));
    files
}
