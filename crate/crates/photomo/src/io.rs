//! On-disk formats: density matrices and reports as JSON, measurement tables as CSV with a
//! JSON sidecar, and plot-ready scan CSVs.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use photomo_core::measurement::TableMeta;
use photomo_core::{
    Complex64, DensityMatrix, GridSpec, Locking, MeasurementTable, QDistribution, RadialRule, ReconstructionReport,
    Shots, SqueezeSpec, TableData,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityJson {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let re = rho.re_parts();
        let im = rho.im_parts();
        DensityJson {
            dim: d,
            re: re.chunks(d).map(|r| r.to_vec()).collect(),
            im: im.chunks(d).map(|r| r.to_vec()).collect(),
        }
    }

    pub fn to_density(&self) -> CliResult<DensityMatrix> {
        let d = self.dim;
        let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
        if !square(&self.re) || !square(&self.im) {
            return Err(CliError::Format(format!("density matrix rows do not match dim = {d}")));
        }
        let re: Vec<f64> = self.re.iter().flatten().copied().collect();
        let im: Vec<f64> = self.im.iter().flatten().copied().collect();
        Ok(DensityMatrix::from_parts(d, &re, &im)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridJson {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl From<GridSpec> for GridJson {
    fn from(g: GridSpec) -> Self {
        GridJson {
            r_max: g.r_max,
            n_r: g.n_r,
            n_theta: g.n_theta,
        }
    }
}

impl GridJson {
    pub fn to_spec(self) -> CliResult<GridSpec> {
        Ok(GridSpec::new(self.r_max, self.n_r, self.n_theta)?)
    }
}

/// A real number or a keyword such as `"auto"` or `"exact"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrWord<T> {
    Num(T),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub eta: f64,
    pub zeta_mag: f64,
    pub zeta_phase: f64,
    pub n_max: usize,
    pub shots: NumOrWord<u64>,
    pub grid: Option<GridJson>,
    pub squeeze_mode: String,
    pub seed: u64,
    pub overflow: Option<Vec<u64>>,
    pub tail_mass: Vec<f64>,
}

pub fn locking_name(l: Locking) -> &'static str {
    match l {
        Locking::Fixed => "fixed",
        Locking::Synthesized => "synthesized",
    }
}

pub fn parse_locking(s: &str) -> CliResult<Locking> {
    match s {
        "fixed" => Ok(Locking::Fixed),
        "synthesized" => Ok(Locking::Synthesized),
        other => Err(CliError::Invalid(format!(
            "unknown squeeze mode `{other}` (expected `fixed` or `synthesized`)"
        ))),
    }
}

impl Sidecar {
    pub fn from_table(t: &MeasurementTable) -> Self {
        let (shots, overflow) = match t.data() {
            TableData::Exact(_) => (NumOrWord::Word("exact".into()), None),
            TableData::Sampled { overflow, .. } => {
                let n = match t.shots() {
                    Shots::Count(n) => n,
                    Shots::Exact => 0,
                };
                (NumOrWord::Num(n), Some(overflow.clone()))
            }
        };
        Sidecar {
            eta: t.eta(),
            zeta_mag: t.squeeze().magnitude(),
            zeta_phase: t.squeeze().phase(),
            n_max: t.n_max(),
            shots,
            grid: t.grid().map(GridJson::from),
            squeeze_mode: locking_name(t.locking()).into(),
            seed: t.seed(),
            overflow,
            tail_mass: t.tail_mass().to_vec(),
        }
    }

    pub fn meta(&self) -> CliResult<TableMeta> {
        Ok(TableMeta {
            grid: self.grid.map(GridJson::to_spec).transpose()?,
            eta: self.eta,
            squeeze: SqueezeSpec::new(self.zeta_mag, self.zeta_phase)?,
            locking: parse_locking(&self.squeeze_mode)?,
            n_max: self.n_max,
            seed: self.seed,
        })
    }
}

/// Sidecar path belonging to a table CSV: same stem, `.meta.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn read_string(path: &Path) -> CliResult<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| CliError::io(path, e))?;
    Ok(s)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Format(e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))
}

pub fn write_density(path: &Path, rho: &DensityMatrix) -> CliResult<()> {
    write_json(path, &DensityJson::from_density(rho))
}

/// Reads a density matrix file, or the `rho_hat` member of a reconstruction report.
pub fn read_density(path: &Path) -> CliResult<DensityMatrix> {
    let text = read_string(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    let inner = match value.get("rho_hat") {
        Some(v) => v.clone(),
        None => value,
    };
    let dj: DensityJson =
        serde_json::from_value(inner).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    dj.to_density()
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Format(format!("{}: {e}", path.display()))
}

/// Writes the table CSV and its sidecar.
pub fn write_table(csv_path: &Path, table: &MeasurementTable) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(csv_path)?);
    match table.data() {
        TableData::Exact(rows) => {
            w.write_record(["alpha_re", "alpha_im", "n", "p"]).map_err(|e| csv_err(csv_path, e))?;
            for (a, row) in table.alphas().iter().zip(rows) {
                for (n, p) in row.iter().enumerate() {
                    w.serialize((a.re, a.im, n, p)).map_err(|e| csv_err(csv_path, e))?;
                }
            }
        }
        TableData::Sampled { counts, .. } => {
            w.write_record(["alpha_re", "alpha_im", "n", "count"]).map_err(|e| csv_err(csv_path, e))?;
            for (a, row) in table.alphas().iter().zip(counts) {
                for (n, c) in row.iter().enumerate() {
                    w.serialize((a.re, a.im, n, c)).map_err(|e| csv_err(csv_path, e))?;
                }
            }
        }
    }
    w.flush().map_err(|e| CliError::io(csv_path, e))?;
    write_json(&sidecar_path(csv_path), &Sidecar::from_table(table))
}

/// Reads a table CSV and its sidecar and validates the result.
pub fn read_table(csv_path: &Path) -> CliResult<MeasurementTable> {
    let side_path = sidecar_path(csv_path);
    let sidecar: Sidecar = parse_json(&side_path, &read_string(&side_path)?)?;
    let meta = sidecar.meta()?;
    let mut r = csv::Reader::from_reader(File::open(csv_path).map_err(|e| CliError::io(csv_path, e))?);
    let headers = r.headers().map_err(|e| csv_err(csv_path, e))?.clone();
    let sampled = match headers.iter().collect::<Vec<_>>().as_slice() {
        ["alpha_re", "alpha_im", "n", "p"] => false,
        ["alpha_re", "alpha_im", "n", "count"] => true,
        _ => {
            return Err(CliError::Format(format!(
                "{}: expected header alpha_re,alpha_im,n,p or alpha_re,alpha_im,n,count",
                csv_path.display()
            )))
        }
    };
    let width = sidecar.n_max + 1;
    let mut alphas: Vec<Complex64> = Vec::new();
    let mut probs: Vec<Vec<f64>> = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(csv_path, e))?;
        let bad = |what: &str| CliError::Format(format!("{}: row {}: bad {what}", csv_path.display(), line + 2));
        let field = |i: usize| rec.get(i).unwrap_or("");
        let re: f64 = field(0).parse().map_err(|_| bad("alpha_re"))?;
        let im: f64 = field(1).parse().map_err(|_| bad("alpha_im"))?;
        let n: usize = field(2).parse().map_err(|_| bad("n"))?;
        let current = if sampled { counts.last().map(Vec::len) } else { probs.last().map(Vec::len) };
        let expected = match current {
            Some(len) if len < width => len,
            _ => 0,
        };
        if n != expected {
            return Err(bad("photon number (rows must list n = 0..=n_max per amplitude)"));
        }
        if n == 0 {
            alphas.push(Complex64::new(re, im));
            if sampled {
                counts.push(Vec::with_capacity(width));
            } else {
                probs.push(Vec::with_capacity(width));
            }
        } else if alphas.last() != Some(&Complex64::new(re, im)) {
            return Err(bad("amplitude (changed within a node)"));
        }
        if sampled {
            let c: u64 = field(3).parse().map_err(|_| bad("count"))?;
            counts.last_mut().expect("node pushed above").push(c);
        } else {
            let p: f64 = field(3).parse().map_err(|_| bad("p"))?;
            probs.last_mut().expect("node pushed above").push(p);
        }
    }
    let data = if sampled {
        let overflow = sidecar
            .overflow
            .clone()
            .ok_or_else(|| CliError::Format(format!("{}: sampled table without overflow", side_path.display())))?;
        TableData::Sampled { counts, overflow }
    } else {
        TableData::Exact(probs)
    };
    Ok(MeasurementTable::new(alphas, meta, data)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub s: f64,
    pub eta: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub rho_hat: DensityJson,
    pub raw_trace: f64,
    pub hermiticity_defect: f64,
    pub min_eig_before_clip: f64,
    pub clipped_weight: f64,
    pub params: ParamsJson,
    pub grid: GridJson,
    pub rule: String,
    /// `null` when the photon sum has no geometric bound (boundary ordering).
    pub n_trunc_err: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn rule_name(r: RadialRule) -> String {
    match r {
        RadialRule::Nodal => "nodal".into(),
        RadialRule::Product { fine_nodes } => format!("product:{fine_nodes}"),
    }
}

impl ReportJson {
    pub fn from_report(r: &ReconstructionReport) -> Self {
        ReportJson {
            rho_hat: DensityJson::from_density(&r.rho_hat),
            raw_trace: r.raw_trace,
            hermiticity_defect: r.hermiticity_defect,
            min_eig_before_clip: r.min_eigenvalue_before_clip,
            clipped_weight: r.clipped_weight,
            params: ParamsJson {
                s: r.params.s,
                eta: r.params.eta,
                delta: r.params.delta,
            },
            grid: r.grid.into(),
            rule: rule_name(r.rule),
            n_trunc_err: r.n_truncation_error_estimate.is_finite().then_some(r.n_truncation_error_estimate),
            warnings: r.warnings.iter().map(|w| w.to_string()).collect(),
        }
    }
}

pub fn write_report(path: &Path, r: &ReconstructionReport) -> CliResult<()> {
    write_json(path, &ReportJson::from_report(r))
}

pub fn read_report(path: &Path) -> CliResult<ReportJson> {
    parse_json(path, &read_string(path)?)
}

pub fn write_weight_scan(path: &Path, points: &[Complex64], values: &[f64]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["alpha_re", "alpha_im", "value"]).map_err(|e| csv_err(path, e))?;
    for (a, v) in points.iter().zip(values) {
        w.serialize((a.re, a.im, v)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_q_scan(path: &Path, q: &QDistribution) -> CliResult<()> {
    write_weight_scan(path, &q.points, &q.values)
}

pub fn write_chi_scan(path: &Path, xis: &[Complex64], chi: &[Complex64]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["xi_re", "xi_im", "chi_re", "chi_im"]).map_err(|e| csv_err(path, e))?;
    for (x, c) in xis.iter().zip(chi) {
        w.serialize((x.re, x.im, c.re, c.im)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
