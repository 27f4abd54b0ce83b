//! Forward model: displaced photon counting with detector loss, an optional squeeze kick
//! before the reference field is added, and finite-shot sampling.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Flagged, Result, Warning};
use crate::fock::{displacement_block, squeeze_block, wrap_phase, BuiltState, DensityMatrix, SqueezeSpec};
use crate::quadrature::{GridSpec, PhaseSpaceGrid};
use crate::special::{abs, binomial_thinning, ln_factorials};

/// Tail mass above which a single distribution is flagged.
pub const TAIL_WARNING: f64 = 0.01;
/// Squeezed-state leakage the padded construction aims for.
pub const SQUEEZE_TARGET_LEAKAGE: f64 = 1e-12;
/// Squeezed-state leakage above which `pre_squeeze` fails.
pub const SQUEEZE_LEAKAGE_LIMIT: f64 = 1e-4;
/// Probability left above the internal photon cutoff of the forward model.
pub const INTERNAL_TAIL: f64 = 1e-13;

const MAX_SQUEEZE_DIM: usize = 2048;
const MAX_INTERNAL_CUTOFF: usize = 1024;
const MAX_SYNTHESIS_CUTOFF: usize = 256;

/// `P(n)` for `n = 0..=n_max` and the mass above `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub probs: Vec<f64>,
    pub tail_mass: f64,
}

/// `P(n, alpha) = <n| D(alpha) rho D(alpha)^dag |n>` for `n = 0..=n_max`.
///
/// Matrix elements of `D` are exact, so `n_max` may exceed the cutoff of `rho`.
pub fn displaced_number_probabilities(
    rho: &DensityMatrix,
    alpha: Complex64,
    n_max: usize,
) -> Result<Flagged<PhotonDistribution>> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: f64::NAN,
            reason: "must be finite",
        });
    }
    let probs = displaced_diagonal(rho.as_matrix(), alpha, n_max + 1);
    let tail_mass = (rho.trace() - probs.iter().sum::<f64>()).max(0.0);
    let mut out = Flagged::clean(PhotonDistribution { probs, tail_mass });
    if tail_mass > TAIL_WARNING {
        out.warnings.push(Warning::TailMass { node: 0, tail: tail_mass });
    }
    Ok(out)
}

/// Diagonal of `D rho D^dag` on the first `len` levels, clipped at zero.
fn displaced_diagonal(rho: &DMatrix<Complex64>, alpha: Complex64, len: usize) -> Vec<f64> {
    let d = displacement_block(alpha, len, rho.nrows());
    let drho = &d * rho;
    (0..len)
        .map(|n| {
            let mut acc = 0.0;
            for k in 0..rho.nrows() {
                acc += (drho[(n, k)] * d[(n, k)].conj()).re;
            }
            acc.max(0.0)
        })
        .collect()
}

fn check_eta(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "efficiency must lie in (0, 1]",
        })
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    for &v in p {
        if !v.is_finite() || v < -1e-12 {
            return Err(Error::InvalidParameter {
                name: "probability",
                value: v,
                reason: "entries must be finite and nonnegative",
            });
        }
    }
    let total: f64 = p.iter().sum();
    if total > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter {
            name: "probability sum",
            value: total,
            reason: "must not exceed 1",
        });
    }
    Ok(())
}

/// Binomial thinning without input checks; also used on signed vectors.
pub(crate) fn thin(p: &[f64], eta: f64) -> Vec<f64> {
    if eta >= 1.0 {
        return p.to_vec();
    }
    let len = p.len();
    let m = binomial_thinning(eta, len);
    (0..len)
        .map(|r| (r..len).map(|n| m[r * len + n] * p[n]).sum())
        .collect()
}

/// Detector loss: `P_eta(m) = sum_{n>=m} C(n,m) eta^m (1-eta)^(n-m) P(n)`.
pub fn apply_efficiency(p: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_eta(eta)?;
    check_distribution(p)?;
    Ok(thin(p, eta))
}

/// Loss inversion and its conditioning.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    /// Signed estimate of the pre-loss distribution, `n = 0..=n_max`.
    pub probs: Vec<f64>,
    /// `max_n eta^{-n} sum_k C(n+k,n) ((1-eta)/eta)^k` over the retained terms.
    pub amplification: f64,
}

/// Inverts detector loss with the alternating series truncated at the end of `p_eta`.
pub fn invert_efficiency(p_eta: &[f64], eta: f64, n_max: usize) -> Result<Flagged<Inversion>> {
    check_eta(eta)?;
    let len = p_eta.len();
    if len < n_max + 1 {
        return Err(Error::InvalidDimension {
            dim: len,
            reason: "vector is shorter than n_max + 1",
        });
    }
    if p_eta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "probability",
            value: f64::NAN,
            reason: "entries must be finite",
        });
    }
    if eta >= 1.0 {
        return Ok(Flagged::clean(Inversion {
            probs: p_eta[..=n_max].to_vec(),
            amplification: 1.0,
        }));
    }
    let lf = ln_factorials(len);
    let ln_eta = libm::log(eta);
    let ln_ratio = libm::log((1.0 - eta) / eta);
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut amplification: f64 = 0.0;
    for n in 0..=n_max {
        let mut acc = 0.0;
        let mut gain = 0.0;
        for k in 0..len - n {
            let w = libm::exp(lf[n + k] - lf[n] - lf[k] + k as f64 * ln_ratio - n as f64 * ln_eta);
            acc += if k % 2 == 0 { w } else { -w } * p_eta[n + k];
            gain += w;
        }
        probs.push(acc);
        amplification = amplification.max(gain);
    }
    let mut out = Flagged::clean(Inversion {
        probs,
        amplification,
    });
    if eta <= 0.5 {
        out.warnings.push(Warning::LowEfficiencyInversion { eta });
    }
    Ok(out)
}

/// `S rho S^dag` on a padded cutoff large enough that less than
/// [`SQUEEZE_TARGET_LEAKAGE`] of the probability is lost, renormalized.
pub fn pre_squeeze(rho: &DensityMatrix, zeta: SqueezeSpec) -> Result<BuiltState> {
    if zeta.is_identity() {
        return Ok(BuiltState {
            rho: rho.clone(),
            leakage: 0.0,
        });
    }
    let dim = rho.dim();
    let spread = libm::ceil(4.0 * libm::exp(2.0 * zeta.magnitude())) as usize;
    let mut out_dim = dim + spread.max(16);
    loop {
        let s = squeeze_block(zeta, out_dim, dim);
        let squeezed = &s * rho.as_matrix() * s.adjoint();
        let kept = squeezed.trace().re;
        let leakage = (rho.trace() - kept).max(0.0);
        let at_cap = out_dim >= MAX_SQUEEZE_DIM;
        if leakage < SQUEEZE_TARGET_LEAKAGE || at_cap {
            if leakage > SQUEEZE_LEAKAGE_LIMIT {
                return Err(Error::Truncation {
                    leakage,
                    limit: SQUEEZE_LEAKAGE_LIMIT,
                    required_dim: MAX_SQUEEZE_DIM,
                });
            }
            let m = crate::fock::symmetrize(&squeezed) / Complex64::new(kept, 0.0);
            return Ok(BuiltState {
                rho: DensityMatrix::from_trusted(m),
                leakage,
            });
        }
        out_dim = (out_dim + out_dim / 4).min(MAX_SQUEEZE_DIM);
    }
}

/// Sampled photon counts; `overflow` collects every event above the last bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }
}

/// Multinomial draw of `shots` events from `p`, with the missing mass `1 - sum p` as an
/// overflow bin.
pub fn sample_counts(p: &[f64], shots: u64, seed: u64) -> Result<Counts> {
    sample_counts_stream(p, shots, seed, 0)
}

/// As [`sample_counts`] on an independent ChaCha stream, so parallel callers can give each
/// node its own reproducible generator.
pub fn sample_counts_stream(p: &[f64], shots: u64, seed: u64, stream: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    check_distribution(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(p.len());
    for &pi in p {
        let pi = pi.max(0.0);
        let k = if remaining == 0 || pi <= 0.0 {
            0
        } else if pi >= mass {
            remaining
        } else {
            let dist = Binomial::new(remaining, pi / mass).map_err(|_| Error::InvalidParameter {
                name: "probability",
                value: pi,
                reason: "binomial draw rejected the bin probability",
            })?;
            dist.sample(&mut rng)
        };
        counts.push(k);
        remaining -= k;
        mass = (mass - pi).max(0.0);
    }
    Ok(Counts {
        counts,
        overflow: remaining,
    })
}

/// Number of recorded events per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(u64),
}

/// How the squeeze phase relates to the reference field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locking {
    /// One physical squeeze `S(zeta)` for every node.
    Fixed,
    /// The table the isotropic rescaling `chi(xi) -> chi(xi Delta)` would produce, built from
    /// generating functions. It is not a physical photon distribution and may be negative.
    Synthesized,
}

/// Parameters of the simulated experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardModel {
    pub eta: f64,
    pub squeeze: SqueezeSpec,
    pub locking: Locking,
    pub n_max: usize,
    pub shots: Shots,
    pub seed: u64,
}

impl ForwardModel {
    /// Exact, unsqueezed, lossless counting up to `n_max`.
    pub fn ideal(n_max: usize) -> Self {
        ForwardModel {
            eta: 1.0,
            squeeze: SqueezeSpec::none(),
            locking: Locking::Fixed,
            n_max,
            shots: Shots::Exact,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        if let Shots::Count(0) = self.shots {
            return Err(Error::InvalidParameter {
                name: "shots",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.locking == Locking::Synthesized {
            if let Shots::Count(_) = self.shots {
                return Err(Error::InvalidParameter {
                    name: "shots",
                    value: f64::NAN,
                    reason: "a synthesized table is signed and cannot be sampled",
                });
            }
        }
        Ok(())
    }

    /// Squeezes the state (fixed locking) or tabulates the generating-function map
    /// (synthesized locking) once, ahead of the per-node work.
    pub fn prepare(&self, rho: &DensityMatrix) -> Result<PreparedModel> {
        self.validate()?;
        let mut warnings = Vec::new();
        let (source, synthesis) = match self.locking {
            Locking::Fixed => {
                let squeezed = pre_squeeze(rho, self.squeeze)?;
                if squeezed.leakage > SQUEEZE_TARGET_LEAKAGE {
                    warnings.push(Warning::TailMass {
                        node: 0,
                        tail: squeezed.leakage,
                    });
                }
                (squeezed.rho, None)
            }
            Locking::Synthesized => {
                let delta_sq = libm::exp(2.0 * self.squeeze.magnitude());
                (rho.clone(), Some(synthesis_matrix(delta_sq, MAX_SYNTHESIS_CUTOFF)))
            }
        };
        Ok(PreparedModel {
            model: *self,
            source,
            synthesis,
            warnings,
        })
    }
}

/// Column `k` holds the series coefficients of `v(z) u(z)^k`, with
/// `v = 2/(A - Bz)` and `u = (Az - B)/(A - Bz)`, `A = Delta^2 + 1`, `B = Delta^2 - 1`.
/// Mapping a generating function `G` to `v G(u)` rescales the characteristic function
/// isotropically by `Delta`.
fn synthesis_matrix(delta_sq: f64, len: usize) -> DMatrix<f64> {
    let a = delta_sq + 1.0;
    let b = delta_sq - 1.0;
    let ratio = b / a;
    let mut inv = vec![0.0; len];
    let mut t = 1.0 / a;
    for c in inv.iter_mut() {
        *c = t;
        t *= ratio;
    }
    let mut u = vec![0.0; len];
    for j in 0..len {
        u[j] = a * if j >= 1 { inv[j - 1] } else { 0.0 } - b * inv[j];
    }
    let mut out = DMatrix::zeros(len, len);
    let mut col: Vec<f64> = inv.iter().map(|c| 2.0 * c).collect();
    for k in 0..len {
        for j in 0..len {
            out[(j, k)] = col[j];
        }
        let mut next = vec![0.0; len];
        for (i, ci) in col.iter().enumerate() {
            if *ci == 0.0 {
                continue;
            }
            for (j, uj) in u.iter().enumerate().take(len - i) {
                next[i + j] += ci * uj;
            }
        }
        col = next;
    }
    out
}

/// One node of a measurement table.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub probs: Vec<f64>,
    pub counts: Option<Counts>,
    pub tail_mass: f64,
}

/// A forward model bound to a state; evaluates nodes independently.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    model: ForwardModel,
    source: DensityMatrix,
    synthesis: Option<DMatrix<f64>>,
    warnings: Vec<Warning>,
}

impl PreparedModel {
    pub fn model(&self) -> &ForwardModel {
        &self.model
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// The state the reference field acts on (squeezed for fixed locking).
    pub fn source(&self) -> &DensityMatrix {
        &self.source
    }

    /// Record for node `index` at amplitude `alpha`. The result depends only on its arguments.
    pub fn node(&self, index: usize, alpha: Complex64) -> Result<NodeRecord> {
        let m = &self.model;
        let needed = m.n_max + 1;
        let full = match self.synthesis {
            None => self.lossy_distribution(alpha, needed, MAX_INTERNAL_CUTOFF)?,
            Some(ref g) => {
                let delta = m.squeeze.delta();
                let raw = self.raw_distribution(alpha / delta, needed, MAX_SYNTHESIS_CUTOFF)?;
                let len = raw.len();
                let mapped: Vec<f64> = (0..len)
                    .map(|j| (0..len).map(|k| g[(j, k)] * raw[k]).sum())
                    .collect();
                thin(&mapped, m.eta)
            }
        };
        let probs = full[..needed].to_vec();
        let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        let counts = match m.shots {
            Shots::Exact => None,
            Shots::Count(shots) => Some(sample_counts_stream(&probs, shots, m.seed, index as u64)?),
        };
        let probs = match counts {
            None => probs,
            Some(ref c) => c.counts.iter().map(|k| *k as f64 / c.shots() as f64).collect(),
        };
        let tail_mass = match counts {
            None => tail_mass,
            Some(ref c) => c.overflow as f64 / c.shots() as f64,
        };
        Ok(NodeRecord {
            probs,
            counts,
            tail_mass,
        })
    }

    /// Displaced distribution of the source state on a cutoff grown until less than
    /// [`INTERNAL_TAIL`] lies above it.
    fn raw_distribution(&self, alpha: Complex64, needed: usize, cap: usize) -> Result<Vec<f64>> {
        let r = abs(alpha);
        let dim = self.source.dim();
        let mut len = needed.max(dim + libm::ceil(r * r + 8.0 * r) as usize + 16).min(cap);
        loop {
            let p = displaced_diagonal(self.source.as_matrix(), alpha, len);
            let tail = self.source.trace() - p.iter().sum::<f64>();
            if tail < INTERNAL_TAIL {
                return Ok(p);
            }
            if len >= cap {
                return Err(Error::Convergence {
                    what: "photon cutoff of the forward model",
                    limit: cap,
                });
            }
            len = (len * 2).min(cap);
        }
    }

    fn lossy_distribution(&self, alpha: Complex64, needed: usize, cap: usize) -> Result<Vec<f64>> {
        if self.model.eta >= 1.0 {
            let mut p = displaced_diagonal(self.source.as_matrix(), alpha, needed);
            p.truncate(needed);
            return Ok(p);
        }
        let p = self.raw_distribution(alpha, needed, cap)?;
        Ok(thin(&p, self.model.eta))
    }
}

/// Probabilities (exact) or counts (sampled) per reference amplitude.
#[derive(Debug, Clone, PartialEq)]
pub enum TableData {
    Exact(Vec<Vec<f64>>),
    Sampled {
        counts: Vec<Vec<u64>>,
        overflow: Vec<u64>,
    },
}

/// Measurement record consumed by the reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTable {
    alphas: Vec<Complex64>,
    grid: Option<GridSpec>,
    eta: f64,
    squeeze: SqueezeSpec,
    locking: Locking,
    n_max: usize,
    seed: u64,
    data: TableData,
    probs: Vec<Vec<f64>>,
    tail_mass: Vec<f64>,
    warnings: Vec<Warning>,
}

/// Table metadata shared by exact and sampled tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableMeta {
    pub grid: Option<GridSpec>,
    pub eta: f64,
    pub squeeze: SqueezeSpec,
    pub locking: Locking,
    pub n_max: usize,
    pub seed: u64,
}

impl MeasurementTable {
    /// Validates and assembles a table from raw data, e.g. one read from disk.
    pub fn new(alphas: Vec<Complex64>, meta: TableMeta, data: TableData) -> Result<Self> {
        check_eta(meta.eta)?;
        let rows = match data {
            TableData::Exact(ref p) => p.len(),
            TableData::Sampled { ref counts, ref overflow } => {
                if overflow.len() != counts.len() {
                    return Err(Error::TableMismatch("overflow column length differs from node count"));
                }
                counts.len()
            }
        };
        if rows != alphas.len() {
            return Err(Error::TableMismatch("row count differs from node count"));
        }
        check_distinct(&alphas)?;
        let width = meta.n_max + 1;
        let (probs, tail_mass): (Vec<Vec<f64>>, Vec<f64>) = match data {
            TableData::Exact(ref p) => {
                let mut tails = Vec::with_capacity(p.len());
                for row in p {
                    if row.len() != width {
                        return Err(Error::TableMismatch("row length differs from n_max + 1"));
                    }
                    if meta.locking == Locking::Fixed {
                        check_distribution(row)?;
                    } else if row.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Validation(crate::error::ValidationError::NonFinite));
                    }
                    tails.push((1.0 - row.iter().sum::<f64>()).max(0.0));
                }
                (p.clone(), tails)
            }
            TableData::Sampled {
                ref counts,
                ref overflow,
            } => {
                if meta.locking == Locking::Synthesized {
                    return Err(Error::TableMismatch("a synthesized table cannot hold counts"));
                }
                let mut probs = Vec::with_capacity(counts.len());
                let mut tails = Vec::with_capacity(counts.len());
                for (row, over) in counts.iter().zip(overflow) {
                    if row.len() != width {
                        return Err(Error::TableMismatch("row length differs from n_max + 1"));
                    }
                    let total = row.iter().sum::<u64>() + over;
                    if total == 0 {
                        return Err(Error::TableMismatch("node without events"));
                    }
                    let t = total as f64;
                    probs.push(row.iter().map(|k| *k as f64 / t).collect());
                    tails.push(*over as f64 / t);
                }
                (probs, tails)
            }
        };
        let mut table = MeasurementTable {
            alphas,
            grid: meta.grid,
            eta: meta.eta,
            squeeze: meta.squeeze,
            locking: meta.locking,
            n_max: meta.n_max,
            seed: meta.seed,
            data,
            probs,
            tail_mass,
            warnings: Vec::new(),
        };
        table.summarize_tails();
        Ok(table)
    }

    fn summarize_tails(&mut self) {
        let sampled = matches!(self.data, TableData::Sampled { .. });
        if let Some((node, tail)) = self
            .tail_mass
            .iter()
            .cloned()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (i, t)| match best {
                Some((_, b)) if b >= t => best,
                _ => Some((i, t)),
            })
        {
            if sampled && tail > 0.0 {
                self.warnings.push(Warning::Overflow { node, fraction: tail });
            } else if tail > TAIL_WARNING {
                self.warnings.push(Warning::TailMass { node, tail });
            }
        }
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Probabilities (or relative frequencies) of node `j`, `n = 0..=n_max`.
    pub fn probs(&self, j: usize) -> &[f64] {
        &self.probs[j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn tail_mass(&self) -> &[f64] {
        &self.tail_mass
    }

    pub fn max_tail_mass(&self) -> f64 {
        self.tail_mass.iter().cloned().fold(0.0, f64::max)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn squeeze(&self) -> SqueezeSpec {
        self.squeeze
    }

    pub fn locking(&self) -> Locking {
        self.locking
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> Option<GridSpec> {
        self.grid
    }

    pub fn data(&self) -> &TableData {
        &self.data
    }

    pub fn shots(&self) -> Shots {
        match self.data {
            TableData::Exact(_) => Shots::Exact,
            TableData::Sampled { ref counts, ref overflow } => Shots::Count(
                counts
                    .first()
                    .map(|row| row.iter().sum::<u64>() + overflow[0])
                    .unwrap_or(0),
            ),
        }
    }

    /// Fraction of sampled events dropped above `n_max`, over the whole table.
    pub fn overflow_fraction(&self) -> f64 {
        match self.data {
            TableData::Exact(_) => 0.0,
            TableData::Sampled { ref counts, ref overflow } => {
                let total: u64 = counts.iter().flatten().sum::<u64>() + overflow.iter().sum::<u64>();
                overflow.iter().sum::<u64>() as f64 / total.max(1) as f64
            }
        }
    }

    pub fn meta(&self) -> TableMeta {
        TableMeta {
            grid: self.grid,
            eta: self.eta,
            squeeze: self.squeeze,
            locking: self.locking,
            n_max: self.n_max,
            seed: self.seed,
        }
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Same table with every probability replaced by `f(node, row)`; used to form mixtures.
    pub fn map_rows<F: FnMut(usize, &[f64]) -> Vec<f64>>(&self, mut f: F) -> Result<Self> {
        let rows = self.probs.iter().enumerate().map(|(j, r)| f(j, r)).collect();
        let mut meta = self.meta();
        if meta.locking == Locking::Fixed && self.probs.iter().flatten().any(|v| *v < -1e-12) {
            meta.locking = Locking::Synthesized;
        }
        MeasurementTable::new(self.alphas.clone(), meta, TableData::Exact(rows))
    }

    /// Assembles a table from per-node records in grid order.
    pub fn from_records(grid: &PhaseSpaceGrid, model: &PreparedModel, records: Vec<NodeRecord>) -> Result<Self> {
        let m = model.model();
        let meta = TableMeta {
            grid: Some(grid.spec()),
            eta: m.eta,
            squeeze: m.squeeze,
            locking: m.locking,
            n_max: m.n_max,
            seed: m.seed,
        };
        let data = match m.shots {
            Shots::Exact => TableData::Exact(records.into_iter().map(|r| r.probs).collect()),
            Shots::Count(_) => {
                let mut counts = Vec::with_capacity(records.len());
                let mut overflow = Vec::with_capacity(records.len());
                for r in records {
                    let c = r.counts.ok_or(Error::TableMismatch("sampled node without counts"))?;
                    counts.push(c.counts);
                    overflow.push(c.overflow);
                }
                TableData::Sampled { counts, overflow }
            }
        };
        let mut table = MeasurementTable::new(grid.nodes().to_vec(), meta, data)?;
        let mut warnings = model.warnings().to_vec();
        warnings.append(&mut table.warnings);
        table.warnings = warnings;
        Ok(table)
    }
}

fn check_distinct(alphas: &[Complex64]) -> Result<()> {
    let mut sorted: Vec<(f64, f64)> = alphas.iter().map(|a| (a.re, a.im)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::TableMismatch("reference amplitudes are not pairwise distinct"));
    }
    Ok(())
}

/// Sequential table construction: squeeze (if any), then per node displace, count, lose and
/// optionally sample.
pub fn build_table(rho: &DensityMatrix, grid: &PhaseSpaceGrid, model: &ForwardModel) -> Result<MeasurementTable> {
    let prepared = model.prepare(rho)?;
    let records = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(j, a)| prepared.node(j, *a))
        .collect::<Result<Vec<_>>>()?;
    MeasurementTable::from_records(grid, &prepared, records)
}

/// Squeeze with its phase locked to twice the argument of `alpha`.
pub fn locked_squeeze(magnitude: f64, alpha: Complex64) -> SqueezeSpec {
    let phase = 2.0 * crate::special::arg(alpha);
    SqueezeSpec::new(magnitude, wrap_phase(phase)).unwrap_or_else(|_| SqueezeSpec::none())
}
