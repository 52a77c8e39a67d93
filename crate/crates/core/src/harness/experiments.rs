//! The six experiments.
//!
//! Trial `t` of every cell draws its randomness from `(master_seed, t)` with a
//! per-component tag, so the same trial index sees the same Haar draw, message
//! and corruption pattern in every cell. Codes and sections are column prefixes
//! of that one draw, which makes success monotone across `R` trial by trial.

use std::time::Instant;

use rayon::prelude::*;

use super::config::{Cell, Experiment, ExperimentConfig};
use super::records::{SummaryTable, TrialRecord};
use super::HarnessError;
use crate::bp::{sense_l1, SenseProblem, SubspaceBasis};
use crate::codec::{corrupt, Codec, CodeParams, Corruption};
use crate::geometry::{
    certify_uniform, facet_family_size, facet_intersection_count, hyperplane_criterion_count, is_uniformly_certified,
    min_inf_certificate, projection_identity_check, projection_length_stats, random_facet, CertificateClass, Facet,
    SweepMode, UniformCertificate,
};
use crate::linalg::{
    complement_basis, norm, sample_gaussian_matrix, sample_haar_orthonormal, NormKind, RealVector, SeedSpec, SeededRng,
};

const TAG_SUBSPACE: u64 = 1;
const TAG_MESSAGE: u64 = 2;
const TAG_CORRUPTION: u64 = 3;
const TAG_SIGNAL: u64 = 4;
const TAG_NOISE: u64 = 5;
const TAG_FACET: u64 = 6;
const TAG_STATS: u64 = 7;

/// Corruption magnitudes are log-uniform over this range.
pub const MAGNITUDE_RANGE: (f64, f64) = (1e-3, 1e6);

/// Cells with `m` up to this also run the exhaustive uniform certificate.
pub const CERTIFY_MAX_M: usize = 12;

/// Fresh codec seeds tried per pool slot before giving up on certification.
pub const MAX_CERTIFY_ATTEMPTS: u64 = 20;

/// `||f - g||_2` below which a compressible reconstruction counts as exact.
pub const EXACT_RECONSTRUCTION_TOL: f64 = 1e-7;

/// The calibrated generous threshold `ceil(10 r ln(m / r))`, zero for `r = 0`.
pub fn calibrated_r_star(m: usize, r: usize) -> usize {
    if r == 0 {
        return 0;
    }
    (10.0 * r as f64 * (m as f64 / r as f64).ln()).ceil() as usize
}

/// `ceil(log2(m / r))`, zero for `r = 0`.
pub fn log_threshold(m: usize, r: usize) -> usize {
    if r == 0 {
        return 0;
    }
    (m as f64 / r as f64).log2().ceil() as usize
}

fn trial_seed(cfg: &ExperimentConfig, t: u64) -> SeedSpec {
    SeedSpec::new(cfg.master_seed, t)
}

/// Runs `f` on every `(cell, trial)` pair in parallel and regroups by cell in index order.
fn sweep<T: Send>(cells: &[Cell], trials: usize, f: impl Fn(Cell, u64) -> T + Sync) -> Vec<Vec<T>> {
    let jobs: Vec<(usize, u64)> = (0..cells.len()).flat_map(|c| (0..trials as u64).map(move |t| (c, t))).collect();
    let mut flat: Vec<T> = jobs.par_iter().map(|&(c, t)| f(cells[c], t)).collect();
    let mut out = Vec::with_capacity(cells.len());
    for _ in 0..cells.len() {
        let rest = flat.split_off(trials);
        out.push(std::mem::replace(&mut flat, rest));
    }
    out
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, enabled.then(|| start.elapsed().as_secs_f64() * 1e3))
}

fn rate(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn gaussian_vector(rng: &mut SeededRng, len: usize) -> RealVector {
    RealVector::from_vec_unchecked((0..len).map(|_| rng.normal()).collect())
}

/// `count` coordinates with random signs and log-uniform magnitudes. The
/// support is a prefix of one permutation, so larger counts extend smaller ones.
fn planted_corruption(seed: SeedSpec, m: usize, count: usize) -> Corruption {
    let mut rng = seed.rng();
    let perm = rng.permutation(m);
    let draws: Vec<f64> = (0..m).map(|_| rng.sign() * rng.log_uniform(MAGNITUDE_RANGE.0, MAGNITUDE_RANGE.1)).collect();
    let count = count.min(m);
    Corruption::new(perm[..count].to_vec(), draws[..count].to_vec()).expect("distinct in-range support")
}

fn facet_of(c: &Corruption, m: usize) -> Facet {
    let mut pairs: Vec<(usize, i8)> =
        c.support().iter().zip(c.values()).map(|(&i, &v)| (i, if v < 0.0 { -1 } else { 1 })).collect();
    pairs.sort_unstable();
    let (support, signs) = pairs.into_iter().unzip();
    Facet::new(support, signs, m).expect("corruption support is a valid facet")
}

fn haar_section(m: usize, big_r: usize, seed: SeedSpec) -> Result<SubspaceBasis, HarnessError> {
    Ok(SubspaceBasis::new(sample_haar_orthonormal(m, big_r, seed)?)?)
}

/// Dispatches on `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    match cfg.experiment {
        Experiment::Phase => run_phase_transition(cfg),
        Experiment::Facets => run_facets(cfg),
        Experiment::Necessity => run_necessity(cfg),
        Experiment::Compressible => run_compressible(cfg),
        Experiment::CodecRoundtrip => run_codec_roundtrip(cfg),
        Experiment::GeometryChecks => run_geometry_checks(cfg),
    }
}

struct PhaseTrial {
    record: TrialRecord,
    strict: bool,
    certified: Option<bool>,
}

fn phase_trial(cfg: &ExperimentConfig, cell: Cell, t: u64) -> PhaseTrial {
    let seed = trial_seed(cfg, t);
    let mut record = TrialRecord::new(Experiment::Phase.name(), cell, t, cfg.master_seed);
    let mut strict = false;
    let mut certified = None;
    let (res, ms) = timed(cfg.record_runtime, || -> Result<(), HarnessError> {
        let codec = Codec::new(CodeParams::new(cell.m, cell.n(), cell.r)?, seed.derive(TAG_SUBSPACE))?;
        let x = gaussian_vector(&mut seed.derive(TAG_MESSAGE).rng(), cell.n());
        let y = codec.encode(&x)?;
        let z = planted_corruption(seed.derive(TAG_CORRUPTION), cell.m, cell.r);
        let dec = codec.decode(&corrupt(&y, &z)?)?;
        record.success = Some(dec.recovers(&x));
        record.error_l1 = Some(dec.u.sub(&y).norm(NormKind::L1));
        record.error_l2 = Some(dec.x_hat.sub(&x).norm(NormKind::L2));
        let cert = min_inf_certificate(codec.complement(), &facet_of(&z, cell.m))?;
        record.t_worst = Some(cert.t_star);
        strict = cert.class == CertificateClass::Strict;
        if cell.m <= CERTIFY_MAX_M {
            certified = Some(certify_uniform(&codec)?.all_strict);
        }
        Ok(())
    });
    record.runtime_ms = ms;
    if let Err(e) = res {
        record.success = Some(false);
        record.error = Some(e.to_string());
    }
    PhaseTrial { record, strict, certified }
}

/// Success rate of decoding a planted corruption of `r` coordinates, per `(m, r, R)`.
pub fn run_phase_transition(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    let name = Experiment::Phase.name();
    let results = sweep(&cells, cfg.trials, |cell, t| phase_trial(cfg, cell, t));
    let mut table = SummaryTable::default();
    for (cell, trials) in cells.iter().zip(results) {
        let n = trials.len();
        let successes = trials.iter().filter(|p| p.record.success == Some(true)).count();
        let strict = trials.iter().filter(|p| p.strict).count();
        let violations = trials.iter().filter(|p| p.strict && p.record.success != Some(true)).count();
        let errors = trials.iter().filter(|p| p.record.error.is_some()).count();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        push(&mut table, "success_rate", rate(successes, n));
        push(&mut table, "successes", successes as f64);
        push(&mut table, "strict_rate", rate(strict, n));
        push(&mut table, "strict_without_success", violations as f64);
        push(&mut table, "trial_errors", errors as f64);
        if cell.m <= CERTIFY_MAX_M {
            let certified = trials.iter().filter(|p| p.certified == Some(true)).count();
            push(&mut table, "uniform_certified_rate", rate(certified, n));
        }
        table.records.extend(trials.into_iter().map(|p| p.record));
    }
    Ok(table)
}

struct FacetTrial {
    record: TrialRecord,
    boundary: u64,
    oracle_mismatch: Option<bool>,
}

fn facet_trial(cfg: &ExperimentConfig, cell: Cell, t: u64) -> FacetTrial {
    let seed = trial_seed(cfg, t);
    let mut record = TrialRecord::new(Experiment::Facets.name(), cell, t, cfg.master_seed);
    let mut boundary = 0;
    let mut oracle_mismatch = None;
    let (res, ms) = timed(cfg.record_runtime, || -> Result<(), HarnessError> {
        let e = haar_section(cell.m, cell.big_r, seed.derive(TAG_SUBSPACE))?;
        let count = facet_intersection_count(&e, cell.r, SweepMode::Exhaustive)?;
        record.facet_count = Some(count.intersected);
        record.success = Some(count.intersected as u128 == count.max);
        boundary = count.boundary;
        if cell.r == 1 && cell.big_r + 1 == cell.m {
            let normal = complement_basis(e.matrix())?.column(0);
            oracle_mismatch = Some(hyperplane_criterion_count(normal.as_slice()) != count.intersected);
        }
        Ok(())
    });
    record.runtime_ms = ms;
    if let Err(e) = res {
        record.success = Some(false);
        record.error = Some(e.to_string());
    }
    FacetTrial { record, boundary, oracle_mismatch }
}

/// Exhaustive facet counts of random sections `E ∩ [-1, 1]^m` with `dim E = R`.
pub fn run_facets(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    let name = Experiment::Facets.name();
    let results = sweep(&cells, cfg.trials, |cell, t| facet_trial(cfg, cell, t));
    let mut table = SummaryTable::default();
    for (cell, trials) in cells.iter().zip(results) {
        let n = trials.len();
        let counts: Vec<u64> = trials.iter().filter_map(|f| f.record.facet_count).collect();
        let full = trials.iter().filter(|f| f.record.success == Some(true)).count();
        let errors = trials.iter().filter(|f| f.record.error.is_some()).count();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        push(&mut table, "full_count_fraction", rate(full, n));
        push(&mut table, "facet_family_size", facet_family_size(cell.m, cell.r) as f64);
        if !counts.is_empty() {
            push(&mut table, "mean_facet_count", counts.iter().sum::<u64>() as f64 / counts.len() as f64);
            push(&mut table, "min_facet_count", *counts.iter().min().unwrap() as f64);
            push(&mut table, "max_facet_count", *counts.iter().max().unwrap() as f64);
        }
        push(&mut table, "boundary_facets", trials.iter().map(|f| f.boundary).sum::<u64>() as f64);
        if trials.iter().any(|f| f.oracle_mismatch.is_some()) {
            let mismatches = trials.iter().filter(|f| f.oracle_mismatch == Some(true)).count();
            push(&mut table, "oracle_mismatches", mismatches as f64);
        }
        push(&mut table, "trial_errors", errors as f64);
        table.records.extend(trials.into_iter().map(|f| f.record));
    }
    Ok(table)
}

struct NecessityTrial {
    record: TrialRecord,
    facet_hit: bool,
}

fn necessity_trial(cfg: &ExperimentConfig, cell: Cell, t: u64) -> NecessityTrial {
    let seed = trial_seed(cfg, t);
    let mut record = TrialRecord::new(Experiment::Necessity.name(), cell, t, cfg.master_seed);
    let mut facet_hit = false;
    let (res, ms) = timed(cfg.record_runtime, || -> Result<(), HarnessError> {
        let e = haar_section(cell.m, cell.big_r, seed.derive(TAG_SUBSPACE))?;
        let facet = random_facet(cell.m, cell.r, &mut seed.derive(TAG_FACET).rng());
        let probe = min_inf_certificate(&e, &facet)?;
        facet_hit = probe.class != CertificateClass::None;
        record.t_worst = Some(probe.t_star);
        record.success = Some(is_uniformly_certified(&e, cell.r)?);
        Ok(())
    });
    record.runtime_ms = ms;
    if let Err(e) = res {
        record.success = Some(false);
        record.error = Some(e.to_string());
    }
    NecessityTrial { record, facet_hit }
}

/// Uniform-recovery rate and single-facet intersection rate at small `R`.
///
/// Here `t_worst` holds `t*` of the probed random facet, since the uniform
/// check stops at the first failing facet.
pub fn run_necessity(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    let name = Experiment::Necessity.name();
    let results = sweep(&cells, cfg.trials, |cell, t| necessity_trial(cfg, cell, t));
    let mut table = SummaryTable::default();
    for (cell, trials) in cells.iter().zip(results) {
        let n = trials.len();
        let uniform = trials.iter().filter(|x| x.record.success == Some(true)).count();
        let hits = trials.iter().filter(|x| x.facet_hit).count();
        let errors = trials.iter().filter(|x| x.record.error.is_some()).count();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        push(&mut table, "uniform_recovery_rate", rate(uniform, n));
        push(&mut table, "facet_intersection_rate", rate(hits, n));
        push(&mut table, "calibrated_R_star", calibrated_r_star(cell.m, cell.r) as f64);
        push(&mut table, "log_threshold", log_threshold(cell.m, cell.r) as f64);
        push(&mut table, "trial_errors", errors as f64);
        table.records.extend(trials.into_iter().map(|x| x.record));
    }
    Ok(table)
}

/// A signal whose decreasing rearrangement meets `f*(s) = s^(-1/p)`,
/// optionally truncated to its `sparsity` largest entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressibleSignal {
    p: f64,
    values: RealVector,
}

impl CompressibleSignal {
    /// Random signs and a uniformly random placement of the magnitudes.
    pub fn sample(p: f64, m: usize, sparsity: Option<usize>, seed: SeedSpec) -> Result<Self, HarnessError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(HarnessError::Config(format!("p = {p} outside (0, 1]")));
        }
        let mut rng = seed.rng();
        let perm = rng.permutation(m);
        let keep = sparsity.unwrap_or(m).min(m);
        let mut values = vec![0.0; m];
        for (rank, &pos) in perm.iter().enumerate().take(keep) {
            values[pos] = rng.sign() * ((rank + 1) as f64).powf(-1.0 / p);
        }
        Ok(Self { p, values: RealVector::from_vec_unchecked(values) })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn values(&self) -> &RealVector {
        &self.values
    }

    /// Whether the sorted magnitudes stay below `s^(-1/p)`.
    pub fn within_bound(&self) -> bool {
        let mut mags: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        mags.iter().enumerate().all(|(s, &v)| v <= ((s + 1) as f64).powf(-1.0 / self.p))
    }
}

/// The rate `(ln(m/R)/R)^(1/p - 1/2)` of the compressible reconstruction bound.
pub fn compressible_rate(m: usize, big_r: usize, p: f64) -> f64 {
    ((m as f64 / big_r as f64).ln() / big_r as f64).powf(1.0 / p - 0.5)
}

fn compressible_trial(cfg: &ExperimentConfig, cell: Cell, t: u64) -> TrialRecord {
    let seed = trial_seed(cfg, t);
    let mut record = TrialRecord::new(Experiment::Compressible.name(), cell, t, cfg.master_seed);
    let (res, ms) = timed(cfg.record_runtime, || -> Result<(), HarnessError> {
        let sparsity = (cell.r > 0).then_some(cell.r);
        let f = CompressibleSignal::sample(cfg.p, cell.m, sparsity, seed.derive(TAG_SIGNAL))?;
        // Rows of A are nested in R: A^T is a column prefix of one Gaussian draw.
        let a = sample_gaussian_matrix(cell.m, cell.big_r, seed.derive(TAG_SUBSPACE)).transpose();
        let g = sense_l1(&SenseProblem::measure(a, f.values())?)?.g;
        let diff = g.sub(f.values());
        let err = diff.norm(NormKind::L2);
        record.error_l1 = Some(diff.norm(NormKind::L1));
        record.error_l2 = Some(err);
        record.success = Some(err <= EXACT_RECONSTRUCTION_TOL);
        Ok(())
    });
    record.runtime_ms = ms;
    if let Err(e) = res {
        record.success = Some(false);
        record.error = Some(e.to_string());
    }
    record
}

/// `||f - g||_2` for compressible signals sensed with `R` Gaussian measurements.
/// `r = 0` uses the full power-law signal; `r > 0` truncates it to `r` entries.
pub fn run_compressible(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    let name = Experiment::Compressible.name();
    let results = sweep(&cells, cfg.trials, |cell, t| compressible_trial(cfg, cell, t));
    let mut table = SummaryTable::default();
    for (cell, trials) in cells.iter().zip(results) {
        let n = trials.len();
        let mut errs: Vec<f64> = trials.iter().filter_map(|t| t.error_l2).collect();
        let exact = trials.iter().filter(|t| t.success == Some(true)).count();
        let errors = trials.iter().filter(|t| t.error.is_some()).count();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        push(&mut table, "p", cfg.p);
        if !errs.is_empty() {
            let mean = errs.iter().sum::<f64>() / errs.len() as f64;
            let med = median(&mut errs);
            let scale = compressible_rate(cell.m, cell.big_r, cfg.p);
            push(&mut table, "median_error_l2", med);
            push(&mut table, "mean_error_l2", mean);
            push(&mut table, "max_error_l2", *errs.last().unwrap());
            push(&mut table, "rate_scale", scale);
            push(&mut table, "median_ratio", med / scale);
        }
        push(&mut table, "exact_rate", rate(exact, n));
        push(&mut table, "trial_errors", errors as f64);
        table.records.extend(trials);
    }
    Ok(table)
}

/// A certified codec, or the reason none was found.
type PoolEntry = Result<(Codec, UniformCertificate, u64), String>;

fn certified_codec(cfg: &ExperimentConfig, cell: Cell, slot: u64) -> PoolEntry {
    let params = CodeParams::new(cell.m, cell.n(), cell.r).map_err(|e| e.to_string())?;
    let base = SeedSpec::new(cfg.master_seed, slot).derive(TAG_SUBSPACE);
    for attempt in 0..MAX_CERTIFY_ATTEMPTS {
        let codec = Codec::new(params, base.derive(attempt)).map_err(|e| e.to_string())?;
        let cert = certify_uniform(&codec).map_err(|e| e.to_string())?;
        if cert.all_strict {
            return Ok((codec, cert, attempt + 1));
        }
    }
    Err(format!("no certified codec in {MAX_CERTIFY_ATTEMPTS} attempts"))
}

struct RoundTrip {
    record: TrialRecord,
    quant_error_l1: Option<f64>,
    over_budget_match: Option<bool>,
    robust_ratio: Option<f64>,
}

fn roundtrip_trial(cfg: &ExperimentConfig, cell: Cell, t: u64, entry: &PoolEntry) -> RoundTrip {
    let seed = trial_seed(cfg, t);
    let mut out = RoundTrip {
        record: TrialRecord::new(Experiment::CodecRoundtrip.name(), cell, t, cfg.master_seed),
        quant_error_l1: None,
        over_budget_match: None,
        robust_ratio: None,
    };
    let (res, ms) = timed(cfg.record_runtime, || -> Result<(), HarnessError> {
        let (codec, cert, _) = entry.as_ref().map_err(|e| HarnessError::Trial(e.clone()))?;
        out.record.t_worst = Some(cert.worst_t);
        let m = cell.m;
        let levels_per_unit = 10.0 * m as f64;

        // Quantized pipeline.
        let mut rng = seed.derive(TAG_MESSAGE).rng();
        let x: Vec<i64> = (0..cell.n()).map(|_| 1 + rng.below(cfg.alphabet as usize) as i64).collect();
        let word = codec.quantized_encode(&x, cfg.alphabet)?;
        let exact = codec.encode(&RealVector::from_vec_unchecked(x.iter().map(|&v| v as f64).collect()))?;
        out.quant_error_l1 = Some(word.l1_error_against(&exact));
        let level_offsets = |c: &Corruption| -> Vec<i64> { c.values().iter().map(|v| (v * levels_per_unit).round() as i64).collect() };
        let z = planted_corruption(seed.derive(TAG_CORRUPTION), m, cell.r);
        let dec = codec.quantized_decode(&word.corrupt(z.support(), &level_offsets(&z))?)?;
        out.record.success = Some(dec.symbols == x);
        out.record.error_l1 = Some(dec.u.sub(&exact).norm(NormKind::L1));
        out.record.error_l2 = Some(norm(
            &dec.x_prime.iter().zip(&x).map(|(a, &b)| a - b as f64).collect::<Vec<_>>(),
            NormKind::L2,
        ));

        let over = planted_corruption(seed.derive(TAG_CORRUPTION), m, cell.r + m.div_ceil(10));
        let dec = codec.quantized_decode(&word.corrupt(over.support(), &level_offsets(&over))?)?;
        out.over_budget_match = Some(dec.symbols == x);

        // Real-valued path with dense noise of fixed l1 norm.
        let mut rng = seed.derive(TAG_NOISE).rng();
        let xr = gaussian_vector(&mut rng, cell.n());
        let y = codec.encode(&xr)?;
        let dir = gaussian_vector(&mut rng, m);
        let h = dir.scaled(cfg.noise_l1 / dir.norm(NormKind::L1).max(f64::MIN_POSITIVE));
        let received = corrupt(&y, &z)?.add(&h);
        let (_, report) = codec.robust_decode(&received, Some((&y, &h)))?;
        let report = report.expect("truth supplied");
        out.robust_ratio = Some(if report.noise_l1 > 0.0 { report.error_l1 / report.noise_l1 } else { report.error_l1 });
        Ok(())
    });
    out.record.runtime_ms = ms;
    if let Err(e) = res {
        out.record.success = Some(false);
        out.record.error = Some(e.to_string());
    }
    out
}

/// Quantized encode, corrupt, decode on certified codecs, plus the dense-noise
/// robustness ratio `||u - y||_1 / ||h||_1` and an over-budget corruption rate.
pub fn run_codec_roundtrip(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    if let Some(c) = cells.iter().find(|c| c.m > 2 * c.n()) {
        return Err(HarnessError::Config(format!("codec round trip needs m <= 2n, got m = {}, n = {}", c.m, c.n())));
    }
    let name = Experiment::CodecRoundtrip.name();
    let pool_size = cfg.codec_pool.unwrap_or(cfg.trials).min(cfg.trials);
    let pools: Vec<Vec<PoolEntry>> = cells
        .iter()
        .map(|&cell| (0..pool_size as u64).into_par_iter().map(|slot| certified_codec(cfg, cell, slot)).collect())
        .collect();
    let results = sweep(&cells, cfg.trials, |cell, t| {
        let c = cells.iter().position(|&x| x == cell).expect("cell from grid");
        roundtrip_trial(cfg, cell, t, &pools[c][t as usize % pool_size])
    });
    let mut table = SummaryTable::default();
    for ((cell, trials), pool) in cells.iter().zip(results).zip(&pools) {
        let n = trials.len();
        let matches = trials.iter().filter(|x| x.record.success == Some(true)).count();
        let over = trials.iter().filter(|x| x.over_budget_match == Some(true)).count();
        let quant: Vec<f64> = trials.iter().filter_map(|x| x.quant_error_l1).collect();
        let ratios: Vec<f64> = trials.iter().filter_map(|x| x.robust_ratio).collect();
        let certified: Vec<&UniformCertificate> = pool.iter().filter_map(|e| e.as_ref().ok().map(|(_, c, _)| c)).collect();
        let attempts: u64 = pool.iter().map(|e| e.as_ref().map_or(MAX_CERTIFY_ATTEMPTS, |(_, _, a)| *a)).sum();
        let errors = trials.iter().filter(|x| x.record.error.is_some()).count();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        push(&mut table, "exact_match_rate", rate(matches, n));
        push(&mut table, "alphabet", cfg.alphabet as f64);
        push(&mut table, "certified_codecs", certified.len() as f64);
        push(&mut table, "certification_attempts", attempts as f64);
        if !certified.is_empty() {
            push(&mut table, "max_worst_t", certified.iter().map(|c| c.worst_t).fold(0.0, f64::max));
        }
        if !quant.is_empty() {
            push(&mut table, "max_quant_error_l1", quant.iter().copied().fold(0.0, f64::max));
            push(&mut table, "quant_budget_violations", quant.iter().filter(|&&q| q > 0.05).count() as f64);
        }
        push(&mut table, "over_budget_corruptions", (cell.r + cell.m.div_ceil(10)).min(cell.m) as f64);
        push(&mut table, "over_budget_match_rate", rate(over, n));
        push(&mut table, "noise_l1", cfg.noise_l1);
        if !ratios.is_empty() {
            push(&mut table, "robust_bound_rate", rate(ratios.iter().filter(|&&q| q <= 4.0).count(), n));
            push(&mut table, "max_robust_ratio", ratios.iter().copied().fold(0.0, f64::max));
        }
        push(&mut table, "trial_errors", errors as f64);
        table.records.extend(trials.into_iter().map(|x| x.record));
    }
    Ok(table)
}

fn identity_trial(cfg: &ExperimentConfig, cell: Cell, t: u64) -> TrialRecord {
    let mut record = TrialRecord::new(Experiment::GeometryChecks.name(), cell, t, cfg.master_seed);
    if cell.r == 0 {
        return record;
    }
    let (res, ms) = timed(cfg.record_runtime, || {
        projection_identity_check(cell.m, cell.r, cell.big_r, trial_seed(cfg, t).derive(TAG_SUBSPACE))
    });
    record.runtime_ms = ms;
    match res {
        Ok(id) => {
            record.error_l1 = Some(id.relative_deviation());
            record.success = Some(id.relative_deviation() <= 1e-8);
        }
        Err(e) => {
            record.success = Some(false);
            record.error = Some(e.to_string());
        }
    }
    record
}

/// Projection identity per trial (`error_l1` holds its relative deviation) and
/// projection-length statistics per cell with `d = m`, `k = R`.
pub fn run_geometry_checks(cfg: &ExperimentConfig) -> Result<SummaryTable, HarnessError> {
    let cells = cfg.cells()?;
    let name = Experiment::GeometryChecks.name();
    let results = sweep(&cells, cfg.trials, |cell, t| identity_trial(cfg, cell, t));
    let mut table = SummaryTable::default();
    for (cell, trials) in cells.iter().zip(results) {
        let n = trials.len();
        let push = |table: &mut SummaryTable, metric: &str, value: f64| table.push(name, *cell, n, cfg.master_seed, metric, value);
        if cell.r > 0 {
            let devs: Vec<f64> = trials.iter().filter_map(|t| t.error_l1).collect();
            push(&mut table, "identity_checks", devs.len() as f64);
            push(&mut table, "identity_degenerate", trials.iter().filter(|t| t.error.is_some()).count() as f64);
            push(&mut table, "identity_max_rel_dev", devs.iter().copied().fold(0.0, f64::max));
        }
        let stats = projection_length_stats(cell.m, cell.big_r, cfg.trials, SeedSpec::new(cfg.master_seed, 0).derive(TAG_STATS))?;
        push(&mut table, "mean_sq_ratio", stats.mean_sq_ratio);
        push(&mut table, "std_sq_ratio", stats.std);
        push(&mut table, "expected_sq_ratio", cell.big_r as f64 / cell.m as f64);
        table.records.extend(trials);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(e: Experiment, m: &[usize], r: &[usize], big_r: &[usize], trials: usize) -> ExperimentConfig {
        ExperimentConfig::new(e).grid(m, r, big_r).trials(trials).seed(7)
    }

    #[test]
    fn thresholds() {
        assert_eq!(calibrated_r_star(64, 1), 42);
        assert_eq!(log_threshold(64, 1), 6);
        assert_eq!(calibrated_r_star(10, 0), 0);
    }

    #[test]
    fn sweep_keeps_cell_order() {
        let cells = [Cell { m: 3, r: 0, big_r: 1 }, Cell { m: 4, r: 1, big_r: 2 }];
        let out = sweep(&cells, 3, |c, t| (c.m, t));
        assert_eq!(out, vec![vec![(3, 0), (3, 1), (3, 2)], vec![(4, 0), (4, 1), (4, 2)]]);
    }

    #[test]
    fn phase_without_corruption_always_succeeds() {
        let t = run_phase_transition(&cfg(Experiment::Phase, &[10], &[0], &[3, 6], 5)).unwrap();
        for big_r in [3, 6] {
            let cell = Cell { m: 10, r: 0, big_r };
            assert_eq!(t.metric(cell, "success_rate"), Some(1.0));
            assert_eq!(t.metric(cell, "uniform_certified_rate"), Some(1.0));
        }
        assert_eq!(t.records.len(), 10);
    }

    #[test]
    fn phase_success_is_monotone_trial_by_trial() {
        let t = run_phase_transition(&cfg(Experiment::Phase, &[12], &[2], &[3, 6, 9], 12)).unwrap();
        let cells: Vec<Cell> = [3, 6, 9].iter().map(|&big_r| Cell { m: 12, r: 2, big_r }).collect();
        for k in 0..12 {
            let s: Vec<bool> = cells.iter().map(|&c| t.records_in(c).nth(k).unwrap().success.unwrap()).collect();
            assert!(s.windows(2).all(|w| !w[0] || w[1]), "trial {k}: {s:?}");
        }
        for &c in &cells {
            assert_eq!(t.metric(c, "strict_without_success"), Some(0.0));
        }
        // R = 3 < 2r: no uniform certificate.
        assert_eq!(t.metric(cells[0], "uniform_certified_rate"), Some(0.0));
    }

    #[test]
    fn facets_trivial_and_oracle_cells() {
        let t = run_facets(&cfg(Experiment::Facets, &[6], &[0, 1], &[5], 10)).unwrap();
        assert_eq!(t.metric(Cell { m: 6, r: 0, big_r: 5 }, "full_count_fraction"), Some(1.0));
        assert_eq!(t.metric(Cell { m: 6, r: 1, big_r: 5 }, "oracle_mismatches"), Some(0.0));
        assert!(t.metric(Cell { m: 6, r: 1, big_r: 5 }, "max_facet_count").unwrap() <= 12.0);
    }

    #[test]
    fn necessity_trivial_column() {
        let t = run_necessity(&cfg(Experiment::Necessity, &[8], &[0], &[1, 2], 6)).unwrap();
        assert_eq!(t.metric(Cell { m: 8, r: 0, big_r: 1 }, "uniform_recovery_rate"), Some(1.0));
        assert_eq!(t.metric(Cell { m: 8, r: 0, big_r: 2 }, "uniform_recovery_rate"), Some(1.0));
    }

    #[test]
    fn compressible_signal_meets_bound_with_equality() {
        let f = CompressibleSignal::sample(0.5, 20, None, SeedSpec::new(3, 0)).unwrap();
        assert!(f.within_bound());
        let mut mags: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(mags[0], 1.0);
        assert!((mags[2] - 1.0 / 9.0).abs() < 1e-15);
        let sparse = CompressibleSignal::sample(1.0, 20, Some(3), SeedSpec::new(3, 0)).unwrap();
        assert_eq!(sparse.values().count_nonzero(0.0), 3);
        assert!(CompressibleSignal::sample(1.5, 20, None, SeedSpec::new(3, 0)).is_err());
    }

    #[test]
    fn compressible_sparse_subcase_is_exact() {
        let t = run_compressible(&cfg(Experiment::Compressible, &[40], &[2], &[20], 5)).unwrap();
        assert_eq!(t.metric(Cell { m: 40, r: 2, big_r: 20 }, "exact_rate"), Some(1.0));
    }

    #[test]
    fn roundtrip_without_corruption() {
        let mut c = cfg(Experiment::CodecRoundtrip, &[12], &[0], &[6], 6);
        c.codec_pool = Some(2);
        let t = run_codec_roundtrip(&c).unwrap();
        let cell = Cell { m: 12, r: 0, big_r: 6 };
        assert_eq!(t.metric(cell, "exact_match_rate"), Some(1.0));
        assert_eq!(t.metric(cell, "certified_codecs"), Some(2.0));
        assert!(t.metric(cell, "max_quant_error_l1").unwrap() <= 0.05);
        assert!(run_codec_roundtrip(&cfg(Experiment::CodecRoundtrip, &[12], &[0], &[8], 1)).is_err());
    }

    #[test]
    fn geometry_checks_full_dimension() {
        let t = run_geometry_checks(&cfg(Experiment::GeometryChecks, &[10], &[2], &[9], 20)).unwrap();
        let cell = Cell { m: 10, r: 2, big_r: 9 };
        assert!(t.metric(cell, "identity_max_rel_dev").unwrap() <= 1e-8);
        assert!((t.metric(cell, "expected_sq_ratio").unwrap() - 0.9).abs() < 1e-15);
    }
}
