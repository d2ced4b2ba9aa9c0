//! Scenario runs and parallel sweeps.

use std::time::Instant;

use holoxl::channel::ChannelSet;
use holoxl::frontend::FeasibleSet;
use holoxl::geometry::ConventionalArray;
use holoxl::linalg::CVector;
use holoxl::scenario::{Design, Scenario, ScenarioParams};
use holoxl::wmmse::{fully_digital_rate, hybrid_ad_optimize, IterationRecord, SolverOptions};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{Baseline, ExperimentConfig};
use crate::error::Result;

/// Per-iteration history of one AO run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Initial rate followed by the rate after every iteration.
    pub rates: Vec<f64>,
    pub records: Vec<IterationRecord>,
}

/// One (axis point, seed, method) cell of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub config_hash: String,
    pub axis: String,
    /// Position of `value` on the sweep axis.
    pub point: usize,
    pub value: Option<f64>,
    pub seed: u64,
    /// `UC`, `LP/narrowband`, `fd_upa`, ...
    pub method: String,
    /// SHA-256 of the true HMA channel; shared by every method of a cell.
    pub channel_hash: String,
    /// `tag: message` when the method failed.
    pub error: Option<String>,
    /// Sum rate aggregated over subcarriers, in bits/s/Hz.
    pub rate: f64,
    /// The same rate in bits/s, `Δ_B Σ_s R_s`.
    pub rate_bps: f64,
    /// Rate on the channel the design was optimized on, if different.
    pub design_rate: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_identity_gap: Option<f64>,
    pub runtime_ms: f64,
    pub trace: Option<Trace>,
    /// Final weights with their set, kept when channel export is on.
    pub weights: Option<(FeasibleSet, CVector)>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub records: Vec<ResultRecord>,
    /// True channels per seed, present only for single runs with export on.
    pub channels: Vec<(u64, ChannelSet)>,
}

impl RunOutput {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

/// SHA-256 over the shapes and little-endian entries of every subcarrier.
pub fn channel_hash(set: &ChannelSet) -> String {
    let mut h = Sha256::new();
    for g in &set.matrices {
        h.update((g.nrows() as u64).to_le_bytes());
        h.update((g.ncols() as u64).to_le_bytes());
        for z in g.iter() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn error_tag(e: &holoxl::Error) -> &'static str {
    use holoxl::Error as E;
    match e {
        E::InvalidGeometry(_) | E::SingularGeometry(..) => "geometry",
        E::DimensionMismatch { .. } => "dimension",
        E::Domain(_) => "domain",
        E::IllConditionedCoupling { .. } => "coupling",
        E::NonUnitModulus { .. } | E::Infeasible { .. } => "infeasible",
        E::InvalidParameter(_) => "parameter",
        E::NonFinite(_) => "non_finite",
        E::MonotonicityViolation { .. } => "monotonicity",
    }
}

struct Cell<'a> {
    config: &'a ExperimentConfig,
    hash: &'a str,
    point: usize,
    value: Option<f64>,
    seed: u64,
}

impl Cell<'_> {
    fn blank(&self, method: String, channel_hash: String) -> ResultRecord {
        ResultRecord {
            config_hash: self.hash.to_string(),
            axis: self.config.axis_name().to_string(),
            point: self.point,
            value: self.value,
            seed: self.seed,
            method,
            channel_hash,
            error: None,
            rate: f64::NAN,
            rate_bps: f64::NAN,
            design_rate: None,
            iterations: 0,
            converged: false,
            max_identity_gap: None,
            runtime_ms: 0.0,
            trace: None,
            weights: None,
        }
    }

    fn failed(&self, method: String, channel_hash: String, e: &holoxl::Error) -> ResultRecord {
        let mut r = self.blank(method, channel_hash);
        r.error = Some(format!("{}: {e}", error_tag(e)));
        r
    }

    fn run(&self) -> (Vec<ResultRecord>, Option<ChannelSet>) {
        let params = match self.config.params_at(self.value) {
            Ok(p) => p,
            Err(e) => {
                let mut r = self.blank("scenario".into(), String::new());
                r.error = Some(format!("parameter: {e}"));
                return (vec![r], None);
            }
        };
        let scenario = match Scenario::build(&params, self.seed) {
            Ok(s) => s,
            Err(e) => return (vec![self.failed("scenario".into(), String::new(), &e)], None),
        };
        let hash = channel_hash(&scenario.channels);
        let options = SolverOptions {
            seed: self.config.solver.seed ^ self.seed,
            ..self.config.solver
        };
        let mut out = Vec::new();
        for set in self.config.sets.iter().map(|s| s.0) {
            out.push(self.design(&scenario, set, Design::Proposed, set.to_string(), &hash, &options));
            for b in &self.config.baselines {
                let design = match b {
                    Baseline::Narrowband => Design::Narrowband,
                    Baseline::Plane => Design::PlaneWave,
                    Baseline::PlaneNarrowband => Design::PlaneNarrowband,
                    _ => continue,
                };
                out.push(self.design(&scenario, set, design, format!("{set}/{b}"), &hash, &options));
            }
        }
        for &b in &self.config.baselines {
            if matches!(b, Baseline::Narrowband | Baseline::Plane | Baseline::PlaneNarrowband) {
                continue;
            }
            out.push(self.conventional(&scenario, &params, b, &hash, &options));
        }
        let keep = self.config.export_channels.then(|| scenario.channels.clone());
        (out, keep)
    }

    fn design(&self, sc: &Scenario, set: FeasibleSet, design: Design, method: String, hash: &str, options: &SolverOptions) -> ResultRecord {
        let t = Instant::now();
        match sc.evaluate(set, design, options) {
            Ok(o) => {
                let mut r = self.blank(method, hash.to_string());
                r.rate = o.rate;
                r.rate_bps = o.rate * sc.grid.spacing;
                r.design_rate = (design != Design::Proposed).then_some(o.design_rate);
                r.iterations = o.state.iteration;
                r.converged = o.state.converged;
                r.max_identity_gap = Some(o.state.max_identity_gap());
                r.runtime_ms = t.elapsed().as_secs_f64() * 1e3;
                if self.config.export_channels {
                    r.weights = Some((set, o.state.q.values().clone()));
                }
                r.trace = Some(Trace {
                    rates: o.state.rate_trace,
                    records: o.state.records,
                });
                r
            }
            Err(e) => self.failed(method, hash.to_string(), &e),
        }
    }

    fn conventional(&self, sc: &Scenario, params: &ScenarioParams, b: Baseline, hash: &str, options: &SolverOptions) -> ResultRecord {
        let t = Instant::now();
        let lambda = sc.array.wavelength;
        // Conventional elements are half-wave dipoles whenever coupling is on.
        let dipole = params.coupling.then_some(lambda / 2.0);
        let result = (|| -> holoxl::Result<(f64, Option<Trace>, usize, bool, Option<f64>)> {
            let array = match b {
                Baseline::FdUpa | Baseline::Hybrid => sc.matched_upa()?,
                Baseline::FdUla => sc.matched_ula()?,
                Baseline::FdQuarterWave => ConventionalArray::upa_matching(sc.array.array_length, lambda / 4.0)?,
                _ => unreachable!("design baselines are handled per set"),
            };
            let channels = sc.conventional_channels(&array, dipole)?;
            if b == Baseline::Hybrid {
                let rf = self.config.hybrid_rf_chains.unwrap_or(sc.array.num_microstrips);
                let h = hybrid_ad_optimize(&channels.matrices, rf, &sc.budget, options, false)?;
                let gap = h.run.max_identity_gap();
                let trace = Trace {
                    rates: h.run.rate_trace.clone(),
                    records: h.run.records.clone(),
                };
                Ok((h.rate, Some(trace), h.run.iterations(), h.run.converged, Some(gap)))
            } else {
                Ok((fully_digital_rate(&channels.matrices, &sc.budget)?, None, 0, true, None))
            }
        })();
        match result {
            Ok((rate, trace, iterations, converged, gap)) => {
                let mut r = self.blank(b.name().to_string(), hash.to_string());
                r.rate = rate;
                r.rate_bps = rate * sc.grid.spacing;
                r.iterations = iterations;
                r.converged = converged;
                r.max_identity_gap = gap;
                r.trace = trace;
                r.runtime_ms = t.elapsed().as_secs_f64() * 1e3;
                r
            }
            Err(e) => self.failed(b.name().to_string(), hash.to_string(), &e),
        }
    }
}

/// Every configured set and baseline for one seed at one axis point.
///
/// All methods see the same channel realization. Failures are recorded per
/// method and do not abort the others.
pub fn run_cell(config: &ExperimentConfig, point: usize, seed: u64) -> Result<(Vec<ResultRecord>, Option<ChannelSet>)> {
    config.validate()?;
    let hash = config.hash();
    let value = config.points().get(point).copied().flatten();
    Ok(Cell {
        config,
        hash: &hash,
        point,
        value,
        seed,
    }
    .run())
}

/// Single-scenario records for one seed.
pub fn run_scenario(config: &ExperimentConfig, seed: u64) -> Result<Vec<ResultRecord>> {
    Ok(run_cell(config, 0, seed)?.0)
}

/// All (axis point, seed) cells, in parallel on the current rayon pool.
/// Records come back in (point, seed, method) order regardless of
/// scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let hash = config.hash();
    let points = config.points();
    let cells: Vec<(usize, Option<f64>, u64)> = points
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| config.seeds.iter().map(move |&s| (i, v, s)))
        .collect();
    let results: Vec<(u64, Vec<ResultRecord>, Option<ChannelSet>)> = cells
        .par_iter()
        .map(|&(point, value, seed)| {
            let (records, channels) = Cell {
                config,
                hash: &hash,
                point,
                value,
                seed,
            }
            .run();
            (seed, records, channels)
        })
        .collect();
    let mut records = Vec::new();
    let mut channels = Vec::new();
    for (seed, r, c) in results {
        records.extend(r);
        if let Some(c) = c {
            channels.push((seed, c));
        }
    }
    Ok(RunOutput {
        config: config.clone(),
        config_hash: hash,
        records,
        channels,
    })
}

/// Seed statistics of one (axis point, method) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis: String,
    pub point: usize,
    pub value: Option<f64>,
    pub method: String,
    pub mean_rate: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub std_rate: f64,
    pub mean_rate_bps: f64,
    pub n_seeds: usize,
    pub n_failed: usize,
}

/// Seed-averaged rates in first-appearance order of (point, method).
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, &str)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.point, r.method.as_str())) {
            keys.push((r.point, r.method.as_str()));
        }
    }
    keys.into_iter()
        .map(|(point, method)| {
            let group: Vec<&ResultRecord> = records.iter().filter(|r| r.point == point && r.method == method).collect();
            let ok: Vec<&&ResultRecord> = group.iter().filter(|r| r.error.is_none()).collect();
            let n = ok.len();
            let mean = |f: &dyn Fn(&ResultRecord) -> f64| {
                if n == 0 {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / n as f64
                }
            };
            let mean_rate = mean(&|r| r.rate);
            let std_rate = if n > 1 {
                (ok.iter().map(|r| (r.rate - mean_rate).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            SummaryRow {
                axis: group[0].axis.clone(),
                point,
                value: group[0].value,
                method: method.to_string(),
                mean_rate,
                std_rate,
                mean_rate_bps: mean(&|r| r.rate_bps),
                n_seeds: n,
                n_failed: group.len() - n,
            }
        })
        .collect()
}

/// Seed-mean rate of `method` at axis point `point`, if any seed succeeded.
pub fn mean_rate(rows: &[SummaryRow], point: usize, method: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.point == point && r.method == method && r.n_seeds > 0)
        .map(|r| r.mean_rate)
}
