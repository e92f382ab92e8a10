//! Grid expansion, parallel trial execution and aggregation.
//!
//! Work is split into units of one grid point × one codebook. Every random
//! draw is seeded from the master seed and the coordinates it depends on,
//! never from execution order, so output is identical for any thread count
//! and adding or removing techniques leaves the other rows untouched.

use anyhow::Context;
use rayon::prelude::*;

use holodecode_core::channel::ChannelConfig;
use holodecode_core::lasso::LambdaPolicy;
use holodecode_core::metrics::{info_per_storage_bit, info_rate, mean_ci95};
use holodecode_core::rng::{derive_seed, rng_for};
use holodecode_core::{
    analytic_covariance, encode_sequence, Codebook, CovarianceModel, SymbolSequence, Technique, TechniqueParams,
};

use crate::config::ExperimentConfig;
use crate::record::SweepRecord;

const TAG_CODEBOOK: u64 = 1;
const TAG_SEQUENCE: u64 = 2;
const TAG_NOISE: u64 = 3;
/// Seed component standing in for an absent channel parameter.
const ABSENT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub n: usize,
    pub d: usize,
    pub v: usize,
    pub channel: ChannelConfig,
}

impl ExperimentConfig {
    /// Grid points ordered by `D`, `n`, `v`, then channel. When clipping is
    /// swept an unclipped reference point precedes the clipped ones.
    pub fn grid(&self) -> Vec<GridPoint> {
        let kappas: Vec<Option<u32>> = if self.kappas.is_empty() {
            vec![None]
        } else {
            std::iter::once(None).chain(self.kappas.iter().copied().map(Some)).collect()
        };
        let ebn0s: Vec<Option<f64>> = if self.ebn0s.is_empty() {
            vec![None]
        } else {
            self.ebn0s.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &d in &self.ds {
            for &n in &self.ns {
                for v in self.v_values(n, d) {
                    for &kappa in &kappas {
                        for &ebn0_db in &ebn0s {
                            let channel = ChannelConfig {
                                ebn0_db,
                                kappa,
                                rescale: self.rescale,
                            };
                            out.push(GridPoint { n, d, v, channel });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One output column group: a technique with the solver settings it runs
/// under. Techniques that use `λ` get one variant per configured `λ`.
#[derive(Debug, Clone, Copy)]
struct Variant {
    technique: Technique,
    params: TechniqueParams,
}

impl Variant {
    fn lambda_frac(&self) -> Option<f64> {
        match (self.technique.uses_lambda(), self.params.lambda) {
            (true, LambdaPolicy::Relative(f)) => Some(f),
            _ => None,
        }
    }
}

fn variants(cfg: &ExperimentConfig) -> Vec<Variant> {
    let mut out = Vec::new();
    for &technique in &cfg.techniques {
        let lambdas = if technique.uses_lambda() { &cfg.lambdas[..] } else { &cfg.lambdas[..1] };
        for &lambda in lambdas {
            out.push(Variant {
                technique,
                params: TechniqueParams { lambda, ..cfg.params },
            });
        }
    }
    out
}

/// Per-variant outcomes of one unit.
#[derive(Debug, Clone)]
struct TechniqueTrials {
    accuracy: Vec<f64>,
    flops_per_symbol: Vec<f64>,
    unconverged: usize,
}

#[derive(Debug)]
struct UnitOutcome {
    per_technique: Vec<Result<TechniqueTrials, String>>,
    /// Covariance build cost for this codebook, when one was built.
    setup_flops: Option<u64>,
}

fn seed_part_f64(x: Option<f64>) -> u64 {
    x.map_or(ABSENT, f64::to_bits)
}

fn run_unit(cfg: &ExperimentConfig, vars: &[Variant], gp: &GridPoint, c: usize) -> UnitOutcome {
    let fail_all = |msg: String| UnitOutcome {
        per_technique: vars.iter().map(|_| Err(msg.clone())).collect(),
        setup_flops: None,
    };
    let (n, d, v) = (gp.n as u64, gp.d as u64, gp.v as u64);
    if gp.v == 0 {
        return fail_all("sequence length is zero".into());
    }
    let cb = match Codebook::generate(gp.n, gp.d, derive_seed(cfg.seed, &[TAG_CODEBOOK, n, d, c as u64])) {
        Ok(cb) => cb,
        Err(e) => return fail_all(e.to_string()),
    };
    let cov: Option<Result<CovarianceModel, String>> = vars
        .iter()
        .any(|x| x.technique.needs_covariance())
        .then(|| analytic_covariance(&cb, gp.v).map_err(|e| e.to_string()));
    let setup_flops = cov.as_ref().and_then(|r| r.as_ref().ok()).map(CovarianceModel::setup_flops);

    let mut per_technique: Vec<Result<TechniqueTrials, String>> = vars
        .iter()
        .map(|x| match (&cov, x.technique.needs_covariance()) {
            (Some(Err(e)), true) => Err(format!("covariance: {e}")),
            _ => Ok(TechniqueTrials {
                accuracy: Vec::with_capacity(cfg.sequences),
                flops_per_symbol: Vec::with_capacity(cfg.sequences),
                unconverged: 0,
            }),
        })
        .collect();

    for t in 0..cfg.sequences as u64 {
        let truth = SymbolSequence::random(gp.v, gp.d, &mut rng_for(cfg.seed, &[TAG_SEQUENCE, n, d, v, c as u64, t]));
        let clean = match encode_sequence(&cb, &truth) {
            Ok(y) => y,
            Err(e) => return fail_all(e.to_string()),
        };
        let mut noise_rng = rng_for(
            cfg.seed,
            &[
                TAG_NOISE,
                n,
                d,
                v,
                c as u64,
                t,
                seed_part_f64(gp.channel.ebn0_db),
                gp.channel.kappa.map_or(ABSENT, u64::from),
            ],
        );
        let y = match gp.channel.apply(&clean, gp.v, gp.d, &mut noise_rng) {
            Ok(y) => y,
            Err(e) => return fail_all(e.to_string()),
        };
        for (var, slot) in vars.iter().zip(per_technique.iter_mut()) {
            let Ok(acc) = slot else { continue };
            let cov_ref = cov.as_ref().and_then(|r| r.as_ref().ok());
            match var.technique.decode(y.as_slice(), &cb, gp.v, &var.params, cov_ref) {
                Ok(res) => {
                    let hits = res
                        .sequence
                        .symbols()
                        .iter()
                        .zip(truth.symbols())
                        .filter(|(a, b)| a == b)
                        .count();
                    acc.accuracy.push(hits as f64 / gp.v as f64);
                    acc.flops_per_symbol.push(res.flops() as f64 / gp.v as f64);
                    if !res.converged {
                        acc.unconverged += 1;
                    }
                }
                Err(e) => *slot = Err(e.to_string()),
            }
        }
    }
    UnitOutcome {
        per_technique,
        setup_flops,
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn aggregate(cfg: &ExperimentConfig, vars: &[Variant], gp: &GridPoint, units: &[UnitOutcome]) -> Vec<SweepRecord> {
    let setup: Vec<f64> = units
        .iter()
        .filter_map(|u| u.setup_flops)
        .map(|f| f as f64 / gp.v.max(1) as f64)
        .collect();
    vars.iter()
        .enumerate()
        .map(|(i, var)| {
            let tech = var.technique;
            let mut accuracy = Vec::new();
            let mut flops = Vec::new();
            let mut unconverged = 0;
            let mut error = None;
            for u in units {
                match &u.per_technique[i] {
                    Ok(t) => {
                        accuracy.extend_from_slice(&t.accuracy);
                        flops.extend_from_slice(&t.flops_per_symbol);
                        unconverged += t.unconverged;
                    }
                    Err(e) => {
                        error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let mut rec = SweepRecord {
                technique: tech.name().to_string(),
                n: gp.n,
                d: gp.d,
                v: gp.v,
                ebn0_db: gp.channel.ebn0_db,
                kappa: gp.channel.kappa,
                accuracy: f64::NAN,
                accuracy_ci95: f64::NAN,
                i_tot: f64::NAN,
                i_dim: f64::NAN,
                i_per_storage_bit: None,
                flops_per_symbol: f64::NAN,
                setup_flops_per_symbol: if tech.needs_covariance() { mean(&setup) } else { 0.0 },
                trials: accuracy.len(),
                seed: cfg.seed,
                r: cfg.params.passes,
                lambda_frac: var.lambda_frac(),
                status: "ok".into(),
            };
            if let Some(e) = error {
                rec.status = format!("error: {e}");
                return rec;
            }
            let (a, ci) = mean_ci95(&accuracy);
            rec.accuracy = a;
            rec.accuracy_ci95 = ci;
            match info_rate(a, gp.d, gp.v, gp.n) {
                Ok((tot, dim)) => {
                    rec.i_tot = tot;
                    rec.i_dim = dim;
                }
                Err(e) => rec.status = format!("error: {e}"),
            }
            rec.i_per_storage_bit = gp
                .channel
                .kappa
                .and_then(|k| info_per_storage_bit(a, gp.d, gp.v, gp.n, k).ok());
            rec.flops_per_symbol = mean(&flops);
            if unconverged > 0 && rec.status == "ok" {
                rec.status = format!("unconverged {unconverged}/{}", accuracy.len());
            }
            rec
        })
        .collect()
}

/// Runs every grid point of `cfg` and returns one record per grid point
/// and technique (and `λ`, for LASSO-based techniques), in grid order then
/// technique order.
pub fn run_sweep(cfg: &ExperimentConfig) -> anyhow::Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let grid = cfg.grid();
    let vars = variants(cfg);
    let units: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..cfg.codebooks).map(move |c| (g, c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .context("building thread pool")?;
    let outcomes: Vec<UnitOutcome> =
        pool.install(|| units.par_iter().map(|&(g, c)| run_unit(cfg, &vars, &grid[g], c)).collect());
    Ok(grid
        .iter()
        .zip(outcomes.chunks(cfg.codebooks))
        .flat_map(|(gp, chunk)| aggregate(cfg, &vars, gp, chunk))
        .collect())
}

/// Rows of `records` belonging to `technique`.
pub fn rows_for<'a>(records: &'a [SweepRecord], technique: Technique) -> impl Iterator<Item = &'a SweepRecord> {
    records.iter().filter(move |r| r.technique == technique.name())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Family;

    fn tiny(family: Family) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(family);
        c.ns = vec![64];
        c.ds = vec![5];
        c.codebooks = 2;
        c.sequences = 2;
        c
    }

    #[test]
    fn grid_order_and_reference_row() {
        let mut c = tiny(Family::Precision);
        c.vs = Some(vec![4, 8]);
        c.kappas = vec![1, 3];
        let g = c.grid();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0].channel.kappa, None);
        assert_eq!(g[1].channel.kappa, Some(1));
        assert_eq!(g[3].v, 8);
    }

    #[test]
    fn noise_grid_uses_derived_length() {
        let mut c = tiny(Family::Noise);
        c.ebn0s = vec![0.0, 5.0];
        let g = c.grid();
        assert_eq!(g.len(), 2);
        assert!(g.iter().all(|p| p.v == 14 && p.channel.kappa.is_none()));
    }

    #[test]
    fn zero_length_gives_error_rows() {
        let mut c = tiny(Family::Length);
        c.vs = Some(vec![0]);
        c.techniques = vec![Technique::Codebook];
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].status.starts_with("error"));
    }

    #[test]
    fn lambda_sweep_expands_lasso_rows_only() {
        let mut c = tiny(Family::Length);
        c.vs = Some(vec![6]);
        c.techniques = vec![Technique::Codebook, Technique::Cd];
        c.lambdas = vec![LambdaPolicy::Relative(0.01), LambdaPolicy::Relative(0.2), LambdaPolicy::Absolute(3.0)];
        let rows = run_sweep(&c).unwrap();
        let got: Vec<_> = rows.iter().map(|r| (r.technique.as_str(), r.lambda_frac)).collect();
        assert_eq!(
            got,
            vec![("codebook", None), ("cd", Some(0.01)), ("cd", Some(0.2)), ("cd", None)]
        );
    }

    #[test]
    fn setup_cost_only_on_lr_rows() {
        let mut c = tiny(Family::Length);
        c.vs = Some(vec![6]);
        c.techniques = vec![Technique::Codebook, Technique::Lr];
        let rows = run_sweep(&c).unwrap();
        assert_eq!(rows[0].setup_flops_per_symbol, 0.0);
        assert!(rows[1].setup_flops_per_symbol > 0.0);
        assert_eq!(rows[1].trials, 4);
    }
}
