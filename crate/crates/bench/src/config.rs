//! Experiment configuration from CLI flags and/or a `key = value` file.
//!
//! Both sources go through [`ConfigBuilder::set`] with the same keys (the
//! long flag names), so a file line `lambda-frac = 0.1` and the flag
//! `--lambda-frac 0.1` are interchangeable. Flags override the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use holodecode_core::feedback::MpRestart;
use holodecode_core::lasso::LambdaPolicy;
use holodecode_core::{Technique, TechniqueParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Noiseless sweep over sequence length.
    Length,
    /// Eb/N0 sweep at coding rate ≈ 0.5.
    Noise,
    /// Clipping threshold sweep at fixed `v`.
    Precision,
    /// Sweep over the hypervector dimension `n`.
    Dimension,
}

impl FromStr for Family {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "length" => Ok(Family::Length),
            "noise" => Ok(Family::Noise),
            "precision" => Ok(Family::Precision),
            "dimension" => Ok(Family::Dimension),
            other => bail!("unknown family '{other}' (expected length, noise, precision or dimension)"),
        }
    }
}

pub const DEFAULT_CODEBOOKS: usize = 5;
pub const DEFAULT_SEQUENCES: usize = 5;
pub const FULL_CODEBOOKS: usize = 20;
pub const FULL_SEQUENCES: usize = 10;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_KAPPAS: [u32; 9] = [1, 3, 7, 15, 31, 63, 127, 255, 511];
/// λ fractions swept by the `lambda-calibration` preset.
pub const LAMBDA_CALIBRATION: [f64; 4] = [0.01, 0.05, 0.1, 0.2];
pub const DIMENSION_NS: [usize; 5] = [128, 256, 512, 1024, 2048];

/// `v` at the hybrid information-rate peak for `n = 500`.
pub fn peak_v(d: usize, n: usize) -> usize {
    match d {
        5 => 325,
        15 => 170,
        100 => 90,
        _ => coding_rate_half_v(d, n),
    }
}

/// `v` for the clipping sweep: inside the hybrid's high-fidelity regime at
/// `n = 500` but well short of its peak, where a clipped input sends the
/// hybrid through all `v` rounds at a cost cubic in `v`.
pub fn precision_v(d: usize, n: usize) -> usize {
    match d {
        5 => 150,
        15 => 90,
        100 => 60,
        _ => coding_rate_half_v(d, n),
    }
}

/// `v` for the dimension sweep: a length where the four techniques differ
/// at `n ≈ 500`.
pub fn dimension_v(d: usize, n: usize) -> usize {
    match d {
        5 => 100,
        15 => 70,
        100 => 45,
        _ => coding_rate_half_v(d, 500.min(n)),
    }
}

/// `round(n / (2·log2 D))`; zero when `D < 2`.
pub fn coding_rate_half_v(d: usize, n: usize) -> usize {
    if d < 2 {
        return 0;
    }
    (n as f64 / (2.0 * (d as f64).log2())).round() as usize
}

/// Length-sweep grid per `D`.
pub fn length_grid(d: usize) -> Vec<usize> {
    if d == 5 {
        (25..=400).step_by(25).collect()
    } else {
        (10..=300).step_by(10).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub ns: Vec<usize>,
    pub ds: Vec<usize>,
    /// Explicit `v` list; `None` picks the family default per `(n, D)`.
    pub vs: Option<Vec<usize>>,
    pub ebn0s: Vec<f64>,
    pub kappas: Vec<u32>,
    pub techniques: Vec<Technique>,
    pub codebooks: usize,
    pub sequences: usize,
    pub seed: u64,
    /// Solver settings; `params.lambda` is replaced by each entry of
    /// `lambdas` in turn for techniques that use it.
    pub params: TechniqueParams,
    pub lambdas: Vec<LambdaPolicy>,
    /// Power-matching rescale after clipping.
    pub rescale: bool,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn defaults(family: Family) -> Self {
        let non_tree: Vec<Technique> = Technique::ALL.iter().copied().filter(|&t| t != Technique::Tree).collect();
        let (ns, ebn0s, kappas, techniques) = match family {
            Family::Length => (vec![500], vec![], vec![], non_tree),
            Family::Noise => (
                vec![500],
                (-10..=20).map(f64::from).collect(),
                vec![],
                Technique::ALL.to_vec(),
            ),
            Family::Precision => (vec![500], vec![], DEFAULT_KAPPAS.to_vec(), non_tree),
            Family::Dimension => (
                DIMENSION_NS.to_vec(),
                vec![],
                vec![],
                vec![Technique::Codebook, Technique::LrMp, Technique::Cd, Technique::CdLrMp],
            ),
        };
        Self {
            family,
            ns,
            ds: vec![5, 15, 100],
            vs: None,
            ebn0s,
            kappas,
            techniques,
            codebooks: DEFAULT_CODEBOOKS,
            sequences: DEFAULT_SEQUENCES,
            seed: DEFAULT_SEED,
            params: TechniqueParams::default(),
            lambdas: vec![TechniqueParams::default().lambda],
            rescale: true,
            threads: None,
        }
    }

    /// `v` values for one `(n, D)` pair.
    pub fn v_values(&self, n: usize, d: usize) -> Vec<usize> {
        if let Some(vs) = &self.vs {
            return vs.clone();
        }
        match self.family {
            Family::Length => length_grid(d),
            Family::Noise => vec![coding_rate_half_v(d, n)],
            Family::Precision => vec![precision_v(d, n)],
            Family::Dimension => vec![dimension_v(d, n)],
        }
    }

    pub fn trials(&self) -> usize {
        self.codebooks * self.sequences
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.techniques.is_empty() {
            bail!("technique list is empty");
        }
        if self.ns.is_empty() || self.ds.is_empty() {
            bail!("n and D lists must be non-empty");
        }
        if self.ns.contains(&0) || self.ds.contains(&0) {
            bail!("n and D must be positive");
        }
        if self.codebooks == 0 || self.sequences == 0 {
            bail!("codebooks and sequences must be positive");
        }
        if self.kappas.contains(&0) {
            bail!("kappa must be at least 1");
        }
        if self.ebn0s.iter().any(|e| !e.is_finite()) {
            bail!("Eb/N0 values must be finite");
        }
        if self.params.passes == 0 {
            bail!("r must be at least 1");
        }
        if self.params.tree.branching == 0 || self.params.tree.beam == 0 {
            bail!("K and beam must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if self.lambdas.is_empty() {
            bail!("lambda list is empty");
        }
        for l in &self.lambdas {
            match *l {
                LambdaPolicy::Relative(f) | LambdaPolicy::Absolute(f) if !(f >= 0.0 && f.is_finite()) => {
                    bail!("lambda must be finite and non-negative")
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Accumulates `key = value` settings and resolves family defaults.
#[derive(Debug, Default, Clone)]
pub struct ConfigBuilder {
    family: Option<Family>,
    ns: Option<Vec<usize>>,
    ds: Option<Vec<usize>>,
    vs: Option<Vec<usize>>,
    ebn0s: Option<Vec<f64>>,
    kappas: Option<Vec<u32>>,
    techniques: Option<Vec<Technique>>,
    codebooks: Option<usize>,
    sequences: Option<usize>,
    seed: Option<u64>,
    lambda: Option<Vec<LambdaPolicy>>,
    tol: Option<f64>,
    passes: Option<usize>,
    branching: Option<usize>,
    beam: Option<usize>,
    restart: Option<MpRestart>,
    rescale: Option<bool>,
    threads: Option<usize>,
    out: Option<PathBuf>,
}

fn parse_bool(v: &str) -> anyhow::Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => bail!("expected a boolean, got '{other}'"),
    }
}

fn parse_scalar<T: FromStr>(v: &str) -> anyhow::Result<T>
where
    T::Err: std::fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| anyhow!("'{}': {e}", v.trim()))
}

/// Comma-separated items, each a value or an inclusive `start:stop:step`.
pub fn parse_int_list(spec: &str) -> anyhow::Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_scalar(x)?),
            [a, b] | [a, b, _] => {
                let (a, b): (usize, usize) = (parse_scalar(a)?, parse_scalar(b)?);
                let step: usize = if parts.len() == 3 { parse_scalar(parts[2])? } else { 1 };
                if step == 0 || b < a {
                    bail!("bad range '{item}'");
                }
                out.extend((a..=b).step_by(step));
            }
            _ => bail!("bad range '{item}'"),
        }
    }
    if out.is_empty() {
        bail!("empty list '{spec}'");
    }
    Ok(out)
}

/// Like [`parse_int_list`] for reals; ranges are generated by index so
/// values do not accumulate rounding drift.
pub fn parse_float_list(spec: &str) -> anyhow::Result<Vec<f64>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_scalar(x)?),
            [a, b] | [a, b, _] => {
                let (a, b): (f64, f64) = (parse_scalar(a)?, parse_scalar(b)?);
                let step: f64 = if parts.len() == 3 { parse_scalar(parts[2])? } else { 1.0 };
                if !(step > 0.0) || b < a {
                    bail!("bad range '{item}'");
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| a + step * i as f64));
            }
            _ => bail!("bad range '{item}'"),
        }
    }
    if out.is_empty() {
        bail!("empty list '{spec}'");
    }
    Ok(out)
}

impl ConfigBuilder {
    /// Applies one setting. Keys are the long flag names without dashes
    /// prefix; `_` and `-` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        let k = key.trim().trim_start_matches("--").replace('_', "-");
        let ctx = || format!("invalid value for '{k}'");
        match k.as_str() {
            "family" => self.family = Some(value.parse().with_context(ctx)?),
            "n" => self.ns = Some(parse_int_list(value).with_context(ctx)?),
            "D" | "d" => self.ds = Some(parse_int_list(value).with_context(ctx)?),
            "v" => self.vs = Some(parse_int_list(value).with_context(ctx)?),
            "ebn0" => self.ebn0s = Some(parse_float_list(value).with_context(ctx)?),
            "kappa" => {
                let ks = parse_int_list(value).with_context(ctx)?;
                let ks = ks
                    .into_iter()
                    .map(|k| u32::try_from(k).map_err(|_| anyhow!("kappa {k} too large")))
                    .collect::<anyhow::Result<Vec<u32>>>()?;
                self.kappas = Some(ks);
            }
            "techniques" => {
                let ts = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Technique>().map_err(anyhow::Error::from))
                    .collect::<anyhow::Result<Vec<_>>>()
                    .with_context(ctx)?;
                self.techniques = Some(ts);
            }
            "codebooks" => self.codebooks = Some(parse_scalar(value).with_context(ctx)?),
            "sequences" => self.sequences = Some(parse_scalar(value).with_context(ctx)?),
            "seed" => self.seed = Some(parse_scalar(value).with_context(ctx)?),
            "lambda-frac" => {
                let fs = parse_float_list(value).with_context(ctx)?;
                self.lambda = Some(fs.into_iter().map(LambdaPolicy::Relative).collect());
            }
            "lambda" => {
                let fs = parse_float_list(value).with_context(ctx)?;
                self.lambda = Some(fs.into_iter().map(LambdaPolicy::Absolute).collect());
            }
            "lambda-calibration" => {
                if parse_bool(value).with_context(ctx)? {
                    self.lambda = Some(LAMBDA_CALIBRATION.iter().copied().map(LambdaPolicy::Relative).collect());
                }
            }
            "tol" => self.tol = Some(parse_scalar(value).with_context(ctx)?),
            "r" => self.passes = Some(parse_scalar(value).with_context(ctx)?),
            "K" | "k" => self.branching = Some(parse_scalar(value).with_context(ctx)?),
            "beam" => self.beam = Some(parse_scalar(value).with_context(ctx)?),
            "restart" => {
                self.restart = Some(match value.trim() {
                    "selective" => MpRestart::Selective,
                    "carry" => MpRestart::Carry,
                    other => bail!("invalid value for 'restart': '{other}' (expected selective or carry)"),
                })
            }
            "rescale" => self.rescale = Some(parse_bool(value).with_context(ctx)?),
            "threads" => self.threads = Some(parse_scalar(value).with_context(ctx)?),
            "full-scale" => {
                if parse_bool(value).with_context(ctx)? {
                    self.codebooks = Some(FULL_CODEBOOKS);
                    self.sequences = Some(FULL_SEQUENCES);
                }
            }
            "out" => self.out = Some(PathBuf::from(value.trim())),
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> anyhow::Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected key = value", i + 1))?;
            self.set(k, v).with_context(|| format!("{origin}:{}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_str(&text, &path.display().to_string())
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    pub fn build(&self) -> anyhow::Result<ExperimentConfig> {
        let family = self.family.ok_or_else(|| anyhow!("'family' is required"))?;
        let mut c = ExperimentConfig::defaults(family);
        macro_rules! take {
            ($src:ident => $dst:expr) => {
                if let Some(x) = &self.$src {
                    $dst = x.clone();
                }
            };
        }
        take!(ns => c.ns);
        take!(ds => c.ds);
        if self.vs.is_some() {
            c.vs = self.vs.clone();
        }
        take!(ebn0s => c.ebn0s);
        take!(kappas => c.kappas);
        take!(techniques => c.techniques);
        take!(codebooks => c.codebooks);
        take!(sequences => c.sequences);
        take!(seed => c.seed);
        take!(lambda => c.lambdas);
        c.params.lambda = c.lambdas[0];
        take!(tol => c.params.tol);
        take!(passes => c.params.passes);
        take!(branching => c.params.tree.branching);
        take!(beam => c.params.tree.beam);
        take!(restart => c.params.restart);
        take!(rescale => c.rescale);
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Parser)]
#[command(name = "holodecode", version, about = "Decode permutation-bound sequence hypervectors and benchmark the decoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one sweep family and write a CSV of aggregated results.
    Sweep(SweepArgs),
}

/// Flags mirror the config-file keys one to one.
#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// length | noise | precision | dimension
    #[arg(long)]
    pub family: Option<String>,
    /// Dimensions, e.g. `500` or `128,256,512`.
    #[arg(long)]
    pub n: Option<String>,
    /// Codebook sizes, e.g. `5,15,100`.
    #[arg(long = "D")]
    pub d: Option<String>,
    /// Sequence lengths, e.g. `25:400:25`.
    #[arg(long)]
    pub v: Option<String>,
    /// Eb/N0 grid in dB, e.g. `-10:20:1`.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: Option<String>,
    /// Clipping thresholds, e.g. `1,3,7`.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Comma-separated technique names.
    #[arg(long)]
    pub techniques: Option<String>,
    #[arg(long)]
    pub codebooks: Option<String>,
    #[arg(long)]
    pub sequences: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// λ as a fraction of λ_max of the current residual; a list sweeps λ.
    #[arg(long)]
    pub lambda_frac: Option<String>,
    /// Absolute λ (overrides the fraction).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Sweep λ over 0.01, 0.05, 0.1 and 0.2 of λ_max.
    #[arg(long)]
    pub lambda_calibration: bool,
    /// Relative LASSO stopping tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    /// EA pass cap.
    #[arg(long)]
    pub r: Option<String>,
    /// Tree search branching.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Tree search beam width.
    #[arg(long)]
    pub beam: Option<String>,
    /// MP restart policy: selective | carry
    #[arg(long)]
    pub restart: Option<String>,
    /// Rescale clipped vectors to the unclipped power (true | false).
    #[arg(long)]
    pub rescale: Option<String>,
    #[arg(long)]
    pub threads: Option<String>,
    /// Use 20 codebooks × 10 sequences.
    #[arg(long)]
    pub full_scale: bool,
    /// Output CSV path (default `results.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SweepArgs {
    /// Config file first, then flags.
    pub fn resolve(&self) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
        let mut b = ConfigBuilder::default();
        if let Some(path) = &self.config {
            b.apply_file(path)?;
        }
        let pairs: [(&str, &Option<String>); 20] = [
            ("family", &self.family),
            ("n", &self.n),
            ("D", &self.d),
            ("v", &self.v),
            ("ebn0", &self.ebn0),
            ("kappa", &self.kappa),
            ("techniques", &self.techniques),
            ("codebooks", &self.codebooks),
            ("sequences", &self.sequences),
            ("seed", &self.seed),
            ("lambda-frac", &self.lambda_frac),
            ("lambda", &self.lambda),
            ("tol", &self.tol),
            ("r", &self.r),
            ("K", &self.k),
            ("beam", &self.beam),
            ("restart", &self.restart),
            ("rescale", &self.rescale),
            ("threads", &self.threads),
            ("out", &None),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                b.set(k, v)?;
            }
        }
        if self.full_scale {
            b.set("full-scale", "true")?;
        }
        if self.lambda_calibration {
            b.set("lambda-calibration", "true")?;
        }
        if let Some(out) = &self.out {
            b.set("out", &out.to_string_lossy())?;
        }
        let out = b.out().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("results.csv"));
        Ok((b.build()?, out))
    }
}
