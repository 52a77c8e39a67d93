use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Phase,
    Facets,
    Necessity,
    Compressible,
    CodecRoundtrip,
    GeometryChecks,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Phase,
        Experiment::Facets,
        Experiment::Necessity,
        Experiment::Compressible,
        Experiment::CodecRoundtrip,
        Experiment::GeometryChecks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Phase => "phase",
            Self::Facets => "facets",
            Self::Necessity => "necessity",
            Self::Compressible => "compressible",
            Self::CodecRoundtrip => "codec-roundtrip",
            Self::GeometryChecks => "geometry-checks",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(HarnessError::Config(format!("unknown format `{s}`"))),
        }
    }
}

/// Parses `7`, `10:90:10` (inclusive stop) or a comma-separated mix of both.
pub fn parse_grid(s: &str) -> Result<Vec<usize>, HarnessError> {
    let bad = |why: &str| HarnessError::Config(format!("bad grid `{s}`: {why}"));
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad("expected non-negative integers"));
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step == 0 {
                    return Err(bad("step must be positive"));
                }
                if a > b {
                    return Err(bad("start exceeds stop"));
                }
                out.extend((a..=b).step_by(step));
            }
            _ => return Err(bad("use start:stop:step")),
        }
    }
    Ok(out)
}

/// One `(m, r, R)` cell of a sweep. `n = m - R` is the code dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub m: usize,
    pub r: usize,
    pub big_r: usize,
}

impl Cell {
    pub fn n(&self) -> usize {
        self.m - self.big_r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub m: Vec<usize>,
    /// Code dimensions, used only when `big_r` is empty (`R = m - n`).
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    pub big_r: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    /// Compressibility exponent of the compressible experiment.
    pub p: f64,
    /// Alphabet `{1, ..., alphabet}` of the quantized round trip.
    pub alphabet: i64,
    /// `||h||_1` of the dense noise in the robustness check.
    pub noise_l1: f64,
    /// Share this many certified codecs per cell instead of one per trial.
    pub codec_pool: Option<usize>,
    /// Record wall-clock time per trial. Off by default since it breaks byte stability.
    pub record_runtime: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            m: Vec::new(),
            n: Vec::new(),
            r: Vec::new(),
            big_r: Vec::new(),
            trials: 1,
            master_seed: 0,
            output_path: None,
            format: OutputFormat::Csv,
            p: 0.5,
            alphabet: 8,
            noise_l1: 0.01,
            codec_pool: None,
            record_runtime: false,
        }
    }

    pub fn grid(mut self, m: &[usize], r: &[usize], big_r: &[usize]) -> Self {
        self.m = m.to_vec();
        self.r = r.to_vec();
        self.big_r = big_r.to_vec();
        self
    }

    pub fn trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    /// The validated cells in `m`, then `r`, then `R` order.
    pub fn cells(&self) -> Result<Vec<Cell>, HarnessError> {
        let err = |s: String| Err(HarnessError::Config(s));
        if self.m.is_empty() || self.r.is_empty() {
            return err("m and r grids must be nonempty".into());
        }
        if self.big_r.is_empty() && self.n.is_empty() {
            return err("either the R grid or the n grid must be given".into());
        }
        if self.trials == 0 {
            return err("trials must be at least 1".into());
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return err(format!("p = {} outside (0, 1]", self.p));
        }
        if self.alphabet < 1 {
            return err("alphabet must be at least 1".into());
        }
        if !(self.noise_l1 >= 0.0 && self.noise_l1.is_finite()) {
            return err("noise must be finite and non-negative".into());
        }
        if self.codec_pool == Some(0) {
            return err("codec pool must be positive".into());
        }
        let mut cells = Vec::new();
        for &m in &self.m {
            let rs: Vec<usize> = if self.big_r.is_empty() {
                self.n.iter().map(|&n| m.saturating_sub(n)).collect()
            } else {
                self.big_r.clone()
            };
            for &r in &self.r {
                if r >= m {
                    return err(format!("r = {r} must be below m = {m}"));
                }
                for &big_r in &rs {
                    if big_r == 0 || big_r >= m {
                        return err(format!("R = {big_r} must satisfy 1 <= R < m = {m}"));
                    }
                    cells.push(Cell { m, r, big_r });
                }
            }
        }
        Ok(cells)
    }
}
