use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

/// Options shared by every subcommand. Each may also come from the JSON
/// object given by `--config`; a flag on the command line wins.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Word equation, e.g. "a x a^-1 x^-1".
    #[arg(long)]
    pub word: Option<String>,
    /// Generator preset: sanov, or elementaryN for the transvections of SL_N(Z).
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file {"names": [...], "generators": [matrix, ...]} with matrices
    /// as row-major arrays of decimal strings.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Word lengths, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    /// Random words per length.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Seed for the SplitMix64 stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial window constant.
    #[arg(long)]
    pub c0: Option<u64>,
    /// Largest window constant.
    #[arg(long)]
    pub c0_max: Option<u64>,
    /// Element cap for group exploration and enumeration.
    #[arg(long)]
    pub cap_elements: Option<u64>,
    /// Bit cap on matrix entries during exact verification.
    #[arg(long)]
    pub cap_bits: Option<u64>,
    /// Search radius (complexity oracle, growth oracle, injectivity search).
    #[arg(long)]
    pub radius: Option<u32>,
    /// Primes, comma separated; `lo..hi` stands for every prime in [lo, hi].
    #[arg(long)]
    pub primes: Option<String>,
    /// Finite group: cN, sl2-P, psl2-P (P <= 13) or a JSON table file.
    #[arg(long)]
    pub group: Option<String>,
    /// Longest candidate mixed identity.
    #[arg(long)]
    pub max_length: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format for growth and sweeps (default csv); other commands write JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Record wall-clock timings; without it every timing field is zero.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

macro_rules! merge_fields {
    ($cli:ident, $cfg:ident; $($f:ident),*) => {
        $( if $cli.$f.is_none() { $cli.$f = $cfg.$f.take(); } )*
    };
}

impl Flags {
    /// Fills unset flags from a config file.
    pub fn merge_config(mut self, path: &Path) -> Result<Flags, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: Flags = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        merge_fields!(self, cfg; word, preset, matrix_file, n, samples, seed, c0, c0_max,
            cap_elements, cap_bits, radius, primes, group, max_length, out, format);
        self.timings |= cfg.timings;
        Ok(self)
    }

    /// Names of the flags that are set.
    pub fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        macro_rules! check {
            ($($f:ident => $name:literal),*) => { $( if self.$f.is_some() { out.push($name); } )* };
        }
        check!(word => "word", preset => "preset", matrix_file => "matrix-file", n => "n",
            samples => "samples", seed => "seed", c0 => "c0", c0_max => "c0-max",
            cap_elements => "cap-elements", cap_bits => "cap-bits", radius => "radius",
            primes => "primes", group => "group", max_length => "max-length", out => "out",
            format => "format");
        if self.timings {
            out.push("timings");
        }
        out
    }
}

pub fn parse_u64_list(text: &str, what: &str) -> Result<Vec<u64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|_| format!("{what}: {s:?} is not a nonnegative integer")))
        .collect()
}
