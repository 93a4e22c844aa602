//! End-to-end witness search: prime selection, BFS in `SL_d(p)`, lifting
//! and exact verification.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::Serialize;

use crate::cayley::{Explorer, DEFAULT_CAP};
use crate::error::{Error, FailedClause, PrimeDiagnostic, Result};
use crate::intmat::{eval_const_word_capped, eval_free_word_capped, MatrixGenerators, DEFAULT_MAX_BITS};
use crate::modp::{prime_window, reduce_mod, test_prime, GoodPrime, ModMatrix, ReducedWordMap, MAX_MODULUS};
use crate::oracle::{exact_complexity, Chi};
use crate::rng::SeededRng;
use crate::sample::random_balanced_word;
use crate::stats;
use crate::words::{substitute, ConstWord, FreeWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Initial window constant.
    pub c0: u64,
    /// Largest window constant tried; `C0` doubles up to this value.
    pub c0_max: u64,
    /// Element cap for the generation check and the witness BFS.
    pub element_cap: u64,
    /// Bit cap on entries during exact verification.
    pub max_bits: u64,
    /// Primes examined per window before moving to the next `C0`.
    pub prime_attempts: usize,
    pub seed: u64,
    /// When false every timing field is zero so output is reproducible.
    pub record_timings: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            c0: 4,
            c0_max: 64,
            element_cap: DEFAULT_CAP,
            max_bits: DEFAULT_MAX_BITS,
            prime_attempts: 64,
            seed: 0,
            record_timings: false,
        }
    }
}

/// Wall-clock phases in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub prime_selection_ms: f64,
    pub search_ms: f64,
    pub verification_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub word: String,
    pub n: u64,
    pub prime: u64,
    /// Window constant in force when the prime was accepted.
    pub c0: u64,
    pub witness_mod_p: ModMatrix,
    pub lift: String,
    #[serde(skip)]
    pub lift_word: FreeWord,
    pub lift_length: u64,
    /// Both exact checks agree that `w(lift)` is nontrivial.
    pub exact_nontrivial: bool,
    /// What the exact check certifies for this generating set.
    pub exact_check: ExactCheck,
    /// BFS layers explored before the witness was found.
    pub search_depth: u64,
    pub explored_elements: u64,
    /// Primes rejected before the accepted one.
    pub rejected_primes: Vec<PrimeDiagnostic>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactCheck {
    /// The generators are free, so a non-identity matrix means `w(g) != e`.
    NontrivialInFreeGroup,
    /// Only non-centrality in `SL_d(Z)` is certified.
    NonCentralInSlZ,
}

enum Search {
    Found { id: usize, value: ModMatrix, depth: u64, explored: u64 },
    Exhausted,
    Capped,
}

/// BFS from the identity, layer by layer, returning the first element (in
/// BFS order) whose image under the word map is non-central.
fn search(good: &GoodPrime, w: &ConstWord, cap: u64) -> Result<(Search, Explorer)> {
    let map = ReducedWordMap::new(w, &good.reduced_gens);
    let mut ex = Explorer::new(&good.reduced_gens)?;
    let mut range = 0..1;
    let mut depth = 0u64;
    loop {
        let ball = ex.ball();
        let ids: Vec<usize> = range.clone().collect();
        let hit = crate::par::find_map_first(&ids, |&id| {
            let v = map.eval(&ball.element(id));
            (!v.is_central()).then_some((id, v))
        });
        if let Some((id, value)) = hit {
            let explored = ball.len() as u64;
            return Ok((Search::Found { id, value, depth, explored }, ex));
        }
        match ex.expand(cap) {
            Some(r) => {
                range = r;
                depth += 1;
            }
            // a capped layer is still scanned above before this point
            None if ex.ball().is_partial() => return Ok((Search::Capped, ex)),
            None => return Ok((Search::Exhausted, ex)),
        }
    }
}

fn elapsed_ms(t: Instant, record: bool) -> f64 {
    if record {
        t.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

/// Finds a short `g` with `w(g) != e`, escalating through primes and then
/// window constants, and verifies the result with exact integer arithmetic.
pub fn find_witness(w: &ConstWord, gens: &MatrixGenerators, cfg: &PipelineConfig) -> Result<WitnessReport> {
    if cfg.c0 == 0 || cfg.c0 > cfg.c0_max {
        return Err(Error::InvalidGenerators(format!(
            "need 1 <= C0 <= C0_max, got C0 = {} and C0_max = {}",
            cfg.c0, cfg.c0_max
        )));
    }
    if let Some(g) = w.max_gen() {
        if g as usize >= gens.rank() {
            return Err(Error::InvalidGenerators(format!(
                "word uses generator {} of {}",
                g + 1,
                gens.rank()
            )));
        }
    }
    let n = w.length();
    // the window (C0, C0] is empty, so one-letter words use n = 2
    let n_window = n.max(2);
    let mut tried = BTreeSet::new();
    let mut rejected = Vec::new();
    let mut timings = Timings::default();
    let mut c0 = cfg.c0;
    while c0 <= cfg.c0_max {
        let window = match prime_window(n_window, c0) {
            Ok(win) => Some(win),
            Err(Error::EmptyWindow { .. }) => None,
            Err(e) => return Err(e),
        };
        let mut attempts = 0usize;
        for p in window.iter().flat_map(|win| win.iter()) {
            if p > MAX_MODULUS || attempts >= cfg.prime_attempts {
                break;
            }
            if !tried.insert(p) {
                continue;
            }
            attempts += 1;
            let t = Instant::now();
            let good = test_prime(w, gens, p, cfg.element_cap);
            timings.prime_selection_ms += elapsed_ms(t, cfg.record_timings);
            let good = match good {
                Ok(g) => g,
                Err(d) => {
                    rejected.push(d);
                    continue;
                }
            };
            let t = Instant::now();
            let (outcome, ex) = search(&good, w, cfg.element_cap)?;
            timings.search_ms += elapsed_ms(t, cfg.record_timings);
            let clause = match outcome {
                Search::Found { id, value, depth, explored } => {
                    let lift_word = ex.ball().word(id);
                    let t = Instant::now();
                    let check = verify(w, gens, &lift_word, &value, cfg.max_bits)?;
                    timings.verification_ms += elapsed_ms(t, cfg.record_timings);
                    return Ok(WitnessReport {
                        word: w.render(gens.names()),
                        n,
                        prime: p,
                        c0,
                        witness_mod_p: value,
                        lift: lift_word.render(gens.names()),
                        lift_length: lift_word.len(),
                        lift_word,
                        exact_nontrivial: true,
                        exact_check: check,
                        search_depth: depth,
                        explored_elements: explored,
                        rejected_primes: rejected,
                        timings,
                    });
                }
                Search::Exhausted => FailedClause::NoWitness,
                Search::Capped => FailedClause::SearchCapExceeded,
            };
            rejected.push(PrimeDiagnostic {
                prime: p,
                failed_clause: clause,
                offending_constant: None,
            });
        }
        c0 = match c0.checked_mul(2) {
            Some(next) => next,
            None => break,
        };
    }
    Err(Error::WindowExhausted {
        c0_max: cfg.c0_max,
        diagnostics: rejected,
    })
}

/// Two independent exact checks of `w(g) != e`: free reduction of the
/// substituted word, and evaluation of `w(X)` in `SL_d(Z)`. They must agree,
/// and the integer result must reduce to the witness found mod `p`.
fn verify(
    w: &ConstWord,
    gens: &MatrixGenerators,
    g: &FreeWord,
    value_mod_p: &ModMatrix,
    max_bits: u64,
) -> Result<ExactCheck> {
    let free_nontrivial = !substitute(w, g).is_identity();
    let x = eval_free_word_capped(g, gens, max_bits)?;
    let wx = eval_const_word_capped(w, &x, gens, max_bits)?;
    let matrix_nontrivial = !wx.is_identity();
    let free = gens.is_sanov();
    if free && free_nontrivial != matrix_nontrivial {
        return Err(Error::Verification(format!(
            "free reduction says nontrivial = {free_nontrivial}, matrix evaluation says {matrix_nontrivial}"
        )));
    }
    if !free_nontrivial || !matrix_nontrivial {
        return Err(Error::Verification("w(g) is trivial although its reduction is not central".into()));
    }
    if wx.is_scalar() {
        return Err(Error::Verification("w(g) is scalar although its reduction is not central".into()));
    }
    if reduce_mod(&wx, value_mod_p.modulus())? != *value_mod_p {
        return Err(Error::Verification("exact w(g) does not reduce to the witness mod p".into()));
    }
    Ok(if free {
        ExactCheck::NontrivialInFreeGroup
    } else {
        ExactCheck::NonCentralInSlZ
    })
}

/// Length of the pipeline's witness, an upper bound on the complexity of `w`.
/// Words with `w(e) != e` have complexity zero and skip the search.
pub fn complexity_upper_bound(w: &ConstWord, gens: &MatrixGenerators, cfg: &PipelineConfig) -> Result<u64> {
    if !substitute(w, &FreeWord::identity()).is_identity() {
        return Ok(0);
    }
    Ok(find_witness(w, gens, cfg)?.lift_length)
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub n: u64,
    pub samples: u64,
    pub max_oracle_chi: Chi,
    pub max_pipeline_bound: u64,
    pub prime_used_max: u64,
    /// `max_pipeline_bound / ln n`.
    pub fitted_c: f64,
    pub seconds: f64,
    /// Samples on which the pipeline failed; their bounds are excluded.
    pub failures: u64,
}

pub const GROWTH_CSV_HEADER: &str = "n,samples,max_oracle_chi,max_pipeline_bound,prime_used_max,fitted_C,seconds";

impl GrowthRow {
    pub fn csv_line(&self) -> String {
        if self.failures > 0 {
            format!(
                "{},{},{},error,error,error,{:.3}",
                self.n, self.samples, self.max_oracle_chi, self.seconds
            )
        } else {
            format!(
                "{},{},{},{},{},{:.4},{:.3}",
                self.n,
                self.samples,
                self.max_oracle_chi,
                self.max_pipeline_bound,
                self.prime_used_max,
                self.fitted_c,
                self.seconds
            )
        }
    }
}

/// Growth experiment settings.
#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub lengths: Vec<u64>,
    pub samples: u64,
    /// Radius of the brute-force comparison; 0 disables it.
    pub oracle_radius: u32,
    pub pipeline: PipelineConfig,
}

/// Samples `samples` words with `w(e) = e` for each length and records the
/// pipeline bound next to the brute-force value.
pub fn growth_experiment(gens: &MatrixGenerators, cfg: &GrowthConfig) -> Result<Vec<GrowthRow>> {
    let mut rng = SeededRng::new(cfg.pipeline.seed);
    let mut rows = Vec::with_capacity(cfg.lengths.len());
    for &n in &cfg.lengths {
        let start = Instant::now();
        let words: Vec<ConstWord> = (0..cfg.samples)
            .map(|_| random_balanced_word(&mut rng, gens.rank(), n as usize))
            .collect();
        let outcomes = crate::par::map(&words, |w| find_witness(w, gens, &cfg.pipeline));
        let mut row = GrowthRow {
            n,
            samples: cfg.samples,
            max_oracle_chi: Chi::Exact(0),
            max_pipeline_bound: 0,
            prime_used_max: 0,
            fitted_c: 0.0,
            seconds: 0.0,
            failures: 0,
        };
        for out in &outcomes {
            match out {
                Ok(r) => {
                    row.max_pipeline_bound = row.max_pipeline_bound.max(r.lift_length);
                    row.prime_used_max = row.prime_used_max.max(r.prime);
                }
                Err(Error::Resource(_)) | Err(Error::WindowExhausted { .. }) => row.failures += 1,
                Err(e) => return Err(Error::Verification(format!("n = {n}: {e}"))),
            }
        }
        if cfg.oracle_radius > 0 {
            for w in &words {
                let rec = exact_complexity(w, gens.rank(), cfg.oracle_radius, u64::MAX)?;
                row.max_oracle_chi = row.max_oracle_chi.max(rec.chi);
            }
        } else {
            row.max_oracle_chi = Chi::AtLeast(0);
        }
        row.fitted_c = row.max_pipeline_bound as f64 / (n.max(2) as f64).ln();
        if cfg.pipeline.record_timings {
            row.seconds = start.elapsed().as_secs_f64();
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Least-squares fit of `max_pipeline_bound` against `ln n`.
pub fn log_fit(rows: &[GrowthRow]) -> stats::LinearFit {
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_pipeline_bound as f64).collect();
    stats::linear_fit(&xs, &ys)
}
