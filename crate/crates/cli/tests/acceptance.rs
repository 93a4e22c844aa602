//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Thresholds and runtime limits are pinned below.

use std::collections::HashSet;
use std::process::Command;
use std::time::{Duration, Instant};

use logwitness::cayley::{self, injectivity_radius};
use logwitness::intmat::{check_height_bound, eval_const_word, eval_free_word, IntMatrix, MatrixGenerators};
use logwitness::modp::{eval_const_word_mod, reduce_mod, sl_order, window_product_check, ReducedGenerators};
use logwitness::oracle::{exact_complexity, load_group, mixed_identity_search, words_of_length, Chi};
use logwitness::pipeline::{find_witness, growth_experiment, GrowthConfig, PipelineConfig};
use logwitness::rng::SeededRng;
use logwitness::sample::{ball_vanishing_word, random_const_word, random_free_word};
use logwitness::stats::{linear_fit, spread};
use logwitness::words::{substitute, BallGrower, ConstWord};

const SEED: u64 = 20_240_601;

// criterion 1
const SQUARE_PAIRS: usize = 10_000;
const SQUARE_MAX_W: u64 = 20;
const SQUARE_MAX_G: u64 = 8;
const SQUARE_PRIMES: [u64; 2] = [5, 101];
const SQUARE_LIMIT: Duration = Duration::from_secs(60);
// criterion 2
const FAITHFUL_RADIUS: u32 = 12;
const FAITHFUL_SPOT_CHECKS: usize = 2_000;
const FAITHFUL_LIMIT: Duration = Duration::from_secs(120);
// criterion 3
const HEIGHT_RADIUS: u32 = 10;
// criterion 4
const SOUND_EXHAUSTIVE_LEN: usize = 6;
const SOUND_RANDOM: usize = 500;
const SOUND_RANDOM_MAX_LEN: u64 = 50;
const SOUND_ORACLE_RADIUS: u32 = 6;
const SOUND_LIMIT: Duration = Duration::from_secs(600);
// criterion 5
const GROWTH_LENGTHS: [u64; 4] = [10, 100, 1_000, 10_000];
const GROWTH_SAMPLES: u64 = 50;
const GROWTH_ORACLE_RADIUS: u32 = 4;
const GROWTH_MAX_SPREAD: f64 = 3.0;
const GROWTH_LIMIT: Duration = Duration::from_secs(1_800);
const VANISHING_RADII: u32 = 3;
// criteria 6 and 7
const SWEEP_PRIMES: (u64, u64) = (5, 101);
const SWEEP_LIMIT: Duration = Duration::from_secs(600);
const INJ_MAX_RADIUS: u32 = 16;
// criterion 8
const MIF_LIMIT: Duration = Duration::from_secs(300);
// criterion 9
const WINDOW_NS: [u64; 2] = [10, 20];
const WINDOW_C0: u64 = 4;
const WINDOW_FACTOR: f64 = 0.5;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    v.detail.push_str(&format!("; {:.1}s (limit {}s)", took.as_secs_f64(), limit.as_secs()));
    if took > limit {
        v.pass = false;
    }
    v
}

fn commutation_square() -> Verdict {
    let s = MatrixGenerators::sanov();
    let reduced: Vec<ReducedGenerators> = SQUARE_PRIMES.iter().map(|&p| ReducedGenerators::new(&s, p).unwrap()).collect();
    let mut rng = SeededRng::new(SEED);
    let mut failures = 0;
    for _ in 0..SQUARE_PAIRS {
        let (w_len, g_len) = (rng.range_inclusive(1, SQUARE_MAX_W), rng.range_inclusive(0, SQUARE_MAX_G));
        let w = random_const_word(&mut rng, 2, w_len as usize);
        let g = random_free_word(&mut rng, 2, g_len as usize);
        let x = eval_free_word(&g, &s);
        let direct = eval_const_word(&w, &x, &s);
        let via_free = eval_free_word(&substitute(&w, &g), &s);
        let mut ok = direct == via_free;
        for r in &reduced {
            let p = r.modulus();
            let lhs = reduce_mod(&direct, p).unwrap();
            let rhs = eval_const_word_mod(&w, &reduce_mod(&x, p).unwrap(), r);
            ok &= lhs == rhs;
        }
        failures += usize::from(!ok);
    }
    verdict(
        failures == 0,
        format!("{SQUARE_PAIRS} pairs, exact and mod {SQUARE_PRIMES:?}, {failures} mismatches"),
    )
}

fn small_entries(m: &IntMatrix) -> [i64; 4] {
    let e = m.entries();
    std::array::from_fn(|i| i64::try_from(&e[i]).expect("entries of B(12) fit in i64"))
}

/// One ball of Sanov images serves both the faithfulness and height checks.
fn sanov_ball(radius: u32) -> BallGrower<IntMatrix> {
    let s = MatrixGenerators::sanov();
    let mut grower = BallGrower::new(2, IntMatrix::identity(2), u64::MAX);
    for _ in 0..radius {
        grower.grow(|m, l| m.mul(s.letter(l))).unwrap();
    }
    grower
}

fn faithfulness(ball: &BallGrower<IntMatrix>) -> Verdict {
    let s = MatrixGenerators::sanov();
    let mut seen: HashSet<[i64; 4]> = HashSet::with_capacity(ball.total() as usize + 1);
    let mut collisions = 0u64;
    for layer in ball.layers() {
        for node in layer {
            collisions += u64::from(!seen.insert(small_entries(&node.value)));
        }
    }
    // the incremental products agree with direct evaluation of each word
    let mut rng = SeededRng::new(SEED ^ 2);
    let mut spot_mismatches = 0;
    for _ in 0..FAITHFUL_SPOT_CHECKS {
        let depth = rng.range_inclusive(0, FAITHFUL_RADIUS as u64) as usize;
        let i = rng.below(ball.layers()[depth].len() as u64) as usize;
        let g = ball.word(depth, i);
        spot_mismatches += usize::from(g.len() != depth as u64 || eval_free_word(&g, &s) != ball.layers()[depth][i].value);
    }
    verdict(
        collisions == 0 && spot_mismatches == 0,
        format!(
            "|B({FAITHFUL_RADIUS})| = {} distinct words, {collisions} collisions, {spot_mismatches}/{FAITHFUL_SPOT_CHECKS} spot-check mismatches",
            ball.total()
        ),
    )
}

fn height_bound(ball: &BallGrower<IntMatrix>) -> Verdict {
    let s = MatrixGenerators::sanov();
    let report = check_height_bound(HEIGHT_RADIUS, &s, u64::MAX);
    let mut violations = 0u64;
    let mut checked = 0u64;
    for (depth, layer) in ball.layers().iter().enumerate().take(HEIGHT_RADIUS as usize + 1) {
        let bound = 4i64.pow(depth as u32);
        for node in layer {
            let h = small_entries(&node.value).iter().map(|v| v.abs()).max().unwrap();
            violations += u64::from(h > bound);
            checked += 1;
        }
    }
    match report {
        Ok(r) => verdict(
            violations == 0 && r.words_checked == checked,
            format!(
                "{checked} elements of B({HEIGHT_RADIUS}), {violations} violations of 4^|g|, max height/4^|g| = {:.4} at {}",
                r.max_ratio,
                if r.max_ratio_word.is_empty() { "e" } else { &r.max_ratio_word }
            ),
        ),
        Err(e) => verdict(false, format!("library check failed: {e}")),
    }
}

fn soundness() -> Verdict {
    let s = MatrixGenerators::sanov();
    let mut words: Vec<ConstWord> = Vec::new();
    for len in 1..=SOUND_EXHAUSTIVE_LEN {
        words.extend(words_of_length(2, len, u64::MAX).unwrap());
    }
    let exhaustive = words.len();
    let mut rng = SeededRng::new(SEED ^ 4);
    for _ in 0..SOUND_RANDOM {
        let len = rng.range_inclusive(1, SOUND_RANDOM_MAX_LEN) as usize;
        words.push(random_const_word(&mut rng, 2, len));
    }
    let cfg = PipelineConfig::default();
    let (mut violations, mut errors, mut resolved, mut tight) = (0u64, 0u64, 0u64, 0u64);
    let mut first_problem = String::new();
    for w in &words {
        let report = match find_witness(w, &s, &cfg) {
            Ok(r) => r,
            Err(e) => {
                errors += 1;
                if first_problem.is_empty() {
                    first_problem = format!("{}: {e}", w.render(s.names()));
                }
                continue;
            }
        };
        let mut ok = !substitute(w, &report.lift_word).is_identity() && report.exact_nontrivial;
        let oracle = exact_complexity(w, 2, SOUND_ORACLE_RADIUS, u64::MAX).unwrap();
        if let Chi::Exact(chi) = oracle.chi {
            resolved += 1;
            tight += u64::from(chi == report.lift_length);
            ok &= chi <= report.lift_length;
        }
        if !ok {
            violations += 1;
            if first_problem.is_empty() {
                first_problem = format!("{} with lift {}", w.render(s.names()), report.lift);
            }
        }
    }
    let mut detail = format!(
        "{} words ({exhaustive} exhaustive up to length {SOUND_EXHAUSTIVE_LEN}, {SOUND_RANDOM} random up to {SOUND_RANDOM_MAX_LEN}), \
         {violations} violations, {errors} pipeline errors, oracle resolved {resolved}, bound tight on {tight}",
        words.len()
    );
    if !first_problem.is_empty() {
        detail.push_str(&format!("; first problem: {first_problem}"));
    }
    verdict(violations == 0 && errors == 0, detail)
}

fn log_growth() -> Verdict {
    let s = MatrixGenerators::sanov();
    let cfg = GrowthConfig {
        lengths: GROWTH_LENGTHS.to_vec(),
        samples: GROWTH_SAMPLES,
        oracle_radius: GROWTH_ORACLE_RADIUS,
        pipeline: PipelineConfig {
            seed: SEED ^ 5,
            ..PipelineConfig::default()
        },
    };
    let rows = match growth_experiment(&s, &cfg) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("experiment failed: {e}")),
    };
    let failures: u64 = rows.iter().map(|r| r.failures).sum();
    let ln: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let bound: Vec<f64> = rows.iter().map(|r| r.max_pipeline_bound as f64).collect();
    let fit = linear_fit(&ln, &bound);
    let per_log: Vec<f64> = bound.iter().zip(&ln).map(|(b, l)| b / l).collect();
    let per_n: Vec<f64> = rows.iter().zip(&bound).map(|(r, b)| b / r.n as f64).collect();
    let (log_spread, lin_spread) = (spread(&per_log), spread(&per_n));
    let fitted_c = per_log.iter().copied().fold(0.0, f64::max);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("n={} max_lift={} oracle={} p_max={}", r.n, r.max_pipeline_bound, r.max_oracle_chi, r.prime_used_max))
        .collect();
    // words vanishing on B(r) need lifts longer than r whatever the prime
    let mut family_ok = true;
    let mut family = Vec::new();
    for r in 0..=VANISHING_RADII {
        let w = ball_vanishing_word(2, r);
        match find_witness(&w, &s, &cfg.pipeline) {
            Ok(rep) => {
                family_ok &= rep.lift_length > r as u64;
                family.push(format!("r={r} n={} lift={}", w.length(), rep.lift_length));
            }
            Err(e) => {
                family_ok = false;
                family.push(format!("r={r}: {e}"));
            }
        }
    }
    verdict(
        failures == 0 && family_ok && fit.slope >= 0.0 && log_spread <= GROWTH_MAX_SPREAD && log_spread < lin_spread,
        format!(
            "[{}]; slope vs ln n = {:.3}, spread of max/ln n = {log_spread:.2} (max {GROWTH_MAX_SPREAD}), \
             spread of max/n = {lin_spread:.1}, fitted C = {fitted_c:.3}, {failures} failed samples; \
             ball-vanishing words [{}]",
            table.join(", "),
            fit.slope,
            family.join(", ")
        ),
    )
}

fn sweep_primes() -> Vec<u64> {
    (SWEEP_PRIMES.0..=SWEEP_PRIMES.1).filter(|&p| logwitness::modp::is_prime(p)).collect()
}

fn diameter_sweep() -> Verdict {
    let s = MatrixGenerators::sanov();
    let mut complete = true;
    let mut ratios = Vec::new();
    let mut cells = Vec::new();
    for p in sweep_primes() {
        let reduced = ReducedGenerators::new(&s, p).unwrap();
        let ball = cayley::explore(&reduced.gens, cayley::DEFAULT_CAP).unwrap();
        let order = sl_order(2, p).unwrap();
        match cayley::diameter(&ball) {
            Ok(rec) => {
                let total: u64 = rec.ball_sizes.iter().sum();
                complete &= total as u128 == order;
                ratios.push(rec.diameter as f64 / (p as f64).ln());
                cells.push(format!("{p}:{}", rec.diameter));
            }
            Err(e) => {
                complete = false;
                cells.push(format!("{p}:{e}"));
            }
        }
    }
    let c = ratios.iter().copied().fold(0.0, f64::max);
    verdict(
        complete && c.is_finite(),
        format!(
            "{} primes, all complete = {complete}, diameters [{}], C = max diameter/ln p = {c:.3}",
            cells.len(),
            cells.join(" ")
        ),
    )
}

fn injectivity_sweep() -> Verdict {
    let s = MatrixGenerators::sanov();
    let mut min_radius = u64::MAX;
    let mut capped = 0;
    let (mut xs, mut ys, mut cells) = (Vec::new(), Vec::new(), Vec::new());
    for p in sweep_primes() {
        let rec = injectivity_radius(p, &s, INJ_MAX_RADIUS, cayley::DEFAULT_CAP).unwrap();
        min_radius = min_radius.min(rec.radius);
        capped += usize::from(rec.capped);
        xs.push((p as f64).ln());
        ys.push(rec.radius as f64);
        cells.push(format!("{p}:{}", rec.radius));
    }
    let fit = linear_fit(&xs, &ys);
    verdict(
        min_radius >= 1 && fit.slope > 0.0 && capped == 0,
        format!(
            "radii [{}], min {min_radius}, slope vs ln p = {:.3}, {capped} capped",
            cells.join(" "),
            fit.slope
        ),
    )
}

fn mixed_identities() -> Verdict {
    let a5 = load_group("psl2-5").unwrap();
    let c2 = load_group("c2").unwrap();
    let r5 = mixed_identity_search(&a5, 3, u64::MAX).unwrap();
    let r2 = mixed_identity_search(&c2, 2, u64::MAX).unwrap();
    verdict(
        r5.identities.is_empty() && r2.identities == ["x^2"],
        format!(
            "PSL2(5), L=3: {:?} ({} candidates, {} orbit representatives); C2, L=2: {:?}",
            r5.identities, r5.candidates, r5.evaluated, r2.identities
        ),
    )
}

fn is_prime_by_division(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn window_product() -> Verdict {
    let mut pass = true;
    let mut cells = Vec::new();
    for n in WINDOW_NS {
        let r = window_product_check(n, WINDOW_C0, WINDOW_FACTOR * WINDOW_C0 as f64).unwrap();
        let oracle: f64 = (WINDOW_C0 * n + 1..=WINDOW_C0 * n * n)
            .filter(|&p| is_prime_by_division(p))
            .map(|p| (p as f64).ln())
            .sum();
        pass &= r.pass && (r.log_sum - oracle).abs() < 1e-9 && oracle >= r.threshold;
        cells.push(format!("n={n}: sum log p = {:.2} >= {:.1} over {} primes", r.log_sum, r.threshold, r.primes));
    }
    verdict(pass, cells.join("; "))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 7] = [
        &["witness", "--word", "x b x a x^-2 a^-1 b^-1"],
        &["complexity", "--word", "x a x^-1 a^-1 x b x^-1 b^-1"],
        &["growth", "--n", "10,100", "--samples", "8", "--seed", "42"],
        &["growth", "--n", "10", "--samples", "4", "--seed", "42", "--format", "json"],
        &["diameter", "--primes", "5..31"],
        &["injrad", "--primes", "5..31"],
        &["mifcheck", "--group", "psl2-5", "--max-length", "2"],
    ];
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, threads) in [None, None, Some("1")].into_iter().enumerate() {
            let path = dir.path().join(format!("{i}-{run}.out"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_logwitness"));
            cmd.args(*args).arg("--out").arg(&path);
            if let Some(t) = threads {
                cmd.env("LOGWITNESS_THREADS", t);
            }
            let status = cmd.status().unwrap();
            outputs.push((status.code(), std::fs::read(&path).unwrap_or_default()));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) || outputs[0].0 != Some(0) {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} commands, each run twice plus once single-threaded; differing or failing: {differing:?}",
            commands.len()
        ),
    )
}

type Criterion<'a> = Box<dyn FnOnce() -> Verdict + 'a>;

fn main() {
    let ball = sanov_ball(FAITHFUL_RADIUS);
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("commutation square", Box::new(|| timed(SQUARE_LIMIT, commutation_square))),
        ("Sanov faithfulness", Box::new(|| timed(FAITHFUL_LIMIT, || faithfulness(&ball)))),
        ("height bound", Box::new(|| height_bound(&ball))),
        ("oracle/pipeline soundness", Box::new(|| timed(SOUND_LIMIT, soundness))),
        ("logarithmic lift length", Box::new(|| timed(GROWTH_LIMIT, log_growth))),
        ("diameter sweep", Box::new(|| timed(SWEEP_LIMIT, diameter_sweep))),
        ("injectivity radius sweep", Box::new(|| timed(SWEEP_LIMIT, injectivity_sweep))),
        ("finite mixed identities", Box::new(|| timed(MIF_LIMIT, mixed_identities))),
        ("window product", Box::new(window_product)),
        ("CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!("{} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
