//! Monte-Carlo orbit statistics for the accelerated induction: empirical
//! cylinder frequencies, the stationarity diagnostic, and the uniform
//! expansion (Margulis) verifier.
//!
//! Work is split into independently seeded chunks whose counts merge by
//! summation, so reports are bit-identical for a fixed seed and chunk plan
//! regardless of thread count.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iet::{sample_point, IetPoint};
use crate::matrix::RenormMatrix;
use crate::perm::Permutation;
use crate::words::{format_word, long_simple_word, mb_alphabet, AlphabetGraph, SymbolLetter, Word};

/// Shared Monte-Carlo parameters.
#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloConfig {
    pub iterations: u64,
    pub seed: u64,
    /// cap on induction steps within one G-step
    pub t_cap: u64,
    /// chunk length; chunks are independent orbits
    pub chunk: u64,
    pub threads: usize,
}

impl MonteCarloConfig {
    pub fn new(iterations: u64, seed: u64) -> Self {
        MonteCarloConfig {
            iterations,
            seed,
            t_cap: 1_000_000,
            chunk: 1 << 20,
            threads: 1,
        }
    }

    fn chunk_count(&self) -> u64 {
        self.iterations.div_ceil(self.chunk)
    }

    fn chunk_len(&self, idx: u64) -> u64 {
        let start = idx * self.chunk;
        self.chunk.min(self.iterations - start)
    }

    fn chunk_seed(&self, idx: u64) -> u64 {
        self.seed ^ (idx + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Orbit stream events: one coding letter with its roof increment, or a
/// restart after a degenerate point.
enum OrbitEvent<'a> {
    Letter(&'a SymbolLetter, f64),
    Restart,
}

/// Runs exactly `steps` G-steps from a fresh random point, restarting on
/// degeneracies; returns the restart count.
fn run_orbit(
    pi: &Permutation,
    steps: u64,
    seed: u64,
    t_cap: u64,
    mut f: impl FnMut(OrbitEvent),
) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut restarts = 0u64;
    let mut point: IetPoint<f64> = sample_point(pi, &mut rng);
    let mut done = 0u64;
    while done < steps {
        match point.step_g(t_cap) {
            Ok(step) => {
                let healthy = step.point.lambda().iter().all(|&x| x > 1e-250);
                f(OrbitEvent::Letter(&step.letter, step.tau1));
                done += 1;
                if healthy {
                    point = step.point;
                } else {
                    restarts += 1;
                    f(OrbitEvent::Restart);
                    point = sample_point(pi, &mut rng);
                }
            }
            Err(_) => {
                restarts += 1;
                f(OrbitEvent::Restart);
                point = sample_point(pi, &mut rng);
            }
        }
    }
    restarts
}

/// Runs `run` over every chunk index, in order when single-threaded or
/// merged in index order when parallel.
fn map_chunks<T: Send>(cfg: &MonteCarloConfig, run: impl Fn(u64) -> T + Sync) -> Vec<T> {
    let n = cfg.chunk_count();
    let threads = cfg.threads.max(1);
    if threads == 1 || n <= 1 {
        return (0..n).map(run).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let run = &run;
        let mut handles = Vec::new();
        for t in 0..threads as u64 {
            handles.push(scope.spawn(move || {
                let mut mine = Vec::new();
                let mut idx = t;
                while idx < n {
                    mine.push((idx, run(idx)));
                    idx += threads as u64;
                }
                mine
            }));
        }
        for h in handles {
            for (idx, val) in h.join().expect("worker panicked") {
                slots[idx as usize] = Some(val);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("all chunks ran")).collect()
}

/// Multi-pattern streaming matcher (per-pattern KMP over packed letters).
struct PatternSet {
    pats: Vec<Vec<u64>>,
    fails: Vec<Vec<usize>>,
    states: Vec<usize>,
}

impl PatternSet {
    fn new(pats: Vec<Vec<u64>>) -> Self {
        let fails = pats
            .iter()
            .map(|p| {
                let mut fail = vec![0usize; p.len()];
                let mut k = 0usize;
                for i in 1..p.len() {
                    while k > 0 && p[i] != p[k] {
                        k = fail[k - 1];
                    }
                    if p[i] == p[k] {
                        k += 1;
                    }
                    fail[i] = k;
                }
                fail
            })
            .collect();
        let states = vec![0; pats.len()];
        PatternSet { pats, fails, states }
    }

    fn reset(&mut self) {
        self.states.iter_mut().for_each(|s| *s = 0);
    }

    /// Feeds one letter; calls `on_match(pattern_index)` for every pattern
    /// whose occurrence ends at this letter.
    fn advance(&mut self, x: u64, mut on_match: impl FnMut(usize)) {
        for i in 0..self.pats.len() {
            let p = &self.pats[i];
            let fail = &self.fails[i];
            let mut k = self.states[i];
            while k > 0 && x != p[k] {
                k = fail[k - 1];
            }
            if x == p[k] {
                k += 1;
            }
            if k == p.len() {
                on_match(i);
                k = fail[k - 1];
            }
            self.states[i] = k;
        }
    }
}

fn pack_letter(graph: &AlphabetGraph, l: &SymbolLetter) -> u64 {
    let c = match l.c {
        crate::perm::RauzyOp::A => 0u64,
        crate::perm::RauzyOp::B => 1u64,
    };
    let pi_idx = graph.class().index_of(&l.pi).map(|i| i as u64).unwrap_or(u64::MAX >> 16);
    (c << 63) | (u64::from(l.n) << 16) | (pi_idx & 0xFFFF)
}

/// Birkhoff frequency of visits to the cylinder of one word.
#[derive(Clone, Debug, Serialize)]
pub struct CylinderStats {
    pub word: String,
    pub hits: u64,
    pub total: u64,
    pub frequency: f64,
    pub std_error: f64,
}

impl CylinderStats {
    fn from_counts(word: &Word<SymbolLetter>, hits: u64, total: u64) -> Self {
        let f = if total > 0 { hits as f64 / total as f64 } else { f64::NAN };
        let se = if total > 0 {
            (f * (1.0 - f) / total as f64).sqrt()
        } else {
            f64::NAN
        };
        CylinderStats {
            word: format_word(word),
            hits,
            total,
            frequency: f,
            std_error: se,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrequencyReport {
    pub stats: Vec<CylinderStats>,
    pub restarts: u64,
    pub iterations: u64,
    pub seed: u64,
}

impl FrequencyReport {
    /// CSV table of the per-word frequencies.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("word,hits,total,frequency,std_error
");
        for s in &self.stats {
            out.push_str(&format!(
                "{},{},{},{:.17e},{:.17e}
",
                s.word, s.hits, s.total, s.frequency, s.std_error
            ));
        }
        out
    }
}

/// Empirical frequencies of the cylinders of `words` along random orbits
/// of the accelerated induction. Deterministic for a fixed config.
pub fn cylinder_frequencies(
    graph: &AlphabetGraph,
    words: &[Word<SymbolLetter>],
    cfg: &MonteCarloConfig,
) -> Result<FrequencyReport> {
    if cfg.iterations < 10_000 {
        return Err(Error::InvalidInput("need at least 10^4 iterations".into()));
    }
    if words.is_empty() || words.iter().any(|w| w.is_empty()) {
        return Err(Error::InvalidInput("need nonempty cylinder words".into()));
    }
    let maxlen = words.iter().map(|w| w.len()).max().unwrap() as u64;
    if cfg.chunk <= maxlen {
        return Err(Error::InvalidInput("chunk shorter than the longest word".into()));
    }
    let pi0 = words[0].first().unwrap().pi.clone();
    let packed: Vec<Vec<u64>> = words
        .iter()
        .map(|w| w.letters().iter().map(|l| pack_letter(graph, l)).collect())
        .collect();
    let lens: Vec<u64> = words.iter().map(|w| w.len() as u64).collect();

    struct ChunkOut {
        hits: Vec<u64>,
        totals: Vec<u64>,
        restarts: u64,
    }
    let outs = map_chunks(cfg, |idx| {
        let len = cfg.chunk_len(idx);
        let mut set = PatternSet::new(packed.clone());
        let mut hits = vec![0u64; packed.len()];
        let mut run_len = 0u64;
        let mut totals = vec![0u64; packed.len()];
        let flush = |run_len: u64, totals: &mut Vec<u64>| {
            for (t, &l) in totals.iter_mut().zip(&lens) {
                *t += run_len.saturating_sub(l - 1);
            }
        };
        let restarts = run_orbit(&pi0, len, cfg.chunk_seed(idx), cfg.t_cap, |ev| match ev {
            OrbitEvent::Letter(l, _) => {
                set.advance(pack_letter(graph, l), |i| hits[i] += 1);
                run_len += 1;
            }
            OrbitEvent::Restart => {
                flush(run_len, &mut totals);
                run_len = 0;
                set.reset();
            }
        });
        flush(run_len, &mut totals);
        ChunkOut { hits, totals, restarts }
    });

    let mut hits = vec![0u64; words.len()];
    let mut totals = vec![0u64; words.len()];
    let mut restarts = 0u64;
    for o in outs {
        for (h, oh) in hits.iter_mut().zip(&o.hits) {
            *h += oh;
        }
        for (t, ot) in totals.iter_mut().zip(&o.totals) {
            *t += ot;
        }
        restarts += o.restarts;
    }
    let stats = words
        .iter()
        .zip(hits.iter().zip(&totals))
        .map(|(w, (&h, &t))| CylinderStats::from_counts(w, h, t))
        .collect();
    Ok(FrequencyReport {
        stats,
        restarts,
        iterations: cfg.iterations,
        seed: cfg.seed,
    })
}

/// One return word in the Margulis report.
#[derive(Clone, Debug, Serialize)]
pub struct ReturnCheck {
    pub word: String,
    /// periodic-orbit return time log rho(A(r minus closing p))
    pub tau: f64,
    /// Hilbert radius of the letter cylinder
    pub tau_radius: f64,
    /// bound on the roof's oscillation over the cylinder (corner spread)
    pub tau_oscillation: f64,
    pub stats: CylinderStats,
    /// ratio R = nu(r) exp(m tau) / nu(p)
    pub ratio: f64,
    pub abs_deviation: f64,
    /// statistical error of R (delta method on both counts)
    pub ratio_std_error: f64,
    /// statistically certified part of the deviation:
    /// max(0, |R - 1| - 2 std errors)
    pub deviation_lower_bound: f64,
    /// orbit-measured mean of tau_p^1 over visits to the cylinder
    pub orbit_tau_mean: f64,
    pub orbit_tau_count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MargulisReport {
    pub p_prime: String,
    pub p: String,
    /// Hilbert diameter d(p') controlling the deviation bound
    pub d_p_prime: f64,
    pub base: CylinderStats,
    pub returns: Vec<ReturnCheck>,
    /// weighted least-squares slope of -log(nu(r)/nu(p)) against tau
    pub fitted_s: f64,
    pub fitted_s_std_error: f64,
    pub fitted_intercept: f64,
    /// fitted beta_2 = max |R - 1| / d(p')
    pub fitted_beta2: f64,
    pub max_abs_deviation: f64,
    /// max over returns of the certified deviation lower bound
    pub max_deviation_lower_bound: f64,
    pub iterations: u64,
    pub seed: u64,
    pub restarts: u64,
}

/// Verifies the uniform expansion identity: conditional cylinder measures
/// scale like exp(-m tau) across return words r = p w p.
pub fn margulis_check(
    graph: &AlphabetGraph,
    p_prime: &Word<SymbolLetter>,
    p: &Word<SymbolLetter>,
    returns: &[Word<SymbolLetter>],
    cfg: &MonteCarloConfig,
) -> Result<MargulisReport> {
    let m = graph.class().members()[0].symbols();
    if !p.starts_with(p_prime) || !p.is_simple_prefix_len(p_prime.len()) {
        return Err(Error::InvalidInput("p' must be a simple prefix of p".into()));
    }
    let a_pp = RenormMatrix::of_word(p_prime, m)?;
    if !a_pp.is_positive() {
        return Err(Error::InvalidInput("p' must be a positive word".into()));
    }
    if returns.len() < 2 {
        return Err(Error::InvalidInput("need at least two return words".into()));
    }
    for r in returns {
        if !r.starts_with(p) || !r.ends_with(p) || r.len() <= p.len() {
            return Err(Error::InvalidInput(format!(
                "return word {} must start and end with p",
                format_word(r)
            )));
        }
        let occ = r.occurrences(p);
        if occ.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "return word {} contains an internal occurrence of p",
                format_word(r)
            )));
        }
    }

    // periodic return times, letter radii, and oscillation bounds from
    // the corner spread over the hull of the p-cylinder
    let a_p = RenormMatrix::of_word(p, m)?;
    let corners: Vec<Vec<f64>> = a_p
        .columns_f64()
        .into_iter()
        .map(|col| {
            let s: f64 = col.iter().sum();
            col.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let taus: Vec<(f64, f64, f64)> = returns
        .iter()
        .map(|r| {
            let s = r.len() - p.len();
            let u = Word::unchecked(r.letters()[..s].to_vec());
            let a_u = RenormMatrix::of_word(&u, m)?;
            let a_full = RenormMatrix::of_word(r, m)?;
            let colsums: Vec<f64> = a_u
                .columns_f64()
                .iter()
                .map(|col| col.iter().sum::<f64>())
                .collect();
            let mut cmin = f64::INFINITY;
            let mut cmax = f64::NEG_INFINITY;
            for corner in &corners {
                let dot: f64 = colsums.iter().zip(corner).map(|(a, b)| a * b).sum();
                cmin = cmin.min(dot);
                cmax = cmax.max(dot);
            }
            Ok((
                a_u.spectral_radius().ln(),
                a_full.image_diameter(),
                (cmax / cmin).ln(),
            ))
        })
        .collect::<Result<_>>()?;

    // one orbit pass counting p and every r, accumulating orbit tau sums
    let mut all_words: Vec<&Word<SymbolLetter>> = vec![p];
    all_words.extend(returns.iter());
    let packed: Vec<Vec<u64>> = all_words
        .iter()
        .map(|w| w.letters().iter().map(|l| pack_letter(graph, l)).collect())
        .collect();
    let lens: Vec<u64> = all_words.iter().map(|w| w.len() as u64).collect();
    let s_lens: Vec<usize> = returns.iter().map(|r| r.len() - p.len()).collect();
    let maxlen = *lens.iter().max().unwrap() as usize;
    if cfg.chunk <= maxlen as u64 {
        return Err(Error::InvalidInput("chunk shorter than the longest word".into()));
    }
    let pi0 = p.first().unwrap().pi.clone();

    struct ChunkOut {
        hits: Vec<u64>,
        totals: Vec<u64>,
        tau_sums: Vec<f64>,
        tau_counts: Vec<u64>,
        restarts: u64,
    }
    let outs = map_chunks(cfg, |idx| {
        let len = cfg.chunk_len(idx);
        let mut set = PatternSet::new(packed.clone());
        let mut hits = vec![0u64; packed.len()];
        let mut totals = vec![0u64; packed.len()];
        let mut tau_sums = vec![0.0f64; returns.len()];
        let mut tau_counts = vec![0u64; returns.len()];
        let mut ring: VecDeque<f64> = VecDeque::with_capacity(maxlen);
        let mut run_len = 0u64;
        let flush = |run_len: u64, totals: &mut Vec<u64>| {
            for (t, &l) in totals.iter_mut().zip(&lens) {
                *t += run_len.saturating_sub(l - 1);
            }
        };
        let restarts = run_orbit(&pi0, len, cfg.chunk_seed(idx), cfg.t_cap, |ev| match ev {
            OrbitEvent::Letter(l, tau1) => {
                if ring.len() == maxlen {
                    ring.pop_front();
                }
                ring.push_back(tau1);
                set.advance(pack_letter(graph, l), |i| {
                    hits[i] += 1;
                    if i > 0 {
                        // occurrence of returns[i-1] ends here: tau_p^1 is
                        // the roof sum over its first s letters
                        let r_idx = i - 1;
                        let wl = lens[i] as usize;
                        let start = ring.len() - wl;
                        let tau: f64 =
                            ring.iter().skip(start).take(s_lens[r_idx]).sum();
                        tau_sums[r_idx] += tau;
                        tau_counts[r_idx] += 1;
                    }
                });
                run_len += 1;
            }
            OrbitEvent::Restart => {
                flush(run_len, &mut totals);
                run_len = 0;
                set.reset();
                ring.clear();
            }
        });
        flush(run_len, &mut totals);
        ChunkOut { hits, totals, tau_sums, tau_counts, restarts }
    });

    let nw = all_words.len();
    let mut hits = vec![0u64; nw];
    let mut totals = vec![0u64; nw];
    let mut tau_sums = vec![0.0f64; returns.len()];
    let mut tau_counts = vec![0u64; returns.len()];
    let mut restarts = 0u64;
    for o in outs {
        for k in 0..nw {
            hits[k] += o.hits[k];
            totals[k] += o.totals[k];
        }
        for k in 0..returns.len() {
            tau_sums[k] += o.tau_sums[k];
            tau_counts[k] += o.tau_counts[k];
        }
        restarts += o.restarts;
    }

    let base = CylinderStats::from_counts(p, hits[0], totals[0]);
    if base.hits == 0 {
        return Err(Error::Numeric("no visits to the base cylinder".into()));
    }
    let mut checks = Vec::new();
    for (k, r) in returns.iter().enumerate() {
        let stats = CylinderStats::from_counts(r, hits[k + 1], totals[k + 1]);
        let (tau_periodic, tau_radius, tau_oscillation) = taus[k];
        let orbit_tau_mean = if tau_counts[k] > 0 {
            tau_sums[k] / tau_counts[k] as f64
        } else {
            f64::NAN
        };
        // the roof is sampled at orbit points of the cylinder; the
        // periodic-orbit value stays as the independent cross-check
        let tau = if tau_counts[k] > 0 { orbit_tau_mean } else { tau_periodic };
        let (ratio, dev, rse) = if stats.hits > 0 {
            let ratio = stats.frequency / base.frequency * (m as f64 * tau).exp();
            let rel = (1.0 / stats.hits as f64 + 1.0 / base.hits as f64).sqrt();
            (ratio, (ratio - 1.0).abs(), ratio * rel)
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        let lb = if dev.is_finite() && rse.is_finite() {
            (dev - 2.0 * rse).max(0.0)
        } else {
            f64::NAN
        };
        checks.push(ReturnCheck {
            word: format_word(r),
            tau: tau_periodic,
            tau_radius,
            tau_oscillation,
            stats,
            ratio,
            abs_deviation: dev,
            ratio_std_error: rse,
            deviation_lower_bound: lb,
            orbit_tau_mean,
            orbit_tau_count: tau_counts[k],
        });
    }

    // weighted least squares of y = log(nu(r)/nu(p)) on the sampled tau,
    // with intercept
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    let mut swxx = 0.0;
    let mut swxy = 0.0;
    for c in checks.iter().filter(|c| c.stats.hits > 0 && c.orbit_tau_count > 0) {
        let y = (c.stats.frequency / base.frequency).ln();
        let x = c.orbit_tau_mean;
        let w = 1.0 / (1.0 / c.stats.hits as f64 + 1.0 / base.hits as f64);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    let det = sw * swxx - swx * swx;
    if det <= 0.0 {
        return Err(Error::Numeric("degenerate regression design".into()));
    }
    let slope = (sw * swxy - swx * swy) / det;
    let intercept = (swxx * swy - swx * swxy) / det;
    let slope_var = sw / det;
    let fitted_s = -slope;
    let d_p_prime = a_pp.image_diameter();
    let max_dev = checks
        .iter()
        .filter(|c| c.abs_deviation.is_finite())
        .map(|c| c.abs_deviation)
        .fold(0.0f64, f64::max);
    let max_dev_lb = checks
        .iter()
        .filter(|c| c.deviation_lower_bound.is_finite())
        .map(|c| c.deviation_lower_bound)
        .fold(0.0f64, f64::max);

    Ok(MargulisReport {
        p_prime: format_word(p_prime),
        p: format_word(p),
        d_p_prime,
        base,
        returns: checks,
        fitted_s,
        fitted_s_std_error: slope_var.sqrt(),
        fitted_intercept: intercept,
        fitted_beta2: max_dev / d_p_prime,
        max_abs_deviation: max_dev,
        max_deviation_lower_bound: max_dev_lb,
        iterations: cfg.iterations,
        seed: cfg.seed,
        restarts,
    })
}

/// The `count` shortest return words of A_p, growing the enumeration
/// weight bound as needed. A zero bound starts from the weight of p.
pub fn mb_returns_for(
    graph: &AlphabetGraph,
    p: &Word<SymbolLetter>,
    bound: u32,
    count: usize,
) -> Result<Vec<Word<SymbolLetter>>> {
    let p_weight: u32 = p.letters().iter().map(|l| l.n).sum();
    let mut bound = if bound == 0 { p_weight + 4 } else { bound };
    loop {
        let mut rets = mb_alphabet(graph, p, bound)?;
        if rets.len() >= count || bound >= p_weight + 20 {
            rets.truncate(count);
            if rets.is_empty() {
                return Err(Error::InvalidInput(
                    "no return words within the weight bound".into(),
                ));
            }
            return Ok(rets);
        }
        bound += 2;
    }
}

/// Builds the default word family for the Margulis verifier from a base
/// word q: p' is the simple positive prefix produced by the long-simple
/// word construction with n connectors, p is the full output, and the
/// returns are the shortest first-return letters of A_p.
/// (p_prime, p, returns) for the uniform-expansion verifier.
pub type MargulisWords = (Word<SymbolLetter>, Word<SymbolLetter>, Vec<Word<SymbolLetter>>);

pub fn margulis_default_words(
    graph: &AlphabetGraph,
    q: &Word<SymbolLetter>,
    connectors: u32,
    return_count: usize,
) -> Result<MargulisWords> {
    let ls = long_simple_word(graph, q, connectors)?;
    let p = ls.word;
    let p_prime = Word::unchecked(p.letters()[..ls.prefix_len].to_vec());
    let p_weight: u32 = p.letters().iter().map(|l| l.n).sum();
    let mut bound = p_weight + 4;
    loop {
        let mut rets = mb_alphabet(graph, &p, bound)?;
        if rets.len() >= return_count || bound > p_weight + 16 {
            rets.truncate(return_count);
            return Ok((p_prime, p, rets));
        }
        bound += 2;
    }
}

/// One cell of the depth-1 stationarity comparison.
#[derive(Clone, Debug, Serialize)]
pub struct StationarityCell {
    pub label: String,
    pub freq_direct: f64,
    pub se_direct: f64,
    pub freq_pullback: f64,
    pub se_pullback: f64,
    /// |difference| in combined standard errors
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub cells: Vec<StationarityCell>,
    pub max_z: f64,
    /// sum of direct frequencies (must be 1: the cells partition)
    pub direct_total: f64,
    pub iterations: u64,
    pub seed: u64,
    pub restarts: u64,
}

/// Compares depth-1 cylinder frequencies against their one-step pull-back
/// measured on an independently seeded orbit: a two-sample stationarity
/// check of the empirical law. Letters are bucketed by (c, min(n, n_cut),
/// pi), with n = n_cut standing for the tail.
pub fn stationarity_check(
    graph: &AlphabetGraph,
    pi: &Permutation,
    n_cut: u32,
    cfg: &MonteCarloConfig,
) -> Result<StationarityReport> {
    if cfg.iterations < 10_000 {
        return Err(Error::InvalidInput("need at least 10^4 iterations".into()));
    }
    let class = graph.class();
    let cells_per_pi = 2 * n_cut as usize;
    let n_cells = cells_per_pi * class.len();
    let classify = |l: &SymbolLetter| -> usize {
        let c = match l.c {
            crate::perm::RauzyOp::A => 0usize,
            crate::perm::RauzyOp::B => 1usize,
        };
        let n = (l.n.min(n_cut) - 1) as usize;
        let pidx = class.index_of(&l.pi).unwrap_or(0);
        (pidx * cells_per_pi) + c * n_cut as usize + n
    };

    let count_run = |seed_offset: u64, skip_first: bool| -> (Vec<u64>, u64, u64) {
        let mut counts = vec![0u64; n_cells];
        let mut total = 0u64;
        let sub = MonteCarloConfig {
            seed: cfg.seed.wrapping_add(seed_offset),
            ..cfg.clone()
        };
        let outs = map_chunks(&sub, |idx| {
            let len = sub.chunk_len(idx);
            let mut counts = vec![0u64; n_cells];
            let mut total = 0u64;
            let mut first_of_run = true;
            let restarts = run_orbit(pi, len, sub.chunk_seed(idx), sub.t_cap, |ev| match ev {
                OrbitEvent::Letter(l, _) => {
                    if !(skip_first && first_of_run) {
                        counts[classify(l)] += 1;
                        total += 1;
                    }
                    first_of_run = false;
                }
                OrbitEvent::Restart => {
                    first_of_run = true;
                }
            });
            (counts, total, restarts)
        });
        let mut restarts = 0u64;
        for (c, t, r) in outs {
            for (a, b) in counts.iter_mut().zip(&c) {
                *a += b;
            }
            total += t;
            restarts += r;
        }
        (counts, total, restarts)
    };

    // direct frequencies on one orbit family; pulled-back (shifted by one
    // step) frequencies on an independently seeded family
    let (direct, total_a, restarts_a) = count_run(0, false);
    let (pulled, total_b, restarts_b) = count_run(0x5EED_0FF5E7, true);

    let mut cells = Vec::new();
    let mut max_z = 0.0f64;
    let mut direct_total = 0.0;
    for idx in 0..n_cells {
        let fa = direct[idx] as f64 / total_a as f64;
        let fb = pulled[idx] as f64 / total_b as f64;
        if direct[idx] == 0 && pulled[idx] == 0 {
            continue;
        }
        let sa = (fa * (1.0 - fa) / total_a as f64).sqrt();
        let sb = (fb * (1.0 - fb) / total_b as f64).sqrt();
        let z = (fa - fb).abs() / (sa * sa + sb * sb).sqrt();
        max_z = max_z.max(z);
        direct_total += fa;
        let pidx = idx / cells_per_pi;
        let rem = idx % cells_per_pi;
        let c = if rem / n_cut as usize == 0 { 'a' } else { 'b' };
        let n = rem % n_cut as usize + 1;
        let tail = if n as u32 == n_cut { "+" } else { "" };
        cells.push(StationarityCell {
            label: format!("{c}:{n}{tail}:[{}]", class.members()[pidx]),
            freq_direct: fa,
            se_direct: sa,
            freq_pullback: fb,
            se_pullback: sb,
            z,
        });
    }
    Ok(StationarityReport {
        cells,
        max_z,
        direct_total,
        iterations: cfg.iterations,
        seed: cfg.seed,
        restarts: restarts_a + restarts_b,
    })
}
