//! Entropy functionals and pressure-equation solvers: the finite
//! maximizer, the countable-alphabet flow entropy, per-return-letter roof
//! tables, and the truncated estimate of the flow's topological entropy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RenormMatrix;
use crate::words::{AlphabetGraph, SymbolLetter, Word, WordGraph};

/// H(p) = -sum p log p / sum p c, with 0 log 0 = 0.
pub fn entropy_functional(p: &[f64], c: &[f64]) -> Result<f64> {
    if p.len() != c.len() || p.is_empty() {
        return Err(Error::InvalidInput("p and c must be nonempty and match".into()));
    }
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
    }
    if c.iter().any(|&x| !x.is_finite()) {
        return Err(Error::InvalidInput("roof series must converge (finite values)".into()));
    }
    let num: f64 = p.iter().map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 }).sum();
    let den: f64 = p.iter().zip(c).map(|(&x, &ci)| x * ci).sum();
    if den <= 0.0 {
        return Err(Error::Numeric("mean roof must be positive".into()));
    }
    Ok(num / den)
}

/// Root of a strictly decreasing function F with F(beta) = 1: bisection to
/// bracket, then Newton with bracket safeguards. Returns (beta, bracket,
/// residual).
fn solve_decreasing_eq_one(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    tol: f64,
) -> Result<(f64, (f64, f64), f64)> {
    let f0 = f(0.0);
    if f0.is_nan() {
        return Err(Error::Numeric("F(0) is not a number".into()));
    }
    // F(0) = +inf is fine: the series may diverge below the root
    if f0 < 1.0 {
        return Err(Error::Numeric(format!("no nonnegative root: F(0) = {f0} < 1")));
    }
    if (f0 - 1.0).abs() <= tol {
        return Ok((0.0, (0.0, 0.0), (f0 - 1.0).abs()));
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut guard = 0;
    while f(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 80 {
            return Err(Error::Numeric("root bracket expansion failed".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi) {
            break;
        }
    }
    // Newton polish from the midpoint, kept inside the bracket
    let mut x = 0.5 * (lo + hi);
    for _ in 0..40 {
        let fx = f(x) - 1.0;
        if fx.abs() <= tol {
            break;
        }
        let d = df(x);
        let step = if d != 0.0 && fx.is_finite() { -fx / d } else { 0.0 };
        let next = x + step;
        x = if next > lo && next < hi && step != 0.0 {
            next
        } else {
            0.5 * (lo + hi)
        };
        if f(x) >= 1.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    let residual = (f(x) - 1.0).abs();
    Ok((x, (lo, hi), residual))
}

/// The unique maximizer of H over the simplex for finitely many roofs:
/// beta solves F_n(beta) = sum e^{-beta c_i} = 1 and p_i = e^{-beta c_i}.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteMaxEntropy {
    pub beta: f64,
    pub weights: Vec<f64>,
    pub residual: f64,
}

pub fn maximize_entropy_finite(c: &[f64]) -> Result<FiniteMaxEntropy> {
    if c.len() < 2 {
        return Err(Error::InvalidInput("need at least two roof values".into()));
    }
    if c.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
        return Err(Error::InvalidInput("roof values must be positive".into()));
    }
    let f = |beta: f64| c.iter().map(|&ci| (-beta * ci).exp()).sum::<f64>();
    let df = |beta: f64| c.iter().map(|&ci| -ci * (-beta * ci).exp()).sum::<f64>();
    let (beta, _, residual) = solve_decreasing_eq_one(f, df, 1e-14)?;
    let weights: Vec<f64> = c.iter().map(|&ci| (-beta * ci).exp()).collect();
    Ok(FiniteMaxEntropy { beta, weights, residual })
}

/// How a flow-entropy value was determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveRoute {
    /// F(beta) = 1 solved over the (possibly truncated) series.
    Root,
    /// No root; the value is the divergence abscissa sup{beta : F = inf}.
    DivergenceAbscissa,
    /// Fewer than two retained terms; the root degenerates to beta = 0.
    TruncationDominated,
}

/// A solved entropy value with its bracket and truncation diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    pub beta: f64,
    pub bracket: (f64, f64),
    pub truncation_depth: u64,
    /// |F(beta) - 1| when a root was solved; absent on divergence routes
    pub residual: Option<f64>,
    pub route: SolveRoute,
    pub flags: Vec<String>,
}

/// Certified lower bound on F at a beta below the divergence abscissa.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceCertificate {
    pub beta: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BernoulliFlowEntropy {
    pub estimate: EntropyEstimate,
    pub zero_roofs: usize,
    pub certificates: Vec<DivergenceCertificate>,
}

/// Topological entropy of the suspension flow over a countable Bernoulli
/// base with zeroth-coordinate roofs, from a monotone nondecreasing roof
/// enumeration. If the (truncated) equation F(beta) = 1 has a root, that
/// root is returned; otherwise the divergence abscissa sup{beta : F(beta)
/// = infinity} is estimated from the tail growth, with partial sums at
/// sub-abscissa betas reported as divergence certificates.
pub fn bernoulli_flow_entropy(
    roofs: impl IntoIterator<Item = f64>,
    budget: usize,
    tol: f64,
) -> Result<BernoulliFlowEntropy> {
    if budget < 2 {
        return Err(Error::InvalidInput("budget must be at least 2".into()));
    }
    let mut c: Vec<f64> = Vec::new();
    let mut truncated = false;
    for (i, v) in roofs.into_iter().enumerate() {
        if i >= budget {
            truncated = true;
            break;
        }
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInput(format!("bad roof value {v}")));
        }
        if let Some(&prev) = c.last() {
            if v < prev - 1e-12 {
                return Err(Error::InvalidInput(
                    "roof enumeration must be monotone nondecreasing".into(),
                ));
            }
        }
        c.push(v);
    }
    if c.len() < 2 {
        return Err(Error::InvalidInput("need at least two roof values".into()));
    }
    let n = c.len();
    let zero_roofs = c.iter().filter(|&&x| x == 0.0).count();
    let partial = |beta: f64| c.iter().map(|&ci| (-beta * ci).exp()).sum::<f64>();

    // root of the truncated equation, when one exists
    let root = if zero_roofs == 0 {
        let f = |beta: f64| partial(beta);
        let df = |beta: f64| c.iter().map(|&ci| -ci * (-beta * ci).exp()).sum::<f64>();
        Some(solve_decreasing_eq_one(f, df, tol)?)
    } else {
        None
    };

    // divergence abscissa estimate from the tail: sup limsup log n / c_n
    let mut absc: Option<(f64, f64)> = None;
    if truncated {
        let window = &c[n / 2..];
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (j, &ci) in window.iter().enumerate() {
            if ci <= 0.0 {
                continue;
            }
            let count = (n / 2 + j + 1) as f64;
            let d = count.ln() / ci;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if hi > 0.0 && lo.is_finite() {
            absc = Some((lo, hi));
        }
    }

    let mut flags = Vec::new();
    let (beta, bracket, residual, route) = match (root, absc) {
        (Some((b, br, res)), None) => (b, br, Some(res), SolveRoute::Root),
        (Some((b, br, res)), Some((alo, ahi))) => {
            if ahi > b {
                flags.push("tail growth exceeds the truncated root".into());
                (ahi, (alo.min(b), ahi), None, SolveRoute::DivergenceAbscissa)
            } else {
                (b, br, Some(res), SolveRoute::Root)
            }
        }
        (None, Some((alo, ahi))) => {
            let mid = 0.5 * (alo + ahi);
            (mid, (alo, ahi), None, SolveRoute::DivergenceAbscissa)
        }
        (None, None) => {
            flags.push("no root and no tail signal; entropy defaults to 0".into());
            (0.0, (0.0, 0.0), None, SolveRoute::TruncationDominated)
        }
    };

    // certified lower bounds on F below the abscissa
    let mut certificates = Vec::new();
    if route == SolveRoute::DivergenceAbscissa {
        for eps in [0.05, 0.1] {
            let b = (beta - eps).max(0.0);
            certificates.push(DivergenceCertificate { beta: b, partial_sum: partial(b) });
        }
    }
    if let Some(r) = residual {
        if r > tol {
            flags.push(format!("residual {r:.3e} above tolerance {tol:.1e}"));
        }
    }

    Ok(BernoulliFlowEntropy {
        estimate: EntropyEstimate {
            beta,
            bracket,
            truncation_depth: n as u64,
            residual,
            route,
            flags,
        },
        zero_roofs,
        certificates,
    })
}

/// Roof data for one first-return letter of A_q.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoofEntry {
    /// number of alphabet letters in the return word
    pub len: u32,
    /// total induction weight (sum of the run counts n)
    pub weight: u32,
    /// letter roof: log of the Perron eigenvalue of A(word minus its
    /// closing q); the return time of the periodic orbit through the letter
    pub value: f64,
    /// Hilbert diameter of the letter's cylinder (decays in letter length)
    pub radius: f64,
    /// bound on the oscillation of the true roof over the letter cylinder,
    /// from the corner values of the q-cylinder hull
    pub oscillation: f64,
}

/// Per-letter roof table over the first-return alphabet A_q.
#[derive(Clone, Debug, Serialize)]
pub struct RoofTable {
    pub q: Word<SymbolLetter>,
    pub weight_bound: u32,
    pub entries: Vec<RoofEntry>,
    /// Hilbert diameter of the q-cylinder (uniform oscillation bound)
    pub q_diameter: f64,
}

fn check_positive_simple_prefixed(q: &Word<SymbolLetter>, m: usize) -> Result<()> {
    if q.is_empty() {
        return Err(Error::InvalidInput("q must be nonempty".into()));
    }
    if !RenormMatrix::of_word(q, m)?.is_positive() {
        return Err(Error::InvalidInput("q must be a positive word".into()));
    }
    let has_simple_positive_prefix = (1..=q.len()).any(|l| {
        q.is_simple_prefix_len(l)
            && RenormMatrix::of_word(&Word::unchecked(q.letters()[..l].to_vec()), m)
                .map(|a| a.is_positive())
                .unwrap_or(false)
    });
    if !has_simple_positive_prefix {
        return Err(Error::InvalidInput("q must have a simple positive prefix".into()));
    }
    Ok(())
}

/// Depth-first enumeration of A_q with incremental matrix products. The
/// visitor receives (letters, A(word minus closing q), A(word)).
fn enumerate_returns(
    graph: &AlphabetGraph,
    q: &Word<SymbolLetter>,
    weight_bound: u32,
    visit: &mut impl FnMut(&[SymbolLetter], &RenormMatrix, &RenormMatrix),
) -> Result<()> {
    let m = graph.class().members()[0].symbols();
    check_positive_simple_prefixed(q, m)?;
    let ql = q.len();
    let base_weight: u32 = q.letters().iter().map(|l| l.n).sum();
    if base_weight >= weight_bound {
        return Ok(());
    }

    // products[d] = A(letters[..d])
    let mut letters: Vec<SymbolLetter> = q.letters().to_vec();
    let mut products: Vec<RenormMatrix> = Vec::with_capacity(32);
    products.push(RenormMatrix::identity(m));
    for l in q.letters() {
        let next = products.last().unwrap().mul(&RenormMatrix::of_letter(l));
        products.push(next);
    }

    struct Frame {
        choices: Vec<SymbolLetter>,
        next: usize,
    }
    let mut weight = base_weight;
    let mut stack: Vec<Frame> = vec![Frame {
        choices: graph.successors(letters.last().unwrap(), weight_bound - weight),
        next: 0,
    }];
    while let Some(frame) = stack.last_mut() {
        if frame.next >= frame.choices.len() {
            stack.pop();
            if let Some(popped) = letters.pop() {
                if letters.len() >= ql {
                    weight -= popped.n;
                    products.pop();
                } else {
                    // the popped letter belonged to the q prefix: traversal done
                    letters.push(popped);
                    break;
                }
            }
            continue;
        }
        let letter = frame.choices[frame.next].clone();
        frame.next += 1;
        if weight + letter.n > weight_bound {
            continue;
        }
        let product = products.last().unwrap().mul(&RenormMatrix::of_letter(&letter));
        letters.push(letter.clone());
        weight += letter.n;
        products.push(product);
        if letters.len() > ql && letters[letters.len() - ql..] == *q.letters() {
            // first reoccurrence of q closes the return letter
            let a_u = &products[letters.len() - ql];
            let a_full = products.last().unwrap();
            visit(&letters, a_u, a_full);
            let popped = letters.pop().unwrap();
            weight -= popped.n;
            products.pop();
        } else {
            let room = weight_bound - weight;
            stack.push(Frame {
                choices: if room > 0 {
                    graph.successors(letters.last().unwrap(), room)
                } else {
                    Vec::new()
                },
                next: 0,
            });
        }
    }
    Ok(())
}

/// Builds the roof table for all A_q letters of weight up to the bound.
pub fn roof_table(graph: &AlphabetGraph, q: &Word<SymbolLetter>, weight_bound: u32) -> Result<RoofTable> {
    let m = graph.class().members()[0].symbols();
    let a_q = RenormMatrix::of_word(q, m)?;
    let q_diameter = a_q.image_diameter();
    // corners of the q-cylinder hull: normalized columns of A(q)
    let corners: Vec<Vec<f64>> = a_q
        .columns_f64()
        .into_iter()
        .map(|col| {
            let s: f64 = col.iter().sum();
            col.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let mut entries = Vec::new();
    enumerate_returns(graph, q, weight_bound, &mut |letters, a_u, a_full| {
        let value = a_u.spectral_radius().ln();
        let radius = a_full.image_diameter();
        // oscillation: spread of log|A(u) x| over the hull corners
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
        entries.push(RoofEntry {
            len: letters.len() as u32,
            weight: letters.iter().map(|l| l.n).sum(),
            value,
            radius,
            oscillation: (cmax / cmin).ln(),
        });
    })?;
    entries.sort_by(|a, b| {
        (a.weight, a.len)
            .cmp(&(b.weight, b.len))
            .then(a.value.partial_cmp(&b.value).unwrap())
    });
    Ok(RoofTable { q: q.clone(), weight_bound, entries, q_diameter })
}

impl RoofTable {
    /// CSV table of the per-letter roofs.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("len,weight,value,radius,oscillation
");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{:.17e}
",
                e.len, e.weight, e.value, e.radius, e.oscillation
            ));
        }
        out
    }
}

/// Roof table entries together with their words, for small bounds.
pub fn roof_table_with_words(
    graph: &AlphabetGraph,
    q: &Word<SymbolLetter>,
    weight_bound: u32,
) -> Result<Vec<(Word<SymbolLetter>, RoofEntry)>> {
    let mut out = Vec::new();
    enumerate_returns(graph, q, weight_bound, &mut |letters, a_u, a_full| {
        let value = a_u.spectral_radius().ln();
        out.push((
            Word::unchecked(letters.to_vec()),
            RoofEntry {
                len: letters.len() as u32,
                weight: letters.iter().map(|l| l.n).sum(),
                value,
                radius: a_full.image_diameter(),
                oscillation: 0.0,
            },
        ));
    })?;
    out.sort_by_key(|x| (x.1.weight, x.0.clone()));
    Ok(out)
}

/// The truncated flow-entropy estimate with its envelope.
#[derive(Clone, Debug, Serialize)]
pub struct FlowEstimate {
    pub estimate: EntropyEstimate,
    /// beta solved at each intermediate weight bound (nondecreasing)
    pub betas_by_bound: Vec<(u32, f64)>,
    /// [conservative, optimistic] envelope: roofs shifted by +/- the
    /// oscillation bound, the upper side with a geometric tail estimate
    pub envelope: (f64, f64),
    pub letters_used: usize,
    /// estimated truncated mass at the final beta (geometric
    /// extrapolation); absent when the extrapolated tail diverges there
    pub tail_mass_estimate: Option<f64>,
    pub oscillation_bound: f64,
}

/// (beta, bracket, residual, route, flags) of a truncated pressure solve.
type PressureSolution = (f64, (f64, f64), Option<f64>, SolveRoute, Vec<String>);

fn solve_over_entries(values: &[f64], tol: f64) -> Result<PressureSolution> {
    if values.len() < 2 {
        return Ok((
            0.0,
            (0.0, f64::INFINITY),
            None,
            SolveRoute::TruncationDominated,
            vec!["fewer than two retained letters; lower bound only".into()],
        ));
    }
    let f = |beta: f64| values.iter().map(|&v| (-beta * v).exp()).sum::<f64>();
    let df = |beta: f64| values.iter().map(|&v| -v * (-beta * v).exp()).sum::<f64>();
    let (beta, bracket, residual) = solve_decreasing_eq_one(f, df, tol)?;
    Ok((beta, bracket, Some(residual), SolveRoute::Root, Vec::new()))
}

/// Solves the truncated pressure equation over the A_q letters of weight
/// up to `weight_bound`: sum over letters of exp(-beta roof(a)) = 1.
/// Truncation removes positive terms, so betas are nondecreasing in the
/// bound; the envelope widens the roofs by the oscillation bound in both
/// directions and adds a geometric tail estimate on the upper side.
pub fn estimate_htop_flow(
    graph: &AlphabetGraph,
    q: &Word<SymbolLetter>,
    weight_bound: u32,
    tol: f64,
) -> Result<FlowEstimate> {
    let table = roof_table(graph, q, weight_bound)?;
    let entries = &table.entries;
    let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
    let (beta, bracket, residual, route, mut flags) = solve_over_entries(&values, tol)?;

    // intermediate bounds, for the monotonicity diagnostics
    let mut betas_by_bound = Vec::new();
    let min_weight = entries.first().map(|e| e.weight).unwrap_or(0);
    for w in min_weight..=weight_bound {
        let sub: Vec<f64> = entries.iter().filter(|e| e.weight <= w).map(|e| e.value).collect();
        if sub.len() < 2 {
            betas_by_bound.push((w, 0.0));
            continue;
        }
        let (b, _, _, _, _) = solve_over_entries(&sub, tol.max(1e-9))?;
        betas_by_bound.push((w, b));
    }

    let osc = entries.iter().map(|e| e.oscillation).fold(0.0f64, f64::max);

    // conservative side: inflate every roof by its oscillation bound
    let conservative: Vec<f64> = entries.iter().map(|e| e.value + e.oscillation).collect();
    let (env_lo, _, _, _, _) = solve_over_entries(&conservative, tol.max(1e-9))?;

    // optimistic side: deflate roofs and extrapolate the truncated tail
    // at a given beta from the last per-weight mass ratio
    let optimistic: Vec<(u32, f64)> = entries
        .iter()
        .map(|e| (e.weight, (e.value - e.oscillation).max(1e-9)))
        .collect();
    let tail_at = |beta: f64| -> f64 {
        // per-unit geometric ratio from the last two nonempty weight shells
        let mut shells: std::collections::BTreeMap<u32, f64> = Default::default();
        for (w, v) in &optimistic {
            *shells.entry(*w).or_insert(0.0) += (-beta * v).exp();
        }
        let nonempty: Vec<(u32, f64)> = shells.into_iter().filter(|(_, m)| *m > 0.0).collect();
        if nonempty.len() < 2 {
            return if nonempty.is_empty() { 0.0 } else { f64::INFINITY };
        }
        let (w1, m1) = nonempty[nonempty.len() - 2];
        let (w2, m2) = nonempty[nonempty.len() - 1];
        let r = (m2 / m1).powf(1.0 / f64::from(w2 - w1));
        if r >= 1.0 {
            f64::INFINITY
        } else {
            m2 * r / (1.0 - r)
        }
    };
    let f_opt = |beta: f64| {
        optimistic.iter().map(|(_, v)| (-beta * v).exp()).sum::<f64>() + tail_at(beta)
    };
    let df_opt = |beta: f64| {
        // derivative of the explicit part only; the solver's bracket
        // safeguards absorb the tail term
        optimistic.iter().map(|(_, v)| -v * (-beta * v).exp()).sum::<f64>()
    };
    let env_geom = match solve_decreasing_eq_one(f_opt, df_opt, tol.max(1e-9)) {
        Ok((b, _, _)) => b,
        Err(_) => {
            flags.push("upper envelope diverged; reporting +inf".into());
            f64::INFINITY
        }
    };
    // second upper estimate: the truncated root approaches the true value
    // like h - c/W; extrapolate c from the last two weight shells
    let env_extrap = {
        let valid: Vec<(u32, f64)> = betas_by_bound
            .iter()
            .filter(|(_, b)| *b > 0.0)
            .cloned()
            .collect();
        if valid.len() >= 3 {
            let (w2, b2) = valid[valid.len() - 1];
            let (w1, b1) = valid[valid.len() - 3];
            if b2 > b1 && w2 > w1 {
                b2 + (b2 - b1) * f64::from(w1) / f64::from(w2 - w1)
            } else {
                0.0
            }
        } else {
            0.0
        }
    };
    let env_hi = env_geom.max(env_extrap);
    let tail = tail_at(beta);
    let tail_mass_estimate = tail.is_finite().then_some(tail);

    Ok(FlowEstimate {
        estimate: EntropyEstimate {
            beta,
            bracket,
            truncation_depth: weight_bound as u64,
            residual,
            route,
            flags,
        },
        betas_by_bound,
        envelope: (env_lo, env_hi),
        letters_used: entries.len(),
        tail_mass_estimate,
        oscillation_bound: osc,
    })
}

/// Convenience: the shortest return letters of A_q with their roof values,
/// for building verification word families.
pub fn shortest_returns(
    graph: &AlphabetGraph,
    q: &Word<SymbolLetter>,
    weight_bound: u32,
    max_count: usize,
) -> Result<Vec<(Word<SymbolLetter>, RoofEntry)>> {
    let mut all = roof_table_with_words(graph, q, weight_bound)?;
    all.truncate(max_count);
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use crate::words::{mb_alphabet, parse_word};
    use approx::assert_relative_eq;

    fn m2_setup() -> (AlphabetGraph, Word<SymbolLetter>) {
        let pi: Permutation = "2,1".parse().unwrap();
        let g = AlphabetGraph::for_permutation(&pi).unwrap();
        let q = parse_word("a:1.b:1", &pi).unwrap();
        (g, q)
    }

    #[test]
    fn functional_hand_values() {
        let l2 = 2f64.ln();
        assert_relative_eq!(entropy_functional(&[0.5, 0.5], &[1.0, 1.0]).unwrap(), l2);
        assert_relative_eq!(entropy_functional(&[1.0, 0.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert_relative_eq!(entropy_functional(&[0.5, 0.5], &[1.0, 3.0]).unwrap(), l2 / 2.0);
        assert!(entropy_functional(&[0.6, 0.6], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn finite_maximizer_values() {
        let l2 = 2f64.ln();
        let r = maximize_entropy_finite(&[l2, l2]).unwrap();
        assert!((r.beta - 1.0).abs() < 1e-10);
        assert_relative_eq!(r.weights[0], 0.5, epsilon = 1e-10);

        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r2 = maximize_entropy_finite(&[1.0, 2.0]).unwrap();
        assert!((r2.beta - phi.ln()).abs() < 1e-8);

        // the maximizer attains H = beta
        let h = entropy_functional(&r2.weights, &[1.0, 2.0]).unwrap();
        assert_relative_eq!(h, r2.beta, epsilon = 1e-9);
        assert!(maximize_entropy_finite(&[1.0]).is_err());
        assert!(maximize_entropy_finite(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn full_support_of_maximizer() {
        // zeroing any coordinate strictly decreases the functional
        let c = [0.7, 1.3, 2.1, 0.9];
        let r = maximize_entropy_finite(&c).unwrap();
        let h = entropy_functional(&r.weights, &c).unwrap();
        for k in 0..c.len() {
            let mut p = r.weights.clone();
            let removed = p[k];
            p[k] = 0.0;
            let s: f64 = 1.0 - removed;
            for x in p.iter_mut() {
                *x /= s;
            }
            let hk = entropy_functional(&p, &c).unwrap();
            assert!(hk < h - 1e-6, "zeroed coordinate {k} should lose entropy");
        }
    }

    #[test]
    fn bernoulli_finite_matches_maximizer() {
        let l2 = 2f64.ln();
        let r = bernoulli_flow_entropy([l2, l2], 100, 1e-12).unwrap();
        assert_eq!(r.estimate.route, SolveRoute::Root);
        assert!((r.estimate.beta - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zeta_roofs_divergence() {
        // c_i = 2 log i: F = zeta(2 beta), divergent for beta <= 1/2 and
        // never equal to 1; entropy is the abscissa 1/2
        let n = 40_000usize;
        let roofs = (1..=n).map(|i| 2.0 * (i as f64).ln());
        let r = bernoulli_flow_entropy(roofs, n - 1, 1e-10).unwrap();
        assert_eq!(r.estimate.route, SolveRoute::DivergenceAbscissa);
        assert!((r.estimate.beta - 0.5).abs() < 1e-3, "got {}", r.estimate.beta);
        assert!(!r.certificates.is_empty());
        for cert in &r.certificates {
            assert!(cert.partial_sum > 10.0, "partial sums must certify growth");
        }

        let roofs1 = (1..=n).map(|i| (i as f64).ln());
        let r1 = bernoulli_flow_entropy(roofs1, n - 1, 1e-10).unwrap();
        assert!((r1.estimate.beta - 1.0).abs() < 1e-3, "got {}", r1.estimate.beta);
    }

    #[test]
    fn roof_table_m2() {
        let (g, q) = m2_setup();
        let table = roof_table(&g, &q, 10).unwrap();
        assert!(!table.entries.is_empty());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // shortest return letter q.q has roof 2 log phi
        assert_relative_eq!(table.entries[0].value, 2.0 * phi.ln(), epsilon = 1e-10);
        // Lemma-level lower bound: every roof is at least log m
        for e in &table.entries {
            assert!(e.value >= 2f64.ln() - 1e-12);
        }
    }

    #[test]
    fn roof_radius_decays() {
        let (g, q) = m2_setup();
        let with_words = roof_table_with_words(&g, &q, 12).unwrap();
        // group max radius by weight; radii shrink with letter weight
        let mut by_weight: std::collections::BTreeMap<u32, f64> = Default::default();
        for (_, e) in &with_words {
            let r = by_weight.entry(e.weight).or_insert(0.0);
            *r = r.max(e.radius);
        }
        let radii: Vec<f64> = by_weight.values().cloned().collect();
        assert!(radii.last().unwrap() < &radii[0]);
        // geometric trend: fitted log-slope is negative
        let n = radii.len() as f64;
        let slope: f64 = {
            let xs: Vec<f64> = (0..radii.len()).map(|i| i as f64).collect();
            let ys: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
            let xm = xs.iter().sum::<f64>() / n;
            let ym = ys.iter().sum::<f64>() / n;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
            num / den
        };
        assert!(slope < -0.1, "radius should decay geometrically, slope {slope}");
    }

    #[test]
    fn rejects_nonpositive_q() {
        let pi: Permutation = "2,1".parse().unwrap();
        let g = AlphabetGraph::for_permutation(&pi).unwrap();
        let single = parse_word("a:1", &pi).unwrap();
        assert!(roof_table(&g, &single, 8).is_err());
    }

    #[test]
    fn flow_estimate_monotone() {
        let (g, q) = m2_setup();
        let r = estimate_htop_flow(&g, &q, 12, 1e-6).unwrap();
        let betas: Vec<f64> = r.betas_by_bound.iter().map(|(_, b)| *b).collect();
        for w in betas.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "betas must be nondecreasing in the bound");
        }
        assert!(r.envelope.0 <= r.estimate.beta);
        assert!(r.envelope.1 >= r.estimate.beta);
        // crude truncation: the estimate is a lower bound, still below 2
        assert!(r.estimate.beta < 2.0);
        assert!(r.estimate.beta > 1.0);
    }

    #[test]
    fn flow_estimate_truncation_dominated() {
        let (g, q) = m2_setup();
        // bound so small that at most one letter is retained
        let r = estimate_htop_flow(&g, &q, 4, 1e-6).unwrap();
        assert_eq!(r.estimate.route, SolveRoute::TruncationDominated);
        assert!(!r.estimate.flags.is_empty());
    }

    #[test]
    fn mb_alphabet_agrees_with_enumeration() {
        let (g, q) = m2_setup();
        let words = mb_alphabet(&g, &q, 10).unwrap();
        let table = roof_table(&g, &q, 10).unwrap();
        assert_eq!(words.len(), table.entries.len());
        for w in &words {
            assert!(w.starts_with(&q) && w.ends_with(&q));
        }
    }
}
