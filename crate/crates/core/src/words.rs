//! Countable-alphabet word algebra: admissible words over a directed graph,
//! simple prefixes, first-return (Markov-Bernoulli) alphabets, and the
//! long-simple-word constructor.
//!
//! The algebra is generic over the graph. It is instantiated by the
//! induction alphabet of letters (c, n, pi) with its incidence relation,
//! and by complete graphs over arbitrary finite letter sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{Permutation, RauzyClass, RauzyOp};

/// A letter of the induction alphabet: c in {a,b}, a positive count n,
/// and the permutation at which the run starts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolLetter {
    pub c: RauzyOp,
    pub n: u32,
    pub pi: Permutation,
}

impl SymbolLetter {
    pub fn new(c: RauzyOp, n: u32, pi: Permutation) -> Self {
        SymbolLetter { c, n, pi }
    }
}

impl fmt::Debug for SymbolLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{}:[{}])", self.c, self.n, self.pi)
    }
}

impl fmt::Display for SymbolLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:[{}]", self.c, self.n, self.pi)
    }
}

/// A finite admissible path in a letter graph. The empty word is admitted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word<V> {
    letters: Vec<V>,
}

impl<V: Clone + Ord + fmt::Debug> Word<V> {
    pub fn empty() -> Self {
        Word { letters: Vec::new() }
    }

    pub fn single(v: V) -> Self {
        Word { letters: vec![v] }
    }

    /// Builds a word after checking consecutive letters are graph edges.
    pub fn checked<G: WordGraph<V = V>>(graph: &G, letters: Vec<V>) -> Result<Self> {
        for pair in letters.windows(2) {
            if !graph.is_edge(&pair[0], &pair[1]) {
                return Err(Error::InvalidInput(format!(
                    "inadmissible junction {:?} -> {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Word { letters })
    }

    /// Builds a word from letters already known to be admissible.
    pub fn unchecked(letters: Vec<V>) -> Self {
        Word { letters }
    }

    pub fn letters(&self) -> &[V] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<&V> {
        self.letters.first()
    }

    pub fn last(&self) -> Option<&V> {
        self.letters.last()
    }

    /// Concatenation; the junction must be a graph edge unless a side is empty.
    pub fn concat<G: WordGraph<V = V>>(&self, graph: &G, other: &Word<V>) -> Result<Word<V>> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        let u = self.last().unwrap();
        let v = other.first().unwrap();
        if !graph.is_edge(u, v) {
            return Err(Error::InvalidInput(format!(
                "inadmissible junction {u:?} -> {v:?}"
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Word { letters })
    }

    pub fn starts_with(&self, prefix: &Word<V>) -> bool {
        self.letters.starts_with(&prefix.letters)
    }

    pub fn ends_with(&self, suffix: &Word<V>) -> bool {
        self.letters.ends_with(&suffix.letters)
    }

    /// All start positions at which `sub` occurs in this word.
    pub fn occurrences(&self, sub: &Word<V>) -> Vec<usize> {
        occurrence_positions(&self.letters, &sub.letters)
    }

    /// Whether the prefix of the given length is a simple prefix: no shift
    /// k with 2 <= k <= prefix_len such that (v_1..v_{n-k+1}) = (v_k..v_n).
    pub fn is_simple_prefix_len(&self, prefix_len: usize) -> bool {
        let n = self.len();
        if prefix_len > n || n == 0 {
            return false;
        }
        let z = z_array(&self.letters);
        // overlap at shift i reaches the end iff z[i] == n - i
        !z[1..prefix_len].iter().enumerate().any(|(k, &zi)| zi == n - (k + 1))
    }

    /// A simple word admits no nontrivial self-overlap at all.
    pub fn is_simple_word(&self) -> bool {
        self.is_simple_prefix_len(self.len())
    }
}

/// Z-array: z[i] = length of the longest common prefix of w and w[i..].
fn z_array<V: PartialEq>(w: &[V]) -> Vec<usize> {
    let n = w.len();
    let mut z = vec![0usize; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0usize, 0usize);
    for i in 1..n {
        let mut k = if i < r { (z[i - l]).min(r - i) } else { 0 };
        while i + k < n && w[k] == w[i + k] {
            k += 1;
        }
        z[i] = k;
        if i + k > r {
            l = i;
            r = i + k;
        }
    }
    z
}

fn occurrence_positions<V: PartialEq>(seq: &[V], sub: &[V]) -> Vec<usize> {
    if sub.is_empty() || sub.len() > seq.len() {
        return Vec::new();
    }
    (0..=seq.len() - sub.len())
        .filter(|&i| &seq[i..i + sub.len()] == sub)
        .collect()
}

/// `prefix` must literally be a prefix of `w`; then decides simplicity.
pub fn is_simple_prefix<V: Clone + Ord + fmt::Debug>(prefix: &Word<V>, w: &Word<V>) -> Result<bool> {
    if !w.starts_with(prefix) || prefix.is_empty() {
        return Err(Error::InvalidInput(
            "first argument must be a nonempty prefix of the second".into(),
        ));
    }
    Ok(w.is_simple_prefix_len(prefix.len()))
}

/// Directed letter graph with enough structure for bounded enumeration.
pub trait WordGraph {
    type V: Clone + Ord + fmt::Debug;

    fn is_edge(&self, u: &Self::V, v: &Self::V) -> bool;

    /// Successor letters whose weight is at most `weight_cap`, sorted.
    fn successors(&self, u: &Self::V, weight_cap: u32) -> Vec<Self::V>;

    /// Enumeration weight of a letter (1 on plain graphs; the run count n
    /// on the induction alphabet).
    fn letter_weight(&self, _v: &Self::V) -> u32 {
        1
    }

    /// A vertex not occurring in `avoid`; None when the graph is exhausted.
    fn fresh_vertex(&self, avoid: &BTreeSet<Self::V>) -> Option<Self::V>;

    /// Lexicographically least shortest path from u to v, inclusive of both
    /// endpoints. `[u]` when u == v.
    fn shortest_path(&self, u: &Self::V, v: &Self::V) -> Result<Vec<Self::V>>;
}

pub fn word_weight<G: WordGraph>(graph: &G, w: &Word<G::V>) -> u32 {
    w.letters().iter().map(|v| graph.letter_weight(v)).sum()
}

/// Complete graph over a fixed finite letter set: every pair is an edge.
#[derive(Clone, Debug)]
pub struct CompleteGraph<V> {
    letters: Vec<V>,
}

impl<V: Clone + Ord + fmt::Debug> CompleteGraph<V> {
    pub fn new(mut letters: Vec<V>) -> Self {
        letters.sort();
        letters.dedup();
        CompleteGraph { letters }
    }

    pub fn letters(&self) -> &[V] {
        &self.letters
    }
}

impl<V: Clone + Ord + fmt::Debug> WordGraph for CompleteGraph<V> {
    type V = V;

    fn is_edge(&self, _u: &V, _v: &V) -> bool {
        true
    }

    fn successors(&self, _u: &V, _weight_cap: u32) -> Vec<V> {
        self.letters.clone()
    }

    fn fresh_vertex(&self, avoid: &BTreeSet<V>) -> Option<V> {
        self.letters.iter().find(|v| !avoid.contains(*v)).cloned()
    }

    fn shortest_path(&self, u: &V, v: &V) -> Result<Vec<V>> {
        if u == v {
            Ok(vec![u.clone()])
        } else {
            Ok(vec![u.clone(), v.clone()])
        }
    }
}

/// The induction alphabet {(c, n, pi)} over a fixed Rauzy class, with
/// incidence B((c1,n1,pi1),(c2,n2,pi2)) = 1 iff c2 != c1 and pi2 = c1^n1 pi1.
#[derive(Clone, Debug)]
pub struct AlphabetGraph {
    class: RauzyClass,
    /// cycle decomposition data: op_maps[op][i] = index of op(member i)
    a_map: Vec<usize>,
    b_map: Vec<usize>,
}

impl AlphabetGraph {
    pub fn new(class: RauzyClass) -> Self {
        let a_map = class.members().iter().map(|p| class.index_of(&p.rauzy_a()).unwrap()).collect();
        let b_map = class.members().iter().map(|p| class.index_of(&p.rauzy_b()).unwrap()).collect();
        AlphabetGraph { class, a_map, b_map }
    }

    pub fn for_permutation(pi: &Permutation) -> Result<Self> {
        Ok(Self::new(RauzyClass::enumerate(pi)?))
    }

    pub fn class(&self) -> &RauzyClass {
        &self.class
    }

    fn map_of(&self, op: RauzyOp) -> &[usize] {
        match op {
            RauzyOp::A => &self.a_map,
            RauzyOp::B => &self.b_map,
        }
    }

    /// op^n applied to a class member, via the op's cycle through it.
    pub fn op_power(&self, op: RauzyOp, pi: &Permutation, n: u32) -> Permutation {
        let map = self.map_of(op);
        let start = self.class.index_of(pi).expect("permutation in class");
        // locate the cycle through `start`
        let mut cycle = vec![start];
        let mut cur = map[start];
        while cur != start {
            cycle.push(cur);
            cur = map[cur];
        }
        let idx = cycle[(n as usize) % cycle.len()];
        self.class.members()[idx].clone()
    }

    /// The permutation after consuming one letter: c^n pi.
    pub fn letter_target(&self, letter: &SymbolLetter) -> Permutation {
        self.op_power(letter.c, &letter.pi, letter.n)
    }

    /// Distance-to-target over the n <= cap sub-alphabet, by backward BFS.
    fn dists_to(&self, target: &SymbolLetter, cap: u32) -> BTreeMap<SymbolLetter, u32> {
        let mut dist: BTreeMap<SymbolLetter, u32> = BTreeMap::new();
        let mut queue = VecDeque::new();
        dist.insert(target.clone(), 0);
        queue.push_back(target.clone());
        while let Some(w) = queue.pop_front() {
            let d = dist[&w];
            // predecessors (c', n', pi') with c' != w.c and c'^{n'} pi' = w.pi
            let c_prev = w.c.other();
            for n_prev in 1..=cap {
                // pi' = (c_prev^{-n'}) w.pi via cycle arithmetic
                let map = self.map_of(c_prev);
                let ti = self.class.index_of(&w.pi).unwrap();
                let mut cycle = vec![ti];
                let mut cur = map[ti];
                while cur != ti {
                    cycle.push(cur);
                    cur = map[cur];
                }
                let len = cycle.len() as u32;
                let back = ((len - (n_prev % len)) % len) as usize;
                let pi_prev = self.class.members()[cycle[back]].clone();
                let cand = SymbolLetter::new(c_prev, n_prev, pi_prev);
                if !dist.contains_key(&cand) {
                    dist.insert(cand.clone(), d + 1);
                    queue.push_back(cand);
                }
            }
        }
        dist
    }
}

impl WordGraph for AlphabetGraph {
    type V = SymbolLetter;

    fn is_edge(&self, u: &SymbolLetter, v: &SymbolLetter) -> bool {
        v.c != u.c && self.letter_target(u) == v.pi
    }

    fn successors(&self, u: &SymbolLetter, weight_cap: u32) -> Vec<SymbolLetter> {
        let pi = self.letter_target(u);
        let c = u.c.other();
        (1..=weight_cap)
            .map(|n| SymbolLetter::new(c, n, pi.clone()))
            .collect()
    }

    fn letter_weight(&self, v: &SymbolLetter) -> u32 {
        v.n
    }

    fn fresh_vertex(&self, avoid: &BTreeSet<SymbolLetter>) -> Option<SymbolLetter> {
        let max_n = avoid.iter().map(|l| l.n).max().unwrap_or(0);
        let n = max_n + 1;
        for c in [RauzyOp::A, RauzyOp::B] {
            for pi in self.class.members() {
                let v = SymbolLetter::new(c, n, pi.clone());
                if !avoid.contains(&v) {
                    return Some(v);
                }
            }
        }
        None
    }

    fn shortest_path(&self, u: &SymbolLetter, v: &SymbolLetter) -> Result<Vec<SymbolLetter>> {
        if u == v {
            return Ok(vec![u.clone()]);
        }
        if self.is_edge(u, v) {
            return Ok(vec![u.clone(), v.clone()]);
        }
        let base_cap = 2u32.max(u.n.min(64)).max(v.n.min(64));
        let mut cap = base_cap;
        for _ in 0..6 {
            let dist = self.dists_to(v, cap);
            // distance from u through its capped successors
            let du = self
                .successors(u, cap)
                .iter()
                .filter_map(|s| dist.get(s).map(|d| d + 1))
                .min();
            if let Some(total) = du {
                // greedy lexicographically least descent toward v
                let mut path = vec![u.clone()];
                let mut cur = u.clone();
                let mut remaining = total;
                while remaining > 0 {
                    let next = self
                        .successors(&cur, cap)
                        .into_iter()
                        .find(|s| dist.get(s) == Some(&(remaining - 1)))
                        .expect("distance map is consistent");
                    path.push(next.clone());
                    cur = next;
                    remaining -= 1;
                }
                return Ok(path);
            }
            cap *= 2;
        }
        Err(Error::CapExceeded(format!(
            "no path from {u:?} to {v:?} within letter cap"
        )))
    }
}

/// First-return alphabet A_w: all words starting and ending with w and
/// containing no other occurrence of w, enumerated to a total weight bound.
pub fn mb_alphabet<G: WordGraph>(graph: &G, w: &Word<G::V>, weight_bound: u32) -> Result<Vec<Word<G::V>>> {
    if w.is_empty() {
        return Err(Error::InvalidInput("base word must be nonempty".into()));
    }
    let base = word_weight(graph, w);
    let mut out: Vec<Word<G::V>> = Vec::new();
    // iterative DFS over extensions of w; a branch closes at the first
    // reoccurrence of w as a suffix
    let mut stack: Vec<(Vec<G::V>, u32)> = vec![(w.letters().to_vec(), base)];
    while let Some((cur, weight)) = stack.pop() {
        let last = cur.last().unwrap();
        let room = weight_bound.saturating_sub(weight);
        if room == 0 {
            continue;
        }
        // reverse so the stack pops successors in ascending order
        for succ in graph.successors(last, room).into_iter().rev() {
            let sw = graph.letter_weight(&succ);
            if sw > room {
                continue;
            }
            let mut ext = cur.clone();
            ext.push(succ);
            if ext.len() > w.len() && ext.ends_with(w.letters()) {
                out.push(Word::unchecked(ext));
            } else {
                stack.push((ext, weight + sw));
            }
        }
    }
    out.sort_by_key(|a| (word_weight(graph, a), a.clone()));
    Ok(out)
}

/// Result of factorizing a letter sequence into first returns to w.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization<V> {
    pub letters: Vec<Word<V>>,
    /// trailing segment with no closing occurrence of w, if any
    pub truncated_tail: Option<Vec<V>>,
}

/// Factorizes `seq` (which must start with w) into A_w letters between
/// consecutive occurrences of w.
pub fn mb_factorize<V: Clone + Ord + fmt::Debug>(seq: &[V], w: &Word<V>) -> Result<Factorization<V>> {
    if w.is_empty() {
        return Err(Error::InvalidInput("base word must be nonempty".into()));
    }
    if !seq.starts_with(w.letters()) {
        return Err(Error::InvalidInput("sequence must start with the base word".into()));
    }
    let occ = occurrence_positions(seq, w.letters());
    let l = w.len();
    let mut letters = Vec::new();
    for pair in occ.windows(2) {
        letters.push(Word::unchecked(seq[pair[0]..pair[1] + l].to_vec()));
    }
    let last = *occ.last().unwrap();
    let truncated_tail = if last + l < seq.len() {
        Some(seq[last..].to_vec())
    } else {
        None
    };
    Ok(Factorization { letters, truncated_tail })
}

/// Inverse of factorization: overlap-joins return letters, merging the
/// closing w of each letter with the opening w of the next.
pub fn mb_join<V: Clone + Ord + fmt::Debug>(letters: &[Word<V>], w_len: usize) -> Vec<V> {
    let mut seq: Vec<V> = Vec::new();
    for (i, a) in letters.iter().enumerate() {
        if i == 0 {
            seq.extend_from_slice(a.letters());
        } else {
            seq.extend_from_slice(&a.letters()[w_len..]);
        }
    }
    seq
}

/// Output of the long-simple-word construction.
#[derive(Clone, Debug)]
pub struct LongSimpleWord<V> {
    pub word: Word<V>,
    /// start positions of the constructed occurrences of the base word
    pub occurrence_positions: Vec<usize>,
    /// length of the designated simple prefix (everything before the final
    /// occurrence of the base word)
    pub prefix_len: usize,
}

/// Builds w' = w u_1 w u_2 ... u_n w whose prefix w u_1 ... u_n is simple,
/// by the fresh-vertex and shortest-path construction. The output contains
/// n+1 constructed, pairwise disjoint occurrences of w.
pub fn long_simple_word<G: WordGraph>(graph: &G, w: &Word<G::V>, n: u32) -> Result<LongSimpleWord<G::V>> {
    if w.is_empty() || n == 0 {
        return Err(Error::InvalidInput("need a nonempty base word and n >= 1".into()));
    }
    let v_minus = w.first().unwrap().clone();
    let v_plus = w.last().unwrap().clone();
    let mut avoid: BTreeSet<G::V> = w.letters().iter().cloned().collect();

    // pieces in paper order: w, p_1, m_1, w, p_2, m_2, ..., w
    let mut pieces: Vec<Vec<G::V>> = vec![w.letters().to_vec()];
    for _ in 0..n {
        let vk = graph
            .fresh_vertex(&avoid)
            .ok_or_else(|| Error::InvalidInput("graph exhausted: no fresh vertex".into()))?;
        let to_vk = graph.shortest_path(&v_plus, &vk)?;
        let from_vk = graph.shortest_path(&vk, &v_minus)?;
        avoid.extend(to_vk.iter().cloned());
        avoid.extend(from_vk.iter().cloned());
        pieces.push(to_vk);
        pieces.push(from_vk);
        pieces.push(w.letters().to_vec());
    }

    // drop the last letter of every piece but the final w, then concatenate
    let mut letters: Vec<G::V> = Vec::new();
    let mut occurrence_positions = Vec::new();
    let last = pieces.len() - 1;
    for (i, piece) in pieces.iter().enumerate() {
        if i % 3 == 0 {
            occurrence_positions.push(letters.len());
        }
        if i == last {
            letters.extend_from_slice(piece);
        } else {
            letters.extend_from_slice(&piece[..piece.len() - 1]);
        }
    }
    let word = Word::checked(graph, letters)?;
    let prefix_len = *occurrence_positions.last().unwrap();
    debug_assert!(word.is_simple_prefix_len(prefix_len));
    Ok(LongSimpleWord { word, occurrence_positions, prefix_len })
}

/// Parses the plain-text word grammar: letters "c:n" or "c:n:[images]"
/// joined by dots, e.g. "a:1.b:1" or "a:2:[3,2,1].b:1:[3,1,2]".
/// Permutations omitted from letters are inferred by following the class
/// along the word from `start`.
pub fn parse_word(s: &str, start: &Permutation) -> Result<Word<SymbolLetter>> {
    let graph = AlphabetGraph::for_permutation(start)?;
    let s = s.trim();
    if s.is_empty() {
        return Ok(Word::empty());
    }
    let mut letters: Vec<SymbolLetter> = Vec::new();
    let mut pi = start.clone();
    for tok in s.split('.') {
        let parts: Vec<&str> = tok.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::InvalidInput(format!("bad letter token {tok:?}")));
        }
        let c: RauzyOp = parts[0].parse()?;
        let n: u32 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad run count in {tok:?}")))?;
        if n == 0 {
            return Err(Error::InvalidInput("run count must be positive".into()));
        }
        if parts.len() == 3 {
            let img = parts[2].trim_start_matches('[').trim_end_matches(']');
            let explicit: Permutation = img.parse()?;
            if explicit != pi {
                return Err(Error::InvalidInput(format!(
                    "letter {tok:?} carries permutation [{explicit}] but the path implies [{pi}]"
                )));
            }
        }
        if let Some(prev) = letters.last() {
            if prev.c == c {
                return Err(Error::InvalidInput(format!(
                    "consecutive letters must alternate operations, got {} then {}",
                    prev.c, c
                )));
            }
        }
        let letter = SymbolLetter::new(c, n, pi.clone());
        pi = graph.letter_target(&letter);
        letters.push(letter);
    }
    Ok(Word::unchecked(letters))
}

/// Renders a word in the plain-text grammar with explicit permutations.
pub fn format_word(w: &Word<SymbolLetter>) -> String {
    w.letters()
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary() -> CompleteGraph<u8> {
        CompleteGraph::new(vec![0, 1])
    }

    fn bw(s: &str) -> Word<u8> {
        Word::unchecked(s.bytes().map(|b| b - b'0').collect())
    }

    #[test]
    fn simple_prefix_definition() {
        // "ab" is a simple word
        assert!(is_simple_prefix(&bw("01"), &bw("01")).unwrap());
        // single letters are vacuously simple prefixes
        assert!(is_simple_prefix(&bw("0"), &bw("00")).unwrap());
        // shift k=2 within the prefix range fails for "aba"
        assert!(is_simple_prefix(&bw("01"), &bw("010")).unwrap());
        assert!(!bw("010").is_simple_word()); // border "0"
        assert!(!is_simple_prefix(&bw("010"), &bw("01010")).unwrap()); // k=3 overlap
        assert!(bw("01").is_simple_word());
        assert!(!bw("00").is_simple_word());
        assert!(is_simple_prefix(&bw("1"), &bw("0")).is_err()); // not a prefix
    }

    #[test]
    fn simple_word_prefix_is_simple_prefix() {
        // a simple word that is a prefix of another word is a simple prefix of it
        for wlen in 1..=8usize {
            for bits in 0..(1u32 << wlen) {
                let letters: Vec<u8> = (0..wlen).map(|i| ((bits >> i) & 1) as u8).collect();
                let w = Word::unchecked(letters.clone());
                if !w.is_simple_word() {
                    continue;
                }
                for extbits in 0..(1u32 << 3) {
                    let mut full = letters.clone();
                    full.extend((0..3).map(|i| ((extbits >> i) & 1) as u8));
                    assert!(
                        Word::unchecked(full).is_simple_prefix_len(wlen),
                        "simple word should be a simple prefix"
                    );
                }
            }
        }
    }

    #[test]
    fn mb_alphabet_binary_example() {
        let g = binary();
        let out = mb_alphabet(&g, &bw("0"), 4).unwrap();
        let expected = vec![bw("00"), bw("010"), bw("0110")];
        assert_eq!(out, expected);
        // too small a bound yields the empty set
        assert!(mb_alphabet(&g, &bw("0"), 1).unwrap().is_empty());
    }

    #[test]
    fn mb_letters_have_no_internal_occurrence() {
        let g = binary();
        for w in [bw("0"), bw("01"), bw("010")] {
            for a in mb_alphabet(&g, &w, 8).unwrap() {
                assert_eq!(a.occurrences(&w), vec![0, a.len() - w.len()]);
            }
        }
    }

    #[test]
    fn factorize_hand_example() {
        let seq: Vec<u8> = vec![0, 1, 0, 0, 1, 1, 0];
        let f = mb_factorize(&seq, &bw("0")).unwrap();
        assert_eq!(f.letters, vec![bw("010"), bw("00"), bw("0110")]);
        assert_eq!(f.truncated_tail, None);
        // now with an open tail
        let seq2: Vec<u8> = vec![0, 1, 0, 1, 1];
        let f2 = mb_factorize(&seq2, &bw("0")).unwrap();
        assert_eq!(f2.letters, vec![bw("010")]);
        assert_eq!(f2.truncated_tail, Some(vec![0, 1, 1]));
    }

    #[test]
    fn factorize_join_roundtrip() {
        let g = binary();
        let w = bw("01");
        let alphabet = mb_alphabet(&g, &w, 8).unwrap();
        assert!(!alphabet.is_empty());
        // build a sequence from letters 0,1,2,... cyclically
        let pick: Vec<Word<u8>> = (0..6).map(|i| alphabet[i % alphabet.len()].clone()).collect();
        let seq = mb_join(&pick, w.len());
        let f = mb_factorize(&seq, &w).unwrap();
        assert_eq!(f.letters, pick);
        assert_eq!(f.truncated_tail, None);
    }

    #[test]
    fn constant_base_word_sequence() {
        // seq = w w w ... factorizes into the shortest self-return letter
        let seq: Vec<u8> = vec![0, 0, 0, 0];
        let f = mb_factorize(&seq, &bw("0")).unwrap();
        assert!(f.letters.iter().all(|a| a == &bw("00")));
        assert_eq!(f.letters.len(), 3);
    }

    #[test]
    fn alphabet_graph_edges() {
        let pi: Permutation = "2,1".parse().unwrap();
        let g = AlphabetGraph::for_permutation(&pi).unwrap();
        let a1 = SymbolLetter::new(RauzyOp::A, 1, pi.clone());
        let b1 = SymbolLetter::new(RauzyOp::B, 1, pi.clone());
        let a2 = SymbolLetter::new(RauzyOp::A, 2, pi.clone());
        assert!(g.is_edge(&a1, &b1));
        assert!(g.is_edge(&b1, &a2));
        assert!(!g.is_edge(&a1, &a2));
        // m=3: permutation component must follow the class
        let pi3: Permutation = "3,2,1".parse().unwrap();
        let g3 = AlphabetGraph::for_permutation(&pi3).unwrap();
        let x = SymbolLetter::new(RauzyOp::A, 1, pi3.clone());
        let good = SymbolLetter::new(RauzyOp::B, 1, pi3.rauzy_a());
        let bad = SymbolLetter::new(RauzyOp::B, 1, pi3.clone());
        assert!(g3.is_edge(&x, &good));
        assert!(!g3.is_edge(&x, &bad));
    }

    #[test]
    fn long_simple_on_alphabet_graph() {
        let pi: Permutation = "2,1".parse().unwrap();
        let g = AlphabetGraph::for_permutation(&pi).unwrap();
        let q = parse_word("a:1.b:1", &pi).unwrap();
        for n in 1..=4 {
            let ls = long_simple_word(&g, &q, n).unwrap();
            assert_eq!(ls.occurrence_positions.len() as u32, n + 1);
            assert!(ls.word.is_simple_prefix_len(ls.prefix_len));
            for &p in &ls.occurrence_positions {
                assert_eq!(&ls.word.letters()[p..p + q.len()], q.letters());
            }
            // constructed occurrences are pairwise disjoint
            for w in ls.occurrence_positions.windows(2) {
                assert!(w[1] - w[0] >= q.len());
            }
        }
    }

    #[test]
    fn word_grammar_roundtrip() {
        let pi: Permutation = "2,1".parse().unwrap();
        let w = parse_word("a:1.b:1.a:2.b:1", &pi).unwrap();
        assert_eq!(w.len(), 4);
        let s = format_word(&w);
        assert!(s.starts_with("a:1:[2,1]."));
        let back = parse_word(&s, &pi).unwrap();
        assert_eq!(back, w);
        // inconsistent explicit permutation is rejected
        assert!(parse_word("a:1.a:1", &pi).is_err());
        let pi3: Permutation = "3,2,1".parse().unwrap();
        assert!(parse_word("a:1:[3,2,1].b:1:[3,2,1]", &pi3).is_err());
        assert!(parse_word("a:1:[3,2,1].b:1:[3,1,2]", &pi3).is_ok());
    }

    #[test]
    fn concat_symbol_letters() {
        let pi: Permutation = "2,1".parse().unwrap();
        let g = AlphabetGraph::for_permutation(&pi).unwrap();
        let u = parse_word("a:1", &pi).unwrap();
        let v = parse_word("b:1", &pi).unwrap();
        let uv = u.concat(&g, &v).unwrap();
        assert_eq!(uv.len(), 2);
        assert!(u.concat(&g, &u).is_err()); // same operation twice
        assert_eq!(Word::empty().concat(&g, &v).unwrap(), v);
        // associativity where defined
        let w3 = parse_word("a:2", &pi).unwrap();
        let left = uv.concat(&g, &w3).unwrap();
        let right = u.concat(&g, &v.concat(&g, &w3).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left.len(), u.len() + v.len() + w3.len());
    }
}
