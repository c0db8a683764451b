//! Interval exchange maps and Rauzy-Veech-Zorich induction.
//!
//! A point is a pair (lambda, pi) with lambda on the open simplex. The
//! induction map T acts by the inverse elementary matrix and renormalizes;
//! the Zorich acceleration G iterates T until the induction type flips and
//! emits one coding letter (c, n, pi) per step. Everything is generic over
//! the numeric backend: exact rationals reproduce the matrix identities
//! bit for bit, floats carry the long Monte-Carlo orbits.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::RenormMatrix;
use crate::perm::{Permutation, RauzyOp};
use crate::scalar::Scalar;
use crate::words::{SymbolLetter, Word};

/// Membership in Delta^+ (the a-branch), Delta^- (the b-branch), or the
/// measure-zero boundary where T is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InductionType {
    Plus,
    Minus,
    Boundary,
}

impl InductionType {
    pub fn op(self) -> Option<RauzyOp> {
        match self {
            InductionType::Plus => Some(RauzyOp::A),
            InductionType::Minus => Some(RauzyOp::B),
            InductionType::Boundary => None,
        }
    }
}

/// An interval exchange map: lengths lambda (|lambda| = 1) and permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct IetPoint<S> {
    lambda: Vec<S>,
    pi: Permutation,
}

/// One step of T: the new point, the operation taken, and the norm
/// |A(c,pi)^{-1} lambda| by which the lengths were rescaled.
#[derive(Clone, Debug)]
pub struct TStep<S> {
    pub point: IetPoint<S>,
    pub op: RauzyOp,
    pub norm: S,
}

/// One step of G: the new point, the emitted letter, the accumulated
/// rescaling factor, and the roof value tau^1 = -ln(factor).
#[derive(Clone, Debug)]
pub struct GStep<S> {
    pub point: IetPoint<S>,
    pub letter: SymbolLetter,
    pub factor: S,
    pub tau1: f64,
}

impl<S: Scalar> IetPoint<S> {
    /// Builds a point, requiring all lengths positive; lengths are
    /// normalized so that |lambda| = 1.
    pub fn new(lambda: Vec<S>, pi: Permutation) -> Result<Self> {
        if lambda.len() != pi.symbols() {
            return Err(Error::InvalidInput(format!(
                "{} lengths for {} symbols",
                lambda.len(),
                pi.symbols()
            )));
        }
        if !lambda.iter().all(|x| x.is_positive()) {
            return Err(Error::InvalidInput("all lengths must be positive".into()));
        }
        let total = lambda.iter().fold(S::zero(), |acc, x| acc.add(x));
        let lambda = lambda.iter().map(|x| x.div(&total)).collect();
        Ok(IetPoint { lambda, pi })
    }

    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn symbols(&self) -> usize {
        self.pi.symbols()
    }

    /// lambda_{pi^{-1} m} and lambda_m, the two competing last lengths.
    fn last_pair(&self) -> (&S, &S) {
        let m = self.symbols();
        let k0 = self.pi.preimage(m) - 1;
        (&self.lambda[k0], &self.lambda[m - 1])
    }

    pub fn induction_type(&self) -> InductionType {
        let (lk, lm) = self.last_pair();
        if lk > lm {
            InductionType::Plus
        } else if lm > lk {
            InductionType::Minus
        } else {
            InductionType::Boundary
        }
    }

    /// Applies the interval exchange to a point of [0, 1).
    pub fn eval(&self, x: &S) -> Result<S> {
        if !(x >= &S::zero() && x < &S::one()) {
            return Err(Error::InvalidInput("point outside [0,1)".into()));
        }
        let m = self.symbols();
        // locate the interval I_k containing x
        let mut left = S::zero();
        let mut k = m;
        for i in 1..=m {
            let right = left.add(&self.lambda[i - 1]);
            if x < &right || i == m {
                k = i;
                break;
            }
            left = right;
        }
        // new left endpoint: total length of intervals placed before I_k
        let pk = self.pi.image(k);
        let mut new_left = S::zero();
        for j in 1..=m {
            if self.pi.image(j) < pk {
                new_left = new_left.add(&self.lambda[j - 1]);
            }
        }
        Ok(new_left.add(&x.sub(&left)))
    }

    /// Left endpoints beta_1..beta_{m-1} of I_2..I_m (the discontinuities).
    pub fn discontinuities(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.symbols() - 1);
        let mut acc = S::zero();
        for i in 0..self.symbols() - 1 {
            acc = acc.add(&self.lambda[i]);
            out.push(acc.clone());
        }
        out
    }

    /// One step of Rauzy-Veech induction. Fails on the boundary.
    pub fn step_t(&self) -> Result<TStep<S>> {
        let op = self.induction_type().op().ok_or_else(|| {
            Error::Degenerate("boundary point: lambda_m = lambda_{pi^-1 m}, T undefined".into())
        })?;
        let u = crate::matrix::apply_elementary_inverse(op, &self.pi, &self.lambda);
        let norm = u.iter().fold(S::zero(), |acc, x| acc.add(x));
        let lambda = u.iter().map(|x| x.div(&norm)).collect();
        Ok(TStep {
            point: IetPoint {
                lambda,
                pi: self.pi.apply_op(op),
            },
            op,
            norm,
        })
    }

    /// The Zorich count n(lambda, pi): least k > 0 with T^k of opposite type.
    pub fn zorich_n(&self, cap: u64) -> Result<u32> {
        Ok(self.step_g(cap)?.letter.n)
    }

    /// One step of the accelerated induction G = T^{n}, together with the
    /// coding letter. `cap` bounds the number of T-steps.
    pub fn step_g(&self, cap: u64) -> Result<GStep<S>> {
        let start_type = self.induction_type();
        let op = start_type
            .op()
            .ok_or_else(|| Error::Degenerate("boundary point: type undefined".into()))?;
        let mut cur = self.clone();
        let mut factor = S::one();
        let mut n: u32 = 0;
        loop {
            if u64::from(n) >= cap {
                return Err(Error::CapExceeded(format!(
                    "no type flip within {cap} induction steps"
                )));
            }
            let step = cur.step_t()?;
            factor = factor.mul(&step.norm);
            n += 1;
            cur = step.point;
            match cur.induction_type() {
                InductionType::Boundary => {
                    return Err(Error::Degenerate("orbit hit the boundary".into()))
                }
                t if t != start_type => {
                    let tau1 = -Scalar::ln(&factor);
                    return Ok(GStep {
                        point: cur,
                        letter: SymbolLetter::new(op, n, self.pi.clone()),
                        factor,
                        tau1,
                    });
                }
                _ => {}
            }
        }
    }

    /// The first `depth` letters of the coding map, with the endpoint.
    pub fn encode(&self, depth: usize, cap: u64) -> Result<(Word<SymbolLetter>, IetPoint<S>)> {
        let mut letters = Vec::with_capacity(depth);
        let mut cur = self.clone();
        for _ in 0..depth {
            let step = cur.step_g(cap)?;
            letters.push(step.letter);
            cur = step.point;
        }
        Ok((Word::unchecked(letters), cur))
    }

    /// tau^0 = -log(|lambda| - min(lambda_m, lambda_{pi^-1 m})).
    pub fn roof_tau0(&self) -> f64 {
        let (lk, lm) = self.last_pair();
        let min = if lk < lm { lk } else { lm };
        let total = self.lambda.iter().fold(S::zero(), |acc, x| acc.add(x));
        -Scalar::ln(&total.sub(min))
    }

    /// tau^1 = log |A(omega_0) lambda'| with (lambda', pi') = G(lambda, pi),
    /// computed as the exact Birkhoff sum of tau^0 over the T-run.
    pub fn roof_tau1(&self, cap: u64) -> Result<f64> {
        Ok(self.step_g(cap)?.tau1)
    }

    /// tau_q^1: the Birkhoff sum of tau^1 up to the second appearance of q
    /// in the coding. `g_cap` bounds G-steps, `cap` bounds T-steps per G.
    pub fn roof_tauq1(&self, q: &Word<SymbolLetter>, g_cap: usize, cap: u64) -> Result<QRoof> {
        if q.is_empty() {
            return Err(Error::InvalidInput("q must be nonempty".into()));
        }
        let l = q.len();
        // the coding must start with q
        let mut letters: Vec<SymbolLetter> = Vec::new();
        let mut cur = self.clone();
        let mut taus: Vec<f64> = Vec::new();
        for i in 0..l {
            let step = cur.step_g(cap)?;
            if step.letter != q.letters()[i] {
                return Err(Error::InvalidInput(format!(
                    "coding letter {i} is {:?}, point not in the cylinder of q",
                    step.letter
                )));
            }
            letters.push(step.letter);
            taus.push(step.tau1);
            cur = step.point;
        }
        // advance until q reappears at some position s >= 1
        let mut s: Option<usize> = None;
        for _ in 0..g_cap {
            if letters.len() > l {
                let start = letters.len() - l;
                if letters[start..] == *q.letters() {
                    s = Some(start);
                    break;
                }
            }
            let step = cur.step_g(cap)?;
            letters.push(step.letter);
            taus.push(step.tau1);
            cur = step.point;
        }
        // the final window may close exactly at the cap
        if s.is_none() && letters.len() > l && letters[letters.len() - l..] == *q.letters() {
            s = Some(letters.len() - l);
        }
        let s = s.ok_or_else(|| {
            Error::CapExceeded(format!("no second occurrence of q within {g_cap} G-steps"))
        })?;
        Ok(QRoof {
            value: taus[..s].iter().sum(),
            second_occurrence: s,
        })
    }

    /// Finite-depth certificate of Keane's infinite distinct orbit
    /// condition: forward orbits of the discontinuities stay distinct and
    /// avoid the discontinuities for `depth` steps.
    pub fn keane_check(&self, depth: usize) -> bool {
        let disc = self.discontinuities();
        let eq = |x: &S, y: &S| {
            if S::exact() {
                x == y
            } else {
                (x.to_f64() - y.to_f64()).abs() < 1e-12
            }
        };
        let mut orbits: Vec<S> = disc.clone();
        for _ in 0..depth {
            for x in orbits.iter_mut() {
                match self.eval(x) {
                    Ok(y) => *x = y,
                    Err(_) => return false,
                }
            }
            for (i, x) in orbits.iter().enumerate() {
                for b in &disc {
                    if eq(x, b) {
                        return false;
                    }
                }
                for y in &orbits[i + 1..] {
                    if eq(x, y) {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn to_f64_point(&self) -> IetPoint<f64> {
        IetPoint {
            lambda: self.lambda.iter().map(|x| x.to_f64()).collect(),
            pi: self.pi.clone(),
        }
    }
}

/// Roof over the first return to the cylinder of q.
#[derive(Clone, Copy, Debug)]
pub struct QRoof {
    pub value: f64,
    /// index of the second appearance of q in the coding
    pub second_occurrence: usize,
}

/// The golden rotation: m = 2, lambda_1/lambda_2 = golden ratio. Its coding
/// alternates (a,1)(b,1) forever.
pub fn golden_point() -> IetPoint<f64> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    IetPoint::new(vec![phi, 1.0], Permutation::new(vec![2, 1]).unwrap()).unwrap()
}

/// Uniform (Dirichlet) sample on the simplex, as a float point.
pub fn sample_point<R: Rng>(pi: &Permutation, rng: &mut R) -> IetPoint<f64> {
    let m = pi.symbols();
    loop {
        let lambda: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>().ln()).collect();
        if lambda.iter().all(|&x| x > 0.0 && x.is_finite()) {
            if let Ok(p) = IetPoint::new(lambda, pi.clone()) {
                return p;
            }
        }
    }
}

/// Random rational point with numerators up to `denom_bound`.
pub fn sample_rational_point<R: Rng>(
    pi: &Permutation,
    denom_bound: u64,
    rng: &mut R,
) -> IetPoint<BigRational> {
    let m = pi.symbols();
    loop {
        let nums: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=denom_bound)).collect();
        let lambda: Vec<BigRational> = nums
            .iter()
            .map(|&n| BigRational::from_integer(BigInt::from(n)))
            .collect();
        if let Ok(p) = IetPoint::new(lambda, pi.clone()) {
            return p;
        }
    }
}

/// Decoded point with its Hilbert-diameter error certificate.
#[derive(Clone, Debug)]
pub struct Decoded<S> {
    pub point: IetPoint<S>,
    /// Hilbert diameter of the image simplex: an upper bound on the
    /// Hilbert distance from the returned point to the true limit.
    pub hilbert_radius: f64,
}

/// Approximates the unique point whose coding starts with `w` and continues
/// with `tail` repeated `iterations` times, by the projective contraction
/// lambda -> A lambda / |A lambda|. The tail must be a positive word so the
/// contraction is uniform; the Hilbert radius certifies the error.
pub fn decode<S: Scalar>(
    w: &Word<SymbolLetter>,
    tail: &Word<SymbolLetter>,
    iterations: u32,
) -> Result<Decoded<S>> {
    if tail.is_empty() || iterations == 0 {
        return Err(Error::InvalidInput("need a nonempty tail and iterations >= 1".into()));
    }
    let first = w.first().or_else(|| tail.first()).unwrap();
    let m = first.pi.symbols();
    let pi = first.pi.clone();
    // admissibility of w . tail . tail ...: of_word checks every junction,
    // including the tail wraparound
    let mut letters: Vec<SymbolLetter> = w.letters().to_vec();
    for _ in 0..=iterations.min(1) {
        letters.extend_from_slice(tail.letters());
    }
    RenormMatrix::of_word(&Word::unchecked(letters), m)?;

    let a_tail = RenormMatrix::of_word(tail, m)?;
    if !a_tail.is_positive() {
        return Err(Error::InvalidInput(
            "tail word must be positive (all matrix entries > 0)".into(),
        ));
    }
    let mut acc = RenormMatrix::of_word(w, m)?;
    for _ in 0..iterations {
        acc = acc.mul(&a_tail);
    }
    let bary: Vec<S> = (0..m).map(|_| S::one()).collect();
    let image = acc.apply(&bary);
    let point = IetPoint::new(image, pi)?;
    Ok(Decoded {
        point,
        hilbert_radius: acc.image_diameter(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::hilbert_distance;
    use crate::words::parse_word;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn p2() -> Permutation {
        "2,1".parse().unwrap()
    }

    fn pt(nums: &[(i64, i64)], pi: &str) -> IetPoint<BigRational> {
        IetPoint::new(
            nums.iter().map(|&(n, d)| rat(n, d)).collect(),
            pi.parse().unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn eval_rotation() {
        let p = pt(&[(1, 2), (1, 2)], "2,1");
        assert_eq!(p.eval(&rat(1, 4)).unwrap(), rat(3, 4));
        assert_eq!(p.eval(&rat(3, 4)).unwrap(), rat(1, 4));
        assert_eq!(p.eval(&rat(1, 2)).unwrap(), rat(0, 1));
        assert!(p.eval(&rat(5, 4)).is_err());
        assert!(p.eval(&rat(-1, 4)).is_err());
    }

    #[test]
    fn eval_endpoint_maps_to_block_start() {
        let p = pt(&[(1, 4), (1, 4), (1, 2)], "3,2,1");
        // left endpoint of I_2 is beta_1 = 1/4; I_2 is placed after I_3
        assert_eq!(p.eval(&rat(1, 4)).unwrap(), rat(1, 2));
        // left endpoint of I_3 (beta_2 = 1/2) goes to the far left
        assert_eq!(p.eval(&rat(1, 2)).unwrap(), rat(0, 1));
    }

    #[test]
    fn step_t_hand_values() {
        let p = pt(&[(7, 10), (3, 10)], "2,1");
        let s = p.step_t().unwrap();
        assert_eq!(s.op, RauzyOp::A);
        assert_eq!(s.point.lambda(), &[rat(4, 7), rat(3, 7)]);
        assert_eq!(s.norm, rat(7, 10));
        let s2 = s.point.step_t().unwrap();
        assert_eq!(s2.point.lambda(), &[rat(1, 4), rat(3, 4)]);
        let boundary = pt(&[(1, 2), (1, 2)], "2,1");
        assert!(matches!(boundary.step_t(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn zorich_counts() {
        let p = pt(&[(7, 10), (3, 10)], "2,1");
        assert_eq!(p.zorich_n(1000).unwrap(), 2);
        let g = p.step_g(1000).unwrap();
        assert_eq!(g.point.lambda(), &[rat(1, 4), rat(3, 4)]);
        assert_eq!(g.letter, SymbolLetter::new(RauzyOp::A, 2, p2()));
        // type alternation is built into the definition
        assert_ne!(g.point.induction_type(), p.induction_type());
    }

    #[test]
    fn golden_coding_alternates() {
        let g = golden_point();
        let (w, _) = g.encode(6, 1000).unwrap();
        for (i, l) in w.letters().iter().enumerate() {
            assert_eq!(l.n, 1);
            assert_eq!(l.c, if i % 2 == 0 { RauzyOp::A } else { RauzyOp::B });
        }
    }

    #[test]
    fn golden_roofs() {
        let g = golden_point();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(g.roof_tau0(), phi.ln(), epsilon = 1e-12);
        assert_relative_eq!(g.roof_tau1(100).unwrap(), phi.ln(), epsilon = 1e-12);
        let q = parse_word("a:1.b:1", &p2()).unwrap();
        let qr = g.roof_tauq1(&q, 100, 1000).unwrap();
        assert_eq!(qr.second_occurrence, 2);
        assert_relative_eq!(qr.value, 2.0 * phi.ln(), epsilon = 1e-11);
    }

    #[test]
    fn tau0_of_example_point() {
        let p = pt(&[(7, 10), (3, 10)], "2,1");
        assert_relative_eq!(p.roof_tau0(), -(0.7f64.ln()), epsilon = 1e-12);
        // n = 2 here, so tau^1 is the two-step Birkhoff sum of tau^0
        let s = p.step_t().unwrap();
        let expected = p.roof_tau0() + s.point.roof_tau0();
        assert_relative_eq!(p.roof_tau1(100).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn induction_consistency_exact() {
        // lambda = A(c,pi) lambda' / |A(c,pi) lambda'| exactly, rationals
        let p = pt(&[(7, 10), (3, 10)], "2,1");
        let s = p.step_t().unwrap();
        let a = RenormMatrix::of_op(s.op, p.pi());
        let back = a.apply(s.point.lambda());
        let norm = back
            .iter()
            .fold(<BigRational as Scalar>::zero(), |acc, x| acc.add(x));
        let rebuilt: Vec<BigRational> = back.iter().map(|x| x.div(&norm)).collect();
        assert_eq!(rebuilt.as_slice(), p.lambda());
    }

    #[test]
    fn keane_examples() {
        assert!(golden_point().keane_check(50));
        let rational_rotation = pt(&[(1, 2), (1, 2)], "2,1");
        assert!(!rational_rotation.keane_check(5));
        assert!(rational_rotation.keane_check(0)); // vacuous at depth 0
    }

    #[test]
    fn decode_golden_fixed_point() {
        let q = parse_word("a:1.b:1", &p2()).unwrap();
        let mut last_radius = f64::INFINITY;
        for iters in [1u32, 3, 6, 9] {
            let d = decode::<f64>(&q, &q, iters).unwrap();
            let target = golden_point();
            let dist = hilbert_distance(d.point.lambda(), target.lambda()).unwrap();
            assert!(dist <= d.hilbert_radius + 1e-12);
            assert!(d.hilbert_radius < last_radius, "radius must shrink");
            last_radius = d.hilbert_radius;
        }
        // geometric decay: after 9 tail iterations the radius is tiny
        assert!(last_radius < 1e-7);
    }

    #[test]
    fn decode_rejects_nonpositive_tail() {
        let single = parse_word("a:1", &p2()).unwrap();
        assert!(decode::<f64>(&single, &single, 3).is_err());
    }

    #[test]
    fn decode_roundtrip_cylinder() {
        // Fibonacci lengths: a long continued fraction, no early boundary
        let p = pt(&[(987, 1597), (610, 1597)], "2,1");
        let (w, _) = p.encode(3, 1000).unwrap();
        let q = parse_word("a:1.b:1", &p2()).unwrap();
        // glue the tail only if the junction alternates
        let tail = if w.last().unwrap().c == RauzyOp::A {
            parse_word("b:1.a:1", &p2()).unwrap()
        } else {
            q.clone()
        };
        let d = decode::<f64>(&w, &tail, 12).unwrap();
        let (w2, _) = d.point.encode(3, 1000).unwrap();
        assert_eq!(w2, w, "decoded point lies in the coding cylinder");
    }

    #[test]
    fn rational_float_agree() {
        let pr = pt(&[(987, 1597), (610, 1597)], "2,1");
        let pf = IetPoint::new(vec![987.0f64, 610.0], p2()).unwrap();
        let (wr, _) = pr.encode(8, 10_000).unwrap();
        let (wf, _) = pf.encode(8, 10_000).unwrap();
        assert_eq!(wr, wf);
    }

    #[test]
    fn golden_zorich_digits_all_one() {
        // continued-fraction digits of the golden ratio are all 1
        let mut p = golden_point();
        for _ in 0..20 {
            let g = p.step_g(100).unwrap();
            assert_eq!(g.letter.n, 1);
            p = g.point;
        }
    }

    #[test]
    fn rational_orbit_terminates_at_boundary() {
        // a rational rotation eventually hits the boundary tie
        let mut p = pt(&[(2, 3), (1, 3)], "2,1");
        let mut hit = false;
        for _ in 0..100 {
            match p.step_t() {
                Ok(s) => p = s.point,
                Err(Error::Degenerate(_)) => {
                    hit = true;
                    break;
                }
                Err(e) => panic!("unexpected {e:?}"),
            }
        }
        assert!(hit);
    }

    #[test]
    fn dirichlet_sampling_normalized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pi: Permutation = "4,3,2,1".parse().unwrap();
        let p = sample_point(&pi, &mut rng);
        let total: f64 = p.lambda().iter().sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        let pr = sample_rational_point(&pi, 1000, &mut rng);
        let total_r = pr
            .lambda()
            .iter()
            .fold(BigRational::from_integer(BigInt::from(0)), |a, x| a.add(x));
        assert_eq!(ToPrimitive::to_f64(&total_r).unwrap(), 1.0);
    }
}
