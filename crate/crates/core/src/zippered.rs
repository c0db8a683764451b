//! Zippered rectangles: the space of triples (lambda, pi, delta) with delta
//! in the cone K(pi), the expansion/contraction flow P^t, the
//! renormalization map U, and the first-return map F over the transversal.
//!
//! Heights and the Veech parameters a_r are derived views of delta, never
//! duplicated state.

use rand::Rng;

use crate::error::{Error, Result};
use crate::iet::{GStep, IetPoint, InductionType};
use crate::matrix::apply_elementary_inverse;
use crate::perm::Permutation;
use crate::scalar::Scalar;

/// Whether delta lies in the cone K(pi): partial sums of delta are <= 0 and
/// partial sums in the pi^{-1} order are >= 0, up to index m-1.
pub fn cone_check<S: Scalar>(pi: &Permutation, delta: &[S]) -> bool {
    let m = pi.symbols();
    if delta.len() != m {
        return false;
    }
    let zero = S::zero();
    let mut acc = S::zero();
    for d in &delta[..m - 1] {
        acc = acc.add(d);
        if acc > zero {
            return false;
        }
    }
    let mut acc = S::zero();
    for i in 1..m {
        acc = acc.add(&delta[pi.preimage(i) - 1]);
        if acc < zero {
            return false;
        }
    }
    true
}

/// A zippered rectangle (lambda, pi, delta), delta in K(pi).
#[derive(Clone, Debug, PartialEq)]
pub struct ZipperedRectangle<S> {
    lambda: Vec<S>,
    pi: Permutation,
    delta: Vec<S>,
}

impl<S: Scalar> ZipperedRectangle<S> {
    pub fn new(lambda: Vec<S>, pi: Permutation, delta: Vec<S>) -> Result<Self> {
        if lambda.len() != pi.symbols() || !lambda.iter().all(|x| x.is_positive()) {
            return Err(Error::InvalidInput("lambda must be positive of length m".into()));
        }
        if !cone_check(&pi, &delta) {
            return Err(Error::InvalidInput("delta violates the cone inequalities".into()));
        }
        Ok(ZipperedRectangle { lambda, pi, delta })
    }

    pub fn lambda(&self) -> &[S] {
        &self.lambda
    }

    pub fn pi(&self) -> &Permutation {
        &self.pi
    }

    pub fn delta(&self) -> &[S] {
        &self.delta
    }

    pub fn symbols(&self) -> usize {
        self.pi.symbols()
    }

    /// h_r = -sum_{i<r} delta_i + sum_{i < pi r} delta_{pi^-1 i}; empty
    /// sums vanish. Nonnegative whenever the cone conditions hold.
    pub fn heights(&self) -> Vec<S> {
        let m = self.symbols();
        // prefix sums in natural and pi^{-1} order
        let mut nat = Vec::with_capacity(m + 1);
        nat.push(S::zero());
        for i in 0..m {
            let last = nat.last().unwrap().clone();
            nat.push(last.add(&self.delta[i]));
        }
        let mut perm = Vec::with_capacity(m + 1);
        perm.push(S::zero());
        for i in 1..=m {
            let last = perm.last().unwrap().clone();
            perm.push(last.add(&self.delta[self.pi.preimage(i) - 1]));
        }
        (1..=m)
            .map(|r| perm[self.pi.image(r) - 1].sub(&nat[r - 1]))
            .collect()
    }

    /// Area = sum_r lambda_r h_r, the Lebesgue area of the rectangle union.
    pub fn area(&self) -> S {
        self.heights()
            .iter()
            .zip(&self.lambda)
            .fold(S::zero(), |acc, (h, l)| acc.add(&h.mul(l)))
    }

    /// Veech's parameter a_r = -(delta_1 + ... + delta_r).
    pub fn a_param(&self, r: usize) -> S {
        self.delta[..r]
            .iter()
            .fold(S::zero(), |acc, d| acc.add(d))
            .neg()
    }

    pub fn a_m(&self) -> S {
        self.a_param(self.symbols())
    }

    /// The projected interval exchange (lambda normalized, pi).
    pub fn iet(&self) -> IetPoint<S> {
        IetPoint::new(self.lambda.clone(), self.pi.clone()).expect("positive lambda")
    }

    pub fn induction_type(&self) -> InductionType {
        let m = self.symbols();
        let k0 = self.pi.preimage(m) - 1;
        if self.lambda[k0] > self.lambda[m - 1] {
            InductionType::Plus
        } else if self.lambda[m - 1] > self.lambda[k0] {
            InductionType::Minus
        } else {
            InductionType::Boundary
        }
    }

    /// The renormalization map U = (A^{-1} lambda, c pi, A^{-1} delta).
    /// The cone membership of the output is Veech's theorem; it is checked,
    /// not assumed.
    pub fn map_u(&self) -> Result<ZipperedRectangle<S>> {
        let op = self.induction_type().op().ok_or_else(|| {
            Error::Degenerate("boundary tie lambda_m = lambda_{pi^-1 m}; U undefined".into())
        })?;
        let lambda = apply_elementary_inverse(op, &self.pi, &self.lambda);
        let delta = apply_elementary_inverse(op, &self.pi, &self.delta);
        let pi = self.pi.apply_op(op);
        if !lambda.iter().all(|x| x.is_positive()) {
            return Err(Error::Numeric("U produced a nonpositive length".into()));
        }
        if !cone_check(&pi, &delta) {
            return Err(Error::Numeric(
                "cone violated after U (numerically impossible by Veech's theorem)".into(),
            ));
        }
        Ok(ZipperedRectangle { lambda, pi, delta })
    }

    /// Membership in the transversal Y^+ (type a, a_m < 0) or Y^- (type b,
    /// a_m > 0).
    pub fn in_transversal(&self) -> bool {
        let am = self.a_m();
        match self.induction_type() {
            InductionType::Plus => am < S::zero(),
            InductionType::Minus => am > S::zero(),
            InductionType::Boundary => false,
        }
    }

    fn norm_lambda(&self) -> S {
        self.lambda.iter().fold(S::zero(), |acc, x| acc.add(x))
    }

    /// One renormalization step U(P^{tau0} x) keeping |lambda| = 1: the
    /// rescaling by 1/|A^{-1}lambda| is exact in the rational backend.
    fn elementary_return_step(&self) -> Result<(ZipperedRectangle<S>, S)> {
        let op = self.induction_type().op().ok_or_else(|| {
            Error::Degenerate("boundary tie; flow leaves the chart".into())
        })?;
        let u = apply_elementary_inverse(op, &self.pi, &self.lambda);
        let norm = u.iter().fold(S::zero(), |acc, x| acc.add(x));
        let lambda: Vec<S> = u.iter().map(|x| x.div(&norm)).collect();
        let dv = apply_elementary_inverse(op, &self.pi, &self.delta);
        let delta: Vec<S> = dv.iter().map(|x| x.mul(&norm)).collect();
        let pi = self.pi.apply_op(op);
        if !cone_check(&pi, &delta) {
            return Err(Error::Numeric("cone violated along the return".into()));
        }
        Ok((ZipperedRectangle { lambda, pi, delta }, norm))
    }

    /// First return of the flow to the transversal Y^{+-}. The projected
    /// pair evolves by one G-step and the return time is tau^1 of the
    /// projection.
    pub fn first_return(&self, cap: u64) -> Result<FReturn<S>> {
        if !self.in_transversal() {
            if self.a_m() == S::zero() {
                return Err(Error::Degenerate("a_m(delta) = 0".into()));
            }
            return Err(Error::InvalidInput(
                "point is not in the transversal Y^+-".into(),
            ));
        }
        let one = S::one();
        let total = self.norm_lambda();
        if S::exact() {
            if total != one {
                return Err(Error::InvalidInput("need |lambda| = 1 on the transversal".into()));
            }
        } else if (total.to_f64() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("need |lambda| = 1 on the transversal".into()));
        }
        let mut cur = self.clone();
        let mut factor = S::one();
        let mut steps: u32 = 0;
        loop {
            if u64::from(steps) >= cap {
                return Err(Error::CapExceeded(format!(
                    "no return to the transversal within {cap} steps"
                )));
            }
            let (next, norm) = cur.elementary_return_step()?;
            factor = factor.mul(&norm);
            steps += 1;
            cur = next;
            if cur.a_m() == S::zero() {
                return Err(Error::Degenerate("a_m(delta) = 0 along the orbit".into()));
            }
            if cur.in_transversal() {
                let return_time = -Scalar::ln(&factor);
                return Ok(FReturn {
                    point: cur,
                    return_time,
                    factor,
                    steps,
                });
            }
        }
    }
}

/// Result of the first-return map F.
#[derive(Clone, Debug)]
pub struct FReturn<S> {
    pub point: ZipperedRectangle<S>,
    /// time along the flow, equal to tau^1 of the projected pair
    pub return_time: f64,
    /// exact rescaling factor with -ln(factor) = return_time
    pub factor: S,
    /// number of elementary renormalization steps (the Zorich count)
    pub steps: u32,
}

impl<S: Scalar> FReturn<S> {
    /// The coding letter consistency with the base G-step.
    pub fn matches_gstep(&self, g: &GStep<S>) -> bool {
        self.steps == g.letter.n && self.point.pi() == g.point.pi()
    }
}

/// A point moving under the flow P^t, stored as (lambda, pi, delta) plus a
/// log-scale s meaning (e^s lambda, pi, e^{-s} delta). Keeping s separate
/// makes Area exactly invariant and avoids overflow for large |t|.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint<S> {
    pub zr: ZipperedRectangle<S>,
    pub log_scale: f64,
}

impl<S: Scalar> FlowPoint<S> {
    pub fn new(zr: ZipperedRectangle<S>) -> Self {
        FlowPoint { zr, log_scale: 0.0 }
    }

    /// P^t: multiply lambda by e^t and delta by e^{-t}.
    pub fn flow(&self, t: f64) -> FlowPoint<S> {
        FlowPoint {
            zr: self.zr.clone(),
            log_scale: self.log_scale + t,
        }
    }

    /// Area of the represented rectangle: the e^t factors cancel termwise,
    /// so this equals the area of the stored triple exactly.
    pub fn area(&self) -> S {
        self.zr.area()
    }

    /// U commutes with the flow, so it acts on the stored triple.
    pub fn map_u(&self) -> Result<FlowPoint<S>> {
        Ok(FlowPoint {
            zr: self.zr.map_u()?,
            log_scale: self.log_scale,
        })
    }

    pub fn effective_lambda(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.zr.lambda().iter().map(|x| x.to_f64() * s).collect()
    }

    pub fn effective_delta(&self) -> Vec<f64> {
        let s = (-self.log_scale).exp();
        self.zr.delta().iter().map(|x| x.to_f64() * s).collect()
    }
}

impl<S: Scalar> ZipperedRectangle<S> {
    /// JSON state dump with numeric coordinates, derived heights and area.
    pub fn json_state(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda.iter().map(|x| x.to_f64()).collect::<Vec<_>>(),
            "pi": self.pi.images(),
            "delta": self.delta.iter().map(|x| x.to_f64()).collect::<Vec<_>>(),
            "heights": self.heights().iter().map(|x| x.to_f64()).collect::<Vec<_>>(),
            "area": self.area().to_f64(),
        })
    }
}

/// CSV log of the suspension representation: rows (t, lambda, delta, area)
/// sampled along the flow from `fp`.
pub fn flow_csv_log<S: Scalar>(fp: &FlowPoint<S>, times: &[f64]) -> String {
    let m = fp.zr.symbols();
    let mut out = String::from("t");
    for i in 1..=m {
        out.push_str(&format!(",lambda_{i}"));
    }
    for i in 1..=m {
        out.push_str(&format!(",delta_{i}"));
    }
    out.push_str(",area
");
    for &t in times {
        let at = fp.flow(t);
        out.push_str(&format!("{t:.17e}"));
        for x in at.effective_lambda() {
            out.push_str(&format!(",{x:.17e}"));
        }
        for x in at.effective_delta() {
            out.push_str(&format!(",{x:.17e}"));
        }
        out.push_str(&format!(",{:.17e}
", at.area().to_f64()));
    }
    out
}

/// Rejection sampler: lambda Dirichlet-uniform, delta uniform in a box and
/// conditioned on the cone, then rescaled so Area = 1.
pub fn sample_zippered<R: Rng>(pi: &Permutation, rng: &mut R) -> ZipperedRectangle<f64> {
    let m = pi.symbols();
    loop {
        let lam: Vec<f64> = {
            let raw: Vec<f64> = (0..m).map(|_| -rng.gen::<f64>().ln()).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let delta: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if !cone_check(pi, &delta) {
            continue;
        }
        let Ok(zr) = ZipperedRectangle::new(lam, pi.clone(), delta) else {
            continue;
        };
        let area = zr.area();
        if area < 1e-9 {
            continue;
        }
        let delta: Vec<f64> = zr.delta.iter().map(|d| d / area).collect();
        return ZipperedRectangle {
            lambda: zr.lambda,
            pi: zr.pi,
            delta,
        };
    }
}

/// Sampler conditioned on the transversal Y^{+-} (area 1, |lambda| = 1).
pub fn sample_in_transversal<R: Rng>(pi: &Permutation, rng: &mut R) -> ZipperedRectangle<f64> {
    loop {
        let zr = sample_zippered(pi, rng);
        if zr.in_transversal() {
            return zr;
        }
    }
}
