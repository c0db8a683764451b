//! Renormalization matrices: the unimodular elementary matrices A(a, pi)
//! and A(b, pi), and products along letters and words. Entries are
//! arbitrary-precision nonnegative integers since word products grow
//! exponentially.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hilbert::hilbert_diameter;
use crate::perm::{Permutation, RauzyOp};
use crate::scalar::{biguint_to_f64, Scalar};
use crate::words::{SymbolLetter, Word};

/// An m x m matrix with nonnegative big-integer entries and |det| = 1.
#[derive(Clone, PartialEq, Eq)]
pub struct RenormMatrix {
    m: usize,
    entries: Vec<BigUint>, // row-major
}

impl RenormMatrix {
    pub fn identity(m: usize) -> Self {
        let mut entries = vec![BigUint::zero(); m * m];
        for i in 0..m {
            entries[i * m + i] = BigUint::one();
        }
        RenormMatrix { m, entries }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> &BigUint {
        &self.entries[row * self.m + col]
    }

    fn set(&mut self, row: usize, col: usize, v: BigUint) {
        self.entries[row * self.m + col] = v;
    }

    /// The elementary matrix of a single Rauzy operation at pi.
    pub fn of_op(op: RauzyOp, pi: &Permutation) -> Self {
        let m = pi.symbols();
        let k = pi.preimage(m);
        let mut a = RenormMatrix {
            m,
            entries: vec![BigUint::zero(); m * m],
        };
        match op {
            RauzyOp::A => {
                for i in 1..=k {
                    a.set(i - 1, i - 1, BigUint::one());
                }
                a.set(m - 1, k, BigUint::one());
                for i in k..m {
                    a.set(i - 1, i, BigUint::one());
                }
            }
            RauzyOp::B => {
                for i in 0..m {
                    a.set(i, i, BigUint::one());
                }
                a.set(m - 1, k - 1, BigUint::one());
            }
        }
        a
    }

    /// Single-letter matrix A(c, pi) A(c, c pi) ... A(c, c^{n-1} pi).
    pub fn of_letter(letter: &SymbolLetter) -> Self {
        let mut acc = RenormMatrix::identity(letter.pi.symbols());
        let mut pi = letter.pi.clone();
        for _ in 0..letter.n {
            acc = acc.mul(&RenormMatrix::of_op(letter.c, &pi));
            pi = pi.apply_op(letter.c);
        }
        acc
    }

    /// Word matrix A(w1) ... A(wn); the empty word yields the identity.
    /// The letter chain must be admissible.
    pub fn of_word(word: &Word<SymbolLetter>, m: usize) -> Result<Self> {
        let mut acc = RenormMatrix::identity(m);
        let mut expected: Option<(RauzyOp, Permutation)> = None;
        for letter in word.letters() {
            if letter.pi.symbols() != m {
                return Err(Error::InvalidInput("mixed symbol counts in word".into()));
            }
            if let Some((prev_c, target)) = expected {
                if letter.c == prev_c || letter.pi != target {
                    return Err(Error::InvalidInput(format!(
                        "inadmissible word: letter {letter} does not follow its predecessor"
                    )));
                }
            }
            expected = Some((letter.c, letter.pi.apply_op_n(letter.c, letter.n)));
            acc = acc.mul(&RenormMatrix::of_letter(letter));
        }
        Ok(acc)
    }

    pub fn mul(&self, other: &RenormMatrix) -> RenormMatrix {
        assert_eq!(self.m, other.m, "size mismatch");
        let m = self.m;
        let mut entries = vec![BigUint::zero(); m * m];
        for i in 0..m {
            for k in 0..m {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..m {
                    let b = other.entry(k, j);
                    if !b.is_zero() {
                        entries[i * m + j] += a * b;
                    }
                }
            }
        }
        RenormMatrix { m, entries }
    }

    /// Matrix-vector product A v in the requested scalar backend.
    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.m);
        (0..self.m)
            .map(|i| {
                let mut acc = S::zero();
                for (j, x) in v.iter().enumerate() {
                    let e = self.entry(i, j);
                    if !e.is_zero() {
                        acc = acc.add(&S::from_biguint(e).mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    /// |det|, by fraction-free (Bareiss) elimination over signed integers.
    pub fn det_abs(&self) -> BigUint {
        let m = self.m;
        let mut a: Vec<BigInt> = self.entries.iter().map(|e| BigInt::from(e.clone())).collect();
        let mut prev = BigInt::one();
        let mut sign = 1i32;
        for k in 0..m {
            if a[k * m + k].is_zero() {
                match (k + 1..m).find(|&r| !a[r * m + k].is_zero()) {
                    Some(r) => {
                        for c in 0..m {
                            a.swap(k * m + c, r * m + c);
                        }
                        sign = -sign;
                    }
                    None => return BigUint::zero(),
                }
            }
            for i in k + 1..m {
                for j in k + 1..m {
                    let num = &a[i * m + j] * &a[k * m + k] - &a[i * m + k] * &a[k * m + j];
                    a[i * m + j] = num / &prev;
                }
                a[i * m + k] = BigInt::zero();
            }
            prev = a[k * m + k].clone();
        }
        let _ = sign;
        a[(m - 1) * m + (m - 1)].abs().to_biguint().unwrap()
    }

    pub fn is_unimodular(&self) -> bool {
        self.det_abs() == BigUint::one()
    }

    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(|e| !e.is_zero())
    }

    pub fn row_sums_positive(&self) -> bool {
        (0..self.m).all(|i| (0..self.m).any(|j| !self.entry(i, j).is_zero()))
    }

    /// Columns as f64 vectors (for Hilbert-metric geometry).
    pub fn columns_f64(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|j| (0..self.m).map(|i| biguint_to_f64(self.entry(i, j))).collect())
            .collect()
    }

    /// Hilbert diameter of the image simplex T_A(Delta) = hull of the
    /// normalized columns; infinite unless all entries are positive.
    pub fn image_diameter(&self) -> f64 {
        if !self.is_positive() {
            return f64::INFINITY;
        }
        hilbert_diameter(&self.columns_f64()).unwrap_or(f64::INFINITY)
    }

    /// Spectral radius by power iteration (entries are nonnegative, so the
    /// Perron eigenvalue is the dominant one).
    pub fn spectral_radius(&self) -> f64 {
        let cols = self.columns_f64();
        let m = self.m;
        let mut v = vec![1.0 / m as f64; m];
        let mut lambda = 0.0f64;
        for _ in 0..200 {
            let mut next = vec![0.0f64; m];
            for (col, &vj) in cols.iter().zip(&v) {
                for (n, &c) in next.iter_mut().zip(col) {
                    *n += c * vj;
                }
            }
            let norm: f64 = next.iter().sum();
            if norm == 0.0 {
                return 0.0;
            }
            for x in next.iter_mut() {
                *x /= norm;
            }
            if (norm - lambda).abs() <= 1e-15 * norm {
                return norm;
            }
            lambda = norm;
            v = next;
        }
        lambda
    }

    /// Perron direction on the simplex, by power iteration.
    pub fn perron_direction(&self) -> Vec<f64> {
        let cols = self.columns_f64();
        let m = self.m;
        let mut v = vec![1.0 / m as f64; m];
        for _ in 0..400 {
            let mut next = vec![0.0f64; m];
            for (col, &vj) in cols.iter().zip(&v) {
                for (n, &c) in next.iter_mut().zip(col) {
                    *n += c * vj;
                }
            }
            let norm: f64 = next.iter().sum();
            for x in next.iter_mut() {
                *x /= norm;
            }
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if delta <= 1e-16 {
                break;
            }
        }
        v
    }

    pub fn rows_to_decimal_strings(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.to_string()).collect()
    }
}

impl std::fmt::Debug for RenormMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RenormMatrix {}x{} [", self.m, self.m)?;
        for i in 0..self.m {
            let row: Vec<String> = (0..self.m).map(|j| self.entry(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for RenormMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // row-major decimal strings, exact at any magnitude
        self.rows_to_decimal_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RenormMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let mm = strings.len();
        let m = (mm as f64).sqrt().round() as usize;
        if m * m != mm || m == 0 {
            return Err(D::Error::custom("entry count is not a positive square"));
        }
        let entries = strings
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(|e| D::Error::custom(e.to_string())))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RenormMatrix { m, entries })
    }
}

/// True iff every entry of A(w) is positive.
pub fn is_positive_word(word: &Word<SymbolLetter>, m: usize) -> Result<bool> {
    Ok(RenormMatrix::of_word(word, m)?.is_positive())
}

/// A(op, pi)^{-1} v in closed form; works on vectors of any sign.
pub fn apply_elementary_inverse<S: Scalar>(op: RauzyOp, pi: &Permutation, v: &[S]) -> Vec<S> {
    let m = pi.symbols();
    let k0 = pi.preimage(m) - 1;
    match op {
        RauzyOp::A => {
            // rows of A(a,pi): x_k + x_{k+1} = v_k, x_{k+1} = v_m,
            // x_{j} = v_{j-1} past the insertion point
            let mut u = Vec::with_capacity(m);
            u.extend_from_slice(&v[..k0]);
            u.push(v[k0].sub(&v[m - 1]));
            u.push(v[m - 1].clone());
            u.extend_from_slice(&v[k0 + 1..m - 1]);
            u
        }
        RauzyOp::B => {
            let mut u = v.to_vec();
            u[m - 1] = v[m - 1].sub(&v[k0]);
            u
        }
    }
}
