//! Rauzy-Veech-Zorich induction and suspension-flow entropy.
//!
//! The crate implements, bottom up: irreducible permutations with the
//! Rauzy operations and class enumeration; unimodular renormalization
//! matrices over big integers; interval exchange maps with the induction
//! map T, the accelerated map G, symbolic coding and roof functions; the
//! space of zippered rectangles with the flow P^t, the map U and the
//! first-return map F; a countable-alphabet word algebra with simple
//! prefixes and first-return (Markov-Bernoulli) alphabets; and entropy
//! solvers verifying the uniform-expansion identity and the maximal
//! entropy value 2g - 1 + r = m on desk-scale instances.
//!
//! Numeric work runs on a dual backend: exact big rationals where the
//! matrix identities are to hold bit for bit, floats for long Monte-Carlo
//! orbits.

pub mod entropy;
pub mod error;
pub mod hilbert;
pub mod iet;
pub mod matrix;
pub mod montecarlo;
pub mod perm;
pub mod scalar;
pub mod suspension;
pub mod words;
pub mod zippered;

pub use error::{Error, Result};
pub use hilbert::{hilbert_diameter, hilbert_distance};
pub use iet::{decode, golden_point, sample_point, sample_rational_point, IetPoint, InductionType};
pub use matrix::{is_positive_word, RenormMatrix};
pub use perm::{Permutation, RauzyClass, RauzyOp};
pub use scalar::Scalar;
pub use words::{
    format_word, is_simple_prefix, long_simple_word, mb_alphabet, mb_factorize, mb_join,
    parse_word, AlphabetGraph, CompleteGraph, SymbolLetter, Word, WordGraph,
};
pub use zippered::{cone_check, sample_in_transversal, sample_zippered, FlowPoint, ZipperedRectangle};
