use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// A single failed hypothesis of the construction, reported by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HypothesisFailure {
    PNotPrime,
    PNotOneModFour,
    GNotOneModFour,
    PDividesGPlusOne,
}

impl HypothesisFailure {
    /// The field of the input that is responsible for the failure.
    pub fn field(&self) -> &'static str {
        match self {
            HypothesisFailure::PNotPrime | HypothesisFailure::PNotOneModFour => "p",
            HypothesisFailure::GNotOneModFour => "g",
            HypothesisFailure::PDividesGPlusOne => "p",
        }
    }
}

impl fmt::Display for HypothesisFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisFailure::PNotPrime => "p is not prime",
            HypothesisFailure::PNotOneModFour => "p ≢ 1 mod 4",
            HypothesisFailure::GNotOneModFour => "g ≢ 1 mod 4",
            HypothesisFailure::PDividesGPlusOne => "p divides g+1",
        })
    }
}

fn join(failures: &[HypothesisFailure]) -> String {
    failures
        .iter()
        .map(|f| f.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field parameter p = {0}: must be a prime congruent to 1 mod 4")]
    InvalidPrime(u64),
    #[error("mismatched fields: Q(sqrt {0}) vs Q(sqrt {1})")]
    FieldMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("not a 𝔭-adic unit: ramified valuation is {0}")]
    NotUnit(String),
    #[error("{0} is a perfect square")]
    PerfectSquare(u64),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("Hensel precondition failed: {0}")]
    HenselPrecondition(String),
    #[error("hypotheses failed: {}", join(.0))]
    Hypothesis(Vec<HypothesisFailure>),
    #[error("norm is {0}, expected {1}")]
    WrongNorm(String, String),
    #[error("bad reduction: {0}")]
    BadReduction(String),
    #[error("criterion inapplicable: d = {0} is even")]
    CriterionInapplicable(u64),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
