//! Decision certificates: verdict, witness, and numeric margin.

use serde::Serialize;

use crate::exact::{format_rational, Rational, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "HOLDS")]
    Holds,
    #[serde(rename = "FAILS")]
    Fails,
    #[serde(rename = "UNDECIDED")]
    Undecided,
}

/// Exact witness data attached to a certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// A distinguished vector (frequency, kernel element, ...).
    Vector(Vec<Rational>),
    /// A pair, typically a frequency together with a kernel vector.
    Pair { xi: Vec<Rational>, v: Vec<Rational> },
    /// A stabilized subspace.
    Space(Subspace),
    /// A violating block index with a vector witness.
    BlockVector { index: usize, v: Vec<Rational> },
}

/// Outcome of a structural decider.
///
/// A `Fails` verdict always carries an exact witness that re-verifies by rank
/// or kernel computation; `Holds` for the intersection-style conditions
/// carries the stabilized subspace; `Undecided` is only produced by the
/// sampled ellipticity certification.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub margin: Option<f64>,
    pub samples_used: usize,
}

impl Certificate {
    pub fn holds(samples_used: usize) -> Self {
        Self {
            verdict: Verdict::Holds,
            witness: None,
            margin: None,
            samples_used,
        }
    }

    pub fn fails(witness: Witness, samples_used: usize) -> Self {
        Self {
            verdict: Verdict::Fails,
            witness: Some(witness),
            margin: None,
            samples_used,
        }
    }

    pub fn undecided(samples_used: usize) -> Self {
        Self {
            verdict: Verdict::Undecided,
            witness: None,
            margin: None,
            samples_used,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn holds_verdict(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn is_undecided(&self) -> bool {
        self.verdict == Verdict::Undecided
    }
}

fn rational_strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

/// JSON-facing form of a witness.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessReport {
    Vector {
        vector: Vec<String>,
    },
    Pair {
        xi: Vec<String>,
        v: Vec<String>,
    },
    Space {
        dim: usize,
        basis_columns: Vec<Vec<String>>,
    },
    BlockVector {
        index: usize,
        v: Vec<String>,
    },
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Vector(v) => WitnessReport::Vector {
                vector: rational_strings(v),
            },
            Witness::Pair { xi, v } => WitnessReport::Pair {
                xi: rational_strings(xi),
                v: rational_strings(v),
            },
            Witness::Space(s) => WitnessReport::Space {
                dim: s.dim(),
                basis_columns: s
                    .basis_columns()
                    .iter()
                    .map(|c| rational_strings(c))
                    .collect(),
            },
            Witness::BlockVector { index, v } => WitnessReport::BlockVector {
                index: *index,
                v: rational_strings(v),
            },
        }
    }
}

/// JSON-facing form of a certificate.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub samples_used: usize,
}

impl From<&Certificate> for CertificateReport {
    fn from(c: &Certificate) -> Self {
        Self {
            verdict: c.verdict,
            witness: c.witness.as_ref().map(WitnessReport::from),
            margin: c.margin,
            samples_used: c.samples_used,
        }
    }
}
