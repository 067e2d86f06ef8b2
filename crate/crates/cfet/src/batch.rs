//! Seeded batch experiments over exact random points.

use cfet_core::certify::{certify_no_order5_y, inductive_step_identity, CertifyError, IdentityPoint};
use cfet_core::scalar::rational_to_string;
use cfet_core::Rational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use crate::error::CfetError;
use crate::report::CertificateReport;
use crate::sampling::{rng, signed_point, simplex_point};

/// Lattice resolution for random weights.
pub const WEIGHT_GRID: i64 = 1000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchCertificateReport {
    pub samples: usize,
    pub j_range: [usize; 2],
    pub seed: u64,
    pub infeasible: usize,
    /// Smallest exact margin over all Gram certificates.
    pub minimal_margin: Option<String>,
    pub certificates: Vec<CertificateReport>,
}

impl BatchCertificateReport {
    pub fn all_infeasible(&self) -> bool {
        self.infeasible == self.samples
    }
}

/// Certifies explicitly given weight vectors.
pub fn certify_all(
    weights: &[Vec<Rational>],
    j_range: [usize; 2],
    seed: u64,
) -> Result<BatchCertificateReport, CfetError> {
    let mut certificates = Vec::with_capacity(weights.len());
    let mut min_margin: Option<Rational> = None;
    let mut infeasible = 0;
    for b in weights {
        let cert = certify_no_order5_y(b)?;
        if cert.infeasible() {
            infeasible += 1;
        }
        if let Some(m) = cert.margin() {
            if min_margin.as_ref().is_none_or(|cur| m < cur) {
                min_margin = Some(m.clone());
            }
        }
        certificates.push(CertificateReport::from(&cert));
    }
    Ok(BatchCertificateReport {
        samples: weights.len(),
        j_range,
        seed,
        infeasible,
        minimal_margin: min_margin.as_ref().map(rational_to_string),
        certificates,
    })
}

/// `samples` random lattice weights with `J` uniform in `j_range`.
pub fn certify_random(samples: usize, j_range: [usize; 2], seed: u64) -> Result<BatchCertificateReport, CfetError> {
    let [lo, hi] = j_range;
    if lo < 1 || lo > hi {
        return Err(CfetError::Usage(format!("invalid J range {lo}:{hi}")));
    }
    let mut r = rng(seed);
    let weights: Vec<Vec<Rational>> = (0..samples)
        .map(|_| {
            let stages = r.gen_range(lo..=hi);
            simplex_point(&mut r, stages, WEIGHT_GRID)
        })
        .collect();
    certify_all(&weights, j_range, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub trials: usize,
    pub seed: u64,
    /// Points on the pole that were redrawn.
    pub skipped_poles: usize,
    /// `(σ̃, b, eSe, eSd, dSd)` and the difference, for every nonzero result.
    pub failures: Vec<(Vec<String>, String)>,
}

impl IdentityReport {
    pub fn all_zero(&self) -> bool {
        self.failures.is_empty()
    }
}

fn point_from(v: &[Rational]) -> IdentityPoint {
    IdentityPoint {
        sigma_next: v[0].clone(),
        b_next: v[1].clone(),
        ese: v[2].clone(),
        esd: v[3].clone(),
        dsd: v[4].clone(),
    }
}

/// Evaluates `expr3 − expr4` at the given points.
pub fn identity_at(points: &[Vec<Rational>], seed: u64) -> Result<IdentityReport, CfetError> {
    let mut failures = Vec::new();
    for v in points {
        if v.len() != 5 {
            return Err(CfetError::Usage("an identity point has five coordinates".into()));
        }
        let diff = inductive_step_identity(&point_from(v)).map_err(|e| CfetError::Usage(e.to_string()))?;
        if !diff.is_zero() {
            failures.push((v.iter().map(rational_to_string).collect(), rational_to_string(&diff)));
        }
    }
    Ok(IdentityReport { trials: points.len(), seed, skipped_poles: 0, failures })
}

/// `trials` random signed rational points, skipping the pole.
pub fn identity_random(trials: usize, seed: u64) -> Result<IdentityReport, CfetError> {
    if trials == 0 {
        return Err(CfetError::Usage("trials must be at least 1".into()));
    }
    let mut r = rng(seed);
    let mut points = Vec::with_capacity(trials);
    let mut skipped = 0;
    while points.len() < trials {
        let v = signed_point(&mut r, 5, 50);
        match inductive_step_identity(&point_from(&v)) {
            Err(CertifyError::Pole) => skipped += 1,
            _ => points.push(v),
        }
    }
    let mut report = identity_at(&points, seed)?;
    report.skipped_poles = skipped;
    Ok(report)
}
