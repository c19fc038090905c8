//! Obstruction screening for isolated quasi-homogeneous hypersurface
//! singularities `{F = 0} ⊂ C^(n+1)` with weights `w` and degree `d`. All
//! comparisons are exact integer/rational arithmetic:
//!
//! ```text
//! volume bound:      d (|w| - d)^n <= w_prod n^n
//! small-charge bound: |w| - d <= n w_min
//! ```
//!
//! The screener consumes only `(w, d)`; existence of an actual polynomial
//! with an isolated singularity is the caller's responsibility.

use num_integer::Integer;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::{Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScreenVerdict {
    NotFano,
    Obstructed { bishop: bool, lichnerowicz: bool },
    PassesScreen,
}

impl std::fmt::Display for ScreenVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScreenVerdict::NotFano => f.write_str("not-fano"),
            ScreenVerdict::Obstructed {
                bishop,
                lichnerowicz,
            } => {
                let mut reasons = Vec::new();
                if *bishop {
                    reasons.push("bishop");
                }
                if *lichnerowicz {
                    reasons.push("lichnerowicz");
                }
                write!(f, "obstructed({})", reasons.join(","))
            }
            ScreenVerdict::PassesScreen => f.write_str("passes-screen"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScreenReport {
    pub weights: Vec<u64>,
    pub degree: u64,
    /// Complex dimension of the singularity (`weights.len() - 1`).
    pub n: usize,
    pub weight_sum: Int,
    pub weight_prod: Int,
    pub weight_min: u64,
    pub fano: bool,
    /// `n / (|w| - d)`, the charge normalization scalar (Fano only).
    pub mu: Option<Rat>,
    pub bishop_lhs: Int,
    pub bishop_rhs: Int,
    pub bishop_obstructed: bool,
    pub bishop_equality: bool,
    pub lich_lhs: Int,
    pub lich_rhs: Int,
    pub lich_obstructed: bool,
    pub lich_equality: bool,
    /// Both bounds saturated: consistent only with the flat cone.
    pub flat: bool,
    /// `λ_j = n w_j / (|w| - d)` per coordinate (Fano only).
    pub coordinate_charges: Vec<Rat>,
    /// `d (|w| - d)^n / (n^n w_prod)` (Fano only); > 1 iff volume-obstructed.
    pub volume_ratio: Option<Rat>,
    pub verdict: ScreenVerdict,
}

fn validate(weights: &[u64], degree: u64) -> Result<()> {
    if weights.len() < 2 {
        return Err(Error::Validation(
            "need at least two weights (n >= 1)".into(),
        ));
    }
    if weights.iter().any(|&w| w == 0) {
        return Err(Error::Validation("weights must be positive".into()));
    }
    if degree == 0 {
        return Err(Error::Validation("degree must be positive".into()));
    }
    let g = weights.iter().fold(0u64, |acc, &w| acc.gcd(&w));
    if g != 1 {
        return Err(Error::Validation(format!(
            "weights must have no common factor (gcd {g})"
        )));
    }
    Ok(())
}

pub fn screen(weights: &[u64], degree: u64) -> Result<ScreenReport> {
    validate(weights, degree)?;
    let n = weights.len() - 1;
    let n_int = Int::from(n as u64);
    let weight_sum: Int = weights.iter().map(|&w| Int::from(w)).sum();
    let weight_prod: Int = weights.iter().map(|&w| Int::from(w)).product();
    let weight_min = *weights.iter().min().expect("nonempty");
    let charge_omega = &weight_sum - Int::from(degree); // |w| - d
    let fano = charge_omega.is_positive();

    let bishop_lhs = Int::from(degree) * charge_omega.clone().pow(n as u32);
    let bishop_rhs = &weight_prod * n_int.clone().pow(n as u32);
    let lich_lhs = charge_omega.clone();
    let lich_rhs = &n_int * Int::from(weight_min);

    if !fano {
        return Ok(ScreenReport {
            weights: weights.to_vec(),
            degree,
            n,
            weight_sum,
            weight_prod,
            weight_min,
            fano,
            mu: None,
            bishop_lhs,
            bishop_rhs,
            bishop_obstructed: false,
            bishop_equality: false,
            lich_lhs,
            lich_rhs,
            lich_obstructed: false,
            lich_equality: false,
            flat: false,
            coordinate_charges: Vec::new(),
            volume_ratio: None,
            verdict: ScreenVerdict::NotFano,
        });
    }

    let bishop_obstructed = bishop_lhs > bishop_rhs;
    let bishop_equality = bishop_lhs == bishop_rhs;
    let lich_obstructed = lich_lhs > lich_rhs;
    let lich_equality = lich_lhs == lich_rhs;
    let mu = Rat::new(n_int.clone(), charge_omega.clone());
    let coordinate_charges: Vec<Rat> = weights
        .iter()
        .map(|&w| &mu * Rat::from_integer(Int::from(w)))
        .collect();
    let volume_ratio = Rat::new(bishop_lhs.clone(), bishop_rhs.clone());
    let verdict = if bishop_obstructed || lich_obstructed {
        ScreenVerdict::Obstructed {
            bishop: bishop_obstructed,
            lichnerowicz: lich_obstructed,
        }
    } else {
        ScreenVerdict::PassesScreen
    };
    Ok(ScreenReport {
        weights: weights.to_vec(),
        degree,
        n,
        weight_sum,
        weight_prod,
        weight_min,
        fano,
        mu: Some(mu),
        bishop_lhs,
        bishop_rhs,
        bishop_obstructed,
        bishop_equality,
        lich_lhs,
        lich_rhs,
        lich_obstructed,
        lich_equality,
        flat: bishop_equality && lich_equality,
        coordinate_charges,
        volume_ratio: Some(volume_ratio),
        verdict,
    })
}

/// Exact `t -> 0` limit of `t^n (1 - e^(-t d mu)) / Π_i (1 - e^(-t w_i mu))`,
/// the character of the weighted coordinate ring with normalized charges.
/// Each factor `1 - e^(-t c)` contributes its leading coefficient `c`, so the
/// limit is `d mu / (w_prod mu^(n+1)) = d (|w|-d)^n / (n^n w_prod)`, which
/// must reproduce `ScreenReport::volume_ratio`.
pub fn hypersurface_zeta_ratio(weights: &[u64], degree: u64) -> Result<Rat> {
    validate(weights, degree)?;
    let n = weights.len() - 1;
    let weight_sum: Int = weights.iter().map(|&w| Int::from(w)).sum();
    let charge_omega = &weight_sum - Int::from(degree);
    if !charge_omega.is_positive() {
        return Err(Error::Validation(
            "character limit requires the Fano condition |w| - d > 0".into(),
        ));
    }
    let mu = Rat::new(Int::from(n as u64), charge_omega);
    let numerator_leading = Rat::from_integer(Int::from(degree)) * &mu;
    let mut denominator_leading = Rat::one();
    for &w in weights {
        denominator_leading *= Rat::from_integer(Int::from(w)) * &mu;
    }
    Ok(numerator_leading / denominator_leading)
}

/// Weights and degree of a sum-of-powers polynomial `Σ z_i^(a_i)`:
/// `d = lcm(a_i)`, `w_i = d / a_i`, reduced so the weights are coprime.
pub fn weights_from_exponents(exponents: &[u64]) -> Result<(Vec<u64>, u64)> {
    if exponents.len() < 2 {
        return Err(Error::Validation("need at least two exponents".into()));
    }
    if exponents.iter().any(|&a| a < 2) {
        return Err(Error::Validation(
            "exponents must be at least 2 for an isolated singularity".into(),
        ));
    }
    let lcm = exponents.iter().fold(1u64, |acc, &a| acc.lcm(&a));
    let weights: Vec<u64> = exponents.iter().map(|&a| lcm / a).collect();
    let g = weights.iter().fold(0u64, |acc, &w| acc.gcd(&w));
    Ok((weights.iter().map(|w| w / g).collect(), lcm / g))
}
