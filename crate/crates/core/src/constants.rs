//! Closed-form constant accounting for the discretization pipeline.
//!
//! `C₁ = 4C²·2^{4C_RA⁵}` overflows `f64` for any doubling constant above 2,
//! so every quantity derived from it is carried as a base-2 logarithm.

use alloc::vec::Vec;

use crate::selector::{dyadic_bracket, selector_sequence, uniform_selector_constant};
use crate::spaces::SpaceModel;
use crate::{Error, Result};

/// Constant accounting for one `(ε, space, frame)` configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryConstants {
    pub epsilon: f64,
    /// Trace bound the selector constant is evaluated at.
    pub delta: f64,
    /// `B_0, B_1, …` up to the largest admissible level.
    pub b_sequence: Vec<f64>,
    /// Selector constant `C`, uniform over admissible levels.
    pub selector_c: f64,
    /// `4·C_RA⁵`, the exponent of the doubling factor in `C₁`.
    pub doubling_exponent: f64,
    /// `log₂ C₁ = 2 + 2 log₂ C + 4·C_RA⁵`.
    pub log2_c1: f64,
    /// `β` of distinct selection: `1 < 2^β ε²/(16BC²D) ≤ 2`.
    pub beta_distinct: Option<u32>,
    /// `β` of uniform discretization: `1 < 2^β ε²/(C₁BD) ≤ 2`.
    pub beta_uniform: f64,
    /// `log₂` of the first branch `(1/8)(ε²/(2αC₁BD))^{1/γ}`.
    pub log2_r_branch: f64,
    /// `log₂ r` after the cap `R_A/4`.
    pub log2_r_theory: f64,
    /// `r` itself; 0 when it underflows.
    pub r_theory: f64,
    /// Whether the cap `R_A/4` is active.
    pub r_capped: bool,
    /// Cycle bound `2·C_RA⁵`.
    pub max_cycles: f64,
}

/// Evaluates the constants for tolerance `epsilon`, upper frame bound `b`,
/// norm bound `d`, and selector trace bound `delta`.
pub fn theory_constants(
    space: &SpaceModel,
    epsilon: f64,
    b: f64,
    d: f64,
    delta: f64,
) -> Result<TheoryConstants> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    if !(b > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidArgument("B and D must be positive".into()));
    }
    let c = uniform_selector_constant(delta)?;
    let levels = crate::selector::max_admissible_level(delta);
    let c_ra = space.doubling_constant;
    let doubling_exponent = 4.0 * libm::pow(c_ra, 5.0);
    let log2_c1 = 2.0 + 2.0 * libm::log2(c) + doubling_exponent;
    let log2_eps = libm::log2(epsilon);
    let beta_distinct = dyadic_bracket(epsilon * epsilon / (16.0 * b * c * c * d)).ok();
    let log2_q = 2.0 * log2_eps - log2_c1 - libm::log2(b) - libm::log2(d);
    let beta_uniform = log2_bracket(log2_q);
    let gamma = space.ahlfors_exponent;
    let log2_inner = 2.0 * log2_eps
        - 1.0
        - libm::log2(space.ahlfors_alpha)
        - log2_c1
        - libm::log2(b)
        - libm::log2(d);
    let log2_r_branch = -3.0 + log2_inner / gamma;
    let log2_cap = libm::log2(space.small_scale_cutoff / 4.0);
    let r_capped = log2_cap < log2_r_branch;
    let log2_r_theory = log2_r_branch.min(log2_cap);
    Ok(TheoryConstants {
        epsilon,
        delta,
        b_sequence: selector_sequence(delta, levels),
        selector_c: c,
        doubling_exponent,
        log2_c1,
        beta_distinct,
        beta_uniform,
        log2_r_branch,
        log2_r_theory,
        r_theory: libm::exp2(log2_r_theory),
        r_capped,
        max_cycles: 2.0 * libm::pow(c_ra, 5.0),
    })
}

/// `β = ⌊1 − log₂ q⌋`, the bracket `1 < 2^β q ≤ 2` in log space (negative
/// values allowed).
pub fn log2_bracket(log2_q: f64) -> f64 {
    libm::floor(1.0 - log2_q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_exponent_is_exact() {
        let mut space = SpaceModel::euclidean(2);
        assert_eq!(space.doubling_constant, 4.0);
        space.small_scale_cutoff = 1.0;
        let t = theory_constants(&space, 0.25, 1.0, 1.0, 0.01).unwrap();
        assert_eq!(t.doubling_exponent, 4096.0);
        assert!((t.log2_c1 - (2.0 + 2.0 * t.selector_c.log2() + 4096.0)).abs() < 1e-9);
        assert_eq!(t.r_theory, 0.0);
        assert!(!t.r_capped);
        assert!((t.b_sequence[1] - 1.42).abs() < 1e-12);
        assert_eq!(t.max_cycles, 2048.0);
    }

    #[test]
    fn halving_epsilon_shifts_betas_by_two() {
        let space = SpaceModel::hyperbolic();
        let a = theory_constants(&space, 0.4, 1.0, 1.0, 0.01).unwrap();
        let b = theory_constants(&space, 0.2, 1.0, 1.0, 0.01).unwrap();
        assert_eq!(b.beta_uniform, a.beta_uniform + 2.0);
        assert_eq!(b.beta_distinct.unwrap(), a.beta_distinct.unwrap() + 2);
    }

    #[test]
    fn radius_scaling_and_cap() {
        let space = SpaceModel::hyperbolic();
        let a = theory_constants(&space, 0.4, 1.0, 1.0, 0.01).unwrap();
        let b = theory_constants(&space, 0.2, 1.0, 1.0, 0.01).unwrap();
        // r(ε/2)/r(ε) = (1/4)^{1/γ} on the first branch.
        assert!((b.log2_r_theory - a.log2_r_theory - (-2.0 / space.ahlfors_exponent)).abs() < 1e-9);
        // A tiny doubling constant and huge cutoff-free branch hits the cap.
        let loose = SpaceModel {
            doubling_constant: 1.0,
            small_scale_cutoff: 1e-30,
            ..SpaceModel::euclidean(1)
        };
        let t = theory_constants(&loose, 0.5, 1.0, 1.0, 0.01).unwrap();
        assert!(t.r_capped);
        assert!((t.r_theory - 0.25e-30).abs() < 1e-40);
    }

    #[test]
    fn log_bracket_matches_exact_bracket() {
        for q in [0.3, 1.0, 1.9, 0.01, 1e-7] {
            assert_eq!(
                log2_bracket(libm::log2(q)) as u32,
                dyadic_bracket(q).unwrap()
            );
        }
    }
}
