//! Closed-form parity probabilities for coherent states.
//!
//! For a real coherent amplitude `γ` and real displacement `β`,
//! `⟨γ|Π⁺(β)|γ⟩ = e^{−(γ−β)²} cosh (γ−β)² = (1 + e^{−2(γ−β)²}) / 2` and the odd
//! outcome takes the complement. These serve both as oracles for the
//! numerical path and as the fast path for coherent-state scans.

use serde::Serialize;

use crate::fock::Parity;
use crate::fur::ValidityRegion;

/// `⟨γ|Π⁻(β)|γ⟩ = (1 − e^{−2(γ−β)²}) / 2`.
pub fn analytic_odd_parity_prob(gamma: f64, beta: f64) -> f64 {
    let s = gamma - beta;
    -0.5 * (-2.0 * s * s).exp_m1()
}

/// `⟨γ|Π⁺(β)|γ⟩ = (1 + e^{−2(γ−β)²}) / 2`.
pub fn analytic_even_parity_prob(gamma: f64, beta: f64) -> f64 {
    1.0 - analytic_odd_parity_prob(gamma, beta)
}

pub fn analytic_parity_prob(gamma: f64, beta: f64, parity: Parity) -> f64 {
    match parity {
        Parity::Even => analytic_even_parity_prob(gamma, beta),
        Parity::Odd => analytic_odd_parity_prob(gamma, beta),
    }
}

/// Average certainty `½[p(γ, β) + p(γ, −β)]` for one parity outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertaintyValue {
    pub value: f64,
    pub parity: Parity,
    pub gamma: f64,
    pub beta: f64,
    /// False inside the excluded small-`β`, small-`γ` corner (default region).
    pub in_validity_region: bool,
}

pub fn analytic_average_certainty(gamma: f64, beta: f64, parity: Parity) -> CertaintyValue {
    analytic_average_certainty_in(gamma, beta, parity, &ValidityRegion::default())
}

pub fn analytic_average_certainty_in(
    gamma: f64,
    beta: f64,
    parity: Parity,
    region: &ValidityRegion,
) -> CertaintyValue {
    CertaintyValue {
        value: average_certainty_value(gamma, beta, parity),
        parity,
        gamma,
        beta,
        in_validity_region: region.contains(beta, gamma * gamma),
    }
}

/// Bare value of [`analytic_average_certainty`]; even in `β` by construction.
pub(crate) fn average_certainty_value(gamma: f64, beta: f64, parity: Parity) -> f64 {
    let b = beta.abs();
    0.5 * (analytic_parity_prob(gamma, b, parity) + analytic_parity_prob(gamma, -b, parity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_separation() {
        assert_eq!(analytic_even_parity_prob(0.7, 0.7), 1.0);
        assert_eq!(analytic_odd_parity_prob(0.7, 0.7), 0.0);
    }

    #[test]
    fn unit_separation() {
        let e2 = (-2.0f64).exp();
        assert!((analytic_even_parity_prob(1.5, 0.5) - (1.0 + e2) / 2.0).abs() < 1e-15);
        assert!((analytic_odd_parity_prob(1.5, 0.5) - (1.0 - e2) / 2.0).abs() < 1e-15);
        assert!((analytic_even_parity_prob(1.5, 0.5) - 0.567_667_641_618_306_4).abs() < 1e-12);
        assert!((analytic_odd_parity_prob(1.5, 0.5) - 0.432_332_358_381_693_6).abs() < 1e-12);
    }

    #[test]
    fn large_separation_tends_to_half() {
        let v = analytic_even_parity_prob(5.0, 0.0);
        assert!(v - 0.5 < 1e-21);
        assert!(v >= 0.5);
    }

    #[test]
    fn matched_displacement_averages() {
        let even = analytic_average_certainty(1.0, 1.0, Parity::Even);
        let odd = analytic_average_certainty(1.0, 1.0, Parity::Odd);
        let e8 = (-8.0f64).exp();
        assert!((even.value - 0.5 * (1.0 + (1.0 + e8) / 2.0)).abs() < 1e-15);
        assert!((odd.value - 0.5 * (1.0 - e8) / 2.0).abs() < 1e-15);
        assert!((even.value - 0.750_083_865_656_975_6).abs() < 1e-12);
        assert!((odd.value - 0.249_916_134_343_024_4).abs() < 1e-12);
        assert!(even.in_validity_region);
    }

    #[test]
    fn origin_is_flagged() {
        let c = analytic_average_certainty(0.0, 0.0, Parity::Even);
        assert_eq!(c.value, 1.0);
        assert!(!c.in_validity_region);
        assert_eq!(analytic_average_certainty(0.0, 0.0, Parity::Odd).value, 0.0);
    }
}
