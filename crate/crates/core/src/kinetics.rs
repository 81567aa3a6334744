//! Markovian bath: linear reaction chain, population propagation and the population resolvent.

use thiserror::Error;

use crate::numerics::{c, eig_real_nonsymmetric, expm, Lu, NumericsError};
use crate::{RealMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("a chain needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("forward rate k{index} = {value:e} s^-1 must be positive")]
    InvalidRate { index: usize, value: f64 },
    #[error("backward ratio {0} must be finite and nonnegative")]
    InvalidBackwardRatio(f64),
    #[error("rate matrix column {column} sums to {sum:e}, not zero")]
    NotConservative { column: usize, sum: f64 },
    #[error("initial distribution invalid: {0}")]
    InvalidDistribution(String),
    #[error("times must be nonnegative and ascending")]
    InvalidTimes,
    #[error("resolvent is singular at delta = {delta:e} rad/s")]
    SingularResolvent { delta: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Bath jump generator `K` in the convention `dρ/dt = −K ρ` (columns sum to zero).
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    k: RealMatrix,
    forward: Vec<f64>,
    backward: Vec<f64>,
}

impl RateMatrix {
    /// Linear chain `1 ⇄ 2 ⇄ … ⇄ N` with forward rates interpolated linearly from `k_first`
    /// to `k_last` and backward rates `k₋ᵢ = backward_ratio·kᵢ`.
    pub fn chain(
        states: usize,
        k_first: f64,
        k_last: f64,
        backward_ratio: f64,
    ) -> Result<Self, KineticsError> {
        if states < 2 {
            return Err(KineticsError::TooFewStates(states));
        }
        if !(backward_ratio.is_finite() && backward_ratio >= 0.0) {
            return Err(KineticsError::InvalidBackwardRatio(backward_ratio));
        }
        let links = states - 1;
        let forward: Vec<f64> = (0..links)
            .map(|i| {
                if links == 1 {
                    k_first
                } else {
                    k_first + (k_last - k_first) / (links - 1) as f64 * i as f64
                }
            })
            .collect();
        for (i, &k) in forward.iter().enumerate() {
            if !(k.is_finite() && k > 0.0) {
                return Err(KineticsError::InvalidRate { index: i + 1, value: k });
            }
        }
        if !(k_last.is_finite() && k_last > 0.0) {
            return Err(KineticsError::InvalidRate { index: links, value: k_last });
        }
        let backward: Vec<f64> = forward.iter().map(|k| backward_ratio * k).collect();
        Ok(Self::assemble(states, forward, backward))
    }

    fn assemble(states: usize, forward: Vec<f64>, backward: Vec<f64>) -> Self {
        let mut k = RealMatrix::zeros(states, states);
        for i in 0..states - 1 {
            // Forward i → i+1 and backward i+1 → i.
            k[(i, i)] += forward[i];
            k[(i + 1, i)] -= forward[i];
            k[(i + 1, i + 1)] += backward[i];
            k[(i, i + 1)] -= backward[i];
        }
        Self { k, forward, backward }
    }

    /// A bath with a single state and no jumps.
    pub fn frozen(states: usize) -> Self {
        Self {
            k: RealMatrix::zeros(states, states),
            forward: vec![0.0; states.saturating_sub(1)],
            backward: vec![0.0; states.saturating_sub(1)],
        }
    }

    /// Wraps an arbitrary generator after checking conservation.
    pub fn from_matrix(k: RealMatrix) -> Result<Self, KineticsError> {
        if !k.is_square() || k.rows() == 0 {
            return Err(KineticsError::TooFewStates(k.rows()));
        }
        for j in 0..k.cols() {
            let sum: f64 = (0..k.rows()).map(|i| k[(i, j)]).sum();
            let scale: f64 = (0..k.rows()).map(|i| k[(i, j)].abs()).sum();
            if sum.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(KineticsError::NotConservative { column: j, sum });
            }
        }
        let n = k.rows();
        let forward = (0..n - 1).map(|i| -k[(i + 1, i)]).collect();
        let backward = (0..n - 1).map(|i| -k[(i, i + 1)]).collect();
        Ok(Self { k, forward, backward })
    }

    pub fn states(&self) -> usize {
        self.k.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.k
    }

    /// `k₁ … k_{N−1}` in s⁻¹.
    pub fn forward_rates(&self) -> &[f64] {
        &self.forward
    }

    /// `k₋₁ … k₋₍N−1₎` in s⁻¹.
    pub fn backward_rates(&self) -> &[f64] {
        &self.backward
    }

    /// Null vector of `K` normalised to unit sum.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>, KineticsError> {
        let n = self.states();
        // Replace the last conservation row by Σρ = 1.
        let mut a = self.k.clone();
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut rhs = vec![0.0; n];
        rhs[n - 1] = 1.0;
        Ok(Lu::factor(&a)?.solve(&rhs)?)
    }
}

/// Validates a probability vector for a bath of `states` states.
pub fn check_distribution(p0: &[f64], states: usize) -> Result<(), KineticsError> {
    if p0.len() != states {
        return Err(KineticsError::InvalidDistribution(format!(
            "expected {states} entries, got {}",
            p0.len()
        )));
    }
    if p0.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(KineticsError::InvalidDistribution(
            "entries must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = p0.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(KineticsError::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// All population in `state` (zero-based).
pub fn localized(states: usize, state: usize) -> Vec<f64> {
    let mut p = vec![0.0; states];
    p[state] = 1.0;
    p
}

/// Bath populations sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationTrajectory {
    /// Seconds.
    pub times: Vec<f64>,
    /// `populations[t][s]`.
    pub populations: Vec<Vec<f64>>,
}

fn check_times(times: &[f64]) -> Result<(), KineticsError> {
    let ascending = times.windows(2).all(|w| w[1] >= w[0]);
    if !ascending || times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(KineticsError::InvalidTimes);
    }
    Ok(())
}

/// `ρ(t) = exp(−K t)·p0` at each time.
pub fn propagate(
    k: &RateMatrix,
    p0: &[f64],
    times: &[f64],
) -> Result<PopulationTrajectory, KineticsError> {
    check_distribution(p0, k.states())?;
    check_times(times)?;
    let populations = times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(p0.to_vec());
            }
            let prop = expm(&k.matrix().scale(-t))?;
            Ok(prop.mul_vec(p0)?)
        })
        .collect::<Result<Vec<_>, KineticsError>>()?;
    Ok(PopulationTrajectory {
        times: times.to_vec(),
        populations,
    })
}

/// Same as [`propagate`] through the eigendecomposition of `K`.
pub fn propagate_eigen(
    k: &RateMatrix,
    p0: &[f64],
    times: &[f64],
) -> Result<PopulationTrajectory, KineticsError> {
    check_distribution(p0, k.states())?;
    check_times(times)?;
    let dec = eig_real_nonsymmetric(k.matrix())?;
    let n = k.states();
    let p0c: Vec<C64> = p0.iter().map(|&p| c(p, 0.0)).collect();
    let coeff = dec.left_inverse.mul_vec(&p0c)?;
    let populations = times
        .iter()
        .map(|&t| {
            (0..n)
                .map(|s| {
                    (0..n)
                        .map(|j| dec.right_vectors[(s, j)] * coeff[j] * (-dec.eigenvalues[j] * t).exp())
                        .sum::<C64>()
                        .re
                })
                .collect()
        })
        .collect();
    Ok(PopulationTrajectory {
        times: times.to_vec(),
        populations,
    })
}

/// Population resolvent `−i (iΔ + K + 2γ)⁻¹ p0`: the Fourier transform of the damped
/// populations `exp(−(K + 2γ)t)·p0` evaluated at `−Δ`.
pub fn population_resolvent(
    k: &RateMatrix,
    dephasing: f64,
    p0: &[f64],
    delta: f64,
) -> Result<Vec<C64>, KineticsError> {
    let n = k.states();
    if p0.len() != n {
        return Err(KineticsError::InvalidDistribution(format!(
            "expected {n} entries, got {}",
            p0.len()
        )));
    }
    let a = k
        .matrix()
        .to_complex()
        .add_diagonal(c(2.0 * dephasing, delta));
    let rhs: Vec<C64> = p0.iter().map(|&p| c(p, 0.0)).collect();
    let x = Lu::factor(&a)
        .map_err(|e| match e {
            NumericsError::SingularMatrix { .. } => KineticsError::SingularResolvent { delta },
            other => other.into(),
        })?
        .solve(&rhs)?;
    Ok(x.into_iter().map(|v| v * c(0.0, -1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_chain_layout() {
        let k = 2.0e12;
        let r = RateMatrix::chain(2, k, k, 0.1).unwrap();
        let m = r.matrix();
        assert_eq!(m[(0, 0)], k);
        assert_eq!(m[(0, 1)], -0.1 * k);
        assert_eq!(m[(1, 0)], -k);
        assert_eq!(m[(1, 1)], 0.1 * k);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RateMatrix::chain(1, 1.0, 1.0, 0.1), Err(KineticsError::TooFewStates(1))));
        assert!(matches!(
            RateMatrix::chain(5, 1.0, -1.0, 0.1),
            Err(KineticsError::InvalidRate { .. })
        ));
        assert!(RateMatrix::chain(3, 1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn scalar_resolvent() {
        let r = RateMatrix::frozen(1);
        let g = 3.0;
        let v = population_resolvent(&r, g, &[1.0], 0.0).unwrap()[0];
        assert!((v.norm() - 1.0 / (2.0 * g)).abs() < 1e-15);
        let d = 0.7;
        let v = population_resolvent(&r, g, &[1.0], d).unwrap()[0];
        let want = c(0.0, -1.0) / c(2.0 * g, d);
        assert!((v - want).norm() < 1e-15);
    }
}
