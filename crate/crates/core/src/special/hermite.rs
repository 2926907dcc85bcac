//! Normalized harmonic-oscillator eigenfunctions
//! `psi_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2)`.
//!
//! Values come from the upward three-term recurrence on the normalized
//! functions, with a running power-of-ten rescale so that `psi_0` underflowing
//! at large `|x|` does not zero out the higher functions.

use crate::error::{Error, Result};

/// Default cap on the Hermite index accepted by the scalar entry points.
pub const DEFAULT_N_MAX: usize = 512;

const RESCALE_AT: f64 = 1e150;

/// Writes `psi_k(x)` into `out[k]` for every `k < out.len()`.
pub fn psi_sequence(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut log_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let mut factor = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out[0] = factor;
    for k in 1..out.len() {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
            factor = log_scale.exp();
        }
        out[k] = cur * factor;
    }
}

/// Derivatives `psi'_k(x) = sqrt(2k) psi_{k-1}(x) - x psi_k(x)` from a
/// sequence produced by [`psi_sequence`].
pub fn psi_prime_sequence(x: f64, psi: &[f64], out: &mut [f64]) {
    assert_eq!(psi.len(), out.len());
    for k in 0..psi.len() {
        let lower = if k == 0 {
            0.0
        } else {
            (2.0 * k as f64).sqrt() * psi[k - 1]
        };
        out[k] = lower - x * psi[k];
    }
}

/// Values and derivatives of `psi_0 ..= psi_n_max` at one point.
#[derive(Debug, Clone)]
pub struct HermiteValues {
    pub x: f64,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
}

impl HermiteValues {
    pub fn new(x: f64, n_max: usize) -> Self {
        let mut psi = vec![0.0; n_max + 1];
        psi_sequence(x, &mut psi);
        let mut dpsi = vec![0.0; n_max + 1];
        psi_prime_sequence(x, &psi, &mut dpsi);
        HermiteValues { x, psi, dpsi }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::IndexCap { index: n, cap })
    } else {
        Ok(())
    }
}

/// `psi_n(x)`, refusing indices above [`DEFAULT_N_MAX`].
pub fn hermite_psi(n: usize, x: f64) -> Result<f64> {
    hermite_psi_with_cap(n, x, DEFAULT_N_MAX)
}

pub fn hermite_psi_with_cap(n: usize, x: f64, cap: usize) -> Result<f64> {
    check_cap(n, cap)?;
    let mut buf = vec![0.0; n + 1];
    psi_sequence(x, &mut buf);
    Ok(buf[n])
}

/// `d psi_n / dx`, refusing indices above [`DEFAULT_N_MAX`].
pub fn hermite_psi_prime(n: usize, x: f64) -> Result<f64> {
    hermite_psi_prime_with_cap(n, x, DEFAULT_N_MAX)
}

pub fn hermite_psi_prime_with_cap(n: usize, x: f64, cap: usize) -> Result<f64> {
    check_cap(n, cap)?;
    let v = HermiteValues::new(x, n);
    Ok(v.dpsi[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_at_origin() {
        let v = hermite_psi(0, 0.0).unwrap();
        assert!((v - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(hermite_psi(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            hermite_psi(DEFAULT_N_MAX + 1, 0.3),
            Err(Error::IndexCap { index: DEFAULT_N_MAX + 1, cap: DEFAULT_N_MAX })
        );
        assert!(hermite_psi_with_cap(2000, 0.3, 4096).is_ok());
    }

    #[test]
    fn far_tail_survives_underflow_of_psi0() {
        // psi_0(45) underflows, psi_1200(45) sits near its turning point.
        let mut buf = vec![0.0; 1201];
        psi_sequence(45.0, &mut buf);
        assert_eq!(buf[0], 0.0);
        assert!(buf[1200].abs() > 1e-3, "{}", buf[1200]);
        assert!(buf.iter().all(|v| v.is_finite()));
    }
}
