//! Matrix elements `J_mn(x1, x2) = int_{x1}^{x2} psi_m psi_n dx` of position
//! interval indicators in the oscillator eigenbasis.
//!
//! Off-diagonal half-line elements use the Wronskian form
//! `J_mn(a, inf) = (psi_m psi'_n - psi_n psi'_m)(a) / (2(n - m))`.
//! Diagonal elements other than `J_00` have no closed form here and are
//! integrated with composite Gauss-Legendre rules, all indices at once.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{domain, Error, Result};
use crate::special::{erfc_real, psi_sequence, unit_rule, HermiteValues, DEFAULT_N_MAX};

const DIAG_ORDER: usize = 16;
// distance past the outermost turning point where psi_n^2 is negligible
const DIAG_REACH: f64 = 12.0;

fn wronskian(v: &HermiteValues, m: usize, n: usize) -> f64 {
    (v.psi[m] * v.dpsi[n] - v.psi[n] * v.dpsi[m]) / (2.0 * (n as f64 - m as f64))
}

fn half_line_offdiag(m: usize, n: usize, a: f64) -> f64 {
    if a.is_infinite() {
        return 0.0;
    }
    let v = HermiteValues::new(a, m.max(n));
    wronskian(&v, m, n)
}

/// Off-diagonal element on `[x1, x2]`; either end may be infinite.
pub fn j_offdiag(m: usize, n: usize, x1: f64, x2: f64) -> Result<f64> {
    if m == n {
        return domain("j_offdiag needs m != n; use j_diag");
    }
    let top = m.max(n);
    if top > DEFAULT_N_MAX {
        return Err(Error::IndexCap {
            index: top,
            cap: DEFAULT_N_MAX,
        });
    }
    if x1.is_nan() || x2.is_nan() || x1 >= x2 {
        return domain(format!("need x1 < x2, got [{x1}, {x2}]"));
    }
    Ok(half_line_offdiag(m, n, x1) - half_line_offdiag(m, n, x2))
}

/// `J_kk(x, inf)` for every `k <= n_max`.
pub fn diag_half_line(x: f64, n_max: usize) -> Vec<f64> {
    if x == f64::NEG_INFINITY {
        return vec![1.0; n_max + 1];
    }
    if x == f64::INFINITY {
        return vec![0.0; n_max + 1];
    }
    if x < 0.0 {
        // psi_k^2 is even
        return diag_half_line(-x, n_max)
            .into_iter()
            .map(|v| 1.0 - v)
            .collect();
    }
    let mut out = vec![0.0; n_max + 1];
    out[0] = 0.5 * erfc_real(x);
    if n_max == 0 {
        return out;
    }
    let turning = (2.0 * n_max as f64 + 1.0).sqrt();
    let upper = turning + DIAG_REACH;
    if x >= upper {
        return out;
    }
    // panels short compared to the local wavelength 2 pi / turning
    let width = (std::f64::consts::PI / turning).min(0.5);
    let panels = ((upper - x) / width).ceil() as usize;
    let h = (upper - x) / panels as f64;
    let rule = unit_rule(DIAG_ORDER);
    let mut psi = vec![0.0; n_max + 1];
    let mut acc = vec![0.0; n_max + 1];
    for p in 0..panels {
        let mid = x + h * (p as f64 + 0.5);
        for (u, w) in rule.nodes.iter().zip(&rule.weights) {
            let node = mid + 0.5 * h * u;
            psi_sequence(node, &mut psi);
            let wt = 0.5 * h * w;
            for (a, v) in acc.iter_mut().zip(&psi) {
                *a += wt * v * v;
            }
        }
    }
    out[1..].copy_from_slice(&acc[1..]);
    out
}

/// `J_nn(x, inf)`.
pub fn j_diag(n: usize, x: f64) -> Result<f64> {
    if n > DEFAULT_N_MAX {
        return Err(Error::IndexCap {
            index: n,
            cap: DEFAULT_N_MAX,
        });
    }
    if x.is_nan() {
        return domain("j_diag at NaN");
    }
    if n == 0 {
        return Ok(if x.is_infinite() {
            if x > 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            0.5 * erfc_real(x)
        });
    }
    Ok(diag_half_line(x, n)[n])
}

/// `J_0n(a, inf)` for `n = 0 ..= n_max`, with no cap on `n_max`.
///
/// Uses `J_0n(a, inf) = psi_0(a) psi_{n-1}(a) / sqrt(2n)` for `n >= 1`.
pub fn j0_row(a: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    if a == f64::NEG_INFINITY {
        out[0] = 1.0;
        return out;
    }
    if a == f64::INFINITY {
        return out;
    }
    out[0] = 0.5 * erfc_real(a);
    if n_max == 0 {
        return out;
    }
    let mut psi = vec![0.0; n_max];
    psi_sequence(a, &mut psi);
    let psi0 = psi[0];
    for n in 1..=n_max {
        out[n] = psi0 * psi[n - 1] / (2.0 * n as f64).sqrt();
    }
    out
}

/// Half-line elements `J_mn(lower_cut, inf)` for rows `m < rows` and
/// columns `n <= max_index`. Square tables have `rows = max_index + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JTable {
    pub lower_cut: f64,
    pub max_index: usize,
    pub rows: usize,
    values: Vec<f64>,
}

impl JTable {
    fn cols(&self) -> usize {
        self.max_index + 1
    }

    /// `J_mn`, using symmetry when only `n` is a stored row.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        if m < self.rows {
            self.values[m * self.cols() + n]
        } else {
            assert!(n < self.rows, "({m}, {n}) outside a {}-row table", self.rows);
            self.values[n * self.cols() + m]
        }
    }

    pub fn row(&self, m: usize) -> &[f64] {
        let c = self.cols();
        &self.values[m * c..(m + 1) * c]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.max_index + 1
    }
}

/// Square table up to [`DEFAULT_N_MAX`].
pub fn build_jtable(lower_cut: f64, max_index: usize) -> Result<JTable> {
    build_jtable_with_cap(lower_cut, max_index + 1, max_index, DEFAULT_N_MAX)
}

/// Table with `rows` rows and columns `0 ..= max_index`, refusing
/// `max_index > cap`.
pub fn build_jtable_with_cap(
    lower_cut: f64,
    rows: usize,
    max_index: usize,
    cap: usize,
) -> Result<JTable> {
    if max_index > cap {
        return Err(Error::IndexCap {
            index: max_index,
            cap,
        });
    }
    if lower_cut.is_nan() {
        return domain("cut is NaN");
    }
    let rows = rows.min(max_index + 1);
    let cols = max_index + 1;
    let mut values = vec![0.0; rows * cols];
    let diag = diag_half_line(lower_cut, rows.saturating_sub(1));
    if lower_cut.is_finite() {
        let v = HermiteValues::new(lower_cut, max_index);
        for m in 0..rows {
            for n in 0..cols {
                values[m * cols + n] = if m == n {
                    diag[m]
                } else if n < m && n < rows {
                    values[n * cols + m]
                } else {
                    wronskian(&v, m, n)
                };
            }
        }
    } else {
        for m in 0..rows {
            values[m * cols + m] = diag[m];
        }
    }
    Ok(JTable {
        lower_cut,
        max_index,
        rows,
        values,
    })
}

/// Memo of tables keyed by `(cut, rows, max_index)`.
#[derive(Debug, Default)]
pub struct JCache {
    tables: Mutex<HashMap<(u64, usize, usize), Arc<JTable>>>,
}

impl JCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, cut: f64, rows: usize, max_index: usize, cap: usize) -> Result<Arc<JTable>> {
        let key = (cut.to_bits(), rows, max_index);
        if let Some(t) = self.tables.lock().expect("cache poisoned").get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(build_jtable_with_cap(cut, rows, max_index, cap)?);
        Ok(self
            .tables
            .lock()
            .expect("cache poisoned")
            .entry(key)
            .or_insert(table)
            .clone())
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
