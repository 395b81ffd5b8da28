//! Dolan–Moré performance profiles and shifted geometric means.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("timing table is empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("time at ({problem}, {solver}) is {value}; times must be positive or +inf")]
    InvalidTime { problem: usize, solver: usize, value: f64 },
    #[error("tau grid must be ascending with every value at least 1")]
    InvalidGrid,
    #[error("shift must be nonnegative, got {0}")]
    InvalidShift(f64),
    #[error("every run failed; no finite time to scale failures by")]
    AllFailed,
}

/// `t[p][s]`: seconds for problem `p` and solver `s`, `+∞` on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingTable {
    pub solvers: Vec<String>,
    pub problems: Vec<String>,
    pub times: Vec<Vec<f64>>,
}

impl TimingTable {
    pub fn new(solvers: Vec<String>, problems: Vec<String>, times: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        if solvers.is_empty() || problems.is_empty() {
            return Err(ProfileError::Empty);
        }
        if times.len() != problems.len() {
            return Err(ProfileError::Ragged {
                row: times.len().min(problems.len()),
                expected: problems.len(),
                got: times.len(),
            });
        }
        for (p, row) in times.iter().enumerate() {
            if row.len() != solvers.len() {
                return Err(ProfileError::Ragged {
                    row: p,
                    expected: solvers.len(),
                    got: row.len(),
                });
            }
            for (s, &t) in row.iter().enumerate() {
                if !(t > 0.0) || t.is_nan() {
                    return Err(ProfileError::InvalidTime { problem: p, solver: s, value: t });
                }
            }
        }
        Ok(Self { solvers, problems, times })
    }

    /// Column of times for solver `s`.
    pub fn solver_times(&self, s: usize) -> Vec<f64> {
        self.times.iter().map(|row| row[s]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ratios {
    /// `r[p][s] = t[p][s] / min_s′ t[p][s′]`, `+∞` on failure.
    pub r: Vec<Vec<f64>>,
    /// Problems on which every solver failed.
    pub all_failed: Vec<usize>,
}

pub fn performance_ratios(table: &TimingTable) -> Ratios {
    let mut all_failed = Vec::new();
    let r = table
        .times
        .iter()
        .enumerate()
        .map(|(p, row)| {
            let best = row.iter().copied().fold(f64::INFINITY, f64::min);
            if best.is_infinite() {
                all_failed.push(p);
                return vec![f64::INFINITY; row.len()];
            }
            row.iter().map(|t| t / best).collect()
        })
        .collect();
    Ratios { r, all_failed }
}

/// `ρ_s(τ) = |{p : r[p][s] ≤ τ}| / |P|`, one curve per solver.
pub fn dm_profile(r: &[Vec<f64>], taus: &[f64]) -> Result<Vec<Vec<f64>>, ProfileError> {
    if taus.iter().any(|&t| !(t >= 1.0)) || taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(ProfileError::InvalidGrid);
    }
    let Some(first) = r.first() else {
        return Err(ProfileError::Empty);
    };
    let np = r.len() as f64;
    Ok((0..first.len())
        .map(|s| {
            taus.iter()
                .map(|&tau| r.iter().filter(|row| row[s] <= tau).count() as f64 / np)
                .collect()
        })
        .collect())
}

/// `count` points log-spaced on `[1, tau_max]`.
pub fn tau_grid(tau_max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let top = tau_max.max(1.0).ln();
            let mut g: Vec<f64> = (0..count).map(|i| (top * i as f64 / (count - 1) as f64).exp()).collect();
            g[0] = 1.0;
            g[count - 1] = tau_max.max(1.0);
            g
        }
    }
}

/// `exp(mean ln max(1, σ + tₚ)) − σ`, failures replaced by 100 times the
/// largest finite entry.
pub fn sgm(times: &[f64], sigma: f64) -> Result<f64, ProfileError> {
    if !(sigma >= 0.0) {
        return Err(ProfileError::InvalidShift(sigma));
    }
    if times.is_empty() {
        return Err(ProfileError::Empty);
    }
    let worst = times
        .iter()
        .copied()
        .filter(|t| t.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if worst == f64::NEG_INFINITY {
        return Err(ProfileError::AllFailed);
    }
    let mean_log = times
        .iter()
        .map(|&t| {
            let t = if t.is_finite() { t } else { 100.0 * worst };
            (sigma + t).max(1.0).ln()
        })
        .sum::<f64>()
        / times.len() as f64;
    Ok(mean_log.exp() - sigma)
}
