//! Rank-correlation trends of UNR across the atlas.

use serde::{Deserialize, Serialize};

use crate::AtlasResult;

/// Ranks starting at 1; ties share their average rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman correlation (Pearson on average ranks). `None` when either
/// series is constant or shorter than two.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    /// Correlation of UNR with Ω at each fixed φ (0 where inconclusive).
    pub vs_omega: Vec<f64>,
    /// Correlation of UNR with φ at each fixed Ω (0 where inconclusive).
    pub vs_phi: Vec<f64>,
    /// Series (`"phi=<j>"` / `"omega=<i>"`) that were constant or too short.
    pub inconclusive: Vec<String>,
    pub fraction_negative_vs_omega: f64,
    pub fraction_negative_vs_phi: f64,
    pub fraction_negative: f64,
}

/// Spearman correlation of UNR along every grid row and column; failed cells
/// are left out of their series.
pub fn trend_statistics(result: &AtlasResult) -> TrendReport {
    let (no, np) = (result.spec.omega_values.len(), result.spec.phi_values.len());
    let mut inconclusive = Vec::new();
    let mut series = |label: String, pts: Vec<(f64, Option<f64>)>| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().filter_map(|(x, y)| y.map(|y| (x, y))).unzip();
        spearman(&x, &y).unwrap_or_else(|| {
            inconclusive.push(label);
            0.0
        })
    };
    let vs_omega: Vec<f64> = (0..np)
        .map(|j| {
            series(
                format!("phi={j}"),
                (0..no)
                    .map(|i| (result.spec.omega_values[i], result.cell(i, j).unr()))
                    .collect(),
            )
        })
        .collect();
    let vs_phi: Vec<f64> = (0..no)
        .map(|i| {
            series(
                format!("omega={i}"),
                (0..np)
                    .map(|j| (result.spec.phi_values[j], result.cell(i, j).unr()))
                    .collect(),
            )
        })
        .collect();
    let frac = |v: &[f64]| v.iter().filter(|&&c| c < 0.0).count() as f64 / v.len().max(1) as f64;
    let all: Vec<f64> = vs_omega.iter().chain(&vs_phi).copied().collect();
    TrendReport {
        fraction_negative_vs_omega: frac(&vs_omega),
        fraction_negative_vs_phi: frac(&vs_phi),
        fraction_negative: frac(&all),
        vs_omega,
        vs_phi,
        inconclusive,
    }
}
