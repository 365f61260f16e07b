//! Wilcoxon signed-rank test on paired first ranks.
//!
//! Differences are `base - aug`, so a positive difference means the augmented
//! technique ranked the buggy file higher. Zero differences are dropped, tied
//! magnitudes share their average rank. Up to [`EXACT_MAX_N`] non-zero pairs
//! the null distribution of `W+` is computed exactly (with the observed tied
//! ranks); above that a normal approximation with tie correction is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Augmented ranks tend to be better (smaller) than baseline ranks.
    Greater,
    /// Augmented ranks tend to be worse.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    /// Every difference was zero.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Non-zero pairs.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W-)` for the two-sided test, `W+` otherwise.
    pub statistic: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Average ranks (1-based) of `values` sorted ascending; ties share the mean.
fn average_ranks(sorted: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        ranks[i..=j].fill(avg);
        i = j + 1;
    }
    ranks
}

/// Number of sign assignments giving each value of `2 * W+`.
fn exact_counts(doubled_ranks: &[usize]) -> Vec<f64> {
    let max: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

pub fn wilcoxon_signed_rank(base: &[f64], aug: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    if base.len() != aug.len() || base.is_empty() {
        return Err(Error::Eval(format!(
            "wilcoxon needs equal non-empty samples, got {} and {}",
            base.len(),
            aug.len()
        )));
    }
    let mut diffs: Vec<f64> = base
        .iter()
        .zip(aug)
        .map(|(b, a)| b - a)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            n: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Degenerate,
        });
    }
    diffs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;

    let (p_upper, p_lower, method) = if n <= EXACT_MAX_N {
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let counts = exact_counts(&doubled);
        let observed = (w_plus * 2.0).round() as usize;
        let denom = 2f64.powi(n as i32);
        let lower: f64 = counts[..=observed].iter().sum::<f64>() / denom;
        let upper: f64 = counts[observed..].iter().sum::<f64>() / denom;
        (upper, lower, WilcoxonMethod::Exact)
    } else {
        let nf = n as f64;
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < magnitudes.len() {
            let t = magnitudes[i..].iter().take_while(|m| **m == magnitudes[i]).count();
            tie_term += (t * t * t - t) as f64;
            i += t;
        }
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
        if var <= 0.0 {
            (1.0, 1.0, WilcoxonMethod::Normal)
        } else {
            let z = (w_plus - mean) / var.sqrt();
            let std = Normal::new(0.0, 1.0).expect("standard normal");
            (std.sf(z), std.cdf(z), WilcoxonMethod::Normal)
        }
    };
    let (statistic, p_value) = match alternative {
        Alternative::TwoSided => (w_plus.min(w_minus), (2.0 * p_upper.min(p_lower)).min(1.0)),
        Alternative::Greater => (w_plus, p_upper),
        Alternative::Less => (w_plus, p_lower),
    };
    Ok(WilcoxonResult {
        n,
        w_plus,
        w_minus,
        statistic,
        p_value,
        method,
    })
}
