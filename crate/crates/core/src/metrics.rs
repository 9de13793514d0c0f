//! Scalability metrics of collective decoherence-free encodings.
//!
//! `d_DF(N, k) = log₂ dim V(k) / N` counts logical qubits per physical
//! qubit, and `p_DF(N, k) = dim V(k) / dim W(k)` is the decoherence-free
//! fraction of a weight sector. Their large-`N` limits at `k = rN` are the
//! binary entropy `h(r)` and `(1 - 2r)/(1 - r)`.

use std::io::Write;

use serde::Serialize;

use crate::report::format_significant;
use crate::structure::{binomial, df_dimension};
use crate::{Error, Result};

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

fn check_half(n: usize, k: usize) -> Result<()> {
    if n == 0 || 2 * k > n {
        return Err(Error::Invalid(format!("need n ≥ 1 and 0 ≤ k ≤ n/2, got n={n}, k={k}")));
    }
    Ok(())
}

/// `log₂ dim V(k)` for `2k ≤ n`.
fn log2_df_dimension(n: usize, k: usize) -> f64 {
    match df_dimension(n, k) {
        Ok(d) => (d as f64).log2(),
        // C(n,k-1)/C(n,k) = k/(n-k+1)
        Err(_) => {
            let ln = ln_binomial(n, k) + (((n - 2 * k + 1) as f64) / ((n - k + 1) as f64)).ln();
            ln / std::f64::consts::LN_2
        }
    }
}

/// `log₂ dim V(k) / n`.
pub fn d_df(n: usize, k: usize) -> Result<f64> {
    check_half(n, k)?;
    Ok(log2_df_dimension(n, k) / n as f64)
}

fn check_ratio(r: f64, allow_zero: bool) -> Result<()> {
    let low_ok = if allow_zero { r >= 0.0 } else { r > 0.0 };
    if !(low_ok && r <= 0.5) {
        return Err(Error::Invalid(format!("r = {r} outside the allowed range up to 1/2")));
    }
    Ok(())
}

/// Binary entropy `-r log₂ r - (1-r) log₂(1-r)` for `0 < r ≤ 1/2`.
pub fn d_df_asymptotic(r: f64) -> Result<f64> {
    check_ratio(r, false)?;
    Ok(binary_entropy(r))
}

fn binary_entropy(r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    -(r * r.log2() + (1.0 - r) * (1.0 - r).log2())
}

/// `dim V(k) / C(n, k) = (n - 2k + 1)/(n - k + 1)`.
pub fn p_df(n: usize, k: usize) -> Result<f64> {
    check_half(n, k)?;
    match (df_dimension(n, k), binomial(n as u64, k as u64)) {
        (Ok(dim), Some(total)) => Ok(dim as f64 / total as f64),
        _ => Ok((n - 2 * k + 1) as f64 / (n - k + 1) as f64),
    }
}

/// `(1 - 2r)/(1 - r)` for `0 ≤ r ≤ 1/2`.
pub fn p_df_asymptotic(r: f64) -> Result<f64> {
    check_ratio(r, true)?;
    Ok((1.0 - 2.0 * r) / (1.0 - r))
}

/// `h(r)·(1 - 2r)/(1 - r)`, with the `r → 0` limit 0.
pub fn product_asymptotic(r: f64) -> Result<f64> {
    check_ratio(r, true)?;
    Ok(binary_entropy(r) * p_df_asymptotic(r)?)
}

/// Bracket searched by [`product_optimum`].
pub const OPTIMUM_BRACKET: (f64, f64) = (1e-6, 0.5);

/// Maximizer of [`product_asymptotic`] by golden-section search.
pub fn product_optimum() -> f64 {
    let f = |r: f64| product_asymptotic(r).expect("bracket lies inside (0, 1/2]");
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = OPTIMUM_BRACKET;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Compensated (Neumaier) sum.
fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!("n must be even and positive, got {n}")));
    }
    Ok(())
}

/// `ln` of the spin-`J` multiplicity `(2J+1) n! / ((n/2+J+1)! (n/2-J)!)`
/// relative to the `J = 0` term, for `J = 0 ..= n/2`.
fn ln_relative_multiplicities(n: usize) -> Vec<f64> {
    let half = (n / 2) as f64;
    let mut out = Vec::with_capacity(n / 2 + 1);
    let mut acc = 0.0f64;
    out.push(acc);
    for j in 1..=n / 2 {
        let j = j as f64;
        // term_J / term_{J-1} = (2J+1)/(2J-1) · (n/2-J+1)/(n/2+J+1)
        acc += ((2.0 * j + 1.0) / (2.0 * j - 1.0)).ln() + ((half - j + 1.0) / (half + j + 1.0)).ln();
        out.push(acc);
    }
    out
}

/// `p_DF,Jtot` for every `j_tot = 1 ..= n/2`.
pub fn p_df_jtot_series(n: usize) -> Result<Vec<f64>> {
    check_even(n)?;
    let ln_terms = ln_relative_multiplicities(n);
    let mut out = Vec::with_capacity(n / 2);
    let mut terms = Vec::with_capacity(n / 2);
    for &t in &ln_terms[1..] {
        terms.push(t.exp());
        out.push(1.0 / neumaier_sum(terms.iter().copied()));
    }
    Ok(out)
}

/// Strong-collective dimension over the summed multiplicities of spins
/// `1 ..= j_tot`.
pub fn p_df_jtot(n: usize, j_tot: usize) -> Result<f64> {
    check_even(n)?;
    if j_tot == 0 || j_tot > n / 2 {
        return Err(Error::Invalid(format!("j_tot must lie in 1..={}, got {j_tot}", n / 2)));
    }
    Ok(p_df_jtot_series(n)?[j_tot - 1])
}

/// One sample of the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricPoint {
    pub n: Option<usize>,
    pub k: Option<usize>,
    /// `k/n`, or the asymptotic ratio.
    pub r: f64,
    pub d_df: f64,
    pub p_df: f64,
    pub product: f64,
}

impl MetricPoint {
    pub fn finite(n: usize, k: usize) -> Result<Self> {
        let (d, p) = (d_df(n, k)?, p_df(n, k)?);
        Ok(Self { n: Some(n), k: Some(k), r: k as f64 / n as f64, d_df: d, p_df: p, product: d * p })
    }

    /// At `r = 0` the entropy limit 0 is used.
    pub fn asymptotic(r: f64) -> Result<Self> {
        check_ratio(r, true)?;
        let (d, p) = (binary_entropy(r), p_df_asymptotic(r)?);
        Ok(Self { n: None, k: None, r, d_df: d, p_df: p, product: d * p })
    }
}

/// Asymptotic curves on `r = 0, 0.001, …, 0.5`.
pub fn fig1_series() -> Vec<MetricPoint> {
    (0..=500)
        .map(|i| MetricPoint::asymptotic(i as f64 / 1000.0).expect("grid inside [0, 1/2]"))
        .collect()
}

/// CSV with header `r,d_df,p_df,product`, 12 significant digits.
pub fn write_fig1_csv<W: Write>(points: &[MetricPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "r,d_df,p_df,product")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            format_significant(p.r, 12),
            format_significant(p.d_df, 12),
            format_significant(p.p_df, 12),
            format_significant(p.product, 12)
        )?;
    }
    Ok(())
}

/// CSV with header `j_tot,p_df_jtot` for `j_tot = 1 ..= n/2`.
pub fn write_fig2_csv<W: Write>(n: usize, mut out: W) -> std::io::Result<()> {
    let series = p_df_jtot_series(n).map_err(std::io::Error::other)?;
    writeln!(out, "j_tot,p_df_jtot")?;
    for (j, p) in series.iter().enumerate() {
        writeln!(out, "{},{}", j + 1, format_significant(*p, 12))?;
    }
    Ok(())
}

/// One row of the highlighted series `j_tot ∈ {1, 2, n/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JtotRow {
    pub n: usize,
    pub first: f64,
    /// NaN when `n = 2`.
    pub second: f64,
    pub half: f64,
}

impl JtotRow {
    pub fn new(n: usize) -> Result<Self> {
        let series = p_df_jtot_series(n)?;
        Ok(Self {
            n,
            first: series[0],
            second: series.get(1).copied().unwrap_or(f64::NAN),
            half: series[series.len() - 1],
        })
    }
}

/// CSV with header `n,p_jtot_1,p_jtot_2,p_jtot_half`.
pub fn write_fig2_series_csv<W: Write>(rows: &[JtotRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "n,p_jtot_1,p_jtot_2,p_jtot_half")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.n,
            format_significant(row.first, 12),
            format_significant(row.second, 12),
            format_significant(row.half, 12)
        )?;
    }
    Ok(())
}
