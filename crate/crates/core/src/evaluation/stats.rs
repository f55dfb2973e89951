use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::EvalError;
use crate::chunkers::ChunkMethod;
use crate::metrics::Metric;

/// Mean and sample standard deviation (divisor `n - 1`). A single value has
/// `std == 0` and `singleton` set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub singleton: bool,
}

impl Aggregate {
    /// `"mean ± std"` with four decimals.
    pub fn display(&self) -> String {
        format_mean_std(self.mean, self.std)
    }
}

pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.4} ± {std:.4}")
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyValues);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Ok(Aggregate { mean, std: 0.0, singleton: true });
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(Aggregate { mean, std: (ss / (n - 1.0)).sqrt(), singleton: false })
}

/// Two-tailed Student-t p-value, `I_x(df/2, 1/2)` with `x = df / (df + t²)`.
pub fn t_tail_probability(t: f64, df: usize) -> Result<f64, EvalError> {
    if df < 1 {
        return Err(EvalError::InvalidDf(df));
    }
    if t.is_nan() {
        return Err(EvalError::NonFinite("t"));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dff = df as f64;
    let x = dff / (dff + t * t);
    let p = statrs::function::beta::beta_reg(dff / 2.0, 0.5, x);
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    PerQuestion,
    PerFold,
}

impl Pairing {
    pub fn name(self) -> &'static str {
        match self {
            Pairing::PerQuestion => "per_question",
            Pairing::PerFold => "per_fold",
        }
    }

    pub fn parse(s: &str) -> Option<Pairing> {
        [Pairing::PerQuestion, Pairing::PerFold].into_iter().find(|p| p.name() == s)
    }
}

/// Outcome of a paired t-test on `a - b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedT {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub df: usize,
    pub p: f64,
    /// Differences are constant and nonzero: `t` is infinite and `p` is 0.
    pub degenerate: bool,
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedT, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < 2 {
        return Err(EvalError::TooFewPairs(a.len()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let agg = aggregate(&diffs)?;
    let n = diffs.len();
    let df = n - 1;
    let base = PairedT { n, mean_diff: agg.mean, t: 0.0, df, p: 1.0, degenerate: false };
    if agg.std == 0.0 {
        if agg.mean == 0.0 {
            return Ok(base);
        }
        return Ok(PairedT { t: f64::INFINITY.copysign(agg.mean), p: 0.0, degenerate: true, ..base });
    }
    let t = agg.mean / (agg.std / (n as f64).sqrt());
    Ok(PairedT { t, p: t_tail_probability(t, df)?, ..base })
}

/// A labelled paired t-test between two methods on one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub metric: Metric,
    pub method_a: ChunkMethod,
    pub method_b: ChunkMethod,
    pub pairing: Pairing,
    pub n: usize,
    pub mean_diff: f64,
    #[serde(serialize_with = "ser_maybe_inf", deserialize_with = "de_maybe_inf")]
    pub t: f64,
    pub df: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl TTestResult {
    pub fn new(metric: Metric, method_a: ChunkMethod, method_b: ChunkMethod, pairing: Pairing, r: PairedT) -> Self {
        Self {
            metric,
            method_a,
            method_b,
            pairing,
            n: r.n,
            mean_diff: r.mean_diff,
            t: r.t,
            df: r.df,
            p: r.p,
            degenerate: r.degenerate,
        }
    }
}

fn ser_maybe_inf<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_maybe_inf<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number, \"inf\" or \"-inf\", got {s:?}"))),
    }
}
