//! Pairwise preference significance via an exact one-sided sign test.
//!
//! Each participant prefers agent A or agent B on a question. Under the null
//! both are equally likely, so the majority count follows Binomial(n, 1/2).

use std::fmt::Write as _;
use std::io::Read;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("k = {k} exceeds n = {n}")]
    Domain { n: u32, k: u32 },
    #[error("tally {question:?}: {reason}")]
    InvalidTally { question: String, reason: String },
    #[error("tallies csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Binary preferences on one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceTally {
    pub question: String,
    /// Participants who answered.
    pub n: u32,
    /// Participants preferring agent A.
    pub wins_a: u32,
}

impl PreferenceTally {
    pub fn new(question: impl Into<String>, n: u32, wins_a: u32) -> Result<Self, StatsError> {
        let t = Self {
            question: question.into(),
            n,
            wins_a,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let reason = if self.n == 0 {
            "n must be at least 1"
        } else if self.wins_a > self.n {
            "wins_a exceeds n"
        } else {
            return Ok(());
        };
        Err(StatsError::InvalidTally {
            question: self.question.clone(),
            reason: reason.to_owned(),
        })
    }

    pub fn wins_b(&self) -> u32 {
        self.n - self.wins_a
    }
}

fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 0..n {
        let next = row[i as usize].clone() * BigUint::from(n - i) / BigUint::from(i + 1);
        row.push(next);
    }
    row
}

/// Exact `P(X >= k)` for `X ~ Binomial(n, 1/2)` as `numerator / 2^n`.
pub fn binomial_tail_exact(n: u32, k: u32) -> Result<BigUint, StatsError> {
    if k > n {
        return Err(StatsError::Domain { n, k });
    }
    Ok(binomial_row(n)[k as usize..]
        .iter()
        .fold(BigUint::zero(), |acc, c| acc + c))
}

/// `P(X >= k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_tail(n: u32, k: u32) -> Result<f64, StatsError> {
    let numer = binomial_tail_exact(n, k)?;
    // Scale both sides below f64's exponent range before dividing.
    let shift = n.saturating_sub(1000);
    let numer = (numer >> shift).to_f64().unwrap_or(f64::INFINITY);
    Ok(numer / 2f64.powi((n - shift) as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub question: String,
    pub n: u32,
    pub winner: Winner,
    /// Majority share, rounded to one decimal; 50.0 on a tie.
    pub win_rate_pct: f64,
    pub rate_a_pct: f64,
    pub rate_b_pct: f64,
    /// One-sided tail probability of the majority count.
    pub p_value: f64,
    pub significant: bool,
}

pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

pub fn significance_table(
    tallies: &[PreferenceTally],
    alpha: f64,
) -> Result<Vec<SignificanceRow>, StatsError> {
    tallies
        .iter()
        .map(|t| {
            t.validate()?;
            let (a, b) = (t.wins_a, t.wins_b());
            let winner = match a.cmp(&b) {
                std::cmp::Ordering::Greater => Winner::A,
                std::cmp::Ordering::Less => Winner::B,
                std::cmp::Ordering::Equal => Winner::Tie,
            };
            let pct = |w: u32| round1(100.0 * f64::from(w) / f64::from(t.n));
            let p_value = binomial_tail(t.n, a.max(b))?;
            Ok(SignificanceRow {
                question: t.question.clone(),
                n: t.n,
                winner,
                win_rate_pct: pct(a.max(b)),
                rate_a_pct: pct(a),
                rate_b_pct: pct(b),
                p_value,
                significant: p_value < alpha,
            })
        })
        .collect()
}

/// Reads a CSV with header `question,n,wins_a`.
pub fn parse_tallies_csv<R: Read>(reader: R) -> Result<Vec<PreferenceTally>, StatsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        let t: PreferenceTally = rec?;
        t.validate()?;
        out.push(t);
    }
    Ok(out)
}

/// Renders rows as a fixed-width table; the significant side is starred.
pub fn format_report(rows: &[SignificanceRow], label_a: &str, label_b: &str, alpha: f64) -> String {
    let qw = rows
        .iter()
        .map(|r| r.question.chars().count())
        .chain(["Question".len()])
        .max()
        .unwrap_or(8);
    let aw = label_a.len().max(7);
    let bw = label_b.len().max(7);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<qw$}  {:>aw$}  {:>bw$}  {:>9}  significant",
        "Question", label_a, label_b, "p"
    );
    for r in rows {
        let mark = |side: Winner, v: f64| {
            let star = if r.significant && r.winner == side {
                "*"
            } else {
                ""
            };
            format!("{v:.1}{star}")
        };
        let _ = writeln!(
            s,
            "{:<qw$}  {:>aw$}  {:>bw$}  {:>9}  {}",
            r.question,
            mark(Winner::A, r.rate_a_pct),
            mark(Winner::B, r.rate_b_pct),
            format_p(r.p_value),
            if r.significant { "yes" } else { "no" }
        );
    }
    let sizes = match rows.first() {
        Some(first) if rows.iter().all(|r| r.n == first.n) => format!(", n={}", first.n),
        _ => String::new(),
    };
    let _ = writeln!(
        s,
        "winning rate (%){sizes}; * one-sided exact sign test p < {alpha}"
    );
    s
}

fn format_p(p: f64) -> String {
    if p != 0.0 && p < 1e-4 {
        format!("{p:.1e}")
    } else {
        format!("{p:.4}")
    }
}
