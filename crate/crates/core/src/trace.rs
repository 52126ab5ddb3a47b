//! Per-iteration records of a boosting run and their CSV/JSON forms.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{RunConfig, Termination};
use crate::steps::StepFlag;

/// Written in place of values that do not exist at a given row.
pub const UNDEFINED: &str = "undefined";

pub const CSV_HEADER: [&str; 11] = [
    "t", "j_t", "sign", "alpha", "risk", "margin", "gamma_t", "l1_norm", "c_t", "flags", "log_risk",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub t: usize,
    /// 0-based column chosen at this iteration; `None` at `t = 0`.
    pub column: Option<usize>,
    pub sign: Option<i8>,
    pub alpha: f64,
    /// `L(A lambda_t)`; may underflow to zero on long runs, see `log_risk`.
    pub risk: f64,
    pub log_risk: f64,
    /// `M(A lambda_t)`, undefined while `lambda_t = 0`.
    pub margin: Option<f64>,
    /// `gamma_t` and `C_t` evaluated at `lambda_{t-1}`.
    pub gamma_t: Option<f64>,
    pub l1_norm: f64,
    pub c_t: Option<f64>,
    pub flag: Option<StepFlag>,
}

impl IterRecord {
    pub fn initial(log_risk: f64) -> Self {
        IterRecord {
            t: 0,
            column: None,
            sign: None,
            alpha: 0.0,
            risk: log_risk.exp(),
            log_risk,
            margin: None,
            gamma_t: None,
            l1_norm: 0.0,
            c_t: None,
            flag: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateTrace {
    pub m: usize,
    pub n: usize,
    pub config: RunConfig,
    pub outside_theory: bool,
    pub termination: Termination,
    /// Row `k` describes `lambda_k`; row 0 is the starting point.
    pub records: Vec<IterRecord>,
    pub final_lambda: Vec<f64>,
}

impl IterateTrace {
    /// Number of completed iterations.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("trace always holds the t = 0 row")
    }

    /// Replays the recorded steps, yielding `lambda_0, lambda_1, ...` with the
    /// same floating-point operations the engine performed.
    pub fn lambdas(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let mut lambda = vec![0.0; self.n];
        self.records.iter().map(move |r| {
            if let (Some(j), Some(s)) = (r.column, r.sign) {
                lambda[j] += f64::from(s) * r.alpha;
            }
            lambda.clone()
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map_or_else(|| UNDEFINED.to_string(), |x| x.to_string());
        for r in &self.records {
            out.write_record([
                r.t.to_string(),
                r.column.map_or_else(|| UNDEFINED.to_string(), |j| j.to_string()),
                r.sign.map_or_else(|| UNDEFINED.to_string(), |s| s.to_string()),
                r.alpha.to_string(),
                r.risk.to_string(),
                opt(r.margin),
                opt(r.gamma_t),
                r.l1_norm.to_string(),
                opt(r.c_t),
                r.flag.map_or_else(String::new, |f| f.name().to_string()),
                r.log_risk.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn write_json<W: Write>(&self, w: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(w, self)
    }

    pub fn read_json<R: Read>(r: R) -> serde_json::Result<Self> {
        serde_json::from_reader(r)
    }
}
