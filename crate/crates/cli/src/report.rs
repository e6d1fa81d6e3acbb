//! Check reports and their emission. One report per check, streamed as
//! compact JSON lines or tab-separated rows; field order is fixed so equal
//! inputs produce byte-identical output.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl Report {
    pub fn new(check: impl Into<String>) -> Report {
        Report {
            check: check.into(),
            status: Status::Pass,
            lhs: None,
            rhs: None,
            residual: None,
            witness: None,
            timing_ms: None,
        }
    }

    pub fn pass(mut self, ok: bool) -> Report {
        self.status = if ok { Status::Pass } else { Status::Fail };
        self
    }

    pub fn error(mut self, message: impl Into<String>) -> Report {
        self.status = Status::Error;
        self.witness = Some(Value::String(message.into()));
        self
    }

    pub fn lhs(mut self, v: Value) -> Report {
        self.lhs = Some(v);
        self
    }

    pub fn rhs(mut self, v: Value) -> Report {
        self.rhs = Some(v);
        self
    }

    pub fn residual(mut self, r: f64) -> Report {
        self.residual = Some(r);
        self
    }

    pub fn witness(mut self, v: Value) -> Report {
        self.witness = Some(v);
        self
    }
}

/// Rationals print as "p/q", collapsing to "p" for integers.
pub fn rat_value(r: Rational64) -> Value {
    Value::String(r.to_string())
}

pub fn complex_value(z: Complex64) -> Value {
    Value::Array(vec![json_f64(z.re), json_f64(z.im)])
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

fn tsv_cell(v: &Option<Value>) -> String {
    v.as_ref().map(Value::to_string).unwrap_or_default()
}

pub fn emit(reports: &[Report], format: Format) {
    match format {
        Format::Json => {
            for r in reports {
                println!("{}", serde_json::to_string(r).expect("report serializes"));
            }
        }
        Format::Tsv => {
            println!("check\tstatus\tlhs\trhs\tresidual\twitness\ttiming_ms");
            for r in reports {
                let status = match r.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::Error => "error",
                };
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.check,
                    status,
                    tsv_cell(&r.lhs),
                    tsv_cell(&r.rhs),
                    r.residual.map(|x| x.to_string()).unwrap_or_default(),
                    tsv_cell(&r.witness),
                    r.timing_ms.map(|x| x.to_string()).unwrap_or_default(),
                );
            }
        }
    }
}
