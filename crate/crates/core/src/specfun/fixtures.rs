//! Embedded high-precision reference table and the comparison driver used by
//! the `validate` command and the test suites.
//!
//! Each line reads `family n x sign logmag`, where the value is
//! `sign * exp(logmag)`. Values far outside the `f64` range are common, so
//! agreement is measured on the logarithm.

use std::str::FromStr;

use super::{bateman_k_log, outgoing_table, regular_imag_table, regular_table, SignedLog};
use crate::{Error, Result};

/// The reference table shipped with the crate.
pub const REFERENCE_TABLE: &str = include_str!("../../fixtures/specfun.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Regular,
    RegularDerivative,
    Imaginary,
    ImaginaryDerivative,
    Outgoing,
    OutgoingDerivative,
    Bateman,
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "reg" => Family::Regular,
            "reg_d" => Family::RegularDerivative,
            "imag" => Family::Imaginary,
            "imag_d" => Family::ImaginaryDerivative,
            "out" => Family::Outgoing,
            "out_d" => Family::OutgoingDerivative,
            "bateman" => Family::Bateman,
            other => return Err(Error::Config(format!("unknown fixture family `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureRow {
    pub family: Family,
    pub order: i64,
    pub x: f64,
    pub value: SignedLog,
}

/// Parses the whitespace-separated table format; `#` starts a comment line.
pub fn parse(text: &str) -> Result<Vec<FixtureRow>> {
    let bad = |line: &str| Error::Config(format!("malformed fixture line `{line}`"));
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(FixtureRow {
                family: f[0].parse()?,
                order: f[1].parse().map_err(|_| bad(line))?,
                x: num(f[2])?,
                value: SignedLog::new(f[3].parse::<i8>().map_err(|_| bad(line))?, num(f[4])?),
            })
        })
        .collect()
}

/// Evaluates the library function that a fixture row refers to.
pub fn evaluate(row: &FixtureRow) -> Result<SignedLog> {
    let order = || {
        usize::try_from(row.order)
            .map_err(|_| Error::domain(format!("negative order {}", row.order)))
    };
    Ok(match row.family {
        Family::Regular => regular_table(order()?, row.x)?.values[order()?],
        Family::RegularDerivative => regular_table(order()?, row.x)?.derivatives[order()?],
        Family::Imaginary => regular_imag_table(order()?, row.x)?.values[order()?],
        Family::ImaginaryDerivative => regular_imag_table(order()?, row.x)?.derivatives[order()?],
        Family::Outgoing => outgoing_table(order()?, row.x)?.values[order()?],
        Family::OutgoingDerivative => outgoing_table(order()?, row.x)?.derivatives[order()?],
        Family::Bateman => bateman_k_log(row.order, row.x)?,
    })
}

/// Error measure: absolute difference of logarithms, or infinity on a sign
/// mismatch. Exact zeros must be reproduced exactly.
pub fn log_error(computed: SignedLog, reference: SignedLog) -> f64 {
    if computed.sign() != reference.sign() {
        f64::INFINITY
    } else if reference.is_zero() {
        0.0
    } else {
        (computed.logmag() - reference.logmag()).abs()
    }
}

#[derive(Debug, Clone)]
pub struct Mismatch {
    pub row: FixtureRow,
    pub computed: Option<SignedLog>,
    pub log_error: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checked: usize,
    pub max_log_error: f64,
    pub failures: Vec<Mismatch>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares every row of `rows` against the library at tolerance `tol`.
pub fn validate(rows: &[FixtureRow], tol: f64) -> ValidationReport {
    let mut report = ValidationReport {
        checked: 0,
        max_log_error: 0.0,
        failures: Vec::new(),
    };
    for row in rows {
        report.checked += 1;
        let computed = evaluate(row).ok();
        let err = computed.map_or(f64::INFINITY, |c| log_error(c, row.value));
        report.max_log_error = report.max_log_error.max(err);
        if !(err <= tol) {
            report.failures.push(Mismatch {
                row: *row,
                computed,
                log_error: err,
            });
        }
    }
    report
}

/// Validates the embedded reference table.
pub fn validate_reference(tol: f64) -> Result<ValidationReport> {
    Ok(validate(&parse(REFERENCE_TABLE)?, tol))
}
