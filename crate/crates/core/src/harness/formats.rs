//! ORLIB and JSON instance files.
//!
//! ORLIB files are read with uncapacitated semantics: the capacity token of
//! every facility and the demand token of every client are skipped, and the
//! connection costs are taken verbatim (never multiplied by demand). Some
//! mirrors already store demand-scaled costs; those are read as given.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Orlib,
    Json,
}

impl std::str::FromStr for InstanceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orlib" => Ok(Self::Orlib),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

pub fn read_instance<T: Scalar>(path: &Path, format: InstanceFormat) -> Result<Instance<T>> {
    let text = std::fs::read_to_string(path)?;
    match format {
        InstanceFormat::Orlib => parse_orlib(&text),
        InstanceFormat::Json => parse_json(&text),
    }
}

struct Tokens<'a> {
    inner: std::str::SplitWhitespace<'a>,
    position: usize,
    expected: usize,
}

impl<'a> Tokens<'a> {
    fn next_raw(&mut self) -> Result<&'a str> {
        let token = self.inner.next().ok_or(Error::TruncatedFile {
            expected: self.expected,
            found: self.position,
        })?;
        self.position += 1;
        Ok(token)
    }

    fn next_real<T: Scalar>(&mut self) -> Result<T> {
        let token = self.next_raw()?;
        T::from_str_radix(token, 10).map_err(|_| Error::MalformedToken {
            position: self.position - 1,
            token: token.to_string(),
        })
    }

    fn next_count(&mut self) -> Result<usize> {
        let token = self.next_raw()?;
        token.parse().map_err(|_| Error::MalformedToken {
            position: self.position - 1,
            token: token.to_string(),
        })
    }
}

/// Parses `m n`, then `capacity f_i` per facility, then per client a demand
/// token followed by `c_1j .. c_mj`.
///
/// Capacity tokens are skipped unchecked (some files spell them as the word
/// `capacity`); demand tokens must be numeric.
pub fn parse_orlib<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let mut tokens = Tokens { inner: text.split_whitespace(), position: 0, expected: 2 };
    let m = tokens.next_count()?;
    let n = tokens.next_count()?;
    tokens.expected = 2 + 2 * m + n * (m + 1);
    let mut facility_costs = Vec::with_capacity(m);
    for _ in 0..m {
        tokens.next_raw()?;
        facility_costs.push(tokens.next_real::<T>()?);
    }
    let mut rows = vec![Vec::with_capacity(n); m];
    for _ in 0..n {
        tokens.next_real::<T>()?;
        for row in rows.iter_mut() {
            row.push(tokens.next_real::<T>()?);
        }
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyDimension { m, n });
    }
    Instance::new(facility_costs, rows)
}

/// Writes ORLIB text with zero capacities and unit demands.
pub fn emit_orlib<T: Scalar>(instance: &Instance<T>) -> String {
    let (m, n) = (instance.num_facilities(), instance.num_clients());
    let mut out = format!("{m} {n}\n");
    for &f in instance.facility_costs() {
        let _ = writeln!(out, "0 {f}");
    }
    for j in 0..n {
        out.push_str("1\n");
        let line: Vec<String> = (0..m).map(|i| instance.cost(i, j).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    facility_costs: Vec<f64>,
    connection_costs: Vec<Vec<f64>>,
}

pub fn parse_json<T: Scalar>(text: &str) -> Result<Instance<T>> {
    let raw: InstanceJson = serde_json::from_str(text)?;
    let f = raw.facility_costs.into_iter().map(T::of).collect();
    let c = raw
        .connection_costs
        .into_iter()
        .map(|row| row.into_iter().map(T::of).collect())
        .collect();
    Instance::new(f, c)
}

pub fn emit_json<T: Scalar>(instance: &Instance<T>) -> String {
    let raw = InstanceJson {
        facility_costs: instance.facility_costs().iter().map(|f| f.as_f64()).collect(),
        connection_costs: instance
            .rows()
            .into_iter()
            .map(|row| row.into_iter().map(T::as_f64).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("plain numbers serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_orlib_file() {
        let inst: Instance<f64> = parse_orlib("1 1\n0 2\n1 3").unwrap();
        assert_eq!(inst.facility_costs(), &[2.0]);
        assert_eq!(inst.cost(0, 0), 3.0);
    }

    #[test]
    fn orlib_layout_is_facility_major_per_client() {
        let text = "2 2\ncapacity 5\ncapacity 7\n10 1 2\n20 3 4\n";
        let inst: Instance<f64> = parse_orlib(text).unwrap();
        assert_eq!(inst.facility_costs(), &[5.0, 7.0]);
        assert_eq!(inst.rows(), vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
    }

    #[test]
    fn truncated_orlib_file() {
        // m n = 2 2 needs 2 + 4 + 6 = 12 tokens; drop the last cost
        let text = "2 2\n0 5\n0 7\n1 1 2\n1 3";
        assert_eq!(
            parse_orlib::<f64>(text),
            Err(Error::TruncatedFile { expected: 12, found: 11 })
        );
    }

    #[test]
    fn malformed_orlib_token() {
        assert!(matches!(
            parse_orlib::<f64>("1 1\n0 2\n1 x"),
            Err(Error::MalformedToken { position: 5, .. })
        ));
        assert!(matches!(parse_orlib::<f64>("one 1"), Err(Error::MalformedToken { position: 0, .. })));
    }

    #[test]
    fn orlib_round_trip() {
        let text = "2 3\n0 1.5\n0 0.1\n1 0.3 7\n1 1e-3 2\n1 12345.678 0\n";
        let inst: Instance<f64> = parse_orlib(text).unwrap();
        assert_eq!(parse_orlib::<f64>(&emit_orlib(&inst)).unwrap(), inst);
    }

    #[test]
    fn json_round_trip() {
        let inst = Instance::new(vec![0.1, 2.0 / 3.0], vec![vec![1.0 / 7.0], vec![1e-300]]).unwrap();
        assert_eq!(parse_json::<f64>(&emit_json(&inst)).unwrap(), inst);
        let text = r#"{"facility_costs":[1],"connection_costs":[[2,3]]}"#;
        assert_eq!(parse_json::<f64>(text).unwrap().num_clients(), 2);
        assert!(matches!(parse_json::<f64>("{"), Err(Error::Json(_))));
    }
}
