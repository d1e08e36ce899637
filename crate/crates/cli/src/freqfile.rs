//! Frequency CSV: one `count,frequency` row per observed count, counts
//! strictly increasing. A `count,frequency` header is optional; lines
//! starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use countfit_core::FrequencySample;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const HEADER: &str = "count,frequency";

/// Parsed frequency file plus the digest of its raw bytes.
#[derive(Debug, Clone)]
pub struct FrequencyFile {
    pub sample: FrequencySample,
    pub sha256: String,
}

pub fn read(path: &Path) -> Result<FrequencyFile, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::ReadInput {
        path: path.to_owned(),
        source,
    })?;
    parse(&bytes, path)
}

pub fn parse(bytes: &[u8], path: &Path) -> Result<FrequencyFile, CliError> {
    let parse_err = |line: u64, message: String| CliError::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);

    let mut rows: Vec<(i64, i64)> = Vec::new();
    let mut last: Option<u64> = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        if rows.is_empty() && record[0].eq_ignore_ascii_case("count") {
            if !record[1].eq_ignore_ascii_case("frequency") {
                return Err(parse_err(
                    line,
                    format!("unexpected header; use {HEADER:?}"),
                ));
            }
            continue;
        }
        let count: u64 = record[0].parse().map_err(|_| {
            parse_err(
                line,
                format!("count {:?} is not a nonnegative integer", &record[0]),
            )
        })?;
        let freq: u64 = record[1].parse().map_err(|_| {
            parse_err(
                line,
                format!("frequency {:?} is not a nonnegative integer", &record[1]),
            )
        })?;
        match last {
            Some(prev) if count == prev => {
                return Err(parse_err(line, format!("duplicate count {count}")))
            }
            Some(prev) if count < prev => {
                return Err(parse_err(
                    line,
                    format!("count {count} after {prev}; counts must be strictly increasing"),
                ))
            }
            _ => {}
        }
        last = Some(count);
        let to_i64 = |v: u64| {
            i64::try_from(v).map_err(|_| parse_err(line, format!("value {v} is too large")))
        };
        rows.push((to_i64(count)?, to_i64(freq)?));
    }
    let sample = FrequencySample::from_histogram(rows).map_err(|_| CliError::EmptyInput {
        path: path.to_owned(),
    })?;
    Ok(FrequencyFile {
        sample,
        sha256: sha256_hex(bytes),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        write!(out, "{b:02x}").expect("writing to a String");
    }
    out
}

/// Serializes a sample, listing only counts with positive frequency.
pub fn render(sample: &FrequencySample) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (y, f) in sample.iter() {
        if f > 0 {
            writeln!(out, "{y},{f}").expect("writing to a String");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(s: &str) -> Result<FrequencyFile, CliError> {
        parse(s.as_bytes(), Path::new("t.csv"))
    }

    #[test]
    fn header_and_comments_are_optional() {
        let a = parse_str("count,frequency\n0,5\n1,3\n4,1\n").unwrap();
        let b = parse_str("# field survey\n0,5\n1, 3\n\n4,1\n").unwrap();
        assert_eq!(a.sample.histogram(), b.sample.histogram());
        assert_eq!(a.sample.n(), 9);
        assert_ne!(a.sha256, b.sha256);
    }

    #[test]
    fn rejects_bad_rows() {
        let cases = [
            ("0,5\n0,2\n", "duplicate count 0"),
            ("2,5\n1,2\n", "strictly increasing"),
            ("0,-1\n", "nonnegative"),
            ("x,1\n", "nonnegative"),
            ("0,1,2\n", "2 fields"),
            ("count,freq\n0,1\n", "header"),
        ];
        for (text, want) in cases {
            let err = parse_str(text).unwrap_err().to_string();
            assert!(err.contains(want), "{text:?}: {err}");
            assert!(err.starts_with("t.csv:"), "{err}");
        }
    }

    #[test]
    fn error_reports_line_number() {
        let err = parse_str("count,frequency\n0,1\n1,x\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn needs_a_positive_frequency() {
        assert!(matches!(
            parse_str("0,0\n3,0\n"),
            Err(CliError::EmptyInput { .. })
        ));
        assert!(matches!(
            parse_str("count,frequency\n"),
            Err(CliError::EmptyInput { .. })
        ));
    }

    #[test]
    fn render_round_trips() {
        let f = parse_str("0,5\n1,0\n3,2\n").unwrap();
        let text = render(&f.sample);
        assert_eq!(text, "count,frequency\n0,5\n3,2\n");
        assert_eq!(
            parse_str(&text).unwrap().sample.histogram(),
            f.sample.histogram()
        );
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
