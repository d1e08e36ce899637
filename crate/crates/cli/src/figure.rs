//! Observed-versus-expected table for external plotting.

use std::fmt::Write as _;

use countfit_core::gof::expected_counts;
use countfit_core::{CountModel, FrequencySample, ModelError};

/// CSV with columns `count,observed,<name>…`: one row per count up to the
/// largest observed, then a `tail+` row holding the expected mass beyond it.
pub fn render(s: &FrequencySample, models: &[(String, CountModel)]) -> Result<String, ModelError> {
    let max = s.max_count();
    let columns = models
        .iter()
        .map(|(_, m)| expected_counts(m, s.n(), max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from("count,observed");
    for (name, _) in models {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for y in 0..=max + 1 {
        if y <= max {
            write!(out, "{y},{}", s.frequency(y)).unwrap();
        } else {
            out.push_str("tail+,0");
        }
        for col in &columns {
            write!(out, ",{}", col[y as usize]).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
