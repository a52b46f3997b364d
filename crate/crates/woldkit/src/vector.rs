//! Vector literals: a JSON array of `[coords…, re, im]` entries.

use woldkit_core::{FinVec, Index, C64};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VectorError {
    #[error("vector is not valid JSON: {0}")]
    Syntax(String),
    #[error("vector must be a JSON array of [coords..., re, im] entries")]
    Shape,
    #[error("entry {entry}: {message}")]
    Entry { entry: usize, message: String },
    #[error("vector has rank {found}, operator expects rank {expected}")]
    Rank { expected: usize, found: usize },
}

/// Parses a vector literal. Repeated coordinates add up.
pub fn parse_vector(text: &str) -> Result<FinVec, VectorError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| VectorError::Syntax(e.to_string()))?;
    let entries = value.as_array().ok_or(VectorError::Shape)?;
    let mut rank = None;
    let mut out = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let bad = |m: &str| VectorError::Entry { entry: i, message: m.to_string() };
        let cells = e.as_array().ok_or_else(|| bad("expected an array"))?;
        if cells.len() < 3 || cells.len() > 2 + woldkit_core::index::MAX_RANK {
            return Err(bad("expected 1 to 3 coordinates followed by re and im"));
        }
        let r = cells.len() - 2;
        if *rank.get_or_insert(r) != r {
            return Err(bad("entries disagree on the number of coordinates"));
        }
        let coords = cells[..r]
            .iter()
            .map(|c| c.as_i64().ok_or_else(|| bad("coordinates must be integers")))
            .collect::<Result<Vec<i64>, _>>()?;
        let re = cells[r].as_f64().ok_or_else(|| bad("re must be a number"))?;
        let im = cells[r + 1].as_f64().ok_or_else(|| bad("im must be a number"))?;
        out.push((Index::new(&coords), C64::new(re, im)));
    }
    let rank = rank.unwrap_or(1);
    let mut v = FinVec::zeros(rank);
    for (k, x) in out {
        v.add_at(k, x);
    }
    Ok(v)
}

pub fn check_rank(v: &FinVec, expected: usize) -> Result<(), VectorError> {
    if v.is_zero() || v.rank() == expected {
        Ok(())
    } else {
        Err(VectorError::Rank { expected, found: v.rank() })
    }
}

/// `[coords…, re, im]` rows in index order.
pub fn vector_rows(v: &FinVec) -> Vec<Vec<serde_json::Value>> {
    v.iter()
        .map(|(k, x)| {
            let mut row: Vec<serde_json::Value> = k.coords().iter().map(|&c| c.into()).collect();
            row.push(x.re.into());
            row.push(x.im.into());
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rank_one_and_two() {
        let v = parse_vector("[[0, 1.0, 0.0], [1, 0.0, -2.5]]").unwrap();
        assert_eq!(v.rank(), 1);
        assert_eq!(v.get(&Index::d1(1)), C64::new(0.0, -2.5));
        let w = parse_vector("[[0, 3, 1, 0]]").unwrap();
        assert_eq!(w.rank(), 2);
        assert_eq!(w.get(&Index::d2(0, 3)), C64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_mixed_ranks_and_bad_cells() {
        assert!(matches!(parse_vector("[[0, 1, 0], [0, 0, 1, 0]]"), Err(VectorError::Entry { entry: 1, .. })));
        assert!(matches!(parse_vector("[[0.5, 1, 0]]"), Err(VectorError::Entry { entry: 0, .. })));
        assert_eq!(parse_vector("{}"), Err(VectorError::Shape));
    }

    #[test]
    fn rows_round_trip() {
        let v = parse_vector("[[-1, 2, 0.5, 0.25], [3, 0, 1, 0]]").unwrap();
        let text = serde_json::to_string(&vector_rows(&v)).unwrap();
        assert_eq!(parse_vector(&text).unwrap(), v);
    }
}
