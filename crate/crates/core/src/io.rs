//! CSV helpers shared by the file formats.

use std::io::Read;

use crate::error::{Error, Result};

/// Formats `v` with 9 significant digits.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..=14).contains(&exponent) {
        let decimals = (8 - exponent).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        // rounding can carry into a new leading digit (9.999999999 -> 10.00000000)
        let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
        let leading_zeros = s
            .trim_start_matches('-')
            .chars()
            .take_while(|&c| c == '0' || c == '.')
            .filter(|&c| c == '0')
            .count();
        if digits - leading_zeros > 9 && decimals > 0 {
            format!("{:.*}", decimals - 1, v)
        } else {
            s
        }
    } else {
        format!("{:.8e}", v)
    }
}

/// Reads a numeric CSV whose header must equal `expected` exactly.
///
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn read_numeric_csv<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(Error::Format {
                row: 0,
                message: e.to_string(),
            })
        }
        None => {
            return Err(Error::Format {
                row: 0,
                message: format!("empty file; expected header `{}`", expected.join(",")),
            })
        }
    };
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Format {
            row: 0,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != expected.len() {
            return Err(Error::Format {
                row,
                message: format!("expected {} fields, found {}", expected.len(), rec.len()),
            });
        }
        rows.push(parse_fields(row, rec.iter())?);
    }
    Ok(rows)
}

pub(crate) fn parse_fields<'a>(
    row: usize,
    fields: impl Iterator<Item = &'a str>,
) -> Result<Vec<f64>> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format {
                    row,
                    message: format!("`{f}` is not a finite number"),
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(1.0), "1.00000000");
        assert_eq!(fmt_sig9(123.456789012), "123.456789");
        assert_eq!(fmt_sig9(0.00123456789012), "0.00123456789");
        assert_eq!(fmt_sig9(-2.5), "-2.50000000");
        assert_eq!(fmt_sig9(9.9999999999), "10.0000000");
        assert_eq!(fmt_sig9(1.5e-9), "1.50000000e-9");
        assert_eq!(fmt_sig9(0.0), "0");
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = read_numeric_csv("a,b\n1,2\n".as_bytes(), &["x", "y"]).unwrap_err();
        assert!(err.to_string().contains("expected header `x,y`"));
        let err = read_numeric_csv("".as_bytes(), &["x", "y"]).unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn bad_number_names_row() {
        let err = read_numeric_csv("x,y\n1,2\n3,abc\n".as_bytes(), &["x", "y"]).unwrap_err();
        assert!(matches!(err, Error::Format { row: 2, .. }), "{err}");
    }
}
