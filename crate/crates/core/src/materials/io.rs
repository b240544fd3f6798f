//! Optical table files.
//!
//! Plain text, `#` starts a comment line, data rows are whitespace separated.
//! A `#format: A` or `#format: B` line must precede the first data row.
//!
//! * Format A: `xi_rad_per_s epsilon` (already on the imaginary axis).
//! * Format B: `omega_rad_per_s n k` (complex index on the real axis);
//!   `Im eps = 2 n k` is transformed with Kramers-Kronig.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    kramers_kronig_to_imaginary_axis, AbsorptionSpectrum, KramersKronigOptions, MaterialError,
    TabulatedDielectric,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableFormat {
    /// `#format: A`
    EpsilonImagAxis,
    /// `#format: B`
    NAndKRealAxis,
}

impl TableFormat {
    fn columns(self) -> usize {
        match self {
            TableFormat::EpsilonImagAxis => 2,
            TableFormat::NAndKRealAxis => 3,
        }
    }
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MaterialError {
    MaterialError::Parse { path: path.to_string(), line, message: message.into() }
}

/// Parse table text. `label` names the source in error messages; when
/// `expected` is given the header must agree with it.
pub fn parse_optical_table(
    text: &str,
    label: &str,
    expected: Option<TableFormat>,
) -> Result<TabulatedDielectric, MaterialError> {
    let mut format = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(tag) = comment.strip_prefix("format:") {
                let f = match tag.trim() {
                    "A" => TableFormat::EpsilonImagAxis,
                    "B" => TableFormat::NAndKRealAxis,
                    other => return Err(parse_err(label, line_no, format!("unknown format '{other}', expected A or B"))),
                };
                if let Some(e) = expected {
                    if e != f {
                        return Err(parse_err(label, line_no, format!("header declares {f:?}, caller expected {e:?}")));
                    }
                }
                format = Some(f);
            }
            continue;
        }
        let Some(fmt) = format else {
            return Err(MaterialError::MissingFormatHeader { path: label.to_string() });
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != fmt.columns() {
            return Err(parse_err(label, line_no, format!("expected {} columns, found {}", fmt.columns(), fields.len())));
        }
        let mut values = Vec::with_capacity(fields.len());
        for f in fields {
            let v: f64 = f.parse().map_err(|_| parse_err(label, line_no, format!("not a number: '{f}'")))?;
            if !v.is_finite() {
                return Err(parse_err(label, line_no, format!("non-finite value '{f}'")));
            }
            values.push(v);
        }
        if values[0] <= 0.0 {
            return Err(parse_err(label, line_no, "frequency must be positive"));
        }
        if let Some((_, prev)) = rows.last() {
            if values[0] <= prev[0] {
                return Err(parse_err(label, line_no, "frequency column not strictly increasing"));
            }
        }
        if fmt == TableFormat::NAndKRealAxis && (values[1] < 0.0 || values[2] < 0.0) {
            return Err(parse_err(label, line_no, "negative n or k"));
        }
        if fmt == TableFormat::EpsilonImagAxis && values[1] < 1.0 {
            return Err(parse_err(label, line_no, "eps(i xi) must be >= 1"));
        }
        rows.push((line_no, values));
    }

    let Some(fmt) = format else {
        return Err(MaterialError::MissingFormatHeader { path: label.to_string() });
    };
    if rows.len() < 2 {
        return Err(MaterialError::TooFewNodes(rows.len()));
    }

    match fmt {
        TableFormat::EpsilonImagAxis => {
            let (grid, values) = rows.iter().map(|(_, r)| (r[0], r[1])).unzip();
            TabulatedDielectric::new(grid, values)
        }
        TableFormat::NAndKRealAxis => {
            let (omega, im_eps) = rows.iter().map(|(_, r)| (r[0], 2.0 * r[1] * r[2])).unzip();
            let spectrum = AbsorptionSpectrum::new(omega, im_eps)?;
            kramers_kronig_to_imaginary_axis(&spectrum, &KramersKronigOptions::default())
        }
    }
}

pub fn load_optical_table(path: &Path, expected: Option<TableFormat>) -> Result<TabulatedDielectric, MaterialError> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|e| MaterialError::Io { path: label.clone(), message: e.to_string() })?;
    parse_optical_table(&text, &label, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::kramers_kronig::tests::{log_grid, TEST_MEDIUM};
    use num_complex::Complex64;
    use std::io::Write;

    #[test]
    fn format_a_round_trip() {
        let text = "# gold-ish\n#format: A\n1e14 250\n1e15 3.5\n\n1e16 1.02\n";
        let t = parse_optical_table(text, "mem", None).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.values()[1], 3.5);
    }

    #[test]
    fn names_the_offending_line() {
        let text = "#format: A\n1e14 250\n1e15 3.5\n9e14 2.0\n";
        match parse_optical_table(text, "bad.txt", None).unwrap_err() {
            MaterialError::Parse { path, line, .. } => {
                assert_eq!(path, "bad.txt");
                assert_eq!(line, 4);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn header_is_mandatory() {
        let err = parse_optical_table("1 2\n3 4\n", "x", None).unwrap_err();
        assert!(matches!(err, MaterialError::MissingFormatHeader { .. }));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(matches!(
            parse_optical_table("#format: B\n1e14 1.0\n", "x", None).unwrap_err(),
            MaterialError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_optical_table("#format: B\n1e14 1.0 -0.1\n2e14 1 1\n", "x", None).unwrap_err(),
            MaterialError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_optical_table("#format: A\n1e14 abc\n", "x", None).unwrap_err(),
            MaterialError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_optical_table("#format: A\n1 2\n", "x", Some(TableFormat::NAndKRealAxis)).unwrap_err(),
            MaterialError::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn n_and_k_file_matches_analytic_medium() {
        let l = TEST_MEDIUM;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "# single Lorentz oscillator\n#format: B").unwrap();
        for w in log_grid(l.w0 * 1e-3, l.w0 * 1e3, 600) {
            let n = Complex64::new(l.re_eps(w), l.im_eps(w)).sqrt();
            writeln!(file, "{:e} {:e} {:e}", w, n.re, n.im).unwrap();
        }
        file.flush().unwrap();
        let t = load_optical_table(file.path(), Some(TableFormat::NAndKRealAxis)).unwrap();
        for xi in log_grid(l.w0 * 1e-2, l.w0 * 1e2, 20) {
            let exact = l.eps_imag_axis(xi);
            assert!((t.epsilon(xi).unwrap() / exact - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_optical_table(Path::new("/nonexistent/table.txt"), None).unwrap_err();
        assert!(matches!(err, MaterialError::Io { .. }));
    }
}
