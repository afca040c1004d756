//! Text formats for samples and measures. Parse errors name the offending
//! line. Reals are written with 17 significant digits.

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::circle::CirclePoint;
use crate::error::{Error, Result};
use crate::shapes::PreShape;
use crate::sphere::SpherePoint;
use crate::wasserstein::DiscreteMeasure;

/// Rows of a sphere CSV may deviate from unit norm by this much before
/// being renormalized.
const SPHERE_NORM_SLACK: f64 = 1e-6;

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn line_error(line: u64, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}: {msg}"))
}

/// Numeric rows of a headerless CSV with `#` comments. A first row that
/// does not parse as numbers is treated as a header.
fn numeric_rows(text: &str) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            line_error(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                    return Err(line_error(line, format!("non-finite value {bad}")));
                }
                rows.push((line, values));
            }
            Err(_) if idx == 0 && rows.is_empty() => continue,
            Err(e) => return Err(line_error(line, format!("{e} in {:?}", record.iter().collect::<Vec<_>>()))),
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    Ok(rows)
}

/// One angle in radians per line.
pub fn parse_angles_csv(text: &str) -> Result<Vec<CirclePoint>> {
    numeric_rows(text)?
        .into_iter()
        .map(|(line, row)| match row.as_slice() {
            [a] => Ok(CirclePoint::new(*a)),
            _ => Err(line_error(line, format!("expected one angle, found {} fields", row.len()))),
        })
        .collect()
}

/// One unit vector per line; all rows share one dimension.
pub fn parse_sphere_csv(text: &str) -> Result<Vec<SpherePoint>> {
    let rows = numeric_rows(text)?;
    let d = rows[0].1.len();
    rows.into_iter()
        .map(|(line, row)| {
            if row.len() != d || d < 2 {
                return Err(line_error(line, format!("expected {} coordinates, found {}", d.max(2), row.len())));
            }
            let v = nalgebra::DVector::from_vec(row);
            let norm = v.norm();
            if (norm - 1.0).abs() > SPHERE_NORM_SLACK {
                return Err(line_error(line, format!("norm {norm} is not 1")));
            }
            SpherePoint::normalize(v).map_err(|e| line_error(line, e))
        })
        .collect()
}

/// Landmark configurations in `R^m` with `k` landmarks, one per line.
///
/// With `preprocess`, a row holds the `m * k` raw coordinates landmark by
/// landmark (`x_1, y_1, x_2, y_2, ...`) and is centered and scaled. Without
/// it, a row holds the `m * (k-1)` column-major entries of a pre-shape.
pub fn parse_landmarks_csv(text: &str, m: usize, k: usize, preprocess: bool) -> Result<Vec<PreShape>> {
    if m < 2 || k < m + 1 {
        return Err(Error::InvalidInput(format!("need m >= 2 and k >= m + 1, got m = {m}, k = {k}")));
    }
    let width = if preprocess { m * k } else { m * (k - 1) };
    numeric_rows(text)?
        .into_iter()
        .map(|(line, row)| {
            if row.len() != width {
                return Err(line_error(line, format!("expected {width} columns, found {}", row.len())));
            }
            let shape = if preprocess {
                PreShape::from_landmarks(&DMatrix::from_vec(m, k, row))
            } else {
                PreShape::new(m, k, row)
            };
            shape.map_err(|e| line_error(line, e))
        })
        .collect()
}

fn json_error(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// `{"support": [[...], ...], "weights": [...]}`.
pub fn parse_measure_json(text: &str) -> Result<DiscreteMeasure> {
    serde_json::from_str(text).map_err(json_error)
}

/// Input of a barycenter computation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarycenterInput {
    pub measures: Vec<DiscreteMeasure>,
    /// Defaults to uniform weights.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl BarycenterInput {
    pub fn resolved_weights(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.measures.len().max(1) as f64; self.measures.len()])
    }
}

/// `{"measures": [measure, ...], "weights": [...]}`.
pub fn parse_barycenter_json(text: &str) -> Result<BarycenterInput> {
    let input: BarycenterInput = serde_json::from_str(text).map_err(json_error)?;
    if input.measures.is_empty() {
        return Err(Error::InvalidInput("no measures given".into()));
    }
    Ok(input)
}

pub fn write_angles_csv(points: &[CirclePoint]) -> String {
    let mut out = String::from("angle\n");
    for p in points {
        out.push_str(&format_real(p.angle()));
        out.push('\n');
    }
    out
}

fn write_rows<'a>(header: String, rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = header;
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|x| format_real(*x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_sphere_csv(points: &[SpherePoint]) -> String {
    let d = points.first().map_or(0, |p| p.coords().len());
    let header = (1..=d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
    write_rows(header, points.iter().map(|p| p.coords().as_slice()))
}

/// Pre-shapes as column-major rows, readable by [`parse_landmarks_csv`]
/// without preprocessing.
pub fn write_preshapes_csv(shapes: &[PreShape]) -> String {
    let d = shapes.first().map_or(0, |p| p.config().len());
    let header = (1..=d).map(|i| format!("c{i}")).collect::<Vec<_>>().join(",");
    write_rows(header, shapes.iter().map(|p| p.config().as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles_round_trip() {
        let pts: Vec<CirclePoint> = [0.1, -3.0, 1.0 / 3.0].iter().map(|a| CirclePoint::new(*a)).collect();
        let text = write_angles_csv(&pts);
        assert_eq!(parse_angles_csv(&text).unwrap(), pts);
    }

    #[test]
    fn angle_errors_name_the_line() {
        let err = parse_angles_csv("0.1\n0.2\nabc\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_angles_csv("0.1\n0.2,0.3\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_angles_csv("# only a comment\n").is_err());
        assert!(parse_angles_csv("0.1\nNaN\n").is_err());
    }

    #[test]
    fn comments_and_headers() {
        let pts = parse_angles_csv("angle\n# note\n0.5\n\n-0.5\n").unwrap();
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn sphere_rows() {
        let pts = parse_sphere_csv("1,0,0\n0,0.6,0.8\n").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(parse_sphere_csv(&write_sphere_csv(&pts)).unwrap(), pts);
        let err = parse_sphere_csv("1,0,0\n0,1\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_sphere_csv("1,1,0\n").is_err());
    }

    #[test]
    fn landmarks() {
        let raw = "0,0,1,0,0,1\n0,0,2,0,0,2\n";
        let shapes = parse_landmarks_csv(raw, 2, 3, true).unwrap();
        assert!((shapes[0].config() - shapes[1].config()).norm() < 1e-15);
        let again = parse_landmarks_csv(&write_preshapes_csv(&shapes), 2, 3, false).unwrap();
        assert_eq!(again, shapes);
        let err = parse_landmarks_csv("0,0,1,0,0\n", 2, 3, true).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn measures() {
        let m = parse_measure_json(r#"{"support": [[0, 1], [0, -1]], "weights": [0.5, 0.5]}"#).unwrap();
        assert_eq!(m.len(), 2);
        let err = parse_measure_json("{\n \"support\": [[0]],\n \"weights\": [0.7]\n}").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let input = parse_barycenter_json(
            r#"{"measures": [{"support": [[0]], "weights": [1]}, {"support": [[2]], "weights": [1]}]}"#,
        )
        .unwrap();
        assert_eq!(input.resolved_weights(), vec![0.5, 0.5]);
        assert!(parse_barycenter_json(r#"{"measures": []}"#).is_err());
    }
}
