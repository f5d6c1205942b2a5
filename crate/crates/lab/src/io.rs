//! Plain-text and binary file formats.
//!
//! * Point clouds: CSV, one point per line, no header. `#` starts a comment
//!   line; blank lines are skipped. Values are written with Rust's shortest
//!   round-trip formatting, so write-then-read is lossless.
//! * Shallow nets: one unit per line, `v_1 … v_d bias a`, separated by
//!   commas or whitespace.
//! * Deep nets: the binary `CRNN` model format of [`Mlp::to_bytes`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cyclerisk_core::cyclegan::TrainRecord;
use cyclerisk_core::net::{Mlp, NetError, ShallowNet};
use cyclerisk_core::ot::{EmpiricalMeasure, OtError};
use cyclerisk_core::Matrix;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Content { path: PathBuf, msg: String },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Fs {
        path: path.to_owned(),
        source,
    })
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Fs {
        path: path.to_owned(),
        source,
    })
}

/// Splits on commas and whitespace and parses every field as `f64`.
fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<f64>().map_err(|_| format!("`{f}` is not a number")))
        .collect()
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_cloud(text: &str, path: &Path) -> Result<Matrix, IoError> {
    let mut data = Vec::new();
    let mut dim = None;
    let mut rows = 0;
    for (line, l) in data_lines(text) {
        let err = |msg: String| IoError::Parse {
            path: path.to_owned(),
            line,
            msg,
        };
        let values = parse_numbers(l).map_err(err)?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(err(format!("expected {d} coordinates, found {}", values.len())))
            }
            _ => {}
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite coordinate".into()));
        }
        data.extend(values);
        rows += 1;
    }
    let Some(d) = dim else {
        return Err(IoError::Content {
            path: path.to_owned(),
            msg: "no points".into(),
        });
    };
    Ok(Matrix::from_vec(rows, d, data))
}

pub fn read_cloud(path: &Path) -> Result<EmpiricalMeasure, IoError> {
    let points = parse_cloud(&read(path)?, path)?;
    EmpiricalMeasure::new(points).map_err(|e: OtError| IoError::Content {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

pub fn format_cloud(points: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..points.rows() {
        let row: Vec<String> = points.row(i).iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_cloud(path: &Path, points: &Matrix) -> Result<(), IoError> {
    write_file(path, format_cloud(points))
}

pub const HISTORY_HEADER: &str = "step,cyc,ipm_x,ipm_y,lambda,total,path_norm_f,path_norm_g,path_norm_dx,path_norm_dy";

pub fn format_history(history: &[TrainRecord]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in history {
        let p = &r.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            p.cyc,
            p.ipm_x,
            p.ipm_y,
            p.lambda,
            p.total,
            r.path_norm_f,
            r.path_norm_g,
            r.path_norm_dx,
            r.path_norm_dy
        );
    }
    out
}

pub fn read_model(path: &Path) -> Result<Mlp, IoError> {
    let bytes = fs::read(path).map_err(|source| IoError::Fs {
        path: path.to_owned(),
        source,
    })?;
    Mlp::from_bytes(&bytes).map_err(|e: NetError| IoError::Content {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

pub fn write_model(path: &Path, net: &Mlp) -> Result<(), IoError> {
    write_file(path, net.to_bytes())
}

pub fn parse_shallow(text: &str, path: &Path) -> Result<ShallowNet, IoError> {
    let mut directions = Vec::new();
    let mut coefficients = Vec::new();
    for (line, l) in data_lines(text) {
        let err = |msg: String| IoError::Parse {
            path: path.to_owned(),
            line,
            msg,
        };
        let mut values = parse_numbers(l).map_err(err)?;
        if values.len() < 3 {
            return Err(err(format!(
                "a unit needs at least 3 numbers (weights, bias, coefficient), found {}",
                values.len()
            )));
        }
        coefficients.push(values.pop().expect("nonempty"));
        directions.push(values);
    }
    ShallowNet::new(directions, coefficients).map_err(|e| IoError::Content {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

pub fn read_shallow(path: &Path) -> Result<ShallowNet, IoError> {
    parse_shallow(&read(path)?, path)
}

pub fn format_shallow(net: &ShallowNet) -> String {
    let mut out = String::new();
    for (v, a) in net.directions().iter().zip(net.coefficients()) {
        let mut fields: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        fields.push(a.to_string());
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn here() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn cloud_round_trip_is_lossless() {
        let m = Matrix::from_rows(&[vec![0.1, -3.0e-17], vec![1.0 / 3.0, 2.5e300]]);
        let back = parse_cloud(&format_cloud(&m), here()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn cloud_skips_comments_and_blank_lines() {
        let m = parse_cloud("# header\n\n1, 2\n3 4\n", here()).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn cloud_errors_are_line_anchored() {
        let e = parse_cloud("1,2\n3\n", here()).unwrap_err().to_string();
        assert!(e.contains("test.csv:2"), "{e}");
        let e = parse_cloud("1\nx\n", here()).unwrap_err().to_string();
        assert!(e.contains(":2:") && e.contains("`x`"), "{e}");
        let e = parse_cloud("1\nNaN\n", here()).unwrap_err().to_string();
        assert!(e.contains("non-finite"), "{e}");
        assert!(parse_cloud("# nothing\n", here()).is_err());
    }

    #[test]
    fn shallow_round_trip() {
        let net = ShallowNet::new(vec![vec![1.0, -0.5, 0.25], vec![0.0, 2.0, -1.0]], vec![0.75, -1.5]).unwrap();
        let back = parse_shallow(&format_shallow(&net), here()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn shallow_rejects_ragged_units() {
        assert!(parse_shallow("1 0 1\n1 2 0 1\n", here()).is_err());
        let e = parse_shallow("1 2\n", here()).unwrap_err().to_string();
        assert!(e.contains(":1:"), "{e}");
    }

    #[test]
    fn history_has_one_line_per_record() {
        use cyclerisk_core::cyclegan::{IpmKind, LossReport};
        let rec = TrainRecord {
            step: 3,
            report: LossReport::new(0.5, 0.25, 0.125, 2.0, IpmKind::TrainedLowerBound),
            path_norm_f: 1.0,
            path_norm_g: 1.5,
            path_norm_dx: 0.5,
            path_norm_dy: 0.75,
        };
        let text = format_history(&[rec.clone(), rec]);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], HISTORY_HEADER);
        assert_eq!(lines[1], "3,0.5,0.25,0.125,2,1.375,1,1.5,0.5,0.75");
    }
}
