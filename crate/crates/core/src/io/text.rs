//! Text formats: per-frame motion directions, RD points and correspondences.
//!
//! * q CSV: header `frame_index,qx,qy,qz`, optionally followed by more columns.
//! * RD CSV: header `label,rate_bits,wspsnr_db`.
//! * Correspondences: one pair per line, `u1 v1 u2 v2` in ERP pixels; blank
//!   lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::IoError;
use crate::camera_est::BearingPair;
use crate::geometry::{erp_to_angles, SphericalPoint, UnitVector3};
use crate::metrics::{RDCurve, RDPoint};

/// Decimals used for unit-vector components; enough to carry fixed-point
/// camera-motion values without loss.
pub const Q_DECIMALS: usize = 12;

fn csv_reader(text: &str, flexible: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(flexible)
        .from_reader(text.as_bytes())
}

/// Checks the leading header fields; extra trailing columns are allowed.
fn expect_header(rdr: &mut csv::Reader<&[u8]>, want: &[&str]) -> Result<(), IoError> {
    let header = rdr.headers()?;
    if header.len() < want.len() || header.iter().zip(want).any(|(a, b)| a != *b) {
        return Err(IoError::Format(format!("expected header {}", want.join(","))));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, IoError> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| IoError::Format(format!("line {line}: bad field {}", i + 1)))
}

pub fn parse_q_csv(text: &str) -> Result<Vec<(u32, UnitVector3)>, IoError> {
    let mut rdr = csv_reader(text, true);
    expect_header(&mut rdr, &["frame_index", "qx", "qy", "qz"])?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let idx = field(&rec, 0, line)?;
        let v: [f64; 3] = [field(&rec, 1, line)?, field(&rec, 2, line)?, field(&rec, 3, line)?];
        let q = UnitVector3::normalize(v[0], v[1], v[2]).map_err(|e| IoError::Format(format!("line {line}: {e}")))?;
        out.push((idx, q));
    }
    Ok(out)
}

pub fn read_q_csv(path: impl AsRef<Path>) -> Result<Vec<(u32, UnitVector3)>, IoError> {
    parse_q_csv(&std::fs::read_to_string(path)?)
}

pub fn format_q_csv(rows: &[(u32, UnitVector3)]) -> String {
    let mut out = String::from("frame_index,qx,qy,qz\n");
    for (i, q) in rows {
        let _ = writeln!(out, "{i},{:.p$},{:.p$},{:.p$}", q.x(), q.y(), q.z(), p = Q_DECIMALS);
    }
    out
}

pub fn write_q_csv(path: impl AsRef<Path>, rows: &[(u32, UnitVector3)]) -> Result<(), IoError> {
    std::fs::write(path, format_q_csv(rows))?;
    Ok(())
}

/// RD points grouped by label, in order of first appearance.
pub fn parse_rd_csv(text: &str) -> Result<Vec<(String, RDCurve)>, IoError> {
    let mut rdr = csv_reader(text, false);
    expect_header(&mut rdr, &["label", "rate_bits", "wspsnr_db"])?;
    let mut groups: Vec<(String, Vec<RDPoint>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let label: String = field(&rec, 0, line)?;
        let p = RDPoint::new(field(&rec, 1, line)?, field(&rec, 2, line)?);
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push(p),
            None => groups.push((label, vec![p])),
        }
    }
    groups
        .into_iter()
        .map(|(l, pts)| {
            let curve = RDCurve::new(pts).map_err(|e| IoError::Format(format!("curve {l}: {e}")))?;
            Ok((l, curve))
        })
        .collect()
}

pub fn read_rd_csv(path: impl AsRef<Path>) -> Result<Vec<(String, RDCurve)>, IoError> {
    parse_rd_csv(&std::fs::read_to_string(path)?)
}

pub fn format_rd_csv(curves: &[(String, RDCurve)]) -> String {
    let mut out = String::from("label,rate_bits,wspsnr_db\n");
    for (l, c) in curves {
        for p in c.points() {
            let _ = writeln!(out, "{l},{:.6},{:.6}", p.rate, p.quality);
        }
    }
    out
}

/// Pixel correspondences `(u1, v1, u2, v2)`.
pub fn parse_pairs(text: &str) -> Result<Vec<[f64; 4]>, IoError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| IoError::Format(format!("line {}: expected four numbers", n + 1)))?;
        let [a, b, c, d] = vals[..] else {
            return Err(IoError::Format(format!("line {}: expected four numbers", n + 1)));
        };
        out.push([a, b, c, d]);
    }
    Ok(out)
}

pub fn read_pairs(path: impl AsRef<Path>) -> Result<Vec<[f64; 4]>, IoError> {
    parse_pairs(&std::fs::read_to_string(path)?)
}

pub fn format_pairs(pairs: &[[f64; 4]]) -> String {
    let mut out = String::new();
    for [a, b, c, d] in pairs {
        let _ = writeln!(out, "{a:.6} {b:.6} {c:.6} {d:.6}");
    }
    out
}

/// Converts pixel correspondences of a `width × height` ERP frame to
/// bearings; columns wrap.
pub fn pixel_pairs_to_bearings(pairs: &[[f64; 4]], width: usize, height: usize) -> Vec<BearingPair> {
    let bearing = |u: f64, v: f64| {
        let (theta, phi) = erp_to_angles(u.rem_euclid(width as f64), v, width, height);
        SphericalPoint { theta, phi }.to_cartesian()
    };
    pairs
        .iter()
        .map(|[u1, v1, u2, v2]| BearingPair::new(bearing(*u1, *v1), bearing(*u2, *v2)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_csv_round_trip() {
        let rows = vec![
            (0, UnitVector3::Z),
            (1, UnitVector3::normalize(0.1, -0.2, 0.97).unwrap()),
        ];
        let text = format_q_csv(&rows);
        assert!(text.starts_with("frame_index,qx,qy,qz\n0,0.000000000000,"));
        let back = parse_q_csv(&text).unwrap();
        for ((a, p), (b, q)) in rows.iter().zip(&back) {
            assert_eq!(a, b);
            assert!(p.angle_to(q) < 1e-11);
        }
        assert!(parse_q_csv("a,b\n").is_err());
        let extra = parse_q_csv("frame_index,qx,qy,qz,err_deg\n3,0,0,2,0.1\n").unwrap();
        assert_eq!(extra, vec![(3, UnitVector3::Z)]);
        assert!(parse_q_csv("frame_index,qx,qy,qz\n0,0,0,0\n").is_err());
        assert!(parse_q_csv("frame_index,qx,qy,qz\n0,x,0,1\n").is_err());
    }

    #[test]
    fn rd_csv_groups_labels() {
        let text = "label,rate_bits,wspsnr_db\n\
                    a,100,30\na,200,32\nb,110,30\na,400,34\nb,220,32\nb,430,34\na,800,36\nb,900,36\n";
        let curves = parse_rd_csv(text).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].0, "a");
        assert_eq!(curves[1].1.points().len(), 4);
        let again = parse_rd_csv(&format_rd_csv(&curves)).unwrap();
        assert_eq!(again, curves);
    }

    #[test]
    fn pairs_file() {
        let text = "# u1 v1 u2 v2\n1 2 3 4\n\n5.5 6 7 8\n";
        let p = parse_pairs(text).unwrap();
        assert_eq!(p, vec![[1.0, 2.0, 3.0, 4.0], [5.5, 6.0, 7.0, 8.0]]);
        assert!(parse_pairs("1 2 3\n").is_err());
        assert_eq!(parse_pairs(&format_pairs(&p)).unwrap(), p);
        let b = pixel_pairs_to_bearings(&[[0.0, 3.5, -1.0, 3.5]], 8, 8);
        let (t, _) = erp_to_angles(7.0, 3.5, 8, 8);
        assert!((b[0].s_m.to_spherical().theta - t).abs() < 1e-12);
    }
}
