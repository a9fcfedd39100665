//! WS-PSNR, Bjøntegaard-Delta rate and BD report tables.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mocomp::{ErpFrame, Plane};

/// Value printed for identical frames in reports.
pub const PSNR_CAP_DB: f64 = 999.99;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("metrics: frames differ ({0})")]
    Mismatch(String),
    #[error("metrics: invalid RD curve: {0}")]
    BadCurve(String),
    #[error("metrics: RD curves do not overlap in quality")]
    NoOverlap,
}

/// Per-row weight `cos((j + 0.5 − H/2)·π/H)` of an ERP plane.
pub fn row_weight(j: usize, height: usize) -> f64 {
    let h = height as f64;
    ((j as f64 + 0.5 - h / 2.0) * std::f64::consts::PI / h).cos()
}

/// Weighted mean squared error of one plane.
fn plane_wmse(a: &Plane, b: &Plane) -> f64 {
    let (mut num, mut comp, mut den) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..a.height {
        let ra = &a.data[j * a.width..(j + 1) * a.width];
        let rb = &b.data[j * b.width..(j + 1) * b.width];
        let row: u64 = ra
            .iter()
            .zip(rb)
            .map(|(&x, &y)| {
                let d = x as i64 - y as i64;
                (d * d) as u64
            })
            .sum();
        let w = row_weight(j, a.height);
        // Neumaier summation keeps the result independent of magnitude order
        let term = w * row as f64;
        let t = num + term;
        comp += if num.abs() >= term.abs() {
            (num - t) + term
        } else {
            (term - t) + num
        };
        num = t;
        den += w * a.width as f64;
    }
    (num + comp) / den
}

fn psnr_from_wmse(wmse: f64, bit_depth: u8) -> f64 {
    if wmse == 0.0 {
        return f64::INFINITY;
    }
    let peak = ((1u32 << bit_depth) - 1) as f64;
    10.0 * (peak * peak / wmse).log10()
}

fn check_pair(a: &ErpFrame, b: &ErpFrame) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() || a.bit_depth != b.bit_depth {
        return Err(MetricsError::Mismatch(format!(
            "{}x{}@{} vs {}x{}@{}",
            a.width(),
            a.height(),
            a.bit_depth,
            b.width(),
            b.height(),
            b.bit_depth
        )));
    }
    Ok(())
}

/// Luma WS-PSNR in dB; `+∞` for identical frames.
pub fn ws_psnr(reference: &ErpFrame, distorted: &ErpFrame) -> Result<f64, MetricsError> {
    check_pair(reference, distorted)?;
    Ok(psnr_from_wmse(
        plane_wmse(&reference.luma, &distorted.luma),
        reference.bit_depth,
    ))
}

/// `(6·Y + Cb + Cr) / 8` combination of per-plane WS-PSNR values.
pub fn ws_psnr_yuv(reference: &ErpFrame, distorted: &ErpFrame) -> Result<f64, MetricsError> {
    check_pair(reference, distorted)?;
    let (Some([rc, rr]), Some([dc, dr])) = (&reference.chroma, &distorted.chroma) else {
        return Err(MetricsError::Mismatch("both frames need chroma planes".into()));
    };
    let d = reference.bit_depth;
    let y = psnr_from_wmse(plane_wmse(&reference.luma, &distorted.luma), d);
    let cb = psnr_from_wmse(plane_wmse(rc, dc), d);
    let cr = psnr_from_wmse(plane_wmse(rr, dr), d);
    Ok((6.0 * y + cb + cr) / 8.0)
}

/// Replaces `+∞` by [`PSNR_CAP_DB`].
pub fn capped(db: f64) -> f64 {
    db.min(PSNR_CAP_DB)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RDPoint {
    /// Bits.
    pub rate: f64,
    /// WS-PSNR, dB.
    pub quality: f64,
}

impl RDPoint {
    pub fn new(rate: f64, quality: f64) -> Self {
        Self { rate, quality }
    }
}

/// At least four points with strictly increasing rate and quality.
#[derive(Debug, Clone, PartialEq)]
pub struct RDCurve {
    points: Vec<RDPoint>,
}

impl RDCurve {
    /// Sorts by rate and validates.
    pub fn new(mut points: Vec<RDPoint>) -> Result<Self, MetricsError> {
        if points.len() < 4 {
            return Err(MetricsError::BadCurve(format!(
                "{} points, need at least 4",
                points.len()
            )));
        }
        if points
            .iter()
            .any(|p| p.rate <= 0.0 || !p.rate.is_finite() || !p.quality.is_finite())
        {
            return Err(MetricsError::BadCurve(
                "rates must be positive and qualities finite".into(),
            ));
        }
        points.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        for w in points.windows(2) {
            if w[1].rate <= w[0].rate || w[1].quality <= w[0].quality {
                return Err(MetricsError::BadCurve("rate and quality must increase together".into()));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RDPoint] {
        &self.points
    }

    /// Same qualities with every rate transformed by `f`.
    pub fn map_rates(&self, f: impl Fn(f64) -> f64) -> Result<Self, MetricsError> {
        Self::new(self.points.iter().map(|p| RDPoint::new(f(p.rate), p.quality)).collect())
    }

    fn quality_range(&self) -> (f64, f64) {
        (self.points[0].quality, self.points[self.points.len() - 1].quality)
    }
}

/// Least-squares cubic `log10(rate) ≈ Σ c_i (q − q0)^i`.
fn fit_log_rate(curve: &RDCurve, q0: f64) -> Result<[f64; 4], MetricsError> {
    let n = curve.points.len();
    let mut a = DMatrix::<f64>::zeros(n, 4);
    let mut b = DVector::<f64>::zeros(n);
    for (i, p) in curve.points.iter().enumerate() {
        let x = p.quality - q0;
        for k in 0..4 {
            a[(i, k)] = x.powi(k as i32);
        }
        b[i] = p.rate.log10();
    }
    let c = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| MetricsError::BadCurve(e.to_string()))?;
    Ok([c[0], c[1], c[2], c[3]])
}

fn integrate(c: &[f64; 4], lo: f64, hi: f64) -> f64 {
    let prim = |x: f64| c[0] * x + c[1] * x.powi(2) / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
    prim(hi) - prim(lo)
}

/// Average rate difference of `test` against `anchor` at equal quality, in
/// percent (negative means `test` needs fewer bits).
pub fn bd_rate(anchor: &RDCurve, test: &RDCurve) -> Result<f64, MetricsError> {
    let (a_lo, a_hi) = anchor.quality_range();
    let (t_lo, t_hi) = test.quality_range();
    let (lo, hi) = (a_lo.max(t_lo), a_hi.min(t_hi));
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(MetricsError::NoOverlap);
    }
    let q0 = 0.5 * (lo + hi);
    let ca = fit_log_rate(anchor, q0)?;
    let ct = fit_log_rate(test, q0)?;
    let avg = (integrate(&ct, lo - q0, hi - q0) - integrate(&ca, lo - q0, hi - q0)) / (hi - lo);
    Ok((10f64.powf(avg) - 1.0) * 100.0)
}

/// One coded sequence under one predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct RdResult {
    pub sequence: String,
    pub model: String,
    pub curve: RDCurve,
    /// Camera-motion side information included in every rate point.
    pub camera_bits: f64,
}

/// BD-rates of every model against an anchor, per sequence and averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct BdReport {
    pub models: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
    pub average: Vec<Option<f64>>,
    /// Averages with the camera-motion bits removed from the test rates.
    pub average_without_camera_bits: Vec<Option<f64>>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl BdReport {
    pub fn build(anchor_model: &str, results: &[RdResult]) -> Result<Self, MetricsError> {
        let mut sequences: Vec<&str> = Vec::new();
        let mut models: Vec<String> = Vec::new();
        for r in results {
            if !sequences.contains(&r.sequence.as_str()) {
                sequences.push(&r.sequence);
            }
            if r.model != anchor_model && !models.contains(&r.model) {
                models.push(r.model.clone());
            }
        }
        let find = |seq: &str, model: &str| results.iter().find(|r| r.sequence == seq && r.model == model);
        let mut rows = Vec::new();
        let mut without = Vec::new();
        for seq in &sequences {
            let anchor = find(seq, anchor_model);
            let mut row = Vec::new();
            let mut row_wo = Vec::new();
            for m in &models {
                match (anchor, find(seq, m)) {
                    (Some(a), Some(t)) => {
                        row.push(Some(bd_rate(&a.curve, &t.curve)?));
                        let a_wo = a.curve.map_rates(|r| r - a.camera_bits)?;
                        let t_wo = t.curve.map_rates(|r| r - t.camera_bits)?;
                        row_wo.push(Some(bd_rate(&a_wo, &t_wo)?));
                    }
                    _ => {
                        row.push(None);
                        row_wo.push(None);
                    }
                }
            }
            rows.push((seq.to_string(), row));
            without.push(row_wo);
        }
        let average = (0..models.len()).map(|i| mean(rows.iter().map(|r| r.1[i]))).collect();
        let average_without_camera_bits = (0..models.len()).map(|i| mean(without.iter().map(|r| r[i]))).collect();
        Ok(Self {
            models,
            rows,
            average,
            average_without_camera_bits,
        })
    }

    fn table(&self) -> Vec<(String, Vec<Option<f64>>)> {
        let mut t = self.rows.clone();
        if !self.rows.is_empty() {
            t.push(("Average".into(), self.average.clone()));
            t.push((
                "Average (w/o camera motion bits)".into(),
                self.average_without_camera_bits.clone(),
            ));
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sequence");
        for m in &self.models {
            out.push(',');
            out.push_str(m);
        }
        out.push('\n');
        for (name, vals) in self.table() {
            out.push_str(&name);
            for v in vals {
                out.push(',');
                if let Some(v) = v {
                    let _ = write!(out, "{v:.6}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| sequence |");
        for m in &self.models {
            let _ = write!(out, " {m} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(self.models.len()));
        out.push('\n');
        for (name, vals) in self.table() {
            let _ = write!(out, "| {name} |");
            for v in vals {
                match v {
                    Some(v) => {
                        let _ = write!(out, " {v:.2}% |");
                    }
                    None => out.push_str(" - |"),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: usize, h: usize, data: Vec<u16>) -> ErpFrame {
        ErpFrame::luma_only(w, h, 8, data).unwrap()
    }

    fn curve(pts: &[(f64, f64)]) -> RDCurve {
        RDCurve::new(pts.iter().map(|&(r, q)| RDPoint::new(r, q)).collect()).unwrap()
    }

    #[test]
    fn identical_and_one_lsb() {
        let a = frame(16, 8, (0..128).map(|i| (i * 2) as u16).collect());
        assert_eq!(ws_psnr(&a, &a).unwrap(), f64::INFINITY);
        assert_eq!(capped(ws_psnr(&a, &a).unwrap()), PSNR_CAP_DB);
        let b = frame(16, 8, a.luma.data.iter().map(|s| s + 1).collect());
        let db = ws_psnr(&a, &b).unwrap();
        assert!((db - 20.0 * 255f64.log10()).abs() < 1e-9);
        assert!((db - 48.1308).abs() < 1e-3);
        assert_eq!(db, ws_psnr(&b, &a).unwrap());
    }

    #[test]
    fn pole_errors_weigh_less() {
        let (w, h) = (16, 16);
        let base = frame(w, h, vec![100; w * h]);
        let mut pole = base.luma.data.clone();
        let mut equator = base.luma.data.clone();
        for x in 0..w {
            pole[x] += 5;
            equator[(h / 2) * w + x] += 5;
        }
        let p = ws_psnr(&base, &frame(w, h, pole.clone())).unwrap();
        let e = ws_psnr(&base, &frame(w, h, equator)).unwrap();
        assert!(p > e);
        pole[3] += 1;
        assert!(ws_psnr(&base, &frame(w, h, pole)).unwrap() < p);
    }

    #[test]
    fn yuv_combination_and_mismatch() {
        let y = Plane::filled(8, 4, 10);
        let c = Plane::filled(4, 2, 10);
        let a = ErpFrame::new(y.clone(), 8, Some([c.clone(), c.clone()])).unwrap();
        let b = ErpFrame::new(Plane::filled(8, 4, 11), 8, Some([Plane::filled(4, 2, 12), c.clone()])).unwrap();
        let got = ws_psnr_yuv(&a, &b).unwrap();
        assert_eq!(got, f64::INFINITY);
        let b2 = ErpFrame::new(
            Plane::filled(8, 4, 11),
            8,
            Some([Plane::filled(4, 2, 12), Plane::filled(4, 2, 11)]),
        )
        .unwrap();
        let peak = 20.0 * 255f64.log10();
        let want = (6.0 * peak + (peak - 10.0 * 4f64.log10()) + peak) / 8.0;
        assert!((ws_psnr_yuv(&a, &b2).unwrap() - want).abs() < 1e-9);
        let small = frame(4, 4, vec![0; 16]);
        assert!(ws_psnr(&a, &small).is_err());
    }

    #[test]
    fn bd_rate_identities() {
        let a = curve(&[(1000.0, 30.0), (2000.0, 33.0), (4000.0, 36.5), (8000.0, 39.0)]);
        assert!(bd_rate(&a, &a).unwrap().abs() < 1e-9);
        let doubled = a.map_rates(|r| 2.0 * r).unwrap();
        assert!((bd_rate(&a, &doubled).unwrap() - 100.0).abs() < 1e-9);
        let back = bd_rate(&doubled, &a).unwrap();
        assert!((back + 50.0).abs() < 1e-9);
        let far = curve(&[(1.0, 50.0), (2.0, 51.0), (3.0, 52.0), (4.0, 53.0)]);
        assert_eq!(bd_rate(&a, &far), Err(MetricsError::NoOverlap));
    }

    #[test]
    fn curve_validation() {
        assert!(RDCurve::new(vec![RDPoint::new(1.0, 1.0); 3]).is_err());
        let bad = vec![
            RDPoint::new(1.0, 30.0),
            RDPoint::new(2.0, 29.0),
            RDPoint::new(3.0, 31.0),
            RDPoint::new(4.0, 32.0),
        ];
        assert!(matches!(RDCurve::new(bad), Err(MetricsError::BadCurve(_))));
    }

    #[test]
    fn reciprocity_on_smooth_curves() {
        let a = curve(&[(1000.0, 30.0), (1900.0, 33.0), (3700.0, 36.0), (7600.0, 39.0)]);
        let b = curve(&[(950.0, 30.2), (1800.0, 33.1), (3500.0, 36.1), (7100.0, 39.1)]);
        let ab = bd_rate(&a, &b).unwrap();
        let ba = bd_rate(&b, &a).unwrap();
        assert!((ab + ba / (1.0 + ba / 100.0)).abs() < 0.05);
    }

    #[test]
    fn report_tables() {
        let empty = BdReport::build("trans", &[]).unwrap();
        assert_eq!(empty.to_csv(), "sequence\n");

        let a = curve(&[(1000.0, 30.0), (2000.0, 33.0), (4000.0, 36.5), (8000.0, 39.0)]);
        let t = a.map_rates(|r| 0.98 * r + 40.0).unwrap();
        let results = vec![
            RdResult {
                sequence: "dolly".into(),
                model: "trans".into(),
                curve: a.clone(),
                camera_bits: 0.0,
            },
            RdResult {
                sequence: "dolly".into(),
                model: "gcg".into(),
                curve: t.clone(),
                camera_bits: 40.0,
            },
            RdResult {
                sequence: "dolly".into(),
                model: "orig".into(),
                curve: a.clone(),
                camera_bits: 0.0,
            },
        ];
        let r = BdReport::build("trans", &results).unwrap();
        assert_eq!(r.models, vec!["gcg", "orig"]);
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "sequence,gcg,orig");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("Average (w/o camera motion bits),"));

        // oracle: recompute with the camera bits removed by hand
        let stripped = t.map_rates(|r| r - 40.0).unwrap();
        let want = bd_rate(&a, &stripped).unwrap();
        assert!((r.average_without_camera_bits[0].unwrap() - want).abs() < 1e-12);
        assert!((want + 2.0).abs() < 1e-9);
        assert!(r.average[0].unwrap() > want);
        assert!(r.to_markdown().contains("| dolly |"));
    }
}
