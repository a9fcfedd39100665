//! Block-based motion-compensated prediction on ERP frames.
//!
//! Samples are fetched with bilinear interpolation. Horizontally the frame
//! wraps (ERP is periodic in azimuth); vertically rows are clamped, so the
//! pole rows extend as constants. Predictions are rounded to integer samples
//! before the SAD, which keeps every cost an exact integer.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::UnitVector3;
use crate::motion_model::{BlockGeometry, GeodesicModelConfig, ModelError, MotionVector2D, MovedPolar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MocompError {
    #[error("mocomp: {0}")]
    Frame(String),
    #[error("mocomp: frames differ ({0})")]
    Mismatch(String),
    #[error("mocomp: block {block:?} outside a {width}x{height} frame")]
    BlockOutOfFrame {
        block: BlockSpec,
        width: usize,
        height: usize,
    },
    #[error("mocomp: search needs range > 0 and step > 0 (got {range}, {step})")]
    BadSearch { range: f64, step: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One sample plane, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u16>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self, MocompError> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(MocompError::Frame(format!(
                "plane {width}x{height} cannot hold {} samples",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    /// Bilinear sample with horizontal wrap and vertical clamp.
    #[inline]
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let w = self.width;
        let mut xw = x.rem_euclid(w as f64);
        // rem_euclid rounds tiny negative inputs up to exactly w
        if xw >= w as f64 {
            xw = 0.0;
        }
        let x0f = xw.floor();
        let fx = xw - x0f;
        let x0 = (x0f as usize).min(w - 1);
        let x1 = if x0 + 1 == w { 0 } else { x0 + 1 };

        let yc = y.clamp(0.0, (self.height - 1) as f64);
        let y0f = yc.floor();
        let fy = yc - y0f;
        let y0 = y0f as usize;
        let y1 = (y0 + 1).min(self.height - 1);

        let r0 = &self.data[y0 * w..];
        let r1 = &self.data[y1 * w..];
        let top = r0[x0] as f64 * (1.0 - fx) + r0[x1] as f64 * fx;
        let bottom = r1[x0] as f64 * (1.0 - fx) + r1[x1] as f64 * fx;
        top * (1.0 - fy) + bottom * fy
    }
}

/// An ERP picture: luma plus optional 4:2:0 chroma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErpFrame {
    pub bit_depth: u8,
    pub luma: Plane,
    pub chroma: Option<[Plane; 2]>,
}

impl ErpFrame {
    pub fn new(luma: Plane, bit_depth: u8, chroma: Option<[Plane; 2]>) -> Result<Self, MocompError> {
        if bit_depth != 8 && bit_depth != 10 {
            return Err(MocompError::Frame(format!("unsupported bit depth {bit_depth}")));
        }
        if luma.width < 2 {
            return Err(MocompError::Frame("ERP frames need at least two columns".into()));
        }
        let max = (1u32 << bit_depth) - 1;
        let planes = std::iter::once(&luma).chain(chroma.iter().flatten());
        for plane in planes {
            if plane.data.iter().any(|&s| s as u32 > max) {
                return Err(MocompError::Frame(format!("sample exceeds {bit_depth}-bit range")));
            }
        }
        if let Some([cb, cr]) = &chroma {
            let (cw, ch) = chroma_size(luma.width, luma.height);
            for c in [cb, cr] {
                if c.width != cw || c.height != ch {
                    return Err(MocompError::Frame(format!(
                        "chroma plane {}x{} does not match 4:2:0 of {}x{}",
                        c.width, c.height, luma.width, luma.height
                    )));
                }
            }
        }
        Ok(Self {
            bit_depth,
            luma,
            chroma,
        })
    }

    pub fn luma_only(width: usize, height: usize, bit_depth: u8, data: Vec<u16>) -> Result<Self, MocompError> {
        Self::new(Plane::new(width, height, data)?, bit_depth, None)
    }

    pub fn width(&self) -> usize {
        self.luma.width
    }

    pub fn height(&self) -> usize {
        self.luma.height
    }

    pub fn max_value(&self) -> u16 {
        ((1u32 << self.bit_depth) - 1) as u16
    }

    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        self.luma.sample_bilinear(x, y)
    }

    fn same_layout(&self, other: &ErpFrame) -> Result<(), MocompError> {
        if self.width() != other.width() || self.height() != other.height() || self.bit_depth != other.bit_depth {
            return Err(MocompError::Mismatch(format!(
                "{}x{}@{} vs {}x{}@{}",
                self.width(),
                self.height(),
                self.bit_depth,
                other.width(),
                other.height(),
                other.bit_depth
            )));
        }
        Ok(())
    }
}

/// Chroma plane size for 4:2:0 subsampling.
pub fn chroma_size(width: usize, height: usize) -> (usize, usize) {
    (width.div_ceil(2), height.div_ceil(2))
}

/// Rectangular block: top-left corner and size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl BlockSpec {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self { x0, y0, width, height }
    }

    pub fn fits(&self, frame_width: usize, frame_height: usize) -> bool {
        self.width >= 1
            && self.height >= 1
            && self.x0 + self.width <= frame_width
            && self.y0 + self.height <= frame_height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Continuous coordinate of the block center.
    pub fn center(&self) -> (f64, f64) {
        (
            self.x0 as f64 + (self.width as f64 - 1.0) / 2.0,
            self.y0 as f64 + (self.height as f64 - 1.0) / 2.0,
        )
    }

    /// Pixel positions in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (x0, w) = (self.x0, self.width);
        (self.y0..self.y0 + self.height).flat_map(move |y| (x0..x0 + w).map(move |x| (x, y)))
    }

    /// Covers a frame with blocks of the given size; edge blocks are cropped.
    pub fn tile(frame_width: usize, frame_height: usize, width: usize, height: usize) -> Vec<BlockSpec> {
        let mut blocks = Vec::new();
        for y0 in (0..frame_height).step_by(height.max(1)) {
            for x0 in (0..frame_width).step_by(width.max(1)) {
                blocks.push(BlockSpec::new(
                    x0,
                    y0,
                    width.min(frame_width - x0),
                    height.min(frame_height - y0),
                ));
            }
        }
        blocks
    }
}

/// A prediction model taking part in the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predictor {
    /// Plain ERP translation. One unit moves `Δ·H/π` rows vertically
    /// (`t_u`) and `Δ·W/2π` columns horizontally (`t_v`).
    Translational {
        delta: f64,
    },
    Geodesic(GeodesicModelConfig),
}

impl Predictor {
    pub fn label(&self) -> &'static str {
        match self {
            Predictor::Translational { .. } => "trans",
            Predictor::Geodesic(cfg) => cfg.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionResult {
    pub samples: Vec<u16>,
    pub sad: u64,
    /// Pixels whose mapping had to be clamped near a pole.
    pub degenerate: usize,
}

/// Reusable per-block search state.
struct BlockSearch<'a> {
    reference: &'a ErpFrame,
    block: BlockSpec,
    target: Vec<u16>,
    geometry: Option<BlockGeometry>,
    moved: MovedPolar,
    coords: Vec<(f64, f64)>,
}

impl<'a> BlockSearch<'a> {
    fn new(
        reference: &'a ErpFrame,
        current: &ErpFrame,
        block: BlockSpec,
        q: &UnitVector3,
        predictor: &Predictor,
    ) -> Result<Self, MocompError> {
        reference.same_layout(current)?;
        let (w, h) = (reference.width(), reference.height());
        if !block.fits(w, h) {
            return Err(MocompError::BlockOutOfFrame {
                block,
                width: w,
                height: h,
            });
        }
        let target = block.pixels().map(|(x, y)| current.luma.at(x, y)).collect();
        let geometry = match predictor {
            Predictor::Geodesic(_) => Some(BlockGeometry::new(block, q, w, h)?),
            Predictor::Translational { .. } => None,
        };
        Ok(Self {
            reference,
            block,
            target,
            geometry,
            moved: MovedPolar::default(),
            coords: Vec::with_capacity(block.len()),
        })
    }

    /// Fills `self.coords` for every `t_v` sharing the `t_u` prepared last.
    fn prepare_polar(&mut self, t_u: f64, predictor: &Predictor) -> Result<(), MocompError> {
        if let (Some(geo), Predictor::Geodesic(cfg)) = (&self.geometry, predictor) {
            geo.displace(t_u, cfg, &mut self.moved)?;
        }
        Ok(())
    }

    fn fill_coords(&mut self, t: MotionVector2D, predictor: &Predictor) {
        match (predictor, &self.geometry) {
            (Predictor::Geodesic(cfg), Some(geo)) => {
                geo.source_coords(&self.moved, cfg.delta * t.t_v, &mut self.coords);
            }
            (Predictor::Translational { delta }, _) => {
                let (w, h) = (self.reference.width() as f64, self.reference.height() as f64);
                let dx = t.t_v * delta * w / TAU;
                let dy = t.t_u * delta * h / PI;
                self.coords.clear();
                self.coords
                    .extend(self.block.pixels().map(|(x, y)| (x as f64 + dx, y as f64 + dy)));
            }
            (Predictor::Geodesic(_), None) => unreachable!("geodesic search without geometry"),
        }
    }

    /// SAD of the current coordinates, abandoning once it exceeds `limit`.
    fn sad(&self, limit: u64) -> Option<u64> {
        let max = self.reference.max_value() as f64;
        let mut sad = 0u64;
        let row = self.block.width;
        for (i, (&(x, y), &t)) in self.coords.iter().zip(&self.target).enumerate() {
            let p = self.reference.luma.sample_bilinear(x, y).round().clamp(0.0, max) as i64;
            sad += (p - t as i64).unsigned_abs();
            if (i + 1) % row == 0 && sad > limit {
                return None;
            }
        }
        Some(sad)
    }

    fn result(&self) -> PredictionResult {
        let max = self.reference.max_value() as f64;
        let samples: Vec<u16> = self
            .coords
            .iter()
            .map(|&(x, y)| self.reference.luma.sample_bilinear(x, y).round().clamp(0.0, max) as u16)
            .collect();
        let sad = samples
            .iter()
            .zip(&self.target)
            .map(|(&p, &t)| (p as i64 - t as i64).unsigned_abs())
            .sum();
        let degenerate = if self.geometry.is_some() {
            self.moved.degenerate_count()
        } else {
            0
        };
        PredictionResult {
            samples,
            sad,
            degenerate,
        }
    }
}

/// Bilinear luma sample at a continuous position.
pub fn sample_bilinear(frame: &ErpFrame, x: f64, y: f64) -> f64 {
    frame.sample_bilinear(x, y)
}

pub fn predict_block(
    reference: &ErpFrame,
    current: &ErpFrame,
    block: BlockSpec,
    q: &UnitVector3,
    t: MotionVector2D,
    predictor: &Predictor,
) -> Result<PredictionResult, MocompError> {
    let mut search = BlockSearch::new(reference, current, block, q, predictor)?;
    search.prepare_polar(t.t_u, predictor)?;
    search.fill_coords(t, predictor);
    Ok(search.result())
}

/// Total order used to pick among equal-cost candidates.
fn candidate_order(a: (u64, MotionVector2D), b: (u64, MotionVector2D)) -> Ordering {
    a.0.cmp(&b.0)
        .then(a.1.l1().total_cmp(&b.1.l1()))
        .then(a.1.t_u.total_cmp(&b.1.t_u))
        .then(a.1.t_v.total_cmp(&b.1.t_v))
}

/// Exhaustive search over `t ∈ [−range, range]²` on a grid of `step`.
pub fn motion_search(
    reference: &ErpFrame,
    current: &ErpFrame,
    block: BlockSpec,
    q: &UnitVector3,
    predictor: &Predictor,
    range: f64,
    step: f64,
) -> Result<(MotionVector2D, PredictionResult), MocompError> {
    if !(range > 0.0 && step > 0.0) || !range.is_finite() || !step.is_finite() {
        return Err(MocompError::BadSearch { range, step });
    }
    let n = (range / step + 1e-9).floor() as i64;
    let mut search = BlockSearch::new(reference, current, block, q, predictor)?;
    let mut best: Option<(u64, MotionVector2D)> = None;
    for iu in -n..=n {
        let t_u = iu as f64 * step;
        search.prepare_polar(t_u, predictor)?;
        for iv in -n..=n {
            let t = MotionVector2D::new(t_u, iv as f64 * step);
            search.fill_coords(t, predictor);
            let limit = best.map_or(u64::MAX, |b| b.0);
            if let Some(sad) = search.sad(limit) {
                let cand = (sad, t);
                if best.is_none_or(|b| candidate_order(cand, b) == Ordering::Less) {
                    best = Some(cand);
                }
            }
        }
    }
    let (_, t) = best.expect("search grid contains at least t = 0");
    search.prepare_polar(t.t_u, predictor)?;
    search.fill_coords(t, predictor);
    Ok((t, search.result()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutcome {
    pub label: &'static str,
    pub t: MotionVector2D,
    pub sad: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockComparison {
    pub block: BlockSpec,
    /// One entry per predictor, in the order given.
    pub outcomes: Vec<ModelOutcome>,
}

impl BlockComparison {
    /// Index of the lowest-SAD model; ties go to the earlier predictor.
    pub fn winner(&self) -> usize {
        let mut best = 0;
        for (i, o) in self.outcomes.iter().enumerate() {
            if o.sad < self.outcomes[best].sad {
                best = i;
            }
        }
        best
    }
}

/// Runs [`motion_search`] for every block and predictor.
pub fn compare_models(
    reference: &ErpFrame,
    current: &ErpFrame,
    blocks: &[BlockSpec],
    q: &UnitVector3,
    predictors: &[Predictor],
    range: f64,
    step: f64,
) -> Result<Vec<BlockComparison>, MocompError> {
    blocks
        .par_iter()
        .map(|&block| {
            let outcomes = predictors
                .iter()
                .map(|p| {
                    motion_search(reference, current, block, q, p, range, step).map(|(t, r)| ModelOutcome {
                        label: p.label(),
                        t,
                        sad: r.sad,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BlockComparison { block, outcomes })
        })
        .collect()
}

/// Predicts a whole frame block by block with one motion vector; chroma
/// (when present) follows the luma mapping at half resolution.
pub fn predict_frame(
    reference: &ErpFrame,
    block_width: usize,
    block_height: usize,
    q: &UnitVector3,
    t: MotionVector2D,
    predictor: &Predictor,
) -> Result<ErpFrame, MocompError> {
    let (w, h) = (reference.width(), reference.height());
    let max = reference.max_value() as f64;
    let mut luma = Plane::filled(w, h, 0);
    let mut chroma = reference.chroma.as_ref().map(|[cb, _]| {
        [
            Plane::filled(cb.width, cb.height, 0),
            Plane::filled(cb.width, cb.height, 0),
        ]
    });
    for block in BlockSpec::tile(w, h, block_width, block_height) {
        let pred = predict_block(reference, reference, block, q, t, predictor)?;
        for ((x, y), s) in block.pixels().zip(pred.samples) {
            luma.data[y * w + x] = s;
        }
        if let (Some(out), Some(src)) = (chroma.as_mut(), reference.chroma.as_ref()) {
            let geometry = match predictor {
                Predictor::Geodesic(_) => Some(BlockGeometry::new(block, q, w, h)?),
                Predictor::Translational { .. } => None,
            };
            let cw = out[0].width;
            for cy in block.y0 / 2..(block.y0 + block.height).div_ceil(2) {
                for cx in block.x0 / 2..(block.x0 + block.width).div_ceil(2) {
                    let (lu, lv) = (2.0 * cx as f64 + 0.5, 2.0 * cy as f64 + 0.5);
                    let (su, sv) = match (predictor, &geometry) {
                        (Predictor::Geodesic(cfg), Some(geo)) => {
                            geo.map_position(lu.min(w as f64 - 1.0), lv.min(h as f64 - 1.0), t, cfg)?
                        }
                        (Predictor::Translational { delta }, _) => {
                            (lu + t.t_v * delta * w as f64 / TAU, lv + t.t_u * delta * h as f64 / PI)
                        }
                        _ => unreachable!(),
                    };
                    for (plane_out, plane_src) in out.iter_mut().zip(src) {
                        let s = plane_src.sample_bilinear((su - 0.5) / 2.0, (sv - 0.5) / 2.0);
                        plane_out.data[cy * cw + cx] = s.round().clamp(0.0, max) as u16;
                    }
                }
            }
        }
    }
    ErpFrame::new(luma, reference.bit_depth, chroma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion_model::Scaling;

    fn textured(w: usize, h: usize, seed: u32) -> ErpFrame {
        let data = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                let v = 128.0
                    + 60.0 * (x * 0.37 + seed as f64).sin() * (y * 0.23).cos()
                    + 30.0 * (x * 0.11 - y * 0.19 + seed as f64 * 0.5).sin();
                v.round() as u16
            })
            .collect();
        ErpFrame::luma_only(w, h, 8, data).unwrap()
    }

    #[test]
    fn bilinear_integer_positions_exact() {
        let f = textured(16, 8, 1);
        for y in 0..8 {
            for x in 0..16 {
                assert_eq!(f.sample_bilinear(x as f64, y as f64), f.luma.at(x, y) as f64);
            }
        }
    }

    #[test]
    fn bilinear_wraps_and_clamps() {
        let f = textured(16, 8, 2);
        let wrapped = f.sample_bilinear(15.5, 3.0);
        let expected = 0.5 * (f.luma.at(15, 3) as f64 + f.luma.at(0, 3) as f64);
        assert!((wrapped - expected).abs() < 1e-12);
        assert_eq!(f.sample_bilinear(-1.0, 2.0), f.luma.at(15, 2) as f64);
        assert_eq!(f.sample_bilinear(4.0, -3.0), f.luma.at(4, 0) as f64);
        assert_eq!(f.sample_bilinear(4.0, 30.0), f.luma.at(4, 7) as f64);

        let flat = ErpFrame::luma_only(8, 4, 10, vec![700; 32]).unwrap();
        for &(x, y) in &[(0.3, 0.2), (7.9, 3.9), (-20.5, 100.0)] {
            assert_eq!(flat.sample_bilinear(x, y), 700.0);
        }
    }

    #[test]
    fn frame_validation() {
        assert!(ErpFrame::luma_only(4, 2, 8, vec![256; 8]).is_err());
        assert!(ErpFrame::luma_only(4, 2, 10, vec![1023; 8]).is_ok());
        assert!(ErpFrame::luma_only(4, 2, 12, vec![0; 8]).is_err());
        assert!(ErpFrame::luma_only(4, 2, 8, vec![0; 7]).is_err());
        let bad_chroma = [Plane::filled(1, 1, 0), Plane::filled(1, 1, 0)];
        assert!(ErpFrame::new(Plane::filled(4, 2, 0), 8, Some(bad_chroma)).is_err());
    }

    #[test]
    fn identical_frames_zero_sad() {
        let f = textured(64, 32, 3);
        let q = UnitVector3::normalize(1.0, 0.2, 0.3).unwrap();
        for p in [
            Predictor::Translational { delta: PI / 32.0 },
            Predictor::Geodesic(GeodesicModelConfig::corrected(Scaling::Global, PI / 32.0).unwrap()),
            Predictor::Geodesic(GeodesicModelConfig::original(PI / 32.0).unwrap()),
        ] {
            let r = predict_block(&f, &f, BlockSpec::new(8, 8, 8, 8), &q, MotionVector2D::ZERO, &p).unwrap();
            assert_eq!(r.sad, 0, "{}", p.label());
            let (t, r) = motion_search(&f, &f, BlockSpec::new(8, 8, 8, 8), &q, &p, 2.0, 1.0).unwrap();
            assert_eq!((t, r.sad), (MotionVector2D::ZERO, 0));
        }
    }

    #[test]
    fn tie_break_prefers_small_vectors() {
        let flat = ErpFrame::luma_only(32, 16, 8, vec![50; 512]).unwrap();
        let p = Predictor::Translational { delta: PI / 16.0 };
        let (t, r) = motion_search(&flat, &flat, BlockSpec::new(4, 4, 4, 4), &UnitVector3::Z, &p, 3.0, 0.5).unwrap();
        assert_eq!(r.sad, 0);
        assert_eq!(t, MotionVector2D::ZERO);
        let a = (5, MotionVector2D::new(-1.0, 0.0));
        let b = (5, MotionVector2D::new(1.0, 0.0));
        let c = (5, MotionVector2D::new(0.0, -1.0));
        assert_eq!(candidate_order(a, b), Ordering::Less);
        assert_eq!(candidate_order(a, c), Ordering::Less);
        assert_eq!(candidate_order((4, MotionVector2D::new(3.0, 3.0)), a), Ordering::Less);
    }

    #[test]
    fn translational_shift_recovered() {
        let (w, h) = (64, 32);
        let reference = textured(w, h, 4);
        // current(x, y) = reference(x + 2, y − 1)
        let data = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                reference.luma.at((x + 2) % w, (y + h - 1) % h)
            })
            .collect();
        let current = ErpFrame::luma_only(w, h, 8, data).unwrap();
        let p = Predictor::Translational { delta: PI / h as f64 };
        let (t, r) = motion_search(
            &reference,
            &current,
            BlockSpec::new(56, 10, 8, 8),
            &UnitVector3::Z,
            &p,
            3.0,
            1.0,
        )
        .unwrap();
        assert_eq!(t, MotionVector2D::new(-1.0, 2.0));
        assert_eq!(r.sad, 0);
    }

    #[test]
    fn bad_search_parameters() {
        let f = textured(16, 8, 5);
        let p = Predictor::Translational { delta: 0.1 };
        assert!(matches!(
            motion_search(&f, &f, BlockSpec::new(0, 0, 4, 4), &UnitVector3::Z, &p, 0.0, 1.0),
            Err(MocompError::BadSearch { .. })
        ));
        assert!(matches!(
            predict_block(
                &f,
                &f,
                BlockSpec::new(14, 0, 4, 4),
                &UnitVector3::Z,
                MotionVector2D::ZERO,
                &p
            ),
            Err(MocompError::BlockOutOfFrame { .. })
        ));
        let other = textured(8, 8, 5);
        assert!(matches!(
            predict_block(
                &f,
                &other,
                BlockSpec::new(0, 0, 4, 4),
                &UnitVector3::Z,
                MotionVector2D::ZERO,
                &p
            ),
            Err(MocompError::Mismatch(_))
        ));
    }

    #[test]
    fn tiling_covers_frame() {
        let blocks = BlockSpec::tile(20, 10, 8, 4);
        assert_eq!(blocks.len(), 9);
        let covered: usize = blocks.iter().map(|b| b.len()).sum();
        assert_eq!(covered, 200);
        assert!(blocks.iter().all(|b| b.fits(20, 10)));
    }

    #[test]
    fn predict_frame_zero_motion_is_identity() {
        let luma = textured(32, 16, 6).luma;
        let cb = Plane::new(16, 8, (0..128).map(|i| (i * 2) as u16).collect()).unwrap();
        let cr = Plane::filled(16, 8, 90);
        let f = ErpFrame::new(luma, 8, Some([cb, cr])).unwrap();
        let q = UnitVector3::normalize(0.4, 0.4, 0.5).unwrap();
        let p = Predictor::Geodesic(GeodesicModelConfig::corrected(Scaling::Global, PI / 16.0).unwrap());
        let out = predict_frame(&f, 8, 8, &q, MotionVector2D::ZERO, &p).unwrap();
        assert_eq!(out, f);
    }
}
