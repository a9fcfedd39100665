//! Camera translation direction from bearing correspondences.
//!
//! The camera is assumed to translate without rotating, so the essential
//! matrix is `E = [q]×` up to scale and only its null vector is used.
//! Bearings are already unit vectors, so the usual Hartley normalization of
//! the eight-point system reduces to the identity and is skipped.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{erp_to_angles, SphericalPoint, UnitVector3};
use crate::motion_model::POLE_EPSILON;

/// Condition ratio `σ1/σ8` above which the design matrix is rank deficient.
pub const MAX_CONDITION: f64 = 1e12;

/// Flow vectors shorter than this (pixels) carry no direction.
pub const MIN_FLOW_PX: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraEstError {
    #[error("camera_est: eight-point needs at least 8 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("camera_est: degenerate correspondence configuration (condition {0:.3e})")]
    Degenerate(f64),
    #[error("camera_est: essential matrix null space has dimension {0}")]
    NullSpace(usize),
    #[error("camera_est: motion direction sign is ambiguous ({forward} vs {backward} pairs)")]
    AmbiguousSign { forward: usize, backward: usize },
    #[error("camera_est: flow field {width}x{height} does not hold {len} vectors")]
    BadFlow { width: usize, height: usize, len: usize },
    #[error("camera_est: {0}")]
    Invalid(String),
    #[error("camera_est: flow carries no usable motion")]
    NoInformation { q_init: UnitVector3 },
}

/// A bearing `s` in frame A and its match `s_m` in frame B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BearingPair {
    pub s: UnitVector3,
    pub s_m: UnitVector3,
}

impl BearingPair {
    pub fn new(s: UnitVector3, s_m: UnitVector3) -> Self {
        Self { s, s_m }
    }

    /// Algebraic epipolar residual `s_mᵀ E s`.
    pub fn residual(&self, e: &Matrix3<f64>) -> f64 {
        self.s_m.as_vector().dot(&(e * self.s.as_vector()))
    }
}

/// Essential matrix with singular values `(σ, σ, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix(Matrix3<f64>);

impl EssentialMatrix {
    /// Projects `m` onto the essential manifold: the two leading singular
    /// values are replaced by their mean and the smallest by zero.
    pub fn enforce(m: Matrix3<f64>) -> Result<Self, CameraEstError> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(CameraEstError::Invalid("non-finite matrix".into()));
        }
        let svd = m.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let order = descending(&svd.singular_values);
        let sigma = 0.5 * (svd.singular_values[order[0]] + svd.singular_values[order[1]]);
        if sigma == 0.0 {
            return Err(CameraEstError::NullSpace(3));
        }
        let mut d = Vector3::zeros();
        d[order[0]] = sigma;
        d[order[1]] = sigma;
        Ok(Self(u * Matrix3::from_diagonal(&d) * v_t))
    }

    /// `[q]×`, the essential matrix of a pure translation along `q`.
    pub fn from_translation(q: &UnitVector3) -> Self {
        Self(q.as_vector().cross_matrix())
    }

    /// Wraps a matrix without enforcing the constraint.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }
}

fn descending(s: &Vector3<f64>) -> [usize; 3] {
    let mut idx = [0, 1, 2];
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    idx
}

/// Dense per-pixel displacement, row-major `(du, dv)` in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f64; 2]>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 2]>) -> Result<Self, CameraEstError> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(CameraEstError::BadFlow {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![[0.0; 2]; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f64; 2] {
        self.data[y * self.width + x]
    }
}

/// Linear eight-point estimate followed by essential-constraint enforcement.
pub fn eight_point(pairs: &[BearingPair]) -> Result<EssentialMatrix, CameraEstError> {
    if pairs.len() < 8 {
        return Err(CameraEstError::TooFewPairs(pairs.len()));
    }
    // SVD of an n×9 system needs n ≥ 9 to expose all right singular vectors
    let rows = pairs.len().max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (r, p) in pairs.iter().enumerate() {
        let (s, m) = (p.s.as_vector(), p.s_m.as_vector());
        for i in 0..3 {
            for j in 0..3 {
                a[(r, 3 * i + j)] = m[i] * s[j];
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let (largest, eighth) = (sv[order[0]], sv[order[7]]);
    let condition = if eighth > 0.0 { largest / eighth } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(CameraEstError::Degenerate(condition));
    }
    let e = v_t.row(order[8]);
    EssentialMatrix::enforce(Matrix3::from_row_slice(e.transpose().as_slice()))
}

/// Left null vector of `E`, i.e. the translation direction up to sign.
pub fn epipole_from_essential(e: &EssentialMatrix) -> Result<UnitVector3, CameraEstError> {
    let m = e.matrix();
    if !m.iter().all(|x| x.is_finite()) {
        return Err(CameraEstError::Invalid("non-finite matrix".into()));
    }
    let svd = m.svd(true, false);
    let sv = svd.singular_values;
    let order = descending(&sv);
    let (s0, s1, s2) = (sv[order[0]], sv[order[1]], sv[order[2]]);
    let tol = 1e-8 * s0;
    if s0 == 0.0 || s1 <= tol {
        return Err(CameraEstError::NullSpace(if s0 == 0.0 { 3 } else { 2 }));
    }
    if s2 > tol {
        return Err(CameraEstError::NullSpace(0));
    }
    let q = svd.u.unwrap().column(order[2]).into_owned();
    UnitVector3::from_vector(q).map_err(|e| CameraEstError::Invalid(e.to_string()))
}

/// Picks the sign of `q` for which most pairs move away from it.
pub fn disambiguate_sign(q: &UnitVector3, pairs: &[BearingPair]) -> Result<UnitVector3, CameraEstError> {
    let (mut forward, mut backward) = (0usize, 0usize);
    for p in pairs {
        let (before, after) = (p.s.dot(q), p.s_m.dot(q));
        if after < before {
            forward += 1;
        } else if after > before {
            backward += 1;
        }
    }
    match forward.cmp(&backward) {
        std::cmp::Ordering::Greater => Ok(*q),
        std::cmp::Ordering::Less => Ok(-*q),
        std::cmp::Ordering::Equal => Err(CameraEstError::AmbiguousSign { forward, backward }),
    }
}

/// Full pipeline: eight-point, null vector, sign.
pub fn estimate_direction(pairs: &[BearingPair]) -> Result<UnitVector3, CameraEstError> {
    let e = eight_point(pairs)?;
    let q = epipole_from_essential(&e)?;
    disambiguate_sign(&q, pairs)
}

fn bearing(u: f64, v: f64, width: usize, height: usize) -> UnitVector3 {
    let (theta, phi) = erp_to_angles(u, v, width, height);
    SphericalPoint { theta, phi }.to_cartesian()
}

fn polar_in_range(v: f64, height: usize) -> bool {
    let theta = std::f64::consts::PI * (v + 0.5) / height as f64;
    (POLE_EPSILON..=std::f64::consts::PI - POLE_EPSILON).contains(&theta)
}

/// The pair for pixel `(x, y)`, or `None` when it must be skipped.
fn pair_at(flow: &FlowField, x: usize, y: usize) -> Option<BearingPair> {
    let (w, h) = (flow.width, flow.height);
    let [du, dv] = flow.at(x, y);
    let (u2, v2) = ((x as f64 + du).rem_euclid(w as f64), y as f64 + dv);
    if !u2.is_finite() || !v2.is_finite() || !polar_in_range(y as f64, h) || !polar_in_range(v2, h) {
        return None;
    }
    Some(BearingPair::new(
        bearing(x as f64, y as f64, w, h),
        bearing(u2, v2, w, h),
    ))
}

fn grid(flow: &FlowField, stride: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..flow.height)
        .step_by(stride)
        .flat_map(move |y| (0..flow.width).step_by(stride).map(move |x| (x, y)))
}

/// Samples the flow on a `stride` grid and turns each vector into a pair.
///
/// Displaced columns wrap; pixels whose source or target polar angle lies
/// within [`POLE_EPSILON`] of a pole, or whose target leaves the frame
/// vertically, are skipped.
pub fn flow_to_pairs(flow: &FlowField, stride: usize) -> Result<Vec<BearingPair>, CameraEstError> {
    if stride == 0 {
        return Err(CameraEstError::Invalid("stride must be at least 1".into()));
    }
    let pairs: Vec<_> = grid(flow, stride).filter_map(|(x, y)| pair_at(flow, x, y)).collect();
    if pairs.is_empty() {
        return Err(CameraEstError::Invalid("flow produced no bearing pairs".into()));
    }
    Ok(pairs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinetuneConfig {
    /// Half-width of the first search cap, radians.
    pub grid_radius: f64,
    pub levels: u32,
    /// Candidates per side of the grid center at each level.
    pub steps: u32,
    /// Pixel subsampling of the flow field.
    pub stride: usize,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        Self {
            grid_radius: 5f64.to_radians(),
            levels: 6,
            steps: 4,
            stride: 2,
        }
    }
}

/// Bearings and observed unit tangents of the usable flow vectors.
#[derive(Debug, Clone)]
pub struct FlowSamples {
    points: Vec<(Vector3<f64>, Vector3<f64>)>,
}

impl FlowSamples {
    /// Keeps grid pixels whose flow is at least [`MIN_FLOW_PX`] long.
    pub fn from_flow(flow: &FlowField, stride: usize) -> Self {
        let stride = stride.max(1);
        let points = grid(flow, stride)
            .filter(|&(x, y)| {
                let [du, dv] = flow.at(x, y);
                du.hypot(dv) >= MIN_FLOW_PX
            })
            .filter_map(|(x, y)| pair_at(flow, x, y))
            .filter_map(|p| {
                let (s, m) = (*p.s.as_vector(), *p.s_m.as_vector());
                let t = m - s * s.dot(&m);
                let n = t.norm();
                (n > 0.0).then(|| (s, t / n))
            })
            .collect();
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean angle between observed tangents and the field `(q·s)s − q`.
    pub fn objective(&self, q: &UnitVector3) -> f64 {
        let q = q.as_vector();
        let mut sum = 0.0;
        let mut count = 0usize;
        for (s, t) in &self.points {
            let pred = s * q.dot(s) - q;
            let n = pred.norm();
            if n < 1e-12 {
                continue;
            }
            let pred = pred / n;
            sum += t.cross(&pred).norm().atan2(t.dot(&pred));
            count += 1;
        }
        if count == 0 {
            f64::INFINITY
        } else {
            sum / count as f64
        }
    }
}

/// Orthonormal tangent basis at `q`.
fn tangent_basis(q: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if q.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = q.cross(&helper).normalize();
    let e2 = q.cross(&e1);
    (e1, e2)
}

/// Unit vector at gnomonic offsets `(a, b)` radians from `q`.
pub fn gnomonic_offset(q: &UnitVector3, a: f64, b: f64) -> UnitVector3 {
    let qv = q.as_vector();
    let (e1, e2) = tangent_basis(qv);
    UnitVector3::from_vector(qv + e1 * a.tan() + e2 * b.tan()).expect("offset from a unit vector is non-zero")
}

/// Coarse-to-fine grid search of the direction-alignment objective around
/// `q_init`. The grid center is always a candidate, so the objective never
/// increases between levels.
pub fn flow_finetune(
    q_init: &UnitVector3,
    flow: &FlowField,
    cfg: &FinetuneConfig,
) -> Result<UnitVector3, CameraEstError> {
    let samples = FlowSamples::from_flow(flow, cfg.stride);
    if samples.is_empty() {
        return Err(CameraEstError::NoInformation { q_init: *q_init });
    }
    Ok(finetune_samples(q_init, &samples, cfg).0)
}

/// Runs the search on prepared samples; also returns the objective after
/// each level (index 0 is the initial value).
pub fn finetune_samples(q_init: &UnitVector3, samples: &FlowSamples, cfg: &FinetuneConfig) -> (UnitVector3, Vec<f64>) {
    let n = cfg.steps.max(1) as i64;
    let mut best = *q_init;
    let mut best_j = samples.objective(&best);
    let mut history = vec![best_j];
    let mut radius = cfg.grid_radius;
    for _ in 0..cfg.levels {
        let cell = radius / n as f64;
        let center = best;
        let candidates: Vec<(i64, i64)> = (-n..=n).flat_map(|i| (-n..=n).map(move |j| (i, j))).collect();
        let scored: Vec<(f64, UnitVector3)> = candidates
            .par_iter()
            .map(|&(i, j)| {
                let c = gnomonic_offset(&center, i as f64 * cell, j as f64 * cell);
                (samples.objective(&c), c)
            })
            .collect();
        // sequential reduction keeps the choice independent of thread count
        for (j, c) in scored {
            if j < best_j {
                best_j = j;
                best = c;
            }
        }
        history.push(best_j);
        radius *= 0.5;
    }
    (best, history)
}
