//! Geodesic motion models for translational camera motion.
//!
//! Both models work in the epipole-oriented frame, where the camera moves
//! along `+z` and scene points travel along meridians (constant azimuth).
//! A motion vector `t = (t_u, t_v)` displaces a block along those meridians
//! (`t_u`) and in azimuth (`t_v`), with `Δ` radians per unit.
//!
//! * [`ModelVariant::Original`] assumes every pixel of a block shares the same
//!   spherical depth. The block center is displaced by exactly `Δ·t_u`, the
//!   remaining pixels follow the law of sines with the per-block ratio
//!   `k = d / l`.
//! * [`ModelVariant::GeometryCorrected`] assumes every pixel shares the same
//!   cylindrical radius `r` around the motion axis. Heights on the cylinder
//!   shift by `Δ_z·t_u`, which makes the map exactly invertible.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::geometry::{angles_to_erp, erp_to_angles, wrap_angle, Rotation3, SphericalPoint, UnitVector3};
use crate::mocomp::BlockSpec;

/// Polar angles are kept this far from the poles before `cot`/`sin` ratios.
pub const POLE_EPSILON: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// `t_u = 0`: the k-factor is undefined and the caller must bypass.
    #[error("motion_model: zero geodesic motion has no k-factor")]
    NoMotion,
    #[error("motion_model: {0}")]
    Domain(String),
    #[error("motion_model: local scaling is degenerate at the pole (theta_c = {theta_c})")]
    DegeneratePole { theta_c: f64 },
    #[error("motion_model: block {block:?} does not fit a {width}x{height} frame")]
    BlockOutOfFrame {
        block: BlockSpec,
        width: usize,
        height: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelVariant {
    Original,
    GeometryCorrected,
}

/// Cylinder radius choice of the geometry-corrected model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scaling {
    /// `r = 1` for every block.
    Global,
    /// `r = sin θ_c` of the block center.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicModelConfig {
    pub variant: ModelVariant,
    /// Ignored by [`ModelVariant::Original`].
    pub scaling: Scaling,
    /// Angular shift per motion-vector unit, radians.
    pub delta: f64,
}

impl GeodesicModelConfig {
    pub fn new(variant: ModelVariant, scaling: Scaling, delta: f64) -> Result<Self, ModelError> {
        if !(delta > 0.0 && delta < FRAC_PI_2) {
            return Err(ModelError::Domain(format!("delta must lie in (0, π/2), got {delta}")));
        }
        Ok(Self {
            variant,
            scaling,
            delta,
        })
    }

    /// Default step of one ERP luma row per unit: `Δ = π / H`.
    pub fn for_height(variant: ModelVariant, scaling: Scaling, height: usize) -> Self {
        Self::new(variant, scaling, PI / height.max(3) as f64).expect("π/H is a valid step for H ≥ 3")
    }

    pub fn original(delta: f64) -> Result<Self, ModelError> {
        Self::new(ModelVariant::Original, Scaling::Global, delta)
    }

    pub fn corrected(scaling: Scaling, delta: f64) -> Result<Self, ModelError> {
        Self::new(ModelVariant::GeometryCorrected, scaling, delta)
    }

    pub fn delta_z(&self) -> f64 {
        self.delta.tan()
    }

    /// Short name used in reports: `orig`, `gcg` or `gcl`.
    pub fn label(&self) -> &'static str {
        match (self.variant, self.scaling) {
            (ModelVariant::Original, _) => "orig",
            (ModelVariant::GeometryCorrected, Scaling::Global) => "gcg",
            (ModelVariant::GeometryCorrected, Scaling::Local) => "gcl",
        }
    }
}

/// Per-block motion vector in model units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionVector2D {
    /// Along the geodesic (polar angle in the epipole frame).
    pub t_u: f64,
    /// Along the azimuth.
    pub t_v: f64,
}

impl MotionVector2D {
    pub const ZERO: MotionVector2D = MotionVector2D { t_u: 0.0, t_v: 0.0 };

    pub fn new(t_u: f64, t_v: f64) -> Self {
        Self { t_u, t_v }
    }

    pub fn l1(&self) -> f64 {
        self.t_u.abs() + self.t_v.abs()
    }
}

/// Ratio `k = d / l` of spherical depth over camera displacement for a block.
///
/// `direction` is the sign of the motion (`sign(sin(Δ·t_u))`); it selects the
/// arctangent branch so that negative `t_u` reverses the displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicKFactor {
    pub k: f64,
    pub direction: f64,
}

/// A point projected onto a cylinder around the motion axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderProjection {
    pub r: f64,
    /// Height along the axis, `p = r·cot θ`.
    pub p: f64,
}

impl CylinderProjection {
    pub fn project(theta: f64, r: f64) -> Self {
        Self { r, p: r / theta.tan() }
    }

    /// Moves the point along the axis by `-shift` (camera moving by `shift`).
    pub fn shifted(self, shift: f64) -> Self {
        Self {
            r: self.r,
            p: self.p - shift,
        }
    }

    pub fn polar_angle(&self) -> f64 {
        self.r.atan2(self.p)
    }
}

/// Operation tallies for one block of a model kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCount {
    pub trig: u64,
    pub mul: u64,
    pub div: u64,
    pub add: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.trig + self.mul + self.div + self.add
    }
}

/// Receives operation counts from the model kernels. `()` ignores them.
pub trait OpTally {
    fn trig(&mut self, n: u64);
    fn mul(&mut self, n: u64);
    fn div(&mut self, n: u64);
    fn add(&mut self, n: u64);
}

impl OpTally for () {
    #[inline(always)]
    fn trig(&mut self, _: u64) {}
    #[inline(always)]
    fn mul(&mut self, _: u64) {}
    #[inline(always)]
    fn div(&mut self, _: u64) {}
    #[inline(always)]
    fn add(&mut self, _: u64) {}
}

impl OpTally for OpCount {
    fn trig(&mut self, n: u64) {
        self.trig += n;
    }
    fn mul(&mut self, n: u64) {
        self.mul += n;
    }
    fn div(&mut self, n: u64) {
        self.div += n;
    }
    fn add(&mut self, n: u64) {
        self.add += n;
    }
}

/// Closed-form per-block operation counts. The azimuth shift is common to
/// all variants and is not counted; `Δ_z = tan Δ` is a per-sequence constant.
pub fn op_count(variant: ModelVariant, scaling: Scaling, m: u64, n: u64) -> OpCount {
    let mn = m * n;
    match (variant, scaling) {
        (ModelVariant::Original, _) => OpCount {
            trig: 3 * mn + 2,
            mul: 1,
            div: mn + 1,
            add: 2 * mn + 1,
        },
        (ModelVariant::GeometryCorrected, Scaling::Global) => OpCount {
            trig: 2 * mn,
            mul: mn,
            div: 0,
            add: mn,
        },
        (ModelVariant::GeometryCorrected, Scaling::Local) => OpCount {
            trig: 2 * mn + 1,
            mul: mn,
            div: mn,
            add: mn,
        },
    }
}

#[inline]
pub fn clamp_polar(theta: f64) -> f64 {
    theta.clamp(POLE_EPSILON, PI - POLE_EPSILON)
}

pub fn k_factor(theta_c: f64, t_u: f64, delta: f64) -> Result<GeodesicKFactor, ModelError> {
    k_factor_counted(theta_c, t_u, delta, &mut ())
}

fn k_factor_counted<T: OpTally>(
    theta_c: f64,
    t_u: f64,
    delta: f64,
    ops: &mut T,
) -> Result<GeodesicKFactor, ModelError> {
    if t_u == 0.0 {
        return Err(ModelError::NoMotion);
    }
    ops.mul(1);
    let shift = delta * t_u;
    if !shift.is_finite() || shift.abs() >= PI {
        return Err(ModelError::Domain(format!(
            "|Δ·t_u| = {} must stay below π",
            shift.abs()
        )));
    }
    ops.add(1);
    ops.trig(2);
    ops.div(1);
    let k = (theta_c + shift).sin() / shift.sin();
    Ok(GeodesicKFactor {
        k,
        direction: shift.signum(),
    })
}

/// Polar displacement `Δθ` of the original model for a pixel at `theta`.
pub fn original_delta_theta(theta: f64, k: GeodesicKFactor) -> f64 {
    original_delta_theta_counted(theta, k, &mut ())
}

#[inline]
fn original_delta_theta_counted<T: OpTally>(theta: f64, k: GeodesicKFactor, ops: &mut T) -> f64 {
    ops.trig(3);
    ops.add(1);
    ops.div(1);
    let (sin, cos) = theta.sin_cos();
    let mut dtheta = (sin / (k.k - cos)).atan();
    // The principal arctangent only covers |Δθ| < π/2; past that the branch
    // follows the direction of motion.
    if k.direction > 0.0 && dtheta < 0.0 {
        ops.add(1);
        dtheta += PI;
    } else if k.direction < 0.0 && dtheta > 0.0 {
        ops.add(1);
        dtheta -= PI;
    }
    dtheta
}

pub fn delta_z(delta: f64) -> Result<f64, ModelError> {
    if !(delta > 0.0 && delta < FRAC_PI_2) {
        return Err(ModelError::Domain(format!("delta must lie in (0, π/2), got {delta}")));
    }
    Ok(delta.tan())
}

pub fn cylinder_radius(scaling: Scaling, theta_c: f64) -> Result<f64, ModelError> {
    match scaling {
        Scaling::Global => Ok(1.0),
        Scaling::Local => {
            let r = theta_c.sin();
            if r < POLE_EPSILON {
                Err(ModelError::DegeneratePole { theta_c })
            } else {
                Ok(r)
            }
        }
    }
}

/// Moved polar angle of the geometry-corrected model,
/// `θ_m = arccot(cot θ − Δ_z·t_u / r)` with `arccot` onto `(0, π)`.
#[inline]
pub fn corrected_theta(theta: f64, t_u: f64, delta_z: f64, r: f64) -> f64 {
    let cot = 1.0 / theta.tan();
    1f64.atan2(cot - delta_z * t_u / r)
}

pub fn original_map(
    s: SphericalPoint,
    theta_c: f64,
    t: MotionVector2D,
    cfg: &GeodesicModelConfig,
) -> Result<SphericalPoint, ModelError> {
    let phi = wrap_angle(s.phi + cfg.delta * t.t_v);
    if t.t_u == 0.0 {
        return Ok(SphericalPoint { theta: s.theta, phi });
    }
    let k = k_factor(clamp_polar(theta_c), t.t_u, cfg.delta)?;
    let theta = clamp_polar(s.theta);
    let moved = clamp_polar(theta + original_delta_theta(theta, k));
    Ok(SphericalPoint { theta: moved, phi })
}

pub fn corrected_map(
    s: SphericalPoint,
    theta_c: f64,
    t: MotionVector2D,
    cfg: &GeodesicModelConfig,
) -> Result<SphericalPoint, ModelError> {
    let phi = wrap_angle(s.phi + cfg.delta * t.t_v);
    if t.t_u == 0.0 {
        return Ok(SphericalPoint { theta: s.theta, phi });
    }
    let r = cylinder_radius(cfg.scaling, clamp_polar(theta_c))?;
    let theta = corrected_theta(clamp_polar(s.theta), t.t_u, delta_z(cfg.delta)?, r);
    Ok(SphericalPoint { theta, phi })
}

/// Applies the configured variant to one point given in the epipole frame.
pub fn map_point(
    s: SphericalPoint,
    theta_c: f64,
    t: MotionVector2D,
    cfg: &GeodesicModelConfig,
) -> Result<SphericalPoint, ModelError> {
    match cfg.variant {
        ModelVariant::Original => original_map(s, theta_c, t, cfg),
        ModelVariant::GeometryCorrected => corrected_map(s, theta_c, t, cfg),
    }
}

/// Block kernel: moves the (already pole-clamped) polar angles of a block.
///
/// This is the routine `op_count` describes; the tally receives
/// every trigonometric evaluation, multiplication, division and addition.
/// `cot` counts as one trigonometric evaluation, `arccot` as another.
pub fn displace_polar_angles<T: OpTally>(
    cfg: &GeodesicModelConfig,
    thetas: &[f64],
    theta_c: f64,
    t_u: f64,
    out: &mut [f64],
    ops: &mut T,
) -> Result<(), ModelError> {
    assert_eq!(thetas.len(), out.len());
    if t_u == 0.0 {
        out.copy_from_slice(thetas);
        return Ok(());
    }
    match cfg.variant {
        ModelVariant::Original => {
            let k = k_factor_counted(theta_c, t_u, cfg.delta, ops)?;
            for (o, &theta) in out.iter_mut().zip(thetas) {
                let dtheta = original_delta_theta_counted(theta, k, ops);
                ops.add(1);
                *o = theta + dtheta;
            }
        }
        ModelVariant::GeometryCorrected => {
            let delta_z = delta_z(cfg.delta)?;
            let r = match cfg.scaling {
                Scaling::Global => None,
                Scaling::Local => {
                    ops.trig(1);
                    Some(cylinder_radius(Scaling::Local, theta_c)?)
                }
            };
            for (o, &theta) in out.iter_mut().zip(thetas) {
                ops.trig(1);
                let cot = 1.0 / theta.tan();
                ops.mul(1);
                let mut shift = delta_z * t_u;
                if let Some(r) = r {
                    ops.div(1);
                    shift /= r;
                }
                ops.add(1);
                ops.trig(1);
                *o = 1f64.atan2(cot - shift);
            }
        }
    }
    Ok(())
}

/// Continuous source coordinates for every pixel of a block (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMapping {
    pub coords: Vec<(f64, f64)>,
    /// Pixels whose polar angle had to be clamped away from a pole.
    pub degenerate: usize,
}

/// Per-block quantities that do not depend on the motion vector.
#[derive(Debug, Clone)]
pub struct BlockGeometry {
    block: BlockSpec,
    width: usize,
    height: usize,
    to_epipole: Rotation3,
    from_epipole: Rotation3,
    theta_c: f64,
    thetas: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    clamped: Vec<bool>,
}

/// Moved polar angles of a block for one `t_u`, ready for the azimuth step.
#[derive(Debug, Clone, Default)]
pub struct MovedPolar {
    theta: Vec<f64>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    degenerate: Vec<bool>,
}

impl MovedPolar {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

impl BlockGeometry {
    pub fn new(block: BlockSpec, q: &UnitVector3, width: usize, height: usize) -> Result<Self, ModelError> {
        if !block.fits(width, height) {
            return Err(ModelError::BlockOutOfFrame { block, width, height });
        }
        let to_epipole = Rotation3::to_epipole(q);
        let (cu, cv) = block.center();
        let theta_c = epipole_angles(&to_epipole, cu, cv, width, height).0;

        let len = block.len();
        let mut thetas = Vec::with_capacity(len);
        let mut cos_phi = Vec::with_capacity(len);
        let mut sin_phi = Vec::with_capacity(len);
        let mut clamped = Vec::with_capacity(len);
        for (u, v) in block.pixels() {
            let (theta, phi) = epipole_angles(&to_epipole, u as f64, v as f64, width, height);
            let safe = clamp_polar(theta);
            clamped.push(safe != theta);
            thetas.push(safe);
            let (s, c) = phi.sin_cos();
            sin_phi.push(s);
            cos_phi.push(c);
        }
        Ok(Self {
            block,
            width,
            height,
            from_epipole: to_epipole.transpose(),
            to_epipole,
            theta_c,
            thetas,
            cos_phi,
            sin_phi,
            clamped,
        })
    }

    pub fn block(&self) -> BlockSpec {
        self.block
    }

    /// Polar angle of the block center in the epipole frame.
    pub fn theta_c(&self) -> f64 {
        self.theta_c
    }

    pub fn to_epipole(&self) -> &Rotation3 {
        &self.to_epipole
    }

    /// Runs the model kernel for `t_u`, filling `moved`.
    pub fn displace(&self, t_u: f64, cfg: &GeodesicModelConfig, moved: &mut MovedPolar) -> Result<(), ModelError> {
        let len = self.thetas.len();
        moved.theta.resize(len, 0.0);
        moved.sin.resize(len, 0.0);
        moved.cos.resize(len, 0.0);
        moved.degenerate.resize(len, false);
        let theta_c = clamp_polar(self.theta_c);
        displace_polar_angles(cfg, &self.thetas, theta_c, t_u, &mut moved.theta, &mut ())?;
        for i in 0..len {
            let raw = moved.theta[i];
            let theta = clamp_polar(raw);
            moved.degenerate[i] = self.clamped[i] || (raw != theta && t_u != 0.0);
            moved.theta[i] = theta;
            let (s, c) = theta.sin_cos();
            moved.sin[i] = s;
            moved.cos[i] = c;
        }
        Ok(())
    }

    /// Applies the azimuth shift `Δ·t_v` and returns to ERP coordinates.
    pub fn source_coords(&self, moved: &MovedPolar, azimuth_shift: f64, out: &mut Vec<(f64, f64)>) {
        out.clear();
        let (sb, cb) = azimuth_shift.sin_cos();
        for i in 0..self.thetas.len() {
            let (cp, sp) = (self.cos_phi[i], self.sin_phi[i]);
            let cos_phi = cp * cb - sp * sb;
            let sin_phi = sp * cb + cp * sb;
            let st = moved.sin[i];
            let world = self.from_epipole.apply_raw([st * cos_phi, st * sin_phi, moved.cos[i]]);
            out.push(cartesian_to_erp(world, self.width, self.height));
        }
    }

    pub fn map(&self, t: MotionVector2D, cfg: &GeodesicModelConfig) -> Result<BlockMapping, ModelError> {
        let mut moved = MovedPolar::default();
        self.displace(t.t_u, cfg, &mut moved)?;
        let mut coords = Vec::with_capacity(self.thetas.len());
        self.source_coords(&moved, cfg.delta * t.t_v, &mut coords);
        Ok(BlockMapping {
            coords,
            degenerate: moved.degenerate_count(),
        })
    }

    /// Maps an arbitrary continuous ERP position with this block's `θ_c`,
    /// used for chroma samples.
    pub fn map_position(
        &self,
        u: f64,
        v: f64,
        t: MotionVector2D,
        cfg: &GeodesicModelConfig,
    ) -> Result<(f64, f64), ModelError> {
        let (theta, phi) = epipole_angles(&self.to_epipole, u, v, self.width, self.height);
        let moved = map_point(SphericalPoint { theta, phi }, self.theta_c, t, cfg)?;
        let (st, ct) = moved.theta.sin_cos();
        let (sp, cp) = moved.phi.sin_cos();
        let world = self.from_epipole.apply_raw([st * cp, st * sp, ct]);
        Ok(cartesian_to_erp(world, self.width, self.height))
    }
}

/// Epipole-frame `(θ, φ)` of a continuous ERP position.
#[inline]
fn epipole_angles(to_epipole: &Rotation3, u: f64, v: f64, width: usize, height: usize) -> (f64, f64) {
    let (theta, phi) = erp_to_angles(u, v, width, height);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let e = to_epipole.apply_raw([st * cp, st * sp, ct]);
    let rho = e[0].hypot(e[1]);
    let phi = if rho == 0.0 { 0.0 } else { e[1].atan2(e[0]) };
    (rho.atan2(e[2]), phi)
}

#[inline]
fn cartesian_to_erp(v: [f64; 3], width: usize, height: usize) -> (f64, f64) {
    let rho = v[0].hypot(v[1]);
    let theta = rho.atan2(v[2]);
    let phi = if rho == 0.0 { 0.0 } else { v[1].atan2(v[0]) };
    angles_to_erp(theta, phi, width, height)
}

/// Per-pixel source coordinates of a block under motion `t` around `q`.
pub fn block_mapping(
    block: BlockSpec,
    q: &UnitVector3,
    t: MotionVector2D,
    cfg: &GeodesicModelConfig,
    width: usize,
    height: usize,
) -> Result<BlockMapping, ModelError> {
    BlockGeometry::new(block, q, width, height)?.map(t, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orig(delta: f64) -> GeodesicModelConfig {
        GeodesicModelConfig::original(delta).unwrap()
    }

    #[test]
    fn k_factor_examples() {
        let k = k_factor(PI / 2.0, 1.0, PI / 4.0).unwrap();
        assert!((k.k - 1.0).abs() < 1e-15);
        let k = k_factor(PI / 2.0, 1.0, 0.1).unwrap();
        assert!((k.k - 0.1f64.cos() / 0.1f64.sin()).abs() < 1e-12);
        assert!((k.k - 9.9666).abs() < 1e-4);
        assert_eq!(k_factor(1.0, 0.0, 0.1), Err(ModelError::NoMotion));
        assert!(matches!(k_factor(1.0, 40.0, 0.1), Err(ModelError::Domain(_))));
    }

    #[test]
    fn original_delta_theta_examples() {
        // off-center pixel: arctan(sin 1 / (k − cos 1))
        let k = GeodesicKFactor {
            k: 9.9666,
            direction: 1.0,
        };
        let expected = (1f64.sin() / (9.9666 - 1f64.cos())).atan();
        let got = original_delta_theta(1.0, k);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.0890).abs() < 5e-5);

        // the block center moves by exactly Δ·t_u, in both directions
        for &shift in &[0.1, -0.1, 0.001, -0.3] {
            let k = k_factor(1.3, shift / 0.01, 0.01).unwrap();
            assert!((original_delta_theta(1.3, k) - shift).abs() < 1e-12);
        }
    }

    #[test]
    fn original_map_examples() {
        let cfg = orig(0.01);
        let s = SphericalPoint::new(1.1, 0.4);
        assert_eq!(original_map(s, 1.0, MotionVector2D::ZERO, &cfg).unwrap(), s);

        let m = original_map(s, 1.0, MotionVector2D::new(0.0, 5.0), &cfg).unwrap();
        assert_eq!(m.theta, s.theta);
        assert!((m.phi - (0.4 + 0.05)).abs() < 1e-15);

        let c = SphericalPoint::new(PI / 2.0, 0.0);
        let m = original_map(c, PI / 2.0, MotionVector2D::new(10.0, 0.0), &cfg).unwrap();
        assert!((m.theta - (PI / 2.0 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn delta_z_examples() {
        assert!((delta_z(PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((delta_z(0.01).unwrap() - 0.010_000_333_346_667).abs() < 1e-12);
        assert!(delta_z(1e-9).unwrap() > 0.0);
        assert!(delta_z(FRAC_PI_2).is_err());
        assert!(delta_z(0.0).is_err());
    }

    #[test]
    fn cylinder_radius_examples() {
        assert_eq!(cylinder_radius(Scaling::Global, 0.3).unwrap(), 1.0);
        assert_eq!(cylinder_radius(Scaling::Local, PI / 2.0).unwrap(), 1.0);
        assert!((cylinder_radius(Scaling::Local, PI / 6.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            cylinder_radius(Scaling::Local, 0.0),
            Err(ModelError::DegeneratePole { .. })
        ));
    }

    #[test]
    fn corrected_theta_examples() {
        assert_eq!(corrected_theta(1.0, 0.0, 0.2, 1.0), 1.0);
        // independent evaluation: arccot(x) = π/2 − atan(x) on ℝ
        let x = 1.0 / 1f64.tan() - 0.1;
        let expected = FRAC_PI_2 - x.atan();
        let got = corrected_theta(1.0, 1.0, 0.1, 1.0);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 1.074).abs() < 1e-3);
        let back = corrected_theta(got, -1.0, 0.1, 1.0);
        assert!((back - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corrected_theta_matches_cylinder_route() {
        for &theta in &[0.05, 0.4, 1.2, 2.0, 3.0] {
            for &(shift, r) in &[(0.3, 1.0), (-0.7, 0.5), (2.0, 0.9)] {
                let via_cylinder = CylinderProjection::project(theta, r).shifted(shift).polar_angle();
                let closed = corrected_theta(theta, shift, 1.0, r);
                assert!((via_cylinder - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corrected_map_scalings() {
        let delta = 0.01;
        let gcg = GeodesicModelConfig::corrected(Scaling::Global, delta).unwrap();
        let gcl = GeodesicModelConfig::corrected(Scaling::Local, delta).unwrap();
        let s = SphericalPoint::new(1.3, 0.2);
        let t = MotionVector2D::new(7.0, 0.0);
        assert_eq!(
            corrected_map(s, PI / 2.0, t, &gcg).unwrap(),
            corrected_map(s, PI / 2.0, t, &gcl).unwrap()
        );
        assert_eq!(corrected_map(s, 1.0, MotionVector2D::ZERO, &gcg).unwrap(), s);

        // r = 0.5 at θ_c = π/6 doubles the cotangent shift
        let s = SphericalPoint::new(0.6, 0.0);
        let global = corrected_map(s, PI / 6.0, t, &gcg).unwrap();
        let local = corrected_map(s, PI / 6.0, t, &gcl).unwrap();
        assert!(local.theta - s.theta > global.theta - s.theta);
        assert!(global.theta > s.theta);
    }

    #[test]
    fn corrected_is_monotone_in_theta() {
        let mut prev = 0.0;
        for i in 1..2000 {
            let theta = i as f64 * PI / 2000.0;
            let m = corrected_theta(theta, 3.0, 0.05, 0.7);
            assert!(m > prev, "not increasing at θ = {theta}");
            prev = m;
        }
    }

    #[test]
    fn op_count_table() {
        let o = op_count(ModelVariant::Original, Scaling::Global, 8, 8);
        assert_eq!(o.total(), 389);
        assert_eq!(
            op_count(ModelVariant::GeometryCorrected, Scaling::Global, 8, 8).total(),
            256
        );
        assert_eq!(
            op_count(ModelVariant::GeometryCorrected, Scaling::Local, 8, 8).total(),
            321
        );
        for m in 1..=128 {
            for n in [1, 7, 64, 128] {
                for (v, s) in [
                    (ModelVariant::Original, Scaling::Global),
                    (ModelVariant::GeometryCorrected, Scaling::Global),
                    (ModelVariant::GeometryCorrected, Scaling::Local),
                ] {
                    let c = op_count(v, s, m, n);
                    assert_eq!(c.total(), c.trig + c.mul + c.div + c.add);
                }
            }
        }
    }

    #[test]
    fn instrumented_kernels_match_table() {
        let thetas: Vec<f64> = (0..32).map(|i| 0.9 + i as f64 * 0.01).collect();
        let mut out = vec![0.0; thetas.len()];
        for cfg in [
            orig(0.01),
            GeodesicModelConfig::corrected(Scaling::Global, 0.01).unwrap(),
            GeodesicModelConfig::corrected(Scaling::Local, 0.01).unwrap(),
        ] {
            let mut tally = OpCount::default();
            displace_polar_angles(&cfg, &thetas, 1.05, 3.0, &mut out, &mut tally).unwrap();
            assert_eq!(tally, op_count(cfg.variant, cfg.scaling, 4, 8), "{}", cfg.label());
        }
    }

    #[test]
    fn identity_mapping_for_zero_motion() {
        let q = UnitVector3::normalize(0.3, -0.5, 0.8).unwrap();
        let block = BlockSpec::new(20, 5, 8, 8);
        for cfg in [
            orig(0.05),
            GeodesicModelConfig::corrected(Scaling::Local, 0.05).unwrap(),
        ] {
            let m = block_mapping(block, &q, MotionVector2D::ZERO, &cfg, 64, 32).unwrap();
            for ((u, v), (su, sv)) in block.pixels().zip(&m.coords) {
                assert!((u as f64 - su).abs() < 1e-9 && (v as f64 - sv).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn polar_axis_motion_is_vertical_in_erp() {
        let cfg = GeodesicModelConfig::corrected(Scaling::Global, PI / 32.0).unwrap();
        let block = BlockSpec::new(16, 12, 8, 8);
        for cfg in [cfg, orig(PI / 32.0)] {
            let m = block_mapping(block, &UnitVector3::Z, MotionVector2D::new(0.5, 0.0), &cfg, 64, 32).unwrap();
            for ((u, v), (su, sv)) in block.pixels().zip(&m.coords) {
                assert!((u as f64 - su).abs() < 1e-9);
                assert!(*sv > v as f64);
            }
        }
    }

    #[test]
    fn corrected_block_round_trip() {
        let q = UnitVector3::normalize(0.6, 0.1, 0.4).unwrap();
        let (w, h) = (128, 64);
        let block = BlockSpec::new(40, 10, 8, 8);
        let cfg = GeodesicModelConfig::corrected(Scaling::Global, PI / h as f64).unwrap();
        let geo = BlockGeometry::new(block, &q, w, h).unwrap();
        let fwd = geo.map(MotionVector2D::new(2.5, 0.0), &cfg).unwrap();
        // invert each moved point with −t_u, same r
        let to_e = geo.to_epipole();
        for ((u, v), &(su, sv)) in block.pixels().zip(&fwd.coords) {
            let (theta, phi) = epipole_angles(to_e, su, sv, w, h);
            let back = corrected_map(
                SphericalPoint { theta, phi },
                geo.theta_c(),
                MotionVector2D::new(-2.5, 0.0),
                &cfg,
            )
            .unwrap();
            let st = back.theta.sin();
            let world = to_e
                .transpose()
                .apply_raw([st * back.phi.cos(), st * back.phi.sin(), back.theta.cos()]);
            let (bu, bv) = cartesian_to_erp(world, w, h);
            assert!((bu - u as f64).abs() < 1e-9 && (bv - v as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn map_position_agrees_with_block_kernel() {
        let q = UnitVector3::normalize(-0.2, 0.7, 0.3).unwrap();
        let block = BlockSpec::new(8, 20, 16, 8);
        let t = MotionVector2D::new(-1.75, 0.5);
        for cfg in [
            orig(0.03),
            GeodesicModelConfig::corrected(Scaling::Global, 0.03).unwrap(),
            GeodesicModelConfig::corrected(Scaling::Local, 0.03).unwrap(),
        ] {
            let geo = BlockGeometry::new(block, &q, 96, 48).unwrap();
            let m = geo.map(t, &cfg).unwrap();
            for ((u, v), &(su, sv)) in block.pixels().zip(&m.coords) {
                let (pu, pv) = geo.map_position(u as f64, v as f64, t, &cfg).unwrap();
                let du = (pu - su).abs();
                assert!(du.min(96.0 - du) < 1e-9 && (pv - sv).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn block_out_of_frame_rejected() {
        let err = BlockGeometry::new(BlockSpec::new(60, 0, 8, 8), &UnitVector3::Z, 64, 32);
        assert!(matches!(err, Err(ModelError::BlockOutOfFrame { .. })));
    }
}
