//! Synthetic dolly sequences rendered by ray casting a textured scene from a
//! translating ERP camera, with exact ground-truth flow and motion direction.
//!
//! The scene is fixed in world space; shapes are aligned with the initial
//! heading (their local `z` axis is `q`). The texture is seeded 3D value
//! noise evaluated at the hit point, so it sticks to the surfaces.

use nalgebra::Vector3;
use rayon::prelude::*;

use super::IoError;
use crate::camera_est::FlowField;
use crate::geometry::{angles_to_erp, erp_to_angles, Rotation3, SphericalPoint, UnitVector3};
use crate::mocomp::{chroma_size, ErpFrame, Plane};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneShape {
    /// Constant spherical depth around the origin.
    Sphere { radius: f64 },
    /// Tube of constant radius around the heading, closed by end caps.
    Cylinder { radius: f64, half_length: f64 },
    /// Box centered at the origin; extents along (x, y, heading).
    Box { half_extents: [f64; 3] },
}

impl SceneShape {
    /// Distance along `d` from an interior point `o` to the surface.
    fn hit(&self, o: &Vector3<f64>, d: &Vector3<f64>) -> Option<f64> {
        match *self {
            SceneShape::Sphere { radius } => {
                let b = o.dot(d);
                let c = o.norm_squared() - radius * radius;
                let disc = b * b - c;
                (c < 0.0 && disc >= 0.0).then(|| -b + disc.sqrt())
            }
            SceneShape::Cylinder { radius, half_length } => {
                let a = d.x * d.x + d.y * d.y;
                let mut t = f64::INFINITY;
                if a > 0.0 {
                    let b = o.x * d.x + o.y * d.y;
                    let c = o.x * o.x + o.y * o.y - radius * radius;
                    t = (-b + (b * b - a * c).max(0.0).sqrt()) / a;
                }
                if d.z != 0.0 {
                    t = t.min((half_length.copysign(d.z) - o.z) / d.z);
                }
                t.is_finite().then_some(t)
            }
            SceneShape::Box { half_extents } => {
                let mut t = f64::INFINITY;
                for i in 0..3 {
                    if d[i] != 0.0 {
                        t = t.min((half_extents[i].copysign(d[i]) - o[i]) / d[i]);
                    }
                }
                t.is_finite().then_some(t)
            }
        }
    }

    fn contains(&self, p: &Vector3<f64>) -> bool {
        match *self {
            SceneShape::Sphere { radius } => p.norm() < radius,
            SceneShape::Cylinder { radius, half_length } => p.x.hypot(p.y) < radius && p.z.abs() < half_length,
            SceneShape::Box { half_extents } => (0..3).all(|i| p[i].abs() < half_extents[i]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub bit_depth: u8,
    pub chroma: bool,
    /// Heading of the first frame pair.
    pub q: UnitVector3,
    /// Camera displacement per frame.
    pub step: f64,
    /// Heading rotation per frame, radians.
    pub drift: f64,
    pub shape: SceneShape,
    pub seed: u64,
    /// Noise lattice cells per world unit at the coarsest octave.
    pub texture_scale: f64,
    /// Samples per pixel side.
    pub supersample: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 128,
            frames: 8,
            bit_depth: 8,
            chroma: false,
            q: UnitVector3::Z,
            step: 0.02,
            drift: 0.0,
            shape: SceneShape::Sphere { radius: 1.0 },
            seed: 1,
            texture_scale: 12.0,
            supersample: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSequence {
    pub frames: Vec<ErpFrame>,
    /// Flow from frame `n` to `n + 1`.
    pub flows: Vec<FlowField>,
    /// Motion direction from frame `n` to `n + 1`.
    pub q: Vec<UnitVector3>,
    pub positions: Vec<Vector3<f64>>,
}

fn hash(ix: i64, iy: i64, iz: i64, seed: u64) -> f64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for v in [ix, iy, iz] {
        h ^= v as u64;
        h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        h ^= h >> 31;
    }
    h = h.wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^= h >> 29;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn value_noise(p: Vector3<f64>, seed: u64) -> f64 {
    let base = p.map(f64::floor);
    let f = p - base;
    let (x, y, z) = (base.x as i64, base.y as i64, base.z as i64);
    let (u, v, w) = (fade(f.x), fade(f.y), fade(f.z));
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let c = |dx, dy, dz| hash(x + dx, y + dy, z + dz, seed);
    let x00 = lerp(c(0, 0, 0), c(1, 0, 0), u);
    let x10 = lerp(c(0, 1, 0), c(1, 1, 0), u);
    let x01 = lerp(c(0, 0, 1), c(1, 0, 1), u);
    let x11 = lerp(c(0, 1, 1), c(1, 1, 1), u);
    lerp(lerp(x00, x10, v), lerp(x01, x11, v), w)
}

/// Three-octave noise stretched to roughly fill `[0, 1]`.
fn texture(p: Vector3<f64>, scale: f64, seed: u64) -> f64 {
    let mut sum = 0.0;
    let mut amp = 1.0;
    let mut freq = scale;
    for octave in 0..3 {
        sum += amp * value_noise(p * freq, seed.wrapping_add(octave));
        amp *= 0.5;
        freq *= 2.0;
    }
    (0.5 + 1.8 * (sum / 1.75 - 0.5)).clamp(0.0, 1.0)
}

struct Scene<'a> {
    spec: &'a SynthSpec,
    /// World → shape frame.
    to_local: Rotation3,
}

impl Scene<'_> {
    fn hit_point(&self, cam: &Vector3<f64>, dir: &Vector3<f64>) -> Vector3<f64> {
        let m = self.to_local.matrix();
        let (o, d) = (m * cam, m * dir);
        let t = self.spec.shape.hit(&o, &d).unwrap_or(0.0);
        cam + dir * t
    }

    fn sample(&self, cam: &Vector3<f64>, u: f64, v: f64, seed: u64) -> f64 {
        let (theta, phi) = erp_to_angles(u, v, self.spec.width, self.spec.height);
        let dir = *SphericalPoint { theta, phi }.to_cartesian().as_vector();
        texture(self.hit_point(cam, &dir), self.spec.texture_scale, seed)
    }

    #[allow(clippy::too_many_arguments)]
    fn render_plane(
        &self,
        cam: &Vector3<f64>,
        w: usize,
        h: usize,
        scale: f64,
        seed: u64,
        offset: f64,
        span: f64,
    ) -> Plane {
        let ss = self.spec.supersample.max(1);
        let max = ((1u32 << self.spec.bit_depth) - 1) as f64;
        let data: Vec<u16> = (0..h)
            .into_par_iter()
            .flat_map_iter(|y| {
                (0..w).map(move |x| {
                    let mut acc = 0.0;
                    for sy in 0..ss {
                        for sx in 0..ss {
                            let ox = (sx as f64 + 0.5) / ss as f64 - 0.5;
                            let oy = (sy as f64 + 0.5) / ss as f64 - 0.5;
                            // plane sample (x, y) covers luma [scale·x, scale·(x + 1))
                            let u = scale * (x as f64 + 0.5 + ox) - 0.5;
                            let v = scale * (y as f64 + 0.5 + oy) - 0.5;
                            acc += self.sample(cam, u, v, seed);
                        }
                    }
                    let n = acc / (ss * ss) as f64;
                    ((offset + span * n) * max).round().clamp(0.0, max) as u16
                })
            })
            .collect();
        Plane {
            width: w,
            height: h,
            data,
        }
    }

    fn render(&self, cam: &Vector3<f64>) -> Result<ErpFrame, IoError> {
        let (w, h) = (self.spec.width, self.spec.height);
        let seed = self.spec.seed.wrapping_mul(16);
        let luma = self.render_plane(cam, w, h, 1.0, seed, 0.06, 0.88);
        let chroma = self.spec.chroma.then(|| {
            let (cw, ch) = chroma_size(w, h);
            [
                self.render_plane(cam, cw, ch, 2.0, seed + 5, 0.3, 0.4),
                self.render_plane(cam, cw, ch, 2.0, seed + 9, 0.3, 0.4),
            ]
        });
        Ok(ErpFrame::new(luma, self.spec.bit_depth, chroma)?)
    }

    fn flow(&self, from: &Vector3<f64>, to: &Vector3<f64>) -> FlowField {
        let (w, h) = (self.spec.width, self.spec.height);
        if from == to {
            // skip the round trip through angles, which is not bit-exact
            return FlowField::zeros(w, h);
        }
        let data = (0..h)
            .into_par_iter()
            .flat_map_iter(|y| {
                (0..w).map(move |x| {
                    let (theta, phi) = erp_to_angles(x as f64, y as f64, w, h);
                    let dir = *SphericalPoint { theta, phi }.to_cartesian().as_vector();
                    let p = self.hit_point(from, &dir);
                    let Ok(s) = UnitVector3::from_vector(p - to) else {
                        return [0.0, 0.0];
                    };
                    let sp = s.to_spherical();
                    let (u2, v2) = angles_to_erp(sp.theta, sp.phi, w, h);
                    let mut du = u2 - x as f64;
                    let half = w as f64 / 2.0;
                    if du > half {
                        du -= w as f64;
                    } else if du < -half {
                        du += w as f64;
                    }
                    [du, v2 - y as f64]
                })
            })
            .collect();
        FlowField {
            width: w,
            height: h,
            data,
        }
    }
}

/// Heading of pair `n`: the initial heading rotated by `n · drift` about a
/// fixed axis perpendicular to it.
fn heading(spec: &SynthSpec, n: usize) -> UnitVector3 {
    if spec.drift == 0.0 {
        return spec.q;
    }
    let qv = spec.q.as_vector();
    let helper = if qv.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let axis = UnitVector3::from_vector(qv.cross(&helper)).expect("helper is not parallel to q");
    Rotation3::about_axis(&axis, spec.drift * n as f64).apply(&spec.q)
}

/// Renders the sequence, its ground-truth flows and motion directions.
pub fn synth_dolly(spec: &SynthSpec) -> Result<SynthSequence, IoError> {
    if spec.width < 2 || spec.height < 2 || spec.frames == 0 {
        return Err(IoError::Invalid(format!(
            "synthetic sequence needs at least 2x2 pixels and one frame, got {}x{}x{}",
            spec.width, spec.height, spec.frames
        )));
    }
    if !(spec.step >= 0.0 && spec.step.is_finite() && spec.texture_scale > 0.0) {
        return Err(IoError::Invalid(
            "step must be non-negative and texture scale positive".into(),
        ));
    }
    let scene = Scene {
        spec,
        to_local: Rotation3::to_epipole(&spec.q),
    };
    let mut positions = vec![Vector3::zeros()];
    let mut q = Vec::with_capacity(spec.frames.saturating_sub(1));
    for n in 0..spec.frames.saturating_sub(1) {
        let h = heading(spec, n);
        positions.push(positions[n] + h.as_vector() * spec.step);
        q.push(h);
    }
    let m = scene.to_local.matrix();
    if let Some(p) = positions.iter().find(|p| !spec.shape.contains(&(m * *p))) {
        return Err(IoError::Invalid(format!(
            "camera leaves the scene at ({:.3}, {:.3}, {:.3})",
            p.x, p.y, p.z
        )));
    }
    let frames = positions
        .iter()
        .map(|c| scene.render(c))
        .collect::<Result<Vec<_>, _>>()?;
    let flows = positions.windows(2).map(|w| scene.flow(&w[0], &w[1])).collect();
    Ok(SynthSequence {
        frames,
        flows,
        q,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small(shape: SceneShape) -> SynthSpec {
        SynthSpec {
            width: 64,
            height: 32,
            frames: 3,
            shape,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn zero_step_gives_static_sequence() {
        let spec = SynthSpec {
            step: 0.0,
            ..small(SceneShape::Sphere { radius: 1.0 })
        };
        let s = synth_dolly(&spec).unwrap();
        assert_eq!(s.frames[0], s.frames[1]);
        assert!(s.flows.iter().all(|f| f.data.iter().all(|d| *d == [0.0, 0.0])));
    }

    #[test]
    fn equator_flow_follows_law_of_sines() {
        let (d, l) = (2.0, 0.05);
        let spec = SynthSpec {
            step: l,
            ..small(SceneShape::Sphere { radius: d })
        };
        let s = synth_dolly(&spec).unwrap();
        let k = d / l;
        for y in [15usize, 16] {
            let theta = PI * (y as f64 + 0.5) / 32.0;
            let dtheta = (theta.sin() / (k - theta.cos())).atan();
            for x in [0usize, 17, 40] {
                let [du, dv] = s.flows[0].at(x, y);
                assert!(du.abs() < 1e-9);
                assert!((dv - dtheta * 32.0 / PI).abs() < 1e-9, "{dv}");
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let spec = SynthSpec {
            chroma: true,
            ..small(SceneShape::Box {
                half_extents: [1.0, 1.5, 4.0],
            })
        };
        let a = synth_dolly(&spec).unwrap();
        assert_eq!(a, synth_dolly(&spec).unwrap());
        let b = synth_dolly(&SynthSpec { seed: 2, ..spec }).unwrap();
        assert_ne!(a.frames[0], b.frames[0]);
        assert!(a.frames[0].chroma.is_some());
    }

    #[test]
    fn flow_matches_rendered_geometry() {
        // the flow target of a pixel sees the same surface point next frame
        let spec = SynthSpec {
            q: UnitVector3::normalize(0.2, 0.1, 1.0).unwrap(),
            step: 0.1,
            drift: 0.01,
            ..small(SceneShape::Cylinder {
                radius: 1.0,
                half_length: 3.0,
            })
        };
        let s = synth_dolly(&spec).unwrap();
        assert!(s.q[0].angle_to(&s.q[1]) > 0.009);
        let scene = Scene {
            spec: &spec,
            to_local: Rotation3::to_epipole(&spec.q),
        };
        for &(x, y) in &[(5usize, 10usize), (30, 20), (50, 7)] {
            let (t, p) = erp_to_angles(x as f64, y as f64, 64, 32);
            let dir = *SphericalPoint { theta: t, phi: p }.to_cartesian().as_vector();
            let hit = scene.hit_point(&s.positions[1], &dir);
            let [du, dv] = s.flows[1].at(x, y);
            let (t2, p2) = erp_to_angles((x as f64 + du).rem_euclid(64.0), y as f64 + dv, 64, 32);
            let dir2 = *SphericalPoint { theta: t2, phi: p2 }.to_cartesian().as_vector();
            let hit2 = scene.hit_point(&s.positions[2], &dir2);
            assert!((hit - hit2).norm() < 1e-9);
        }
    }

    #[test]
    fn camera_must_stay_inside() {
        let spec = SynthSpec {
            step: 0.6,
            ..small(SceneShape::Sphere { radius: 1.0 })
        };
        assert!(matches!(synth_dolly(&spec), Err(IoError::Invalid(_))));
    }
}
