use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ViewError;
use crate::geometry::{Ray, Vec3};

/// Pinhole camera. Pixel `(u, v)` has its center at integer coordinates,
/// `u` to the right and `v` down.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub position: Vec3,
    pub look_at: Vec3,
    pub up: Vec3,
    /// Radians.
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
}

/// Orthonormal camera basis.
#[derive(Clone, Copy, Debug)]
struct Basis {
    forward: Vec3,
    right: Vec3,
    up: Vec3,
    tan_half: f64,
    aspect: f64,
}

impl Camera {
    pub fn new(position: Vec3, look_at: Vec3, up: Vec3, vertical_fov: f64, width: u32, height: u32) -> Result<Camera, ViewError> {
        let cam = Camera {
            position,
            look_at,
            up,
            vertical_fov,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), ViewError> {
        let finite = self.position.iter().chain(self.look_at.iter()).chain(self.up.iter()).all(|c| c.is_finite());
        if !finite {
            return Err(ViewError::Camera("non-finite camera vector".into()));
        }
        let f = self.look_at - self.position;
        if f.norm() == 0.0 {
            return Err(ViewError::Camera("look_at equals position".into()));
        }
        if f.normalize().cross(&self.up).norm() < 1e-9 {
            return Err(ViewError::Camera("up is parallel to the view direction".into()));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < PI) {
            return Err(ViewError::Camera("field of view must be in (0, pi)".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(ViewError::Camera("image size must be positive".into()));
        }
        Ok(())
    }

    fn basis(&self) -> Basis {
        let forward = (self.look_at - self.position).normalize();
        let right = forward.cross(&self.up).normalize();
        Basis {
            forward,
            right,
            up: right.cross(&forward),
            tan_half: (self.vertical_fov / 2.0).tan(),
            aspect: self.width as f64 / self.height as f64,
        }
    }

    /// Ray through image point `(u, v)`; integer values hit pixel centers.
    pub fn pixel_to_ray(&self, u: f64, v: f64) -> Ray {
        let b = self.basis();
        let x = (2.0 * (u + 0.5) / self.width as f64 - 1.0) * b.tan_half * b.aspect;
        let y = (1.0 - 2.0 * (v + 0.5) / self.height as f64) * b.tan_half;
        Ray::new(self.position, b.forward + b.right * x + b.up * y).expect("camera basis is finite")
    }

    /// Image coordinates of `p`, or `None` when `p` is not in front of the
    /// camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let b = self.basis();
        let d = p - self.position;
        let z = d.dot(&b.forward);
        if z <= 0.0 {
            return None;
        }
        let x = d.dot(&b.right) / (z * b.tan_half * b.aspect);
        let y = d.dot(&b.up) / (z * b.tan_half);
        Some((
            (x + 1.0) * self.width as f64 / 2.0 - 0.5,
            (1.0 - y) * self.height as f64 / 2.0 - 0.5,
        ))
    }

    /// True when image point `(u, v)` lies on the image (pixel footprints
    /// extend half a pixel around each center).
    pub fn in_image(&self, u: f64, v: f64) -> bool {
        u >= -0.5 && v >= -0.5 && u < self.width as f64 - 0.5 && v < self.height as f64 - 0.5
    }
}

/// Equirectangular camera: longitude across, latitude down.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanoCamera {
    pub position: Vec3,
    pub width: u32,
    pub height: u32,
}

impl PanoCamera {
    pub fn new(position: Vec3, height: u32) -> PanoCamera {
        PanoCamera {
            position,
            width: 2 * height,
            height,
        }
    }

    /// Longitude and latitude (radians) of pixel `(u, v)`.
    pub fn angles(&self, u: f64, v: f64) -> (f64, f64) {
        let lon = 2.0 * PI * (u + 0.5) / self.width as f64 - PI;
        let lat = PI / 2.0 - PI * (v + 0.5) / self.height as f64;
        (lon, lat)
    }

    pub fn pixel_to_ray(&self, u: f64, v: f64) -> Ray {
        let (lon, lat) = self.angles(u, v);
        let dir = Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin());
        Ray::new(self.position, dir).expect("unit direction")
    }
}
