//! Two-sided reflective BSDFs without Dirac components.

use std::f64::consts::PI;

use crate::dual::Real;
use crate::scene::Material;
use crate::vec::{V3, Vec3};

/// Uniform cosine-weighted direction about unit `n`.
pub fn sample_cosine(n: Vec3, u1: f64, u2: f64) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = n.frame();
    (t * (r * phi.cos()) + b * (r * phi.sin()) + n * (1.0 - u1).max(0.0).sqrt()).normalized()
}

fn ggx_d<T: Real>(alpha: f64, cos_h: T) -> T {
    let a2 = alpha * alpha;
    let c2 = cos_h * cos_h;
    let denom = c2 * (a2 - 1.0) + 1.0;
    (denom * denom * PI).recip() * a2
}

fn smith_g1<T: Real>(alpha: f64, cos: T) -> T {
    let a2 = alpha * alpha;
    let c2 = cos * cos;
    (cos * 2.0) / (cos + (c2 * (1.0 - a2) + a2).sqrt())
}

impl Material {
    /// BSDF value for unit directions `wi`, `wo` pointing away from the surface.
    pub fn eval<T: Real>(&self, n: V3<T>, wi: V3<T>, wo: V3<T>) -> T {
        let ci = n.dot(wi);
        let co = n.dot(wo);
        if !(ci.val() * co.val() > 0.0) {
            return T::zero();
        }
        match *self {
            Material::Lambertian { albedo } => T::cst(albedo / PI),
            Material::RoughConductor { alpha, reflectance } => {
                let (ci, co, ns) = if ci.val() < 0.0 { (-ci, -co, -n) } else { (ci, co, n) };
                let h = (wi + wo).normalized();
                let d = ggx_d(alpha, ns.dot(h));
                let g = smith_g1(alpha, ci) * smith_g1(alpha, co);
                let m = T::one() - wi.dot(h);
                let f = m.powi(5) * (1.0 - reflectance) + reflectance;
                d * g * f / (ci * co * 4.0)
            }
        }
    }

    /// Samples an outgoing direction given `wi`; `None` if the sample leaves
    /// the reflection hemisphere.
    pub fn sample(&self, n: Vec3, wi: Vec3, u1: f64, u2: f64) -> Option<Vec3> {
        let ns = if n.dot(wi) < 0.0 { -n } else { n };
        match *self {
            Material::Lambertian { .. } => Some(sample_cosine(ns, u1, u2)),
            Material::RoughConductor { alpha, .. } => {
                let tan2 = alpha * alpha * u1 / (1.0 - u1).max(1e-300);
                let cos_t = 1.0 / (1.0 + tan2).sqrt();
                let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                let phi = 2.0 * PI * u2;
                let (t, b) = ns.frame();
                let h = t * (sin_t * phi.cos()) + b * (sin_t * phi.sin()) + ns * cos_t;
                let wo = h * (2.0 * wi.dot(h)) - wi;
                if ns.dot(wo) <= 0.0 {
                    None
                } else {
                    Some(wo.normalized())
                }
            }
        }
    }

    /// Solid-angle density of `sample`.
    pub fn pdf(&self, n: Vec3, wi: Vec3, wo: Vec3) -> f64 {
        let ci = n.dot(wi);
        let co = n.dot(wo);
        if !(ci * co > 0.0) {
            return 0.0;
        }
        match *self {
            Material::Lambertian { .. } => co.abs() / PI,
            Material::RoughConductor { alpha, .. } => {
                let ns = if ci < 0.0 { -n } else { n };
                let h = (wi + wo).normalized();
                let ch = ns.dot(h);
                ggx_d(alpha, ch) * ch / (4.0 * wo.dot(h).abs())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn materials() -> [Material; 3] {
        [
            Material::Lambertian { albedo: 0.8 },
            Material::RoughConductor { alpha: 0.3, reflectance: 0.9 },
            Material::RoughConductor { alpha: 0.05, reflectance: 1.0 },
        ]
    }

    #[test]
    fn reflectance_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = Vec3::new(0.0, 0.0, 1.0);
        for m in materials() {
            for cos_i in [0.9, 0.5, 0.1] {
                let wi = Vec3::new((1.0 - cos_i * cos_i as f64).sqrt(), 0.0, cos_i);
                let k = 200_000;
                let mut sum = 0.0;
                for _ in 0..k {
                    if let Some(wo) = m.sample(n, wi, rng.gen(), rng.gen()) {
                        let pdf = m.pdf(n, wi, wo);
                        if pdf > 0.0 {
                            sum += m.eval::<f64>(n, wi, wo) * n.dot(wo).abs() / pdf;
                        }
                    }
                }
                let albedo = sum / k as f64;
                assert!(albedo <= 1.0 + 0.01, "{m:?} cos {cos_i}: {albedo}");
            }
        }
    }

    #[test]
    fn pdf_integrates_to_at_most_one() {
        // Stratified quadrature over the sphere.
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wi = Vec3::new(0.6, 0.0, 0.8);
        for m in materials() {
            let (nt, np) = (800, 400);
            let mut total = 0.0;
            for i in 0..nt {
                let z = -1.0 + 2.0 * (i as f64 + 0.5) / nt as f64;
                let r = (1.0 - z * z).sqrt();
                for j in 0..np {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / np as f64;
                    let wo = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                    total += m.pdf(n, wi, wo);
                }
            }
            total *= 4.0 * PI / (nt * np) as f64;
            assert!(total <= 1.0 + 1e-2, "{m:?}: {total}");
            if let Material::Lambertian { .. } = m {
                assert!((total - 1.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn two_sided_and_reciprocal() {
        let n = Vec3::new(0.0, 0.0, 1.0);
        let wi = Vec3::new(0.3, 0.2, 0.9).normalized();
        let wo = Vec3::new(-0.5, 0.1, 0.7).normalized();
        for m in materials() {
            let a = m.eval::<f64>(n, wi, wo);
            assert!((a - m.eval::<f64>(n, wo, wi)).abs() < 1e-12 * a.max(1.0));
            assert!((a - m.eval::<f64>(-n, wi, wo)).abs() < 1e-12 * a.max(1.0));
            let t = Vec3::new(wo.x, wo.y, -wo.z);
            assert_eq!(m.eval::<f64>(n, wi, t), 0.0);
        }
    }
}
