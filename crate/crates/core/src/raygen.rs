//! The 120 rays of E8 in the triacontagonal coordinatization.
//!
//! Each ray is given by four complex numbers `s * r_k * ω^e` with
//! `ω = exp(iπ/30)`; the eight real coordinates are the real and imaginary
//! parts of those numbers in listing order.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rayset::{RayId, RAY_COUNT};

/// Default cut-off below which `|<i|j>|` counts as orthogonality.
pub const DEFAULT_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct AlgebraicConstants {
    pub omega: Complex64,
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `r[0..8]` hold r1..r8.
    pub r: [f64; 8],
}

impl AlgebraicConstants {
    /// `c_n = ω^n + ω^-n = 2 cos(nπ/30)`.
    pub fn cn(&self, n: i32) -> f64 {
        2.0 * (n as f64 * PI / 30.0).cos()
    }

    /// `3^(-1/2) 5^(-1/4) τ^(3/2)`, the offset in the defining equation for `a`.
    pub fn kappa_plus(&self) -> f64 {
        3f64.powf(-0.5) * 5f64.powf(-0.25) * self.tau.powf(1.5)
    }

    pub fn kappa_minus(&self) -> f64 {
        3f64.powf(-0.5) * 5f64.powf(-0.25) * self.tau.powf(-1.5)
    }
}

pub fn build_constants() -> AlgebraicConstants {
    let tau = (1.0 + 5f64.sqrt()) / 2.0;
    let k = 3f64.powf(-0.5) * 5f64.powf(-0.25);
    let kp = k * tau.powf(1.5);
    let km = k * tau.powf(-1.5);
    let a = ((1.0 + kp) / 2.0).sqrt();
    let b = ((1.0 + km) / 2.0).sqrt();
    let c = ((1.0 - km) / 2.0).sqrt();
    let d = ((1.0 - kp) / 2.0).sqrt();
    let c9 = 2.0 * (9.0 * PI / 30.0).cos();
    let c3 = 2.0 * (3.0 * PI / 30.0).cos();
    AlgebraicConstants {
        omega: Complex64::from_polar(1.0, PI / 30.0),
        tau,
        a,
        b,
        c,
        d,
        r: [
            a / c9,
            b / c9,
            c / c9,
            d / c9,
            a / c3,
            b / c3,
            c / c3,
            d / c3,
        ],
    }
}

/// One complex entry: `sign * r[radius] * ω^(offset + step * n)`.
#[derive(Clone, Copy)]
struct Entry {
    radius: usize,
    sign: f64,
    offset: i32,
    step: i32,
}

const fn e(radius: usize, sign: f64, offset: i32, step: i32) -> Entry {
    Entry {
        radius: radius - 1,
        sign,
        offset,
        step,
    }
}

struct Family {
    /// Ray id is `base + n`.
    base: u8,
    n_range: (i32, i32),
    entries: [Entry; 4],
}

const P: f64 = 1.0;
const M: f64 = -1.0;

const F_A: [Entry; 4] = [
    e(1, P, 0, 2),
    e(4, P, 0, 22),
    e(6, P, 1, 14),
    e(7, P, 1, 26),
];
const F_B: [Entry; 4] = [
    e(4, P, 0, 2),
    e(1, M, 0, 22),
    e(7, P, 1, 14),
    e(6, M, 1, 26),
];
const F_C: [Entry; 4] = [
    e(7, P, 29, 2),
    e(6, M, 19, 22),
    e(1, M, 24, 14),
    e(4, P, 18, 26),
];
const F_D: [Entry; 4] = [
    e(6, P, 29, 2),
    e(7, P, 19, 22),
    e(4, P, 24, 14),
    e(1, P, 18, 26),
];
const F_E: [Entry; 4] = [
    e(8, P, 0, 2),
    e(5, M, 0, 22),
    e(3, M, 1, 14),
    e(2, P, 1, 26),
];
const F_F: [Entry; 4] = [
    e(5, P, 0, 2),
    e(8, P, 0, 22),
    e(2, M, 1, 14),
    e(3, M, 1, 26),
];
const F_G: [Entry; 4] = [
    e(2, P, 29, 2),
    e(3, P, 19, 22),
    e(8, M, 24, 14),
    e(5, M, 18, 26),
];
const F_H: [Entry; 4] = [
    e(3, P, 29, 2),
    e(2, M, 19, 22),
    e(5, P, 24, 14),
    e(8, M, 18, 26),
];

const FAMILIES: [Family; 12] = [
    Family {
        base: 1,
        n_range: (0, 14),
        entries: F_A,
    },
    Family {
        base: 16,
        n_range: (0, 14),
        entries: F_B,
    },
    Family {
        base: 23,
        n_range: (8, 14),
        entries: F_C,
    },
    Family {
        base: 38,
        n_range: (0, 7),
        entries: F_C,
    },
    Family {
        base: 38,
        n_range: (8, 14),
        entries: F_D,
    },
    Family {
        base: 53,
        n_range: (0, 7),
        entries: F_D,
    },
    Family {
        base: 61,
        n_range: (0, 14),
        entries: F_E,
    },
    Family {
        base: 76,
        n_range: (0, 14),
        entries: F_F,
    },
    Family {
        base: 83,
        n_range: (8, 14),
        entries: F_G,
    },
    Family {
        base: 98,
        n_range: (0, 7),
        entries: F_G,
    },
    Family {
        base: 98,
        n_range: (8, 14),
        entries: F_H,
    },
    Family {
        base: 113,
        n_range: (0, 7),
        entries: F_H,
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub id: RayId,
    pub coords: [f64; 8],
}

impl Ray {
    pub fn norm(&self) -> f64 {
        dot(&self.coords, &self.coords).sqrt()
    }
}

#[inline]
pub fn dot(x: &[f64; 8], y: &[f64; 8]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The 120 rays together with their Gram matrix.
#[derive(Debug, Clone)]
pub struct RaySystem {
    pub constants: AlgebraicConstants,
    rays: Vec<Ray>,
    gram: Vec<f64>,
}

pub fn build_rays(consts: AlgebraicConstants) -> RaySystem {
    let mut slots: Vec<Option<[f64; 8]>> = vec![None; RAY_COUNT];
    for fam in &FAMILIES {
        for n in fam.n_range.0..=fam.n_range.1 {
            let id = fam.base as i32 + n;
            let mut coords = [0.0; 8];
            for (k, ent) in fam.entries.iter().enumerate() {
                let phase = (ent.offset + ent.step * n).rem_euclid(60) as f64 * PI / 30.0;
                let z = Complex64::from_polar(ent.sign * consts.r[ent.radius], phase);
                coords[2 * k] = z.re;
                coords[2 * k + 1] = z.im;
            }
            let slot = &mut slots[id as usize - 1];
            assert!(slot.is_none(), "ray {id} defined twice");
            *slot = Some(coords);
        }
    }
    let rays: Vec<Ray> = slots
        .into_iter()
        .enumerate()
        .map(|(i, c)| Ray {
            id: i as RayId + 1,
            coords: c.expect("every ray id is covered by exactly one family"),
        })
        .collect();
    let mut gram = vec![0.0; RAY_COUNT * RAY_COUNT];
    for i in 0..RAY_COUNT {
        for j in i..RAY_COUNT {
            let v = dot(&rays[i].coords, &rays[j].coords);
            gram[i * RAY_COUNT + j] = v;
            gram[j * RAY_COUNT + i] = v;
        }
    }
    RaySystem {
        constants: consts,
        rays,
        gram,
    }
}

impl RaySystem {
    /// Convenience: constants and rays in one call.
    pub fn standard() -> RaySystem {
        build_rays(build_constants())
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn ray(&self, id: RayId) -> Result<&Ray> {
        self.rays
            .get((id as usize).wrapping_sub(1))
            .ok_or(Error::RayOutOfRange(id as u32))
    }

    pub fn coords(&self, id: RayId) -> &[f64; 8] {
        &self.rays[id as usize - 1].coords
    }

    pub fn inner_product(&self, i: RayId, j: RayId) -> Result<f64> {
        for id in [i, j] {
            if !(1..=RAY_COUNT as u8).contains(&id) {
                return Err(Error::RayOutOfRange(id as u32));
            }
        }
        Ok(self.gram(i, j))
    }

    /// Unchecked Gram lookup.
    #[inline]
    pub fn gram(&self, i: RayId, j: RayId) -> f64 {
        self.gram[(i as usize - 1) * RAY_COUNT + j as usize - 1]
    }

    /// Finds the ray `±v` lies on. Returns the ray, the sign and the
    /// distance between `v` and the signed ray vector.
    pub fn nearest_ray(&self, v: &[f64; 8]) -> (RayId, f64, f64) {
        let mut best = (0u8, 1.0, f64::INFINITY);
        for ray in &self.rays {
            let p = dot(v, &ray.coords);
            let sign = if p >= 0.0 { 1.0 } else { -1.0 };
            let dist = v
                .iter()
                .zip(&ray.coords)
                .map(|(a, b)| (a - sign * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if dist < best.2 {
                best = (ray.id, sign, dist);
            }
        }
        best
    }

    /// Writes `id,x1,...,x8` with 17 significant digits.
    pub fn write_rays_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "id,x1,x2,x3,x4,x5,x6,x7,x8")?;
        for ray in &self.rays {
            write!(out, "{}", ray.id)?;
            for c in ray.coords {
                write!(out, ",{c:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_gram_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..RAY_COUNT {
            let row: Vec<String> = self.gram[i * RAY_COUNT..(i + 1) * RAY_COUNT]
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}
