//! Small planar math helpers: 2-vectors, rotations, and a dense symmetric solver.

use crate::error::{Error, Result};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Planar vector (x forward, z up).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, z: 0.0 };

    pub fn new(x: f64, z: f64) -> Self {
        Vec2 { x, z }
    }

    /// 90° counterclockwise rotation; `omega * perp(r)` is the velocity of a
    /// point at offset `r` on a body spinning at `omega`.
    pub fn perp(self) -> Vec2 {
        Vec2 { x: -self.z, z: self.x }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.z + o.z)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.z += o.z;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.z - o.z)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.z * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

/// Planar rotation by `angle` (counterclockwise, radians).
#[derive(Debug, Clone, Copy)]
pub struct Rot2 {
    cos: f64,
    sin: f64,
}

impl Rot2 {
    pub fn new(angle: f64) -> Self {
        Rot2 { cos: angle.cos(), sin: angle.sin() }
    }

    pub fn apply(self, v: Vec2) -> Vec2 {
        Vec2::new(self.cos * v.x - self.sin * v.z, self.sin * v.x + self.cos * v.z)
    }
}

/// Dense row-major square matrix, sized at runtime.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat {
    n: usize,
    data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        SquareMat { n, data: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(0.0);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Max absolute asymmetry `‖M − Mᵀ‖∞`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for c in (r + 1)..self.n {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Solve `self * x = rhs` in place via Cholesky; requires symmetric
    /// positive definite input. `rhs` is overwritten with the solution.
    pub fn cholesky_solve(&self, rhs: &mut [f64], scratch: &mut Vec<f64>) -> Result<()> {
        let n = self.n;
        debug_assert_eq!(rhs.len(), n);
        scratch.clear();
        scratch.extend_from_slice(&self.data);
        let l = scratch;
        // in-place lower Cholesky factor
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::SimFault(format!(
                    "mass matrix not positive definite (pivot {d:.3e} at {j})"
                )));
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        // forward substitution L y = rhs
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= l[i * n + k] * rhs[k];
            }
            rhs[i] = s / l[i * n + i];
        }
        // back substitution Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * rhs[k];
            }
            rhs[i] = s / l[i * n + i];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perp_rotates_ccw() {
        let v = Vec2::new(1.0, 0.0);
        assert_eq!(v.perp(), Vec2::new(0.0, 1.0));
        assert_eq!(v.perp().perp(), -v);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,2],[2,3]], b = [1, 2] -> x = [-1/8, 3/4]
        let mut a = SquareMat::zeros(2);
        a.set(0, 0, 4.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 3.0);
        let mut rhs = vec![1.0, 2.0];
        let mut scratch = Vec::new();
        a.cholesky_solve(&mut rhs, &mut scratch).unwrap();
        assert!((rhs[0] + 0.125).abs() < 1e-12);
        assert!((rhs[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = SquareMat::zeros(2);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        let mut rhs = vec![1.0, 1.0];
        assert!(a.cholesky_solve(&mut rhs, &mut Vec::new()).is_err());
    }
}
