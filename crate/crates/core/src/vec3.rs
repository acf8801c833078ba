//! Small fixed-size vectors for positions and field gradients.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::scalar::{re, Cplx, Real};

/// Real 3-vector (positions, wavevectors, axes).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    /// Unit vector along coordinate `i`.
    pub fn unit(i: usize) -> Self {
        let mut v = [T::zero(); 3];
        v[i] = T::one();
        Vec3(v)
    }

    pub fn x() -> Self {
        Self::unit(0)
    }

    pub fn y() -> Self {
        Self::unit(1)
    }

    pub fn z() -> Self {
        Self::unit(2)
    }

    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self.scale(T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Embeds as a complex vector with zero imaginary part.
    pub fn to_complex(&self) -> CVec3<T> {
        CVec3([re(self.0[0]), re(self.0[1]), re(self.0[2])])
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// Complex 3-vector, used for gradients of complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3<T>(pub [Cplx<T>; 3]);

impl<T: Real> CVec3<T> {
    pub fn zero() -> Self {
        CVec3([Cplx::new(T::zero(), T::zero()); 3])
    }

    /// Directional derivative `axis . v`.
    pub fn along(&self, axis: &Vec3<T>) -> Cplx<T> {
        self.0[0] * axis.0[0] + self.0[1] * axis.0[1] + self.0[2] * axis.0[2]
    }

    pub fn conj(&self) -> Self {
        CVec3([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    /// Euclidean norm over all three complex components.
    pub fn norm(&self) -> T {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr() + self.0[2].norm_sqr()).sqrt()
    }

    pub fn map(&self, f: impl Fn(Cplx<T>) -> Cplx<T>) -> Self {
        CVec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn zip(&self, o: &Self, f: impl Fn(Cplx<T>, Cplx<T>) -> Cplx<T>) -> Self {
        CVec3([
            f(self.0[0], o.0[0]),
            f(self.0[1], o.0[1]),
            f(self.0[2], o.0[2]),
        ])
    }
}

impl<T: Real> Add for CVec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(&o, |a, b| a + b)
    }
}

impl<T: Real> Sub for CVec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(&o, |a, b| a - b)
    }
}

impl<T: Real> Mul<Cplx<T>> for CVec3<T> {
    type Output = Self;
    fn mul(self, s: Cplx<T>) -> Self {
        self.map(|a| a * s)
    }
}

impl<T> Index<usize> for CVec3<T> {
    type Output = Cplx<T>;
    fn index(&self, i: usize) -> &Cplx<T> {
        &self.0[i]
    }
}
