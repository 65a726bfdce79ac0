//! Scalar abstraction shared by the grid and partition code.

use core::fmt::{Debug, Display};
use core::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating point type usable as the sample scalar (`f32` or `f64`).
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + rustfft::FftNum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(x).unwrap()
    }
    fn f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for KahanSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }
}

impl<T: Real> KahanSum<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn ksum<T: Real, I: IntoIterator<Item = T>>(it: I) -> T {
    let mut s = KahanSum::default();
    for x in it {
        s.add(x);
    }
    s.value()
}

/// Compensated sum of complex values.
pub fn ksum_c<T: Real, I: IntoIterator<Item = num_complex::Complex<T>>>(
    it: I,
) -> num_complex::Complex<T> {
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    for z in it {
        re.add(z.re);
        im.add(z.im);
    }
    num_complex::Complex::new(re.value(), im.value())
}
