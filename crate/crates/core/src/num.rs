use ndarray::NdFloat;

/// Float type the model is generic over: `f32` for training, `f64` for gradient checks.
pub trait Real: NdFloat {}

impl<T: NdFloat> Real for T {}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from(x).expect("representable constant")
}
