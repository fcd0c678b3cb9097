use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

/// Per-point value of a grid field: a fixed number of real components.
pub trait FieldValue: Copy + Send + Sync + 'static {
    const LEN: usize;
    fn zero() -> Self;
    fn comp(&self, i: usize) -> f64;
    fn comp_mut(&mut self, i: usize) -> &mut f64;
}

impl FieldValue for f64 {
    const LEN: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn comp(&self, _i: usize) -> f64 {
        *self
    }
    fn comp_mut(&mut self, _i: usize) -> &mut f64 {
        self
    }
}

macro_rules! impl_nalgebra_field {
    ($t:ty, $n:expr) => {
        impl FieldValue for $t {
            const LEN: usize = $n;
            fn zero() -> Self {
                <$t>::zeros()
            }
            fn comp(&self, i: usize) -> f64 {
                self.as_slice()[i]
            }
            fn comp_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.as_mut_slice()[i]
            }
        }
    };
}

impl_nalgebra_field!(Vector3<f64>, 3);
impl_nalgebra_field!(Vector4<f64>, 4);
impl_nalgebra_field!(Matrix3<f64>, 9);
impl_nalgebra_field!(Matrix4<f64>, 16);

impl<T: FieldValue> FieldValue for [T; 3] {
    const LEN: usize = 3 * T::LEN;
    fn zero() -> Self {
        [T::zero(); 3]
    }
    fn comp(&self, i: usize) -> f64 {
        self[i / T::LEN].comp(i % T::LEN)
    }
    fn comp_mut(&mut self, i: usize) -> &mut f64 {
        self[i / T::LEN].comp_mut(i % T::LEN)
    }
}

/// Flattens a typed field into point-major components.
pub fn flatten<T: FieldValue>(f: &[T]) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len() * T::LEN);
    for v in f {
        for c in 0..T::LEN {
            out.push(v.comp(c));
        }
    }
    out
}

pub fn unflatten<T: FieldValue>(data: &[f64]) -> Vec<T> {
    data.chunks_exact(T::LEN)
        .map(|chunk| {
            let mut v = T::zero();
            for (c, x) in chunk.iter().enumerate() {
                *v.comp_mut(c) = *x;
            }
            v
        })
        .collect()
}
