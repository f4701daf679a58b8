use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// Dense row-major tensor of up to three dimensions. The universal numeric
/// carrier for states, weights, and batches.
///
/// Values are immutable once a tensor is returned from a public operation;
/// share read-only across threads freely.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S: Scalar> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        assert!(
            !shape.is_empty() && shape.len() <= 3,
            "tensor rank must be 1..=3"
        );
        Tensor {
            shape: shape.to_vec(),
            data: vec![S::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<S>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 {
            return Err(Error::ShapeMismatch(format!(
                "tensor rank must be 1..=3, got {}",
                shape.len()
            )));
        }
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} wants {} values, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Tensor::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = S::one();
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Row count of a 2-D tensor.
    pub fn rows(&self) -> usize {
        debug_assert_eq!(self.ndim(), 2);
        self.shape[0]
    }

    /// Column count of a 2-D tensor.
    pub fn cols(&self) -> usize {
        debug_assert_eq!(self.ndim(), 2);
        self.shape[1]
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        debug_assert_eq!(self.ndim(), 2);
        self.data[i * self.shape[1] + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        debug_assert_eq!(self.ndim(), 2);
        &mut self.data[i * self.shape[1] + j]
    }

    #[inline]
    pub fn at3(&self, i: usize, j: usize, k: usize) -> S {
        debug_assert_eq!(self.ndim(), 3);
        self.data[(i * self.shape[1] + j) * self.shape[2] + k]
    }

    #[inline]
    pub fn at3_mut(&mut self, i: usize, j: usize, k: usize) -> &mut S {
        debug_assert_eq!(self.ndim(), 3);
        &mut self.data[(i * self.shape[1] + j) * self.shape[2] + k]
    }

    pub fn map<F: Fn(S) -> S>(&self, f: F) -> Tensor<S> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&mut self, a: S) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    /// self += alpha * other (matching shapes).
    pub fn axpy(&mut self, alpha: S, other: &Tensor<S>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "axpy: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x += alpha * y;
        }
        Ok(())
    }

    /// Elementwise product, in place.
    pub fn hadamard(&mut self, other: &Tensor<S>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "hadamard: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        for (x, &y) in self.data.iter_mut().zip(&other.data) {
            *x *= y;
        }
        Ok(())
    }

    pub fn frob_norm(&self) -> S {
        self.data.iter().map(|&x| x * x).sum::<S>().sqrt()
    }

    pub fn ensure_finite(&self, ctx: &str) -> Result<()> {
        if self.data.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(ctx.to_string()))
        }
    }

    /// Matrix product of two 2-D tensors.
    pub fn matmul(&self, other: &Tensor<S>) -> Result<Tensor<S>> {
        let mut c = Tensor::zeros(&[self.shape[0], other.shape[1]]);
        gemm_into(&mut c, S::one(), self, false, other, false, S::zero())?;
        Ok(c)
    }
}

/// C <- alpha * op(A) * op(B) + beta * C for 2-D tensors, where `ta`/`tb`
/// transpose via strides (no copy). Summation order is fixed by the kernel's
/// blocking, so results are run-to-run identical for a given shape.
pub fn gemm_into<S: Scalar>(
    c: &mut Tensor<S>,
    alpha: S,
    a: &Tensor<S>,
    ta: bool,
    b: &Tensor<S>,
    tb: bool,
    beta: S,
) -> Result<()> {
    if a.ndim() != 2 || b.ndim() != 2 || c.ndim() != 2 {
        return Err(Error::ShapeMismatch("gemm expects 2-D tensors".into()));
    }
    let (am, ak, rsa, csa) = dims_strides(a, ta);
    let (bk, bn, rsb, csb) = dims_strides(b, tb);
    if ak != bk || c.shape()[0] != am || c.shape()[1] != bn {
        return Err(Error::ShapeMismatch(format!(
            "gemm: ({am}x{ak}) * ({bk}x{bn}) -> {:?}",
            c.shape()
        )));
    }
    let csn = c.shape()[1] as isize;
    S::gemm(
        am,
        ak,
        bn,
        alpha,
        a.data(),
        rsa,
        csa,
        b.data(),
        rsb,
        csb,
        beta,
        c.data_mut(),
        csn,
        1,
    );
    Ok(())
}

fn dims_strides<S: Scalar>(t: &Tensor<S>, transpose: bool) -> (usize, usize, isize, isize) {
    let (r, c) = (t.shape()[0], t.shape()[1]);
    if transpose {
        (c, r, 1, c as isize)
    } else {
        (r, c, c as isize, 1)
    }
}
