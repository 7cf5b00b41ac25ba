use num_complex::Complex;

use crate::scalar::Scalar;

/// Row-major dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T: Scalar> {
    pub n: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![Complex::new(T::zero(), T::zero()); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let dst = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.n).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn scale(&mut self, s: Complex<T>) {
        for x in &mut self.data {
            *x = *x * s;
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: Complex<T>) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = *x + *y * s;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn frobenius_sq(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m + x.norm_sqr())
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(T::one())
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}
