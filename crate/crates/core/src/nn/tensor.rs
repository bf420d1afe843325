use alloc::vec;
use alloc::vec::Vec;

use crate::error::dimension;
use crate::Result;

/// Row-major array of `f64`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(dimension(alloc::format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Stacks equal-length rows into a matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Tensor> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(dimension(alloc::format!(
                    "row {i} has width {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Tensor::from_vec(&[rows.len(), cols], data)
    }

    pub fn vector(data: Vec<f64>) -> Tensor {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Rows of a matrix (first dimension); 1 for vectors.
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            0 => 1,
            1 => 1,
            _ => self.shape[0],
        }
    }

    /// Row width of a matrix; the length of a vector.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            0 => 1,
            1 => self.shape[0],
            _ => self.shape[1..].iter().product(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn check_same_shape(&self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(dimension(alloc::format!(
                "shape {:?} vs {:?}",
                self.shape,
                other.shape
            )));
        }
        Ok(())
    }

    /// `self (m×k) · rhs (k×n)`.
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        let (m, k) = (self.rows(), self.cols());
        let n = rhs.cols();
        if rhs.rows() != k {
            return Err(dimension(alloc::format!(
                "matmul {m}x{k} by {}x{n}",
                rhs.rows()
            )));
        }
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (p, &av) in a.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                axpy(av, rhs.row(p), o);
            }
        }
        Ok(out)
    }

    /// `selfᵀ (k×m)ᵀ · rhs (m×n)` without materializing the transpose.
    pub fn t_matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        let (m, k) = (self.rows(), self.cols());
        let n = rhs.cols();
        if rhs.rows() != m {
            return Err(dimension(alloc::format!(
                "t_matmul {m}x{k} with {}x{n}",
                rhs.rows()
            )));
        }
        let mut out = Tensor::zeros(&[k, n]);
        for i in 0..m {
            let b = rhs.row(i);
            for (p, &av) in self.row(i).iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                axpy(av, b, out.row_mut(p));
            }
        }
        Ok(out)
    }

    /// `self (m×n) · rhsᵀ` where `rhs` is `k×n`.
    pub fn matmul_t(&self, rhs: &Tensor) -> Result<Tensor> {
        let (m, n) = (self.rows(), self.cols());
        let k = rhs.rows();
        if rhs.cols() != n {
            return Err(dimension(alloc::format!(
                "matmul_t {m}x{n} with ({k}x{})ᵀ",
                rhs.cols()
            )));
        }
        let mut out = Tensor::zeros(&[m, k]);
        for i in 0..m {
            let a = self.row(i);
            for j in 0..k {
                out.data[i * k + j] = dot(a, rhs.row(j));
            }
        }
        Ok(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `W (out×in) · x` for a matrix stored row-major.
pub(crate) fn matvec(w: &Tensor, x: &[f64]) -> Vec<f64> {
    (0..w.rows()).map(|r| dot(w.row(r), x)).collect()
}

/// `Wᵀ · y` accumulated into `out`.
pub(crate) fn matvec_t_acc(w: &Tensor, y: &[f64], out: &mut [f64]) {
    for (r, &yr) in y.iter().enumerate() {
        if yr != 0.0 {
            axpy(yr, w.row(r), out);
        }
    }
}

/// `G += y xᵀ` for `G` stored row-major with `y.len()` rows.
pub(crate) fn outer_acc(g: &mut Tensor, y: &[f64], x: &[f64]) {
    for (r, &yr) in y.iter().enumerate() {
        if yr != 0.0 {
            axpy(yr, x, g.row_mut(r));
        }
    }
}
