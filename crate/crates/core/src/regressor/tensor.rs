//! Minimal row-major matrix used by the regressor.

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn vector(n: usize) -> Self {
        Self::zeros(n, 1)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.rows, self.cols)
    }

    /// `W x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.data.chunks_exact(self.cols).map(|row| dot(row, x)).collect()
    }

    /// `W x + b`.
    pub fn affine(&self, x: &[f64], b: &Tensor) -> Vec<f64> {
        let mut y = self.matvec(x);
        add_assign(&mut y, &b.data);
        y
    }

    /// `Wᵀ g`.
    pub fn matvec_t(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, gi) in self.data.chunks_exact(self.cols).zip(g) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += gi * w;
            }
        }
        out
    }

    /// `self += g xᵀ`.
    pub fn add_outer(&mut self, g: &[f64], x: &[f64]) {
        for (row, gi) in self.data.chunks_exact_mut(self.cols).zip(g) {
            for (w, xj) in row.iter_mut().zip(x) {
                *w += gi * xj;
            }
        }
    }

    pub fn add_vec(&mut self, g: &[f64]) {
        add_assign(&mut self.data, g);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add_assign(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
