use std::fmt;

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl fmt::Debug for CsrMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CsrMatrix({}x{}, nnz={})",
            self.nrows,
            self.ncols,
            self.nnz()
        )
    }
}

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Keeps explicit zeros so that sparsity patterns stay predictable.
    pub fn build(mut self) -> CsrMatrix {
        // Stable sort keeps the summation order deterministic.
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0usize; self.nrows + 1];
        let mut col_indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::identity(diag.len());
        m.values.copy_from_slice(diag);
        m
    }

    pub fn from_dense(dense: &nalgebra::DMatrix<f64>) -> Self {
        let mut b = TripletBuilder::new(dense.nrows(), dense.ncols());
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                let v = dense[(i, j)];
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.iter() {
            b.push(j, i, v);
        }
        b.build()
    }

    pub fn scaled(&self, factor: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= factor);
        m
    }

    /// `self + factor * other` over the union pattern.
    pub fn add_scaled(&self, other: &CsrMatrix, factor: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (i, j, v) in self.iter() {
            b.push(i, j, v);
        }
        for (i, j, v) in other.iter() {
            b.push(i, j, factor * v);
        }
        b.build()
    }

    /// Assembles a block matrix; `None` blocks are zero. All blocks in a block
    /// row share a row count, all blocks in a block column a column count.
    pub fn from_blocks(
        blocks: &[Vec<Option<&CsrMatrix>>],
        row_sizes: &[usize],
        col_sizes: &[usize],
    ) -> CsrMatrix {
        let nrows: usize = row_sizes.iter().sum();
        let ncols: usize = col_sizes.iter().sum();
        let mut b = TripletBuilder::new(nrows, ncols);
        let mut row0 = 0;
        for (bi, block_row) in blocks.iter().enumerate() {
            let mut col0 = 0;
            for (bj, block) in block_row.iter().enumerate() {
                if let Some(m) = block {
                    assert_eq!(
                        (m.nrows, m.ncols),
                        (row_sizes[bi], col_sizes[bj]),
                        "block ({bi}, {bj})"
                    );
                    for (i, j, v) in m.iter() {
                        b.push(row0 + i, col0 + j, v);
                    }
                }
                col0 += col_sizes[bj];
            }
            row0 += row_sizes[bi];
        }
        b.build()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            d[(i, j)] = v;
        }
        d
    }

    /// `max |A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Structural check of the CSR invariants.
    pub fn is_well_formed(&self) -> bool {
        self.row_offsets.len() == self.nrows + 1
            && self.row_offsets[0] == 0
            && self.row_offsets.windows(2).all(|w| w[0] <= w[1])
            && *self.row_offsets.last().unwrap() == self.col_indices.len()
            && self.col_indices.len() == self.values.len()
            && (0..self.nrows).all(|i| {
                let (cols, _) = self.row(i);
                cols.windows(2).all(|w| w[0] < w[1]) && cols.iter().all(|&j| j < self.ncols)
            })
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `‖b − A x‖₂`.
pub fn residual_norm(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    ax.iter()
        .zip(b)
        .map(|(p, q)| (q - p) * (q - p))
        .sum::<f64>()
        .sqrt()
}
