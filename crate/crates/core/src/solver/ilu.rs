//! Incomplete LU factorization with zero fill-in.

use super::{CsrMatrix, SolverError};

/// `L` (unit diagonal, strictly lower part) and `U` stored in the pattern of
/// the factored matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    factors: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix) -> Result<Self, SolverError> {
        assert_eq!(a.nrows(), a.ncols(), "ILU(0) needs a square matrix");
        let n = a.nrows();
        let mut factors = a.clone();
        let offsets = factors.row_offsets().to_vec();
        let cols = factors.col_indices().to_vec();

        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            if let Ok(k) = cols[offsets[i]..offsets[i + 1]].binary_search(&i) {
                *d = offsets[i] + k;
            } else {
                return Err(SolverError::Breakdown(format!(
                    "row {i} has no diagonal entry"
                )));
            }
        }

        // Scatter map from column to position in the current row.
        let mut position = vec![usize::MAX; n];
        let values = factors.values_mut();
        for i in 0..n {
            let (start, end) = (offsets[i], offsets[i + 1]);
            for k in start..end {
                position[cols[k]] = k;
            }
            for k in start..end {
                let j = cols[k];
                if j >= i {
                    break;
                }
                let pivot = values[diag[j]];
                if pivot == 0.0 {
                    return Err(SolverError::Breakdown(format!("zero pivot in row {j}")));
                }
                let factor = values[k] / pivot;
                values[k] = factor;
                for kk in diag[j] + 1..offsets[j + 1] {
                    let p = position[cols[kk]];
                    if p != usize::MAX {
                        values[p] -= factor * values[kk];
                    }
                }
            }
            for k in start..end {
                position[cols[k]] = usize::MAX;
            }
            if values[diag[i]] == 0.0 {
                return Err(SolverError::Breakdown(format!("zero pivot in row {i}")));
            }
        }
        Ok(Self { factors, diag })
    }

    /// Solves `L U z = r` in place.
    pub fn apply_in_place(&self, z: &mut [f64]) {
        let n = self.diag.len();
        let offsets = self.factors.row_offsets();
        let cols = self.factors.col_indices();
        let vals = self.factors.values();
        for i in 0..n {
            let mut s = z[i];
            for k in offsets[i]..self.diag[i] {
                s -= vals[k] * z[cols[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..offsets[i + 1] {
                s -= vals[k] * z[cols[k]];
            }
            z[i] = s / vals[self.diag[i]];
        }
    }

    pub fn factors(&self) -> &CsrMatrix {
        &self.factors
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::csr::TripletBuilder;

    fn tridiagonal(n: usize) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 4.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -2.0);
            }
        }
        b.build()
    }

    #[test]
    fn exact_for_tridiagonal() {
        // No fill-in occurs, so ILU(0) is the exact LU factorization.
        let a = tridiagonal(12);
        let ilu = Ilu0::factor(&a).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let mut z = a.mul_vec(&x);
        ilu.apply_in_place(&mut z);
        for (zi, xi) in z.iter().zip(&x) {
            assert!((zi - xi).abs() < 1e-13);
        }
    }

    #[test]
    fn keeps_pattern() {
        let a = tridiagonal(7);
        let ilu = Ilu0::factor(&a).unwrap();
        assert_eq!(ilu.factors().row_offsets(), a.row_offsets());
        assert_eq!(ilu.factors().col_indices(), a.col_indices());
    }

    #[test]
    fn zero_pivot_is_a_breakdown() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 0.0);
        b.push(0, 1, 1.0);
        b.push(1, 0, 1.0);
        b.push(1, 1, 0.0);
        assert!(matches!(
            Ilu0::factor(&b.build()),
            Err(SolverError::Breakdown(_))
        ));
    }
}
