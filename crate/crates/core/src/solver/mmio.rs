//! MatrixMarket coordinate export.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::CsrMatrix;

pub fn to_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).unwrap();
    for (i, j, v) in a.iter() {
        writeln!(s, "{} {} {:?}", i + 1, j + 1, v).unwrap();
    }
    s
}

pub fn write_matrix_market(a: &CsrMatrix, path: &Path) -> std::io::Result<()> {
    fs::write(path, to_matrix_market(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_entries() {
        let s = to_matrix_market(&CsrMatrix::from_diagonal(&[2.0, 0.5]));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[1], "2 2 2");
        assert_eq!(lines[2], "1 1 2.0");
        assert_eq!(lines[3], "2 2 0.5");
    }
}
