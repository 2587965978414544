//! Dense matrices over a [`Field`] with Gaussian elimination.

use serde::{Deserialize, Serialize};

use crate::field::{Field, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Symbol>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// # Panics
    /// If the rows have unequal lengths.
    pub fn from_rows(field: Field, cols: usize, rows: &[Vec<Symbol>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend_from_slice(r);
        }
        Self {
            field,
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Symbol {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Symbol) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Symbol] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Symbol>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let rows: Vec<Vec<Symbol>> = idx.iter().map(|&r| self.row(r).to_vec()).collect();
        Matrix::from_rows(self.field, self.cols, &rows)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        let rows: Vec<Vec<Symbol>> = (0..self.rows)
            .map(|r| [self.row(r), other.row(r)].concat())
            .collect();
        Matrix::from_rows(self.field, self.cols + other.cols, &rows)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.add(out.get(i, j), f.mul(a, other.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Reduces in place to row echelon form; returns the rank.
    fn eliminate(&mut self, aug: Option<&mut Matrix>) -> usize {
        let f = self.field;
        let mut aug = aug;
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            self.swap_rows(pivot, rank);
            if let Some(a) = aug.as_deref_mut() {
                a.swap_rows(pivot, rank);
            }
            let inv = f.inv(self.get(rank, col)).expect("pivot is nonzero");
            self.scale_row(rank, inv);
            if let Some(a) = aug.as_deref_mut() {
                a.scale_row(rank, inv);
            }
            for r in 0..self.rows {
                let factor = self.get(r, col);
                if r != rank && factor != 0 {
                    self.sub_row(r, rank, factor);
                    if let Some(a) = aug.as_deref_mut() {
                        a.sub_row(r, rank, factor);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, r: usize, s: Symbol) {
        let f = self.field;
        for c in 0..self.cols {
            let v = f.mul(self.get(r, c), s);
            self.set(r, c, v);
        }
    }

    /// row[target] -= factor * row[source]
    fn sub_row(&mut self, target: usize, source: usize, factor: Symbol) {
        let f = self.field;
        for c in 0..self.cols {
            let v = f.sub(self.get(target, c), f.mul(factor, self.get(source, c)));
            self.set(target, c, v);
        }
    }

    pub fn rank(&self) -> usize {
        self.clone().eliminate(None)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let mut work = self.clone();
        let mut inv = Matrix::identity(self.field, self.rows);
        (work.eliminate(Some(&mut inv)) == self.rows).then_some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}
