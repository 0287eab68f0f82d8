use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sparse symmetric contact matrix.
///
/// Off-diagonal entries are stored per row, sorted by column. A slot whose
/// weight has been set to zero (quarantine, death) stays in place so that
/// restoring it does not reorder the row; such slots are not contacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactMatrix {
    diagonal: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl ContactMatrix {
    /// A matrix with no contacts and a constant diagonal.
    pub fn isolated(order: usize, recover: f64) -> Self {
        Self {
            diagonal: vec![recover; order],
            rows: vec![Vec::new(); order],
        }
    }

    /// Builds from a dense square array, checking symmetry and non-negativity.
    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self> {
        let n = dense.len();
        let mut m = Self::isolated(n, 0.0);
        for (i, row) in dense.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::parameter(
                        format!("entries[{i}][{j}]"),
                        "entries must be finite and non-negative",
                    ));
                }
                if w != dense[j][i] {
                    return Err(Error::parameter(
                        format!("entries[{i}][{j}]"),
                        "matrix is not symmetric",
                    ));
                }
                if i == j {
                    m.diagonal[i] = w;
                } else if w > 0.0 {
                    m.rows[i].push((j, w));
                }
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.diagonal[i]
    }

    pub fn set_diagonal(&mut self, i: usize, value: f64) {
        self.diagonal[i] = value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i];
        }
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => 0.0,
        }
    }

    /// Sets the pair `(i, j)` and `(j, i)` to `weight`.
    pub fn set_symmetric(&mut self, i: usize, j: usize, weight: f64) {
        if i == j {
            self.diagonal[i] = weight;
            return;
        }
        Self::set_in_row(&mut self.rows[i], j, weight);
        Self::set_in_row(&mut self.rows[j], i, weight);
    }

    fn set_in_row(row: &mut Vec<(usize, f64)>, col: usize, weight: f64) {
        match row.binary_search_by_key(&col, |&(c, _)| c) {
            Ok(k) => row[k].1 = weight,
            Err(k) if weight != 0.0 => row.insert(k, (col, weight)),
            Err(_) => {}
        }
    }

    /// Stored off-diagonal slots of row `i`, including zeroed ones.
    pub fn row_slots(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Contacts of `i`: columns with a strictly positive off-diagonal weight.
    pub fn contacts(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[i].iter().copied().filter(|&(_, w)| w > 0.0)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.contacts(i).count()
    }

    /// Number of unordered pairs with a positive weight.
    pub fn edge_count(&self) -> usize {
        (0..self.order())
            .map(|i| self.contacts(i).filter(|&(j, _)| j > i).count())
            .sum()
    }

    /// Zeroes every off-diagonal entry in row and column `i`.
    pub fn isolate(&mut self, i: usize) {
        let cols: Vec<usize> = self.rows[i].iter().map(|&(c, _)| c).collect();
        for j in cols {
            self.set_symmetric(i, j, 0.0);
        }
    }

    pub fn scale_off_diagonal(&mut self, factor: f64) {
        for row in &mut self.rows {
            for (_, w) in row.iter_mut() {
                *w *= factor;
            }
        }
    }

    /// Exact product `A x`.
    pub fn propagate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order() {
            return Err(Error::Dimension {
                expected: self.order(),
                actual: x.len(),
            });
        }
        Ok(self
            .rows
            .iter()
            .zip(&self.diagonal)
            .zip(x)
            .map(|((row, &d), &xi)| row.iter().fold(d * xi, |acc, &(j, w)| acc + w * x[j]))
            .collect())
    }

    /// Largest absolute row sum, an upper bound on the growth of the largest
    /// exposure in one round.
    pub fn max_row_sum(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.diagonal)
            .map(|(row, d)| d.abs() + row.iter().map(|(_, w)| w.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.order();
        let mut dense = vec![vec![0.0; n]; n];
        for (i, row) in dense.iter_mut().enumerate() {
            row[i] = self.diagonal[i];
            for &(j, w) in &self.rows[i] {
                row[j] = w;
            }
        }
        dense
    }

    /// Checks that every stored slot has a bit-identical mirror.
    pub fn is_symmetric(&self) -> bool {
        (0..self.order()).all(|i| {
            self.rows[i]
                .iter()
                .all(|&(j, w)| j != i && self.get(j, i).to_bits() == w.to_bits())
        })
    }

    pub fn is_non_negative(&self) -> bool {
        self.diagonal.iter().all(|&d| d >= 0.0)
            && self.rows.iter().flatten().all(|&(_, w)| w >= 0.0)
    }
}
