use num_traits::Float;
use serde::Serialize;

use super::factors::{FactorVector, FACTOR_NAMES};
use crate::error::{Error, Result};

/// Pearson coefficient of paired samples, accumulated in one pass with
/// running co-moments. `None` when either side has zero variance or fewer
/// than two pairs.
pub fn pearson<T: Float>(x: &[T], y: &[T]) -> Option<T> {
    assert_eq!(x.len(), y.len(), "paired samples");
    let (mut n, mut mx, mut my) = (T::zero(), T::zero(), T::zero());
    let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        n = n + T::one();
        let dx = a - mx;
        let dy = b - my;
        mx = mx + dx / n;
        my = my + dy / n;
        sxx = sxx + dx * (a - mx);
        syy = syy + dy * (b - my);
        sxy = sxy + dx * (b - my);
    }
    if x.len() < 2 || sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// Symmetric coefficient matrix; `None` marks undefined entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationMatrix<T> {
    pub names: Vec<String>,
    pub values: Vec<Vec<Option<T>>>,
    pub samples: usize,
}

impl<T: Float> CorrelationMatrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }

    /// Names of factors that never vary.
    pub fn undefined(&self) -> Vec<&str> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| self.values[*i][*i].is_none())
            .map(|(_, n)| n.as_str())
            .collect()
    }
}

/// Correlation of named columns. Missing values are dropped pairwise.
pub fn correlation_of_columns<T: Float>(
    names: &[&str],
    columns: &[Vec<Option<T>>],
) -> Result<CorrelationMatrix<T>> {
    assert_eq!(names.len(), columns.len());
    let rows = columns.first().map_or(0, Vec::len);
    if rows < 3 {
        return Err(Error::Analysis(format!(
            "need at least 3 records, got {rows}"
        )));
    }
    let identical = (1..rows).all(|r| columns.iter().all(|c| c[r] == c[0]));
    if identical {
        return Err(Error::Analysis("all records are identical".into()));
    }
    let k = columns.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let (x, y): (Vec<T>, Vec<T>) = columns[i]
                .iter()
                .zip(&columns[j])
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .unzip();
            let r = if x.len() < 3 {
                None
            } else if i == j {
                pearson(&x, &y).map(|_| T::one())
            } else {
                pearson(&x, &y)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        names: names.iter().map(|s| s.to_string()).collect(),
        values,
        samples: rows,
    })
}

/// Factor-by-factor matrix, accuracy and FLOPs included.
pub fn correlation_matrix(records: &[FactorVector]) -> Result<CorrelationMatrix<f64>> {
    let rows: Vec<_> = records.iter().map(FactorVector::values).collect();
    let columns: Vec<Vec<Option<f64>>> = (0..FACTOR_NAMES.len())
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect();
    correlation_of_columns(&FACTOR_NAMES, &columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_line() {
        let x: Vec<f64> = (0..50).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let x = [1.0f32, 2.0, 3.0, 4.0];
        let y = [2.0f32, 4.1, 5.9, 8.0];
        assert!(pearson(&x, &y).unwrap() > 0.99);
    }

    #[test]
    fn constant_column_is_undefined() {
        let names = ["a", "b", "c"];
        let cols = vec![
            vec![Some(1.0), Some(2.0), Some(3.0)],
            vec![Some(5.0), Some(5.0), Some(5.0)],
            vec![Some(3.0), Some(1.0), Some(2.0)],
        ];
        let m = correlation_of_columns(&names, &cols).unwrap();
        assert_eq!(m.undefined(), ["b"]);
        assert_eq!(m.get("a", "b"), None);
        assert_eq!(m.get("a", "a"), Some(1.0));
    }

    #[test]
    fn rejects_tiny_or_flat_input() {
        let two = vec![vec![Some(1.0), Some(2.0)]];
        assert!(correlation_of_columns(&["a"], &two).is_err());
        let flat = vec![vec![Some(1.0); 4], vec![Some(2.0); 4]];
        assert!(correlation_of_columns(&["a", "b"], &flat).is_err());
    }
}
