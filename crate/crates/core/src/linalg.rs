//! Small dense helpers on `f64` slices. Dimensions here are tiny (n is
//! rarely above a handful), so plain vectors beat a matrix library.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Qᵀ u`, so that `⟨u, Q x⟩ = ⟨Qᵀ u, x⟩`.
    pub fn transpose_mul_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, ui) in u.iter().enumerate() {
            axpy(&mut out, *ui, self.row(i));
        }
        out
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                for k in col..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
        det
    }

    /// `|det Q| / Π ‖row_i‖`: the determinant scaled by the n-th power of the
    /// geometric mean of the row norms. Lies in [0, 1] (Hadamard).
    pub fn scaled_determinant(&self) -> f64 {
        let mut denom = 1.0;
        for i in 0..self.n {
            let r = norm(self.row(i));
            if r == 0.0 {
                return 0.0;
            }
            denom *= r;
        }
        self.determinant().abs() / denom
    }
}

/// Numerical rank of a list of row vectors, by Gaussian elimination with
/// full pivoting. Entries below `threshold * max(1, max|entry|)` count as zero.
pub fn rank(rows: &[Vec<f64>], threshold: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let cutoff = threshold * scale;
    let mut rank = 0;
    let mut active_cols: Vec<usize> = (0..cols).collect();
    while rank < a.len() && !active_cols.is_empty() {
        let mut best = (rank, active_cols[0], 0.0f64);
        for (r, row) in a.iter().enumerate().skip(rank) {
            for &c in &active_cols {
                if row[c].abs() > best.2 {
                    best = (r, c, row[c].abs());
                }
            }
        }
        if best.2 <= cutoff {
            break;
        }
        let (pr, pc, _) = best;
        a.swap(rank, pr);
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let factor = row[pc] / pivot_row[pc];
            for c in 0..cols {
                row[c] -= factor * pivot_row[c];
            }
        }
        active_cols.retain(|&c| c != pc);
        rank += 1;
    }
    rank
}

/// Orthonormal basis of the complement of `v` (which need not be unit),
/// via Gram–Schmidt over the standard basis. Returns `dim - 1` vectors.
pub fn orthonormal_complement(v: &[f64]) -> Vec<Vec<f64>> {
    let dim = v.len();
    let vn = norm(v);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    basis.push(scaled(v, 1.0 / vn));
    // Feed the standard basis in order of smallest |v_i| first so the
    // first candidates are the least parallel to v.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()));
    for i in order {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let s = dot(&e, b);
                axpy(&mut e, -s, b);
            }
        }
        let en = norm(&e);
        if en > 1e-8 {
            basis.push(scaled(&e, 1.0 / en));
        }
    }
    basis.remove(0);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_matches_hand_computation() {
        let q = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!((q.determinant() - 5.0).abs() < 1e-14);
        let q = Matrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 4.0],
        ])
        .unwrap();
        // expand along row 2: -1 * (2*4 - 1*1) = -7
        assert!((q.determinant() + 7.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_determinant_is_one_for_orthogonal_rows() {
        let q = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -0.5]]).unwrap();
        assert!((q.scaled_determinant() - 1.0).abs() < 1e-15);
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(s.scaled_determinant() < 1e-15);
    }

    #[test]
    fn rank_of_simple_sets() {
        assert_eq!(rank(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-9), 2);
        assert_eq!(rank(&[vec![1.0, 0.0], vec![2.0, 0.0]], 1e-9), 1);
        assert_eq!(rank(&[vec![0.0, 0.0]], 1e-9), 0);
        assert_eq!(
            rank(&[vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0], vec![2.0, 0.0, 0.0]], 1e-9),
            2
        );
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = [0.3, -0.4, 0.5, 0.1];
        let basis = orthonormal_complement(&v);
        assert_eq!(basis.len(), 3);
        for (i, a) in basis.iter().enumerate() {
            assert!(dot(a, &v).abs() < 1e-14);
            for (j, b) in basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-14);
            }
        }
    }
}
