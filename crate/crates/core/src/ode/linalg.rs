//! Dense LU factorisation with partial pivoting for the small Newton
//! systems arising in the implicit stepper (dimension is at most a handful).

pub(super) struct Lu {
    n: usize,
    /// Factors stored in place, row-major.
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Factors `a` (row-major n x n). Returns `None` when a pivot is
    /// numerically zero.
    pub(super) fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), n * n);
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut p = col;
            let mut best = a[col * n + col].abs();
            for row in col + 1..n {
                let v = a[row * n + col].abs();
                if v > best {
                    best = v;
                    p = row;
                }
            }
            if !(best > f64::MIN_POSITIVE) || !best.is_finite() {
                return None;
            }
            if p != col {
                for j in 0..n {
                    a.swap(col * n + j, p * n + j);
                }
                piv.swap(col, p);
            }
            let pivot = a[col * n + col];
            for row in col + 1..n {
                let m = a[row * n + col] / pivot;
                a[row * n + col] = m;
                for j in col + 1..n {
                    a[row * n + j] -= m * a[col * n + j];
                }
            }
        }
        Some(Self { n, a, piv })
    }

    /// Solves `A x = b` in place.
    pub(super) fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let permuted: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 1..n {
            for j in 0..i {
                b[i] -= self.a[i * n + j] * b[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                b[i] -= self.a[i * n + j] * b[j];
            }
            b[i] /= self.a[i * n + i];
        }
    }
}
