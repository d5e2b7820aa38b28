//! Symmetric positive definite banded matrices stored by lower diagonals.

#[derive(Debug, Clone)]
pub struct BandedSpd {
    n: usize,
    bw: usize,
    // band[i * (bw + 1) + k] = A[i][i - k]
    band: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
}

impl BandedSpd {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, band: vec![0.0; n * (bw + 1)] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Entry `A[i][j]` for `|i - j| <= bw`, else zero.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bw {
            0.0
        } else {
            self.band[i * (self.bw + 1) + (i - j)]
        }
    }

    /// Add `v` to `A[i][j]` (and by symmetry `A[j][i]`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        assert!(i - j <= self.bw, "entry outside band");
        self.band[i * (self.bw + 1) + (i - j)] += v;
    }

    pub fn add_diagonal(&mut self, d: &[f64]) {
        for (i, &v) in d.iter().enumerate().take(self.n) {
            self.band[i * (self.bw + 1)] += v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..=i {
                let a = self.band[i * (self.bw + 1) + (i - j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Leading principal `m × m` block.
    pub fn truncated(&self, m: usize) -> Self {
        Self {
            n: m,
            bw: self.bw,
            band: self.band[..m * (self.bw + 1)].to_vec(),
        }
    }

    pub fn cholesky(&self) -> Result<BandedCholesky, NotPositiveDefinite> {
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.band.clone();
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(NotPositiveDefinite { row: i });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandedCholesky { n: self.n, bw, l })
    }
}

/// `A = L D Lᵀ` without pivoting, for symmetric matrices that may be
/// indefinite but have no tiny leading minors.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    // unit lower factor stored like `BandedSpd`, with `d` on the diagonal slot
    l: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot {
    pub row: usize,
}

impl BandedSpd {
    pub fn ldlt(&self) -> Result<BandedLdlt, SingularPivot> {
        let bw = self.bw;
        let w = bw + 1;
        let mut l = self.band.clone();
        let scale = (0..self.n).map(|i| self.band[i * w].abs()).fold(0.0, f64::max);
        for i in 0..self.n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = l[i * w + (i - j)];
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)] * l[k * w];
                }
                if j == i {
                    if !(s.abs() > 1e-14 * scale) {
                        return Err(SingularPivot { row: i });
                    }
                    l[i * w] = s;
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandedLdlt { n: self.n, bw, l })
    }
}

impl BandedLdlt {
    /// Number of negative pivots, which equals the number of negative
    /// eigenvalues.
    pub fn negative_pivots(&self) -> usize {
        (0..self.n).filter(|&i| self.l[i * (self.bw + 1)] < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = b[..self.n].to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s;
        }
        for i in 0..self.n {
            y[i] /= self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s;
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let w = self.bw + 1;
        let mut y = b[..self.n].to_vec();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let mut s = y[i];
            for k in lo..i {
                s -= self.l[i * w + (i - k)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.bw).min(self.n - 1);
            let mut s = y[i];
            for k in i + 1..=hi {
                s -= self.l[k * w + (k - i)] * y[k];
            }
            y[i] = s / self.l[i * w];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_laplacian() {
        let n = 50;
        let mut a = BandedSpd::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let sol = a.cholesky().unwrap().solve(&b);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn wide_band_roundtrip() {
        let n = 30;
        let bw = 4;
        let mut a = BandedSpd::zeros(n, bw);
        for i in 0..n {
            a.add(i, i, 10.0 + i as f64 * 0.1);
            for k in 1..=bw.min(i) {
                a.add(i, i - k, 1.0 / (1.0 + k as f64 + i as f64 * 0.01));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).cos()).collect();
        let sol = a.cholesky().unwrap().solve(&a.mul_vec(&x));
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn ldlt_handles_indefinite() {
        let n = 40;
        let mut a = BandedSpd::zeros(n, 2);
        for i in 0..n {
            a.add(i, i, 2.0 - if i == 7 { 6.0 } else { 0.0 });
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i > 1 {
                a.add(i, i - 2, 0.1);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let f = a.ldlt().unwrap();
        assert_eq!(f.negative_pivots(), 1);
        for (p, q) in f.solve(&a.mul_vec(&x)).iter().zip(&x) {
            assert!((p - q).abs() < 1e-11);
        }
    }

    #[test]
    fn indefinite_is_reported() {
        let mut a = BandedSpd::zeros(2, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 0, 2.0);
        assert_eq!(a.cholesky().unwrap_err(), NotPositiveDefinite { row: 1 });
    }
}
