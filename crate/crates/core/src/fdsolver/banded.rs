//! Banded LU without pivoting, adequate for the diagonally dominant M-matrices the
//! upwinded implicit scheme produces. Bandwidth one is the Thomas algorithm.

#[derive(Clone, Debug)]
pub struct BandedMatrix {
    n: usize,
    /// Half-bandwidth; entry `(i, j)` lives at `data[i][j + bw - i]` for `|i − j| ≤ bw`.
    bw: usize,
    data: Vec<Vec<f64>>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self { n, bw, data: vec![vec![0.0; 2 * bw + 1]; n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            0.0
        } else {
            self.data[i][j + self.bw - i]
        }
    }

    /// Panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i.abs_diff(j) <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        self.data[i][j + self.bw - i] += v;
    }

    /// Nonzero entries of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = i.saturating_sub(self.bw);
        let hi = (i + self.bw).min(self.n - 1);
        (lo..=hi).map(move |j| (j, self.get(i, j))).filter(|&(_, v)| v != 0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// In-place Doolittle factorization; `None` on a zero pivot.
    pub fn factor(mut self) -> Option<BandedLu> {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let pivot = self.data[k][bw];
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let l = self.data[i][k + bw - i] / pivot;
                if l == 0.0 {
                    continue;
                }
                self.data[i][k + bw - i] = l;
                for j in k + 1..=last {
                    let ukj = self.data[k][j + bw - k];
                    if ukj != 0.0 {
                        self.data[i][j + bw - i] -= l * ukj;
                    }
                }
            }
        }
        Some(BandedLu { m: self })
    }
}

#[derive(Clone, Debug)]
pub struct BandedLu {
    m: BandedMatrix,
}

impl BandedLu {
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.m.n, self.m.bw);
        let d = &self.m.data;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let mut s = b[i];
            for (j, bj) in b.iter().enumerate().take(i).skip(lo) {
                s -= d[i][j + bw - i] * bj;
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + bw).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=hi {
                s -= d[i][j + bw - i] * b[j];
            }
            b[i] = s / d[i][bw];
        }
    }
}
