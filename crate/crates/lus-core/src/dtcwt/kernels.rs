//! Low-level separable filtering kernels shared by the wavelet transforms.
//!
//! All kernels operate along columns (axis 0) of a row-major matrix; row
//! filtering goes through `transpose`. Boundary handling is symmetric
//! reflection: `reflect` repeats edge samples (half-sample symmetry, used by
//! the dual-tree kernels), `wreflect` does not (whole-sample symmetry, used
//! by the decimated DWT).

/// Minimal row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// Appends a copy of the last row.
    pub fn extend_bottom(&self) -> Mat {
        let mut data = self.data.clone();
        data.extend_from_slice(self.row(self.rows - 1));
        Mat::from_vec(self.rows + 1, self.cols, data)
    }

    /// Prepends a copy of the first row and appends a copy of the last.
    pub fn extend_both(&self) -> Mat {
        let mut data = Vec::with_capacity((self.rows + 2) * self.cols);
        data.extend_from_slice(self.row(0));
        data.extend_from_slice(&self.data);
        data.extend_from_slice(self.row(self.rows - 1));
        Mat::from_vec(self.rows + 2, self.cols, data)
    }

    /// Drops the first and last row.
    pub fn trim_both(&self) -> Mat {
        Mat::from_vec(
            self.rows - 2,
            self.cols,
            self.data[self.cols..(self.rows - 1) * self.cols].to_vec(),
        )
    }

    /// Appends a copy of the last column.
    pub fn extend_right(&self) -> Mat {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.push(self.at(r, self.cols - 1));
        }
        Mat::from_vec(self.rows, self.cols + 1, data)
    }

    /// Prepends a copy of the first column and appends a copy of the last.
    pub fn extend_cols_both(&self) -> Mat {
        let mut data = Vec::with_capacity(self.rows * (self.cols + 2));
        for r in 0..self.rows {
            data.push(self.at(r, 0));
            data.extend_from_slice(self.row(r));
            data.push(self.at(r, self.cols - 1));
        }
        Mat::from_vec(self.rows, self.cols + 2, data)
    }

    /// Drops the first and last column.
    pub fn trim_cols_both(&self) -> Mat {
        let mut data = Vec::with_capacity(self.rows * (self.cols - 2));
        for r in 0..self.rows {
            data.extend_from_slice(&self.row(r)[1..self.cols - 1]);
        }
        Mat::from_vec(self.rows, self.cols - 2, data)
    }
}

/// Symmetric reflection with repeated edge samples (period `2n`).
#[inline]
pub(crate) fn reflect(p: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let mut m = p.rem_euclid(period);
    if m >= n as i64 {
        m = period - 1 - m;
    }
    m as usize
}

/// Symmetric reflection without edge repetition (period `2n - 2`).
#[inline]
pub(crate) fn wreflect(p: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64) - 2;
    let mut m = p.rem_euclid(period);
    if m >= n as i64 {
        m = period - m;
    }
    m as usize
}

/// Non-decimating column filter with an odd-length, center-aligned kernel.
pub(crate) fn colfilter(x: &Mat, h: &[f64]) -> Mat {
    debug_assert!(h.len() % 2 == 1);
    let half = (h.len() / 2) as i64;
    let mut out = Mat::zeros(x.rows, x.cols);
    for i in 0..x.rows as i64 {
        let dst_start = (i as usize) * x.cols;
        for (k, &hk) in h.iter().enumerate() {
            let src = reflect(i + half - k as i64, x.rows);
            let src_row = x.row(src);
            let dst = &mut out.data[dst_start..dst_start + x.cols];
            for (d, &s) in dst.iter_mut().zip(src_row) {
                *d += hk * s;
            }
        }
    }
    out
}

/// Dual-tree decimating column filter. `ha` runs on even-phase samples, `hb`
/// on odd-phase samples; outputs interleave into half the rows. The input
/// row count must be a multiple of 4 and the filters even-length.
pub(crate) fn coldfilt(x: &Mat, ha: &[f64], hb: &[f64]) -> Mat {
    assert_eq!(x.rows % 4, 0, "coldfilt input rows must be a multiple of 4");
    assert_eq!(ha.len(), hb.len());
    assert_eq!(ha.len() % 2, 0);
    let m = ha.len() as i64;
    let r = x.rows;
    let mut out = Mat::zeros(r / 2, x.cols);
    let a_first = ha.iter().zip(hb).map(|(a, b)| a * b).sum::<f64>() > 0.0;
    for i in 0..(r / 4) as i64 {
        let (row_a, row_b) = if a_first {
            (2 * i as usize, 2 * i as usize + 1)
        } else {
            (2 * i as usize + 1, 2 * i as usize)
        };
        for j in 0..m {
            let src_a = reflect(4 * i + m - 2 * j, r);
            let src_b = reflect(4 * i + m + 1 - 2 * j, r);
            let (haj, hbj) = (ha[j as usize], hb[j as usize]);
            {
                let start = row_a * x.cols;
                let src = x.row(src_a);
                let dst = &mut out.data[start..start + x.cols];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += haj * s;
                }
            }
            {
                let start = row_b * x.cols;
                let src = x.row(src_b);
                let dst = &mut out.data[start..start + x.cols];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += hbj * s;
                }
            }
        }
    }
    out
}

/// Dual-tree interpolating column filter, the inverse counterpart of
/// [`coldfilt`]: doubles the row count.
pub(crate) fn colifilt(x: &Mat, ha: &[f64], hb: &[f64]) -> Mat {
    assert_eq!(x.rows % 2, 0, "colifilt input rows must be even");
    assert_eq!(ha.len(), hb.len());
    assert_eq!(ha.len() % 2, 0);
    let m = ha.len() as i64;
    let m2 = m / 2;
    let r = x.rows;
    let mut out = Mat::zeros(2 * r, x.cols);
    let a_first = ha.iter().zip(hb).map(|(a, b)| a * b).sum::<f64>() > 0.0;
    // Per 4-phase output block, each tap contributes from a reflected input
    // row; offsets depend on tap parity and the m/2 parity.
    let offs = |k: i64| -> [i64; 4] {
        let k_even = k % 2 == 0;
        let group_a = if m2 % 2 == 1 { k_even } else { !k_even };
        match (group_a, a_first) {
            // rows 4i (ha) and 4i+1 (hb)
            (true, true) => [m2 - 1 - k, m2 - k, i64::MIN, i64::MIN],
            (true, false) => [m2 - k, m2 - 1 - k, i64::MIN, i64::MIN],
            // rows 4i+2 (ha) and 4i+3 (hb)
            (false, true) => [i64::MIN, i64::MIN, m2 - k, m2 + 1 - k],
            (false, false) => [i64::MIN, i64::MIN, m2 + 1 - k, m2 - k],
        }
    };
    for i in 0..(r / 2) as i64 {
        for k in 0..m {
            let table = offs(k);
            for (phase, &off) in table.iter().enumerate() {
                if off == i64::MIN {
                    continue;
                }
                let coef = if phase % 2 == 0 {
                    ha[k as usize]
                } else {
                    hb[k as usize]
                };
                let src = reflect(2 * i + off, r);
                let dst_row = (4 * i) as usize + phase;
                let start = dst_row * x.cols;
                let src_row = x.row(src);
                let dst = &mut out.data[start..start + x.cols];
                for (d, &s) in dst.iter_mut().zip(src_row) {
                    *d += coef * s;
                }
            }
        }
    }
    out
}

pub(crate) fn rowfilter(x: &Mat, h: &[f64]) -> Mat {
    colfilter(&x.transpose(), h).transpose()
}

pub(crate) fn rowdfilt(x: &Mat, ha: &[f64], hb: &[f64]) -> Mat {
    coldfilt(&x.transpose(), ha, hb).transpose()
}

pub(crate) fn rowifilt(x: &Mat, ha: &[f64], hb: &[f64]) -> Mat {
    colifilt(&x.transpose(), ha, hb).transpose()
}
