//! Fixed-width sliding window of recent states and their `E`/`A` images.
//!
//! Columns live in a ring buffer; the storage order is a rotation of the time
//! order. POD is invariant under column permutation, so ROM assembly works on
//! the storage view directly and only [`SnapshotWindow::snapshots`] and
//! friends pay for reordering.

use nalgebra::{DMatrix, DMatrixView, DVector};

use crate::error::{check_dim, Result, RomError};

#[derive(Debug, Clone)]
pub struct SnapshotWindow {
    width: usize,
    count: usize,
    /// slot that receives the next push once the window is full
    head: usize,
    states: DMatrix<f64>,
    e_images: DMatrix<f64>,
    a_images: DMatrix<f64>,
    nonlinear: Option<DMatrix<f64>>,
    /// `S^T S` in storage order; entries of stale slots are refreshed lazily
    gram: DMatrix<f64>,
    gram_fresh: Vec<bool>,
}

impl SnapshotWindow {
    pub fn new(n: usize, width: usize) -> Result<Self> {
        if width == 0 {
            return Err(RomError::Config("window width must be positive".into()));
        }
        Ok(Self {
            width,
            count: 0,
            head: 0,
            states: DMatrix::zeros(n, width),
            e_images: DMatrix::zeros(n, width),
            a_images: DMatrix::zeros(n, width),
            nonlinear: None,
            gram: DMatrix::zeros(width, width),
            gram_fresh: vec![false; width],
        })
    }

    /// Also keeps `f(x)` for every stored state (needed for DEIM).
    pub fn with_nonlinear_snapshots(mut self) -> Self {
        self.nonlinear = Some(DMatrix::zeros(self.states.nrows(), self.width));
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn n(&self) -> usize {
        self.states.nrows()
    }

    pub fn is_full(&self) -> bool {
        self.count == self.width
    }

    pub fn tracks_nonlinear(&self) -> bool {
        self.nonlinear.is_some()
    }

    /// Pushes a state with its images `E x` and `A x`. When full the oldest
    /// column is overwritten.
    pub fn push(&mut self, x: &DVector<f64>, ex: &DVector<f64>, ax: &DVector<f64>) -> Result<()> {
        if self.nonlinear.is_some() {
            return Err(RomError::Config(
                "window tracks nonlinear snapshots; use push_with_nonlinear".into(),
            ));
        }
        self.push_columns(x, ex, ax, None)
    }

    pub fn push_with_nonlinear(
        &mut self,
        x: &DVector<f64>,
        ex: &DVector<f64>,
        ax: &DVector<f64>,
        fx: &DVector<f64>,
    ) -> Result<()> {
        if self.nonlinear.is_none() {
            return Err(RomError::Config("window does not track nonlinear snapshots".into()));
        }
        self.push_columns(x, ex, ax, Some(fx))
    }

    fn push_columns(
        &mut self,
        x: &DVector<f64>,
        ex: &DVector<f64>,
        ax: &DVector<f64>,
        fx: Option<&DVector<f64>>,
    ) -> Result<()> {
        let n = self.n();
        check_dim("window state", n, x.len())?;
        check_dim("window E-image", n, ex.len())?;
        check_dim("window A-image", n, ax.len())?;
        if let Some(fx) = fx {
            check_dim("window f-image", n, fx.len())?;
        }
        let slot = if self.count < self.width {
            self.count
        } else {
            self.head
        };
        self.states.set_column(slot, x);
        self.e_images.set_column(slot, ex);
        self.a_images.set_column(slot, ax);
        if let (Some(store), Some(fx)) = (self.nonlinear.as_mut(), fx) {
            store.set_column(slot, fx);
        }
        self.gram_fresh[slot] = false;
        if self.count < self.width {
            self.count += 1;
        } else {
            self.head = (self.head + 1) % self.width;
        }
        Ok(())
    }

    /// Valid columns in storage order.
    pub fn storage_states(&self) -> DMatrixView<'_, f64> {
        self.states.columns(0, self.count)
    }

    pub fn storage_e_images(&self) -> DMatrixView<'_, f64> {
        self.e_images.columns(0, self.count)
    }

    pub fn storage_a_images(&self) -> DMatrixView<'_, f64> {
        self.a_images.columns(0, self.count)
    }

    pub fn storage_nonlinear(&self) -> Option<DMatrixView<'_, f64>> {
        self.nonlinear.as_ref().map(|m| m.columns(0, self.count))
    }

    /// Gram matrix of [`SnapshotWindow::storage_states`]. Only slots written
    /// since the previous call are recomputed.
    pub fn gram(&mut self) -> DMatrixView<'_, f64> {
        let c = self.count;
        // each stale slot j fills G[0..=j, j]; pairs with a fresh slot above j
        // are filled separately, so every entry is computed once
        for j in 0..c {
            if self.gram_fresh[j] {
                continue;
            }
            let sj = self.states.column(j);
            let col = self.states.columns(0, j + 1).tr_mul(&sj);
            for (i, &v) in col.iter().enumerate() {
                self.gram[(i, j)] = v;
                self.gram[(j, i)] = v;
            }
            for i in j + 1..c {
                if self.gram_fresh[i] {
                    let v = self.states.column(i).dot(&sj);
                    self.gram[(i, j)] = v;
                    self.gram[(j, i)] = v;
                }
            }
        }
        for flag in &mut self.gram_fresh[..c] {
            *flag = true;
        }
        self.gram.view((0, 0), (c, c))
    }

    fn ordered(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let start = if self.count < self.width { 0 } else { self.head };
        DMatrix::from_fn(self.n(), self.count, |i, j| m[(i, (start + j) % self.width)])
    }

    /// `S`, oldest column first.
    pub fn snapshots(&self) -> DMatrix<f64> {
        self.ordered(&self.states)
    }

    /// `S_E = E S`, oldest column first.
    pub fn e_snapshots(&self) -> DMatrix<f64> {
        self.ordered(&self.e_images)
    }

    /// `S_A = A S`, oldest column first.
    pub fn a_snapshots(&self) -> DMatrix<f64> {
        self.ordered(&self.a_images)
    }

    pub fn nonlinear_snapshots(&self) -> Option<DMatrix<f64>> {
        self.nonlinear.as_ref().map(|m| self.ordered(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    fn col(v: f64, n: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| v + i as f64)
    }

    #[test]
    fn first_push() {
        let mut w = SnapshotWindow::new(3, 4).unwrap();
        let x = col(1.0, 3);
        w.push(&x, &x, &x).unwrap();
        assert_eq!(w.count(), 1);
        assert_eq!(w.snapshots(), DMatrix::from_columns(&[x]));
    }

    #[test]
    fn fifo_shift_when_full() {
        let mut w = SnapshotWindow::new(2, 3).unwrap();
        for v in [10.0, 20.0, 30.0, 40.0, 50.0] {
            let x = col(v, 2);
            w.push(&x, &(&x * 2.0), &(&x * 3.0)).unwrap();
        }
        assert!(w.is_full());
        let expect = DMatrix::from_columns(&[col(30.0, 2), col(40.0, 2), col(50.0, 2)]);
        assert_eq!(w.snapshots(), expect);
        assert_eq!(w.e_snapshots(), &expect * 2.0);
        assert_eq!(w.a_snapshots(), &expect * 3.0);
    }

    #[test]
    fn dimension_checks() {
        let mut w = SnapshotWindow::new(3, 2).unwrap();
        let good = col(0.0, 3);
        let bad = col(0.0, 2);
        assert!(w.push(&bad, &good, &good).is_err());
        assert!(w.push(&good, &bad, &good).is_err());
        assert!(w.push(&good, &good, &bad).is_err());
        assert!(w.push_with_nonlinear(&good, &good, &good, &good).is_err());
        assert!(SnapshotWindow::new(3, 0).is_err());
    }

    #[test]
    fn nonlinear_column_follows_states() {
        let mut w = SnapshotWindow::new(2, 2).unwrap().with_nonlinear_snapshots();
        for v in [1.0, 2.0, 3.0] {
            let x = col(v, 2);
            w.push_with_nonlinear(&x, &x, &x, &(-&x)).unwrap();
        }
        assert_eq!(w.nonlinear_snapshots().unwrap(), -w.snapshots());
    }

    #[test]
    fn lazy_gram_matches_direct() {
        let n = 5;
        let mut w = SnapshotWindow::new(n, 3).unwrap();
        for k in 0..8 {
            let x = DVector::from_fn(n, |i, _| ((k * 5 + i * 2) as f64).cos());
            w.push(&x, &x, &x).unwrap();
            if k % 3 != 1 {
                let s = w.storage_states().into_owned();
                let direct = s.transpose() * &s;
                assert!((w.gram().into_owned() - direct).norm() <= 1e-13);
            }
        }
    }

    #[test]
    fn images_stay_consistent() {
        let n = 6;
        let e = CsrMatrix::tridiagonal(&[1.0; 5], &[3.0; 6], &[-1.0; 5]);
        let a = CsrMatrix::tridiagonal(&[0.5; 5], &[1.0; 6], &[0.25; 5]);
        let mut w = SnapshotWindow::new(n, 4).unwrap();
        for k in 0..11 {
            let x = DVector::from_fn(n, |i, _| ((k * 7 + i * 3) as f64).sin());
            w.push(&x, &e.mul_vec(&x).unwrap(), &a.mul_vec(&x).unwrap()).unwrap();
            let s = w.snapshots();
            assert!((e.mul_dense(&s).unwrap() - w.e_snapshots()).norm() <= 1e-14 * s.norm());
            assert!((a.mul_dense(&s).unwrap() - w.a_snapshots()).norm() <= 1e-14 * s.norm());
        }
    }
}
