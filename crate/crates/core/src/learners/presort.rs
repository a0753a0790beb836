//! Per-feature sorted position lists, partitioned in place as a tree grows.
//!
//! Positions index a (possibly bootstrapped) sample of rows. Every node owns
//! the same contiguous range `start..end` in each feature's list, so a split
//! costs one stable partition per feature.

use super::Matrix;

pub(crate) struct Presorted<'a> {
    x: &'a Matrix,
    /// Row of `x` behind each position.
    pub row_of: Vec<usize>,
    /// Per feature: positions sorted by feature value, ties by position.
    orders: Vec<Vec<u32>>,
    go_left: Vec<bool>,
    scratch: Vec<u32>,
}

impl<'a> Presorted<'a> {
    pub fn new(x: &'a Matrix, rows: Vec<usize>) -> Self {
        let m = rows.len();
        let orders = (0..x.cols())
            .map(|f| {
                let mut order: Vec<u32> = (0..m as u32).collect();
                order.sort_by(|&a, &b| {
                    x.get(rows[a as usize], f)
                        .total_cmp(&x.get(rows[b as usize], f))
                        .then(a.cmp(&b))
                });
                order
            })
            .collect();
        Self {
            x,
            row_of: rows,
            orders,
            go_left: vec![false; m],
            scratch: Vec::with_capacity(m),
        }
    }

    #[inline]
    pub fn value(&self, pos: u32, feature: usize) -> f64 {
        self.x.get(self.row_of[pos as usize], feature)
    }

    /// Positions of `start..end` sorted by `feature`.
    pub fn sorted(&self, feature: usize, start: usize, end: usize) -> &[u32] {
        &self.orders[feature][start..end]
    }

    /// Positions of `start..end` in some fixed order.
    pub fn members(&self, start: usize, end: usize) -> &[u32] {
        &self.orders[0][start..end]
    }

    /// Partitions `start..end` so rows with `x[feature] <= threshold` come
    /// first; returns the boundary.
    pub fn split(&mut self, start: usize, end: usize, feature: usize, threshold: f64) -> usize {
        let mut n_left = 0;
        for i in start..end {
            let pos = self.orders[0][i];
            let left = self.value(pos, feature) <= threshold;
            self.go_left[pos as usize] = left;
            n_left += usize::from(left);
        }
        for order in &mut self.orders {
            self.scratch.clear();
            let mut w = start;
            for i in start..end {
                let pos = order[i];
                if self.go_left[pos as usize] {
                    order[w] = pos;
                    w += 1;
                } else {
                    self.scratch.push(pos);
                }
            }
            order[w..end].copy_from_slice(&self.scratch);
        }
        start + n_left
    }
}

/// Midpoint threshold between two adjacent distinct values. Falls back to
/// the lower value when the midpoint rounds onto the upper one.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Tie-aware comparison for split scores: a candidate must beat the current
/// best by more than rounding noise, so equal-scoring candidates keep the
/// earlier (lower feature index, lower threshold) winner.
#[inline]
pub(crate) fn improves(candidate: f64, best: f64) -> bool {
    candidate > best + 1e-12 * best.abs().max(1.0)
}
