//! Limiting joint degree probabilities by iterating the defining recursion.
//!
//! Each probability satisfies
//!
//! ```text
//! p[i][j] = ( c1 (i-1+din) p[i-1][j] + c2 (j-1+dout) p[i][j-1]
//!             + wa·1(i=0, j=1) + wg·1(i=1, j=0) )
//!           / ( 1 + c1 (i+din) + c2 (j+dout) )
//! ```
//!
//! with `wa = alpha/(alpha+gamma)`, `wg = gamma/(alpha+gamma)` and `p` zero
//! at negative indices, so a single row-major sweep fills any rectangle.
//! Every cell has a nonnegative numerator and a positive denominator, hence
//! the whole grid is nonnegative, and `p[0][0] = 0` falls out of the source
//! terms. Cells depend only on their west and north neighbors, so values are
//! independent of traversal order among valid orders.

use crate::params::ModelParams;
use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid too small: need i_max >= 1 and j_max >= 1, got ({i_max}, {j_max})")]
    TooSmall { i_max: usize, j_max: usize },
    #[error("non-finite probability at cell ({i}, {j})")]
    NonFinite { i: usize, j: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("fit window [{lo}, {hi}] is invalid for a marginal of length {len}")]
    Window { lo: usize, hi: usize, len: usize },
    #[error("marginal is not strictly positive at index {index}")]
    NonPositive { index: usize },
}

/// Which marginal of the joint law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// In-degree marginal, p_i = Σ_j p_ij (row sums).
    In,
    /// Out-degree marginal, p_j = Σ_i p_ij (column sums).
    Out,
}

/// Dense grid of limiting probabilities on `[0..=i_max] x [0..=j_max]`.
#[derive(Debug, Clone)]
pub struct DegreeGrid<T> {
    params: ModelParams<T>,
    i_max: usize,
    j_max: usize,
    /// Row-major: `values[i * (j_max + 1) + j]`.
    values: Vec<T>,
    captured_mass: T,
}

impl<T: Real> DegreeGrid<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * (self.j_max + 1) + j]
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// Total probability captured by the rectangle; the remainder is
    /// truncation loss, never negative mass.
    pub fn captured_mass(&self) -> T {
        self.captured_mass
    }

    pub fn params(&self) -> &ModelParams<T> {
        self.params_ref()
    }

    fn params_ref(&self) -> &ModelParams<T> {
        &self.params
    }

    /// Iterates cells in row-major order as `(i, j, p_ij)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let width = self.j_max + 1;
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (idx / width, idx % width, v))
    }
}

/// Recursion coefficients in "stream rows, keep columns" orientation.
struct Coeffs<T> {
    row_c: T,     // multiplies the (i-1, j) term
    col_c: T,     // multiplies the (i, j-1) term
    row_off: T,   // degree offset on the streamed axis
    col_off: T,   // degree offset on the kept axis
    src_01: T,    // source at (stream 0, keep 1)
    src_10: T,    // source at (stream 1, keep 0)
}

impl<T: Real> Coeffs<T> {
    fn in_orientation(params: &ModelParams<T>) -> Self {
        let d = params.derive();
        Coeffs {
            row_c: d.c1,
            col_c: d.c2,
            row_off: params.delta_in,
            col_off: params.delta_out,
            src_01: params.alpha_branch_weight(),
            src_10: params.gamma_branch_weight(),
        }
    }

    /// Transposed roles: swapping (i, c1, delta_in, wa) with (j, c2,
    /// delta_out, wg) leaves the recursion invariant.
    fn out_orientation(params: &ModelParams<T>) -> Self {
        let d = params.derive();
        Coeffs {
            row_c: d.c2,
            col_c: d.c1,
            row_off: params.delta_out,
            col_off: params.delta_in,
            src_01: params.gamma_branch_weight(),
            src_10: params.alpha_branch_weight(),
        }
    }

    /// One row of the recursion; `prev` is row `r - 1`, result is row `r`.
    fn fill_row(&self, r: usize, prev: &[T], row: &mut [T]) {
        let one = T::one();
        let rr = T::of_usize(r);
        let row_carry = if r > 0 {
            self.row_c * (rr - one + self.row_off)
        } else {
            T::zero()
        };
        let den_row = one + self.row_c * (rr + self.row_off);
        for k in 0..row.len() {
            let kk = T::of_usize(k);
            let mut num = T::zero();
            if r > 0 {
                num += row_carry * prev[k];
            }
            if k > 0 {
                num += self.col_c * (kk - one + self.col_off) * row[k - 1];
            }
            if r == 0 && k == 1 {
                num += self.src_01;
            }
            if r == 1 && k == 0 {
                num += self.src_10;
            }
            row[k] = num / (den_row + self.col_c * (kk + self.col_off));
        }
    }
}

/// Solves the recursion on `[0..=i_max] x [0..=j_max]`.
pub fn solve_grid<T: Real>(
    params: &ModelParams<T>,
    i_max: usize,
    j_max: usize,
) -> Result<DegreeGrid<T>, GridError> {
    if i_max < 1 || j_max < 1 {
        return Err(GridError::TooSmall { i_max, j_max });
    }
    let width = j_max + 1;
    let co = Coeffs::in_orientation(params);
    let mut values = vec![T::zero(); (i_max + 1) * width];
    let empty = vec![T::zero(); width];
    for i in 0..=i_max {
        let (before, rest) = values.split_at_mut(i * width);
        let prev: &[T] = if i > 0 {
            &before[(i - 1) * width..]
        } else {
            &empty
        };
        let row = &mut rest[..width];
        co.fill_row(i, prev, row);
    }
    let mut mass = T::zero();
    for (idx, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(GridError::NonFinite {
                i: idx / width,
                j: idx % width,
            });
        }
        mass += *v;
    }
    Ok(DegreeGrid {
        params: *params,
        i_max,
        j_max,
        values,
        captured_mass: mass,
    })
}

/// Row/column sums of a solved grid. The true marginal dominates the grid
/// marginal: what sits beyond the rectangle is simply missing, so expect a
/// downward truncation bias that grows along the kept axis (severely so for
/// the out-marginal when `a < 1`; see [`marginal_streamed`]).
pub fn marginal<T: Real>(grid: &DegreeGrid<T>, axis: Axis) -> Vec<T> {
    match axis {
        Axis::In => (0..=grid.i_max)
            .map(|i| (0..=grid.j_max).fold(T::zero(), |s, j| s + grid.get(i, j)))
            .collect(),
        Axis::Out => (0..=grid.j_max)
            .map(|j| (0..=grid.i_max).fold(T::zero(), |s, i| s + grid.get(i, j)))
            .collect(),
    }
}

/// Marginal of a (possibly very wide) rectangle without storing the grid:
/// streams the recursion over the summed-out axis two rows at a time and
/// accumulates the sums for `0..=keep_max` along `axis`. Equivalent to
/// `marginal(&solve_grid(params, ..)?, axis)` on the same rectangle, but the
/// summed-out axis can run to millions of cells, which is what the
/// out-marginal needs before its tail is trustworthy.
///
/// Returns the marginal and the captured mass of the rectangle.
pub fn marginal_streamed<T: Real>(
    params: &ModelParams<T>,
    axis: Axis,
    keep_max: usize,
    cross_max: usize,
) -> Result<(Vec<T>, T), GridError> {
    if keep_max < 1 || cross_max < 1 {
        return Err(GridError::TooSmall {
            i_max: cross_max,
            j_max: keep_max,
        });
    }
    let co = match axis {
        Axis::In => Coeffs::out_orientation(params), // stream j, keep i
        Axis::Out => Coeffs::in_orientation(params), // stream i, keep j
    };
    let width = keep_max + 1;
    let mut prev = vec![T::zero(); width];
    let mut row = vec![T::zero(); width];
    let mut sums = vec![T::zero(); width];
    let mut mass = T::zero();
    for r in 0..=cross_max {
        co.fill_row(r, &prev, &mut row);
        for k in 0..width {
            let v = row[k];
            if !v.is_finite() {
                return Err(match axis {
                    Axis::In => GridError::NonFinite { i: k, j: r },
                    Axis::Out => GridError::NonFinite { i: r, j: k },
                });
            }
            sums[k] += v;
            mass += v;
        }
        std::mem::swap(&mut prev, &mut row);
    }
    Ok((sums, mass))
}

/// Least-squares slope of `log p_k` against `log k` over `k` in
/// `[lo, hi]`; estimates the negated tail exponent.
pub fn tail_index_fit<T: Real>(marginal: &[T], lo: usize, hi: usize) -> Result<T, FitError> {
    if lo < 1 || hi <= lo || hi >= marginal.len() {
        return Err(FitError::Window {
            lo,
            hi,
            len: marginal.len(),
        });
    }
    for (index, &p) in marginal.iter().enumerate().take(hi + 1).skip(lo) {
        if p <= T::zero() {
            return Err(FitError::NonPositive { index });
        }
    }
    let n = T::of_usize(hi - lo + 1);
    let mut sx = T::zero();
    let mut sy = T::zero();
    for k in lo..=hi {
        sx += T::of_usize(k).ln();
        sy += marginal[k].ln();
    }
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for k in lo..=hi {
        let dx = T::of_usize(k).ln() - mx;
        let dy = marginal[k].ln() - my;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    Ok(sxy / sxx)
}

/// Residual of the implicit recursion at one cell: right side minus left
/// side before the explicit rearrangement. A correctly solved grid keeps
/// this at rounding level relative to the participating terms.
pub fn residual_at<T: Real>(grid: &DegreeGrid<T>, i: usize, j: usize) -> T {
    let p = grid.params_ref();
    let d = p.derive();
    let one = T::one();
    let ii = T::of_usize(i);
    let jj = T::of_usize(j);
    let up = if i > 0 { grid.get(i - 1, j) } else { T::zero() };
    let left = if j > 0 { grid.get(i, j - 1) } else { T::zero() };
    let mut rhs = d.c1 * (ii - one + p.delta_in) * up - d.c1 * (ii + p.delta_in) * grid.get(i, j)
        + d.c2 * (jj - one + p.delta_out) * left
        - d.c2 * (jj + p.delta_out) * grid.get(i, j);
    if i == 0 && j == 1 {
        rhs += p.alpha_branch_weight();
    }
    if i == 1 && j == 0 {
        rhs += p.gamma_branch_weight();
    }
    rhs - grid.get(i, j)
}
