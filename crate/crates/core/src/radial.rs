//! Radial confinement of a flat-space particle onto the unit shell.
//!
//! A particle in `R^D` with a steep well around `|x| = 1` separates in
//! polar coordinates: writing the wavefunction as `f(r)` times a harmonic
//! on the sphere and substituting `g = r^{(D-1)/2} f` leaves a
//! one-dimensional problem
//!
//! ```text
//!     -g'' + [ V(r) + b(l, D) / r^2 ] g = E g,
//! ```
//!
//! with the centrifugal strength `b(l, D) = (D^2 - 4D + 3 + 4 l (l+D-2)) / 4`
//! collecting both the angular eigenvalue and the measure factor.  For the
//! harmonic well `V = V_0 + 2k (r-1)^2` the low spectrum is a ladder of
//! shell states: expanding the centrifugal term to second order around
//! `r = 1` stiffens the well to `k_l = 2k + 3 b` and pushes its minimum to
//! `r~_l = 1 + b / (3b + 2k)`, giving
//!
//! ```text
//!     E_{n,l} = (2n+1) sqrt(k_l) + V_0 + 2 b (k + b) / (3b + 2k),
//! ```
//!
//! which to leading order in `1/k` is `l(l+D-2) + 2n sqrt(2k)`: the angular
//! spectrum, plus radial excitations separated by a gap of order `sqrt(k)`.
//! The offset `V_0 = -sqrt(2k) - b(0,D) - 3 b(0,D) / (2 sqrt(2k))` places
//! the bottom of the ladder at zero up to `O(1/k)` terms (exactly, when
//! `b(0, D) = 0`, i.e. at `D = 3`).
//!
//! Everything here is checked against an independent finite-difference
//! oracle that keeps the centrifugal term exact and only truncates the well
//! to its harmonic part.  A coupling of size `k_default = [L(L+D-2)]^2`
//! keeps every angular level up to the cutoff `L` below the first radial
//! excitation; `cutoff_check` measures the margin.

use crate::basis::casimir_eigenvalue;
use crate::error::{Error, Result};
use crate::linalg::{tridiagonal_eigenvector, tridiagonal_lowest_eigenvalues};
use crate::special::hermite;
use serde::Serialize;

/// Left endpoint of the oracle grid; Dirichlet data stands in for the
/// regularity condition at the origin, where shell states are
/// exponentially negligible anyway.
const ORACLE_LEFT: f64 = 1e-4;
/// Right endpoint of the oracle grid.
const ORACLE_RIGHT: f64 = 3.0;
/// Interior points at the base oracle resolution; every eigenvalue is
/// re-solved at twice this and gated on the change.
const ORACLE_POINTS: usize = 10_000;
/// Grid-doubling gate, relative to the shell scale `sqrt(k_l)`.
const ORACLE_GATE: f64 = 5e-3;
/// Fewest grid points accepted for a closed-form profile.
const PROFILE_MIN_POINTS: usize = 2000;
/// Half-width of the profile window in units of the shell width
/// `k_l^{-1/4}`; the Gaussian tail is below 1e-13 of the peak there.
const PROFILE_SIGMAS: f64 = 8.0;

/// Centrifugal strength of the reduced radial problem at angular level
/// `l` on the sphere `S^{dim-1}` in `R^dim`.
#[must_use]
pub fn b_coefficient(l: usize, dim: usize) -> f64 {
    let d = dim as f64;
    let la = l as f64;
    (d * d - 4.0 * d + 3.0 + 4.0 * la * (la + d - 2.0)) / 4.0
}

/// Curvature `k_l = 2k + 3 b(l, dim)` of the effective well at level `l`.
#[must_use]
pub fn shell_stiffness(l: usize, dim: usize, k: f64) -> f64 {
    2.0 * k + 3.0 * b_coefficient(l, dim)
}

/// Minimum `r~_l = 1 + b / (3b + 2k)` of the effective well.
#[must_use]
pub fn shell_center(l: usize, dim: usize, k: f64) -> f64 {
    let b = b_coefficient(l, dim);
    1.0 + b / (3.0 * b + 2.0 * k)
}

/// Width scale `k_l^{-1/4}` of the shell states at level `l`.
#[must_use]
pub fn shell_width(l: usize, dim: usize, k: f64) -> f64 {
    shell_stiffness(l, dim, k).powf(-0.25)
}

/// Constant offset `V_0 = -sqrt(2k) - b_0 - 3 b_0 / (2 sqrt(2k))` of the
/// well, chosen so the lowest level sits at zero through order
/// `1/sqrt(k)`.  Exact at `dim = 3`, where `b_0` vanishes.
#[must_use]
pub fn ground_offset(k: f64, dim: usize) -> f64 {
    let b0 = b_coefficient(0, dim);
    let s = (2.0 * k).sqrt();
    -s - b0 - 3.0 * b0 / (2.0 * s)
}

/// Closed-form energy of the shell state with radial number `n` and
/// angular level `l`, returned alongside its leading-order form
/// `l(l+dim-2) + 2n sqrt(2k)`.
///
/// Requires `k > 0` large enough that the stiffened curvature `k_l` is
/// positive (at `dim = 2`, `l = 0` the centrifugal strength is `-1/4`).
#[must_use]
pub fn closed_form_energy(n: usize, l: usize, k: f64, dim: usize) -> (f64, f64) {
    let b = b_coefficient(l, dim);
    let kl = shell_stiffness(l, dim, k);
    debug_assert!(k > 0.0 && kl > 0.0, "coupling too small: k = {k}");
    let closed = (2.0 * n as f64 + 1.0) * kl.sqrt()
        + ground_offset(k, dim)
        + 2.0 * b * (k + b) / (3.0 * b + 2.0 * k);
    let leading = casimir_eigenvalue(dim, l) + 2.0 * (n as f64) * (2.0 * k).sqrt();
    (closed, leading)
}

/// One closed-form shell state with its sampled profile.
///
/// `profile` holds the radial wavefunction
/// `f = M r^{-(dim-1)/2} exp(-sqrt(k_l)(r - r~_l)^2 / 2) H_n(...)` on
/// `grid`, normalized so that the quadrature of `f^2 r^{dim-1}` over the
/// window is one.
#[derive(Debug, Clone, Serialize)]
pub struct RadialLevel {
    pub n: usize,
    pub l: usize,
    pub dim: usize,
    pub coupling: f64,
    pub energy: f64,
    pub energy_leading: f64,
    pub center: f64,
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
}

/// Builds the closed-form profile of the `(n, l)` shell state on a uniform
/// grid of `points` nodes spanning `r~_l +- 8 k_l^{-1/4}` (clipped to stay
/// off the origin).  Fails with `GridTooCoarse` when `points` is too small
/// for the normalization quadrature to be trusted.
pub fn eigenfunction(n: usize, l: usize, k: f64, dim: usize, points: usize) -> Result<RadialLevel> {
    if !(k.is_finite() && k > 0.0) || shell_stiffness(l, dim, k) <= 0.0 {
        return Err(Error::InvalidCoupling(k));
    }
    if points < PROFILE_MIN_POINTS {
        return Err(Error::GridTooCoarse(format!(
            "profile needs at least {PROFILE_MIN_POINTS} points, got {points}"
        )));
    }
    let kl = shell_stiffness(l, dim, k);
    let center = shell_center(l, dim, k);
    let width = kl.powf(-0.25);
    let lo = (center - PROFILE_SIGMAS * width).max(ORACLE_LEFT);
    let hi = center + PROFILE_SIGMAS * width;
    let h = (hi - lo) / (points - 1) as f64;
    let half_d = (dim as f64 - 1.0) / 2.0;
    let grid: Vec<f64> = (0..points).map(|j| lo + h * j as f64).collect();
    let mut profile: Vec<f64> = grid
        .iter()
        .map(|&r| {
            let x = (r - center) * kl.powf(0.25);
            r.powf(-half_d) * (-kl.sqrt() * (r - center) * (r - center) / 2.0).exp() * hermite(n, x)
        })
        .collect();
    // Trapezoid of f^2 r^{dim-1}; the integrand equals the reduced
    // function g^2, so it stays bounded toward the origin.
    let norm = weighted_norm(&grid, &profile, dim);
    let coarse = {
        let cg: Vec<f64> = grid.iter().copied().step_by(2).collect();
        let cp: Vec<f64> = profile.iter().copied().step_by(2).collect();
        weighted_norm(&cg, &cp, dim)
    };
    if norm <= 0.0 || ((coarse - norm) / norm).abs() > 1e-8 {
        return Err(Error::GridTooCoarse(
            "normalization quadrature unconverged".into(),
        ));
    }
    let scale = norm.sqrt().recip();
    for v in &mut profile {
        *v *= scale;
    }
    let (energy, energy_leading) = closed_form_energy(n, l, k, dim);
    Ok(RadialLevel {
        n,
        l,
        dim,
        coupling: k,
        energy,
        energy_leading,
        center,
        grid,
        profile,
    })
}

/// Trapezoid quadrature of `f^2 r^{dim-1}` on a uniform grid.
fn weighted_norm(grid: &[f64], values: &[f64], dim: usize) -> f64 {
    let d = dim as f64 - 1.0;
    let h = grid[1] - grid[0];
    let mut sum = 0.0;
    for j in 0..grid.len() {
        let w = if j == 0 || j == grid.len() - 1 {
            0.5
        } else {
            1.0
        };
        sum += w * values[j] * values[j] * grid[j].powf(d);
    }
    sum * h
}

/// Overlap `<f, g>` of two profiles under the `r^{dim-1} dr` measure;
/// both levels must share their grid.
pub fn profile_overlap(a: &RadialLevel, b: &RadialLevel) -> Result<f64> {
    if a.grid.len() != b.grid.len() || a.dim != b.dim || a.l != b.l {
        return Err(Error::InvalidArgument(
            "profile overlap needs matching grids".into(),
        ));
    }
    let d = a.dim as f64 - 1.0;
    let h = a.grid[1] - a.grid[0];
    let mut sum = 0.0;
    for j in 0..a.grid.len() {
        let w = if j == 0 || j == a.grid.len() - 1 {
            0.5
        } else {
            1.0
        };
        sum += w * a.profile[j] * b.profile[j] * a.grid[j].powf(d);
    }
    Ok(sum * h)
}

/// Effective potential seen by the reduced function `g`: harmonic well
/// plus the exact centrifugal term.
fn oracle_potential(r: f64, l: usize, k: f64, dim: usize) -> f64 {
    ground_offset(k, dim) + 2.0 * k * (r - 1.0) * (r - 1.0) + b_coefficient(l, dim) / (r * r)
}

fn oracle_levels(l: usize, k: f64, dim: usize, m: usize, count: usize) -> Result<Vec<f64>> {
    let h = (ORACLE_RIGHT - ORACLE_LEFT) / m as f64;
    let inv_h2 = 1.0 / (h * h);
    let diag: Vec<f64> = (1..m)
        .map(|j| 2.0 * inv_h2 + oracle_potential(ORACLE_LEFT + h * j as f64, l, k, dim))
        .collect();
    let off = vec![-inv_h2; m - 2];
    tridiagonal_lowest_eigenvalues(&diag, &off, count)
}

/// Lowest `count` eigenvalues of the reduced radial problem, solved by
/// second-order central differences with Dirichlet data on
/// `[1e-4, 3]`.  Every level is re-solved on a doubled grid and the pair
/// must agree within `5e-3 sqrt(k_l)`; the refined values are returned.
///
/// The shell picture needs a deep well, so `k < 1e3` is rejected.
pub fn ode_oracle(l: usize, k: f64, dim: usize, count: usize) -> Result<Vec<f64>> {
    if !(k.is_finite() && k >= 1e3) {
        return Err(Error::InvalidCoupling(k));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("oracle needs count >= 1".into()));
    }
    let base = oracle_levels(l, k, dim, ORACLE_POINTS, count)?;
    let fine = oracle_levels(l, k, dim, 2 * ORACLE_POINTS, count)?;
    let gate = ORACLE_GATE * shell_stiffness(l, dim, k).sqrt();
    for (a, b) in base.iter().zip(&fine) {
        if (a - b).abs() > gate {
            return Err(Error::NoConvergence(format!(
                "oracle level moved {:.3e} under grid doubling",
                (a - b).abs()
            )));
        }
    }
    Ok(fine)
}

/// Ground profile of the oracle problem: the grid (interior nodes) and the
/// reduced function `g`, normalized to unit Euclidean length.
pub fn oracle_ground_profile(
    l: usize,
    k: f64,
    dim: usize,
    m: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(k.is_finite() && k >= 1e3) {
        return Err(Error::InvalidCoupling(k));
    }
    let h = (ORACLE_RIGHT - ORACLE_LEFT) / m as f64;
    let inv_h2 = 1.0 / (h * h);
    let grid: Vec<f64> = (1..m).map(|j| ORACLE_LEFT + h * j as f64).collect();
    let diag: Vec<f64> = grid
        .iter()
        .map(|&r| 2.0 * inv_h2 + oracle_potential(r, l, k, dim))
        .collect();
    let off = vec![-inv_h2; m - 2];
    let lowest = tridiagonal_lowest_eigenvalues(&diag, &off, 1)?[0];
    let g = tridiagonal_eigenvector(&diag, &off, lowest)?;
    Ok((grid, g))
}

/// Shell center measured from the numeric ground profile.
///
/// The raw peak of `g` sits a skew shift of order `b k_l^{-3/2}` beyond
/// the well minimum, because the exact centrifugal term is softer on the
/// outside.  Mode and mean feel that shift in the exact ratio 2 : 3 at
/// first order, so `3 mode - 2 mean` cancels it and recovers `r~_l` to
/// `O(k^{-2})`.  The mode comes from a quartic fit of `ln g^2` around the
/// discrete peak, the mean from quadrature of `r g^2`.
pub fn fitted_shell_center(l: usize, k: f64, dim: usize) -> Result<f64> {
    let m = 20_000;
    let (grid, g) = oracle_ground_profile(l, k, dim, m)?;
    let h = grid[1] - grid[0];
    let peak = g
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1 * a.1).total_cmp(&(b.1 * b.1)))
        .map(|(j, _)| j)
        .ok_or_else(|| Error::NoConvergence("empty oracle profile".into()))?;
    if peak < 4 || peak + 4 >= g.len() {
        return Err(Error::NoConvergence(
            "oracle peak sits on the boundary".into(),
        ));
    }
    // Quartic least-squares fit of ln g^2 on the nine nodes around the
    // peak, abscissa in grid units to keep the normal equations sane.
    let mut a = [[0.0_f64; 5]; 5];
    let mut rhs = [0.0_f64; 5];
    for t in -4_i64..=4 {
        let x = t as f64;
        let y = (g[(peak as i64 + t) as usize].powi(2)).ln();
        let mut pw = [0.0_f64; 9];
        pw[0] = 1.0;
        for p in 1..9 {
            pw[p] = pw[p - 1] * x;
        }
        for i in 0..5 {
            rhs[i] += pw[i] * y;
            for j in 0..5 {
                a[i][j] += pw[i + j];
            }
        }
    }
    let c = solve_small(&mut a, &mut rhs)?;
    // Stationary point of the quartic nearest the peak.
    let mut x = 0.0_f64;
    for _ in 0..60 {
        let d1 = c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x + 4.0 * c[4] * x * x * x;
        let d2 = 2.0 * c[2] + 6.0 * c[3] * x + 12.0 * c[4] * x * x;
        if d2 == 0.0 {
            return Err(Error::NoConvergence("degenerate peak fit".into()));
        }
        let step = d1 / d2;
        x -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    if x.abs() > 4.0 {
        return Err(Error::NoConvergence("peak fit left its window".into()));
    }
    let mode = grid[peak] + x * h;
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, v) in grid.iter().zip(&g) {
        num += r * v * v;
        den += v * v;
    }
    let mean = num / den;
    Ok(3.0 * mode - 2.0 * mean)
}

/// Gaussian elimination with partial pivoting for the tiny fit systems.
fn solve_small(a: &mut [[f64; 5]; 5], b: &mut [f64; 5]) -> Result<[f64; 5]> {
    let n = 5;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::NoConvergence("singular fit system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                a[row][j] -= f * a[col][j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0_f64; 5];
    for col in (0..n).rev() {
        let mut s = b[col];
        for j in col + 1..n {
            s -= a[col][j] * x[j];
        }
        x[col] = s / a[col][col];
    }
    Ok(x)
}

/// Whether the whole angular spectrum up to `cutoff` fits under the first
/// radial excitation: `cutoff (cutoff + dim - 2) < 2 sqrt(2k)`.  Returns
/// the margin `2 sqrt(2k) - cutoff (cutoff + dim - 2)` alongside.
#[must_use]
pub fn cutoff_check(cutoff: usize, k: f64, dim: usize) -> (bool, f64) {
    let margin = 2.0 * (2.0 * k).sqrt() - casimir_eigenvalue(dim, cutoff);
    (margin > 0.0, margin)
}

/// Band separation of the closed-form spectrum at coupling `k`: the gap
/// between the highest `n = 0` level with `l <= cutoff` and the lowest
/// `n = 1` level, plus whether the threshold
/// `cutoff (cutoff + dim - 2) + margin = 2 sqrt(2k)` splits the bands.
///
/// The comparison allows the closed form its own `O(k^{-1/2})` accuracy:
/// at `dim = 3` the first radial excitation over `l = 0` sits exactly on
/// the threshold, and at `dim = 2` it undershoots by `3|b_0| / sqrt(2k)`.
#[must_use]
pub fn level_separation(cutoff: usize, k: f64, dim: usize) -> (f64, bool) {
    let threshold = 2.0 * (2.0 * k).sqrt();
    let mut top_shell = f64::NEG_INFINITY;
    let mut bottom_excited = f64::INFINITY;
    for l in 0..=cutoff {
        let (e0, _) = closed_form_energy(0, l, k, dim);
        let (e1, _) = closed_form_energy(1, l, k, dim);
        top_shell = top_shell.max(e0);
        bottom_excited = bottom_excited.min(e1);
    }
    let slack = (1.0 + 3.0 * b_coefficient(0, dim).abs()) / (2.0 * k).sqrt();
    let clean = top_shell < threshold - slack && bottom_excited >= threshold - slack;
    (bottom_excited - top_shell, clean)
}

/// One comparison row of the numeric oracle against the closed form;
/// `rel_err` is normalized by the shell scale `sqrt(k_l)`.
#[derive(Debug, Clone, Serialize)]
pub struct RadialRow {
    pub dim: usize,
    pub l: usize,
    pub n: usize,
    pub coupling: f64,
    pub energy_closed: f64,
    pub energy_leading: f64,
    pub energy_numeric: f64,
    pub rel_err: f64,
}

/// Tabulates oracle-vs-closed-form energies for the listed angular
/// levels, `n <= nmax` each.
pub fn radial_table(dim: usize, levels: &[usize], nmax: usize, k: f64) -> Result<Vec<RadialRow>> {
    let mut rows = Vec::with_capacity(levels.len() * (nmax + 1));
    for &l in levels {
        let numeric = ode_oracle(l, k, dim, nmax + 1)?;
        let scale = shell_stiffness(l, dim, k).sqrt();
        for (n, &e_num) in numeric.iter().enumerate() {
            let (closed, leading) = closed_form_energy(n, l, k, dim);
            rows.push(RadialRow {
                dim,
                l,
                n,
                coupling: k,
                energy_closed: closed,
                energy_leading: leading,
                energy_numeric: e_num,
                rel_err: (e_num - closed).abs() / scale,
            });
        }
    }
    Ok(rows)
}
