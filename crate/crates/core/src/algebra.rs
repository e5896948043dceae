//! The truncated operator algebra: coordinate operators `xbar` and
//! rotation generators `Lbar` acting on the direct sum of harmonic spaces
//! up to a cutoff, with every defining relation checkable as a finite
//! matrix identity.
//!
//! All operators are stored in the orthonormal frame, where `xbar` is real
//! symmetric and `i Lbar` is real antisymmetric.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde_json::json;

use crate::basis::{casimir_eigenvalue, generator_pairs, BasisCatalog};
use crate::budget::TensorBudget;
use crate::error::{Error, Result};
use crate::linalg;
use crate::projector::irrep_dimension;

/// Pinned tolerance for the relation suite.
pub const RELATION_TOL: f64 = 1e-10;

/// The constant `B = (2D - 5)(D - 1) / 2`.
#[must_use]
pub fn big_b(dim: usize) -> f64 {
    ((2 * dim as i64 - 5) * (dim as i64 - 1)) as f64 / 2.0
}

/// Default coupling `k = [cutoff (cutoff + D - 2)]^2`, the scaling that
/// keeps every kept level inside the well while the spectrum collapses.
/// At cutoff 0 the algebra is one-dimensional and any positive value
/// works; 1 is returned.
#[must_use]
pub fn default_coupling(dim: usize, cutoff: usize) -> f64 {
    if cutoff == 0 {
        return 1.0;
    }
    let e = (cutoff * (cutoff + dim - 2)) as f64;
    e * e
}

/// Ladder coefficient `c_l`: the square root of
/// `1 + B/k + (l - 1)(l + D - 2)/k` for `1 <= l <= cutoff`, zero
/// otherwise.
pub fn c_coeff(l: usize, k: f64, dim: usize, cutoff: usize) -> Result<f64> {
    if l == 0 || l > cutoff {
        return Ok(0.0);
    }
    let radicand = 1.0 + big_b(dim) / k + ((l - 1) * (l + dim - 2)) as f64 / k;
    if radicand <= 0.0 {
        return Err(Error::InvalidCoupling(k));
    }
    Ok(radicand.sqrt())
}

/// One residual from the relation suite.
#[derive(Debug, Clone)]
pub struct RelationCheck {
    pub name: &'static str,
    pub residual: f64,
}

/// Outcome of the full relation suite at a given tolerance.
#[derive(Debug, Clone)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
    pub tol: f64,
}

impl RelationReport {
    #[must_use]
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.residual <= self.tol)
    }

    #[must_use]
    pub fn worst(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.residual)
            .fold(0.0_f64, f64::max)
    }

    #[must_use]
    pub fn failed(&self) -> Vec<&RelationCheck> {
        self.checks
            .iter()
            .filter(|c| c.residual > self.tol)
            .collect()
    }
}

/// One line of the radius-squared spectrum.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SpectrumLine {
    pub l: usize,
    pub r_squared: f64,
    pub multiplicity: usize,
}

/// The algebra acting on harmonics up to `cutoff`, with its coordinate
/// and rotation operators assembled in the orthonormal frame.
///
/// ```
/// use fuzzy_sphere::algebra::FuzzyAlgebra;
///
/// let alg = FuzzyAlgebra::new(3, 2)?;
/// assert_eq!(alg.coordinate(1)?.nrows(), 9);
/// assert!(alg.check_relations(1e-10)?.pass());
/// # Ok::<(), fuzzy_sphere::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct FuzzyAlgebra {
    dim: usize,
    cutoff: usize,
    k: f64,
    catalog: BasisCatalog,
    n: usize,
    block_starts: Vec<usize>,
    c: Vec<f64>,
    /// Coordinate operators, orthonormal frame; real symmetric.
    xbar: Vec<Array2<f64>>,
    /// Coordinate operators in harmonic coordinates (pre-frame), kept for
    /// the metric-adjointness check.
    xbar_t: Vec<Array2<f64>>,
    /// `i Lbar_(hk)` per generator pair; real antisymmetric.
    lbar: Vec<Array2<f64>>,
    /// `sum_(h<k) Lbar_(hk)^2`, block scalar with eigenvalue `E_l`.
    lbar2: Array2<f64>,
}

impl FuzzyAlgebra {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        Self::with_coupling(dim, cutoff, default_coupling(dim, cutoff))
    }

    pub fn with_coupling(dim: usize, cutoff: usize, k: f64) -> Result<Self> {
        Self::with_budget(dim, cutoff, k, &TensorBudget::default())
    }

    pub fn with_budget(dim: usize, cutoff: usize, k: f64, budget: &TensorBudget) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidCoupling(k));
        }
        let catalog = BasisCatalog::with_budget(dim, cutoff, budget)?;

        let mut block_starts = Vec::with_capacity(cutoff + 2);
        let mut acc = 0usize;
        for l in 0..=cutoff {
            block_starts.push(acc);
            acc += catalog.level(l)?.count();
        }
        block_starts.push(acc);
        let n = acc;
        debug_assert_eq!(n, irrep_dimension(dim + 1, cutoff));

        let mut c = vec![0.0; cutoff + 1];
        for (l, slot) in c.iter_mut().enumerate() {
            *slot = c_coeff(l, k, dim, cutoff)?;
        }

        // Global frame change: block diagonal orthonormalizers.
        let mut f = Array2::zeros((n, n));
        let mut f_inv = Array2::zeros((n, n));
        for l in 0..=cutoff {
            let level = catalog.level(l)?;
            let r = block_starts[l]..block_starts[l + 1];
            f.slice_mut(s![r.clone(), r.clone()]).assign(level.frame());
            let inv = level.frame().t().dot(level.gram());
            f_inv.slice_mut(s![r.clone(), r]).assign(&inv);
        }

        let mut xbar_t = Vec::with_capacity(dim);
        for axis in 1..=dim {
            let mut x = Array2::zeros((n, n));
            for l in 0..=cutoff {
                if l < cutoff && c[l + 1] != 0.0 {
                    let up = catalog.t_up(l, axis)? * c[l + 1];
                    x.slice_mut(s![
                        block_starts[l + 1]..block_starts[l + 2],
                        block_starts[l]..block_starts[l + 1]
                    ])
                    .assign(&up);
                }
                if l >= 1 && c[l] != 0.0 {
                    let down = catalog.t_down(l, axis)? * c[l];
                    x.slice_mut(s![
                        block_starts[l - 1]..block_starts[l],
                        block_starts[l]..block_starts[l + 1]
                    ])
                    .assign(&down);
                }
            }
            xbar_t.push(x);
        }
        let xbar: Vec<Array2<f64>> = xbar_t.iter().map(|x| f_inv.dot(x).dot(&f)).collect();

        let pairs = generator_pairs(dim);
        let mut lbar = Vec::with_capacity(pairs.len());
        for &(h, kk) in &pairs {
            let mut a = Array2::zeros((n, n));
            for l in 0..=cutoff {
                let level = catalog.level(l)?;
                let act = catalog.l_action(l, h, kk)?;
                let on = level
                    .frame()
                    .t()
                    .dot(level.gram())
                    .dot(act)
                    .dot(level.frame());
                a.slice_mut(s![
                    block_starts[l]..block_starts[l + 1],
                    block_starts[l]..block_starts[l + 1]
                ])
                .assign(&on);
            }
            lbar.push(a);
        }

        let mut lbar2 = Array2::zeros((n, n));
        for a in &lbar {
            lbar2 -= &a.dot(a);
        }

        Ok(FuzzyAlgebra {
            dim,
            cutoff,
            k,
            catalog,
            n,
            block_starts,
            c,
            xbar,
            xbar_t,
            lbar,
            lbar2,
        })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[must_use]
    pub fn coupling(&self) -> f64 {
        self.k
    }

    /// Total matrix dimension `N`.
    #[must_use]
    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn catalog(&self) -> &BasisCatalog {
        &self.catalog
    }

    #[must_use]
    pub fn ladder_coefficient(&self, l: usize) -> f64 {
        if l < self.c.len() {
            self.c[l]
        } else {
            0.0
        }
    }

    pub fn block_range(&self, l: usize) -> Result<std::ops::Range<usize>> {
        if l > self.cutoff {
            return Err(Error::LevelOutOfRange {
                level: l,
                max: self.cutoff,
            });
        }
        Ok(self.block_starts[l]..self.block_starts[l + 1])
    }

    /// Coordinate operator `xbar^axis`, orthonormal frame.
    pub fn coordinate(&self, axis: usize) -> Result<&Array2<f64>> {
        if axis < 1 || axis > self.dim {
            return Err(Error::InvalidIndexEntry {
                entry: axis,
                dim: self.dim,
            });
        }
        Ok(&self.xbar[axis - 1])
    }

    /// `i Lbar_(hk)` for any axes, antisymmetric in the pair; `h = k`
    /// gives zero.
    pub fn rotation(&self, h: usize, k: usize) -> Result<Array2<f64>> {
        if h == k {
            if h < 1 || h > self.dim {
                return Err(Error::InvalidIndexEntry {
                    entry: h,
                    dim: self.dim,
                });
            }
            return Ok(Array2::zeros((self.n, self.n)));
        }
        let a = self.rotation_ref(h.min(k), h.max(k))?;
        if h < k {
            Ok(a.clone())
        } else {
            Ok(-a)
        }
    }

    fn rotation_ref(&self, h: usize, k: usize) -> Result<&Array2<f64>> {
        if h < 1 || k <= h || k > self.dim {
            return Err(Error::InvalidArgument(format!(
                "generator pair ({h}, {k}) needs 1 <= h < k <= {}",
                self.dim
            )));
        }
        let before_h: usize = (1..h).map(|a| self.dim - a).sum();
        Ok(&self.lbar[before_h + (k - h - 1)])
    }

    /// `Lbar^2 = sum_(h<k) Lbar_(hk)^2`.
    #[must_use]
    pub fn rotation_square(&self) -> &Array2<f64> {
        &self.lbar2
    }

    /// `xbar^2 = sum_i (xbar^i)^2`.
    #[must_use]
    pub fn coordinate_square(&self) -> Array2<f64> {
        let mut acc = Array2::zeros((self.n, self.n));
        for x in &self.xbar {
            acc += &x.dot(x);
        }
        acc
    }

    /// Indicator of the level-`l` block.
    pub fn block_indicator(&self, l: usize) -> Result<Array2<f64>> {
        let r = self.block_range(l)?;
        let mut p = Array2::zeros((self.n, self.n));
        for i in r {
            p[(i, i)] = 1.0;
        }
        Ok(p)
    }

    /// Spectral projector onto level `l`, built as the Lagrange polynomial
    /// in `Lbar^2` over the distinct Casimir values.
    pub fn eigenprojector(&self, l: usize) -> Result<Array2<f64>> {
        if l > self.cutoff {
            return Err(Error::LevelOutOfRange {
                level: l,
                max: self.cutoff,
            });
        }
        let e: Vec<f64> = (0..=self.cutoff)
            .map(|m| casimir_eigenvalue(self.dim, m))
            .collect();
        let mut p: Array2<f64> = Array2::eye(self.n);
        for m in 0..=self.cutoff {
            if m == l {
                continue;
            }
            let denom = e[l] - e[m];
            // E_l = l (l + D - 2) is strictly increasing in l for D >= 2.
            let shifted = &self.lbar2 - &(Array2::<f64>::eye(self.n) * e[m]);
            p = p.dot(&shifted) / denom;
        }
        Ok(p)
    }

    /// The multiplier `K` in the coordinate commutation relation.
    #[must_use]
    pub fn commutator_gap(&self) -> f64 {
        let c_top = self.c[self.cutoff];
        1.0 / self.k + c_top * c_top / (self.dim + 2 * self.cutoff - 2) as f64
    }

    fn top_subtraction(&self) -> f64 {
        let dd = self.dim as f64;
        let ll = self.cutoff as f64;
        let pref = if self.dim == 2 && self.cutoff == 0 {
            // 0/0 at the corner; the value that keeps the one-dimensional
            // algebra consistent (xbar = 0) is 1.
            1.0
        } else {
            (ll + dd - 2.0) / (2.0 * ll + dd - 2.0)
        };
        pref * (1.0 + big_b(self.dim) / self.k + ll * (ll + dd - 1.0) / self.k)
    }

    /// Eigenvalue `r^2_l` of `xbar^2` on level `l`.
    pub fn radius_squared(&self, l: usize) -> Result<f64> {
        if l > self.cutoff {
            return Err(Error::LevelOutOfRange {
                level: l,
                max: self.cutoff,
            });
        }
        let base = 1.0 + (casimir_eigenvalue(self.dim, l) + big_b(self.dim)) / self.k;
        if l == self.cutoff {
            Ok(base - self.top_subtraction())
        } else {
            Ok(base)
        }
    }

    /// Spectrum of `xbar^2` with multiplicities, from the closed form.
    pub fn spectrum(&self) -> Result<Vec<SpectrumLine>> {
        (0..=self.cutoff)
            .map(|l| {
                Ok(SpectrumLine {
                    l,
                    r_squared: self.radius_squared(l)?,
                    multiplicity: self.catalog.level(l)?.count(),
                })
            })
            .collect()
    }

    /// Largest deviation between the numerical eigenvalues of `xbar^2`
    /// and the closed-form spectrum with its multiplicities.
    pub fn spectrum_residual(&self) -> Result<f64> {
        let eig = linalg::symmetric_eigenvalues(&self.coordinate_square())?;
        let mut predicted = Vec::with_capacity(self.n);
        for line in self.spectrum()? {
            predicted.extend(std::iter::repeat(line.r_squared).take(line.multiplicity));
        }
        predicted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let worst = eig
            .iter()
            .zip(predicted.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        Ok(worst)
    }

    /// Residual of metric self-adjointness of `xbar` in harmonic
    /// coordinates, `max |gram xbar - xbar^T gram|`, plus the analogous
    /// antisymmetry residual for the generators in the orthonormal frame.
    pub fn adjointness_residual(&self) -> Result<f64> {
        let mut gram = Array2::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let level = self.catalog.level(l)?;
            let r = self.block_starts[l]..self.block_starts[l + 1];
            gram.slice_mut(s![r.clone(), r]).assign(level.gram());
        }
        let mut worst = 0.0_f64;
        for x in &self.xbar_t {
            let lhs = gram.dot(x);
            let rhs = x.t().dot(&gram);
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
        for a in &self.lbar {
            worst = worst.max(linalg::max_abs(&(a.t().to_owned() + a)));
        }
        Ok(worst)
    }

    /// Adds `delta` to the `(0, 0)` entry of the first coordinate operator.
    ///
    /// Self-test hook: a corrupted algebra must make the relation suite
    /// fail, which is how the check harness proves it can detect errors.
    /// Not useful for anything else.
    pub fn perturb_first_coordinate(&mut self, delta: f64) {
        self.xbar[0][(0, 0)] += delta;
    }

    /// Runs the full relation suite; residuals are absolute max norms.
    pub fn check_relations(&self, tol: f64) -> Result<RelationReport> {
        let mut checks = Vec::new();
        let pairs = generator_pairs(self.dim);

        // (a) rotations act on coordinates as vector components.
        let mut worst = 0.0_f64;
        for &(i, j) in &pairs {
            let a = self.rotation_ref(i, j)?;
            for h in 1..=self.dim {
                let mut expect = Array2::zeros((self.n, self.n));
                if h == j {
                    expect += &self.xbar[i - 1];
                }
                if h == i {
                    expect -= &self.xbar[j - 1];
                }
                let c = linalg::commutator(a, &self.xbar[h - 1]);
                worst = worst.max(linalg::max_abs(&(c - expect)));
            }
        }
        checks.push(RelationCheck {
            name: "rotation-coordinate",
            residual: worst,
        });

        // (b) rotation generators close on the antisymmetric bracket.
        let mut worst = 0.0_f64;
        for &(i, j) in &pairs {
            for &(h, kk) in &pairs {
                let lhs = linalg::commutator(self.rotation_ref(i, j)?, self.rotation_ref(h, kk)?);
                let mut expect = Array2::zeros((self.n, self.n));
                if j == h {
                    expect += &self.rotation(i, kk)?;
                }
                if i == h {
                    expect -= &self.rotation(j, kk)?;
                }
                if j == kk {
                    expect -= &self.rotation(i, h)?;
                }
                if i == kk {
                    expect += &self.rotation(j, h)?;
                }
                worst = worst.max(linalg::max_abs(&(lhs - expect)));
            }
        }
        checks.push(RelationCheck {
            name: "rotation-rotation",
            residual: worst,
        });

        // (c) alternating contraction of one coordinate with one generator
        // vanishes; D >= 3 only.  Also its all-coordinate reformulation.
        if self.dim >= 3 {
            checks.push(RelationCheck {
                name: "alternating-coordinate-rotation",
                residual: self.epsilon_residual(false)?,
            });
            checks.push(RelationCheck {
                name: "alternating-three-coordinates",
                residual: self.epsilon_residual(true)?,
            });
        }

        // (d) nilpotency at power 2 cutoff + 1.
        let power = 2 * self.cutoff + 1;
        let mut worst = 0.0_f64;
        for &(h, kk) in &pairs {
            for sign in [1.0, -1.0] {
                let z = linalg::to_complex(&self.xbar[h - 1])
                    + linalg::to_complex(&self.xbar[kk - 1]) * Complex64::new(0.0, sign);
                let zp = linalg::matrix_power_c(&z, power);
                worst = worst.max(linalg::max_abs_c(&zp));
            }
        }
        if self.dim >= 3 {
            for h in 1..=self.dim {
                for kk in 1..=self.dim {
                    if h == kk {
                        continue;
                    }
                    for j in 1..=self.dim {
                        if j == h || j == kk {
                            continue;
                        }
                        let z = linalg::to_complex(&self.rotation(h, j)?)
                            + linalg::to_complex(&self.rotation(kk, j)?) * Complex64::new(0.0, 1.0);
                        let zp = linalg::matrix_power_c(&z, power);
                        worst = worst.max(linalg::max_abs_c(&zp));
                    }
                }
            }
        }
        checks.push(RelationCheck {
            name: "nilpotency",
            residual: worst,
        });

        // (e) coordinate commutators are rotation generators times a
        // block scalar.
        let p_top = self.eigenprojector(self.cutoff)?;
        let alpha: Array2<f64> =
            Array2::<f64>::eye(self.n) * (-1.0 / self.k) + &p_top * self.commutator_gap();
        let mut worst = 0.0_f64;
        for &(i, j) in &pairs {
            let lhs = linalg::commutator(&self.xbar[i - 1], &self.xbar[j - 1]);
            let rhs = self.rotation_ref(i, j)?.dot(&alpha);
            worst = worst.max(linalg::max_abs(&(lhs - rhs)));
        }
        checks.push(RelationCheck {
            name: "coordinate-commutator",
            residual: worst,
        });

        // (f) xbar^2 is the stated polynomial in Lbar^2.
        let x2 = self.coordinate_square();
        let chi = Array2::<f64>::eye(self.n) * (1.0 + big_b(self.dim) / self.k)
            + &self.lbar2 / self.k
            - &p_top * self.top_subtraction();
        checks.push(RelationCheck {
            name: "radius-polynomial",
            residual: linalg::max_abs(&(&x2 - &chi)),
        });

        // (g) conversely Lbar^2 interpolates through xbar^2 over the
        // distinct radius eigenvalues.
        let r2: Vec<f64> = (0..=self.cutoff)
            .map(|l| self.radius_squared(l))
            .collect::<Result<_>>()?;
        for l in 0..=self.cutoff {
            for m in 0..l {
                if (r2[l] - r2[m]).abs() < 1e-12 {
                    return Err(Error::InvalidCoupling(self.k));
                }
            }
        }
        let mut v = Array2::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let mut term: Array2<f64> = Array2::eye(self.n);
            for m in 0..=self.cutoff {
                if m == l {
                    continue;
                }
                let shifted = &x2 - &(Array2::<f64>::eye(self.n) * r2[m]);
                term = term.dot(&shifted) / (r2[l] - r2[m]);
            }
            v += &(term * casimir_eigenvalue(self.dim, l));
        }
        checks.push(RelationCheck {
            name: "casimir-from-radius",
            residual: linalg::max_abs(&(&v - &self.lbar2)),
        });

        // (h) generators recovered from coordinate commutators divided by
        // the block scalar.
        let mut alpha_inv = Array2::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let val = if l == self.cutoff {
                1.0 / self.k - self.commutator_gap()
            } else {
                1.0 / self.k
            };
            for i in self.block_range(l)? {
                alpha_inv[(i, i)] = 1.0 / val;
            }
        }
        let mut worst = 0.0_f64;
        for &(i, j) in &pairs {
            let rec = linalg::commutator(&self.xbar[j - 1], &self.xbar[i - 1]).dot(&alpha_inv);
            worst = worst.max(linalg::max_abs(&(rec - self.rotation_ref(i, j)?)));
        }
        checks.push(RelationCheck {
            name: "generator-recovery",
            residual: worst,
        });

        // Structural cross-checks: assembled Casimir blocks, spectral
        // projectors against block indicators, metric adjointness, and
        // the numerical radius spectrum.
        let mut casimir_expect = Array2::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let e = casimir_eigenvalue(self.dim, l);
            for i in self.block_range(l)? {
                casimir_expect[(i, i)] = e;
            }
        }
        checks.push(RelationCheck {
            name: "casimir-blocks",
            residual: linalg::max_abs(&(&self.lbar2 - &casimir_expect)),
        });

        let mut worst = 0.0_f64;
        let mut partition = Array2::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let p = self.eigenprojector(l)?;
            worst = worst.max(linalg::max_abs(&(&p - &self.block_indicator(l)?)));
            partition += &p;
        }
        let eye: Array2<f64> = Array2::eye(self.n);
        worst = worst.max(linalg::max_abs(&(partition - eye)));
        checks.push(RelationCheck {
            name: "spectral-projectors",
            residual: worst,
        });

        checks.push(RelationCheck {
            name: "metric-adjointness",
            residual: self.adjointness_residual()?,
        });

        checks.push(RelationCheck {
            name: "radius-spectrum",
            residual: self.spectrum_residual()?,
        });

        Ok(RelationReport { checks, tol })
    }

    /// Max-norm of the alternating contraction, either coordinate with
    /// generator or three coordinates, over every free-index assignment.
    fn epsilon_residual(&self, three_coordinates: bool) -> Result<f64> {
        let d = self.dim;
        let free = d - 3;
        let mut worst = 0.0_f64;
        let mut assignment = vec![1usize; free];
        loop {
            let mut acc = Array2::<f64>::zeros((self.n, self.n));
            let mut idx = vec![0usize; d];
            idx[3..].copy_from_slice(&assignment);
            for a in 1..=d {
                for b in 1..=d {
                    for c in 1..=d {
                        idx[0] = a;
                        idx[1] = b;
                        idx[2] = c;
                        let sign = epsilon_sign(&idx);
                        if sign == 0 {
                            continue;
                        }
                        let term = if three_coordinates {
                            self.xbar[a - 1]
                                .dot(&self.xbar[b - 1])
                                .dot(&self.xbar[c - 1])
                        } else {
                            // i Lbar carries a factor i over Lbar; it
                            // cannot affect a vanishing contraction.
                            self.xbar[a - 1].dot(&self.rotation(b, c)?)
                        };
                        acc += &(term * sign as f64);
                    }
                }
            }
            worst = worst.max(linalg::max_abs(&acc));
            if !next_assignment(&mut assignment, d) {
                break;
            }
        }
        Ok(worst)
    }

    /// JSON dump of the instance; complex entries as `[re, im]` pairs,
    /// row-major.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let matrix = |m: &Array2<f64>| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)], 0.0]).collect())
                .collect()
        };
        let spectrum: Vec<serde_json::Value> = self
            .spectrum()?
            .iter()
            .map(|line| json!([line.l, line.r_squared]))
            .collect();
        Ok(json!({
            "D": self.dim,
            "Lambda": self.cutoff,
            "k": self.k,
            "N": self.n,
            "operators": {
                "xbar": self.xbar.iter().map(matrix).collect::<Vec<_>>(),
                "Lbar": self.lbar.iter().map(matrix).collect::<Vec<_>>(),
            },
            "spectrum_x2": spectrum,
        }))
    }
}

/// Sign of the permutation written in `idx` (1-based entries); zero on
/// repeats.
#[must_use]
pub fn epsilon_sign(idx: &[usize]) -> i32 {
    let n = idx.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if idx[i] == idx[j] {
                return 0;
            }
        }
    }
    let mut inversions = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Advances a mixed-radix tuple over `1..=dim`; false when exhausted.
fn next_assignment(assignment: &mut [usize], dim: usize) -> bool {
    for slot in assignment.iter_mut().rev() {
        if *slot < dim {
            *slot += 1;
            return true;
        }
        *slot = 1;
    }
    false
}
