//! Realization of the operator algebra inside one extra dimension: the
//! degree-cutoff harmonic space of the `D+1`-sphere carries the same
//! rotation generators, and a spectral rescaling of the extra-axis
//! generators reproduces the coordinate operators exactly.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;

use crate::algebra::FuzzyAlgebra;
use crate::basis::{casimir_eigenvalue, generator_pairs, BasisCatalog};
use crate::budget::TensorBudget;
use crate::error::{Error, Result};
use crate::linalg;
use crate::projector::irrep_dimension;
use crate::special::{double_factorial, ln_gamma_complex};

/// Coefficients `b` of the scalar profile polynomial attached to a
/// degree-`l` block inside the degree-`cutoff` space one dimension up:
/// `p(u) = sum_k b_k u^(cutoff - l - 2k)`, leading coefficient one.
pub fn profile_coefficients(cutoff: usize, l: usize, dim: usize) -> Result<Vec<f64>> {
    if l > cutoff {
        return Err(Error::LevelOutOfRange {
            level: l,
            max: cutoff,
        });
    }
    let bold = (dim + 1) as i64;
    let lam = cutoff as i64;
    let ll = l as i64;
    let kmax = (cutoff - l) / 2;
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax as i64 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let b = sign * factorial(lam - ll) * double_factorial(2 * lam - 4 - 2 * k + bold)
            / (factorial(lam - ll - 2 * k)
                * double_factorial(2 * k)
                * double_factorial(2 * lam - 4 + bold));
        out.push(b);
    }
    Ok(out)
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Value of the profile polynomial at `u`, the coordinate along the
/// extra axis.
pub fn profile_value(cutoff: usize, l: usize, dim: usize, u: f64) -> Result<f64> {
    let coeffs = profile_coefficients(cutoff, l, dim)?;
    let mut acc = 0.0;
    for (k, b) in coeffs.iter().enumerate() {
        acc += b * u.powi((cutoff - l - 2 * k) as i32);
    }
    Ok(acc)
}

/// Positive block scalars whose conjugation turns the extra-axis
/// generators into the coordinate operators.
#[derive(Debug, Clone)]
pub struct SpectralFactor {
    values: Vec<f64>,
}

impl SpectralFactor {
    #[must_use]
    pub fn value(&self, l: usize) -> f64 {
        self.values[l]
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[must_use]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Evaluates the block scalars for degrees `0..=cutoff` via ratios of
/// Gamma values, the complex pair handled through a complex log-Gamma.
pub fn spectral_factor(cutoff: usize, k: f64, dim: usize) -> Result<SpectralFactor> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidCoupling(k));
    }
    let d = (dim - 1) as f64;
    let dd = dim as f64;
    let lam = cutoff as f64;
    // Squared half-width of the complex argument pair; negative values
    // collapse the pair onto the real axis.
    let a2 = k + 3.0 * (dd - 1.0) * (dd - 3.0) / 4.0;
    let mut values = Vec::with_capacity(cutoff + 1);
    for l in 0..=cutoff {
        let sf = l as f64;
        let mut ln_m2 = ln_gamma_real((lam + sf + d) / 2.0)?
            + ln_gamma_real((lam - sf + 1.0) / 2.0)?
            - ln_gamma_real((lam + sf + dd) / 2.0)?
            - ln_gamma_real((lam - sf) / 2.0 + 1.0)?
            - 0.5 * k.ln();
        ln_m2 += ln_abs_gamma_squared((sf + 1.0 + d / 2.0) / 2.0, a2)?;
        ln_m2 -= ln_abs_gamma_squared((sf + d / 2.0) / 2.0, a2)?;
        let m = (0.5 * ln_m2).exp();
        if !m.is_finite() || m <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "spectral factor degenerated at degree {l}: {m}"
            )));
        }
        values.push(m);
    }
    Ok(SpectralFactor { values })
}

fn ln_gamma_real(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Gamma argument {x} out of range"
        )));
    }
    Ok(ln_gamma_complex(Complex64::new(x, 0.0)).re)
}

/// `ln |Gamma(x + i a)|^2` where `a^2 = a2` may be negative, in which
/// case the pair degenerates to two real arguments.
fn ln_abs_gamma_squared(x: f64, a2: f64) -> Result<f64> {
    if a2 >= 0.0 {
        let z = Complex64::new(x, a2.sqrt() / 2.0);
        Ok(2.0 * ln_gamma_complex(z).re)
    } else {
        let a = (-a2).sqrt() / 2.0;
        Ok(ln_gamma_real(x + a)? + ln_gamma_real(x - a)?)
    }
}

/// Block weights of the state correspondence, degree by degree:
/// `1` at degree zero, each step multiplying by
/// `i sqrt((cutoff - l) / (cutoff + l + D - 1))`.
#[must_use]
pub fn block_weights(cutoff: usize, dim: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut a = Complex64::new(1.0, 0.0);
    out.push(a);
    for l in 0..cutoff {
        let ratio = ((cutoff - l) as f64 / (cutoff + l + dim - 1) as f64).sqrt();
        a *= Complex64::new(0.0, ratio);
        out.push(a);
    }
    out
}

/// The degree-`cutoff` harmonic space one dimension up, organized over
/// the factorized basis: rotation generators acting blockwise plus the
/// extra-axis generators mixing adjacent degrees.
#[derive(Debug)]
pub struct EmbeddedIrrep {
    dim: usize,
    cutoff: usize,
    catalog: BasisCatalog,
    n: usize,
    block_starts: Vec<usize>,
    /// Matrices of `i L_(h, D+1)` on the factorized coordinates.
    cross: Vec<Array2<f64>>,
}

impl EmbeddedIrrep {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        Self::with_budget(dim, cutoff, &TensorBudget::default())
    }

    pub fn with_budget(dim: usize, cutoff: usize, budget: &TensorBudget) -> Result<Self> {
        let catalog = BasisCatalog::with_budget(dim, cutoff, budget)?;
        let mut block_starts = Vec::with_capacity(cutoff + 2);
        let mut n = 0;
        for l in 0..=cutoff {
            block_starts.push(n);
            n += catalog.level(l)?.count();
        }
        block_starts.push(n);
        debug_assert_eq!(n, irrep_dimension(dim + 1, cutoff));

        let mut cross = Vec::with_capacity(dim);
        for h in 1..=dim {
            let mut g = Array2::<f64>::zeros((n, n));
            for l in 0..=cutoff {
                if l < cutoff {
                    let up = catalog.t_up(l, h)?;
                    let w = (cutoff - l) as f64;
                    let mut target = g.slice_mut(s![
                        block_starts[l + 1]..block_starts[l + 2],
                        block_starts[l]..block_starts[l + 1]
                    ]);
                    target += &(up * w);
                }
                if l > 0 {
                    let down = catalog.t_down(l, h)?;
                    let w = -((cutoff + l + dim - 2) as f64);
                    let mut target = g.slice_mut(s![
                        block_starts[l - 1]..block_starts[l],
                        block_starts[l]..block_starts[l + 1]
                    ]);
                    target += &(down * w);
                }
            }
            cross.push(g);
        }

        Ok(EmbeddedIrrep {
            dim,
            cutoff,
            catalog,
            n,
            block_starts,
            cross,
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
    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn catalog(&self) -> &BasisCatalog {
        &self.catalog
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

    /// Matrix of `i L_(H, K)` for any pair of axes up to `D + 1`.
    pub fn rotation(&self, h: usize, k: usize) -> Result<Array2<f64>> {
        let bold = self.dim + 1;
        if h < 1 || h > bold || k < 1 || k > bold {
            return Err(Error::InvalidIndexEntry {
                entry: h.max(k),
                dim: bold,
            });
        }
        if h == k {
            return Ok(Array2::zeros((self.n, self.n)));
        }
        if h == bold {
            return Ok(-self.rotation(k, h)?);
        }
        if k == bold {
            return Ok(self.cross[h - 1].clone());
        }
        self.base_rotation(h, k)
    }

    /// Blockwise rotation generator within the base axes.
    fn base_rotation(&self, h: usize, k: usize) -> Result<Array2<f64>> {
        let (lo, hi, sign) = if h < k { (h, k, 1.0) } else { (k, h, -1.0) };
        let mut g = Array2::<f64>::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            let act = self.catalog.l_action(l, lo, hi)?;
            let mut target = g.slice_mut(s![
                self.block_starts[l]..self.block_starts[l + 1],
                self.block_starts[l]..self.block_starts[l + 1]
            ]);
            target += &(act * sign);
        }
        Ok(g)
    }

    /// Diagonal of the degree operator: eigenvalue `l` on block `l`.
    #[must_use]
    pub fn degree_diagonal(&self) -> Array1<f64> {
        let mut d = Array1::zeros(self.n);
        for l in 0..=self.cutoff {
            for i in self.block_starts[l]..self.block_starts[l + 1] {
                d[i] = l as f64;
            }
        }
        d
    }

    /// Quadratic Casimir over all axes including the extra one.
    pub fn casimir_full(&self) -> Result<Array2<f64>> {
        let mut acc = Array2::<f64>::zeros((self.n, self.n));
        for (h, k) in generator_pairs(self.dim + 1) {
            let g = self.rotation(h, k)?;
            acc -= &g.dot(&g);
        }
        Ok(acc)
    }

    /// Quadratic Casimir of the base rotations only.
    pub fn casimir_base(&self) -> Result<Array2<f64>> {
        let mut acc = Array2::<f64>::zeros((self.n, self.n));
        for (h, k) in generator_pairs(self.dim) {
            let g = self.base_rotation(h, k)?;
            acc -= &g.dot(&g);
        }
        Ok(acc)
    }

    /// Worst deviation of the full generator set from the rotation
    /// bracket.
    pub fn closure_residual(&self) -> Result<f64> {
        let bold = self.dim + 1;
        let pairs = generator_pairs(bold);
        let mut worst = 0.0_f64;
        for &(i, j) in &pairs {
            for &(h, k) in &pairs {
                let lhs = linalg::commutator(&self.rotation(i, j)?, &self.rotation(h, k)?);
                let mut expect = Array2::<f64>::zeros((self.n, self.n));
                if j == h {
                    expect += &self.rotation(i, k)?;
                }
                if i == h {
                    expect -= &self.rotation(j, k)?;
                }
                if j == k {
                    expect -= &self.rotation(i, h)?;
                }
                if i == k {
                    expect += &self.rotation(j, h)?;
                }
                worst = worst.max(linalg::max_abs(&(lhs - expect)));
            }
        }
        Ok(worst)
    }

    /// Worst deviation of the full Casimir from its irreducible value
    /// `cutoff (cutoff + D - 1)`.
    pub fn casimir_residual(&self) -> Result<f64> {
        let expect = casimir_eigenvalue(self.dim + 1, self.cutoff);
        let eye: Array2<f64> = Array2::eye(self.n);
        Ok(linalg::max_abs(&(self.casimir_full()? - eye * expect)))
    }

    /// Worst deviation of the base Casimir from `deg (deg + D - 2)` built
    /// out of the degree diagonal.
    pub fn branching_residual(&self) -> Result<f64> {
        let cas = self.casimir_base()?;
        let deg = self.degree_diagonal();
        let mut expect = Array2::<f64>::zeros((self.n, self.n));
        for i in 0..self.n {
            expect[(i, i)] = deg[i] * (deg[i] + (self.dim as f64) - 2.0);
        }
        Ok(linalg::max_abs(&(cas - expect)))
    }

    /// The coordinate operator realized on this side: the extra-axis
    /// generator conjugated by the block scalars.
    pub fn coordinate(&self, axis: usize, factor: &SpectralFactor) -> Result<Array2<Complex64>> {
        if axis < 1 || axis > self.dim {
            return Err(Error::InvalidIndexEntry {
                entry: axis,
                dim: self.dim,
            });
        }
        if factor.len() != self.cutoff + 1 {
            return Err(Error::InvalidArgument(format!(
                "spectral factor covers {} degrees, space has {}",
                factor.len(),
                self.cutoff + 1
            )));
        }
        let m = self.block_diagonal(factor.values());
        // X^axis = L_(D+1, axis) = i (i L_(axis, D+1)).
        let real = m.dot(&self.cross[axis - 1]).dot(&m);
        Ok(real.mapv(|v| Complex64::new(0.0, v)))
    }

    /// The rotation generator realized on this side, as the complex
    /// matrix of `L_(h, k)`.
    pub fn rotation_complex(&self, h: usize, k: usize) -> Result<Array2<Complex64>> {
        Ok(self.rotation(h, k)?.mapv(|v| Complex64::new(0.0, -v)))
    }

    fn block_diagonal(&self, per_level: &[f64]) -> Array2<f64> {
        let mut m = Array2::<f64>::zeros((self.n, self.n));
        for l in 0..=self.cutoff {
            for i in self.block_starts[l]..self.block_starts[l + 1] {
                m[(i, i)] = per_level[l];
            }
        }
        m
    }

    /// State correspondence from the orthonormal frame of the algebra's
    /// state space into the factorized coordinates here: frame vectors
    /// carried blockwise with the degree weights.
    pub fn state_map(&self, alg: &FuzzyAlgebra) -> Result<Array2<Complex64>> {
        self.check_match(alg)?;
        let weights = block_weights(self.cutoff, self.dim);
        let mut m = Array2::from_elem((self.n, self.n), Complex64::new(0.0, 0.0));
        for l in 0..=self.cutoff {
            let frame = self.catalog.level(l)?.frame();
            let range = self.block_range(l)?;
            for (bi, i) in range.clone().enumerate() {
                for (bj, j) in range.clone().enumerate() {
                    m[(i, j)] = weights[l] * frame[(bi, bj)];
                }
            }
        }
        Ok(m)
    }

    /// Condition number of the state correspondence.
    pub fn state_map_condition(&self, alg: &FuzzyAlgebra) -> Result<f64> {
        let m = self.state_map(alg)?;
        let mut mtm = Array2::<f64>::zeros((self.n, self.n));
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..self.n {
                    acc += m[(r, i)].conj() * m[(r, j)];
                }
                mtm[(i, j)] = acc.re;
            }
        }
        let eig = linalg::symmetric_eigenvalues(&mtm)?;
        let lo = eig[0];
        let hi = eig[eig.len() - 1];
        if lo <= 0.0 {
            return Err(Error::RankMismatch {
                level: self.cutoff,
                found: eig.iter().filter(|&&x| x > 0.0).count(),
                expected: self.n,
            });
        }
        Ok((hi / lo).sqrt())
    }

    /// Worst intertwining residual over all generators: applying an
    /// operator then mapping the state agrees with mapping first and
    /// applying the realized operator.
    pub fn compatibility_residual(&self, alg: &FuzzyAlgebra) -> Result<f64> {
        self.check_match(alg)?;
        let vk = self.state_map(alg)?;
        let factor = spectral_factor(self.cutoff, alg.coupling(), self.dim)?;
        let mut worst = 0.0_f64;
        for axis in 1..=self.dim {
            let lhs = cdot_cr(&vk, alg.coordinate(axis)?);
            let rhs = cdot_cc(&self.coordinate(axis, &factor)?, &vk);
            worst = worst.max(cmax_abs(&(&lhs - &rhs)));
        }
        for (h, k) in generator_pairs(self.dim) {
            // Both sides carry the same -i; compare the real generators.
            let lhs = cdot_cr(&vk, &alg.rotation(h, k)?);
            let rhs = cdot_rc(&self.base_rotation(h, k)?, &vk);
            worst = worst.max(cmax_abs(&(&lhs - &rhs)));
        }
        Ok(worst)
    }

    /// Sign-conjugation equivariance: inverting one base axis flips the
    /// realized coordinate along it and fixes the others.
    pub fn parity_residual(&self, alg: &FuzzyAlgebra) -> Result<f64> {
        self.check_match(alg)?;
        let factor = spectral_factor(self.cutoff, alg.coupling(), self.dim)?;
        let mut worst = 0.0_f64;
        for flipped in 1..=self.dim {
            let signs = self.axis_signs(flipped)?;
            for axis in 1..=self.dim {
                let x = self.coordinate(axis, &factor)?;
                let expect = if axis == flipped { -1.0 } else { 1.0 };
                for ((i, j), v) in x.indexed_iter() {
                    let conj = signs[i] * signs[j] * v;
                    worst = worst.max((conj - expect * v).norm());
                }
            }
        }
        Ok(worst)
    }

    /// Diagonal signs of the inversion of one axis on the factorized
    /// basis: parity of the axis count in each selected word.
    fn axis_signs(&self, axis: usize) -> Result<Vec<f64>> {
        let mut signs = Vec::with_capacity(self.n);
        for l in 0..=self.cutoff {
            let level = self.catalog.level(l)?;
            for word in level.selected_words() {
                let count = word.iter().filter(|&&e| e == axis).count();
                signs.push(if count % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
        Ok(signs)
    }

    fn check_match(&self, alg: &FuzzyAlgebra) -> Result<()> {
        if alg.dim() != self.dim || alg.cutoff() != self.cutoff {
            return Err(Error::InvalidArgument(format!(
                "algebra is dim {} cutoff {}, embedded space is dim {} cutoff {}",
                alg.dim(),
                alg.cutoff(),
                self.dim,
                self.cutoff
            )));
        }
        Ok(())
    }
}

fn cdot_cr(a: &Array2<Complex64>, b: &Array2<f64>) -> Array2<Complex64> {
    let re = a.mapv(|z| z.re).dot(b);
    let im = a.mapv(|z| z.im).dot(b);
    Array2::from_shape_fn(re.dim(), |(i, j)| Complex64::new(re[(i, j)], im[(i, j)]))
}

fn cdot_rc(a: &Array2<f64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let re = a.dot(&b.mapv(|z| z.re));
    let im = a.dot(&b.mapv(|z| z.im));
    Array2::from_shape_fn(re.dim(), |(i, j)| Complex64::new(re[(i, j)], im[(i, j)]))
}

fn cdot_cc(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    let k = a.ncols();
    let m = b.ncols();
    let mut out = Array2::from_elem((n, m), Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..k {
                acc += a[(i, r)] * b[(r, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn cmax_abs(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0_f64, f64::max)
}

/// Samples the factorization of the embedded basis functions: each one
/// equals its scalar profile in the last coordinate times the base
/// harmonic of the renormalized parallel part.
pub fn factorization_residual(
    dim: usize,
    cutoff: usize,
    samples: usize,
    seed: u64,
    budget: &TensorBudget,
) -> Result<f64> {
    let base = BasisCatalog::with_budget(dim, cutoff, budget)?;
    let big = BasisCatalog::with_budget(dim + 1, cutoff, budget)?;
    let sampler = crate::sphere::SphereSampler::new(dim + 1, seed)?;
    let points = sampler.points(samples);
    let bold = dim + 1;

    let mut worst = 0.0_f64;
    let mut word = vec![0usize; cutoff];
    for l in 0..=cutoff {
        let level = base.level(l)?;
        let proj = base.projector(l)?;
        let side = dim.pow(l as u32);
        for (which, &sel) in level.selected_positions().iter().enumerate() {
            let row = crate::index::rank_of(dim, level.table().word(sel));
            for p in &points {
                let u = p[dim];
                let planar: Vec<f64> = p[..dim].to_vec();
                let r = planar.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r < 1e-3 {
                    continue;
                }
                let unit: Vec<f64> = planar.iter().map(|v| v / r).collect();

                // Left side: contract the base projector with embedded
                // harmonics whose tail points along the extra axis.
                let mut lhs = 0.0;
                for col in 0..side {
                    let p_entry = proj.entries()[(row, col)];
                    if p_entry == 0.0 {
                        continue;
                    }
                    crate::index::entries_of_rank(dim, col, &mut word[..l]);
                    let mut full = Vec::with_capacity(cutoff);
                    full.extend_from_slice(&word[..l]);
                    full.resize(cutoff, bold);
                    let coords = big.project_word(cutoff, &full)?;
                    lhs += p_entry * big.eval_vector(cutoff, &coords, p)?;
                }

                let rhs = profile_value(cutoff, l, dim, u)?
                    * base.eval_basis(l, which, &unit)?
                    * r.powi(l as i32);
                // The base harmonic is degree-l homogeneous; restoring
                // the parallel radius matches the embedded normalization.
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn profile_coefficient_examples() {
        // Degree zero tail: single leading one.
        assert_eq!(profile_coefficients(2, 2, 3).unwrap(), vec![1.0]);
        assert_eq!(profile_coefficients(3, 2, 4).unwrap(), vec![1.0]);
        // One step down: still a single term.
        assert_eq!(profile_coefficients(3, 2, 3).unwrap(), vec![1.0]);
        // Two steps down at dim 3: u^2 - 1/4.
        let c = profile_coefficients(2, 0, 3).unwrap();
        assert_eq!(c.len(), 2);
        assert_abs_diff_eq!(c[0], 1.0);
        assert_abs_diff_eq!(c[1], -0.25);
    }

    #[test]
    fn profiles_always_lead_with_one() {
        for dim in 2..=5 {
            for cutoff in 0..=4 {
                for l in 0..=cutoff {
                    let c = profile_coefficients(cutoff, l, dim).unwrap();
                    assert_abs_diff_eq!(c[0], 1.0);
                    assert_eq!(c.len(), (cutoff - l) / 2 + 1);
                }
            }
        }
    }

    #[test]
    fn factorization_on_sampled_points() {
        for (dim, cutoff) in [(2, 3), (3, 2), (3, 3)] {
            let r = factorization_residual(dim, cutoff, 40, 7, &TensorBudget::default()).unwrap();
            assert!(r < 1e-10, "dim {dim} cutoff {cutoff}: residual {r}");
        }
    }

    #[test]
    fn trivial_space_has_zero_generators() {
        let emb = EmbeddedIrrep::new(3, 0).unwrap();
        assert_eq!(emb.matrix_dim(), 1);
        for h in 1..=4 {
            for k in 1..=4 {
                assert_eq!(emb.rotation(h, k).unwrap()[(0, 0)], 0.0);
            }
        }
    }

    #[test]
    fn cross_action_blocks_at_cutoff_one() {
        // Degree 0 to 1: weight cutoff - 0 = 1 on the plain raise map;
        // degree 1 to 0: weight -(cutoff + 1 + dim - 2) times the lowering
        // map, which carries 1/dim itself.
        let emb = EmbeddedIrrep::new(3, 1).unwrap();
        for h in 1..=3usize {
            let g = &emb.rotation(h, 4).unwrap();
            for i in 0..3 {
                let want_up = if i == h - 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(1 + i, 0)], want_up, epsilon = 1e-12);
                let want_down = if i == h - 1 { -1.0 } else { 0.0 };
                assert_abs_diff_eq!(g[(0, 1 + i)], want_down, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generators_close_and_casimir_is_scalar() {
        for (dim, cutoff) in [(2, 2), (3, 1), (3, 2), (4, 1)] {
            let emb = EmbeddedIrrep::new(dim, cutoff).unwrap();
            let closure = emb.closure_residual().unwrap();
            assert!(closure < 1e-10, "dim {dim} cutoff {cutoff}: {closure}");
            let casimir = emb.casimir_residual().unwrap();
            assert!(casimir < 1e-10, "dim {dim} cutoff {cutoff}: {casimir}");
        }
    }

    #[test]
    fn branching_blocks_carry_base_casimir() {
        for (dim, cutoff) in [(2, 3), (3, 2), (4, 2)] {
            let emb = EmbeddedIrrep::new(dim, cutoff).unwrap();
            let r = emb.branching_residual().unwrap();
            assert!(r < 1e-10, "dim {dim} cutoff {cutoff}: {r}");
        }
    }

    #[test]
    fn degree_diagonal_squares_to_base_casimir() {
        let emb = EmbeddedIrrep::new(3, 2).unwrap();
        let deg = emb.degree_diagonal();
        let cas = emb.casimir_base().unwrap();
        for i in 0..emb.matrix_dim() {
            assert_abs_diff_eq!(cas[(i, i)], deg[i] * (deg[i] + 1.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn spectral_factor_values_are_positive() {
        for dim in 2..=4 {
            for cutoff in 0..=3 {
                let k = crate::algebra::default_coupling(dim, cutoff);
                let f = spectral_factor(cutoff, k, dim).unwrap();
                assert_eq!(f.len(), cutoff + 1);
                for l in 0..=cutoff {
                    assert!(f.value(l) > 0.0 && f.value(l).is_finite());
                }
            }
        }
    }

    #[test]
    fn spectral_factor_moves_smoothly_with_coupling() {
        let f1 = spectral_factor(2, 36.0, 3).unwrap();
        let f2 = spectral_factor(2, 72.0, 3).unwrap();
        for l in 0..=2 {
            let ratio = f2.value(l) / f1.value(l);
            assert!(ratio > 0.8 && ratio < 1.2, "degree {l}: ratio {ratio}");
        }
    }

    #[test]
    fn spectral_factor_regression_values() {
        // Dim 3, cutoff 2, coupling 36: archived from the first verified
        // run of the intertwining suite.
        let f = spectral_factor(2, 36.0, 3).unwrap();
        assert_abs_diff_eq!(f.value(0), 5.7735027294957131e-1, epsilon = 1e-12);
        assert_abs_diff_eq!(f.value(1), 6.2081934702994135e-1, epsilon = 1e-12);
        assert_abs_diff_eq!(f.value(2), 7.5932640154704678e-1, epsilon = 1e-12);
    }

    #[test]
    fn spectral_factor_rejects_bad_coupling() {
        assert!(spectral_factor(2, 0.0, 3).is_err());
        assert!(spectral_factor(2, -1.0, 3).is_err());
        assert!(spectral_factor(2, f64::NAN, 3).is_err());
    }

    #[test]
    fn block_weight_examples() {
        let w = block_weights(1, 3);
        assert_eq!(w[0], Complex64::new(1.0, 0.0));
        // i sqrt(1/3).
        assert_abs_diff_eq!(w[1].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1].im, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
        // Moduli strictly decrease.
        for cutoff in 1..=4usize {
            let w = block_weights(cutoff, 3);
            for l in 1..w.len() {
                assert!(w[l].norm() < w[l - 1].norm());
            }
        }
    }

    #[test]
    fn state_map_is_invertible() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let emb = EmbeddedIrrep::new(3, 2).unwrap();
        let cond = emb.state_map_condition(&alg).unwrap();
        assert!(cond.is_finite() && cond >= 1.0);
    }

    #[test]
    fn realized_generators_intertwine_exactly() {
        for (dim, cutoff) in [(2, 2), (3, 1), (3, 2), (3, 3), (4, 2)] {
            let alg = FuzzyAlgebra::new(dim, cutoff).unwrap();
            let emb = EmbeddedIrrep::new(dim, cutoff).unwrap();
            let r = emb.compatibility_residual(&alg).unwrap();
            assert!(r < 1e-8, "dim {dim} cutoff {cutoff}: residual {r}");
        }
    }

    #[test]
    fn axis_inversion_flips_realized_coordinates() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let emb = EmbeddedIrrep::new(3, 2).unwrap();
        let r = emb.parity_residual(&alg).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn mismatched_pair_is_rejected() {
        let alg = FuzzyAlgebra::new(3, 1).unwrap();
        let emb = EmbeddedIrrep::new(3, 2).unwrap();
        assert!(emb.compatibility_residual(&alg).is_err());
    }
}
