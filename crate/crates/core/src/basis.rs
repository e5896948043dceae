//! Harmonic coordinate basis on the sphere: the functions `T_l^I` obtained
//! by applying the trace-free symmetric projector to coordinate monomials,
//! their exact Gram matrices, a deterministic choice of independent
//! multi-indices, and the action of rotations and coordinate
//! multiplication in those coordinates.
//!
//! Everything is exact up to floating point: inner products come from
//! closed-form monomial integrals, never from quadrature.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::budget::TensorBudget;
use crate::error::{Error, Result};
use crate::index::{binomial, entries_of_rank, rank_of, NondecreasingTable};
use crate::linalg;
use crate::projector::{irrep_dimension, ProjectorBank, ProjectorTensor};
use crate::sphere::monomial_integral;

/// Eigenvalue of the quadratic rotation Casimir on degree-`l` harmonics,
/// `E_l = l (l + D - 2)`.
#[must_use]
pub fn casimir_eigenvalue(dim: usize, l: usize) -> f64 {
    (l * (l + dim - 2)) as f64
}

/// Relative eigenvalue threshold for pivot acceptance in basis selection.
const PIVOT_THRESHOLD: f64 = 1e-8;

/// One harmonic degree: Gram data and coordinate maps for `V_D^l`.
#[derive(Debug, Clone)]
pub struct BasisLevel {
    l: usize,
    table: NondecreasingTable,
    /// Exponent vector of each nondecreasing word.
    exponents: Vec<Vec<usize>>,
    /// `R[j, m]`: coefficient of monomial `m` in the polynomial `T^(word j)`.
    collapsed: Array2<f64>,
    /// Pairwise monomial integrals `<t^m, t^n>`.
    moment: Array2<f64>,
    /// Gram of all `T^(word)` over nondecreasing words: `R M R^T`.
    gram_full: Array2<f64>,
    /// Positions into `table`, in pivot order.
    selected: Vec<usize>,
    gram: Array2<f64>,
    gram_chol: Array2<f64>,
    /// Columns form a Gram-orthonormal basis: `frame^T gram frame = 1`.
    frame: Array2<f64>,
    /// `T^(any word)` expressed over the selected words, one column per
    /// nondecreasing word.
    word_to_selected: Array2<f64>,
    /// Fitted scale in `gram = h * P^l` restricted to selected words.
    h: f64,
    /// `max |gram - h P| / h`.
    h_residual: f64,
}

impl BasisLevel {
    fn build(dim: usize, l: usize, proj: &ProjectorTensor) -> Result<Self> {
        let table = NondecreasingTable::new(dim, l);
        let n_mono = table.len();
        let side = dim.pow(l as u32);

        let exponents: Vec<Vec<usize>> = table
            .iter()
            .map(|w| {
                let mut e = vec![0usize; dim];
                for &axis in w {
                    e[axis - 1] += 1;
                }
                e
            })
            .collect();

        // Collapse projector rows over column multisets.
        let mut collapsed = Array2::zeros((n_mono, n_mono));
        let mut digits = vec![0usize; l];
        for j in 0..n_mono {
            let row = rank_of(dim, table.word(j));
            for col in 0..side {
                let p = proj.entries()[(row, col)];
                if p == 0.0 {
                    continue;
                }
                entries_of_rank(dim, col, &mut digits);
                let m = table.position_of_word(&digits);
                collapsed[(j, m)] += p;
            }
        }

        let mut moment = Array2::zeros((n_mono, n_mono));
        let mut merged = vec![0usize; dim];
        for a in 0..n_mono {
            for b in a..n_mono {
                for i in 0..dim {
                    merged[i] = exponents[a][i] + exponents[b][i];
                }
                let v = monomial_integral(dim, &merged)?;
                moment[(a, b)] = v;
                moment[(b, a)] = v;
            }
        }

        let gram_full = collapsed.dot(&moment).dot(&collapsed.t());

        let expected = irrep_dimension(dim, l);
        let selected = pivoted_selection(&gram_full, expected, l)?;

        let n_sel = selected.len();
        let mut gram = Array2::zeros((n_sel, n_sel));
        for (a, &ia) in selected.iter().enumerate() {
            for (b, &ib) in selected.iter().enumerate() {
                gram[(a, b)] = gram_full[(ia, ib)];
            }
        }
        let gram_chol = linalg::cholesky_lower(&gram)?;
        let frame = linalg::lower_triangular_inverse(&gram_chol)?.t().to_owned();

        // T^(word) for any word lies in the span of the selected ones;
        // the Gram projection recovers its coefficients exactly.
        let mut word_to_selected = Array2::zeros((n_sel, n_mono));
        let mut rhs = Array1::zeros(n_sel);
        for m in 0..n_mono {
            for (a, &ia) in selected.iter().enumerate() {
                rhs[a] = gram_full[(ia, m)];
            }
            let coeffs = linalg::cholesky_solve(&gram_chol, &rhs);
            word_to_selected.column_mut(m).assign(&coeffs);
        }

        // Proportionality gram = h P^l over the selected words.
        let mut dot_pg = 0.0;
        let mut dot_pp = 0.0;
        for (a, &ia) in selected.iter().enumerate() {
            for (b, &ib) in selected.iter().enumerate() {
                let p = proj.entry(table.word(ia), table.word(ib));
                dot_pg += p * gram[(a, b)];
                dot_pp += p * p;
            }
        }
        let h = dot_pg / dot_pp;
        let mut h_residual = 0.0_f64;
        for (a, &ia) in selected.iter().enumerate() {
            for (b, &ib) in selected.iter().enumerate() {
                let p = proj.entry(table.word(ia), table.word(ib));
                h_residual = h_residual.max((gram[(a, b)] - h * p).abs());
            }
        }
        h_residual /= h.abs();

        Ok(BasisLevel {
            l,
            table,
            exponents,
            collapsed,
            moment,
            gram_full,
            selected,
            gram,
            gram_chol,
            frame,
            word_to_selected,
            h,
            h_residual,
        })
    }

    #[must_use]
    pub fn degree(&self) -> usize {
        self.l
    }

    #[must_use]
    pub fn count(&self) -> usize {
        self.selected.len()
    }

    #[must_use]
    pub fn table(&self) -> &NondecreasingTable {
        &self.table
    }

    #[must_use]
    pub fn selected_positions(&self) -> &[usize] {
        &self.selected
    }

    /// Selected multi-indices in pivot order.
    #[must_use]
    pub fn selected_words(&self) -> Vec<&[usize]> {
        self.selected.iter().map(|&i| self.table.word(i)).collect()
    }

    #[must_use]
    pub fn gram(&self) -> &Array2<f64> {
        &self.gram
    }

    #[must_use]
    pub fn gram_full(&self) -> &Array2<f64> {
        &self.gram_full
    }

    #[must_use]
    pub fn frame(&self) -> &Array2<f64> {
        &self.frame
    }

    #[must_use]
    pub fn collapsed(&self) -> &Array2<f64> {
        &self.collapsed
    }

    #[must_use]
    pub fn moment(&self) -> &Array2<f64> {
        &self.moment
    }

    #[must_use]
    pub fn scale(&self) -> f64 {
        self.h
    }

    #[must_use]
    pub fn scale_residual(&self) -> f64 {
        self.h_residual
    }

    #[must_use]
    pub fn word_to_selected(&self) -> &Array2<f64> {
        &self.word_to_selected
    }

    /// Solves `gram x = rhs`.
    #[must_use]
    pub fn solve_gram(&self, rhs: &Array1<f64>) -> Array1<f64> {
        linalg::cholesky_solve(&self.gram_chol, rhs)
    }

    /// `<T^I, t^monomial>` for selected `I`, one column per nondecreasing
    /// monomial.
    #[must_use]
    pub fn monomial_overlap(&self) -> Array2<f64> {
        let n_sel = self.selected.len();
        let n_mono = self.table.len();
        let mut r_sel = Array2::zeros((n_sel, n_mono));
        for (a, &ia) in self.selected.iter().enumerate() {
            r_sel.row_mut(a).assign(&self.collapsed.row(ia));
        }
        r_sel.dot(&self.moment)
    }
}

/// Pivoted Cholesky on the full Gram; pivots by largest residual norm,
/// ties broken lexicographically (table order is lexicographic).
fn pivoted_selection(gram_full: &Array2<f64>, expected: usize, l: usize) -> Result<Vec<usize>> {
    let n = gram_full.nrows();
    let mut diag: Vec<f64> = (0..n).map(|i| gram_full[(i, i)]).collect();
    let scale = diag.iter().fold(0.0_f64, |m, &x| m.max(x));
    let threshold = PIVOT_THRESHOLD * scale;
    let mut factors: Vec<Array1<f64>> = Vec::with_capacity(expected);
    let mut selected: Vec<usize> = Vec::with_capacity(expected);
    let mut used = vec![false; n];
    for _ in 0..expected {
        let mut best = usize::MAX;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..n {
            if used[i] {
                continue;
            }
            // Strictly-greater keeps the lexicographically first index on ties.
            if diag[i] > best_val + 1e-14 * scale {
                best = i;
                best_val = diag[i];
            }
        }
        if best == usize::MAX || best_val <= threshold {
            return Err(Error::RankMismatch {
                level: l,
                found: selected.len(),
                expected,
            });
        }
        let pivot = best;
        used[pivot] = true;
        selected.push(pivot);
        let mut col = Array1::zeros(n);
        for j in 0..n {
            let mut v = gram_full[(j, pivot)];
            for f in &factors {
                v -= f[j] * f[pivot];
            }
            col[j] = v / best_val.sqrt();
        }
        for j in 0..n {
            diag[j] -= col[j] * col[j];
        }
        factors.push(col);
    }
    // No residual rank may remain beyond the expected count.
    let leftover = (0..n)
        .filter(|&i| !used[i])
        .fold(0.0_f64, |m, i| m.max(diag[i]));
    if leftover > threshold {
        return Err(Error::RankMismatch {
            level: l,
            found: expected + 1,
            expected,
        });
    }
    Ok(selected)
}

/// Per-degree dump matching the documented JSON layout.
#[derive(Debug, Clone, Serialize)]
pub struct LevelDump {
    pub l: usize,
    pub indices: Vec<Vec<usize>>,
    pub gram: Vec<f64>,
    pub h_l: f64,
}

/// The harmonic basis for all degrees `0..=lmax` over one sphere, with
/// rotation generators and coordinate multiplication in the selected
/// coordinates.
#[derive(Debug, Clone)]
pub struct BasisCatalog {
    dim: usize,
    lmax: usize,
    bank: ProjectorBank,
    levels: Vec<BasisLevel>,
    /// `iL_(hk)` on each level, keyed by pair position `h < k`.
    l_actions: Vec<Vec<Array2<f64>>>,
    /// Degree-raising part of multiplication by `t^axis`, level `l` to `l+1`.
    t_ups: Vec<Vec<Array2<f64>>>,
    /// Degree-lowering part including its coefficient `l / (D + 2l - 2)`.
    t_downs: Vec<Vec<Array2<f64>>>,
}

/// Ordered list of generator pairs `(h, k)`, `1 <= h < k <= D`.
#[must_use]
pub fn generator_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(dim * (dim - 1) / 2);
    for h in 1..=dim {
        for k in (h + 1)..=dim {
            pairs.push((h, k));
        }
    }
    pairs
}

impl BasisCatalog {
    pub fn new(dim: usize, lmax: usize) -> Result<Self> {
        Self::with_budget(dim, lmax, &TensorBudget::default())
    }

    pub fn with_budget(dim: usize, lmax: usize, budget: &TensorBudget) -> Result<Self> {
        let bank = ProjectorBank::new(dim, lmax, budget)?;
        let mut levels = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            levels.push(BasisLevel::build(dim, l, bank.get(l)?)?);
        }

        let pairs = generator_pairs(dim);
        let mut l_actions = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            let mut per_pair = Vec::with_capacity(pairs.len());
            for &(h, k) in &pairs {
                per_pair.push(build_l_action(dim, l, bank.get(l)?, &levels[l], h, k));
            }
            l_actions.push(per_pair);
        }

        let mut t_ups = Vec::with_capacity(lmax);
        for l in 0..lmax {
            let mut per_axis = Vec::with_capacity(dim);
            for axis in 1..=dim {
                per_axis.push(build_t_up(&levels[l], &levels[l + 1], axis));
            }
            t_ups.push(per_axis);
        }

        let mut t_downs = Vec::with_capacity(lmax);
        for l in 1..=lmax {
            let mut per_axis = Vec::with_capacity(dim);
            for axis in 1..=dim {
                per_axis.push(build_t_down(
                    dim,
                    l,
                    bank.get(l)?,
                    &levels[l],
                    &levels[l - 1],
                    axis,
                ));
            }
            t_downs.push(per_axis);
        }

        Ok(BasisCatalog {
            dim,
            lmax,
            bank,
            levels,
            l_actions,
            t_ups,
            t_downs,
        })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn level(&self, l: usize) -> Result<&BasisLevel> {
        self.levels.get(l).ok_or(Error::LevelOutOfRange {
            level: l,
            max: self.lmax,
        })
    }

    pub fn projector(&self, l: usize) -> Result<&ProjectorTensor> {
        self.bank.get(l)
    }

    fn pair_position(&self, h: usize, k: usize) -> Result<usize> {
        if h < 1 || k <= h || k > self.dim {
            return Err(Error::InvalidArgument(format!(
                "generator pair ({h}, {k}) needs 1 <= h < k <= {}",
                self.dim
            )));
        }
        // Pairs are ordered lexicographically.
        let before_h: usize = (1..h).map(|a| self.dim - a).sum();
        Ok(before_h + (k - h - 1))
    }

    /// Matrix of `i L_(hk)` on `V^l` in selected coordinates.  Real, and
    /// Gram-antisymmetric.
    pub fn l_action(&self, l: usize, h: usize, k: usize) -> Result<&Array2<f64>> {
        let p = self.pair_position(h, k)?;
        self.level(l)?;
        Ok(&self.l_actions[l][p])
    }

    /// Same operator built from the degree-`(l+1)` projector instead of the
    /// degree-`l` one; retained as an independent cross-check.
    pub fn l_action_alt(&self, l: usize, h: usize, k: usize) -> Result<Array2<f64>> {
        if l + 1 > self.lmax {
            return Err(Error::LevelOutOfRange {
                level: l + 1,
                max: self.lmax,
            });
        }
        self.pair_position(h, k)?;
        Ok(build_l_action_alt(
            self.dim,
            l,
            self.bank.get(l + 1)?,
            &self.levels[l],
            h,
            k,
        ))
    }

    /// Degree-raising block of multiplication by `t^axis`: the image of
    /// `T_l^I` is `T_(l+1)^((axis, I))` plus a degree-lowering part.
    pub fn t_up(&self, l: usize, axis: usize) -> Result<&Array2<f64>> {
        self.check_axis(axis)?;
        if l >= self.lmax {
            return Err(Error::LevelOutOfRange {
                level: l + 1,
                max: self.lmax,
            });
        }
        Ok(&self.t_ups[l][axis - 1])
    }

    /// Degree-lowering block of multiplication by `t^axis`, including its
    /// coefficient `l / (D + 2l - 2)`.
    pub fn t_down(&self, l: usize, axis: usize) -> Result<&Array2<f64>> {
        self.check_axis(axis)?;
        if l < 1 || l > self.lmax {
            return Err(Error::LevelOutOfRange {
                level: l,
                max: self.lmax,
            });
        }
        Ok(&self.t_downs[l - 1][axis - 1])
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < 1 || axis > self.dim {
            return Err(Error::InvalidIndexEntry {
                entry: axis,
                dim: self.dim,
            });
        }
        Ok(())
    }

    /// Quadratic Casimir `sum_(h<k) -(iL_(hk))^2` on `V^l`; equals
    /// `E_l = l (l + D - 2)` times the identity.
    pub fn casimir_matrix(&self, l: usize) -> Result<Array2<f64>> {
        let level = self.level(l)?;
        let n = level.count();
        let mut acc = Array2::zeros((n, n));
        for a in &self.l_actions[l] {
            acc -= &a.dot(a);
        }
        Ok(acc)
    }

    /// Value of the basis function for the `which`-th selected index at a
    /// point of the sphere.
    pub fn eval_basis(&self, l: usize, which: usize, point: &[f64]) -> Result<f64> {
        let level = self.level(l)?;
        self.validate_point(point)?;
        if which >= level.count() {
            return Err(Error::InvalidArgument(format!(
                "basis position {which} out of range {}",
                level.count()
            )));
        }
        let row = level.selected[which];
        Ok(self.eval_collapsed_row(level, row, point))
    }

    /// Value of `sum_I coeffs_I T_l^I` at a point.
    pub fn eval_vector(&self, l: usize, coeffs: &Array1<f64>, point: &[f64]) -> Result<f64> {
        let level = self.level(l)?;
        self.validate_point(point)?;
        if coeffs.len() != level.count() {
            return Err(Error::InvalidArgument(format!(
                "coefficient length {} vs basis size {}",
                coeffs.len(),
                level.count()
            )));
        }
        let mut acc = 0.0;
        for (c, &row) in level.selected.iter().enumerate() {
            if coeffs[c] != 0.0 {
                acc += coeffs[c] * self.eval_collapsed_row(level, row, point);
            }
        }
        Ok(acc)
    }

    fn eval_collapsed_row(&self, level: &BasisLevel, row: usize, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for m in 0..level.table.len() {
            let c = level.collapsed[(row, m)];
            if c == 0.0 {
                continue;
            }
            let mut mono = 1.0;
            for (axis, &e) in level.exponents[m].iter().enumerate() {
                for _ in 0..e {
                    mono *= point[axis];
                }
            }
            acc += c * mono;
        }
        acc
    }

    fn validate_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.dim
            )));
        }
        let norm2: f64 = point.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::PointOffSphere { norm2 });
        }
        Ok(())
    }

    /// Coefficients of `T_l^(word)` over the selected basis, for an
    /// arbitrary word.
    pub fn project_word(&self, l: usize, word: &[usize]) -> Result<Array1<f64>> {
        let level = self.level(l)?;
        if word.len() != l {
            return Err(Error::InvalidArgument(format!(
                "word length {} vs degree {l}",
                word.len()
            )));
        }
        for &e in word {
            if e < 1 || e > self.dim {
                return Err(Error::InvalidIndexEntry {
                    entry: e,
                    dim: self.dim,
                });
            }
        }
        let m = level.table.position_of_word(word);
        Ok(level.word_to_selected.column(m).to_owned())
    }

    /// Coefficients of `sum_m c_m T_l^(word_m)` over the selected basis,
    /// with `c` indexed by the nondecreasing word table.
    pub fn project_multiset(&self, l: usize, coeffs: &Array1<f64>) -> Result<Array1<f64>> {
        let level = self.level(l)?;
        if coeffs.len() != level.table.len() {
            return Err(Error::InvalidArgument(format!(
                "multiset coefficient length {} vs {}",
                coeffs.len(),
                level.table.len()
            )));
        }
        Ok(level.word_to_selected.dot(coeffs))
    }

    /// Selected coordinates of the weight vector `(t^h + i t^k)^l`; its
    /// conjugate gives the opposite weight.  `iL_(hk)` has eigenvalue
    /// `i l` on it.
    pub fn weight_vector(&self, l: usize, h: usize, k: usize) -> Result<Array1<Complex64>> {
        self.pair_position(h, k)?;
        let level = self.level(l)?;
        let overlap = level.monomial_overlap();
        let n_sel = level.count();
        let mut rhs_re = Array1::zeros(n_sel);
        let mut rhs_im = Array1::zeros(n_sel);
        for j in 0..=l {
            // C(l, j) i^j on the monomial h^(l-j) k^j.
            let mut word: Vec<usize> = Vec::with_capacity(l);
            word.extend(std::iter::repeat(h).take(l - j));
            word.extend(std::iter::repeat(k).take(j));
            word.sort_unstable();
            let m = level.table.position_of_word(&word);
            let c = binomial(l, j) as f64;
            let phase = j % 4;
            for a in 0..n_sel {
                let ov = overlap[(a, m)];
                match phase {
                    0 => rhs_re[a] += c * ov,
                    1 => rhs_im[a] += c * ov,
                    2 => rhs_re[a] -= c * ov,
                    _ => rhs_im[a] -= c * ov,
                }
            }
        }
        let re = level.solve_gram(&rhs_re);
        let im = level.solve_gram(&rhs_im);
        Ok(Array1::from_iter(
            re.iter()
                .zip(im.iter())
                .map(|(&a, &b)| Complex64::new(a, b)),
        ))
    }

    pub fn level_dump(&self, l: usize) -> Result<LevelDump> {
        let level = self.level(l)?;
        Ok(LevelDump {
            l,
            indices: level
                .selected_words()
                .into_iter()
                .map(|w| w.to_vec())
                .collect(),
            gram: level.gram.iter().cloned().collect(),
            h_l: level.h,
        })
    }
}

fn build_l_action(
    dim: usize,
    l: usize,
    proj: &ProjectorTensor,
    level: &BasisLevel,
    h: usize,
    k: usize,
) -> Array2<f64> {
    let n_sel = level.count();
    let mut out = Array2::zeros((n_sel, n_sel));
    if l == 0 {
        return out;
    }
    let side = dim.pow(l as u32);
    let n_mono = level.table.len();
    let mut digits = vec![0usize; l];
    let mut scratch = vec![0usize; l];
    for (c, &selpos) in level.selected.iter().enumerate() {
        let row = rank_of(dim, level.table.word(selpos));
        let mut coeff = Array1::zeros(n_mono);
        for col in 0..side {
            let p = proj.entries()[(row, col)];
            if p == 0.0 {
                continue;
            }
            entries_of_rank(dim, col, &mut digits);
            if digits[0] == k {
                scratch[0] = h;
                scratch[1..].copy_from_slice(&digits[1..]);
                scratch.sort_unstable();
                coeff[level.table.position_of(&scratch)] += p;
            }
            if digits[0] == h {
                scratch[0] = k;
                scratch[1..].copy_from_slice(&digits[1..]);
                scratch.sort_unstable();
                coeff[level.table.position_of(&scratch)] -= p;
            }
        }
        let col_out = level.word_to_selected.dot(&coeff) * l as f64;
        out.column_mut(c).assign(&col_out);
    }
    out
}

/// Alternative form of the generator action through the degree-`(l+1)`
/// projector.
fn build_l_action_alt(
    dim: usize,
    l: usize,
    proj_up: &ProjectorTensor,
    level: &BasisLevel,
    h: usize,
    k: usize,
) -> Array2<f64> {
    let n_sel = level.count();
    let mut out = Array2::zeros((n_sel, n_sel));
    let side = dim.pow(l as u32);
    let n_mono = level.table.len();
    let factor = (l + 1) as f64 * (dim + 2 * l - 2) as f64 / (dim + 2 * l) as f64;
    let mut digits = vec![0usize; l];
    for (c, &selpos) in level.selected.iter().enumerate() {
        let word = level.table.word(selpos);
        // rank of (h, word) = (h - 1) D^l + rank(word); same for k.
        let rank_word = rank_of(dim, word);
        let row_h = (h - 1) * side + rank_word;
        let row_k = (k - 1) * side + rank_word;
        let mut coeff = Array1::zeros(n_mono);
        for col in 0..side {
            entries_of_rank(dim, col, &mut digits);
            let col_k = (k - 1) * side + col;
            let col_h = (h - 1) * side + col;
            let v = proj_up.entries()[(row_h, col_k)] - proj_up.entries()[(row_k, col_h)];
            if v != 0.0 {
                coeff[level.table.position_of_word(&digits)] += v;
            }
        }
        let col_out = level.word_to_selected.dot(&coeff) * factor;
        out.column_mut(c).assign(&col_out);
    }
    out
}

fn build_t_up(level: &BasisLevel, level_up: &BasisLevel, axis: usize) -> Array2<f64> {
    let n_from = level.count();
    let n_to = level_up.count();
    let mut out = Array2::zeros((n_to, n_from));
    let mut word = vec![0usize; level.degree() + 1];
    for (c, &selpos) in level.selected.iter().enumerate() {
        word[0] = axis;
        word[1..].copy_from_slice(level.table.word(selpos));
        word.sort_unstable();
        let m = level_up.table.position_of(&word);
        out.column_mut(c)
            .assign(&level_up.word_to_selected.column(m));
    }
    out
}

fn build_t_down(
    dim: usize,
    l: usize,
    proj: &ProjectorTensor,
    level: &BasisLevel,
    level_down: &BasisLevel,
    axis: usize,
) -> Array2<f64> {
    let n_from = level.count();
    let n_to = level_down.count();
    let mut out = Array2::zeros((n_to, n_from));
    let side = dim.pow(l as u32);
    let down_mono = level_down.table.len();
    let d_l = l as f64 / (dim + 2 * l - 2) as f64;
    let mut digits = vec![0usize; l];
    for (c, &selpos) in level.selected.iter().enumerate() {
        let row = rank_of(dim, level.table.word(selpos));
        let mut coeff = Array1::zeros(down_mono);
        for col in 0..side {
            let p = proj.entries()[(row, col)];
            if p == 0.0 {
                continue;
            }
            entries_of_rank(dim, col, &mut digits);
            if digits[0] == axis {
                coeff[level_down.table.position_of_word(&digits[1..])] += p;
            }
        }
        let col_out = level_down.word_to_selected.dot(&coeff) * d_l;
        out.column_mut(c).assign(&col_out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphereSampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn level1_gram_is_area_over_d_times_identity() {
        let cat = BasisCatalog::new(3, 1).unwrap();
        let level = cat.level(1).unwrap();
        let expect = 4.0 * std::f64::consts::PI / 3.0;
        assert_eq!(level.count(), 3);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { expect } else { 0.0 };
                assert_abs_diff_eq!(level.gram()[(a, b)], want, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(level.scale(), expect, epsilon = 1e-12);
    }

    #[test]
    fn selected_counts_match_irrep_dimensions() {
        for dim in 2..=5 {
            let lmax = 3;
            let cat = BasisCatalog::new(dim, lmax).unwrap();
            for l in 0..=lmax {
                assert_eq!(
                    cat.level(l).unwrap().count(),
                    irrep_dimension(dim, l),
                    "dim {dim} level {l}"
                );
            }
        }
    }

    #[test]
    fn gram_is_proportional_to_projector() {
        for dim in [2, 3, 4] {
            let cat = BasisCatalog::new(dim, 3).unwrap();
            for l in 0..=3 {
                let level = cat.level(l).unwrap();
                assert!(
                    level.scale_residual() < 1e-10,
                    "dim {dim} level {l}: residual {}",
                    level.scale_residual()
                );
            }
        }
    }

    #[test]
    fn frame_orthonormalizes_gram() {
        let cat = BasisCatalog::new(4, 3).unwrap();
        for l in 0..=3 {
            let level = cat.level(l).unwrap();
            let check = level.frame().t().dot(level.gram()).dot(level.frame());
            let n = level.count();
            let eye: Array2<f64> = Array2::eye(n);
            assert!(linalg::max_abs(&(check - eye)) < 1e-12, "level {l}");
        }
    }

    #[test]
    fn casimir_acts_as_scalar() {
        for dim in 2..=5 {
            let cat = BasisCatalog::new(dim, 3).unwrap();
            for l in 0..=3 {
                let c = cat.casimir_matrix(l).unwrap();
                let n = cat.level(l).unwrap().count();
                let eye: Array2<f64> = Array2::eye(n);
                let want = eye * casimir_eigenvalue(dim, l);
                assert!(linalg::max_abs(&(c - want)) < 1e-10, "dim {dim} level {l}");
            }
        }
    }

    #[test]
    fn l_action_alt_agrees() {
        for dim in [2, 3, 4] {
            let cat = BasisCatalog::new(dim, 3).unwrap();
            for l in 0..3 {
                for (h, k) in generator_pairs(dim) {
                    let a = cat.l_action(l, h, k).unwrap();
                    let b = cat.l_action_alt(l, h, k).unwrap();
                    assert!(
                        linalg::max_abs(&(a - &b)) < 1e-10,
                        "dim {dim} l {l} pair ({h},{k})"
                    );
                }
            }
        }
    }

    #[test]
    fn weight_vectors_are_eigenvectors() {
        for dim in [2, 3, 4] {
            let cat = BasisCatalog::new(dim, 3).unwrap();
            for l in 1..=3 {
                let a = linalg::to_complex(cat.l_action(l, 1, 2).unwrap());
                let w = cat.weight_vector(l, 1, 2).unwrap();
                let img = a.dot(&w);
                let want = &w * Complex64::new(0.0, l as f64);
                let norm = w.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
                let err = img
                    .iter()
                    .zip(want.iter())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0_f64, f64::max);
                assert!(err < 1e-10 * norm.max(1.0), "dim {dim} l {l}: {err}");
                // The conjugate carries the opposite weight.
                let wc = w.mapv(|z| z.conj());
                let img = a.dot(&wc);
                let want = &wc * Complex64::new(0.0, -(l as f64));
                let err = img
                    .iter()
                    .zip(want.iter())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0_f64, f64::max);
                assert!(err < 1e-10 * norm.max(1.0));
            }
        }
    }

    #[test]
    fn multiplication_matches_pointwise_product() {
        // t^axis T_l^I evaluated directly equals the image of the up and
        // down maps evaluated at the same points.
        for dim in [2, 3] {
            let cat = BasisCatalog::new(dim, 3).unwrap();
            let sampler = SphereSampler::new(dim, 5).unwrap();
            let points = sampler.points(40);
            for l in 0..3usize {
                let level = cat.level(l).unwrap();
                for axis in 1..=dim {
                    let up = cat.t_up(l, axis).unwrap();
                    for which in 0..level.count() {
                        let mut coeffs = Array1::zeros(level.count());
                        coeffs[which] = 1.0;
                        let up_img = up.dot(&coeffs);
                        let down_img = if l >= 1 {
                            Some(cat.t_down(l, axis).unwrap().dot(&coeffs))
                        } else {
                            None
                        };
                        for p in &points {
                            let direct = p[axis - 1] * cat.eval_basis(l, which, p).unwrap();
                            let mut image = cat.eval_vector(l + 1, &up_img, p).unwrap();
                            if let Some(d) = &down_img {
                                image += cat.eval_vector(l - 1, d, p).unwrap();
                            }
                            assert!(
                                (direct - image).abs() < 1e-10,
                                "dim {dim} l {l} axis {axis}: {direct} vs {image}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn contracted_multiplication_constant() {
        // sum_i t^i T_2^(i,j) = (2/3) T_1^(j) at D = 3.
        let cat = BasisCatalog::new(3, 3).unwrap();
        let j = 2usize;
        let mut acc = Array1::zeros(cat.level(1).unwrap().count());
        for i in 1..=3usize {
            let coords = cat.project_word(2, &[i, j]).unwrap();
            let down = cat.t_down(2, i).unwrap().dot(&coords);
            acc += &down;
            // Degree-3 parts cancel in the sum by trace-freeness; checked
            // separately below.
        }
        let mut up_total = Array1::zeros(cat.level(3).unwrap().count());
        for i in 1..=3usize {
            let coords = cat.project_word(2, &[i, j]).unwrap();
            up_total += &cat.t_up(2, i).unwrap().dot(&coords);
        }
        assert!(up_total.iter().all(|v| v.abs() < 1e-10));
        let want = cat.project_word(1, &[j]).unwrap() * (2.0 / 3.0);
        for (a, b) in acc.iter().zip(want.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn project_word_is_exact_on_selected_words() {
        let cat = BasisCatalog::new(3, 2).unwrap();
        let level = cat.level(2).unwrap();
        for (c, word) in level.selected_words().iter().enumerate() {
            let coords = cat.project_word(2, word).unwrap();
            for (i, v) in coords.iter().enumerate() {
                let want = if i == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn project_word_reproduces_function_values() {
        let cat = BasisCatalog::new(3, 3).unwrap();
        let sampler = SphereSampler::new(3, 11).unwrap();
        let points = sampler.points(25);
        // (3,3) is the dependent pair at degree 2 for D=3.
        for word in [vec![3, 3], vec![2, 1], vec![3, 1]] {
            let level = cat.level(2).unwrap();
            let coords = cat.project_word(2, &word).unwrap();
            let row = level.table().position_of_word(&word);
            for p in &points {
                let direct = {
                    // Evaluate T^(word) straight from the collapsed row.
                    let mut acc = 0.0;
                    for m in 0..level.table().len() {
                        let c = level.collapsed()[(row, m)];
                        if c != 0.0 {
                            let mut mono = 1.0;
                            for &axis in level.table().word(m) {
                                mono *= p[axis - 1];
                            }
                            acc += c * mono;
                        }
                    }
                    acc
                };
                let via_projection = cat.eval_vector(2, &coords, p).unwrap();
                assert!(
                    (direct - via_projection).abs() < 1e-10,
                    "word {word:?}: {direct} vs {via_projection}"
                );
            }
        }
    }

    #[test]
    fn eval_rejects_off_sphere_points() {
        let cat = BasisCatalog::new(3, 1).unwrap();
        let bad = [0.5, 0.5, 0.5];
        assert!(matches!(
            cat.eval_basis(1, 0, &bad),
            Err(Error::PointOffSphere { .. })
        ));
    }
}
