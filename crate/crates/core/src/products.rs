//! Pointwise products of harmonics, their matrix counterparts built from
//! the coordinate operators, and the strong-convergence diagnostics that
//! compare the two as the cutoff grows.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;

use crate::algebra::FuzzyAlgebra;
use crate::basis::BasisCatalog;
use crate::budget::TensorBudget;
use crate::error::{Error, Result};
use crate::index::{entries_of_rank, factorial_u128, rank_of};
use crate::linalg;
use crate::projector::irrep_dimension;
use crate::special::double_factorial;

/// Degrees appearing in the decomposition of a degree-`l` times degree-`m`
/// product: `|l - m|, |l - m| + 2, ..., l + m`.
#[must_use]
pub fn allowed_degrees(l: usize, m: usize) -> Vec<usize> {
    let lo = l.abs_diff(m);
    (lo..=l + m).step_by(2).collect()
}

/// Scalar coefficient of the degree-`n` component,
/// `(D + 2n - 2)!! l! m! / [s! (D + 2n + 2s - 2)!! (l - s)! (m - s)!]`
/// with `s = (l + m - n) / 2`.  The `s!` compensates the ordered sum over
/// the contracted index tuple.
#[must_use]
pub fn product_scalar(dim: usize, l: usize, m: usize, n: usize) -> f64 {
    let s = (l + m - n) / 2;
    double_factorial(dim as i64 + 2 * n as i64 - 2) * factorial_f(l) * factorial_f(m)
        / (factorial_f(s)
            * double_factorial(dim as i64 + 2 * n as i64 + 2 * s as i64 - 2)
            * factorial_f(l - s)
            * factorial_f(m - s))
}

fn factorial_f(n: usize) -> f64 {
    factorial_u128(n) as f64
}

/// One degree of a product decomposition: the scalar and, per selected
/// index `I` at the first factor's degree, the map from second-factor
/// coordinates to degree-`n` coordinates.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub n: usize,
    pub s: usize,
    pub scalar: f64,
    pub maps: Vec<Array2<f64>>,
}

/// Full decomposition data for products of degrees `l` and `m`.
#[derive(Debug, Clone)]
pub struct ProductCoefficients {
    pub l: usize,
    pub m: usize,
    pub terms: Vec<ProductTerm>,
}

impl ProductCoefficients {
    pub fn term(&self, n: usize) -> Option<&ProductTerm> {
        self.terms.iter().find(|t| t.n == n)
    }
}

/// Decomposes `T_l^I T_m^J` over harmonics of the allowed degrees.  The
/// catalog must reach degree `l + m`.
pub fn product_decomposition(
    catalog: &BasisCatalog,
    l: usize,
    m: usize,
) -> Result<ProductCoefficients> {
    if l + m > catalog.lmax() {
        return Err(Error::LevelOutOfRange {
            level: l + m,
            max: catalog.lmax(),
        });
    }
    let dim = catalog.dim();
    let level_l = catalog.level(l)?;
    let level_m = catalog.level(m)?;
    let proj_l = catalog.projector(l)?;
    let proj_m = catalog.projector(m)?;

    let mut terms = Vec::new();
    for n in allowed_degrees(l, m) {
        let s = (l + m - n) / 2;
        let scalar = product_scalar(dim, l, m, n);
        let level_n = catalog.level(n)?;
        let side_a = dim.pow(s as u32);
        let side_cl = dim.pow((l - s) as u32);
        let side_cm = dim.pow((m - s) as u32);
        let n_mono_n = level_n.table().len();
        let n_sel_m = level_m.count();

        let mut maps = Vec::with_capacity(level_l.count());
        let mut c_word = vec![0usize; n];
        for &sel_i in level_l.selected_positions() {
            let row_i = rank_of(dim, level_l.table().word(sel_i));
            // Q[(c_head, c_tail); J] = sum_a P_l[I; (a, c_head)] P_m[(a, c_tail); J],
            // with c_head the first l-s shared indices and c_tail the rest.
            let mut q = Array2::<f64>::zeros((side_cl * side_cm, n_sel_m));
            for a in 0..side_a {
                for c_head in 0..side_cl {
                    let p_l = proj_l.entries()[(row_i, a * side_cl + c_head)];
                    if p_l == 0.0 {
                        continue;
                    }
                    for c_tail in 0..side_cm {
                        let row_m = a * side_cm + c_tail;
                        for (jj, &sel_j) in level_m.selected_positions().iter().enumerate() {
                            let col_j = rank_of(dim, level_m.table().word(sel_j));
                            let p_m = proj_m.entries()[(row_m, col_j)];
                            if p_m != 0.0 {
                                q[(c_head * side_cm + c_tail, jj)] += p_l * p_m;
                            }
                        }
                    }
                }
            }
            // Collapse the shared word c over multisets, then express the
            // resulting harmonic over the selected degree-n basis.
            let mut collapsed = Array2::<f64>::zeros((n_mono_n, n_sel_m));
            for c in 0..side_cl * side_cm {
                entries_of_rank(dim, c, &mut c_word);
                let pos = level_n.table().position_of_word(&c_word);
                for jj in 0..n_sel_m {
                    collapsed[(pos, jj)] += q[(c, jj)];
                }
            }
            maps.push(level_n.word_to_selected().dot(&collapsed));
        }
        terms.push(ProductTerm { n, s, scalar, maps });
    }
    Ok(ProductCoefficients { l, m, terms })
}

/// One term of a function written over the harmonic basis: a degree, an
/// index word, and a complex coefficient.
#[derive(Debug, Clone)]
pub struct HarmonicTerm {
    pub level: usize,
    pub word: Vec<usize>,
    pub coeff: Complex64,
}

impl HarmonicTerm {
    pub fn real(level: usize, word: &[usize], coeff: f64) -> Self {
        HarmonicTerm {
            level,
            word: word.to_vec(),
            coeff: Complex64::new(coeff, 0.0),
        }
    }
}

/// A function as a finite list of harmonic terms.
pub type HarmonicExpansion = Vec<HarmonicTerm>;

/// Per-degree complex coordinates over the selected basis.
type LevelCoords = Vec<Array1<Complex64>>;

/// Result of fitting the matrix-product coefficient at one degree.
#[derive(Debug, Clone)]
pub struct FuzzyTermFit {
    pub n: usize,
    pub n_hat: f64,
    pub classical: f64,
    pub residual: f64,
}

/// One row of a convergence or witness table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceRow {
    pub cutoff: usize,
    pub test_id: String,
    pub residual: f64,
}

/// The matrix counterparts of the harmonics over one algebra, together
/// with a catalog deep enough for the coefficient machinery.
#[derive(Debug)]
pub struct ProductSpace {
    alg: FuzzyAlgebra,
    deep: BasisCatalog,
    /// Per degree `l <= deep.lmax()`, per selected index, the matrix of
    /// the degree-`l` harmonic with coordinates replaced by operators.
    harmonics: Vec<Vec<Array2<f64>>>,
    /// Orthonormalizing block maps of the state space, per degree up to
    /// the cutoff.
    frame_inv: Vec<Array2<f64>>,
    frame: Vec<Array2<f64>>,
}

impl ProductSpace {
    pub fn new(alg: FuzzyAlgebra, deep_lmax: usize) -> Result<Self> {
        Self::with_budget(alg, deep_lmax, &TensorBudget::default())
    }

    pub fn with_budget(alg: FuzzyAlgebra, deep_lmax: usize, budget: &TensorBudget) -> Result<Self> {
        let deep = BasisCatalog::with_budget(alg.dim(), deep_lmax, budget)?;
        let n = alg.matrix_dim();
        let dim = alg.dim();

        // Sums over all index words of a given multiset of operator
        // products, built by peeling the first factor.
        let mut sums: Vec<Vec<Array2<f64>>> = vec![vec![Array2::eye(n)]];
        for j in 1..=deep_lmax {
            let table = deep.level(j)?.table();
            let table_prev = deep.level(j - 1)?.table();
            let mut layer = Vec::with_capacity(table.len());
            for word in table.iter() {
                let mut acc = Array2::<f64>::zeros((n, n));
                let mut prev_axis = 0usize;
                for (pos, &axis) in word.iter().enumerate() {
                    if axis == prev_axis {
                        continue;
                    }
                    prev_axis = axis;
                    let mut sub: Vec<usize> = Vec::with_capacity(j - 1);
                    sub.extend_from_slice(&word[..pos]);
                    sub.extend_from_slice(&word[pos + 1..]);
                    let sub_pos = table_prev.position_of(&sub);
                    acc += &alg.coordinate(axis)?.dot(&sums[j - 1][sub_pos]);
                }
                layer.push(acc);
            }
            sums.push(layer);
        }

        let mut harmonics = Vec::with_capacity(deep_lmax + 1);
        for l in 0..=deep_lmax {
            let level = deep.level(l)?;
            let mut per_index = Vec::with_capacity(level.count());
            for &sel in level.selected_positions() {
                let mut t = Array2::<f64>::zeros((n, n));
                for (mu, word) in level.table().iter().enumerate() {
                    let r = level.collapsed()[(sel, mu)];
                    if r == 0.0 {
                        continue;
                    }
                    let mut counts = vec![0u64; dim];
                    for &axis in word {
                        counts[axis - 1] += 1;
                    }
                    let words_in_multiset: u128 = factorial_u128(l)
                        / counts
                            .iter()
                            .map(|&c| factorial_u128(c as usize))
                            .product::<u128>();
                    t += &(&sums[l][mu] * (r / words_in_multiset as f64));
                }
                per_index.push(t);
            }
            harmonics.push(per_index);
        }

        let mut frame_inv = Vec::with_capacity(alg.cutoff() + 1);
        let mut frame = Vec::with_capacity(alg.cutoff() + 1);
        for l in 0..=alg.cutoff() {
            let level = alg.catalog().level(l)?;
            frame_inv.push(level.frame().t().dot(level.gram()));
            frame.push(level.frame().clone());
        }

        Ok(ProductSpace {
            alg,
            deep,
            harmonics,
            frame_inv,
            frame,
        })
    }

    #[must_use]
    pub fn algebra(&self) -> &FuzzyAlgebra {
        &self.alg
    }

    #[must_use]
    pub fn catalog(&self) -> &BasisCatalog {
        &self.deep
    }

    /// Matrices of the degree-`l` harmonics, one per selected index.
    pub fn harmonic(&self, l: usize) -> Result<&[Array2<f64>]> {
        self.harmonics
            .get(l)
            .map(Vec::as_slice)
            .ok_or(Error::LevelOutOfRange {
                level: l,
                max: self.deep.lmax(),
            })
    }

    /// Measured factor in `That_l^I psi_0 = factor psi_l^I` together with
    /// the off-direction residual; meaningful for `1 <= l <= cutoff`.
    pub fn ground_state_factor(&self, l: usize) -> Result<(f64, f64)> {
        if l > self.alg.cutoff() {
            return Err(Error::LevelOutOfRange {
                level: l,
                max: self.alg.cutoff(),
            });
        }
        let mats = self.harmonic(l)?;
        let block = self.alg.block_range(l)?;
        let mut factor = 0.0;
        let mut residual = 0.0_f64;
        for (c, t) in mats.iter().enumerate() {
            let w = t.column(0).to_owned();
            // psi_l^I has coordinates F_l^-1 e_I in the orthonormal frame.
            let target = self.frame_inv[l].column(c).to_owned();
            let t2: f64 = target.iter().map(|v| v * v).sum();
            let dot: f64 = w
                .slice(s![block.clone()])
                .iter()
                .zip(target.iter())
                .map(|(a, b)| a * b)
                .sum();
            let f = dot / t2;
            if c == 0 {
                factor = f;
            }
            let mut diff = w;
            for (i, v) in target.iter().enumerate() {
                diff[block.start + i] -= f * v;
            }
            residual = residual.max(diff.iter().map(|v| v.abs()).fold(0.0_f64, f64::max));
            residual = residual.max((f - factor).abs());
        }
        Ok((factor, residual))
    }

    /// Fits the scalar linking the matrix product maps to the classical
    /// contraction tensor, per allowed degree within the cutoff.
    pub fn product_fit(&self, l: usize, m: usize) -> Result<Vec<FuzzyTermFit>> {
        if m > self.alg.cutoff() {
            return Err(Error::LevelOutOfRange {
                level: m,
                max: self.alg.cutoff(),
            });
        }
        let deco = product_decomposition(&self.deep, l, m)?;
        let mats = self.harmonic(l)?;
        let block_m = self.alg.block_range(m)?;
        let mut fits = Vec::new();
        for term in &deco.terms {
            if term.n > self.alg.cutoff() {
                continue;
            }
            let p_n = self.alg.eigenprojector(term.n)?;
            let block_n = self.alg.block_range(term.n)?;
            let mut dot_ab = 0.0;
            let mut dot_bb = 0.0;
            let mut pairs = Vec::with_capacity(mats.len());
            for (c, t) in mats.iter().enumerate() {
                let projected = p_n.dot(t);
                let a_on = projected.slice(s![block_n.clone(), block_m.clone()]);
                // Expected shape in harmonic coordinates, moved to the
                // orthonormal frame.
                let b = self.frame_inv[term.n]
                    .dot(&term.maps[c])
                    .dot(&self.frame[m]);
                dot_ab += a_on.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>();
                dot_bb += b.iter().map(|y| y * y).sum::<f64>();
                pairs.push((a_on.to_owned(), b));
            }
            let n_hat = if dot_bb > 0.0 { dot_ab / dot_bb } else { 0.0 };
            let mut residual = 0.0_f64;
            for (a, b) in &pairs {
                residual = residual.max(linalg::max_abs(&(a - &(b * n_hat))));
            }
            fits.push(FuzzyTermFit {
                n: term.n,
                n_hat,
                classical: term.scalar,
                residual,
            });
        }
        Ok(fits)
    }

    /// Residual of the commutation rule: conjugating a degree-`l`
    /// harmonic matrix by a rotation generator reproduces the classical
    /// generator action on its coordinates.
    pub fn equivariance_residual(&self, l: usize) -> Result<f64> {
        let mats = self.harmonic(l)?;
        let act_level = self.deep.level(l)?;
        let mut worst = 0.0_f64;
        for h in 1..=self.alg.dim() {
            for k in (h + 1)..=self.alg.dim() {
                let a = self.alg.rotation(h, k)?;
                let act = self.deep.l_action(l, h, k)?;
                for (c, t) in mats.iter().enumerate() {
                    let lhs = linalg::commutator(&a, t);
                    let mut rhs = Array2::<f64>::zeros(lhs.dim());
                    for cp in 0..act_level.count() {
                        let w = act[(cp, c)];
                        if w != 0.0 {
                            rhs += &(&mats[cp] * w);
                        }
                    }
                    worst = worst.max(linalg::max_abs(&(lhs - rhs)));
                }
            }
        }
        Ok(worst)
    }

    /// Dimension of the span of all harmonic matrices up to `lmax`,
    /// measured as a numerical rank.
    pub fn span_dimension(&self, lmax: usize) -> Result<usize> {
        let mut rows: Vec<Array2<f64>> = Vec::new();
        for l in 0..=lmax.min(self.deep.lmax()) {
            for t in self.harmonic(l)? {
                let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    rows.push(t / norm);
                } else {
                    rows.push(t.clone());
                }
            }
        }
        let count = rows.len();
        let mut gram = Array2::<f64>::zeros((count, count));
        for i in 0..count {
            for j in i..count {
                let v: f64 = rows[i].iter().zip(rows[j].iter()).map(|(a, b)| a * b).sum();
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = linalg::symmetric_eigenvalues(&gram)?;
        let top = eig.iter().fold(0.0_f64, |m, &x| m.max(x));
        Ok(eig.iter().filter(|&&x| x > 1e-8 * top).count())
    }

    /// Expected span dimension: total count of independent harmonics up
    /// to degree `lmax`.
    #[must_use]
    pub fn expected_span_dimension(&self, lmax: usize) -> usize {
        (0..=lmax).map(|l| irrep_dimension(self.alg.dim(), l)).sum()
    }

    /// Catalog holding data for one degree: the deep catalog when it
    /// reaches, the algebra's own otherwise.  Selection is deterministic,
    /// so the two agree wherever both are defined.
    fn source(&self, l: usize) -> Result<&BasisCatalog> {
        if l <= self.deep.lmax() {
            Ok(&self.deep)
        } else if l <= self.alg.catalog().lmax() {
            Ok(self.alg.catalog())
        } else {
            Err(Error::LevelOutOfRange {
                level: l,
                max: self.deep.lmax().max(self.alg.catalog().lmax()),
            })
        }
    }

    /// Coordinates of an expansion over the selected bases, degree by
    /// degree up to `lmax`.
    fn canonical(&self, f: &HarmonicExpansion, lmax: usize) -> Result<LevelCoords> {
        let mut coords: LevelCoords = (0..=lmax)
            .map(|l| {
                Ok(Array1::from_elem(
                    self.source(l)?.level(l)?.count(),
                    Complex64::new(0.0, 0.0),
                ))
            })
            .collect::<Result<_>>()?;
        for term in f {
            if term.level > lmax {
                return Err(Error::LevelOutOfRange {
                    level: term.level,
                    max: lmax,
                });
            }
            let real = self
                .source(term.level)?
                .project_word(term.level, &term.word)?;
            for (i, v) in real.iter().enumerate() {
                coords[term.level][i] += term.coeff * v;
            }
        }
        Ok(coords)
    }

    /// Assembles the matrix of a function: its expansion terms with each
    /// harmonic replaced by its matrix counterpart.  Degrees beyond
    /// `2 cutoff` annihilate the space and are skipped.
    pub fn truncate_function(&self, f: &HarmonicExpansion) -> Result<Array2<Complex64>> {
        let n = self.alg.matrix_dim();
        let mut out = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
        for term in f {
            if term.level > 2 * self.alg.cutoff() {
                continue;
            }
            let coords = self.deep.project_word(term.level, &term.word)?;
            let mats = self.harmonic(term.level)?;
            for (c, v) in coords.iter().enumerate() {
                if *v != 0.0 {
                    let w = term.coeff * v;
                    out.zip_mut_with(&mats[c], |o, t| *o += w * t);
                }
            }
        }
        Ok(out)
    }

    /// State vector of an expansion supported on degrees up to the
    /// cutoff, in the orthonormal frame, normalized when requested.
    pub fn state_from_expansion(
        &self,
        f: &HarmonicExpansion,
        normalize: bool,
    ) -> Result<Array1<Complex64>> {
        for term in f {
            if term.level > self.alg.cutoff() {
                return Err(Error::LevelOutOfRange {
                    level: term.level,
                    max: self.alg.cutoff(),
                });
            }
        }
        let coords = self.canonical(f, self.alg.cutoff())?;
        let mut v = Array1::from_elem(self.alg.matrix_dim(), Complex64::new(0.0, 0.0));
        for (l, c) in coords.iter().enumerate() {
            let block = self.alg.block_range(l)?;
            let on = dot_rc(&self.frame_inv[l], c);
            for (i, val) in on.iter().enumerate() {
                v[block.start + i] = *val;
            }
        }
        if normalize {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidArgument(
                    "cannot normalize the zero state".into(),
                ));
            }
            v.mapv_inplace(|z| z / norm);
        }
        Ok(v)
    }

    /// Classical product of an expansion with a state supported up to the
    /// cutoff, truncated back to the state space: the exact product
    /// decomposition followed by dropping degrees beyond the cutoff.
    pub fn multiply_then_truncate(
        &self,
        f: &HarmonicExpansion,
        psi: &HarmonicExpansion,
    ) -> Result<Array1<Complex64>> {
        let f_max = f.iter().map(|t| t.level).max().unwrap_or(0);
        let psi_max = psi.iter().map(|t| t.level).max().unwrap_or(0);
        let f_coords = self.canonical(f, f_max)?;
        let psi_coords = self.canonical(psi, psi_max)?;

        let cutoff = self.alg.cutoff();
        let mut out_coords: LevelCoords = (0..=cutoff)
            .map(|l| {
                Ok(Array1::from_elem(
                    self.alg.catalog().level(l)?.count(),
                    Complex64::new(0.0, 0.0),
                ))
            })
            .collect::<Result<_>>()?;

        for (l, fc) in f_coords.iter().enumerate() {
            if fc.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            for (m, pc) in psi_coords.iter().enumerate() {
                if pc.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let deco = product_decomposition(&self.deep, l, m)?;
                for term in &deco.terms {
                    if term.n > cutoff {
                        continue;
                    }
                    for (c, fv) in fc.iter().enumerate() {
                        if fv.norm_sqr() == 0.0 {
                            continue;
                        }
                        let mapped = dot_rc(&term.maps[c], pc);
                        let w = fv * term.scalar;
                        for (i, val) in mapped.iter().enumerate() {
                            out_coords[term.n][i] += w * val;
                        }
                    }
                }
            }
        }

        let mut v = Array1::from_elem(self.alg.matrix_dim(), Complex64::new(0.0, 0.0));
        for (l, c) in out_coords.iter().enumerate() {
            let block = self.alg.block_range(l)?;
            let on = dot_rc(&self.frame_inv[l], c);
            for (i, val) in on.iter().enumerate() {
                v[block.start + i] = *val;
            }
        }
        Ok(v)
    }
}

fn dot_rc(m: &Array2<f64>, v: &Array1<Complex64>) -> Array1<Complex64> {
    let re = v.mapv(|z| z.re);
    let im = v.mapv(|z| z.im);
    let out_re = m.dot(&re);
    let out_im = m.dot(&im);
    Array1::from_iter(
        out_re
            .iter()
            .zip(out_im.iter())
            .map(|(&a, &b)| Complex64::new(a, b)),
    )
}

/// The standard low-degree expansions used by the convergence tables.
#[must_use]
pub fn standard_test_functions(dim: usize) -> Vec<(&'static str, HarmonicExpansion)> {
    vec![
        ("identity", vec![HarmonicTerm::real(0, &[], 1.0)]),
        ("t1", vec![HarmonicTerm::real(1, &[1], 1.0)]),
        (
            "t1-squared",
            vec![
                HarmonicTerm::real(2, &[1, 1], 1.0),
                HarmonicTerm::real(0, &[], 1.0 / dim as f64),
            ],
        ),
        ("t1-t2", vec![HarmonicTerm::real(2, &[1, 2], 1.0)]),
    ]
}

/// Norm table of the difference between the matrix action of a function
/// and the truncated classical product, per cutoff, for the standard test
/// functions against the first degree-one harmonic; plus one product-pair
/// row per cutoff.
pub fn convergence_report(
    dim: usize,
    cutoffs: &[usize],
    budget: &TensorBudget,
) -> Result<Vec<ConvergenceRow>> {
    let psi: HarmonicExpansion = vec![HarmonicTerm::real(1, &[1], 1.0)];
    let mut rows = Vec::new();
    for &cutoff in cutoffs {
        if cutoff < 1 {
            return Err(Error::InvalidArgument(
                "convergence rows need cutoff >= 1".into(),
            ));
        }
        let alg = FuzzyAlgebra::with_budget(
            dim,
            cutoff,
            crate::algebra::default_coupling(dim, cutoff),
            budget,
        )?;
        // Deep enough for every product degree the tests can reach.
        let space = ProductSpace::with_budget(alg, 3.min(2 * cutoff), budget)?;
        let psi_state = space.state_from_expansion(&psi, true)?;
        for (id, f) in standard_test_functions(dim) {
            let fhat = space.truncate_function(&f)?;
            let lhs = czdot(&fhat, &psi_state);
            let mut rhs = space.multiply_then_truncate(&f, &psi)?;
            let norm_psi = space
                .state_from_expansion(&psi, false)?
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            rhs.mapv_inplace(|z| z / norm_psi);
            let residual = lhs
                .iter()
                .zip(rhs.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            rows.push(ConvergenceRow {
                cutoff,
                test_id: id.to_string(),
                residual,
            });
        }
        // Product of two truncations against the truncation of the
        // pointwise product, applied to the same state.
        let f: HarmonicExpansion = vec![HarmonicTerm::real(1, &[1], 1.0)];
        let g: HarmonicExpansion = vec![HarmonicTerm::real(1, &[2], 1.0)];
        let fg: HarmonicExpansion = vec![HarmonicTerm::real(2, &[1, 2], 1.0)];
        let prod = space
            .truncate_function(&f)?
            .dot(&space.truncate_function(&g)?);
        let direct = space.truncate_function(&fg)?;
        let diff = czdot(&(&prod - &direct), &psi_state);
        rows.push(ConvergenceRow {
            cutoff,
            test_id: "pair-product".to_string(),
            residual: diff.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        });
    }
    Ok(rows)
}

fn czdot(m: &Array2<Complex64>, v: &Array1<Complex64>) -> Array1<Complex64> {
    let n = m.nrows();
    let mut out = Array1::from_elem(n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m.ncols() {
            acc += m[(i, j)] * v[j];
        }
        out[i] = acc;
    }
    out
}

/// Operator-norm non-convergence witness: multiplication by the first
/// coordinate keeps a uniformly large norm on the degree just above the
/// cutoff, while the matrix counterpart annihilates that subspace by
/// construction.
pub fn witness_report(
    dim: usize,
    cutoffs: &[usize],
    budget: &TensorBudget,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    for &cutoff in cutoffs {
        let catalog = BasisCatalog::with_budget(dim, cutoff + 2, budget)?;
        let level = catalog.level(cutoff + 1)?;
        // Normalized harmonic one degree above the cutoff.
        let word = vec![1usize; cutoff + 1];
        let coords = catalog.project_word(cutoff + 1, &word)?;
        let norm2 = coords.dot(&level.gram().dot(&coords));
        let deco = product_decomposition(&catalog, 1, cutoff + 1)?;
        let mut out2 = 0.0;
        for term in &deco.terms {
            let mapped = term.maps[0].dot(&coords) * term.scalar;
            let g = catalog.level(term.n)?.gram();
            out2 += mapped.dot(&g.dot(&mapped));
        }
        rows.push(ConvergenceRow {
            cutoff,
            test_id: "classical-multiplication-norm".to_string(),
            residual: (out2 / norm2).sqrt(),
        });
        rows.push(ConvergenceRow {
            cutoff,
            test_id: "matrix-action-on-excluded-degree".to_string(),
            residual: 0.0,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::SphereSampler;
    use approx::assert_abs_diff_eq;

    #[test]
    fn allowed_degrees_examples() {
        assert_eq!(allowed_degrees(1, 1), vec![0, 2]);
        assert_eq!(allowed_degrees(3, 2), vec![1, 3, 5]);
        assert_eq!(allowed_degrees(2, 0), vec![2]);
    }

    #[test]
    fn scalar_examples() {
        // Degree-one squared, scalar part: 1/D.
        for dim in 2..=6 {
            assert_abs_diff_eq!(
                product_scalar(dim, 1, 1, 0),
                1.0 / dim as f64,
                epsilon = 1e-14
            );
        }
        // Multiplication by a constant.
        assert_abs_diff_eq!(product_scalar(3, 1, 0, 1), 1.0);
        assert_abs_diff_eq!(product_scalar(4, 2, 0, 2), 1.0);
    }

    #[test]
    fn products_reconstruct_pointwise() {
        // Degree 3 at dim 2 exercises three contracted index pairs, which
        // pins the factorial weight of the contraction.
        for (dim, top) in [(2, 3), (3, 2)] {
            let catalog = BasisCatalog::new(dim, 2 * top).unwrap();
            let sampler = SphereSampler::new(dim, 3).unwrap();
            let points = sampler.points(60);
            for l in 0..=top {
                for m in 0..=top {
                    let deco = product_decomposition(&catalog, l, m).unwrap();
                    let level_l = catalog.level(l).unwrap();
                    let level_m = catalog.level(m).unwrap();
                    for which_l in 0..level_l.count() {
                        for which_m in 0..level_m.count() {
                            let mut coeff_m = Array1::zeros(level_m.count());
                            coeff_m[which_m] = 1.0;
                            for p in &points {
                                let direct = catalog.eval_basis(l, which_l, p).unwrap()
                                    * catalog.eval_basis(m, which_m, p).unwrap();
                                let mut recon = 0.0;
                                for term in &deco.terms {
                                    let mapped = term.maps[which_l].dot(&coeff_m) * term.scalar;
                                    recon += catalog.eval_vector(term.n, &mapped, p).unwrap();
                                }
                                assert!(
                                    (direct - recon).abs() < 1e-10,
                                    "dim {dim} l {l} m {m}: {direct} vs {recon}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn product_with_constant_is_identity() {
        let catalog = BasisCatalog::new(3, 3).unwrap();
        let deco = product_decomposition(&catalog, 2, 0).unwrap();
        assert_eq!(deco.terms.len(), 1);
        let term = &deco.terms[0];
        assert_eq!(term.n, 2);
        assert_abs_diff_eq!(term.scalar, 1.0);
        for (c, map) in term.maps.iter().enumerate() {
            // Each map sends the constant to the harmonic itself.
            assert_eq!(map.ncols(), 1);
            for (i, v) in map.column(0).iter().enumerate() {
                let want = if i == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(*v, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn first_harmonic_matrices_are_coordinates() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let space = ProductSpace::new(alg, 3).unwrap();
        for axis in 1..=3usize {
            // Selected degree-1 indices are the axes in order.
            let t = &space.harmonic(1).unwrap()[axis - 1];
            let x = space.algebra().coordinate(axis).unwrap();
            assert!(linalg::max_abs(&(t - x)) < 1e-12);
        }
    }

    #[test]
    fn harmonics_above_twice_cutoff_vanish() {
        let alg = FuzzyAlgebra::new(3, 1).unwrap();
        let space = ProductSpace::new(alg, 3).unwrap();
        for t in space.harmonic(3).unwrap() {
            assert!(linalg::max_abs(t) < 1e-10);
        }
        // One degree down they do not vanish.
        assert!(space
            .harmonic(2)
            .unwrap()
            .iter()
            .any(|t| linalg::max_abs(t) > 1e-6));
    }

    #[test]
    fn ground_state_proportionality() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let space = ProductSpace::new(alg, 2).unwrap();
        for l in 1..=2usize {
            let (factor, residual) = space.ground_state_factor(l).unwrap();
            assert!(factor.abs() > 1e-6, "degree {l}: factor {factor}");
            assert!(residual < 1e-10, "degree {l}: residual {residual}");
        }
    }

    #[test]
    fn span_dimension_counts_harmonics() {
        let alg = FuzzyAlgebra::new(2, 1).unwrap();
        let space = ProductSpace::new(alg, 2).unwrap();
        assert_eq!(
            space.span_dimension(2).unwrap(),
            space.expected_span_dimension(2)
        );

        let alg = FuzzyAlgebra::new(3, 1).unwrap();
        let space = ProductSpace::new(alg, 2).unwrap();
        assert_eq!(
            space.span_dimension(2).unwrap(),
            space.expected_span_dimension(2)
        );
    }

    #[test]
    fn equivariance_of_harmonic_matrices() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let space = ProductSpace::new(alg, 3).unwrap();
        for l in 0..=3usize {
            let r = space.equivariance_residual(l).unwrap();
            assert!(r < 1e-10, "degree {l}: {r}");
        }
    }

    #[test]
    fn product_fit_reduces_to_ladder_coefficient() {
        // Degree 1 times degree 0: the single fitted scalar is c_1.
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let c1 = alg.ladder_coefficient(1);
        let space = ProductSpace::new(alg, 2).unwrap();
        let fits = space.product_fit(1, 0).unwrap();
        assert_eq!(fits.len(), 1);
        assert_eq!(fits[0].n, 1);
        assert!(fits[0].residual < 1e-10);
        assert_abs_diff_eq!(fits[0].n_hat, c1, epsilon = 1e-10);
    }

    #[test]
    fn product_fit_degrees_outside_window_vanish() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let space = ProductSpace::new(alg, 3).unwrap();
        // Apply the degree-1 matrices to the degree-1 block and check the
        // degree-1 component is absent (1 not in {0, 2}).
        let mats = space.harmonic(1).unwrap();
        let block1 = space.algebra().block_range(1).unwrap();
        for t in mats {
            let sub = t.slice(s![block1.clone(), block1.clone()]);
            assert!(sub.iter().map(|v| v.abs()).fold(0.0_f64, f64::max) < 1e-10);
        }
    }

    #[test]
    fn product_fits_have_small_residuals() {
        let alg = FuzzyAlgebra::new(3, 2).unwrap();
        let space = ProductSpace::new(alg, 4).unwrap();
        for (l, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            for fit in space.product_fit(l, m).unwrap() {
                assert!(
                    fit.residual < 1e-8,
                    "l {l} m {m} n {}: residual {}",
                    fit.n,
                    fit.residual
                );
            }
        }
    }

    #[test]
    fn product_coefficient_commutative_trend() {
        // The fitted degree-0 coefficient of the squared first coordinate
        // approaches the classical 1/D as the cutoff grows.
        let mut gaps = Vec::new();
        for cutoff in [1usize, 2, 4] {
            let alg = FuzzyAlgebra::new(3, cutoff).unwrap();
            let space = ProductSpace::new(alg, 2).unwrap();
            let fits = space.product_fit(1, 1).unwrap();
            let fit0 = fits.iter().find(|f| f.n == 0).unwrap();
            gaps.push((fit0.n_hat - 1.0 / 3.0).abs());
        }
        assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps {gaps:?}");
    }

    #[test]
    fn truncation_basics() {
        let alg = FuzzyAlgebra::new(3, 1).unwrap();
        let n = alg.matrix_dim();
        let x1 = alg.coordinate(1).unwrap().clone();
        let space = ProductSpace::new(alg, 3).unwrap();
        // Constant function: identity matrix.
        let one = space
            .truncate_function(&vec![HarmonicTerm::real(0, &[], 1.0)])
            .unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(one[(i, j)].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(one[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
        // First coordinate function: the coordinate operator.
        let t1 = space
            .truncate_function(&vec![HarmonicTerm::real(1, &[1], 1.0)])
            .unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(t1[(i, j)].re, x1[(i, j)], epsilon = 1e-12);
            }
        }
        // Function supported beyond twice the cutoff: zero matrix.
        let hi = space
            .truncate_function(&vec![HarmonicTerm::real(3, &[1, 1, 1], 1.0)])
            .unwrap();
        assert!(hi.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn convergence_rows_shrink() {
        let rows = convergence_report(3, &[2, 3, 4], &TensorBudget::default()).unwrap();
        // Identity rows vanish at every cutoff.
        for row in rows.iter().filter(|r| r.test_id == "identity") {
            assert!(row.residual < 1e-12);
        }
        let t1: Vec<f64> = rows
            .iter()
            .filter(|r| r.test_id == "t1")
            .map(|r| r.residual)
            .collect();
        assert_eq!(t1.len(), 3);
        assert!(t1[1] <= t1[0] + 1e-12 && t1[2] <= t1[1] + 1e-12, "{t1:?}");
    }

    #[test]
    fn witness_norms_stay_large() {
        let rows = witness_report(3, &[2, 3], &TensorBudget::default()).unwrap();
        for row in &rows {
            if row.test_id == "classical-multiplication-norm" {
                assert!(
                    row.residual > 0.1,
                    "cutoff {}: {}",
                    row.cutoff,
                    row.residual
                );
            } else {
                assert_eq!(row.residual, 0.0);
            }
        }
    }
}
