//! Projectors on tensor powers of R^D: permutators, trace projectors, and
//! the completely symmetric trace-free projector built by recursion.
//!
//! An order-`l` operator is stored dense as a `D^l x D^l` matrix in the
//! canonical multi-index ranking, so composition is plain matrix
//! multiplication and every defining identity is a finite matrix identity.

use ndarray::Array2;

use crate::budget::TensorBudget;
use crate::error::{Error, Result};
use crate::index::rank_of;
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    Identity,
    Permutator,
    Trace,
    Sym,
    Antisym,
    TracelessSym,
    /// Anything produced by composition or embedding.
    General,
}

impl ProjectorKind {
    #[must_use]
    pub fn label(&self) -> &'static str {
        match self {
            ProjectorKind::Identity => "identity",
            ProjectorKind::Permutator => "permutator",
            ProjectorKind::Trace => "trace",
            ProjectorKind::Sym => "sym",
            ProjectorKind::Antisym => "antisym",
            ProjectorKind::TracelessSym => "traceless-sym",
            ProjectorKind::General => "general",
        }
    }
}

/// Dense linear operator on `(R^D)^(x order)`.
#[derive(Debug, Clone)]
pub struct ProjectorTensor {
    dim: usize,
    order: usize,
    kind: ProjectorKind,
    entries: Array2<f64>,
}

impl ProjectorTensor {
    pub fn from_entries(
        dim: usize,
        order: usize,
        kind: ProjectorKind,
        entries: Array2<f64>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let side = dim.pow(order as u32);
        if entries.dim() != (side, side) {
            return Err(Error::InvalidArgument(format!(
                "entries are {:?}, expected {side}x{side}",
                entries.dim()
            )));
        }
        Ok(ProjectorTensor {
            dim,
            order,
            kind,
            entries,
        })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn order(&self) -> usize {
        self.order
    }

    #[must_use]
    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    #[must_use]
    pub fn side(&self) -> usize {
        self.entries.nrows()
    }

    #[must_use]
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Entry addressed by row and column words (1-based axis labels).
    #[must_use]
    pub fn entry(&self, row: &[usize], col: &[usize]) -> f64 {
        self.entries[(rank_of(self.dim, row), rank_of(self.dim, col))]
    }

    /// Matrix product; both operands must share dimension and order.
    pub fn compose(&self, other: &ProjectorTensor) -> Result<ProjectorTensor> {
        if self.dim != other.dim || self.order != other.order {
            return Err(Error::InvalidArgument(format!(
                "cannot compose order {} dim {} with order {} dim {}",
                self.order, self.dim, other.order, other.dim
            )));
        }
        Ok(ProjectorTensor {
            dim: self.dim,
            order: self.order,
            kind: ProjectorKind::General,
            entries: self.entries.dot(&other.entries),
        })
    }

    /// `max |self - other|`.
    #[must_use]
    pub fn distance(&self, other: &ProjectorTensor) -> f64 {
        linalg::max_abs(&(&self.entries - &other.entries))
    }

    /// `max |self^2 - self|`.
    #[must_use]
    pub fn idempotency_residual(&self) -> f64 {
        let sq = self.entries.dot(&self.entries);
        linalg::max_abs(&(sq - &self.entries))
    }

    /// `max |self - self^T|`.
    #[must_use]
    pub fn symmetry_residual(&self) -> f64 {
        linalg::max_abs(&(&self.entries - &self.entries.t()))
    }

    /// Contracts the adjacent upper index pair `(slot, slot + 1)` with a
    /// Kronecker delta, producing a `D^(order-2) x D^order` matrix.  A
    /// trace-free operator yields zero for every slot.
    pub fn trace_contract_upper(&self, slot: usize) -> Result<Array2<f64>> {
        if self.order < 2 || slot < 1 || slot + 1 > self.order {
            return Err(Error::InvalidSlot {
                slot,
                order: self.order,
            });
        }
        let d = self.dim;
        let prefix = d.pow((slot - 1) as u32);
        let suffix = d.pow((self.order - slot - 1) as u32);
        let cols = self.side();
        let mut out = Array2::zeros((prefix * suffix, cols));
        for p in 0..prefix {
            for s in 0..suffix {
                let out_row = p * suffix + s;
                for a in 0..d {
                    let row = ((p * d + a) * d + a) * suffix + s;
                    for c in 0..cols {
                        out[(out_row, c)] += self.entries[(row, c)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Numerical rank by symmetric eigendecomposition; eigenvalues with
    /// magnitude above `threshold` count.  Meaningful for the symmetric
    /// operators built here.
    pub fn numerical_rank(&self, threshold: f64) -> Result<usize> {
        let values = linalg::symmetric_eigenvalues(&self.entries)?;
        Ok(linalg::rank_from_eigenvalues(&values, threshold))
    }
}

#[must_use]
pub fn identity_op(dim: usize, order: usize) -> ProjectorTensor {
    let side = dim.pow(order as u32);
    ProjectorTensor {
        dim,
        order,
        kind: ProjectorKind::Identity,
        entries: Array2::eye(side),
    }
}

/// Exchange of two tensor slots: `P^{hi}_{jk} = delta^h_k delta^i_j`.
#[must_use]
pub fn permutator(dim: usize) -> ProjectorTensor {
    let mut entries = Array2::zeros((dim * dim, dim * dim));
    for h in 0..dim {
        for i in 0..dim {
            entries[(h * dim + i, i * dim + h)] = 1.0;
        }
    }
    ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::Permutator,
        entries,
    }
}

/// Rank-one projector onto the pure trace part:
/// `(P^t)^{ij}_{kl} = delta^{ij} delta_{kl} / D`.
#[must_use]
pub fn trace_projector(dim: usize) -> ProjectorTensor {
    let mut entries = Array2::zeros((dim * dim, dim * dim));
    let w = 1.0 / dim as f64;
    for i in 0..dim {
        for k in 0..dim {
            entries[(i * dim + i, k * dim + k)] = w;
        }
    }
    ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::Trace,
        entries,
    }
}

/// Symmetrizer and antisymmetrizer `(1 +- P)/2` on a slot pair.
#[must_use]
pub fn sym_antisym(dim: usize) -> (ProjectorTensor, ProjectorTensor) {
    let p = permutator(dim);
    let id = identity_op(dim, 2);
    let sym = ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::Sym,
        entries: (&id.entries + &p.entries) * 0.5,
    };
    let anti = ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::Antisym,
        entries: (&id.entries - &p.entries) * 0.5,
    };
    (sym, anti)
}

/// Symmetric trace-free projector on one slot pair, `P^s = P^+ - P^t`.
#[must_use]
pub fn traceless_pair(dim: usize) -> ProjectorTensor {
    let (sym, _) = sym_antisym(dim);
    let tr = trace_projector(dim);
    ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::TracelessSym,
        entries: &sym.entries - &tr.entries,
    }
}

/// The order-2 factor `M(l+1)` appearing in the projector recursion:
/// `M(l+1) = (1/(l+1)) [ 1 + l P - (2 D l / (D + 2l - 2)) P^t ]`.
pub fn recursion_factor(dim: usize, l: usize) -> Result<ProjectorTensor> {
    if l < 1 {
        return Err(Error::InvalidArgument(
            "recursion factor needs l >= 1".into(),
        ));
    }
    let lf = l as f64;
    let df = dim as f64;
    let id = identity_op(dim, 2);
    let p = permutator(dim);
    let t = trace_projector(dim);
    let entries = (&id.entries + &(&p.entries * lf)
        - &(&t.entries * (2.0 * df * lf / (df + 2.0 * lf - 2.0))))
        / (lf + 1.0);
    Ok(ProjectorTensor {
        dim,
        order: 2,
        kind: ProjectorKind::General,
        entries,
    })
}

/// Places an operator on the slot range starting at `slot` (1-based)
/// inside an identity of the target order.
pub fn embed_at(op: &ProjectorTensor, slot: usize, target_order: usize) -> Result<ProjectorTensor> {
    if slot < 1 || slot + op.order - 1 > target_order {
        return Err(Error::InvalidSlot {
            slot,
            order: target_order,
        });
    }
    let d = op.dim;
    let left = Array2::eye(d.pow((slot - 1) as u32));
    let right = Array2::eye(d.pow((target_order + 1 - slot - op.order) as u32));
    let entries = linalg::kron(&linalg::kron(&left, &op.entries), &right);
    Ok(ProjectorTensor {
        dim: d,
        order: target_order,
        kind: ProjectorKind::General,
        entries,
    })
}

/// Dimension of the space of traceless symmetric order-`l` tensors over
/// `R^D`; equivalently the rank of the order-`l` projector.
#[must_use]
pub fn irrep_dimension(dim: usize, l: usize) -> usize {
    if dim == 2 {
        return if l == 0 { 1 } else { 2 };
    }
    // (l+1) (l+2) ... (l+D-3) * (D + 2l - 2) / (D-2)!
    let mut num: u128 = 1;
    for j in 1..=(dim - 3) {
        num *= (l + j) as u128;
    }
    num *= (dim + 2 * l - 2) as u128;
    let mut den: u128 = 1;
    for j in 1..=(dim - 2) {
        den *= j as u128;
    }
    (num / den) as usize
}

/// Builds the completely symmetric trace-free projector of order `l` by
/// the two-sided recursion `P^(l+1) = P^l_(1..l) M(l+1) P^l_(1..l)`.
pub fn traceless_symmetric(dim: usize, l: usize, budget: &TensorBudget) -> Result<ProjectorTensor> {
    let chain = traceless_symmetric_chain(dim, l, budget)?;
    Ok(chain.into_iter().next_back().expect("chain is nonempty"))
}

/// All projectors `P^0 ... P^lmax` in one pass; the recursion produces
/// them anyway, so callers that need several levels reuse the chain.
pub fn traceless_symmetric_chain(
    dim: usize,
    lmax: usize,
    budget: &TensorBudget,
) -> Result<Vec<ProjectorTensor>> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    budget.check(dim, lmax)?;
    let mut chain = Vec::with_capacity(lmax + 1);
    chain.push(ProjectorTensor {
        dim,
        order: 0,
        kind: ProjectorKind::TracelessSym,
        entries: Array2::eye(1),
    });
    if lmax == 0 {
        return Ok(chain);
    }
    let mut current = identity_op(dim, 1);
    current.kind = ProjectorKind::TracelessSym;
    chain.push(current.clone());
    for l in 1..lmax {
        let m = recursion_factor(dim, l)?;
        let outer = embed_at(&current, 1, l + 1)?;
        let middle = embed_at(&m, l, l + 1)?;
        let entries = outer.entries.dot(&middle.entries).dot(&outer.entries);
        current = ProjectorTensor {
            dim,
            order: l + 1,
            kind: ProjectorKind::TracelessSym,
            entries,
        };
        chain.push(current.clone());
    }
    Ok(chain)
}

/// Same projector through the mirrored recursion
/// `P^(l+1) = P^l_(2..l+1) M(12) P^l_(2..l+1)`; kept as an independent
/// cross-check of [`traceless_symmetric`].
pub fn traceless_symmetric_alt(
    dim: usize,
    l: usize,
    budget: &TensorBudget,
) -> Result<ProjectorTensor> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    budget.check(dim, l)?;
    if l == 0 {
        return Ok(ProjectorTensor {
            dim,
            order: 0,
            kind: ProjectorKind::TracelessSym,
            entries: Array2::eye(1),
        });
    }
    let mut current = identity_op(dim, 1);
    current.kind = ProjectorKind::TracelessSym;
    for step in 1..l {
        let m = recursion_factor(dim, step)?;
        let outer = embed_at(&current, 2, step + 1)?;
        let middle = embed_at(&m, 1, step + 1)?;
        let entries = outer.entries.dot(&middle.entries).dot(&outer.entries);
        current = ProjectorTensor {
            dim,
            order: step + 1,
            kind: ProjectorKind::TracelessSym,
            entries,
        };
    }
    Ok(current)
}

/// Cache of the projector chain for one dimension.
#[derive(Debug, Clone)]
pub struct ProjectorBank {
    dim: usize,
    tensors: Vec<ProjectorTensor>,
}

impl ProjectorBank {
    pub fn new(dim: usize, lmax: usize, budget: &TensorBudget) -> Result<Self> {
        Ok(ProjectorBank {
            dim,
            tensors: traceless_symmetric_chain(dim, lmax, budget)?,
        })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn lmax(&self) -> usize {
        self.tensors.len() - 1
    }

    pub fn get(&self, l: usize) -> Result<&ProjectorTensor> {
        self.tensors.get(l).ok_or(Error::LevelOutOfRange {
            level: l,
            max: self.lmax(),
        })
    }
}
