//! Named verification suites with machine-readable outcomes.
//!
//! Each suite re-measures a family of identities and returns one
//! `CheckResult` per identity, so the test harness and the command-line
//! driver print the same numbers.  A check passes when its residual is
//! finite and at most the tolerance; threshold-from-below checks (a norm
//! that must stay large) store `threshold - value`, which is negative on
//! a comfortable pass.

use crate::algebra::{default_coupling, FuzzyAlgebra, SpectrumLine};
use crate::basis::{casimir_eigenvalue, BasisCatalog};
use crate::budget::TensorBudget;
use crate::embedding::{factorization_residual, EmbeddedIrrep};
use crate::error::Result;
use crate::linalg;
use crate::products::{convergence_report, witness_report, ConvergenceRow};
use crate::projector::{
    embed_at, irrep_dimension, permutator, sym_antisym, trace_projector, traceless_symmetric_alt,
    ProjectorTensor,
};
use crate::radial::{radial_table, RadialRow};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    #[must_use]
    pub fn measure(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub dim: usize,
    pub cutoff: usize,
    pub coupling: f64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    #[must_use]
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The check with the largest residual-to-tolerance ratio.
    #[must_use]
    pub fn worst(&self) -> Option<&CheckResult> {
        self.checks.iter().max_by(|a, b| {
            let ra = a.residual / a.tolerance.max(f64::MIN_POSITIVE);
            let rb = b.residual / b.tolerance.max(f64::MIN_POSITIVE);
            ra.total_cmp(&rb)
        })
    }
}

/// Projector and harmonic-basis identities for every level up to `lmax`:
/// idempotency, symmetry, trace-free contraction on both sides,
/// annihilation by adjacent antisymmetrizers, invariance under adjacent
/// swaps, agreement of the two construction recursions, exact rank, the
/// Casimir eigenvalue, and the extremal-weight ladder eigenvector.
pub fn projector_suite(
    dim: usize,
    lmax: usize,
    tol: f64,
    budget: &TensorBudget,
) -> Result<SuiteReport> {
    let catalog = BasisCatalog::with_budget(dim, lmax, budget)?;
    let mut checks = Vec::new();
    let (_, antisym) = sym_antisym(dim);
    let perm = permutator(dim);

    for l in 0..=lmax {
        let p = catalog.projector(l)?;
        checks.push(CheckResult::measure(
            format!("idempotency l={l}"),
            p.idempotency_residual(),
            tol,
        ));
        checks.push(CheckResult::measure(
            format!("transpose-symmetry l={l}"),
            p.symmetry_residual(),
            tol,
        ));
        if l >= 2 {
            let mut worst_trace = 0.0_f64;
            let mut worst_anti = 0.0_f64;
            let mut worst_swap = 0.0_f64;
            for slot in 1..l {
                worst_trace = worst_trace.max(linalg::max_abs(&p.trace_contract_upper(slot)?));
                let a = embed_at(&antisym, slot, l)?;
                worst_anti = worst_anti.max(linalg::max_abs(p.compose(&a)?.entries()));
                worst_anti = worst_anti.max(linalg::max_abs(a.compose(p)?.entries()));
                let s = embed_at(&perm, slot, l)?;
                worst_swap =
                    worst_swap.max(linalg::max_abs(&(p.compose(&s)?.entries() - p.entries())));
            }
            // Column side of the trace contraction, via the transpose.
            let pt = ProjectorTensor::from_entries(
                dim,
                l,
                crate::projector::ProjectorKind::General,
                p.entries().t().to_owned(),
            )?;
            for slot in 1..l {
                worst_trace = worst_trace.max(linalg::max_abs(&pt.trace_contract_upper(slot)?));
            }
            checks.push(CheckResult::measure(
                format!("trace-contraction l={l}"),
                worst_trace,
                tol,
            ));
            checks.push(CheckResult::measure(
                format!("antisymmetrizer-annihilation l={l}"),
                worst_anti,
                tol,
            ));
            checks.push(CheckResult::measure(
                format!("swap-invariance l={l}"),
                worst_swap,
                tol,
            ));
            let alt = traceless_symmetric_alt(dim, l, budget)?;
            checks.push(CheckResult::measure(
                format!("recursion-agreement l={l}"),
                p.distance(&alt),
                tol,
            ));
        }
        checks.push(CheckResult::measure(
            format!("rank l={l}"),
            (p.numerical_rank(1e-8)? as f64 - irrep_dimension(dim, l) as f64).abs(),
            0.0,
        ));
        let eye = linalg::identity(catalog.level(l)?.count());
        checks.push(CheckResult::measure(
            format!("casimir l={l}"),
            linalg::max_abs(&(catalog.casimir_matrix(l)? - eye * casimir_eigenvalue(dim, l))),
            1e-10,
        ));
        if l >= 1 {
            checks.push(CheckResult::measure(
                format!("ladder-weight l={l}"),
                ladder_residual(&catalog, l)?,
                1e-10,
            ));
        }
    }
    checks.extend(braid_checks(dim, tol)?);

    Ok(SuiteReport {
        suite: "projectors".into(),
        dim,
        cutoff: lmax,
        coupling: f64::NAN,
        checks,
    })
}

/// `iL_(12)` applied to the extremal weight vector `(t^1 + i t^2)^l`
/// must return `i l` times it.
fn ladder_residual(catalog: &BasisCatalog, l: usize) -> Result<f64> {
    let w = catalog.weight_vector(l, 1, 2)?;
    let act = catalog.l_action(l, 1, 2)?;
    let mut worst = 0.0_f64;
    for r in 0..w.len() {
        let mut got = Complex64::new(0.0, 0.0);
        for c in 0..w.len() {
            got += act[(r, c)] * w[c];
        }
        let want = Complex64::new(0.0, l as f64) * w[r];
        worst = worst.max((got - want).norm());
    }
    Ok(worst)
}

/// Exchange identities of the order-2 building blocks: for each block `A`,
/// `A_(12) S_(23) S_(12) = S_(23) S_(12) A_(23)` on three slots, and the
/// shifted version one slot over on four.
fn braid_checks(dim: usize, tol: f64) -> Result<Vec<CheckResult>> {
    let (sym, antisym) = sym_antisym(dim);
    let perm = permutator(dim);
    let tr = trace_projector(dim);
    let mut out = Vec::new();
    for (label, a) in [
        ("sym", &sym),
        ("antisym", &antisym),
        ("swap", &perm),
        ("trace", &tr),
    ] {
        let mut worst = 0.0_f64;
        for (order, s) in [(3usize, 1usize), (4, 2)] {
            let a_lo = embed_at(a, s, order)?;
            let a_hi = embed_at(a, s + 1, order)?;
            let s_lo = embed_at(&perm, s, order)?;
            let s_hi = embed_at(&perm, s + 1, order)?;
            let lhs = a_lo.compose(&s_hi)?.compose(&s_lo)?;
            let rhs = s_hi.compose(&s_lo)?.compose(&a_hi)?;
            worst = worst.max(linalg::max_abs(&(lhs.entries() - rhs.entries())));
        }
        out.push(CheckResult::measure(format!("braid {label}"), worst, tol));
    }
    Ok(out)
}

/// The operator relation suite of the truncated algebra, at the default
/// coupling unless one is given.
pub fn relation_suite(
    dim: usize,
    cutoff: usize,
    coupling: Option<f64>,
    tol: f64,
    budget: &TensorBudget,
) -> Result<SuiteReport> {
    let k = coupling.unwrap_or_else(|| default_coupling(dim, cutoff));
    let alg = FuzzyAlgebra::with_budget(dim, cutoff, k, budget)?;
    let rr = alg.check_relations(tol)?;
    let checks = rr
        .checks
        .iter()
        .map(|c| CheckResult::measure(c.name, c.residual, tol))
        .collect();
    Ok(SuiteReport {
        suite: "relations".into(),
        dim,
        cutoff,
        coupling: k,
        checks,
    })
}

/// Relation suite on a deliberately corrupted algebra.
///
/// Adds a unit bump to one coordinate entry before running the checks, so
/// at least one of them must fail. A harness that reports all green here
/// is broken; `fsk check --inject-error` uses this as its canary.
pub fn injected_relation_suite(
    dim: usize,
    cutoff: usize,
    coupling: Option<f64>,
    tol: f64,
    budget: &TensorBudget,
) -> Result<SuiteReport> {
    let k = coupling.unwrap_or_else(|| default_coupling(dim, cutoff));
    let mut alg = FuzzyAlgebra::with_budget(dim, cutoff, k, budget)?;
    alg.perturb_first_coordinate(1.0);
    let rr = alg.check_relations(tol)?;
    let checks = rr
        .checks
        .iter()
        .map(|c| CheckResult::measure(c.name, c.residual, tol))
        .collect();
    Ok(SuiteReport {
        suite: "relations-injected".into(),
        dim,
        cutoff,
        coupling: k,
        checks,
    })
}

/// The embedded-picture suite: generator closure, the full Casimir,
/// branching multiplicities, the intertwining state map, parity, and the
/// sampled shell factorization of the embedded basis functions.
pub fn isomorphism_suite(
    dim: usize,
    cutoff: usize,
    tol: f64,
    seed: u64,
    budget: &TensorBudget,
) -> Result<SuiteReport> {
    let k = default_coupling(dim, cutoff);
    let alg = FuzzyAlgebra::with_budget(dim, cutoff, k, budget)?;
    let emb = EmbeddedIrrep::with_budget(dim, cutoff, budget)?;
    let checks = vec![
        CheckResult::measure("generator-closure", emb.closure_residual()?, tol),
        CheckResult::measure("full-casimir", emb.casimir_residual()?, tol),
        CheckResult::measure("branching", emb.branching_residual()?, tol),
        CheckResult::measure(
            "state-map-compatibility",
            emb.compatibility_residual(&alg)?,
            1e-8,
        ),
        CheckResult::measure("axis-parity", emb.parity_residual(&alg)?, tol),
        CheckResult::measure(
            "shell-factorization",
            factorization_residual(dim, cutoff, 40, seed, budget)?,
            tol,
        ),
    ];
    Ok(SuiteReport {
        suite: "isomorphism".into(),
        dim,
        cutoff,
        coupling: k,
        checks,
    })
}

/// Truncation-convergence rows over `lo..=hi` plus the derived checks:
/// the identity row vanishes, the first-coordinate row decreases and ends
/// below 0.1, and the non-convergence witness stays large where the
/// matrix action is exactly zero.
pub fn convergence_suite(
    dim: usize,
    lo: usize,
    hi: usize,
    budget: &TensorBudget,
) -> Result<(SuiteReport, Vec<ConvergenceRow>)> {
    let cutoffs: Vec<usize> = (lo..=hi).collect();
    let rows = convergence_report(dim, &cutoffs, budget)?;
    let witness = witness_report(dim, &[lo], budget)?;

    let series = |id: &str| -> Vec<f64> {
        rows.iter()
            .filter(|r| r.test_id == id)
            .map(|r| r.residual)
            .collect()
    };
    let identity = series("identity");
    let t1 = series("t1");
    let mut checks = vec![CheckResult::measure(
        "identity-row-vanishes",
        identity.iter().fold(0.0_f64, |m, &v| m.max(v)),
        1e-12,
    )];
    let worst_rise = t1
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(CheckResult::measure(
        "t1-residual-monotone",
        worst_rise,
        1e-12,
    ));
    checks.push(CheckResult::measure(
        "t1-final-residual",
        *t1.last().unwrap_or(&f64::INFINITY),
        0.1,
    ));
    for w in &witness {
        match w.test_id.as_str() {
            "classical-multiplication-norm" => checks.push(CheckResult::measure(
                "witness-classical-floor",
                0.1 - w.residual,
                0.0,
            )),
            "matrix-action-on-excluded-degree" => {
                checks.push(CheckResult::measure("witness-matrix-zero", w.residual, 0.0))
            }
            _ => {}
        }
    }

    let mut all = rows;
    all.extend(witness);
    Ok((
        SuiteReport {
            suite: "convergence".into(),
            dim,
            cutoff: hi,
            coupling: f64::NAN,
            checks,
        },
        all,
    ))
}

/// Radial oracle-vs-closed-form rows for `l <= lmax`, `n <= nmax`, with
/// one check per row on the normalized energy error.
pub fn radial_suite(
    dim: usize,
    k: f64,
    lmax: usize,
    nmax: usize,
) -> Result<(SuiteReport, Vec<RadialRow>)> {
    let levels: Vec<usize> = (0..=lmax).collect();
    let rows = radial_table(dim, &levels, nmax, k)?;
    let checks = rows
        .iter()
        .map(|r| {
            CheckResult::measure(
                format!("oracle-vs-closed l={} n={}", r.l, r.n),
                r.rel_err,
                0.05,
            )
        })
        .collect();
    Ok((
        SuiteReport {
            suite: "radial".into(),
            dim,
            cutoff: 0,
            coupling: k,
            checks,
        },
        rows,
    ))
}

/// Every suite at moderate size for one `(dim, cutoff)` instance.
pub fn full_suite(
    dim: usize,
    cutoff: usize,
    tol: f64,
    seed: u64,
    budget: &TensorBudget,
) -> Result<Vec<SuiteReport>> {
    let lmax = cutoff.clamp(2, 4);
    let mut out = vec![
        projector_suite(dim, lmax, 1e-12, budget)?,
        relation_suite(dim, cutoff.max(1), None, tol, budget)?,
        isomorphism_suite(dim, cutoff.max(1), tol.max(1e-10), seed, budget)?,
    ];
    let hi = cutoff.clamp(3, 5);
    out.push(convergence_suite(dim, 2, hi, budget)?.0);
    out.push(radial_suite(dim, 1e4, 2, 1)?.0);
    Ok(out)
}

/// JSON for a batch of suite reports, pretty-printed, trailing newline.
pub fn suites_json(reports: &[SuiteReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("serializable reports");
    s.push('\n');
    s
}

/// CSV table of the squared-radius spectrum.
#[must_use]
pub fn spectrum_csv(lines: &[SpectrumLine]) -> String {
    let mut s = String::from("l,r_squared,multiplicity\n");
    for line in lines {
        s.push_str(&format!(
            "{},{},{}\n",
            line.l, line.r_squared, line.multiplicity
        ));
    }
    s
}

/// CSV table of convergence rows.
#[must_use]
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("cutoff,test_id,residual\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.cutoff, r.test_id, r.residual));
    }
    s
}

/// CSV table of radial oracle rows.
#[must_use]
pub fn radial_csv(rows: &[RadialRow]) -> String {
    let mut s = String::from("D,l,n,k,E_closed,E_leading,E_numeric,rel_err\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.dim,
            r.l,
            r.n,
            r.coupling,
            r.energy_closed,
            r.energy_leading,
            r.energy_numeric,
            r.rel_err
        ));
    }
    s
}
