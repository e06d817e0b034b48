//! Heisenberg-picture superoperator and its eigenoperators.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::Result;
use crate::linalg;
use crate::operators::{hermitian_parts, ComplexMatrix, C64, ZERO};

/// Default relative tolerance for merging eigenvalues.
pub const GROUP_TOL: f64 = 1e-8;
/// Eigenvector candidates with a larger singular value of `A - λ` are
/// treated as missing (defective cluster).
pub const DEFECT_TOL: f64 = 1e-6;
/// `|λ|` below this counts as zero.
pub const ZERO_LAMBDA: f64 = 1e-10;
/// Relative residual for deciding that an operator lies in a span.
pub const SPAN_TOL: f64 = 1e-6;

/// Matrix of `O ↦ Σ E† O E` acting on column-stacked `vec(O)`.
#[derive(Clone, Debug)]
pub struct Superoperator {
    pub dim: usize,
    pub mat: Array2<C64>,
}

impl Superoperator {
    pub fn apply(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        let v = Array1::from(op.vectorize());
        let out = self.mat.dot(&v);
        ComplexMatrix::unvectorize(out.as_slice().unwrap())
    }
}

/// Builds the superoperator column by column from images of matrix units.
pub fn adjoint_superoperator(ch: &KrausChannel) -> Result<Superoperator> {
    let n = ch.dim;
    let mut mat = Array2::<C64>::zeros((n * n, n * n));
    for b in 0..n {
        for a in 0..n {
            let mut unit = ComplexMatrix::zeros(n);
            unit.set(a, b, C64::new(1.0, 0.0));
            let image = ch.adjoint_apply(&unit)?.vectorize();
            let col = a + b * n;
            for (row, z) in image.into_iter().enumerate() {
                mat[[row, col]] = z;
            }
        }
    }
    Ok(Superoperator { dim: n, mat })
}

/// Eigenoperator with unit Hilbert–Schmidt norm.
#[derive(Clone, Debug, Serialize)]
pub struct EigenOperator {
    pub op: ComplexMatrix,
    #[serde(with = "crate::operators::complex_pair")]
    pub lambda: C64,
    pub group: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenDecomposition {
    #[serde(with = "crate::operators::complex_list")]
    pub eigenvalues: Vec<C64>,
    pub eigenoperators: Vec<EigenOperator>,
    /// Some eigenvalue cluster had fewer independent eigenvectors than its
    /// algebraic multiplicity.
    pub defective: bool,
    pub max_residual: f64,
}

fn close(a: C64, b: C64, rel_tol: f64) -> bool {
    (a - b).norm() <= rel_tol * a.norm().max(b.norm()).max(1e-12)
}

/// Single-linkage clusters of values under [`close`], as index lists.
fn cluster(values: &[C64], rel_tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if close(values[i], values[j], rel_tol) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_index[r] == usize::MAX {
            root_index[r] = out.len();
            out.push(Vec::new());
        }
        out[root_index[r]].push(i);
    }
    out
}

fn mean(values: &[C64], idx: &[usize]) -> C64 {
    idx.iter().map(|&i| values[i]).sum::<C64>() / idx.len() as f64
}

/// Sort key: `|λ|` descending, then argument ascending.
fn order(a: C64, b: C64) -> std::cmp::Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(a.arg().total_cmp(&b.arg()))
}

/// Full eigendecomposition of the superoperator. Eigenvalues come from
/// Hessenberg QR; each cluster's eigenvectors span the numerical null
/// space of `A - λ`.
pub fn eigen_operators(sop: &Superoperator, rel_tol: f64) -> Result<EigenDecomposition> {
    let n2 = sop.mat.nrows();
    let eigenvalues = linalg::eigenvalues(&sop.mat)?;
    let mut clusters = cluster(&eigenvalues, rel_tol);
    clusters.sort_by(|a, b| order(mean(&eigenvalues, a), mean(&eigenvalues, b)));
    let mut eigenoperators = Vec::with_capacity(n2);
    let mut defective = false;
    let mut max_residual: f64 = 0.0;
    for (gid, idx) in clusters.iter().enumerate() {
        let lambda = mean(&eigenvalues, idx);
        let mut shifted = sop.mat.clone();
        for i in 0..n2 {
            shifted[[i, i]] -= lambda;
        }
        let candidates = linalg::smallest_singular(&shifted, idx.len());
        for (sigma, v) in candidates {
            if sigma > DEFECT_TOL {
                defective = true;
                continue;
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let v = v.mapv(|z| z / norm);
            let av = sop.mat.dot(&v);
            let rayleigh: C64 = v.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum();
            let residual = av
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - rayleigh * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            max_residual = max_residual.max(residual);
            eigenoperators.push(EigenOperator {
                op: ComplexMatrix::unvectorize(v.as_slice().unwrap())?,
                lambda: rayleigh,
                group: gid,
                residual,
            });
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenoperators,
        defective,
        max_residual,
    })
}

/// Eigenoperators sharing one eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct EigenGroup {
    pub id: usize,
    #[serde(with = "crate::operators::complex_pair")]
    pub lambda: C64,
    /// Working basis of the eigenspace; hint-aligned when hints are given.
    pub basis: Vec<ComplexMatrix>,
    /// Orthonormal basis of the eigenspace.
    #[serde(skip)]
    pub orthonormal: Vec<ComplexMatrix>,
}

impl EigenGroup {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_unit(&self, rel_tol: f64) -> bool {
        close(self.lambda, C64::new(1.0, 0.0), rel_tol)
    }

    pub fn is_zero(&self) -> bool {
        self.lambda.norm() < ZERO_LAMBDA
    }

    pub fn is_real(&self, rel_tol: f64) -> bool {
        self.lambda.im.abs() <= rel_tol * self.lambda.norm().max(1.0)
    }

    /// Relative distance of `op` from the span.
    pub fn span_residual(&self, op: &ComplexMatrix) -> f64 {
        let norm = op.hs_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut rest = op.clone();
        for q in &self.orthonormal {
            rest = &rest - &q.scale(q.hs_inner(op));
        }
        rest.hs_norm() / norm
    }

    pub fn contains(&self, op: &ComplexMatrix) -> bool {
        self.span_residual(op) <= SPAN_TOL
    }

    /// Coefficients `c` with `op = Σ c_i basis_i`.
    pub fn coefficients(&self, op: &ComplexMatrix) -> Result<Vec<C64>> {
        let d = self.basis.len();
        let gram = Array2::from_shape_fn((d, d), |(i, j)| self.basis[i].hs_inner(&self.basis[j]));
        let rhs: Vec<C64> = self.basis.iter().map(|b| b.hs_inner(op)).collect();
        linalg::lu_solve(&gram, &rhs)
    }
}

/// Gram–Schmidt step: `v` minus its projection on `basis` (orthonormal),
/// normalized; `None` when the remainder is negligible.
fn orthonormalize_against(basis: &[ComplexMatrix], v: &ComplexMatrix, keep_hermitian: bool) -> Option<ComplexMatrix> {
    let norm0 = v.hs_norm();
    if norm0 == 0.0 {
        return None;
    }
    let mut rest = v.clone();
    for _ in 0..2 {
        for q in basis {
            let c = q.hs_inner(&rest);
            let c = if keep_hermitian { C64::new(c.re, 0.0) } else { c };
            rest = &rest - &q.scale(c);
        }
    }
    let norm = rest.hs_norm();
    if norm <= 1e-6 * norm0 {
        return None;
    }
    Some(rest.scale_re(1.0 / norm))
}

/// Partitions eigenoperators into eigenvalue classes (|λ| descending) with
/// orthonormal bases.
pub fn group_by_eigenvalue(eigs: &[EigenOperator], rel_tol: f64) -> Vec<EigenGroup> {
    let lambdas: Vec<C64> = eigs.iter().map(|e| e.lambda).collect();
    let mut clusters = cluster(&lambdas, rel_tol);
    clusters.sort_by(|a, b| order(mean(&lambdas, a), mean(&lambdas, b)));
    clusters
        .into_iter()
        .enumerate()
        .map(|(id, idx)| {
            let lambda = mean(&lambdas, &idx);
            let mut orthonormal = Vec::new();
            for &i in &idx {
                if let Some(q) = orthonormalize_against(&orthonormal, &eigs[i].op, false) {
                    orthonormal.push(q);
                }
            }
            EigenGroup {
                id,
                lambda,
                basis: orthonormal.clone(),
                orthonormal,
            }
        })
        .collect()
}

/// Chooses working bases. Hints lying in a group's span come first (in
/// hint order, unit-normalized); the rest of the span is filled with
/// orthonormal directions, Hermitian when the eigenvalue is real. The
/// identity direction is removed from the `λ = 1` group.
pub fn align_groups(groups: &mut [EigenGroup], hints: &[ComplexMatrix], rel_tol: f64) {
    for g in groups.iter_mut() {
        let dim = g.orthonormal.len();
        let unit = g.is_unit(rel_tol);
        let hermitian = g.is_real(rel_tol);
        let n = g.orthonormal.first().map(|q| q.dim()).unwrap_or(0);
        // orthonormal set used only to detect independence
        let mut span: Vec<ComplexMatrix> = Vec::new();
        let mut basis: Vec<ComplexMatrix> = Vec::new();
        let mut target = dim;
        if unit && n > 0 {
            let id = ComplexMatrix::identity(n).scale_re(1.0 / (n as f64).sqrt());
            if g.contains(&id) {
                span.push(id);
                target -= 1;
            }
        }
        for h in hints {
            if basis.len() == target {
                break;
            }
            if h.dim() != n || !g.contains(h) {
                continue;
            }
            let h = if unit { remove_trace(h) } else { h.clone() };
            if let Some(q) = orthonormalize_against(&span, &h, false) {
                span.push(q);
                basis.push(h.scale_re(1.0 / h.hs_norm()));
            }
        }
        let mut fillers: Vec<ComplexMatrix> = Vec::new();
        for q in &g.orthonormal {
            if hermitian {
                let (h1, h2) = hermitian_parts(q);
                fillers.push(h1);
                fillers.push(h2);
            } else {
                fillers.push(q.clone());
            }
        }
        let keep_h = hermitian && basis.iter().all(|b| b.is_hermitian(1e-10));
        for f in fillers {
            if basis.len() == target {
                break;
            }
            if let Some(q) = orthonormalize_against(&span, &f, keep_h) {
                let q = if keep_h { (&q + &q.adjoint()).scale_re(0.5) } else { q };
                let q = q.scale_re(1.0 / q.hs_norm());
                if !g.contains(&q) {
                    continue;
                }
                span.push(q.clone());
                basis.push(q);
            }
        }
        g.basis = basis;
    }
}

fn remove_trace(op: &ComplexMatrix) -> ComplexMatrix {
    let n = op.dim();
    let shift = op.trace() / n as f64;
    op - &ComplexMatrix::identity(n).scale(shift)
}

/// Rayleigh quotient `<O, Φ(O)> / <O, O>`.
pub fn lambda_of(sop: &Superoperator, op: &ComplexMatrix) -> Result<C64> {
    let image = sop.apply(op)?;
    let norm2 = op.hs_norm().powi(2);
    if norm2 == 0.0 {
        return Ok(ZERO);
    }
    Ok(op.hs_inner(&image) / norm2)
}
