//! Dense complex operators on an N-level system.
//!
//! Everything in the crate (states, observables, Kraus elements) is a
//! [`ComplexMatrix`]. The constructors here cover the generalized Pauli
//! operators `X`, `Z`, `Y = XZ`, the Hermitian operator basis
//! `S(k,l)`, `A(k,l)`, `d(k)` and the diagonal differences `D(k,l)`,
//! plus the qubit Pauli set.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RngSeed;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance for trace and Hermiticity checks on states.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a positive-semidefinite state.
pub const PSD_TOL: f64 = 1e-10;

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: Array2<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for row in self.data.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: Array2::eye(dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut((usize, usize)) -> C64) -> Self {
        Self {
            data: Array2::from_shape_fn((dim, dim), f),
        }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |(r, c)| if r == c { diag[r] } else { ZERO })
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a
    /// perfect square.
    pub fn from_row_major(entries: &[C64]) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::Parse(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self::from_fn(dim, |(r, c)| entries[r * dim + c]))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Parse("rows do not form a square matrix".into()));
        }
        Ok(Self::from_fn(dim, |(r, c)| rows[r][c]))
    }

    pub fn from_array(data: Array2<C64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c || r == 0 {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        Ok(Self { data })
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        Ok(Self::from_fn(u.len(), |(r, c)| u[r] * v[c].conj()))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[[row, col]]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[[row, col]] = value;
    }

    pub fn row_major(&self) -> Vec<C64> {
        self.data.iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: self.data.dot(&other.data),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            data: self.data.mapv(|z| z * factor),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.t().mapv(|z| z.conj()),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.diag().iter().sum()
    }

    /// Hilbert-Schmidt inner product `Tr(self^† other)`.
    pub fn hs_inner(&self, other: &Self) -> C64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Non-negative integer power.
    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::identity(self.dim());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        result
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        Self::from_fn(n * m, |(r, c)| {
            self.data[[r / m, c / m]] * other.data[[r % m, c % m]]
        })
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim())) <= tol
    }

    /// Whether `O^† = e^{iθ} O` for some phase, i.e. `<O>` lies on a fixed
    /// line of the complex plane for every state.
    pub fn is_hermitian_up_to_phase(&self, tol: f64) -> bool {
        let adj = self.adjoint();
        let overlap = self.hs_inner(&adj);
        let norm2 = self.hs_norm().powi(2);
        if norm2 == 0.0 {
            return true;
        }
        let phase = overlap / norm2;
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        adj.max_abs_diff(&self.scale(phase)) <= tol * self.max_abs().max(1.0)
    }

    /// Column-stacking vectorization: entry `(a, b)` lands at `a + b*N`.
    pub fn vectorize(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n * n).map(|j| self.data[[j % n, j / n]]).collect()
    }

    pub fn unvectorize(v: &[C64]) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() || n == 0 {
            return Err(Error::Parse(format!(
                "vector of length {} is not a vectorized square matrix",
                v.len()
            )));
        }
        Ok(Self::from_fn(n, |(a, b)| v[a + b * n]))
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.data).0
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a dimension mismatch; use [`ComplexMatrix::try_mul`] for a checked product.
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum dimension mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference dimension mismatch")
    }
}

/// Serializes a complex number as `[re, im]`.
pub mod complex_pair {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Serializes a list of complex numbers as `[[re, im], ...]`.
pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(zs: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .data
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Nested(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    /// Accepts either nested rows `[[[re, im], ...], ...]` or a flat
    /// row-major list `[[re, im], ...]`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match MatrixRepr::deserialize(d)? {
            MatrixRepr::Nested(rows) => {
                let rows: Vec<Vec<C64>> = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                    .collect();
                ComplexMatrix::from_rows(&rows).map_err(D::Error::custom)
            }
            MatrixRepr::Flat(entries) => {
                let entries: Vec<C64> = entries.into_iter().map(|[re, im]| C64::new(re, im)).collect();
                ComplexMatrix::from_row_major(&entries).map_err(D::Error::custom)
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// `ω = e^{2πi/N}`.
pub fn omega(n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / n as f64)
}

/// Cyclic shift `X = Σ_k |k+1><k|`.
pub fn make_x(n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    Ok(ComplexMatrix::from_fn(n, |(r, c)| {
        if r == (c + 1) % n {
            ONE
        } else {
            ZERO
        }
    }))
}

/// Clock `Z = Σ_k ω^k |k><k|`.
pub fn make_z(n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let w = omega(n);
    let diag: Vec<C64> = (0..n).map(|k| w.powu(k as u32)).collect();
    Ok(ComplexMatrix::from_diag(&diag))
}

/// Combined flip and phase `Y = XZ`.
pub fn make_y(n: usize) -> Result<ComplexMatrix> {
    Ok(&make_x(n)? * &make_z(n)?)
}

fn check_pair(k: usize, l: usize, n: usize) -> Result<()> {
    check_dim(n)?;
    if k >= n || l >= n {
        return Err(Error::IndexOutOfRange(format!(
            "({k}, {l}) not within 0..{n}"
        )));
    }
    if k == l {
        return Err(Error::IndexOutOfRange(format!(
            "indices must differ, got k = l = {k}"
        )));
    }
    Ok(())
}

fn unit(n: usize, k: usize, l: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |(r, c)| if r == k && c == l { ONE } else { ZERO })
}

/// `S(k,l) = |k><l| + |l><k|`.
pub fn make_s(k: usize, l: usize, n: usize) -> Result<ComplexMatrix> {
    check_pair(k, l, n)?;
    Ok(&unit(n, k, l) + &unit(n, l, k))
}

/// `A(k,l) = -i(|k><l| - |l><k|)`.
pub fn make_a(k: usize, l: usize, n: usize) -> Result<ComplexMatrix> {
    check_pair(k, l, n)?;
    Ok((&unit(n, k, l) - &unit(n, l, k)).scale(-I))
}

/// Projector `d(k) = |k><k|`.
pub fn make_d(k: usize, n: usize) -> Result<ComplexMatrix> {
    check_dim(n)?;
    if k >= n {
        return Err(Error::IndexOutOfRange(format!("{k} not within 0..{n}")));
    }
    Ok(unit(n, k, k))
}

/// `D(k,l) = d(k) - d(l)`.
pub fn make_big_d(k: usize, l: usize, n: usize) -> Result<ComplexMatrix> {
    check_pair(k, l, n)?;
    Ok(&unit(n, k, k) - &unit(n, l, l))
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_major(&[ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(&[ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_row_major(&[ONE, ZERO, ZERO, -ONE]).unwrap()
}

/// `σ+ = σx + iσy = 2|0><1|`.
pub fn sigma_plus() -> ComplexMatrix {
    &sigma_x() + &sigma_y().scale(I)
}

/// `σ- = σx - iσy = 2|1><0|`.
pub fn sigma_minus() -> ComplexMatrix {
    &sigma_x() - &sigma_y().scale(I)
}

/// Projector onto the `σz = -1` eigenstate, `|1><1|`.
pub fn pi_z_minus() -> ComplexMatrix {
    unit(2, 1, 1)
}

/// Splits `O` into Hermitian parts `H1 = (O+O†)/2`, `H2 = (O-O†)/(2i)` with
/// `O = H1 + i H2`.
pub fn hermitian_parts(op: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let adj = op.adjoint();
    let h1 = (op + &adj).scale_re(0.5);
    let h2 = (op - &adj).scale(C64::new(0.0, -0.5));
    (h1, h2)
}

/// `<O>_ρ = Tr(O ρ)`; complex in general.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationValue {
    #[serde(with = "complex_pair")]
    pub value: C64,
}

impl ExpectationValue {
    pub fn re(&self) -> f64 {
        self.value.re
    }

    pub fn im(&self) -> f64 {
        self.value.im
    }
}

/// Trace-one, Hermitian, positive-semidefinite state.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        check_dim(mat.dim())?;
        let tr = mat.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "trace {:.3e}{:+.3e}i differs from 1",
                tr.re, tr.im
            )));
        }
        let herm = mat.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let min_eig = mat.hermitian_eigenvalues()[0];
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix already known to be a state (e.g. a CPTP image).
    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    /// `|ψ><ψ|` for a (not necessarily normalized) vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        check_dim(psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self {
            mat: ComplexMatrix::outer(&unit, &unit)?,
        })
    }

    pub fn basis_state(k: usize, n: usize) -> Result<Self> {
        Ok(Self { mat: make_d(k, n)? })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            mat: ComplexMatrix::identity(n).scale_re(1.0 / n as f64),
        })
    }

    /// Qubit state `½(1 + r·σ)` with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + STATE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length {len} > 1")));
        }
        let m = &(&ComplexMatrix::identity(2) + &sigma_x().scale_re(r[0]))
            + &(&sigma_y().scale_re(r[1]) + &sigma_z().scale_re(r[2]));
        Ok(Self {
            mat: m.scale_re(0.5),
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.hs_inner(&self.mat).re
    }

    /// Fidelity `<ψ|ρ|ψ>` with a pure state.
    pub fn fidelity_with_pure(&self, psi: &[C64]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: psi.len(),
            });
        }
        let mut acc = ZERO;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                acc += psi[r].conj() * self.mat.get(r, c) * psi[c];
            }
        }
        Ok(acc.re)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mat = ComplexMatrix::deserialize(d)?;
        DensityMatrix::new(mat).map_err(D::Error::custom)
    }
}

/// `Tr(O ρ)`.
pub fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<ExpectationValue> {
    if rho.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: op.dim(),
        });
    }
    let m = rho.matrix();
    let n = op.dim();
    let mut value = ZERO;
    for r in 0..n {
        for c in 0..n {
            value += op.get(r, c) * m.get(c, r);
        }
    }
    Ok(ExpectationValue { value })
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state from a normalized complex Gaussian vector.
pub fn random_pure_state(n: usize, seed: RngSeed) -> Result<DensityMatrix> {
    check_dim(n)?;
    let mut rng = seed.rng();
    random_pure_state_with(n, &mut rng)
}

pub fn random_pure_state_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_dim(n)?;
    let psi: Vec<C64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    DensityMatrix::from_pure(&psi)
}

/// Ginibre mixed state `G G† / Tr(G G†)`; full rank with probability one.
pub fn random_mixed_state(n: usize, seed: RngSeed) -> Result<DensityMatrix> {
    let mut rng = seed.rng();
    random_mixed_state_with(n, &mut rng)
}

pub fn random_mixed_state_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    check_dim(n)?;
    let g = ComplexMatrix::from_fn(n, |_| gaussian_complex(rng));
    let ggd = &g * &g.adjoint();
    let tr = ggd.trace().re;
    let mut mat = ggd.scale_re(1.0 / tr);
    // exact Hermiticity after rounding
    let herm = (&mat + &mat.adjoint()).scale_re(0.5);
    mat = herm;
    Ok(DensityMatrix { mat })
}

/// Random operator with independent complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_| gaussian_complex(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn x_has_ones_below_the_diagonal_cyclically() {
        let x = make_x(3).unwrap();
        for (r, c) in [(1, 0), (2, 1), (0, 2)] {
            assert_eq!(x.get(r, c), ONE);
        }
        assert_eq!(x.row_major().iter().filter(|z| **z == ONE).count(), 3);
        assert!(make_x(2).unwrap().max_abs_diff(&sigma_x()) < TOL);
        assert!(make_x(4).unwrap().pow(4).max_abs_diff(&ComplexMatrix::identity(4)) < TOL);
    }

    #[test]
    fn z_is_the_clock_operator() {
        assert!(make_z(2).unwrap().max_abs_diff(&sigma_z()) < TOL);
        let z = make_z(3).unwrap();
        let w = omega(3);
        assert!((z.get(1, 1) - w).norm() < TOL);
        assert!((z.get(2, 2) - w * w).norm() < TOL);
        let x = make_x(3).unwrap();
        let comm = &(&z * &x) - &(&x * &z).scale(w);
        assert!(comm.max_abs() < 1e-14);
    }

    #[test]
    fn y_is_xz() {
        let y2 = make_y(2).unwrap();
        assert!(y2.max_abs_diff(&sigma_y().scale(-I)) < TOL);
        assert!(make_y(3).unwrap().is_unitary(1e-14));
        for n in 2..=6 {
            let yn = make_y(n).unwrap().pow(n as u32);
            let phase = yn.get(0, 0);
            assert!((phase.norm() - 1.0).abs() < TOL);
            assert!(yn.max_abs_diff(&ComplexMatrix::identity(n).scale(phase)) < TOL);
            // (XZ)^N = ω^{N(N-1)/2} = (-1)^{N-1}
            let expected = if n % 2 == 0 { -ONE } else { ONE };
            assert!((phase - expected).norm() < TOL, "N={n}");
        }
    }

    #[test]
    fn weyl_identities_up_to_eight_levels() {
        for n in 2..=8 {
            let (x, z, y) = (make_x(n).unwrap(), make_z(n).unwrap(), make_y(n).unwrap());
            let id = ComplexMatrix::identity(n);
            for u in [&x, &z, &y] {
                assert!(u.is_unitary(TOL));
            }
            assert!(x.pow(n as u32).max_abs_diff(&id) < TOL);
            assert!(z.pow(n as u32).max_abs_diff(&id) < TOL);
            assert!((&z * &x).max_abs_diff(&(&x * &z).scale(omega(n))) < TOL);
        }
    }

    #[test]
    fn qubit_basis_operators_match_paulis() {
        assert!(make_s(1, 0, 2).unwrap().max_abs_diff(&sigma_x()) < TOL);
        // A(1,0) = -i(|1><0| - |0><1|) = -σy
        assert!(make_a(1, 0, 2).unwrap().max_abs_diff(&sigma_y().scale_re(-1.0)) < TOL);
        assert!(make_big_d(1, 0, 2).unwrap().max_abs_diff(&sigma_z().scale_re(-1.0)) < TOL);
        let s = make_s(2, 1, 3).unwrap();
        assert_eq!(s.get(2, 1), ONE);
        assert_eq!(s.get(1, 2), ONE);
        assert_eq!(s.row_major().iter().filter(|z| **z != ZERO).count(), 2);
    }

    #[test]
    fn basis_operator_errors() {
        assert!(matches!(make_s(1, 1, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(make_a(3, 0, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(make_d(3, 3), Err(Error::IndexOutOfRange(_))));
        assert!(matches!(make_x(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(make_z(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn antisymmetric_basis_is_traceless_and_hermitian() {
        for n in 2..=6 {
            for k in 0..n {
                for l in 0..k {
                    let a = make_a(k, l, n).unwrap();
                    assert!(a.trace().norm() < TOL);
                    assert!(a.is_hermitian(TOL));
                    assert!(make_s(k, l, n).unwrap().is_hermitian(TOL));
                }
            }
        }
    }

    #[test]
    fn operator_basis_gram_matrix_is_nonsingular() {
        for n in 2..=6 {
            let mut basis = Vec::new();
            for k in 0..n {
                basis.push(make_d(k, n).unwrap());
                for l in 0..k {
                    basis.push(make_s(k, l, n).unwrap());
                    basis.push(make_a(k, l, n).unwrap());
                }
            }
            assert_eq!(basis.len(), n * n);
            let gram = Array2::from_shape_fn((n * n, n * n), |(i, j)| basis[i].hs_inner(&basis[j]));
            let (sigma, _) = linalg::svd_jacobi(&gram);
            let min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(min > 0.5, "N={n}: smallest singular value {min}");
        }
    }

    #[test]
    fn expectation_examples() {
        let zero = DensityMatrix::basis_state(0, 2).unwrap();
        assert!((expectation(&zero, &sigma_z()).unwrap().value - ONE).norm() < TOL);
        for n in 2..=5 {
            let mixed = DensityMatrix::maximally_mixed(n).unwrap();
            assert!(expectation(&mixed, &make_x(n).unwrap()).unwrap().value.norm() < TOL);
        }
        let rho = DensityMatrix::from_bloch([0.6, 0.0, 0.8]).unwrap();
        assert!((expectation(&rho, &sigma_x()).unwrap().re() - 0.6).abs() < TOL);
        assert!(matches!(
            expectation(&rho, &make_x(3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_is_linear() {
        let mut rng = RngSeed::new(3).rng();
        for n in 2..=5 {
            let rho1 = random_mixed_state_with(n, &mut rng).unwrap();
            let rho2 = random_mixed_state_with(n, &mut rng).unwrap();
            let a = random_operator(n, &mut rng);
            let b = random_operator(n, &mut rng);
            let c = C64::new(0.3, -1.2);
            let lhs = expectation(&rho1, &(&a + &b.scale(c))).unwrap().value;
            let rhs = expectation(&rho1, &a).unwrap().value + c * expectation(&rho1, &b).unwrap().value;
            assert!((lhs - rhs).norm() < TOL);
            let t = 0.35;
            let mix = DensityMatrix::new(
                &rho1.matrix().scale_re(t) + &rho2.matrix().scale_re(1.0 - t),
            )
            .unwrap();
            let lhs = expectation(&mix, &a).unwrap().value;
            let rhs = expectation(&rho1, &a).unwrap().value * t
                + expectation(&rho2, &a).unwrap().value * (1.0 - t);
            assert!((lhs - rhs).norm() < TOL);
        }
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        for n in 2..=6 {
            for s in 0..100u64 {
                let mixed = random_mixed_state(n, RngSeed::new(s)).unwrap();
                let checked = DensityMatrix::new(mixed.matrix().clone()).unwrap();
                let min = checked.matrix().hermitian_eigenvalues()[0];
                assert!(min > 0.0, "N={n} seed={s}: {min}");
            }
            let pure = random_pure_state(n, RngSeed::new(9)).unwrap();
            assert!((pure.purity() - 1.0).abs() < TOL);
            DensityMatrix::new(pure.matrix().clone()).unwrap();
        }
        let a = random_mixed_state(4, RngSeed::new(42)).unwrap();
        let b = random_mixed_state(4, RngSeed::new(42)).unwrap();
        assert_eq!(a.matrix().row_major(), b.matrix().row_major());
        assert!(matches!(random_pure_state(1, RngSeed::new(0)), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn hermitian_parts_reconstruct() {
        let (h1, h2) = hermitian_parts(&sigma_z());
        assert!(h2.max_abs() < TOL);
        assert!(h1.max_abs_diff(&sigma_z()) < TOL);
        let (h1, h2) = hermitian_parts(&sigma_z().scale(I));
        assert!(h1.max_abs() < TOL);
        assert!(h2.max_abs_diff(&sigma_z()) < TOL);

        let x = make_x(3).unwrap();
        let (h1, h2) = hermitian_parts(&x);
        assert!(h1.is_hermitian(TOL) && h2.is_hermitian(TOL));
        let rho = random_mixed_state(3, RngSeed::new(5)).unwrap();
        let full = expectation(&rho, &x).unwrap().value;
        let parts = expectation(&rho, &h1).unwrap().value + I * expectation(&rho, &h2).unwrap().value;
        assert!((full - parts).norm() < TOL);
    }

    #[test]
    fn vectorization_is_column_stacking() {
        let m = ComplexMatrix::from_row_major(&[
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(4.0, 0.0),
        ])
        .unwrap();
        let v = m.vectorize();
        assert_eq!(v.iter().map(|z| z.re).collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(ComplexMatrix::unvectorize(&v).unwrap(), m);
    }

    #[test]
    fn density_matrix_rejects_invalid_input() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidState(_))));
        let negative = ComplexMatrix::from_diag(&[C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidState(_))));
        let non_herm = ComplexMatrix::from_row_major(&[
            C64::new(0.5, 0.0),
            C64::new(0.1, 0.0),
            ZERO,
            C64::new(0.5, 0.0),
        ])
        .unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn phase_hermiticity_detection() {
        assert!(sigma_y().scale(I).is_hermitian_up_to_phase(1e-12));
        assert!(make_x(4).unwrap().pow(2).is_hermitian_up_to_phase(1e-12));
        assert!(!make_x(3).unwrap().is_hermitian_up_to_phase(1e-12));
    }
}
