//! Spin operators, tensor-product embedding, matrix exponentials and
//! multipole (spherical tensor) bases.

mod multipole;

pub use multipole::{
    clebsch_gordan, collective_tensor, irrep_project, multipole_basis, MultipoleBasis,
    TensorComponent,
};

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("spin quantum number {0} is not a non-negative half-integer")]
    InvalidSpin(f64),
    #[error("site index {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rank {l} is not available for spin {j}")]
    RankOutOfRange { l: usize, j: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("rank-{0} component spans several irreducible copies")]
    MultipleCopies(usize),
}

/// A spin quantum number stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };

    pub fn new(j: f64) -> Result<Self, AlgebraError> {
        let t = 2.0 * j;
        if !(t >= 0.0) || (t - t.round()).abs() > 1e-12 || t > 1e6 {
            return Err(AlgebraError::InvalidSpin(j));
        }
        Ok(Spin { twice: t.round() as u32 })
    }

    pub const fn from_twice(twice: u32) -> Self {
        Spin { twice }
    }

    /// Spin whose Hilbert space has dimension `dim`.
    pub fn from_dim(dim: usize) -> Result<Self, AlgebraError> {
        if dim == 0 {
            return Err(AlgebraError::InvalidSpin(-0.5));
        }
        Ok(Spin { twice: (dim - 1) as u32 })
    }

    pub fn twice(&self) -> u32 {
        self.twice
    }

    pub fn j(&self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum numbers in basis order `j, j-1, ..., -j`.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.j() - k as f64).collect()
    }
}

/// Cartesian spin matrices plus ladder operators, basis ordered `m = j..-j`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: Spin,
    pub jx: Matrix,
    pub jy: Matrix,
    pub jz: Matrix,
    pub jp: Matrix,
    pub jm: Matrix,
}

impl SpinOperators {
    pub fn cartesian(&self) -> [&Matrix; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    /// `n.J` for a 3-vector `n`.
    pub fn along(&self, n: [f64; 3]) -> Matrix {
        &self.jx * C64::from(n[0]) + &self.jy * C64::from(n[1]) + &self.jz * C64::from(n[2])
    }
}

pub fn spin_operators(spin: Spin) -> SpinOperators {
    let d = spin.dim();
    let j = spin.j();
    let ms = spin.m_values();
    let mut jz = Matrix::zeros(d, d);
    let mut jp = Matrix::zeros(d, d);
    for k in 0..d {
        jz[(k, k)] = C64::from(ms[k]);
        if k > 0 {
            // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits one row up
            let m = ms[k];
            jp[(k - 1, k)] = C64::from((j * (j + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * C64::from(0.5);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    SpinOperators { spin, jx, jy, jz, jp, jm }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Places a single-site operator on `site` of a register with local dimensions `dims`.
pub fn embed(op: &Matrix, site: usize, dims: &[usize]) -> Result<Matrix, AlgebraError> {
    if site >= dims.len() {
        return Err(AlgebraError::SiteOutOfRange { site, sites: dims.len() });
    }
    if op.nrows() != dims[site] || op.ncols() != dims[site] {
        return Err(AlgebraError::DimensionMismatch { expected: dims[site], found: op.nrows() });
    }
    let before: usize = dims[..site].iter().product();
    let after: usize = dims[site + 1..].iter().product();
    let left = Matrix::identity(before, before).kronecker(op);
    Ok(left.kronecker(&Matrix::identity(after, after)))
}

/// Collective spin components `Σ_i J_a^(i)` for a register of spins.
pub fn collective_spin(spins: &[Spin]) -> [Matrix; 3] {
    let dims: Vec<usize> = spins.iter().map(Spin::dim).collect();
    let total: usize = dims.iter().product();
    let mut out = [Matrix::zeros(total, total), Matrix::zeros(total, total), Matrix::zeros(total, total)];
    for (site, s) in spins.iter().enumerate() {
        let ops = spin_operators(*s);
        for (a, m) in ops.cartesian().into_iter().enumerate() {
            out[a] += embed(m, site, &dims).expect("site in range");
        }
    }
    out
}

/// Operator on a register of spins; `dims` are the local dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub dims: Vec<usize>,
    pub matrix: Matrix,
    pub label: Option<String>,
}

impl Operator {
    pub fn new(dims: Vec<usize>, matrix: Matrix) -> Result<Self, AlgebraError> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(AlgebraError::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Operator { dims, matrix, label: None })
    }

    pub fn single(matrix: Matrix) -> Self {
        let d = matrix.nrows();
        Operator { dims: vec![d], matrix, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Operator { dims: dims.to_vec(), matrix: Matrix::identity(d, d), label: None }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let d: usize = dims.iter().product();
        Operator { dims: dims.to_vec(), matrix: Matrix::zeros(d, d), label: None }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spins(&self) -> Vec<Spin> {
        self.dims.iter().map(|&d| Spin::from_dim(d).expect("positive dimension")).collect()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol * self.matrix.norm().max(1.0)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn hs_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    /// Traceless part `A - tr(A)/d`.
    pub fn traceless(&self) -> Operator {
        let d = self.dim();
        let shift = self.trace() / C64::from(d as f64);
        let mut m = self.matrix.clone();
        for k in 0..d {
            m[(k, k)] -= shift;
        }
        Operator { dims: self.dims.clone(), matrix: m, label: self.label.clone() }
    }
}

/// `Tr(A† B)`.
pub fn hs_inner(a: &Matrix, b: &Matrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

/// Spectral norm; Hermitian input goes through the eigenvalues.
pub fn op_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let herm = (m - m.adjoint()).norm() <= 1e-12 * m.norm().max(f64::MIN_POSITIVE);
    if herm {
        let eig = SymmetricEigen::new(m.clone());
        eig.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    } else {
        m.clone().singular_values().iter().fold(0.0_f64, |acc, v| acc.max(*v))
    }
}

/// Eigendecomposition of a Hermitian matrix, reusable for `exp(-i H t)` at many `t`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl HermitianEig {
    pub fn new(h: &Matrix) -> Result<Self, AlgebraError> {
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        // symmetrize so round-off asymmetry does not leak into the decomposition
        let hs = (h + h.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(hs);
        Ok(HermitianEig { values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> Matrix {
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let mut col = scaled.column_mut(k);
            col *= C64::from_polar(1.0, -lam * t);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Matrix exponential. Anti-Hermitian generators go through a Hermitian
/// eigendecomposition, which keeps the result unitary to round-off; anything
/// else uses Padé scaling-and-squaring.
pub fn expm(a: &Matrix) -> Result<Matrix, AlgebraError> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(AlgebraError::NonFinite);
    }
    let n = a.norm();
    if n == 0.0 {
        return Ok(Matrix::identity(a.nrows(), a.ncols()));
    }
    let anti = (a + a.adjoint()).norm() <= 1e-13 * n;
    if anti {
        // A = -i H with H = i A Hermitian
        let h = a * I;
        Ok(HermitianEig::new(&h)?.propagator(1.0))
    } else {
        let out = a.exp();
        if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(out)
    }
}
