//! Group symmetrization of operators and decoupling-group checks.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    collective_spin, commutator, hs_inner, multipole_basis, AlgebraError, Matrix, Operator, Spin, C64,
};
use crate::pointgroup::{build_group, lift, lift_register, GroupElement, GroupError, GroupKind, PointGroup};

/// Relative tolerance for "proportional to the identity" and invariance tests.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("interaction subspace is empty")]
    EmptySubspace,
}

/// Unitaries `U_g` of a group on a register.
pub fn register_lifts(group: &PointGroup, spins: &[Spin]) -> Vec<Matrix> {
    group.elements.iter().map(|g| lift_register(g, spins)).collect()
}

/// `(1/|G|) Σ U† S U` over precomputed lifts.
pub fn symmetrize_with(lifts: &[Matrix], s: &Matrix) -> Matrix {
    let mut acc = Matrix::zeros(s.nrows(), s.ncols());
    for u in lifts {
        acc += u.adjoint() * s * u;
    }
    acc / C64::from(lifts.len() as f64)
}

/// Group average `Π_G(S) = (1/|G|) Σ_g g† S g`.
pub fn symmetrize(group: &PointGroup, s: &Operator) -> Operator {
    let lifts = register_lifts(group, &s.spins());
    Operator { dims: s.dims.clone(), matrix: symmetrize_with(&lifts, &s.matrix), label: s.label.clone() }
}

/// `Π_G2[Π_G1(S)]`, the effect of nesting a `G1` sequence inside a `G2` sequence.
pub fn multisymmetrize(inner: &PointGroup, outer: &PointGroup, s: &Operator) -> Operator {
    symmetrize(outer, &symmetrize(inner, s))
}

/// Deviation of `S` from a multiple of the identity, relative to `‖S‖`.
pub fn identity_residual(s: &Matrix) -> f64 {
    let op = Operator::single(s.clone());
    let n = op.norm();
    if n == 0.0 {
        return 0.0;
    }
    op.traceless().norm() / n
}

/// A rotation symmetry: a finite group or a continuous axial one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Symmetry {
    Finite(PointGroup),
    /// All rotations about an axis.
    CInf([f64; 3]),
    /// `CInf` plus the π rotations about every perpendicular axis.
    DInf([f64; 3]),
}

impl Symmetry {
    pub fn name(&self) -> String {
        match self {
            Symmetry::Finite(g) => g.name(),
            Symmetry::CInf(_) => "C∞".into(),
            Symmetry::DInf(_) => "D∞".into(),
        }
    }

    /// Finite group with the same action on rank ≤ `l` operators.
    fn finite_proxy(&self, l: usize) -> Result<PointGroup, GroupError> {
        let n = (2 * l + 1) as u32;
        match self {
            Symmetry::Finite(g) => Ok(g.clone()),
            Symmetry::CInf(a) => build_group(GroupKind::Cyclic(n), GroupElement::aligning_z_to(unit(*a))),
            Symmetry::DInf(a) => build_group(GroupKind::Dihedral(n), GroupElement::aligning_z_to(unit(*a))),
        }
    }
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn perpendicular(a: [f64; 3]) -> [f64; 3] {
    let t = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    unit(crate::pointgroup::cross3(a, t))
}

/// Dimension of the `G`-invariant subspace of the rank-`l` irrep.
pub fn fixed_subspace_dim(group: &PointGroup, l: usize) -> usize {
    let spin = Spin::from_twice(l as u32);
    let basis = multipole_basis(spin);
    let lifts: Vec<Matrix> = group.elements.iter().map(|g| lift(g, spin)).collect();
    let tr: f64 = basis
        .rank(l)
        .iter()
        .map(|t| hs_inner(t, &symmetrize_with(&lifts, t)).re)
        .sum();
    tr.round().max(0.0) as usize
}

pub fn fixed_subspace_dim_of(sym: &Symmetry, l: usize) -> Result<usize, SymmetryError> {
    Ok(fixed_subspace_dim(&sym.finite_proxy(l)?, l))
}

/// Operators `S_α` spanning the system part of an interaction.
#[derive(Debug, Clone)]
pub struct InteractionSubspace {
    pub dims: Vec<usize>,
    pub basis: Vec<Matrix>,
}

impl InteractionSubspace {
    pub fn new(dims: Vec<usize>, basis: Vec<Matrix>) -> Result<Self, SymmetryError> {
        if basis.is_empty() {
            return Err(SymmetryError::EmptySubspace);
        }
        let d: usize = dims.iter().product();
        for b in &basis {
            if b.nrows() != d || b.ncols() != d {
                return Err(AlgebraError::DimensionMismatch { expected: d, found: b.nrows() }.into());
            }
            let dev = (b - b.adjoint()).norm();
            if dev > 1e-9 * b.norm().max(1.0) {
                return Err(AlgebraError::NotHermitian(dev).into());
            }
        }
        Ok(InteractionSubspace { dims, basis })
    }

    pub fn from_operator(op: &Operator) -> Self {
        InteractionSubspace { dims: op.dims.clone(), basis: vec![op.matrix.clone()] }
    }

    pub fn spins(&self) -> Vec<Spin> {
        self.dims.iter().map(|&d| Spin::from_dim(d).expect("positive dimension")).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub group: String,
    /// Rank of the traceless parts of the symmetrized spanning operators.
    pub fixed_dim: usize,
    pub is_decoupling: bool,
    /// Largest `‖Π_G(S_α) - tr/d‖ / ‖S_α‖`.
    pub residual: f64,
}

impl SymmetryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn numerical_rank(vectors: &[Matrix], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors.len();
    let gram = DMatrix::from_fn(n, n, |a, b| hs_inner(&vectors[a], &vectors[b]));
    let eig = nalgebra::SymmetricEigen::new(gram);
    eig.eigenvalues.iter().filter(|&&v| v > tol * tol).count()
}

/// Whether `Π_G` maps every operator of the subspace to a multiple of the identity.
pub fn is_decoupling_group(group: &PointGroup, sub: &InteractionSubspace) -> SymmetryReport {
    let lifts = register_lifts(group, &sub.spins());
    let mut residual = 0.0_f64;
    let mut images = Vec::with_capacity(sub.basis.len());
    let mut scale = 0.0_f64;
    for s in &sub.basis {
        let p = Operator::single(symmetrize_with(&lifts, s)).traceless();
        let n = Operator::single(s.clone()).norm();
        scale = scale.max(n);
        if n > 0.0 {
            residual = residual.max(p.norm() / n);
        }
        images.push(p.matrix);
    }
    let fixed_dim = numerical_rank(&images, SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE));
    SymmetryReport { group: group.name(), fixed_dim, is_decoupling: residual <= SYMMETRY_TOL, residual }
}

/// Whether `g† S g = S` for every element of the symmetry.
pub fn is_invariant(s: &Operator, sym: &Symmetry) -> bool {
    let spins = s.spins();
    let scale = s.norm().max(1e-14);
    let invariant_under = |u: &Matrix| (u.adjoint() * &s.matrix * u - &s.matrix).norm() <= SYMMETRY_TOL * scale;
    let axial = |axis: [f64; 3]| {
        let a = unit(axis);
        let jc = collective_spin(&spins);
        let gen = &jc[0] * C64::from(a[0]) + &jc[1] * C64::from(a[1]) + &jc[2] * C64::from(a[2]);
        if commutator(&gen, &s.matrix).norm() > SYMMETRY_TOL * scale {
            return false;
        }
        (1..=8).all(|k| {
            let g = GroupElement::from_axis_angle(a, 2.0 * PI * k as f64 / 8.0 + 0.1).expect("unit axis");
            invariant_under(&lift_register(&g, &spins))
        })
    };
    match sym {
        Symmetry::Finite(g) => g.elements.iter().all(|e| invariant_under(&lift_register(e, &spins))),
        Symmetry::CInf(a) => axial(*a),
        Symmetry::DInf(a) => {
            let flip = GroupElement::from_axis_angle(perpendicular(unit(*a)), PI).expect("unit axis");
            axial(*a) && invariant_under(&lift_register(&flip, &spins))
        }
    }
}

/// Candidates that leave `S` invariant.
pub fn operator_symmetry_group(s: &Operator, candidates: &[Symmetry]) -> Vec<Symmetry> {
    candidates.iter().filter(|c| is_invariant(s, c)).cloned().collect()
}
