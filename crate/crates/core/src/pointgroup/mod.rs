//! Finite rotation groups as sets of unit quaternions.

mod subgroups;

pub use subgroups::{factorize, intersect, subgroups, Factorization, GroupTable};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{expm, kron, spin_operators, Matrix, Spin, C64};

/// Elements closer than this (quaternion distance, up to sign) are equal.
pub const SNAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("unknown group name `{0}`")]
    UnknownName(String),
    #[error("group order {0} is not supported")]
    Unsupported(usize),
    #[error("generators do not close into a finite group of order ≤ {0}")]
    NotFinite(usize),
    #[error("element set is not a group")]
    NotAGroup,
    #[error("zero rotation axis")]
    ZeroAxis,
}

fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-300).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Hamilton product of `(w, x, y, z)` quaternions.
pub(crate) fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

pub(crate) fn axis_angle_quat(axis: [f64; 3], angle: f64) -> [f64; 4] {
    let (s, c) = (angle / 2.0).sin_cos();
    [c, s * axis[0], s * axis[1], s * axis[2]]
}

/// A rotation in SO(3), stored as a canonical unit quaternion `(w, x, y, z)`:
/// `w ≥ 0`, and when `w` vanishes the first non-zero vector component is positive.
///
/// The quaternion `q` stands for the SU(2) element `w - i(x σx + y σy + z σz)`,
/// i.e. `exp(-iθ n·σ/2)`; the Hamilton product matches matrix multiplication.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupElement {
    pub q: [f64; 4],
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, SNAP)
    }
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { q: [1.0, 0.0, 0.0, 0.0] };

    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut q = q.map(|v| v / n);
        let flip = if q[0].abs() > SNAP {
            q[0] < 0.0
        } else {
            q[0] = 0.0;
            q[1..].iter().find(|v| v.abs() > SNAP).is_some_and(|v| *v < 0.0)
        };
        if flip {
            q = q.map(|v| -v);
        }
        for v in q.iter_mut() {
            if v.abs() < 1e-15 {
                *v = 0.0;
            }
        }
        GroupElement { q }
    }

    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self, GroupError> {
        let n = normalize3(axis).ok_or(GroupError::ZeroAxis)?;
        Ok(Self::from_quaternion(axis_angle_quat(n, angle)))
    }

    /// Rotation axis and angle with the angle in `[0, π]`. The identity reports `+z`.
    pub fn axis_angle(&self) -> ([f64; 3], f64) {
        let [w, x, y, z] = self.q;
        let s = (x * x + y * y + z * z).sqrt();
        if s < 1e-15 {
            return ([0.0, 0.0, 1.0], 0.0);
        }
        let angle = 2.0 * s.atan2(w);
        ([x / s, y / s, z / s], angle)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        Self::from_quaternion(qmul(self.q, other.q))
    }

    pub fn inverse(&self) -> GroupElement {
        let [w, x, y, z] = self.q;
        Self::from_quaternion([w, -x, -y, -z])
    }

    /// `self · g · self⁻¹`.
    pub fn conjugate(&self, g: &GroupElement) -> GroupElement {
        self.compose(g).compose(&self.inverse())
    }

    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        let d_minus: f64 = self.q.iter().zip(other.q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let d_plus: f64 = self.q.iter().zip(other.q).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        d_minus.min(d_plus) <= tol
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Self::IDENTITY, SNAP)
    }

    /// Active rotation of a vector.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let p = [0.0, v[0], v[1], v[2]];
        let [w, x, y, z] = self.q;
        let r = qmul(qmul(self.q, p), [w, -x, -y, -z]);
        [r[1], r[2], r[3]]
    }

    /// Rotation matrix, row major.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let cols = [self.rotate([1.0, 0.0, 0.0]), self.rotate([0.0, 1.0, 0.0]), self.rotate([0.0, 0.0, 1.0])];
        let mut m = [[0.0; 3]; 3];
        for (c, col) in cols.iter().enumerate() {
            for r in 0..3 {
                m[r][c] = col[r];
            }
        }
        m
    }

    /// Rotation taking the standard frame onto the right-handed frame `(x, z × x, z)`.
    /// `x` and `z` must be orthonormal.
    pub fn from_frame(x: [f64; 3], z: [f64; 3]) -> GroupElement {
        let y = cross3(z, x);
        let m = [[x[0], y[0], z[0]], [x[1], y[1], z[1]], [x[2], y[2], z[2]]];
        let tr = m[0][0] + m[1][1] + m[2][2];
        // Shepperd's method, branching on the largest diagonal term
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            [0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            [(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s]
        };
        Self::from_quaternion(q)
    }

    /// Smallest rotation taking `+z` onto the unit vector `a`.
    pub fn aligning_z_to(a: [f64; 3]) -> GroupElement {
        let z = [0.0, 0.0, 1.0];
        let c = dot3(z, a);
        if c > 1.0 - 1e-15 {
            return Self::IDENTITY;
        }
        if c < -1.0 + 1e-15 {
            return Self::from_quaternion([0.0, 1.0, 0.0, 0.0]);
        }
        let axis = cross3(z, a);
        Self::from_axis_angle(axis, c.clamp(-1.0, 1.0).acos()).expect("non-zero axis")
    }

    /// Order of the element, if at most `max`.
    pub fn order(&self, max: usize) -> Option<usize> {
        let mut acc = *self;
        for k in 1..=max {
            if acc.is_identity() {
                return Some(k);
            }
            acc = self.compose(&acc);
        }
        None
    }
}

/// Spin-`j` representation `exp(-iθ n·J)` of a rotation. The SU(2) sign is
/// not tracked; conjugation `U† S U` does not depend on it.
pub fn lift(g: &GroupElement, spin: Spin) -> Matrix {
    let (axis, angle) = g.axis_angle();
    lift_axis_angle(axis, angle, spin)
}

pub fn lift_axis_angle(axis: [f64; 3], angle: f64, spin: Spin) -> Matrix {
    let d = spin.dim();
    if angle == 0.0 {
        return Matrix::identity(d, d);
    }
    let gen = spin_operators(spin).along(axis) * C64::new(0.0, -angle);
    expm(&gen).expect("finite rotation generator")
}

/// Lift onto a register: the tensor product of single-site lifts.
pub fn lift_register(g: &GroupElement, spins: &[Spin]) -> Matrix {
    let (axis, angle) = g.axis_angle();
    lift_register_axis_angle(axis, angle, spins)
}

pub fn lift_register_axis_angle(axis: [f64; 3], angle: f64, spins: &[Spin]) -> Matrix {
    let mut out = Matrix::identity(1, 1);
    let mut cache: Vec<(Spin, Matrix)> = Vec::new();
    for s in spins {
        let u = match cache.iter().find(|(t, _)| t == s) {
            Some((_, u)) => u.clone(),
            None => {
                let u = lift_axis_angle(axis, angle, *s);
                cache.push((*s, u.clone()));
                u
            }
        };
        out = kron(&out, &u);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    Cyclic(u32),
    Dihedral(u32),
    Tetrahedral,
    Octahedral,
    Icosahedral,
}

impl GroupKind {
    pub fn order(&self) -> usize {
        match *self {
            GroupKind::Cyclic(n) => n as usize,
            GroupKind::Dihedral(n) => 2 * n as usize,
            GroupKind::Tetrahedral => 12,
            GroupKind::Octahedral => 24,
            GroupKind::Icosahedral => 60,
        }
    }

    /// Generators of the reference orientation.
    ///
    /// `C_n`, `D_n`: main axis `z`, `D_n` has a C2 axis along `x`. `T`: C2 axes
    /// along `x, y, z`. `O`: C4 axes along `x, y, z`. `I`: a C5 axis along `z`
    /// and a C2 axis along `x`.
    fn reference_generators(&self) -> Vec<GroupElement> {
        let r = |axis: [f64; 3], angle: f64| GroupElement::from_axis_angle(axis, angle).expect("unit axis");
        let body = [1.0, 1.0, 1.0];
        match *self {
            GroupKind::Cyclic(n) => vec![r([0.0, 0.0, 1.0], 2.0 * PI / n as f64)],
            GroupKind::Dihedral(n) => vec![r([0.0, 0.0, 1.0], 2.0 * PI / n as f64), r([1.0, 0.0, 0.0], PI)],
            GroupKind::Tetrahedral => vec![r(body, 2.0 * PI / 3.0), r([0.0, 0.0, 1.0], PI)],
            GroupKind::Octahedral => vec![r([0.0, 0.0, 1.0], PI / 2.0), r(body, 2.0 * PI / 3.0)],
            GroupKind::Icosahedral => {
                // icosahedron with vertices (0, ±1, ±φ) and cyclic permutations,
                // then tilted about x so the vertex (0, -1, φ) lands on z
                let phi = (1.0 + 5f64.sqrt()) / 2.0;
                let beta = (phi / (phi + 2.0).sqrt()).acos();
                let tilt = r([1.0, 0.0, 0.0], -beta);
                [r([0.0, 1.0, phi], 2.0 * PI / 5.0), r(body, 2.0 * PI / 3.0), r([0.0, 0.0, 1.0], PI)]
                    .iter()
                    .map(|g| tilt.conjugate(g))
                    .collect()
            }
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Cyclic(n) => write!(f, "C{n}"),
            GroupKind::Dihedral(n) => write!(f, "D{n}"),
            GroupKind::Tetrahedral => write!(f, "T"),
            GroupKind::Octahedral => write!(f, "O"),
            GroupKind::Icosahedral => write!(f, "I"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::UnknownName(s.to_string());
        match s {
            "T" => return Ok(GroupKind::Tetrahedral),
            "O" => return Ok(GroupKind::Octahedral),
            "I" => return Ok(GroupKind::Icosahedral),
            _ => {}
        }
        let (head, tail) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let n: u32 = tail.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match head {
            "C" => Ok(GroupKind::Cyclic(n)),
            "D" => Ok(GroupKind::Dihedral(n)),
            _ => Err(bad()),
        }
    }
}

/// A finite rotation group in a definite orientation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointGroup {
    pub kind: GroupKind,
    /// Rotation taking the reference orientation of `kind` onto this group.
    pub orientation: GroupElement,
    pub generators: Vec<GroupElement>,
    pub elements: Vec<GroupElement>,
}

/// Closes a generating set. Elements are returned identity first.
pub fn closure(generators: &[GroupElement], max: usize) -> Result<Vec<GroupElement>, GroupError> {
    let mut elems = vec![GroupElement::IDENTITY];
    let mut frontier = vec![GroupElement::IDENTITY];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in generators {
                let h = g.compose(f);
                if !elems.iter().any(|e| e.approx_eq(&h, SNAP)) {
                    elems.push(h);
                    next.push(h);
                    if elems.len() > max {
                        return Err(GroupError::NotFinite(max));
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(elems)
}

pub fn build_group(kind: GroupKind, orientation: GroupElement) -> Result<PointGroup, GroupError> {
    let order = kind.order();
    if order == 0 || order > 240 {
        return Err(GroupError::Unsupported(order));
    }
    let generators: Vec<GroupElement> =
        kind.reference_generators().iter().map(|g| orientation.conjugate(g)).collect();
    let elements = closure(&generators, order)?;
    if elements.len() != order {
        return Err(GroupError::NotAGroup);
    }
    Ok(PointGroup { kind, orientation, generators, elements })
}

impl PointGroup {
    pub fn reference(kind: GroupKind) -> Result<PointGroup, GroupError> {
        build_group(kind, GroupElement::IDENTITY)
    }

    /// Group generated by arbitrary elements; kind and orientation are identified.
    pub fn generated_by(generators: &[GroupElement]) -> Result<PointGroup, GroupError> {
        let elements = closure(generators, 240)?;
        let mut g = Self::from_elements(elements)?;
        g.generators = generators.to_vec();
        Ok(g)
    }

    /// Identifies a set of rotations that forms a group.
    pub fn from_elements(elements: Vec<GroupElement>) -> Result<PointGroup, GroupError> {
        let n = elements.len();
        let max_order = elements.iter().map(|e| e.order(n).ok_or(GroupError::NotAGroup)).collect::<Result<Vec<_>, _>>()?;
        let top = max_order.into_iter().max().unwrap_or(1);
        let kind = if top == n {
            GroupKind::Cyclic(n as u32)
        } else if n == 12 && top == 3 {
            GroupKind::Tetrahedral
        } else if n == 24 && top == 4 {
            GroupKind::Octahedral
        } else if n == 60 && top == 5 {
            GroupKind::Icosahedral
        } else if n.is_multiple_of(2) {
            GroupKind::Dihedral((n / 2) as u32)
        } else {
            return Err(GroupError::NotAGroup);
        };
        let orientation = find_orientation(kind, &elements).ok_or(GroupError::NotAGroup)?;
        let generators = kind.reference_generators().iter().map(|g| orientation.conjugate(g)).collect();
        let mut elems = elements;
        if let Some(pos) = elems.iter().position(GroupElement::is_identity) {
            elems.swap(0, pos);
        }
        Ok(PointGroup { kind, orientation, generators, elements: elems })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn name(&self) -> String {
        self.kind.to_string()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.iter().any(|e| e.approx_eq(g, SNAP))
    }

    /// Same element set.
    pub fn same_elements(&self, other: &PointGroup) -> bool {
        self.order() == other.order() && other.elements.iter().all(|e| self.contains(e))
    }

    pub fn conjugated_by(&self, h: &GroupElement) -> PointGroup {
        PointGroup {
            kind: self.kind,
            orientation: h.compose(&self.orientation),
            generators: self.generators.iter().map(|g| h.conjugate(g)).collect(),
            elements: self.elements.iter().map(|g| h.conjugate(g)).collect(),
        }
    }

    /// Rotation axes of the elements of exactly order `k`, one per line.
    pub fn axes_of_order(&self, k: usize) -> Vec<[f64; 3]> {
        axes_of(&self.elements, k)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

fn axes_of(elements: &[GroupElement], k: usize) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for e in elements {
        if e.order(k) == Some(k) {
            let (a, _) = e.axis_angle();
            if !out.iter().any(|b| dot3(*b, a).abs() > 1.0 - 1e-9) {
                out.push(a);
            }
        }
    }
    out
}

fn find_orientation(kind: GroupKind, elements: &[GroupElement]) -> Option<GroupElement> {
    let reference = closure(&kind.reference_generators(), kind.order()).ok()?;
    let matches = |o: &GroupElement| {
        reference.iter().all(|g| {
            let h = o.conjugate(g);
            elements.iter().any(|e| e.approx_eq(&h, SNAP))
        })
    };
    let (main, side) = match kind {
        GroupKind::Cyclic(1) => return Some(GroupElement::IDENTITY),
        GroupKind::Cyclic(n) => {
            let a = *axes_of(elements, n as usize).first()?;
            let o = GroupElement::aligning_z_to(a);
            return matches(&o).then_some(o);
        }
        GroupKind::Dihedral(n) => (n as usize, 2),
        GroupKind::Tetrahedral => (2, 2),
        GroupKind::Octahedral => (4, 4),
        GroupKind::Icosahedral => (5, 2),
    };
    let mains = axes_of(elements, main);
    let sides = axes_of(elements, side);
    for a in &mains {
        for b in &sides {
            if dot3(*a, *b).abs() > 1e-9 {
                continue;
            }
            for (za, xb) in [(*a, *b), (*a, b.map(|v| -v)), (a.map(|v| -v), *b), (a.map(|v| -v), b.map(|v| -v))] {
                let o = GroupElement::from_frame(xb, za);
                if matches(&o) {
                    return Some(o);
                }
            }
        }
    }
    None
}

/// Parses a group name: `C<n>`, `D<n>`, `T`, `O`, `I` in reference orientation,
/// or one of the named orientations `D2fig5` (two-fold axes of the four-pulse
/// sequence) and `C3lg3` (three-fold axis along (-1,1,1)/√3).
pub fn named_group(name: &str) -> Result<PointGroup, GroupError> {
    match name {
        "D2fig5" => {
            let n1 = [(2.0f64 / 3.0).sqrt(), 0.0, 1.0 / 3f64.sqrt()];
            let n2 = [-1.0 / 6f64.sqrt(), 1.0 / 2f64.sqrt(), 1.0 / 3f64.sqrt()];
            let o = GroupElement::from_frame(n1, cross3(n1, n2));
            build_group(GroupKind::Dihedral(2), o)
        }
        "C3lg3" => build_group(GroupKind::Cyclic(3), GroupElement::aligning_z_to([-1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt()])),
        _ => PointGroup::reference(name.parse()?),
    }
}
