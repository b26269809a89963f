//! Majorana constellations of Hermitian operators.
//!
//! The rank-`L` component `Σ_M c_M T_LM` is mapped to the spin-`L` state
//! `Σ_M c_M |L M>`; its `2L` coherent-state zeros form `L` antipodal pairs.
//! One star of each pair is black, the other red, chosen so that the component
//! is a positive multiple of the rank-`L` part of `Π_k (b_k·J)` over the black
//! stars `b_k`. Swapping the colours of one pair flips the sign of the operator.

use nalgebra::{linalg::Schur, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{collective_tensor, hs_inner, multipole_basis, spin_operators, AlgebraError, Matrix, Operator, Spin, C64};
use crate::pointgroup::{dot3, lift_register, GroupElement};
use crate::symmetry::SYMMETRY_TOL;

/// Stars closer than this (chordal distance) are reported as one degenerate star.
pub const CLUSTER_RADIUS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MajoranaError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("root finding did not converge")]
    RootFinding,
    #[error("stars do not form antipodal pairs (mismatch {0:.3e})")]
    Unpaired(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    Red,
}

/// Star at `direction` with `color`; its antipode carries the other colour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarPair {
    pub direction: [f64; 3],
    pub color: Color,
    pub multiplicity: usize,
}

impl StarPair {
    pub fn black(&self) -> [f64; 3] {
        match self.color {
            Color::Black => self.direction,
            Color::Red => self.direction.map(|v| -v),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Constellation {
    pub l: usize,
    /// Hilbert-Schmidt norm of the component.
    pub radius: f64,
    pub pairs: Vec<StarPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwapParity {
    Even,
    Odd,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Upper hemisphere representative of `±v`.
fn canonical_direction(v: [f64; 3]) -> [f64; 3] {
    let key = if v[2].abs() > 1e-12 {
        v[2]
    } else if v[1].abs() > 1e-12 {
        v[1]
    } else {
        v[0]
    };
    if key < 0.0 {
        v.map(|x| -x)
    } else {
        v
    }
}

fn chord(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot3(v, v).sqrt();
    v.map(|x| x / n)
}

fn to_sphere(zeta: C64) -> [f64; 3] {
    let r2 = zeta.norm_sqr();
    [2.0 * zeta.re / (1.0 + r2), 2.0 * zeta.im / (1.0 + r2), (1.0 - r2) / (1.0 + r2)]
}

/// Polynomial with coefficients in ascending order.
#[derive(Clone)]
struct Poly(Vec<C64>);

impl Poly {
    fn eval(&self, w: C64) -> C64 {
        self.0.iter().rev().fold(C64::from(0.0), |acc, c| acc * w + c)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    fn reversed(&self) -> Poly {
        Poly(self.0.iter().rev().copied().collect())
    }

    /// Scale for relative residuals at `w`.
    fn magnitude(&self, w: C64) -> f64 {
        let r = w.norm();
        self.0.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    fn roots(&self) -> Result<Vec<C64>, MajoranaError> {
        let n = self.0.len() - 1;
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.0[n];
        let mut comp = DMatrix::<C64>::zeros(n, n);
        for k in 1..n {
            comp[(k, k - 1)] = C64::from(1.0);
        }
        for k in 0..n {
            comp[(k, n - 1)] = -self.0[k] / lead;
        }
        let schur = Schur::try_new(comp, 1e-15, 10_000).ok_or(MajoranaError::RootFinding)?;
        let (_, t) = schur.unpack();
        let d = self.derivative();
        let mut roots: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
        for w in roots.iter_mut() {
            for _ in 0..4 {
                let f = self.eval(*w);
                let df = d.eval(*w);
                if df.norm() == 0.0 {
                    break;
                }
                let cand = *w - f / df;
                if self.eval(cand).norm() < f.norm() {
                    *w = cand;
                } else {
                    break;
                }
            }
        }
        Ok(roots)
    }
}

/// Refines an `m`-fold root near `w0` by Newton on the `(m-1)`-th derivative
/// and checks that the lower derivatives vanish there.
fn refine_multiple(p: &Poly, w0: C64, m: usize) -> Option<C64> {
    let mut derivs = vec![p.clone()];
    for _ in 0..m {
        let next = derivs.last().expect("seeded").derivative();
        derivs.push(next);
    }
    let (f, df) = (&derivs[m - 1], &derivs[m]);
    let mut w = w0;
    for _ in 0..50 {
        let d = df.eval(w);
        if d.norm() == 0.0 {
            break;
        }
        let step = f.eval(w) / d;
        w -= step;
        if step.norm() <= 1e-16 * (1.0 + w.norm()) {
            break;
        }
    }
    let ok = derivs[..m].iter().all(|q| q.eval(w).norm() <= 1e-9 * q.magnitude(w).max(f64::MIN_POSITIVE));
    ok.then_some(w)
}

struct Cluster {
    point: [f64; 3],
    members: Vec<usize>,
}

fn stars_from_coefficients(l: usize, c: &[C64]) -> Result<Vec<([f64; 3], usize)>, MajoranaError> {
    let n = 2 * l;
    // <ζ|ψ> as a polynomial in w = conj(ζ)
    let a: Vec<C64> = (0..=n).map(|k| c[n - k] * binom(n, k).sqrt()).collect();
    let scale = a.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let small = |z: &C64| z.norm() <= 1e-12 * scale;
    let zeros = a.iter().take_while(|z| small(z)).count();
    let infinities = a.iter().rev().take_while(|z| small(z)).count();
    let core = Poly(a[zeros..=n - infinities].to_vec());
    let full = Poly(a.clone());

    let mut points: Vec<([f64; 3], Option<C64>)> = Vec::new();
    points.extend((0..zeros).map(|_| ([0.0, 0.0, 1.0], None)));
    points.extend((0..infinities).map(|_| ([0.0, 0.0, -1.0], None)));
    for w in core.roots()? {
        points.push((to_sphere(w.conj()), Some(w)));
    }

    // generous grouping, then each group is validated as a multiple root
    let mut clusters: Vec<Cluster> = Vec::new();
    for (k, (p, _)) in points.iter().enumerate() {
        match clusters.iter_mut().find(|c| chord(c.point, *p) < 1e-2) {
            Some(c) => c.members.push(k),
            None => clusters.push(Cluster { point: *p, members: vec![k] }),
        }
    }
    let mut stars: Vec<([f64; 3], usize)> = Vec::new();
    for cl in clusters {
        let m = cl.members.len();
        let exact_pole = cl.members.iter().all(|&k| points[k].1.is_none());
        if m == 1 || exact_pole {
            stars.push((points[cl.members[0]].0, m));
            continue;
        }
        let mean = normalize(cl.members.iter().fold([0.0; 3], |acc, &k| {
            let p = points[k].0;
            [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]
        }));
        // refine in whichever chart keeps the root bounded
        let refined = if mean[2] > -0.5 {
            let zeta = C64::new(mean[0], mean[1]) / (1.0 + mean[2]);
            refine_multiple(&full, zeta.conj(), m).map(|w| to_sphere(w.conj()))
        } else {
            let eta = C64::new(mean[0], -mean[1]) / (1.0 - mean[2]);
            refine_multiple(&full.reversed(), eta.conj(), m).map(|u| {
                let e = u.conj();
                let r2 = e.norm_sqr();
                [2.0 * e.re / (1.0 + r2), -2.0 * e.im / (1.0 + r2), (r2 - 1.0) / (1.0 + r2)]
            })
        };
        match refined {
            Some(p) => stars.push((p, m)),
            None => stars.extend(cl.members.iter().map(|&k| (points[k].0, 1))),
        }
    }
    // merge anything still within the reporting radius
    let mut merged: Vec<([f64; 3], usize)> = Vec::new();
    for (p, m) in stars {
        match merged.iter_mut().find(|(q, _)| chord(*q, p) < CLUSTER_RADIUS) {
            Some(e) => e.1 += m,
            None => merged.push((p, m)),
        }
    }
    Ok(merged)
}

/// Coefficients `c_M` (M = -L..L) of the rank-`L` part of `Π_k (b_k·J)`.
fn product_coefficients(blacks: &[[f64; 3]]) -> Vec<C64> {
    let l = blacks.len();
    let spin = Spin::from_twice(l as u32);
    let ops = spin_operators(spin);
    let d = spin.dim();
    let mut prod = Matrix::identity(d, d);
    for b in blacks {
        prod *= ops.along(*b);
    }
    multipole_basis(spin).rank(l).iter().map(|t| hs_inner(t, &prod)).collect()
}

fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Constellation of a rank-`L` coefficient vector (`M = -L..L`).
pub fn constellation_from_coefficients(l: usize, c: &[C64]) -> Result<Constellation, MajoranaError> {
    assert_eq!(c.len(), 2 * l + 1, "coefficient vector length");
    let radius = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if l == 0 || radius == 0.0 {
        return Ok(Constellation { l, radius, pairs: Vec::new() });
    }
    let herm = (0..=2 * l)
        .map(|k| {
            let m = k as i64 - l as i64;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            (c[2 * l - k] - c[k].conj() * sign).norm()
        })
        .fold(0.0_f64, f64::max);
    if herm > 1e-9 * radius {
        return Err(MajoranaError::NotHermitian(herm));
    }

    let stars = stars_from_coefficients(l, c)?;
    let mut used = vec![false; stars.len()];
    let mut pairs: Vec<StarPair> = Vec::new();
    let mut worst = 0.0_f64;
    for i in 0..stars.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let (p, m) = stars[i];
        let anti = p.map(|x| -x);
        let j = (0..stars.len())
            .filter(|&j| !used[j] && stars[j].1 == m)
            .min_by(|&a, &b| chord(stars[a].0, anti).total_cmp(&chord(stars[b].0, anti)))
            .ok_or(MajoranaError::Unpaired(f64::INFINITY))?;
        used[j] = true;
        worst = worst.max(chord(stars[j].0, anti));
        let q = stars[j].0;
        let dir = canonical_direction(normalize([p[0] - q[0], p[1] - q[1], p[2] - q[2]]));
        pairs.push(StarPair { direction: dir, color: Color::Black, multiplicity: m });
    }
    if worst > 1e-6 {
        return Err(MajoranaError::Unpaired(worst));
    }
    pairs.sort_by(|a, b| b.direction[2].total_cmp(&a.direction[2]).then(b.direction[1].total_cmp(&a.direction[1])));

    let mut cons = Constellation { l, radius, pairs };
    let overlap = vec_inner(&coefficients_of(&cons), c).re;
    if overlap < 0.0 {
        let last = cons.pairs.pop().expect("at least one pair");
        if last.multiplicity > 1 {
            cons.pairs.push(StarPair { multiplicity: last.multiplicity - 1, ..last.clone() });
        }
        cons.pairs.push(StarPair { color: Color::Red, multiplicity: 1, ..last });
    }
    Ok(cons)
}

/// Constellation of the rank-`l` component of a Hermitian operator. Registers
/// are supported when the component lies in a single irreducible copy.
pub fn constellation(op: &Operator, l: usize) -> Result<Constellation, MajoranaError> {
    let dev = op.hermitian_deviation();
    if dev > 1e-9 * op.hs_norm().max(1.0) {
        return Err(MajoranaError::NotHermitian(dev));
    }
    let comp = collective_tensor(op, l)?;
    let radius = comp.coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    // rounding residue of a vanishing component has no meaningful stars
    if radius <= 1e-12 * op.hs_norm() {
        return Ok(Constellation { l, radius, pairs: Vec::new() });
    }
    constellation_from_coefficients(l, &comp.coefficients)
}

/// Coefficients `c_M` rebuilt from stars, colours and radius.
pub fn coefficients_of(c: &Constellation) -> Vec<C64> {
    if c.pairs.is_empty() {
        let mut v = vec![C64::from(0.0); 2 * c.l + 1];
        if c.l == 0 {
            v[0] = C64::from(c.radius);
        }
        return v;
    }
    let blacks: Vec<[f64; 3]> = c.pairs.iter().flat_map(|p| std::iter::repeat_n(p.black(), p.multiplicity)).collect();
    let raw = product_coefficients(&blacks);
    let n = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    raw.into_iter().map(|z| z * (c.radius / n)).collect()
}

/// Rebuilds the rank-`l` component of `op` from its constellation.
pub fn reconstruct(op: &Operator, c: &Constellation) -> Result<Matrix, MajoranaError> {
    let comp = collective_tensor(op, c.l)?;
    let coeffs = coefficients_of(c);
    let mut out = Matrix::zeros(op.dim(), op.dim());
    for (z, t) in coeffs.iter().zip(&comp.basis) {
        out += t * *z;
    }
    Ok(out)
}

/// Rotates the constellation by `g`. `Some(parity)` when the rotated stars
/// coincide with the original ones, with the parity of the colour swaps.
pub fn constellation_symmetric_under(c: &Constellation, g: &GroupElement) -> Option<SwapParity> {
    let tol = 1e-6;
    // axis classes: (canonical axis, pair count, black stars on the canonical side)
    let mut classes: Vec<([f64; 3], usize, usize)> = Vec::new();
    for p in &c.pairs {
        let b = p.black();
        let axis = canonical_direction(b);
        let up = usize::from(chord(axis, b) < tol) * p.multiplicity;
        match classes.iter_mut().find(|(a, _, _)| chord(*a, axis) < tol) {
            Some(e) => {
                e.1 += p.multiplicity;
                e.2 += up;
            }
            None => classes.push((axis, p.multiplicity, up)),
        }
    }
    let mut rotated: Vec<(usize, usize)> = vec![(0, 0); classes.len()];
    for p in &c.pairs {
        let b = g.rotate(p.black());
        let axis = canonical_direction(b);
        let k = classes.iter().position(|(a, _, _)| chord(*a, axis) < tol)?;
        rotated[k].0 += p.multiplicity;
        if chord(classes[k].0, b) < tol {
            rotated[k].1 += p.multiplicity;
        }
    }
    let mut swaps = 0usize;
    for ((_, count, up), (rcount, rup)) in classes.iter().zip(&rotated) {
        if count != rcount {
            return None;
        }
        swaps += up.abs_diff(*rup);
    }
    Some(if swaps.is_multiple_of(2) { SwapParity::Even } else { SwapParity::Odd })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryCrosscheck {
    /// `g† S g = S` checked on matrices.
    pub direct: bool,
    /// Every constellation maps onto itself with an even number of swaps.
    pub via_constellations: bool,
}

impl SymmetryCrosscheck {
    pub fn agree(&self) -> bool {
        self.direct == self.via_constellations
    }
}

/// Invariance of a single-spin operator under `g`, decided both ways.
pub fn crosscheck_symmetry(op: &Operator, g: &GroupElement) -> Result<SymmetryCrosscheck, MajoranaError> {
    let u = lift_register(g, &op.spins());
    let scale = op.norm().max(1e-14);
    let direct = (u.adjoint() * &op.matrix * &u - &op.matrix).norm() <= SYMMETRY_TOL * scale;
    let max_l: usize = op.spins().iter().map(|s| s.twice() as usize).sum();
    let mut via = true;
    for l in 1..=max_l {
        let c = constellation(op, l)?;
        if c.radius <= SYMMETRY_TOL * scale {
            continue;
        }
        if constellation_symmetric_under(&c, g) != Some(SwapParity::Even) {
            via = false;
            break;
        }
    }
    Ok(SymmetryCrosscheck { direct, via_constellations: via })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::embed;
    use std::f64::consts::PI;

    fn close3(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        chord(a, b) < tol
    }

    #[test]
    fn jz_has_one_pair_on_z_with_black_up() {
        let op = Operator::single(spin_operators(Spin::from_twice(2)).jz);
        let c = constellation(&op, 1).unwrap();
        assert_eq!(c.pairs.len(), 1);
        assert!(close3(c.pairs[0].black(), [0.0, 0.0, 1.0], 1e-12));
        let neg = Operator::single(&op.matrix * C64::from(-1.0));
        let c = constellation(&neg, 1).unwrap();
        assert!(close3(c.pairs[0].black(), [0.0, 0.0, -1.0], 1e-12));
    }

    #[test]
    fn dipolar_pair_is_doubly_degenerate_on_z() {
        let ops = spin_operators(Spin::HALF);
        let dims = [2usize, 2];
        let mut m = Matrix::zeros(4, 4);
        for (a, x) in ops.cartesian().into_iter().enumerate() {
            let w = if a == 2 { 2.0 } else { -1.0 };
            m += embed(x, 0, &dims).unwrap() * embed(x, 1, &dims).unwrap() * C64::from(w);
        }
        let op = Operator::new(dims.to_vec(), m.clone()).unwrap();
        let c = constellation(&op, 2).unwrap();
        let total: usize = c.pairs.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 2);
        for p in &c.pairs {
            assert!(close3(p.direction, [0.0, 0.0, 1.0], 1e-12));
        }
        assert!((reconstruct(&op, &c).unwrap() - m).norm() < 1e-12);
    }

    #[test]
    fn quadrupole_xz_has_x_and_z_stars() {
        let ops = spin_operators(Spin::from_twice(2));
        let m = &ops.jx * &ops.jz + &ops.jz * &ops.jx;
        let op = Operator::single(m.clone());
        let c = constellation(&op, 2).unwrap();
        assert_eq!(c.pairs.len(), 2);
        let dirs: Vec<[f64; 3]> = c.pairs.iter().map(|p| p.direction).collect();
        assert!(dirs.iter().any(|d| close3(*d, [0.0, 0.0, 1.0], 1e-10)));
        assert!(dirs.iter().any(|d| close3(*d, [1.0, 0.0, 0.0], 1e-10)));
        assert!((reconstruct(&op, &c).unwrap() - m).norm() < 1e-12);
    }

    #[test]
    fn degenerate_tilted_octupole_reconstructs() {
        // T_30 about a tilted axis: a triple cluster away from the poles
        let spin = Spin::from_twice(3);
        let basis = multipole_basis(spin);
        let g = GroupElement::from_axis_angle([0.3, 0.9, 0.1], 1.1).unwrap();
        let u = crate::pointgroup::lift(&g, spin);
        let m = &u * basis.get(3, 0) * u.adjoint();
        let op = Operator::single(m.clone());
        let c = constellation(&op, 3).unwrap();
        assert_eq!(c.pairs.iter().map(|p| p.multiplicity).max(), Some(3));
        let axis = g.rotate([0.0, 0.0, 1.0]);
        assert!(close3(c.pairs[0].direction, canonical_direction(axis), 1e-9));
        assert!((reconstruct(&op, &c).unwrap() - m).norm() < 1e-9);
    }

    #[test]
    fn color_swap_changes_sign() {
        let ops = spin_operators(Spin::from_twice(3));
        let m = &ops.jx * &ops.jy + &ops.jy * &ops.jx + &ops.jz * C64::from(0.0);
        let op = Operator::single(m.clone());
        let mut c = constellation(&op, 2).unwrap();
        assert_eq!(c.pairs.len(), 2);
        c.pairs[0].color = match c.pairs[0].color {
            Color::Black => Color::Red,
            Color::Red => Color::Black,
        };
        assert!((reconstruct(&op, &c).unwrap() + m).norm() < 1e-10);
    }

    #[test]
    fn symmetry_via_constellation() {
        let op = Operator::single(spin_operators(Spin::from_twice(2)).jz);
        let c = constellation(&op, 1).unwrap();
        let rz = GroupElement::from_axis_angle([0.0, 0.0, 1.0], 0.7).unwrap();
        let rx = GroupElement::from_axis_angle([1.0, 0.0, 0.0], PI).unwrap();
        let ry = GroupElement::from_axis_angle([1.0, 0.0, 0.0], 0.5).unwrap();
        assert_eq!(constellation_symmetric_under(&c, &rz), Some(SwapParity::Even));
        assert_eq!(constellation_symmetric_under(&c, &rx), Some(SwapParity::Odd));
        assert_eq!(constellation_symmetric_under(&c, &ry), None);
        let x = crosscheck_symmetry(&op, &rx).unwrap();
        assert!(!x.direct && x.agree());
    }

    #[test]
    fn rejects_non_hermitian() {
        let op = Operator::single(spin_operators(Spin::from_twice(2)).jp);
        assert!(matches!(constellation(&op, 1), Err(MajoranaError::NotHermitian(_))));
    }
}
