//! Spin Hamiltonians: disorder, dipolar couplings, multilinear K-body terms
//! and single-qudit multipole dephasing, plus random samplers.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::algebra::{embed, irrep_project, multipole_basis, op_norm, spin_operators, Matrix, Operator, Spin, C64};
use crate::pointgroup::{lift_register, lift_register_axis_angle, GroupKind, PointGroup};
use crate::symmetry::symmetrize_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    Disorder,
    DipolarRwa,
    DipolarGeneral,
    DisPlusDdRwa,
    KbodyMultilinear,
    QuditDephasing,
}

impl std::str::FromStr for HamiltonianKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown Hamiltonian kind '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
    /// Dipole direction; `z` when absent.
    #[serde(default)]
    pub axis: Option<[f64; 3]>,
}

/// `coefficient · Π_k (axes[k]·S^k)` over all sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultilinearTerm {
    pub coefficient: f64,
    pub axes: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub spins: Vec<Spin>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    /// Disorder directions; `z` for every site when empty.
    #[serde(default)]
    pub disorder_axes: Vec<[f64; 3]>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    #[serde(default)]
    pub terms: Vec<MultilinearTerm>,
    /// `(L, ω_L0)` pairs.
    #[serde(default)]
    pub omegas: Vec<(usize, f64)>,
    /// Rescale the result to this operator norm.
    #[serde(default)]
    pub target_norm: Option<f64>,
}

impl HamiltonianSpec {
    pub fn new(kind: HamiltonianKind, spins: Vec<Spin>) -> Self {
        HamiltonianSpec {
            kind,
            spins,
            deltas: Vec::new(),
            disorder_axes: Vec::new(),
            couplings: Vec::new(),
            terms: Vec::new(),
            omegas: Vec::new(),
            target_norm: None,
        }
    }
}

impl HamiltonianSpec {
    /// Parameters drawn uniformly from `[−1, 1]`; directions uniform on the
    /// sphere where the kind allows them. Dephasing uses every `ω_L0 = 1`
    /// with unit norm.
    pub fn random<R: Rng + ?Sized>(kind: HamiltonianKind, spins: Vec<Spin>, rng: &mut R) -> Self {
        let n = spins.len();
        let mut spec = HamiltonianSpec::new(kind, spins);
        let draw = |rng: &mut R| -> f64 { rng.random_range(-1.0..=1.0) };
        let pairs = |rng: &mut R, general: bool| -> Vec<Coupling> {
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let strength = draw(rng);
                    out.push(Coupling { i, j, strength, axis: general.then(|| random_unit_vector(rng)) });
                }
            }
            out
        };
        match kind {
            HamiltonianKind::Disorder => {
                spec.deltas = (0..n).map(|_| draw(rng)).collect();
                spec.disorder_axes = (0..n).map(|_| random_unit_vector(rng)).collect();
            }
            HamiltonianKind::DipolarRwa => spec.couplings = pairs(rng, false),
            HamiltonianKind::DipolarGeneral => spec.couplings = pairs(rng, true),
            HamiltonianKind::DisPlusDdRwa => {
                spec.deltas = (0..n).map(|_| draw(rng)).collect();
                spec.couplings = pairs(rng, false);
            }
            HamiltonianKind::KbodyMultilinear => {
                spec.terms = (0..4)
                    .map(|_| MultilinearTerm { coefficient: draw(rng), axes: (0..n).map(|_| random_unit_vector(rng)).collect() })
                    .collect();
            }
            HamiltonianKind::QuditDephasing => {
                let top = spec.spins.first().map_or(0, |s| s.twice() as usize);
                spec.omegas = (1..=top).map(|l| (l, 1.0)).collect();
                spec.target_norm = Some(1.0);
            }
        }
        spec
    }
}

fn dims(spins: &[Spin]) -> Vec<usize> {
    spins.iter().map(Spin::dim).collect()
}

/// Embedded `(S_x, S_y, S_z)` for every site.
pub fn site_operators(spins: &[Spin]) -> Vec<[Matrix; 3]> {
    let d = dims(spins);
    spins
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let ops = spin_operators(*s);
            [&ops.jx, &ops.jy, &ops.jz].map(|m| embed(m, k, &d).expect("site in range"))
        })
        .collect()
}

fn along(ops: &[Matrix; 3], n: [f64; 3]) -> Matrix {
    &ops[0] * C64::from(n[0]) + &ops[1] * C64::from(n[1]) + &ops[2] * C64::from(n[2])
}

fn unit(v: [f64; 3]) -> Result<[f64; 3], SimError> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(SimError::Spec(format!("axis {v:?} is not a unit vector")));
    }
    Ok(v)
}

/// `Σ δ_i m_i·S^i`.
pub fn disorder(spins: &[Spin], deltas: &[f64], axes: &[[f64; 3]]) -> Result<Matrix, SimError> {
    if deltas.len() != spins.len() || !(axes.is_empty() || axes.len() == spins.len()) {
        return Err(SimError::Spec("disorder needs one δ (and optionally one axis) per site".into()));
    }
    let ops = site_operators(spins);
    let d: usize = dims(spins).iter().product();
    let mut h = Matrix::zeros(d, d);
    for (k, delta) in deltas.iter().enumerate() {
        let m = if axes.is_empty() { [0.0, 0.0, 1.0] } else { unit(axes[k])? };
        h += along(&ops[k], m) * C64::from(*delta);
    }
    Ok(h)
}

/// `Σ Δ_ij (3 (e·S^i)(e·S^j) − S^i·S^j)`, with `e = z` unless given.
pub fn dipolar(spins: &[Spin], couplings: &[Coupling]) -> Result<Matrix, SimError> {
    let ops = site_operators(spins);
    let d: usize = dims(spins).iter().product();
    let mut h = Matrix::zeros(d, d);
    for c in couplings {
        if c.i >= spins.len() || c.j >= spins.len() || c.i == c.j {
            return Err(SimError::Spec(format!("bad coupling pair ({}, {})", c.i, c.j)));
        }
        let e = unit(c.axis.unwrap_or([0.0, 0.0, 1.0]))?;
        let (a, b) = (&ops[c.i], &ops[c.j]);
        let mut term = along(a, e) * along(b, e) * C64::from(3.0);
        for k in 0..3 {
            term -= &a[k] * &b[k];
        }
        h += term * C64::from(c.strength);
    }
    Ok(h)
}

pub fn multilinear(spins: &[Spin], terms: &[MultilinearTerm]) -> Result<Matrix, SimError> {
    let ops = site_operators(spins);
    let d: usize = dims(spins).iter().product();
    let mut h = Matrix::zeros(d, d);
    for t in terms {
        if t.axes.len() != spins.len() {
            return Err(SimError::Spec("multilinear term needs one axis per site".into()));
        }
        let mut p = Matrix::identity(d, d);
        for (k, n) in t.axes.iter().enumerate() {
            p *= along(&ops[k], *n);
        }
        h += p * C64::from(t.coefficient);
    }
    Ok(h)
}

/// `Σ_L ω_L T_L0` on a single spin.
pub fn qudit_dephasing(spin: Spin, omegas: &[(usize, f64)]) -> Result<Matrix, SimError> {
    let basis = multipole_basis(spin);
    let d = spin.dim();
    let mut h = Matrix::zeros(d, d);
    for &(l, w) in omegas {
        if l > basis.max_rank() {
            return Err(SimError::Spec(format!("rank {l} exceeds 2j = {}", basis.max_rank())));
        }
        h += basis.get(l, 0) * C64::from(w);
    }
    Ok(h)
}

pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<Operator, SimError> {
    if spec.spins.is_empty() {
        return Err(SimError::Spec("no sites".into()));
    }
    let spins = &spec.spins;
    let h = match spec.kind {
        HamiltonianKind::Disorder => disorder(spins, &spec.deltas, &spec.disorder_axes)?,
        HamiltonianKind::DipolarRwa => {
            if spec.couplings.iter().any(|c| c.axis.is_some()) {
                return Err(SimError::Spec("RWA couplings are along z".into()));
            }
            dipolar(spins, &spec.couplings)?
        }
        HamiltonianKind::DipolarGeneral => dipolar(spins, &spec.couplings)?,
        HamiltonianKind::DisPlusDdRwa => {
            if !spec.disorder_axes.is_empty() || spec.couplings.iter().any(|c| c.axis.is_some()) {
                return Err(SimError::Spec("RWA disorder and couplings are along z".into()));
            }
            disorder(spins, &spec.deltas, &[])? + dipolar(spins, &spec.couplings)?
        }
        HamiltonianKind::KbodyMultilinear => multilinear(spins, &spec.terms)?,
        HamiltonianKind::QuditDephasing => {
            if spins.len() != 1 {
                return Err(SimError::Spec("qudit dephasing acts on one site".into()));
            }
            qudit_dephasing(spins[0], &spec.omegas)?
        }
    };
    let h = match spec.target_norm {
        Some(g) => {
            let n = op_norm(&h);
            if n == 0.0 {
                return Err(SimError::Spec("cannot normalize a zero Hamiltonian".into()));
            }
            h * C64::from(g / n)
        }
        None => h,
    };
    Ok(Operator::new(dims(spins), h)?.with_label(format!("{:?}", spec.kind)))
}

/// Every pair `i < j` with the given strengths, read row by row.
pub fn all_pairs(n: usize, strengths: &[f64]) -> Vec<Coupling> {
    let mut out = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            out.push(Coupling { i, j, strength: strengths.get(k).copied().unwrap_or(0.0), axis: None });
            k += 1;
        }
    }
    out
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).max(0.0).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn normalized(h: Matrix) -> Matrix {
    let n = op_norm(&h);
    if n == 0.0 {
        h
    } else {
        h * C64::from(1.0 / n)
    }
}

/// Unit-norm RWA disorder and dipolar parts on `n` spins-1/2 with uniformly
/// drawn `δ_i, Δ_ij ∈ [−1, 1]`.
#[derive(Debug, Clone)]
pub struct DisorderDipolarSample {
    pub dims: Vec<usize>,
    pub disorder: Matrix,
    pub dipolar: Matrix,
}

impl DisorderDipolarSample {
    pub fn draw<R: Rng + ?Sized>(spins: &[Spin], rng: &mut R) -> Self {
        let n = spins.len();
        let deltas: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let strengths: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random_range(-1.0..=1.0)).collect();
        DisorderDipolarSample {
            dims: dims(spins),
            disorder: normalized(disorder(spins, &deltas, &[]).expect("shapes match")),
            dipolar: normalized(dipolar(spins, &all_pairs(n, &strengths)).expect("valid pairs")),
        }
    }

    /// `δ Ĥ_dis + Δ Ĥ_dd`, so that `‖H_dis‖ = δ` and `‖H_dd‖ = Δ`.
    pub fn scaled(&self, delta: f64, big_delta: f64) -> Matrix {
        &self.disorder * C64::from(delta) + &self.dipolar * C64::from(big_delta)
    }
}

/// Disorder with independent random directions on every site.
pub fn random_disorder<R: Rng + ?Sized>(spins: &[Spin], rng: &mut R) -> Matrix {
    let deltas: Vec<f64> = spins.iter().map(|_| rng.random_range(-1.0..=1.0)).collect();
    let axes: Vec<[f64; 3]> = spins.iter().map(|_| random_unit_vector(rng)).collect();
    disorder(spins, &deltas, &axes).expect("shapes match")
}

/// Random Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    (&m + m.adjoint()) * C64::from(0.5)
}

/// Random single-spin operator with rank components `1..=max_rank` only.
pub fn random_single_spin<R: Rng + ?Sized>(spin: Spin, max_rank: usize, rng: &mut R) -> Matrix {
    let basis = multipole_basis(spin);
    let x = random_hermitian(spin.dim(), rng);
    let mut h = Matrix::zeros(spin.dim(), spin.dim());
    for l in 1..=max_rank.min(basis.max_rank()) {
        h += irrep_project(&x, l, &basis).expect("rank in range");
    }
    h
}

/// Random anisotropic multilinear interaction invariant under rotations about
/// `z`: one `S_a` factor per site, averaged over `z` rotations, with the
/// globally invariant (rank-0) part removed.
pub fn random_rwa_multilinear<R: Rng + ?Sized>(spins: &[Spin], rng: &mut R) -> Matrix {
    let k = spins.len();
    let ops = site_operators(spins);
    let d: usize = dims(spins).iter().product();
    let mut h = Matrix::zeros(d, d);
    let mut idx = vec![0usize; k];
    loop {
        let mut p = Matrix::identity(d, d);
        for (site, &a) in idx.iter().enumerate() {
            p *= &ops[site][a];
        }
        h += p * C64::from(rng.random_range(-1.0..1.0));
        let mut pos = 0;
        while pos < k {
            idx[pos] += 1;
            if idx[pos] < 3 {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    // average over C_n about z with n > 2k removes every |M| ≤ k component but M = 0
    let n = 2 * k + 1;
    let mut avg = Matrix::zeros(d, d);
    for s in 0..n {
        let u = lift_register_axis_angle([0.0, 0.0, 1.0], 2.0 * PI * s as f64 / n as f64, spins);
        avg += u.adjoint() * &h * &u;
    }
    let h = avg * C64::from(1.0 / n as f64);
    h.clone() - rotational_average(&h, spins)
}

/// Projection onto the globally rotation-invariant operators.
fn rotational_average(h: &Matrix, spins: &[Spin]) -> Matrix {
    // the icosahedral average equals the SO(3) average on ranks below 6,
    // and multilinear terms on spins-1/2 have rank at most K ≤ 5
    let group = PointGroup::reference(GroupKind::Icosahedral).expect("reference group");
    let lifts: Vec<Matrix> = group.elements.iter().map(|g| lift_register(g, spins)).collect();
    symmetrize_with(&lifts, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_specs_build() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for kind in [
            HamiltonianKind::Disorder,
            HamiltonianKind::DipolarRwa,
            HamiltonianKind::DipolarGeneral,
            HamiltonianKind::DisPlusDdRwa,
            HamiltonianKind::KbodyMultilinear,
        ] {
            let h = build_hamiltonian(&HamiltonianSpec::random(kind, vec![Spin::HALF; 3], &mut rng)).unwrap();
            assert!(h.is_hermitian(1e-12) && h.norm() > 0.0, "{kind:?}");
        }
        let q = build_hamiltonian(&HamiltonianSpec::random(HamiltonianKind::QuditDephasing, vec![Spin::from_twice(4)], &mut rng)).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rwa_pair_spectrum() {
        let mut spec = HamiltonianSpec::new(HamiltonianKind::DipolarRwa, vec![Spin::HALF; 2]);
        spec.couplings = all_pairs(2, &[1.0]);
        let h = build_hamiltonian(&spec).unwrap();
        // oracle: 3SzSz − S·S on the triplet/singlet basis, real symmetric
        let re = h.matrix.map(|z| z.re);
        assert!(h.matrix.map(|z| z.im).norm() < 1e-15);
        let mut ev: Vec<f64> = SymmetricEigen::new(re).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let expect = [-1.0, 0.0, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
    }

    #[test]
    fn zero_parameters_give_zero() {
        let mut spec = HamiltonianSpec::new(HamiltonianKind::DisPlusDdRwa, vec![Spin::HALF; 3]);
        spec.deltas = vec![0.0; 3];
        spec.couplings = all_pairs(3, &[0.0; 3]);
        assert_eq!(build_hamiltonian(&spec).unwrap().matrix.norm(), 0.0);
    }

    #[test]
    fn dephasing_rank_one_is_jz() {
        let spin = Spin::from_twice(4);
        let mut spec = HamiltonianSpec::new(HamiltonianKind::QuditDephasing, vec![spin]);
        spec.omegas = vec![(1, 0.7)];
        spec.target_norm = Some(2.0);
        let h = build_hamiltonian(&spec).unwrap();
        let jz = spin_operators(spin).jz;
        assert!((&h.matrix - jz * C64::from(1.0)).norm() < 1e-12);
        assert!(build_hamiltonian(&HamiltonianSpec { omegas: vec![(5, 1.0)], ..spec }).is_err());
    }

    #[test]
    fn inconsistent_sites_rejected() {
        let mut spec = HamiltonianSpec::new(HamiltonianKind::Disorder, vec![Spin::HALF; 2]);
        spec.deltas = vec![1.0];
        assert!(build_hamiltonian(&spec).is_err());
        spec.deltas = vec![1.0, 1.0];
        spec.disorder_axes = vec![[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(build_hamiltonian(&spec).is_err());
    }

    #[test]
    fn samples_have_requested_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = DisorderDipolarSample::draw(&[Spin::HALF; 4], &mut rng);
        assert!((op_norm(&s.disorder) - 1.0).abs() < 1e-12);
        assert!((op_norm(&s.scaled(0.0, 0.25)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rwa_multilinear_is_axial_and_anisotropic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spins = [Spin::HALF; 3];
        let h = random_rwa_multilinear(&spins, &mut rng);
        assert!(h.norm() > 1e-3);
        let u = lift_register_axis_angle([0.0, 0.0, 1.0], 0.37, &spins);
        assert!((u.adjoint() * &h * &u - &h).norm() < 1e-12);
        assert!(rotational_average(&h, &spins).norm() < 1e-12);
    }
}
