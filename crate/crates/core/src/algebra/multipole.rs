use super::{collective_spin, commutator, hs_inner, AlgebraError, Matrix, Operator, Spin, C64};

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>` with every argument doubled
/// (so spin-1/2 is passed as 1). Condon-Shortley phase convention.
pub fn clebsch_gordan(j1: u32, m1: i32, j2: u32, m2: i32, j: u32, m: i32) -> f64 {
    let (j1, j2, j) = (j1 as i64, j2 as i64, j as i64);
    let (m1, m2, m) = (m1 as i64, m2 as i64, m as i64);
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    let a = (j1 + j2 - j) / 2;
    let b = (j1 - j2 + j) / 2;
    let c = (-j1 + j2 + j) / 2;
    let d = (j1 + j2 + j) / 2 + 1;
    let pre = ((j + 1) as f64 * factorial(a) * factorial(b) * factorial(c) / factorial(d)).sqrt();
    let pre2 = (factorial((j + m) / 2)
        * factorial((j - m) / 2)
        * factorial((j1 - m1) / 2)
        * factorial((j1 + m1) / 2)
        * factorial((j2 - m2) / 2)
        * factorial((j2 + m2) / 2))
        .sqrt();
    let mut sum = 0.0;
    for k in 0..=a {
        let t = [
            k,
            a - k,
            (j1 - m1) / 2 - k,
            (j2 + m2) / 2 - k,
            (j - j2 + m1) / 2 + k,
            (j - j1 - m2) / 2 + k,
        ];
        if t.iter().any(|&x| x < 0) {
            continue;
        }
        let den: f64 = t.iter().map(|&x| factorial(x)).product();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    pre * pre2 * sum
}

/// Orthonormal multipole operators `T_LM` for one spin, `L = 0..=2j`.
///
/// `T_LM = Σ (-1)^(j-m') <j m; j -m' | L M> |m><m'|`, so `T_10 ∝ +J_z`,
/// `T_00 = 1/sqrt(2j+1)` and `T_LM† = (-1)^M T_L,-M`.
#[derive(Debug, Clone)]
pub struct MultipoleBasis {
    pub spin: Spin,
    ops: Vec<Matrix>,
}

impl MultipoleBasis {
    pub fn max_rank(&self) -> usize {
        self.spin.twice() as usize
    }

    pub fn get(&self, l: usize, m: i64) -> &Matrix {
        assert!(l <= self.max_rank() && m.unsigned_abs() as usize <= l, "T_{l},{m} out of range");
        &self.ops[l * l + (m + l as i64) as usize]
    }

    /// `T_L,-L ... T_L,L`.
    pub fn rank(&self, l: usize) -> &[Matrix] {
        &self.ops[l * l..(l + 1) * (l + 1)]
    }
}

pub fn multipole_basis(spin: Spin) -> MultipoleBasis {
    let d = spin.dim();
    let tj = spin.twice() as i32;
    let mut ops = Vec::with_capacity(d * d);
    for l in 0..=spin.twice() as i32 {
        for m in -l..=l {
            let mut t = Matrix::zeros(d, d);
            for (r, mr) in (0..d).map(|k| (k, tj - 2 * k as i32)) {
                for (c, mc) in (0..d).map(|k| (k, tj - 2 * k as i32)) {
                    let cg = clebsch_gordan(tj as u32, mr, tj as u32, -mc, 2 * l as u32, 2 * m);
                    if cg != 0.0 {
                        let sign = if ((tj - mc) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        t[(r, c)] = C64::from(sign * cg);
                    }
                }
            }
            ops.push(t);
        }
    }
    MultipoleBasis { spin, ops }
}

/// Projection of a single-spin operator onto its rank-`l` component.
pub fn irrep_project(op: &Matrix, l: usize, basis: &MultipoleBasis) -> Result<Matrix, AlgebraError> {
    let d = basis.spin.dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(AlgebraError::DimensionMismatch { expected: d, found: op.nrows() });
    }
    if l > basis.max_rank() {
        return Err(AlgebraError::RankOutOfRange { l, j: basis.spin.j() });
    }
    let mut out = Matrix::zeros(d, d);
    for t in basis.rank(l) {
        out += t * hs_inner(t, op);
    }
    Ok(out)
}

/// Rank-`l` part of an operator written as `Σ_M c_M T̂_M` in a standard
/// spherical-tensor basis (`[J-, T̂_M] = sqrt((L+M)(L-M+1)) T̂_{M-1}`).
///
/// `coefficients` and `basis` run over `M = -L..=L`. A vanishing component has
/// zero coefficients and an empty basis.
#[derive(Debug, Clone)]
pub struct TensorComponent {
    pub l: usize,
    pub coefficients: Vec<C64>,
    pub basis: Vec<Matrix>,
}

impl TensorComponent {
    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn reconstruct(&self, dim: usize) -> Matrix {
        let mut out = Matrix::zeros(dim, dim);
        for (c, t) in self.coefficients.iter().zip(&self.basis) {
            out += t * *c;
        }
        out
    }
}

/// Rank-`l` component of an operator under collective rotations of its register.
///
/// Single spins use the multipole basis directly. For registers the component
/// must lie in a single irreducible copy; its basis is generated from the
/// highest-weight element, phased to agree with the single-spin convention.
pub fn collective_tensor(op: &Operator, l: usize) -> Result<TensorComponent, AlgebraError> {
    let spins = op.spins();
    let max_l: usize = spins.iter().map(|s| s.twice() as usize).sum();
    if l > max_l {
        return Err(AlgebraError::RankOutOfRange { l, j: max_l as f64 / 2.0 });
    }
    if spins.len() == 1 {
        let basis = multipole_basis(spins[0]);
        let coefficients: Vec<C64> = basis.rank(l).iter().map(|t| hs_inner(t, &op.matrix)).collect();
        let zero = coefficients.iter().all(|c| c.norm() <= 1e-14 * op.hs_norm().max(1e-300));
        let basis = if zero { Vec::new() } else { basis.rank(l).to_vec() };
        return Ok(TensorComponent { l, coefficients, basis });
    }

    let jc = collective_spin(&spins);
    let casimir = |x: &Matrix| -> Matrix {
        let mut acc = Matrix::zeros(x.nrows(), x.ncols());
        for j in &jc {
            acc += commutator(j, &commutator(j, x));
        }
        acc
    };
    let target = (l * (l + 1)) as f64;
    let mut xl = op.matrix.clone();
    for lp in 0..=max_l {
        if lp == l {
            continue;
        }
        let ev = (lp * (lp + 1)) as f64;
        let cx = casimir(&xl);
        xl = (cx - &xl * C64::from(ev)) / C64::from(target - ev);
    }
    let total = op.hs_norm().max(1e-300);
    if xl.norm() <= 1e-12 * total {
        return Ok(TensorComponent { l, coefficients: vec![C64::from(0.0); 2 * l + 1], basis: Vec::new() });
    }

    // Jz is diagonal in the product basis, so weight spaces are entry masks.
    let mz: Vec<f64> = (0..op.dim()).map(|k| jc[2][(k, k)].re).collect();
    let weight = |x: &Matrix, m: i64| -> Matrix {
        let mut out = x.clone();
        for r in 0..x.nrows() {
            for c in 0..x.ncols() {
                if ((mz[r] - mz[c]) - m as f64).abs() > 1e-9 {
                    out[(r, c)] = C64::from(0.0);
                }
            }
        }
        out
    };
    let li = l as i64;
    let (mstar, mut top) = (-li..=li)
        .map(|m| (m, weight(&xl, m)))
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("non-empty range");
    let jp = &jc[0] + &jc[1] * C64::new(0.0, 1.0);
    let jm = jp.adjoint();
    for _ in mstar..li {
        top = commutator(&jp, &top);
    }
    let n = top.norm();
    top /= C64::from(n);
    let max = top.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let pivot = *top.iter().find(|z| z.norm() >= (1.0 - 1e-6) * max).expect("non-zero matrix");
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    top *= pivot.conj() / C64::from(pivot.norm() * sign);

    let mut basis = vec![top];
    for m in ((-li + 1)..=li).rev() {
        let prev = basis.last().expect("seeded");
        let f = (((li + m) * (li - m + 1)) as f64).sqrt();
        basis.push(commutator(&jm, prev) / C64::from(f));
    }
    basis.reverse();
    let coefficients: Vec<C64> = basis.iter().map(|t| hs_inner(t, &xl)).collect();
    let comp = TensorComponent { l, coefficients, basis };
    let resid = (comp.reconstruct(op.dim()) - &xl).norm();
    if resid > 1e-8 * xl.norm() {
        return Err(AlgebraError::MultipleCopies(l));
    }
    Ok(comp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spin_operators;

    #[test]
    fn cg_known_values() {
        // <1/2 1/2; 1/2 -1/2 | 1 0> = 1/sqrt2, <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt2
        let s = 0.5f64.sqrt();
        assert!((clebsch_gordan(1, 1, 1, -1, 2, 0) - s).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - s).abs() < 1e-15);
        assert!((clebsch_gordan(1, -1, 1, 1, 0, 0) + s).abs() < 1e-15);
        // <1 1; 1 -1 | 2 0> = 1/sqrt6, <1 0; 1 0 | 2 0> = sqrt(2/3), <1 0; 1 0 | 1 0> = 0
        assert!((clebsch_gordan(2, 2, 2, -2, 4, 0) - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert!((clebsch_gordan(2, 0, 2, 0, 4, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(clebsch_gordan(2, 0, 2, 0, 2, 0).abs() < 1e-15);
        // <3/2 1/2; 1 1 | 5/2 3/2> = sqrt(3/5)
        assert!((clebsch_gordan(3, 1, 2, 2, 5, 3) - 0.6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cg_orthogonality() {
        let (j1, j2) = (3u32, 4u32);
        for j in [1u32, 3, 5, 7] {
            for jp in [1u32, 3, 5, 7] {
                let m = 1i32;
                let mut s = 0.0;
                for m1 in (-(j1 as i32)..=j1 as i32).step_by(2) {
                    let m2 = m - m1;
                    s += clebsch_gordan(j1, m1, j2, m2, j, m) * clebsch_gordan(j1, m1, j2, m2, jp, m);
                }
                let expect = if j == jp { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-13, "j={j} jp={jp} s={s}");
            }
        }
    }

    #[test]
    fn multipole_orthonormal_and_conventions() {
        for twice in 1..=7 {
            let spin = Spin::from_twice(twice);
            let b = multipole_basis(spin);
            let n = b.ops.len();
            for a in 0..n {
                for c in 0..n {
                    let ip = hs_inner(&b.ops[a], &b.ops[c]);
                    let e = if a == c { 1.0 } else { 0.0 };
                    assert!((ip - C64::from(e)).norm() < 1e-12);
                }
            }
            let ops = spin_operators(spin);
            // T_10 positively proportional to Jz
            let t10 = b.get(1, 0);
            let ratio = hs_inner(&ops.jz, t10).re;
            assert!(ratio > 0.0);
            assert!((t10 * C64::from(ratio) - &ops.jz).norm() < 1e-12);
            // T_00 = 1/sqrt(d)
            let d = spin.dim();
            assert!((b.get(0, 0) - Matrix::identity(d, d) / C64::from((d as f64).sqrt())).norm() < 1e-13);
            for l in 0..=b.max_rank() {
                let li = l as i64;
                for m in -li..=li {
                    let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    let lhs = b.get(l, m).adjoint();
                    let rhs = b.get(l, -m) * C64::from(sign);
                    assert!((lhs - rhs).norm() < 1e-12);
                    if m > -li {
                        let f = (((li + m) * (li - m + 1)) as f64).sqrt();
                        let low = commutator(&ops.jm, b.get(l, m));
                        assert!((low - b.get(l, m - 1) * C64::from(f)).norm() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn irrep_projection_of_jz_squared() {
        let spin = Spin::from_twice(2);
        let b = multipole_basis(spin);
        let ops = spin_operators(spin);
        let jz2 = &ops.jz * &ops.jz;
        let p1 = irrep_project(&jz2, 1, &b).unwrap();
        assert!(p1.norm() < 1e-13);
        let p0 = irrep_project(&jz2, 0, &b).unwrap();
        let p2 = irrep_project(&jz2, 2, &b).unwrap();
        // Jz^2 - 2/3 is the rank-2 part for j = 1
        let mut expect = jz2.clone();
        for k in 0..3 {
            expect[(k, k)] -= C64::from(2.0 / 3.0);
        }
        assert!((&p2 - expect).norm() < 1e-13);
        assert!((p0 + p2 - jz2).norm() < 1e-13);
        assert!(irrep_project(&ops.jz, 3, &b).is_err());
    }

    #[test]
    fn register_tensor_matches_single_spin_convention() {
        // two spins-1/2: the rank-2 part of 3 Sz Sz - S.S is the collective T_20
        let ops = spin_operators(Spin::HALF);
        let dims = [2usize, 2];
        let mut dd = Matrix::zeros(4, 4);
        for (a, m) in ops.cartesian().into_iter().enumerate() {
            let w = if a == 2 { 2.0 } else { -1.0 };
            dd += (super::super::embed(m, 0, &dims).unwrap() * super::super::embed(m, 1, &dims).unwrap()) * C64::from(w);
        }
        let op = Operator::new(dims.to_vec(), dd.clone()).unwrap();
        let comp = collective_tensor(&op, 2).unwrap();
        for (k, c) in comp.coefficients.iter().enumerate() {
            if k != 2 {
                assert!(c.norm() < 1e-12);
            }
        }
        assert!(comp.coefficients[2].re > 0.0);
        assert!((comp.reconstruct(4) - dd).norm() < 1e-12);
        assert!(collective_tensor(&op, 1).unwrap().is_zero());
    }

    #[test]
    fn register_tensor_detects_multiple_copies() {
        // Sz(1) + 2 Sx(2) is rank 1 but not a component of a single vector operator
        let ops = spin_operators(Spin::HALF);
        let dims = [2usize, 2];
        let a = super::super::embed(&ops.jz, 0, &dims).unwrap();
        let b = super::super::embed(&ops.jx, 1, &dims).unwrap();
        let op = Operator::new(dims.to_vec(), a + b * C64::from(2.0)).unwrap();
        assert_eq!(collective_tensor(&op, 1).unwrap_err(), AlgebraError::MultipleCopies(1));
    }

    #[test]
    fn single_spin_basis_agrees_with_highest_weight_construction() {
        // A spin-1 ⊗ spin-0 register routes through the generic path.
        let spin = Spin::from_twice(2);
        let b = multipole_basis(spin);
        let mut m = Matrix::zeros(3, 3);
        for (k, t) in b.rank(2).iter().enumerate() {
            m += t * C64::new(0.3 + k as f64, -0.1 * k as f64);
        }
        let op = Operator::new(vec![3, 1], m.clone()).unwrap();
        let comp = collective_tensor(&op, 2).unwrap();
        for (t, u) in comp.basis.iter().zip(b.rank(2)) {
            assert!((t - u).norm() < 1e-12);
        }
    }
}
