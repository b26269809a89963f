//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spindecouple::algebra::{irrep_project, multipole_basis, Matrix, Operator, Spin, C64};
use spindecouple::majorana::{constellation, crosscheck_symmetry, reconstruct};
use spindecouple::pointgroup::{closure, factorize, lift_register, named_group, PointGroup};
use spindecouple::sequence::{builtin, builtin_names, merge_pulses, Profile, Pulse, PulseSequence};
use spindecouple::simulate::{
    all_pairs, build_hamiltonian, dipolar, disorder, magnus, pulse_average, random_hermitian, random_rwa_multilinear,
    random_single_spin, random_unit_vector, run_sweep, slope_scan, HamiltonianKind, HamiltonianSpec, SweepConfig,
    SweepOutput, Toggle,
};
use spindecouple::symmetry::{fixed_subspace_dim_of, symmetrize, symmetrize_with, Symmetry};

type Outcome = Result<String, String>;

/// Name, optional runtime budget in seconds, check.
type Criterion = (&'static str, Option<f64>, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn frame_group(seq: &PulseSequence) -> PointGroup {
    let frames: Vec<_> = seq.frames().into_iter().map(|(g, _)| g).collect();
    PointGroup::from_elements(closure(&frames, 120).unwrap()).unwrap()
}

fn factorizations() -> Outcome {
    let want = [
        ("T", vec!["D2·C3"]),
        ("O", vec!["D3·C4", "D3·D2", "D4·C3", "T·C2"]),
        ("I", vec!["T·C5"]),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for (g, labels) in want {
        let got: BTreeSet<String> = factorize(&named_group(g).unwrap(), false).unwrap().iter().map(|f| f.label()).collect();
        let want: BTreeSet<String> = labels.iter().map(|s| s.to_string()).collect();
        ok &= got == want;
        detail.push(format!("{g}: {}", got.into_iter().collect::<Vec<_>>().join(", ")));
    }
    ensure(ok, detail.join("; "))
}

fn accessibility() -> Outcome {
    let g = |n: &str| Symmetry::Finite(named_group(n).unwrap());
    let z = [0.0, 0.0, 1.0];
    let zero: &[(&str, usize)] = &[
        ("D2", 1), ("T", 2), ("I", 2), ("D4", 3), ("O", 3), ("I", 3), ("I", 4),
        ("D6", 5), ("T", 5), ("I", 5), ("D8", 7), ("O", 7), ("I", 7),
    ];
    let positive: Vec<(Symmetry, usize)> = vec![
        (Symmetry::CInf(z), 1), (Symmetry::DInf(z), 2),
        (Symmetry::CInf(z), 3), (g("D3"), 3), (g("T"), 3),
        (Symmetry::DInf(z), 4), (g("O"), 4),
        (Symmetry::CInf(z), 5), (g("D5"), 5),
        (Symmetry::DInf(z), 6), (g("O"), 6), (g("I"), 6),
        (Symmetry::CInf(z), 7), (g("D7"), 7), (g("T"), 7),
    ];
    let mut bad = Vec::new();
    for &(name, l) in zero {
        let d = fixed_subspace_dim_of(&g(name), l).unwrap();
        if d != 0 {
            bad.push(format!("{name}@L={l}: {d}"));
        }
    }
    for (s, l) in &positive {
        let d = fixed_subspace_dim_of(s, *l).unwrap();
        if d == 0 {
            bad.push(format!("{}@L={l}: 0", s.name()));
        }
    }
    ensure(bad.is_empty(), format!("{} inaccessible, {} accessible checked; violations: {bad:?}", zero.len(), positive.len()))
}

/// `Σ δ_i n_i·S^i` with random axes plus RWA dipolar coupling.
fn dis_plus_dd_general(n: usize, r: &mut ChaCha8Rng) -> Operator {
    use rand::Rng;
    let spins = vec![Spin::HALF; n];
    let deltas: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..=1.0)).collect();
    let axes: Vec<[f64; 3]> = (0..n).map(|_| random_unit_vector(r)).collect();
    let strengths: Vec<f64> = (0..n * (n - 1) / 2).map(|_| r.random_range(-1.0..=1.0)).collect();
    let h = disorder(&spins, &deltas, &axes).unwrap() + dipolar(&spins, &all_pairs(n, &strengths)).unwrap();
    Operator::new(vec![2; n], h).unwrap()
}

fn first_order() -> Outcome {
    let mut r = rng(3);
    let mut cases: Vec<(&str, Operator)> = Vec::new();
    let dd = build_hamiltonian(&HamiltonianSpec::random(HamiltonianKind::DipolarRwa, vec![Spin::HALF; 3], &mut r)).unwrap();
    cases.push(("LG3", dd));
    cases.push(("FOUR_PULSE", dis_plus_dd_general(3, &mut r)));
    cases.push(("TEDDY", dis_plus_dd_general(3, &mut r)));
    for name in ["D3_RING", "D3_MIXED"] {
        let spins = vec![Spin::HALF; 3];
        cases.push((name, Operator::new(vec![2; 3], random_rwa_multilinear(&spins, &mut r)).unwrap()));
    }
    for name in ["TDD1", "TDD2"] {
        use rand::Rng;
        let mut spec = HamiltonianSpec::new(HamiltonianKind::QuditDephasing, vec![Spin::from_twice(4)]);
        spec.omegas = (1..=4).map(|l| (l, r.random_range(-1.0..=1.0))).collect();
        cases.push((name, build_hamiltonian(&spec).unwrap()));
    }
    cases.push(("C3D2", Operator::single(random_single_spin(Spin::from_twice(2), 2, &mut r))));
    cases.push(("O_HIER", Operator::single(random_single_spin(Spin::from_twice(3), 3, &mut r))));
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, h) in &cases {
        let h = h.traceless();
        let m = magnus(&builtin(name).unwrap(), &h).unwrap();
        let rel = m.norm1 / h.norm();
        worst = worst.max(rel);
        if rel > 1e-10 {
            bad.push(format!("{name}: {rel:.2e}"));
        }
    }
    ensure(bad.is_empty(), format!("{} pairs, worst ‖Ω1‖/‖H‖ = {worst:.2e} (tol 1e-10) {bad:?}", cases.len()))
}

fn second_order() -> Outcome {
    let h = dis_plus_dd_general(3, &mut rng(4));
    let h = Operator::new(h.dims.clone(), &h.matrix - Matrix::identity(8, 8) * C64::from(h.matrix.trace().re / 8.0)).unwrap();
    let m = magnus(&builtin("TEDDY").unwrap(), &h).unwrap();
    let rel = m.norm2 / (h.norm().powi(2) * m.duration);
    let cfg = SweepConfig::preset("fig6-ideal").unwrap();
    let scan = slope_scan(&cfg, "TEDDY", 1e-3, 0.1, 6).map_err(|e| e.to_string())?;
    let slope = scan.slope.unwrap_or(f64::NAN);
    ensure(rel <= 1e-10 && slope >= 2.85, format!("‖Ω2‖/(‖H‖²T) = {rel:.2e} (tol 1e-10), slope over [1e-3, 1e-2] = {slope:.3} (≥ 2.85)"))
}

fn multisymmetrization() -> Outcome {
    let spin = Spin::from_twice(6);
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for g in ["T", "O", "I"] {
        let group = named_group(g).unwrap();
        for f in factorize(&group, false).unwrap() {
            for _ in 0..20 {
                let s = Operator::single(random_hermitian(spin.dim(), &mut r));
                let whole = symmetrize(&group, &s).matrix;
                for (a, b) in [(&f.first, &f.second), (&f.second, &f.first)] {
                    let nested = symmetrize(b, &symmetrize(a, &s)).matrix;
                    worst = worst.max((nested - &whole).norm() / s.norm());
                }
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-10, format!("{count} (factorization, S) cases on spin 3, both orders, worst {worst:.2e} (tol 1e-10)"))
}

fn symmetric_profile_identity() -> Outcome {
    let teddy = builtin("TEDDY").unwrap();
    let group = frame_group(&teddy);
    let mut generators: Vec<Pulse> = Vec::new();
    for p in teddy.pulses() {
        if !generators.iter().any(|q| q.axis == p.axis && q.angle == p.angle) {
            generators.push(Pulse { profile: Profile::Sin2, duration: 1.0, ..*p });
        }
    }
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let s = Operator::new(vec![2, 2, 2], random_hermitian(8, &mut r)).unwrap();
        let projected = symmetrize(&group, &s);
        for p in &generators {
            let f = Operator::new(s.dims.clone(), pulse_average(p, &s, 64, Toggle::Forward).unwrap()).unwrap();
            let lhs = symmetrize(&group, &f).matrix;
            let rhs = pulse_average(p, &projected, 64, Toggle::Backward).unwrap();
            worst = worst.max((&lhs - &rhs).norm() / lhs.norm().max(s.norm()));
        }
    }
    ensure(worst <= 1e-8, format!("{} generating pulses × 20 S, sin2, 64 slices, worst relative {worst:.2e} (tol 1e-8)", generators.len()))
}

fn diagonal_windows(out: &SweepOutput, offset: usize, len: usize) -> Vec<Vec<(usize, usize)>> {
    let n = out.xs.len().min(out.ys.len() - offset);
    (0..n.saturating_sub(len - 1)).map(|i| (i..i + len).map(|k| (k, k + offset)).collect()).collect()
}

fn axis_field_sweep() -> Outcome {
    let out = run_sweep(&SweepConfig::preset("fig11").unwrap()).map_err(|e| e.to_string())?;
    let mut ordered = true;
    for ix in 0..out.xs.len() {
        let c = out.mean("C3D2", ix, 0).unwrap();
        ordered &= c < out.mean("TDD1", ix, 0).unwrap() && c < out.mean("TDD2", ix, 0).unwrap();
    }
    let pts: Vec<(usize, usize)> = (0..out.xs.len()).map(|ix| (ix, 0)).collect();
    let slopes: Vec<f64> = ["C3D2", "TDD1", "TDD2"].iter().map(|s| out.slope_along(s, &pts).unwrap_or(f64::NAN)).collect();
    let spread = slopes.iter().cloned().fold(f64::MIN, f64::max) - slopes.iter().cloned().fold(f64::MAX, f64::min);
    ensure(
        ordered && spread <= 0.15,
        format!("C3D2 lowest at all {} τ: {ordered}; slopes {slopes:.3?}, spread {spread:.3} (≤ 0.15)", out.xs.len()),
    )
}

fn desk_scale_sweeps() -> Outcome {
    let ideal = run_sweep(&SweepConfig::preset("fig6-ideal").unwrap()).map_err(|e| e.to_string())?;
    let (nx, ny) = (ideal.xs.len(), ideal.ys.len());
    let mut above = 0;
    for ix in 0..nx {
        for iy in 0..ny {
            if ideal.mean("TEDDY", ix, iy).unwrap() > ideal.mean("NoDD", ix, iy).unwrap() {
                above += 1;
            }
        }
    }
    // interaction-dominated diagonal: tau_Delta = 10 tau_delta, one-decade windows
    let ideal_slopes: Vec<f64> =
        diagonal_windows(&ideal, 5, 6).iter().map(|w| ideal.slope_along("TEDDY", w).unwrap_or(f64::NAN)).collect();
    let ideal_min = ideal_slopes.iter().cloned().fold(f64::INFINITY, f64::min);

    let finite = run_sweep(&SweepConfig::preset("fig6-finite").unwrap()).map_err(|e| e.to_string())?;
    let (mut flagged, mut refl_min) = (0, f64::INFINITY);
    for offset in 0..ny {
        for w in diagonal_windows(&finite, offset, 6) {
            let t = finite.slope_along("TEDDY", &w).unwrap_or(f64::NAN);
            if t < 2.5 {
                flagged += 1;
                refl_min = refl_min.min(finite.slope_along("TEDDY_REFL", &w).unwrap_or(f64::NAN));
            }
        }
    }
    ensure(
        above == 0 && ideal_min >= 2.85 && flagged > 0 && refl_min >= 2.85,
        format!(
            "ideal: TEDDY > NoDD at {above}/{} points, min TEDDY slope {ideal_min:.3} (≥ 2.85); \
             finite: {flagged} windows with TEDDY < 2.5, min TEDDY_REFL slope there {refl_min:.3} (≥ 2.85)",
            nx * ny
        ),
    )
}

fn order1_cross_oracle() -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    let names: Vec<String> = builtin_names().iter().map(|n| n.replace("<n>", "2")).collect();
    for name in &names {
        let seq = builtin(name).unwrap();
        let frames = seq.frames();
        let total: f64 = frames.iter().map(|(_, t)| t).sum();
        for spins in [vec![Spin::HALF; 3], vec![Spin::from_twice(4)]] {
            let d: usize = spins.iter().map(Spin::dim).product();
            let h = Operator::new(spins.iter().map(Spin::dim).collect(), random_hermitian(d, &mut r)).unwrap();
            let m = magnus(&seq, &h).unwrap();
            let mut avg = Matrix::zeros(d, d);
            for (g, t) in &frames {
                let u = lift_register(g, &spins);
                avg += symmetrize_with(&[u], &h.matrix) * C64::from(t / total);
            }
            worst = worst.max((m.order1 - avg).norm() / h.norm());
        }
    }
    ensure(worst <= 1e-12, format!("{} builtins × 2 registers, worst {worst:.2e} (tol 1e-12)", names.len()))
}

fn merge() -> Outcome {
    let a = Pulse::ideal([0.0, 1.0, 0.0], PI);
    let b = Pulse::ideal([1.0, 1.0, 1.0], 2.0 * PI / 3.0);
    let m = merge_pulses(&a, &b);
    let s = 1.0 / 3f64.sqrt();
    let want = [s, -s, -s];
    let err = (m.angle - 2.0 * PI / 3.0).abs().max((0..3).map(|k| (m.axis[k] - want[k]).abs()).fold(0.0, f64::max));
    ensure(err <= 1e-12, format!("angle {:.15}, axis {:.15?}, error {err:.1e} (tol 1e-12)", m.angle, m.axis))
}

fn majorana() -> Outcome {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for l in 1..=4usize {
        let spin = Spin::from_twice(l as u32);
        let basis = multipole_basis(spin);
        for _ in 0..25 {
            let comp = irrep_project(&random_hermitian(spin.dim(), &mut r), l, &basis).unwrap();
            let op = Operator::single(comp.clone());
            let c = constellation(&op, l).map_err(|e| e.to_string())?;
            let back = reconstruct(&op, &c).map_err(|e| e.to_string())?;
            worst = worst.max((back - &comp).norm() / comp.norm());
        }
    }
    let groups = ["C2", "C3", "C4", "D2", "D3", "D4", "D5", "T", "O", "I"];
    let (mut agree, mut invariant) = (0, 0);
    for case in 0..200usize {
        let group = named_group(groups[case % groups.len()]).unwrap();
        let spin = Spin::from_twice(2 + (case / groups.len()) as u32 % 5);
        let mut op = Operator::single(random_hermitian(spin.dim(), &mut r));
        if case % 2 == 0 {
            op = symmetrize(&group, &op);
        }
        let mut direct = true;
        let mut via = true;
        for g in &group.elements {
            let c = crosscheck_symmetry(&op, g).map_err(|e| e.to_string())?;
            direct &= c.direct;
            via &= c.via_constellations;
        }
        agree += (direct == via) as usize;
        invariant += direct as usize;
    }
    ensure(
        worst <= 1e-7 && agree == 200,
        format!("round trip worst {worst:.2e} (tol 1e-7); verdicts agree {agree}/200 ({invariant} invariant)"),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("factorizations of T, O, I", Some(5.0), factorizations),
        ("inaccessible and accessible symmetries per irrep", Some(10.0), accessibility),
        ("first-order decoupling of catalogued pairs", None, first_order),
        ("TEDDY second-order decoupling", None, second_order),
        ("multisymmetrization identity", None, multisymmetrization),
        ("symmetric-profile finite-pulse identity", None, symmetric_profile_identity),
        ("spin-3 axis field: C3D2 against TDD1, TDD2", Some(120.0), axis_field_sweep),
        ("disorder plus dipolar sweeps at desk scale", Some(600.0), desk_scale_sweeps),
        ("first-order term equals frame-group average", None, order1_cross_oracle),
        ("composite pulse merge", None, merge),
        ("Majorana round trip and symmetry crosscheck", None, majorana),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        let slow = limit.is_some_and(|l| secs > l);
        let (tag, detail) = match outcome {
            Ok(d) if !slow => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; too slow")),
            Err(d) => ("FAIL", d),
        };
        failed += (tag == "FAIL") as usize;
        let budget = limit.map_or(String::new(), |l| format!(" / {l:.0} s"));
        println!("{tag} {:>2} {name}: {detail} [{secs:.1} s{budget}]", k + 1);
    }
    println!("{} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
