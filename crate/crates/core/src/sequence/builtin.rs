use std::f64::consts::PI;

use thiserror::Error;

use super::{nest, Item, Pulse, PulseSequence, SequenceMeta};
use crate::pointgroup::GroupElement;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("unknown builtin sequence '{0}'")]
pub struct BuiltinError(pub String);

const WAIT: Item = Item::Wait { duration: 1.0 };

fn s(v: f64) -> f64 {
    v.sqrt()
}

fn pulse(axis: [f64; 3], angle: f64) -> Item {
    Item::Pulse(Pulse::ideal(axis, angle))
}

fn seq(name: &str, group: &str, generators: &[&str], items: Vec<Item>) -> PulseSequence {
    PulseSequence {
        items,
        meta: SequenceMeta {
            name: name.to_string(),
            group: Some(group.to_string()),
            generators: generators.iter().map(|g| g.to_string()).collect(),
            layers: Vec::new(),
        },
    }
}

fn cycle(items: &[Item], n: usize) -> Vec<Item> {
    items.iter().copied().cycle().take(items.len() * n).collect()
}

pub const LG_AXIS: [f64; 3] = [-0.5773502691896258, 0.5773502691896258, 0.5773502691896258];

fn four_pulse_axes(sign: f64) -> ([f64; 3], [f64; 3]) {
    ([s(2.0 / 3.0), 0.0, 1.0 / s(3.0)], [-1.0 / s(6.0), sign / s(2.0), 1.0 / s(3.0)])
}

/// Axes `n1, n2, n3` of the tetrahedral sequences, built from the golden ratio.
pub fn tdd_axes() -> [[f64; 3]; 3] {
    let phi = (1.0 + s(5.0)) / 2.0;
    let beta = (phi / s(phi + 2.0)).acos();
    let tilt = GroupElement::from_axis_angle([-1.0, 0.0, 0.0], beta).expect("unit axis");
    let turn = GroupElement::from_axis_angle([0.0, 0.0, -1.0], 4.0 * PI / 5.0).expect("unit axis");
    let n3 = tilt.rotate([0.0, 0.0, 1.0]);
    let v = [(1.0 - phi) / s(3.0), 0.0, phi / s(3.0)];
    let n1 = turn.rotate(tilt.rotate(v));
    let n2 = GroupElement::from_axis_angle(n3, PI / 2.0).expect("unit axis").rotate(n1);
    [n1, n2, n3]
}

fn lg(n: usize) -> PulseSequence {
    let name = if n == 1 { "LG3".to_string() } else { format!("LG3n({n})") };
    let group = format!("C{}", 3 * n);
    seq(&name, &group, &["c"], cycle(&[WAIT, pulse(LG_AXIS, 2.0 * PI / (3 * n) as f64)], 3 * n))
}

fn four_pulse(sign: f64) -> PulseSequence {
    let (n1, n2) = four_pulse_axes(sign);
    let name = if sign > 0.0 { "FOUR_PULSE(+)" } else { "FOUR_PULSE(-)" };
    seq(name, "D2", &["π_n1", "π_n2"], cycle(&[WAIT, pulse(n1, PI), WAIT, pulse(n2, PI)], 2))
}

fn teddy(sign: f64) -> PulseSequence {
    let (n1, n2) = four_pulse_axes(sign);
    let (a, b) = (pulse(n1, PI), pulse(n2, -PI));
    let mut items = cycle(&[WAIT, a, WAIT, b], 2);
    items.extend(cycle(&[WAIT, b, WAIT, a], 2));
    let name = if sign > 0.0 { "TEDDY(+)" } else { "TEDDY(-)" };
    seq(name, "D2", &["π_n1", "-π_n2"], items)
}

fn c3_outer(axis: [f64; 3]) -> PulseSequence {
    seq("C3", "C3", &["c"], cycle(&[WAIT, pulse(axis, 2.0 * PI / 3.0)], 3))
}

fn c2_outer(axis: [f64; 3]) -> PulseSequence {
    seq("C2", "C2", &["π_n4"], cycle(&[WAIT, pulse(axis, PI)], 2))
}

fn d2_inner(n1: [f64; 3], n2: [f64; 3]) -> PulseSequence {
    seq("D2", "D2", &["π_n1", "π_n2"], cycle(&[WAIT, pulse(n1, PI), WAIT, pulse(n2, PI)], 2))
}

fn hierarchical(n1: [f64; 3], n2: [f64; 3], n3: [f64; 3]) -> PulseSequence {
    let mut out = nest(&d2_inner(n1, n2), &c3_outer(n3)).expect("outer has waits");
    out.meta.group = Some("T".into());
    out
}

fn o_hierarchy(c3d2: &PulseSequence, n4: [f64; 3]) -> PulseSequence {
    let mut out = nest(c3d2, &c2_outer(n4)).expect("outer has waits");
    out.meta.group = Some("O".into());
    out
}

fn tdd(word: &str) -> PulseSequence {
    let [n1, n2, n3] = tdd_axes();
    let items = word
        .split_whitespace()
        .flat_map(|w| {
            let p = match w {
                "a" => pulse(n1, 2.0 * PI / 3.0),
                "b" => pulse(n2, 2.0 * PI / 3.0),
                "A" => pulse(n1, -2.0 * PI / 3.0),
                "B" => pulse(n2, -2.0 * PI / 3.0),
                "c" => pulse(n3, PI),
                _ => unreachable!("fixed word"),
            };
            [WAIT, p]
        })
        .collect();
    seq("", "T", &[], items)
}

pub fn builtin_names() -> Vec<&'static str> {
    vec![
        "LG3",
        "LG3n(<n>)",
        "FOUR_PULSE(+)",
        "FOUR_PULSE(-)",
        "TEDDY(+)",
        "TEDDY(-)",
        "TEDDY_REFL",
        "D3_RING",
        "D3_MIXED",
        "TDD1",
        "TDD2",
        "C3D2",
        "O_HIER",
        "C3D2_ALT_AXES",
        "O_HIER_ALT_AXES",
    ]
}

/// Catalogued sequence with unit waits and ideal pulses; rebind timing with
/// [`PulseSequence::with_timing`].
pub fn builtin(name: &str) -> Result<PulseSequence, BuiltinError> {
    let key = name.trim().to_ascii_uppercase().replace(' ', "");
    let unknown = || BuiltinError(name.to_string());
    let out = match key.as_str() {
        "LG3" => lg(1),
        k if k.starts_with("LG3N(") && k.ends_with(')') => {
            let n: usize = k[5..k.len() - 1].parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            lg(n)
        }
        "FOUR_PULSE" | "FOUR_PULSE(+)" | "FOUR_PULSE+" => four_pulse(1.0),
        "FOUR_PULSE(-)" | "FOUR_PULSE-" => four_pulse(-1.0),
        "TEDDY" | "TEDDY(+)" | "TEDDY+" => teddy(1.0),
        "TEDDY(-)" | "TEDDY-" => teddy(-1.0),
        "TEDDY_REFL" => {
            let t = teddy(1.0);
            let mut out = t.then(&t.reversed());
            out.meta.name = "TEDDY_REFL".into();
            out
        }
        "D3_RING" => {
            let (n1, n2) = ([1.0, -1.0, 0.0], [0.0, -1.0, 1.0]);
            seq("D3_RING", "D3", &["π_n1", "π_n2"], cycle(&[WAIT, pulse(n1, PI), WAIT, pulse(n2, PI)], 3))
        }
        "D3_MIXED" => {
            let c = pulse([1.0, 1.0, 1.0], 2.0 * PI / 3.0);
            let items = cycle(&[WAIT, c, WAIT, c, WAIT, pulse([1.0, -1.0, 0.0], PI)], 2);
            seq("D3_MIXED", "D3", &["c", "π_n1"], items)
        }
        "TDD1" => tdd("a b a a B A A B B a a B").renamed("TDD1").with_group("T", &["a", "b", "ā", "b̄"]),
        "TDD2" => tdd("c b b c B B c b b c B B").renamed("TDD2").with_group("T", &["b", "c", "b̄"]),
        "C3D2" => hierarchical([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1.0]).renamed("C3D2"),
        "O_HIER" => {
            let inner = builtin("C3D2")?;
            o_hierarchy(&inner, [1.0, 1.0, 0.0]).renamed("O_HIER")
        }
        "C3D2_ALT_AXES" => {
            let (n1, n2) = four_pulse_axes(1.0);
            hierarchical(n1, n2, [0.0, 0.0, 1.0]).renamed("C3D2_ALT_AXES")
        }
        "O_HIER_ALT_AXES" => {
            let inner = builtin("C3D2_ALT_AXES")?;
            o_hierarchy(&inner, [-1.0 / s(3.0), 0.0, s(2.0 / 3.0)]).renamed("O_HIER_ALT_AXES")
        }
        _ => return Err(unknown()),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointgroup::{PointGroup, SNAP};

    fn frame_group(s: &PulseSequence) -> PointGroup {
        let elements: Vec<GroupElement> = s.pulses().map(Pulse::element).collect();
        PointGroup::generated_by(&elements).unwrap()
    }

    #[test]
    fn catalogue_shapes() {
        for (name, pulses, group, mult) in [
            ("LG3", 3, "C3", 1),
            ("LG3n(2)", 6, "C6", 1),
            ("FOUR_PULSE(+)", 4, "D2", 1),
            ("FOUR_PULSE(-)", 4, "D2", 1),
            ("TEDDY", 8, "D2", 2),
            ("TEDDY(-)", 8, "D2", 2),
            ("TEDDY_REFL", 16, "D2", 4),
            ("D3_RING", 6, "D3", 1),
            ("D3_MIXED", 6, "D3", 1),
            ("TDD1", 12, "T", 1),
            ("TDD2", 12, "T", 1),
            ("C3D2", 15, "T", 1),
            ("O_HIER", 32, "O", 1),
            ("C3D2_ALT_AXES", 15, "T", 1),
            ("O_HIER_ALT_AXES", 32, "O", 1),
        ] {
            let s = builtin(name).unwrap();
            assert_eq!(s.pulse_count(), pulses, "{name}");
            let g = frame_group(&s);
            assert_eq!(g.name(), group, "{name}");
            assert_eq!(s.frame_multiplicity(&g), Some(mult), "{name}");
            assert!(s.net_rotation().is_identity(), "{name}");
        }
        assert!(builtin("NOPE").is_err());
        assert!(builtin("LG3n(0)").is_err());
    }

    #[test]
    fn lg3_axis_and_angle() {
        let s = builtin("LG3").unwrap();
        for p in s.pulses() {
            assert!((p.angle - 2.0 * PI / 3.0).abs() < 1e-15);
            assert!(p.axis.iter().zip([-1.0, 1.0, 1.0]).all(|(a, b)| (a - b / 3f64.sqrt()).abs() < 1e-15));
        }
    }

    #[test]
    fn teddy_order_and_sense() {
        let s = builtin("TEDDY").unwrap();
        let angles: Vec<f64> = s.pulses().map(|p| p.angle).collect();
        assert_eq!(angles, vec![PI, -PI, PI, -PI, -PI, PI, -PI, PI]);
        let n2 = s.pulses().nth(1).unwrap().axis;
        assert!((n2[1] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tdd_axes_generate_tetrahedral_group() {
        let [n1, n2, n3] = tdd_axes();
        let a = GroupElement::from_axis_angle(n1, 2.0 * PI / 3.0).unwrap();
        let b = GroupElement::from_axis_angle(n2, 2.0 * PI / 3.0).unwrap();
        let ab = a.compose(&b);
        assert!(ab.compose(&ab).approx_eq(&GroupElement::IDENTITY, 1e-12));
        let t = PointGroup::generated_by(&[a, b]).unwrap();
        assert_eq!(t.name(), "T");
        assert!(t.contains(&GroupElement::from_axis_angle(n3, PI).unwrap()));
        // n3 is the tilted z axis, n1 and n2 are C3 axes at the magic angle to it
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((n3[2] - phi / (phi + 2.0).sqrt()).abs() < 1e-14);
        let d = n1[0] * n3[0] + n1[1] * n3[1] + n1[2] * n3[2];
        assert!((d.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn c3d2_layout() {
        let s = builtin("C3D2").unwrap();
        assert_eq!(s.wait_count(), 12);
        assert_eq!(s.merged().pulse_count(), 12);
        // consecutive π_y and the C3 pulse merge into a tetrahedral rotation
        let m = s.merged();
        let t = frame_group(&s);
        for p in m.pulses() {
            assert!(t.elements.iter().any(|e| e.approx_eq(&p.element(), SNAP)));
        }
        assert_eq!(s.meta.layers, vec!["D2", "C3"]);
    }

    #[test]
    fn synthesis_reaches_catalogued_orderings() {
        use crate::sequence::{cayley_graph, euler_sequence, hamiltonian_cycles, EdgeOrder};
        let (n1, n2) = four_pulse_axes(1.0);
        let gens = [("a".to_string(), Pulse::ideal(n1, PI)), ("b".to_string(), Pulse::ideal(n2, -PI))];
        let d2 = PointGroup::generated_by(&[gens[0].1.element(), gens[1].1.element()]).unwrap();
        let g = cayley_graph(&d2, &gens).unwrap();
        let teddy = euler_sequence(&g, 1.0, g.identity, EdgeOrder::RotateLabels);
        assert_eq!(teddy.items, builtin("TEDDY").unwrap().items);

        let [a, b, c] = tdd_axes();
        let third = 2.0 * PI / 3.0;
        let t = PointGroup::generated_by(&[Pulse::ideal(a, third).element(), Pulse::ideal(b, third).element()]).unwrap();
        let gens = [
            ("a".to_string(), Pulse::ideal(a, third)),
            ("b".to_string(), Pulse::ideal(b, third)),
            ("ā".to_string(), Pulse::ideal(a, -third)),
            ("b̄".to_string(), Pulse::ideal(b, -third)),
        ];
        let g = cayley_graph(&t, &gens).unwrap();
        let tdd1 = vec![0, 1, 0, 0, 3, 2, 2, 3, 3, 0, 0, 3];
        assert!(hamiltonian_cycles(&g, usize::MAX).contains(&tdd1));
        assert_eq!(g.sequence_from_labels(&tdd1, 1.0, "x").items, builtin("TDD1").unwrap().items);

        let gens = [
            ("b".to_string(), Pulse::ideal(b, third)),
            ("c".to_string(), Pulse::ideal(c, PI)),
            ("b̄".to_string(), Pulse::ideal(b, -third)),
        ];
        let g = cayley_graph(&t, &gens).unwrap();
        let tdd2 = vec![1, 0, 0, 1, 2, 2, 1, 0, 0, 1, 2, 2];
        let walk = g.walk(g.identity, &tdd2).unwrap();
        assert_eq!(walk.last(), Some(&g.identity));
        assert!(hamiltonian_cycles(&g, usize::MAX).contains(&tdd2));
        assert_eq!(g.sequence_from_labels(&tdd2, 1.0, "x").items, builtin("TDD2").unwrap().items);
    }
}
