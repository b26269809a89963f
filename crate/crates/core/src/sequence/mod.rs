//! Pulse sequences: representation, nesting, composite-pulse merging and the
//! toggling frames they induce.

mod builtin;
mod cayley;
mod dsl;

pub use builtin::{builtin, builtin_names, tdd_axes, BuiltinError};
pub use cayley::{cayley_graph, euler_sequence, hamiltonian_cycles, hamiltonian_sequence, CayleyError, CayleyGraph, EdgeOrder, Generator};
pub use dsl::{parse, parse_with, print, ParseError, ParseOptions};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointgroup::{GroupElement, PointGroup, SNAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("sequence has no waits to replace")]
    NoWaits,
    #[error("axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("{0} pulse needs a positive duration")]
    ZeroDuration(Profile),
    #[error("empty sequence")]
    Empty,
}

/// Shape of the control amplitude during a pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Ideal,
    Rect,
    Sin2,
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Profile::Ideal => "ideal",
            Profile::Rect => "rect",
            Profile::Sin2 => "sin2",
        })
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ideal" => Ok(Profile::Ideal),
            "rect" => Ok(Profile::Rect),
            "sin2" => Ok(Profile::Sin2),
            _ => Err(format!("unknown profile '{s}'")),
        }
    }
}

impl Profile {
    /// Fraction of the total angle accumulated by time `s·τp`, `s ∈ [0, 1]`.
    pub fn accumulated(&self, s: f64) -> f64 {
        match self {
            Profile::Ideal | Profile::Rect => s,
            Profile::Sin2 => s - (2.0 * std::f64::consts::PI * s).sin() / (2.0 * std::f64::consts::PI),
        }
    }

    /// Normalized amplitude at `s·τp`; integrates to 1 over `[0, 1]`.
    pub fn amplitude(&self, s: f64) -> f64 {
        match self {
            Profile::Ideal | Profile::Rect => 1.0,
            Profile::Sin2 => 2.0 * (std::f64::consts::PI * s).sin().powi(2),
        }
    }
}

/// Rotation by `angle` (right-handed) about `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub axis: [f64; 3],
    pub angle: f64,
    pub profile: Profile,
    pub duration: f64,
}

impl Pulse {
    /// Instantaneous pulse; the axis is normalized.
    pub fn ideal(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        Pulse { axis: axis.map(|v| v / n), angle, profile: Profile::Ideal, duration: 0.0 }
    }

    pub fn shaped(self, profile: Profile, duration: f64) -> Result<Self, SequenceError> {
        let p = Pulse { profile, duration, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        let n = (self.axis.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
            return Err(SequenceError::NonUnitAxis(n));
        }
        if self.duration < 0.0 || !self.duration.is_finite() {
            return Err(SequenceError::NegativeDuration(self.duration));
        }
        if self.profile != Profile::Ideal && self.duration == 0.0 {
            return Err(SequenceError::ZeroDuration(self.profile));
        }
        Ok(())
    }

    pub fn is_ideal(&self) -> bool {
        self.profile == Profile::Ideal || self.duration == 0.0
    }

    pub fn element(&self) -> GroupElement {
        GroupElement::from_axis_angle(self.axis, self.angle).expect("pulse axis is a unit vector")
    }

    pub fn inverse(&self) -> Self {
        Pulse { angle: -self.angle, ..*self }
    }
}

/// Composite of two ideal pulses, `p1` first. The returned angle lies in `[0, π]`.
pub fn merge_pulses(p1: &Pulse, p2: &Pulse) -> Pulse {
    let (axis, angle) = p2.element().compose(&p1.element()).axis_angle();
    Pulse::ideal(axis, angle)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Item {
    Wait { duration: f64 },
    Pulse(Pulse),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub name: String,
    /// Group the frames are meant to cover.
    pub group: Option<String>,
    pub generators: Vec<String>,
    /// Names of nested layers, innermost first.
    pub layers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub items: Vec<Item>,
    pub meta: SequenceMeta,
}

/// How pulse durations are bound when a template gets concrete timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseTiming {
    Ideal,
    /// Every pulse lasts `duration` seconds.
    Fixed { profile: Profile, duration: f64 },
    /// Duration `|θ| / amplitude`, so rotation rates are equal.
    Amplitude { profile: Profile, amplitude: f64 },
}

#[derive(Debug, Clone, Serialize)]
struct ScheduleEntry {
    #[serde(rename = "type")]
    kind: &'static str,
    start: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    duration: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    profile: Option<Profile>,
}

impl PulseSequence {
    pub fn new(name: impl Into<String>, items: Vec<Item>) -> Result<Self, SequenceError> {
        let seq = PulseSequence { items, meta: SequenceMeta { name: name.into(), ..Default::default() } };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        if self.items.is_empty() {
            return Err(SequenceError::Empty);
        }
        for item in &self.items {
            match item {
                Item::Wait { duration } if *duration < 0.0 || !duration.is_finite() => {
                    return Err(SequenceError::NegativeDuration(*duration))
                }
                Item::Pulse(p) => p.validate()?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn with_group(mut self, group: &str, generators: &[&str]) -> Self {
        self.meta.group = Some(group.to_string());
        self.meta.generators = generators.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.meta.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.items.iter().filter_map(|i| match i {
            Item::Pulse(p) => Some(p),
            Item::Wait { .. } => None,
        })
    }

    pub fn pulse_count(&self) -> usize {
        self.pulses().count()
    }

    pub fn wait_count(&self) -> usize {
        self.items.iter().filter(|i| matches!(i, Item::Wait { .. })).count()
    }

    pub fn is_ideal(&self) -> bool {
        self.pulses().all(Pulse::is_ideal)
    }

    pub fn duration(&self) -> f64 {
        self.items
            .iter()
            .map(|i| match i {
                Item::Wait { duration } => *duration,
                Item::Pulse(p) => p.duration,
            })
            .sum()
    }

    /// Net rotation of all pulses.
    pub fn net_rotation(&self) -> GroupElement {
        self.pulses().fold(GroupElement::IDENTITY, |acc, p| p.element().compose(&acc))
    }

    /// Frame `g_k` (product of the preceding pulses) and length of every wait.
    pub fn frames(&self) -> Vec<(GroupElement, f64)> {
        let mut g = GroupElement::IDENTITY;
        let mut out = Vec::new();
        for item in &self.items {
            match item {
                Item::Wait { duration } => out.push((g, *duration)),
                Item::Pulse(p) => g = p.element().compose(&g),
            }
        }
        out
    }

    /// `Some(m)` when the frames run over `group` exactly `m` times each,
    /// with equal wait lengths.
    pub fn frame_multiplicity(&self, group: &PointGroup) -> Option<usize> {
        let frames = self.frames();
        let tau = frames.first()?.1;
        if frames.iter().any(|(_, t)| (t - tau).abs() > 1e-12 * tau.abs().max(1.0)) {
            return None;
        }
        let mut counts = vec![0usize; group.order()];
        for (g, _) in &frames {
            let k = group.elements.iter().position(|e| e.approx_eq(g, SNAP))?;
            counts[k] += 1;
        }
        let m = counts[0];
        (m > 0 && counts.iter().all(|&c| c == m)).then_some(m)
    }

    /// Time-reversed, sign-inverted copy.
    pub fn reversed(&self) -> PulseSequence {
        let items = self
            .items
            .iter()
            .rev()
            .map(|i| match i {
                Item::Pulse(p) => Item::Pulse(p.inverse()),
                w => *w,
            })
            .collect();
        let mut meta = self.meta.clone();
        meta.name = format!("({})†", self.meta.name);
        PulseSequence { items, meta }
    }

    pub fn then(&self, other: &PulseSequence) -> PulseSequence {
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        let mut meta = self.meta.clone();
        meta.name = format!("{}{}", self.meta.name, other.meta.name);
        PulseSequence { items, meta }
    }

    pub fn repeated(&self, n: usize) -> PulseSequence {
        let mut items = Vec::with_capacity(self.items.len() * n);
        for _ in 0..n {
            items.extend_from_slice(&self.items);
        }
        PulseSequence { items, meta: self.meta.clone() }
    }

    /// Replaces consecutive ideal pulses by their composite.
    pub fn merged(&self) -> PulseSequence {
        let mut items: Vec<Item> = Vec::new();
        for item in &self.items {
            if let (Some(Item::Pulse(prev)), Item::Pulse(p)) = (items.last(), item) {
                if prev.is_ideal() && p.is_ideal() {
                    let m = merge_pulses(prev, p);
                    items.pop();
                    if m.angle.abs() > 1e-12 {
                        items.push(Item::Pulse(m));
                    }
                    continue;
                }
            }
            items.push(*item);
        }
        PulseSequence { items, meta: self.meta.clone() }
    }

    /// Binds wait lengths and pulse durations.
    pub fn with_timing(&self, tau0: f64, timing: PulseTiming) -> Result<PulseSequence, SequenceError> {
        if tau0 < 0.0 || !tau0.is_finite() {
            return Err(SequenceError::NegativeDuration(tau0));
        }
        let items = self
            .items
            .iter()
            .map(|i| match i {
                Item::Wait { .. } => Ok(Item::Wait { duration: tau0 }),
                Item::Pulse(p) => {
                    let p = match timing {
                        PulseTiming::Ideal => Pulse { profile: Profile::Ideal, duration: 0.0, ..*p },
                        PulseTiming::Fixed { profile, duration } => p.shaped(profile, duration)?,
                        PulseTiming::Amplitude { profile, amplitude } => p.shaped(profile, p.angle.abs() / amplitude)?,
                    };
                    Ok(Item::Pulse(p))
                }
            })
            .collect::<Result<Vec<_>, SequenceError>>()?;
        Ok(PulseSequence { items, meta: self.meta.clone() })
    }

    /// JSON array of `{type, start, axis, angle, duration, profile}` entries.
    pub fn to_schedule_json(&self) -> String {
        let mut t = 0.0;
        let entries: Vec<ScheduleEntry> = self
            .items
            .iter()
            .map(|i| {
                let e = match i {
                    Item::Wait { duration } => {
                        ScheduleEntry { kind: "wait", start: t, axis: None, angle: None, duration: *duration, profile: None }
                    }
                    Item::Pulse(p) => ScheduleEntry {
                        kind: "pulse",
                        start: t,
                        axis: Some(p.axis),
                        angle: Some(p.angle),
                        duration: p.duration,
                        profile: Some(p.profile),
                    },
                };
                t += e.duration;
                e
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("schedule serializes")
    }
}

/// Replaces every wait of `outer` by one pass of `inner`.
pub fn nest(inner: &PulseSequence, outer: &PulseSequence) -> Result<PulseSequence, SequenceError> {
    if outer.wait_count() == 0 {
        return Err(SequenceError::NoWaits);
    }
    let mut items = Vec::with_capacity(outer.pulse_count() + outer.wait_count() * inner.len());
    for item in &outer.items {
        match item {
            Item::Wait { .. } => items.extend_from_slice(&inner.items),
            p => items.push(*p),
        }
    }
    let mut layers = if inner.meta.layers.is_empty() { vec![inner.meta.name.clone()] } else { inner.meta.layers.clone() };
    layers.push(outer.meta.name.clone());
    let meta = SequenceMeta {
        name: format!("{}[{}]", outer.meta.name, inner.meta.name),
        group: None,
        generators: Vec::new(),
        layers,
    };
    Ok(PulseSequence { items, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn merge_matches_composite_rotation() {
        let s3 = 3f64.sqrt();
        let p = merge_pulses(&Pulse::ideal([0.0, 1.0, 0.0], PI), &Pulse::ideal([1.0, 1.0, 1.0], 2.0 * PI / 3.0));
        assert!((p.angle - 2.0 * PI / 3.0).abs() < 1e-12);
        for (a, b) in p.axis.iter().zip([1.0 / s3, -1.0 / s3, -1.0 / s3]) {
            assert!((a - b).abs() < 1e-12);
        }
        let x = Pulse::ideal([1.0, 0.0, 0.0], PI);
        assert!(merge_pulses(&x, &x).angle.abs() < 1e-12);
        let q = Pulse::ideal([0.3, -0.2, 0.9], 1.1);
        let m = merge_pulses(&q, &Pulse::ideal([1.0, 0.0, 0.0], 0.0));
        assert!(m.element().approx_eq(&q.element(), 1e-12));
    }

    #[test]
    fn nest_replaces_waits() {
        let w = Item::Wait { duration: 1.0 };
        let inner = PulseSequence::new("A", vec![w, Item::Pulse(Pulse::ideal([1.0, 0.0, 0.0], PI))]).unwrap();
        let outer = PulseSequence::new("B", vec![w, Item::Pulse(Pulse::ideal([0.0, 0.0, 1.0], PI)), w]).unwrap();
        let n = nest(&inner, &outer).unwrap();
        assert_eq!(n.len(), outer.pulse_count() + outer.wait_count() * inner.len());
        assert_eq!(n.meta.layers, vec!["A", "B"]);
        let single = PulseSequence::new("W", vec![w]).unwrap();
        assert_eq!(nest(&inner, &single).unwrap().items, inner.items);
        let no_waits = PulseSequence::new("P", vec![Item::Pulse(Pulse::ideal([1.0, 0.0, 0.0], PI))]).unwrap();
        assert_eq!(nest(&inner, &no_waits), Err(SequenceError::NoWaits));
    }

    #[test]
    fn reversal_inverts_net_rotation() {
        let w = Item::Wait { duration: 1.0 };
        let s = PulseSequence::new(
            "S",
            vec![w, Item::Pulse(Pulse::ideal([1.0, 2.0, 0.5], 0.7)), w, Item::Pulse(Pulse::ideal([0.0, 1.0, 0.0], 1.9))],
        )
        .unwrap();
        let both = s.then(&s.reversed());
        assert!(both.net_rotation().is_identity());
        assert_eq!(s.reversed().reversed().items, s.items);
    }

    #[test]
    fn timing_binds_durations() {
        let s = PulseSequence::new("S", vec![Item::Wait { duration: 1.0 }, Item::Pulse(Pulse::ideal([1.0, 0.0, 0.0], -PI))]).unwrap();
        let t = s.with_timing(0.0, PulseTiming::Amplitude { profile: Profile::Rect, amplitude: 2.0 }).unwrap();
        assert_eq!(t.duration(), PI / 2.0);
        assert!(s.with_timing(-1.0, PulseTiming::Ideal).is_err());
        assert!(s.with_timing(1.0, PulseTiming::Fixed { profile: Profile::Sin2, duration: 0.0 }).is_err());
    }

    #[test]
    fn sin2_profile_is_normalized_and_symmetric() {
        let p = Profile::Sin2;
        assert!((p.accumulated(1.0) - 1.0).abs() < 1e-15);
        for s in [0.1, 0.3, 0.45] {
            assert!((p.amplitude(s) - p.amplitude(1.0 - s)).abs() < 1e-14);
            assert!((p.accumulated(s) + p.accumulated(1.0 - s) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn schedule_json_lists_items() {
        let s = PulseSequence::new("S", vec![Item::Wait { duration: 1.0 }, Item::Pulse(Pulse::ideal([1.0, 0.0, 0.0], PI))]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_schedule_json()).unwrap();
        assert_eq!(v[0]["type"], "wait");
        assert_eq!(v[1]["type"], "pulse");
        assert_eq!(v[1]["start"], 1.0);
    }
}
