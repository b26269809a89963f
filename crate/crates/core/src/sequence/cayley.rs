use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Item, Pulse, PulseSequence, SequenceMeta};
use crate::pointgroup::{GroupElement, PointGroup, SNAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CayleyError {
    #[error("generator '{0}' is not an element of the group")]
    NotInGroup(String),
    #[error("generators only generate {generated} (order {order})")]
    NonGenerating { generated: String, order: usize },
    #[error("no Hamiltonian cycle exists for these generators")]
    NoHamiltonianCycle,
    #[error("label sequence leaves the graph or does not close")]
    InvalidWalk,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub label: String,
    pub pulse: Pulse,
    pub element: GroupElement,
}

/// Directed graph with an edge `v → γ·v` for every vertex `v` and generator `γ`.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    pub group: PointGroup,
    pub generators: Vec<Generator>,
    /// `next[v][k]` is the target of the `k`-labelled edge out of `v`.
    pub next: Vec<Vec<usize>>,
    pub identity: usize,
}

/// Tie-break used when several unused edges leave a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeOrder {
    #[default]
    LowestIndex,
    /// Start from the generator after the label of the arriving edge.
    RotateLabels,
}

pub fn cayley_graph(group: &PointGroup, generators: &[(String, Pulse)]) -> Result<CayleyGraph, CayleyError> {
    let gens: Vec<Generator> = generators
        .iter()
        .map(|(label, pulse)| {
            let element = pulse.element();
            if group.contains(&element) {
                Ok(Generator { label: label.clone(), pulse: *pulse, element })
            } else {
                Err(CayleyError::NotInGroup(label.clone()))
            }
        })
        .collect::<Result<_, _>>()?;
    let elements: Vec<GroupElement> = gens.iter().map(|g| g.element).collect();
    let generated = PointGroup::generated_by(&elements).map_err(|_| CayleyError::NotInGroup("?".into()))?;
    if generated.order() != group.order() {
        return Err(CayleyError::NonGenerating { generated: generated.name(), order: generated.order() });
    }
    let find = |g: &GroupElement| group.elements.iter().position(|e| e.approx_eq(g, SNAP)).expect("closed under generators");
    let next = group.elements.iter().map(|v| gens.iter().map(|g| find(&g.element.compose(v))).collect()).collect();
    let identity = group.elements.iter().position(GroupElement::is_identity).expect("identity present");
    Ok(CayleyGraph { group: group.clone(), generators: gens, next, identity })
}

impl CayleyGraph {
    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    pub fn edge_count(&self) -> usize {
        self.next.len() * self.generators.len()
    }

    /// Vertices visited by following `labels` from `start`.
    pub fn walk(&self, start: usize, labels: &[usize]) -> Result<Vec<usize>, CayleyError> {
        let mut v = start;
        let mut out = vec![v];
        for &l in labels {
            v = *self.next.get(v).and_then(|row| row.get(l)).ok_or(CayleyError::InvalidWalk)?;
            out.push(v);
        }
        Ok(out)
    }

    /// Wait-then-pulse for every label.
    pub fn sequence_from_labels(&self, labels: &[usize], tau0: f64, name: &str) -> PulseSequence {
        let items = labels
            .iter()
            .flat_map(|&l| [Item::Wait { duration: tau0 }, Item::Pulse(self.generators[l].pulse)])
            .collect();
        PulseSequence {
            items,
            meta: SequenceMeta {
                name: name.to_string(),
                group: Some(self.group.name()),
                generators: self.generators.iter().map(|g| g.label.clone()).collect(),
                layers: Vec::new(),
            },
        }
    }

    /// Closed walk using every directed edge once (Hierholzer).
    pub fn euler_labels(&self, start: usize, order: EdgeOrder) -> Vec<usize> {
        let k = self.generators.len();
        let mut used = vec![vec![false; k]; self.vertex_count()];
        let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
        let mut labels = Vec::with_capacity(self.edge_count());
        while let Some(&(v, arrived)) = stack.last() {
            let first = match (order, arrived) {
                (EdgeOrder::RotateLabels, Some(l)) => l + 1,
                _ => 0,
            };
            match (0..k).map(|i| (first + i) % k).find(|&g| !used[v][g]) {
                Some(g) => {
                    used[v][g] = true;
                    stack.push((self.next[v][g], Some(g)));
                }
                None => {
                    stack.pop();
                    if let Some(l) = arrived {
                        labels.push(l);
                    }
                }
            }
        }
        labels.reverse();
        labels
    }

    /// Up to `limit` Hamiltonian cycles from the identity, as label sequences
    /// whose last label closes the cycle. `seed` shuffles the search order.
    pub fn hamiltonian_cycles(&self, limit: usize, seed: Option<u64>) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let k = self.generators.len();
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let orders: Vec<Vec<usize>> = (0..n)
            .map(|_| {
                let mut o: Vec<usize> = (0..k).collect();
                if let Some(r) = rng.as_mut() {
                    o.shuffle(r);
                }
                o
            })
            .collect();
        let mut found = Vec::new();
        let mut visited = vec![false; n];
        visited[self.identity] = true;
        let mut path = Vec::with_capacity(n);
        self.extend_cycle(self.identity, 1, &orders, &mut visited, &mut path, &mut found, limit);
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_cycle(
        &self,
        v: usize,
        depth: usize,
        orders: &[Vec<usize>],
        visited: &mut [bool],
        path: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if found.len() >= limit {
            return;
        }
        let n = self.vertex_count();
        for &g in &orders[v] {
            let w = self.next[v][g];
            if depth == n {
                if w == self.identity {
                    path.push(g);
                    found.push(path.clone());
                    path.pop();
                    if found.len() >= limit {
                        return;
                    }
                }
                continue;
            }
            if visited[w] {
                continue;
            }
            visited[w] = true;
            path.push(g);
            self.extend_cycle(w, depth + 1, orders, visited, path, found, limit);
            path.pop();
            visited[w] = false;
            if found.len() >= limit {
                return;
            }
        }
    }
}

/// Eulerian sequence: `|G|·|Γ|` pulses whose frames cover `G` `|Γ|` times.
pub fn euler_sequence(graph: &CayleyGraph, tau0: f64, start: usize, order: EdgeOrder) -> PulseSequence {
    let labels = graph.euler_labels(start, order);
    graph.sequence_from_labels(&labels, tau0, &format!("Euler({})", graph.group.name()))
}

/// Hamiltonian sequence: `|G|` pulses whose frames visit each element once.
pub fn hamiltonian_sequence(graph: &CayleyGraph, tau0: f64, seed: Option<u64>) -> Result<PulseSequence, CayleyError> {
    let labels = graph.hamiltonian_cycles(1, seed).pop().ok_or(CayleyError::NoHamiltonianCycle)?;
    Ok(graph.sequence_from_labels(&labels, tau0, &format!("Hamiltonian({})", graph.group.name())))
}

/// All Hamiltonian cycles up to `limit`.
pub fn hamiltonian_cycles(graph: &CayleyGraph, limit: usize) -> Vec<Vec<usize>> {
    graph.hamiltonian_cycles(limit, None)
}
