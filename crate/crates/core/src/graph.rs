//! Gait graphs (directed cycles of locomotion domains) and their strong
//! product for two agents.

use crate::dynamics::ContactSet;
use serde::{Deserialize, Serialize};

/// How a guard is evaluated. Guards cross zero from positive to negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GuardSpec {
    /// Height of a named point above the ground plane.
    SwingHeight { point: String },
    /// Vertical component of a named contact's reaction force.
    NormalForceZero { contact: String },
    /// Scaled time since domain entry reaches 1.
    PhaseComplete,
}

/// Reset applied on the outgoing edge of a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResetKind {
    /// Contact break: positions and velocities carry over unchanged.
    Identity,
    /// New contact: rigid plastic impact on the next domain's contact set.
    Impact,
}

/// One continuous-time domain of the gait cycle.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub name: String,
    pub contacts: ContactSet,
    pub guard: GuardSpec,
    /// Reset kind of the outgoing edge to the next domain on the cycle.
    pub reset: ResetKind,
}

/// A directed cycle of locomotion domains. Vertex `i` has the unique outgoing
/// edge `i -> (i + 1) mod n`.
#[derive(Debug, Clone)]
pub struct GaitGraph {
    pub domains: Vec<DomainSpec>,
}

impl GaitGraph {
    pub fn new(domains: Vec<DomainSpec>) -> Self {
        assert!(!domains.is_empty(), "gait graph needs at least one domain");
        Self { domains }
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn domain(&self, v: usize) -> &DomainSpec {
        &self.domains[v]
    }
}

/// The next-domain function mu: the unique successor on the cycle.
pub fn next_domain(graph: &GaitGraph, v: usize) -> usize {
    assert!(v < graph.len());
    (v + 1) % graph.len()
}

/// Which strong-product condition an edge satisfies. On a cycle of length
/// one the conditions coincide, so they are stored as flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeConditions {
    /// 1) v = v' and (w -> w') is an edge.
    pub agent2_steps: bool,
    /// 2) (v -> v') is an edge and w = w'.
    pub agent1_steps: bool,
    /// 3) both (v -> v') and (w -> w') are edges.
    pub both_step: bool,
}

impl EdgeConditions {
    /// The lowest-numbered satisfied condition (1, 2, or 3).
    pub fn primary(&self) -> u8 {
        if self.agent2_steps {
            1
        } else if self.agent1_steps {
            2
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductEdge {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub conditions: EdgeConditions,
}

/// Strong product G x G: vertices are ordered pairs, edges follow the three
/// conditions (one agent steps, the other steps, or both step together).
#[derive(Debug, Clone)]
pub struct ProductGraph {
    pub cycle_len: usize,
    pub vertices: Vec<(usize, usize)>,
    pub edges: Vec<ProductEdge>,
}

impl ProductGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Classify a candidate transition; `None` if it is not an edge.
    pub fn classify(&self, from: (usize, usize), to: (usize, usize)) -> Option<EdgeConditions> {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map(|e| e.conditions)
    }
}

/// Builds the strong product of a gait cycle with itself. Vertices and edges
/// are ordered lexicographically by (v, w) pairs, so output is deterministic.
pub fn strong_product(graph: &GaitGraph) -> ProductGraph {
    let n = graph.len();
    let mut vertices = Vec::with_capacity(n * n);
    for v in 0..n {
        for w in 0..n {
            vertices.push((v, w));
        }
    }
    let mut edges = Vec::new();
    for &(v, w) in &vertices {
        let mv = next_domain(graph, v);
        let mw = next_domain(graph, w);
        // candidate successors, deduplicated (a 1-cycle collapses all three)
        let mut seen: Vec<(usize, usize)> = Vec::with_capacity(3);
        for cand in [(v, mw), (mv, w), (mv, mw)] {
            if !seen.contains(&cand) {
                seen.push(cand);
            }
        }
        for (vp, wp) in seen {
            let agent1_edge = vp == mv;
            let agent2_edge = wp == mw;
            let conditions = EdgeConditions {
                agent2_steps: v == vp && agent2_edge,
                agent1_steps: agent1_edge && w == wp,
                both_step: agent1_edge && agent2_edge,
            };
            edges.push(ProductEdge {
                from: (v, w),
                to: (vp, wp),
                conditions,
            });
        }
    }
    ProductGraph {
        cycle_len: n,
        vertices,
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> GaitGraph {
        GaitGraph::new(
            (0..n)
                .map(|i| DomainSpec {
                    name: format!("d{i}"),
                    contacts: ContactSet::empty(),
                    guard: GuardSpec::PhaseComplete,
                    reset: ResetKind::Identity,
                })
                .collect(),
        )
    }

    /// Brute-force edge enumeration straight from the three conditions.
    fn brute_force_edges(n: usize) -> Vec<((usize, usize), (usize, usize))> {
        let is_edge = |a: usize, b: usize| (a + 1) % n == b;
        let mut out = Vec::new();
        for v in 0..n {
            for w in 0..n {
                for vp in 0..n {
                    for wp in 0..n {
                        let c1 = v == vp && is_edge(w, wp);
                        let c2 = is_edge(v, vp) && w == wp;
                        let c3 = is_edge(v, vp) && is_edge(w, wp);
                        if c1 || c2 || c3 {
                            out.push(((v, w), (vp, wp)));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn eight_cycle_counts() {
        let product = strong_product(&cycle(8));
        assert_eq!(product.vertex_count(), 64);
        assert_eq!(product.edge_count(), 192);
    }

    #[test]
    fn one_vertex_self_loop() {
        let product = strong_product(&cycle(1));
        assert_eq!(product.vertex_count(), 1);
        assert_eq!(product.edge_count(), 1);
        let conds = product.classify((0, 0), (0, 0)).unwrap();
        assert!(conds.agent1_steps && conds.agent2_steps && conds.both_step);
    }

    #[test]
    fn two_cycle_matches_brute_force() {
        let product = strong_product(&cycle(2));
        assert_eq!(product.vertex_count(), 4);
        assert_eq!(product.edge_count(), 12);
        let brute = brute_force_edges(2);
        assert_eq!(product.edge_count(), brute.len());
        for e in &product.edges {
            assert!(brute.contains(&(e.from, e.to)));
        }
    }

    #[test]
    fn next_domain_wraps_and_composes() {
        let g = cycle(8);
        assert_eq!(next_domain(&g, 7), 0);
        let mut v = 3;
        for _ in 0..8 {
            v = next_domain(&g, v);
        }
        assert_eq!(v, 3);
    }

    #[test]
    fn edge_classification_condition_two() {
        // ((3,5) -> (4,5)): agent 1 steps, agent 2 stays
        let product = strong_product(&cycle(8));
        let conds = product.classify((3, 5), (4, 5)).unwrap();
        assert_eq!(conds.primary(), 2);
        assert!(conds.agent1_steps && !conds.agent2_steps && !conds.both_step);
    }

    #[test]
    fn cycle_product_has_out_degree_three() {
        for n in [2usize, 3, 5, 8] {
            let product = strong_product(&cycle(n));
            assert_eq!(product.vertex_count(), n * n);
            assert_eq!(product.edge_count(), 3 * n * n);
            for &(v, w) in &product.vertices {
                let деg = product.edges.iter().filter(|e| e.from == (v, w)).count();
                assert_eq!(деg, 3);
            }
        }
    }
}
