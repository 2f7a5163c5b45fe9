//! Directed multigraph growth: one edge per step, three attachment rules.
//!
//! The graph keeps flat per-edge endpoint lists next to the degree counters.
//! Preferential selection is then O(1) and exact: the total in-degree mass
//! of a graph with `n` edges is `n`, so picking "the target of a uniformly
//! random edge" with probability `n/(n + delta_in * N)` and a uniformly
//! random node otherwise reproduces `(D_in(w) + delta_in) / (n + delta_in
//! N)` without any weighted index structure. Self-loops and multi-edges are
//! allowed (both endpoints of a beta step are drawn independently).
//!
//! Runs are deterministic: the RNG is ChaCha8 seeded from the config's
//! 64-bit seed, and a fixed draw order (rule, then source, then target, each
//! selection consuming one uniform for the mixture and one for the pick)
//! makes edge lists reproduce bit-for-bit across platforms. Independent
//! replicates should use distinct seeds or distinct ChaCha streams.

use crate::params::ModelParams;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("target_edges = {target} must exceed the initial edge count {initial}")]
    TargetTooSmall { target: usize, initial: usize },
    #[error("a zero degree offset requires an initial graph with more than one edge")]
    NeedsRicherInitialGraph,
    #[error("initial graph must have at least one node")]
    EmptyInitialGraph,
    #[error("initial edge ({from_node}, {to_node}) references a node >= n_nodes = {n_nodes}")]
    BadInitialEdge {
        from_node: u32,
        to_node: u32,
        n_nodes: u32,
    },
}

/// Seed graph for the growth process.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialGraph {
    /// Two nodes joined by the edges 0→1 and 1→0. Satisfies every offset
    /// configuration's preconditions.
    #[default]
    TwoCycle,
    /// Arbitrary node count and edge list; nodes may start isolated.
    Custom { n_nodes: u32, edges: Vec<(u32, u32)> },
}

/// Growth run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total edge count of the returned graph (including initial edges).
    pub target_edges: usize,
    pub seed: u64,
    pub initial_graph: InitialGraph,
}

impl SimConfig {
    pub fn new(target_edges: usize, seed: u64) -> Self {
        SimConfig {
            target_edges,
            seed,
            initial_graph: InitialGraph::TwoCycle,
        }
    }
}

/// Growing directed multigraph with flat edge-endpoint lists.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedGraph {
    in_degree: Vec<u32>,
    out_degree: Vec<u32>,
    edge_sources: Vec<u32>,
    edge_targets: Vec<u32>,
}

impl DirectedGraph {
    /// Builds a graph from explicit edges; node ids must be below `n_nodes`.
    pub fn from_edges(n_nodes: u32, edges: &[(u32, u32)]) -> Result<Self, SimError> {
        if n_nodes == 0 {
            return Err(SimError::EmptyInitialGraph);
        }
        let mut g = DirectedGraph {
            in_degree: vec![0; n_nodes as usize],
            out_degree: vec![0; n_nodes as usize],
            edge_sources: Vec::with_capacity(edges.len()),
            edge_targets: Vec::with_capacity(edges.len()),
        };
        for &(s, t) in edges {
            if s >= n_nodes || t >= n_nodes {
                return Err(SimError::BadInitialEdge {
                    from_node: s,
                    to_node: t,
                    n_nodes,
                });
            }
            g.push_edge(s, t);
        }
        Ok(g)
    }

    pub fn two_cycle() -> Self {
        DirectedGraph::from_edges(2, &[(0, 1), (1, 0)]).expect("static edges")
    }

    pub fn n_nodes(&self) -> usize {
        self.in_degree.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_sources.len()
    }

    pub fn in_degree(&self, node: u32) -> u32 {
        self.in_degree[node as usize]
    }

    pub fn out_degree(&self, node: u32) -> u32 {
        self.out_degree[node as usize]
    }

    /// Edge endpoint pairs in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edge_sources
            .iter()
            .copied()
            .zip(self.edge_targets.iter().copied())
    }

    fn push_edge(&mut self, source: u32, target: u32) {
        self.edge_sources.push(source);
        self.edge_targets.push(target);
        self.out_degree[source as usize] += 1;
        self.in_degree[target as usize] += 1;
    }

    fn push_node(&mut self) -> u32 {
        let id = self.in_degree.len() as u32;
        self.in_degree.push(0);
        self.out_degree.push(0);
        id
    }
}

/// Picks an existing node with probability proportional to its in-degree
/// plus `delta_in`, by the exact two-part mixture: a uniformly random edge's
/// target with probability `n/(n + delta_in N)`, otherwise a uniformly
/// random node.
pub fn proportional_target<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    delta_in: f64,
    rng: &mut R,
) -> u32 {
    proportional_pick(&graph.edge_targets, graph.n_nodes(), delta_in, rng)
}

/// Out-degree analog of [`proportional_target`].
pub fn proportional_source<R: Rng + ?Sized>(
    graph: &DirectedGraph,
    delta_out: f64,
    rng: &mut R,
) -> u32 {
    proportional_pick(&graph.edge_sources, graph.n_nodes(), delta_out, rng)
}

fn proportional_pick<R: Rng + ?Sized>(
    endpoints: &[u32],
    n_nodes: usize,
    delta: f64,
    rng: &mut R,
) -> u32 {
    let n_edges = endpoints.len();
    debug_assert!(n_edges > 0 || delta > 0.0);
    let edge_branch = if delta == 0.0 {
        true
    } else {
        let total = n_edges as f64 + delta * n_nodes as f64;
        rng.gen::<f64>() * total < n_edges as f64
    };
    if edge_branch {
        endpoints[rng.gen_range(0..n_edges)]
    } else {
        rng.gen_range(0..n_nodes) as u32
    }
}

/// Grows a graph to exactly `target_edges` edges under the three-rule
/// dynamics, deterministically in the seed.
pub fn grow(params: &ModelParams<f64>, cfg: &SimConfig) -> Result<DirectedGraph, SimError> {
    let mut graph = match &cfg.initial_graph {
        InitialGraph::TwoCycle => DirectedGraph::two_cycle(),
        InitialGraph::Custom { n_nodes, edges } => DirectedGraph::from_edges(*n_nodes, edges)?,
    };
    if (params.delta_in == 0.0 || params.delta_out == 0.0) && graph.n_edges() <= 1 {
        return Err(SimError::NeedsRicherInitialGraph);
    }
    if cfg.target_edges <= graph.n_edges() {
        return Err(SimError::TargetTooSmall {
            target: cfg.target_edges,
            initial: graph.n_edges(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while graph.n_edges() < cfg.target_edges {
        let r: f64 = rng.gen();
        if r < params.alpha {
            // new source node, preferential target
            let target = proportional_target(&graph, params.delta_in, &mut rng);
            let source = graph.push_node();
            graph.push_edge(source, target);
        } else if r < params.alpha + params.beta {
            // both endpoints existing, drawn independently
            let source = proportional_source(&graph, params.delta_out, &mut rng);
            let target = proportional_target(&graph, params.delta_in, &mut rng);
            graph.push_edge(source, target);
        } else {
            // preferential source, new target node
            let source = proportional_source(&graph, params.delta_out, &mut rng);
            let target = graph.push_node();
            graph.push_edge(source, target);
        }
    }
    Ok(graph)
}

/// Sparse joint degree counts: `(in_degree, out_degree) -> number of nodes`.
/// The `(0, 0)` cell can only hold initially-isolated nodes, since growth
/// never creates a disconnected node.
pub fn joint_degree_counts(graph: &DirectedGraph) -> BTreeMap<(u32, u32), u64> {
    let mut counts = BTreeMap::new();
    for node in 0..graph.n_nodes() {
        let key = (graph.in_degree[node], graph.out_degree[node]);
        *counts.entry(key).or_insert(0u64) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> ModelParams<f64> {
        ModelParams::new(0.5, 0.5, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn two_cycle_counts() {
        let g = DirectedGraph::two_cycle();
        let counts = joint_degree_counts(&g);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&(1, 1)], 2);
    }

    #[test]
    fn one_alpha_step_from_two_cycle() {
        // the new node has degrees (0, 1); whichever node it points at moves
        // to (2, 1); the other keeps (1, 1)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut g = DirectedGraph::two_cycle();
        let target = proportional_target(&g, 1.0, &mut rng);
        let source = g.push_node();
        g.push_edge(source, target);
        let counts = joint_degree_counts(&g);
        assert_eq!(counts[&(0, 1)], 1);
        assert_eq!(counts[&(1, 1)], 1);
        assert_eq!(counts[&(2, 1)], 1);
    }

    #[test]
    fn degree_sums_equal_edge_count() {
        let g = grow(&p0(), &SimConfig::new(5000, 3)).unwrap();
        assert_eq!(g.n_edges(), 5000);
        let in_sum: u64 = (0..g.n_nodes()).map(|v| g.in_degree[v] as u64).sum();
        let out_sum: u64 = (0..g.n_nodes()).map(|v| g.out_degree[v] as u64).sum();
        assert_eq!(in_sum, 5000);
        assert_eq!(out_sum, 5000);
        // degree-sum identity through the counts map as well
        let counts = joint_degree_counts(&g);
        let total_nodes: u64 = counts.values().sum();
        assert_eq!(total_nodes as usize, g.n_nodes());
        let weighted: u64 = counts.iter().map(|(&(i, _), &c)| i as u64 * c).sum();
        assert_eq!(weighted, 5000);
    }

    #[test]
    fn growth_is_deterministic() {
        let a = grow(&p0(), &SimConfig::new(20_000, 42)).unwrap();
        let b = grow(&p0(), &SimConfig::new(20_000, 42)).unwrap();
        assert_eq!(a, b);
        let c = grow(&p0(), &SimConfig::new(20_000, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            grow(&p0(), &SimConfig::new(2, 1)),
            Err(SimError::TargetTooSmall { .. })
        ));
        let zero_offset = ModelParams::new(0.5, 0.5, 0.0, 0.0, 1.0).unwrap();
        let cfg = SimConfig {
            target_edges: 100,
            seed: 1,
            initial_graph: InitialGraph::Custom {
                n_nodes: 1,
                edges: vec![(0, 0)],
            },
        };
        assert!(matches!(
            grow(&zero_offset, &cfg),
            Err(SimError::NeedsRicherInitialGraph)
        ));
        let bad = InitialGraph::Custom {
            n_nodes: 2,
            edges: vec![(0, 5)],
        };
        assert!(matches!(
            DirectedGraph::from_edges(2, &[(0, 5)]),
            Err(SimError::BadInitialEdge { .. })
        ));
        drop(bad);
    }

    #[test]
    fn single_self_loop_always_selected() {
        let g = DirectedGraph::from_edges(1, &[(0, 0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            assert_eq!(proportional_target(&g, 3.0, &mut rng), 0);
            assert_eq!(proportional_source(&g, 0.5, &mut rng), 0);
        }
    }

    #[test]
    fn zero_offset_selects_pure_degree() {
        // delta_in = 0: always a uniform edge's target; node 1 owns both
        // edge-target slots here
        let g = DirectedGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            assert_eq!(proportional_target(&g, 0.0, &mut rng), 1);
        }
    }

    #[test]
    fn two_node_selection_probability() {
        // edges 1→2, 2→2 with delta_in = 1: node 2 selected with prob 3/4
        let g = DirectedGraph::from_edges(2, &[(0, 1), (1, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 1_000_000u32;
        let mut hits = 0u32;
        for _ in 0..n {
            if proportional_target(&g, 1.0, &mut rng) == 1 {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n as f64;
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((p_hat - 0.75).abs() <= 4.0 * sigma, "p_hat = {p_hat}");
    }

    #[test]
    fn mixture_matches_formula_on_a_fixed_graph() {
        // per-node selection frequencies over 10^6 draws against
        // (D_in + delta)/(n + delta N), within 4 sigma each
        let g = DirectedGraph::from_edges(3, &[(0, 1), (1, 2), (2, 1)]).unwrap();
        let delta = 0.7;
        let n = 1_000_000u32;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut freq = [0u32; 3];
        for _ in 0..n {
            freq[proportional_target(&g, delta, &mut rng) as usize] += 1;
        }
        let total_mass = g.n_edges() as f64 + delta * g.n_nodes() as f64;
        for node in 0..3u32 {
            let p = (g.in_degree(node) as f64 + delta) / total_mass;
            let p_hat = freq[node as usize] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (p_hat - p).abs() <= 4.0 * sigma,
                "node {node}: {p_hat} vs {p}"
            );
        }
    }

    #[test]
    fn node_count_converges_to_one_minus_beta() {
        let n = 100_000usize;
        let params = p0();
        let g = grow(&params, &SimConfig::new(n, 12)).unwrap();
        let ratio = g.n_nodes() as f64 / n as f64;
        let band = 4.0 * ((params.alpha + params.gamma) * params.beta / n as f64).sqrt();
        assert!(
            (ratio - (1.0 - params.beta)).abs() <= band,
            "N/n = {ratio}, band {band}"
        );
    }

    #[test]
    fn alpha_zero_with_zero_in_offset_keeps_in_degrees_small() {
        // alpha = 0 with delta_in = 0: every new node enters through a
        // gamma step with in-degree one, and only beta steps move in-mass.
        // The limiting in-marginal is p_i = 4/(i(i+1)(i+2)) for i >= 1, so
        // p_1 = 2/3 and 90% of the mass sits at i <= 3.
        let params = ModelParams::new(0.0, 0.5, 0.5, 0.0, 1.0).unwrap();
        assert!(params.tail_warnings().is_empty()); // gamma > 0 saves the in-tail
        let g = grow(&params, &SimConfig::new(50_000, 13)).unwrap();
        let counts = joint_degree_counts(&g);
        let total: u64 = counts.values().sum();
        let at_one: u64 = counts
            .iter()
            .filter(|(&(i, _), _)| i == 1)
            .map(|(_, &c)| c)
            .sum();
        assert!((at_one as f64 / total as f64 - 2.0 / 3.0).abs() < 0.02);
        let small: u64 = counts
            .iter()
            .filter(|(&(i, _), _)| i <= 3)
            .map(|(_, &c)| c)
            .sum();
        assert!(small as f64 / total as f64 > 0.85);
    }
}
