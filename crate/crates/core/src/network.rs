//! Parallel bipartite games on a graph of parties.
//!
//! Each edge carries one instance of the same game. Against the Svetlichny
//! foil, all parties but one (the excluded vertex `v`) may communicate: the
//! edges inside the communicating group reach `B_S`, the edges touching `v`
//! stay at `B_L`. The foil picks the best `v`, which gives
//!
//! ```text
//! max_v [B_L·deg(v) + B_S·(E − deg(v))] = B_S·E − (B_S − B_L)·min_deg
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::chained::{chained_bounds, GameBounds};
use crate::error::{Error, Result};
use crate::quantum::check_unit;
use crate::scalar::{Real, WITNESS_MARGIN};

/// Undirected simple graph. Edge order is preserved; for an edge `[i, j]`
/// party `i` plays the A role and `j` the B role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct NetworkGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    nodes: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for NetworkGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        NetworkGraph::new(raw.nodes, raw.edges.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<NetworkGraph> for RawGraph {
    fn from(g: NetworkGraph) -> Self {
        RawGraph {
            nodes: g.n_nodes,
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl NetworkGraph {
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 nodes, got {n_nodes}")));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            for node in [a, b] {
                if node >= n_nodes {
                    return Err(Error::NodeOutOfRange { node, n_nodes });
                }
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{a}, {b}}}")));
            }
        }
        Ok(Self { n_nodes, edges })
    }

    pub fn triangle() -> Self {
        Self::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// Tripartite line 0 – 1 – 2.
    pub fn line3() -> Self {
        Self::new(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    /// Square 0-1-2-3 with the diagonal 0–2.
    pub fn divided_square() -> Self {
        Self::new(4, vec![(0, 1), (0, 3), (1, 2), (2, 3), (0, 2)]).unwrap()
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGraph(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::new(n, edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, node: usize) -> Result<usize> {
        if node >= self.n_nodes {
            return Err(Error::NodeOutOfRange {
                node,
                n_nodes: self.n_nodes,
            });
        }
        Ok(self
            .edges
            .iter()
            .filter(|&&(a, b)| a == node || b == node)
            .count())
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n_nodes)
            .map(|v| self.degree(v).unwrap())
            .min()
            .unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0).unwrap();
        (1..self.n_nodes).all(|v| self.degree(v).unwrap() == d)
    }

    /// Indices of the edges incident to `node`, in edge order.
    pub fn incident_edges(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == node || b == node)
            .map(|(i, _)| i)
            .collect()
    }
}

impl FromStr for NetworkGraph {
    type Err = Error;

    /// Named graphs: `triangle`, `line3`, `divided-square`, `cycle:N`, `complete:N`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_n = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::InvalidGraph(format!("bad node count in `{s}`")))
        };
        match s {
            "triangle" => Ok(Self::triangle()),
            "line3" => Ok(Self::line3()),
            "divided-square" => Ok(Self::divided_square()),
            _ => {
                if let Some(rest) = s.strip_prefix("cycle:") {
                    Self::cycle(parse_n(rest)?)
                } else if let Some(rest) = s.strip_prefix("complete:") {
                    Self::complete(parse_n(rest)?)
                } else {
                    Err(Error::InvalidGraph(format!("unknown graph name `{s}`")))
                }
            }
        }
    }
}

impl fmt::Display for NetworkGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nodes, edges", self.n_nodes)?;
        for (a, b) in &self.edges {
            write!(f, " {a}-{b}")?;
        }
        Ok(())
    }
}

fn count<S: Num + Copy>(n: usize) -> S {
    (0..n).fold(S::zero(), |acc, _| acc + S::one())
}

/// Foil bound `B_S·E − (B_S − B_L)·min_deg`.
///
/// Generic over any ordered ring so that integer or rational bounds stay exact.
pub fn svetlichny_bound<S: Num + Copy + PartialOrd>(g: &NetworkGraph, b: &GameBounds<S>) -> Result<S> {
    if b.svetlichny < b.local {
        return Err(Error::InvalidBounds("B_S < B_L".into()));
    }
    let e: S = count(g.n_edges());
    let d: S = count(g.min_degree());
    Ok(b.svetlichny * e - (b.svetlichny - b.local) * d)
}

/// Foil bound as the maximum over excluded vertices `v` of
/// `B_L·deg(v) + B_S·(E − deg(v))`.
pub fn svetlichny_bound_by_exclusion<S: Num + Copy + PartialOrd>(
    g: &NetworkGraph,
    b: &GameBounds<S>,
) -> Result<S> {
    if b.svetlichny < b.local {
        return Err(Error::InvalidBounds("B_S < B_L".into()));
    }
    let mut best: Option<S> = None;
    for v in 0..g.n_nodes() {
        let d = g.degree(v)?;
        let val = b.local * count(d) + b.svetlichny * count(g.n_edges() - d);
        best = Some(match best {
            Some(x) if x >= val => x,
            _ => val,
        });
    }
    Ok(best.expect("graph has nodes"))
}

/// `(v·B_Q + (1−v)·B_N)·E`.
pub fn quantum_total<T: Real>(g: &NetworkGraph, b: &GameBounds<T>, v: T) -> Result<T> {
    check_unit("v", v)?;
    Ok((v * b.quantum + (T::one() - v) * b.noise) * T::from_count(g.n_edges()))
}

/// Per-edge visibility above which the parallel quantum score beats the foil
/// bound. Values above 1 mean the graph and game can never witness.
pub fn critical_visibility<T: Real>(g: &NetworkGraph, b: &GameBounds<T>) -> Result<T> {
    if b.noise != T::zero() {
        return Err(Error::NonzeroNoiseScore(b.noise.to_f64().unwrap_or(f64::NAN)));
    }
    if b.quantum <= T::zero() {
        return Err(Error::InvalidBounds("B_Q must be positive".into()));
    }
    if b.svetlichny < b.local {
        return Err(Error::InvalidBounds("B_S < B_L".into()));
    }
    let e = T::from_count(g.n_edges());
    let d = T::from_count(g.min_degree());
    Ok(b.svetlichny / b.quantum - (b.svetlichny - b.local) * d / (b.quantum * e))
}

/// Critical visibility of any regular graph on `n_nodes` nodes (the degree
/// cancels): `(B_S − 2(B_S − B_L)/n) / B_Q`.
pub fn regular_visibility<T: Real>(n_nodes: usize, b: &GameBounds<T>) -> Result<T> {
    if n_nodes < 3 {
        return Err(Error::InvalidGraph(format!("need n >= 3, got {n_nodes}")));
    }
    if b.noise != T::zero() {
        return Err(Error::NonzeroNoiseScore(b.noise.to_f64().unwrap_or(f64::NAN)));
    }
    let n = T::from_count(n_nodes);
    Ok((b.svetlichny - T::lit(2.0) * (b.svetlichny - b.local) / n) / b.quantum)
}

/// Regular-graph threshold with `k = n` chained settings:
/// `(n² − 2) / (n²·cos(π/2n))`.
pub fn fully_multipartite_visibility<T: Real>(n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::InvalidGraph(format!("need n >= 3, got {n}")));
    }
    let nn = T::from_count(n);
    let n2 = nn * nn;
    Ok((n2 - T::lit(2.0)) / (n2 * (T::PI() / (T::lit(2.0) * nn)).cos()))
}

/// Chained-game `k` in `range` minimizing the critical visibility of `g`;
/// ties go to the smaller `k`.
pub fn optimize_k<T: Real>(g: &NetworkGraph, range: RangeInclusive<usize>) -> Result<(usize, T)> {
    if range.is_empty() {
        return Err(Error::EmptyRange);
    }
    let mut best: Option<(usize, T)> = None;
    for k in range {
        let v = critical_visibility(g, &chained_bounds::<T>(k)?)?;
        match best {
            Some((_, bv)) if bv <= v => {}
            _ => best = Some((k, v)),
        }
    }
    Ok(best.expect("non-empty range"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport<T> {
    pub foil_bound: T,
    pub quantum_total: T,
    pub critical_visibility: T,
    pub witnessing: bool,
}

/// Strict witnessing predicate, `total > bound` with a small margin.
pub fn witnesses<T: Real>(total: T, bound: T) -> bool {
    total > bound + T::tol(WITNESS_MARGIN)
}

/// Everything the payoff bounds say about `g` at visibility `v`.
pub fn payoff_report<T: Real>(g: &NetworkGraph, b: &GameBounds<T>, v: T) -> Result<PayoffReport<T>> {
    let foil_bound = svetlichny_bound(g, b)?;
    let quantum_total = quantum_total(g, b, v)?;
    Ok(PayoffReport {
        foil_bound,
        quantum_total,
        critical_visibility: critical_visibility(g, b)?,
        witnessing: witnesses(quantum_total, foil_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn chsh() -> GameBounds<f64> {
        chained_bounds(2).unwrap()
    }

    #[test]
    fn degrees() {
        assert_eq!(NetworkGraph::triangle().min_degree(), 2);
        assert_eq!(NetworkGraph::line3().min_degree(), 1);
        assert_eq!(NetworkGraph::divided_square().min_degree(), 2);
        assert_eq!(NetworkGraph::line3().degree(1).unwrap(), 2);
        assert_eq!(
            NetworkGraph::line3().degree(3).unwrap_err(),
            Error::NodeOutOfRange { node: 3, n_nodes: 3 }
        );
    }

    #[test]
    fn graph_validation() {
        assert!(matches!(NetworkGraph::new(3, vec![(0, 0)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(
            NetworkGraph::new(3, vec![(0, 1), (1, 0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            NetworkGraph::new(3, vec![(0, 5)]),
            Err(Error::NodeOutOfRange { node: 5, .. })
        ));
        assert!(NetworkGraph::new(1, vec![]).is_err());
    }

    #[test]
    fn named_graphs() {
        assert_eq!("triangle".parse::<NetworkGraph>().unwrap(), NetworkGraph::triangle());
        assert_eq!("cycle:5".parse::<NetworkGraph>().unwrap().n_edges(), 5);
        assert_eq!("complete:4".parse::<NetworkGraph>().unwrap().n_edges(), 6);
        assert!("hexagon".parse::<NetworkGraph>().is_err());
        assert!("cycle:x".parse::<NetworkGraph>().is_err());
    }

    #[test]
    fn graph_json_shape() {
        let g: NetworkGraph = serde_json::from_str(r#"{"nodes":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g, NetworkGraph::line3());
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"nodes":3,"edges":[[0,1],[1,2]]}"#
        );
        assert!(serde_json::from_str::<NetworkGraph>(r#"{"nodes":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn triangle_bounds_are_six_k_minus_four() {
        for k in 2..=5 {
            let b = chained_bounds::<f64>(k).unwrap();
            let want = 6.0 * k as f64 - 4.0;
            assert_eq!(svetlichny_bound(&NetworkGraph::triangle(), &b).unwrap(), want);
        }
    }

    #[test]
    fn line_chsh_bound() {
        assert_eq!(svetlichny_bound(&NetworkGraph::line3(), &chsh()).unwrap(), 6.0);
    }

    #[test]
    fn degenerate_bounds() {
        let b = GameBounds { local: 3i64, svetlichny: 3, quantum: 3, noise: 0 };
        let g = NetworkGraph::divided_square();
        assert_eq!(svetlichny_bound(&g, &b).unwrap(), 15);
    }

    #[test]
    fn inverted_bounds_rejected() {
        let b = GameBounds { local: 4.0, svetlichny: 2.0, quantum: 3.0, noise: 0.0 };
        assert!(svetlichny_bound(&NetworkGraph::triangle(), &b).is_err());
    }

    #[test]
    fn quantum_totals() {
        let b3 = chained_bounds::<f64>(3).unwrap();
        let t = quantum_total(&NetworkGraph::triangle(), &b3, 1.0).unwrap();
        assert_abs_diff_eq!(t, 9.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(quantum_total(&NetworkGraph::triangle(), &b3, 0.0).unwrap(), 0.0);
        assert!(quantum_total(&NetworkGraph::triangle(), &b3, 1.5).is_err());
    }

    #[test]
    fn headline_visibilities() {
        let tri = NetworkGraph::triangle();
        let line = NetworkGraph::line3();
        assert_abs_diff_eq!(critical_visibility(&tri, &chsh()).unwrap(), 2.0 * SQRT_2 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            critical_visibility(&tri, &chained_bounds::<f64>(3).unwrap()).unwrap(),
            14.0 / (9.0 * 3f64.sqrt()),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            critical_visibility(&line, &chained_bounds::<f64>(5).unwrap()).unwrap(),
            9.0 / (10.0 * (PI / 10.0).cos()),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(critical_visibility(&line, &chsh()).unwrap(), 3.0 / (2.0 * SQRT_2), epsilon = 1e-12);
    }

    #[test]
    fn critical_visibility_needs_zero_noise_score() {
        let b = GameBounds { local: 2.0, svetlichny: 4.0, quantum: 2.8, noise: 0.5 };
        assert_eq!(
            critical_visibility(&NetworkGraph::triangle(), &b).unwrap_err(),
            Error::NonzeroNoiseScore(0.5)
        );
    }

    #[test]
    fn regular_threshold() {
        assert_abs_diff_eq!(regular_visibility(3, &chsh()).unwrap(), 2.0 * SQRT_2 / 3.0, epsilon = 1e-12);
        let b3 = chained_bounds::<f64>(3).unwrap();
        let v3 = regular_visibility(3, &b3).unwrap();
        assert_abs_diff_eq!(v3, 0.8981, epsilon = 5e-5);
        assert!(regular_visibility(4, &b3).unwrap() > v3);
        assert!(regular_visibility(2, &b3).is_err());
    }

    #[test]
    fn fully_multipartite() {
        let v3 = fully_multipartite_visibility::<f64>(3).unwrap();
        assert_abs_diff_eq!(v3, 7.0 / (9.0 * (PI / 6.0).cos()), epsilon = 1e-14);
        assert_abs_diff_eq!(v3, regular_visibility(3, &chained_bounds::<f64>(3).unwrap()).unwrap(), epsilon = 1e-12);
        let v10 = fully_multipartite_visibility::<f64>(10).unwrap();
        assert_abs_diff_eq!(v10, 98.0 / (100.0 * (PI / 20.0).cos()), epsilon = 1e-14);
        assert!(v10 < 1.0);
        assert!(fully_multipartite_visibility::<f64>(2).is_err());
    }

    #[test]
    fn optimal_k() {
        let (k, v) = optimize_k::<f64>(&NetworkGraph::triangle(), 2..=10).unwrap();
        assert_eq!(k, 3);
        assert_abs_diff_eq!(v, 0.8981, epsilon = 5e-5);
        let (k, v) = optimize_k::<f64>(&NetworkGraph::line3(), 2..=10).unwrap();
        assert_eq!(k, 5);
        assert_abs_diff_eq!(v, 0.9463, epsilon = 5e-5);
        assert_eq!(optimize_k::<f64>(&NetworkGraph::line3(), 2..=2).unwrap().0, 2);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert_eq!(optimize_k::<f64>(&NetworkGraph::line3(), empty).unwrap_err(), Error::EmptyRange);
    }

    #[test]
    fn report_flags_witnessing() {
        let b3 = chained_bounds::<f64>(3).unwrap();
        let r = payoff_report(&NetworkGraph::triangle(), &b3, 0.95).unwrap();
        assert!(r.witnessing);
        assert_eq!(r.foil_bound, 14.0);
        let r = payoff_report(&NetworkGraph::triangle(), &b3, 0.88).unwrap();
        assert!(!r.witnessing);
        assert_eq!(r.witnessing, r.quantum_total > r.foil_bound);
    }
}
