//! Exact brute-force maxima of parallel full-correlator Bell expressions on
//! three-party graphs.
//!
//! Against the Svetlichny foil, one excluded party answers from its own
//! inputs only while the other two share all their inputs. With the
//! excluded party's deterministic strategy fixed, the expression separates
//! over the pair's joint inputs, so the pair is optimized pointwise, which is
//! exact because its outputs on distinct joint inputs are independent
//! decision variables.
//!
//! All accumulation is in `i64`; results are exact rationals.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boxworld::NetworkDistribution;
use crate::chained::chained_coefficients;
use crate::error::{Error, Result};
use crate::network::NetworkGraph;
use crate::scalar::Real;

/// Largest number of excluded-party strategies enumerated.
pub const MAX_STRATEGIES: u64 = 1 << 20;

/// Correlator coefficients of one edge, `[setting of first endpoint][setting of second]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeExpression {
    pub edge: [usize; 2],
    pub coefficients: Vec<Vec<i64>>,
}

/// One bipartite expression per graph edge, in graph edge order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpressionTable {
    pub edges: Vec<EdgeExpression>,
}

impl ExpressionTable {
    /// The chained game with `k` settings on every edge of `g`.
    pub fn chained(g: &NetworkGraph, k: usize) -> Result<Self> {
        let c = chained_coefficients(k)?;
        Ok(Self {
            edges: g
                .edges()
                .iter()
                .map(|&(a, b)| EdgeExpression {
                    edge: [a, b],
                    coefficients: c.clone(),
                })
                .collect(),
        })
    }

    /// Parses `chained:k` for graph `g`.
    pub fn named(name: &str, g: &NetworkGraph) -> Result<Self> {
        let k = name
            .strip_prefix("chained:")
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Unsupported(format!("unknown expression family `{name}`")))?;
        Self::chained(g, k)
    }

    /// Checks edge alignment with `g` and `k×k` tables everywhere.
    pub fn check(&self, g: &NetworkGraph, k: usize) -> Result<()> {
        if self.edges.len() != g.n_edges() {
            return Err(Error::ShapeMismatch(format!(
                "{} edge expressions for {} graph edges",
                self.edges.len(),
                g.n_edges()
            )));
        }
        for (expr, &(a, b)) in self.edges.iter().zip(g.edges()) {
            if expr.edge != [a, b] {
                return Err(Error::ShapeMismatch(format!(
                    "expression for edge {:?} where the graph has [{a}, {b}]",
                    expr.edge
                )));
            }
            if expr.coefficients.len() != k || expr.coefficients.iter().any(|r| r.len() != k) {
                return Err(Error::ShapeMismatch(format!(
                    "edge {:?} needs a {k}x{k} coefficient table",
                    expr.edge
                )));
            }
        }
        Ok(())
    }
}

/// Maximizing deterministic strategy of the excluded party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub party: usize,
    /// Graph edge indices of the party's sub-devices, in order.
    pub incident_edges: Vec<usize>,
    /// For each input tuple (mixed radix over `incident_edges`, first most
    /// significant), the ±1 output on each incident edge.
    pub responses: Vec<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// Maximum of the expression (sum of edge-averaged correlator terms).
    pub bound: Ratio<i64>,
    pub excluded_vertex: usize,
    pub strategy: DeterministicStrategy,
}

fn check_instance(expr: &ExpressionTable, g: &NetworkGraph, k: usize) -> Result<()> {
    if g.n_nodes() != 3 {
        return Err(Error::Unsupported(format!("graph must have 3 nodes, got {}", g.n_nodes())));
    }
    if k < 2 {
        return Err(Error::TooFewSettings(k));
    }
    expr.check(g, k)
}

/// Coefficient for `(setting of p, setting of q)` on an edge containing both.
fn coeff(expr: &EdgeExpression, p: usize, sp: usize, sq: usize) -> i64 {
    if expr.edge[0] == p {
        expr.coefficients[sp][sq]
    } else {
        expr.coefficients[sq][sp]
    }
}

/// Decodes digit `i` (most significant first) of a mixed-radix tuple of `len` digits.
fn digit(tuple: usize, i: usize, len: usize, k: usize) -> usize {
    (tuple / k.pow((len - 1 - i) as u32)) % k
}

/// Maximum over the Svetlichny foil: every choice of excluded vertex, every
/// deterministic strategy of that vertex, pair optimized pointwise.
pub fn oracle_max(expr: &ExpressionTable, g: &NetworkGraph, k: usize) -> Result<OracleResult> {
    check_instance(expr, g, k)?;
    for v in 0..3 {
        let d = g.degree(v)?;
        let bits = d as u64 * (k as u64).pow(d as u32);
        if bits >= 63 || (1u64 << bits) > MAX_STRATEGIES {
            return Err(Error::Unsupported(format!(
                "excluded party {v} has 2^{bits} strategies; exact mode supports at most {MAX_STRATEGIES}"
            )));
        }
    }
    let normalization = (k as i64).pow(2 * g.n_edges() as u32 - 2);

    let mut best: Option<(i64, usize, u64)> = None;
    for v in 0..3 {
        let (raw, strategy) = excluded_vertex_max(expr, g, k, v);
        if best.is_none_or(|(b, _, _)| raw > b) {
            best = Some((raw, v, strategy));
        }
    }
    let (raw, v, index) = best.expect("three candidates");
    let incident = g.incident_edges(v);
    let d = incident.len();
    let n_tuples = k.pow(d as u32);
    let responses = (0..n_tuples)
        .map(|t| {
            (0..d)
                .map(|c| if (index >> (t * d + c)) & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect();
    Ok(OracleResult {
        bound: Ratio::new(raw, normalization),
        excluded_vertex: v,
        strategy: DeterministicStrategy {
            party: v,
            incident_edges: incident,
            responses,
        },
    })
}

/// Best raw (un-normalized) sum with `v` excluded, and the strategy index
/// reaching it. Ties go to the smallest index so the result does not depend
/// on how the enumeration is split across workers.
fn excluded_vertex_max(expr: &ExpressionTable, g: &NetworkGraph, k: usize, v: usize) -> (i64, u64) {
    let pair: Vec<usize> = (0..3).filter(|&p| p != v).collect();
    let (u, w) = (pair[0], pair[1]);
    let v_edges = g.incident_edges(v);
    let dv = v_edges.len();
    let n_v_tuples = k.pow(dv as u32);
    let n_strategies: u64 = 1u64 << (dv * n_v_tuples);

    // Pair sub-devices: (party, edge) for every edge touching u or w, as
    // positions in the pair's joint input tuple.
    let mut pair_slots: Vec<(usize, usize)> = Vec::new();
    for &p in &[u, w] {
        for e in g.incident_edges(p) {
            pair_slots.push((p, e));
        }
    }
    let n_pair_inputs = k.pow(pair_slots.len() as u32);
    let slot_of = |p: usize, e: usize| pair_slots.iter().position(|&s| s == (p, e)).unwrap();

    let pair_edge: Option<(usize, usize, usize)> = g
        .edges()
        .iter()
        .position(|&(a, b)| (a == u && b == w) || (a == w && b == u))
        .map(|e| (e, slot_of(u, e), slot_of(w, e)));
    let v_weight = n_v_tuples as i64;

    // Cross edge c = (v, p): position of c among v's edges and slot of p's sub-device.
    let cross: Vec<(usize, usize, usize, usize)> = v_edges
        .iter()
        .enumerate()
        .map(|(pos, &e)| {
            let (a, b) = g.edges()[e];
            let p = if a == v { b } else { a };
            (e, pos, p, slot_of(p, e))
        })
        .collect();

    let eval = |strategy: u64| -> i64 {
        let mut tables = vec![vec![0i64; k]; cross.len()];
        for (ci, &(e, pos, p, _)) in cross.iter().enumerate() {
            let ex = &expr.edges[e];
            for (s, t_entry) in tables[ci].iter_mut().enumerate() {
                let mut acc = 0i64;
                for tuple in 0..n_v_tuples {
                    let bit = (strategy >> (tuple * dv + pos)) & 1;
                    let out = if bit == 1 { -1 } else { 1 };
                    acc += coeff(ex, p, s, digit(tuple, pos, dv, k)) * out;
                }
                *t_entry = acc;
            }
        }
        let n_slots = pair_slots.len();
        let mut total = 0i64;
        for joint in 0..n_pair_inputs {
            let mut contribution = 0i64;
            if let Some((e, su, sw)) = pair_edge {
                let c = coeff(
                    &expr.edges[e],
                    u,
                    digit(joint, su, n_slots, k),
                    digit(joint, sw, n_slots, k),
                );
                contribution += c.abs() * v_weight;
            }
            for (ci, &(_, _, _, slot)) in cross.iter().enumerate() {
                contribution += tables[ci][digit(joint, slot, n_slots, k)].abs();
            }
            total += contribution;
        }
        total
    };

    (0..n_strategies)
        .into_par_iter()
        .map(|s| (eval(s), s))
        .reduce(
            || (i64::MIN, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        )
}

/// Maximum over fully local deterministic strategies (no communication).
///
/// Each party's response on an edge is taken to depend on that edge's
/// sub-input only. This loses nothing for edge-separable expressions: any
/// composite strategy's edge-averaged correlators are an average of such
/// per-edge strategies with the other sub-inputs frozen, and the maximum is
/// reached at one of them. Parties 0 and 1 are enumerated; party 2 answers
/// pointwise.
pub fn local_max(expr: &ExpressionTable, g: &NetworkGraph, k: usize) -> Result<Ratio<i64>> {
    check_instance(expr, g, k)?;
    let edges0 = g.incident_edges(0);
    let edges1 = g.incident_edges(1);
    let n0: u64 = 1 << (k * edges0.len());
    let n1: u64 = 1 << (k * edges1.len());
    let response = |strategy: u64, pos: usize, s: usize| -> i64 {
        if (strategy >> (pos * k + s)) & 1 == 1 {
            -1
        } else {
            1
        }
    };
    let out_of = |strategy: u64, edges: &[usize], e: usize, s: usize| -> i64 {
        let pos = edges.iter().position(|&x| x == e).unwrap();
        response(strategy, pos, s)
    };

    let best = (0..n0)
        .into_par_iter()
        .map(|s0| {
            let mut best = i64::MIN;
            for s1 in 0..n1 {
                let mut total = 0i64;
                for (e, ex) in expr.edges.iter().enumerate() {
                    let [a, b] = ex.edge;
                    let assigned = |p: usize, s: usize| -> Option<i64> {
                        match p {
                            0 => Some(out_of(s0, &edges0, e, s)),
                            1 => Some(out_of(s1, &edges1, e, s)),
                            _ => None,
                        }
                    };
                    match (a == 2, b == 2) {
                        (false, false) => {
                            for s in 0..k {
                                for t in 0..k {
                                    total += ex.coefficients[s][t] * assigned(a, s).unwrap() * assigned(b, t).unwrap();
                                }
                            }
                        }
                        (true, false) => {
                            for s in 0..k {
                                let col: i64 = (0..k).map(|t| ex.coefficients[s][t] * assigned(b, t).unwrap()).sum();
                                total += col.abs();
                            }
                        }
                        (false, true) => {
                            for t in 0..k {
                                let row: i64 = (0..k).map(|s| ex.coefficients[s][t] * assigned(a, s).unwrap()).sum();
                                total += row.abs();
                            }
                        }
                        (true, true) => unreachable!("simple graph"),
                    }
                }
                best = best.max(total);
            }
            best
        })
        .max()
        .expect("at least one strategy");
    Ok(Ratio::from_integer(best))
}

/// Value of the expression on an explicit distribution: each edge's
/// correlators are taken from its marginal box.
pub fn score_distribution<T: Real>(expr: &ExpressionTable, dist: &NetworkDistribution<T>) -> Result<T> {
    expr.check(dist.graph(), dist.settings())?;
    let mut total = T::zero();
    for (e, ex) in expr.edges.iter().enumerate() {
        total = total + dist.edge_marginal(e)?.bell_value(&ex.coefficients)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chained_triangle_small_k() {
        let g = NetworkGraph::triangle();
        let r = oracle_max(&ExpressionTable::chained(&g, 2).unwrap(), &g, 2).unwrap();
        assert_eq!(r.bound, Ratio::from_integer(8));
        assert_eq!(r.strategy.responses.len(), 4);
    }

    #[test]
    fn chained_line_small_k() {
        let g = NetworkGraph::line3();
        let e = ExpressionTable::chained(&g, 2).unwrap();
        assert_eq!(oracle_max(&e, &g, 2).unwrap().bound, Ratio::from_integer(6));
        assert_eq!(local_max(&e, &g, 2).unwrap(), Ratio::from_integer(4));
    }

    #[test]
    fn triangle_local_k2() {
        let g = NetworkGraph::triangle();
        let e = ExpressionTable::chained(&g, 2).unwrap();
        assert_eq!(local_max(&e, &g, 2).unwrap(), Ratio::from_integer(6));
    }

    #[test]
    fn unsupported_instances() {
        let sq = NetworkGraph::divided_square();
        let e = ExpressionTable::chained(&sq, 2).unwrap();
        assert!(matches!(oracle_max(&e, &sq, 2), Err(Error::Unsupported(_))));
        let g = NetworkGraph::triangle();
        let e4 = ExpressionTable::chained(&g, 4).unwrap();
        assert!(matches!(oracle_max(&e4, &g, 4), Err(Error::Unsupported(_))));
        let e2 = ExpressionTable::chained(&g, 2).unwrap();
        assert!(matches!(oracle_max(&e2, &g, 3), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn named_family() {
        let g = NetworkGraph::line3();
        assert_eq!(ExpressionTable::named("chained:3", &g).unwrap(), ExpressionTable::chained(&g, 3).unwrap());
        assert!(ExpressionTable::named("chsh", &g).is_err());
    }

    #[test]
    fn expression_json_shape() {
        let g = NetworkGraph::line3();
        let e = ExpressionTable::chained(&g, 2).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(
            json,
            r#"{"edges":[{"edge":[0,1],"coefficients":[[1,-1],[1,1]]},{"edge":[1,2],"coefficients":[[1,-1],[1,1]]}]}"#
        );
    }
}
