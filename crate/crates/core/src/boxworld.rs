//! Theory-independent correlation boxes `p(a, b | x, y)`, their products on
//! small networks, the local-polytope membership test for the two-input
//! two-output case, and the explicit decomposition of two Tsirelson boxes
//! on the tripartite line into Svetlichny-foil components.

use serde::{Deserialize, Serialize};

use crate::chained::{chained_coefficients, ChainedGameSpec};
use crate::error::{Error, Result};
use crate::lp::{feasibility, Feasibility};
use crate::network::NetworkGraph;
use crate::quantum::{check_unit, joint_probability, DensityMatrix};
use crate::scalar::{Real, INVARIANT_TOL, SCORE_TOL};

/// Conditional probability table of a two-party device.
///
/// Entries are stored row-major over `(x, y, a, b)`. Signaling tables are
/// allowed (they occur inside communicating components); use
/// [`BipartiteBox::is_nonsignaling`] to check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox<T>", into = "RawBox<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct BipartiteBox<T> {
    inputs: [usize; 2],
    outputs: [usize; 2],
    table: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct RawBox<T> {
    inputs: [usize; 2],
    outputs: [usize; 2],
    layout: String,
    table: Vec<T>,
}

const LAYOUT: &str = "x,y,a,b";

impl<T: Real> TryFrom<RawBox<T>> for BipartiteBox<T> {
    type Error = Error;
    fn try_from(raw: RawBox<T>) -> Result<Self> {
        if raw.layout != LAYOUT {
            return Err(Error::InvalidBox(format!("unsupported layout `{}`", raw.layout)));
        }
        BipartiteBox::new(raw.inputs, raw.outputs, raw.table)
    }
}

impl<T: Real> From<BipartiteBox<T>> for RawBox<T> {
    fn from(b: BipartiteBox<T>) -> Self {
        RawBox {
            inputs: b.inputs,
            outputs: b.outputs,
            layout: LAYOUT.into(),
            table: b.table,
        }
    }
}

impl<T: Real> BipartiteBox<T> {
    pub fn new(inputs: [usize; 2], outputs: [usize; 2], table: Vec<T>) -> Result<Self> {
        let want = inputs[0] * inputs[1] * outputs[0] * outputs[1];
        if want == 0 || table.len() != want {
            return Err(Error::InvalidBox(format!(
                "table has {} entries, shape needs {want}",
                table.len()
            )));
        }
        let b = Self { inputs, outputs, table };
        b.validate()?;
        Ok(b)
    }

    /// Builds a box from a probability function `f(a, b, x, y)`.
    pub fn from_fn(
        inputs: [usize; 2],
        outputs: [usize; 2],
        mut f: impl FnMut(usize, usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut table = Vec::with_capacity(inputs[0] * inputs[1] * outputs[0] * outputs[1]);
        for x in 0..inputs[0] {
            for y in 0..inputs[1] {
                for a in 0..outputs[0] {
                    for b in 0..outputs[1] {
                        table.push(f(a, b, x, y));
                    }
                }
            }
        }
        Self::new(inputs, outputs, table)
    }

    /// Deterministic box `a = fa(x)`, `b = fb(y)` with binary outputs.
    pub fn deterministic(fa: &[usize], fb: &[usize]) -> Result<Self> {
        Self::from_fn([fa.len(), fb.len()], [2, 2], |a, b, x, y| {
            if a == fa[x] && b == fb[y] {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Uniformly random outputs.
    pub fn uniform(inputs: [usize; 2], outputs: [usize; 2]) -> Result<Self> {
        let p = T::one() / T::from_count(outputs[0] * outputs[1]);
        Self::from_fn(inputs, outputs, |_, _, _, _| p)
    }

    fn validate(&self) -> Result<()> {
        let tol = T::tol(INVARIANT_TOL);
        if let Some(p) = self.table.iter().find(|p| p.is_nan() || **p < -tol) {
            return Err(Error::InvalidBox(format!("negative or NaN entry {p}")));
        }
        for x in 0..self.inputs[0] {
            for y in 0..self.inputs[1] {
                let mut s = T::zero();
                for a in 0..self.outputs[0] {
                    for b in 0..self.outputs[1] {
                        s = s + self.get(a, b, x, y);
                    }
                }
                if (s - T::one()).abs() > tol {
                    return Err(Error::InvalidBox(format!(
                        "probabilities for inputs ({x}, {y}) sum to {s}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn inputs(&self) -> [usize; 2] {
        self.inputs
    }

    pub fn outputs(&self) -> [usize; 2] {
        self.outputs
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.inputs[1] + y) * self.outputs[0] + a) * self.outputs[1] + b
    }

    /// p(a, b | x, y).
    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> T {
        self.table[self.index(a, b, x, y)]
    }

    fn is_binary(&self) -> bool {
        self.outputs == [2, 2]
    }

    /// ⟨A_x B_y⟩ = Σ (−1)^{a+b} p(a, b | x, y) for binary outputs.
    pub fn correlator(&self, x: usize, y: usize) -> T {
        debug_assert!(self.is_binary());
        let mut e = T::zero();
        for a in 0..2 {
            for b in 0..2 {
                let p = self.get(a, b, x, y);
                e = if (a + b) % 2 == 0 { e + p } else { e - p };
            }
        }
        e
    }

    /// Σ coeff[x][y]·⟨A_x B_y⟩ for a full-correlator expression.
    pub fn bell_value(&self, coeffs: &[Vec<i64>]) -> Result<T> {
        if !self.is_binary() || coeffs.len() != self.inputs[0] || coeffs.iter().any(|r| r.len() != self.inputs[1]) {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} coefficient table against box with inputs {:?}, outputs {:?}",
                coeffs.len(),
                coeffs.first().map_or(0, Vec::len),
                self.inputs,
                self.outputs
            )));
        }
        let mut v = T::zero();
        for (x, row) in coeffs.iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                if c != 0 {
                    v = v + T::lit(c as f64) * self.correlator(x, y);
                }
            }
        }
        Ok(v)
    }

    /// p(a | x) for party A, computed at input `y` of party B.
    pub fn marginal_a(&self, a: usize, x: usize, y: usize) -> T {
        (0..self.outputs[1]).map(|b| self.get(a, b, x, y)).sum()
    }

    /// p(b | y) for party B, computed at input `x` of party A.
    pub fn marginal_b(&self, b: usize, x: usize, y: usize) -> T {
        (0..self.outputs[0]).map(|a| self.get(a, b, x, y)).sum()
    }

    /// Whether each party's marginal is independent of the other's input.
    pub fn is_nonsignaling(&self, tol: T) -> bool {
        for x in 0..self.inputs[0] {
            for a in 0..self.outputs[0] {
                let p0 = self.marginal_a(a, x, 0);
                if (1..self.inputs[1]).any(|y| (self.marginal_a(a, x, y) - p0).abs() > tol) {
                    return false;
                }
            }
        }
        for y in 0..self.inputs[1] {
            for b in 0..self.outputs[1] {
                let p0 = self.marginal_b(b, 0, y);
                if (1..self.inputs[0]).any(|x| (self.marginal_b(b, x, y) - p0).abs() > tol) {
                    return false;
                }
            }
        }
        true
    }

    /// `p·self + (1−p)·other`.
    pub fn mix(&self, other: &Self, p: T) -> Result<Self> {
        check_unit("p", p)?;
        self.check_same_shape(other)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&s, &o)| p * s + (T::one() - p) * o)
            .collect();
        Self::new(self.inputs, self.outputs, table)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(Error::ShapeMismatch(format!(
                "boxes of shape {:?}/{:?} and {:?}/{:?}",
                self.inputs, self.outputs, other.inputs, other.outputs
            )));
        }
        Ok(())
    }
}

/// PR box: `a ⊕ b = x·y`, with B's output flipped on `y = 1` so that the
/// chained CHSH pattern `⟨A1B1⟩ + ⟨A2B1⟩ + ⟨A2B2⟩ − ⟨A1B2⟩` scores +4.
/// Equivalently `a ⊕ b = (1 ⊕ x)·y`.
pub fn pr_box<T: Real>() -> BipartiteBox<T> {
    parity_box(0)
}

/// Anti-PR box, the PR condition negated; CHSH −4.
pub fn anti_pr_box<T: Real>() -> BipartiteBox<T> {
    parity_box(1)
}

fn parity_box<T: Real>(flip: usize) -> BipartiteBox<T> {
    let half = T::lit(0.5);
    BipartiteBox::from_fn([2, 2], [2, 2], |a, b, x, y| {
        if (a ^ b) == (((1 ^ x) & y) ^ flip) {
            half
        } else {
            T::zero()
        }
    })
    .expect("PR boxes are valid")
}

/// `v·PR + (1−v)·anti-PR`.
pub fn pr_mix<T: Real>(v: T) -> Result<BipartiteBox<T>> {
    pr_box().mix(&anti_pr_box(), v)
}

/// `pr_mix((2 + √2)/4)`, CHSH = 2√2.
pub fn tsirelson_box<T: Real>() -> BipartiteBox<T> {
    pr_mix((T::lit(2.0) + T::SQRT_2()) / T::lit(4.0)).expect("weight in range")
}

/// CHSH in the chained `k = 2` sign pattern.
pub fn chsh_score<T: Real>(b: &BipartiteBox<T>) -> Result<T> {
    if b.inputs() != [2, 2] || b.outputs() != [2, 2] {
        return Err(Error::ShapeMismatch(format!(
            "CHSH needs a 2-input/2-output box, got inputs {:?}, outputs {:?}",
            b.inputs(),
            b.outputs()
        )));
    }
    b.bell_value(&chained_coefficients(2)?)
}

/// Chained score of a `k`-input binary-output box.
pub fn chained_box_score<T: Real>(b: &BipartiteBox<T>) -> Result<T> {
    let k = b.inputs()[0];
    b.bell_value(&chained_coefficients(k)?)
}

/// Born-rule box of the settings in `spec` (outcome 0 ↔ +1, 1 ↔ −1).
pub fn box_from_quantum<T: Real>(state: &DensityMatrix<T>, spec: &ChainedGameSpec<T>) -> Result<BipartiteBox<T>> {
    spec.validate()?;
    let mut table = Vec::with_capacity(spec.k * spec.k * 4);
    for x in 0..spec.k {
        let oa = spec.observable_a(x);
        for y in 0..spec.k {
            let ob = spec.observable_b(y);
            for a in 0..2 {
                for b in 0..2 {
                    table.push(joint_probability(state, &oa, &ob, a, b)?);
                }
            }
        }
    }
    BipartiteBox::new([spec.k, spec.k], [2, 2], table)
}

/// Joint distribution of parties on a graph where each party holds one
/// binary-output sub-device per incident edge, all with `k` inputs.
///
/// Sub-devices are numbered by slot: edge `e = (i, j)` owns slot `2e`
/// (party `i`) and slot `2e + 1` (party `j`). Full inputs and outputs are
/// mixed-radix numbers over the slots, slot 0 most significant; the table is
/// indexed `input_index · 2^slots + output_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDistribution<T> {
    graph: NetworkGraph,
    k: usize,
    table: Vec<T>,
}

/// `p(a₁, (a₂₁, a₂₃), a₃ | x₁, (x₂₁, x₂₃), x₃)` on the line 0 – 1 – 2.
pub type TripartiteLineDistribution<T> = NetworkDistribution<T>;

impl<T: Real> NetworkDistribution<T> {
    pub fn new(graph: NetworkGraph, k: usize, table: Vec<T>) -> Result<Self> {
        let slots = 2 * graph.n_edges();
        let n_in = k.checked_pow(slots as u32).unwrap_or(usize::MAX);
        let want = n_in.saturating_mul(1 << slots);
        if table.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "table has {} entries, {slots} slots with {k} inputs need {want}",
                table.len()
            )));
        }
        let d = Self { graph, k, table };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let tol = T::tol(INVARIANT_TOL);
        let n_out = self.n_outputs();
        for (i, chunk) in self.table.chunks(n_out).enumerate() {
            if chunk.iter().any(|p| p.is_nan() || *p < -tol) {
                return Err(Error::InvalidBox(format!("negative entry for input tuple {i}")));
            }
            let s: T = chunk.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::InvalidBox(format!("input tuple {i} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.graph
    }

    pub fn settings(&self) -> usize {
        self.k
    }

    pub fn slots(&self) -> usize {
        2 * self.graph.n_edges()
    }

    pub fn n_inputs(&self) -> usize {
        self.k.pow(self.slots() as u32)
    }

    pub fn n_outputs(&self) -> usize {
        1 << self.slots()
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// Digit of `slot` in a mixed-radix input index.
    pub fn input_digit(&self, input: usize, slot: usize) -> usize {
        (input / self.k.pow((self.slots() - 1 - slot) as u32)) % self.k
    }

    /// Bit of `slot` in an output index.
    pub fn output_bit(&self, output: usize, slot: usize) -> usize {
        (output >> (self.slots() - 1 - slot)) & 1
    }

    /// Probability of `output` given full `input`.
    pub fn get(&self, input: usize, output: usize) -> T {
        self.table[input * self.n_outputs() + output]
    }

    /// Bipartite box on edge `e`: sum over the other outputs, uniform average
    /// over the other inputs.
    pub fn edge_marginal(&self, e: usize) -> Result<BipartiteBox<T>> {
        if e >= self.graph.n_edges() {
            return Err(Error::ShapeMismatch(format!("no edge {e}")));
        }
        let (sa, sb) = (2 * e, 2 * e + 1);
        let k = self.k;
        let mut acc = vec![T::zero(); k * k * 4];
        for input in 0..self.n_inputs() {
            let (x, y) = (self.input_digit(input, sa), self.input_digit(input, sb));
            for output in 0..self.n_outputs() {
                let (a, b) = (self.output_bit(output, sa), self.output_bit(output, sb));
                let idx = ((x * k + y) * 2 + a) * 2 + b;
                acc[idx] = acc[idx] + self.get(input, output);
            }
        }
        let reps = T::from_count(self.n_inputs() / (k * k));
        BipartiteBox::new([k, k], [2, 2], acc.into_iter().map(|p| p / reps).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.graph != other.graph || self.k != other.k {
            return Err(Error::ShapeMismatch("distributions on different networks".into()));
        }
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max))
    }

    /// Position and size of the largest entrywise deviation.
    pub fn worst_entry(&self, other: &Self) -> Result<(usize, T)> {
        self.max_abs_diff(other)?;
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .map(|(&a, &b)| (a - b).abs())
            .enumerate()
            .fold((0, T::zero()), |best, (i, d)| if d > best.1 { (i, d) } else { best }))
    }

    /// `Σ wᵢ·distᵢ`. Weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(T, &Self)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::ShapeMismatch("empty mixture".into()))?
            .1;
        let mut table = vec![T::zero(); first.table.len()];
        for (w, d) in parts {
            if d.graph != first.graph || d.k != first.k {
                return Err(Error::ShapeMismatch("mixture of different networks".into()));
            }
            for (t, &p) in table.iter_mut().zip(&d.table) {
                *t = *t + *w * p;
            }
        }
        Self::new(first.graph.clone(), first.k, table)
    }
}

/// Independent boxes played in parallel on the edges of `graph`.
pub fn tensor_network<T: Real>(graph: &NetworkGraph, boxes: &[BipartiteBox<T>]) -> Result<NetworkDistribution<T>> {
    if boxes.len() != graph.n_edges() {
        return Err(Error::ShapeMismatch(format!(
            "{} boxes for {} edges",
            boxes.len(),
            graph.n_edges()
        )));
    }
    let k = boxes.first().map_or(2, |b| b.inputs()[0]);
    for b in boxes {
        if b.inputs() != [k, k] || b.outputs() != [2, 2] {
            return Err(Error::ShapeMismatch(format!(
                "every box needs {k} inputs and binary outputs, got {:?}/{:?}",
                b.inputs(),
                b.outputs()
            )));
        }
    }
    let slots = 2 * graph.n_edges();
    let n_in = k.pow(slots as u32);
    let n_out = 1usize << slots;
    let mut table = Vec::with_capacity(n_in * n_out);
    let digit = |v: usize, slot: usize| (v / k.pow((slots - 1 - slot) as u32)) % k;
    let bit = |v: usize, slot: usize| (v >> (slots - 1 - slot)) & 1;
    for input in 0..n_in {
        for output in 0..n_out {
            let mut p = T::one();
            for (e, b) in boxes.iter().enumerate() {
                p = p * b.get(
                    bit(output, 2 * e),
                    bit(output, 2 * e + 1),
                    digit(input, 2 * e),
                    digit(input, 2 * e + 1),
                );
            }
            table.push(p);
        }
    }
    NetworkDistribution::new(graph.clone(), k, table)
}

/// `left` on edge 0–1 and `right` on edge 1–2 of the tripartite line.
pub fn tensor_line<T: Real>(left: &BipartiteBox<T>, right: &BipartiteBox<T>) -> Result<TripartiteLineDistribution<T>> {
    for b in [left, right] {
        if b.inputs() != [2, 2] || b.outputs() != [2, 2] {
            return Err(Error::ShapeMismatch("tensor_line needs 2-input/2-output boxes".into()));
        }
    }
    tensor_network(&NetworkGraph::line3(), &[left.clone(), right.clone()])
}

/// Bell functional separating a box from the local polytope, normalized so
/// that its local maximum is 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellWitness<T> {
    /// Coefficients over the box table, layout `x,y,a,b`.
    pub coefficients: Vec<T>,
    pub local_bound: T,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LocalityVerdict<T> {
    /// Convex weights over the 16 deterministic strategies, indexed
    /// `a₀ + 2a₁ + 4b₀ + 8b₁` with `a_x`, `b_y` the deterministic outputs.
    Local { weights: Vec<T>, reconstruction_error: T },
    Nonlocal { witness: BellWitness<T> },
}

impl<T> LocalityVerdict<T> {
    pub fn is_local(&self) -> bool {
        matches!(self, Self::Local { .. })
    }
}

/// Deterministic vertex `λ` of the 2-input/2-output local polytope.
pub fn deterministic_vertex<T: Real>(lambda: usize) -> BipartiteBox<T> {
    let fa = [lambda & 1, (lambda >> 1) & 1];
    let fb = [(lambda >> 2) & 1, (lambda >> 3) & 1];
    BipartiteBox::deterministic(&fa, &fb).expect("valid deterministic box")
}

/// Membership of a 2-input/2-output box in the convex hull of the 16
/// deterministic strategies, decided by a phase-one LP with 1e-9 slack.
pub fn is_local_2222<T: Real>(b: &BipartiteBox<T>) -> Result<LocalityVerdict<T>> {
    if b.inputs() != [2, 2] || b.outputs() != [2, 2] {
        return Err(Error::ShapeMismatch("locality test needs a 2-input/2-output box".into()));
    }
    let vertices: Vec<BipartiteBox<T>> = (0..16).map(deterministic_vertex).collect();
    let rows: Vec<Vec<T>> = (0..16)
        .map(|entry| vertices.iter().map(|v| v.table()[entry]).collect())
        .collect();
    let tol = T::tol(SCORE_TOL);
    match feasibility(&rows, b.table(), tol) {
        Feasibility::Feasible(mut weights) => {
            let total: T = weights.iter().copied().sum();
            for w in weights.iter_mut() {
                *w = *w / total;
            }
            let mut rebuilt = [T::zero(); 16];
            for (w, v) in weights.iter().zip(&vertices) {
                for (r, &p) in rebuilt.iter_mut().zip(v.table()) {
                    *r = *r + *w * p;
                }
            }
            let reconstruction_error = rebuilt
                .iter()
                .zip(b.table())
                .map(|(&r, &p)| (r - p).abs())
                .fold(T::zero(), T::max);
            Ok(LocalityVerdict::Local {
                weights,
                reconstruction_error,
            })
        }
        Feasibility::Infeasible { certificate, .. } => {
            let eval = |coeffs: &[T], table: &[T]| -> T {
                coeffs.iter().zip(table).map(|(&c, &p)| c * p).sum()
            };
            let raw_local = vertices
                .iter()
                .map(|v| eval(&certificate, v.table()))
                .fold(T::neg_infinity(), T::max);
            let scale = T::one()
                / certificate
                    .iter()
                    .fold(T::zero(), |m, c| m.max(c.abs()))
                    .max(T::min_positive_value());
            // Every normalized box has total mass 4 over its table.
            let shift = (T::lit(2.0) - scale * raw_local) / T::lit(4.0);
            let coefficients: Vec<T> = certificate.iter().map(|&c| c * scale + shift).collect();
            let local_bound = vertices
                .iter()
                .map(|v| eval(&coefficients, v.table()))
                .fold(T::neg_infinity(), T::max);
            Ok(LocalityVerdict::Nonlocal {
                witness: BellWitness {
                    value: eval(&coefficients, b.table()),
                    local_bound,
                    coefficients,
                },
            })
        }
    }
}

/// One branch of a Svetlichny-foil decomposition on the tripartite line.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct DecompositionComponent<T> {
    pub tag: String,
    pub weight: T,
    #[serde(skip)]
    pub left: BipartiteBox<T>,
    #[serde(skip)]
    pub right: BipartiteBox<T>,
    pub left_mix: T,
    pub right_mix: T,
    /// Parties allowed to communicate in this branch.
    pub communicating_pair: (usize, usize),
    /// Edge index (0 = 0–1, 1 = 1–2) not inside the communicating pair.
    pub local_edge: usize,
    pub local_edge_is_local: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct DecompositionCertificate<T> {
    pub w: T,
    pub components: Vec<DecompositionComponent<T>>,
    pub weight_sum: T,
    pub max_reconstruction_error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub enum DecompositionFailure<T> {
    Weights { weight_sum: T },
    Reconstruction { entry: usize, max_error: T },
    ComponentNotLocal { tag: String },
}

/// Checks the four-branch decomposition of two parallel Tsirelson boxes on
/// the line with the exact weight `w = (3 + 2√2)/6`.
pub fn verify_paper_decomposition<T: Real>() -> Result<std::result::Result<DecompositionCertificate<T>, DecompositionFailure<T>>> {
    let w = (T::lit(3.0) + T::lit(2.0) * T::SQRT_2()) / T::lit(6.0);
    verify_decomposition_with_weight(w)
}

/// Same check for an arbitrary branch weight `w`:
///
/// ```text
/// w/2·[PR(1)⊗PR(3/4)] + w/2·[PR(3/4)⊗PR(1)]
///   + (1−w)/2·[PR(0)⊗PR(1/4)] + (1−w)/2·[PR(1/4)⊗PR(0)]
/// ```
///
/// In each branch the pure PR or anti-PR edge is assigned to the
/// communicating pair and the other edge must pass the locality LP.
pub fn verify_decomposition_with_weight<T: Real>(
    w: T,
) -> Result<std::result::Result<DecompositionCertificate<T>, DecompositionFailure<T>>> {
    check_unit("w", w)?;
    let half = T::lit(0.5);
    let (q1, q3) = (T::lit(0.25), T::lit(0.75));
    let branches = [
        ("PR12(1)xPR23(3/4)", w * half, T::one(), q3),
        ("PR12(3/4)xPR23(1)", w * half, q3, T::one()),
        ("PR12(0)xPR23(1/4)", (T::one() - w) * half, T::zero(), q1),
        ("PR12(1/4)xPR23(0)", (T::one() - w) * half, q1, T::zero()),
    ];
    let mut components = Vec::with_capacity(4);
    let mut products = Vec::with_capacity(4);
    for (tag, weight, lv, rv) in branches {
        let left = pr_mix(lv)?;
        let right = pr_mix(rv)?;
        let extreme_left = lv == T::one() || lv == T::zero();
        // The extremal (PR or anti-PR) edge goes inside the communicating pair.
        let (communicating_pair, local_edge, local_box) = if extreme_left {
            ((0, 1), 1, &right)
        } else {
            ((1, 2), 0, &left)
        };
        let local_edge_is_local = is_local_2222(local_box)?.is_local();
        products.push(tensor_line(&left, &right)?);
        components.push(DecompositionComponent {
            tag: tag.to_string(),
            weight,
            left_mix: lv,
            right_mix: rv,
            left,
            right,
            communicating_pair,
            local_edge,
            local_edge_is_local,
        });
    }

    let weight_sum: T = components.iter().map(|c| c.weight).sum();
    if (weight_sum - T::one()).abs() > T::tol(INVARIANT_TOL) || components.iter().any(|c| c.weight < T::zero()) {
        return Ok(Err(DecompositionFailure::Weights { weight_sum }));
    }
    if let Some(c) = components.iter().find(|c| !c.local_edge_is_local) {
        return Ok(Err(DecompositionFailure::ComponentNotLocal { tag: c.tag.clone() }));
    }

    let parts: Vec<(T, &NetworkDistribution<T>)> = components.iter().map(|c| c.weight).zip(&products).collect();
    let mixture = NetworkDistribution::mixture(&parts)?;
    let target = tensor_line(&tsirelson_box(), &tsirelson_box())?;
    let (entry, max_error) = mixture.worst_entry(&target)?;
    if max_error > T::tol(INVARIANT_TOL) {
        return Ok(Err(DecompositionFailure::Reconstruction { entry, max_error }));
    }
    Ok(Ok(DecompositionCertificate {
        w,
        components,
        weight_sum,
        max_reconstruction_error: max_error,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chained::{chained_score, optimal_settings};
    use crate::quantum::singlet;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pr_family_scores() {
        assert_abs_diff_eq!(chsh_score(&pr_box::<f64>()).unwrap(), 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chsh_score(&anti_pr_box::<f64>()).unwrap(), -4.0, epsilon = 1e-15);
        for v in [0.0, 0.2, 0.5, 0.75, 1.0] {
            assert_abs_diff_eq!(chsh_score(&pr_mix::<f64>(v).unwrap()).unwrap(), 8.0 * v - 4.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(chsh_score(&tsirelson_box::<f64>()).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn pr_satisfies_parity_condition() {
        let pr = pr_box::<f64>();
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let allowed = (a ^ b) == ((1 ^ x) & y);
                        assert_eq!(pr.get(a, b, x, y), if allowed { 0.5 } else { 0.0 });
                    }
                }
            }
        }
    }

    #[test]
    fn pr_mix_marginals_are_uniform() {
        let b = pr_mix::<f64>(0.75).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(b.marginal_a(0, x, y), 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(b.marginal_b(1, x, y), 0.5, epsilon = 1e-15);
            }
        }
        assert!(b.is_nonsignaling(1e-12));
        assert!(pr_mix::<f64>(1.5).is_err());
    }

    #[test]
    fn simple_boxes_score_as_expected() {
        let det = BipartiteBox::<f64>::deterministic(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(chsh_score(&det).unwrap(), 2.0);
        let uni = BipartiteBox::<f64>::uniform([2, 2], [2, 2]).unwrap();
        assert_eq!(chsh_score(&uni).unwrap(), 0.0);
        let k3 = BipartiteBox::<f64>::uniform([3, 3], [2, 2]).unwrap();
        assert!(matches!(chsh_score(&k3), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn box_validation() {
        assert!(BipartiteBox::new([2, 2], [2, 2], vec![0.25; 15]).is_err());
        assert!(BipartiteBox::new([1, 1], [2, 2], vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(BipartiteBox::new([1, 1], [2, 2], vec![0.5, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn signaling_box_is_flagged() {
        // b copies x: legal table, but signals from A to B.
        let b = BipartiteBox::<f64>::from_fn([2, 2], [2, 2], |a, b, x, _| {
            if a == 0 && b == x {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(!b.is_nonsignaling(1e-12));
    }

    #[test]
    fn singlet_box_is_tsirelson() {
        let q = box_from_quantum(&singlet::<f64>(), &optimal_settings(2).unwrap()).unwrap();
        assert!(q.max_abs_diff(&tsirelson_box()).unwrap() < 1e-9);
        assert!(q.is_nonsignaling(1e-12));
    }

    #[test]
    fn quantum_box_scores_agree_with_direct_correlators() {
        for k in 2..=6 {
            let spec = optimal_settings::<f64>(k).unwrap();
            let q = box_from_quantum(&singlet(), &spec).unwrap();
            let direct = chained_score(&singlet(), &spec).unwrap();
            assert_abs_diff_eq!(chained_box_score(&q).unwrap(), direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_box_is_uniform() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(4).unwrap();
        let q = box_from_quantum(&mixed, &optimal_settings(3).unwrap()).unwrap();
        assert!(q.table().iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn line_product_marginals() {
        let l = pr_mix::<f64>(0.9).unwrap();
        let r = BipartiteBox::deterministic(&[1, 0], &[0, 1]).unwrap();
        let d = tensor_line(&l, &r).unwrap();
        assert!(d.edge_marginal(0).unwrap().max_abs_diff(&l).unwrap() < 1e-15);
        assert!(d.edge_marginal(1).unwrap().max_abs_diff(&r).unwrap() < 1e-15);
    }

    #[test]
    fn deterministic_product_is_deterministic() {
        let l = BipartiteBox::<f64>::deterministic(&[0, 1], &[1, 1]).unwrap();
        let r = BipartiteBox::<f64>::deterministic(&[1, 0], &[0, 0]).unwrap();
        let d = tensor_line(&l, &r).unwrap();
        assert!(d.table().iter().all(|&p| p == 0.0 || p == 1.0));
    }

    #[test]
    fn locality_of_canonical_boxes() {
        match is_local_2222(&pr_box::<f64>()).unwrap() {
            LocalityVerdict::Nonlocal { witness } => {
                assert!(witness.value > 2.0 + 1e-9, "{witness:?}");
                assert_abs_diff_eq!(witness.local_bound, 2.0, epsilon = 1e-12);
            }
            v => panic!("PR box judged local: {v:?}"),
        }
        assert!(is_local_2222(&pr_mix::<f64>(0.75).unwrap()).unwrap().is_local());
        assert!(is_local_2222(&deterministic_vertex::<f64>(9)).unwrap().is_local());
        assert!(!is_local_2222(&tsirelson_box::<f64>()).unwrap().is_local());
    }

    #[test]
    fn paper_decomposition_holds() {
        let cert = verify_paper_decomposition::<f64>().unwrap().unwrap();
        assert_eq!(cert.components.len(), 4);
        assert_abs_diff_eq!(cert.w, 0.9714045207910317, epsilon = 1e-12);
        assert!(cert.max_reconstruction_error <= 1e-12);
        assert!(cert.components.iter().all(|c| c.local_edge_is_local));
    }

    #[test]
    fn wrong_weight_breaks_decomposition() {
        match verify_decomposition_with_weight::<f64>(0.95).unwrap() {
            Err(DecompositionFailure::Reconstruction { max_error, .. }) => assert!(max_error > 1e-3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_json_shape() {
        let b = pr_box::<f64>();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["layout"], "x,y,a,b");
        assert_eq!(v["inputs"], serde_json::json!([2, 2]));
        let back: BipartiteBox<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }
}
