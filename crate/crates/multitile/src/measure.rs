//! Quadrature representations of the base measure ν, translation fields
//! g_j(x), and the assembled multi-tiling measure μ = μ₁ + … + μ_N.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::group::ClosedSubgroup;

/// How a 1-D segment is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodePlacement {
    /// Midpoint rule: nodes at (i + 1/2)/n, equal weights.
    #[default]
    Midpoint,
    /// Closed uniform grid including both endpoints, trapezoid weights.
    ClosedUniform,
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    /// 1-D Lebesgue measure on a segment from `a` to `b`, normalized to mass 1.
    LebesgueSegment { a: DVector<f64>, b: DVector<f64> },
    /// Lebesgue measure on an axis-aligned box, midpoint grid, mass 1.
    LebesgueRegion { lo: DVector<f64>, hi: DVector<f64> },
    /// Finitely many atoms.
    Atomic,
    /// Middle-fourth Cantor measure truncated at IFS depth `depth`.
    Cantor4 { depth: u32 },
}

/// A finitely supported (node, weight) approximation of a measure.
#[derive(Debug, Clone)]
pub struct QuadMeasure {
    pub nodes: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    pub total_mass: f64,
    pub kind: MeasureKind,
}

impl QuadMeasure {
    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.len())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lebesgue measure on the segment `[a, b]`, `n` nodes.
    pub fn segment(
        a: DVector<f64>,
        b: DVector<f64>,
        n: usize,
        placement: NodePlacement,
    ) -> Result<QuadMeasure> {
        if n == 0 {
            return Err(Error::BadSpec("segment needs at least one node".into()));
        }
        let dir = &b - &a;
        if dir.norm() == 0.0 {
            return Err(Error::BadSpec("zero-length segment".into()));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        match placement {
            NodePlacement::Midpoint => {
                for i in 0..n {
                    let t = (i as f64 + 0.5) / n as f64;
                    nodes.push(&a + &dir * t);
                    weights.push(1.0 / n as f64);
                }
            }
            NodePlacement::ClosedUniform => {
                if n < 2 {
                    return Err(Error::BadSpec("closed uniform grid needs n >= 2".into()));
                }
                let h = 1.0 / (n - 1) as f64;
                for i in 0..n {
                    let t = i as f64 * h;
                    nodes.push(&a + &dir * t);
                    weights.push(if i == 0 || i == n - 1 { h / 2.0 } else { h });
                }
            }
        }
        Ok(QuadMeasure {
            nodes,
            weights,
            total_mass: 1.0,
            kind: MeasureKind::LebesgueSegment { a, b },
        })
    }

    /// Lebesgue measure on an axis-aligned box, `per_axis` midpoint nodes
    /// along each axis, normalized to mass 1.
    pub fn region(lo: DVector<f64>, hi: DVector<f64>, per_axis: usize) -> Result<QuadMeasure> {
        let d = lo.len();
        if per_axis == 0 || d == 0 {
            return Err(Error::BadSpec("region needs per_axis >= 1".into()));
        }
        if hi.len() != d || (0..d).any(|i| hi[i] <= lo[i]) {
            return Err(Error::BadSpec("degenerate region box".into()));
        }
        let total = per_axis.pow(d as u32);
        let w = 1.0 / total as f64;
        let mut nodes = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx = flat;
            let mut p = DVector::zeros(d);
            for k in 0..d {
                let i = idx % per_axis;
                idx /= per_axis;
                let t = (i as f64 + 0.5) / per_axis as f64;
                p[k] = lo[k] + t * (hi[k] - lo[k]);
            }
            nodes.push(p);
        }
        Ok(QuadMeasure {
            nodes,
            weights: vec![w; total],
            total_mass: 1.0,
            kind: MeasureKind::LebesgueRegion { lo, hi },
        })
    }

    /// Atomic measure with the given points and weights.
    pub fn atomic(nodes: Vec<DVector<f64>>, weights: Vec<f64>) -> Result<QuadMeasure> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::BadSpec("atom list and weights must match".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::BadSpec("atom weights must be positive".into()));
        }
        let total_mass = weights.iter().sum();
        Ok(QuadMeasure {
            nodes,
            weights,
            total_mass,
            kind: MeasureKind::Atomic,
        })
    }

    /// Middle-fourth Cantor measure truncated at depth `K`: the 2^K points
    /// `Σ_{k=1..K} d_k · 2/4^k` with digits `d_k ∈ {0,1}`, weight `2^-K` each.
    ///
    /// These are the depth-K images of the IFS fixed point 0 under
    /// `x ↦ x/4` and `x ↦ x/4 + 1/2`.
    pub fn cantor4(depth: u32) -> Result<QuadMeasure> {
        if depth == 0 {
            return Err(Error::BadSpec("cantor4 depth must be >= 1".into()));
        }
        let count = 1usize << depth;
        let w = 1.0 / count as f64;
        let mut nodes = Vec::with_capacity(count);
        for bits in 0..count {
            let mut x = 0.0;
            for k in 1..=depth {
                if bits >> (k - 1) & 1 == 1 {
                    x += 2.0 / 4f64.powi(k as i32);
                }
            }
            nodes.push(DVector::from_vec(vec![x]));
        }
        nodes.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap());
        Ok(QuadMeasure {
            nodes,
            weights: vec![w; count],
            total_mass: 1.0,
            kind: MeasureKind::Cantor4 { depth },
        })
    }

    /// Checks that every node reduces to itself modulo `G` (g = 0), i.e. the
    /// support lies in the declared fundamental domain.
    pub fn check_in_fundamental_domain(&self, group: &ClosedSubgroup) -> Result<()> {
        for (i, p) in self.nodes.iter().enumerate() {
            let r = group.reduce_mod(p);
            let g = group.element(&r);
            if g.norm() > 10.0 * group.tol() {
                return Err(Error::BadSpec(format!(
                    "node {i} is outside the fundamental domain (residue element norm {:.3e})",
                    g.norm()
                )));
            }
        }
        Ok(())
    }
}

/// Quadrature Fourier transform `Σ_i w_i e^{-2πi ξ·x_i}` of a point cloud.
pub fn cloud_fourier(nodes: &[DVector<f64>], weights: &[f64], xi: &DVector<f64>) -> Complex<f64> {
    let mut acc = Complex::new(0.0, 0.0);
    for (x, &w) in nodes.iter().zip(weights) {
        let phase = -2.0 * PI * xi.dot(x);
        acc += Complex::from_polar(w, phase);
    }
    acc
}

/// Exact transform of the unit-mass Lebesgue measure on the segment `[a, b]`.
pub fn segment_fourier_exact(a: &DVector<f64>, b: &DVector<f64>, xi: &DVector<f64>) -> Complex<f64> {
    // ∫_0^1 e^{-2πi ξ·(a + t(b-a))} dt
    let u = xi.dot(&(b - a));
    let head = Complex::from_polar(1.0, -2.0 * PI * xi.dot(a));
    if u.abs() < 1e-14 {
        return head;
    }
    // (1 - e^{-2πiu}) / (2πiu), written via sinc for stability.
    let core = Complex::from_polar((PI * u).sin() / (PI * u), -PI * u);
    head * core
}

/// Exact transform of the truncated middle-fourth Cantor measure:
/// `∏_{k=1..K} (1 + e^{-2πi ξ·2/4^k}) / 2`.
pub fn cantor4_fourier_exact(depth: u32, xi: f64) -> Complex<f64> {
    let mut acc = Complex::new(1.0, 0.0);
    for k in 1..=depth {
        let step = 2.0 / 4f64.powi(k as i32);
        acc *= (Complex::new(1.0, 0.0) + Complex::from_polar(1.0, -2.0 * PI * xi * step)) / 2.0;
    }
    acc
}

/// Measures that can be Fourier-transformed at a frequency vector.
pub trait FourierMeasure {
    fn dim(&self) -> usize;
    fn total_mass(&self) -> f64;
    /// All atoms as (node, weight) pairs of the discretization.
    fn atoms(&self) -> (Vec<DVector<f64>>, Vec<f64>);
    /// Quadrature transform.
    fn fourier(&self, xi: &DVector<f64>) -> Complex<f64>;
    /// Closed-form transform where one exists (segments, cantor4).
    fn fourier_exact(&self, xi: &DVector<f64>) -> Option<Complex<f64>>;
}

impl FourierMeasure for QuadMeasure {
    fn dim(&self) -> usize {
        QuadMeasure::dim(self)
    }

    fn total_mass(&self) -> f64 {
        self.total_mass
    }

    fn atoms(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        (self.nodes.clone(), self.weights.clone())
    }

    fn fourier(&self, xi: &DVector<f64>) -> Complex<f64> {
        cloud_fourier(&self.nodes, &self.weights, xi)
    }

    fn fourier_exact(&self, xi: &DVector<f64>) -> Option<Complex<f64>> {
        match &self.kind {
            MeasureKind::LebesgueSegment { a, b } => Some(segment_fourier_exact(a, b, xi)),
            MeasureKind::Cantor4 { depth } => Some(cantor4_fourier_exact(*depth, xi[0])),
            MeasureKind::Atomic => Some(self.fourier(xi)),
            MeasureKind::LebesgueRegion { .. } => None,
        }
    }
}

/// A map from base nodes to group elements g_j(x).
#[derive(Debug, Clone)]
pub enum TranslationField {
    /// g(x) = 0.
    Zero,
    /// Constant shift by a fixed group element.
    Shift(DVector<f64>),
    /// Square-boundary field over the base segment [0,1]x{0}:
    /// g(x) = (0, s·(x + δ/2)) for x ≤ 1/2, (0, s·(1 - x + δ/2)) for x > 1/2.
    SquareBoundary { sign: f64, delta: f64 },
    /// Rotated plus-space field over the base segment [0, 1/√2]x{0}:
    /// g(x) = (0, s·(x - 1/(2√2))).
    PlusSpace { sign: f64 },
    /// Helix field in R^3: g(x) = (0, cos 2πx, sin 2πx).
    Helix,
    /// Piecewise-linear interpolation of a user table along coordinate `axis`.
    PiecewiseLinear {
        axis: usize,
        breakpoints: Vec<f64>,
        values: Vec<DVector<f64>>,
    },
}

impl TranslationField {
    pub fn evaluate(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            TranslationField::Zero => DVector::zeros(x.len()),
            TranslationField::Shift(v) => v.clone(),
            TranslationField::SquareBoundary { sign, delta } => {
                let s = x[0];
                let y = if s <= 0.5 { s + delta / 2.0 } else { 1.0 - s + delta / 2.0 };
                DVector::from_vec(vec![0.0, sign * y])
            }
            TranslationField::PlusSpace { sign } => {
                let half = 0.5 / 2f64.sqrt();
                DVector::from_vec(vec![0.0, sign * (x[0] - half)])
            }
            TranslationField::Helix => {
                let theta = 2.0 * PI * x[0];
                DVector::from_vec(vec![0.0, theta.cos(), theta.sin()])
            }
            TranslationField::PiecewiseLinear {
                axis,
                breakpoints,
                values,
            } => {
                let s = x[*axis];
                let n = breakpoints.len();
                if s <= breakpoints[0] {
                    return values[0].clone();
                }
                if s >= breakpoints[n - 1] {
                    return values[n - 1].clone();
                }
                let i = breakpoints.partition_point(|&b| b <= s) - 1;
                let t = (s - breakpoints[i]) / (breakpoints[i + 1] - breakpoints[i]);
                &values[i] * (1.0 - t) + &values[i + 1] * t
            }
        }
    }
}

/// A validated component: the base nodes translated by one field.
#[derive(Debug, Clone)]
pub struct Component {
    /// Group elements g_j(x_i) at every base node.
    pub elements: Vec<DVector<f64>>,
    /// Translated support cloud x_i + g_j(x_i).
    pub support: Vec<DVector<f64>>,
}

/// Evaluates a field on all base nodes and checks group membership.
pub fn build_component(
    base: &QuadMeasure,
    field: &TranslationField,
    group: &ClosedSubgroup,
    field_index: usize,
) -> Result<Component> {
    let mut elements = Vec::with_capacity(base.len());
    let mut support = Vec::with_capacity(base.len());
    for (i, x) in base.nodes.iter().enumerate() {
        let g = field.evaluate(x);
        let dist = group.distance(&g);
        if dist > group.tol() {
            return Err(Error::NotInGroup {
                field: field_index,
                node: i,
                distance: dist,
            });
        }
        support.push(x + &g);
        elements.push(g);
    }
    Ok(Component { elements, support })
}

/// The assembled multi-tiling measure μ = μ₁ + … + μ_N.
#[derive(Debug, Clone)]
pub struct MultiTileMeasure {
    pub group: ClosedSubgroup,
    pub base: QuadMeasure,
    pub components: Vec<Component>,
    /// Recorded boundedness constant: max over nodes and j≠k of |g_j - g_k|.
    pub bound_m: f64,
}

impl MultiTileMeasure {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.base.len()
    }

    /// Group elements of all components at node `i`.
    pub fn elements_at(&self, i: usize) -> Vec<&DVector<f64>> {
        self.components.iter().map(|c| &c.elements[i]).collect()
    }

    /// Per-node minimum pairwise distance between component translations.
    pub fn node_min_separation(&self, i: usize) -> f64 {
        let n = self.components.len();
        let mut best = f64::INFINITY;
        for j in 0..n {
            for k in (j + 1)..n {
                let d = (&self.components[j].elements[i] - &self.components[k].elements[i]).norm();
                best = best.min(d);
            }
        }
        best
    }

    /// Exports the support clouds as CSV rows
    /// `(component_index, x_1..x_d, weight)`.
    pub fn support_csv(&self) -> String {
        let d = self.base.dim();
        let mut out = String::from("component_index");
        for k in 1..=d {
            out.push_str(&format!(",x_{k}"));
        }
        out.push_str(",weight\n");
        for (j, comp) in self.components.iter().enumerate() {
            for (p, w) in comp.support.iter().zip(&self.base.weights) {
                out.push_str(&format!("{j}"));
                for v in p.iter() {
                    out.push_str(&format!(",{v:.11e}"));
                }
                out.push_str(&format!(",{w:.11e}\n"));
            }
        }
        out
    }
}

impl FourierMeasure for MultiTileMeasure {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn total_mass(&self) -> f64 {
        self.base.total_mass * self.components.len() as f64
    }

    fn atoms(&self) -> (Vec<DVector<f64>>, Vec<f64>) {
        let mut nodes = Vec::with_capacity(self.base.len() * self.components.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for comp in &self.components {
            nodes.extend(comp.support.iter().cloned());
            weights.extend(self.base.weights.iter().copied());
        }
        (nodes, weights)
    }

    fn fourier(&self, xi: &DVector<f64>) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for comp in &self.components {
            acc += cloud_fourier(&comp.support, &self.base.weights, xi);
        }
        acc
    }

    fn fourier_exact(&self, xi: &DVector<f64>) -> Option<Complex<f64>> {
        // Exact per-component transforms exist only for piecewise-linear
        // supports; the quadrature path is the general contract.
        match &self.base.kind {
            MeasureKind::Atomic | MeasureKind::Cantor4 { .. } => {
                // Atoms are exact: the cloud sum is the measure itself.
                Some(self.fourier(xi))
            }
            _ => None,
        }
    }
}

/// Assembles μ from a base measure and N translation fields, enforcing the
/// pairwise essential-disjointness of the translated supports.
///
/// `collision_budget` exact collisions (pairs closer than `sep_tol`) are
/// tolerated, to admit measure-zero contacts such as polygon corners.
pub fn assemble_multitile(
    group: &ClosedSubgroup,
    base: &QuadMeasure,
    fields: &[TranslationField],
    sep_tol: f64,
    collision_budget: usize,
) -> Result<MultiTileMeasure> {
    if fields.is_empty() {
        return Err(Error::BadSpec("need at least one translation field".into()));
    }
    let components: Vec<Component> = fields
        .iter()
        .enumerate()
        .map(|(j, f)| build_component(base, f, group, j))
        .collect::<Result<_>>()?;

    // Disjointness: spatial hash on cells of size sep_tol, checking
    // neighboring cells for points of a different component.
    let d = base.dim();
    let cell = sep_tol.max(1e-300);
    let mut grid: HashMap<Vec<i64>, Vec<(usize, usize)>> = HashMap::new();
    for (j, comp) in components.iter().enumerate() {
        for (i, p) in comp.support.iter().enumerate() {
            let key: Vec<i64> = p.iter().map(|&v| (v / cell).floor() as i64).collect();
            grid.entry(key).or_default().push((j, i));
        }
    }
    let mut collisions: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    let offsets = neighbor_offsets(d);
    for (j, comp) in components.iter().enumerate() {
        for (i, p) in comp.support.iter().enumerate() {
            let key: Vec<i64> = p.iter().map(|&v| (v / cell).floor() as i64).collect();
            for off in &offsets {
                let nk: Vec<i64> = key.iter().zip(off).map(|(a, b)| a + b).collect();
                if let Some(bucket) = grid.get(&nk) {
                    for &(k, q) in bucket {
                        if k <= j {
                            continue;
                        }
                        let dist = (p - &components[k].support[q]).norm();
                        if dist < sep_tol {
                            collisions.push((j, k, i, q, dist));
                        }
                    }
                }
            }
        }
    }
    if collisions.len() > collision_budget {
        let &(comp_a, comp_b, node_a, node_b, distance) = collisions.first().unwrap();
        return Err(Error::OverlappingComponents {
            comp_a,
            comp_b,
            node_a,
            node_b,
            distance,
        });
    }

    let mut bound_m: f64 = 0.0;
    for i in 0..base.len() {
        for j in 0..components.len() {
            for k in (j + 1)..components.len() {
                let d = (&components[j].elements[i] - &components[k].elements[i]).norm();
                bound_m = bound_m.max(d);
            }
        }
    }

    Ok(MultiTileMeasure {
        group: group.clone(),
        base: base.clone(),
        components,
        bound_m,
    })
}

fn neighbor_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * 3);
        for prefix in &out {
            for step in [-1i64, 0, 1] {
                let mut v = prefix.clone();
                v.push(step);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// An axis-aligned box in H-coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl HBox {
    fn point(p: &[f64]) -> HBox {
        HBox {
            lo: p.to_vec(),
            hi: p.to_vec(),
        }
    }

    /// Chebyshev gap between two boxes (0 when they overlap).
    fn gap(&self, other: &HBox) -> f64 {
        let mut g: f64 = 0.0;
        for k in 0..self.lo.len() {
            let lo = self.lo[k].max(other.lo[k]);
            let hi = self.hi[k].min(other.hi[k]);
            if lo > hi {
                g = g.max(lo - hi);
            }
        }
        g
    }

    fn merge(&mut self, other: &HBox) {
        for k in 0..self.lo.len() {
            self.lo[k] = self.lo[k].min(other.lo[k]);
            self.hi[k] = self.hi[k].max(other.hi[k]);
        }
    }

    /// Rounds the box outward to multiples of `quantum`.
    fn round_outward(&mut self, quantum: f64) {
        for k in 0..self.lo.len() {
            self.lo[k] = (self.lo[k] / quantum).floor() * quantum;
            self.hi[k] = (self.hi[k] / quantum).ceil() * quantum;
        }
    }

    pub fn contains_origin(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(&l, &h)| l <= 0.0 && h >= 0.0)
    }
}

/// One cluster of observed differences: a lattice part γ plus boxes covering
/// the H-parts.
#[derive(Debug, Clone)]
pub struct GammaCluster {
    pub gamma_coeffs: Vec<i64>,
    pub gamma: DVector<f64>,
    pub h_boxes: Vec<HBox>,
}

impl GammaCluster {
    pub fn is_zero(&self) -> bool {
        self.gamma_coeffs.iter().all(|&c| c == 0)
    }
}

/// Covering `𝒦 ⊇ 𝓜 = {g_j(x) - g_k(x)}` by boxes over lattice residues.
#[derive(Debug, Clone)]
pub struct DifferenceCover {
    pub clusters: Vec<GammaCluster>,
    pub contains_zero_gamma: bool,
}

/// Parameters for the difference-cover box construction.
#[derive(Debug, Clone, Copy)]
pub struct CoverParams {
    /// Boxes closer than this along every axis are merged.
    pub merge_tol: f64,
    /// Box endpoints are rounded outward to multiples of this quantum
    /// (a binary-exact value so common bounds like 1/2 and 3/2 stay exact).
    pub quantum: f64,
}

impl Default for CoverParams {
    fn default() -> Self {
        CoverParams {
            merge_tol: 0.1,
            quantum: 1.0 / 16.0,
        }
    }
}

/// Computes the difference cover of an assembled multi-tiling measure:
/// every observed difference g_j(x) - g_k(x) (both orders) is decomposed as
/// γ + h, differences are clustered by γ, and the H-parts per cluster are
/// covered by merged, outward-rounded boxes.
pub fn difference_cover(m: &MultiTileMeasure, params: CoverParams) -> Result<DifferenceCover> {
    let group = &m.group;
    let s = group.h_dim();
    let n = m.n_components();

    // Cluster raw difference points by their integer gamma part. H-parts are
    // deduplicated on a fine grid before box clustering.
    let dedupe = params.quantum / 8.0;
    let mut raw: HashMap<Vec<i64>, HashMap<Vec<i64>, Vec<f64>>> = HashMap::new();
    for i in 0..m.n_nodes() {
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let diff = &m.components[j].elements[i] - &m.components[k].elements[i];
                let (gamma_coeffs, h_coords) = group.decompose(&diff)?;
                let key: Vec<i64> = h_coords.iter().map(|&v| (v / dedupe).round() as i64).collect();
                raw.entry(gamma_coeffs).or_default().entry(key).or_insert(h_coords);
            }
        }
    }

    let mut clusters = Vec::new();
    let mut contains_zero_gamma = false;
    let mut keys: Vec<Vec<i64>> = raw.keys().cloned().collect();
    keys.sort();
    for gamma_coeffs in keys {
        let points = &raw[&gamma_coeffs];
        let mut boxes: Vec<HBox> = points.values().map(|p| HBox::point(p)).collect();
        if s > 0 {
            boxes = merge_boxes(boxes, params.merge_tol);
            for b in &mut boxes {
                b.round_outward(params.quantum);
            }
            boxes = merge_boxes(boxes, 0.0);
        } else {
            boxes = vec![HBox { lo: vec![], hi: vec![] }];
        }
        let mut gamma = DVector::zeros(group.dim());
        for (c, g) in gamma_coeffs.iter().zip(group.gamma_basis()) {
            gamma += g * (*c as f64);
        }
        if gamma_coeffs.iter().all(|&c| c == 0) {
            contains_zero_gamma = true;
        }
        clusters.push(GammaCluster {
            gamma_coeffs,
            gamma,
            h_boxes: boxes,
        });
    }

    Ok(DifferenceCover {
        clusters,
        contains_zero_gamma,
    })
}

fn merge_boxes(mut boxes: Vec<HBox>, merge_tol: f64) -> Vec<HBox> {
    loop {
        let mut merged_any = false;
        let mut out: Vec<HBox> = Vec::with_capacity(boxes.len());
        'outer: for b in boxes.drain(..) {
            for existing in &mut out {
                if existing.gap(&b) <= merge_tol {
                    existing.merge(&b);
                    merged_any = true;
                    continue 'outer;
                }
            }
            out.push(b);
        }
        boxes = out;
        if !merged_any {
            return boxes;
        }
    }
}

impl DifferenceCover {
    /// Samples 𝒦 as ambient points: for every cluster and box, the box
    /// corners plus a uniform grid with `per_edge` points along each edge,
    /// each embedded as `γ + Σ coords·h_i`.
    pub fn sample_points(&self, group: &ClosedSubgroup, per_edge: usize) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for cluster in &self.clusters {
            for hbox in &cluster.h_boxes {
                for coords in box_samples(hbox, per_edge) {
                    let mut p = cluster.gamma.clone();
                    for (c, h) in coords.iter().zip(group.h_basis()) {
                        p += h * *c;
                    }
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Grid + corner samples of a box (H-coordinates).
pub fn box_samples(hbox: &HBox, per_edge: usize) -> Vec<Vec<f64>> {
    let d = hbox.lo.len();
    if d == 0 {
        return vec![vec![]];
    }
    let per_edge = per_edge.max(2);
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(d);
    for k in 0..d {
        let (lo, hi) = (hbox.lo[k], hbox.hi[k]);
        if hi - lo < 1e-15 {
            axes.push(vec![lo]);
            continue;
        }
        let mut ticks = Vec::with_capacity(per_edge);
        for i in 0..per_edge {
            ticks.push(lo + (hi - lo) * i as f64 / (per_edge - 1) as f64);
        }
        axes.push(ticks);
    }
    let mut out = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &t in axis {
                let mut v = prefix.clone();
                v.push(t);
                next.push(v);
            }
        }
        out = next;
    }
    out
}
