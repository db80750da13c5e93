//! The translation matrix M_x(t), its determinant profile over the base
//! nodes, and the Hadamard / singular-value certificates tying determinant
//! lower bounds to frame-style bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::measure::MultiTileMeasure;

/// The N×N matrix with entries `e^{2πi t_k · g_j(x)}`; rows are indexed by
/// group elements, columns by translations.
#[derive(Debug, Clone)]
pub struct TranslationMatrix {
    pub entries: DMatrix<Complex<f64>>,
}

impl TranslationMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }
}

/// Builds M_x(t) from the group elements at a node and the translations.
pub fn translation_matrix(gs: &[&DVector<f64>], t: &[DVector<f64>]) -> Result<TranslationMatrix> {
    if gs.len() != t.len() {
        return Err(Error::SizeMismatch(gs.len(), t.len()));
    }
    let n = gs.len();
    let mut entries = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let phase = 2.0 * PI * t[k].dot(gs[j]);
            entries[(j, k)] = Complex::from_polar(1.0, phase);
        }
    }
    Ok(TranslationMatrix { entries })
}

/// Determinant of a complex square matrix: exact cofactor expansion for
/// N ≤ 3, pivoted LU elimination otherwise.
pub fn det_complex(m: &DMatrix<Complex<f64>>) -> Complex<f64> {
    match m.nrows() {
        0 => Complex::new(1.0, 0.0),
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.determinant(),
    }
}

/// 𝔇_x(t) at one base node of an assembled measure.
pub fn det_at(m: &MultiTileMeasure, node: usize, t: &[DVector<f64>]) -> Result<Complex<f64>> {
    let gs = m.elements_at(node);
    let tm = translation_matrix(&gs, t)?;
    Ok(det_complex(&tm.entries))
}

/// Profile of |𝔇_x(t)| over all base nodes.
#[derive(Debug, Clone)]
pub struct DetProfile {
    /// |𝔇| per node, in node order.
    pub samples: Vec<f64>,
    /// Minimum over nodes (the discretized essential infimum).
    pub ess_inf: f64,
    /// Node index attaining the minimum (lowest index on ties).
    pub argmin: usize,
    /// Smallest singular value of M_x(t) at the argmin node.
    pub sigma_min: f64,
}

/// Evaluates |𝔇_x(t)| at every quadrature node.
pub fn ess_inf_det(m: &MultiTileMeasure, t: &[DVector<f64>]) -> Result<DetProfile> {
    let n_nodes = m.n_nodes();
    if n_nodes == 0 {
        return Err(Error::PreconditionViolated("measure has no nodes".into()));
    }
    let mut samples = Vec::with_capacity(n_nodes);
    let mut ess_inf = f64::INFINITY;
    let mut argmin = 0;
    for i in 0..n_nodes {
        let d = det_at(m, i, t)?.norm();
        if d < ess_inf {
            ess_inf = d;
            argmin = i;
        }
        samples.push(d);
    }
    let gs = m.elements_at(argmin);
    let tm = translation_matrix(&gs, t)?;
    let svd = tm.entries.svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(DetProfile {
        samples,
        ess_inf,
        argmin,
        sigma_min,
    })
}

/// Singular-value certificate: computes σ_min(M) and the analytic floor
/// `|det M| / N^{N-1}` (the Frobenius ceiling σ_max ≤ N for unimodular
/// entries). Verifies σ_min against the tighter per-instance bound
/// `|det M| / σ_max^{N-1}`.
pub fn smallest_singular_certificate(
    m: &TranslationMatrix,
    eps0: f64,
) -> Result<(f64, f64)> {
    let n = m.order();
    let abs_det = det_complex(&m.entries).norm();
    if eps0 > abs_det + 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "candidate eps0 {eps0:.6e} exceeds |det| {abs_det:.6e}"
        )));
    }
    let svd = m.entries.clone().svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let sigma_max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let bound = abs_det / (n as f64).powi(n as i32 - 1);
    let per_instance = if sigma_max > 0.0 {
        abs_det / sigma_max.powi(n as i32 - 1)
    } else {
        0.0
    };
    if sigma_min < per_instance - 1e-9 {
        return Err(Error::BoundViolation {
            sigma_min,
            bound: per_instance,
        });
    }
    Ok((sigma_min, bound))
}

/// Hadamard determinant ceilings for a unimodular matrix.
#[derive(Debug, Clone)]
pub struct HadamardBounds {
    /// N^{N/2}.
    pub global: f64,
    /// For every column pair (j, k): N^{(N-1)/2}·‖v_j - v_k‖.
    pub pair_bounds: Vec<((usize, usize), f64)>,
    pub abs_det: f64,
}

pub fn hadamard_bounds(m: &TranslationMatrix) -> HadamardBounds {
    let n = m.order();
    let nf = n as f64;
    let abs_det = det_complex(&m.entries).norm();
    let global = nf.powf(nf / 2.0);
    let mut pair_bounds = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let mut diff_sq = 0.0;
            for r in 0..n {
                diff_sq += (m.entries[(r, j)] - m.entries[(r, k)]).norm_sqr();
            }
            let bound = nf.powf((nf - 1.0) / 2.0) * diff_sq.sqrt();
            pair_bounds.push(((j, k), bound));
        }
    }
    debug_assert!(abs_det <= global + 1e-9);
    debug_assert!(pair_bounds.iter().all(|&(_, b)| abs_det <= b + 1e-9));
    HadamardBounds {
        global,
        pair_bounds,
        abs_det,
    }
}

/// Lipschitz determinant certificate at separation level `eta`.
#[derive(Debug, Clone)]
pub struct LipschitzBound {
    /// The chained bound N^{(N-1)/2}·2π·√N·(max|t_i|)·η.
    pub bound: f64,
    /// The looser constant from the necessity argument, N^N·4π²·(max|t_i|²)·η,
    /// emitted for comparison.
    pub coarse_bound: f64,
    /// Nodes whose minimum pairwise separation is ≤ η.
    pub qualifying_nodes: Vec<usize>,
    /// max |𝔇_x(t)| over the qualifying nodes (0 when none qualify).
    pub max_abs_det_qualifying: f64,
    /// Whether `bound` dominates |𝔇| at every qualifying node.
    pub dominates: bool,
}

/// Bounds |𝔇_x(t)| at every node whose minimum pairwise separation of the
/// translation fields is at most `eta`, by chaining the column-difference
/// Hadamard bound with |e^{iθ} - e^{iφ}| ≤ |θ - φ|.
pub fn lipschitz_det_bound(
    m: &MultiTileMeasure,
    t: &[DVector<f64>],
    eta: f64,
) -> Result<LipschitzBound> {
    if eta < 0.0 {
        return Err(Error::PreconditionViolated("eta must be nonnegative".into()));
    }
    let n = t.len() as f64;
    let max_t = t.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let bound = n.powf((n - 1.0) / 2.0) * 2.0 * PI * n.sqrt() * max_t * eta;
    let coarse_bound = n.powf(n) * 4.0 * PI * PI * max_t * max_t * eta;
    let mut qualifying_nodes = Vec::new();
    let mut max_abs_det_qualifying: f64 = 0.0;
    for i in 0..m.n_nodes() {
        if m.node_min_separation(i) <= eta {
            let d = det_at(m, i, t)?.norm();
            max_abs_det_qualifying = max_abs_det_qualifying.max(d);
            qualifying_nodes.push(i);
        }
    }
    let dominates = max_abs_det_qualifying <= bound + 1e-9;
    Ok(LipschitzBound {
        bound,
        coarse_bound,
        qualifying_nodes,
        max_abs_det_qualifying,
        dominates,
    })
}

/// CSV export of a determinant profile:
/// header `x_1,…,x_d,min_sep,abs_det,sigma_min`, one row per node.
pub fn profile_csv(m: &MultiTileMeasure, t: &[DVector<f64>]) -> Result<String> {
    let d = m.base.dim();
    let mut out = String::new();
    for k in 1..=d {
        if k > 1 {
            out.push(',');
        }
        out.push_str(&format!("x_{k}"));
    }
    out.push_str(",min_sep,abs_det,sigma_min\n");
    for i in 0..m.n_nodes() {
        let gs = m.elements_at(i);
        let tm = translation_matrix(&gs, t)?;
        let abs_det = det_complex(&tm.entries).norm();
        let svd = tm.entries.svd(false, false);
        let sigma_min = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let sep = m.node_min_separation(i);
        let sep = if sep.is_finite() { sep } else { 0.0 };
        for (k, v) in m.base.nodes[i].iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:.11e}"));
        }
        out.push_str(&format!(",{sep:.11e},{abs_det:.11e},{sigma_min:.11e}\n"));
    }
    Ok(out)
}
