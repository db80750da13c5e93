//! Empirical Riesz-sequence and frame bound estimates via finite sections of
//! the Gram and frame operators of an exponential system against a
//! discretized measure.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::measure::FourierMeasure;
use crate::spectrum::SpectrumPlan;

use std::f64::consts::PI;

/// Which transform feeds the Gram entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierPath {
    /// Weighted node sums.
    Quadrature,
    /// Closed-form transform where the measure has one; falls back to
    /// quadrature otherwise.
    Exact,
}

/// Finite Gram section of {e^{2πiλ·x}}_{λ ∈ freqs} in L²(μ).
#[derive(Debug, Clone)]
pub struct GramSection {
    pub freqs: Vec<DVector<f64>>,
    pub matrix: DMatrix<Complex<f64>>,
    pub eig_min: f64,
    pub eig_max: f64,
}

fn transform(m: &dyn FourierMeasure, xi: &DVector<f64>, path: FourierPath) -> Complex<f64> {
    match path {
        FourierPath::Quadrature => m.fourier(xi),
        FourierPath::Exact => m.fourier_exact(xi).unwrap_or_else(|| m.fourier(xi)),
    }
}

fn hermitian_extremes(s: &DMatrix<Complex<f64>>) -> (f64, f64) {
    if s.nrows() == 0 {
        return (0.0, 0.0);
    }
    let eig = s.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in eig.eigenvalues.iter() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

/// Assembles the Hermitian Gram section with entries `fourier(λ_j - λ_k)`
/// and its eigenvalue extremes.
pub fn gram_matrix(
    m: &dyn FourierMeasure,
    freqs: &[DVector<f64>],
    path: FourierPath,
) -> Result<GramSection> {
    for j in 0..freqs.len() {
        for k in (j + 1)..freqs.len() {
            if (&freqs[j] - &freqs[k]).norm() < 1e-12 {
                return Err(Error::DuplicateFrequency(j, k));
            }
        }
    }
    let l = freqs.len();
    let mut matrix = DMatrix::zeros(l, l);
    for j in 0..l {
        for k in j..l {
            let entry = transform(m, &(&freqs[j] - &freqs[k]), path);
            matrix[(j, k)] = entry;
            matrix[(k, j)] = entry.conj();
        }
    }
    let (eig_min, eig_max) = hermitian_extremes(&matrix);
    Ok(GramSection {
        freqs: freqs.to_vec(),
        matrix,
        eig_min,
        eig_max,
    })
}

/// Riesz bounds of the truncated system: Gram eigenvalue extremes.
pub fn riesz_bounds_estimate(
    m: &dyn FourierMeasure,
    freqs: &[DVector<f64>],
    path: FourierPath,
) -> Result<(f64, f64)> {
    let g = gram_matrix(m, freqs, path)?;
    Ok((g.eig_min, g.eig_max))
}

/// Finite frame-operator section over the measure's atoms.
#[derive(Debug, Clone)]
pub struct FrameSection {
    pub matrix: DMatrix<Complex<f64>>,
    pub eig_min: f64,
    pub eig_max: f64,
}

/// Frame bounds of the truncated system acting on the atom space:
/// eigenvalue extremes of `S_pq = √(w_p w_q) Σ_λ e^{2πiλ·(x_p - x_q)}`.
///
/// With fewer frequencies than atoms the synthesis matrix cannot have full
/// row rank, so eig_min is 0 and eig_max comes from the smaller
/// frequency-side Gram, which shares the nonzero spectrum of S.
pub fn frame_bounds_estimate(m: &dyn FourierMeasure, freqs: &[DVector<f64>]) -> Result<(f64, f64)> {
    let (nodes, weights) = m.atoms();
    let n_atoms = nodes.len();
    let l = freqs.len();
    if l == 0 {
        return Ok((0.0, 0.0));
    }
    let mut v = DMatrix::zeros(n_atoms, l);
    for (p, (x, w)) in nodes.iter().zip(weights.iter()).enumerate() {
        let sw = w.sqrt();
        for (q, lam) in freqs.iter().enumerate() {
            v[(p, q)] = Complex::from_polar(sw, 2.0 * PI * lam.dot(x));
        }
    }
    if l < n_atoms {
        let small = v.adjoint() * &v;
        let (_, hi) = hermitian_extremes(&small);
        Ok((0.0, hi))
    } else {
        let s = &v * v.adjoint();
        let (lo, hi) = hermitian_extremes(&s);
        Ok((lo.max(0.0), hi))
    }
}

/// One row of a truncation scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub k: i64,
    pub riesz_a: f64,
    pub riesz_b: f64,
    pub frame_a: f64,
    pub frame_b: f64,
    /// Max per-entry Gram difference against the refined measure, if one
    /// was supplied.
    pub gram_drift: f64,
}

#[derive(Debug, Clone)]
pub struct BoundScan {
    pub rows: Vec<ScanRow>,
}

impl BoundScan {
    pub fn csv(&self) -> String {
        let mut out = String::from("K,riesz_A,riesz_B,frame_A,frame_B,gram_drift\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                r.k, r.riesz_a, r.riesz_b, r.frame_a, r.frame_b, r.gram_drift
            ));
        }
        out
    }
}

fn max_entry_diff(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Runs Riesz and frame bound estimates at each truncation radius of the
/// plan's structured set. `refined` is the same measure at doubled node
/// count; when present, the per-entry Gram drift separates quadrature error
/// from truncation error.
pub fn bound_convergence_scan(
    m: &crate::measure::MultiTileMeasure,
    plan: &SpectrumPlan,
    k_list: &[i64],
    path: FourierPath,
    refined: Option<&crate::measure::MultiTileMeasure>,
) -> Result<BoundScan> {
    for w in k_list.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::PreconditionViolated(
                "truncation list must be strictly ascending".into(),
            ));
        }
    }
    let mut rows = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let sub = crate::spectrum::structured_spectrum(&m.group, &plan.dual, &plan.t, k)?;
        let freqs = sub.frequencies();
        let gram = gram_matrix(m, &freqs, path)?;
        let (frame_a, frame_b) = frame_bounds_estimate(m, &freqs)?;
        let gram_drift = match refined {
            Some(fine) => {
                let fine_gram = gram_matrix(fine, &freqs, path)?;
                max_entry_diff(&gram.matrix, &fine_gram.matrix)
            }
            None => 0.0,
        };
        rows.push(ScanRow {
            k,
            riesz_a: gram.eig_min,
            riesz_b: gram.eig_max,
            frame_a,
            frame_b,
            gram_drift,
        });
    }
    Ok(BoundScan { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_subgroup, vec2, DEFAULT_TOL};
    use crate::measure::{
        assemble_multitile, difference_cover, CoverParams, MultiTileMeasure, NodePlacement,
        QuadMeasure, TranslationField,
    };
    use crate::spectrum::{
        classify_case, construct_v, structured_spectrum, vandermonde_t, SearchParams,
    };
    use nalgebra::dvector;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn freqs1(vals: &[f64]) -> Vec<DVector<f64>> {
        vals.iter().map(|&v| dvector![v]).collect()
    }

    #[test]
    fn lebesgue_unit_interval_identity_exact() {
        let m = QuadMeasure::segment(dvector![0.0], dvector![1.0], 16, NodePlacement::Midpoint)
            .unwrap();
        let g = gram_matrix(&m, &freqs1(&[-1.0, 0.0, 1.0]), FourierPath::Exact).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((g.matrix[(j, k)] - Complex::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        assert!((g.eig_min - 1.0).abs() < 1e-12);
        assert!((g.eig_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_unit_interval_quadrature_error() {
        let m = QuadMeasure::segment(dvector![0.0], dvector![1.0], 2000, NodePlacement::Midpoint)
            .unwrap();
        let f: Vec<f64> = (-5..=5).map(|n| n as f64).collect();
        let (a, b) = riesz_bounds_estimate(&m, &freqs1(&f), FourierPath::Quadrature).unwrap();
        assert!((a - 1.0).abs() < 1e-3);
        assert!((b - 1.0).abs() < 1e-3);
    }

    #[test]
    fn cantor4_jp_spectrum_identity() {
        let m = QuadMeasure::cantor4(3).unwrap();
        let g = gram_matrix(&m, &freqs1(&[0.0, 1.0, 4.0, 5.0]), FourierPath::Exact).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (g.matrix[(j, k)] - Complex::new(expect, 0.0)).norm() < 1e-14,
                    "entry ({j},{k}) = {}",
                    g.matrix[(j, k)]
                );
            }
        }
    }

    #[test]
    fn single_frequency_total_mass() {
        let m = QuadMeasure::cantor4(2).unwrap();
        let g = gram_matrix(&m, &freqs1(&[3.0]), FourierPath::Quadrature).unwrap();
        assert_eq!(g.matrix.nrows(), 1);
        assert!((g.matrix[(0, 0)].re - m.total_mass).abs() < 1e-14);
    }

    #[test]
    fn duplicate_frequency_rejected() {
        let m = QuadMeasure::cantor4(1).unwrap();
        let res = gram_matrix(&m, &freqs1(&[0.0, 1.0, 1.0]), FourierPath::Quadrature);
        assert!(matches!(res, Err(Error::DuplicateFrequency(1, 2))));
    }

    #[test]
    fn gram_psd_and_hermitian() {
        let m = QuadMeasure::segment(dvector![0.0], dvector![1.0], 64, NodePlacement::Midpoint)
            .unwrap();
        let g = gram_matrix(
            &m,
            &freqs1(&[0.0, 0.3, 1.7, -2.2]),
            FourierPath::Quadrature,
        )
        .unwrap();
        assert!(g.eig_min >= -1e-9);
        let h = g.matrix.adjoint();
        assert!(max_entry_diff(&g.matrix, &h) < 1e-10);
        for j in 0..4 {
            assert!((g.matrix[(j, j)].re - m.total_mass).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_single_atom() {
        let m = QuadMeasure::atomic(vec![dvector![0.0]], vec![1.0]).unwrap();
        let (a, b) = frame_bounds_estimate(&m, &freqs1(&[0.0])).unwrap();
        assert!((a - 1.0).abs() < 1e-14);
        assert!((b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frame_two_atoms_quarter() {
        // Atoms at ±1/4, x_p - x_q = 1/2, so the λ=1 term contributes
        // e^{πi} = -1 and S is the identity.
        let m =
            QuadMeasure::atomic(vec![dvector![-0.25], dvector![0.25]], vec![0.5, 0.5]).unwrap();
        let (a, b) = frame_bounds_estimate(&m, &freqs1(&[0.0, 1.0])).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_two_atoms_eighth() {
        // Atoms at ±1/8: off-diagonal (1 + i)/2, eigenvalues 1 ± √2/2.
        let m =
            QuadMeasure::atomic(vec![dvector![0.125], dvector![-0.125]], vec![0.5, 0.5]).unwrap();
        let (a, b) = frame_bounds_estimate(&m, &freqs1(&[0.0, 1.0])).unwrap();
        let r = 0.5f64.sqrt();
        assert!((a - (1.0 - r)).abs() < 1e-12);
        assert!((b - (1.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn frame_empty_freqs() {
        let m = QuadMeasure::atomic(vec![dvector![0.0]], vec![1.0]).unwrap();
        let (a, b) = frame_bounds_estimate(&m, &[]).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn frame_rank_shortcut_matches_dense() {
        // 3 atoms, 2 freqs: shortcut path. 2 atoms, 3 freqs: dense path.
        // Cross-check nonzero top eigenvalue between V V* and V* V.
        let m = QuadMeasure::atomic(
            vec![dvector![0.1], dvector![0.35], dvector![0.8]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let freqs = freqs1(&[0.0, 1.0]);
        let (a, b) = frame_bounds_estimate(&m, &freqs).unwrap();
        assert_eq!(a, 0.0);
        // Dense oracle.
        let (nodes, weights) = m.atoms();
        let mut s = DMatrix::zeros(3, 3);
        for p in 0..3 {
            for q in 0..3 {
                let mut acc = Complex::new(0.0, 0.0);
                for lam in &freqs {
                    acc += Complex::from_polar(
                        1.0,
                        2.0 * PI * lam[0] * (nodes[p][0] - nodes[q][0]),
                    );
                }
                s[(p, q)] = acc * (weights[p] * weights[q]).sqrt();
            }
        }
        let (_, hi) = hermitian_extremes(&s);
        assert!((b - hi).abs() < 1e-12);
    }

    #[test]
    fn weight_scaling_scales_bounds() {
        let base = QuadMeasure::atomic(
            vec![dvector![0.05], dvector![0.4], dvector![0.77]],
            vec![0.25, 0.25, 0.5],
        )
        .unwrap();
        let scaled = QuadMeasure::atomic(
            base.nodes.clone(),
            base.weights.iter().map(|w| w * 3.0).collect(),
        )
        .unwrap();
        let freqs = freqs1(&[0.0, 1.0, 2.0]);
        let (a0, b0) = riesz_bounds_estimate(&base, &freqs, FourierPath::Quadrature).unwrap();
        let (a1, b1) = riesz_bounds_estimate(&scaled, &freqs, FourierPath::Quadrature).unwrap();
        assert!((a1 - 3.0 * a0).abs() < 1e-12);
        assert!((b1 - 3.0 * b0).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_monotone_under_inclusion() {
        let m = QuadMeasure::cantor4(3).unwrap();
        let mut prev = 0.0;
        for count in 1..=6 {
            let f: Vec<f64> = (0..count).map(|n| n as f64 * 0.7).collect();
            let (_, b) = riesz_bounds_estimate(&m, &freqs1(&f), FourierPath::Quadrature).unwrap();
            assert!(b >= prev - 1e-12);
            prev = b;
        }
    }

    fn square_measure(n: usize, delta: f64, placement: NodePlacement) -> MultiTileMeasure {
        let g =
            make_subgroup(2, &[vec2(0.0, 1.0)], &[vec2(1.0, 0.0)], DEFAULT_TOL).unwrap();
        let base = QuadMeasure::segment(vec2(0.0, 0.0), vec2(1.0, 0.0), n, placement).unwrap();
        let fields = vec![
            TranslationField::SquareBoundary { sign: 1.0, delta },
            TranslationField::SquareBoundary { sign: -1.0, delta },
        ];
        assemble_multitile(&g, &base, &fields, 1e-9, 0).unwrap()
    }

    #[test]
    fn scan_separated_square_stable_vs_square_decaying() {
        let k_list = [2i64, 4, 8];

        let m = square_measure(400, 0.5, NodePlacement::ClosedUniform);
        let cover = difference_cover(&m, CoverParams::default()).unwrap();
        let params = SearchParams::default();
        let case = classify_case(&cover, &m.group, &params);
        let cert = construct_v(&cover, &case, &m.group, &params).unwrap();
        let t = vandermonde_t(&cert.v, 2);
        let dual = m.group.dual_group().unwrap();
        let plan = structured_spectrum(&m.group, &dual, &t, 8).unwrap();
        let fine = square_measure(800, 0.5, NodePlacement::ClosedUniform);
        let scan =
            bound_convergence_scan(&m, &plan, &k_list, FourierPath::Quadrature, Some(&fine))
                .unwrap();
        for row in &scan.rows {
            assert!(row.riesz_a >= 0.1, "K={} A={}", row.k, row.riesz_a);
            assert!(row.riesz_b >= row.riesz_a);
            assert!(row.gram_drift < 1e-2);
        }

        let m = square_measure(400, 0.0, NodePlacement::Midpoint);
        let t = vec![vec2(0.0, 0.0), vec2(0.0, 0.5)];
        let plan = structured_spectrum(&m.group, &dual, &t, 8).unwrap();
        let scan = bound_convergence_scan(&m, &plan, &k_list, FourierPath::Quadrature, None)
            .unwrap();
        for w in scan.rows.windows(2) {
            assert!(w[1].riesz_a < w[0].riesz_a);
        }
    }

    #[test]
    fn scan_radius_zero_is_translate_set() {
        let m = square_measure(100, 0.5, NodePlacement::ClosedUniform);
        let dual = m.group.dual_group().unwrap();
        let t = vec![vec2(0.0, 0.0), vec2(0.0, 1.0 / 3.0)];
        let plan = structured_spectrum(&m.group, &dual, &t, 4).unwrap();
        let scan =
            bound_convergence_scan(&m, &plan, &[0], FourierPath::Quadrature, None).unwrap();
        assert_eq!(scan.rows.len(), 1);
        let direct = riesz_bounds_estimate(&m, &t, FourierPath::Quadrature).unwrap();
        assert!((scan.rows[0].riesz_a - direct.0).abs() < 1e-12);
        assert!((scan.rows[0].riesz_b - direct.1).abs() < 1e-12);
    }

    #[test]
    fn translation_consistency_quadratic_form() {
        // For an atomic base, the Gram quadratic form of the structured set
        // equals the weighted sum of ‖M_x(t) s(x)‖² over base atoms, where
        // s(x) holds the per-translate partial sums.
        let g = make_subgroup(
            1,
            &[],
            &[DVector::from_vec(vec![1.0])],
            DEFAULT_TOL,
        )
        .unwrap();
        let base = QuadMeasure::cantor4(2).unwrap();
        let fields = vec![
            TranslationField::Zero,
            TranslationField::Shift(dvector![1.0]),
        ];
        let m = assemble_multitile(&g, &base, &fields, 1e-7, 0).unwrap();
        let dual = g.dual_group().unwrap();
        let t = vec![dvector![0.0], dvector![0.25]];
        let plan = structured_spectrum(&g, &dual, &t, 2).unwrap();
        let freqs = plan.frequencies();
        let gram = gram_matrix(&m, &freqs, FourierPath::Exact).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let c: Vec<Complex<f64>> = (0..freqs.len())
                .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let cv = DVector::from_vec(c.clone());
            let lhs = (cv.adjoint() * &gram.matrix * &cv)[(0, 0)].re;

            let mut rhs = 0.0;
            for (i, x) in m.base.nodes.iter().enumerate() {
                let w = m.base.weights[i];
                // s_k(x) = Σ_λ c_{λ,k} e^{2πi(λ+t_k)·x}
                let mut s = vec![Complex::new(0.0, 0.0); t.len()];
                for (idx, (k, f)) in plan.structured_set.iter().enumerate() {
                    s[*k] += c[idx] * Complex::from_polar(1.0, 2.0 * PI * f.dot(x));
                }
                // rows of M_x(t): e^{2πi t_k·g_j(x)}
                for field in &fields {
                    let gj = field.evaluate(x);
                    let mut row = Complex::new(0.0, 0.0);
                    for (k, tk) in t.iter().enumerate() {
                        row += Complex::from_polar(1.0, 2.0 * PI * tk.dot(&gj)) * s[k];
                    }
                    rhs += w * row.norm_sqr();
                }
            }
            assert!((lhs - rhs).abs() < 1e-8, "lhs={lhs} rhs={rhs}");
        }
    }
}
