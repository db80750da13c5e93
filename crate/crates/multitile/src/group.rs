//! Closed subgroups `G = H ⊕ Γ` of `R^d`, their dual lattices and residue maps.
//!
//! `H` is a linear subspace (stored as an orthonormal basis) and `Γ` is a
//! discrete lattice inside `H^⊥`. The decomposition is supplied by the
//! caller and validated here; it is not discovered from point samples.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default membership / orthogonality tolerance in the ambient Euclidean norm.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A closed additive subgroup `G = H ⊕ Γ` of `R^d`.
///
/// Immutable after construction; all operations are pure.
#[derive(Debug, Clone)]
pub struct ClosedSubgroup {
    dim: usize,
    h_basis: Vec<DVector<f64>>,
    gamma_basis: Vec<DVector<f64>>,
    tol: f64,
}

/// Generators of the dual group `G^⊥ = {x : x·g ∈ Z for all g ∈ G}`.
#[derive(Debug, Clone)]
pub struct DualLattice {
    basis: Vec<DVector<f64>>,
}

/// Result of reducing a point modulo `G`: `point = representative + g` where
/// `g = Σ h_coeffs·h_i + Σ gamma_coeffs·γ_i` and the representative lies in
/// the half-open fundamental cell embedded in `H^⊥`.
#[derive(Debug, Clone)]
pub struct Residue {
    pub representative: DVector<f64>,
    pub h_coeffs: Vec<f64>,
    pub gamma_coeffs: Vec<i64>,
}

impl ClosedSubgroup {
    /// Validates and constructs `G = H ⊕ Γ`.
    ///
    /// `h_basis` is re-orthonormalized by modified Gram-Schmidt. Each lattice
    /// vector is projected onto `H^⊥`; if the projection moves a vector by
    /// `tol` or more the input is rejected as not orthogonal.
    pub fn new(
        dim: usize,
        h_basis: &[DVector<f64>],
        gamma_basis: &[DVector<f64>],
        tol: f64,
    ) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::PreconditionViolated("tol must be positive".into()));
        }
        for v in h_basis.iter().chain(gamma_basis.iter()) {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        if h_basis.len() + gamma_basis.len() > dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h_basis.len() + gamma_basis.len(),
            });
        }

        // Modified Gram-Schmidt on H.
        let mut h_ortho: Vec<DVector<f64>> = Vec::with_capacity(h_basis.len());
        for v in h_basis {
            let mut w = v.clone();
            for u in &h_ortho {
                let c = w.dot(u);
                w -= u * c;
            }
            let n = w.norm();
            if n < tol {
                return Err(Error::DegenerateSubspace);
            }
            h_ortho.push(w / n);
        }

        // Project lattice generators onto H^⊥; reject if they move too much.
        let mut gamma: Vec<DVector<f64>> = Vec::with_capacity(gamma_basis.len());
        for (i, v) in gamma_basis.iter().enumerate() {
            let mut w = v.clone();
            for u in &h_ortho {
                let c = w.dot(u);
                w -= u * c;
            }
            let defect = (&w - v).norm();
            if defect >= tol {
                return Err(Error::NotOrthogonal { index: i, defect });
            }
            gamma.push(w);
        }

        // Linear independence of the lattice generators.
        if !gamma.is_empty() {
            let m = DMatrix::from_columns(&gamma);
            let rank = m.svd(false, false).rank(tol);
            if rank < gamma.len() {
                return Err(Error::DegenerateLattice);
            }
        }

        Ok(ClosedSubgroup {
            dim,
            h_basis: h_ortho,
            gamma_basis: gamma,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Orthonormal basis of the subspace H.
    pub fn h_basis(&self) -> &[DVector<f64>] {
        &self.h_basis
    }

    /// Generators of the discrete lattice Γ ⊂ H^⊥.
    pub fn gamma_basis(&self) -> &[DVector<f64>] {
        &self.gamma_basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn h_dim(&self) -> usize {
        self.h_basis.len()
    }

    pub fn gamma_rank(&self) -> usize {
        self.gamma_basis.len()
    }

    /// Dual lattice `G^⊥`, defined when `rank(Γ) + dim(H) = d`.
    ///
    /// Solves the pairing system `y_i·γ_j = δ_ij`, `y_i ⊥ H`.
    pub fn dual_group(&self) -> Result<DualLattice> {
        let r = self.gamma_basis.len();
        let s = self.h_basis.len();
        if r + s < self.dim {
            return Err(Error::NotFullRank {
                rank: r + s,
                dim: self.dim,
            });
        }
        // Rows: gamma pairings then H orthogonality constraints.
        let mut a = DMatrix::zeros(self.dim, self.dim);
        for (i, g) in self.gamma_basis.iter().enumerate() {
            a.row_mut(i).copy_from(&g.transpose());
        }
        for (i, h) in self.h_basis.iter().enumerate() {
            a.row_mut(r + i).copy_from(&h.transpose());
        }
        let lu = a.lu();
        let mut basis = Vec::with_capacity(r);
        for j in 0..r {
            let mut rhs = DVector::zeros(self.dim);
            rhs[j] = 1.0;
            let y = lu
                .solve(&rhs)
                .ok_or(Error::DegenerateLattice)?;
            basis.push(y);
        }
        Ok(DualLattice { basis })
    }

    /// Coordinates of the `H^⊥` part of `p` in the gamma basis
    /// (least squares; exact when `p` minus its `H` part lies in span Γ).
    fn gamma_coords(&self, p_perp: &DVector<f64>) -> Vec<f64> {
        let r = self.gamma_basis.len();
        if r == 0 {
            return Vec::new();
        }
        let mut gram = DMatrix::zeros(r, r);
        let mut rhs = DVector::zeros(r);
        for i in 0..r {
            for j in 0..r {
                gram[(i, j)] = self.gamma_basis[i].dot(&self.gamma_basis[j]);
            }
            rhs[i] = self.gamma_basis[i].dot(p_perp);
        }
        let c = gram
            .lu()
            .solve(&rhs)
            .expect("gamma basis validated as independent");
        c.iter().copied().collect()
    }

    /// Reduces `p` modulo `G` to the half-open fundamental cell spanned by
    /// the gamma basis inside `H^⊥`, anchored at the origin.
    pub fn reduce_mod(&self, p: &DVector<f64>) -> Residue {
        let h_coeffs: Vec<f64> = self.h_basis.iter().map(|h| h.dot(p)).collect();
        let mut p_perp = p.clone();
        for (c, h) in h_coeffs.iter().zip(&self.h_basis) {
            p_perp -= h * *c;
        }
        let coords = self.gamma_coords(&p_perp);
        let gamma_coeffs: Vec<i64> = coords.iter().map(|c| c.floor() as i64).collect();
        let mut representative = p_perp;
        for (k, g) in gamma_coeffs.iter().zip(&self.gamma_basis) {
            representative -= g * (*k as f64);
        }
        Residue {
            representative,
            h_coeffs,
            gamma_coeffs,
        }
    }

    /// Reconstructs the group element of a residue as an ambient vector.
    pub fn element(&self, res: &Residue) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim);
        for (c, h) in res.h_coeffs.iter().zip(&self.h_basis) {
            g += h * *c;
        }
        for (k, gv) in res.gamma_coeffs.iter().zip(&self.gamma_basis) {
            g += gv * (*k as f64);
        }
        g
    }

    /// Distance from `p` to the nearest point of `G` (nearest-lattice-point
    /// in gamma coordinates; exact for the rectangular lattices used here).
    pub fn distance(&self, p: &DVector<f64>) -> f64 {
        let mut p_perp = p.clone();
        for h in &self.h_basis {
            let c = p_perp.dot(h);
            p_perp -= h * c;
        }
        let coords = self.gamma_coords(&p_perp);
        for (c, g) in coords.iter().zip(&self.gamma_basis) {
            p_perp -= g * c.round();
        }
        p_perp.norm()
    }

    /// True iff `p` lies within `tol` of `H ⊕ Γ`.
    pub fn is_member(&self, p: &DVector<f64>, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    /// Decomposes a group element into its integer gamma coefficients and its
    /// `H`-part coordinates. Fails if `p` is not within `10·tol` of `G`.
    pub fn decompose(&self, p: &DVector<f64>) -> Result<(Vec<i64>, Vec<f64>)> {
        let h_coords: Vec<f64> = self.h_basis.iter().map(|h| h.dot(p)).collect();
        let mut p_perp = p.clone();
        for (c, h) in h_coords.iter().zip(&self.h_basis) {
            p_perp -= h * *c;
        }
        let coords = self.gamma_coords(&p_perp);
        let ints: Vec<i64> = coords.iter().map(|c| c.round() as i64).collect();
        for (k, g) in ints.iter().zip(&self.gamma_basis) {
            p_perp -= g * (*k as f64);
        }
        let residual = p_perp.norm();
        if residual > 10.0 * self.tol {
            return Err(Error::PreconditionViolated(format!(
                "point is not a group element (residual {residual:.3e})"
            )));
        }
        Ok((ints, h_coords))
    }
}

impl DualLattice {
    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// True iff `x ∈ G^⊥`: `x ⊥ H` and `x·γ_i ∈ Z` for the group this dual
    /// was computed from.
    pub fn contains(&self, group: &ClosedSubgroup, x: &DVector<f64>, tol: f64) -> bool {
        for h in group.h_basis() {
            if x.dot(h).abs() > tol {
                return false;
            }
        }
        for g in group.gamma_basis() {
            let p = x.dot(g);
            if (p - p.round()).abs() > tol {
                return false;
            }
        }
        true
    }
}

/// Convenience constructor mirroring the library entry point.
pub fn make_subgroup(
    dim: usize,
    h_basis: &[DVector<f64>],
    gamma_basis: &[DVector<f64>],
    tol: f64,
) -> Result<ClosedSubgroup> {
    ClosedSubgroup::new(dim, h_basis, gamma_basis, tol)
}

pub fn vec2(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

pub fn vec3(x: f64, y: f64, z: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y, z])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_cross_r() -> ClosedSubgroup {
        // G = Z x R: H = {0} x R, Gamma = Z x {0}.
        make_subgroup(2, &[vec2(0.0, 1.0)], &[vec2(1.0, 0.0)], DEFAULT_TOL).unwrap()
    }

    #[test]
    fn make_subgroup_valid_z_cross_r() {
        let g = z_cross_r();
        assert_eq!(g.h_dim(), 1);
        assert_eq!(g.gamma_rank(), 1);
    }

    #[test]
    fn make_subgroup_full_rank_lattice() {
        let g = make_subgroup(
            2,
            &[],
            &[vec2(1.0, 0.0), vec2(0.0, 1.0)],
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(g.h_dim(), 0);
        assert_eq!(g.gamma_rank(), 2);
    }

    #[test]
    fn make_subgroup_rejects_non_orthogonal_gamma() {
        let err = make_subgroup(2, &[vec2(0.0, 1.0)], &[vec2(1.0, 1.0)], DEFAULT_TOL)
            .unwrap_err();
        assert!(matches!(err, Error::NotOrthogonal { .. }));
    }

    #[test]
    fn make_subgroup_rejects_dependent_gamma() {
        let err = make_subgroup(
            2,
            &[],
            &[vec2(1.0, 0.0), vec2(2.0, 0.0)],
            DEFAULT_TOL,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateLattice));
    }

    #[test]
    fn dual_of_r_cross_z() {
        // G = R x Z: H = R x {0}, Gamma = {0} x Z. Dual is {0} x Z.
        let g = make_subgroup(2, &[vec2(1.0, 0.0)], &[vec2(0.0, 1.0)], DEFAULT_TOL).unwrap();
        let dual = g.dual_group().unwrap();
        assert_eq!(dual.rank(), 1);
        assert!((dual.basis()[0].clone() - vec2(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn dual_of_diagonal_lattice() {
        // G = diag(2,3) Z^2, dual basis {(1/2,0),(0,1/3)}.
        let g = make_subgroup(
            2,
            &[],
            &[vec2(2.0, 0.0), vec2(0.0, 3.0)],
            DEFAULT_TOL,
        )
        .unwrap();
        let dual = g.dual_group().unwrap();
        assert!((dual.basis()[0].clone() - vec2(0.5, 0.0)).norm() < 1e-12);
        assert!((dual.basis()[1].clone() - vec2(0.0, 1.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn dual_of_z_cross_r2_in_r3() {
        let g = make_subgroup(
            3,
            &[vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)],
            &[vec3(1.0, 0.0, 0.0)],
            DEFAULT_TOL,
        )
        .unwrap();
        let dual = g.dual_group().unwrap();
        assert!((dual.basis()[0].clone() - vec3(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn dual_refuses_non_full_rank() {
        let g = make_subgroup(3, &[vec3(0.0, 0.0, 1.0)], &[vec3(1.0, 0.0, 0.0)], DEFAULT_TOL)
            .unwrap();
        assert!(matches!(g.dual_group(), Err(Error::NotFullRank { .. })));
    }

    #[test]
    fn reduce_mod_examples() {
        let g = z_cross_r();
        let r = g.reduce_mod(&vec2(0.25, 0.25));
        assert!((r.representative.clone() - vec2(0.25, 0.0)).norm() < 1e-12);
        assert!((g.element(&r) - vec2(0.0, 0.25)).norm() < 1e-12);

        let r = g.reduce_mod(&vec2(1.75, -0.5));
        assert!((r.representative.clone() - vec2(0.75, 0.0)).norm() < 1e-12);
        assert!((g.element(&r) - vec2(1.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn reduce_mod_identity_in_cell() {
        let g = z_cross_r();
        let r = g.reduce_mod(&vec2(0.3, 0.0));
        assert!((r.representative.clone() - vec2(0.3, 0.0)).norm() < 1e-12);
        assert_eq!(r.gamma_coeffs, vec![0]);
        assert!(r.h_coeffs[0].abs() < 1e-12);
    }

    #[test]
    fn reduce_mod_round_trip_and_idempotent() {
        let g = z_cross_r();
        for p in [
            vec2(3.7, -2.2),
            vec2(-0.1, 0.9),
            vec2(10.25, 4.0),
            vec2(-5.5, -5.5),
        ] {
            let r = g.reduce_mod(&p);
            let back = r.representative.clone() + g.element(&r);
            assert!((back - p.clone()).norm() < 10.0 * DEFAULT_TOL);
            let again = g.reduce_mod(&r.representative);
            assert!(again.gamma_coeffs.iter().all(|&k| k == 0));
            assert!(again.h_coeffs.iter().all(|&c| c.abs() < 10.0 * DEFAULT_TOL));
        }
    }

    #[test]
    fn coset_consistency() {
        let g = z_cross_r();
        let p = vec2(0.4, 1.3);
        let shifted = vec2(0.4 + 3.0, 1.3 - 7.5); // + 3*gamma + h
        let a = g.reduce_mod(&p);
        let b = g.reduce_mod(&shifted);
        assert!((a.representative - b.representative).norm() < 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn membership() {
        let g = z_cross_r();
        assert!(g.is_member(&vec2(3.0, 7.2), DEFAULT_TOL));
        assert!(!g.is_member(&vec2(0.5, 0.0), DEFAULT_TOL));

        let helix_group = make_subgroup(
            3,
            &[vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)],
            &[vec3(1.0, 0.0, 0.0)],
            DEFAULT_TOL,
        )
        .unwrap();
        let theta = 2.0 * std::f64::consts::PI * 0.3;
        assert!(helix_group.is_member(&vec3(0.0, theta.cos(), theta.sin()), DEFAULT_TOL));
    }

    #[test]
    fn duality_pairing_is_integral() {
        let g = z_cross_r();
        let dual = g.dual_group().unwrap();
        for y in dual.basis() {
            for gamma in g.gamma_basis() {
                let p = y.dot(gamma);
                assert!((p - p.round()).abs() < DEFAULT_TOL);
            }
            for h in g.h_basis() {
                assert!(y.dot(h).abs() < DEFAULT_TOL);
            }
        }
    }
}
