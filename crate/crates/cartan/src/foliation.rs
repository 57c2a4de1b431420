//! Leaves of the anchor foliation: rank, isotropy, flows and invariants.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fd::FiniteDiff;
use crate::linalg::{dot, nullspace, numerical_rank, sub, RankPolicy};
use crate::model::{CartanModel, Invariant};
use crate::ode::{integrate, OdeOptions, Trajectory};

/// Dimension of the leaf through `x`, the numerical rank of `ρ_x`.
pub fn leaf_rank(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<usize> {
    model.check_domain(x)?;
    Ok(numerical_rank(&model.anchor_matrix(x), policy))
}

/// Orthonormal basis of `ker ρ_x` as flat fiber vectors.
pub fn isotropy_basis(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<Vec<Vec<f64>>> {
    model.check_domain(x)?;
    Ok(nullspace(&model.anchor_matrix(x), policy))
}

/// Rank of the infinitesimal action at `x`, i.e. the dimension of the orbit.
pub fn orbit_dim(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<usize> {
    model.check_domain(x)?;
    let n = model.n();
    let m = model.anchor_matrix(x);
    let psi = m.columns(n, model.group.dim()).into_owned();
    Ok(if psi.ncols() == 0 || psi.nrows() == 0 {
        0
    } else {
        numerical_rank(&psi, policy)
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafProbe {
    pub base_point: Vec<f64>,
    pub leaf_dim: usize,
    pub isotropy_basis: Vec<Vec<f64>>,
    pub orbit_dim: usize,
}

impl LeafProbe {
    pub fn at(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<Self> {
        Ok(LeafProbe {
            base_point: x.to_vec(),
            leaf_dim: leaf_rank(model, x, policy)?,
            isotropy_basis: isotropy_basis(model, x, policy)?,
            orbit_dim: orbit_dim(model, x, policy)?,
        })
    }

    pub fn isotropy_dim(&self) -> usize {
        self.isotropy_basis.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    Zero,
    Abelian,
    /// Compact simple, Killing form negative definite.
    So3,
    /// Killing form of signature (2, 1).
    Sl2,
    /// `𝔰𝔬(2) ⋉ ℝ²`: Killing form of rank one and negative, abelian ideal of dimension 2.
    Euclidean2,
    Other,
}

/// `ker ρ_x` with the bracket restricted to it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotropyAlgebra {
    pub basis: Vec<Vec<f64>>,
    /// `structure[i][j][k]`: component along `basis[k]` of `[basis[i], basis[j]]`.
    pub structure: Vec<Vec<Vec<f64>>>,
    /// Largest distance of a bracket of basis vectors from `ker ρ_x`.
    pub closure_residual: f64,
    pub killing_eigenvalues: Vec<f64>,
    pub kind: AlgebraKind,
}

impl IsotropyAlgebra {
    pub fn at(model: &CartanModel, x: &[f64], policy: RankPolicy) -> Result<Self> {
        let basis = isotropy_basis(model, x, policy)?;
        let m = basis.len();
        let mut structure = vec![vec![vec![0.0; m]; m]; m];
        let mut closure_residual: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                // ρ vanishes on both entries, so the Leibniz terms drop out and
                // the bracket at x is that of the constant extensions
                let b = model.bracket_at(x, &basis[i], &basis[j]);
                let coeffs: Vec<f64> = basis.iter().map(|k| dot(&b, k)).collect();
                let mut proj = vec![0.0; b.len()];
                for (c, k) in coeffs.iter().zip(&basis) {
                    for (p, kv) in proj.iter_mut().zip(k) {
                        *p += c * kv;
                    }
                }
                closure_residual = closure_residual.max(crate::linalg::norm(&sub(&b, &proj)));
                structure[i][j] = coeffs;
            }
        }
        let killing = killing_form(&structure);
        let killing_eigenvalues = if m == 0 {
            Vec::new()
        } else {
            let mut ev: Vec<f64> = SymmetricEigen::new(killing.clone())
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ev.sort_by(|a, b| a.total_cmp(b));
            ev
        };
        let kind = identify(&structure, &killing_eigenvalues);
        Ok(IsotropyAlgebra {
            basis,
            structure,
            closure_residual,
            killing_eigenvalues,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Structure constants in another frame of the same subspace:
    /// `out[i][j][k]` is the `frame[k]` component of `[frame[i], frame[j]]`.
    /// The frame need not be orthonormal but must lie in `ker ρ_x`.
    pub fn structure_in(&self, frame: &[Vec<f64>]) -> Vec<Vec<Vec<f64>>> {
        let m = self.dim();
        // coordinates of each frame vector in the orthonormal basis
        let coords: Vec<Vec<f64>> = frame
            .iter()
            .map(|f| self.basis.iter().map(|b| dot(f, b)).collect())
            .collect();
        let p = DMatrix::from_fn(m, frame.len(), |a, i| coords[i][a]);
        let p_inv = crate::linalg::pinv(&p, RankPolicy::default());
        let r = frame.len();
        let mut out = vec![vec![vec![0.0; r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                let mut br = vec![0.0; m];
                for a in 0..m {
                    for b in 0..m {
                        let w = coords[i][a] * coords[j][b];
                        if w != 0.0 {
                            for (c, v) in br.iter_mut().enumerate() {
                                *v += w * self.structure[a][b][c];
                            }
                        }
                    }
                }
                for k in 0..r {
                    out[i][j][k] = (0..m).map(|a| p_inv[(k, a)] * br[a]).sum();
                }
            }
        }
        out
    }
}

fn killing_form(c: &[Vec<Vec<f64>>]) -> DMatrix<f64> {
    let m = c.len();
    // (ad_i)_{k j} = c[i][j][k]
    DMatrix::from_fn(m, m, |i, j| {
        let mut s = 0.0;
        for k in 0..m {
            for l in 0..m {
                s += c[i][l][k] * c[j][k][l];
            }
        }
        s
    })
}

fn identify(c: &[Vec<Vec<f64>>], killing_ev: &[f64]) -> AlgebraKind {
    let m = c.len();
    if m == 0 {
        return AlgebraKind::Zero;
    }
    let scale = c
        .iter()
        .flatten()
        .flatten()
        .fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale < 1e-9 {
        return AlgebraKind::Abelian;
    }
    if m != 3 {
        return AlgebraKind::Other;
    }
    let cut = 1e-9 * killing_ev.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    let neg = killing_ev.iter().filter(|&&v| v < -cut).count();
    let pos = killing_ev.iter().filter(|&&v| v > cut).count();
    match (neg, pos) {
        (3, 0) => AlgebraKind::So3,
        (1, 2) => AlgebraKind::Sl2,
        (1, 0) => {
            // derived algebra must be two-dimensional and abelian
            let derived: Vec<Vec<f64>> = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| c[i][j].clone())
                .collect();
            let mat = DMatrix::from_fn(3, derived.len(), |k, col| derived[col][k]);
            if numerical_rank(&mat, RankPolicy::default()) == 2 {
                AlgebraKind::Euclidean2
            } else {
                AlgebraKind::Other
            }
        }
        _ => AlgebraKind::Other,
    }
}

/// Integral curve of `ρ ∘ section` starting at `x0`.
pub fn flow(
    model: &CartanModel,
    x0: &[f64],
    section: &dyn Fn(&[f64]) -> Vec<f64>,
    t_final: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    model.check_domain(x0)?;
    let field = |_t: f64, x: &[f64]| model.anchor_at(x, &section(x));
    integrate(field, 0.0, x0, t_final, opts, |x| model.maps.contains(x))
}

fn gradient(f: &Invariant, x: &[f64], fd: &FiniteDiff) -> Result<Vec<f64>> {
    if let Some(g) = &f.gradient {
        return Ok(g(x));
    }
    let d = x.len();
    (0..d)
        .map(|k| {
            fd.directional(
                |p: &[f64]| vec![(f.value)(p)],
                x,
                &crate::linalg::unit(d, k),
            )
            .map(|v| v[0])
        })
        .collect()
}

/// Largest `|df · ρ(e)|` over the sample points and the unit fiber directions.
pub fn check_invariant(
    model: &CartanModel,
    f: &Invariant,
    points: &[Vec<f64>],
    fd: &FiniteDiff,
) -> Result<f64> {
    let k = model.fiber_dim();
    let mut worst: f64 = 0.0;
    for x in points {
        model.check_domain(x)?;
        let g = gradient(f, x, fd)?;
        for j in 0..k {
            let v = model.anchor_at(x, &crate::linalg::unit(k, j));
            worst = worst.max(dot(&g, &v).abs());
        }
    }
    Ok(worst)
}

/// Largest `|f(y) − f(y0)|` along a trajectory.
pub fn invariant_drift(f: &Invariant, traj: &Trajectory) -> f64 {
    let f0 = (f.value)(&traj.y[0]);
    traj.y
        .iter()
        .fold(0.0, |m, y| m.max(((f.value)(y) - f0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_model, ModelParams};

    fn ek() -> CartanModel {
        builtin_model("extremal_kahler", &ModelParams::default()).unwrap()
    }

    #[test]
    fn ek_ranks() {
        let m = ek();
        let p = RankPolicy::default();
        assert_eq!(leaf_rank(&m, &[0.7, 0.0, 0.0, 0.0], p).unwrap(), 0);
        assert_eq!(leaf_rank(&m, &[0.7, 0.3, -0.2, 1.1], p).unwrap(), 2);
        // T = 0 but U ≠ 0: the flow still moves X, Y
        assert_eq!(leaf_rank(&m, &[0.7, 0.0, 0.0, 1.0], p).unwrap(), 2);
    }

    #[test]
    fn generic_isotropy_is_s0() {
        let m = ek();
        let x = [0.4, 0.3, -0.5, 0.9];
        let k = isotropy_basis(&m, &x, RankPolicy::default()).unwrap();
        assert_eq!(k.len(), 1);
        let s0 = [-x[2], x[1], x[3]];
        let c = dot(&k[0], &s0) / crate::linalg::norm(&s0);
        assert!((c.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropy_kinds_follow_curvature_sign() {
        let m = ek();
        let p = RankPolicy::default();
        assert_eq!(
            IsotropyAlgebra::at(&m, &[1.3, 0.0, 0.0, 0.0], p)
                .unwrap()
                .kind,
            AlgebraKind::So3
        );
        assert_eq!(
            IsotropyAlgebra::at(&m, &[-0.8, 0.0, 0.0, 0.0], p)
                .unwrap()
                .kind,
            AlgebraKind::Sl2
        );
        assert_eq!(
            IsotropyAlgebra::at(&m, &[0.0, 0.0, 0.0, 0.0], p)
                .unwrap()
                .kind,
            AlgebraKind::Euclidean2
        );
        assert_eq!(
            IsotropyAlgebra::at(&m, &[0.2, 0.1, 0.4, 0.3], p)
                .unwrap()
                .kind,
            AlgebraKind::Abelian
        );
    }

    #[test]
    fn structure_in_standard_frame() {
        let m = ek();
        let alg = IsotropyAlgebra::at(&m, &[2.0, 0.0, 0.0, 0.0], RankPolicy::default()).unwrap();
        let e: Vec<Vec<f64>> = (0..3).map(|k| crate::linalg::unit(3, k)).collect();
        let c = alg.structure_in(&e);
        // [e1,e2] = K e3, [e1,e3] = −e2, [e2,e3] = e1
        assert!((c[0][1][2] - 2.0).abs() < 1e-12);
        assert!((c[0][2][1] + 1.0).abs() < 1e-12);
        assert!((c[1][2][0] - 1.0).abs() < 1e-12);
        assert!(alg.closure_residual < 1e-14);
    }

    #[test]
    fn invariants_are_annihilated_and_k_is_not() {
        let m = ek();
        let pts = vec![vec![0.3, 0.8, -0.4, 1.2], vec![-1.0, 0.2, 0.5, -0.3]];
        let fd = FiniteDiff::default();
        for inv in &m.invariants {
            assert!(
                check_invariant(&m, inv, &pts, &fd).unwrap() < 1e-10,
                "{}",
                inv.name
            );
        }
        let k = Invariant::new("K", |x: &[f64]| x[0], None);
        assert!(check_invariant(&m, &k, &pts, &fd).unwrap() > 0.1);
    }

    #[test]
    fn zero_section_flow_is_stationary() {
        let m = ek();
        let z = |_: &[f64]| vec![0.0; 3];
        let tr = flow(&m, &[0.1, 0.2, 0.3, 0.4], &z, 5.0, &OdeOptions::default()).unwrap();
        assert_eq!(tr.last(), &[0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn constant_curvature_flow_is_stationary() {
        let m = builtin_model(
            "constant_curvature",
            &ModelParams {
                n: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let s = |_: &[f64]| vec![1.0, -0.5, 0.2, 0.3, 0.1, 0.0];
        let tr = flow(&m, &[0.7], &s, 5.0, &OdeOptions::default()).unwrap();
        assert_eq!(tr.last(), &[0.7]);
        let p = LeafProbe::at(&m, &[0.7], RankPolicy::default()).unwrap();
        assert_eq!((p.leaf_dim, p.isotropy_dim(), p.orbit_dim), (0, 6, 0));
    }
}
