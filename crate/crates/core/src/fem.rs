//! Plane-stress Q4 analysis: element stiffness, assembly, solve, compliance and
//! compliance sensitivities.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::material::{DesignField, MaterialLaw};
use crate::mesh::MeshModel;
use crate::solver::{BandCholesky, BandMatrix};

/// 8x8 element matrix in `[u1, v1, ..., u4, v4]` dof order.
pub type ElementMatrix = [[f64; 8]; 8];

/// Relative equilibrium residual every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Componentwise backward error accepted when `RESIDUAL_TOL` is out of reach of
/// floating point.
pub const BACKWARD_ERROR_TOL: f64 = 1e-12;

const MAX_REFINEMENTS: usize = 3;

/// Unit-modulus, unit-thickness stiffness of a square plane-stress Q4 element,
/// integrated with 2x2 Gauss points. Square elements give the same matrix for any
/// edge length.
pub fn element_stiffness(nu: f64) -> Result<ElementMatrix> {
    if !(nu > -1.0 && nu < 0.5) {
        return Err(Error::PoissonOutOfRange(nu));
    }
    let c = 1.0 / (1.0 - nu * nu);
    let d = [
        [c, c * nu, 0.0],
        [c * nu, c, 0.0],
        [0.0, 0.0, c * (1.0 - nu) / 2.0],
    ];
    let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let g = 1.0 / 3f64.sqrt();
    let gauss = [(-g, -g), (g, -g), (g, g), (-g, g)];
    // unit square: x = (1 + xi) / 2, so d/dx = 2 d/dxi and det J = 1/4
    let det_j = 0.25;

    let mut k = [[0.0; 8]; 8];
    for &(xi, eta) in &gauss {
        let mut b = [[0.0; 8]; 3];
        for (a, &(xa, ya)) in corners.iter().enumerate() {
            let dx = 2.0 * xa * (1.0 + eta * ya) / 4.0;
            let dy = 2.0 * ya * (1.0 + xi * xa) / 4.0;
            b[0][2 * a] = dx;
            b[1][2 * a + 1] = dy;
            b[2][2 * a] = dy;
            b[2][2 * a + 1] = dx;
        }
        let mut db = [[0.0; 8]; 3];
        for r in 0..3 {
            for col in 0..8 {
                db[r][col] = (0..3).map(|s| d[r][s] * b[s][col]).sum();
            }
        }
        for i in 0..8 {
            for j in 0..8 {
                k[i][j] += det_j * (0..3).map(|r| b[r][i] * db[r][j]).sum::<f64>();
            }
        }
    }
    // enforce exact symmetry against rounding in the quadrature sums
    for i in 0..8 {
        for j in 0..i {
            let avg = 0.5 * (k[i][j] + k[j][i]);
            k[i][j] = avg;
            k[j][i] = avg;
        }
    }
    Ok(k)
}

/// `u_e^T k0 u_e` for one element, floored at zero (k0 is positive semidefinite,
/// so negative values are rounding on near-rigid motions).
pub fn element_energy(k0: &ElementMatrix, ue: &[f64; 8]) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        let mut row = 0.0;
        for j in 0..8 {
            row += k0[i][j] * ue[j];
        }
        s += ue[i] * row;
    }
    s.max(0.0)
}

/// Dense global stiffness over all dofs (constrained ones included).
/// Intended for small meshes and test oracles.
pub fn global_stiffness_dense(
    mesh: &MeshModel,
    k0: &ElementMatrix,
    moduli: &[f64],
) -> Result<Vec<Vec<f64>>> {
    check_len(mesh.num_elements(), moduli.len())?;
    let n = mesh.num_dofs();
    let mut k = vec![vec![0.0; n]; n];
    for (e, &modulus) in moduli.iter().enumerate() {
        let dofs = mesh.elem_dofs(e);
        for a in 0..8 {
            for b in 0..8 {
                k[dofs[a]][dofs[b]] += modulus * k0[a][b];
            }
        }
    }
    Ok(k)
}

/// Displacements and forces of a solved system, with the factorization kept for reuse.
#[derive(Debug, Clone)]
pub struct ElasticState {
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub residual_norm: f64,
    factorization: Arc<BandCholesky>,
}

impl ElasticState {
    /// Solves `K x = rhs` for another right-hand side with the stored factorization.
    /// `rhs` is indexed by reduced (free) equation numbers as laid out by the owning [`FeModel`].
    pub fn resolve_reduced(&self, rhs: &[f64]) -> Vec<f64> {
        self.factorization.solve(rhs)
    }

    pub fn element_displacements(&self, mesh: &MeshModel, e: usize) -> [f64; 8] {
        let dofs = mesh.elem_dofs(e);
        let mut ue = [0.0; 8];
        for (slot, &d) in ue.iter_mut().zip(&dofs) {
            *slot = self.u[d];
        }
        ue
    }
}

/// Reusable analysis context: element matrix plus a bandwidth-reducing numbering
/// of the free dofs.
#[derive(Debug, Clone)]
pub struct FeModel {
    k0: ElementMatrix,
    /// Global dof -> reduced equation, `None` for constrained dofs.
    equation: Vec<Option<usize>>,
    num_equations: usize,
    bandwidth: usize,
}

impl FeModel {
    pub fn new(mesh: &MeshModel, nu: f64) -> Result<Self> {
        let k0 = element_stiffness(nu)?;
        let ndof = mesh.num_dofs();
        let mut equation = vec![None; ndof];
        let mut next = 0;
        // number along the short side so the band stays narrow
        let order: Vec<usize> = if mesh.nx >= mesh.ny {
            (0..=mesh.nx)
                .flat_map(|i| (0..=mesh.ny).map(move |j| (i, j)))
                .map(|(i, j)| mesh.node_id(i, j))
                .collect()
        } else {
            (0..mesh.num_nodes()).collect()
        };
        for node in order {
            for dof in [2 * node, 2 * node + 1] {
                if !mesh.fixed_dofs.contains(&dof) {
                    equation[dof] = Some(next);
                    next += 1;
                }
            }
        }
        let mut bandwidth = 0;
        for e in 0..mesh.num_elements() {
            let eqs: Vec<usize> = mesh
                .elem_dofs(e)
                .iter()
                .filter_map(|&d| equation[d])
                .collect();
            if let (Some(lo), Some(hi)) = (eqs.iter().min(), eqs.iter().max()) {
                bandwidth = bandwidth.max(hi - lo);
            }
        }
        Ok(Self {
            k0,
            equation,
            num_equations: next,
            bandwidth,
        })
    }

    pub fn k0(&self) -> &ElementMatrix {
        &self.k0
    }

    pub fn num_equations(&self) -> usize {
        self.num_equations
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn assemble(&self, mesh: &MeshModel, moduli: &[f64]) -> BandMatrix {
        let mut k = BandMatrix::zeros(self.num_equations, self.bandwidth);
        for (e, &modulus) in moduli.iter().enumerate() {
            let dofs = mesh.elem_dofs(e);
            for a in 0..8 {
                let Some(ia) = self.equation[dofs[a]] else {
                    continue;
                };
                for b in 0..8 {
                    let Some(ib) = self.equation[dofs[b]] else {
                        continue;
                    };
                    if ia >= ib {
                        k.add(ia, ib, modulus * self.k0[a][b]);
                    }
                }
            }
        }
        k
    }

    /// Assembles `K = sum_e E_e k0_e`, eliminates the constrained dofs and solves `K U = F`.
    pub fn solve(&self, mesh: &MeshModel, moduli: &[f64]) -> Result<ElasticState> {
        check_len(mesh.num_elements(), moduli.len())?;
        if let Some((e, &m)) = moduli
            .iter()
            .enumerate()
            .find(|(_, &m)| !(m > 0.0) || !m.is_finite())
        {
            return Err(Error::InvalidMaterial(format!(
                "modulus {m} at element {e} must be positive"
            )));
        }
        let f = mesh.force_vector();
        let k = self.assemble(mesh, moduli);
        let chol = BandCholesky::factor(&k)?;

        let mut rhs = vec![0.0; self.num_equations];
        for (dof, eq) in self.equation.iter().enumerate() {
            if let Some(eq) = eq {
                rhs[*eq] = f[dof];
            }
        }
        let f_norm = norm(&rhs);
        let tol = RESIDUAL_TOL * f_norm;
        let mut x = chol.solve(&rhs);
        let mut residual = residual_vec(&k, &x, &rhs);
        let mut r_norm = norm(&residual);
        let mut refinements = 0;
        while r_norm > tol {
            if refinements == MAX_REFINEMENTS {
                // Nearly disconnected solid regions make |U| so large that no f64
                // vector meets the absolute tolerance; accept a solution that is
                // exact for a componentwise perturbation of K and F at rounding level.
                if backward_error(&k, &x, &rhs, &residual) <= BACKWARD_ERROR_TOL {
                    break;
                }
                return Err(Error::SolverNonConvergence {
                    residual: r_norm,
                    tolerance: tol,
                });
            }
            let dx = chol.solve(&residual);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
            residual = residual_vec(&k, &x, &rhs);
            r_norm = norm(&residual);
            refinements += 1;
        }

        let mut u = vec![0.0; mesh.num_dofs()];
        for (dof, eq) in self.equation.iter().enumerate() {
            if let Some(eq) = eq {
                u[dof] = x[*eq];
            }
        }
        Ok(ElasticState {
            u,
            f,
            residual_norm: r_norm,
            factorization: Arc::new(chol),
        })
    }

    /// `u_e^T k0 u_e` for every element.
    pub fn element_energies(&self, mesh: &MeshModel, state: &ElasticState) -> Vec<f64> {
        (0..mesh.num_elements())
            .map(|e| element_energy(&self.k0, &state.element_displacements(mesh, e)))
            .collect()
    }

    /// `dc/drho_e = -dE/drho_e * u_e^T k0 u_e` (the problem is self-adjoint).
    pub fn sensitivities(
        &self,
        mesh: &MeshModel,
        law: &MaterialLaw,
        rho: &[f64],
        state: &ElasticState,
    ) -> Result<Vec<f64>> {
        check_len(mesh.num_elements(), rho.len())?;
        let de = law.modulus_derivative(rho);
        Ok(self
            .element_energies(mesh, state)
            .into_iter()
            .zip(de)
            .map(|(energy, d)| -d * energy)
            .collect())
    }
}

fn residual_vec(k: &BandMatrix, x: &[f64], rhs: &[f64]) -> Vec<f64> {
    let kx = k.mul_vec(x);
    rhs.iter().zip(kx).map(|(b, a)| b - a).collect()
}

/// `max_i |r_i| / (|K| |x| + |b|)_i`.
fn backward_error(k: &BandMatrix, x: &[f64], rhs: &[f64], residual: &[f64]) -> f64 {
    let scale = k.abs_mul_vec(x);
    residual
        .iter()
        .zip(scale.iter().zip(rhs))
        .map(|(r, (s, b))| {
            let d = s + b.abs();
            if d > 0.0 {
                r.abs() / d
            } else if *r == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// One-shot assembly and solve.
pub fn assemble_and_solve(mesh: &MeshModel, nu: f64, moduli: &[f64]) -> Result<ElasticState> {
    FeModel::new(mesh, nu)?.solve(mesh, moduli)
}

/// Compliance `F^T U`, equal to `U^T K U` at equilibrium.
pub fn compliance(state: &ElasticState) -> f64 {
    state.f.iter().zip(&state.u).map(|(f, u)| f * u).sum()
}

/// Compliance gradient with respect to the physical densities.
pub fn compliance_sensitivities(
    mesh: &MeshModel,
    law: &MaterialLaw,
    rho: &DesignField,
    state: &ElasticState,
) -> Result<Vec<f64>> {
    FeModel::new(mesh, law.nu)?.sensitivities(mesh, law, rho.values(), state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BcPreset};

    /// Closed-form unit-square plane-stress Q4 stiffness (bottom-left, counterclockwise).
    fn closed_form(nu: f64) -> ElementMatrix {
        let k = [
            0.5 - nu / 6.0,
            0.125 + nu / 8.0,
            -0.25 - nu / 12.0,
            -0.125 + 3.0 * nu / 8.0,
            -0.25 + nu / 12.0,
            -0.125 - nu / 8.0,
            nu / 6.0,
            0.125 - 3.0 * nu / 8.0,
        ];
        let idx = [
            [0, 1, 2, 3, 4, 5, 6, 7],
            [1, 0, 7, 6, 5, 4, 3, 2],
            [2, 7, 0, 5, 6, 3, 4, 1],
            [3, 6, 5, 0, 7, 2, 1, 4],
            [4, 5, 6, 7, 0, 1, 2, 3],
            [5, 4, 3, 2, 1, 0, 7, 6],
            [6, 3, 4, 1, 2, 7, 0, 5],
            [7, 2, 1, 4, 3, 6, 5, 0],
        ];
        let c = 1.0 / (1.0 - nu * nu);
        let mut m = [[0.0; 8]; 8];
        for i in 0..8 {
            for j in 0..8 {
                m[i][j] = c * k[idx[i][j]];
            }
        }
        m
    }

    #[test]
    fn k0_first_diagonal() {
        let k0 = element_stiffness(0.3).unwrap();
        let expected = (0.5 - 0.3 / 6.0) / (1.0 - 0.09);
        assert!((k0[0][0] - expected).abs() < 1e-14);
        assert!((k0[0][0] - 0.494505).abs() < 1e-6);
    }

    #[test]
    fn k0_matches_closed_form() {
        for nu in [0.0, 0.3, -0.5, 0.45] {
            let k0 = element_stiffness(nu).unwrap();
            let oracle = closed_form(nu);
            for i in 0..8 {
                for j in 0..8 {
                    assert!(
                        (k0[i][j] - oracle[i][j]).abs() <= 1e-12,
                        "nu={nu} ({i},{j})"
                    );
                    assert_eq!(k0[i][j], k0[j][i]);
                }
            }
        }
    }

    #[test]
    fn k0_rigid_body_modes() {
        let k0 = element_stiffness(0.3).unwrap();
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let tx = [1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let ty = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let mut rot = [0.0; 8];
        for (a, &(x, y)) in corners.iter().enumerate() {
            rot[2 * a] = -y;
            rot[2 * a + 1] = x;
        }
        for mode in [tx, ty, rot] {
            for row in &k0 {
                let s: f64 = row.iter().zip(&mode).map(|(k, m)| k * m).sum();
                assert!(s.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k0_rejects_bad_nu() {
        assert!(matches!(
            element_stiffness(0.5),
            Err(Error::PoissonOutOfRange(_))
        ));
        assert!(element_stiffness(-1.0).is_err());
    }

    #[test]
    fn homogeneous_load_gives_zero() {
        let mut mesh = build_mesh(3, 2, 1.0, BcPreset::Cantilever).unwrap();
        mesh.loads.clear();
        let state = assemble_and_solve(&mesh, 0.3, &[1.0; 6]).unwrap();
        assert!(state.u.iter().all(|&u| u == 0.0));
        assert_eq!(compliance(&state), 0.0);
    }

    #[test]
    fn unsupported_mesh_is_singular() {
        let mut mesh = build_mesh(2, 2, 1.0, BcPreset::Custom).unwrap();
        mesh.add_load(5, 1.0).unwrap();
        assert!(matches!(
            assemble_and_solve(&mesh, 0.3, &[1.0; 4]),
            Err(Error::SingularSystem { .. })
        ));
    }

    #[test]
    fn bandwidth_follows_short_side() {
        let mesh = build_mesh(60, 20, 1.0, BcPreset::MbbHalf).unwrap();
        let model = FeModel::new(&mesh, 0.3).unwrap();
        assert!(model.bandwidth() <= 2 * 21 + 3);
        assert_eq!(model.num_equations(), mesh.num_dofs() - 22);
    }

    #[test]
    fn well_conditioned_solve_meets_absolute_tolerance() {
        let mesh = build_mesh(12, 4, 1.0, BcPreset::MbbHalf).unwrap();
        let state = assemble_and_solve(&mesh, 0.3, &vec![0.5; 48]).unwrap();
        assert!(state.residual_norm <= RESIDUAL_TOL * norm(&mesh.force_vector()));
    }

    #[test]
    fn nearly_disconnected_support_is_solved_to_rounding_level() {
        // Solid top row; the roller under the bottom row only reaches it through void.
        let mesh = build_mesh(4, 2, 1.0, BcPreset::MbbHalf).unwrap();
        let moduli: Vec<f64> = (0..8).map(|e| if e >= 4 { 1.0 } else { 1e-9 }).collect();
        let state = assemble_and_solve(&mesh, 0.3, &moduli).unwrap();
        let u_max = state.u.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        assert!(u_max > 1e6);
        assert!(state.residual_norm.is_finite());
        let fe = FeModel::new(&mesh, 0.3).unwrap();
        let k = fe.assemble(&mesh, &moduli);
        let reduced: Vec<f64> = (0..mesh.num_dofs())
            .filter_map(|d| fe.equation[d].map(|eq| (eq, state.u[d])))
            .fold(vec![0.0; fe.num_equations], |mut x, (eq, u)| {
                x[eq] = u;
                x
            });
        let mut rhs = vec![0.0; fe.num_equations];
        for (d, eq) in fe.equation.iter().enumerate() {
            if let Some(eq) = eq {
                rhs[*eq] = state.f[d];
            }
        }
        let r = residual_vec(&k, &reduced, &rhs);
        assert!(backward_error(&k, &reduced, &rhs, &r) <= BACKWARD_ERROR_TOL);
    }
}
