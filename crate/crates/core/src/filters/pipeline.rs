use crate::error::Result;
use crate::mesh::MeshModel;

use super::{
    build_filter_matrix, build_neighborhoods, erode_dilate, erode_dilate_chain_rule,
    filter_sensitivities, heaviside_chain_rule, heaviside_project, FilterKind, FilterMatrix,
    FilterSpec, NeighborhoodTable,
};

/// Intermediate fields of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    /// Output of the neighborhood operator (`A rho`, erode/dilate, or `rho` itself).
    pub filtered: Vec<f64>,
    /// Densities the finite element model sees.
    pub physical: Vec<f64>,
}

/// Design-to-physical density map for one filter specification, with the matching
/// reverse-mode gradient.
///
/// Forward: `rho -> A rho -> heaviside` (density and Heaviside kinds) or
/// `rho -> erode/dilate(rho)`. Backward applies the chain rules in reverse order.
/// The sensitivity filter leaves densities untouched and instead modifies the
/// search direction.
#[derive(Debug, Clone)]
pub struct FilterPipeline {
    spec: FilterSpec,
    table: NeighborhoodTable,
    matrix: Option<FilterMatrix>,
    volumes: Vec<f64>,
}

impl FilterPipeline {
    pub fn new(mesh: &MeshModel, spec: FilterSpec) -> Result<Self> {
        spec.validate()?;
        let table = build_neighborhoods(mesh, &spec);
        let matrix = matches!(spec.kind, FilterKind::Density | FilterKind::Heaviside)
            .then(|| build_filter_matrix(&table));
        Ok(Self {
            spec,
            table,
            matrix,
            volumes: mesh.elem_volume.clone(),
        })
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn table(&self) -> &NeighborhoodTable {
        &self.table
    }

    pub fn matrix(&self) -> Option<&FilterMatrix> {
        self.matrix.as_ref()
    }

    /// True when the physical densities are the design variables themselves.
    pub fn is_identity_map(&self) -> bool {
        matches!(self.spec.kind, FilterKind::None | FilterKind::Sensitivity)
    }

    pub fn forward(&self, rho: &[f64], beta: f64) -> Result<Forward> {
        let (filtered, physical) = match self.spec.kind {
            FilterKind::None | FilterKind::Sensitivity => (rho.to_vec(), rho.to_vec()),
            FilterKind::Density => {
                let f = self.density_matrix().mul_vec(rho)?;
                (f.clone(), f)
            }
            FilterKind::Heaviside => {
                let f = self.density_matrix().mul_vec(rho)?;
                let p = heaviside_project(&f, beta);
                (f, p)
            }
            FilterKind::Dilate | FilterKind::Erode => {
                let f = erode_dilate(&self.table, rho, &self.spec)?;
                (f.clone(), f)
            }
        };
        Ok(Forward { filtered, physical })
    }

    /// Exact chain rule: gradient with respect to the physical field pulled back to
    /// the design variables.
    pub fn pullback(
        &self,
        rho: &[f64],
        fwd: &Forward,
        beta: f64,
        grad_physical: &[f64],
    ) -> Result<Vec<f64>> {
        match self.spec.kind {
            FilterKind::None | FilterKind::Sensitivity => Ok(grad_physical.to_vec()),
            FilterKind::Density => self.density_matrix().mul_transpose_vec(grad_physical),
            FilterKind::Heaviside => {
                let g = heaviside_chain_rule(&fwd.filtered, beta, grad_physical);
                self.density_matrix().mul_transpose_vec(&g)
            }
            FilterKind::Dilate | FilterKind::Erode => {
                erode_dilate_chain_rule(&self.table, rho, &self.spec, grad_physical)
            }
        }
    }

    /// Objective search direction: the pullback, except that the sensitivity filter
    /// replaces it with the filtered sensitivities.
    pub fn search_direction(
        &self,
        rho: &[f64],
        fwd: &Forward,
        beta: f64,
        grad_physical: &[f64],
    ) -> Result<Vec<f64>> {
        match self.spec.kind {
            FilterKind::Sensitivity => {
                filter_sensitivities(&self.table, rho, &self.volumes, grad_physical)
            }
            _ => self.pullback(rho, fwd, beta, grad_physical),
        }
    }

    fn density_matrix(&self) -> &FilterMatrix {
        self.matrix
            .as_ref()
            .expect("density matrix is built for density and heaviside kinds")
    }
}
