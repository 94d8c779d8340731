use crate::mesh::MeshModel;

use super::{FilterSpec, Weighting};

/// Per-element neighbor lists in compressed row form, neighbors sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodTable {
    offsets: Vec<usize>,
    ids: Vec<usize>,
    weights: Vec<f64>,
    volumes: Vec<f64>,
}

impl NeighborhoodTable {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbor_ids(&self, e: usize) -> &[usize] {
        &self.ids[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn weights(&self, e: usize) -> &[f64] {
        &self.weights[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn volumes(&self, e: usize) -> &[f64] {
        &self.volumes[self.offsets[e]..self.offsets[e + 1]]
    }

    /// `(id, weight, volume)` triples of element `e`.
    pub fn neighbors(&self, e: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        let range = self.offsets[e]..self.offsets[e + 1];
        range.map(move |k| (self.ids[k], self.weights[k], self.volumes[k]))
    }

    pub fn weight_sum(&self, e: usize) -> f64 {
        self.weights(e).iter().sum()
    }
}

/// Collects, for every element, the elements whose centers lie within `spec.r`.
///
/// Neighborhoods are truncated at the mesh boundary. A radius of zero yields
/// singleton neighborhoods with unit weight.
pub fn build_neighborhoods(mesh: &MeshModel, spec: &FilterSpec) -> NeighborhoodTable {
    let n = mesh.num_elements();
    let r = spec.r.max(0.0);
    let reach = (r / mesh.h).floor() as isize + 1;
    let slack = 1e-12 * mesh.h.max(r);
    let centers: Vec<[f64; 2]> = (0..n).map(|e| mesh.elem_center(e)).collect();

    let mut offsets = Vec::with_capacity(n + 1);
    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut volumes = Vec::new();
    offsets.push(0);
    for j in 0..mesh.ny as isize {
        for i in 0..mesh.nx as isize {
            let e = mesh.elem_id(i as usize, j as usize);
            let ce = centers[e];
            for jj in (j - reach).max(0)..=(j + reach).min(mesh.ny as isize - 1) {
                for ii in (i - reach).max(0)..=(i + reach).min(mesh.nx as isize - 1) {
                    let k = mesh.elem_id(ii as usize, jj as usize);
                    let ck = centers[k];
                    let d = ((ck[0] - ce[0]).powi(2) + (ck[1] - ce[1]).powi(2)).sqrt();
                    let w = if k == e && r == 0.0 {
                        1.0
                    } else if d <= r + slack {
                        match spec.weighting {
                            Weighting::Linear => (r - d).max(0.0),
                            Weighting::Constant => 1.0,
                        }
                    } else {
                        continue;
                    };
                    ids.push(k);
                    weights.push(w);
                    volumes.push(mesh.elem_volume[k]);
                }
            }
            offsets.push(ids.len());
        }
    }
    NeighborhoodTable {
        offsets,
        ids,
        weights,
        volumes,
    }
}
