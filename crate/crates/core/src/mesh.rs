//! Structured grids of square bilinear quads with benchmark supports and loads.
//!
//! Nodes are numbered row-major from the bottom-left corner, `node = j * (nx + 1) + i`,
//! and carry two dofs each (`2 * node` in x, `2 * node + 1` in y). Elements follow
//! the same row-major order, `elem = j * nx + i`, with nodes listed counterclockwise
//! from the bottom-left corner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Boundary-condition presets for [`build_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcPreset {
    /// Half MBB beam: symmetry rollers on the left edge, a vertical roller at the
    /// bottom-right node and a unit downward load at the top-left node.
    MbbHalf,
    /// Left edge clamped, unit downward load at the middle node of the right edge.
    Cantilever,
    /// No supports and no loads.
    Custom,
}

impl BcPreset {
    pub fn name(self) -> &'static str {
        match self {
            BcPreset::MbbHalf => "mbb_half",
            BcPreset::Cantilever => "cantilever",
            BcPreset::Custom => "custom",
        }
    }
}

impl fmt::Display for BcPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BcPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mbb_half" => Ok(BcPreset::MbbHalf),
            "cantilever" => Ok(BcPreset::Cantilever),
            "custom" => Ok(BcPreset::Custom),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshModel {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub preset: BcPreset,
    pub node_coords: Vec<[f64; 2]>,
    pub elem_nodes: Vec<[usize; 4]>,
    pub elem_volume: Vec<f64>,
    pub fixed_dofs: BTreeSet<usize>,
    pub loads: BTreeMap<usize, f64>,
}

impl MeshModel {
    pub fn num_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes()
    }

    pub fn num_elements(&self) -> usize {
        self.nx * self.ny
    }

    /// Node id of grid point `(i, j)`, `i` along x and `j` along y.
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn elem_id(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Design-domain volume `V0`.
    pub fn total_volume(&self) -> f64 {
        self.elem_volume.iter().sum()
    }

    pub fn elem_center(&self, e: usize) -> [f64; 2] {
        let nodes = &self.elem_nodes[e];
        let mut c = [0.0; 2];
        for &n in nodes {
            c[0] += self.node_coords[n][0];
            c[1] += self.node_coords[n][1];
        }
        [c[0] / 4.0, c[1] / 4.0]
    }

    /// Global dofs of element `e` in `[u1, v1, u2, v2, u3, v3, u4, v4]` order.
    pub fn elem_dofs(&self, e: usize) -> [usize; 8] {
        let n = &self.elem_nodes[e];
        [
            2 * n[0],
            2 * n[0] + 1,
            2 * n[1],
            2 * n[1] + 1,
            2 * n[2],
            2 * n[2] + 1,
            2 * n[3],
            2 * n[3] + 1,
        ]
    }

    pub fn fix_dof(&mut self, dof: usize) -> Result<()> {
        self.check_dof(dof)?;
        self.fixed_dofs.insert(dof);
        Ok(())
    }

    /// Adds `force` to the load already acting on `dof`.
    pub fn add_load(&mut self, dof: usize, force: f64) -> Result<()> {
        self.check_dof(dof)?;
        *self.loads.entry(dof).or_insert(0.0) += force;
        Ok(())
    }

    /// Dense global force vector.
    pub fn force_vector(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.num_dofs()];
        for (&dof, &value) in &self.loads {
            f[dof] += value;
        }
        f
    }

    fn check_dof(&self, dof: usize) -> Result<()> {
        let ndof = self.num_dofs();
        if dof >= ndof {
            return Err(Error::DofOutOfRange { dof, ndof });
        }
        Ok(())
    }
}

/// Builds an `nx` x `ny` grid of square elements of edge `h` with the supports and
/// loads of `preset`.
pub fn build_mesh(nx: usize, ny: usize, h: f64, preset: BcPreset) -> Result<MeshModel> {
    if nx == 0 || ny == 0 || !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidDimensions { nx, ny, h });
    }
    let mut node_coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            node_coords.push([i as f64 * h, j as f64 * h]);
        }
    }
    let mut elem_nodes = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let n0 = j * (nx + 1) + i;
            let n3 = (j + 1) * (nx + 1) + i;
            elem_nodes.push([n0, n0 + 1, n3 + 1, n3]);
        }
    }
    let mut mesh = MeshModel {
        nx,
        ny,
        h,
        preset,
        node_coords,
        elem_nodes,
        elem_volume: vec![h * h; nx * ny],
        fixed_dofs: BTreeSet::new(),
        loads: BTreeMap::new(),
    };

    match preset {
        BcPreset::MbbHalf => {
            for j in 0..=ny {
                let n = mesh.node_id(0, j);
                mesh.fix_dof(2 * n)?;
            }
            let corner = mesh.node_id(nx, 0);
            mesh.fix_dof(2 * corner + 1)?;
            let top_left = mesh.node_id(0, ny);
            mesh.add_load(2 * top_left + 1, -1.0)?;
        }
        BcPreset::Cantilever => {
            for j in 0..=ny {
                let n = mesh.node_id(0, j);
                mesh.fix_dof(2 * n)?;
                mesh.fix_dof(2 * n + 1)?;
            }
            let tip = mesh.node_id(nx, ny / 2);
            mesh.add_load(2 * tip + 1, -1.0)?;
        }
        BcPreset::Custom => {}
    }
    Ok(mesh)
}
