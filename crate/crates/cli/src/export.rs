//! Density field files. Element `e = j * nx + i` sits in column `i`, row `j` counted
//! from the bottom; CSV and PGM write the top row first, VTK follows its own
//! x-fastest, bottom-up cell order.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::OutputFormat;
use crate::CliError;

/// Element densities on an `nx` by `ny` grid of square cells of side `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(nx: usize, ny: usize, h: f64, values: Vec<f64>) -> Result<Self, CliError> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(CliError::Format(format!(
                "{} values do not fill a {nx}x{ny} grid",
                values.len()
            )));
        }
        Ok(Self { nx, ny, h, values })
    }
}

pub fn to_csv(grid: &DensityGrid) -> String {
    let mut out = String::with_capacity(grid.values.len() * 24);
    for j in (0..grid.ny).rev() {
        let row = &grid.values[j * grid.nx..(j + 1) * grid.nx];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`to_csv`]; the grid shape comes from the rows and columns.
pub fn from_csv(text: &str, h: f64) -> Result<DensityGrid, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Format(format!("line {}: `{}`: {e}", idx + 1, s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::Format(format!(
                    "line {}: {} columns, expected {}",
                    idx + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let ny = rows.len();
    let nx = rows.first().map_or(0, Vec::len);
    let values = rows.into_iter().rev().flatten().collect();
    DensityGrid::new(nx, ny, h, values)
}

/// Binary 8-bit grayscale: solid is black (0), void is white (255).
pub fn to_pgm(grid: &DensityGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    for j in (0..grid.ny).rev() {
        for &v in &grid.values[j * grid.nx..(j + 1) * grid.nx] {
            out.push((255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8);
        }
    }
    out
}

/// Legacy ASCII structured points with one `density` scalar per cell.
pub fn to_vtk(grid: &DensityGrid) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "topolab density");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", grid.nx + 1, grid.ny + 1);
    let _ = writeln!(out, "ORIGIN 0 0 0");
    let _ = writeln!(out, "SPACING {} {} 1", grid.h, grid.h);
    let _ = writeln!(out, "CELL_DATA {}", grid.values.len());
    let _ = writeln!(out, "SCALARS density double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in &grid.values {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn encode(grid: &DensityGrid, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => to_csv(grid).into_bytes(),
        OutputFormat::Pgm => to_pgm(grid),
        OutputFormat::Vtk => to_vtk(grid).into_bytes(),
    }
}

pub fn export_density(
    grid: &DensityGrid,
    format: OutputFormat,
    path: &Path,
) -> Result<(), CliError> {
    crate::write_file(path, &encode(grid, format))
}

pub fn read_csv_field(path: &Path, h: f64) -> Result<DensityGrid, CliError> {
    from_csv(&crate::read_file(path)?, h)
}
