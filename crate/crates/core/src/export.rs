//! Text exports: per-node CSV tables and OFF meshes of two-dimensional charts.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::{AxisKind, SampledImmersion, Topology};

/// One row per node: position, inward normal, weight, then the named fields.
pub fn to_csv(imm: &SampledImmersion, fields: &[(&str, &[f64])]) -> Result<String> {
    for (name, f) in fields {
        if f.len() != imm.len() {
            return Err(Error::InputDomain(format!("field {name} has {} values, surface has {} nodes", f.len(), imm.len())));
        }
        if name.contains(',') || name.contains('\n') {
            return Err(Error::InputDomain(format!("field name {name:?} is not a CSV column name")));
        }
    }
    let m = imm.ambient_dim();
    let mut header: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
    header.extend((0..m).map(|i| format!("nu{i}")));
    header.push("weight".into());
    header.extend(fields.iter().map(|(n, _)| n.to_string()));
    let mut out = header.join(",");
    out.push('\n');
    for (k, g) in imm.nodes().iter().enumerate() {
        let mut row: Vec<String> = g.position.iter().chain(g.normal.iter()).map(|v| format!("{v:e}")).collect();
        row.push(format!("{:e}", g.weight));
        row.extend(fields.iter().map(|(_, f)| format!("{:e}", f[k])));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Polygon faces of a two-dimensional chart, as node indices.
pub fn chart_faces(imm: &SampledImmersion) -> Result<Vec<Vec<usize>>> {
    let grid = imm.grid();
    if grid.dim() != 2 {
        return Err(Error::InputDomain(format!("mesh export needs n = 2, got n = {}", grid.dim())));
    }
    let (rows, cols) = (grid.axes[0].len, grid.axes[1].len);
    let id = |i: usize, k: usize| i * cols + (k % cols);
    let mut faces = Vec::new();
    let row_wraps = matches!(grid.axes[0].kind, AxisKind::Periodic);
    let row_faces = if row_wraps { rows } else { rows - 1 };
    for i in 0..row_faces {
        let i1 = (i + 1) % rows;
        for k in 0..cols {
            faces.push(vec![id(i, k), id(i, k + 1), id(i1, k + 1), id(i1, k)]);
        }
    }
    if grid.topology == Topology::Sphere {
        faces.push((0..cols).rev().map(|k| id(0, k)).collect());
        faces.push((0..cols).map(|k| id(rows - 1, k)).collect());
    }
    Ok(faces)
}

/// OFF mesh of an `n = 2` surface.
pub fn to_off(imm: &SampledImmersion) -> Result<String> {
    let faces = chart_faces(imm)?;
    let mut out = String::new();
    writeln!(out, "OFF").unwrap();
    writeln!(out, "{} {} 0", imm.len(), faces.len()).unwrap();
    for g in imm.nodes() {
        writeln!(out, "{:e} {:e} {:e}", g.position[0], g.position[1], g.position[2]).unwrap();
    }
    for f in &faces {
        let ids: Vec<String> = f.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{} {}", f.len(), ids.join(" ")).unwrap();
    }
    Ok(out)
}
