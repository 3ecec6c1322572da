//! Text serialization for scalar fields: a two-line header naming and then
//! giving the grid parameters, followed by one node value per line in flat
//! index order. Values are written in shortest round-trip decimal form, so a
//! save/load cycle reproduces the field bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use fblab_core::grid_field::{make_grid, ScalarField};

use crate::CliError;

const HEADER: &str = "dim,half_width,nodes_per_axis";

/// Writes a field to `path` in the text format above.
pub fn save_field(path: &Path, field: &ScalarField) -> Result<(), CliError> {
    let grid = field.grid();
    let mut text = String::with_capacity(24 * field.values().len() + 64);
    text.push_str(HEADER);
    text.push('\n');
    let _ = writeln!(
        text,
        "{},{},{}",
        grid.dim(),
        grid.half_width(),
        grid.nodes_per_axis()
    );
    for v in field.values() {
        let _ = writeln!(text, "{v}");
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a field written by [`save_field`].
pub fn load_field(path: &Path) -> Result<ScalarField, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first.trim() == HEADER => {}
        other => {
            return Err(bad(format!(
                "expected header '{HEADER}', found {other:?}"
            )))
        }
    }
    let params = lines
        .next()
        .ok_or_else(|| bad("missing grid parameter line".into()))?;
    let parts: Vec<&str> = params.trim().split(',').collect();
    if parts.len() != 3 {
        return Err(bad(format!("expected 'dim,half_width,N' values, found '{params}'")));
    }
    let dim: usize = parts[0]
        .parse()
        .map_err(|e| bad(format!("bad dim '{}': {e}", parts[0])))?;
    let half_width: f64 = parts[1]
        .parse()
        .map_err(|e| bad(format!("bad half_width '{}': {e}", parts[1])))?;
    let nodes: usize = parts[2]
        .parse()
        .map_err(|e| bad(format!("bad nodes_per_axis '{}': {e}", parts[2])))?;
    let grid = make_grid(dim, half_width, nodes).map_err(|e| bad(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.node_count());
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|e| bad(format!("bad value '{line}': {e}")))?,
        );
    }
    if values.len() != grid.node_count() {
        return Err(bad(format!(
            "expected {} node values, found {}",
            grid.node_count(),
            values.len()
        )));
    }
    ScalarField::from_values(&grid, values).map_err(|e| bad(e.to_string()))
}
