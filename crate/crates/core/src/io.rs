//! Plain-text serialization of fields: CSV with one row per grid point and a
//! JSON descriptor of the grid.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridDescriptor {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub points: Vec<usize>,
    pub extent: Vec<f64>,
}

impl GridDescriptor {
    pub fn of<T: Real>(g: &GridSpec<T>) -> Self {
        let n = g.dim();
        Self {
            dim: n,
            origin: (0..n).map(|a| g.origin(a).as_f64()).collect(),
            spacing: (0..n).map(|a| g.spacing(a).as_f64()).collect(),
            points: g.points_per_axis().to_vec(),
            extent: (0..n).map(|a| g.extent(a).as_f64()).collect(),
        }
    }
}

/// Default coordinate names: `t, x1, x2, ...`.
pub fn axis_names(dim: usize) -> Vec<String> {
    std::iter::once("t".to_string()).chain((1..dim).map(|k| format!("x{k}"))).collect()
}

/// Writes coordinates followed by one column per field, in full-precision
/// scientific notation. `mask` restricts the rows.
pub fn write_fields_csv<T: Real, W: Write>(
    out: &mut W,
    columns: &[(&str, &ScalarField<T>)],
    mask: Option<&[bool]>,
) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::InvalidArgument("no columns to write".into()));
    };
    let grid = first.grid();
    for (name, f) in columns {
        if !f.grid().same_shape(grid) {
            return Err(Error::ShapeMismatch(format!("column {name}")));
        }
    }
    let mut header = axis_names(grid.dim());
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for p in 0..grid.len() {
        if mask.is_some_and(|m| !m[p]) {
            continue;
        }
        line.clear();
        for a in 0..grid.dim() {
            push_number(&mut line, grid.coord(p, a).as_f64());
        }
        for (_, f) in columns {
            push_number(&mut line, f.at(p).as_f64());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn push_number(line: &mut String, x: f64) {
    use std::fmt::Write as _;
    if !line.is_empty() {
        line.push(',');
    }
    let _ = write!(line, "{x:.17e}");
}

/// Writes a generic table with a header row.
pub fn write_table_csv<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        writeln!(out, "{}", r.join(","))?;
    }
    Ok(())
}

pub fn format_number(x: f64) -> String {
    format!("{x:.17e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_values() {
        let g = GridSpec::<f64>::cube(2, 0.0, 1.0, 2).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] + 10.0 * x[1]);
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &[("v", &f)], None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x1,v");
        assert_eq!(lines.len(), 10);
        for (p, l) in lines[1..].iter().enumerate() {
            let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[2], f.at(p));
            assert_eq!(&cols[..2], &g.coords(p)[..]);
        }
    }

    #[test]
    fn descriptor_matches_grid() {
        let g = GridSpec::<f64>::cube(3, -1.0, 1.0, 4).unwrap();
        let d = GridDescriptor::of(&g);
        assert_eq!(d.points, vec![5, 5, 5]);
        assert_eq!(d.extent, vec![2.0; 3]);
    }
}
