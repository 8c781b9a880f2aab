//! Time-series CSV and field snapshot files.
//!
//! Time series: the header line
//!
//! ```text
//! t,mass_u,mass_c,energy,min_u,max_u,min_c,theta_min
//! ```
//!
//! then one row per record. Numbers use the shortest representation that
//! parses back to the same `f64`.
//!
//! Snapshots: `# key = value` metadata lines (`field`, `t`, `dim`, `degree`,
//! `elements`, `lower`, `upper`, `lattice`), a column header `x,value` or
//! `x,y,value`, then the field sampled on a uniform lattice of `lattice`
//! points per axis on every element, endpoints included. Elements appear in
//! mesh order; inside an element `x` varies fastest.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dg::{DgField, DgSpace};
use crate::error::{Error, Result};
use crate::stepper::DiagnosticsRecord;

pub const TIMESERIES_HEADER: &str = "t,mass_u,mass_c,energy,min_u,max_u,min_c,theta_min";

pub fn write_timeseries<W: Write>(mut w: W, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.t, r.mass_u, r.mass_c, r.energy, r.min_u, r.max_u, r.min_c, r.theta_min
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_timeseries(BufWriter::new(fs::File::create(path)?), records)
}

pub fn read_timeseries<R: BufRead>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TIMESERIES_HEADER {
        return Err(Error::InvalidArgument(format!(
            "unexpected time-series header '{header}'"
        )));
    }
    let mut out = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = parse_row(&line, no + 2)?;
        let [t, mass_u, mass_c, energy, min_u, max_u, min_c, theta_min] = v[..] else {
            return Err(Error::InvalidArgument(format!("line {}: expected 8 columns", no + 2)));
        };
        out.push(DiagnosticsRecord {
            t,
            mass_u,
            mass_c,
            energy,
            min_u,
            max_u,
            min_c,
            theta_min,
        });
    }
    Ok(out)
}

pub fn load_timeseries(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    read_timeseries(BufReader::new(fs::File::open(path)?))
}

fn parse_row(line: &str, no: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("line {no}: '{s}' is not a number")))
        })
        .collect()
}

/// Reference coordinates of the plotting lattice along one axis.
fn lattice_points(m: usize) -> Vec<f64> {
    (0..m).map(|i| -1.0 + 2.0 * i as f64 / (m - 1) as f64).collect()
}

fn lattice_reference(dim: usize, m: usize) -> Vec<Vec<f64>> {
    let t = lattice_points(m);
    if dim == 1 {
        t.iter().map(|&x| vec![x]).collect()
    } else {
        t.iter().flat_map(|&y| t.iter().map(move |&x| vec![x, y])).collect()
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

/// Samples `field` on the `(k+2)`-point lattice of every element.
pub fn write_snapshot<W: Write>(mut w: W, field: &DgField, name: &str, t: f64) -> Result<()> {
    let space = field.space();
    let mesh = space.mesh();
    let dim = space.dim();
    let m = space.degree() + 2;
    let mut head = String::new();
    let counts: Vec<String> = mesh.counts().iter().map(usize::to_string).collect();
    // writing into a String cannot fail
    let _ = writeln!(head, "# field = {name}");
    let _ = writeln!(head, "# t = {t}");
    let _ = writeln!(head, "# dim = {dim}");
    let _ = writeln!(head, "# degree = {}", space.degree());
    let _ = writeln!(head, "# elements = {}", counts.join(" "));
    let _ = writeln!(head, "# lower = {}", join(mesh.domain().lower()));
    let _ = writeln!(head, "# upper = {}", join(mesh.domain().upper()));
    let _ = writeln!(head, "# lattice = {m}");
    head.push_str(if dim == 1 { "x,value\n" } else { "x,y,value\n" });
    w.write_all(head.as_bytes())?;
    let points = lattice_reference(dim, m);
    let basis: Vec<Vec<f64>> = points.iter().map(|xi| space.basis_at(xi)).collect();
    for e in 0..mesh.element_count() {
        let vals = field.element_values(e);
        for (xi, phi) in points.iter().zip(&basis) {
            let p = mesh.map_to_physical(e, xi);
            // offset by one nodal value so that constants are reproduced exactly
            let v = vals[0] + phi.iter().zip(vals).map(|(b, x)| b * (x - vals[0])).sum::<f64>();
            if dim == 1 {
                writeln!(w, "{},{v}", p[0])?;
            } else {
                writeln!(w, "{},{},{v}", p[0], p[1])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_snapshot(path: &Path, field: &DgField, name: &str, t: f64) -> Result<()> {
    write_snapshot(BufWriter::new(fs::File::create(path)?), field, name, t)
}

/// Contents of a snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: String,
    pub t: f64,
    pub dim: usize,
    pub degree: usize,
    pub elements: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lattice: usize,
    /// `(x, value)` or `(x, y, value)`.
    pub rows: Vec<Vec<f64>>,
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Snapshot> {
    let bad = |m: String| Error::InvalidArgument(m);
    let mut meta = std::collections::HashMap::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (no, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !header_seen {
            header_seen = true;
        } else {
            rows.push(parse_row(line, no + 1)?);
        }
    }
    let get = |k: &str| meta.get(k).ok_or_else(|| bad(format!("snapshot is missing '{k}'")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad '{k}'"))) };
    let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(format!("bad '{k}'"))) };
    let nums = |k: &str| -> Result<Vec<f64>> {
        get(k)?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(format!("bad '{k}'"))))
            .collect()
    };
    let dim = int("dim")?;
    let snap = Snapshot {
        field: get("field")?.clone(),
        t: num("t")?,
        dim,
        degree: int("degree")?,
        elements: get("elements")?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("bad 'elements'".into())))
            .collect::<Result<_>>()?,
        lower: nums("lower")?,
        upper: nums("upper")?,
        lattice: int("lattice")?,
        rows,
    };
    let per = snap.lattice.pow(dim as u32);
    let expected = snap.elements.iter().product::<usize>() * per;
    if snap.rows.len() != expected || snap.rows.iter().any(|r| r.len() != dim + 1) {
        return Err(bad(format!("expected {expected} rows of {} columns", dim + 1)));
    }
    Ok(snap)
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    read_snapshot(BufReader::new(fs::File::open(path)?))
}

impl Snapshot {
    /// Recovers nodal values on `space` by a per-element least-squares fit.
    pub fn to_field(&self, space: &Arc<DgSpace>) -> Result<DgField> {
        let mesh = space.mesh();
        if self.dim != space.dim() || self.degree != space.degree() || self.elements != mesh.counts() {
            return Err(Error::InvalidArgument("snapshot does not match the space".into()));
        }
        if self.lattice < space.degree() + 1 {
            return Err(Error::InvalidArgument("lattice too coarse to recover the field".into()));
        }
        let points = lattice_reference(self.dim, self.lattice);
        let n = space.local_dofs();
        let mut v = DMatrix::zeros(points.len(), n);
        for (l, xi) in points.iter().enumerate() {
            for (a, b) in space.basis_at(xi).into_iter().enumerate() {
                v[(l, a)] = b;
            }
        }
        let pinv = v
            .pseudo_inverse(1e-14)
            .map_err(|e| Error::InvalidArgument(format!("lattice fit failed: {e}")))?;
        let mut values = Vec::with_capacity(space.n_dofs());
        for chunk in self.rows.chunks(points.len()) {
            let samples = nalgebra::DVector::from_iterator(chunk.len(), chunk.iter().map(|r| r[self.dim]));
            values.extend((&pinv * samples).iter());
        }
        space.from_values(values)
    }
}
