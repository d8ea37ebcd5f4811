//! Text formats: invariant grids and sampled patches as CSV with `#` header
//! lines, OBJ export, and sampled surfaces read back as smooth models.
//!
//! Reals are written with 17 significant digits, so every file re-reads to
//! the same bits.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::bonnet::ReconstructedPatch;
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::net::{InvariantFieldGrid, FIELD_NAMES};
use crate::surface::{Domain, ParamPoint, SurfaceModel, Vec4};

pub const GRID_FORMAT: &str = "surf4-grid";
pub const PATCH_FORMAT: &str = "surf4-patch";
pub const FORMAT_VERSION: u32 = 1;

const POSITION_NAMES: [&str; 4] = ["x1", "x2", "x3", "x4"];

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

/// Which of the two CSV formats a file holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileKind {
    Grid,
    Patch,
}

/// Header lines and data rows of a `#`-headed CSV file.
struct Table {
    header: Vec<(usize, String, String)>,
    columns: Vec<String>,
    columns_line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl Table {
    fn parse(text: &str) -> Result<Table> {
        let mut header = Vec::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if columns.is_some() {
                    return Err(format_err(line_no, "header line after the column row"));
                }
                let rest = rest.trim();
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                header.push((line_no, key.to_string(), value.trim().to_string()));
                continue;
            }
            match &columns {
                None => {
                    columns = Some((
                        line_no,
                        line.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>(),
                    ))
                }
                Some((_, names)) => {
                    let values = line
                        .split(',')
                        .map(|c| {
                            c.trim()
                                .parse::<f64>()
                                .map_err(|_| format_err(line_no, format!("cannot parse `{}` as a number", c.trim())))
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    if values.len() != names.len() {
                        return Err(format_err(
                            line_no,
                            format!("expected {} columns, found {}", names.len(), values.len()),
                        ));
                    }
                    if let Some(c) = values.iter().position(|v| !v.is_finite()) {
                        return Err(format_err(
                            line_no,
                            format!("non-finite value in column `{}`", names[c]),
                        ));
                    }
                    rows.push((line_no, values));
                }
            }
        }
        let (columns_line, columns) = columns.ok_or_else(|| format_err(0, "missing column row"))?;
        Ok(Table {
            header,
            columns,
            columns_line,
            rows,
        })
    }

    fn value(&self, key: &str) -> Result<(usize, &str)> {
        self.header
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(line, _, v)| (*line, v.as_str()))
            .ok_or_else(|| format_err(0, format!("missing header `{key}`")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.value(key)?;
        v.parse()
            .map_err(|_| format_err(line, format!("bad value `{v}` for `{key}`")))
    }

    fn kind(&self) -> Result<FileKind> {
        let (line, v) = self.value("format")?;
        let (name, version) = v.split_once(' ').unwrap_or((v, ""));
        let kind = match name {
            GRID_FORMAT => FileKind::Grid,
            PATCH_FORMAT => FileKind::Patch,
            _ => return Err(format_err(line, format!("unknown format `{name}`"))),
        };
        if version.trim() != FORMAT_VERSION.to_string() {
            return Err(format_err(line, format!("unsupported version `{}`", version.trim())));
        }
        Ok(kind)
    }

    /// Check the column row against `expected` and place every row at
    /// `u_index * nv + v_index`, each node exactly once.
    fn rectangular(&self, expected: &[String], nu: usize, nv: usize) -> Result<Vec<&[f64]>> {
        if self.columns != expected {
            return Err(format_err(
                self.columns_line,
                format!(
                    "columns `{}` do not match `{}`",
                    self.columns.join(","),
                    expected.join(",")
                ),
            ));
        }
        if self.rows.len() != nu * nv {
            return Err(format_err(
                self.columns_line,
                format!("expected {} rows for {nu}x{nv}, found {}", nu * nv, self.rows.len()),
            ));
        }
        let mut placed: Vec<Option<&[f64]>> = vec![None; nu * nv];
        for (line, row) in &self.rows {
            let (i, j) = (row[0], row[1]);
            if i.fract() != 0.0 || j.fract() != 0.0 || i < 0.0 || j < 0.0 || i >= nu as f64 || j >= nv as f64 {
                return Err(format_err(*line, format!("node index ({i}, {j}) outside {nu}x{nv}")));
            }
            let k = i as usize * nv + j as usize;
            if placed[k].is_some() {
                return Err(format_err(*line, format!("node ({i}, {j}) appears twice")));
            }
            placed[k] = Some(&row[2..]);
        }
        Ok(placed.into_iter().map(|r| r.unwrap_or_default()).collect())
    }
}

/// Kind of a grid or patch file from its `# format` line.
pub fn file_kind(text: &str) -> Result<FileKind> {
    Table::parse(text)?.kind()
}

fn grid_columns(with_positions: bool) -> Vec<String> {
    let mut c: Vec<String> = ["u_index", "v_index"].iter().map(|s| s.to_string()).collect();
    c.extend(FIELD_NAMES.iter().map(|s| s.to_string()));
    if with_positions {
        c.extend(POSITION_NAMES.iter().map(|s| s.to_string()));
    }
    c
}

/// Serialize a grid; positions become the columns `x1..x4` when present.
pub fn write_grid<W: Write>(grid: &InvariantFieldGrid, mut out: W) -> Result<()> {
    let positions = grid.positions.as_ref().filter(|p| p.len() == grid.len());
    let columns = grid_columns(positions.is_some());
    let mut s = String::new();
    let _ = writeln!(s, "# format {GRID_FORMAT} {FORMAT_VERSION}");
    let _ = writeln!(s, "# nu {}", grid.nu);
    let _ = writeln!(s, "# nv {}", grid.nv);
    let _ = writeln!(s, "# du {}", real(grid.du));
    let _ = writeln!(s, "# dv {}", real(grid.dv));
    let _ = writeln!(s, "# holonomy {}", real(grid.holonomy));
    let _ = writeln!(s, "# fields {}", columns[2..].join(","));
    let _ = writeln!(s, "{}", columns.join(","));
    for i in 0..grid.nu {
        for j in 0..grid.nv {
            let k = grid.index(i, j);
            let _ = write!(s, "{i},{j}");
            for f in &grid.fields {
                let _ = write!(s, ",{}", real(f[k]));
            }
            if let Some(p) = positions {
                for x in p[k].iter() {
                    let _ = write!(s, ",{}", real(*x));
                }
            }
            s.push('\n');
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn parse_grid(text: &str) -> Result<InvariantFieldGrid> {
    let table = Table::parse(text)?;
    if table.kind()? != FileKind::Grid {
        return Err(format_err(0, "not a grid file"));
    }
    let nu: usize = table.parsed("nu")?;
    let nv: usize = table.parsed("nv")?;
    let du: f64 = table.parsed("du")?;
    let dv: f64 = table.parsed("dv")?;
    let holonomy: f64 = table.parsed::<f64>("holonomy").unwrap_or(0.0);
    let (fields_line, fields) = table.value("fields")?;
    let with_positions = match fields.split(',').count() {
        10 => false,
        14 => true,
        n => return Err(format_err(fields_line, format!("expected 10 or 14 fields, found {n}"))),
    };
    let expected = grid_columns(with_positions);
    if fields != expected[2..].join(",") {
        return Err(format_err(
            fields_line,
            format!("field list `{fields}` is not recognised"),
        ));
    }
    let rows = table.rectangular(&expected, nu, nv)?;
    let mut grid = InvariantFieldGrid::zeros(nu, nv, du, dv).map_err(|e| format_err(0, e.to_string()))?;
    grid.holonomy = holonomy;
    for (k, row) in rows.iter().enumerate() {
        for (f, field) in grid.fields.iter_mut().enumerate() {
            field[k] = row[f];
        }
    }
    if with_positions {
        grid.positions = Some(rows.iter().map(|r| Vec4::new(r[10], r[11], r[12], r[13])).collect());
    }
    Ok(grid)
}

pub fn read_grid<R: Read>(input: R) -> Result<InvariantFieldGrid> {
    parse_grid(&read_all(input)?)
}

fn read_all<R: Read>(input: R) -> Result<String> {
    let mut text = String::new();
    for line in BufReader::new(input).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    Ok(text)
}

pub fn save_grid(grid: &InvariantFieldGrid, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_grid(grid, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<InvariantFieldGrid> {
    parse_grid(&fs::read_to_string(path)?)
}

/// Points of a rectangular `nu × nv` patch with their parameters; node
/// `(i, j)` is stored at `i * nv + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPatch {
    pub nu: usize,
    pub nv: usize,
    pub params: Vec<ParamPoint>,
    pub positions: Vec<Vec4>,
}

impl SampledPatch {
    /// Sample a model on a regular grid over its domain. Periodic directions
    /// leave out the closing copy of the first row.
    pub fn from_model(model: &SurfaceModel, nu: usize, nv: usize) -> Result<SampledPatch> {
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {nu}x{nv}"
            )));
        }
        let d = model.domain();
        let axis = |(a, b): (f64, f64), n: usize, periodic: bool| {
            let steps = if periodic { n } else { n - 1 };
            (0..n).map(move |i| a + (b - a) * i as f64 / steps as f64)
        };
        let us: Vec<f64> = axis(d.u, nu, d.periodic_u).collect();
        let vs: Vec<f64> = axis(d.v, nv, d.periodic_v).collect();
        let params: Vec<ParamPoint> = us
            .iter()
            .flat_map(|&u| vs.iter().map(move |&v| ParamPoint::new(u, v)))
            .collect();
        let positions = params.iter().map(|&p| model.position(p)).collect::<Result<_>>()?;
        Ok(SampledPatch {
            nu,
            nv,
            params,
            positions,
        })
    }

    /// A reconstructed patch at net coordinates `(i du, j dv)`.
    pub fn from_reconstruction(patch: &ReconstructedPatch, du: f64, dv: f64) -> SampledPatch {
        let params = (0..patch.nu)
            .flat_map(|i| (0..patch.nv).map(move |j| ParamPoint::new(i as f64 * du, j as f64 * dv)))
            .collect();
        SampledPatch {
            nu: patch.nu,
            nv: patch.nv,
            params,
            positions: patch.positions.clone(),
        }
    }

    /// The positions carried by a grid, at net coordinates.
    pub fn from_grid(grid: &InvariantFieldGrid) -> Option<SampledPatch> {
        let positions = grid.positions.clone()?;
        let params = (0..grid.nu)
            .flat_map(|i| (0..grid.nv).map(move |j| ParamPoint::new(i as f64 * grid.du, j as f64 * grid.dv)))
            .collect();
        Some(SampledPatch {
            nu: grid.nu,
            nv: grid.nv,
            params,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

const PATCH_COLUMNS: [&str; 8] = ["u_index", "v_index", "u", "v", "x1", "x2", "x3", "x4"];

/// The csv4d format: indices, parameters and all four coordinates.
pub fn write_csv4d<W: Write>(patch: &SampledPatch, mut out: W) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# format {PATCH_FORMAT} {FORMAT_VERSION}");
    let _ = writeln!(s, "# nu {}", patch.nu);
    let _ = writeln!(s, "# nv {}", patch.nv);
    let _ = writeln!(s, "{}", PATCH_COLUMNS.join(","));
    for i in 0..patch.nu {
        for j in 0..patch.nv {
            let k = i * patch.nv + j;
            let (p, x) = (patch.params[k], patch.positions[k]);
            let _ = writeln!(
                s,
                "{i},{j},{},{},{},{},{},{}",
                real(p.u),
                real(p.v),
                real(x[0]),
                real(x[1]),
                real(x[2]),
                real(x[3])
            );
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn parse_csv4d(text: &str) -> Result<SampledPatch> {
    let table = Table::parse(text)?;
    if table.kind()? != FileKind::Patch {
        return Err(format_err(0, "not a patch file"));
    }
    let nu: usize = table.parsed("nu")?;
    let nv: usize = table.parsed("nv")?;
    let expected: Vec<String> = PATCH_COLUMNS.iter().map(|s| s.to_string()).collect();
    let rows = table.rectangular(&expected, nu, nv)?;
    Ok(SampledPatch {
        nu,
        nv,
        params: rows.iter().map(|r| ParamPoint::new(r[0], r[1])).collect(),
        positions: rows.iter().map(|r| Vec4::new(r[2], r[3], r[4], r[5])).collect(),
    })
}

pub fn save_csv4d(patch: &SampledPatch, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv4d(patch, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_csv4d(path: &Path) -> Result<SampledPatch> {
    parse_csv4d(&fs::read_to_string(path)?)
}

/// Wavefront OBJ: `v` carries `x1 x2 x3`, the one-component `vt` carries
/// `x4`, and each grid cell becomes two triangles.
pub fn write_obj<W: Write>(patch: &SampledPatch, mut out: W) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# {PATCH_FORMAT} {FORMAT_VERSION} obj: v = (x1, x2, x3), vt = x4");
    let _ = writeln!(s, "# nu {} nv {}", patch.nu, patch.nv);
    for x in &patch.positions {
        let _ = writeln!(s, "v {} {} {}", real(x[0]), real(x[1]), real(x[2]));
    }
    for x in &patch.positions {
        let _ = writeln!(s, "vt {}", real(x[3]));
    }
    let id = |i: usize, j: usize| i * patch.nv + j + 1;
    for i in 0..patch.nu.saturating_sub(1) {
        for j in 0..patch.nv.saturating_sub(1) {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let _ = writeln!(s, "f {a}/{a} {b}/{b} {c}/{c}");
            let _ = writeln!(s, "f {a}/{a} {c}/{c} {d}/{d}");
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn save_obj(patch: &SampledPatch, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_obj(patch, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Slopes of the cubic spline through equally spaced `y`, with end slopes
/// from one-sided differences (fourth order when five points exist).
fn spline_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        let s = (y[n - 1] - y[0]) / h;
        m.fill(s);
        return m;
    }
    let end =
        |a: f64, b: f64, c: f64, d: f64, e: f64| (-25.0 * a + 48.0 * b - 36.0 * c + 16.0 * d - 3.0 * e) / (12.0 * h);
    if n >= 5 {
        m[0] = end(y[0], y[1], y[2], y[3], y[4]);
        m[n - 1] = -end(y[n - 1], y[n - 2], y[n - 3], y[n - 4], y[n - 5]);
    } else {
        m[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
        m[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    }
    // m[i-1] + 4 m[i] + m[i+1] = 3 (y[i+1] - y[i-1]) / h, Thomas sweep
    let k = n - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for r in 0..k {
        let i = r + 1;
        let mut rhs = 3.0 * (y[i + 1] - y[i - 1]) / h;
        if r == 0 {
            rhs -= m[0];
        }
        if r == k - 1 {
            rhs -= m[n - 1];
        }
        let denom = if r == 0 { 4.0 } else { 4.0 - c[r - 1] };
        c[r] = 1.0 / denom;
        d[r] = (rhs - if r == 0 { 0.0 } else { d[r - 1] }) / denom;
    }
    for r in (0..k).rev() {
        m[r + 1] = if r == k - 1 { d[r] } else { d[r] - c[r] * m[r + 2] };
    }
    m
}

/// Nodal values and spline derivatives of one coordinate.
struct BicubicData {
    f: Vec<f64>,
    fu: Vec<f64>,
    fv: Vec<f64>,
    fuv: Vec<f64>,
}

impl BicubicData {
    fn new(values: Vec<f64>, nu: usize, nv: usize, hu: f64, hv: f64) -> Self {
        let along_u = |vals: &[f64]| {
            let mut out = vec![0.0; nu * nv];
            for j in 0..nv {
                let col: Vec<f64> = (0..nu).map(|i| vals[i * nv + j]).collect();
                for (i, s) in spline_slopes(&col, hu).into_iter().enumerate() {
                    out[i * nv + j] = s;
                }
            }
            out
        };
        let along_v = |vals: &[f64]| {
            let mut out = vec![0.0; nu * nv];
            for i in 0..nu {
                let row = &vals[i * nv..(i + 1) * nv];
                out[i * nv..(i + 1) * nv].copy_from_slice(&spline_slopes(row, hv));
            }
            out
        };
        let fu = along_u(&values);
        let fv = along_v(&values);
        let fuv = along_v(&fu);
        BicubicData { f: values, fu, fv, fuv }
    }
}

/// The regular parameter lattice of a patch: `(u0, v0, hu, hv)`.
fn lattice(patch: &SampledPatch) -> Result<(f64, f64, f64, f64)> {
    let (nu, nv) = (patch.nu, patch.nv);
    let p = |i: usize, j: usize| patch.params[i * nv + j];
    let (u0, v0) = (p(0, 0).u, p(0, 0).v);
    let hu = (p(nu - 1, 0).u - u0) / (nu - 1) as f64;
    let hv = (p(0, nv - 1).v - v0) / (nv - 1) as f64;
    if !(hu > 0.0 && hv > 0.0) {
        return Err(Error::InvalidArgument(
            "patch parameters must increase with the node indices".into(),
        ));
    }
    let tol = 1e-9 * (1.0 + u0.abs().max(v0.abs()) + hu * nu as f64 + hv * nv as f64);
    for i in 0..nu {
        for j in 0..nv {
            let q = p(i, j);
            if (q.u - (u0 + i as f64 * hu)).abs() > tol || (q.v - (v0 + j as f64 * hv)).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "patch parameters are not a regular lattice at node ({i}, {j})"
                )));
            }
        }
    }
    Ok((u0, v0, hu, hv))
}

/// A sampled patch as a surface model: the tensor-product cubic spline
/// through the samples, evaluated with exact derivatives.
pub fn sampled_surface(patch: &SampledPatch, label: &str) -> Result<SurfaceModel> {
    let (nu, nv) = (patch.nu, patch.nv);
    if nu < 4 || nv < 4 || patch.params.len() != nu * nv || patch.positions.len() != nu * nv {
        return Err(Error::InvalidArgument(format!(
            "a sampled surface needs at least 4x4 consistent samples, got {nu}x{nv}"
        )));
    }
    let (u0, v0, hu, hv) = lattice(patch)?;
    let coords: Vec<BicubicData> = (0..4)
        .map(|c| BicubicData::new(patch.positions.iter().map(|x| x[c]).collect(), nu, nv, hu, hv))
        .collect();
    let domain = Domain::new((u0, u0 + hu * (nu - 1) as f64), (v0, v0 + hv * (nv - 1) as f64));
    Ok(SurfaceModel::analytic(label, domain, move |u: Jet, v: Jet| {
        let cell = |x: f64, x0: f64, h: f64, n: usize| (((x - x0) / h).floor().max(0.0) as usize).min(n - 2);
        let (i, j) = (cell(u.value(), u0, hu, nu), cell(v.value(), v0, hv, nv));
        let s = (u - (u0 + i as f64 * hu)) / hu;
        let t = (v - (v0 + j as f64 * hv)) / hv;
        // cubic Hermite basis: values at the two ends, then slopes
        let basis = |x: Jet| {
            let x2 = x * x;
            let x3 = x2 * x;
            [
                x3 * 2.0 - x2 * 3.0 + 1.0,
                x3 * -2.0 + x2 * 3.0,
                x3 - x2 * 2.0 + x,
                x3 - x2,
            ]
        };
        let (bs, bt) = (basis(s), basis(t));
        std::array::from_fn(|c| {
            let d = &coords[c];
            let mut acc = Jet::constant(0.0, u.order());
            for a in 0..2 {
                for b in 0..2 {
                    let k = (i + a) * nv + (j + b);
                    acc += bs[a] * bt[b] * d.f[k]
                        + bs[2 + a] * bt[b] * (hu * d.fu[k])
                        + bs[a] * bt[2 + b] * (hv * d.fv[k])
                        + bs[2 + a] * bt[2 + b] * (hu * hv * d.fuv[k]);
                }
            }
            acc
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;

    fn small_grid() -> InvariantFieldGrid {
        let mut g = InvariantFieldGrid::zeros(3, 4, 0.1, 0.2).unwrap();
        for (f, field) in g.fields.iter_mut().enumerate() {
            for (k, x) in field.iter_mut().enumerate() {
                *x = 1.0 + 0.1 * f as f64 + (k as f64).sqrt() / 3.0;
            }
        }
        g.holonomy = 1.25e-15;
        g
    }

    #[test]
    fn grid_text_round_trip_is_exact() {
        let mut g = small_grid();
        g.positions = Some(
            (0..12)
                .map(|k| Vec4::new(k as f64 / 7.0, -1.0 / 3.0, 0.0, 1e-300))
                .collect(),
        );
        let mut buf = Vec::new();
        write_grid(&g, &mut buf).unwrap();
        let back = read_grid(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        let mut again = Vec::new();
        write_grid(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn shuffled_rows_are_accepted() {
        let mut buf = Vec::new();
        write_grid(&small_grid(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (head, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#') || l.starts_with('u'));
        let shuffled = head.join("\n") + "\n" + &body.iter().rev().copied().collect::<Vec<_>>().join("\n");
        assert_eq!(parse_grid(&shuffled).unwrap(), small_grid());
    }

    #[test]
    fn schema_violations_name_the_line() {
        let mut buf = Vec::new();
        write_grid(&small_grid(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let missing_row: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_grid(&missing_row), Err(Error::Format { .. })));
        let bad_value = text.replacen(",1.0000000000000000e0,", ",abc,", 1);
        match parse_grid(&bad_value) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let duplicate = text.replacen("\n0,1,", "\n0,0,", 1);
        assert!(matches!(parse_grid(&duplicate), Err(Error::Format { .. })));
        let nan = text.replacen(",1.0000000000000000e0,", ",NaN,", 1);
        assert!(matches!(parse_grid(&nan), Err(Error::Format { .. })));
        assert!(matches!(
            parse_grid(&text.replace("surf4-grid", "other")),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn obj_layout() {
        let m = catalog("clifford_torus", &[1.0]).unwrap();
        let patch = SampledPatch::from_model(&m, 5, 6).unwrap();
        let mut buf = Vec::new();
        write_obj(&patch, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let count = |prefix: &str| text.lines().filter(|l| l.starts_with(prefix)).count();
        assert_eq!(count("v "), 30);
        assert_eq!(count("vt "), 30);
        assert_eq!(count("f "), 2 * 4 * 5);
        let vt: Vec<f64> = text
            .lines()
            .filter_map(|l| l.strip_prefix("vt "))
            .map(|x| x.parse().unwrap())
            .collect();
        for (x, p) in vt.iter().zip(&patch.positions) {
            assert_eq!(*x, p[3]);
        }
    }

    #[test]
    fn csv4d_round_trip_is_exact() {
        let m = catalog("generic_graph", &[]).unwrap();
        let patch = SampledPatch::from_model(&m, 7, 5).unwrap();
        let mut buf = Vec::new();
        write_csv4d(&patch, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(file_kind(&text).unwrap(), FileKind::Patch);
        assert_eq!(parse_csv4d(&text).unwrap(), patch);
    }

    #[test]
    fn spline_slopes_are_exact_on_cubics() {
        let h = 0.3;
        let y: Vec<f64> = (0..9)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x + 1.0
            })
            .collect();
        for (i, m) in spline_slopes(&y, h).into_iter().enumerate() {
            let x = i as f64 * h;
            assert!((m - (3.0 * x * x - 2.0)).abs() < 1e-11, "{i}: {m}");
        }
    }

    #[test]
    fn sampled_surface_reproduces_the_source() {
        let m = catalog("generic_graph", &[]).unwrap();
        let patch = SampledPatch::from_model(&m, 41, 41).unwrap();
        let s = sampled_surface(&patch, "sampled").unwrap();
        for p in [ParamPoint::new(0.13, -0.27), ParamPoint::new(-0.4, 0.35)] {
            let (a, b) = (m.evaluate_jet(p, 3).unwrap(), s.evaluate_jet(p, 3).unwrap());
            assert!((a.z - b.z).amax() < 1e-7);
            assert!((a.z_u - b.z_u).amax() < 1e-5);
            assert!((a.z_uv - b.z_uv).amax() < 1e-3);
        }
        // samples are interpolated exactly
        let k = 17 * 41 + 5;
        assert!((s.position(patch.params[k]).unwrap() - patch.positions[k]).amax() < 1e-14);
    }
}
