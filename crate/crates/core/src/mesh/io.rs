//! Line-oriented ASCII mesh format.
//!
//! ```text
//! # comment
//! $Nodes <count>
//! <id> <x> <y>
//! $Triangles <count>
//! <id> <v1> <v2> <v3> <region>
//! $BoundaryEdges <count>
//! <id> <v1> <v2> <tag>
//! ```
//!
//! Ids and vertex references are 1-based and consecutive.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{BoundaryEdge, Mesh};
use crate::{Error, Real, Result};

pub fn serialize_mesh<T: Real>(mesh: &Mesh<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "$Nodes {}", mesh.num_vertices());
    for (i, v) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {:.16e} {:.16e}",
            i + 1,
            v[0].to_f64_lossy(),
            v[1].to_f64_lossy()
        );
    }
    let _ = writeln!(out, "$Triangles {}", mesh.num_triangles());
    for (i, (t, r)) in mesh.triangles().iter().zip(mesh.regions()).enumerate() {
        let _ = writeln!(out, "{} {} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1, r);
    }
    let _ = writeln!(out, "$BoundaryEdges {}", mesh.boundary_edges().len());
    for (i, e) in mesh.boundary_edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} {} {}",
            i + 1,
            e.vertices[0] + 1,
            e.vertices[1] + 1,
            e.tag
        );
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-empty line with comments stripped, with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                return Some((i + 1, body));
            }
        }
        None
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<F: FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<F> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("cannot parse {what} from '{tok}'")))
}

fn header(lines: &mut Lines<'_>, name: &str) -> Result<usize> {
    let (ln, text) = lines
        .next()
        .ok_or_else(|| err(lines.last + 1, format!("expected ${name} header")))?;
    let mut toks = text.split_whitespace();
    let tag = toks.next().unwrap_or("");
    if tag != format!("${name}") {
        return Err(err(ln, format!("expected ${name} header, found '{tag}'")));
    }
    let count = field(ln, toks.next(), "count")?;
    if toks.next().is_some() {
        return Err(err(ln, "trailing tokens after count"));
    }
    Ok(count)
}

/// Reads `count` records, each with `width` tokens after the id.
fn records<'a>(
    lines: &mut Lines<'a>,
    count: usize,
    width: usize,
    block: &str,
) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut out = Vec::with_capacity(count);
    for expected in 1..=count {
        let (ln, text) = lines.next().ok_or_else(|| {
            err(
                lines.last + 1,
                format!("${block} block truncated: {} of {count} records", expected - 1),
            )
        })?;
        if text.starts_with('$') {
            return Err(err(
                ln,
                format!("${block} block truncated: {} of {count} records", expected - 1),
            ));
        }
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != width + 1 {
            return Err(err(
                ln,
                format!("expected {} fields, found {}", width + 1, toks.len()),
            ));
        }
        let id: usize = field(ln, Some(toks[0]), "id")?;
        if id != expected {
            return Err(err(ln, format!("id {id} out of sequence (expected {expected})")));
        }
        out.push((ln, toks[1..].to_vec()));
    }
    Ok(out)
}

fn vertex_ref(line: usize, tok: &str, nv: usize) -> Result<usize> {
    let v: usize = field(line, Some(tok), "vertex index")?;
    if v == 0 || v > nv {
        return Err(err(line, format!("vertex index {v} outside 1..={nv}")));
    }
    Ok(v - 1)
}

pub fn parse_mesh<T: Real>(text: &str) -> Result<Mesh<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };

    let nv = header(&mut lines, "Nodes")?;
    let mut vertices = Vec::with_capacity(nv);
    for (ln, toks) in records(&mut lines, nv, 2, "Nodes")? {
        let x: f64 = field(ln, Some(toks[0]), "x")?;
        let y: f64 = field(ln, Some(toks[1]), "y")?;
        let (x, y) = (T::from_f64(x), T::from_f64(y));
        match (x, y) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => vertices.push([x, y]),
            _ => return Err(err(ln, "non-finite coordinate")),
        }
    }

    let nt = header(&mut lines, "Triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    let mut regions = Vec::with_capacity(nt);
    for (ln, toks) in records(&mut lines, nt, 4, "Triangles")? {
        triangles.push([
            vertex_ref(ln, toks[0], nv)?,
            vertex_ref(ln, toks[1], nv)?,
            vertex_ref(ln, toks[2], nv)?,
        ]);
        regions.push(field(ln, Some(toks[3]), "region")?);
    }

    let nb = header(&mut lines, "BoundaryEdges")?;
    let mut boundary = Vec::with_capacity(nb);
    for (ln, toks) in records(&mut lines, nb, 3, "BoundaryEdges")? {
        boundary.push(BoundaryEdge {
            vertices: [vertex_ref(ln, toks[0], nv)?, vertex_ref(ln, toks[1], nv)?],
            tag: field(ln, Some(toks[2]), "tag")?,
        });
    }

    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "unexpected content after $BoundaryEdges block"));
    }

    Mesh::new(vertices, triangles, regions, boundary)
}
