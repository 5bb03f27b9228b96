use std::fs;
use std::path::Path;

use super::{Mesh, Point};
use crate::{Error, Result};

fn format_error(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Loads an OFF mesh, or OBJ when the extension is `.obj`. Strict weights.
pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_obj = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    if is_obj {
        parse_obj(&text, path)
    } else {
        parse_off(&text, path)
    }
}

/// Content lines with their 1-based numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_numbers<T: std::str::FromStr>(
    tokens: &[&str],
    path: &Path,
    line: usize,
) -> Result<Vec<T>> {
    tokens
        .iter()
        .map(|t| t.parse::<T>().map_err(|_| format_error(path, line, format!("bad number `{t}`"))))
        .collect()
}

pub fn parse_off(text: &str, path: &Path) -> Result<Mesh> {
    let mut lines = content_lines(text);
    let (n, header) = lines.next().ok_or_else(|| format_error(path, 1, "empty file"))?;
    let mut header_tokens: Vec<&str> = header.split_whitespace().collect();
    if header_tokens.first() != Some(&"OFF") {
        return Err(format_error(path, n, "missing `OFF` header"));
    }
    header_tokens.remove(0);
    // counts may follow the header on the same line
    let (n, counts) = if header_tokens.is_empty() {
        let (n, l) = lines.next().ok_or_else(|| format_error(path, n + 1, "missing counts line"))?;
        (n, l.split_whitespace().collect::<Vec<_>>())
    } else {
        (n, header_tokens)
    };
    if counts.len() < 2 {
        return Err(format_error(path, n, "counts line needs vertex and face counts"));
    }
    let counts: Vec<usize> = parse_numbers(&counts, path, n)?;
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    let mut faces = Vec::with_capacity(nf);
    let mut last = n;
    for _ in 0..nv {
        let (n, l) = lines
            .next()
            .ok_or_else(|| format_error(path, last + 1, format!("expected {nv} vertices")))?;
        last = n;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(format_error(path, n, "vertex needs 3 coordinates"));
        }
        let xyz: Vec<f64> = parse_numbers(&tokens[..3], path, n)?;
        vertices.push([xyz[0], xyz[1], xyz[2]]);
    }
    for _ in 0..nf {
        let (n, l) = lines
            .next()
            .ok_or_else(|| format_error(path, last + 1, format!("expected {nf} faces")))?;
        last = n;
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let count: usize = parse_numbers(&tokens[..1], path, n)?[0];
        if count != 3 {
            return Err(format_error(path, n, format!("face has {count} vertices; only triangles are supported")));
        }
        if tokens.len() < 4 {
            return Err(format_error(path, n, "face needs 3 vertex indices"));
        }
        let idx: Vec<usize> = parse_numbers(&tokens[1..4], path, n)?;
        if let Some(bad) = idx.iter().find(|&&i| i >= nv) {
            return Err(format_error(path, n, format!("vertex index {bad} out of range (have {nv})")));
        }
        faces.push([idx[0], idx[1], idx[2]]);
    }
    Mesh::new(vertices, faces, true).map_err(|e| format_error(path, last, e.to_string()))
}

/// OBJ subset: `v x y z` and triangular `f a b c` (1-based, `a/b/c` allowed).
pub fn parse_obj(text: &str, path: &Path) -> Result<Mesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut raw_faces: Vec<(usize, [usize; 3])> = Vec::new();
    for (n, l) in content_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        match tokens[0] {
            "v" => {
                if tokens.len() < 4 {
                    return Err(format_error(path, n, "vertex needs 3 coordinates"));
                }
                let xyz: Vec<f64> = parse_numbers(&tokens[1..4], path, n)?;
                vertices.push([xyz[0], xyz[1], xyz[2]]);
            }
            "f" => {
                if tokens.len() != 4 {
                    return Err(format_error(
                        path,
                        n,
                        format!("face has {} vertices; only triangles are supported", tokens.len() - 1),
                    ));
                }
                let heads: Vec<&str> = tokens[1..].iter().map(|t| t.split('/').next().unwrap_or("")).collect();
                let idx: Vec<usize> = parse_numbers(&heads, path, n)?;
                if idx.contains(&0) {
                    return Err(format_error(path, n, "OBJ indices are 1-based"));
                }
                raw_faces.push((n, [idx[0] - 1, idx[1] - 1, idx[2] - 1]));
            }
            _ => {}
        }
    }
    let nv = vertices.len();
    for (n, f) in &raw_faces {
        if let Some(bad) = f.iter().find(|&&i| i >= nv) {
            return Err(format_error(path, *n, format!("vertex index {} out of range (have {nv})", bad + 1)));
        }
    }
    let faces = raw_faces.into_iter().map(|(_, f)| f).collect();
    Mesh::new(vertices, faces, true).map_err(|e| format_error(path, 0, e.to_string()))
}

pub fn write_off(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut out = format!("OFF\n{} {} 0\n", mesh.len(), mesh.faces().len());
    for v in mesh.vertices() {
        out.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]));
    }
    for f in mesh.faces() {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Vertex indices, one per line (`#` comments allowed), sorted and deduplicated.
pub fn read_vertex_region(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, l) in content_lines(&text) {
        let v = l
            .parse::<usize>()
            .map_err(|_| format_error(path, n, format!("`{l}` is not a vertex index")))?;
        out.push(v);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
