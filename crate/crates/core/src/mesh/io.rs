//! Triangle-format ASCII meshes: `.node` (vertices with one boundary marker)
//! and `.ele` (three nodes per triangle), 1-based indices, `#` comments.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Mesh, MeshError};
use crate::Point;

/// Renders the `.node` and `.ele` contents.
pub fn write_triangle(mesh: &Mesh) -> (String, String) {
    let mut node = String::new();
    writeln!(node, "{} 2 0 1", mesh.n_vertices()).unwrap();
    for (i, (p, marker)) in mesh.vertices().iter().zip(mesh.markers()).enumerate() {
        // `{:?}` prints the shortest representation that round-trips exactly.
        writeln!(node, "{} {:?} {:?} {}", i + 1, p.x, p.y, marker).unwrap();
    }
    let mut ele = String::new();
    writeln!(ele, "{} 3 0", mesh.n_triangles()).unwrap();
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(ele, "{} {} {} {}", i + 1, t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    (node, ele)
}

/// Writes `PREFIX.node` and `PREFIX.ele`; returns both paths.
pub fn export_triangle(mesh: &Mesh, prefix: &Path) -> Result<(PathBuf, PathBuf), MeshError> {
    let (node, ele) = write_triangle(mesh);
    let node_path = with_suffix(prefix, "node");
    let ele_path = with_suffix(prefix, "ele");
    fs::write(&node_path, node)?;
    fs::write(&ele_path, ele)?;
    Ok((node_path, ele_path))
}

/// Reads `PREFIX.node` and `PREFIX.ele`.
pub fn import_triangle(prefix: &Path) -> Result<Mesh, MeshError> {
    let node_path = with_suffix(prefix, "node");
    let ele_path = with_suffix(prefix, "ele");
    let node = fs::read_to_string(&node_path)?;
    let ele = fs::read_to_string(&ele_path)?;
    read_triangle(
        &node,
        &ele,
        &node_path.display().to_string(),
        &ele_path.display().to_string(),
    )
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

struct Lines<'a> {
    file: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, file: &'a str) -> Self {
        Self {
            file,
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-empty line with comments stripped, as (1-based line, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }

    fn error(&self, line: usize, message: impl Into<String>) -> MeshError {
        MeshError::Parse {
            file: self.file.to_string(),
            line,
            message: message.into(),
        }
    }

    fn expect_tokens(
        &mut self,
        what: &str,
        last_line: usize,
    ) -> Result<(usize, Vec<&'a str>), MeshError> {
        self.next_tokens().ok_or_else(|| {
            self.error(
                last_line + 1,
                format!("unexpected end of file, expected {what}"),
            )
        })
    }

    fn parse<T: std::str::FromStr>(
        &self,
        line: usize,
        token: &str,
        what: &str,
    ) -> Result<T, MeshError> {
        token
            .parse()
            .map_err(|_| self.error(line, format!("cannot parse {what} from {token:?}")))
    }
}

/// Parses Triangle-format contents; the file names only label errors.
pub fn read_triangle(
    node: &str,
    ele: &str,
    node_name: &str,
    ele_name: &str,
) -> Result<Mesh, MeshError> {
    let mut lines = Lines::new(node, node_name);
    let (line, header) = lines.expect_tokens("node header", 0)?;
    if header.len() < 2 {
        return Err(lines.error(line, "node header needs at least <count> <dim>"));
    }
    let count: usize = lines.parse(line, header[0], "vertex count")?;
    let dim: usize = lines.parse(line, header[1], "dimension")?;
    if dim != 2 {
        return Err(lines.error(line, format!("dimension must be 2, got {dim}")));
    }
    let n_attrs: usize = match header.get(2) {
        Some(t) => lines.parse(line, t, "attribute count")?,
        None => 0,
    };
    let n_markers: usize = match header.get(3) {
        Some(t) => lines.parse(line, t, "marker count")?,
        None => 0,
    };
    if n_markers > 1 {
        return Err(lines.error(line, "at most one boundary marker is supported"));
    }

    let mut vertices = Vec::with_capacity(count);
    let mut markers = Vec::with_capacity(count);
    let mut first_index = None;
    let mut last = line;
    for k in 0..count {
        let (line, tokens) = lines.expect_tokens("vertex line", last)?;
        last = line;
        if tokens.len() != 3 + n_attrs + n_markers {
            return Err(lines.error(
                line,
                format!(
                    "expected {} fields, found {}",
                    3 + n_attrs + n_markers,
                    tokens.len()
                ),
            ));
        }
        let index: usize = lines.parse(line, tokens[0], "vertex index")?;
        let base = *first_index.get_or_insert(index);
        if base > 1 || index != base + k {
            return Err(lines.error(line, format!("vertex index {index} out of sequence")));
        }
        let x: f64 = lines.parse(line, tokens[1], "x coordinate")?;
        let y: f64 = lines.parse(line, tokens[2], "y coordinate")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(lines.error(line, "non-finite coordinate"));
        }
        vertices.push(Point::new(x, y));
        if n_markers == 1 {
            markers.push(lines.parse(line, tokens[3 + n_attrs], "boundary marker")?);
        }
    }
    let base = first_index.unwrap_or(1);

    let mut lines = Lines::new(ele, ele_name);
    let (line, header) = lines.expect_tokens("element header", 0)?;
    let n_tri: usize = lines.parse(line, header[0], "triangle count")?;
    let per: usize = match header.get(1) {
        Some(t) => lines.parse(line, t, "nodes per triangle")?,
        None => 3,
    };
    if per != 3 {
        return Err(lines.error(
            line,
            format!("only 3-node triangles are supported, got {per}"),
        ));
    }
    let n_tri_attrs: usize = match header.get(2) {
        Some(t) => lines.parse(line, t, "attribute count")?,
        None => 0,
    };
    let mut triangles = Vec::with_capacity(n_tri);
    let mut last = line;
    for _ in 0..n_tri {
        let (line, tokens) = lines.expect_tokens("triangle line", last)?;
        last = line;
        if tokens.len() != 4 + n_tri_attrs {
            return Err(lines.error(
                line,
                format!(
                    "expected {} fields, found {}",
                    4 + n_tri_attrs,
                    tokens.len()
                ),
            ));
        }
        let mut tri = [0usize; 3];
        for (slot, token) in tri.iter_mut().zip(&tokens[1..4]) {
            let v: usize = lines.parse(line, token, "vertex reference")?;
            if v < base || v - base >= count {
                return Err(lines.error(line, format!("vertex reference {v} out of range")));
            }
            *slot = v - base;
        }
        triangles.push(tri);
    }

    let markers = (n_markers == 1).then_some(markers);
    Mesh::with_markers(vertices, triangles, markers)
}
