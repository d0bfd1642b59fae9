//! Line-oriented plain-text mesh format.
//!
//! ```text
//! NODES n ELEMENTS e
//! x y                 (n lines)
//! i0 i1 i2 tag        (e lines, tag 0 = CG, 1 = HDG)
//! BFACES b            (optional)
//! i0 i1 label         (b lines, label D or N)
//! ```
//!
//! Without a `BFACES` section every boundary face is Dirichlet. When the
//! section is present it must label every boundary face.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{BoundaryKind, FaceClass, Mesh, Point, Subdomain};
use crate::error::{Error, Result};

fn format_err(line: usize, msg: impl Into<String>) -> Error {
    Error::MeshFormat { line, msg: msg.into() }
}

pub fn write_mesh(m: &Mesh, mut w: impl Write) -> Result<()> {
    writeln!(w, "NODES {} ELEMENTS {}", m.nodes().len(), m.n_elements())?;
    for p in m.nodes() {
        writeln!(w, "{:.17e} {:.17e}", p[0], p[1])?;
    }
    for (tri, tag) in m.elements().iter().zip(m.elem_subdomain()) {
        let t = match tag {
            Subdomain::Cg => 0,
            Subdomain::Hdg => 1,
        };
        writeln!(w, "{} {} {} {}", tri[0], tri[1], tri[2], t)?;
    }
    let boundary: Vec<_> = m
        .faces()
        .iter()
        .zip(m.face_class())
        .filter(|(_, c)| c.is_boundary())
        .collect();
    writeln!(w, "BFACES {}", boundary.len())?;
    for (face, class) in boundary {
        let label = if *class == FaceClass::Neumann { "N" } else { "D" };
        writeln!(w, "{} {} {}", face.nodes[0], face.nodes[1], label)?;
    }
    Ok(())
}

pub fn read_mesh(r: impl BufRead) -> Result<Mesh> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(s))) => Ok((n, s)),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(format_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (ln, header) = next("header")?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 4 || tok[0] != "NODES" || tok[2] != "ELEMENTS" {
        return Err(format_err(ln, "expected `NODES n ELEMENTS e`"));
    }
    let parse_count = |s: &str| s.parse::<usize>().map_err(|_| format_err(ln, format!("bad count `{s}`")));
    let (n, e) = (parse_count(tok[1])?, parse_count(tok[3])?);

    let mut nodes: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, s) = next("node line")?;
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| format_err(ln, format!("bad coordinate `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != 2 {
            return Err(format_err(ln, "node line must hold exactly two coordinates"));
        }
        nodes.push([v[0], v[1]]);
    }

    let mut elements = Vec::with_capacity(e);
    let mut tags = Vec::with_capacity(e);
    for _ in 0..e {
        let (ln, s) = next("element line")?;
        let v: Vec<usize> = s
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| format_err(ln, format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != 4 {
            return Err(format_err(ln, "element line must be `i0 i1 i2 tag`"));
        }
        if v[..3].iter().any(|&i| i >= n) {
            return Err(format_err(ln, "node index out of range"));
        }
        elements.push([v[0], v[1], v[2]]);
        tags.push(match v[3] {
            0 => Subdomain::Cg,
            1 => Subdomain::Hdg,
            t => return Err(format_err(ln, format!("unknown subdomain tag {t}"))),
        });
    }

    let mut labels: Option<HashMap<[usize; 2], BoundaryKind>> = None;
    if let Ok((ln, s)) = next("BFACES") {
        let tok: Vec<&str> = s.split_whitespace().collect();
        if tok.len() != 2 || tok[0] != "BFACES" {
            return Err(format_err(ln, "expected `BFACES b` or end of file"));
        }
        let b = tok[1].parse::<usize>().map_err(|_| format_err(ln, "bad BFACES count"))?;
        let mut map = HashMap::with_capacity(b);
        for _ in 0..b {
            let (ln, s) = next("boundary face line")?;
            let tok: Vec<&str> = s.split_whitespace().collect();
            if tok.len() != 3 {
                return Err(format_err(ln, "boundary face line must be `i0 i1 label`"));
            }
            let i0 = tok[0].parse::<usize>().map_err(|_| format_err(ln, "bad node index"))?;
            let i1 = tok[1].parse::<usize>().map_err(|_| format_err(ln, "bad node index"))?;
            let kind = match tok[2] {
                "D" => BoundaryKind::Dirichlet,
                "N" => BoundaryKind::Neumann,
                other => return Err(format_err(ln, format!("unknown boundary label `{other}`"))),
            };
            map.insert([i0.min(i1), i0.max(i1)], kind);
        }
        if let Ok((ln, _)) = next("end of file") {
            return Err(format_err(ln, "trailing content after BFACES section"));
        }
        labels = Some(map);
    }

    let mesh = Mesh::from_parts(nodes, elements, tags, |key| match &labels {
        None => Ok(BoundaryKind::Dirichlet),
        Some(map) => map
            .get(&key)
            .copied()
            .ok_or_else(|| format_err(0, format!("boundary face ({}, {}) has no label", key[0], key[1]))),
    })?;
    if let Some(map) = &labels {
        let n_boundary = mesh.face_class().iter().filter(|c| c.is_boundary()).count();
        if map.len() != n_boundary {
            return Err(format_err(0, "BFACES lists faces that are not on the boundary"));
        }
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, Rect, SubdomainSpec};

    #[test]
    fn round_trip() {
        let spec = SubdomainSpec::new(
            |p| if p[0] > 0.5 { Subdomain::Cg } else { Subdomain::Hdg },
            |a, b| if a[1] == 0.0 && b[1] == 0.0 { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet },
        );
        let m = build_structured(4, 2, Rect::unit(), &spec).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), m.nodes());
        assert_eq!(back.elements(), m.elements());
        assert_eq!(back.face_class(), m.face_class());
    }

    #[test]
    fn missing_bfaces_means_dirichlet() {
        let text = "NODES 3 ELEMENTS 1\n0 0\n1 0\n0 1\n0 1 2 1\n";
        let m = read_mesh(text.as_bytes()).unwrap();
        assert_eq!(m.count_class(FaceClass::Dirichlet), 3);
        assert_eq!(m.elem_subdomain()[0], Subdomain::Hdg);
    }

    #[test]
    fn malformed_counts_rejected() {
        let short = "NODES 4 ELEMENTS 1\n0 0\n1 0\n0 1\n0 1 2 0\n";
        assert!(read_mesh(short.as_bytes()).is_err());
        let extra = "NODES 3 ELEMENTS 1\n0 0\n1 0\n0 1\n0 1 2 0\nBFACES 1\n0 1 D\n1 2 D\n";
        assert!(read_mesh(extra.as_bytes()).is_err());
        let bad_header = "NODES x ELEMENTS 1\n";
        assert!(matches!(read_mesh(bad_header.as_bytes()), Err(Error::MeshFormat { line: 1, .. })));
        let bad_label = "NODES 3 ELEMENTS 1\n0 0\n1 0\n0 1\n0 1 2 0\nBFACES 3\n0 1 D\n1 2 X\n0 2 D\n";
        assert!(matches!(read_mesh(bad_label.as_bytes()), Err(Error::MeshFormat { line: 8, .. })));
    }
}
