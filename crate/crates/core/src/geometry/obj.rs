//! Minimal Wavefront OBJ ingestion: `v x y z` and triangular `f i j k` records.
//! Every other record type is ignored.

use std::path::Path;

use super::{GeometryError, TriangleMesh, Vec3};
use crate::scalar::Scalar;

pub fn parse_obj<T: Scalar>(text: &str) -> Result<TriangleMesh<T>, GeometryError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                // A fourth (w) component is tolerated and dropped.
                if coords.len() != 3 && coords.len() != 4 {
                    return Err(malformed(line_no, "vertex needs 3 coordinates"));
                }
                let mut xyz = [T::zero(); 3];
                for (slot, tok) in xyz.iter_mut().zip(&coords) {
                    *slot = tok
                        .parse::<T>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| malformed(line_no, "bad vertex coordinate"))?;
                }
                vertices.push(Vec3::from(xyz));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(malformed(line_no, "only triangular faces are supported"));
                }
                let mut tri = [0usize; 3];
                for (slot, tok) in tri.iter_mut().zip(&refs) {
                    // `i`, `i/t`, `i//n` and `i/t/n` all reference vertex `i`.
                    let head = tok.split('/').next().unwrap_or("");
                    let index: usize = head
                        .parse()
                        .map_err(|_| malformed(line_no, "bad face index"))?;
                    if index == 0 || index > vertices.len() {
                        return Err(malformed(line_no, "face index out of range"));
                    }
                    *slot = index - 1;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles)
}

pub fn load_obj<T: Scalar>(path: &Path) -> Result<TriangleMesh<T>, GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_obj(&text)
}

pub fn write_obj<T: Scalar>(mesh: &TriangleMesh<T>) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        out.push_str(&format!("v {} {} {}\n", v.x, v.y, v.z));
    }
    for t in mesh.triangles() {
        out.push_str(&format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
    }
    out
}

fn malformed(line: usize, reason: &'static str) -> GeometryError {
    GeometryError::MalformedObj { line, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vertices_and_faces_ignoring_other_records() {
        let text = "# comment\no thing\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nvt 0 0\nusemtl x\nf 1/1/1 2//1 3\n";
        let mesh = parse_obj::<f64>(text).unwrap();
        assert_eq!(mesh.vertices().len(), 3);
        assert_eq!(mesh.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn reports_line_of_malformed_record() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n";
        match parse_obj::<f64>(text) {
            Err(GeometryError::MalformedObj { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        match parse_obj::<f64>("v 0 0\n") {
            Err(GeometryError::MalformedObj { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_obj::<f64>("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"),
            Err(GeometryError::MalformedObj { line: 5, .. })
        ));
        assert!(matches!(
            parse_obj::<f64>("v 0 0 0\nv 1 0 x\n"),
            Err(GeometryError::MalformedObj { line: 2, .. })
        ));
    }

    #[test]
    fn file_without_faces_is_rejected() {
        assert!(matches!(parse_obj::<f64>("v 0 0 0\n"), Err(GeometryError::EmptyMesh)));
    }

    #[test]
    fn write_then_parse_preserves_mesh() {
        let mesh = super::super::Aabb::new(Vec3::new(0.1, 0.2, 0.3), Vec3::new(0.5, 0.25, 0.125))
            .unwrap()
            .to_mesh();
        let back = parse_obj::<f64>(&write_obj(&mesh)).unwrap();
        assert_eq!(back, mesh);
    }
}
