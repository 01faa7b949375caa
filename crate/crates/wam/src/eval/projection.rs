use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use super::WordVectors;
use crate::error::{Result, WamError};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub word: String,
    pub language: String,
    pub x: f64,
    pub y: f64,
    pub in_dictionary: bool,
}

/// One table to project: language tag, vectors, and the words to flag as
/// dictionary words.
pub type ProjectionInput<'a> = (&'a str, &'a WordVectors, &'a HashSet<String>);

/// Top-two principal components of the mean-centered concatenation of all
/// tables. Component signs are fixed so the largest-magnitude loading is
/// positive.
pub fn project_2d(tables: &[ProjectionInput<'_>]) -> Result<Vec<ProjectedPoint>> {
    let n: usize = tables.iter().map(|(_, v, _)| v.len()).sum();
    let d = tables.first().map_or(0, |(_, v, _)| v.dim());
    if n < 3 {
        return Err(WamError::Degenerate(format!("projection needs at least 3 vectors, got {n}")));
    }
    if tables.iter().any(|(_, v, _)| v.dim() != d) {
        return Err(WamError::InvalidArgument("tables differ in dimension".into()));
    }
    let rows = tables.iter().flat_map(|(_, v, _)| (0..v.len()).map(move |i| v.row(i)));
    let mut x = DMatrix::from_row_iterator(n, d, rows.flatten().copied());
    let mean = x.row_mean();
    for mut r in x.row_iter_mut() {
        r -= &mean;
    }
    let cov = x.transpose() * &x;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    if d < 2 || top == 0.0 || eig.eigenvalues[order[1]] <= top * 1e-12 {
        return Err(WamError::Degenerate("input has rank < 2".into()));
    }
    let axes: Vec<_> = order[..2]
        .iter()
        .map(|&k| {
            let v = eig.eigenvectors.column(k).into_owned();
            let pivot = v.iter().copied().fold(0.0f64, |m, c| if c.abs() > m.abs() { c } else { m });
            if pivot < 0.0 {
                -v
            } else {
                v
            }
        })
        .collect();
    let coords = &x * DMatrix::from_columns(&axes);

    let mut out = Vec::with_capacity(n);
    let mut r = 0;
    for (language, table, flagged) in tables {
        for word in table.words() {
            out.push(ProjectedPoint {
                word: word.clone(),
                language: language.to_string(),
                x: coords[(r, 0)],
                y: coords[(r, 1)],
                in_dictionary: flagged.contains(word),
            });
            r += 1;
        }
    }
    Ok(out)
}

/// Tab-separated `word lang x y in_dictionary` with a header row.
pub fn projection_tsv(points: &[ProjectedPoint]) -> String {
    let mut out = String::from("word\tlang\tx\ty\tin_dictionary\n");
    for p in points {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", p.word, p.language, p.x, p.y, u8::from(p.in_dictionary))
            .expect("writing to a string");
    }
    out
}

pub fn write_projection(points: &[ProjectedPoint], path: &Path) -> Result<()> {
    fs::write(path, projection_tsv(points)).map_err(|e| WamError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_points() -> WordVectors {
        // points of a 2D plane spanned by two orthonormal directions in 4D
        let u = [0.5, 0.5, 0.5, 0.5];
        let v = [0.5, -0.5, 0.5, -0.5];
        let coords = [(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5), (2.0, -1.0), (0.3, 0.7)];
        let data = coords
            .iter()
            .flat_map(|&(a, b)| (0..4).map(move |j| 1.0 + a * u[j] + b * v[j]))
            .collect();
        WordVectors::new((0..5).map(|i| format!("p{i}")).collect(), 4, data).unwrap()
    }

    #[test]
    fn planar_data_keeps_distances_and_is_centered() {
        let v = plane_points();
        let pts = project_2d(&[("src", &v, &HashSet::new())]).unwrap();
        assert_eq!(pts.len(), 5);
        let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
        assert!(mx.abs() < 1e-9 && my.abs() < 1e-9);
        for i in 0..5 {
            for j in 0..5 {
                let orig: f64 = v.row(i).iter().zip(v.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                let proj = (pts[i].x - pts[j].x).powi(2) + (pts[i].y - pts[j].y).powi(2);
                assert!((orig.sqrt() - proj.sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_one_and_tiny_inputs_rejected() {
        let line = WordVectors::new(
            (0..4).map(|i| format!("w{i}")).collect(),
            2,
            vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0],
        )
        .unwrap();
        assert!(project_2d(&[("a", &line, &HashSet::new())]).is_err());
        let two = WordVectors::new(vec!["a".into(), "b".into()], 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(project_2d(&[("a", &two, &HashSet::new())]).is_err());
    }

    #[test]
    fn tsv_layout() {
        let v = plane_points();
        let dict = HashSet::from(["p1".to_string()]);
        let text = projection_tsv(&project_2d(&[("en", &v, &dict)]).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[2].starts_with("p1\ten\t") && lines[2].ends_with("\t1"));
    }
}
