//! Point sets in the unit cube, coordinate projections, and CSV file IO.
//!
//! Files are headerless CSV: one point per line, comma separated, LF line
//! endings. Coordinates are written with 17 significant digits so that an
//! `f64` survives a write/read round trip bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

/// `N` points in `[0, 1]^d`, stored row-major (`coords[i * dim + k]`).
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<T = f64> {
    n_points: usize,
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointSet<T> {
    /// Builds a point set from row-major coordinates, checking the cube bounds.
    pub fn new(n_points: usize, dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.len() != n_points * dim {
            return Err(Error::Shape(format!(
                "{} coordinates for {n_points} points of dimension {dim}",
                coords.len()
            )));
        }
        for (idx, &c) in coords.iter().enumerate() {
            if !(c >= T::zero() && c <= T::one()) {
                return Err(Error::Domain { row: idx / dim, col: idx % dim, value: c.as_f64() });
            }
        }
        Ok(Self { n_points, dim, coords })
    }

    /// Builds a point set from explicit rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyPointSet)?;
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Format {
                    line: i + 1,
                    msg: format!("expected {dim} coordinates, found {}", r.len()),
                });
            }
            coords.extend_from_slice(r);
        }
        Self::new(rows.len(), dim, coords)
    }

    /// Crate-internal constructor for generators whose output is in range by construction.
    pub(crate) fn from_raw(n_points: usize, dim: usize, coords: Vec<T>) -> Self {
        debug_assert_eq!(coords.len(), n_points * dim);
        debug_assert!(coords.iter().all(|&c| c >= T::zero() && c <= T::one()));
        Self { n_points, dim, coords }
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> T {
        self.coords[i * self.dim + k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Coordinates of one column.
    pub fn column(&self, k: usize) -> Vec<T> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Converts the coordinates to another scalar type.
    pub fn cast<U: Scalar>(&self) -> PointSet<U> {
        let coords = self
            .coords
            .iter()
            .map(|&c| U::from_f64(c.as_f64()).expect("coordinate representable"))
            .map(|c| c.max(U::zero()).min(U::one()))
            .collect();
        PointSet { n_points: self.n_points, dim: self.dim, coords }
    }

    /// Applies a permutation: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_points {
            return Err(Error::DimensionMismatch { expected: self.n_points, got: perm.len() });
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for &p in perm {
            if p >= self.n_points {
                return Err(Error::InvalidParameter(format!("permutation index {p} out of range")));
            }
            coords.extend_from_slice(self.point(p));
        }
        Ok(Self { n_points: self.n_points, dim: self.dim, coords })
    }

    /// Concatenates the rows of two sets of the same dimension.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(Self { n_points: self.n_points + other.n_points, dim: self.dim, coords })
    }

    /// Projection onto the coordinates in `subset`, columns copied in subset order.
    pub fn project(&self, subset: &ProjectionIndexSet) -> Result<Self> {
        subset.check_against(self.dim)?;
        let dims = subset.dims();
        let mut coords = Vec::with_capacity(self.n_points * dims.len());
        for row in self.rows() {
            coords.extend(dims.iter().map(|&k| row[k]));
        }
        Ok(Self { n_points: self.n_points, dim: dims.len(), coords })
    }
}

/// Strictly increasing, non-empty list of coordinate indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ProjectionIndexSet(Vec<usize>);

impl ProjectionIndexSet {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidProjection("empty index set".into()));
        }
        if dims.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidProjection(format!(
                "indices must be strictly increasing: {dims:?}"
            )));
        }
        Ok(Self(dims))
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut dims: Vec<usize>) -> Result<Self> {
        dims.sort_unstable();
        dims.dedup();
        Self::new(dims)
    }

    /// `{0, 1, ..., dim - 1}`.
    pub fn full(dim: usize) -> Self {
        assert!(dim > 0, "full projection of a zero-dimensional set");
        Self((0..dim).collect())
    }

    /// The subset encoded by the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Result<Self> {
        Self::new((0..64).filter(|k| mask >> k & 1 == 1).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn check_against(&self, dim: usize) -> Result<()> {
        match self.0.last() {
            Some(&k) if k >= dim => Err(Error::InvalidProjection(format!(
                "index {k} out of range for dimension {dim}"
            ))),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for ProjectionIndexSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProjectionIndexSet> for Vec<usize> {
    fn from(p: ProjectionIndexSet) -> Self {
        p.0
    }
}

/// Formats one coordinate with 17 significant digits.
fn fmt_coord(out: &mut String, c: f64) {
    write!(out, "{c:.16e}").expect("writing to a String cannot fail");
}

/// Renders a point set as CSV text.
pub fn to_csv<T: Scalar>(points: &PointSet<T>) -> String {
    let mut out = String::with_capacity(points.n_points() * points.dim() * 24);
    for row in points.rows() {
        for (k, &c) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            fmt_coord(&mut out, c.as_f64());
        }
        out.push('\n');
    }
    out
}

/// Parses CSV text. When `expected_dim` is given every row must have exactly
/// that many columns; otherwise the first row fixes the dimension.
pub fn parse_csv<T: Scalar, R: Read>(reader: R, expected_dim: Option<usize>) -> Result<PointSet<T>> {
    let mut dim = expected_dim;
    let mut coords = Vec::new();
    let mut n = 0;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let d = *dim.get_or_insert(fields.len());
        if fields.len() != d {
            return Err(Error::Format {
                line: lineno + 1,
                msg: format!("expected {d} coordinates, found {}", fields.len()),
            });
        }
        for (k, f) in fields.iter().enumerate() {
            let v: f64 = f.trim().parse().map_err(|_| Error::Format {
                line: lineno + 1,
                msg: format!("cannot parse {f:?} as a number"),
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain { row: n, col: k, value: v });
            }
            coords.push(T::from_f64(v).expect("coordinate representable"));
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    PointSet::new(n, dim.unwrap_or(1), coords)
}

pub fn read_points<T: Scalar>(path: impl AsRef<Path>) -> Result<PointSet<T>> {
    parse_csv(fs::File::open(path)?, None)
}

/// Reads a file whose rows must all have `dim` columns.
pub fn read_points_dim<T: Scalar>(path: impl AsRef<Path>, dim: usize) -> Result<PointSet<T>> {
    parse_csv(fs::File::open(path)?, Some(dim))
}

pub fn write_points<T: Scalar>(points: &PointSet<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_csv(points))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(rows).unwrap()
    }

    #[test]
    fn project_extracts_columns() {
        let p = set(&[&[0.2, 0.9]]);
        let s = ProjectionIndexSet::new(vec![0]).unwrap();
        assert_eq!(p.project(&s).unwrap(), set(&[&[0.2]]));

        let p = set(&[&[0.1, 0.5, 0.9], &[0.3, 0.2, 0.4]]);
        let s = ProjectionIndexSet::new(vec![0, 2]).unwrap();
        assert_eq!(p.project(&s).unwrap(), set(&[&[0.1, 0.9], &[0.3, 0.4]]));
        assert_eq!(p.project(&ProjectionIndexSet::full(3)).unwrap(), p);
    }

    #[test]
    fn project_rejects_out_of_range() {
        let p = set(&[&[0.2, 0.9]]);
        let s = ProjectionIndexSet::new(vec![0, 2]).unwrap();
        assert!(matches!(p.project(&s), Err(Error::InvalidProjection(_))));
    }

    #[test]
    fn index_set_validation() {
        assert!(ProjectionIndexSet::new(vec![]).is_err());
        assert!(ProjectionIndexSet::new(vec![1, 1]).is_err());
        assert!(ProjectionIndexSet::new(vec![2, 1]).is_err());
        assert_eq!(ProjectionIndexSet::from_mask(0b101).unwrap().dims(), &[0, 2]);
        let s: ProjectionIndexSet = serde_json::from_str("[0,3]").unwrap();
        assert_eq!(s.dims(), &[0, 3]);
        assert!(serde_json::from_str::<ProjectionIndexSet>("[3,0]").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let p = set(&[&[0.5, 0.5]]);
        write_points(&p, &path).unwrap();
        assert_eq!(read_points::<f64>(&path).unwrap(), p);
    }

    #[test]
    fn ragged_row_is_format_error() {
        let r = parse_csv::<f64, _>("0.1,0.2,0.3\n".as_bytes(), Some(2));
        assert!(matches!(r, Err(Error::Format { line: 1, .. })));
        let r = parse_csv::<f64, _>("0.1,0.2\n0.3\n".as_bytes(), None);
        assert!(matches!(r, Err(Error::Format { line: 2, .. })));
    }

    #[test]
    fn out_of_cube_is_domain_error() {
        let r = parse_csv::<f64, _>("1.5,0.2\n".as_bytes(), None);
        assert!(matches!(r, Err(Error::Domain { row: 0, col: 0, .. })));
        assert!(PointSet::new(1, 1, vec![-0.1f64]).is_err());
        assert!(PointSet::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn emitted_precision() {
        let p = set(&[&[0.1, 1.0 / 3.0]]);
        let text = to_csv(&p);
        assert_eq!(text, "1.0000000000000001e-1,3.3333333333333331e-1\n");
    }
}
