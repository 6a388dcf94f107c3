use std::fmt::Write as _;

use crate::{Error, PointSet, Result, Scalar};

/// Signed local discrepancy `#(P ∩ [0,x))/N - vol([0,x))` of a 2-D set at
/// `x = ((a+1)/res, (b+1)/res)`; row `a`, column `b` of the returned matrix.
pub fn local_discrepancy_field<T: Scalar>(points: &PointSet<T>, resolution: usize) -> Result<Vec<Vec<T>>> {
    if points.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: points.dim(), max: 2 });
    }
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if resolution == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let res = T::from_count(resolution);
    let edge = |a: usize| T::from_count(a + 1) / res;
    // First grid index whose open box contains coordinate x, or `resolution` if none.
    let first_cell = |x: T| -> usize {
        let guess = (x * res).floor().to_usize().unwrap_or(0).min(resolution);
        let mut a = guess.saturating_sub(1);
        while a < resolution && x >= edge(a) {
            a += 1;
        }
        a
    };

    let mut hist = vec![vec![0usize; resolution + 1]; resolution + 1];
    for row in points.rows() {
        hist[first_cell(row[0])][first_cell(row[1])] += 1;
    }
    // 2-D prefix sums: counts[a][b] = #{i : cell_x(i) <= a, cell_y(i) <= b}.
    for a in 0..=resolution {
        for b in 0..=resolution {
            let up = if a > 0 { hist[a - 1][b] } else { 0 };
            let left = if b > 0 { hist[a][b - 1] } else { 0 };
            let diag = if a > 0 && b > 0 { hist[a - 1][b - 1] } else { 0 };
            hist[a][b] = hist[a][b] + up + left - diag;
        }
    }

    let n = T::from_count(points.n_points());
    Ok((0..resolution)
        .map(|a| {
            (0..resolution)
                .map(|b| T::from_count(hist[a][b]) / n - edge(a) * edge(b))
                .collect()
        })
        .collect())
}

/// CSV rendering of a field, one grid row per line.
pub fn field_to_csv<T: Scalar>(field: &[Vec<T>]) -> String {
    let mut out = String::new();
    for row in field {
        for (b, v) in row.iter().enumerate() {
            if b > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", v.as_f64()).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::star_discrepancy;
    use crate::generators;

    fn naive(points: &PointSet, res: usize) -> Vec<Vec<f64>> {
        (0..res)
            .map(|a| {
                (0..res)
                    .map(|b| {
                        let x = (a + 1) as f64 / res as f64;
                        let y = (b + 1) as f64 / res as f64;
                        let c = points.rows().filter(|r| r[0] < x && r[1] < y).count();
                        c as f64 / points.n_points() as f64 - x * y
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn matches_direct_counting() {
        for p in [
            generators::sobol::<f64>(64, 2, 0).unwrap(),
            generators::fibonacci_set(13).unwrap(),
            generators::uniform_random(40, 2, 3).unwrap(),
        ] {
            assert_eq!(local_discrepancy_field(&p, 32).unwrap(), naive(&p, 32));
        }
    }

    #[test]
    fn corner_cells() {
        let p: PointSet = generators::sobol(64, 2, 1).unwrap();
        let f = local_discrepancy_field(&p, 50).unwrap();
        assert_eq!(f[49][49], 0.0);
        let fine = local_discrepancy_field(&p, 4000).unwrap();
        assert!(fine[0][0].abs() < 1e-6);
    }

    #[test]
    fn grid_sup_bounded_by_star() {
        let p: PointSet = generators::halton(30, 2, 1).unwrap();
        let star = star_discrepancy(&p).unwrap().value;
        let f = local_discrepancy_field(&p, 200).unwrap();
        let m = f.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(m <= star + 1e-15);
    }

    #[test]
    fn rejects_other_dimensions() {
        let p: PointSet = generators::sobol(8, 3, 0).unwrap();
        assert!(matches!(local_discrepancy_field(&p, 4), Err(Error::UnsupportedDimension { .. })));
    }
}
