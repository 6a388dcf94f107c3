use crate::sum::{chunked_sum, NeumaierSum};
use crate::{Error, PointSet, Result, Scalar};

/// Squared L2 star discrepancy by Warnock's formula
///
/// ```text
/// 3^-d - (2/N) sum_i prod_k (1 - x_ik^2)/2 + (1/N^2) sum_{i,j} prod_k (1 - max(x_ik, x_jk))
/// ```
///
/// The pair sum visits each unordered pair once and doubles it. Partial sums
/// are compensated and combined in a fixed order, so the result does not
/// depend on the worker count. Round-off below zero is floored at 0.
pub fn warnock_l2_squared<T: Scalar>(points: &PointSet<T>) -> Result<T> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let n = points.n_points();
    let d = points.dim();
    let half = T::lit(0.5);

    let single = chunked_sum(n, |i| {
        points.point(i).iter().fold(T::one(), |acc, &x| acc * (T::one() - x * x) * half)
    });

    let pair = chunked_sum(n, |i| {
        let xi = points.point(i);
        let diag = xi.iter().fold(T::one(), |acc, &x| acc * (T::one() - x));
        let mut off = NeumaierSum::new();
        for j in i + 1..n {
            let xj = points.point(j);
            let mut prod = T::one();
            for k in 0..d {
                prod *= T::one() - xi[k].max(xj[k]);
            }
            off.add(prod);
        }
        diag + off.value() * T::lit(2.0)
    });

    let nf = T::from_count(n);
    let mut total = NeumaierSum::new();
    total.add(T::lit(3.0).powi(-(d as i32)));
    total.add(-T::lit(2.0) * single / nf);
    total.add(pair / (nf * nf));
    Ok(total.value().max(T::zero()))
}

/// L2 star discrepancy, the square root of [`warnock_l2_squared`].
pub fn l2_discrepancy<T: Scalar>(points: &PointSet<T>) -> Result<T> {
    warnock_l2_squared(points).map(|v| v.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(xs: &[f64]) -> PointSet {
        PointSet::new(xs.len(), 1, xs.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_single_points() {
        assert!((warnock_l2_squared(&one_dim(&[0.5])).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((warnock_l2_squared(&one_dim(&[0.0])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // 1/3 + x^2 - x
        for x in [0.1, 0.3, 0.9, 1.0] {
            let v = warnock_l2_squared(&one_dim(&[x])).unwrap();
            assert!((v - (1.0 / 3.0 + x * x - x)).abs() < 1e-15);
        }
    }

    #[test]
    fn two_points() {
        let v = warnock_l2_squared(&one_dim(&[0.25, 0.75])).unwrap();
        assert!((v - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn empty_set_is_an_error() {
        let p = PointSet::<f64>::new(0, 2, vec![]).unwrap();
        assert!(matches!(warnock_l2_squared(&p), Err(Error::EmptyPointSet)));
    }

    #[test]
    fn single_and_double_precision_agree() {
        let p: PointSet = crate::generators::sobol(128, 3, 0).unwrap();
        let a = warnock_l2_squared(&p).unwrap();
        let b = warnock_l2_squared(&p.cast::<f32>()).unwrap();
        assert!(((b as f64) - a).abs() / a < 1e-3);
    }
}
