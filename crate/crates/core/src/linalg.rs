//! Small dense least-squares solver (Householder QR).

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// 1-norm condition number of the triangular factor, which bounds the
    /// sensitivity of the least-squares problem.
    pub condition: T,
}

/// Minimizes `||A x - b||_2` for a tall matrix given as rows.
///
/// Returns `Err(condition)` when the condition estimate exceeds `max_condition`
/// or the matrix is rank deficient (condition reported as infinity).
pub fn least_squares<T: Scalar>(
    rows: &[Vec<T>],
    rhs: &[T],
    max_condition: T,
) -> Result<LeastSquares<T>, T> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    assert_eq!(rhs.len(), m, "right-hand side length mismatch");
    assert!(m >= n, "least squares needs at least as many rows as columns");

    // column-major working copy
    let mut a: Vec<Vec<T>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut b = rhs.to_vec();

    for k in 0..n {
        let norm = a[k][k..].iter().fold(T::zero(), |s, &v| s.hypot(v));
        if norm == T::zero() {
            return Err(T::infinity());
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, &x| s + x * x);
        let reflect = |col: &mut [T]| {
            let dot = v.iter().zip(col.iter()).fold(T::zero(), |s, (&x, &y)| s + x * y);
            let f = (dot + dot) / vnorm2;
            col.iter_mut().zip(&v).for_each(|(c, &x)| *c = *c - f * x);
        };
        if vnorm2 > T::zero() {
            for col in a.iter_mut().skip(k + 1) {
                reflect(&mut col[k..]);
            }
            reflect(&mut b[k..]);
        }
        a[k][k] = alpha;
        a[k][k + 1..].iter_mut().for_each(|x| *x = T::zero());
    }

    // r[i][j] = a[j][i] for j >= i
    let r = |i: usize, j: usize| a[j][i];
    let condition = triangular_condition(n, &r);
    if !(condition <= max_condition) {
        return Err(condition);
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let tail = (i + 1..n).fold(T::zero(), |s, j| s + r(i, j) * x[j]);
        x[i] = (b[i] - tail) / r(i, i);
    }
    Ok(LeastSquares {
        solution: x,
        condition,
    })
}

fn triangular_condition<T: Scalar>(n: usize, r: &impl Fn(usize, usize) -> T) -> T {
    let col_norm = |get: &dyn Fn(usize, usize) -> T| {
        (0..n)
            .map(|j| (0..=j).fold(T::zero(), |s, i| s + get(i, j).abs()))
            .fold(T::zero(), T::max)
    };
    // explicit inverse of the upper-triangular factor, column by column
    let mut inv = vec![vec![T::zero(); n]; n];
    for c in 0..n {
        for i in (0..=c).rev() {
            let rhs = if i == c { T::one() } else { T::zero() };
            let tail = (i + 1..=c).fold(T::zero(), |s, j| s + r(i, j) * inv[j][c]);
            inv[i][c] = (rhs - tail) / r(i, i);
        }
    }
    let norm_r = col_norm(&|i, j| r(i, j));
    let norm_inv = col_norm(&|i, j| inv[i][j]);
    norm_r * norm_inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        let rows: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let ls = least_squares(&rows, &[3.0, 5.0], 1e12).unwrap();
        assert!((ls.solution[0] - 0.8).abs() < 1e-14);
        assert!((ls.solution[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn overdetermined_line_fit() {
        // y = 1 + 2x with symmetric noise that cancels
        let rows: Vec<Vec<f64>> = (0..4).map(|x| vec![x as f64, 1.0]).collect();
        let y = [1.5, 2.5, 5.5, 6.5];
        let ls = least_squares(&rows, &y, 1e12).unwrap();
        assert!((ls.solution[0] - 1.8).abs() < 1e-12);
        assert!((ls.solution[1] - 1.3).abs() < 1e-12);
    }

    #[test]
    fn identity_has_unit_condition() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ls = least_squares(&rows, &[1.0, 1.0], 1e12).unwrap();
        assert!((ls.condition - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let err = least_squares(&rows, &[1.0, 2.0, 3.0], 1e12).unwrap_err();
        assert!(err > 1e12);
    }

    #[test]
    fn zero_column_is_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![0.0, 1.0]];
        assert!(least_squares(&rows, &[1.0, 1.0], 1e12).unwrap_err().is_infinite());
    }
}
