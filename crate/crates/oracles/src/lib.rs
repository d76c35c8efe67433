//! Reference computations for tests.
//!
//! Nothing here shares code with `lockdown-core`: fits are solved through the
//! normal equations in exact rational arithmetic or plain Gaussian
//! elimination, polynomials are evaluated by explicit powers, and lockdown
//! feasibility is enumerated over every (delay, day, constraint) triple.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Sum of `c_j * t^(d - j)` with every power computed separately.
pub fn eval_by_powers(coeffs: &[f64], t: f64) -> f64 {
    let d = coeffs.len() as i32 - 1;
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * t.powi(d - j as i32))
        .sum()
}

/// `1^k + 2^k + ... + n^k` for `k <= 4` by Faulhaber's closed forms.
pub fn power_sum(n: u128, k: u32) -> u128 {
    match k {
        0 => n,
        1 => n * (n + 1) / 2,
        2 => n * (n + 1) * (2 * n + 1) / 6,
        3 => (n * (n + 1) / 2).pow(2),
        4 => n * (n + 1) * (2 * n + 1) * (3 * n * n + 3 * n - 1) / 30,
        _ => panic!("closed form only tabulated up to k = 4"),
    }
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Weighted least-squares coefficients (highest power first) obtained by
/// forming `X^T W X a = X^T W y` and eliminating in exact rationals.
/// Only the final conversion to `f64` rounds.
pub fn exact_weighted_fit(t: &[f64], y: &[f64], w: &[f64], degree: usize) -> Vec<f64> {
    let n = degree + 1;
    let mut normal = vec![vec![BigRational::zero(); n + 1]; n];
    for ((&t, &y), &w) in t.iter().zip(y).zip(w) {
        let (t, y, w) = (exact(t), exact(y), exact(w));
        let powers: Vec<BigRational> = (0..n)
            .map(|j| {
                let mut p = BigRational::one();
                for _ in 0..(degree - j) {
                    p *= &t;
                }
                p
            })
            .collect();
        for i in 0..n {
            for j in 0..n {
                normal[i][j] += &w * &powers[i] * &powers[j];
            }
            normal[i][n] += &w * &powers[i] * &y;
        }
    }
    gauss_jordan(normal)
        .iter()
        .map(|x| x.to_f64().expect("representable"))
        .collect()
}

fn gauss_jordan(mut m: Vec<Vec<BigRational>>) -> Vec<BigRational> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("normal matrix is singular");
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n].clone()).collect()
}

/// Dense `A x = b` by Gaussian elimination with partial pivoting in `f64`.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    x
}

/// Relative error with a floor on the denominator.
pub fn rel_err(actual: f64, expected: f64, floor: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(floor)
}

#[derive(Debug, Clone)]
pub struct Capacity {
    /// `(start day, value)`, starts ascending.
    pub steps: Vec<(f64, f64)>,
}

impl Capacity {
    pub fn at(&self, t: f64) -> f64 {
        let mut value = f64::NAN;
        for &(start, v) in &self.steps {
            if start <= t {
                value = v;
            }
        }
        value
    }
}

#[derive(Debug, Clone)]
pub struct Resource {
    pub factor: f64,
    pub availability: Capacity,
    pub storage: Option<(f64, Capacity)>,
    pub distribution: Option<(f64, Capacity)>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub current_day: i64,
    pub lag_days: i64,
    pub delta_max: i64,
    pub active: Vec<f64>,
    pub resources: Vec<Resource>,
    pub growth: Option<(f64, Vec<f64>)>,
    pub tpr: Option<(f64, Vec<f64>)>,
    pub rates_through_lag: bool,
}

/// Whether every constraint holds for lockdown after `delta` days, checked
/// triple by triple.
pub fn feasible(s: &Scenario, delta: i64) -> bool {
    let resource_end = s.current_day + s.lag_days + delta;
    let rate_end = if s.rates_through_lag { resource_end } else { s.current_day + delta };
    for day in s.current_day..=resource_end {
        let t = day as f64;
        let active = eval_by_powers(&s.active, t).max(0.0);
        for r in &s.resources {
            let need = r.factor * active;
            if need > r.availability.at(t) {
                return false;
            }
            if let Some((v, cap)) = &r.storage {
                if need * v > cap.at(t) {
                    return false;
                }
            }
            if let Some((w, cap)) = &r.distribution {
                if need * w > cap.at(t) {
                    return false;
                }
            }
        }
    }
    for day in s.current_day..=rate_end {
        let t = day as f64;
        for (cap, coeffs) in [&s.growth, &s.tpr].into_iter().flatten() {
            if eval_by_powers(coeffs, t) > *cap {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    InfeasibleNow,
    Optimal(i64),
    Unbounded,
}

/// Largest feasible delay over an exhaustive scan of `0..=delta_max`.
pub fn brute_force(s: &Scenario) -> Outcome {
    let best = (0..=s.delta_max).filter(|&d| feasible(s, d)).max();
    match best {
        None => Outcome::InfeasibleNow,
        Some(d) if d == s.delta_max => Outcome::Unbounded,
        Some(d) => Outcome::Optimal(d),
    }
}

/// Random lockdown scenario whose capacities sit near the predicted demand, so
/// that infeasible, optimal and unbounded outcomes all occur regularly.
pub fn random_scenario(rng: &mut impl rand::Rng) -> Scenario {
    let current_day = rng.gen_range(30..=90);
    let lag_days = rng.gen_range(0..=14);
    let delta_max = rng.gen_range(1..=21);
    let last = (current_day + lag_days + delta_max) as f64;

    let level = rng.gen_range(1e3..1e5);
    let mut active = vec![0.0; 5];
    for (j, c) in active.iter_mut().enumerate() {
        let power = 4 - j as i32;
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        *c = sign * rng.gen_range(0.0..level) / last.powi(power);
    }
    active[4] += 2.0 * level;

    let demand_near = |rng: &mut dyn rand::RngCore, factor: f64| {
        let day = (current_day + (rng.next_u32() as i64 % (last as i64 - current_day + 1))) as f64;
        let scale = 1.0 + 0.4 * (rng.next_u32() as f64 / u32::MAX as f64);
        factor * eval_by_powers(&active, day).abs().max(1.0) * scale
    };
    let capacity = |rng: &mut dyn rand::RngCore, factor: f64| {
        let mut steps = vec![(1.0, demand_near(rng, factor))];
        let extra = rng.next_u32() % 3;
        let mut start = current_day as f64;
        for _ in 0..extra {
            start += 1.0 + (rng.next_u32() % 10) as f64;
            steps.push((start, demand_near(rng, factor)));
        }
        Capacity { steps }
    };

    let n_resources = rng.gen_range(1..=3);
    let resources = (0..n_resources)
        .map(|_| {
            let factor = rng.gen_range(0.001..0.05);
            let availability = capacity(rng, factor);
            let storage = rng.gen_bool(0.3).then(|| {
                let v = rng.gen_range(0.5..2.0);
                (v, capacity(rng, factor * v))
            });
            let distribution = rng.gen_bool(0.3).then(|| {
                let w = rng.gen_range(0.5..2.0);
                (w, capacity(rng, factor * w))
            });
            Resource { factor, availability, storage, distribution }
        })
        .collect();

    let rate = |rng: &mut dyn rand::RngCore| {
        let now = current_day as f64;
        let base = 0.01 + 0.09 * (rng.next_u32() as f64 / u32::MAX as f64);
        let slope = (rng.next_u32() as f64 / u32::MAX as f64 - 0.5) * 0.01;
        let coeffs = vec![slope, base - slope * now];
        let cap = base * (1.0 + 0.5 * (rng.next_u32() as f64 / u32::MAX as f64));
        (cap.min(0.99), coeffs)
    };
    let growth = rng.gen_bool(0.3).then(|| rate(rng));
    let tpr = rng.gen_bool(0.3).then(|| rate(rng));

    Scenario {
        current_day,
        lag_days,
        delta_max,
        active,
        resources,
        growth,
        tpr,
        rates_through_lag: rng.gen_bool(0.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_match_loops() {
        for n in [1u128, 5, 60] {
            for k in 0..=4 {
                let direct: u128 = (1..=n).map(|t| t.pow(k)).sum();
                assert_eq!(power_sum(n, k), direct);
            }
        }
    }

    #[test]
    fn exact_fit_recovers_line() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = t.iter().map(|t| 2.0 * t - 1.0).collect();
        let a = exact_weighted_fit(&t, &y, &[1.0, 2.0, 3.0, 4.0], 1);
        assert_eq!(a, vec![2.0, -1.0]);
    }

    #[test]
    fn gauss_solves_small_system() {
        let x = gauss_solve(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![3.0, 4.0]);
        assert_eq!(x, vec![2.0, 3.0]);
    }
}
