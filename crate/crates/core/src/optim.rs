//! Derivative-free minimization: box-clamped Nelder–Mead and golden-section search.

/// Terminal state of a simplex search.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead settings. Trial points are clamped into `[lower, upper]`.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Initial simplex edge along each axis.
    pub steps: Vec<f64>,
    /// Stop when the spread of simplex values is at most this.
    pub f_tol: f64,
    /// ... and every vertex is within this of the best one (sup norm).
    pub x_tol: f64,
    pub max_iter: usize,
}

impl NelderMead {
    pub fn unbounded(steps: Vec<f64>, f_tol: f64, max_iter: usize) -> Self {
        let dim = steps.len();
        NelderMead {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
            steps,
            f_tol,
            x_tol: 1e-5,
            max_iter,
        }
    }

    fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        assert_eq!(dim, self.steps.len());
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut start = x0.to_vec();
        self.clamp(&mut start);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let v0 = eval(&start);
        simplex.push((start.clone(), v0));
        for i in 0..dim {
            let mut p = start.clone();
            p[i] += self.steps[i];
            if p[i] > self.upper[i] {
                p[i] = start[i] - self.steps[i];
            }
            self.clamp(&mut p);
            let v = eval(&p);
            simplex.push((p, v));
        }

        let order = |s: &mut Vec<(Vec<f64>, f64)>| {
            // stable sort keeps earlier vertices ahead on ties
            s.sort_by(|a, b| a.1.total_cmp(&b.1));
        };

        let mut iterations = 0;
        let mut converged = false;
        order(&mut simplex);
        while iterations < self.max_iter {
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            let spread = simplex[1..]
                .iter()
                .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            if best.is_finite() && worst - best <= self.f_tol && spread <= self.x_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for (p, _) in &simplex[..dim] {
                for (c, v) in centroid.iter_mut().zip(p) {
                    *c += v / dim as f64;
                }
            }
            let toward = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let mut xr = toward(1.0);
            self.clamp(&mut xr);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let mut xe = toward(2.0);
                self.clamp(&mut xe);
                let fe = eval(&xe);
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (xr, fr);
            } else {
                let (mut xc, outside) = if fr < simplex[dim].1 {
                    (toward(0.5), true)
                } else {
                    (toward(-0.5), false)
                };
                self.clamp(&mut xc);
                let fc = eval(&xc);
                let accept = if outside { fc <= fr } else { fc < simplex[dim].1 };
                if accept {
                    simplex[dim] = (xc, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for (p, v) in simplex.iter_mut().skip(1) {
                        for (x, b) in p.iter_mut().zip(&best) {
                            *x = b + 0.5 * (*x - b);
                        }
                        *v = eval(p);
                    }
                }
            }
            order(&mut simplex);
        }
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            converged,
        }
    }
}

/// Minimizer of a unimodal `f` on `[a, b]` to interval width `tol`.
///
/// The endpoints are also compared; equal values resolve toward larger `x`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let mut best = (b, f(b));
    for x in [mid, a] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead::unbounded(vec![0.5, 0.5], 1e-14, 5000);
        let m = nm.minimize(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn box_is_respected() {
        let mut nm = NelderMead::unbounded(vec![0.1, 0.1], 1e-12, 2000);
        nm.lower = vec![0.0, 0.0];
        nm.upper = vec![0.5, 10.0];
        let m = nm.minimize(|x| (x[0] - 3.0).powi(2) + (x[1] - 1.0).powi(2), &[0.2, 0.0]);
        assert!((m.x[0] - 0.5).abs() < 1e-6);
        assert!((m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn never_worse_than_start() {
        let nm = NelderMead::unbounded(vec![1.0], 1e-9, 3);
        let m = nm.minimize(|x| (x[0] - 0.3).abs(), &[0.0]);
        assert!(m.value <= 0.3);
    }

    #[test]
    fn golden_interior_and_ties() {
        let x = golden_section(|a| (a - 1.37).powi(2), 1.0, 2.0, 1e-8);
        assert!((x - 1.37).abs() < 1e-7);
        assert_eq!(golden_section(|_| 1.0, 1.0, 2.0, 1e-6), 2.0);
        assert_eq!(golden_section(|a| -a, 1.0, 2.0, 1e-6), 2.0);
        assert_eq!(golden_section(|a| a, 1.0, 2.0, 1e-6), 1.0);
    }
}
