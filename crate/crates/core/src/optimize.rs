//! Derivative-free simplex minimization.

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMead {
    /// Stop once no vertex can improve on the best by more than this.
    pub ftol: f64,
    /// ... and the simplex is no wider than this in every coordinate.
    pub xtol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Minimum<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<const N: usize>(
        &self,
        mut objective: impl FnMut(&[f64; N]) -> f64,
        start: [f64; N],
    ) -> Minimum<N> {
        let mut eval = |x: &[f64; N]| {
            let v = objective(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };
        let mut simplex: alloc::vec::Vec<([f64; N], f64)> = alloc::vec::Vec::with_capacity(N + 1);
        simplex.push((start, eval(&start)));
        for i in 0..N {
            let mut p = start;
            p[i] += self.initial_step;
            let v = eval(&p);
            simplex.push((p, v));
        }

        let mut iterations = 0;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[N].1;
            let width = (0..N)
                .map(|d| {
                    simplex
                        .iter()
                        .map(|v| libm::fabs(v.0[d] - simplex[0].0[d]))
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if worst - best < self.ftol && width < self.xtol {
                return Minimum { point: simplex[0].0, value: best, iterations, converged: true };
            }
            if iterations >= self.max_iter {
                return Minimum { point: simplex[0].0, value: best, iterations, converged: false };
            }
            iterations += 1;

            let mut centroid = [0.0; N];
            for (p, _) in &simplex[..N] {
                for d in 0..N {
                    centroid[d] += p[d] / N as f64;
                }
            }
            let along = |t: f64| -> [f64; N] {
                core::array::from_fn(|d| centroid[d] + t * (simplex[N].0[d] - centroid[d]))
            };

            let reflected = along(-1.0);
            let fr = eval(&reflected);
            if fr < best {
                let expanded = along(-2.0);
                let fe = eval(&expanded);
                simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr < simplex[N - 1].1 {
                simplex[N] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr < worst {
                let p = along(-0.5);
                (p, eval(&p))
            } else {
                let p = along(0.5);
                (p, eval(&p))
            };
            if fc < fr.min(worst) {
                simplex[N] = (contracted, fc);
                continue;
            }
            let anchor = simplex[0].0;
            for vertex in simplex.iter_mut().skip(1) {
                let p: [f64; N] = core::array::from_fn(|d| anchor[d] + 0.5 * (vertex.0[d] - anchor[d]));
                *vertex = (p, eval(&p));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead { ftol: 1e-14, xtol: 1e-8, max_iter: 2000, initial_step: 0.5 };
        let m = nm.minimize(
            |x: &[f64; 2]| { let (a, b) = (1.0 - x[0], x[1] - x[0] * x[0]); a * a + 100.0 * b * b },
            [-1.2, 1.0],
        );
        assert!(m.converged);
        assert!((m.point[0] - 1.0).abs() < 1e-5 && (m.point[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn reports_exhausted_budget() {
        let nm = NelderMead { ftol: 1e-14, xtol: 1e-12, max_iter: 3, initial_step: 0.5 };
        let m = nm.minimize(|x: &[f64; 2]| x[0] * x[0] + x[1] * x[1], [3.0, 4.0]);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
