//! Nelder–Mead reflection simplex, used for the black-box inner polish and
//! for residual descent on the sphere.

#[derive(Debug, Clone, Copy)]
pub(crate) struct NelderMead {
    pub max_iter: usize,
    /// Stop once every vertex is within this distance of the best one.
    pub xtol: f64,
    /// Stop once the best value reaches this.
    pub target: f64,
    /// Box constraint applied coordinatewise by clamping.
    pub bounds: Option<(f64, f64)>,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 200,
            xtol: 1e-10,
            target: f64::NEG_INFINITY,
            bounds: None,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Largest vertex distance from the best vertex at exit.
    pub size: f64,
}

impl NelderMead {
    fn clamp(&self, x: &mut [f64]) {
        if let Some((lo, hi)) = self.bounds {
            x.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    }

    /// Minimises `f` starting from `x0` with an axis-aligned initial simplex
    /// of edge `step`. Steps that would leave the box go the other way.
    pub fn minimize<F>(&self, f: &mut F, x0: &[f64], step: f64) -> Outcome
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        let mut start = x0.to_vec();
        self.clamp(&mut start);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let f0 = f(&start);
        simplex.push((start.clone(), f0));
        for i in 0..dim {
            let mut v = start.clone();
            v[i] += step;
            if let Some((lo, hi)) = self.bounds {
                if v[i] > hi {
                    v[i] = (start[i] - step).max(lo);
                }
            }
            let fv = f(&v);
            simplex.push((v, fv));
        }

        let mut iterations = 0;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let size = simplex
                .iter()
                .skip(1)
                .map(|(v, _)| crate::linalg::distance(v, &simplex[0].0))
                .fold(0.0, f64::max);
            if iterations >= self.max_iter || size < self.xtol || simplex[0].1 <= self.target {
                let (x, value) = simplex.swap_remove(0);
                return Outcome {
                    x,
                    value,
                    iterations,
                    size,
                };
            }
            iterations += 1;

            let mut centroid = vec![0.0; dim];
            for (v, _) in &simplex[..dim] {
                crate::linalg::axpy(&mut centroid, 1.0 / dim as f64, v);
            }
            let worst = simplex[dim].clone();
            let towards = |t: f64| -> Vec<f64> {
                // centroid + t (worst - centroid)
                let mut p: Vec<f64> = centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (w - c))
                    .collect();
                self.clamp(&mut p);
                p
            };

            let xr = towards(-1.0);
            let fr = f(&xr);
            if fr < simplex[0].1 {
                let xe = towards(-2.0);
                let fe = f(&xe);
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = towards(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = towards(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
                continue;
            }
            // shrink towards the best vertex
            let best = simplex[0].0.clone();
            for (v, fv) in simplex.iter_mut().skip(1) {
                for (vi, bi) in v.iter_mut().zip(&best) {
                    *vi = bi + 0.5 * (*vi - bi);
                }
                *fv = f(v);
            }
        }
    }
}
