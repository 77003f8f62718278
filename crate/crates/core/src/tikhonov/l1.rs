use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::linops::{power_iteration, MeasurementData, MeasurementOperator, Signal};

/// Output of [`L1Solver::solve`].
#[derive(Debug, Clone)]
pub struct L1Solution {
    pub v: Signal,
    /// Dual variable, one entry per stacked measurement.
    pub dual: Vec<f64>,
    /// Certified duality gap.
    pub gap: f64,
    pub iterations: usize,
}

/// Solver for `half_mu ||v - w||^2 + ||A v - b||_1` over real `v`.
///
/// Works on the dual `max_{|q_g| <= 1} <q, S w - b> - ||S^T q||^2 / (4 half_mu)`
/// where `S` is the stacked real view of `A`, with one group per measurement
/// (a pair of stacked entries for complex data). The primal point is
/// `v(q) = w - S^T q / (2 half_mu)` and the duality gap reduces to
/// `sum_g |r_g| - <q_g, r_g>` with `r = S v(q) - b`.
///
/// Real data is solved by a primal active set method on the box
/// constrained dual, which ends at an exact KKT point. Complex
/// data, and any case where that iteration stalls, goes through a
/// log-barrier interior point method on the same dual.
pub struct L1Solver {
    s: DMatrix<f64>,
    gram: DMatrix<f64>,
    gram_norm: f64,
    b: Vec<f64>,
    complex: bool,
    max_iterations: usize,
}

impl L1Solver {
    pub fn new(op: &MeasurementOperator, b: &MeasurementData) -> Result<Self> {
        check_len("L1 Tikhonov data", op.output_len(), b.len())?;
        let s = op.stacked_matrix();
        let gram = &s * s.transpose();
        let gram_norm = if gram.iter().all(|&g| g == 0.0) {
            0.0
        } else {
            let root = power_iteration(gram.nrows(), 1e-10, |x| {
                (&gram * DVector::from_column_slice(x)).as_slice().to_vec()
            })?;
            // power iteration reports the square root of the top eigenvalue
            root * root
        };
        Ok(Self {
            s,
            gram,
            gram_norm,
            b: b.stacked(),
            complex: op.is_complex(),
            max_iterations: 50 * op.output_len(),
        })
    }

    /// Iteration cap shared by both inner methods.
    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    pub fn set_max_iterations(&mut self, cap: usize) {
        self.max_iterations = cap.max(1);
    }

    /// Solves to duality gap `<= tol`, starting from the dual point `warm`
    /// when given.
    pub fn solve(&self, half_mu: f64, w: &[f64], tol: f64, warm: Option<&[f64]>) -> Result<L1Solution> {
        if !(half_mu > 0.0) {
            return Err(Error::InvalidArgument(format!("half_mu must be positive, got {half_mu}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        check_len("Tikhonov offset", self.s.ncols(), w.len())?;
        let ms = self.s.nrows();
        let mut q = match warm {
            Some(q0) if q0.len() == ms => q0.to_vec(),
            _ => vec![0.0; ms],
        };
        self.project(&mut q);
        if self.gram_norm == 0.0 {
            // A = 0: v = w and the dual only has to match the residual signs.
            let r: Vec<f64> = self.b.iter().map(|x| -x).collect();
            let dual = self.signs(&r);
            return Ok(L1Solution {
                v: w.to_vec().into(),
                dual,
                gap: 0.0,
                iterations: 0,
            });
        }
        let g = self.offset_gradient(w);
        let mut best = Best::new();
        let mut iterations = 0;
        if !self.complex {
            let (q_as, used) = self.active_set(half_mu, &g, q, self.max_iterations);
            iterations += used;
            let (v, gap) = self.certify(half_mu, w, &q_as, tol);
            best.offer(&v, &q_as, gap);
            if gap <= tol {
                return Ok(best.finish(iterations));
            }
        }
        let budget = self.max_iterations.saturating_sub(iterations);
        iterations += self.interior_point(half_mu, w, &g, tol, budget, &mut best);
        if best.gap <= tol {
            Ok(best.finish(iterations))
        } else {
            Err(Error::Uncertified {
                gap: best.gap,
                tol,
                iterations,
                best: best.v.into(),
            })
        }
    }

    /// `S w - b`, the linear coefficient of the dual.
    fn offset_gradient(&self, w: &[f64]) -> Vec<f64> {
        let sw = &self.s * DVector::from_column_slice(w);
        sw.iter().zip(&self.b).map(|(a, b)| a - b).collect()
    }

    fn primal(&self, half_mu: f64, w: &[f64], q: &[f64]) -> Vec<f64> {
        let stq = self.s.tr_mul(&DVector::from_column_slice(q));
        w.iter().zip(stq.iter()).map(|(wi, s)| wi - s / (2.0 * half_mu)).collect()
    }

    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let sv = &self.s * DVector::from_column_slice(v);
        sv.iter().zip(&self.b).map(|(a, b)| a - b).collect()
    }

    /// Primal point and duality gap of a feasible dual point. When `v(q)`
    /// does not certify, it is also tried after projecting onto the zero
    /// residual set of the groups strictly inside their bound; at small
    /// `half_mu` this removes the rounding error `v(q)` inherits from `q`.
    fn certify(&self, half_mu: f64, w: &[f64], q: &[f64], tol: f64) -> (Vec<f64>, f64) {
        let v = self.primal(half_mu, w, q);
        let gap = self.gap(&self.residual(&v), q);
        if gap <= tol {
            return (v, gap);
        }
        let ms = q.len();
        let m = if self.complex { ms / 2 } else { ms };
        let rows: Vec<usize> = (0..m)
            .filter(|&i| {
                let modulus = if self.complex { q[i].hypot(q[i + m]) } else { q[i].abs() };
                modulus < 1.0 - 1e-9
            })
            .flat_map(|i| if self.complex { vec![i, i + m] } else { vec![i] })
            .collect();
        if rows.is_empty() {
            return (v, gap);
        }
        let sz = self.s.select_rows(&rows);
        let r = self.residual(&v);
        let rz = DVector::from_iterator(rows.len(), rows.iter().map(|&i| r[i]));
        let Ok(y) = (&sz * sz.transpose()).svd(true, true).solve(&rz, 1e-13 * self.gram_norm) else {
            return (v, gap);
        };
        let shift = sz.tr_mul(&y);
        let projected: Vec<f64> = v.iter().zip(shift.iter()).map(|(a, e)| a - e).collect();
        let moved = half_mu * crate::linops::dist2_sq(&projected, &v);
        let other = moved + self.gap(&self.residual(&projected), q);
        if other < gap {
            (projected, other)
        } else {
            (v, gap)
        }
    }

    fn gap(&self, r: &[f64], q: &[f64]) -> f64 {
        let mut total = 0.0;
        if self.complex {
            let m = r.len() / 2;
            for i in 0..m {
                total += r[i].hypot(r[i + m]) - (q[i] * r[i] + q[i + m] * r[i + m]);
            }
        } else {
            for (ri, qi) in r.iter().zip(q) {
                total += ri.abs() - qi * ri;
            }
        }
        if total.is_finite() {
            total.max(0.0)
        } else {
            f64::INFINITY
        }
    }

    fn project(&self, q: &mut [f64]) {
        if self.complex {
            let m = q.len() / 2;
            for i in 0..m {
                let modulus = q[i].hypot(q[i + m]);
                if modulus > 1.0 {
                    q[i] /= modulus;
                    q[i + m] /= modulus;
                }
            }
        } else {
            q.iter_mut().for_each(|x| *x = x.clamp(-1.0, 1.0));
        }
    }

    fn signs(&self, r: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = r.iter().map(|x| if *x == 0.0 { 0.0 } else { x.signum() * 1e300 }).collect();
        self.project(&mut q);
        q
    }

    /// Primal active set method on the box-constrained dual (real data
    /// only), `min q^T G q / (4 half_mu) - g^T q` over `|q_i| <= 1`. Each step
    /// either reaches the minimizer on the current face and releases the bound
    /// with the worst multiplier, or walks towards it until a new bound
    /// blocks. `G` is positive definite whenever `S` has full row rank, and
    /// the iteration then ends at the exact minimizer. Returns the last dual
    /// point and the iterations used.
    fn active_set(&self, half_mu: f64, g: &[f64], mut q: Vec<f64>, budget: usize) -> (Vec<f64>, usize) {
        let ms = q.len();
        let two_c = 2.0 * half_mu;
        // bound[i]: 0 free, +1 / -1 held at that bound
        let mut bound: Vec<i8> = q
            .iter()
            .map(|&x| if x >= 1.0 { 1 } else if x <= -1.0 { -1 } else { 0 })
            .collect();
        for i in 0..ms {
            if bound[i] != 0 {
                q[i] = f64::from(bound[i]);
            }
        }
        let scale = two_c * g.iter().map(|x| x.abs()).fold(0.0, f64::max) + self.gram_norm;
        for it in 0..budget {
            let free: Vec<usize> = (0..ms).filter(|&i| bound[i] == 0).collect();
            let mut target = q.clone();
            if !free.is_empty() {
                let k = free.len();
                let mut gff = DMatrix::zeros(k, k);
                let mut rhs = DVector::zeros(k);
                for (a, &i) in free.iter().enumerate() {
                    let mut acc = two_c * g[i];
                    for j in 0..ms {
                        if bound[j] != 0 {
                            acc -= self.gram[(i, j)] * q[j];
                        }
                    }
                    rhs[a] = acc;
                    for (c, &j) in free.iter().enumerate() {
                        gff[(a, c)] = self.gram[(i, j)];
                    }
                }
                // zero-curvature descent direction when the face system is inconsistent
                let mut ray = false;
                match gff.clone().cholesky() {
                    Some(chol) => {
                        let sol = chol.solve(&rhs);
                        for (a, &i) in free.iter().enumerate() {
                            target[i] = sol[a];
                        }
                    }
                    None => {
                        let Ok(sol) = gff.clone().svd(true, true).solve(&rhs, 1e-13 * self.gram_norm) else {
                            return (q, it + 1);
                        };
                        let miss = &rhs - &gff * &sol;
                        if miss.amax() > 1e-10 * (rhs.amax() + self.gram_norm) {
                            ray = true;
                            for (a, &i) in free.iter().enumerate() {
                                target[i] = q[i] + miss[a];
                            }
                        } else {
                            for (a, &i) in free.iter().enumerate() {
                                target[i] = sol[a];
                            }
                        }
                    }
                }
                if ray {
                    let mut alpha = f64::INFINITY;
                    let mut blocking = None;
                    for &i in &free {
                        let d = target[i] - q[i];
                        if d != 0.0 {
                            let limit = ((d.signum() - q[i]) / d).max(0.0);
                            if limit < alpha {
                                alpha = limit;
                                blocking = Some((i, if d > 0.0 { 1 } else { -1 }));
                            }
                        }
                    }
                    let Some((i, side)) = blocking else {
                        return (q, it + 1);
                    };
                    for &j in &free {
                        q[j] = (q[j] + alpha * (target[j] - q[j])).clamp(-1.0, 1.0);
                    }
                    q[i] = f64::from(side);
                    bound[i] = side;
                    continue;
                }
            }
            // longest feasible step towards the face minimizer
            let mut alpha = 1.0;
            let mut blocking = None;
            for &i in &free {
                let d = target[i] - q[i];
                let limit = if d > 0.0 {
                    (1.0 - q[i]) / d
                } else if d < 0.0 {
                    (-1.0 - q[i]) / d
                } else {
                    continue;
                };
                if limit < alpha {
                    alpha = limit.max(0.0);
                    blocking = Some((i, if d > 0.0 { 1 } else { -1 }));
                }
            }
            if let Some((i, side)) = blocking {
                for &j in &free {
                    q[j] += alpha * (target[j] - q[j]);
                }
                q[i] = f64::from(side);
                bound[i] = side;
                continue;
            }
            q = target;
            // multipliers of the held bounds: grad_i = (G q)_i - 2c g_i must
            // point outwards
            let gq = &self.gram * DVector::from_column_slice(&q);
            let mut worst: Option<(usize, f64)> = None;
            for i in 0..ms {
                if bound[i] == 0 {
                    continue;
                }
                let violation = f64::from(bound[i]) * (gq[i] - two_c * g[i]);
                if violation > 1e-14 * scale && worst.map_or(true, |(_, v)| violation > v) {
                    worst = Some((i, violation));
                }
            }
            match worst {
                Some((i, _)) => bound[i] = 0,
                None => return (q, it + 1),
            }
        }
        (q, budget)
    }

    /// Log-barrier interior point method on the dual,
    /// `min q^T G q / 2 - 2 half_mu g^T q - kappa sum_g log(1 - |q_g|^2)` for a
    /// decreasing sequence of `kappa`, each solved by damped Newton. The
    /// barrier keeps the Newton system positive definite even when `G` is
    /// singular. Every outer step is certified; returns iterations used.
    fn interior_point(&self, half_mu: f64, w: &[f64], g: &[f64], tol: f64, budget: usize, best: &mut Best) -> usize {
        let ms = g.len();
        let two_c = 2.0 * half_mu;
        let groups: Vec<Vec<usize>> = if self.complex {
            let m = ms / 2;
            (0..m).map(|i| vec![i, i + m]).collect()
        } else {
            (0..ms).map(|i| vec![i]).collect()
        };
        let slack = |q: &[f64], grp: &[usize]| 1.0 - grp.iter().map(|&i| q[i] * q[i]).sum::<f64>();
        let mut q = vec![0.0; ms];
        // on this scale the barrier costs about kappa per group, i.e. kappa / 2c in the gap
        let mut kappa = two_c * g.iter().map(|x| x.abs()).fold(0.0, f64::max).max(tol);
        let kappa_floor = 1e-4 * tol * two_c / groups.len() as f64;
        let centred = 1e-2 * (two_c * tol).powi(2) / self.gram_norm;
        let final_kappa = 0.1 * tol * two_c / groups.len() as f64;
        let mut used = 0;
        while used < budget {
            for _ in 0..50 {
                if used >= budget {
                    break;
                }
                used += 1;
                let gq = &self.gram * DVector::from_column_slice(&q);
                let mut grad = DVector::from_fn(ms, |i, _| gq[i] - two_c * g[i]);
                let mut hess = self.gram.clone();
                for grp in &groups {
                    let sl = slack(&q, grp);
                    for &i in grp {
                        grad[i] += kappa * 2.0 * q[i] / sl;
                        hess[(i, i)] += kappa * 2.0 / sl;
                        for &j in grp {
                            hess[(i, j)] += kappa * 4.0 * q[i] * q[j] / (sl * sl);
                        }
                    }
                }
                let Some(chol) = hess.cholesky() else {
                    return used;
                };
                let step = chol.solve(&(-&grad));
                let decrement = -step.dot(&grad);
                // the gap is about |grad F| / 2c off the central path, so the last
                // stages centre to that accuracy
                let target = if kappa <= final_kappa { centred } else { 0.1 * kappa };
                if decrement <= target {
                    break;
                }
                // stay strictly inside every disc
                let mut t: f64 = 1.0;
                for grp in &groups {
                    let (mut aa, mut bb) = (0.0, 0.0);
                    for &i in grp {
                        aa += step[i] * step[i];
                        bb += q[i] * step[i];
                    }
                    if aa > 0.0 {
                        let cc = slack(&q, grp);
                        let root = (-bb + (bb * bb + aa * cc).sqrt()) / aa;
                        t = t.min(0.99 * root);
                    }
                }
                // damped Newton step of the self-concordant function F / kappa + barrier
                let lambda = (decrement / kappa).sqrt();
                if lambda >= 0.25 {
                    t = t.min(1.0 / (1.0 + lambda));
                }
                for i in 0..ms {
                    q[i] += t * step[i];
                }
            }
            let (v, gap) = self.certify(half_mu, w, &q, tol);
            best.offer(&v, &q, gap);
            // groups close to their bound are likely active; try them on it
            for margin in [1e-2, 1e-4, 1e-6] {
                let mut rounded = q.clone();
                for grp in &groups {
                    let modulus = grp.iter().map(|&i| q[i] * q[i]).sum::<f64>().sqrt();
                    if modulus > 1.0 - margin {
                        grp.iter().for_each(|&i| rounded[i] = q[i] / modulus);
                    }
                }
                let (v, gap) = self.certify(half_mu, w, &rounded, tol);
                best.offer(&v, &rounded, gap);
            }
            if best.gap <= tol || kappa < kappa_floor {
                break;
            }
            kappa *= 0.1;
        }
        used
    }
}

struct Best {
    v: Vec<f64>,
    dual: Vec<f64>,
    gap: f64,
}

impl Best {
    fn new() -> Self {
        Self {
            v: Vec::new(),
            dual: Vec::new(),
            gap: f64::INFINITY,
        }
    }

    fn offer(&mut self, v: &[f64], q: &[f64], gap: f64) {
        if gap < self.gap || self.v.is_empty() {
            self.v = v.to_vec();
            self.dual = q.to_vec();
            self.gap = gap;
        }
    }

    fn finish(self, iterations: usize) -> L1Solution {
        L1Solution {
            v: self.v.into(),
            dual: self.dual,
            gap: self.gap,
            iterations,
        }
    }
}
