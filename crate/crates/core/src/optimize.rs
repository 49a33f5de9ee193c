//! Waiting-time search on the analytic formulas.
//!
//! The objective `w1·E[Δ] + w2·E[PAoI]` is scanned on a coarse grid and
//! the best cell is refined by golden-section search (coordinate-wise for
//! M/GI/1/2*). The returned point is the best one ever evaluated.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::evaluate;
use crate::dist::ServiceDistribution;
use crate::error::{non_negative, positive, Error, Result};
use crate::Scheme;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    w1: f64,
    w2: f64,
}

impl Objective {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        non_negative("w1", w1)?;
        non_negative("w2", w2)?;
        if w1 + w2 <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "w1 + w2",
                value: w1 + w2,
                reason: "at least one weight must be positive",
            });
        }
        Ok(Self { w1, w2 })
    }

    /// Average AoI only.
    pub fn aoi() -> Self {
        Self { w1: 1.0, w2: 0.0 }
    }

    /// Average peak AoI only.
    pub fn peak() -> Self {
        Self { w1: 0.0, w2: 1.0 }
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Initial upper bound on each wait, in units of `E[S]`.
    pub upper_factor: f64,
    /// Grid points per axis, including both ends.
    pub grid_points: usize,
    /// Refinement tolerance in units of `E[S]`.
    pub tolerance_factor: f64,
    /// How many times the bound may double when the grid minimum sits on it.
    pub max_doublings: u32,
    /// Random grid cells used for the quasi-convexity health check.
    pub restarts: usize,
    pub restart_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            upper_factor: 20.0,
            grid_points: 101,
            tolerance_factor: 1e-4,
            max_doublings: 3,
            restarts: 3,
            restart_seed: 0x5eed,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        positive("upper_factor", self.upper_factor)?;
        positive("tolerance_factor", self.tolerance_factor)?;
        if self.grid_points < 3 {
            return Err(Error::Config(format!(
                "grid needs at least 3 points per axis, got {}",
                self.grid_points
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub scheme: Scheme,
    pub eps_i_star: f64,
    /// Always 0 for M/GI/1/1.
    pub eps_b_star: f64,
    pub value_star: f64,
    pub value_zero_wait: f64,
    /// `1 - value_star / value_zero_wait`.
    pub improvement: f64,
    /// Grid step of the final scan.
    pub grid_resolution: f64,
    pub upper_bound: f64,
    pub avg_aoi_star: f64,
    pub avg_peak_aoi_star: f64,
    pub evaluations: usize,
    /// Largest objective gap between the restarted refinements and the
    /// returned optimum.
    pub restart_spread: f64,
}

struct Problem<'a> {
    scheme: Scheme,
    dist: &'a ServiceDistribution,
    lambda: f64,
    objective: Objective,
    trace: Vec<(f64, f64, f64)>,
}

impl Problem<'_> {
    fn eval(&mut self, eps_i: f64, eps_b: f64) -> Result<f64> {
        let m = evaluate(self.scheme, self.dist, self.lambda, eps_i, eps_b)?;
        let value = self.objective.w1 * m.avg_aoi + self.objective.w2 * m.avg_peak_aoi;
        if !value.is_finite() {
            return Err(Error::NonFinite {
                eps_i,
                eps_b,
                value,
            });
        }
        self.trace.push((eps_i, eps_b, value));
        Ok(value)
    }

    /// First minimum of the trace; earlier evaluations win ties.
    fn best(&self) -> (f64, f64, f64) {
        let mut best = self.trace[0];
        for &p in &self.trace[1..] {
            if p.2 < best.2 {
                best = p;
            }
        }
        best
    }

    fn golden<F>(&mut self, mut lo: f64, mut hi: f64, tol: f64, point: F) -> Result<()>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let (a, b) = point(x1);
        let mut f1 = self.eval(a, b)?;
        let (a, b) = point(x2);
        let mut f2 = self.eval(a, b)?;
        while hi - lo > tol {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - INV_PHI * (hi - lo);
                let (a, b) = point(x1);
                f1 = self.eval(a, b)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + INV_PHI * (hi - lo);
                let (a, b) = point(x2);
                f2 = self.eval(a, b)?;
            }
        }
        Ok(())
    }
}

struct Grid {
    step: f64,
    n: usize,
    /// Row-major by `eps_i`; a single column for M/GI/1/1.
    values: Vec<f64>,
    cols: usize,
}

impl Grid {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    fn argmin(&self) -> (usize, usize) {
        let mut best = (0, 0);
        for i in 0..self.n {
            for j in 0..self.cols {
                if self.at(i, j) < self.at(best.0, best.1) {
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Follows strictly decreasing neighbours from `(i, j)`.
    fn descend(&self, mut i: usize, mut j: usize) -> (usize, usize) {
        loop {
            let mut next = (i, j);
            let mut candidates = vec![];
            if i > 0 {
                candidates.push((i - 1, j));
            }
            if i + 1 < self.n {
                candidates.push((i + 1, j));
            }
            if j > 0 {
                candidates.push((i, j - 1));
            }
            if j + 1 < self.cols {
                candidates.push((i, j + 1));
            }
            for c in candidates {
                if self.at(c.0, c.1) < self.at(next.0, next.1) {
                    next = c;
                }
            }
            if next == (i, j) {
                return next;
            }
            (i, j) = next;
        }
    }
}

fn scan(p: &mut Problem<'_>, upper: f64, n: usize) -> Result<Grid> {
    let step = upper / (n - 1) as f64;
    let cols = match p.scheme {
        Scheme::Mg11 => 1,
        Scheme::Mg12Star => n,
    };
    let mut values = Vec::with_capacity(n * cols);
    for i in 0..n {
        for j in 0..cols {
            values.push(p.eval(i as f64 * step, j as f64 * step)?);
        }
    }
    Ok(Grid {
        step,
        n,
        values,
        cols,
    })
}

/// Golden-section refinement around grid cell `(i, j)`; coordinate descent
/// in two dimensions. Returns the best value reached from this start.
fn refine(
    p: &mut Problem<'_>,
    grid: &Grid,
    i: usize,
    j: usize,
    upper: f64,
    tol: f64,
) -> Result<f64> {
    let h = grid.step;
    let start = p.trace.len();
    let bracket = |x: f64| ((x - h).max(0.0), (x + h).min(upper));
    let mut x = i as f64 * h;
    let mut y = j as f64 * h;
    let mut best = grid.at(i, j);
    match p.scheme {
        Scheme::Mg11 => {
            let (lo, hi) = bracket(x);
            p.golden(lo, hi, tol, |e| (e, 0.0))?;
        }
        Scheme::Mg12Star => {
            for _ in 0..100 {
                let (x0, y0) = (x, y);
                let (lo, hi) = bracket(x);
                p.golden(lo, hi, tol, |e| (e, y))?;
                let b = best_since(p, start, best, x, y);
                (x, y, best) = b;
                let (lo, hi) = bracket(y);
                p.golden(lo, hi, tol, |e| (x, e))?;
                let b = best_since(p, start, best, x, y);
                (x, y, best) = b;
                if (x - x0).abs() <= tol && (y - y0).abs() <= tol {
                    break;
                }
            }
        }
    }
    Ok(best_since(p, start, best, x, y).2)
}

fn best_since(p: &Problem<'_>, start: usize, best: f64, x: f64, y: f64) -> (f64, f64, f64) {
    let mut out = (x, y, best);
    for &(a, b, v) in &p.trace[start..] {
        if v < out.2 {
            out = (a, b, v);
        }
    }
    out
}

/// Minimizes `w1·E[Δ] + w2·E[PAoI]` over the waits of `scheme`.
pub fn optimize_waiting(
    scheme: Scheme,
    dist: &ServiceDistribution,
    lambda: f64,
    objective: Objective,
    search: &SearchConfig,
) -> Result<OptResult> {
    search.validate()?;
    positive("lambda", lambda)?;
    let es = dist.mean();
    let tol = search.tolerance_factor * es;
    let mut p = Problem {
        scheme,
        dist,
        lambda,
        objective,
        trace: Vec::new(),
    };
    let value_zero_wait = p.eval(0.0, 0.0)?;

    let n = search.grid_points;
    let mut upper = search.upper_factor * es;
    let mut doublings = 0;
    let grid = loop {
        let grid = scan(&mut p, upper, n)?;
        let (i, j) = grid.argmin();
        let on_edge = i == n - 1 || (grid.cols > 1 && j == n - 1);
        if on_edge && doublings < search.max_doublings {
            doublings += 1;
            upper *= 2.0;
            debug!("grid minimum on the boundary, search bound raised to {upper}");
            continue;
        }
        break grid;
    };

    let (i, j) = grid.argmin();
    refine(&mut p, &grid, i, j, upper, tol)?;
    let (eps_i_star, eps_b_star, value_star) = p.best();

    let mut rng = ChaCha8Rng::seed_from_u64(search.restart_seed);
    let mut restart_spread: f64 = 0.0;
    for _ in 0..search.restarts {
        let ri = rng.gen_range(0..grid.n);
        let rj = rng.gen_range(0..grid.cols);
        let (di, dj) = grid.descend(ri, rj);
        let v = refine(&mut p, &grid, di, dj, upper, tol)?;
        restart_spread = restart_spread.max(v - value_star);
    }
    if restart_spread > 1e-3 * es {
        warn!(
            "{scheme} λ={lambda} {dist}: restarted refinement ends {restart_spread:.3e} above \
             the optimum; objective may not be quasi-convex"
        );
    }
    // Restarts can only have found a point at least as good.
    let (eps_i_star, eps_b_star, value_star) = {
        let b = p.best();
        if b.2 < value_star {
            b
        } else {
            (eps_i_star, eps_b_star, value_star)
        }
    };

    let m = evaluate(scheme, dist, lambda, eps_i_star, eps_b_star)?;
    Ok(OptResult {
        scheme,
        eps_i_star,
        eps_b_star,
        value_star,
        value_zero_wait,
        improvement: 1.0 - value_star / value_zero_wait,
        grid_resolution: grid.step,
        upper_bound: upper,
        avg_aoi_star: m.avg_aoi,
        avg_peak_aoi_star: m.avg_peak_aoi,
        evaluations: p.trace.len(),
        restart_spread,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeComparison {
    pub mg11: OptResult,
    pub mg12star: OptResult,
    /// Optimized M/GI/1/2* average AoI is within `1e-6` of, or below, the
    /// optimized M/GI/1/1 value.
    pub mg12star_not_worse: bool,
}

/// Optimizes average AoI under both schemes. A violation of the expected
/// ordering is logged, not treated as an error.
pub fn compare_schemes(
    dist: &ServiceDistribution,
    lambda: f64,
    search: &SearchConfig,
) -> Result<SchemeComparison> {
    let mg11 = optimize_waiting(Scheme::Mg11, dist, lambda, Objective::aoi(), search)?;
    let mg12star = optimize_waiting(Scheme::Mg12Star, dist, lambda, Objective::aoi(), search)?;
    let ok = mg12star.avg_aoi_star <= mg11.avg_aoi_star + 1e-6;
    if !ok {
        warn!(
            "{dist} λ={lambda}: optimized mg12star AoI {} exceeds optimized mg11 AoI {}",
            mg12star.avg_aoi_star, mg11.avg_aoi_star
        );
    }
    Ok(SchemeComparison {
        mg11,
        mg12star,
        mg12star_not_worse: ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub eps_i: f64,
    pub eps_b: f64,
    pub avg_aoi: f64,
    pub avg_peak_aoi: f64,
    /// No other point has both metrics at most this point's, one strictly.
    pub pareto: bool,
}

/// Both metrics over `eps_i_grid × eps_b_grid` (the `eps_b` grid is
/// ignored for M/GI/1/1), in grid order, with the Pareto-optimal points
/// flagged.
pub fn tradeoff_curve(
    scheme: Scheme,
    dist: &ServiceDistribution,
    lambda: f64,
    eps_i_grid: &[f64],
    eps_b_grid: &[f64],
) -> Result<Vec<TradeoffPoint>> {
    let zero = [0.0];
    let eps_b_grid = match scheme {
        Scheme::Mg11 => &zero[..],
        Scheme::Mg12Star if eps_b_grid.is_empty() => &zero[..],
        Scheme::Mg12Star => eps_b_grid,
    };
    let mut points = Vec::with_capacity(eps_i_grid.len() * eps_b_grid.len());
    for &eps_i in eps_i_grid {
        for &eps_b in eps_b_grid {
            let m = evaluate(scheme, dist, lambda, eps_i, eps_b)?;
            points.push(TradeoffPoint {
                eps_i,
                eps_b,
                avg_aoi: m.avg_aoi,
                avg_peak_aoi: m.avg_peak_aoi,
                pareto: false,
            });
        }
    }
    mark_pareto(&mut points);
    Ok(points)
}

fn mark_pareto(points: &mut [TradeoffPoint]) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pa.avg_aoi
            .total_cmp(&pb.avg_aoi)
            .then(pa.avg_peak_aoi.total_cmp(&pb.avg_peak_aoi))
    });
    let mut min_peak = f64::INFINITY;
    for idx in order {
        if points[idx].avg_peak_aoi < min_peak {
            min_peak = points[idx].avg_peak_aoi;
            points[idx].pareto = true;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementRow {
    pub lambda: f64,
    pub zero_wait_aoi: f64,
    pub optimal_aoi: f64,
    pub eps_i_star: f64,
    pub eps_b_star: f64,
    /// Relative reduction of average AoI, in percent.
    pub improvement_pct: f64,
}

/// Zero-wait against optimized average AoI for each rate.
pub fn improvement_report(
    scheme: Scheme,
    dist: &ServiceDistribution,
    lambdas: &[f64],
    search: &SearchConfig,
) -> Result<Vec<ImprovementRow>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let r = optimize_waiting(scheme, dist, lambda, Objective::aoi(), search)?;
            Ok(ImprovementRow {
                lambda,
                zero_wait_aoi: r.value_zero_wait,
                optimal_aoi: r.value_star,
                eps_i_star: r.eps_i_star,
                eps_b_star: r.eps_b_star,
                improvement_pct: 100.0 * r.improvement,
            })
        })
        .collect()
}
