//! M/GI/1/1 with a deterministic hold `eps_i` after an idle period.
//!
//! States seen by an arrival: idle (I), holding (W) and busy (B). Each
//! conditional expectation is split into the events of the derivation so
//! a single term can be checked against a conditional Monte Carlo run.

use super::{neumaier, PeakBreakdown, PeakPiece, RateContext};
use crate::dist::ServiceDistribution;
use crate::error::{non_negative, positive, Result};
use crate::SysState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueConfig11 {
    lambda: f64,
    eps_i: f64,
    dist: ServiceDistribution,
    ctx: RateContext,
}

impl QueueConfig11 {
    pub fn new(lambda: f64, eps_i: f64, dist: ServiceDistribution) -> Result<Self> {
        positive("lambda", lambda)?;
        non_negative("eps_i", eps_i)?;
        let ctx = RateContext::new(&dist, lambda)?;
        Ok(Self {
            lambda,
            eps_i,
            dist,
            ctx,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eps_i(&self) -> f64 {
        self.eps_i
    }

    pub fn dist(&self) -> &ServiceDistribution {
        &self.dist
    }

    pub fn context(&self) -> &RateContext {
        &self.ctx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbs11 {
    pub p_i: f64,
    pub p_w: f64,
    pub p_b: f64,
    pub t_cycle: f64,
}

/// Renewal cycle: idle (mean `1/λ`), hold `eps_i`, one service.
pub fn state_probs_11(cfg: &QueueConfig11) -> StateProbs11 {
    let c = &cfg.ctx;
    let t_cycle = 1.0 / c.lambda + cfg.eps_i + c.mean;
    StateProbs11 {
        p_i: 1.0 / (c.lambda * t_cycle),
        p_w: cfg.eps_i / t_cycle,
        p_b: c.mean / t_cycle,
        t_cycle,
    }
}

// ---------------------------------------------------------------------
// E[X_i T_i | I]
// ---------------------------------------------------------------------

/// Event E1: packet `i` lands in the service that follows the hold,
/// `T_i = eps - X_i + S_{i-1} + X̃_i + eps + S_i`.
pub fn idle_e1_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, es) = (c.lambda, cfg.eps_i, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(eps);
    let le = l * eps;
    let coef = es + 2.0 * eps + 1.0 / l;
    neumaier([
        coef * e * (1.0 + le) / l,
        -e / (l * l) * (2.0 + 2.0 * le + le * le),
        -coef * e / l * ((1.0 + le) * m + l * m1),
        -e / l * ((1.0 + le) * m1 + l * m2),
        es * e / l * (1.0 + le),
        e / (l * l) * ((2.0 + 2.0 * le + le * le) * m + (2.0 * l + 2.0 * l * le) * m1 + l * l * m2),
    ])
}

/// Event E2: packet `i` arrives during the hold, `T_i = eps - X_i + S_i`.
pub fn idle_e2_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let eps = cfg.eps_i;
    (eps + c.mean) * c.head1(eps) - c.head2(eps)
}

/// Event E3: packet `i` finds the server idle again, `T_i = eps + S_i`.
pub fn idle_e3_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let eps = cfg.eps_i;
    (eps + c.mean) * c.decay(eps) * ((eps + 1.0 / c.lambda) * c.m + c.m1)
}

pub fn exp_xt_given_idle_11(cfg: &QueueConfig11) -> f64 {
    neumaier([idle_e1_11(cfg), idle_e2_11(cfg), idle_e3_11(cfg)])
}

// ---------------------------------------------------------------------
// E[X_i T_i | W]
// ---------------------------------------------------------------------

/// `E[X_i T_i | R_{i-1} = r]` where `r` is the hold time still to run
/// when packet `i-1` arrives. `g_fn_11(cfg, eps_i)` is the idle case.
pub fn g_fn_11(cfg: &QueueConfig11, r: f64) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, es) = (c.lambda, cfg.eps_i, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(r);
    let lr = l * r;
    neumaier([
        (r + es) * c.head1(r) - c.head2(r),
        (es + r + eps + 1.0 / l) * e * (1.0 + lr) / l,
        -e / (l * l) * (2.0 + 2.0 * lr + lr * lr),
        -(es + eps + 1.0 / l + r) * e / l * ((1.0 + lr) * m + l * m1),
        -e / l * ((1.0 + lr) * m1 + l * m2),
        es * e / l * (1.0 + lr),
        e / (l * l) * ((2.0 + 2.0 * lr + lr * lr) * m + (2.0 * l + 2.0 * l * lr) * m1 + l * l * m2),
        (eps + es) * e * ((r + 1.0 / l) * m + m1),
    ])
}

/// Antiderivative of [`g_fn_11`] in `r`.
pub fn h_fn_11(cfg: &QueueConfig11, x: f64) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, es) = (c.lambda, cfg.eps_i, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(x);
    let inner = neumaier([
        e * (2.0 * es - 3.0 / l),
        (es * l - 2.0) * x,
        0.5 * l * x * x,
        x * e * (es * l - 1.0),
        -e * (2.0 * eps + 2.0 * es - 1.0 / l),
        -x * e * ((eps + 1.0 / l) * l + es * l - 1.0),
        l * e * (m1 * (eps + 1.0 / l + es + x) + m * (x * x + (eps + 1.0 / l) * x + es * x)),
        3.0 * m * e / l,
        // 3·M·x here (not 6·M·x): required for d/dx h = g.
        e * (m1 + 2.0 * m * (eps + 1.0 / l + es) + 3.0 * m * x),
        e * (m1 * (2.0 + l * x) + m2 * l - es * (l * x + 2.0)),
        -e / l
            * (m * l * l * x * x
                + 2.0 * m1 * l * l * x
                + m2 * l * l
                + 4.0 * m * l * x
                + 4.0 * m1 * l
                + 6.0 * m),
        -e * (eps + es) * (m * (2.0 + l * x) + m1 * l),
    ]);
    inner / (l * l)
}

/// `(h(eps_i) - h(0)) / eps_i`; `None` when `eps_i = 0` (the W state has
/// zero probability and is skipped).
pub fn exp_xt_given_wait_11(cfg: &QueueConfig11) -> Option<f64> {
    let eps = cfg.eps_i;
    if eps == 0.0 {
        return None;
    }
    Some((h_fn_11(cfg, eps) - h_fn_11(cfg, 0.0)) / eps)
}

// ---------------------------------------------------------------------
// E[X_i T_i | B]
// ---------------------------------------------------------------------

/// `E[(X_i - R_{i-1}) T_i | B, E4] Pr[E4]` with `E4 = {R_{i-1} < X_i}`.
pub fn busy_e4_shift_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    (cfg.eps_i + c.mean) * c.mr / c.lambda
}

/// `E[R_{i-1} T_i | B, E4] Pr[E4]`.
pub fn busy_e4_residual_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    c.mr1 * (cfg.eps_i + c.mean)
}

/// `E[X_i T_i | B, E5] Pr[E5]` with `E5 = {R_{i-1} >= X_i}`, where
/// `T_i = R_{i-1} - X_i + X̃_i + eps + S_i`.
pub fn busy_e5_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let l = c.lambda;
    let a = cfg.eps_i + c.mean;
    neumaier([
        (l * (a + c.er) - 1.0) / (l * l),
        c.mr * (1.0 - l * a) / (l * l),
        -a * c.mr1,
    ])
}

pub fn exp_xt_given_busy_11(cfg: &QueueConfig11) -> f64 {
    neumaier([
        busy_e4_shift_11(cfg),
        busy_e4_residual_11(cfg),
        busy_e5_11(cfg),
    ])
}

/// `E[X T]` by total expectation over the state seen by packet `i-1`.
pub fn exp_xt_11(cfg: &QueueConfig11) -> f64 {
    let p = state_probs_11(cfg);
    let wait = exp_xt_given_wait_11(cfg).map_or(0.0, |v| p.p_w * v);
    neumaier([
        p.p_i * exp_xt_given_idle_11(cfg),
        wait,
        p.p_b * exp_xt_given_busy_11(cfg),
    ])
}

pub fn avg_aoi_11(cfg: &QueueConfig11) -> f64 {
    cfg.lambda * exp_xt_11(cfg) + 1.0 / cfg.lambda
}

// ---------------------------------------------------------------------
// Peak AoI
// ---------------------------------------------------------------------

/// `E[(X_i + T_i) 1{i=i*} | I, E_P1] Pr[E_P1]`: packet `i` arrives during
/// the service and opens the next service batch.
pub fn peak_idle_ep1_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, es) = (c.lambda, cfg.eps_i, c.mean);
    let e = c.decay(eps);
    e * (1.0 / l + 2.0 * es + 2.0 * eps) - e * (c.m * (1.0 / l + es + 2.0 * eps) + c.m1)
}

/// `E[(X_i + T_i) 1{i=i*} | I, E_P2] Pr[E_P2]`: packet `i` finds the
/// server idle.
pub fn peak_idle_ep2_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, es) = (c.lambda, cfg.eps_i, c.mean);
    c.decay(eps) * ((es + 2.0 * eps + 1.0 / l) * c.m + c.m1)
}

/// `E[(X_i + T_i) 1{i=i*} | W, R = r] = e^{-λr}(1/λ + 2E[S] + eps + r)`.
pub fn peak_g_fn_11(cfg: &QueueConfig11, r: f64) -> f64 {
    let c = &cfg.ctx;
    c.decay(r) * (1.0 / c.lambda + 2.0 * c.mean + cfg.eps_i + r)
}

pub fn peak_breakdown_11(cfg: &QueueConfig11) -> PeakBreakdown {
    let c = &cfg.ctx;
    let p = state_probs_11(cfg);
    let (l, eps) = (c.lambda, cfg.eps_i);
    let e = c.decay(eps);

    let mut pieces = vec![PeakPiece {
        state: SysState::Idle,
        prob: p.p_i,
        cond_value: peak_idle_ep1_11(cfg) + peak_idle_ep2_11(cfg),
        pr_first: e,
    }];
    if eps > 0.0 {
        let one_minus_e = -(-l * eps).exp_m1();
        let cond_value =
            ((1.0 / l + 2.0 * c.mean + eps) * one_minus_e / l + c.head1(eps) / l) / eps;
        pieces.push(PeakPiece {
            state: SysState::WaitIdle,
            prob: p.p_w,
            cond_value,
            pr_first: one_minus_e / (l * eps),
        });
    }
    // A packet following a busy-period arrival always shares its batch.
    pieces.push(PeakPiece {
        state: SysState::Busy,
        prob: p.p_b,
        cond_value: 0.0,
        pr_first: 0.0,
    });
    PeakBreakdown { pieces }
}

/// Average peak AoI, `eps - e^{-λ eps}/λ + 2/λ + 2E[S]`.
pub fn avg_peak_aoi_11(cfg: &QueueConfig11) -> f64 {
    let c = &cfg.ctx;
    let (l, eps) = (c.lambda, cfg.eps_i);
    eps - c.decay(eps) / l + 2.0 / l + 2.0 * c.mean
}
