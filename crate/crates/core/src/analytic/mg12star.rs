//! M/GI/1/2* with holds `eps_i` (after an idle period) and `eps_b` (after
//! a busy period that left a packet in the buffer).
//!
//! States seen by an arrival: idle (I), hold after idle (WaI), busy (B)
//! and hold after busy (WaB).

use super::{neumaier, PeakBreakdown, PeakPiece, RateContext};
use crate::dist::ServiceDistribution;
use crate::error::{non_negative, positive, Result};
use crate::SysState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueConfig2s {
    lambda: f64,
    eps_i: f64,
    eps_b: f64,
    dist: ServiceDistribution,
    ctx: RateContext,
}

impl QueueConfig2s {
    pub fn new(lambda: f64, eps_i: f64, eps_b: f64, dist: ServiceDistribution) -> Result<Self> {
        positive("lambda", lambda)?;
        non_negative("eps_i", eps_i)?;
        non_negative("eps_b", eps_b)?;
        let ctx = RateContext::new(&dist, lambda)?;
        Ok(Self {
            lambda,
            eps_i,
            eps_b,
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

    pub fn eps_b(&self) -> f64 {
        self.eps_b
    }

    pub fn dist(&self) -> &ServiceDistribution {
        &self.dist
    }

    pub fn context(&self) -> &RateContext {
        &self.ctx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbs2s {
    pub p_i: f64,
    pub p_wai: f64,
    pub p_wab: f64,
    pub p_b: f64,
    pub t_cycle: f64,
}

/// A cycle starts with an idle period and a hold `eps_i`, followed by a
/// geometric number (mean `1/M`) of services, consecutive ones separated
/// by a hold `eps_b`.
pub fn state_probs_2s(cfg: &QueueConfig2s) -> StateProbs2s {
    let c = &cfg.ctx;
    // 1/M - 1
    let extra = c.one_minus_m / c.m;
    let t_cycle = 1.0 / c.lambda + cfg.eps_i + cfg.eps_b * extra + c.mean / c.m;
    StateProbs2s {
        p_i: 1.0 / (c.lambda * t_cycle),
        p_wai: cfg.eps_i / t_cycle,
        p_wab: cfg.eps_b * extra / t_cycle,
        p_b: c.mean / (t_cycle * c.m),
        t_cycle,
    }
}

// ---------------------------------------------------------------------
// E[X_i T_i | I]
// ---------------------------------------------------------------------

/// Event E1: packet `i` arrives during the service of `i-1` and is served
/// after a hold `eps_b`.
pub fn idle_e1_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, eb, es) = (c.lambda, cfg.eps_i, cfg.eps_b, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(eps);
    let le = l * eps;
    neumaier([
        (2.0 * es + eps + eb) * e * (1.0 + le) / l,
        -e / (l * l) * (2.0 + 2.0 * le + le * le),
        -(es + eb + eps) * e / l * ((1.0 + le) * m + l * m1),
        -e / l * ((1.0 + le) * m1 + l * m2),
        e / (l * l) * ((2.0 + 2.0 * le + le * le) * m + (2.0 * l + 2.0 * l * le) * m1 + l * l * m2),
    ])
}

/// Event E2: packet `i` arrives during the hold and replaces `i-1`.
pub fn idle_e2_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let eps = cfg.eps_i;
    (eps + c.mean) * c.head1(eps) - c.head2(eps)
}

/// Event E3: packet `i` finds the system empty.
pub fn idle_e3_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let eps = cfg.eps_i;
    (eps + c.mean) * c.decay(eps) * ((eps + 1.0 / c.lambda) * c.m + c.m1)
}

pub fn exp_xt_given_idle_2s(cfg: &QueueConfig2s) -> f64 {
    neumaier([idle_e1_2s(cfg), idle_e2_2s(cfg), idle_e3_2s(cfg)])
}

// ---------------------------------------------------------------------
// E[X_i T_i | WaI], E[X_i T_i | WaB]
// ---------------------------------------------------------------------

/// `E[X_i T_i | R_{i-1} = r]` with `r` the hold time left when packet
/// `i-1` arrives.
pub fn g_fn_2s(cfg: &QueueConfig2s, r: f64) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, eb, es) = (c.lambda, cfg.eps_i, cfg.eps_b, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(r);
    let lr = l * r;
    neumaier([
        (r + es) * c.head1(r) - c.head2(r),
        (2.0 * es + r + eb) * e * (1.0 + lr) / l,
        -e / (l * l) * (2.0 + 2.0 * lr + lr * lr),
        -(es + eb + r) * e / l * ((1.0 + lr) * m + l * m1),
        -e / l * ((1.0 + lr) * m1 + l * m2),
        e / (l * l) * ((2.0 + 2.0 * lr + lr * lr) * m + (2.0 * l + 2.0 * l * lr) * m1 + l * l * m2),
        (eps + es) * e * ((r + 1.0 / l) * m + m1),
    ])
}

/// Antiderivative of [`g_fn_2s`] in `r`.
pub fn h_fn_2s(cfg: &QueueConfig2s, x: f64) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, eb, es) = (c.lambda, cfg.eps_i, cfg.eps_b, c.mean);
    let (m, m1, m2) = (c.m, c.m1, c.m2);
    let e = c.decay(x);
    let inner = neumaier([
        e * (2.0 * es - 3.0 / l),
        (es * l - 2.0) * x,
        0.5 * l * x * x,
        x * e * (es * l - 1.0),
        -e * (2.0 * eb + 2.0 * es - 3.0 / l),
        -x * e * (eb * l + es * l - 1.0),
        l * e * (m1 * (eb + es + x) + m * (x * x + eb * x + es * x)),
        3.0 * m * e / l,
        // 3·M·x here (not 6·M·x): required for d/dx h = g.
        e * (m1 + 2.0 * m * (eb + es) + 3.0 * m * x),
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

fn hold_average(cfg: &QueueConfig2s, hold: f64) -> Option<f64> {
    if hold == 0.0 {
        return None;
    }
    Some((h_fn_2s(cfg, hold) - h_fn_2s(cfg, 0.0)) / hold)
}

/// Residual hold uniform on `[0, eps_i]`; `None` when `eps_i = 0`.
pub fn exp_xt_given_wai_2s(cfg: &QueueConfig2s) -> Option<f64> {
    hold_average(cfg, cfg.eps_i)
}

/// Residual hold uniform on `[0, eps_b]`; `None` when `eps_b = 0`.
pub fn exp_xt_given_wab_2s(cfg: &QueueConfig2s) -> Option<f64> {
    hold_average(cfg, cfg.eps_b)
}

// ---------------------------------------------------------------------
// E[X_i T_i | B]
// ---------------------------------------------------------------------

/// `E[(X_i - R_{i-1}) T_i | B, E4] Pr[E4]`: after the residual service the
/// situation is that of a fresh hold `eps_b`.
pub fn busy_e4_shift_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    c.mr * g_fn_2s(cfg, cfg.eps_b)
}

/// `E[R_{i-1} T_i | B, E4] Pr[E4]`.
pub fn busy_e4_residual_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let (l, eps, eb, es) = (c.lambda, cfg.eps_i, cfg.eps_b, c.mean);
    let e = c.decay(eb);
    let one_minus_e = -(-l * eb).exp_m1();
    c.mr1
        * neumaier([
            ((eb + es - 1.0 / l) + es + (1.0 / l + eps - eb) * c.m) * e,
            (eb + es) * one_minus_e,
            -c.head1(eb),
        ])
}

/// `E[X_i T_i | B, E5] Pr[E5]`: packet `i` also arrives during the
/// residual service and replaces `i-1` in the buffer.
pub fn busy_e5_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let l = c.lambda;
    let a = cfg.eps_b + c.mean;
    neumaier([
        (l * (a + c.er) - 2.0) / (l * l),
        c.mr * (2.0 - l * a) / (l * l),
        (1.0 - l * a) * c.mr1 / l,
    ])
}

pub fn exp_xt_given_busy_2s(cfg: &QueueConfig2s) -> f64 {
    neumaier([
        busy_e4_shift_2s(cfg),
        busy_e4_residual_2s(cfg),
        busy_e5_2s(cfg),
    ])
}

pub fn exp_xt_2s(cfg: &QueueConfig2s) -> f64 {
    let p = state_probs_2s(cfg);
    neumaier([
        p.p_i * exp_xt_given_idle_2s(cfg),
        exp_xt_given_wai_2s(cfg).map_or(0.0, |v| p.p_wai * v),
        exp_xt_given_wab_2s(cfg).map_or(0.0, |v| p.p_wab * v),
        p.p_b * exp_xt_given_busy_2s(cfg),
    ])
}

pub fn avg_aoi_2s(cfg: &QueueConfig2s) -> f64 {
    cfg.lambda * exp_xt_2s(cfg) + 1.0 / cfg.lambda
}

// ---------------------------------------------------------------------
// Peak AoI
// ---------------------------------------------------------------------

fn peak_offset(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    2.0 * c.mean + cfg.eps_b + c.m * (1.0 / c.lambda + cfg.eps_i - cfg.eps_b)
}

/// `E[(X_i + T_i) 1{i=i*} | R_{i-1} = r] = e^{-λr}(A + r)` with
/// `A = 2E[S] + eps_b + M(1/λ + eps_i - eps_b)`.
pub fn peak_g_fn_2s(cfg: &QueueConfig2s, r: f64) -> f64 {
    cfg.ctx.decay(r) * (peak_offset(cfg) + r)
}

fn peak_hold_piece(cfg: &QueueConfig2s, state: SysState, prob: f64, hold: f64) -> PeakPiece {
    let c = &cfg.ctx;
    let l = c.lambda;
    let one_minus_e = -(-l * hold).exp_m1();
    PeakPiece {
        state,
        prob,
        cond_value: (peak_offset(cfg) * one_minus_e / l + c.head1(hold) / l) / hold,
        pr_first: one_minus_e / (l * hold),
    }
}

pub fn peak_breakdown_2s(cfg: &QueueConfig2s) -> PeakBreakdown {
    let c = &cfg.ctx;
    let p = state_probs_2s(cfg);
    let e_b = c.decay(cfg.eps_b);

    let mut pieces = vec![PeakPiece {
        state: SysState::Idle,
        prob: p.p_i,
        cond_value: peak_g_fn_2s(cfg, cfg.eps_i),
        pr_first: c.decay(cfg.eps_i),
    }];
    if cfg.eps_i > 0.0 {
        pieces.push(peak_hold_piece(cfg, SysState::WaitIdle, p.p_wai, cfg.eps_i));
    }
    pieces.push(PeakPiece {
        state: SysState::Busy,
        prob: p.p_b,
        cond_value: peak_g_fn_2s(cfg, cfg.eps_b) * c.mr + e_b * c.mr1,
        pr_first: e_b * c.mr,
    });
    if cfg.eps_b > 0.0 {
        pieces.push(peak_hold_piece(cfg, SysState::WaitBusy, p.p_wab, cfg.eps_b));
    }
    PeakBreakdown { pieces }
}

/// Average peak AoI in compact form.
pub fn avg_peak_aoi_2s(cfg: &QueueConfig2s) -> f64 {
    let c = &cfg.ctx;
    let l = c.lambda;
    neumaier([
        cfg.eps_b * c.one_minus_m,
        -c.m1 * c.decay(cfg.eps_b),
        c.m * cfg.eps_i,
        -c.m / l * c.decay(cfg.eps_i),
        2.0 * c.mean,
        (1.0 + c.m) / l,
    ])
}
