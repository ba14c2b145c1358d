use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::engine::rng::{path_rng, Purpose};
use crate::engine::SimConfig;
use crate::error::{EngineError, StrategyError};
use crate::market::{apply_jump, price, step_continuous, MarketState, SignalDynamics, Z0Law};
use crate::strategies::{Observation, Strategy, StrategyDecision};

/// A step whose end breaches a strategy band is split in two, at most this
/// many times in a row, before the path is given up.
pub const MAX_HALVINGS: u32 = 10;

/// Positions beyond this size are treated as divergence.
const DIVERGENCE_BOUND: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    /// Node index at which the jump happens; node arrays hold post-jump values.
    pub node: usize,
    pub t: f64,
    pub dtheta: f64,
    pub x_pre: f64,
    pub x_post: f64,
    pub s_pre: f64,
    pub s_post: f64,
    pub theta_pre: f64,
}

impl JumpEvent {
    /// `dY = dtheta`: noise trades are continuous.
    pub fn dy(&self) -> f64 {
        self.dtheta
    }

    pub fn ds(&self) -> f64 {
        self.s_post - self.s_pre
    }
}

/// Values read at the last node, which stands in for `1-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Terminal {
    pub s: f64,
    pub theta: f64,
    pub x: f64,
    pub payoff: f64,
}

/// One simulated path. Node arrays share one length; step arrays are one
/// shorter and describe the move from node `k` to `k + 1`. Nodes added by
/// breach refinement make the time grid non-uniform.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PathRecord {
    pub t: Vec<f64>,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub qv_theta_c: Vec<f64>,
    pub qv_y_c: Vec<f64>,
    pub m: Vec<f64>,
    pub drift: Vec<f64>,
    pub load: Vec<f64>,
    /// `H_x w` at the left end of each step.
    pub hxw: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
    pub z0: f64,
    pub z1: f64,
    pub payoff: f64,
}

impl PathRecord {
    pub fn n_nodes(&self) -> usize {
        self.t.len()
    }

    pub fn terminal(&self) -> Terminal {
        let n = self.t.len() - 1;
        Terminal { s: self.s[n], theta: self.theta[n], x: self.x[n], payoff: self.payoff }
    }

    pub fn step_dt(&self, k: usize) -> f64 {
        self.t[k + 1] - self.t[k]
    }

    /// Node values of `(S, theta)` just before any jump at that node.
    pub(crate) fn left_limits(&self) -> (Vec<f64>, Vec<f64>) {
        let mut s = self.s.clone();
        let mut theta = self.theta.clone();
        for ev in &self.jumps {
            s[ev.node] = ev.s_pre;
            theta[ev.node] = ev.theta_pre;
        }
        (s, theta)
    }
}

struct Walker<'a> {
    cfg: &'a SimConfig,
    strategy: Box<dyn Strategy>,
    refine: ChaCha8Rng,
    state: MarketState,
    b: f64,
    theta: f64,
    z: f64,
    m: f64,
    rec: PathRecord,
}

impl Walker<'_> {
    fn observe(&self, dt: f64) -> Observation {
        Observation { t: self.state.t, dt, x: self.state.x, y: self.state.y, b: self.b, m: self.m, z: self.z }
    }

    fn m_at(&self, t: f64) -> Result<f64, EngineError> {
        if self.cfg.signal.is_static() {
            Ok(self.m)
        } else {
            Ok(self.cfg.signal.m(&self.cfg.rule, t, self.z)?)
        }
    }

    fn push_node(&mut self) {
        let r = &mut self.rec;
        r.t.push(self.state.t);
        r.b.push(self.b);
        r.y.push(self.state.y);
        r.x.push(self.state.x);
        r.s.push(price(&self.cfg.rule, self.state.t, self.state.x));
        r.theta.push(self.theta);
        r.qv_theta_c.push(self.state.qv_theta_c);
        r.qv_y_c.push(self.state.qv_y_c);
        r.m.push(self.m);
    }

    fn replace_last_node(&mut self) {
        self.rec.t.pop();
        for v in [
            &mut self.rec.b,
            &mut self.rec.y,
            &mut self.rec.x,
            &mut self.rec.s,
            &mut self.rec.theta,
            &mut self.rec.qv_theta_c,
            &mut self.rec.qv_y_c,
            &mut self.rec.m,
        ] {
            v.pop();
        }
        self.push_node();
    }

    fn jump(&mut self, size: f64) -> Result<(), EngineError> {
        let rule = &self.cfg.rule;
        let t = self.state.t;
        let pre = self.state;
        let post = apply_jump(rule, &pre, size)?;
        if !post.x.is_finite() || post.x.abs() > DIVERGENCE_BOUND {
            return Err(EngineError::PathDiverged { t });
        }
        self.rec.jumps.push(JumpEvent {
            node: self.rec.t.len() - 1,
            t,
            dtheta: size,
            x_pre: pre.x,
            x_post: post.x,
            s_pre: price(rule, t, pre.x),
            s_post: price(rule, t, post.x),
            theta_pre: self.theta,
        });
        self.state = post;
        self.theta += size;
        self.replace_last_node();
        Ok(())
    }

    /// Decision at the current node, executing a requested jump first.
    fn decide_at_node(&mut self, dt: f64) -> Result<StrategyDecision, EngineError> {
        let d = self.strategy.decide(&self.observe(dt))?;
        let Some(size) = d.jump else { return Ok(d) };
        if !size.is_finite() {
            return Err(EngineError::PathDiverged { t: self.state.t });
        }
        self.jump(size)?;
        let d = self.strategy.decide(&self.observe(dt))?;
        if d.jump.is_some() {
            return Err(EngineError::InvalidConfig(format!("strategy jumped twice at t = {}", self.state.t)));
        }
        Ok(d)
    }

    /// Continuous move to `t_end` with noise increment `db`, splitting the
    /// step on a band breach.
    fn advance(&mut self, d: StrategyDecision, t_end: f64, db: f64, depth: u32) -> Result<(), EngineError> {
        let rule = &self.cfg.rule;
        let h = t_end - self.state.t;
        let t = self.state.t;
        let dtheta = d.drift * h + d.brown_load * db;
        let dyc = db + dtheta;
        let mut next = step_continuous(rule, &self.state, dyc, d.qv_rate(), h)?;
        next.t = t_end;
        next.qv_theta_c = self.state.qv_theta_c + d.brown_load * d.brown_load * h;
        if !(next.x.is_finite() && next.y.is_finite()) || next.x.abs() > DIVERGENCE_BOUND {
            return Err(EngineError::PathDiverged { t: t_end });
        }
        let candidate = Observation { t: t_end, dt: 0.0, x: next.x, y: next.y, b: self.b + db, m: self.m, z: self.z };
        match self.strategy.check(&candidate) {
            Ok(()) => {}
            Err(StrategyError::BoundaryBreach { .. }) if depth < MAX_HALVINGS => {
                let half = 0.5 * h;
                let xi: f64 = self.refine.sample(StandardNormal);
                let db1 = 0.5 * db + 0.5 * h.sqrt() * xi;
                let t_mid = t + half;
                self.advance(d, t_mid, db1, depth + 1)?;
                let d2 = self.strategy.decide(&self.observe(t_end - t_mid))?;
                if d2.jump.is_some() {
                    return Err(EngineError::InvalidConfig(format!("strategy jumped off-grid at t = {t_mid}")));
                }
                return self.advance(d2, t_end, db - db1, depth + 1);
            }
            Err(e) => return Err(e.into()),
        }
        self.rec.drift.push(d.drift);
        self.rec.load.push(d.brown_load);
        self.rec.hxw.push(rule.h.d_x(t, self.state.x) * rule.w.eval(t, self.state.x));
        self.state = next;
        self.b += db;
        self.theta += dtheta;
        self.m = self.m_at(t_end)?;
        self.push_node();
        Ok(())
    }
}

/// Simulates path `path_index` of `cfg`. The result depends only on the
/// configuration, the master seed and the index.
pub fn simulate_path(cfg: &SimConfig, path_index: u64) -> Result<PathRecord, EngineError> {
    let n = cfg.n_steps();
    let sub = cfg.noise_substeps();
    let sub_sd = (cfg.dt / sub as f64).sqrt();
    let mut noise = path_rng(cfg.seed, Purpose::Noise, path_index);
    let mut signal_rng = path_rng(cfg.seed, Purpose::Signal, path_index);

    let z0 = match (cfg.draw_z0, cfg.signal.z0_law) {
        (true, Z0Law::Normal { mean, sd }) => {
            let e: f64 = path_rng(cfg.seed, Purpose::InitialSignal, path_index).sample(StandardNormal);
            mean + sd * e
        }
        _ => cfg.signal.z,
    };
    let m0 = cfg.signal.m(&cfg.rule, 0.0, z0)?;
    let mut w = Walker {
        cfg,
        strategy: cfg.strategy.build(&cfg.rule, cfg.dt)?,
        refine: path_rng(cfg.seed, Purpose::Refinement, path_index),
        state: MarketState::initial(),
        b: 0.0,
        theta: 0.0,
        z: z0,
        m: m0,
        rec: PathRecord { z0, ..Default::default() },
    };
    w.push_node();

    for k in 0..n {
        let t_end = if k + 1 == n { 1.0 } else { (k + 1) as f64 * cfg.dt };
        let mut db = 0.0;
        for _ in 0..sub {
            let e: f64 = noise.sample(StandardNormal);
            db += sub_sd * e;
        }
        let d = w.decide_at_node(t_end - w.state.t)?;
        if let SignalDynamics::Brownian { vol } = cfg.signal.dynamics {
            let e: f64 = signal_rng.sample(StandardNormal);
            w.z += vol * (t_end - w.state.t).sqrt() * e;
        }
        w.advance(d, t_end, db, 0)?;
    }
    w.rec.z1 = w.z;
    w.rec.payoff = cfg.signal.payoff.eval(w.z);
    Ok(w.rec)
}
