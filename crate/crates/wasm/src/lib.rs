//! wasm-bindgen surface for the browser demo: an interactive film evolution
//! session, the linear dispersion curve, and the (n, m) regime map. The
//! rendering lives in `www/index.html`; this layer only moves numbers.

use thinfilm::field::Field;
use thinfilm::model::{self, ProblemParams};
use thinfilm::solver::{implicit_step, lift_initial_data, RunState, SolverConfig};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn build_initial(kind: u32, a: f64, nx: usize, amplitude: f64, r0: f64, n: f64) -> Field {
    match kind {
        1 => Field::parabolic_droplet(a, nx, amplitude, r0),
        2 => Field::source_droplet(a, nx, amplitude, r0, n),
        3 => Field::from_fn(a, nx, |x| {
            1.0 + amplitude * (std::f64::consts::PI * x / r0).cos()
        }),
        _ => Field::cosine_bump(a, nx, amplitude, r0),
    }
}

/// Interactive integration session. The browser drives `advance` once per
/// frame and reads back the profile.
#[wasm_bindgen]
pub struct SimSession {
    p: ProblemParams,
    cfg: SolverConfig,
    state: RunState,
    dt: f64,
    collapsed: bool,
    rejections: u64,
}

#[wasm_bindgen]
impl SimSession {
    /// kind: 0 cosine bump, 1 parabolic droplet, 2 source-shaped droplet,
    /// 3 perturbed flat film.
    #[wasm_bindgen(constructor)]
    #[allow(clippy::too_many_arguments)] // flat signature for the JS side
    pub fn new(
        n: f64,
        m: f64,
        a0: f64,
        a1: f64,
        a: f64,
        nx: usize,
        kind: u32,
        amplitude: f64,
        r0: f64,
        eps: f64,
    ) -> Result<SimSession, JsValue> {
        let p = ProblemParams::new(n, m, a0, a1, a, nx).map_err(err)?;
        let cfg = SolverConfig {
            eps,
            dt_init: 1e-7,
            dt_min: 1e-15,
            ..SolverConfig::default()
        };
        cfg.validate().map_err(err)?;
        let raw = build_initial(kind, a, nx, amplitude, r0, n);
        let (h0, _) = lift_initial_data(&raw, &cfg).map_err(err)?;
        let dt = cfg.dt_init;
        let state = RunState::new(h0, 0.0, &p, &cfg);
        Ok(SimSession { p, cfg, state, dt, collapsed: false, rejections: 0 })
    }

    /// Advance by roughly `t_chunk` of model time (a frame's worth).
    /// Returns false once the time step has collapsed (blow-up signature).
    pub fn advance(&mut self, t_chunk: f64) -> bool {
        if self.collapsed {
            return false;
        }
        let t_stop = self.state.t + t_chunk;
        let mut accepts = 0u32;
        while self.state.t < t_stop {
            let dt_try = self.dt.min(t_stop - self.state.t);
            match implicit_step(&mut self.state, &self.p, &self.cfg, dt_try) {
                Ok(rep) if rep.accepted => {
                    accepts += 1;
                    if accepts >= 5 {
                        self.dt = (self.dt * 1.2).min(self.cfg.dt_max);
                        accepts = 0;
                    }
                }
                Ok(_) | Err(_) => {
                    self.rejections += 1;
                    accepts = 0;
                    self.dt *= 0.5;
                    if self.dt < self.cfg.dt_min {
                        self.collapsed = true;
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn values(&self) -> Vec<f64> {
        self.state.h.values().to_vec()
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mass(&self) -> f64 {
        self.state.h.mass()
    }

    pub fn sup(&self) -> f64 {
        self.state.h.max()
    }

    pub fn h1_sq(&self) -> f64 {
        self.state.h.h1_sq()
    }

    pub fn energy(&self) -> f64 {
        thinfilm::functionals::energy(&self.state.h, &self.p).unwrap_or(f64::NAN)
    }

    pub fn domain_half_width(&self) -> f64 {
        self.p.a
    }

    pub fn collapsed(&self) -> bool {
        self.collapsed
    }

    pub fn rejections(&self) -> f64 {
        self.rejections as f64
    }
}

/// Growth rates sigma(xi) sampled on [0, xi_max]; the browser plots the
/// unstable band.
#[wasm_bindgen]
pub fn dispersion_curve(
    n: f64,
    m: f64,
    a0: f64,
    a1: f64,
    hbar: f64,
    xi_max: f64,
    count: usize,
) -> Result<Vec<f64>, JsValue> {
    let p = ProblemParams::new(n, m, a0, a1, 1.0, 64).map_err(err)?;
    Ok((0..count)
        .map(|k| model::growth_rate(xi_max * k as f64 / (count - 1).max(1) as f64, hbar, &p))
        .collect())
}

#[wasm_bindgen]
pub fn band_edge_wavenumber(n: f64, m: f64, a0: f64, a1: f64, hbar: f64) -> Result<f64, JsValue> {
    let p = ProblemParams::new(n, m, a0, a1, 1.0, 64).map_err(err)?;
    Ok(model::band_edge(hbar, &p))
}

#[wasm_bindgen]
pub fn fastest_wavenumber(n: f64, m: f64, a0: f64, a1: f64, hbar: f64) -> Result<f64, JsValue> {
    let p = ProblemParams::new(n, m, a0, a1, 1.0, 64).map_err(err)?;
    Ok(model::fastest_mode(hbar, &p))
}

/// Theorem-region map over an (n, m) grid. Each cell carries a bit code:
/// bits 0-1 the regime (0 sub, 1 critical, 2 super), bit 2 existence,
/// bit 3 finite speed, bit 4 blow-up.
#[wasm_bindgen]
pub fn regime_map(
    n_min: f64,
    n_max: f64,
    m_min: f64,
    m_max: f64,
    cols: usize,
    rows: usize,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        let m = m_min + (m_max - m_min) * j as f64 / (rows - 1).max(1) as f64;
        for i in 0..cols {
            let n = n_min + (n_max - n_min) * i as f64 / (cols - 1).max(1) as f64;
            out.push(cell_code(n, m));
        }
    }
    out
}

fn cell_code(n: f64, m: f64) -> u8 {
    match ProblemParams::new(n, m, 1.0, 1.0, 1.0, 64) {
        Ok(p) => {
            let r = model::theorem_applicability(&p);
            let regime = match r.regime {
                model::Regime::Subcritical => 0u8,
                model::Regime::Critical => 1,
                model::Regime::Supercritical => 2,
            };
            regime
                | (u8::from(r.existence_ok) << 2)
                | (u8::from(r.fsp_ok) << 3)
                | (u8::from(r.blowup_ok) << 4)
        }
        Err(_) => 0xff,
    }
}

#[wasm_bindgen]
pub fn describe_cell(n: f64, m: f64) -> String {
    match ProblemParams::new(n, m, 1.0, 1.0, 1.0, 64) {
        Ok(p) => {
            let r = model::theorem_applicability(&p);
            format!(
                "n={n:.2} m={m:.2}: {} regime; existence {}, finite speed {}, blow-up {}",
                r.regime,
                if r.existence_ok { "yes" } else { "no" },
                if r.fsp_ok { "yes" } else { "no" },
                if r.blowup_ok { "yes" } else { "no" },
            )
        }
        Err(e) => format!("invalid parameters: {e}"),
    }
}
