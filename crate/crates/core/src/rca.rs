//! Reciprocal channel approximation (RCA) for coupled, punctured protograph
//! ensembles.
//!
//! Messages are SNRs. A channel SNR `s` means an LLR distributed as
//! `N(4s, 8s)`. Variable nodes add SNRs; check nodes add reciprocal SNRs,
//! `R(s) = C^-1(1 - C(s))`, where `C` is the binary-input AWGN capacity.

use crate::coupled::CoupledCode;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

const HERMITE_NODES: usize = 64;

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn hermite() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_hermite(HERMITE_NODES);
        let w = w.into_iter().map(|w| w / PI.sqrt()).collect();
        (x, w)
    })
}

/// `E[g(L)]` for `L ~ N(4s, 8s)`.
fn llr_expectation(s: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (x, w) = hermite();
    let mean = 4.0 * s;
    let spread = (16.0 * s).sqrt();
    x.iter().zip(w).map(|(&xi, &wi)| wi * g(mean + spread * xi)).sum()
}

/// `log2(1 + e^-l)` without overflow.
fn softplus_neg_bits(l: f64) -> f64 {
    if l > 0.0 {
        (-l).exp().ln_1p() / LN_2
    } else {
        (-l + l.exp().ln_1p()) / LN_2
    }
}

fn check_snr(s: f64) -> Result<()> {
    if s.is_nan() || s < 0.0 {
        Err(Error::Numeric(format!("SNR {s} must be non-negative")))
    } else {
        Ok(())
    }
}

/// Binary-input AWGN capacity in bits at linear SNR `s`.
pub fn capacity(s: f64) -> Result<f64> {
    check_snr(s)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    // 1 - log2(1 + e^-l) = (l/2 - ln cosh(l/2)) / ln 2, and E[l/2] = 2s
    let lncosh = llr_expectation(s, |l| {
        let x = (l / 2.0).abs();
        if x < 1.0 {
            (2.0 * (x / 2.0).sinh().powi(2)).ln_1p()
        } else {
            x + (-2.0 * x).exp().ln_1p() - LN_2
        }
    });
    if s >= TAIL_SWITCH {
        return Ok(1.0 - capacity_gap(s)?);
    }
    Ok(((2.0 * s - lncosh) / LN_2).clamp(0.0, 1.0))
}

/// `1 - capacity(s)`, accurate when the capacity is close to one.
pub fn capacity_gap(s: f64) -> Result<f64> {
    check_snr(s)?;
    if s == 0.0 {
        return Ok(1.0);
    }
    if s < TAIL_SWITCH {
        return Ok(llr_expectation(s, softplus_neg_bits));
    }
    // For larger s the integrand lives near l = 0, far out in the Gaussian
    // tail where Hermite nodes are sparse. Integrate directly over [-80, 80];
    // it decays at least like e^{-|l|/2} on both sides.
    let (x, w) = legendre8();
    let var = 8.0 * s;
    let log_norm = -0.5 * (2.0 * PI * var).ln();
    let mut sum = 0.0;
    let mut a = -80.0;
    while a < 80.0 {
        for (xi, wi) in x.iter().zip(w) {
            let l = a + (xi + 1.0);
            let d = l - 4.0 * s;
            sum += wi * (log_norm - d * d / (2.0 * var)).exp() * softplus_neg_bits(l);
        }
        a += 2.0;
    }
    Ok(sum)
}

const TAIL_SWITCH: f64 = 1.0;

/// 8-point Gauss-Legendre rule on [-1, 1].
fn legendre8() -> ([f64; 8], [f64; 8]) {
    let x = [0.1834346424956498, 0.525532409916329, 0.7966664774136267, 0.9602898564975363];
    let w = [0.362683783378362, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763];
    let mut xs = [0.0; 8];
    let mut ws = [0.0; 8];
    for i in 0..4 {
        xs[2 * i] = -x[i];
        xs[2 * i + 1] = x[i];
        ws[2 * i] = w[i];
        ws[2 * i + 1] = w[i];
    }
    (xs, ws)
}

/// Default cap for `R(0)`.
pub const DEFAULT_SNR_MAX: f64 = 1e4;

/// `R(s) = C^-1(1 - C(s))` by bisection on `ln t`, solving whichever of
/// `C(t) = 1 - C(s)` or `1 - C(t) = C(s)` has the smaller right-hand side.
pub fn reciprocal_energy(s: f64) -> Result<f64> {
    reciprocal_energy_capped(s, DEFAULT_SNR_MAX)
}

pub fn reciprocal_energy_capped(s: f64, s_max: f64) -> Result<f64> {
    check_snr(s)?;
    if s == 0.0 {
        return Ok(s_max);
    }
    let c = capacity(s)?;
    let gap = capacity_gap(s)?;
    if gap <= 0.0 {
        return Ok(0.0);
    }
    // residual(t) increasing in t
    let residual = |t: f64| -> Result<f64> {
        Ok(if gap <= c {
            capacity(t)?.ln() - gap.ln()
        } else {
            c.ln() - capacity_gap(t)?.ln()
        })
    };
    let (mut lo, mut hi) = ((1e-300f64).ln(), s_max.ln());
    if residual(hi.exp())? < 0.0 {
        return Ok(s_max);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid.exp())? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            return Ok((0.5 * (lo + hi)).exp());
        }
    }
    Err(Error::Numeric(format!("reciprocal energy at {s} did not converge")))
}

/// Tabulated `R` on a logarithmic grid with cubic interpolation of
/// `ln R` against `ln s`.
pub struct ReciprocalTable {
    ln_lo: f64,
    step: f64,
    ln_r: Vec<f64>,
    s_max: f64,
}

const TABLE_LO: f64 = 1e-12;
const TABLE_HI: f64 = 150.0;
const TABLE_PER_DECADE: usize = 200;

impl ReciprocalTable {
    pub fn new(s_max: f64) -> Result<Self> {
        let ln_lo = TABLE_LO.ln();
        let ln_hi = TABLE_HI.ln();
        let step = std::f64::consts::LN_10 / TABLE_PER_DECADE as f64;
        let n = ((ln_hi - ln_lo) / step).ceil() as usize + 1;
        let ln_r = (0..n)
            .map(|i| reciprocal_energy_capped((ln_lo + i as f64 * step).exp(), s_max).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReciprocalTable { ln_lo, step, ln_r, s_max })
    }

    /// Shared table with the default cap.
    pub fn shared() -> &'static ReciprocalTable {
        static TABLE: OnceLock<ReciprocalTable> = OnceLock::new();
        TABLE.get_or_init(|| ReciprocalTable::new(DEFAULT_SNR_MAX).expect("table construction"))
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.s_max;
        }
        let n = self.ln_r.len();
        let pos = (s.ln() - self.ln_lo) / self.step;
        if pos < 0.0 {
            // R grows like ln(1/s) as s -> 0
            return (self.ln_r[0].exp() - pos * self.step).min(self.s_max);
        }
        if pos >= (n - 1) as f64 {
            // and decays like e^-s as s grows
            let top = ((n - 1) as f64 * self.step + self.ln_lo).exp();
            return (self.ln_r[n - 1] - (s - top)).exp();
        }
        let i = pos.floor() as usize;
        let f = pos - i as f64;
        let y = |k: isize| self.ln_r[(i as isize + k).clamp(0, n as isize - 1) as usize];
        let (y0, y1, y2, y3) = (y(-1), y(0), y(1), y(2));
        // Catmull-Rom
        let v = y1
            + 0.5 * f * (y2 - y0 + f * (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3 + f * (3.0 * (y1 - y2) + y3 - y0)));
        v.exp().min(self.s_max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RcaConfig {
    pub iterations: usize,
    /// Success when every averaged reliability exceeds this, in dB.
    pub stop_db: f64,
    pub resolution_db: f64,
    /// Eb/N0 search interval in dB.
    pub bracket_db: (f64, f64),
}

impl Default for RcaConfig {
    fn default() -> Self {
        RcaConfig { iterations: 1000, stop_db: 20.0, resolution_db: 0.01, bracket_db: (-5.0, 15.0) }
    }
}

/// State after running the message passing at one channel SNR.
#[derive(Clone, Debug)]
pub struct RcaState {
    pub s_vc: Vec<f64>,
    pub s_cv: Vec<f64>,
    /// Accumulated reliability per proto column.
    pub q: Vec<f64>,
    /// Per-offset average over spatial positions.
    pub q_bar: Vec<f64>,
    pub zeta_tail: f64,
    pub q_hat: Vec<f64>,
    pub iterations: usize,
    pub success: bool,
}

/// Flattened proto edges of a coupled code.
struct EdgeList {
    row_start: Vec<usize>,
    col: Vec<usize>,
    col_edges: Vec<Vec<usize>>,
}

impl EdgeList {
    fn new(cc: &CoupledCode) -> Self {
        let mut row_start = vec![0];
        let mut col = Vec::new();
        let mut col_edges = vec![Vec::new(); cc.num_cols()];
        for row in &cc.rows {
            for e in row {
                let c = cc.column(e);
                col_edges[c].push(col.len());
                col.push(c);
            }
            row_start.push(col.len());
        }
        EdgeList { row_start, col, col_edges }
    }
}

/// Runs up to `cfg.iterations` RCA iterations at channel SNR `s_ch` (linear
/// Es/N0). `trace` receives `q` after every iteration when given.
pub fn rca_run(
    cc: &CoupledCode,
    s_ch: f64,
    cfg: &RcaConfig,
    mut trace: Option<&mut dyn FnMut(&[f64])>,
) -> RcaState {
    let table = ReciprocalTable::shared();
    let el = EdgeList::new(cc);
    let ne = el.col.len();
    let s0: Vec<f64> = cc.punct_mask.iter().map(|&p| if p { 0.0 } else { s_ch }).collect();
    let stop = 10f64.powf(cfg.stop_db / 10.0);
    let mut s_vc: Vec<f64> = el.col.iter().map(|&c| s0[c]).collect();
    let mut s_cv = vec![0.0; ne];
    let mut recip = vec![0.0; ne];
    let mut q = s0.clone();
    let mut state_iters = 0;
    let mut success = false;
    let mut q_hat = Vec::new();
    let mut q_bar = Vec::new();
    let mut zeta = 0.0;
    for it in 1..=cfg.iterations {
        state_iters = it;
        for e in 0..ne {
            recip[e] = table.eval(s_vc[e]);
        }
        for r in 0..el.row_start.len() - 1 {
            let span = el.row_start[r]..el.row_start[r + 1];
            let total: f64 = recip[span.clone()].iter().sum();
            for e in span {
                s_cv[e] = (total - recip[e]).max(0.0);
            }
        }
        for e in 0..ne {
            recip[e] = table.eval(s_cv[e]);
        }
        let mut delta = 0.0f64;
        for (c, edges) in el.col_edges.iter().enumerate() {
            let total: f64 = edges.iter().map(|&e| recip[e]).sum::<f64>() + s0[c];
            for &e in edges {
                s_vc[e] = (total - recip[e]).max(0.0);
            }
            delta = delta.max((total - q[c]).abs());
            q[c] = total;
        }
        if let Some(f) = trace.as_mut() {
            f(&q);
        }
        (q_bar, zeta, q_hat) = average(cc, &q);
        if q_hat.iter().all(|&x| x > stop) {
            success = true;
            break;
        }
        if delta < 1e-12 {
            break;
        }
    }
    RcaState { s_vc, s_cv, q, q_bar, zeta_tail: zeta, q_hat, iterations: state_iters, success }
}

/// Spatial average per offset, tail mean, and their size-weighted blend.
pub fn average(cc: &CoupledCode, q: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
    let n = cc.profile.shape.cols;
    let l = cc.length;
    let body = l * n;
    let tail = q.len() - body;
    let q_bar: Vec<f64> = (0..n)
        .map(|v| (0..l).map(|p| q[p * n + v]).sum::<f64>() / l as f64)
        .collect();
    let zeta = if tail > 0 { q[body..].iter().sum::<f64>() / tail as f64 } else { 0.0 };
    let a = body as f64 / q.len() as f64;
    let b = tail as f64 / q.len() as f64;
    let q_hat = q_bar.iter().map(|&x| a * x + b * zeta).collect();
    (q_bar, zeta, q_hat)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub rate: f64,
    /// Rate as an exact fraction, e.g. `220/253`.
    pub rate_fraction: String,
    pub threshold_db: f64,
    /// Distance to the binary-input AWGN Shannon limit at this rate.
    pub gap_db: f64,
    pub iterations_used: usize,
}

/// Eb/N0 in dB at which the binary-input AWGN capacity equals `rate`.
pub fn shannon_limit_db(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Numeric(format!("rate {rate} must lie in (0, 1)")));
    }
    let excess = |db: f64| -> Result<f64> { Ok(capacity(rate * 10f64.powf(db / 10.0))? - rate) };
    let (mut lo, mut hi) = (-1.6, 20.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rate of the coupled code counting punctured columns as not sent.
pub fn coupled_rate(cc: &CoupledCode) -> Result<num_rational::Ratio<i64>> {
    let s = cc.profile.shape;
    crate::profile::code_rate(&s, cc.length, s.rows, s.cols)
}

/// Success of RCA at a given Eb/N0.
pub fn succeeds_at(cc: &CoupledCode, ebn0_db: f64, rate: f64, cfg: &RcaConfig) -> RcaState {
    let s = rate * 10f64.powf(ebn0_db / 10.0);
    rca_run(cc, s, cfg, None)
}

/// Smallest Eb/N0 (to `cfg.resolution_db`) at which RCA succeeds.
pub fn rca_threshold(cc: &CoupledCode, cfg: &RcaConfig) -> Result<ThresholdReport> {
    let ratio = coupled_rate(cc)?;
    let rate = *ratio.numer() as f64 / *ratio.denom() as f64;
    let (mut lo, mut hi) = cfg.bracket_db;
    let top = succeeds_at(cc, hi, rate, cfg);
    if !top.success {
        return Err(Error::Numeric(format!(
            "RCA does not succeed at the upper bracket {hi} dB within {} iterations",
            cfg.iterations
        )));
    }
    if succeeds_at(cc, lo, rate, cfg).success {
        return Err(Error::Numeric(format!("RCA already succeeds at the lower bracket {lo} dB")));
    }
    let mut iterations = top.iterations;
    while hi - lo > cfg.resolution_db {
        let mid = 0.5 * (lo + hi);
        let st = succeeds_at(cc, mid, rate, cfg);
        if st.success {
            hi = mid;
            iterations = st.iterations;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdReport {
        rate,
        rate_fraction: format!("{}/{}", ratio.numer(), ratio.denom()),
        threshold_db: hi,
        gap_db: hi - shannon_limit_db(rate)?,
        iterations_used: iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_rule_integrates_polynomials() {
        let (x, w) = gauss_hermite(64);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| x * x * w).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-12);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn shannon_limits() {
        // published binary-input AWGN limits
        for (rate, db) in [(0.5, 0.187), (1.0 / 3.0, -0.495), (0.75, 1.626)] {
            let x = shannon_limit_db(rate).unwrap();
            assert!((x - db).abs() < 0.005, "rate {rate}: {x}");
        }
        assert!(shannon_limit_db(1.0).is_err());
    }

    #[test]
    fn capacity_basics() {
        assert_eq!(capacity(0.0).unwrap(), 0.0);
        assert!(capacity(-1.0).is_err());
        let grid: Vec<f64> = (1..=100).map(|i| 0.001 * 1.1f64.powi(i)).collect();
        let cs: Vec<f64> = grid.iter().map(|&s| capacity(s).unwrap()).collect();
        assert!(cs.windows(2).all(|w| w[1] > w[0]));
        assert!((capacity(1.0).unwrap() - 0.72145).abs() < 1e-4);
        assert!((capacity(1e-9).unwrap() * LN_2 / 1e-9 - 1.0).abs() < 1e-6);
        assert!(capacity(60.0).unwrap() > 1.0 - 1e-12);
        for s in [0.01, 0.3, 1.0, 3.0] {
            assert!((capacity(s).unwrap() + capacity_gap(s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_fixed_point_and_involution() {
        // C(s*) = 1/2 by bisection
        let (mut lo, mut hi) = (0.01f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if capacity(mid).unwrap() < 0.5 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let r = reciprocal_energy(lo).unwrap();
        assert!((r - lo).abs() < 1e-7, "{r} vs {lo}");
        assert_eq!(reciprocal_energy(0.0).unwrap(), DEFAULT_SNR_MAX);
        let mut x = 0.0123f64;
        for _ in 0..100 {
            x = (x * 7.77).fract() * 20.0 + 1e-3;
            let back = reciprocal_energy(reciprocal_energy(x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-6 * x.max(1.0), "{x} -> {back}");
        }
    }

    #[test]
    fn table_tracks_direct_evaluation() {
        let t = ReciprocalTable::shared();
        for i in 0..200 {
            let s = 1e-10 * 1.15f64.powi(i);
            if s > 120.0 {
                break;
            }
            let exact = reciprocal_energy(s).unwrap();
            let approx = t.eval(s);
            let tol = 1e-6 * exact.max(1e-3);
            assert!((approx - exact).abs() < tol, "s={s}: {approx} vs {exact}");
        }
        assert_eq!(t.eval(0.0), DEFAULT_SNR_MAX);
    }

    #[test]
    fn table_is_strictly_decreasing() {
        let t = ReciprocalTable::shared();
        let vals: Vec<f64> = (0..4000).map(|i| t.eval(1e-14 * 1.01f64.powi(i))).collect();
        for (i, w) in vals.windows(2).enumerate() {
            assert!(w[1] < w[0] || w[1] == 0.0, "at s={}: {} then {}", 1e-14 * 1.01f64.powi(i as i32), w[0], w[1]);
        }
    }
}

