//! Request/response operations shared by the HTTP server and the CLI.
//!
//! Profiles travel as canonical profile text. Every handler is synchronous
//! and may run for a long time; callers decide where to run it.

use crate::codec::Encoder;
use crate::coupled::CoupledCode;
use crate::designer::{design, lift_with_fallback, DesignConfig, DesignLog, LiftReport};
use crate::golden::{example_checks, rate_checks, GoldenCheck};
use crate::graph::ace::{ace_spectrum, AceSpectrum};
use crate::graph::counting::count_all;
use crate::graph::{optimize_spreading, CountOptions, Move, UnifiedGraph};
use crate::profile::{CodeProfile, Shape, Violation};
use crate::rca::{rca_threshold, RcaConfig, ThresholdReport};
use crate::sim::{fer_csv, harq_csv, max_punctured_per_row, run_fer, run_harq, FerReport, HarqConfig, HarqReport, SimConfig};
use crate::{profile_io, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Error body returned by every failing operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::Structure(_) => "structure",
            Error::Parameter(_) => "parameter",
            Error::Parse { .. } => "parse",
            Error::Counting(_) => "counting",
            Error::Numeric(_) => "numeric",
            Error::Design(_) => "design",
            Error::Decoder(_) => "decoder",
            Error::Internal(_) => "internal",
        };
        ErrorBody { kind: kind.into(), message: e.to_string() }
    }
}

fn parse(profile: &str) -> Result<CodeProfile> {
    profile_io::from_text(profile)
}

fn pruned(p: &CodeProfile, pruning: Option<usize>) -> Result<CodeProfile> {
    match pruning {
        Some(m) => p.prune(m),
        None => Ok(p.clone()),
    }
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignRequest {
    pub config: DesignConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DesignResponse {
    pub profile: String,
    pub log: DesignLog,
}

pub fn handle_design(req: &DesignRequest) -> Result<DesignResponse> {
    let (p, log) = design(&req.config)?;
    Ok(DesignResponse { profile: profile_io::to_text(&p), log })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftRequest {
    pub profile: String,
    pub lifting: usize,
    pub girth: usize,
    /// Lowest girth accepted; equal to `girth` makes the target strict.
    pub min_girth: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LiftRequest {
    fn default() -> Self {
        LiftRequest { profile: String::new(), lifting: 39, girth: 8, min_girth: 8, restarts: 20, seed: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftResponse {
    pub profile: String,
    pub report: LiftReport,
}

pub fn handle_lift(req: &LiftRequest) -> Result<LiftResponse> {
    let p = parse(&req.profile)?;
    if req.min_girth > req.girth {
        return Err(Error::param("min_girth exceeds girth"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let (q, report) = lift_with_fallback(&p, req.lifting, req.girth, req.min_girth, req.restarts, &mut rng)?;
    Ok(LiftResponse { profile: profile_io::to_text(&q), report })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeRequest {
    pub length: usize,
    pub budget: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeRequest {
    pub profile: String,
    /// Longest cycle length counted.
    pub max_len: usize,
    /// Worst variable nodes listed per length.
    pub top: usize,
    /// Run the spreading optimizer first and report its moves.
    pub optimize: Option<OptimizeRequest>,
}

impl Default for AnalyzeRequest {
    fn default() -> Self {
        AnalyzeRequest { profile: String::new(), max_len: 8, top: 5, optimize: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCount {
    pub length: usize,
    /// Closed non-backtracking walks summed over variable nodes.
    pub walks: u64,
    /// Surviving cycles per replica; only exact below twice the shortest
    /// surviving cycle, `None` beyond, where walks may repeat a shorter
    /// cycle.
    pub total: Option<u64>,
    /// `(variable, walks through it)`, most first.
    pub worst: Vec<(usize, u64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeResponse {
    pub edges: usize,
    pub cycles: Vec<CycleCount>,
    pub ace: AceSpectrum,
    pub moves: Vec<Move>,
    /// Profile after optimization, when requested.
    pub profile: Option<String>,
}

pub fn handle_analyze(req: &AnalyzeRequest) -> Result<AnalyzeResponse> {
    if req.max_len < 4 || !req.max_len.is_multiple_of(2) {
        return Err(Error::param("max_len must be even and at least 4"));
    }
    let p = parse(&req.profile)?;
    let mut g = UnifiedGraph::from_profile(&p)?;
    let opts = CountOptions::default();
    let mut moves = Vec::new();
    let mut out_profile = None;
    if let Some(o) = &req.optimize {
        let (h, m) = optimize_spreading(&g, o.length, o.budget, &opts)?;
        g = h;
        moves = m;
        let q = CodeProfile { spread: g.spread_matrix(), ..p.clone() };
        out_profile = Some(profile_io::to_text(&q));
    }
    let mut cycles = Vec::new();
    let mut shortest = None;
    for l in (4..=req.max_len).step_by(2) {
        let polys = count_all(&g, l, &opts)?;
        let per_var: Vec<u64> = polys.iter().map(|q| q.cycles()).collect();
        let sum: u64 = per_var.iter().sum();
        let exact = shortest.is_none_or(|s| l < 2 * s);
        let total = if exact {
            if !sum.is_multiple_of(l as u64 / 2) {
                return Err(Error::Counting(format!("per-node {l}-cycle counts sum to {sum}")));
            }
            Some(sum / (l as u64 / 2))
        } else {
            None
        };
        if sum > 0 && shortest.is_none() {
            shortest = Some(l);
        }
        let mut worst: Vec<(usize, u64)> = per_var.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
        worst.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        worst.truncate(req.top);
        cycles.push(CycleCount { length: l, walks: sum, total, worst });
    }
    let ace = ace_spectrum(&g, req.max_len);
    Ok(AnalyzeResponse { edges: g.edges().len(), cycles, ace, moves, profile: out_profile })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdRequest {
    pub profile: String,
    pub length: usize,
    pub pruning: Option<usize>,
    /// Treat every column as transmitted.
    pub unpunctured: bool,
    pub rca: RcaConfig,
}

impl Default for ThresholdRequest {
    fn default() -> Self {
        ThresholdRequest { profile: String::new(), length: 10, pruning: None, unpunctured: false, rca: RcaConfig::default() }
    }
}

pub fn handle_threshold(req: &ThresholdRequest) -> Result<ThresholdReport> {
    let mut p = pruned(&parse(&req.profile)?, req.pruning)?;
    if req.unpunctured {
        p.shape = Shape { punctured: 0, ..p.shape };
    }
    rca_threshold(&CoupledCode::new(&p, req.length)?, &req.rca)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeRequest {
    pub profile: String,
    pub length: usize,
    pub pruning: Option<usize>,
    /// Information bits as a `0`/`1` string; random from `seed` when absent.
    pub info: Option<String>,
    pub seed: u64,
}

impl Default for EncodeRequest {
    fn default() -> Self {
        EncodeRequest { profile: String::new(), length: 10, pruning: None, info: None, seed: 1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EncodeResponse {
    pub info: String,
    /// Every bit of the frame, punctured ones included.
    pub codeword: String,
    /// Bits sent over the channel, in order.
    pub transmitted: String,
    pub syndrome_zero: bool,
}

pub fn handle_encode(req: &EncodeRequest) -> Result<EncodeResponse> {
    let p = pruned(&parse(&req.profile)?, req.pruning)?;
    let cc = CoupledCode::new(&p, req.length)?;
    let enc = Encoder::new(&cc)?;
    let info: Vec<u8> = match &req.info {
        Some(s) => s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::param(format!("information bit '{c}' is not 0 or 1"))),
            })
            .collect::<Result<_>>()?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
            (0..enc.info_len()).map(|_| u8::from(rng.random::<bool>())).collect()
        }
    };
    let word = enc.encode(&info)?;
    let map = cc.puncture_map()?;
    let sent: Vec<u8> = map.transmit.iter().map(|&i| word[i]).collect();
    Ok(EncodeResponse {
        info: bit_string(&info),
        syndrome_zero: cc.lift()?.is_codeword(&word),
        codeword: bit_string(&word),
        transmitted: bit_string(&sent),
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateRequest {
    pub profile: String,
    pub config: SimConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateResponse {
    pub report: FerReport,
    pub csv: String,
}

pub fn handle_simulate(req: &SimulateRequest) -> Result<SimulateResponse> {
    let report = run_fer(&parse(&req.profile)?, &req.config)?;
    Ok(SimulateResponse { csv: fer_csv(&report), report })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarqRequest {
    pub profile: String,
    pub config: HarqConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HarqResponse {
    pub report: HarqReport,
    pub csv: String,
}

pub fn handle_harq(req: &HarqRequest) -> Result<HarqResponse> {
    let report = run_harq(&parse(&req.profile)?, &req.config)?;
    Ok(HarqResponse { csv: harq_csv(&report), report })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateRequest {
    pub profile: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidateResponse {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub messages: Vec<String>,
}

pub fn handle_validate(req: &ValidateRequest) -> Result<ValidateResponse> {
    let violations = parse(&req.profile)?.validate();
    Ok(ValidateResponse {
        valid: violations.is_empty(),
        messages: violations.iter().map(ToString::to_string).collect(),
        violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReproTarget {
    /// Cycle counts and reallocation choices on the example graph.
    Fig4,
    /// Rates and transmitted lengths of the design family.
    Rates,
    /// ACE bounds and puncturing structure of a supplied profile.
    Profile,
    All,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproRequest {
    pub target: ReproTarget,
    /// Needed by the profile checks.
    #[serde(default)]
    pub profile: Option<String>,
    #[serde(default = "default_length")]
    pub length: usize,
}

fn default_length() -> usize {
    crate::golden::DESIGN_LENGTH
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproResponse {
    pub checks: Vec<GoldenCheck>,
    pub pass: bool,
}

/// ACE and puncturing checks on a design profile: 4-cycles at least 6,
/// longer cycles up to 8 at least 12, one punctured column per coupled row.
pub fn profile_checks(p: &CodeProfile, length: usize) -> Result<Vec<GoldenCheck>> {
    let g = UnifiedGraph::from_profile(&CodeProfile { shape: Shape { lifting: 0, ..p.shape }, ..p.clone() })?;
    let ace = ace_spectrum(&g, 8);
    let show = |l: usize| ace.get(l).map_or("none".to_string(), |v| v.to_string());
    let at_least = |l: usize, b: u32| ace.get(l).is_none_or(|v| v >= b);
    let cc = CoupledCode::new(p, length)?;
    let check = |name: &str, pass: bool, expected: &str, actual: String| GoldenCheck {
        name: name.into(),
        expected: expected.into(),
        actual,
        pass,
    };
    Ok(vec![
        check("min ACE of 4-cycles", at_least(4, 6), ">= 6", show(4)),
        check("min ACE of 6-cycles", at_least(6, 12), ">= 12", show(6)),
        check("min ACE of 8-cycles", at_least(8, 12), ">= 12", show(8)),
        check("punctured columns per coupled row", max_punctured_per_row(&cc) <= 1, "<= 1", max_punctured_per_row(&cc).to_string()),
        check("structural violations", p.validate().is_empty(), "0", p.validate().len().to_string()),
    ])
}

pub fn handle_repro(req: &ReproRequest) -> Result<ReproResponse> {
    let mut checks = Vec::new();
    if matches!(req.target, ReproTarget::Fig4 | ReproTarget::All) {
        checks.extend(example_checks()?);
    }
    if matches!(req.target, ReproTarget::Rates | ReproTarget::All) {
        checks.extend(rate_checks()?);
    }
    if matches!(req.target, ReproTarget::Profile | ReproTarget::All) {
        match &req.profile {
            Some(text) => checks.extend(profile_checks(&parse(text)?, req.length)?),
            None if req.target == ReproTarget::Profile => {
                return Err(Error::param("profile checks need a profile"));
            }
            None => {}
        }
    }
    Ok(ReproResponse { pass: checks.iter().all(|c| c.pass), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repro_example_passes() {
        let r = handle_repro(&ReproRequest { target: ReproTarget::Fig4, profile: None, length: 10 }).unwrap();
        assert!(r.pass);
        assert_eq!(r.checks.len(), 6);
    }

    #[test]
    fn error_kinds_are_stable() {
        assert_eq!(ErrorBody::from(&Error::param("x")).kind, "parameter");
        assert_eq!(ErrorBody::from(&Error::Parse { line: 2, msg: "y".into() }).kind, "parse");
    }

    #[test]
    fn unknown_request_keys_rejected() {
        let r: std::result::Result<ValidateRequest, _> = serde_json::from_str(r#"{"profile":"","extra":1}"#);
        assert!(r.is_err());
    }
}
