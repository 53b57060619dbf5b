//! `esrl`: command-line client of the workbench service.
//!
//! Every subcommand reads an optional TOML config, applies `--set key=value`
//! overrides, and sends the request to the server given by `--server`, or to
//! an in-process server when none is given. Exit codes: 0 success, 1 the
//! operation failed, 2 bad usage or config.

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use esrl_client::{Client, ClientError};
use esrl_core::designer::DesignConfig;
use esrl_core::service::*;
use esrl_core::sim::{HarqConfig, SimConfig};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "esrl", version, about = "ESRL spatially-coupled LDPC workbench")]
struct Cli {
    /// Service URL; an in-process server is started when absent.
    #[arg(long, global = true)]
    server: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Settings {
    /// TOML file with the keys listed below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set decoder.max_iter=10`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a profile from a design config.
    Design {
        #[command(flatten)]
        settings: Settings,
        /// Profile output path.
        #[arg(long)]
        out: PathBuf,
        /// Design log output path (JSON).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Assign circulant shifts to a profile.
    Lift {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Lifted profile output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Cycle counts, worst nodes, ACE spectrum and optional optimization.
    Analyze {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// JSON output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled RCA threshold.
    Threshold {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode one frame.
    Encode {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame error rate sweep; writes CSV plus a JSON sidecar.
    Simulate {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// CSV output path; the sidecar goes to `<out>.json`.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// IR-HARQ system rate; writes CSV plus a JSON sidecar.
    Harq {
        #[command(flatten)]
        settings: Settings,
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check the structural invariants of a profile.
    Validate {
        /// Profile file.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Run the reference checks and print one line per check.
    Repro {
        target: Target,
        /// Profile for the `profile` and `all` targets.
        /// Profile file; overrides the `profile` config key.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Coupling length for the profile checks.
        #[arg(long, default_value_t = 10)]
        length: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Fig4,
    Rates,
    Profile,
    All,
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Request(b) => Failure::Usage(b.message),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn flatten(prefix: &str, t: &Table, out: &mut Vec<String>) {
    for (k, v) in t {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(inner) if !inner.contains_key("kind") => flatten(&key, inner, out),
            _ => out.push(format!("  {key} = {v}")),
        }
    }
}

/// Accepted keys with defaults, from a default value plus optional keys.
fn keys<T: Serialize>(default: &T, extra: &[&str]) -> String {
    let mut lines = Vec::new();
    if let Ok(Value::Table(t)) = Value::try_from(default) {
        flatten("", &t, &mut lines);
    }
    lines.extend(extra.iter().map(|e| format!("  {e}")));
    format!("Config keys (defaults shown):\n{}", lines.join("\n"))
}

fn help_for(name: &str) -> Option<String> {
    let profile = "profile = <path>  (or --profile)";
    let strip = |mut t: String| {
        t = t.replace("  profile = \"\"\n", "");
        t
    };
    Some(match name {
        "design" => keys(&DesignConfig::default(), &[]),
        "lift" => strip(keys(&LiftRequest::default(), &[profile])),
        "analyze" => strip(keys(&AnalyzeRequest::default(), &[profile, "optimize.length = <even length>", "optimize.budget = <moves>"])),
        "threshold" => strip(keys(&ThresholdRequest::default(), &[profile, "pruning = <rows>"])),
        "encode" => strip(keys(&EncodeRequest::default(), &[profile, "pruning = <rows>", "info = \"<0/1 string>\""])),
        "simulate" => keys(
            &SimConfig::default(),
            &[profile, "pruning = <rows>", "decoder.window = [<W>, <S>]", "workers = 1  (or --workers)"],
        ),
        "harq" => keys(&HarqConfig::default(), &[profile, "decoder.window = [<W>, <S>]", "workers = 1  (or --workers)"]),
        _ => return None,
    })
}

fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(t: &mut Table, key: &str, value: Value) -> Outcome<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Failure::Usage(format!("empty key in '{key}'")))?;
    let mut cur = t;
    for p in parts {
        cur = match cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(inner) => inner,
            _ => return Err(Failure::Usage(format!("'{p}' in '{key}' is not a section"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn load_table(s: &Settings) -> Outcome<Table> {
    let mut t = match &s.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?
            .parse::<Table>()
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => Table::new(),
    };
    for kv in &s.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("'{kv}' is not KEY=VALUE")))?;
        set_path(&mut t, k.trim(), parse_value(v.trim()))?;
    }
    Ok(t)
}

/// Removes the `profile` path key; the flag wins over the file.
fn take_profile(t: &mut Table, flag: &Option<PathBuf>) -> Outcome<Option<String>> {
    let key = match t.remove("profile") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(_) => return Err(Failure::Usage("profile must be a path string".into())),
        None => None,
    };
    match flag.clone().or(key) {
        Some(p) => std::fs::read_to_string(&p)
            .map(Some)
            .map_err(|e| Failure::Usage(format!("cannot read profile {}: {e}", p.display()))),
        None => Ok(None),
    }
}

fn require_profile(t: &mut Table, flag: &Option<PathBuf>) -> Outcome<String> {
    take_profile(t, flag)?.ok_or_else(|| Failure::Usage("a profile is required (--profile or profile key)".into()))
}

fn typed<T: DeserializeOwned>(t: Table) -> Outcome<T> {
    Value::Table(t).try_into().map_err(|e: toml::de::Error| Failure::Usage(format!("config: {}", e.message())))
}

/// Request type built from the table with the profile text inserted.
fn request<T: DeserializeOwned>(mut t: Table, profile: String) -> Outcome<T> {
    t.insert("profile".into(), Value::String(profile));
    typed(t)
}

/// Writes `data` next to `path` and renames it into place.
fn write_atomic(path: &Path, data: &[u8]) -> Outcome<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| Failure::Domain(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(data).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("response serializes") + "\n"
}

fn emit<T: Serialize>(v: &T, out: &Option<PathBuf>) -> Outcome<()> {
    match out {
        Some(p) => write_atomic(p, json(v).as_bytes()),
        None => {
            print!("{}", json(v));
            Ok(())
        }
    }
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

async fn dispatch(client: &Client, cmd: Cmd) -> Outcome<()> {
    match cmd {
        Cmd::Design { settings, out, log } => {
            let cfg: DesignConfig = typed(load_table(&settings)?)?;
            let resp = client.design(&cfg).await?;
            write_atomic(&out, resp.profile.as_bytes())?;
            if let Some(l) = log {
                write_atomic(&l, json(&resp.log).as_bytes())?;
            }
            if let Some(r) = &resp.log.lift {
                eprintln!("lifted at Z={} with girth {} (target {})", r.lifting, r.girth, r.target_girth);
            }
        }
        Cmd::Lift { settings, profile, out } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            let resp = client.lift(&request(t, text)?).await?;
            write_atomic(&out, resp.profile.as_bytes())?;
            print!("{}", json(&resp.report));
        }
        Cmd::Analyze { settings, profile, out } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            emit(&client.analyze(&request(t, text)?).await?, &out)?;
        }
        Cmd::Threshold { settings, profile, out } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            emit(&client.threshold(&request(t, text)?).await?, &out)?;
        }
        Cmd::Encode { settings, profile, out } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            emit(&client.encode(&request(t, text)?).await?, &out)?;
        }
        Cmd::Simulate { settings, profile, out, workers } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            let mut config: SimConfig = typed(t)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let resp = client.simulate(&SimulateRequest { profile: text, config }).await?;
            write_atomic(&sidecar(&out), json(&resp.report).as_bytes())?;
            write_atomic(&out, resp.csv.as_bytes())?;
            for p in &resp.report.points {
                println!("Eb/N0 {:>6.2} dB  FER {:.3e}  ({} / {} frames)", p.ebn0_db, p.fer, p.frame_errors, p.frames);
            }
        }
        Cmd::Harq { settings, profile, out, workers } => {
            let mut t = load_table(&settings)?;
            let text = require_profile(&mut t, &profile)?;
            let mut config: HarqConfig = typed(t)?;
            if let Some(w) = workers {
                config.workers = w;
            }
            let resp = client.harq(&HarqRequest { profile: text, config }).await?;
            write_atomic(&sidecar(&out), json(&resp.report).as_bytes())?;
            write_atomic(&out, resp.csv.as_bytes())?;
            for p in &resp.report.points {
                println!("Eb/N0 {:>6.2} dB  system rate {:.4}  residual FER {:.3e}", p.ebn0_db, p.system_rate, p.residual_fer);
            }
        }
        Cmd::Validate { profile } => {
            let text = take_profile(&mut Table::new(), &Some(profile))?.expect("flag given");
            let resp = client.validate(&ValidateRequest { profile: text }).await?;
            if !resp.valid {
                for m in &resp.messages {
                    println!("violation: {m}");
                }
                return Err(Failure::Domain(format!("{} violations", resp.messages.len())));
            }
            println!("valid");
        }
        Cmd::Repro { target, profile, length } => {
            let target = match target {
                Target::Fig4 => ReproTarget::Fig4,
                Target::Rates => ReproTarget::Rates,
                Target::Profile => ReproTarget::Profile,
                Target::All => ReproTarget::All,
            };
            let profile = take_profile(&mut Table::new(), &profile)?;
            let resp = client.repro(&ReproRequest { target, profile, length }).await?;
            for c in &resp.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {}: expected {}, got {}", c.name, c.expected, c.actual);
            }
            if !resp.pass {
                return Err(Failure::Domain("some checks failed".into()));
            }
        }
    }
    Ok(())
}

async fn connect(server: Option<String>) -> Outcome<Client> {
    if let Some(url) = server {
        return Ok(Client::new(url));
    }
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| Failure::Domain(format!("cannot start the embedded server: {e}")))?;
    let addr = listener.local_addr().map_err(|e| Failure::Domain(e.to_string()))?;
    tokio::spawn(esrl_server::serve(listener));
    Ok(Client::new(format!("http://{addr}")))
}

fn main() -> ExitCode {
    let mut cmd = Cli::command();
    for name in esrl_server::OPERATIONS {
        if let Some(h) = help_for(name) {
            cmd = cmd.mut_subcommand(name, |c| c.after_help(h));
        }
    }
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return ExitCode::from(1);
        }
    };
    let result = rt.block_on(async {
        let client = connect(cli.server).await?;
        dispatch(&client, cli.cmd).await
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
