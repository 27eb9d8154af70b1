//! `riskweave`: train, evaluate, explain and serve interpretable risk models.
//!
//! Exit codes: 0 success, 1 domain error (one `error: Code: detail` line on
//! stderr), 2 usage error.

use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use riskweave::api::{self, ApiError};
use riskweave::cycles::{predict_curve, records_from_csv, records_to_csv, synthesize_ivf, FitConfig};
use riskweave::metrics::scored_predictions;
use riskweave::narrate::{format_number, Lexicon, TemplateStore};
use riskweave::tabular::{infer_schema, parse_csv, parse_schema_text, schema_to_text, synthesize_chd_like_with, to_csv, SynthConfig};
use riskweave::{evaluate, reliability, Artifact, ModelEnvelope, Narrator, Schema, TrainParams, VerbalMap};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "riskweave", version, about = "Interpretable risk models with communicated uncertainty")]
struct Cli {
    /// Print results as JSON (the same documents the HTTP service returns).
    #[arg(long, global = true)]
    json: bool,
    /// TOML file with `verbal_map`, `templates`, `lexicon`, `storage_root`, `port`, `bind`.
    #[arg(long, global = true, env = "RISKWEAVE_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    /// Coronary-heart-disease-like cohort with planted rules.
    Chd,
    /// Person-period records of repeated IVF cycles.
    Ivf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long, value_enum, default_value = "chd")]
        kind: SynthKind,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Rows (chd) or minimum person-period records (ivf).
        #[arg(long, default_value_t = 2279)]
        n: usize,
        /// Label-flip probability (chd only).
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the schema here: JSON for a `.json` path, the text format otherwise.
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Train a decision tree on a CSV with a seeded held-out split.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Schema file (text format or JSON); inferred from the CSV when omitted.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = riskweave::artifact::DEFAULT_TEST_FRACTION)]
        test_fraction: f64,
        #[arg(long, default_value_t = TrainParams::default().max_depth)]
        max_depth: usize,
        #[arg(long, default_value_t = TrainParams::default().min_samples_leaf)]
        min_samples_leaf: usize,
        #[arg(long, default_value_t = 0.0)]
        min_impurity_decrease: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Confusion matrix and headline metrics of a tree on a labelled CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Predicted label, leaf confidence and certainty phrase for one record.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// JSON object of feature values.
        #[arg(long)]
        input: PathBuf,
    },
    /// Plain-language explanation of one prediction.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Smallest change to the record that yields the target label.
    Whatif {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the label the record is not currently predicted as.
        #[arg(long)]
        target: Option<String>,
    },
    /// Which asserted attributes the model does and does not take into account.
    Coverage {
        #[arg(long)]
        model: PathBuf,
        #[arg(required = true)]
        attributes: Vec<String>,
    },
    /// Fit the discrete-time cycle model on person-period records.
    CyclesFit {
        /// CSV with the schema's features, a `Cycle` column and the outcome.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long, default_value_t = FitConfig::default().max_cycles)]
        max_cycles: usize,
        #[arg(long, default_value_t = FitConfig::default().lambda)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Conditional and cumulative success curve for one record.
    CyclesPredict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the number of cycles the model was fitted on.
        #[arg(long)]
        n_cycles: Option<usize>,
        /// Emit `cycle,conditional_p,cumulative_p` CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Reliability-diagram data (CSV) of a tree on a labelled CSV.
    Reliability {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "RISKWEAVE_PORT")]
        port: Option<u16>,
        /// Defaults to loopback; the service has no authentication.
        #[arg(long, env = "RISKWEAVE_BIND")]
        bind: Option<IpAddr>,
        #[arg(long, env = "RISKWEAVE_STORAGE_ROOT")]
        storage_root: Option<PathBuf>,
        #[arg(long, env = "RISKWEAVE_VERBAL_MAP")]
        verbal_map: Option<PathBuf>,
        #[arg(long, env = "RISKWEAVE_TEMPLATES")]
        templates: Option<PathBuf>,
        #[arg(long, env = "RISKWEAVE_LEXICON")]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    verbal_map: Option<PathBuf>,
    templates: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    storage_root: Option<PathBuf>,
    port: Option<u16>,
    bind: Option<IpAddr>,
}

fn io_error(path: &Path, e: std::io::Error) -> ApiError {
    ApiError::new("Io", format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), ApiError> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Paths inside the config file are relative to the file itself.
fn load_config(path: Option<&Path>) -> Result<FileConfig, ApiError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let mut config: FileConfig =
        toml::from_str(&read(path)?).map_err(|e| ApiError::new("InvalidConfig", format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    for p in [&mut config.verbal_map, &mut config.templates, &mut config.lexicon, &mut config.storage_root]
        .into_iter()
        .flatten()
    {
        *p = base.join(&*p);
    }
    Ok(config)
}

fn load_narrator(config: &FileConfig) -> Result<Narrator, ApiError> {
    let mut n = Narrator::default();
    if let Some(p) = &config.verbal_map {
        n.map = VerbalMap::from_json(&read(p)?)?;
    }
    if let Some(p) = &config.templates {
        n.templates = TemplateStore::from_json(&read(p)?)?;
    }
    if let Some(p) = &config.lexicon {
        n.lexicon = Lexicon::from_json(&read(p)?)?;
    }
    Ok(n)
}

fn is_json(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("json")
}

/// JSON schema documents by extension, the text format otherwise.
fn load_schema(path: &Path) -> Result<Schema, ApiError> {
    let text = read(path)?;
    if is_json(path) {
        serde_json::from_str(&text).map_err(|e| ApiError::new("InvalidSchema", e.to_string()))
    } else {
        Ok(parse_schema_text(&text)?)
    }
}

fn load_model(path: &Path) -> Result<ModelEnvelope, ApiError> {
    Ok(ModelEnvelope::from_json(&read(path)?)?)
}

fn load_input(path: &Path) -> Result<serde_json::Value, ApiError> {
    serde_json::from_str(&read(path)?).map_err(|e| ApiError::new("InvalidJson", format!("{}: {e}", path.display())))
}

fn tree_model(model: &ModelEnvelope) -> Result<&riskweave::DecisionTree, ApiError> {
    match &model.artifact {
        Artifact::Tree(t) => Ok(t),
        Artifact::Cycles(_) => Err(ApiError::new("WrongModelKind", "this command needs a decision-tree model")),
    }
}

fn fmt_value(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), format_number),
        other => other.to_string(),
    }
}

fn fmt_list(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".into()
    } else {
        items.join(", ")
    }
}

fn fmt_p(p: f64) -> String {
    if p > 0.0 && p < 1e-3 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |x| format!("{x:.4}"))
}

/// What a command produced: a JSON document and its human rendering.
struct Output {
    json: serde_json::Value,
    text: String,
}

impl Output {
    fn new(body: &impl Serialize, text: impl Into<String>) -> Self {
        Self {
            json: serde_json::to_value(body).expect("output serializes"),
            text: text.into(),
        }
    }
}

fn run(cli: Cli) -> Result<Option<Output>, ApiError> {
    let config = load_config(cli.config.as_deref())?;
    let narrator = load_narrator(&config)?;
    let out = match cli.command {
        Command::Synth {
            kind,
            seed,
            n,
            noise,
            out,
            schema_out,
        } => {
            let (schema, csv, rows) = match kind {
                SynthKind::Chd => {
                    let d = synthesize_chd_like_with(SynthConfig { seed, n, noise })?.dataset;
                    (d.schema.clone(), to_csv(&d), d.len())
                }
                SynthKind::Ivf => {
                    let d = synthesize_ivf(seed, n)?;
                    let schema = d.true_model.schema.clone();
                    let csv = records_to_csv(&d.records, &schema)?;
                    (schema, csv, d.records.len())
                }
            };
            if let Some(p) = &schema_out {
                let text = if is_json(p) {
                    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
                } else {
                    schema_to_text(&schema)
                };
                write(p, &text)?;
            }
            match &out {
                Some(p) => {
                    write(p, &csv)?;
                    let body = serde_json::json!({ "rows": rows, "out": p });
                    Output::new(&body, format!("wrote {rows} rows to {}\n", p.display()))
                }
                None => Output::new(&serde_json::json!({ "csv": csv }), csv),
            }
        }
        Command::Train {
            data,
            schema,
            seed,
            test_fraction,
            max_depth,
            min_samples_leaf,
            min_impurity_decrease,
            out,
        } => {
            let text = read(&data)?;
            let schema = match &schema {
                Some(p) => load_schema(p)?,
                None => infer_schema(&text)?,
            };
            let dataset = parse_csv(&text, &schema)?;
            let params = TrainParams {
                max_depth,
                min_samples_leaf,
                min_impurity_decrease,
            };
            let model = ModelEnvelope::train_tree(&dataset, params, test_fraction, seed)?;
            write(&out, &model.to_json())?;
            let body = api::TrainResponse::new(out.display().to_string(), &model);
            let text = format!(
                "model written to {}\naccuracy: {} on {} held-out rows ({} training rows)\n",
                out.display(),
                fmt_opt(model.accuracy),
                model.test_size,
                model.train_size
            );
            Output::new(&body, text)
        }
        Command::Evaluate { model, data } => {
            let model = load_model(&model)?;
            let tree = tree_model(&model)?;
            let test = parse_csv(&read(&data)?, &tree.schema)?;
            let cm = evaluate(tree, &test)?;
            let s = cm.summary();
            let text = format!(
                "rows: {}\ntp: {}  fp: {}  tn: {}  fn: {}\naccuracy: {}\nrecall: {}\nprecision: {}\nfalse negative rate: {}\nfalse omission rate: {}\n",
                cm.total(),
                cm.tp,
                cm.fp,
                cm.tn,
                cm.fn_,
                fmt_opt(s.accuracy),
                fmt_opt(s.recall),
                fmt_opt(s.precision),
                fmt_opt(s.false_negative_rate),
                fmt_opt(s.false_omission_rate)
            );
            Output::new(&serde_json::json!({ "confusion_matrix": cm, "metrics": s }), text)
        }
        Command::Predict { model, input } => {
            let model = load_model(&model)?;
            let x = api::parse_instance(model.schema(), &load_input(&input)?)?;
            let r = api::predict_response(&model, &x, &narrator)?;
            let path: Vec<String> = r.path.iter().map(ToString::to_string).collect();
            let text = format!(
                "label: {}\ncertainty: {}\nconfidence p: {}\nsamples: {}\npath: {}\n",
                r.label,
                r.certainty_phrase,
                fmt_p(r.confidence_p),
                r.samples,
                if path.is_empty() { "(root)".into() } else { path.join("; ") }
            );
            Output::new(&r, text)
        }
        Command::Explain { model, input } => {
            let model = load_model(&model)?;
            let x = api::parse_instance(model.schema(), &load_input(&input)?)?;
            let e = api::explain_response(&model, &x, &narrator)?;
            let text = format!("{}\n", e.text);
            Output::new(&e, text)
        }
        Command::Whatif { model, input, target } => {
            let model = load_model(&model)?;
            let body = load_input(&input)?;
            let x = api::parse_instance(model.schema(), &body)?;
            let target = match target {
                Some(t) => Some(t),
                None => api::parse_target_label(&body)?,
            };
            let r = api::whatif_response(&model, &x, target.as_deref(), &narrator)?;
            let text = if !r.found {
                format!("No change to the mutable features leads to {}.\n", r.target_label)
            } else if r.changes.is_empty() {
                format!("Already predicted as {}.\n", r.target_label)
            } else {
                let mut s = format!("To be predicted as {}:\n", r.target_label);
                for c in &r.changes {
                    s.push_str(&format!(
                        "  {}: {} -> {} ({})\n",
                        c.feature,
                        fmt_value(&c.from),
                        fmt_value(&c.to),
                        c.text
                    ));
                }
                s.push_str(&format!(
                    "It would then be {} ({} people).\n",
                    r.new_certainty_phrase.as_deref().unwrap_or(""),
                    r.new_samples.unwrap_or(0)
                ));
                s
            };
            Output::new(&r, text)
        }
        Command::Coverage { model, attributes } => {
            let model = load_model(&model)?;
            let r = api::coverage_response(&model, &attributes, &narrator)?;
            let text = format!(
                "modeled: {}\nunmodeled: {}\n{}\n",
                fmt_list(&r.modeled),
                fmt_list(&r.unmodeled),
                r.caveat_text
            );
            Output::new(&r, text)
        }
        Command::CyclesFit {
            data,
            schema,
            max_cycles,
            lambda,
            out,
        } => {
            let schema = load_schema(&schema)?;
            let records = records_from_csv(&read(&data)?, &schema)?;
            let config = FitConfig {
                max_cycles,
                lambda,
                ..FitConfig::default()
            };
            let model = ModelEnvelope::fit_cycles(&schema, &records, config)?;
            write(&out, &model.to_json())?;
            let body = api::TrainResponse::new(out.display().to_string(), &model);
            Output::new(&body, format!("model written to {} ({} records)\n", out.display(), records.len()))
        }
        Command::CyclesPredict {
            model,
            input,
            n_cycles,
            csv,
        } => {
            let model = load_model(&model)?;
            let body = load_input(&input)?;
            let x = api::parse_instance(model.schema(), &body)?;
            let n_cycles = n_cycles.or(api::parse_n_cycles(&body)?);
            let r = api::curve_response(&model, &x, n_cycles, &narrator)?;
            let text = if csv {
                let Artifact::Cycles(m) = &model.artifact else { unreachable!("curve_response checked the kind") };
                predict_curve(m, &x, r.points.len())?.to_csv()
            } else {
                r.points.iter().map(|p| format!("{}\n", p.text)).collect()
            };
            Output::new(&r, text)
        }
        Command::Reliability { model, data, bins } => {
            let model = load_model(&model)?;
            let tree = tree_model(&model)?;
            let test = parse_csv(&read(&data)?, &tree.schema)?;
            let diagram = reliability(&scored_predictions(tree, &test)?, bins)?;
            let text = diagram.to_csv();
            Output::new(&diagram, text)
        }
        Command::Serve {
            port,
            bind,
            storage_root,
            verbal_map,
            templates,
            lexicon,
        } => {
            let storage_root = storage_root
                .or(config.storage_root)
                .unwrap_or_else(|| PathBuf::from("riskweave-data"));
            let mut service = riskweave_service::Config::new(storage_root);
            let ip = bind.or(config.bind).unwrap_or(service.bind.ip());
            let port = port.or(config.port).unwrap_or(riskweave_service::DEFAULT_PORT);
            service.bind = SocketAddr::new(ip, port);
            service.verbal_map = verbal_map.or(config.verbal_map);
            service.templates = templates.or(config.templates);
            service.lexicon = lexicon.or(config.lexicon);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| ApiError::new("Io", e.to_string()))?;
            runtime.block_on(riskweave_service::serve(service))?;
            return Ok(None);
        }
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let json = cli.json;
    match run(cli) {
        Ok(Some(out)) => {
            let mut stdout = std::io::stdout().lock();
            let _ = if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("json output"))
            } else {
                write!(stdout, "{}", out.text)
            };
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {}: {}", e.code, e.detail);
            }
            ExitCode::from(1)
        }
    }
}
