use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use stackgen::data::{load_csv, parse_unlabeled_csv, Dataset, Schema};
use stackgen::error::{Error, Result};
use stackgen::harness::{
    emit_report, outer_cv_eval, parse_learners, parse_method_list, repeated_trials_eval, write_report,
    ConfiguredMethod, DatasetDescriptor, GenSpec, Method, MethodSpec, Report, ReportFormat, WeightDump,
};
use stackgen::learners::LearnerSpec;
use stackgen::rng::child_seed;
use stackgen::stacking::{fit_stacked, stacked_predict, StackedModel, DEFAULT_FOLDS};
use stackgen::synth::{gen_led24, gen_waveform, Led24Params, WaveformParams, WaveformVariant};

const DEFAULT_LEARNERS: &str = "tree,nb,knn:p=3";

#[derive(Parser)]
#[command(name = "stackgen", version, about = "Stacked generalization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthName {
    Led24,
    Waveform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Machine,
    Table,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Machine => ReportFormat::Machine,
            Format::Table => ReportFormat::Table,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Level-0 learners used by bestcv, vote, avg and stack.
    #[arg(long, default_value = DEFAULT_LEARNERS)]
    learners: String,
    /// Internal cross-validation folds.
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    j: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: PathBuf,
    /// Layout of the file written to --report.
    #[arg(long, value_enum, default_value = "machine")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV plus a .schema sidecar.
    Gen {
        #[arg(long, value_enum)]
        dataset: SynthName,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// LED segment flip probability.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        /// Waveform attribute count, 21 or 40.
        #[arg(long, default_value_t = 40)]
        width: usize,
        #[arg(long)]
        header: bool,
    },
    /// Outer cross-validation of one method.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 10)]
        w: usize,
        #[arg(long)]
        header: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated trials on fresh synthetic train and test sets.
    Trials {
        #[arg(long)]
        gen: String,
        #[arg(long)]
        train_n: usize,
        #[arg(long)]
        test_n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        common: Common,
    },
    /// Train a stacked model and save it.
    Stack {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// TOML file with version, method, learners, folds and seed.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        header: bool,
    },
    /// Predict classes with a saved stacked model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        header: bool,
    },
    /// Re-run the command recorded in a machine report's config.
    Rerun {
        /// Machine report to take the config from.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, value_enum, default_value = "machine")]
        format: Format,
    },
    /// Outer cross-validation of several methods on one dataset.
    Compare {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Comma-separated method specs.
        #[arg(long)]
        methods: String,
        #[arg(long, default_value_t = 10)]
        w: usize,
        #[arg(long)]
        header: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StackConfig {
    version: u32,
    #[serde(default = "default_stack_method")]
    method: String,
    #[serde(default = "default_learner_list")]
    learners: Vec<String>,
    #[serde(default = "default_folds")]
    folds: usize,
    #[serde(default)]
    seed: u64,
}

fn default_stack_method() -> String {
    MethodSpec::default_stack().to_string()
}

fn default_learner_list() -> Vec<String> {
    DEFAULT_LEARNERS.split(',').map(String::from).collect()
}

fn default_folds() -> usize {
    DEFAULT_FOLDS
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load(data: &Path, schema: &Path, header: bool) -> Result<Dataset> {
    let schema = Schema::load_sidecar(schema)?;
    load_csv(data, &schema, header)
}

fn base_config(command: &str, common: &Common) -> BTreeMap<String, String> {
    let mut c = BTreeMap::new();
    c.insert("command".into(), command.into());
    c.insert("learners".into(), common.learners.clone());
    c.insert("j".into(), common.j.to_string());
    c.insert("seed".into(), common.seed.to_string());
    c
}

fn configure(spec: MethodSpec, common: &Common) -> Result<ConfiguredMethod> {
    ConfiguredMethod::new(spec, parse_learners(&common.learners)?, common.j)
}

/// Writes the report and echoes the table to stdout.
fn finish(report: &Report, common: &Common) -> Result<()> {
    write_report(&common.report, report, common.format.into())?;
    print!("{}", emit_report(report, ReportFormat::Table)?);
    Ok(())
}

fn weight_dump(method: &ConfiguredMethod, data: &Dataset, seed: u64) -> Result<Option<WeightDump>> {
    Ok(method
        .fitted_weights(data, child_seed(seed, "full-fit", 0))?
        .map(|weights| WeightDump {
            method: method.label(),
            models: method.learners.iter().map(LearnerSpec::name).collect(),
            class_values: data.schema().class_values().to_vec(),
            weights,
        }))
}

fn cv_report(
    command: &str,
    data: &Path,
    schema: &Path,
    header: bool,
    methods: Vec<MethodSpec>,
    w: usize,
    common: &Common,
) -> Result<Report> {
    let dataset = load(data, schema, header)?;
    let mut config = base_config(command, common);
    config.insert("data".into(), data.display().to_string());
    config.insert("schema".into(), schema.display().to_string());
    config.insert("header".into(), header.to_string());
    config.insert("w".into(), w.to_string());
    let labels: Vec<String> = methods.iter().map(ToString::to_string).collect();
    config.insert(if command == "eval" { "method" } else { "methods" }.into(), labels.join(","));

    let mut report = Report::new(DatasetDescriptor::of(data.display().to_string(), &dataset), config);
    for spec in methods {
        let method = configure(spec, common)?;
        report.results.push(outer_cv_eval(&dataset, &method, w, common.seed)?);
        if let Some(dump) = weight_dump(&method, &dataset, common.seed)? {
            report.weights.push(dump);
        }
    }
    report.compute_se_count();
    Ok(report)
}

/// Command line equivalent to an echoed config, writing to `report`.
fn rerun_args(config: &BTreeMap<String, String>, report: &Path, format: Format) -> Result<Vec<String>> {
    let command = config
        .get("command")
        .ok_or_else(|| Error::InvalidParameter("report config has no command".into()))?;
    let mut args = vec!["stackgen".to_string(), command.clone()];
    for (key, value) in config {
        match key.as_str() {
            "command" => {}
            "header" => {
                if value == "true" {
                    args.push("--header".into());
                }
            }
            _ => {
                args.push(format!("--{}", key.replace('_', "-")));
                args.push(value.clone());
            }
        }
    }
    args.push("--report".into());
    args.push(report.display().to_string());
    args.push("--format".into());
    args.push(format.to_possible_value().expect("no skipped variants").get_name().to_string());
    Ok(args)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rerun { from, report, format } => {
            let old = stackgen::harness::parse_report(&read(&from)?)?;
            let args = rerun_args(&old.config, &report, format)?;
            let cli = Cli::try_parse_from(&args).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            if matches!(cli.command, Command::Rerun { .. }) {
                return Err(Error::InvalidParameter("a rerun config cannot itself be a rerun".into()));
            }
            run(cli)
        }
        Command::Gen {
            dataset,
            n,
            seed,
            out,
            noise,
            width,
            header,
        } => {
            let data = match dataset {
                SynthName::Led24 => gen_led24(&Led24Params { n, noise, seed })?,
                SynthName::Waveform => gen_waveform(&WaveformParams {
                    n,
                    variant: WaveformVariant::from_width(width)?,
                    seed,
                })?,
            };
            write(&out, &data.to_csv(header))?;
            let sidecar = out.with_extension("schema");
            write(&sidecar, &data.schema().to_sidecar())?;
            println!("wrote {} instances to {} and {}", data.len(), out.display(), sidecar.display());
            Ok(())
        }
        Command::Eval {
            data,
            schema,
            method,
            w,
            header,
            common,
        } => {
            let report = cv_report("eval", &data, &schema, header, vec![method.parse()?], w, &common)?;
            finish(&report, &common)
        }
        Command::Compare {
            data,
            schema,
            methods,
            w,
            header,
            common,
        } => {
            let report = cv_report("compare", &data, &schema, header, parse_method_list(&methods)?, w, &common)?;
            finish(&report, &common)
        }
        Command::Trials {
            gen,
            train_n,
            test_n,
            trials,
            method,
            common,
        } => {
            let gen: GenSpec = gen.parse()?;
            let method = configure(method.parse()?, &common)?;
            let mut config = base_config("trials", &common);
            config.insert("gen".into(), gen.to_string());
            config.insert("train_n".into(), train_n.to_string());
            config.insert("test_n".into(), test_n.to_string());
            config.insert("trials".into(), trials.to_string());
            config.insert("method".into(), method.label());
            let sample = gen.generate(1, 0)?;
            let mut descriptor = DatasetDescriptor::of(gen.to_string(), &sample);
            descriptor.instances = train_n;
            descriptor.test_instances = Some(test_n);
            let mut report = Report::new(descriptor, config);
            report
                .results
                .push(repeated_trials_eval(&gen, train_n, test_n, &method, trials, common.seed)?);
            finish(&report, &common)
        }
        Command::Stack {
            data,
            schema,
            config,
            out,
            header,
        } => {
            let text = read(&config)?;
            let cfg: StackConfig = toml::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", config.display())))?;
            if cfg.version != 1 {
                return Err(Error::Serde(format!("unsupported config version {}", cfg.version)));
            }
            let MethodSpec::Stacked { representation, level1 } = cfg.method.parse()? else {
                return Err(Error::InvalidParameter(format!("stack config needs a stack method, got {}", cfg.method)));
            };
            let learners = parse_learners(&cfg.learners.join(","))?;
            let dataset = load(&data, &schema, header)?;
            let model = fit_stacked(&dataset, &learners, &level1, cfg.folds, representation, cfg.seed)?;
            write(&out, &model.to_json()?)?;
            println!("trained stacked model on {} instances, saved to {}", dataset.len(), out.display());
            Ok(())
        }
        Command::Predict {
            model,
            data,
            out,
            header,
        } => {
            let model = StackedModel::from_json(&read(&model)?)?;
            let instances = parse_unlabeled_csv(&read(&data)?, &model.schema, header)?;
            let classes = model.schema.class_values();
            let mut text = String::new();
            let mut labeled = 0;
            let mut correct = 0;
            for x in &instances {
                let (class, _) = stacked_predict(&model, x)?;
                if let Some(y) = x.class {
                    labeled += 1;
                    correct += usize::from(y == class);
                }
                text.push_str(&classes[class]);
                text.push('\n');
            }
            write(&out, &text)?;
            println!("predicted {} instances to {}", instances.len(), out.display());
            if labeled > 0 {
                println!("accuracy on {labeled} labeled rows: {:.1}%", 100.0 * correct as f64 / labeled as f64);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
