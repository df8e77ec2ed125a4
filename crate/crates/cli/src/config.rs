//! Run configuration: built-in defaults, overridden by the TOML config
//! file, overridden by BOTSENTINEL_-prefixed environment variables,
//! overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use botsentinel::svm::KernelSpec;
use botsentinel::synthgen::GeneratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum KernelChoice {
    Linear,
    Rbf,
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct CliOverrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; required by every command (no wall-clock default).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Conformal significance level.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// VIF elimination threshold.
    #[arg(long, global = true)]
    pub vif_threshold: Option<f64>,
    /// Activity bin width in seconds.
    #[arg(long, global = true)]
    pub bin_width: Option<i64>,
    /// SVM kernel.
    #[arg(long, global = true, value_enum)]
    pub kernel: Option<KernelChoice>,
    /// SVM regularization parameter.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Output directory for all artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePaths {
    corpus: Option<PathBuf>,
    lexicons: Option<[PathBuf; 3]>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFeatures {
    bin_width: Option<i64>,
    vif_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSvm {
    c: Option<f64>,
    kernel: Option<String>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConformal {
    alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSplit {
    train: Option<f64>,
    calibration: Option<f64>,
    test: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSynth {
    organic: Option<usize>,
    inorganic: Option<usize>,
    organic_tweets_mean: Option<f64>,
    inorganic_tweets_mean: Option<f64>,
    organic_rate_per_day: Option<f64>,
    organic_half_cycle_fraction: Option<f64>,
    organic_hashtag_rate: Option<f64>,
    inorganic_interval_secs: Option<f64>,
    inorganic_jitter_sd_secs: Option<f64>,
    inorganic_pool_size: Option<usize>,
    inorganic_hashtag_rate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    #[serde(default)]
    paths: FilePaths,
    #[serde(default)]
    features: FileFeatures,
    #[serde(default)]
    svm: FileSvm,
    #[serde(default)]
    conformal: FileConformal,
    #[serde(default)]
    split: FileSplit,
    #[serde(default)]
    synth: FileSynth,
}

/// Fully resolved configuration used by the commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub corpus_path: PathBuf,
    pub lexicon_paths: [PathBuf; 3],
    pub out_dir: PathBuf,
    pub bin_width: i64,
    pub vif_threshold: f64,
    pub svm_c: f64,
    pub kernel: KernelSpec,
    pub kernel_name: String,
    pub alpha: f64,
    pub fractions: (f64, f64, f64),
    pub generator: GeneratorConfig,
}

fn env_var(name: &str) -> Option<String> {
    std::env::var(format!("BOTSENTINEL_{name}")).ok()
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, String> {
    match env_var(name) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| format!("environment variable BOTSENTINEL_{name} has invalid value '{raw}'")),
    }
}

impl RunConfig {
    pub fn resolve(cli: &CliOverrides) -> Result<RunConfig, String> {
        let config_path = cli
            .config
            .clone()
            .or_else(|| env_var("CONFIG").map(PathBuf::from));
        let file: FileConfig = match &config_path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config '{}': {e}", path.display()))?;
                toml::from_str(&text)
                    .map_err(|e| format!("bad config '{}': {e}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let seed = cli
            .seed
            .or(env_parse::<u64>("SEED")?)
            .or(file.seed)
            .ok_or_else(|| {
                "seed is required: pass --seed, set BOTSENTINEL_SEED, or put 'seed' in the config"
                    .to_string()
            })?;

        let out_dir = cli
            .out
            .clone()
            .or_else(|| env_var("OUT").map(PathBuf::from))
            .or(file.paths.out)
            .unwrap_or_else(|| PathBuf::from("out"));
        let corpus_path = file
            .paths
            .corpus
            .unwrap_or_else(|| out_dir.join("corpus.jsonl"));
        let lexicon_paths = file.paths.lexicons.unwrap_or_else(|| {
            [
                PathBuf::from("lexicons/demo_afinn.tsv"),
                PathBuf::from("lexicons/demo_bing.tsv"),
                PathBuf::from("lexicons/demo_nrc.tsv"),
            ]
        });

        let bin_width = cli
            .bin_width
            .or(env_parse::<i64>("BIN_WIDTH")?)
            .or(file.features.bin_width)
            .unwrap_or(botsentinel::corpus::DEFAULT_BIN_WIDTH);
        if bin_width <= 0 {
            return Err(format!("bin width must be positive, got {bin_width}"));
        }
        let vif_threshold = cli
            .vif_threshold
            .or(env_parse::<f64>("VIF_THRESHOLD")?)
            .or(file.features.vif_threshold)
            .unwrap_or(5.0);
        let svm_c = cli
            .c
            .or(env_parse::<f64>("C")?)
            .or(file.svm.c)
            .unwrap_or(1.0);
        let alpha = cli
            .alpha
            .or(env_parse::<f64>("ALPHA")?)
            .or(file.conformal.alpha)
            .unwrap_or(0.1);

        let kernel_name = match cli.kernel {
            Some(KernelChoice::Linear) => "linear".to_string(),
            Some(KernelChoice::Rbf) => "rbf".to_string(),
            None => match env_var("KERNEL") {
                Some(k) => k,
                None => file.svm.kernel.clone().unwrap_or_else(|| "rbf".into()),
            },
        };
        let kernel = match kernel_name.as_str() {
            "linear" => KernelSpec::Linear,
            "rbf" => KernelSpec::Rbf {
                gamma: file.svm.gamma,
            },
            other => return Err(format!("unknown kernel '{other}' (use linear or rbf)")),
        };

        let fractions = (
            file.split.train.unwrap_or(0.4),
            file.split.calibration.unwrap_or(0.3),
            file.split.test.unwrap_or(0.3),
        );

        let mut generator = GeneratorConfig::default();
        if let Some(n) = file.synth.organic {
            generator.n_organic = n;
        }
        if let Some(n) = file.synth.inorganic {
            generator.n_inorganic = n;
        }
        if let Some(v) = file.synth.organic_tweets_mean {
            generator.organic.n_tweets_mean = v;
        }
        if let Some(v) = file.synth.inorganic_tweets_mean {
            generator.inorganic.n_tweets_mean = v;
        }
        if let Some(v) = file.synth.organic_rate_per_day {
            generator.organic.rate_per_day = v;
        }
        if let Some(v) = file.synth.organic_half_cycle_fraction {
            generator.organic.half_cycle_fraction = v;
        }
        if let Some(v) = file.synth.organic_hashtag_rate {
            generator.organic.hashtag_rate = v;
        }
        if let Some(v) = file.synth.inorganic_interval_secs {
            generator.inorganic.interval_secs = v;
        }
        if let Some(v) = file.synth.inorganic_jitter_sd_secs {
            generator.inorganic.jitter_sd_secs = v;
        }
        if let Some(v) = file.synth.inorganic_pool_size {
            generator.inorganic.pool_size = v;
        }
        if let Some(v) = file.synth.inorganic_hashtag_rate {
            generator.inorganic.hashtag_rate = v;
        }

        Ok(RunConfig {
            seed,
            corpus_path,
            lexicon_paths,
            out_dir,
            bin_width,
            vif_threshold,
            svm_c,
            kernel,
            kernel_name,
            alpha,
            fractions,
            generator,
        })
    }

    /// Check that a required input file exists, naming the command that
    /// produces it otherwise.
    pub fn require_artifact(path: &Path, produced_by: &str) -> Result<(), String> {
        if path.exists() {
            Ok(())
        } else {
            Err(format!(
                "missing input '{}'; run 'botsentinel {produced_by}' first",
                path.display()
            ))
        }
    }

    /// Summary of the effective configuration, embedded in reports so every
    /// number in them can be reproduced.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "corpus": self.corpus_path.display().to_string(),
            "lexicons": self.lexicon_paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "out": self.out_dir.display().to_string(),
            "bin_width": self.bin_width,
            "vif_threshold": self.vif_threshold,
            "svm_c": self.svm_c,
            "kernel": self.kernel_name,
            "alpha": self.alpha,
            "split": {
                "train": self.fractions.0,
                "calibration": self.fractions.1,
                "test": self.fractions.2,
            },
            "synth": {
                "organic": self.generator.n_organic,
                "inorganic": self.generator.n_inorganic,
                "organic_tweets_mean": self.generator.organic.n_tweets_mean,
                "inorganic_tweets_mean": self.generator.inorganic.n_tweets_mean,
            },
        })
    }
}
