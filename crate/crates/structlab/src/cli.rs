//! Subcommand implementations behind the `structlab` binary.
//!
//! Every subcommand accepts `--config FILE` with flat `key = value` lines
//! whose keys mirror the long flag names; explicit flags override file
//! values, which override the documented defaults. Input paths are checked
//! before any work begins. Exit codes: 0 success, 1 usage, 2 data error,
//! 3 numeric divergence (including a failed gradient check).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::config::load_key_values;
use crate::corpus::{
    self, corpus_to_string, generate_structural_corpus, load_corpus, load_embeddings,
    random_embeddings, write_corpus, write_embeddings, EmbeddingTable, LabelScheme, Sentence,
};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_corpus, min_category_separation, paired_t_test, OverlapMetric, Prf};
use crate::model::{init_params, load_model, save_model, Activation, Arch, Topology};
use crate::train::{
    grad_check, grad_check_threshold, make_splits, predict_corpus, select_l2_on_fold, sgd_train,
    subset_corpus, write_loss_trace, TrainConfig, TrainSet,
};
use crate::tree::{load_trees, ParseTree};

#[derive(Parser)]
#[command(
    name = "structlab",
    version,
    about = "Token-level sequence labeling with recurrent and tree-structured neural networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Train a model and write it with its loss trace
    Train(TrainArgs),
    /// Label a corpus with a trained model
    Predict(PredictArgs),
    /// Score predictions against gold labels with overlap metrics
    Eval(EvalArgs),
    /// Compare analytic gradients against central finite differences
    Gradcheck(GradcheckArgs),
    /// Generate a synthetic structure-sensitive corpus
    Synth(SynthArgs),
    /// Cross-validate one or two architectures with per-fold L2 selection
    Crossval(CrossvalArgs),
}

#[derive(Args)]
pub struct TrainArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// training corpus, token<TAB>label lines with blank-line sentence breaks [required]
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// embedding table, `token v1 ... vd` per line [required]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// parse trees, one s-expression per line [required for tree architectures]
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// comma-separated expression categories [default: DSE]
    #[arg(long)]
    pub classes: Option<String>,
    /// bi-recurrent, bi-recursive, or combined [default: bi-recurrent]
    #[arg(long)]
    pub arch: Option<String>,
    /// layer dimensions, e.g. 50,75,75 [default: the architecture's reference topology]
    #[arg(long)]
    pub topology: Option<String>,
    /// hidden activation, rectifier or sigmoid [default: rectifier]
    #[arg(long)]
    pub activation: Option<String>,
    /// learning rate [default: 0.01]
    #[arg(long)]
    pub lr: Option<f64>,
    /// training epochs [default: 200]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// sentences per minibatch [default: 80]
    #[arg(long)]
    pub minibatch: Option<usize>,
    /// L2 penalty on weight matrices [default: 0]
    #[arg(long)]
    pub l2: Option<f64>,
    /// random seed for initialization and shuffling [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// output path for the trained model [required]
    #[arg(long)]
    pub model_out: Option<PathBuf>,
    /// output path for the loss-trace CSV [default: <model-out>.trace.csv]
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PredictArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// trained model file [required]
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// corpus to label (its label column is ignored) [required]
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// embedding table [required]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// parse trees [required for tree architectures]
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// comma-separated expression categories [default: DSE]
    #[arg(long)]
    pub classes: Option<String>,
    /// output path [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gold corpus [required]
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// predicted corpus, token-aligned with the gold file [required]
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// comma-separated expression categories [default: DSE]
    #[arg(long)]
    pub classes: Option<String>,
    /// keep only sentences whose nearest spans of two different categories
    /// are at least this many tokens apart [default: no filter]
    #[arg(long)]
    pub min_separation: Option<usize>,
    /// output path for the CSV report [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// bi-recurrent, bi-recursive, or combined [default: bi-recurrent]
    #[arg(long)]
    pub arch: Option<String>,
    /// layer dimensions [default: 3,4,4 / 3,4 / 3,4,4,4 by architecture]
    #[arg(long)]
    pub topology: Option<String>,
    /// number of labels [default: 3]
    #[arg(long)]
    pub labels: Option<usize>,
    /// random seed for the instance [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// hidden activation, rectifier or sigmoid [default: sigmoid]
    #[arg(long)]
    pub activation: Option<String>,
    /// finite-difference step [default: 1e-5]
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// number of sentences [default: 200]
    #[arg(long)]
    pub n: Option<usize>,
    /// random seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// embedding dimensionality [default: 50]
    #[arg(long)]
    pub dim: Option<usize>,
    /// output directory for corpus.conll, trees.txt, embeddings.txt [required]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct CrossvalArgs {
    /// key = value configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// corpus [required]
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// embedding table [required]
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// parse trees [required for tree architectures]
    #[arg(long)]
    pub trees: Option<PathBuf>,
    /// comma-separated expression categories [default: DSE]
    #[arg(long)]
    pub classes: Option<String>,
    /// first architecture [default: bi-recurrent]
    #[arg(long)]
    pub arch: Option<String>,
    /// first architecture's dimensions [default: its reference topology]
    #[arg(long)]
    pub topology: Option<String>,
    /// optional second architecture for a paired t-test
    #[arg(long)]
    pub arch2: Option<String>,
    /// second architecture's dimensions [default: its reference topology]
    #[arg(long)]
    pub topology2: Option<String>,
    /// held-out test sentences [default: one fifth of the corpus]
    #[arg(long)]
    pub n_test: Option<usize>,
    /// validation folds [default: 10]
    #[arg(long)]
    pub folds: Option<usize>,
    /// hidden activation [default: rectifier]
    #[arg(long)]
    pub activation: Option<String>,
    /// learning rate [default: 0.01]
    #[arg(long)]
    pub lr: Option<f64>,
    /// training epochs per run [default: 200]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// sentences per minibatch [default: 80]
    #[arg(long)]
    pub minibatch: Option<usize>,
    /// random seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// comma-separated L2 grid for per-fold selection [default: 0,1e-5,1e-4,1e-3]
    #[arg(long)]
    pub l2_grid: Option<String>,
}

// Flag-over-file-over-default resolution.
struct Resolver {
    file: BTreeMap<String, String>,
}

impl Resolver {
    fn new(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(path) => {
                check_readable(path)?;
                load_key_values(path)?
            }
            None => BTreeMap::new(),
        };
        Ok(Resolver { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                Error::Usage(format!("bad value {raw:?} for key {key:?} in config file"))
            }),
            None => Ok(None),
        }
    }

    fn get_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| Error::Usage(format!("missing required option --{key}")))
    }

    // String-valued flags that parse into domain types with their own
    // error messages (Arch, Activation).
    fn get_domain<T: FromStr<Err = Error>>(
        &self,
        flag: Option<String>,
        key: &str,
    ) -> Result<Option<T>> {
        let raw = if flag.is_some() {
            flag
        } else {
            self.file.get(key).cloned()
        };
        raw.map(|s| s.parse::<T>()).transpose()
    }

    fn get_domain_or<T: FromStr<Err = Error>>(
        &self,
        flag: Option<String>,
        key: &str,
        default: T,
    ) -> Result<T> {
        Ok(self.get_domain(flag, key)?.unwrap_or(default))
    }
}

fn check_readable(path: &Path) -> Result<()> {
    std::fs::File::open(path).map_err(|e| Error::Data {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(())
}

fn parse_scheme(classes: &str) -> Result<LabelScheme> {
    LabelScheme::from_class_list(classes)
}

fn parse_l2_grid(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad l2 grid entry {:?}", p.trim())))
        })
        .collect()
}

fn load_bound_corpus(
    corpus_path: &Path,
    embeddings_path: &Path,
    scheme: &LabelScheme,
) -> Result<(Vec<Sentence>, EmbeddingTable)> {
    check_readable(corpus_path)?;
    check_readable(embeddings_path)?;
    let mut sentences = load_corpus(corpus_path, scheme)?;
    let table = load_embeddings(embeddings_path)?;
    table.bind(&mut sentences);
    Ok((sentences, table))
}

fn load_trees_checked(path: &Path) -> Result<Vec<ParseTree>> {
    check_readable(path)?;
    load_trees(path)
}

fn needs_trees(arch: Arch) -> bool {
    matches!(arch, Arch::BiRecursive | Arch::Combined)
}

fn resolve_trees(arch: Arch, trees: Option<&Path>) -> Result<Option<Vec<ParseTree>>> {
    match (needs_trees(arch), trees) {
        (true, None) => Err(Error::Usage(format!(
            "tree file required for architecture {arch}: pass --trees"
        ))),
        (_, Some(path)) => Ok(Some(load_trees_checked(path)?)),
        (false, None) => Ok(None),
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

pub fn cmd_train(args: TrainArgs) -> Result<()> {
    let r = Resolver::new(args.config.as_deref())?;
    let corpus_path: PathBuf = r.require(args.corpus, "corpus")?;
    let embeddings_path: PathBuf = r.require(args.embeddings, "embeddings")?;
    let trees_path: Option<PathBuf> = r.get(args.trees, "trees")?;
    let classes = r.get_or(args.classes, "classes", "DSE".into())?;
    let arch: Arch = r.get_domain_or(args.arch, "arch", Arch::BiRecurrent)?;
    let topology_dims: Option<String> = r.get(args.topology, "topology")?;
    let activation: Activation =
        r.get_domain_or(args.activation, "activation", Activation::Rectifier)?;
    let model_out: PathBuf = r.require(args.model_out, "model-out")?;
    let trace_out: PathBuf = r.get_or(
        args.trace_out,
        "trace-out",
        PathBuf::from(format!("{}.trace.csv", model_out.display())),
    )?;
    let config = TrainConfig {
        learning_rate: r.get_or(args.lr, "lr", 0.01)?,
        epochs: r.get_or(args.epochs, "epochs", 200)?,
        minibatch_size: r.get_or(args.minibatch, "minibatch", 80)?,
        l2: r.get_or(args.l2, "l2", 0.0)?,
        seed: r.get_or(args.seed, "seed", 1)?,
        activation,
        ..TrainConfig::default()
    };

    let scheme = parse_scheme(&classes)?;
    let (sentences, table) = load_bound_corpus(&corpus_path, &embeddings_path, &scheme)?;
    let trees = resolve_trees(arch, trees_path.as_deref())?;
    let topology = match topology_dims {
        Some(dims) => Topology::parse(arch, &dims, scheme.n_labels())?,
        None => Topology::default_for(arch, scheme.n_labels()),
    };
    if topology.input_dim() != table.dim() {
        return Err(Error::config(format!(
            "topology input dimensionality {} does not match embedding dimensionality {}",
            topology.input_dim(),
            table.dim()
        )));
    }

    let params = init_params(&topology, config.seed)?;
    let set = TrainSet::new(&sentences, trees.as_deref(), &table);
    let (trained, trace) = sgd_train(&params, &set, &config)?;
    for (i, loss) in trace.iter().enumerate() {
        println!(
            "epoch {}/{}: mean token cross-entropy {loss:.6}",
            i + 1,
            config.epochs
        );
    }
    save_model(&model_out, &trained, activation)?;
    write_loss_trace(&trace_out, &trace)?;
    println!("model written to {}", model_out.display());
    println!("loss trace written to {}", trace_out.display());
    Ok(())
}

pub fn cmd_predict(args: PredictArgs) -> Result<()> {
    let r = Resolver::new(args.config.as_deref())?;
    let model_path: PathBuf = r.require(args.model, "model")?;
    let corpus_path: PathBuf = r.require(args.corpus, "corpus")?;
    let embeddings_path: PathBuf = r.require(args.embeddings, "embeddings")?;
    let trees_path: Option<PathBuf> = r.get(args.trees, "trees")?;
    let classes = r.get_or(args.classes, "classes", "DSE".into())?;
    let out: Option<PathBuf> = r.get(args.out, "out")?;

    check_readable(&model_path)?;
    let (params, activation) = load_model(&model_path)?;
    let topology = params.topology()?;
    let scheme = parse_scheme(&classes)?;
    if topology.n_labels() != scheme.n_labels() {
        return Err(Error::config(format!(
            "model has {} labels but scheme {:?} has {}",
            topology.n_labels(),
            classes,
            scheme.n_labels()
        )));
    }
    let (sentences, table) = load_bound_corpus(&corpus_path, &embeddings_path, &scheme)?;
    if topology.input_dim() != table.dim() {
        return Err(Error::config(format!(
            "model input dimensionality {} does not match embedding dimensionality {}",
            topology.input_dim(),
            table.dim()
        )));
    }
    let trees = resolve_trees(params.arch(), trees_path.as_deref())?;
    let set = TrainSet::new(&sentences, trees.as_deref(), &table);
    let predictions = predict_corpus(&params, &set, activation)?;

    let labeled: Vec<Sentence> = sentences
        .iter()
        .zip(&predictions)
        .map(|(s, labels)| Sentence::new(s.tokens.clone(), labels.clone()))
        .collect();
    write_or_print(out.as_deref(), &corpus_to_string(&labeled, &scheme))?;
    Ok(())
}

pub fn cmd_eval(args: EvalArgs) -> Result<()> {
    let r = Resolver::new(args.config.as_deref())?;
    let gold_path: PathBuf = r.require(args.gold, "gold")?;
    let pred_path: PathBuf = r.require(args.pred, "pred")?;
    let classes = r.get_or(args.classes, "classes", "DSE".into())?;
    let min_separation: Option<usize> = r.get(args.min_separation, "min-separation")?;
    let out: Option<PathBuf> = r.get(args.out, "out")?;

    check_readable(&gold_path)?;
    check_readable(&pred_path)?;
    let scheme = parse_scheme(&classes)?;
    let gold = load_corpus(&gold_path, &scheme)?;
    let pred = load_corpus(&pred_path, &scheme)?;
    if gold.len() != pred.len() {
        return Err(Error::Data {
            line: 0,
            message: format!(
                "gold has {} sentences but predictions have {}",
                gold.len(),
                pred.len()
            ),
        });
    }
    for (i, (g, p)) in gold.iter().zip(&pred).enumerate() {
        if g.tokens.len() != p.tokens.len() {
            return Err(Error::Data {
                line: 0,
                message: format!(
                    "sentence {}: gold has {} tokens but prediction has {}",
                    i + 1,
                    g.tokens.len(),
                    p.tokens.len()
                ),
            });
        }
        if let Some(t) = g.tokens.iter().zip(&p.tokens).position(|(a, b)| a != b) {
            return Err(Error::Data {
                line: 0,
                message: format!(
                    "token mismatch at sentence {} token {}: gold {:?} vs prediction {:?}",
                    i + 1,
                    t + 1,
                    g.tokens[t],
                    p.tokens[t]
                ),
            });
        }
    }

    let keep: Vec<usize> = match min_separation {
        None => (0..gold.len()).collect(),
        Some(k) => (0..gold.len())
            .filter(|&i| min_category_separation(&gold[i], &scheme).is_some_and(|gap| gap >= k))
            .collect(),
    };
    if let Some(k) = min_separation {
        eprintln!(
            "min-separation {k}: keeping {} of {} sentences",
            keep.len(),
            gold.len()
        );
    }
    let gold_labels: Vec<Vec<usize>> = keep.iter().map(|&i| gold[i].labels.clone()).collect();
    let pred_labels: Vec<Vec<usize>> = keep.iter().map(|&i| pred[i].labels.clone()).collect();
    let evaluation = evaluate_corpus(&pred_labels, &gold_labels, &scheme);
    eprintln!("scores are micro-averaged: counts pooled over all sentences before division");
    write_or_print(out.as_deref(), &evaluation.to_csv(&scheme))?;
    Ok(())
}

/// Runs the gradient check and reports pass/fail; a failing check maps to
/// exit code 3.
pub fn cmd_gradcheck(args: GradcheckArgs) -> Result<i32> {
    let r = Resolver::new(args.config.as_deref())?;
    let arch: Arch = r.get_domain_or(args.arch, "arch", Arch::BiRecurrent)?;
    let labels = r.get_or(args.labels, "labels", 3)?;
    let default_dims = match arch {
        Arch::BiRecurrent => "3,4,4",
        Arch::BiRecursive => "3,4",
        Arch::Combined => "3,4,4,4",
    };
    let dims: String = r.get_or(args.topology, "topology", default_dims.into())?;
    let topology = Topology::parse(arch, &dims, labels)?;
    let seed = r.get_or(args.seed, "seed", 1)?;
    let activation: Activation =
        r.get_domain_or(args.activation, "activation", Activation::Sigmoid)?;
    let eps = r.get_or(args.eps, "eps", 1e-5)?;

    let report = grad_check(&topology, seed, activation, eps)?;
    let threshold = grad_check_threshold(activation);
    let verdict = if report.max_rel_error < threshold {
        "PASS"
    } else {
        "FAIL"
    };
    println!(
        "gradcheck arch={arch} topology={dims} labels={labels} activation={activation} seed={seed} eps={eps:e}"
    );
    println!(
        "max relative error {:.3e} over {} coordinates ({} below finite-difference resolution, {} excluded at rectifier kinks)",
        report.max_rel_error, report.checked, report.below_resolution, report.excluded
    );
    println!("threshold {threshold:e}: {verdict}");
    Ok(if verdict == "PASS" { 0 } else { 3 })
}

pub fn cmd_synth(args: SynthArgs) -> Result<()> {
    let r = Resolver::new(args.config.as_deref())?;
    let n = r.get_or(args.n, "n", 200)?;
    let seed = r.get_or(args.seed, "seed", 1)?;
    let dim = r.get_or(args.dim, "dim", 50)?;
    let out_dir: PathBuf = r.require(args.out_dir, "out-dir")?;

    if n == 0 {
        return Err(Error::Usage("need at least one sentence".into()));
    }
    std::fs::create_dir_all(&out_dir)?;
    let generated = generate_structural_corpus(n, seed);
    let vocab = corpus::corpus_vocab(&generated.sentences);
    let table = random_embeddings(&vocab, dim, seed.wrapping_add(1));

    let corpus_path = out_dir.join("corpus.conll");
    let trees_path = out_dir.join("trees.txt");
    let embeddings_path = out_dir.join("embeddings.txt");
    write_corpus(&corpus_path, &generated.sentences, &generated.scheme)?;
    crate::tree::write_trees(&trees_path, &generated.trees)?;
    write_embeddings(&embeddings_path, &table)?;

    println!(
        "generated {} sentences over a {}-token vocabulary (ambiguity rate {:.1}%)",
        n,
        vocab.len(),
        100.0 * corpus::ambiguity_rate(&generated.sentences)
    );
    println!("corpus:     {}", corpus_path.display());
    println!("trees:      {}", trees_path.display());
    println!("embeddings: {}", embeddings_path.display());
    println!("label classes: {}", generated.scheme.classes().join(","));
    Ok(())
}

struct FoldOutcome {
    lambda: f64,
    proportional: Prf,
    binary: Prf,
}

#[allow(clippy::too_many_arguments)]
fn crossval_one_arch(
    arch: Arch,
    dims: Option<&str>,
    scheme: &LabelScheme,
    sentences: &[Sentence],
    trees: Option<&[ParseTree]>,
    table: &EmbeddingTable,
    config: &TrainConfig,
    split: &crate::train::SplitPlan,
) -> Result<Vec<FoldOutcome>> {
    let topology = match dims {
        Some(d) => Topology::parse(arch, d, scheme.n_labels())?,
        None => Topology::default_for(arch, scheme.n_labels()),
    };
    if topology.input_dim() != table.dim() {
        return Err(Error::config(format!(
            "topology input dimensionality {} does not match embedding dimensionality {}",
            topology.input_dim(),
            table.dim()
        )));
    }
    let params0 = init_params(&topology, config.seed)?;
    let full_set = TrainSet::new(sentences, trees, table);
    let (test_sentences, test_trees) = subset_corpus(sentences, trees, &split.test);
    let test_set = TrainSet::new(&test_sentences, test_trees.as_deref(), table);
    let test_gold: Vec<Vec<usize>> = test_sentences.iter().map(|s| s.labels.clone()).collect();

    let mut outcomes = Vec::new();
    for fold in 0..split.folds.len() {
        let lambda = select_l2_on_fold(&params0, &full_set, scheme, config, split, fold)?;
        let train_idx = split.train_indices(fold);
        let (train_sentences, train_trees) = subset_corpus(sentences, trees, &train_idx);
        let train_set = TrainSet::new(&train_sentences, train_trees.as_deref(), table);
        let mut cfg = config.clone();
        cfg.l2 = lambda;
        let (trained, _) = sgd_train(&params0, &train_set, &cfg)?;
        let pred = predict_corpus(&trained, &test_set, config.activation)?;
        let evaluation = evaluate_corpus(&pred, &test_gold, scheme);
        outcomes.push(FoldOutcome {
            lambda,
            proportional: evaluation.overall(OverlapMetric::Proportional),
            binary: evaluation.overall(OverlapMetric::Binary),
        });
        println!(
            "[{arch}] fold {fold}: lambda {lambda:e}, proportional F1 {:.4}, binary F1 {:.4}",
            outcomes[fold].proportional.f1, outcomes[fold].binary.f1
        );
    }
    Ok(outcomes)
}

fn mean_prf(scores: &[Prf]) -> Prf {
    let n = scores.len() as f64;
    Prf {
        precision: scores.iter().map(|p| p.precision).sum::<f64>() / n,
        recall: scores.iter().map(|p| p.recall).sum::<f64>() / n,
        f1: scores.iter().map(|p| p.f1).sum::<f64>() / n,
    }
}

fn report_arch(arch: Arch, outcomes: &[FoldOutcome]) -> String {
    let mut out = String::new();
    let prop: Vec<Prf> = outcomes.iter().map(|o| o.proportional).collect();
    let bin: Vec<Prf> = outcomes.iter().map(|o| o.binary).collect();
    let _ = writeln!(out, "architecture {arch}:");
    let _ = writeln!(
        out,
        "  per-fold lambda: {}",
        outcomes
            .iter()
            .map(|o| format!("{:e}", o.lambda))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(
        out,
        "  per-fold proportional F1: {}",
        prop.iter()
            .map(|p| format!("{:.4}", p.f1))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(
        out,
        "  per-fold binary F1:       {}",
        bin.iter()
            .map(|p| format!("{:.4}", p.f1))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let mp = mean_prf(&prop);
    let mb = mean_prf(&bin);
    let _ = writeln!(
        out,
        "  mean proportional P/R/F1: {:.4} {:.4} {:.4}",
        mp.precision, mp.recall, mp.f1
    );
    let _ = writeln!(
        out,
        "  mean binary P/R/F1:       {:.4} {:.4} {:.4}",
        mb.precision, mb.recall, mb.f1
    );
    out
}

pub fn cmd_crossval(args: CrossvalArgs) -> Result<()> {
    let r = Resolver::new(args.config.as_deref())?;
    let corpus_path: PathBuf = r.require(args.corpus, "corpus")?;
    let embeddings_path: PathBuf = r.require(args.embeddings, "embeddings")?;
    let trees_path: Option<PathBuf> = r.get(args.trees, "trees")?;
    let classes = r.get_or(args.classes, "classes", "DSE".into())?;
    let arch: Arch = r.get_domain_or(args.arch, "arch", Arch::BiRecurrent)?;
    let topology: Option<String> = r.get(args.topology, "topology")?;
    let arch2: Option<Arch> = r.get_domain(args.arch2, "arch2")?;
    let topology2: Option<String> = r.get(args.topology2, "topology2")?;
    let folds = r.get_or(args.folds, "folds", 10)?;
    let activation: Activation =
        r.get_domain_or(args.activation, "activation", Activation::Rectifier)?;
    let l2_grid = parse_l2_grid(&r.get_or(args.l2_grid, "l2-grid", "0,1e-5,1e-4,1e-3".into())?)?;
    let config = TrainConfig {
        learning_rate: r.get_or(args.lr, "lr", 0.01)?,
        epochs: r.get_or(args.epochs, "epochs", 200)?,
        minibatch_size: r.get_or(args.minibatch, "minibatch", 80)?,
        seed: r.get_or(args.seed, "seed", 1)?,
        activation,
        l2: 0.0,
        l2_grid,
    };

    let scheme = parse_scheme(&classes)?;
    let (sentences, table) = load_bound_corpus(&corpus_path, &embeddings_path, &scheme)?;
    let tree_arch = [Some(arch), arch2]
        .into_iter()
        .flatten()
        .find(|&a| needs_trees(a));
    let trees = match (tree_arch, trees_path.as_deref()) {
        (Some(a), path) => resolve_trees(a, path)?,
        (None, Some(p)) => Some(load_trees_checked(p)?),
        (None, None) => None,
    };
    let n_test = r.get_or(args.n_test, "n-test", sentences.len() / 5)?;
    let split = make_splits(sentences.len(), n_test, folds, config.seed)?;

    println!(
        "cross-validation over {} sentences: {} test, {} folds",
        sentences.len(),
        split.test.len(),
        split.folds.len()
    );
    println!(
        "  test ({}): {}",
        split.test.len(),
        split
            .test
            .iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    for (i, fold) in split.folds.iter().enumerate() {
        println!(
            "  fold {i} ({}): {}",
            fold.len(),
            fold.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    let outcomes_a = crossval_one_arch(
        arch,
        topology.as_deref(),
        &scheme,
        &sentences,
        trees.as_deref(),
        &table,
        &config,
        &split,
    )?;
    print!("{}", report_arch(arch, &outcomes_a));

    if let Some(arch2) = arch2 {
        let outcomes_b = crossval_one_arch(
            arch2,
            topology2.as_deref(),
            &scheme,
            &sentences,
            trees.as_deref(),
            &table,
            &config,
            &split,
        )?;
        print!("{}", report_arch(arch2, &outcomes_b));
        for (name, pick) in [
            (
                "proportional F1",
                &(|o: &FoldOutcome| o.proportional.f1) as &dyn Fn(&FoldOutcome) -> f64,
            ),
            ("binary F1", &|o: &FoldOutcome| o.binary.f1),
        ] {
            let a: Vec<f64> = outcomes_a.iter().map(pick).collect();
            let b: Vec<f64> = outcomes_b.iter().map(pick).collect();
            let (t, significant) = paired_t_test(&a, &b)?;
            println!(
                "paired t-test ({name}, {arch} vs {arch2}): t = {t:.4}, {}",
                if significant {
                    "significant at alpha=0.05"
                } else {
                    "not significant at alpha=0.05"
                }
            );
        }
    }
    Ok(())
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Train(args) => cmd_train(args).map(|_| 0),
        Command::Predict(args) => cmd_predict(args).map(|_| 0),
        Command::Eval(args) => cmd_eval(args).map(|_| 0),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Synth(args) => cmd_synth(args).map(|_| 0),
        Command::Crossval(args) => cmd_crossval(args).map(|_| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("structlab: {e}");
            e.exit_code()
        }
    }
}
