use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use leggm::config::{load_config, PipelineConfig};
use leggm::descriptor::{DownsampleMode, Extractor};
use leggm::error::ErrorClass;
use leggm::evaluation::{self, DatasetManifest, Role};
use leggm::imaging::{encode_pgm, read_image, rescale_for_display, Illumination, Image};
use leggm::io::{read_features, read_model, sample_id, split_sample_id, write_features, write_model, FeatureSet};
use leggm::recognition::{identify, Gallery, GalleryEntry, Metric};
use leggm::subspace::{self, LabeledData, Method, SubspaceModel};
use log::info;

const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

/// LEGGM face descriptor: extraction, subspace learning and evaluation.
#[derive(Parser)]
#[command(name = "leggm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus and its manifest.
    Synth {
        #[arg(long, default_value_t = 20)]
        classes: usize,
        #[arg(long, default_value_t = 4)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract descriptors for manifest rows into a feature file.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only rows with this role; by default every distinct sample.
        #[arg(long, value_parser = parse_role)]
        role: Option<Role>,
        #[command(flatten)]
        descriptor: DescriptorArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Fit a subspace model on labeled features.
    Fit {
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        knn: Option<usize>,
        #[arg(long)]
        dims: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rank gallery subjects for every probe; CSV `probe_id,rank,subject,score`.
    Identify {
        #[command(flatten)]
        sets: MatchArgs,
        #[arg(long, default_value_t = 1)]
        top: usize,
    },
    /// Score each probe against every enrolled subject; CSV
    /// `probe_id,claimed,score,genuine`.
    Verify {
        #[command(flatten)]
        sets: MatchArgs,
    },
    /// Run the full train/gallery/probe protocol and write a JSON report.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        emit_cmc: Option<PathBuf>,
        #[arg(long)]
        emit_roc: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Gabor bank utilities.
    Bank {
        #[command(subcommand)]
        action: BankAction,
    },
    /// Write intermediate descriptor stages of one image as PGM files.
    Dump {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_parser = ["illuminated", "pisp", "chi", "responses", "pooled", "all"], default_value = "all")]
        stage: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        descriptor: DescriptorArgs,
    },
}

#[derive(Subcommand)]
enum BankAction {
    /// Print wave number, orientation and lattice-sum residue per kernel.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write real and imaginary parts of every kernel as PGM.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DescriptorArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    illum: Option<Illumination>,
    #[arg(long)]
    downsample: Option<DownsampleMode>,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    gallery: PathBuf,
    #[arg(long)]
    probe: PathBuf,
    #[arg(long)]
    metric: Option<Metric>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_role(s: &str) -> std::result::Result<Role, String> {
    s.parse()
}

fn config_or_default(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(PipelineConfig::default()),
    }
}

impl DescriptorArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = config_or_default(self.config.as_deref())?;
        if let Some(i) = self.illum {
            cfg.descriptor.illumination = i;
        }
        if let Some(m) = self.downsample {
            cfg.descriptor.downsample_mode = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_text(dest: Option<&Path>, text: &str) -> Result<()> {
    match dest {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_pgm(path: &Path, img: &Image) -> Result<()> {
    let (scaled, offset, scale) = rescale_for_display(img);
    info!("{}: offset {offset:.6e}, scale {scale:.6e}", path.display());
    std::fs::write(path, encode_pgm(&scaled)).with_context(|| format!("writing {}", path.display()))
}

fn synth(classes: usize, per_class: usize, seed: u64, out: &Path) -> Result<()> {
    let m = evaluation::synth_dataset(classes, per_class, seed, out)?;
    info!("wrote {} rows to {}", m.rows.len(), out.join("manifest.csv").display());
    Ok(())
}

fn extract(manifest: &Path, out: &Path, role: Option<Role>, args: &DescriptorArgs, jobs: Option<usize>) -> Result<()> {
    let cfg = args.resolve()?;
    let m = DatasetManifest::read(manifest)?;
    let mut seen = std::collections::HashSet::new();
    let rows: Vec<_> = m
        .rows
        .iter()
        .filter(|r| role.is_none_or(|want| r.role == want))
        .filter(|r| seen.insert((r.subject.clone(), r.path.clone())))
        .collect();
    if rows.is_empty() {
        bail!(leggm::Error::InvalidData("no manifest rows selected".into()));
    }
    let extractor = Extractor::new(cfg.descriptor)?;
    let paths: Vec<PathBuf> = rows.iter().map(|r| m.resolve(r)).collect();
    info!("extracting {} images", paths.len());
    let vectors = evaluation::with_jobs(jobs, || evaluation::extract_paths(&extractor, &paths))??;
    let ids = rows.iter().map(|r| sample_id(&r.subject, &r.path)).collect();
    write_features(out, &FeatureSet::new(ids, vectors)?)?;
    Ok(())
}

fn fit(
    method: Option<Method>,
    features: &Path,
    out: &Path,
    knn: Option<usize>,
    dims: Option<usize>,
    config: Option<&Path>,
) -> Result<()> {
    let cfg = config_or_default(config)?;
    let mut opts = cfg.subspace.clone();
    if let Some(m) = method {
        opts.method = m;
    }
    if let Some(k) = knn {
        opts.knn_k = k;
    }
    if dims.is_some() {
        opts.dims = dims;
    }
    opts.validate()?;
    let set = read_features(features)?;
    let labels = set
        .ids
        .iter()
        .map(|id| Ok(split_sample_id(id)?.0.to_string()))
        .collect::<leggm::Result<Vec<_>>>()?;
    let data = LabeledData::new(set.vectors, labels)?;
    let model = subspace::fit(&data, &opts)?;
    info!("{}: {} -> {} dims", model.method, model.input_dim(), model.output_dim());
    write_model(out, &model)?;
    Ok(())
}

struct Loaded {
    gallery: Gallery,
    probes: Vec<(String, Vec<f64>)>,
    metric: Metric,
}

fn project_set(model: &SubspaceModel, set: FeatureSet) -> Result<Vec<(String, String, Vec<f64>)>> {
    set.ids
        .into_iter()
        .zip(set.vectors)
        .map(|(id, v)| {
            let (subject, path) = split_sample_id(&id)?;
            Ok((subject.to_string(), path.to_string(), model.project(v.values())?))
        })
        .collect()
}

fn load_match_sets(a: &MatchArgs) -> Result<Loaded> {
    let model = read_model(&a.model)?;
    let gallery = Gallery::new(
        project_set(&model, read_features(&a.gallery)?)?
            .into_iter()
            .map(|(subject, path, vector)| GalleryEntry {
                id: sample_id(&subject, &path),
                subject,
                vector,
            })
            .collect(),
    )?;
    let probes = project_set(&model, read_features(&a.probe)?)?
        .into_iter()
        .map(|(_, path, v)| (path, v))
        .collect();
    Ok(Loaded {
        gallery,
        probes,
        metric: a.metric.unwrap_or_default(),
    })
}

fn identify_cmd(a: &MatchArgs, top: usize) -> Result<()> {
    let l = load_match_sets(a)?;
    let mut out = String::from("probe_id,rank,subject,score\n");
    for (probe_id, v) in &l.probes {
        for (rank, m) in identify(&l.gallery, v, l.metric, top)?.iter().enumerate() {
            writeln!(out, "{probe_id},{},{},{}", rank + 1, m.subject, m.score)?;
        }
    }
    write_text(a.out.as_deref(), &out)
}

fn verify_cmd(a: &MatchArgs) -> Result<()> {
    let l = load_match_sets(a)?;
    let probe_subjects = read_features(&a.probe)?
        .ids
        .iter()
        .map(|id| Ok(split_sample_id(id)?.0.to_string()))
        .collect::<leggm::Result<Vec<_>>>()?;
    let mut out = String::from("probe_id,claimed,score,genuine\n");
    for ((probe_id, v), truth) in l.probes.iter().zip(&probe_subjects) {
        // full ranking, then the best score of each claimed subject
        let mut best: BTreeMap<&str, f64> = BTreeMap::new();
        let ranked = identify(&l.gallery, v, l.metric, l.gallery.len())?;
        for m in &ranked {
            best.entry(m.subject.as_str()).or_insert(m.score);
        }
        for claimed in l.gallery.subjects() {
            let genuine = u8::from(claimed == truth.as_str());
            writeln!(out, "{probe_id},{claimed},{},{genuine}", best[claimed])?;
        }
    }
    write_text(a.out.as_deref(), &out)
}

fn evaluate(
    manifest: &Path,
    config: Option<&Path>,
    report: &Path,
    emit_cmc: Option<&Path>,
    emit_roc: Option<&Path>,
    jobs: Option<usize>,
) -> Result<()> {
    let cfg = config_or_default(config)?;
    let m = DatasetManifest::read(manifest)?;
    let r = evaluation::run_protocol(&m, &cfg, jobs)?;
    std::fs::write(report, r.to_json()?).with_context(|| format!("writing {}", report.display()))?;
    if let Some(p) = emit_cmc {
        std::fs::write(p, r.cmc_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = emit_roc {
        std::fs::write(p, r.roc_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    info!("rank-1 {:.4}, EER {:.4}", r.rank1, r.eer);
    Ok(())
}

fn bank_inspect(config: Option<&Path>, dump: Option<&Path>) -> Result<()> {
    let cfg = config_or_default(config)?;
    let bank = leggm::gabor::build_bank(&cfg.descriptor.gabor)?;
    let mut out = String::from("mu,nu,wave_number,phi,dc_residue\n");
    for k in bank.inspect() {
        writeln!(out, "{},{},{},{},{:e}", k.mu, k.nu, k.wave_number, k.phi, k.dc_residue)?;
    }
    print!("{out}");
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, k) in bank.kernels().iter().enumerate() {
            let (mu, nu) = bank.indices(i);
            write_pgm(&dir.join(format!("gabor_{mu}_{nu}_re.pgm")), &k.real_part())?;
            write_pgm(&dir.join(format!("gabor_{mu}_{nu}_im.pgm")), &k.imag_part())?;
        }
    }
    Ok(())
}

fn dump(image: &Path, stage: &str, out: &Path, args: &DescriptorArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let extractor = Extractor::new(cfg.descriptor)?;
    let s = extractor.stages(&read_image(image)?)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let want = |name: &str| stage == "all" || stage == name;
    if want("illuminated") {
        write_pgm(&out.join("illuminated.pgm"), &s.illuminated)?;
    }
    if want("pisp") {
        write_pgm(&out.join("pisp.pgm"), &s.pisp)?;
    }
    if want("chi") {
        write_pgm(&out.join("chi.pgm"), &s.chi)?;
    }
    if want("responses") {
        for (i, m) in s.responses.maps().iter().enumerate() {
            let (mu, nu) = extractor.bank().indices(i);
            write_pgm(&out.join(format!("response_{mu}_{nu}.pgm")), m)?;
        }
    }
    if want("pooled") {
        for (i, m) in s.pooled.maps().iter().enumerate() {
            let (mu, nu) = extractor.bank().indices(i);
            write_pgm(&out.join(format!("pooled_{mu}_{nu}.pgm")), m)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            classes,
            per_class,
            seed,
            out,
        } => synth(classes, per_class, seed, &out),
        Command::Extract {
            manifest,
            out,
            role,
            descriptor,
            jobs,
        } => extract(&manifest, &out, role, &descriptor, jobs),
        Command::Fit {
            method,
            features,
            out,
            knn,
            dims,
            config,
        } => fit(method, &features, &out, knn, dims, config.as_deref()),
        Command::Identify { sets, top } => identify_cmd(&sets, top),
        Command::Verify { sets } => verify_cmd(&sets),
        Command::Evaluate {
            manifest,
            config,
            report,
            emit_cmc,
            emit_roc,
            jobs,
        } => evaluate(
            &manifest,
            config.as_deref(),
            &report,
            emit_cmc.as_deref(),
            emit_roc.as_deref(),
            jobs,
        ),
        Command::Bank {
            action: BankAction::Inspect { config, dump },
        } => bank_inspect(config.as_deref(), dump.as_deref()),
        Command::Dump {
            image,
            stage,
            out,
            descriptor,
        } => dump(&image, &stage, &out, &descriptor),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<leggm::Error>().map(leggm::Error::class) {
        Some(ErrorClass::Numeric) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("LEGGM_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already carry their cause in the message
            if e.downcast_ref::<leggm::Error>().is_some() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
