//! The five commands: compute, decompose, reduce, verify, gen. Each returns
//! a [`ReportDocument`] (or, for `gen`, the instance file itself); `main`
//! renders it and maps the verdict to an exit code.

use std::fs;
use std::path::{Path, PathBuf};

use revcheck_core::decomp::{check_tail_prob, decompose, semi_independent_thresholds};
use revcheck_core::harness::{gen_instance, run_suite, GenKind, GenParams, Suite};
use revcheck_core::mech::optimal_revenue;
use revcheck_core::myerson::{brev, srev};
use revcheck_core::reduce::{check_reduction_identities, reduce_base_value, reduce_linear};
use revcheck_core::{Caps, CorrelationSpec, Rat, Scalar};

use crate::doc::{
    DecompJson, InstanceReportJson, NamedQty, QtyJson, ReportDocument, RowJson, TailEntryJson,
    ThresholdJson,
};
use crate::instance::InstanceFile;

/// Anything that stops a command before its checks ran: bad flags, unreadable
/// files, malformed instances, exceeded caps. All of these exit with code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<revcheck_core::Error> for CliError {
    fn from(e: revcheck_core::Error) -> Self {
        CliError(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Exact rational arithmetic; every report value carries its exact form.
    Rational,
    /// IEEE doubles with the configured tolerance.
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum What {
    Rev,
    Srev,
    Brev,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteArg {
    Core,
    Semi,
    Cbv,
    Linear,
    All,
}

impl SuiteArg {
    fn to_suite(self) -> Suite {
        match self {
            SuiteArg::Core => Suite::Core,
            SuiteArg::Semi => Suite::Semi,
            SuiteArg::Cbv => Suite::Cbv,
            SuiteArg::Linear => Suite::Linear,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenKindArg {
    #[value(alias = "iid")]
    Independent,
    #[value(alias = "semi")]
    SemiIndependent,
    #[value(alias = "cbv")]
    CommonBaseValue,
    Linear,
}

impl GenKindArg {
    fn to_kind(self) -> GenKind {
        match self {
            GenKindArg::Independent => GenKind::Independent,
            GenKindArg::SemiIndependent => GenKind::SemiIndependent,
            GenKindArg::CommonBaseValue => GenKind::CommonBaseValue,
            GenKindArg::Linear => GenKind::Linear,
        }
    }
}

/// Generator size bounds as flags; defaults match [`GenParams::default`].
#[derive(Debug, Clone, clap::Args)]
pub struct GenSizeArgs {
    /// Most items an instance may have.
    #[arg(long, default_value_t = GenParams::default().max_items)]
    pub max_items: usize,
    /// Most support points per law.
    #[arg(long, default_value_t = GenParams::default().max_support)]
    pub max_support: usize,
    /// Most similarity classes (semi-independent).
    #[arg(long, default_value_t = GenParams::default().max_classes)]
    pub max_classes: usize,
    /// Most items per class (semi-independent).
    #[arg(long, default_value_t = GenParams::default().max_multiplicity)]
    pub max_multiplicity: usize,
    /// Most feature laws (linear).
    #[arg(long, default_value_t = GenParams::default().max_features)]
    pub max_features: usize,
    /// Largest integer weight in a linear feature matrix.
    #[arg(long, default_value_t = GenParams::default().max_matrix_entry)]
    pub max_matrix_entry: u64,
    /// Share one feature law instead of drawing one per feature (linear).
    #[arg(long, default_value_t = false)]
    pub iid_features: bool,
}

impl GenSizeArgs {
    pub fn to_params(&self) -> GenParams {
        GenParams {
            max_items: self.max_items,
            max_support: self.max_support,
            max_classes: self.max_classes,
            max_multiplicity: self.max_multiplicity,
            max_features: self.max_features,
            max_matrix_entry: self.max_matrix_entry,
            iid_features: self.iid_features,
        }
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Rational => "rational",
        Mode::Float => "float",
    }
}

pub fn load_instance(path: &Path) -> CmdResult<(InstanceFile, CorrelationSpec<Rat>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    let file: InstanceFile = serde_json::from_str(&text)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    let spec = file.to_spec()?;
    Ok((file, spec))
}

fn label_for(file: &InstanceFile, path: &Path) -> String {
    file.name.clone().unwrap_or_else(|| {
        path.file_stem().map_or_else(|| path.display().to_string(), |s| {
            s.to_string_lossy().into_owned()
        })
    })
}

pub fn cmd_compute(path: &Path, what: What, mode: Mode, caps: &Caps) -> CmdResult<ReportDocument> {
    let (file, spec) = load_instance(path)?;
    let quantities = match mode {
        Mode::Rational => quantities_for(&spec, what, caps)?,
        Mode::Float => quantities_for(&spec.to_scalar::<f64>(), what, caps)?,
    };
    let mut doc = ReportDocument::new("compute");
    doc.name = Some(label_for(&file, path));
    doc.kind = Some(spec.kind_name().to_string());
    doc.mode = Some(mode_name(mode).to_string());
    doc.quantities = quantities;
    Ok(doc)
}

fn quantities_for<T: Scalar>(
    spec: &CorrelationSpec<T>,
    what: What,
    caps: &Caps,
) -> CmdResult<Vec<NamedQty>> {
    let joint = spec.build_joint(caps.max_atoms)?;
    let mut out = Vec::new();
    let mut push = |name: &str, q: QtyJson| out.push(NamedQty { name: name.into(), value: q });
    if matches!(what, What::Rev | What::All) {
        push("rev", optimal_revenue(&joint, caps)?.revenue.describe().into());
    }
    if matches!(what, What::Srev | What::All) {
        push("srev", srev(&joint).describe().into());
    }
    if matches!(what, What::Brev | What::All) {
        push("brev", brev(&joint).describe().into());
    }
    if what == What::All {
        push("val", joint.val().describe().into());
    }
    Ok(out)
}

pub fn cmd_decompose(path: &Path, mode: Mode, caps: &Caps) -> CmdResult<ReportDocument> {
    let (file, spec) = load_instance(path)?;
    let decomposition = match mode {
        Mode::Rational => decomposition_for(&spec, caps)?,
        Mode::Float => decomposition_for(&spec.to_scalar::<f64>(), caps)?,
    };
    let all_hold = decomposition.checks.iter().all(|r| r.holds);
    let mut doc = ReportDocument::new("decompose");
    doc.name = Some(label_for(&file, path));
    doc.kind = Some(spec.kind_name().to_string());
    doc.mode = Some(mode_name(mode).to_string());
    doc.decomposition = Some(decomposition);
    doc.all_hold = Some(all_hold);
    Ok(doc)
}

fn decomposition_for<T: Scalar>(spec: &CorrelationSpec<T>, caps: &Caps) -> CmdResult<DecompJson> {
    let joint = spec.build_joint(caps.max_atoms)?;
    let thresholds = semi_independent_thresholds(&joint)?;
    let report = decompose(&joint, &thresholds, caps)?;
    let qty = |x: &T| QtyJson::from(x.describe());
    Ok(DecompJson {
        thresholds: (0..thresholds.len())
            .map(|i| ThresholdJson {
                item: i,
                t: qty(thresholds.t(i)),
                cut: qty(thresholds.cut(i)),
                item_revenue: qty(&thresholds.item_revenue(i)),
            })
            .collect(),
        tail_prob: report.tail_prob.iter().map(qty).collect(),
        entries: report
            .entries
            .iter()
            .map(|e| TailEntryJson {
                items: e.items.clone(),
                prob: qty(&e.prob),
                class_count: e.class_count,
            })
            .collect(),
        class_respecting: report.class_respecting,
        expected_tail_classes: qty(&report.expected_tail_classes),
        checks: check_tail_prob(&report).iter().map(|i| RowJson::from(&i.describe())).collect(),
    })
}

pub fn cmd_reduce(path: &Path, out: Option<&Path>, caps: &Caps) -> CmdResult<ReportDocument> {
    let (file, spec) = load_instance(path)?;
    let rm = match &spec {
        CorrelationSpec::CommonBaseValue { .. } => reduce_base_value(&spec)?,
        CorrelationSpec::Linear { .. } => reduce_linear(&spec, caps)?,
        other => {
            return Err(CliError(format!(
                "reduce expects a common_base_value or linear instance, got {}",
                other.kind_name()
            )))
        }
    };
    // The closed-form identities re-verify cheaply; the optimal-revenue
    // comparison is `verify`'s job.
    let checks = check_reduction_identities(&rm, caps, false)?;

    let name = label_for(&file, path);
    let out_path: PathBuf = out.map_or_else(|| path.with_extension("reduced.json"), Path::to_path_buf);
    let reduced_file =
        InstanceFile::from_spec(&rm.reduced, Some(format!("{name} (reduced)")));
    let mut text = serde_json::to_string_pretty(&reduced_file).expect("instance serializes");
    text.push('\n');
    fs::write(&out_path, &text)
        .map_err(|e| CliError(format!("cannot write {}: {e}", out_path.display())))?;

    let rows: Vec<RowJson> = checks.rows().iter().map(RowJson::from).collect();
    let all_hold = checks.all_hold();
    let mut doc = ReportDocument::new("reduce");
    doc.name = Some(name);
    doc.kind = Some(spec.kind_name().to_string());
    doc.mode = Some("rational".to_string());
    doc.reduction = Some(crate::doc::ReductionJson {
        kind_in: rm.original.kind_name().to_string(),
        kind_out: rm.reduced.kind_name().to_string(),
        written: out_path.display().to_string(),
        checks: rows,
    });
    doc.all_hold = Some(all_hold);
    Ok(doc)
}

/// Inclusive-exclusive seed range written `a..b` (or a single seed `a`).
pub fn parse_seed_range(s: &str) -> CmdResult<std::ops::Range<u64>> {
    let bad = || CliError(format!("invalid seed range {s:?}; expected a..b or a single seed"));
    if let Some((a, b)) = s.split_once("..") {
        let start: u64 = a.trim().parse().map_err(|_| bad())?;
        let end: u64 = b.trim().parse().map_err(|_| bad())?;
        if end <= start {
            return Err(bad());
        }
        Ok(start..end)
    } else {
        let seed: u64 = s.trim().parse().map_err(|_| bad())?;
        Ok(seed..seed + 1)
    }
}

pub fn cmd_verify(
    path: Option<&Path>,
    gen: Option<GenKindArg>,
    seeds: Option<&str>,
    suite: SuiteArg,
    caps: &Caps,
) -> CmdResult<ReportDocument> {
    let mut reports: Vec<InstanceReportJson> = Vec::new();
    match (path, gen) {
        (Some(path), None) => {
            let (file, spec) = load_instance(path)?;
            let label = label_for(&file, path);
            reports.push((&run_suite(&spec, suite.to_suite(), caps, &label)?).into());
        }
        (None, Some(kind)) => {
            let range = parse_seed_range(seeds.unwrap_or("0..1"))?;
            let params = GenParams::default();
            for seed in range {
                let spec = gen_instance(kind.to_kind(), seed, &params)?;
                let label = format!("{}[{seed}]", kind.to_kind().name());
                reports.push((&run_suite(&spec, suite.to_suite(), caps, &label)?).into());
            }
        }
        (Some(_), Some(_)) => {
            return Err(CliError("pass either an instance file or --gen, not both".into()))
        }
        (None, None) => {
            return Err(CliError("verify needs an instance file or --gen <kind>".into()))
        }
    }
    let all_hold = reports.iter().all(|r| r.all_hold);
    let mut doc = ReportDocument::new("verify");
    doc.name = Some(format!("suite {}", suite_name(suite)));
    doc.instances = reports;
    doc.all_hold = Some(all_hold);
    Ok(doc)
}

fn suite_name(suite: SuiteArg) -> &'static str {
    match suite {
        SuiteArg::Core => "core",
        SuiteArg::Semi => "semi",
        SuiteArg::Cbv => "cbv",
        SuiteArg::Linear => "linear",
        SuiteArg::All => "all",
    }
}

pub fn cmd_gen(
    kind: GenKindArg,
    seed: u64,
    sizes: &GenSizeArgs,
    out: Option<&Path>,
) -> CmdResult<Option<String>> {
    let spec = gen_instance(kind.to_kind(), seed, &sizes.to_params())?;
    let name = format!("{}[{seed}]", kind.to_kind().name());
    let file = InstanceFile::from_spec(&spec, Some(name));
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    match out {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
