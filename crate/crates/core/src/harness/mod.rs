//! Experiment manifests: a JSON file names a code, sets of interest and a
//! list of stages, and [`run_manifest`] writes CSV plot data plus a
//! `summary.json` echoing the manifest.
//!
//! Relative paths inside a manifest (alist files, topology files, the
//! output directory) resolve against the directory passed to
//! [`run_manifest`], normally the manifest's own directory.

mod plotdata;

pub use plotdata::{emit_plotdata, fmt_num, write_table, CurveFamily, PlotDataError, Series};

use crate::absorption::{
    classify_set, containment_stats, enumerate_sets, induced_topology, EnumerationOptions, EnumerationResult, Topology,
    TopologyFile,
};
use crate::channel::{llr_mean, sigma2_from_ebn0_db};
use crate::code::{build_qc_matrix, gf2_rank, load_alist, proxy_6_32_shifts, tanner_155_shifts, SparseParityCheck, TannerGraph};
use crate::decoder::{Decoder, DecoderConfig, Quantization};
use crate::density::{DensityError, DensityEvolution, GainReading, DEFAULT_RESOLUTION};
use crate::dynamics::{ber_estimate, AnalyzedSet, ErrorFloorInputs, Formula, InputsError};
use crate::sampling::{BiasSpec, Campaign, CampaignConfig, IsEstimate, Selection};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Version string written into every summary.
pub const VERSION: &str = env!("FLOORLINE_VERSION");

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FLOORLINE_WORKERS";

/// Sizes the global rayon pool from [`WORKERS_ENV`] when it is set.
/// Returns the configured count.
pub fn init_workers_from_env() -> Result<Option<usize>, String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    Ok(Some(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CodeSource {
    /// `tanner155` or `proxy-6-32`.
    Builtin { name: String },
    Qc { shifts: Vec<Vec<usize>>, p: usize },
    Alist { path: PathBuf },
}

impl CodeSource {
    pub fn load(&self, base: &Path) -> Result<SparseParityCheck, String> {
        match self {
            CodeSource::Builtin { name } => builtin_code(name).ok_or_else(|| format!("unknown builtin code {name:?}")),
            CodeSource::Qc { shifts, p } => build_qc_matrix(shifts, *p).map_err(|e| e.to_string()),
            CodeSource::Alist { path } => load_alist(base.join(path)).map_err(|e| e.to_string()),
        }
    }
}

pub fn builtin_code(name: &str) -> Option<SparseParityCheck> {
    match name {
        "tanner155" => build_qc_matrix(&tanner_155_shifts(), 31).ok(),
        "proxy-6-32" => build_qc_matrix(&proxy_6_32_shifts(), 64).ok(),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSource {
    /// Bundled topology, see [`crate::fixtures::by_name`].
    Fixture { name: String },
    /// Topology JSON file.
    Topology { path: PathBuf },
    /// Variable indices in the manifest's code.
    Variables { variables: Vec<usize> },
    /// Every census set of signature `(a, b)`; analysis uses the first.
    Census { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSpec {
    #[serde(flatten)]
    pub source: SetSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Number of sets of this shape in the code, for the BER estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusStage {
    pub a_max: usize,
    pub b_max: usize,
    #[serde(default)]
    pub qc: bool,
    /// `[[a, b], [a', b']]`: fraction of `(a, b)` sets inside some
    /// `(a', b')` set.
    #[serde(default)]
    pub containment: Vec<[[usize; 2]; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub d_v: usize,
    pub d_c: usize,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub gain: GainReading,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaStage {
    pub formulas: Vec<Formula>,
    pub clips: Vec<f64>,
    pub iters: usize,
    pub snr: Vec<f64>,
    /// Defaults to the code's regular degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    /// Defaults to the code's true rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Code length for the BER estimate; defaults to the code's length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceStage {
    pub shift: f64,
    pub samples: usize,
    pub snr: Vec<f64>,
    pub clips: Vec<f64>,
    /// `null` entries run in floating point.
    #[serde(default = "float_only")]
    pub bits: Vec<Option<u32>>,
    #[serde(default)]
    pub selection: Selection,
}

fn float_only() -> Vec<Option<u32>> {
    vec![None]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStage {
    /// Index into `sets`.
    #[serde(default)]
    pub set: usize,
    /// Channel LLR magnitude; the set starts at `−m`, every other bit at `+m`.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census: Option<CensusStage>,
    #[serde(default)]
    pub eigen: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulas: Option<FormulaStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<ImportanceStage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceStage>,
    #[serde(default)]
    pub dot_plot: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot parse manifest: {0}")]
    Parse(String),
    #[error("invalid manifest; missing: [{}]; problems: [{}]", missing.join(", "), problems.join("; "))]
    Invalid { missing: Vec<String>, problems: Vec<String> },
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl HarnessError {
    /// Process exit code: 2 for validation, 3 for stage failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse(_) | HarnessError::Invalid { .. } => 2,
            HarnessError::Stage { .. } => 3,
        }
    }
}

fn fail(stage: &'static str, message: impl std::fmt::Display) -> HarnessError {
    HarnessError::Stage {
        stage,
        message: message.to_string(),
    }
}

trait AtStage<T> {
    fn at(self, stage: &'static str) -> Result<T, HarnessError>;
}

impl<T, E: std::fmt::Display> AtStage<T> for Result<T, E> {
    fn at(self, stage: &'static str) -> Result<T, HarnessError> {
        self.map_err(|e| fail(stage, e))
    }
}

const BUNDLED: [(&str, &str); 4] = [
    ("tanner155-table1", include_str!("../../manifests/tanner155-table1.json")),
    ("ieee88-eigen", include_str!("../../manifests/ieee88-eigen.json")),
    ("tanner155-floor", include_str!("../../manifests/tanner155-floor.json")),
    ("ieee88-formulas", include_str!("../../manifests/ieee88-formulas.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

pub fn bundled(name: &str) -> Option<ExperimentManifest> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| serde_json::from_str(text).expect("bundled manifest parses"))
}

impl ExperimentManifest {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    fn has_stage(&self) -> bool {
        self.census.is_some()
            || self.eigen
            || self.formulas.is_some()
            || self.importance.is_some()
            || self.trace.is_some()
            || self.dot_plot
    }

    /// Lists every missing field and inconsistency at once.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut missing = Vec::new();
        let mut problems = Vec::new();
        if self.name.as_deref().is_none_or(str::is_empty) {
            missing.push("name".to_string());
        }
        if self.seed.is_none() {
            missing.push("seed".into());
        }
        if self.output.is_none() {
            missing.push("output".into());
        }
        if !self.has_stage() {
            missing.push("stage (one of census, eigen, formulas, importance, trace, dot_plot)".into());
        }
        let needs_sets = self.eigen || self.formulas.is_some() || self.importance.is_some() || self.trace.is_some();
        if needs_sets && self.sets.is_empty() {
            missing.push("sets".into());
        }
        let code_sets = self
            .sets
            .iter()
            .any(|s| matches!(s.source, SetSource::Variables { .. } | SetSource::Census { .. }));
        let needs_code = self.census.is_some() || self.importance.is_some() || self.trace.is_some() || self.dot_plot || code_sets;
        if needs_code && self.code.is_none() {
            missing.push("code".into());
        }
        if (self.importance.is_some() || self.trace.is_some()) && self.decoder.is_none() {
            missing.push("decoder".into());
        }
        if self.sets.iter().any(|s| matches!(s.source, SetSource::Census { .. })) && self.census.is_none() {
            problems.push("census sets need a census stage".into());
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r <= 1.0) {
                problems.push(format!("rate {r} outside (0, 1]"));
            }
        }
        if let Some(f) = &self.formulas {
            if f.formulas.is_empty() || f.clips.is_empty() || f.snr.is_empty() {
                problems.push("formulas needs nonempty formulas, clips and snr".into());
            }
            if self.code.is_none() && f.ensemble.is_none() {
                problems.push("formulas without a code needs an ensemble".into());
            }
            if self.code.is_none() && f.rate.is_none() && self.rate.is_none() {
                problems.push("formulas without a code needs a rate".into());
            }
        }
        if let Some(is) = &self.importance {
            if is.samples == 0 || is.snr.is_empty() || is.clips.is_empty() || is.bits.is_empty() {
                problems.push("importance needs samples ≥ 1 and nonempty snr, clips and bits".into());
            }
            if self
                .sets
                .iter()
                .any(|s| !matches!(s.source, SetSource::Variables { .. } | SetSource::Census { .. }))
            {
                problems.push("importance targets must be variable or census sets".into());
            }
        }
        if let Some(t) = &self.trace {
            match self.sets.get(t.set) {
                Some(s) if matches!(s.source, SetSource::Variables { .. } | SetSource::Census { .. }) => {}
                Some(_) => problems.push("trace set must be a variable or census set".into()),
                None if !self.sets.is_empty() => problems.push(format!("trace set {} out of range", t.set)),
                None => {}
            }
        }
        if missing.is_empty() && problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid { missing, problems })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub a: usize,
    pub b: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentRow {
    pub inner: [usize; 2],
    pub outer: [usize; 2],
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub label: String,
    pub a: usize,
    pub b: usize,
    pub mu_max: f64,
    pub v_max: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub variables: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub bit_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub manifest: ExperimentManifest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<CodeInfo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub census: Vec<CensusRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub containment: Vec<ContainmentRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eigen: Vec<EigenReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub importance: Vec<IsRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceSummary>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeInfo {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsRow {
    pub clip: f64,
    pub bits: Option<u32>,
    pub estimate: IsEstimate,
}

#[derive(Debug, Clone)]
pub struct ArtifactBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Summary,
}

/// Inputs of the set formulas at each SNR, from density evolution of the
/// ensemble with messages clipped at `clip`.
pub fn floor_inputs(
    ensemble: &EnsembleSpec,
    rate: f64,
    clip: f64,
    iters: usize,
    snr: &[f64],
) -> Result<Vec<ErrorFloorInputs>, FloorError> {
    let sigma2: Vec<f64> = snr.iter().map(|&db| sigma2_from_ebn0_db(db, rate)).collect();
    if iters == 0 {
        return sigma2
            .iter()
            .map(|&s| Ok(ErrorFloorInputs::new(llr_mean(s), Vec::new(), vec![1.0], clip)?))
            .collect();
    }
    let de = DensityEvolution::new(clip, ensemble.resolution)?;
    de.evolve_many(ensemble.d_v, ensemble.d_c, &sigma2, iters)
        .into_iter()
        .map(|t| Ok(t?.inputs(iters, ensemble.gain)?))
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum FloorError {
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Inputs(#[from] InputsError),
}

/// `(E_b/N_0, P_AS)` along `snr` for one formula.
pub fn formula_curve(
    set: &AnalyzedSet,
    formula: Formula,
    ensemble: &EnsembleSpec,
    rate: f64,
    clip: f64,
    iters: usize,
    snr: &[f64],
) -> Result<Vec<(f64, f64)>, FloorError> {
    let inputs = floor_inputs(ensemble, rate, clip, iters, snr)?;
    Ok(snr.iter().zip(&inputs).map(|(&db, inp)| (db, formula.eval(set, inp))).collect())
}

struct ResolvedSet {
    label: String,
    topology: Topology,
    /// Code variables of every set this entry stands for.
    members: Vec<Vec<usize>>,
    multiplicity: usize,
}

fn resolve_sets(
    m: &ExperimentManifest,
    base: &Path,
    h: Option<&SparseParityCheck>,
    census: Option<&EnumerationResult>,
) -> Result<Vec<ResolvedSet>, HarnessError> {
    let from_vars = |vars: &[usize]| -> Result<Topology, HarnessError> {
        let h = h.expect("validated: code present");
        let set = classify_set(h, vars).at("sets")?;
        induced_topology(h, &set).at("sets")
    };
    let mut out = Vec::new();
    for (i, spec) in m.sets.iter().enumerate() {
        let (default_label, topology, members) = match &spec.source {
            SetSource::Fixture { name } => {
                let file = crate::fixtures::by_name(name).ok_or_else(|| fail("sets", format!("unknown fixture {name:?}")))?;
                (name.clone(), Topology::from_file(&file).at("importance")?, Vec::new())
            }
            SetSource::Topology { path } => {
                let text = std::fs::read_to_string(base.join(path)).at("importance")?;
                let file: TopologyFile = serde_json::from_str(&text).at("importance")?;
                let label = file.name.clone().unwrap_or_else(|| path.display().to_string());
                (label, Topology::from_file(&file).at("importance")?, Vec::new())
            }
            SetSource::Variables { variables } => {
                let mut v = variables.clone();
                v.sort_unstable();
                (format!("set{i}"), from_vars(&v)?, vec![v])
            }
            SetSource::Census { a, b } => {
                let all = census.expect("validated: census stage present").get(*a, *b);
                let first = all.first().ok_or_else(|| fail("sets", format!("census has no ({a},{b}) sets")))?;
                (format!("({a},{b})"), from_vars(first)?, all.to_vec())
            }
        };
        let multiplicity = spec.multiplicity.unwrap_or(members.len().max(1));
        out.push(ResolvedSet {
            label: spec.label.clone().unwrap_or(default_label),
            topology,
            members,
            multiplicity,
        });
    }
    Ok(out)
}

/// Runs every stage of a validated manifest and writes its artifacts.
pub fn run_manifest(m: &ExperimentManifest, base: &Path) -> Result<ArtifactBundle, HarnessError> {
    m.validate()?;
    let dir = base.join(m.output.as_ref().expect("validated"));
    let seed = m.seed.expect("validated");
    std::fs::create_dir_all(&dir).at("output")?;
    let mut files = Vec::new();
    let mut families = Vec::new();
    let mut summary = Summary {
        version: VERSION.to_string(),
        manifest: m.clone(),
        code: None,
        census: Vec::new(),
        containment: Vec::new(),
        eigen: Vec::new(),
        importance: Vec::new(),
        trace: None,
        files: Vec::new(),
    };

    let h = m.code.as_ref().map(|c| c.load(base)).transpose().at("code")?;
    if let Some(h) = &h {
        let rank = gf2_rank(h);
        summary.code = Some(CodeInfo {
            n: h.n_cols(),
            m: h.n_rows(),
            rank,
            rate: (h.n_cols() - rank) as f64 / h.n_cols() as f64,
        });
    }
    let rate = m.rate.or(summary.code.as_ref().map(|c| c.rate));

    if m.dot_plot {
        let h = h.as_ref().expect("validated");
        let mut fam = CurveFamily::new("h_matrix", "positions of the ones of H, 0-based", &["row", "col"]);
        fam.push("H", h.ones().map(|(r, c)| vec![r as f64, c as f64]).collect());
        families.push(fam);
    }

    let census = match &m.census {
        Some(c) => {
            let h = h.as_ref().expect("validated");
            let mut opts = EnumerationOptions::new(c.a_max, c.b_max);
            if c.qc {
                let p = h.qc().map(|q| q.p).ok_or_else(|| fail("census", "code has no circulant structure"))?;
                opts = opts.with_qc(p);
            }
            let res = enumerate_sets(h, &opts).at("census")?;
            if !res.exhaustive {
                return Err(fail("census", "enumeration was not exhaustive"));
            }
            summary.census = res
                .multiplicities()
                .into_iter()
                .map(|((a, b), multiplicity)| CensusRow { a, b, multiplicity })
                .collect();
            for [inner, outer] in &c.containment {
                summary.containment.push(ContainmentRow {
                    inner: *inner,
                    outer: *outer,
                    fraction: containment_stats(res.get(inner[0], inner[1]), res.get(outer[0], outer[1])),
                });
            }
            let path = dir.join("census.csv");
            let rows: Vec<Vec<String>> = summary
                .census
                .iter()
                .map(|r| vec![r.a.to_string(), r.b.to_string(), r.multiplicity.to_string()])
                .collect();
            let header = ["a", "b", "multiplicity"].map(String::from);
            write_table(&path, "census: a,b,multiplicity; absorption sets by size and odd-check count", &header, &rows)
                .at("census")?;
            files.push(path);
            Some(res)
        }
        None => None,
    };

    let sets = resolve_sets(m, base, h.as_ref(), census.as_ref())?;
    let analyzed: Vec<AnalyzedSet> = if m.eigen || m.formulas.is_some() {
        sets.iter()
            .map(|s| AnalyzedSet::new(&s.topology))
            .collect::<Result<_, _>>()
            .at("eigen")?
    } else {
        Vec::new()
    };

    if m.eigen {
        let mut fam = CurveFamily::new("eigen", "dominant eigenvector of VC per set, edges 1-based", &["edge", "v_max", "mu_max"]);
        for (s, an) in sets.iter().zip(&analyzed) {
            summary.eigen.push(EigenReport {
                label: s.label.clone(),
                a: s.topology.a(),
                b: s.topology.b(),
                mu_max: an.eigen.mu_max,
                v_max: an.eigen.v_max.clone(),
                residual: an.eigen.residual,
            });
            fam.push(
                s.label.clone(),
                an.eigen
                    .v_max
                    .iter()
                    .enumerate()
                    .map(|(e, &v)| vec![(e + 1) as f64, v, an.eigen.mu_max])
                    .collect(),
            );
        }
        families.push(fam);
    }

    if let Some(f) = &m.formulas {
        let ensemble = match (f.ensemble, h.as_ref().and_then(|h| h.regular_degrees())) {
            (Some(e), _) => e,
            (None, Some((d_v, d_c))) => EnsembleSpec {
                d_v,
                d_c,
                resolution: DEFAULT_RESOLUTION,
                gain: GainReading::default(),
            },
            (None, None) => return Err(fail("formulas", "code is irregular; give an ensemble")),
        };
        let rate = f.rate.or(rate).expect("validated");
        let length = f.length.or(h.as_ref().map(|h| h.n_cols()));
        let mut fam = CurveFamily::new(
            "formulas",
            "set failure probability and union BER estimate vs Eb/N0 in dB",
            &["EbN0_dB", "P_AS", "BER_estimate"],
        );
        for &clip in &f.clips {
            let inputs = floor_inputs(&ensemble, rate, clip, f.iters, &f.snr).at("formulas")?;
            for (s, an) in sets.iter().zip(&analyzed) {
                for &formula in &f.formulas {
                    let rows = f
                        .snr
                        .iter()
                        .zip(&inputs)
                        .map(|(&db, inp)| {
                            let p = formula.eval(an, inp);
                            let ber = length.map_or(f64::NAN, |n| ber_estimate(&[(s.multiplicity, s.topology.a(), p)], n));
                            vec![db, p, ber]
                        })
                        .collect();
                    fam.push(format!("{} {} tau={clip}", s.label, formula.name()), rows);
                }
            }
        }
        families.push(fam);
    }

    if let Some(is) = &m.importance {
        let h = h.as_ref().expect("validated");
        let targets: Vec<Vec<usize>> = sets.iter().flat_map(|s| s.members.iter().cloned()).collect();
        let config = CampaignConfig {
            decoder: m.decoder.expect("validated"),
            rate: rate.expect("code present"),
            samples: is.samples,
            seed,
        };
        let bias = BiasSpec {
            targets,
            shift: is.shift,
            selection: is.selection,
        };
        let campaign = Campaign::new(h, bias, config).at("importance")?;
        let mut fam = CurveFamily::new(
            "importance",
            "importance-sampling estimates vs Eb/N0 in dB; var is the BER estimator variance",
            &["EbN0_dB", "BER", "FER", "var", "rel_halfwidth", "raw_errors"],
        );
        for &clip in &is.clips {
            for &bits in &is.bits {
                let mut dec = campaign.config().decoder;
                dec.clip = clip;
                dec.quantization = bits.map_or(Quantization::Float, |bits| Quantization::Fixed { bits });
                let c = campaign.with_decoder(dec).at("importance")?;
                let ests = c.run(&is.snr).at("importance")?;
                let label = match bits {
                    Some(b) => format!("tau={clip} bits={b}"),
                    None => format!("tau={clip} float"),
                };
                fam.push(label, ests.iter().map(is_row).collect());
                summary
                    .importance
                    .extend(ests.into_iter().map(|estimate| IsRow { clip, bits, estimate }));
            }
        }
        families.push(fam);
    }

    if let Some(t) = &m.trace {
        let h = h.as_ref().expect("validated");
        let vars = sets[t.set].members[0].clone();
        let mut llr = vec![t.magnitude; h.n_cols()];
        for &v in &vars {
            llr[v] = -t.magnitude;
        }
        let graph = TannerGraph::new(h);
        let mut dec = Decoder::new(&graph, m.decoder.expect("validated")).at("trace")?;
        let out = dec.decode_traced(&llr, &vars).at("trace")?;
        let trace = out.trace.as_ref().expect("traced decode");
        let mut fam = CurveFamily::new(
            "trace",
            "accumulated LLR of each set variable per iteration",
            &["iteration", "node", "llr"],
        );
        fam.push(
            sets[t.set].label.clone(),
            trace.triples().map(|(i, v, x)| vec![i as f64, v as f64, x]).collect(),
        );
        families.push(fam);
        summary.trace = Some(TraceSummary {
            variables: vars,
            converged: out.converged,
            iterations: out.iterations,
            bit_errors: out.bit_errors(),
        });
    }

    files.extend(emit_plotdata(&dir, &families).at("output")?);
    summary.files = files
        .iter()
        .map(|p| p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()))
        .collect();
    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).at("output")?;
    std::fs::write(&path, text + "\n").at("output")?;
    files.push(path);
    Ok(ArtifactBundle { dir, files, summary })
}

/// `EbN0_dB, BER, FER, var, rel_halfwidth, raw_errors`.
pub fn is_row(e: &IsEstimate) -> Vec<f64> {
    vec![e.ebn0_db, e.ber, e.fer, e.ber_var, e.rel_halfwidth, e.raw_errors as f64]
}

/// Census rows keyed by `(a, b)`.
pub fn census_map(rows: &[CensusRow]) -> BTreeMap<(usize, usize), usize> {
    rows.iter().map(|r| ((r.a, r.b), r.multiplicity)).collect()
}
