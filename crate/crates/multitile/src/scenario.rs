//! Built-in scenario fixtures and the full pipeline: assemble, separation
//! test, case classification, vector search, determinant profile, bound
//! scan, report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use crate::config::{parse_config, BaseSpec, ScenarioConfig, ThresholdSpec};
use crate::detcond::{ess_inf_det, lipschitz_det_bound, profile_csv};
use crate::error::{Error, Result};
use crate::frame::{bound_convergence_scan, FourierPath};
use crate::group::{make_subgroup, ClosedSubgroup, DEFAULT_TOL};
use crate::measure::{
    assemble_multitile, difference_cover, CoverParams, MultiTileMeasure, QuadMeasure,
    TranslationField,
};
use crate::report::{render, ScenarioReport, Verdict};
use crate::spectrum::{
    classify_case, construct_v, det_floor, min_separation, structured_spectrum, vandermonde_t,
    SearchParams, SeparationVerdict, SufficiencyCase, DEFAULT_SEPARATION_THRESHOLD,
};

const SQUARE_BOUNDARY_CFG: &str = include_str!("../configs/square_boundary.cfg");
const SEPARATED_SQUARE_CFG: &str = include_str!("../configs/separated_square.cfg");
const PLUS_SPACE_CFG: &str = include_str!("../configs/plus_space.cfg");
const HELIX3D_CFG: &str = include_str!("../configs/helix3d.cfg");
const CANTOR_MULTITILE_CFG: &str = include_str!("../configs/cantor_multitile.cfg");
const CUBE_MULTITILE_CFG: &str = include_str!("../configs/cube_multitile.cfg");

pub const BUILTIN_NAMES: [&str; 6] = [
    "square_boundary",
    "separated_square",
    "plus_space",
    "helix3d",
    "cantor_multitile",
    "cube_multitile",
];

fn param_f64(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| Error::BadParams(format!("{key} must be a real number, got `{v}`"))),
    }
}

fn reject_unknown(params: &BTreeMap<String, String>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::BadParams(format!("unknown parameter `{k}`")));
        }
    }
    Ok(())
}

/// Resolves a builtin name and its parameters into a full config.
pub fn builtin_config(
    name: &str,
    params: &BTreeMap<String, String>,
) -> Result<ScenarioConfig> {
    let mut cfg = match name {
        "square_boundary" => {
            reject_unknown(params, &[])?;
            parse_config(SQUARE_BOUNDARY_CFG)?
        }
        "separated_square" => {
            reject_unknown(params, &["delta"])?;
            let delta = param_f64(params, "delta", 0.5)?;
            if delta <= 0.0 {
                return Err(Error::BadParams(format!(
                    "delta must be positive, got {delta}"
                )));
            }
            let mut cfg = parse_config(SEPARATED_SQUARE_CFG)?;
            for field in &mut cfg.fields {
                if let TranslationField::SquareBoundary { delta: d, .. } = field {
                    *d = delta;
                }
            }
            cfg
        }
        "plus_space" => {
            reject_unknown(params, &[])?;
            parse_config(PLUS_SPACE_CFG)?
        }
        "helix3d" => {
            reject_unknown(params, &[])?;
            parse_config(HELIX3D_CFG)?
        }
        "cantor_multitile" => {
            reject_unknown(params, &["shifts"])?;
            let mut cfg = parse_config(CANTOR_MULTITILE_CFG)?;
            if let Some(raw) = params.get("shifts") {
                let mut shifts: Vec<i64> = Vec::new();
                for p in raw.split(',') {
                    let s = p.trim().parse::<i64>().map_err(|_| {
                        Error::BadParams(format!("shifts must be integers, got `{p}`"))
                    })?;
                    if s == 0 || shifts.contains(&s) {
                        return Err(Error::BadParams(
                            "shifts must be distinct and nonzero".into(),
                        ));
                    }
                    shifts.push(s);
                }
                cfg.fields = vec![TranslationField::Zero];
                for s in shifts {
                    cfg.fields
                        .push(TranslationField::Shift(DVector::from_vec(vec![s as f64])));
                }
            }
            cfg
        }
        "cube_multitile" => {
            reject_unknown(params, &["level"])?;
            let mut cfg = parse_config(CUBE_MULTITILE_CFG)?;
            if let Some(raw) = params.get("level") {
                let level = raw.parse::<usize>().map_err(|_| {
                    Error::BadParams(format!("level must be a positive integer, got `{raw}`"))
                })?;
                if level < 1 {
                    return Err(Error::BadParams("level must be >= 1".into()));
                }
                cfg.fields = (0..level)
                    .map(|i| {
                        if i == 0 {
                            TranslationField::Zero
                        } else {
                            TranslationField::Shift(DVector::from_vec(vec![i as f64, 0.0]))
                        }
                    })
                    .collect();
            }
            cfg
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    cfg.name = name.to_string();
    Ok(cfg)
}

/// CLI-level overrides applied after config resolution.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub nodes: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
    pub force_all: bool,
}

pub fn apply_overrides(cfg: &mut ScenarioConfig, ov: &Overrides) {
    if let Some(n) = ov.nodes {
        match &mut cfg.base {
            BaseSpec::Segment { nodes, .. } => *nodes = n,
            BaseSpec::Region { per_axis, .. } => *per_axis = n,
            BaseSpec::Cantor4 { .. } | BaseSpec::Atomic { .. } => {}
        }
    }
    if let Some(s) = ov.seed {
        cfg.task.seed = s;
    }
    if let Some(d) = &ov.out_dir {
        cfg.output.dir = Some(d.clone());
    }
    if ov.force_all {
        cfg.task.force_all = true;
    }
}

fn build_group(cfg: &ScenarioConfig) -> Result<ClosedSubgroup> {
    let h: Vec<DVector<f64>> = cfg
        .h_basis
        .iter()
        .map(|v| DVector::from_vec(v.clone()))
        .collect();
    let gamma: Vec<DVector<f64>> = cfg
        .gamma_basis
        .iter()
        .map(|v| DVector::from_vec(v.clone()))
        .collect();
    make_subgroup(cfg.dim, &h, &gamma, DEFAULT_TOL)
}

fn build_base(cfg: &ScenarioConfig) -> Result<QuadMeasure> {
    match &cfg.base {
        BaseSpec::Segment {
            a,
            b,
            nodes,
            placement,
        } => QuadMeasure::segment(
            DVector::from_vec(a.clone()),
            DVector::from_vec(b.clone()),
            *nodes,
            *placement,
        ),
        BaseSpec::Region { lo, hi, per_axis } => QuadMeasure::region(
            DVector::from_vec(lo.clone()),
            DVector::from_vec(hi.clone()),
            *per_axis,
        ),
        BaseSpec::Atomic { atoms } => {
            let nodes = atoms
                .iter()
                .map(|(x, _)| DVector::from_vec(x.clone()))
                .collect();
            let weights = atoms.iter().map(|(_, w)| *w).collect();
            QuadMeasure::atomic(nodes, weights)
        }
        BaseSpec::Cantor4 { depth } => QuadMeasure::cantor4(*depth),
    }
}

/// Mesh-aware separation threshold: twice the coarsest node spacing for
/// continuum discretizations, the fixed default for atomic measures.
fn auto_threshold(cfg: &ScenarioConfig) -> f64 {
    match &cfg.base {
        BaseSpec::Segment { a, b, nodes, .. } => {
            let len = (DVector::from_vec(b.clone()) - DVector::from_vec(a.clone())).norm();
            2.0 * len / *nodes as f64
        }
        BaseSpec::Region { lo, hi, per_axis } => {
            let mut h: f64 = 0.0;
            for (l, u) in lo.iter().zip(hi.iter()) {
                h = h.max((u - l).abs() / *per_axis as f64);
            }
            2.0 * h
        }
        BaseSpec::Atomic { .. } | BaseSpec::Cantor4 { .. } => DEFAULT_SEPARATION_THRESHOLD,
    }
}

/// A doubled-resolution copy of the config, for quadrature drift estimates.
fn refined(cfg: &ScenarioConfig) -> Option<ScenarioConfig> {
    let mut fine = cfg.clone();
    match &mut fine.base {
        BaseSpec::Segment { nodes, .. } => *nodes *= 2,
        BaseSpec::Region { per_axis, .. } => *per_axis *= 2,
        BaseSpec::Atomic { .. } | BaseSpec::Cantor4 { .. } => return None,
    }
    Some(fine)
}

/// A finished run: the structured report plus every artifact body.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ScenarioReport,
    pub report_text: String,
    /// (file name from the output block, contents).
    pub files: Vec<(String, String)>,
}

/// Builds the group and assembled measure from a resolved config.
pub fn assemble_from_config(cfg: &ScenarioConfig) -> Result<(ClosedSubgroup, MultiTileMeasure)> {
    let group = build_group(cfg).map_err(|e| e.at_stage("group"))?;
    let base = build_base(cfg).map_err(|e| e.at_stage("base"))?;
    let m = assemble_multitile(
        &group,
        &base,
        &cfg.fields,
        cfg.task.sep_tol,
        cfg.task.collision_budget,
    )
    .map_err(|e| e.at_stage("assemble"))?;
    Ok((group, m))
}

/// Runs the whole pipeline on a resolved config.
pub fn run_pipeline(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let (group, m) = assemble_from_config(cfg)?;
    let threshold = match cfg.task.threshold {
        ThresholdSpec::Auto => auto_threshold(cfg),
        ThresholdSpec::Fixed(v) => v,
    };

    let separation = min_separation(&m, threshold);
    let separation_failed = separation.verdict == SeparationVerdict::FailsNecessary;

    let mut case_label: Option<&'static str> = None;
    let mut certificate = None;
    let mut search_error = None;

    let run_search = (!separation_failed || cfg.task.force_all) && m.n_components() >= 2;
    if run_search {
        let cover = difference_cover(&m, CoverParams::default()).map_err(|e| e.at_stage("cover"))?;
        let params = SearchParams {
            seed: cfg.task.seed,
            ..SearchParams::default()
        };
        let case = classify_case(&cover, &group, &params);
        case_label = Some(match case {
            SufficiencyCase::A => "a",
            SufficiencyCase::B { .. } => "b",
            SufficiencyCase::C => "c",
            SufficiencyCase::Unsupported => "unsupported",
        });
        match construct_v(&cover, &case, &group, &params) {
            Ok(cert) => certificate = Some(cert),
            Err(Error::SearchFailed(msg)) => search_error = Some(msg),
            Err(e) => return Err(e.at_stage("construct")),
        }
    }

    let floor = certificate
        .as_ref()
        .map(|c| det_floor(c.eps1, m.n_components()));
    let t: Option<Vec<DVector<f64>>> = match &certificate {
        Some(cert) => Some(vandermonde_t(&cert.v, m.n_components())),
        None => cfg
            .task
            .t
            .as_ref()
            .map(|ts| ts.iter().map(|v| DVector::from_vec(v.clone())).collect()),
    };

    let mut profile = None;
    let mut lipschitz = None;
    let mut floor_holds = None;
    let mut files: Vec<(String, String)> = Vec::new();
    files.push((cfg.output.support_csv.clone(), m.support_csv()));

    if let Some(ts) = &t {
        let p = ess_inf_det(&m, ts).map_err(|e| e.at_stage("profile"))?;
        if let Some(f) = floor {
            floor_holds = Some(p.ess_inf >= f - 1e-9);
        }
        files.push((
            cfg.output.profile_csv.clone(),
            profile_csv(&m, ts).map_err(|e| e.at_stage("profile"))?,
        ));
        if separation.global_min.is_finite() {
            lipschitz = Some(
                lipschitz_det_bound(&m, ts, separation.global_min)
                    .map_err(|e| e.at_stage("profile"))?,
            );
        }
        profile = Some(p);
    }

    let mut scan = None;
    if let (Some(ts), false) = (&t, cfg.task.k_list.is_empty()) {
        let dual = group.dual_group().map_err(|e| e.at_stage("spectrum"))?;
        let trunc = cfg.task.k_list.iter().copied().max().unwrap_or(0);
        let plan = structured_spectrum(&group, &dual, ts, trunc)
            .map_err(|e| e.at_stage("spectrum"))?;
        files.push((cfg.output.spectrum_csv.clone(), plan.csv()));
        let fine = match refined(cfg) {
            Some(fc) => Some(assemble_from_config(&fc)?.1),
            None => None,
        };
        let s = bound_convergence_scan(
            &m,
            &plan,
            &cfg.task.k_list,
            FourierPath::Quadrature,
            fine.as_ref(),
        )
        .map_err(|e| e.at_stage("scan"))?;
        files.push((cfg.output.scan_csv.clone(), s.csv()));
        scan = Some(s);
    }

    let verdict = if separation_failed {
        Verdict::NecessaryConditionFails
    } else if certificate.is_some() && floor_holds == Some(true) {
        Verdict::StructuredBasisCertified
    } else if run_search && (search_error.is_some() || certificate.is_none()) {
        Verdict::SufficiencySearchFailed
    } else {
        Verdict::Inconclusive
    };

    let report = ScenarioReport {
        name: cfg.name.clone(),
        n_components: m.n_components(),
        n_nodes: m.n_nodes(),
        separation,
        threshold,
        case: case_label,
        certificate,
        search_error,
        t,
        det_floor: floor,
        floor_holds,
        profile,
        lipschitz,
        scan,
        verdict,
    };
    let report_text = render(&report);
    Ok(RunOutput {
        report,
        report_text,
        files,
    })
}

/// Runs a builtin by name.
pub fn run_scenario(
    name: &str,
    params: &BTreeMap<String, String>,
    ov: &Overrides,
) -> Result<RunOutput> {
    let mut cfg = builtin_config(name, params)?;
    apply_overrides(&mut cfg, ov);
    run_pipeline(&cfg)
}

/// Parses and runs a config file.
pub fn run_config(path: &Path, ov: &Overrides) -> Result<(ScenarioConfig, RunOutput)> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    apply_overrides(&mut cfg, ov);
    let out = run_pipeline(&cfg)?;
    Ok((cfg, out))
}

/// Writes the report and CSV artifacts under the configured output dir.
pub fn write_outputs(cfg: &ScenarioConfig, out: &RunOutput) -> Result<Vec<PathBuf>> {
    let dir = match &cfg.output.dir {
        Some(d) => PathBuf::from(d),
        None => return Ok(Vec::new()),
    };
    std::fs::create_dir_all(&dir)?;
    let mut written = Vec::new();
    let report_path = dir.join(&cfg.output.report);
    std::fs::write(&report_path, &out.report_text)?;
    written.push(report_path);
    for (name, body) in &out.files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
