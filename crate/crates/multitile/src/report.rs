//! Plain-text run report with fixed section headers and deterministic
//! number formatting.

use nalgebra::DVector;

use crate::detcond::{DetProfile, LipschitzBound};
use crate::frame::BoundScan;
use crate::spectrum::{SeparationReport, SeparationVerdict, VCertificate};

/// Final verdict of a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    StructuredBasisCertified,
    NecessaryConditionFails,
    SufficiencySearchFailed,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StructuredBasisCertified => "structured-basis-certified",
            Verdict::NecessaryConditionFails => "necessary-condition-fails",
            Verdict::SufficiencySearchFailed => "sufficiency-search-failed",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Everything a pipeline run produces, ready for rendering.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    pub n_components: usize,
    pub n_nodes: usize,
    pub separation: SeparationReport,
    pub threshold: f64,
    pub case: Option<&'static str>,
    pub certificate: Option<VCertificate>,
    pub search_error: Option<String>,
    pub t: Option<Vec<DVector<f64>>>,
    pub det_floor: Option<f64>,
    pub floor_holds: Option<bool>,
    pub profile: Option<DetProfile>,
    pub lipschitz: Option<LipschitzBound>,
    pub scan: Option<BoundScan>,
    pub verdict: Verdict,
}

fn fmt(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

fn fmt_vec(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt(*x)).collect();
    format!("({})", parts.join(", "))
}

/// Renders the fixed-layout report body. No timestamps: identical runs
/// produce identical bytes.
pub fn render(r: &ScenarioReport) -> String {
    let mut out = String::new();
    out.push_str("== run ==\n");
    out.push_str(&format!("name: {}\n", r.name));
    out.push_str(&format!("components: {}\n", r.n_components));
    out.push_str(&format!("nodes: {}\n", r.n_nodes));

    out.push_str("== separation ==\n");
    out.push_str(&format!("global_min: {}\n", fmt(r.separation.global_min)));
    out.push_str(&format!("global_max: {}\n", fmt(r.separation.global_max)));
    out.push_str(&format!("threshold: {}\n", fmt(r.threshold)));
    let sep = match &r.separation.verdict {
        SeparationVerdict::FailsNecessary => "fails-necessary".to_string(),
        SeparationVerdict::PassesWith(m) => format!("passes ({})", fmt(*m)),
    };
    out.push_str(&format!("result: {sep}\n"));

    out.push_str("== sufficiency case ==\n");
    match r.case {
        Some(c) => out.push_str(&format!("case: {c}\n")),
        None => out.push_str("case: skipped\n"),
    }

    out.push_str("== certificate ==\n");
    match (&r.certificate, &r.search_error) {
        (Some(c), _) => {
            out.push_str(&format!("v: {}\n", fmt_vec(&c.v)));
            out.push_str(&format!("eps1: {}\n", fmt(c.eps1)));
            out.push_str(&format!(
                "witness: [{}, {}]\n",
                fmt(c.witness_min),
                fmt(c.witness_max)
            ));
            out.push_str(&format!("case: {}\n", c.case.letter()));
        }
        (None, Some(e)) => out.push_str(&format!("search failed: {e}\n")),
        (None, None) => out.push_str("skipped\n"),
    }

    out.push_str("== translations ==\n");
    match &r.t {
        Some(ts) => {
            for (i, t) in ts.iter().enumerate() {
                out.push_str(&format!("t_{}: {}\n", i + 1, fmt_vec(t)));
            }
            match r.det_floor {
                Some(f) => out.push_str(&format!("det_floor: {}\n", fmt(f))),
                None => out.push_str("det_floor: none\n"),
            }
        }
        None => out.push_str("none\n"),
    }

    out.push_str("== determinant profile ==\n");
    match &r.profile {
        Some(p) => {
            out.push_str(&format!("ess_inf: {}\n", fmt(p.ess_inf)));
            out.push_str(&format!("argmin_node: {}\n", p.argmin));
            out.push_str(&format!("sigma_min: {}\n", fmt(p.sigma_min)));
            match r.floor_holds {
                Some(ok) => out.push_str(&format!("floor_check: {}\n", ok)),
                None => out.push_str("floor_check: none\n"),
            }
        }
        None => out.push_str("skipped\n"),
    }

    if let Some(lb) = &r.lipschitz {
        out.push_str("== lipschitz certificate ==\n");
        out.push_str(&format!("bound: {}\n", fmt(lb.bound)));
        out.push_str(&format!("coarse_bound: {}\n", fmt(lb.coarse_bound)));
        out.push_str(&format!("qualifying_nodes: {}\n", lb.qualifying_nodes.len()));
        out.push_str(&format!(
            "max_abs_det_qualifying: {}\n",
            fmt(lb.max_abs_det_qualifying)
        ));
        out.push_str(&format!("dominates: {}\n", lb.dominates));
    }

    out.push_str("== bound scan ==\n");
    match &r.scan {
        Some(scan) => {
            out.push_str("K riesz_A riesz_B frame_A frame_B gram_drift\n");
            for row in &scan.rows {
                out.push_str(&format!(
                    "{} {} {} {} {} {}\n",
                    row.k,
                    fmt(row.riesz_a),
                    fmt(row.riesz_b),
                    fmt(row.frame_a),
                    fmt(row.frame_b),
                    fmt(row.gram_drift)
                ));
            }
        }
        None => out.push_str("skipped\n"),
    }

    out.push_str("== verdict ==\n");
    out.push_str(r.verdict.as_str());
    out.push('\n');
    out
}
