//! Line-oriented key-value config format with named section blocks.
//!
//! ```text
//! # comment
//! [group]
//! dim = 2
//! h = 0,1
//! gamma = 1,0
//!
//! [base]
//! kind = segment
//! a = 0,0
//! b = 1,0
//! nodes = 1000
//! placement = midpoint
//!
//! [components]
//! field = square_boundary 1 0.5
//! field = square_boundary -1 0.5
//!
//! [task]
//! stages = all
//! threshold = auto
//! seed = 0
//! k_list = 2,4,8
//! t = 0,0 ; 0,0.3333
//!
//! [output]
//! dir = out
//! ```
//!
//! Vector-valued keys repeat one line per vector, comma-separated reals.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::measure::{NodePlacement, TranslationField};

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSpec {
    /// Mesh-aware: twice the coarsest node spacing of the discretization.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub enum BaseSpec {
    Segment {
        a: Vec<f64>,
        b: Vec<f64>,
        nodes: usize,
        placement: NodePlacement,
    },
    Region {
        lo: Vec<f64>,
        hi: Vec<f64>,
        per_axis: usize,
    },
    Atomic {
        atoms: Vec<(Vec<f64>, f64)>,
    },
    Cantor4 {
        depth: u32,
    },
}

#[derive(Debug, Clone)]
pub struct TaskSpec {
    pub threshold: ThresholdSpec,
    pub seed: u64,
    pub k_list: Vec<i64>,
    /// Explicit translations for the determinant profile; overrides the
    /// certified Vandermonde recipe when present.
    pub t: Option<Vec<Vec<f64>>>,
    pub sep_tol: f64,
    pub collision_budget: usize,
    pub force_all: bool,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            threshold: ThresholdSpec::Auto,
            seed: 0,
            k_list: vec![2, 4, 8],
            t: None,
            sep_tol: 1e-7,
            collision_budget: 0,
            force_all: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub dir: Option<String>,
    pub report: String,
    pub profile_csv: String,
    pub scan_csv: String,
    pub support_csv: String,
    pub spectrum_csv: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            report: "report.txt".into(),
            profile_csv: "profile.csv".into(),
            scan_csv: "scan.csv".into(),
            support_csv: "support.csv".into(),
            spectrum_csv: "spectrum.csv".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub dim: usize,
    pub h_basis: Vec<Vec<f64>>,
    pub gamma_basis: Vec<Vec<f64>>,
    pub base: BaseSpec,
    pub fields: Vec<TranslationField>,
    pub task: TaskSpec,
    pub output: OutputSpec,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| perr(line, format!("expected a real number, got `{}`", s.trim())))
}

fn parse_vec(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_f64(p, line)).collect()
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| perr(line, format!("expected a nonnegative integer, got `{}`", s.trim())))
}

fn parse_field(rest: &str, line: usize) -> Result<TranslationField> {
    let mut parts = rest.split_whitespace();
    let kind = parts
        .next()
        .ok_or_else(|| perr(line, "empty field spec"))?;
    let tail: Vec<&str> = parts.collect();
    match kind {
        "zero" => Ok(TranslationField::Zero),
        "helix" => Ok(TranslationField::Helix),
        "shift" => {
            let v = tail
                .first()
                .ok_or_else(|| perr(line, "shift needs a vector"))?;
            Ok(TranslationField::Shift(DVector::from_vec(parse_vec(v, line)?)))
        }
        "square_boundary" => {
            if tail.len() != 2 {
                return Err(perr(line, "square_boundary needs `<sign> <delta>`"));
            }
            Ok(TranslationField::SquareBoundary {
                sign: parse_f64(tail[0], line)?,
                delta: parse_f64(tail[1], line)?,
            })
        }
        "plus_space" => {
            let sign = tail
                .first()
                .ok_or_else(|| perr(line, "plus_space needs a sign"))?;
            Ok(TranslationField::PlusSpace {
                sign: parse_f64(sign, line)?,
            })
        }
        "piecewise" => {
            // piecewise <axis> | <breakpoints> | <vec>;<vec>;...
            let joined = tail.join(" ");
            let segs: Vec<&str> = joined.split('|').collect();
            if segs.len() != 3 {
                return Err(perr(line, "piecewise needs `<axis> | <breaks> | <values>`"));
            }
            let axis = parse_usize(segs[0], line)?;
            let breakpoints = parse_vec(segs[1], line)?;
            let values: Vec<DVector<f64>> = segs[2]
                .split(';')
                .map(|v| parse_vec(v, line).map(DVector::from_vec))
                .collect::<Result<_>>()?;
            if breakpoints.len() != values.len() || breakpoints.is_empty() {
                return Err(perr(line, "piecewise breakpoint/value count mismatch"));
            }
            Ok(TranslationField::PiecewiseLinear {
                axis,
                breakpoints,
                values,
            })
        }
        other => Err(perr(line, format!("unknown field kind `{other}`"))),
    }
}

#[derive(Default)]
struct BaseBuilder {
    kind: Option<String>,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    nodes: Option<usize>,
    per_axis: Option<usize>,
    depth: Option<u32>,
    placement: NodePlacement,
    atoms: Vec<(Vec<f64>, f64)>,
    kind_line: usize,
}

impl BaseBuilder {
    fn build(self) -> Result<BaseSpec> {
        let line = self.kind_line;
        let kind = self
            .kind
            .ok_or_else(|| perr(line, "[base] section needs `kind`"))?;
        match kind.as_str() {
            "segment" => {
                let nodes = self.nodes.ok_or_else(|| perr(line, "segment needs `nodes`"))?;
                if nodes < 2 {
                    return Err(perr(line, "node count must be >= 2"));
                }
                Ok(BaseSpec::Segment {
                    a: self.a.ok_or_else(|| perr(line, "segment needs `a`"))?,
                    b: self.b.ok_or_else(|| perr(line, "segment needs `b`"))?,
                    nodes,
                    placement: self.placement,
                })
            }
            "region" => {
                let per_axis = self
                    .per_axis
                    .ok_or_else(|| perr(line, "region needs `per_axis`"))?;
                if per_axis < 2 {
                    return Err(perr(line, "per_axis must be >= 2"));
                }
                Ok(BaseSpec::Region {
                    lo: self.lo.ok_or_else(|| perr(line, "region needs `lo`"))?,
                    hi: self.hi.ok_or_else(|| perr(line, "region needs `hi`"))?,
                    per_axis,
                })
            }
            "atomic" => {
                if self.atoms.len() < 2 {
                    return Err(perr(line, "atomic base needs at least 2 `atom` lines"));
                }
                Ok(BaseSpec::Atomic { atoms: self.atoms })
            }
            "cantor4" => Ok(BaseSpec::Cantor4 {
                depth: self.depth.ok_or_else(|| perr(line, "cantor4 needs `depth`"))?,
            }),
            other => Err(perr(line, format!("unknown base kind `{other}`"))),
        }
    }
}

/// Parses the config text. Errors carry 1-based line numbers.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut section = String::new();
    let mut name = String::from("config");
    let mut dim: Option<usize> = None;
    let mut h_basis: Vec<Vec<f64>> = Vec::new();
    let mut gamma_basis: Vec<Vec<f64>> = Vec::new();
    let mut base = BaseBuilder::default();
    let mut fields: Vec<TranslationField> = Vec::new();
    let mut task = TaskSpec::default();
    let mut output = OutputSpec::default();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(perr(lineno, "unterminated section header"));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "group" | "base" | "components" | "task" | "output" => continue,
                other => return Err(perr(lineno, format!("unknown section `[{other}]`"))),
            }
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(lineno, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        match (section.as_str(), key) {
            ("group", "dim") => dim = Some(parse_usize(value, lineno)?),
            ("group", "h") => h_basis.push(parse_vec(value, lineno)?),
            ("group", "gamma") => gamma_basis.push(parse_vec(value, lineno)?),
            ("base", "kind") => {
                base.kind = Some(value.to_string());
                base.kind_line = lineno;
            }
            ("base", "a") => base.a = Some(parse_vec(value, lineno)?),
            ("base", "b") => base.b = Some(parse_vec(value, lineno)?),
            ("base", "lo") => base.lo = Some(parse_vec(value, lineno)?),
            ("base", "hi") => base.hi = Some(parse_vec(value, lineno)?),
            ("base", "nodes") => base.nodes = Some(parse_usize(value, lineno)?),
            ("base", "per_axis") => base.per_axis = Some(parse_usize(value, lineno)?),
            ("base", "depth") => base.depth = Some(parse_usize(value, lineno)? as u32),
            ("base", "placement") => {
                base.placement = match value {
                    "midpoint" => NodePlacement::Midpoint,
                    "closed" => NodePlacement::ClosedUniform,
                    other => {
                        return Err(perr(
                            lineno,
                            format!("placement must be `midpoint` or `closed`, got `{other}`"),
                        ))
                    }
                }
            }
            ("base", "atom") => {
                // atom = <coords> : <weight>
                let (coords, w) = value
                    .split_once(':')
                    .ok_or_else(|| perr(lineno, "atom needs `<coords> : <weight>`"))?;
                base.atoms
                    .push((parse_vec(coords, lineno)?, parse_f64(w, lineno)?));
            }
            ("components", "field") => fields.push(parse_field(value, lineno)?),
            ("task", "name") => name = value.to_string(),
            ("task", "threshold") => {
                task.threshold = if value == "auto" {
                    ThresholdSpec::Auto
                } else {
                    ThresholdSpec::Fixed(parse_f64(value, lineno)?)
                }
            }
            ("task", "seed") => {
                task.seed = value
                    .parse::<u64>()
                    .map_err(|_| perr(lineno, "seed must be a nonnegative integer"))?
            }
            ("task", "k_list") => {
                task.k_list = value
                    .split(',')
                    .map(|p| {
                        p.trim()
                            .parse::<i64>()
                            .map_err(|_| perr(lineno, "k_list must be integers"))
                    })
                    .collect::<Result<_>>()?
            }
            ("task", "t") => {
                task.t = Some(
                    value
                        .split(';')
                        .map(|v| parse_vec(v, lineno))
                        .collect::<Result<_>>()?,
                )
            }
            ("task", "sep_tol") => task.sep_tol = parse_f64(value, lineno)?,
            ("task", "collision_budget") => {
                task.collision_budget = parse_usize(value, lineno)?
            }
            ("task", "force_all") => {
                task.force_all = match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(perr(lineno, "force_all must be true or false")),
                }
            }
            ("output", "dir") => output.dir = Some(value.to_string()),
            ("output", "report") => output.report = value.to_string(),
            ("output", "profile_csv") => output.profile_csv = value.to_string(),
            ("output", "scan_csv") => output.scan_csv = value.to_string(),
            ("output", "support_csv") => output.support_csv = value.to_string(),
            ("output", "spectrum_csv") => output.spectrum_csv = value.to_string(),
            ("", _) => return Err(perr(lineno, "key outside of any section")),
            (s, k) => return Err(perr(lineno, format!("unknown key `{k}` in section [{s}]"))),
        }
    }

    let dim = dim.ok_or_else(|| perr(0, "[group] section needs `dim`"))?;
    if fields.is_empty() {
        return Err(perr(0, "[components] section needs at least one `field`"));
    }
    Ok(ScenarioConfig {
        name,
        dim,
        h_basis,
        gamma_basis,
        base: base.build()?,
        fields,
        task,
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "\
# boundary-of-the-square fixture
[group]
dim = 2
h = 0,1
gamma = 1,0

[base]
kind = segment
a = 0,0
b = 1,0
nodes = 1000
placement = midpoint

[components]
field = square_boundary 1 0
field = square_boundary -1 0

[task]
name = square_boundary
threshold = auto
seed = 0
k_list = 2,4,8
t = 0,0 ; 0,0.5

[output]
report = report.txt
";

    #[test]
    fn parses_square_fixture() {
        let cfg = parse_config(SQUARE).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.h_basis, vec![vec![0.0, 1.0]]);
        assert_eq!(cfg.gamma_basis, vec![vec![1.0, 0.0]]);
        assert_eq!(cfg.fields.len(), 2);
        assert_eq!(cfg.task.k_list, vec![2, 4, 8]);
        assert_eq!(
            cfg.task.t,
            Some(vec![vec![0.0, 0.0], vec![0.0, 0.5]])
        );
        assert_eq!(cfg.name, "square_boundary");
        match &cfg.base {
            BaseSpec::Segment { nodes, .. } => assert_eq!(*nodes, 1000),
            other => panic!("wrong base {other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let text = SQUARE.replace("nodes = 1000", "nodes = many");
        match parse_config(&text) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 11),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{SQUARE}\n[task]\nbogus = 1\n");
        assert!(matches!(
            parse_config(&text),
            Err(Error::ParseError { .. })
        ));
    }

    #[test]
    fn node_count_floor() {
        let text = SQUARE.replace("nodes = 1000", "nodes = 1");
        assert!(matches!(parse_config(&text), Err(Error::ParseError { .. })));
    }

    #[test]
    fn atomic_and_piecewise_fields() {
        let text = "\
[group]
dim = 1
gamma = 1

[base]
kind = atomic
atom = 0.1 : 0.5
atom = 0.6 : 0.5

[components]
field = zero
field = piecewise 0 | 0,1 | 1;1
";
        let cfg = parse_config(text).unwrap();
        match &cfg.base {
            BaseSpec::Atomic { atoms } => assert_eq!(atoms.len(), 2),
            other => panic!("wrong base {other:?}"),
        }
        assert!(matches!(
            cfg.fields[1],
            TranslationField::PiecewiseLinear { .. }
        ));
    }
}
