//! Flat key-value experiment configs with `[section]` headers.
//!
//! Grammar: lines are `key = value` inside a `[section]`; `#` starts a
//! comment; blank lines are ignored; repeating a key appends to a list
//! where the schema allows several entries (`zero`, `pole`).
//!
//! Schema by section (uppercase = required for the kind):
//!
//! ```text
//! [experiment]
//!   KIND       solve | mms | decay_lemma | klt | capacity | stability |
//!              holder | uniqueness | audit
//!   case_id    free-form identifier (default: the kind)
//!   seed       u64; fixes every randomized battery (default 0)
//!   output_dir path; overridden by the MA_OUTPUT_DIR environment variable
//!
//! [grid]       (all kinds except decay_lemma and klt)
//!   N          complex dimension >= 1
//!   M          samples per real axis, even, >= 4
//!   period     real side length (default 1.0)
//!
//! [reference]
//!   form       flat (default) | degenerate_hyperplane
//!   delta      eigenvalue offset for degenerate_hyperplane (default 0.0)
//!
//! [density]
//!   kind       uniform (default) | algebraic
//!   zero       c1 c2 ... c2n : exponent     (repeatable, exponent 2k >= 0)
//!   pole       c1 c2 ... c2n : exponent     (repeatable, exponent 2l < 2)
//!   lp_p       optional p > 1: verify membership in L^p before solving
//!
//! [solver]
//!   t             exponential coefficient >= 0 (default 0)
//!   eps           whitespace-separated strictly decreasing schedule
//!                 (default: single stage 0)
//!   newton_tol    sup-norm residual target (default 1e-10)
//!   max_newton    Newton iteration budget per stage (default 60)
//!   outer_mode    direct_newton (default) | t_iteration
//!   normalization sup_minus_one (default) | none
//!
//! [mms]          kind = mms
//!   grids        list of even m values (default 8 16 32)
//!   amplitude    manufactured-solution amplitude (default 0.02)
//!
//! [decay]        kind = decay_lemma
//!   profile      battery (default) | path to a two-column CSV
//!   alpha        exponent for a CSV profile (default 1.0)
//!   b            constant for a CSV profile; omit to scan
//!
//! [klt]          kind = klt
//!   exponents    a b pairs, pairs separated by ';' (default -0.5 0)
//!   eps          perturbation in a_E - eps b_E (default 0)
//!   quadrature   exponents for the refinement oracle
//!                (default -0.25 -0.5 -0.75 -1.0 -1.25)
//!   refinements  levels >= 3 (default 5)
//!
//! [capacity]     kind = capacity
//!   trials       randomized comparison pairs (default 20)
//!   amplitude    random field amplitude (default 0.5)
//!
//! [stability]    kind = stability
//!   p            density class exponent > 1 (default 2.0)
//!   deltas       perturbation sizes (default 1e-1 1e-2 1e-3 1e-4)
//!
//! [holder]       kind = holder
//!   shifts       node offsets along axis 0 (default 1 2 4)
//!   p            density class exponent for the threshold (default 2.0)
//!
//! [uniqueness]   kind = uniqueness
//!   inits        number of random starts >= 2 (default 5)
//!   amplitude    random init amplitude (default 0.1)
//!
//! [audit]        kind = audit
//!   alpha        domination exponent (default 1.0)
//! ```

use anyhow::{anyhow, bail, Context, Result};
use ma_core::density::MarkedPoint;
use ma_core::solver::{Normalization, OuterMode, SolverConfig};
use ma_core::AlgebraicDensitySpec;
use ma_core::GridSpec;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Solve,
    Mms,
    DecayLemma,
    Klt,
    Capacity,
    Stability,
    Holder,
    Uniqueness,
    Audit,
}

impl Kind {
    pub fn parse(s: &str) -> Result<Kind> {
        Ok(match s {
            "solve" => Kind::Solve,
            "mms" => Kind::Mms,
            "decay_lemma" => Kind::DecayLemma,
            "klt" => Kind::Klt,
            "capacity" => Kind::Capacity,
            "stability" => Kind::Stability,
            "holder" => Kind::Holder,
            "uniqueness" => Kind::Uniqueness,
            "audit" => Kind::Audit,
            other => bail!("unknown experiment kind `{other}`"),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Solve => "solve",
            Kind::Mms => "mms",
            Kind::DecayLemma => "decay_lemma",
            Kind::Klt => "klt",
            Kind::Capacity => "capacity",
            Kind::Stability => "stability",
            Kind::Holder => "holder",
            Kind::Uniqueness => "uniqueness",
            Kind::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Flat,
    DegenerateHyperplane,
}

#[derive(Debug, Clone)]
pub struct DensityConfig {
    pub algebraic: Option<AlgebraicDensitySpec>,
    pub lp_p: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub case_id: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: Option<GridSpec>,
    pub reference: ReferenceKind,
    pub reference_delta: f64,
    pub density: DensityConfig,
    pub solver: SolverConfig,
    // kind-specific knobs
    pub mms_grids: Vec<usize>,
    pub mms_amplitude: f64,
    pub decay_profile: Option<PathBuf>,
    pub decay_alpha: f64,
    pub decay_b: Option<f64>,
    pub klt_exponents: Vec<(f64, f64)>,
    pub klt_eps: f64,
    pub klt_quadrature: Vec<f64>,
    pub klt_refinements: usize,
    pub capacity_trials: usize,
    pub capacity_amplitude: f64,
    pub stability_p: f64,
    pub stability_deltas: Vec<f64>,
    pub holder_shifts: Vec<i64>,
    pub holder_p: f64,
    pub uniqueness_inits: usize,
    pub uniqueness_amplitude: f64,
    pub audit_alpha: f64,
    /// Raw text, echoed into the manifest.
    pub raw: String,
}

/// Section -> (key -> values in file order).
type Sections = BTreeMap<String, BTreeMap<String, Vec<String>>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current = String::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("line {}: unterminated section header", lineno + 1))?;
            current = name.trim().to_string();
            sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", lineno + 1))?;
        if current.is_empty() {
            bail!("line {}: key `{}` outside any [section]", lineno + 1, key.trim());
        }
        sections
            .get_mut(&current)
            .unwrap()
            .entry(key.trim().to_string())
            .or_default()
            .push(value.trim().to_string());
    }
    Ok(sections)
}

struct SectionView<'a> {
    name: &'a str,
    map: Option<&'a BTreeMap<String, Vec<String>>>,
}

impl<'a> SectionView<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.map
            .and_then(|m| m.get(key))
            .and_then(|v| v.last())
            .map(String::as_str)
    }

    fn get_all(&self, key: &str) -> Vec<&'a str> {
        self.map
            .and_then(|m| m.get(key))
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("[{}] {}: {}", self.name, key, e)),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| anyhow!("[{}] missing required key `{}`", self.name, key))
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => {
                let vals: Result<Vec<f64>, _> =
                    s.split_whitespace().map(str::parse::<f64>).collect();
                vals.map(Some)
                    .map_err(|e| anyhow!("[{}] {}: {}", self.name, key, e))
            }
        }
    }
}

fn view<'a>(sections: &'a Sections, name: &'a str) -> SectionView<'a> {
    SectionView {
        name,
        map: sections.get(name),
    }
}

fn parse_marked_point(raw: &str, axes: usize, what: &str) -> Result<MarkedPoint> {
    let (coords, exponent) = raw
        .split_once(':')
        .ok_or_else(|| anyhow!("{what} `{raw}`: expected `c1 .. c2n : exponent`"))?;
    let center: Vec<f64> = coords
        .split_whitespace()
        .map(str::parse::<f64>)
        .collect::<Result<_, _>>()
        .with_context(|| format!("{what} `{raw}`"))?;
    if center.len() != axes {
        bail!(
            "{what} `{raw}`: expected {axes} coordinates, got {}",
            center.len()
        );
    }
    let exponent: f64 = exponent
        .trim()
        .parse()
        .with_context(|| format!("{what} `{raw}` exponent"))?;
    Ok(MarkedPoint { center, exponent })
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&raw, path)
}

pub fn parse(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let sections = parse_sections(text)?;

    let exp = view(&sections, "experiment");
    let kind = Kind::parse(&exp.require::<String>("kind")?)?;
    let case_id = exp
        .get("case_id")
        .map(str::to_string)
        .unwrap_or_else(|| kind.as_str().to_string());
    let seed: u64 = exp.parse("seed")?.unwrap_or(0);
    let output_dir = match std::env::var_os("MA_OUTPUT_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => exp
            .get("output_dir")
            .map(PathBuf::from)
            .unwrap_or_else(|| {
                origin
                    .parent()
                    .unwrap_or_else(|| Path::new("."))
                    .join(format!("out_{case_id}"))
            }),
    };

    let grid = {
        let g = view(&sections, "grid");
        match (g.parse::<usize>("n")?, g.parse::<usize>("m")?) {
            (Some(n), Some(m)) => {
                let period = g.parse::<f64>("period")?.unwrap_or(1.0);
                Some(GridSpec::new(n, m, period).map_err(|e| anyhow!("[grid] {e}"))?)
            }
            (None, None) => None,
            _ => bail!("[grid] needs both n and m"),
        }
    };
    let needs_grid = !matches!(kind, Kind::DecayLemma | Kind::Klt);
    if needs_grid && grid.is_none() {
        bail!("kind `{}` requires a [grid] section", kind.as_str());
    }

    let r = view(&sections, "reference");
    let reference = match r.get("form").unwrap_or("flat") {
        "flat" => ReferenceKind::Flat,
        "degenerate_hyperplane" => ReferenceKind::DegenerateHyperplane,
        other => bail!("[reference] unknown form `{other}`"),
    };
    let reference_delta = r.parse::<f64>("delta")?.unwrap_or(0.0);

    let d = view(&sections, "density");
    let density = {
        let dkind = d.get("kind").unwrap_or("uniform");
        let algebraic = match dkind {
            "uniform" => {
                if !d.get_all("zero").is_empty() || !d.get_all("pole").is_empty() {
                    bail!("[density] kind = uniform cannot carry zero/pole entries");
                }
                None
            }
            "algebraic" => {
                let axes = grid
                    .as_ref()
                    .map(|g| g.axes())
                    .ok_or_else(|| anyhow!("[density] algebraic needs a [grid]"))?;
                let zeros = d
                    .get_all("zero")
                    .into_iter()
                    .map(|s| parse_marked_point(s, axes, "[density] zero"))
                    .collect::<Result<Vec<_>>>()?;
                let poles = d
                    .get_all("pole")
                    .into_iter()
                    .map(|s| parse_marked_point(s, axes, "[density] pole"))
                    .collect::<Result<Vec<_>>>()?;
                let spec = AlgebraicDensitySpec {
                    zeros,
                    poles,
                    ..Default::default()
                };
                spec.validate().map_err(|e| anyhow!("[density] {e}"))?;
                Some(spec)
            }
            other => bail!("[density] unknown kind `{other}`"),
        };
        DensityConfig {
            algebraic,
            lp_p: d.parse("lp_p")?,
        }
    };

    let s = view(&sections, "solver");
    let solver = {
        let mut cfg = SolverConfig {
            t: s.parse::<f64>("t")?.unwrap_or(0.0),
            ..Default::default()
        };
        if let Some(eps) = s.floats("eps")? {
            cfg.eps_schedule = eps;
        }
        if let Some(tol) = s.parse::<f64>("newton_tol")? {
            cfg.newton_tol = tol;
        }
        if let Some(mx) = s.parse::<usize>("max_newton")? {
            cfg.max_newton = mx;
        }
        cfg.outer_mode = match s.get("outer_mode").unwrap_or("direct_newton") {
            "direct_newton" => OuterMode::DirectNewton,
            "t_iteration" => OuterMode::TIteration,
            other => bail!("[solver] unknown outer_mode `{other}`"),
        };
        cfg.normalization = match s.get("normalization").unwrap_or("sup_minus_one") {
            "sup_minus_one" => Normalization::SupMinusOne,
            "none" => Normalization::None,
            other => bail!("[solver] unknown normalization `{other}`"),
        };
        cfg.validate().map_err(|e| anyhow!("[solver] {e}"))?;
        cfg
    };

    let mms = view(&sections, "mms");
    let mms_grids = mms
        .floats("grids")?
        .map(|v| v.into_iter().map(|m| m as usize).collect())
        .unwrap_or_else(|| vec![8, 16, 32]);
    let mms_amplitude = mms.parse::<f64>("amplitude")?.unwrap_or(0.02);

    let dec = view(&sections, "decay");
    let decay_profile = match dec.get("profile") {
        None | Some("battery") => None,
        Some(p) => Some(
            origin
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p),
        ),
    };
    let decay_alpha = dec.parse::<f64>("alpha")?.unwrap_or(1.0);
    let decay_b = dec.parse::<f64>("b")?;

    let klt = view(&sections, "klt");
    let klt_exponents = {
        let raw = klt.get("exponents").unwrap_or("-0.5 0");
        raw.split(';')
            .map(|pair| {
                let nums: Vec<f64> = pair
                    .split_whitespace()
                    .map(str::parse::<f64>)
                    .collect::<Result<_, _>>()
                    .map_err(|e| anyhow!("[klt] exponents: {e}"))?;
                if nums.len() != 2 {
                    bail!("[klt] exponents: each pair needs two numbers, got `{pair}`");
                }
                Ok((nums[0], nums[1]))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let klt_eps = klt.parse::<f64>("eps")?.unwrap_or(0.0);
    let klt_quadrature = klt
        .floats("quadrature")?
        .unwrap_or_else(|| vec![-0.25, -0.5, -0.75, -1.0, -1.25]);
    let klt_refinements = klt.parse::<usize>("refinements")?.unwrap_or(5);

    let cap = view(&sections, "capacity");
    let capacity_trials = cap.parse::<usize>("trials")?.unwrap_or(20);
    let capacity_amplitude = cap.parse::<f64>("amplitude")?.unwrap_or(0.5);

    let st = view(&sections, "stability");
    let stability_p = st.parse::<f64>("p")?.unwrap_or(2.0);
    let stability_deltas = st
        .floats("deltas")?
        .unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]);

    let ho = view(&sections, "holder");
    let holder_shifts = ho
        .floats("shifts")?
        .map(|v| v.into_iter().map(|s| s as i64).collect())
        .unwrap_or_else(|| vec![1, 2, 4]);
    let holder_p = ho.parse::<f64>("p")?.unwrap_or(2.0);

    let un = view(&sections, "uniqueness");
    let uniqueness_inits = un.parse::<usize>("inits")?.unwrap_or(5);
    let uniqueness_amplitude = un.parse::<f64>("amplitude")?.unwrap_or(0.1);

    let au = view(&sections, "audit");
    let audit_alpha = au.parse::<f64>("alpha")?.unwrap_or(1.0);

    Ok(ExperimentConfig {
        kind,
        case_id,
        seed,
        output_dir,
        grid,
        reference,
        reference_delta,
        density,
        solver,
        mms_grids,
        mms_amplitude,
        decay_profile,
        decay_alpha,
        decay_b,
        klt_exponents,
        klt_eps,
        klt_quadrature,
        klt_refinements,
        capacity_trials,
        capacity_amplitude,
        stability_p,
        stability_deltas,
        holder_shifts,
        holder_p,
        uniqueness_inits,
        uniqueness_amplitude,
        audit_alpha,
        raw: text.to_string(),
    })
}
