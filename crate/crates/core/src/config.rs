//! Run-configuration files.
//!
//! A configuration is a plain-text file of `section.key = value` lines.
//! `#` starts a comment, blank lines are skipped, later sections may
//! appear in any order, and every key may appear at most once.  Values
//! are scalars, comma lists, `linspace:a,b,n` sugar for an evenly spaced
//! list, or extents `a..b` (a single positive number `e` abbreviates
//! `-e..e`).
//!
//! Parsing collects *all* violations, each tagged with its line number,
//! and reports them together in one configuration error, so a bad file
//! never needs more than one round trip to fix.
//!
//! ```text
//! params.h = 1
//! params.k = 1
//! params.alpha = 1
//!
//! grid.extent = 1            # every axis spans -1..1
//! grid.nodes = 257
//! boundary.kind = expr
//! boundary.expr = x1 + 0.25 * x1 * y1
//! frequency.radii = linspace:0.05,0.8,16
//! ```

use crate::error::{Error, Result};
use crate::geometry::{GrushinParams, Point};
use crate::potential::{parse_polynomial, Polynomial, Potential};
use crate::spectrum::{Parity, SectorSpec};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// The experiment a run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Solve the Dirichlet problem and store the solution field.
    Solve,
    /// Solve, then trace the frequency function over the configured radii.
    Frequency,
    /// Solve the spherical eigenvalue problem sector by sector.
    Spectrum,
    /// Solve, then run the blow-up analysis over the configured scales.
    Blowup,
    /// Solve, then evaluate the Pohozaev and integration-by-parts
    /// balances on gauge balls.
    Pohozaev,
    /// Structural self-checks of the quadrature and degree formula.
    Report,
}

impl ExperimentKind {
    /// All kinds, in subcommand order.
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Solve,
        ExperimentKind::Frequency,
        ExperimentKind::Spectrum,
        ExperimentKind::Blowup,
        ExperimentKind::Pohozaev,
        ExperimentKind::Report,
    ];

    /// The subcommand spelling.
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::Frequency => "frequency",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Blowup => "blowup",
            ExperimentKind::Pohozaev => "pohozaev",
            ExperimentKind::Report => "report",
        }
    }

    fn parse(s: &str) -> Option<ExperimentKind> {
        Self::ALL.iter().copied().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Dirichlet boundary data for the solve step.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Homogeneous data.
    Zero,
    /// A polynomial in the coordinates, sampled on the boundary.
    Expr(Polynomial),
}

impl BoundaryData {
    /// Evaluates the data at a point.
    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            BoundaryData::Zero => 0.0,
            BoundaryData::Expr(poly) => poly.eval(p),
        }
    }
}

impl fmt::Display for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryData::Zero => write!(f, "zero"),
            BoundaryData::Expr(poly) => write!(f, "{poly}"),
        }
    }
}

/// Grid shape: per-axis extents and node counts, axes ordered
/// `x1..xh, y1..yk`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    /// Per-axis `(lo, hi)`.
    pub extents: Vec<(f64, f64)>,
    /// Per-axis node counts (odd, at least 17).
    pub nodes: Vec<usize>,
}

/// Frequency-trace settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyConfig {
    /// Ball radii, strictly increasing.
    pub radii: Vec<f64>,
    /// Gauss nodes for radial integration.
    pub radial_resolution: usize,
}

/// Spherical-spectrum settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    /// Sectors to solve.
    pub sectors: Vec<SectorSpec>,
    /// Eigenvalues per sector.
    pub count: usize,
    /// Angular cells on the coarsest refinement level.
    pub resolution: usize,
}

/// Blow-up settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupConfig {
    /// Rescaling scales.
    pub epsilons: Vec<f64>,
    /// Basis order (largest homogeneity degree represented).
    pub basis_order: usize,
    /// Target vanishing order; detected from the data when absent.
    pub target_degree: Option<f64>,
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct Config {
    /// Operator parameters.
    pub params: GrushinParams,
    /// Grid shape.
    pub grid: GridConfig,
    /// Potential in `L_a u = V u`.
    pub potential: Potential,
    /// Dirichlet boundary data.
    pub boundary: BoundaryData,
    /// Angular resolution of the sphere quadrature.
    pub quadrature_resolution: usize,
    /// Frequency-trace settings.
    pub frequency: FrequencyConfig,
    /// Spectrum settings.
    pub spectrum: SpectrumConfig,
    /// Blow-up settings.
    pub blowup: BlowupConfig,
    /// Output directory; no files are written when absent.
    pub output_dir: Option<PathBuf>,
    /// Declared experiment; must match the invoked subcommand when set.
    pub experiment: Option<ExperimentKind>,
}

/// Axis names in grid order: `x1..xh` then `y1..yk`.
pub fn axis_names(params: &GrushinParams) -> Vec<String> {
    let mut names = Vec::with_capacity(params.n());
    for i in 1..=params.h {
        names.push(format!("x{i}"));
    }
    for j in 1..=params.k {
        names.push(format!("y{j}"));
    }
    names
}

impl Config {
    /// The boundary data as a sampling closure for the solver.
    pub fn boundary_fn(&self) -> impl Fn(&Point) -> f64 + Sync + '_ {
        move |p| self.boundary.eval(p)
    }

    /// Every effective setting as deterministic `(key, value)` pairs, for
    /// run manifests.  Defaults are rendered exactly like explicit values.
    pub fn resolved_entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        out.push(("params.h".into(), self.params.h.to_string()));
        out.push(("params.k".into(), self.params.k.to_string()));
        out.push(("params.alpha".into(), self.params.alpha.to_string()));
        for (name, (lo, hi)) in axis_names(&self.params).iter().zip(&self.grid.extents) {
            out.push((format!("grid.extent.{name}"), format!("{lo}..{hi}")));
        }
        for (name, n) in axis_names(&self.params).iter().zip(&self.grid.nodes) {
            out.push((format!("grid.nodes.{name}"), n.to_string()));
        }
        out.push(("potential".into(), self.potential.to_string()));
        out.push(("boundary".into(), self.boundary.to_string()));
        out.push((
            "quadrature.resolution".into(),
            self.quadrature_resolution.to_string(),
        ));
        out.push(("frequency.radii".into(), join_floats(&self.frequency.radii)));
        out.push((
            "frequency.radial_resolution".into(),
            self.frequency.radial_resolution.to_string(),
        ));
        out.push((
            "spectrum.sectors".into(),
            self.spectrum
                .sectors
                .iter()
                .map(render_sector)
                .collect::<Vec<_>>()
                .join(","),
        ));
        out.push(("spectrum.count".into(), self.spectrum.count.to_string()));
        out.push((
            "spectrum.resolution".into(),
            self.spectrum.resolution.to_string(),
        ));
        out.push(("blowup.epsilons".into(), join_floats(&self.blowup.epsilons)));
        out.push(("blowup.basis".into(), self.blowup.basis_order.to_string()));
        if let Some(d) = self.blowup.target_degree {
            out.push(("blowup.order".into(), d.to_string()));
        }
        if let Some(dir) = &self.output_dir {
            out.push(("output.dir".into(), dir.display().to_string()));
        }
        if let Some(kind) = self.experiment {
            out.push(("experiment.kind".into(), kind.to_string()));
        }
        out
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn render_sector(s: &SectorSpec) -> String {
    match s.parity {
        None => format!("{}:{}", s.l, s.m),
        Some(Parity::Even) => format!("{}:{}:even", s.l, s.m),
        Some(Parity::Odd) => format!("{}:{}:odd", s.l, s.m),
    }
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

struct RawEntry {
    line: usize,
    value: String,
}

struct Violations(Vec<(usize, String)>);

impl Violations {
    fn push(&mut self, line: usize, msg: impl Into<String>) {
        self.0.push((line, msg.into()));
    }

    fn into_error(mut self) -> Error {
        self.0.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let body = self
            .0
            .iter()
            .map(|(line, msg)| {
                if *line == 0 {
                    format!("  {msg}")
                } else {
                    format!("  line {line}: {msg}")
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        Error::Config(body)
    }
}

/// Fixed (non-axis) keys.
const KNOWN_KEYS: [&str; 21] = [
    "params.h",
    "params.k",
    "params.alpha",
    "grid.extent",
    "grid.nodes",
    "potential.kind",
    "potential.value",
    "potential.exponent",
    "potential.expr",
    "boundary.kind",
    "boundary.expr",
    "quadrature.resolution",
    "frequency.radii",
    "frequency.radial_resolution",
    "spectrum.sectors",
    "spectrum.count",
    "spectrum.resolution",
    "blowup.epsilons",
    "blowup.basis",
    "blowup.order",
    "output.dir",
];

fn is_axis_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('x') | Some('y'))
        && matches!(chars.next(), Some('1'..='3'))
        && chars.next().is_none()
}

fn key_is_known(key: &str) -> bool {
    if KNOWN_KEYS.contains(&key) || key == "experiment.kind" {
        return true;
    }
    if let Some(axis) = key.strip_prefix("grid.extent.") {
        return is_axis_name(axis);
    }
    if let Some(axis) = key.strip_prefix("grid.nodes.") {
        return is_axis_name(axis);
    }
    false
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_u32(s: &str) -> std::result::Result<u32, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

/// A comma list of numbers, or `linspace:a,b,n`.
fn parse_f64_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if let Some(rest) = s.strip_prefix("linspace:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err("linspace takes exactly three arguments: linspace:a,b,n".into());
        }
        let a = parse_f64(parts[0].trim())?;
        let b = parse_f64(parts[1].trim())?;
        let n = parse_usize(parts[2].trim())?;
        if n < 2 {
            return Err("linspace needs at least 2 points".into());
        }
        if !(a < b) {
            return Err(format!("linspace needs a < b, got {a} and {b}"));
        }
        let step = (b - a) / (n - 1) as f64;
        return Ok((0..n).map(|i| a + step * i as f64).collect());
    }
    s.split(',')
        .map(|part| parse_f64(part.trim()))
        .collect()
}

/// `a..b`, or a single positive `e` meaning `-e..e`.
fn parse_extent(s: &str) -> std::result::Result<(f64, f64), String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse_f64(lo.trim())?;
        let hi = parse_f64(hi.trim())?;
        if !(lo < hi) {
            return Err(format!("extent needs lo < hi, got {lo}..{hi}"));
        }
        return Ok((lo, hi));
    }
    let e = parse_f64(s)?;
    if !(e > 0.0) {
        return Err(format!(
            "a single-number extent must be positive (meaning -e..e), got {e}"
        ));
    }
    Ok((-e, e))
}

fn parse_sector(s: &str) -> std::result::Result<SectorSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(format!(
            "sector `{s}` must be `l:m` or `l:m:parity`"
        ));
    }
    let l = parse_u32(parts[0].trim())?;
    let m = parse_u32(parts[1].trim())?;
    if parts.len() == 2 {
        return Ok(SectorSpec::new(l, m));
    }
    let parity = match parts[2].trim() {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => return Err(format!("parity must be `even` or `odd`, got `{other}`")),
    };
    if l != 0 {
        return Err(format!(
            "a parity sector fixes l = 0, got l = {l}"
        ));
    }
    Ok(SectorSpec::with_parity(m, parity))
}

fn get_dim(
    entries: &BTreeMap<String, RawEntry>,
    errors: &mut Violations,
    key: &str,
) -> Option<usize> {
    match entries.get(key) {
        None => {
            errors.push(0, format!("missing required key `{key}`"));
            None
        }
        Some(e) => match parse_usize(&e.value) {
            Ok(v) if (1..=3).contains(&v) => Some(v),
            _ => {
                errors.push(
                    e.line,
                    format!("{key} must be an integer in 1..=3, got `{}`", e.value),
                );
                None
            }
        },
    }
}

fn get_bounded_usize(
    entries: &BTreeMap<String, RawEntry>,
    errors: &mut Violations,
    key: &str,
    default: usize,
    min: usize,
    what: &str,
) -> usize {
    match entries.get(key) {
        None => default,
        Some(e) => match parse_usize(&e.value) {
            Ok(v) if v >= min => v,
            _ => {
                errors.push(e.line, format!("{key} must be {what}, got `{}`", e.value));
                default
            }
        },
    }
}

fn require_value(
    entries: &BTreeMap<String, RawEntry>,
    errors: &mut Violations,
    key: &str,
    kind: &str,
    line: usize,
) -> Option<String> {
    match entries.get(key) {
        Some(e) => Some(e.value.clone()),
        None => {
            errors.push(line, format!("potential.kind = {kind} requires `{key}`"));
            None
        }
    }
}

/// Parses a configuration from text, collecting all violations.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut entries: BTreeMap<String, RawEntry> = BTreeMap::new();
    let mut errors = Violations(Vec::new());

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || !key.contains('.') {
            errors.push(line, format!("key `{key}` must look like `section.name`"));
            continue;
        }
        if value.is_empty() {
            errors.push(line, format!("key `{key}` has an empty value"));
            continue;
        }
        if !key_is_known(key) {
            errors.push(line, format!("unknown key `{key}`"));
            continue;
        }
        if let Some(prev) = entries.get(key) {
            errors.push(
                line,
                format!("duplicate key `{key}` (already set on line {})", prev.line),
            );
            continue;
        }
        entries.insert(
            key.to_string(),
            RawEntry {
                line,
                value: value.to_string(),
            },
        );
    }

    // Operator parameters: required, and gate everything axis-shaped.
    let h = get_dim(&entries, &mut errors, "params.h");
    let k = get_dim(&entries, &mut errors, "params.k");
    let alpha = match entries.get("params.alpha") {
        None => {
            errors.push(0, "missing required key `params.alpha`".to_string());
            None
        }
        Some(e) => match parse_u32(&e.value) {
            Ok(v) => Some(v),
            Err(_) => {
                errors.push(
                    e.line,
                    format!("params.alpha must be a nonnegative integer, got `{}`", e.value),
                );
                None
            }
        },
    };
    let params = match (h, k, alpha) {
        (Some(h), Some(k), Some(alpha)) => match GrushinParams::new(h, k, alpha) {
            Ok(p) => Some(p),
            Err(e) => {
                errors.push(0, e.to_string());
                None
            }
        },
        _ => None,
    };

    // Grid shape. The base keys are checked even when the operator
    // parameters were rejected; only the per-axis keys need axis names.
    let default_extent = match entries.get("grid.extent") {
        None => (-1.0, 1.0),
        Some(e) => match parse_extent(&e.value) {
            Ok(v) => v,
            Err(msg) => {
                errors.push(e.line, format!("grid.extent: {msg}"));
                (-1.0, 1.0)
            }
        },
    };
    let default_nodes = match entries.get("grid.nodes") {
        None => 129,
        Some(e) => match parse_usize(&e.value) {
            Ok(v) if v >= 17 && v % 2 == 1 => v,
            _ => {
                errors.push(
                    e.line,
                    format!("grid.nodes must be odd and at least 17, got `{}`", e.value),
                );
                129
            }
        },
    };
    let mut extents: Vec<(f64, f64)> = Vec::new();
    let mut nodes: Vec<usize> = Vec::new();
    if let Some(p) = &params {
        let names = axis_names(p);
        for name in &names {
            let ext = match entries.get(&format!("grid.extent.{name}")) {
                None => default_extent,
                Some(e) => match parse_extent(&e.value) {
                    Ok(v) => v,
                    Err(msg) => {
                        errors.push(e.line, format!("grid.extent.{name}: {msg}"));
                        default_extent
                    }
                },
            };
            extents.push(ext);
            let n = match entries.get(&format!("grid.nodes.{name}")) {
                None => default_nodes,
                Some(e) => match parse_usize(&e.value) {
                    Ok(v) if v >= 17 && v % 2 == 1 => v,
                    _ => {
                        errors.push(
                            e.line,
                            format!(
                                "grid.nodes.{name} must be odd and at least 17, got `{}`",
                                e.value
                            ),
                        );
                        default_nodes
                    }
                },
            };
            nodes.push(n);
        }
        // Axis keys that name axes outside h, k.
        for (key, entry) in &entries {
            for prefix in ["grid.extent.", "grid.nodes."] {
                if let Some(axis) = key.strip_prefix(prefix) {
                    if !names.iter().any(|n| n == axis) {
                        errors.push(
                            entry.line,
                            format!(
                                "axis `{axis}` does not exist for h = {}, k = {}",
                                p.h, p.k
                            ),
                        );
                    }
                }
            }
        }
    }

    // Potential.
    let potential_kind = entries
        .get("potential.kind")
        .map(|e| (e.line, e.value.as_str()))
        .unwrap_or((0, "zero"));
    let mut potential = Potential::Zero;
    match potential_kind.1 {
        "zero" => {}
        "constant" => {
            if let Some(v) =
                require_value(&entries, &mut errors, "potential.value", "constant", potential_kind.0)
            {
                match parse_f64(&v) {
                    Ok(c) => potential = Potential::Constant(c),
                    Err(msg) => {
                        errors.push(entries["potential.value"].line, format!("potential.value: {msg}"))
                    }
                }
            }
        }
        "polynomial" => {
            if let Some(expr) =
                require_value(&entries, &mut errors, "potential.expr", "polynomial", potential_kind.0)
            {
                if let Some(p) = &params {
                    match parse_polynomial(&expr, p.h, p.k) {
                        Ok(poly) => potential = Potential::Polynomial(poly),
                        Err(e) => errors.push(
                            entries["potential.expr"].line,
                            format!("potential.expr: {e}"),
                        ),
                    }
                }
            }
        }
        "radial-power" => {
            let mut coeff = None;
            if let Some(v) = require_value(
                &entries,
                &mut errors,
                "potential.value",
                "radial-power",
                potential_kind.0,
            ) {
                match parse_f64(&v) {
                    Ok(c) => coeff = Some(c),
                    Err(msg) => {
                        errors.push(entries["potential.value"].line, format!("potential.value: {msg}"))
                    }
                }
            }
            let mut power = None;
            if let Some(v) = require_value(
                &entries,
                &mut errors,
                "potential.exponent",
                "radial-power",
                potential_kind.0,
            ) {
                match v.parse::<i32>() {
                    Ok(p) => power = Some(p),
                    Err(_) => errors.push(
                        entries["potential.exponent"].line,
                        format!("potential.exponent: `{v}` is not an integer"),
                    ),
                }
            }
            if let (Some(coeff), Some(power)) = (coeff, power) {
                potential = Potential::RadialPower { coeff, power };
            }
        }
        other => {
            errors.push(
                potential_kind.0,
                format!(
                    "potential.kind must be zero, constant, polynomial, or radial-power, \
                     got `{other}`"
                ),
            );
        }
    }
    // Stray potential keys for kinds that do not use them.
    let allowed: &[&str] = match potential_kind.1 {
        "constant" => &["potential.kind", "potential.value"],
        "polynomial" => &["potential.kind", "potential.expr"],
        "radial-power" => &["potential.kind", "potential.value", "potential.exponent"],
        _ => &["potential.kind"],
    };
    for key in ["potential.value", "potential.exponent", "potential.expr"] {
        if let Some(e) = entries.get(key) {
            if !allowed.contains(&key) {
                errors.push(
                    e.line,
                    format!(
                        "`{key}` is not meaningful for potential.kind = {}",
                        potential_kind.1
                    ),
                );
            }
        }
    }

    // Boundary data.
    let mut boundary = BoundaryData::Zero;
    let boundary_kind = entries
        .get("boundary.kind")
        .map(|e| (e.line, e.value.as_str()))
        .unwrap_or((0, "zero"));
    match boundary_kind.1 {
        "zero" => {
            if let Some(e) = entries.get("boundary.expr") {
                errors.push(
                    e.line,
                    "`boundary.expr` is not meaningful for boundary.kind = zero".to_string(),
                );
            }
        }
        "expr" => match entries.get("boundary.expr") {
            None => errors.push(
                boundary_kind.0,
                "boundary.kind = expr requires `boundary.expr`".to_string(),
            ),
            Some(e) => {
                if let Some(p) = &params {
                    match parse_polynomial(&e.value, p.h, p.k) {
                        Ok(poly) => boundary = BoundaryData::Expr(poly),
                        Err(err) => errors.push(e.line, format!("boundary.expr: {err}")),
                    }
                }
            }
        },
        other => errors.push(
            boundary_kind.0,
            format!("boundary.kind must be zero or expr, got `{other}`"),
        ),
    }

    // Simple numeric settings with defaults.
    let quadrature_resolution = get_bounded_usize(
        &entries,
        &mut errors,
        "quadrature.resolution",
        128,
        8,
        "an integer of at least 8",
    );
    let radial_resolution = get_bounded_usize(
        &entries,
        &mut errors,
        "frequency.radial_resolution",
        32,
        4,
        "an integer of at least 4",
    );
    let spectrum_count =
        get_bounded_usize(&entries, &mut errors, "spectrum.count", 4, 1, "a positive integer");
    let spectrum_resolution = get_bounded_usize(
        &entries,
        &mut errors,
        "spectrum.resolution",
        128,
        16,
        "an integer of at least 16",
    );
    let basis_order =
        get_bounded_usize(&entries, &mut errors, "blowup.basis", 12, 1, "a positive integer");

    // Radii and scales.
    let radii = match entries.get("frequency.radii") {
        None => {
            let step = (0.8 - 0.05) / 15.0;
            (0..16).map(|i| 0.05 + step * i as f64).collect()
        }
        Some(e) => match parse_f64_list(&e.value) {
            Ok(v) => {
                if v.iter().any(|r| !(*r > 0.0))
                    || v.windows(2).any(|w| !(w[0] < w[1]))
                    || v.is_empty()
                {
                    errors.push(
                        e.line,
                        "frequency.radii must be positive and strictly increasing".to_string(),
                    );
                }
                v
            }
            Err(msg) => {
                errors.push(e.line, format!("frequency.radii: {msg}"));
                Vec::new()
            }
        },
    };
    let epsilons = match entries.get("blowup.epsilons") {
        None => vec![0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.125, 0.1],
        Some(e) => match parse_f64_list(&e.value) {
            Ok(v) => {
                if v.iter().any(|x| !(*x > 0.0)) || v.len() < 2 {
                    errors.push(
                        e.line,
                        "blowup.epsilons needs at least 2 positive scales".to_string(),
                    );
                }
                v
            }
            Err(msg) => {
                errors.push(e.line, format!("blowup.epsilons: {msg}"));
                Vec::new()
            }
        },
    };
    let target_degree = match entries.get("blowup.order") {
        None => None,
        Some(e) => match parse_f64(&e.value) {
            Ok(v) if v >= 0.0 => Some(v),
            _ => {
                errors.push(
                    e.line,
                    format!("blowup.order must be a nonnegative number, got `{}`", e.value),
                );
                None
            }
        },
    };

    // Sectors.
    let mut sectors: Vec<SectorSpec> = Vec::new();
    match entries.get("spectrum.sectors") {
        None => {
            if let Some(p) = &params {
                if p.h == 1 {
                    sectors.push(SectorSpec::with_parity(0, Parity::Even));
                    sectors.push(SectorSpec::with_parity(0, Parity::Odd));
                } else {
                    sectors.push(SectorSpec::new(0, 0));
                }
            }
        }
        Some(e) => {
            for part in e.value.split(',') {
                match parse_sector(part.trim()) {
                    Ok(s) => {
                        if let Some(p) = &params {
                            if let Err(err) = s.validate(p) {
                                errors.push(e.line, format!("sector `{}`: {err}", part.trim()));
                                continue;
                            }
                        }
                        sectors.push(s);
                    }
                    Err(msg) => errors.push(e.line, format!("spectrum.sectors: {msg}")),
                }
            }
        }
    }

    let output_dir = entries
        .get("output.dir")
        .map(|e| PathBuf::from(&e.value));

    let experiment = match entries.get("experiment.kind") {
        None => None,
        Some(e) => match ExperimentKind::parse(&e.value) {
            Some(k) => Some(k),
            None => {
                errors.push(
                    e.line,
                    format!(
                        "experiment.kind must be one of solve, frequency, spectrum, blowup, \
                         pohozaev, report; got `{}`",
                        e.value
                    ),
                );
                None
            }
        },
    };

    if !errors.0.is_empty() {
        return Err(errors.into_error());
    }
    let params = params.expect("errors were empty");
    Ok(Config {
        params,
        grid: GridConfig { extents, nodes },
        potential,
        boundary,
        quadrature_resolution,
        frequency: FrequencyConfig {
            radii,
            radial_resolution,
        },
        spectrum: SpectrumConfig {
            sectors,
            count: spectrum_count,
            resolution: spectrum_resolution,
        },
        blowup: BlowupConfig {
            epsilons,
            basis_order,
            target_degree,
        },
        output_dir,
        experiment,
    })
}
