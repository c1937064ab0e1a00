//! TOML problem configuration.
//!
//! ```toml
//! [algebra]
//! family = "so3"          # so3 | sl2 | heisenberg | mixed | custom
//! a = 1.0
//! b = 2.0
//! c = 1.0
//! # custom only: dim and 1-based brackets [i, j, k, value] meaning [E_i, E_j] += value E_k
//! # h_basis / m_basis: optional rows in algebra coordinates
//!
//! [metric]
//! alpha = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
//! v = [0.5, 0.0, 0.0]
//!
//! [solver]
//! seeds = 2000
//! rng_seed = 42
//! case1_hyperplane = [[0, 1, 0], [0, 0, 1]]
//!
//! [plot]
//! plane = "x3=0"
//! resolution = 720
//! extent = 2.5
//! ```

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::criterion::GeodesicProblem;
use crate::error::Error;
use crate::lie::{LieAlgebra, ReductiveDecomposition};
use crate::minkowski::RandersStructure;
use crate::solvers::SolveConfig;

const ALGEBRA_KEYS: &[&str] = &[
    "family", "a", "b", "c", "dim", "brackets", "label", "h_basis", "m_basis",
];
const METRIC_KEYS: &[&str] = &["alpha", "v"];
const SOLVER_KEYS: &[&str] = &[
    "seeds",
    "newton_tol",
    "max_iter",
    "dedup_angle",
    "continuum_fraction",
    "rng_seed",
    "case1_hyperplane",
];
const PLOT_KEYS: &[&str] = &["plane", "axes", "resolution", "extent"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Syntax,
    UnknownKey,
    MissingKey,
    InvalidValue,
    DimensionMismatch,
    RandersBound,
    InvalidAlgebra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Dotted key path such as `metric.v`.
    pub location: String,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// All problems found in a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ConfigError {
    pub fn has(&self, kind: DiagnosticKind) -> bool {
        self.diagnostics.iter().any(|d| d.kind == kind)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    So3,
    Sl2,
    Heisenberg,
    /// `[E1, E2] = a E2 - c E3`, `[E1, E3] = c E2 + b E3`: solvable, with a
    /// degenerate but nonzero Killing form.
    Mixed,
    Custom,
}

impl Family {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "so3" => Some(Self::So3),
            "sl2" => Some(Self::Sl2),
            "heisenberg" => Some(Self::Heisenberg),
            "mixed" => Some(Self::Mixed),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::So3 => "so3",
            Self::Sl2 => "sl2",
            Self::Heisenberg => "heisenberg",
            Self::Mixed => "mixed",
            Self::Custom => "custom",
        }
    }

    /// The three-dimensional algebra of a parametric family.
    pub fn algebra(self, a: f64, b: f64, c: f64) -> Option<LieAlgebra> {
        match self {
            Self::So3 => Some(LieAlgebra::so3(a, b, c)),
            Self::Sl2 => Some(LieAlgebra::sl2(a, b, c)),
            Self::Heisenberg => Some(LieAlgebra::heisenberg()),
            Self::Mixed => Some(
                LieAlgebra::from_brackets(
                    format!("mixed({a},{b},{c})"),
                    3,
                    &[(0, 1, 1, a), (0, 1, 2, -c), (0, 2, 1, c), (0, 2, 2, b)],
                )
                .expect("semidirect product satisfies Jacobi"),
            ),
            Self::Custom => None,
        }
    }
}

/// Plane of a slice plot, given by two orthonormal `m`-vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub axes: [Vec<f64>; 2],
    /// Human-readable label, e.g. `x3=0`.
    pub label: String,
    pub resolution: usize,
    /// Half-width of the plot; `None` picks one from the indicatrix.
    pub extent: Option<f64>,
}

pub const DEFAULT_RESOLUTION: usize = 720;

impl SliceSpec {
    /// The coordinate plane `x_k = 0` of an `n`-dimensional `m`; needs `n = 3`.
    pub fn coordinate_plane(text: &str, n: usize) -> std::result::Result<Self, String> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (lhs, rhs) = compact
            .split_once('=')
            .ok_or_else(|| format!("expected a constraint like x3=0, got {text:?}"))?;
        let value: f64 = rhs
            .parse()
            .map_err(|_| format!("cannot read the value in {text:?}"))?;
        if value != 0.0 {
            return Err("only planes through the origin (x_k=0) can be sliced".into());
        }
        let k: usize = lhs
            .strip_prefix('x')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| format!("expected a coordinate like x3, got {lhs:?}"))?;
        if n != 3 {
            return Err(format!(
                "a constraint x_k=0 defines a plane only in dimension 3, m has dimension {n}"
            ));
        }
        if k == 0 || k > n {
            return Err(format!("coordinate x{k} out of range 1..={n}"));
        }
        let free: Vec<usize> = (0..n).filter(|i| *i != k - 1).collect();
        let unit = |i: usize| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        };
        Ok(Self {
            axes: [unit(free[0]), unit(free[1])],
            label: format!("x{k}=0"),
            resolution: DEFAULT_RESOLUTION,
            extent: None,
        })
    }

    /// Orthonormalizes two spanning vectors (Gram-Schmidt).
    pub fn from_axes(u: &[f64], w: &[f64]) -> std::result::Result<Self, String> {
        if u.len() != w.len() {
            return Err("plane axes have different lengths".into());
        }
        let u = DVector::from_column_slice(u);
        let w = DVector::from_column_slice(w);
        let nu = u.norm();
        if !(nu > 1e-12) {
            return Err("first plane axis is zero".into());
        }
        let u = u / nu;
        let w = &w - &u * u.dot(&w);
        let nw = w.norm();
        if !(nw > 1e-9) {
            return Err("plane axes are linearly dependent".into());
        }
        let w = w / nw;
        Ok(Self {
            axes: [u.iter().copied().collect(), w.iter().copied().collect()],
            label: "custom plane".into(),
            resolution: DEFAULT_RESOLUTION,
            extent: None,
        })
    }

    pub fn axis(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.axes[i])
    }
}

/// What was asked for, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraEcho {
    pub label: String,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<[f64; 3]>,
    pub dim: usize,
    /// Nonzero structure constants as 1-based `[i, j, k, c]` with `i < j`.
    pub brackets: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_basis: Vec<Vec<f64>>,
    pub alpha: Vec<Vec<f64>>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub family: Family,
    pub params: Option<[f64; 3]>,
    pub algebra: LieAlgebra,
    pub decomposition: ReductiveDecomposition,
    pub randers: RandersStructure,
    pub solve: SolveConfig,
    pub case1_hyperplane: Option<Vec<DVector<f64>>>,
    /// `None` when no `[plot]` section is given and the default plane does
    /// not apply.
    pub slice: Option<SliceSpec>,
}

impl ProblemConfig {
    pub fn problem(&self) -> crate::error::Result<GeodesicProblem> {
        GeodesicProblem::new(
            self.algebra.clone(),
            self.decomposition.clone(),
            self.randers.clone(),
        )
    }

    pub fn echo(&self) -> AlgebraEcho {
        let n = self.algebra.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let c = self.algebra.c(i, j, k);
                    if c != 0.0 {
                        brackets.push((i + 1, j + 1, k + 1, c));
                    }
                }
            }
        }
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        AlgebraEcho {
            label: self.algebra.label().to_string(),
            family: self.family,
            params: self.params,
            dim: n,
            brackets,
            h_basis: rows(&self.decomposition.h_basis().transpose()),
            alpha: rows(self.randers.alpha()),
            v: self.randers.drift().iter().copied().collect(),
        }
    }

    /// Config for a parametric family with `α = I`.
    pub fn family(
        family: Family,
        params: [f64; 3],
        drift: &[f64],
        solve: SolveConfig,
    ) -> crate::error::Result<Self> {
        let algebra = family
            .algebra(params[0], params[1], params[2])
            .ok_or_else(|| Error::Unsupported("custom algebras need explicit brackets".into()))?;
        let randers = RandersStructure::with_identity(DVector::from_column_slice(drift))?;
        crate::error::check_len(3, randers.dim())?;
        Ok(Self {
            family,
            params: (family != Family::Heisenberg).then_some(params),
            decomposition: ReductiveDecomposition::trivial(3),
            algebra,
            randers,
            solve,
            case1_hyperplane: None,
            slice: SliceSpec::coordinate_plane("x3=0", 3).ok(),
        })
    }
}

struct Collector {
    diagnostics: Vec<Diagnostic>,
}

impl Collector {
    fn push(&mut self, location: impl Into<String>, kind: DiagnosticKind, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic {
            location: location.into(),
            kind,
            message: message.into(),
        });
    }

    fn section<'a>(&mut self, root: &'a Table, name: &str, known: &[&str]) -> Option<&'a Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                for key in t.keys() {
                    if !known.contains(&key.as_str()) {
                        self.push(
                            format!("{name}.{key}"),
                            DiagnosticKind::UnknownKey,
                            format!("unknown key (expected one of: {})", known.join(", ")),
                        );
                    }
                }
                Some(t)
            }
            Some(_) => {
                self.push(name, DiagnosticKind::InvalidValue, "expected a table");
                None
            }
        }
    }

    fn number(&mut self, t: &Table, section: &str, key: &str) -> Option<f64> {
        let loc = format!("{section}.{key}");
        match t.get(key)? {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.push(loc, DiagnosticKind::InvalidValue, "expected a finite number");
                None
            }
        }
    }

    fn count(&mut self, t: &Table, section: &str, key: &str) -> Option<u64> {
        match t.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.push(
                    format!("{section}.{key}"),
                    DiagnosticKind::InvalidValue,
                    "expected a non-negative integer",
                );
                None
            }
        }
    }

    fn vector(&mut self, value: &Value, loc: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = value else {
            self.push(loc, DiagnosticKind::InvalidValue, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match item {
                Value::Float(x) if x.is_finite() => out.push(*x),
                Value::Integer(n) => out.push(*n as f64),
                _ => {
                    self.push(
                        format!("{loc}[{i}]"),
                        DiagnosticKind::InvalidValue,
                        "expected a finite number",
                    );
                    return None;
                }
            }
        }
        Some(out)
    }

    fn rows(&mut self, value: &Value, loc: &str) -> Option<Vec<Vec<f64>>> {
        let Value::Array(items) = value else {
            self.push(loc, DiagnosticKind::InvalidValue, "expected an array of arrays");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            out.push(self.vector(item, &format!("{loc}[{i}]"))?);
        }
        Some(out)
    }

    fn check_rows(&mut self, rows: &[Vec<f64>], width: usize, loc: &str) -> bool {
        let mut ok = true;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != width {
                self.push(
                    format!("{loc}[{i}]"),
                    DiagnosticKind::DimensionMismatch,
                    format!("expected {width} entries, got {}", r.len()),
                );
                ok = false;
            }
        }
        ok
    }
}

fn to_columns(rows: &[Vec<f64>]) -> Vec<DVector<f64>> {
    rows.iter().map(|r| DVector::from_column_slice(r)).collect()
}

fn parse_algebra(col: &mut Collector, root: &Table) -> Option<(Family, Option<[f64; 3]>, LieAlgebra)> {
    let Some(t) = col.section(root, "algebra", ALGEBRA_KEYS) else {
        if !root.contains_key("algebra") {
            col.push("algebra", DiagnosticKind::MissingKey, "missing [algebra] section");
        }
        return None;
    };
    let family = match t.get("family") {
        None => {
            col.push("algebra.family", DiagnosticKind::MissingKey, "missing family");
            return None;
        }
        Some(Value::String(name)) => match Family::parse(name) {
            Some(f) => f,
            None => {
                col.push(
                    "algebra.family",
                    DiagnosticKind::InvalidValue,
                    format!("unknown family {name:?} (so3, sl2, heisenberg, mixed, custom)"),
                );
                return None;
            }
        },
        Some(_) => {
            col.push("algebra.family", DiagnosticKind::InvalidValue, "expected a string");
            return None;
        }
    };
    let label = match t.get("label") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            col.push("algebra.label", DiagnosticKind::InvalidValue, "expected a string");
            None
        }
        None => None,
    };
    if family == Family::Custom {
        let dim = col.count(t, "algebra", "dim");
        if dim.is_none() && !t.contains_key("dim") {
            col.push("algebra.dim", DiagnosticKind::MissingKey, "custom algebras need dim");
        }
        let brackets = match t.get("brackets") {
            Some(v) => col.rows(v, "algebra.brackets"),
            None => Some(Vec::new()),
        };
        let (dim, brackets) = (dim? as usize, brackets?);
        if dim == 0 {
            col.push("algebra.dim", DiagnosticKind::InvalidValue, "dimension must be positive");
            return None;
        }
        let mut entries = Vec::with_capacity(brackets.len());
        for (n, row) in brackets.iter().enumerate() {
            let loc = format!("algebra.brackets[{n}]");
            if row.len() != 4 {
                col.push(loc, DiagnosticKind::InvalidValue, "expected [i, j, k, value]");
                return None;
            }
            let mut idx = [0usize; 3];
            for (slot, x) in idx.iter_mut().zip(&row[..3]) {
                if x.fract() != 0.0 || *x < 1.0 || *x > dim as f64 {
                    col.push(
                        loc.clone(),
                        DiagnosticKind::DimensionMismatch,
                        format!("basis index {x} outside 1..={dim}"),
                    );
                    return None;
                }
                *slot = *x as usize - 1;
            }
            entries.push((idx[0], idx[1], idx[2], row[3]));
        }
        let label = label.unwrap_or_else(|| format!("custom({dim})"));
        return match LieAlgebra::from_brackets(label, dim, &entries) {
            Ok(a) => Some((family, None, a)),
            Err(e) => {
                col.push("algebra.brackets", DiagnosticKind::InvalidAlgebra, e.to_string());
                None
            }
        };
    }
    for key in ["dim", "brackets"] {
        if t.contains_key(key) {
            col.push(
                format!("algebra.{key}"),
                DiagnosticKind::InvalidValue,
                "only meaningful for family = \"custom\"",
            );
        }
    }
    let needs_params = family != Family::Heisenberg;
    let mut params = [1.0; 3];
    let mut ok = true;
    for (slot, key) in params.iter_mut().zip(["a", "b", "c"]) {
        match col.number(t, "algebra", key) {
            Some(x) => *slot = x,
            None if needs_params && !t.contains_key(key) => {
                col.push(format!("algebra.{key}"), DiagnosticKind::MissingKey, "missing parameter");
                ok = false;
            }
            None => ok = !t.contains_key(key) && ok,
        }
    }
    if !ok {
        return None;
    }
    let mut algebra = family.algebra(params[0], params[1], params[2])?;
    if let Some(label) = label {
        algebra = LieAlgebra::new(label, algebra.dim(), algebra.structure().to_vec())
            .expect("relabelled algebra is valid");
    }
    Some((family, needs_params.then_some(params), algebra))
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let root: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            return Err(ConfigError {
                diagnostics: vec![Diagnostic {
                    location: e
                        .span()
                        .map(|s| {
                            let line = text[..s.start.min(text.len())].lines().count().max(1);
                            format!("line {line}")
                        })
                        .unwrap_or_else(|| "input".into()),
                    kind: DiagnosticKind::Syntax,
                    message: e.message().to_string(),
                }],
            })
        }
    };
    let mut col = Collector {
        diagnostics: Vec::new(),
    };
    for key in root.keys() {
        if !["algebra", "metric", "solver", "plot"].contains(&key.as_str()) {
            col.push(
                key.clone(),
                DiagnosticKind::UnknownKey,
                "unknown section (expected algebra, metric, solver, plot)",
            );
        }
    }
    let algebra = parse_algebra(&mut col, &root);
    let metric = col.section(&root, "metric", METRIC_KEYS);
    let solver = col.section(&root, "solver", SOLVER_KEYS);
    let plot = col.section(&root, "plot", PLOT_KEYS);

    let mut solve = SolveConfig::default();
    let mut hyperplane_rows = None;
    if let Some(t) = solver {
        if let Some(x) = col.count(t, "solver", "seeds") {
            solve.seeds = x as usize;
        }
        if let Some(x) = col.count(t, "solver", "max_iter") {
            solve.max_iter = x as usize;
        }
        if let Some(x) = col.count(t, "solver", "rng_seed") {
            solve.rng_seed = x;
        }
        if let Some(x) = col.number(t, "solver", "newton_tol") {
            solve.newton_tol = x;
        }
        if let Some(x) = col.number(t, "solver", "dedup_angle") {
            solve.dedup_angle = x;
        }
        if let Some(x) = col.number(t, "solver", "continuum_fraction") {
            solve.continuum_fraction = x;
        }
        if let Err(e) = solve.validate() {
            col.push("solver", DiagnosticKind::InvalidValue, e.to_string());
        }
        if let Some(v) = t.get("case1_hyperplane") {
            hyperplane_rows = col.rows(v, "solver.case1_hyperplane");
        }
    }

    let mut alpha_rows = None;
    let mut drift = None;
    if let Some(t) = metric {
        if let Some(v) = t.get("alpha") {
            alpha_rows = col.rows(v, "metric.alpha");
        }
        if let Some(v) = t.get("v") {
            drift = col.vector(v, "metric.v");
        }
    }

    let Some((family, params, algebra)) = algebra else {
        return Err(ConfigError {
            diagnostics: col.diagnostics,
        });
    };

    let decomposition = build_decomposition(&mut col, &root, &algebra);
    let n = decomposition
        .as_ref()
        .map(|d| d.dim_m())
        .unwrap_or(algebra.dim());

    let alpha = match alpha_rows {
        None => Some(DMatrix::identity(n, n)),
        Some(rows) => {
            if rows.len() != n {
                col.push(
                    "metric.alpha",
                    DiagnosticKind::DimensionMismatch,
                    format!("expected {n} rows for dim m = {n}, got {}", rows.len()),
                );
                None
            } else if col.check_rows(&rows, n, "metric.alpha") {
                Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
            } else {
                None
            }
        }
    };
    let drift = match drift {
        None => Some(DVector::zeros(n)),
        Some(v) if v.len() == n => Some(DVector::from_vec(v)),
        Some(v) => {
            col.push(
                "metric.v",
                DiagnosticKind::DimensionMismatch,
                format!("expected {n} components for dim m = {n}, got {}", v.len()),
            );
            None
        }
    };
    let randers = match (alpha, drift) {
        (Some(alpha), Some(drift)) => match RandersStructure::new(alpha, drift) {
            Ok(r) => Some(r),
            Err(Error::RandersBound(value)) => {
                col.push(
                    "metric.v",
                    DiagnosticKind::RandersBound,
                    format!("alpha(V, V) = {value} must be < 1"),
                );
                None
            }
            Err(e) => {
                col.push("metric.alpha", DiagnosticKind::InvalidValue, e.to_string());
                None
            }
        },
        _ => None,
    };

    let case1_hyperplane = hyperplane_rows.and_then(|rows| {
        col.check_rows(&rows, n, "solver.case1_hyperplane")
            .then(|| to_columns(&rows))
    });

    let slice = match plot {
        None => SliceSpec::coordinate_plane("x3=0", n).ok(),
        Some(t) => parse_slice(&mut col, t, n),
    };

    match (decomposition, randers) {
        (Some(decomposition), Some(randers)) if col.diagnostics.is_empty() => Ok(ProblemConfig {
            family,
            params,
            algebra,
            decomposition,
            randers,
            solve,
            case1_hyperplane,
            slice,
        }),
        _ => Err(ConfigError {
            diagnostics: col.diagnostics,
        }),
    }
}

fn build_decomposition(
    col: &mut Collector,
    root: &Table,
    algebra: &LieAlgebra,
) -> Option<ReductiveDecomposition> {
    let t = match root.get("algebra") {
        Some(Value::Table(t)) => t,
        _ => return None,
    };
    let dim = algebra.dim();
    let mut read = |key: &str| -> Option<Option<Vec<DVector<f64>>>> {
        match t.get(key) {
            None => Some(None),
            Some(v) => {
                let loc = format!("algebra.{key}");
                let rows = col.rows(v, &loc)?;
                col.check_rows(&rows, dim, &loc).then(|| Some(to_columns(&rows)))
            }
        }
    };
    let h = read("h_basis")?;
    let m = read("m_basis")?;
    let result = match (h, m) {
        (None, None) => return Some(ReductiveDecomposition::trivial(dim)),
        (Some(h), None) => ReductiveDecomposition::from_isotropy(algebra, &h),
        (h, Some(m)) => ReductiveDecomposition::new(algebra, &m, &h.unwrap_or_default()),
    };
    match result {
        Ok(d) => Some(d),
        Err(e) => {
            col.push("algebra.h_basis", DiagnosticKind::InvalidAlgebra, e.to_string());
            None
        }
    }
}

fn parse_slice(col: &mut Collector, t: &Table, n: usize) -> Option<SliceSpec> {
    let mut plane = match (t.get("plane"), t.get("axes")) {
        (Some(_), Some(_)) => {
            col.push("plot.axes", DiagnosticKind::InvalidValue, "give either plane or axes, not both");
            return None;
        }
        (Some(Value::String(s)), None) => match SliceSpec::coordinate_plane(s, n) {
            Ok(s) => s,
            Err(msg) => {
                col.push("plot.plane", DiagnosticKind::InvalidValue, msg);
                return None;
            }
        },
        (Some(_), None) => {
            col.push("plot.plane", DiagnosticKind::InvalidValue, "expected a string like \"x3=0\"");
            return None;
        }
        (None, Some(v)) => {
            let rows = col.rows(v, "plot.axes")?;
            if rows.len() != 2 {
                col.push("plot.axes", DiagnosticKind::InvalidValue, "expected exactly two axes");
                return None;
            }
            if !col.check_rows(&rows, n, "plot.axes") {
                return None;
            }
            match SliceSpec::from_axes(&rows[0], &rows[1]) {
                Ok(s) => s,
                Err(msg) => {
                    col.push("plot.axes", DiagnosticKind::InvalidValue, msg);
                    return None;
                }
            }
        }
        (None, None) => SliceSpec::coordinate_plane("x3=0", n).ok()?,
    };
    if let Some(r) = col.count(t, "plot", "resolution") {
        if r < 8 {
            col.push("plot.resolution", DiagnosticKind::InvalidValue, "need at least 8 samples");
        }
        plane.resolution = r as usize;
    }
    if let Some(e) = col.number(t, "plot", "extent") {
        if !(e > 0.0) {
            col.push("plot.extent", DiagnosticKind::InvalidValue, "extent must be positive");
        }
        plane.extent = Some(e);
    }
    Some(plane)
}
