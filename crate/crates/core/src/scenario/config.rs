//! Scenario files: JSON with an explicit unit convention. Numeric fields
//! accept plain numbers or short expressions in `pi` such as `"202*pi"`
//! or `"pi/2"`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::dde::{InitialCondition, DEFAULT_STEPS_PER_DELAY, MIN_STEPS_PER_DELAY};
use crate::field::SpacetimeGrid;
use crate::oracle::OracleConfig;
use crate::params::SystemParams;
use crate::spectral::{self, DEFAULT_TOL};

pub const UNITS: &str = "natural, v=1, Gamma=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Output {
    Trajectory,
    Poles,
    FieldMap,
    OracleCompare,
}

impl Output {
    pub const ALL: [Output; 4] = [Output::Trajectory, Output::Poles, Output::FieldMap, Output::OracleCompare];

    pub fn name(self) -> &'static str {
        match self {
            Output::Trajectory => "trajectory",
            Output::Poles => "poles",
            Output::FieldMap => "field-map",
            Output::OracleCompare => "oracle-compare",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Dotted path of the offending key; empty for the whole document.
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        if self.key.is_empty() {
            write!(f, "{tag}: {}", self.message)
        } else {
            write!(f, "{tag}: `{}`: {}", self.key, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub config: OracleConfig,
    pub horizon: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub params: SystemParams,
    pub subspaces: Vec<u32>,
    pub init: InitialCondition,
    pub horizon: f64,
    pub steps_per_delay: usize,
    pub point_like: bool,
    /// Values of `g` run as separate variants; empty runs `params.g` once.
    pub g_sweep: Vec<f64>,
    pub outputs: Vec<Output>,
    pub field_grid: SpacetimeGrid,
    pub oracle: OracleSettings,
    pub bic_tol: f64,
}

impl Scenario {
    /// Parameter sets to run, one per sweep value.
    pub fn variants(&self) -> Vec<SystemParams> {
        if self.g_sweep.is_empty() {
            vec![self.params]
        } else {
            self.g_sweep.iter().map(|&g| SystemParams { g, ..self.params }).collect()
        }
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

/// Evaluates `"3"`, `"pi"`, `"202*pi"`, `"pi/2"`, `"-1.5*pi/4"`.
pub fn parse_expr(s: &str) -> Option<f64> {
    let s = s.trim();
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s),
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut token = String::new();
    let apply = |value: &mut f64, op: char, token: &str| -> Option<()> {
        let t = token.trim();
        let x = if t.eq_ignore_ascii_case("pi") {
            PI
        } else {
            t.parse::<f64>().ok()?
        };
        if !x.is_finite() {
            return None;
        }
        match op {
            '*' => *value *= x,
            _ => *value /= x,
        }
        Some(())
    };
    for c in body.chars() {
        if c == '*' || c == '/' {
            apply(&mut value, op, &token)?;
            op = c;
            token.clear();
        } else {
            token.push(c);
        }
    }
    apply(&mut value, op, &token)?;
    Some(sign * value).filter(|v| v.is_finite())
}

struct Reader {
    diags: Vec<Diagnostic>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}

impl Reader {
    fn error(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Error,
            key: key.into(),
            message: message.into(),
        });
    }

    fn warn(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            key: key.into(),
            message: message.into(),
        });
    }

    fn has_errors(&self) -> bool {
        self.diags.iter().any(|d| d.severity == Severity::Error)
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.error(join(path, k), "unknown key");
            }
        }
    }

    fn number_value(&mut self, v: &Value, key: &str) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => {
                let x = parse_expr(s);
                if x.is_none() {
                    self.error(key, format!("cannot evaluate {s:?}"));
                }
                x
            }
            _ => {
                self.error(key, "expected a number or an expression string");
                None
            }
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        let full = join(path, key);
        obj.get(key).and_then(|v| self.number_value(v, &full))
    }

    fn required(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<f64> {
        if !obj.contains_key(key) {
            self.error(join(path, key), "missing required key");
            return None;
        }
        self.number(obj, path, key)
    }

    fn count(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<usize> {
        let v = obj.get(key)?;
        match v.as_u64() {
            Some(n) => Some(n as usize),
            None => {
                self.error(join(path, key), "expected a non-negative integer");
                None
            }
        }
    }

    fn object<'a>(&mut self, obj: &'a Map<String, Value>, path: &str, key: &str) -> Option<&'a Map<String, Value>> {
        match obj.get(key) {
            None => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.error(join(path, key), "expected an object");
                None
            }
        }
    }

    fn complex(&mut self, v: &Value, key: &str) -> Option<Complex64> {
        match v {
            Value::Array(a) if a.len() == 2 => {
                let re = self.number_value(&a[0], &format!("{key}[0]"))?;
                let im = self.number_value(&a[1], &format!("{key}[1]"))?;
                Some(Complex64::new(re, im))
            }
            Value::Array(_) => {
                self.error(key, "expected [re, im]");
                None
            }
            _ => self.number_value(v, key).map(|x| Complex64::new(x, 0.0)),
        }
    }
}

fn read_params(r: &mut Reader, obj: &Map<String, Value>) -> Option<SystemParams> {
    const P: &str = "params";
    r.unknown_keys(
        obj,
        P,
        &[
            "omega_e",
            "omega_s",
            "omega_c",
            "delta",
            "g",
            "gamma_total",
            "gamma_coll",
            "j1_mag",
            "j2_mag",
            "phi1",
            "phi2",
            "v",
            "d",
        ],
    );
    let omega_e = r.required(obj, P, "omega_e");
    let omega_s = r.number(obj, P, "omega_s").or(Some(0.0));
    let omega_c = match (obj.contains_key("omega_c"), obj.contains_key("delta")) {
        (true, true) => {
            r.error("params.delta", "give either omega_c or delta, not both");
            None
        }
        (true, false) => r.number(obj, P, "omega_c"),
        (false, true) => {
            let delta = r.number(obj, P, "delta");
            match (omega_e, omega_s, delta) {
                (Some(e), Some(s), Some(dl)) => Some(e - s - dl),
                _ => None,
            }
        }
        (false, false) => {
            r.error("params.omega_c", "missing required key (or give delta)");
            None
        }
    };
    let g = r.number(obj, P, "g").or(Some(0.0));
    let v = r.required(obj, P, "v");
    let d = r.required(obj, P, "d");
    if let Some(v) = v {
        if !(v > 0.0) {
            r.error("params.v", "group velocity must be > 0");
        }
    }
    if let Some(d) = d {
        if !(d > 0.0) {
            r.error("params.d", "separation must be > 0");
        }
    }
    if let Some(g) = g {
        if g < 0.0 {
            r.error("params.g", "must be >= 0");
        }
    }

    let by_rates = obj.contains_key("gamma_total") || obj.contains_key("gamma_coll");
    let by_couplings = ["j1_mag", "j2_mag", "phi1", "phi2"].iter().any(|k| obj.contains_key(*k));
    let couplings = match (by_rates, by_couplings) {
        (true, true) => {
            r.error(
                "params.gamma_total",
                "give either gamma_total/gamma_coll or j1_mag/j2_mag/phi1/phi2",
            );
            None
        }
        (true, false) => {
            let gt = r.required(obj, P, "gamma_total");
            let gc = r.number(obj, P, "gamma_coll").or(Some(0.0));
            match (gt, gc) {
                (Some(gt), Some(gc)) => {
                    if !(gt > 0.0) {
                        r.error("params.gamma_total", "must be > 0");
                        None
                    } else if gc.abs() > gt {
                        r.error(
                            "params.gamma_coll",
                            format!("|gamma_coll| = {} exceeds gamma_total = {gt}; need Γ ≥ |γ|", gc.abs()),
                        );
                        None
                    } else {
                        Some((gt, gc))
                    }
                }
                _ => None,
            }
        }
        (false, _) => {
            let j1 = r.required(obj, P, "j1_mag");
            let j2 = r.required(obj, P, "j2_mag");
            let p1 = r.number(obj, P, "phi1").or(Some(0.0));
            let p2 = r.number(obj, P, "phi2").or(Some(0.0));
            match (j1, j2, p1, p2, v) {
                (Some(j1), Some(j2), Some(p1), Some(p2), Some(v)) if v > 0.0 => {
                    if j1 < 0.0 || j2 < 0.0 {
                        r.error("params.j1_mag", "coupling magnitudes must be >= 0");
                        None
                    } else if j1 == 0.0 && j2 == 0.0 {
                        r.error("params.j1_mag", "at least one coupling must be nonzero");
                        None
                    } else {
                        // Raw couplings are kept as given.
                        return Some(SystemParams {
                            omega_e: omega_e?,
                            omega_s: omega_s?,
                            omega_c: omega_c?,
                            g: g?,
                            j1_mag: j1,
                            j2_mag: j2,
                            phi1: p1,
                            phi2: p2,
                            v,
                            d: d?,
                        });
                    }
                }
                _ => None,
            }
        }
    };
    let (gt, gc) = couplings?;
    match SystemParams::from_rates(omega_e?, omega_s?, omega_c?, g?, gt, gc, v?, d?) {
        Ok(p) => Some(p),
        Err(e) => {
            r.error("params", e.to_string());
            None
        }
    }
}

/// Applies a `design` block; returns the parameters it fixes.
fn read_design(r: &mut Reader, obj: &Map<String, Value>, p: &mut SystemParams, subspaces: &[u32]) {
    const P: &str = "design";
    r.unknown_keys(obj, P, &["double_bic"]);
    let Some(db) = r.object(obj, P, "double_bic") else {
        return;
    };
    const Q: &str = "design.double_bic";
    r.unknown_keys(db, Q, &["target_omega_e", "q_plus", "q_minus", "n"]);
    let target = r.required(db, Q, "target_omega_e");
    let int = |r: &mut Reader, key: &str| -> Option<i64> {
        match db.get(key) {
            None => {
                r.error(join(Q, key), "missing required key");
                None
            }
            Some(v) => {
                let x = v.as_i64();
                if x.is_none() {
                    r.error(join(Q, key), "expected an integer");
                }
                x
            }
        }
    };
    let qp = int(r, "q_plus");
    let qm = int(r, "q_minus");
    let n = match db.get("n") {
        None => subspaces.first().copied().unwrap_or(0),
        Some(v) => match v.as_u64().and_then(|x| u32::try_from(x).ok()) {
            Some(n) => n,
            None => {
                r.error(join(Q, "n"), "expected a non-negative integer");
                return;
            }
        },
    };
    let (Some(target), Some(qp), Some(qm)) = (target, qp, qm) else {
        return;
    };
    if (p.gamma_total() - p.gamma_coll()).abs() > DEFAULT_TOL * p.gamma_total() {
        r.error("params.gamma_coll", "double-bic design needs gamma_coll = gamma_total");
        return;
    }
    match spectral::design_double_bic(target, p.tau(), qp, qm).and_then(|des| des.to_params(n, p.gamma_total(), p.v, p.omega_s)) {
        Ok(q) => *p = q,
        Err(e) => r.error(Q, e.to_string()),
    }
}

fn read_grid(r: &mut Reader, obj: &Map<String, Value>, p: &SystemParams) -> SpacetimeGrid {
    const P: &str = "field_grid";
    r.unknown_keys(obj, P, &["x_min", "x_max", "nx", "t_min", "t_max", "nt"]);
    let def = SpacetimeGrid::default_for(p);
    let g = SpacetimeGrid {
        x_min: r.number(obj, P, "x_min").unwrap_or(def.x_min),
        x_max: r.number(obj, P, "x_max").unwrap_or(def.x_max),
        nx: r.count(obj, P, "nx").unwrap_or(def.nx),
        t_min: r.number(obj, P, "t_min").unwrap_or(def.t_min),
        t_max: r.number(obj, P, "t_max").unwrap_or(def.t_max),
        nt: r.count(obj, P, "nt").unwrap_or(def.nt),
    };
    if let Err(e) = g.validate() {
        r.error(P, e.to_string());
    }
    g
}

fn read_oracle(r: &mut Reader, obj: &Map<String, Value>, p: &SystemParams) -> OracleSettings {
    const P: &str = "oracle";
    r.unknown_keys(obj, P, &["modes", "half_width", "horizon", "threshold"]);
    let def = OracleConfig::default();
    let s = OracleSettings {
        config: OracleConfig {
            modes: r.count(obj, P, "modes").unwrap_or(def.modes),
            half_width: r.number(obj, P, "half_width"),
            dt_record: def.dt_record,
        },
        horizon: r.number(obj, P, "horizon").unwrap_or(20.0 / p.gamma_total()),
        threshold: r.number(obj, P, "threshold").unwrap_or(5e-3),
    };
    if s.config.modes < 2 {
        r.error("oracle.modes", "need at least 2");
    }
    if !(s.horizon > 0.0) {
        r.error("oracle.horizon", "must be > 0");
    }
    if let Some(w) = s.config.half_width {
        if !(w > 10.0 * p.gamma_total()) {
            r.error("oracle.half_width", "band must cover ω_e ± 10Γ");
        }
    }
    s
}

/// Parses and checks a scenario. Every problem found is reported; the
/// scenario is returned only when there are no errors.
pub fn parse_scenario(text: &str) -> (Option<Scenario>, Vec<Diagnostic>) {
    let mut r = Reader { diags: Vec::new() };
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            r.error("", format!("not valid JSON: {e}"));
            return (None, r.diags);
        }
    };
    let Value::Object(root) = root else {
        r.error("", "top level must be an object");
        return (None, r.diags);
    };
    r.unknown_keys(
        &root,
        "",
        &[
            "name",
            "units",
            "params",
            "design",
            "subspaces",
            "init",
            "horizon",
            "steps_per_delay",
            "point_like",
            "sweep",
            "outputs",
            "field_grid",
            "oracle",
            "bic_tol",
        ],
    );

    let name = match root.get("name") {
        Some(Value::String(s)) if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') => {
            s.clone()
        }
        Some(_) => {
            r.error("name", "must be a non-empty string of letters, digits, '-' or '_'");
            String::new()
        }
        None => {
            r.error("name", "missing required key");
            String::new()
        }
    };
    match root.get("units") {
        Some(Value::String(s)) if s == UNITS => {}
        Some(_) => r.error("units", format!("only {UNITS:?} is supported")),
        None => r.error("units", format!("missing required key; set it to {UNITS:?}")),
    }

    let subspaces: Vec<u32> = match root.get("subspaces") {
        None => vec![0],
        Some(Value::Array(a)) => {
            let mut out = Vec::new();
            for (i, v) in a.iter().enumerate() {
                match v.as_u64().and_then(|x| u32::try_from(x).ok()) {
                    Some(n) if !out.contains(&n) => out.push(n),
                    Some(n) => r.error(format!("subspaces[{i}]"), format!("duplicate subspace {n}")),
                    None => r.error(format!("subspaces[{i}]"), "expected a non-negative integer"),
                }
            }
            if a.is_empty() {
                r.error("subspaces", "must list at least one subspace");
            }
            out
        }
        Some(_) => {
            r.error("subspaces", "expected an array of integers");
            Vec::new()
        }
    };

    let mut params = match r.object(&root, "", "params") {
        Some(obj) => read_params(&mut r, obj),
        None => {
            if !root.contains_key("params") {
                r.error("params", "missing required key");
            }
            None
        }
    };
    if let (Some(p), Some(design)) = (params.as_mut(), r.object(&root, "", "design")) {
        read_design(&mut r, design, p, &subspaces);
    }

    let init = match r.object(&root, "", "init") {
        None => Some(InitialCondition::excited()),
        Some(obj) => {
            r.unknown_keys(obj, "init", &["u_e0", "u_s0"]);
            let ue = obj
                .get("u_e0")
                .map_or(Some(Complex64::new(1.0, 0.0)), |v| r.complex(v, "init.u_e0"));
            let us = obj
                .get("u_s0")
                .map_or(Some(Complex64::default()), |v| r.complex(v, "init.u_s0"));
            match (ue, us) {
                (Some(ue), Some(us)) => match InitialCondition::new(ue, us) {
                    Ok(ic) => Some(ic),
                    Err(e) => {
                        r.error("init", e.to_string());
                        None
                    }
                },
                _ => None,
            }
        }
    };

    let horizon = match root.get("horizon") {
        None => {
            r.error("horizon", "missing required key");
            None
        }
        Some(v) => r.number_value(v, "horizon"),
    };
    if let Some(h) = horizon {
        if !(h > 0.0 && h.is_finite()) {
            r.error("horizon", "must be finite and > 0");
        }
    }
    let steps_per_delay = r.count(&root, "", "steps_per_delay").unwrap_or(DEFAULT_STEPS_PER_DELAY);
    let point_like = match root.get("point_like") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => {
            r.error("point_like", "expected true or false");
            false
        }
    };
    let mut g_sweep = Vec::new();
    if let Some(sw) = r.object(&root, "", "sweep") {
        r.unknown_keys(sw, "sweep", &["g"]);
        match sw.get("g") {
            Some(Value::Array(a)) => {
                for (i, v) in a.iter().enumerate() {
                    let key = format!("sweep.g[{i}]");
                    if let Some(x) = r.number_value(v, &key) {
                        if x < 0.0 {
                            r.error(key, "must be >= 0");
                        } else {
                            g_sweep.push(x);
                        }
                    }
                }
            }
            Some(_) => r.error("sweep.g", "expected an array"),
            None => {}
        }
    }

    let mut outputs = Vec::new();
    match root.get("outputs") {
        None => r.error("outputs", "missing required key (an empty list is allowed)"),
        Some(Value::Array(a)) => {
            for (i, v) in a.iter().enumerate() {
                match v.as_str().and_then(Output::parse) {
                    Some(o) if !outputs.contains(&o) => outputs.push(o),
                    Some(_) => r.error(format!("outputs[{i}]"), "listed twice"),
                    None => r.error(
                        format!("outputs[{i}]"),
                        "expected one of trajectory, poles, field-map, oracle-compare",
                    ),
                }
            }
        }
        Some(_) => r.error("outputs", "expected an array"),
    }
    let bic_tol = r.number(&root, "", "bic_tol").unwrap_or(DEFAULT_TOL);
    if !(bic_tol > 0.0) {
        r.error("bic_tol", "must be > 0");
    }

    let Some(p) = params else {
        return (None, r.diags);
    };
    if steps_per_delay < MIN_STEPS_PER_DELAY {
        r.error("steps_per_delay", format!("must be at least {MIN_STEPS_PER_DELAY}"));
    }
    let empty = Map::new();
    let field_grid = read_grid(&mut r, r_obj(&root, "field_grid").unwrap_or(&empty), &p);
    if root.get("field_grid").is_some_and(|v| !v.is_object()) {
        r.error("field_grid", "expected an object");
    }
    let oracle = read_oracle(&mut r, r_obj(&root, "oracle").unwrap_or(&empty), &p);
    if root.get("oracle").is_some_and(|v| !v.is_object()) {
        r.error("oracle", "expected an object");
    }

    physics_warnings(&mut r, &p, &outputs, &g_sweep, point_like);
    if outputs.contains(&Output::FieldMap) {
        if let Err(e) = crate::field::check_field_preconditions(&p) {
            r.error("params", format!("field-map requested: {e}"));
        }
    }

    if r.has_errors() {
        return (None, r.diags);
    }
    let scenario = Scenario {
        name,
        params: p,
        subspaces,
        init: init.expect("checked"),
        horizon: horizon.expect("checked"),
        steps_per_delay,
        point_like,
        g_sweep,
        outputs,
        field_grid,
        oracle,
        bic_tol,
    };
    (Some(scenario), r.diags)
}

fn r_obj<'a>(root: &'a Map<String, Value>, key: &str) -> Option<&'a Map<String, Value>> {
    root.get(key).and_then(Value::as_object)
}

fn physics_warnings(r: &mut Reader, p: &SystemParams, outputs: &[Output], sweep: &[f64], point_like: bool) {
    let (gt, gc) = (p.gamma_total(), p.gamma_coll());
    if outputs.contains(&Output::Poles) {
        if gc.abs() <= 1e-12 * gt {
            r.warn("params.gamma_coll", "γ = 0: no pure-imaginary poles possible");
        } else if (gt - gc.abs()).abs() > DEFAULT_TOL * gt {
            r.warn("params.gamma_coll", "|γ| ≠ Γ: no pure-imaginary poles possible");
        }
        if point_like {
            r.warn(
                "point_like",
                "poles are computed for the giant atom, not the point-like limit",
            );
        }
    }
    let lambda_e = 2.0 * PI * p.v / p.omega_e;
    if p.omega_e > 0.0 && p.d < lambda_e {
        r.warn(
            "params.d",
            format!("d = {} is below λ_e = {lambda_e}: small-atom regime", p.d),
        );
    }
    if !sweep.is_empty() && outputs.contains(&Output::OracleCompare) {
        r.warn("sweep", "oracle-compare runs once per sweep value and may be slow");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "name": "t",
        "units": "natural, v=1, Gamma=1",
        "params": {"omega_e": "202*pi", "omega_s": 1, "delta": 0, "g": "pi",
                   "gamma_total": 1, "gamma_coll": 1, "v": 1, "d": 1},
        "horizon": 50,
        "outputs": ["trajectory", "poles"]
    }"#;

    fn with(patch: &str) -> String {
        let mut v: Value = serde_json::from_str(BASE).unwrap();
        let p: Value = serde_json::from_str(patch).unwrap();
        merge(&mut v, &p);
        v.to_string()
    }

    fn merge(a: &mut Value, b: &Value) {
        match (a, b) {
            (Value::Object(a), Value::Object(b)) => {
                for (k, v) in b {
                    if v.is_null() {
                        a.remove(k);
                    } else {
                        merge(a.entry(k.clone()).or_insert(Value::Null), v);
                    }
                }
            }
            (a, b) => *a = b.clone(),
        }
    }

    fn errors(d: &[Diagnostic]) -> Vec<&str> {
        d.iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.key.as_str())
            .collect()
    }

    #[test]
    fn expressions() {
        assert_eq!(parse_expr("3"), Some(3.0));
        assert_eq!(parse_expr("pi"), Some(PI));
        assert_eq!(parse_expr("202*pi"), Some(202.0 * PI));
        assert_eq!(parse_expr("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_expr("-1.5*pi/4"), Some(-1.5 * PI / 4.0));
        assert_eq!(parse_expr("2*"), None);
        assert_eq!(parse_expr("tau"), None);
    }

    #[test]
    fn base_parses() {
        let (s, d) = parse_scenario(BASE);
        let s = s.unwrap();
        assert!(errors(&d).is_empty());
        assert_eq!(s.params.omega_e, 202.0 * PI);
        assert!((s.params.delta()).abs() < 1e-12);
        assert!((s.params.gamma_coll() - 1.0).abs() < 1e-12);
        assert_eq!(s.subspaces, vec![0]);
        assert_eq!(s.init, InitialCondition::excited());
        assert_eq!(s.steps_per_delay, DEFAULT_STEPS_PER_DELAY);
    }

    #[test]
    fn gamma_above_total_is_an_error() {
        let (s, d) = parse_scenario(&with(r#"{"params": {"gamma_coll": 1.5}}"#));
        assert!(s.is_none());
        assert_eq!(errors(&d), vec!["params.gamma_coll"]);
        assert!(d[0].message.contains("Γ ≥ |γ|"));
    }

    #[test]
    fn zero_velocity_is_an_error() {
        let (s, d) = parse_scenario(&with(r#"{"params": {"v": 0}}"#));
        assert!(s.is_none());
        assert!(errors(&d).contains(&"params.v"));
    }

    #[test]
    fn all_violations_are_reported() {
        let (_, d) = parse_scenario(&with(
            r#"{"params": {"v": -1}, "horizon": -2, "outputs": ["movie"], "colour": 3}"#,
        ));
        let e = errors(&d);
        for key in ["params.v", "horizon", "outputs[0]", "colour"] {
            assert!(e.contains(&key), "{key} missing from {e:?}");
        }
    }

    #[test]
    fn no_poles_warning_when_gamma_vanishes() {
        let (s, d) = parse_scenario(&with(r#"{"params": {"gamma_coll": 0}}"#));
        assert!(s.is_some());
        assert!(d
            .iter()
            .any(|d| d.severity == Severity::Warning && d.message.contains("no pure-imaginary poles possible")));
    }

    #[test]
    fn small_atom_warning() {
        let (s, d) = parse_scenario(&with(r#"{"params": {"omega_e": 1, "d": 1}}"#));
        assert!(s.is_some());
        assert!(d.iter().any(|d| d.key == "params.d" && d.severity == Severity::Warning));
    }

    #[test]
    fn empty_outputs_are_valid() {
        let (s, _) = parse_scenario(&with(r#"{"outputs": []}"#));
        assert!(s.unwrap().outputs.is_empty());
    }

    #[test]
    fn couplings_form() {
        let (s, d) = parse_scenario(&with(
            r#"{"params": {"gamma_total": null, "gamma_coll": null,
                "j1_mag": 0.3, "j2_mag": 0.3, "phi1": 0, "phi2": "pi/2"}}"#,
        ));
        let s = s.unwrap_or_else(|| panic!("{d:?}"));
        assert_eq!(s.params.j1_mag, 0.3);
        assert!(s.params.gamma_coll().abs() < 1e-12);
    }

    #[test]
    fn design_block_sets_double_bic() {
        let (s, d) = parse_scenario(&with(
            r#"{"params": {"omega_e": 600, "g": 0},
                "design": {"double_bic": {"target_omega_e": "202*pi", "q_plus": 101, "q_minus": 100}}}"#,
        ));
        let s = s.unwrap_or_else(|| panic!("{d:?}"));
        assert!((s.params.omega_e - 202.0 * PI).abs() < 1e-9);
        assert!((s.params.g - PI).abs() < 1e-12);
        assert!(s.params.delta().abs() < 1e-9);
    }

    #[test]
    fn field_map_needs_equal_couplings() {
        let (s, d) = parse_scenario(&with(
            r#"{"outputs": ["field-map"], "params": {"gamma_total": null, "gamma_coll": null,
                "j1_mag": 0.3, "j2_mag": 0.1}}"#,
        ));
        assert!(s.is_none());
        assert!(errors(&d).contains(&"params"));
    }
}
