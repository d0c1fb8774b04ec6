//! Scenario configuration, the model and sweep runners, and CSV output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dissipative::{
    closed_form_model_a, evolve_me, evolve_nojump, me_expectation, nj_expectation,
    nojump_asymptotics_model_b, steady_state_model_b, BlochVector, DissipativeModel, Method,
};
use crate::error::{Error, Result};
use crate::integrate::{HamiltonianFn, TimeGrid};
use crate::linalg::{c64, expm2, inner, normalized, polar_unitary, CMatrix, C64};
use crate::metric::{evolve_metric, metric_asymptotics_model_b};
use crate::symmetry::{metric_bloch, parity_report, parity_scan, validate_k_grid, LZModel};

pub const SUITE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Amplitude vectors whose norm is off by more than this are rejected;
/// smaller deviations are normalised away.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-3;

/// Default momentum grid of the sweep.
pub const DEFAULT_K_GRID: [f64; 12] = [
    -2.0, -1.5, -1.25, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.25, 1.5, 2.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ModelA,
    ModelB,
    Sweep,
    Verify,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ModelA => "model_a",
            Scenario::ModelB => "model_b",
            Scenario::Sweep => "sweep",
            Scenario::Verify => "verify",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Metric,
    Me,
    Nj,
    ClosedForm,
}

impl MethodName {
    pub fn name(self) -> &'static str {
        match self {
            MethodName::Metric => "metric",
            MethodName::Me => "me",
            MethodName::Nj => "nj",
            MethodName::ClosedForm => "closed_form",
        }
    }
}

impl FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "metric" => Ok(MethodName::Metric),
            "me" => Ok(MethodName::Me),
            "nj" => Ok(MethodName::Nj),
            "closed_form" | "closed-form" => Ok(MethodName::ClosedForm),
            other => Err(Error::config(
                "methods",
                format!("unknown method `{other}` (expected metric, me, nj, closed_form)"),
            )),
        }
    }
}

/// Comma-separated method list, e.g. `metric,me,nj`.
pub fn parse_methods(s: &str) -> Result<Vec<MethodName>> {
    let mut out: Vec<MethodName> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::config("methods", "no methods given"));
    }
    Ok(out)
}

/// Comma-separated list of reals.
pub fn parse_reals(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::config(field, format!("`{p}`: {e}")))
        })
        .collect()
}

/// Initial condition: a Bloch vector or two complex amplitudes
/// `(a_1, a_0)` on the excited and ground states.
///
/// The textual form is `bloch:x,y,z` or `amp:re,im,re,im`; it is also the
/// JSON representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    Bloch(BlochVector),
    Amplitudes([C64; 2]),
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::config("initial", "expected bloch:x,y,z or amp:re,im,re,im"))?;
        let v = parse_reals("initial", rest)?;
        match (kind.trim(), v.len()) {
            ("bloch", 3) => Ok(InitialState::Bloch(BlochVector::new(v[0], v[1], v[2]))),
            ("amp", 4) => Ok(InitialState::Amplitudes([c64(v[0], v[1]), c64(v[2], v[3])])),
            _ => Err(Error::config("initial", format!("cannot parse `{s}`"))),
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        s.to_string()
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Bloch(b) => write!(f, "bloch:{},{},{}", b.x, b.y, b.z),
            InitialState::Amplitudes([a, b]) => write!(f, "amp:{},{},{},{}", a.re, a.im, b.re, b.im),
        }
    }
}

impl InitialState {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialState::Bloch(b) => {
                if !(b.length() <= 1.0 + 1e-9) {
                    return Err(Error::config("initial", format!("|r| = {} exceeds 1", b.length())));
                }
            }
            InitialState::Amplitudes(a) => {
                let n = inner(a, a).re.sqrt();
                if !((n - 1.0).abs() <= AMPLITUDE_NORM_TOL) {
                    return Err(Error::config("initial", format!("amplitude norm {n} is not 1")));
                }
            }
        }
        Ok(())
    }

    /// The state vector, if the initial condition is pure.
    pub fn pure_state(&self) -> Option<Vec<C64>> {
        match self {
            InitialState::Amplitudes(a) => normalized(a).ok(),
            InitialState::Bloch(b) => b.to_state().ok(),
        }
    }

    pub fn density(&self) -> Result<CMatrix> {
        Ok(match self {
            InitialState::Bloch(b) => b.to_density(),
            InitialState::Amplitudes(a) => {
                let v = normalized(a)?;
                CMatrix::outer(&v, &v)
            }
        })
    }

    pub fn bloch(&self) -> Result<BlochVector> {
        BlochVector::from_density(&self.density()?)
    }
}

/// Complete, validated description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub omega: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_max: f64,
    pub t_start: f64,
    pub initial: InitialState,
    pub methods: Vec<MethodName>,
    pub k_grid: Vec<f64>,
    /// `Δ(t) = ramp_rate·t` in the sweep.
    pub ramp_rate: f64,
    /// Keep every n-th integration step in the output (the last step is
    /// always kept).
    pub sample_every: usize,
    pub out_path: Option<String>,
}

/// Partial configuration, as read from a JSON file or assembled from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub scenario: Option<Scenario>,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub t_start: Option<f64>,
    pub initial: Option<InitialState>,
    pub methods: Option<Vec<MethodName>>,
    pub k_grid: Option<Vec<f64>>,
    pub ramp_rate: Option<f64>,
    pub sample_every: Option<usize>,
    pub out_path: Option<String>,
}

impl ConfigOverrides {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }
}

impl ScenarioConfig {
    /// Parameter sets of the two-level figures: `ω = 1, γ = 0.5` for model
    /// A, `ω = 1, γ = 1.5` from the ground state for model B, and
    /// `γ = 1, Δ(t) = t` on `[-15, 15]` for the sweep.
    pub fn defaults(scenario: Scenario) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let base = ScenarioConfig {
            scenario,
            omega: 1.0,
            gamma: 0.5,
            dt: 1e-3,
            t_max: 20.0,
            t_start: 0.0,
            initial: InitialState::Amplitudes([c64(-r, 0.0), c64(r, 0.0)]),
            methods: vec![MethodName::Metric, MethodName::Me, MethodName::Nj, MethodName::ClosedForm],
            k_grid: Vec::new(),
            ramp_rate: 1.0,
            sample_every: 10,
            out_path: None,
        };
        match scenario {
            Scenario::ModelA | Scenario::Verify => base,
            Scenario::ModelB => ScenarioConfig {
                gamma: 1.5,
                initial: InitialState::Bloch(BlochVector::new(0.0, 0.0, -1.0)),
                ..base
            },
            Scenario::Sweep => ScenarioConfig {
                gamma: 1.0,
                t_max: 15.0,
                t_start: -15.0,
                initial: InitialState::Amplitudes([c64(1.0, 0.0), c64(0.0, 0.0)]),
                methods: vec![MethodName::Metric, MethodName::Nj],
                k_grid: DEFAULT_K_GRID.to_vec(),
                sample_every: 100,
                ..base
            },
        }
    }

    pub fn apply(&mut self, o: &ConfigOverrides) -> Result<()> {
        if let Some(s) = o.scenario {
            if s != self.scenario {
                return Err(Error::config(
                    "scenario",
                    format!("file is for `{s}` but `{}` was requested", self.scenario),
                ));
            }
        }
        macro_rules! take {
            ($($f:ident),*) => {$(if let Some(v) = &o.$f { self.$f = v.clone(); })*};
        }
        take!(omega, gamma, dt, t_max, t_start, initial, methods, k_grid, ramp_rate, sample_every);
        if o.out_path.is_some() {
            self.out_path = o.out_path.clone();
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        if !self.omega.is_finite() || !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::config("gamma", "omega must be finite and gamma finite and non-negative"));
        }
        if self.sample_every == 0 {
            return Err(Error::config("sample_every", "must be at least 1"));
        }
        self.initial.validate()?;
        if self.scenario == Scenario::Verify {
            return Ok(());
        }
        TimeGrid::new(self.t_start, self.t_max, self.dt)
            .map_err(|e| Error::config("dt", e.to_string()))?;
        let needs_pure = self.scenario == Scenario::Sweep
            || self.methods.iter().any(|m| matches!(m, MethodName::Metric | MethodName::ClosedForm));
        if needs_pure && self.initial.pure_state().is_none() {
            return Err(Error::config("initial", "metric and closed-form runs need a pure state (|r| = 1)"));
        }
        if self.scenario == Scenario::Sweep {
            if let Some(m) = self.methods.iter().find(|m| !matches!(m, MethodName::Metric | MethodName::Nj)) {
                return Err(Error::config("methods", format!("sweep supports metric and nj, not {}", m.name())));
            }
            validate_k_grid(&self.k_grid, self.gamma).map_err(|e| Error::config("k_grid", e.to_string()))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t_start, self.t_max, self.dt)
    }
}

/// One output sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub t: f64,
    pub k: Option<f64>,
    pub method: String,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    /// `⟨Ψ|Ψ⟩` for the metric, `Tr ρ` for the density-matrix methods,
    /// `⟨ψ|ψ⟩` for division by norm of a state vector.
    pub norm: f64,
}

impl ResultRow {
    fn new(t: f64, k: Option<f64>, method: &str, b: BlochVector, norm: f64) -> Self {
        ResultRow {
            t,
            k,
            method: method.to_string(),
            sx: b.x,
            sy: b.y,
            sz: b.z,
            norm,
        }
    }
}

/// Rows plus `#` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub metadata: Vec<String>,
    pub rows: Vec<ResultRow>,
}

/// Exit status for a failed run: 2 for configuration problems, 3 for
/// numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::InvalidGrid(_) | Error::UnsupportedInitialState => 2,
        _ => 3,
    }
}

/// Runs a model or sweep scenario. Rows come out sorted by `(k, t, method)`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    cfg.validate()?;
    let mut metadata = vec![
        format!("nonherm {SUITE_VERSION}"),
        format!("scenario: {}", cfg.scenario),
        format!("config: {}", serde_json::to_string(cfg).expect("config serialises")),
    ];
    let mut rows = match cfg.scenario {
        Scenario::ModelA => run_model(cfg, ModelKind::A, &mut metadata)?,
        Scenario::ModelB => run_model(cfg, ModelKind::B, &mut metadata)?,
        Scenario::Sweep => run_sweep(cfg, &mut metadata)?,
        Scenario::Verify => {
            return Err(Error::config("scenario", "verify is run through verify::verify_all"))
        }
    };
    sort_rows(&mut rows);
    Ok(ScenarioOutput { metadata, rows })
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        let ka = a.k.unwrap_or(f64::NEG_INFINITY);
        let kb = b.k.unwrap_or(f64::NEG_INFINITY);
        ka.total_cmp(&kb)
            .then(a.t.total_cmp(&b.t))
            .then_with(|| a.method.cmp(&b.method))
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    A,
    B,
}

fn sampled(len: usize, every: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |i| i % every == 0 || *i + 1 == len)
}

fn fmt_bloch(b: BlochVector) -> String {
    format!("sx={} sy={} sz={}", format_sig(b.x), format_sig(b.y), format_sig(b.z))
}

fn run_model(cfg: &ScenarioConfig, kind: ModelKind, metadata: &mut Vec<String>) -> Result<Vec<ResultRow>> {
    let (omega, gamma) = (cfg.omega, cfg.gamma);
    let model = match kind {
        ModelKind::A => DissipativeModel::model_a(omega, gamma),
        ModelKind::B => DissipativeModel::model_b(omega, gamma),
    };
    let grid = cfg.grid()?;
    let rho0 = cfg.initial.density()?;
    let psi0 = cfg.initial.pure_state();
    let bloch0 = cfg.initial.bloch()?;
    let every = cfg.sample_every;
    let mut rows = Vec::new();

    // observables are insensitive to the trace part; the metric runs on
    // the traceless generator so that ρ(0) = 1 evolves as in the closed forms
    let traceless = model.effective_fn().traceless();
    let [sx, sy, sz] = CMatrix::paulis();

    for method in &cfg.methods {
        match method {
            MethodName::Metric => {
                let psi0 = psi0.as_ref().expect("validated pure state");
                let traj = evolve_metric(&traceless, &CMatrix::identity(2), psi0, grid)?;
                for i in sampled(traj.len(), every) {
                    rows.push(ResultRow::new(traj.time(i), None, "metric", metric_bloch(&traj, i)?, traj.mapped_norm(i)));
                }
            }
            MethodName::Me => {
                let traj = evolve_me(&model, &rho0, grid)?;
                for i in sampled(traj.len(), every) {
                    let b = BlochVector::new(
                        me_expectation(&traj, &sx, i),
                        me_expectation(&traj, &sy, i),
                        me_expectation(&traj, &sz, i),
                    );
                    rows.push(ResultRow::new(traj.time(i), None, "me", b, traj.trace(i)));
                }
            }
            MethodName::Nj => {
                let traj = evolve_nojump(&model, &rho0, grid)?;
                for i in sampled(traj.len(), every) {
                    let b = BlochVector::new(
                        nj_expectation(&traj, &sx, i)?,
                        nj_expectation(&traj, &sy, i)?,
                        nj_expectation(&traj, &sz, i)?,
                    );
                    rows.push(ResultRow::new(traj.time(i), None, "nj", b, traj.trace(i)));
                }
            }
            MethodName::ClosedForm => {
                let psi0 = psi0.as_ref().expect("validated pure state");
                match kind {
                    ModelKind::A => closed_rows_model_a(cfg, psi0, grid, &mut rows)?,
                    ModelKind::B => closed_rows_model_b(&model, &traceless, psi0, grid, every, &mut rows)?,
                }
            }
        }
    }

    match kind {
        ModelKind::A => {
            metadata.push(format!(
                "reference me_steady_state: {}",
                fmt_bloch(BlochVector::new(0.0, 0.0, -1.0))
            ));
            metadata.push(format!("reference nj_limit: {}", fmt_bloch(BlochVector::new(0.0, 0.0, -1.0))));
        }
        ModelKind::B => {
            metadata.push(format!("reference me_steady_state: {}", fmt_bloch(steady_state_model_b(omega, gamma))));
            if let Ok(nj) = nojump_asymptotics_model_b(omega, gamma) {
                metadata.push(format!("reference nj_limit: {}", fmt_bloch(nj)));
            }
            if let Ok((x, y, z)) = metric_asymptotics_model_b(omega, gamma, bloch0.as_tuple()) {
                metadata.push(format!("reference metric_limit: {}", fmt_bloch(BlochVector::new(x, y, z))));
            }
        }
    }
    Ok(rows)
}

fn closed_rows_model_a(cfg: &ScenarioConfig, psi0: &[C64], grid: TimeGrid, rows: &mut Vec<ResultRow>) -> Result<()> {
    let (omega, gamma) = (cfg.omega, cfg.gamma);
    let paulis = CMatrix::paulis();
    let p1 = psi0[0].norm_sqr() / inner(psi0, psi0).re;
    for i in sampled(grid.len(), cfg.sample_every) {
        let t = grid.time(i);
        for (method, name) in [(Method::Me, "closed_form_me"), (Method::Metric, "closed_form_metric"), (Method::Nj, "closed_form_nj")] {
            let v: Vec<f64> = paulis
                .iter()
                .map(|o| closed_form_model_a(method, o, psi0, omega, gamma, t - grid.t0))
                .collect::<Result<_>>()
                .map_err(|_| Error::config("initial", "closed_form for model_a needs |0>, |1> or (|0> - |1>)/sqrt2"))?;
            let norm = match method {
                // the excited amplitude decays as e^{-2γt}, the ground one is stationary
                Method::Nj => p1 * (-4.0 * gamma * (t - grid.t0)).exp() + (1.0 - p1),
                _ => 1.0,
            };
            rows.push(ResultRow::new(t, None, name, BlochVector::new(v[0], v[1], v[2]), norm));
        }
    }
    Ok(())
}

/// Model B from the exact propagator `exp(-iHt)`: the metric state is the
/// unitary polar factor of the traceless propagator applied to `ψ0`, the
/// no-jump state is the full propagator applied to `ψ0`.
fn closed_rows_model_b(
    model: &DissipativeModel,
    traceless: &HamiltonianFn,
    psi0: &[C64],
    grid: TimeGrid,
    every: usize,
    rows: &mut Vec<ResultRow>,
) -> Result<()> {
    let full = model.effective_hamiltonian(0.0);
    let reduced = traceless.at(0.0);
    let minus_i = c64(0.0, -1.0);
    for i in sampled(grid.len(), every) {
        let t = grid.time(i);
        let s = t - grid.t0;
        let u = expm2(&reduced.scale(minus_i * s))?;
        let q = polar_unitary(&u, Some(c64(1.0, 0.0)))?;
        let big = q.matvec(psi0);
        rows.push(ResultRow::new(t, None, "closed_form_metric", BlochVector::from_state(&big)?, inner(&big, &big).re));
        let psi = expm2(&full.scale(minus_i * s))?.matvec(psi0);
        let n = inner(&psi, &psi).re;
        let b = BlochVector::from_state(&psi).map_err(|_| Error::NormUnderflow { t })?;
        rows.push(ResultRow::new(t, None, "closed_form_nj", b, n));
    }
    Ok(())
}

fn run_sweep(cfg: &ScenarioConfig, metadata: &mut Vec<String>) -> Result<Vec<ResultRow>> {
    let template = LZModel::ramp(0.0, cfg.gamma, cfg.ramp_rate);
    let grid = cfg.grid()?;
    let psi0 = cfg.initial.pure_state().expect("validated pure state");
    let modes = parity_scan(&template, &cfg.k_grid, grid, &psi0, cfg.sample_every)?;
    let mut rows = Vec::new();
    for m in &modes {
        for (i, &t) in m.times.iter().enumerate() {
            if cfg.methods.contains(&MethodName::Metric) {
                rows.push(ResultRow::new(t, Some(m.k), "metric", m.metric[i], m.metric_norm[i]));
            }
            if cfg.methods.contains(&MethodName::Nj) {
                rows.push(ResultRow::new(t, Some(m.k), "nj", m.nj[i], m.nj_norm[i]));
            }
        }
    }
    for e in parity_report(&modes) {
        metadata.push(format!(
            "parity |k|={} metric_even_z={} metric_odd_xy={} nj_odd_z={} nj_even_z={} nj_metric_gap={}",
            format_sig(e.k),
            format_sig(e.metric_even_z),
            format_sig(e.metric_odd_xy),
            format_sig(e.nj_odd_z),
            format_sig(e.nj_even_z),
            format_sig(e.nj_metric_gap),
        ));
    }
    Ok(rows)
}

/// `x` with 12 significant digits, fixed-point for exponents in
/// `[-5, 12)` and scientific otherwise, trailing zeros dropped.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: [&str; 7] = ["t", "k", "method", "sx", "sy", "sz", "norm"];

/// Writes `# `-prefixed metadata lines, the header and the rows.
pub fn write_csv<W: Write>(mut out: W, metadata: &[String], rows: &[ResultRow]) -> std::result::Result<(), csv::Error> {
    for line in metadata {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let k = r.k.map(format_sig).unwrap_or_default();
        w.write_record([
            format_sig(r.t),
            k,
            r.method.clone(),
            format_sig(r.sx),
            format_sig(r.sy),
            format_sig(r.sz),
            format_sig(r.norm),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(metadata: &[String], rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, metadata, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Inverse of [`write_csv`].
pub fn read_csv(text: &str) -> Result<ScenarioOutput> {
    let bad = |msg: String| Error::config("csv", msg);
    let metadata = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|l| l.strip_prefix(' ').unwrap_or(l).to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        rows.push(ResultRow {
            t: num(&rec[0])?,
            k: if rec[1].is_empty() { None } else { Some(num(&rec[1])?) },
            method: rec[2].to_string(),
            sx: num(&rec[3])?,
            sy: num(&rec[4])?,
            sz: num(&rec[5])?,
            norm: num(&rec[6])?,
        });
    }
    Ok(ScenarioOutput { metadata, rows })
}
