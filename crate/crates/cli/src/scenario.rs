//! Runs a scenario: builds the model, evaluates every requested source on a
//! shared grid and collects value and error columns.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use lossrate::models::cavity::{cavity_expansion, cavity_me, fock_state, number_operator, CavityParams};
use lossrate::models::dicke::{
    dicke_compare, dicke_energies, dicke_fidelity_closed, dicke_initial_vector, dicke_me, DickeParams,
};
use lossrate::models::jaynes_cummings::{jc_gamma_series, jc_me, JcParams};
use lossrate::models::two_level::{
    excited_population, excited_state, ground_state, plus_x_state, population_series, sigma_x_first_order_paper,
    sigma_z_series, two_level_me, TwoLevelParams,
};
use lossrate::models::AtomObservable;
use lossrate::{
    assemble, boson_ops, default_grid, embed, evolve, finite_difference_deviation, solve_hierarchy_with,
    CVector, CoefficientSet, DensityMatrix, HierarchyOptions, HilbertSpace, MasterEquation, MultiIndex, Operator,
    RateAssignment, RateParam, TimeGrid, Trajectory,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{CavityInitial, ModelConfig, ObservableSpec, QubitInitial, ScenarioConfig};
use crate::csv::write_table;
use crate::error::HarnessError;

/// Solver hygiene limits applied to every exact run.
pub const TRACE_LIMIT: f64 = 1e-8;
pub const HERMITICITY_LIMIT: f64 = 1e-10;
pub const MIN_EIGENVALUE_LIMIT: f64 = -1e-8;

/// Finite-difference steps used when `compare.finite_difference` is set.
pub const FD_STEPS: [f64; 2] = [1e-3, 5e-4];
/// Step for the Dicke fidelity slopes.
pub const DICKE_SLOPE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Exact,
    Engine,
    Paper,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Engine => "engine",
            Self::Paper => "paper",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub observable: String,
    pub source: Source,
    pub order: Option<usize>,
    pub values: Vec<f64>,
}

impl Column {
    fn new(observable: &str, source: Source, order: Option<usize>, values: Vec<f64>) -> Self {
        Self {
            observable: observable.to_owned(),
            source,
            order,
            values,
        }
    }

    /// `<source>[_order<q>]`.
    pub fn tag(&self) -> String {
        match self.order {
            Some(q) => format!("{}_order{q}", self.source),
            None => self.source.to_string(),
        }
    }

    /// `<observable>_<source>[_order<q>]`.
    pub fn name(&self) -> String {
        format!("{}_{}", self.observable, self.tag())
    }
}

/// `|exact − series|` for one non-exact column.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorColumn {
    pub column: String,
    pub observable: String,
    pub tag: String,
    pub order: Option<usize>,
    pub values: Vec<f64>,
}

impl ErrorColumn {
    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &x| a.max(x))
    }

    pub fn at_end(&self) -> f64 {
        *self.values.last().expect("non-empty grid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdEntry {
    pub index: String,
    /// Deviations at each of [`FD_STEPS`].
    pub deviations: [f64; 2],
}

impl FdEntry {
    pub fn ratio(&self) -> f64 {
        self.deviations[0] / self.deviations[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hygiene {
    pub trace_deviation: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Hygiene {
    pub fn of(traj: &Trajectory<Operator>) -> Self {
        Self {
            trace_deviation: traj.max_trace_deviation(),
            hermiticity_error: traj.max_hermiticity_error(),
            min_eigenvalue: traj.min_eigenvalue(),
        }
    }

    pub fn passed(&self) -> bool {
        self.trace_deviation <= TRACE_LIMIT
            && self.hermiticity_error <= HERMITICITY_LIMIT
            && self.min_eigenvalue >= MIN_EIGENVALUE_LIMIT
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    pub errors: Vec<ErrorColumn>,
    pub finite_difference: Vec<FdEntry>,
    pub hygiene: Option<Hygiene>,
}

impl ComparisonReport {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    pub fn error(&self, column: &str) -> Option<&ErrorColumn> {
        self.errors.iter().find(|e| e.column == column)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let io = |source| HarnessError::Io {
            path: path.to_owned(),
            source,
        };
        let file = File::create(path).map_err(io)?;
        let cols: Vec<(String, Vec<f64>)> = self.columns.iter().map(|c| (c.name(), c.values.clone())).collect();
        write_table(BufWriter::new(file), &self.times, &cols).map_err(io)
    }
}

/// A model ready to run, with its parameters kept for the closed forms.
#[derive(Debug, Clone)]
pub enum Model {
    TwoLevel(TwoLevelParams),
    Cavity(CavityParams),
    Jc(JcParams),
    Dicke(DickeParams),
}

/// What an observable column is computed from.
#[derive(Debug, Clone)]
enum Probe {
    Operator(Operator),
    /// Jaynes–Cummings atom observable, for the closed-form γ-series.
    Atom(Operator, AtomObservable),
    Fidelity { energies: Vec<f64>, psi: CVector },
    /// `∂F/∂K` or `∂F/∂G` summed over all qubits.
    FidelitySlope { energies: Vec<f64>, psi: CVector, up: bool },
}

fn atom_spec(spec: &ObservableSpec) -> Option<AtomObservable> {
    match spec {
        ObservableSpec::Named(n) => match n.as_str() {
            "sigmax" => Some(AtomObservable::sigma_x()),
            "sigmay" => Some(AtomObservable::sigma_y()),
            "sigmaz" => Some(AtomObservable::sigma_z()),
            _ => None,
        },
        ObservableSpec::Atom {
            lambda_plus,
            lambda_minus,
            lambda_z,
            ..
        } => Some(AtomObservable::new(
            Complex64::new(lambda_plus[0], lambda_plus[1]),
            Complex64::new(lambda_minus[0], lambda_minus[1]),
            *lambda_z,
        )),
    }
}

impl Model {
    pub fn build(cfg: &ModelConfig) -> Result<Self, HarnessError> {
        Ok(match cfg {
            ModelConfig::TwoLevel { omega, gamma, initial } => {
                let state = match initial {
                    QubitInitial::Excited => excited_state(),
                    QubitInitial::Ground => ground_state(),
                    QubitInitial::PlusX => plus_x_state(),
                };
                Self::TwoLevel(TwoLevelParams::new(*omega, *gamma)?.with_initial(state)?)
            }
            ModelConfig::Cavity {
                omega_f,
                kappa,
                fock_dim,
                initial,
            } => {
                let rho = match initial {
                    CavityInitial::Fock(n) => fock_state(*fock_dim, *n)?,
                    CavityInitial::Amplitudes(a) => {
                        if a.len() > *fock_dim {
                            return Err(HarnessError::Config(format!(
                                "{} amplitudes for fock_dim {fock_dim}",
                                a.len()
                            )));
                        }
                        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm == 0.0 {
                            return Err(HarnessError::Config("cavity amplitudes are all zero".into()));
                        }
                        let psi = CVector::from_fn(*fock_dim, |i, _| {
                            Complex64::new(a.get(i).copied().unwrap_or(0.0) / norm, 0.0)
                        });
                        DensityMatrix::pure(&HilbertSpace::boson(*fock_dim)?, &psi)?
                    }
                };
                Self::Cavity(CavityParams::new(*omega_f, *kappa, rho)?)
            }
            ModelConfig::Jc {
                omega_f,
                omega_a,
                g,
                gamma,
                kappa,
                fock_dim,
                n,
            } => Self::Jc(JcParams::new(*omega_f, *omega_a, *g, *gamma, *kappa, *fock_dim)?.with_number_state(*n)?),
            ModelConfig::Dicke {
                n,
                m,
                omega,
                temperature,
                k,
                g,
            } => Self::Dicke(match (temperature, k, g) {
                (Some(t), None, None) => DickeParams::from_temperature(*n, *m, *omega, *t)?,
                (None, Some(k), Some(g)) => DickeParams::new(*n, *m, *omega, *k, *g)?,
                _ => {
                    return Err(HarnessError::Config(
                        "dicke needs either `temperature` or both `k` and `g`".into(),
                    ))
                }
            }),
        })
    }

    pub fn master_equation(&self) -> Result<MasterEquation, HarnessError> {
        Ok(match self {
            Self::TwoLevel(p) => two_level_me(p)?,
            Self::Cavity(p) => cavity_me(p)?,
            Self::Jc(p) => jc_me(p)?,
            Self::Dicke(p) => dicke_me(p)?,
        })
    }

    pub fn initial_state(&self) -> Result<DensityMatrix, HarnessError> {
        Ok(match self {
            Self::TwoLevel(p) => p.initial.clone(),
            Self::Cavity(p) => p.initial.clone(),
            Self::Jc(p) => p.initial_state(),
            Self::Dicke(p) => DensityMatrix::pure(&p.space(), &self.dicke_psi(p)?)?,
        })
    }

    fn dicke_psi(&self, p: &DickeParams) -> Result<CVector, HarnessError> {
        Ok(dicke_initial_vector(p.n, &(0..p.m).collect::<Vec<_>>())?)
    }

    fn probe(&self, spec: &ObservableSpec) -> Result<Probe, HarnessError> {
        let unsupported = || {
            HarnessError::Config(format!(
                "observable `{}` is not available for this model",
                spec.name()
            ))
        };
        if let Some(a) = atom_spec(spec) {
            if !a.is_hermitian() {
                return Err(HarnessError::Config(format!(
                    "observable `{}` is not Hermitian",
                    spec.name()
                )));
            }
            return match self {
                Self::TwoLevel(_) => Ok(Probe::Operator(a.qubit_operator())),
                Self::Jc(p) => Ok(Probe::Atom(a.operator(&p.space(), 0)?, a)),
                Self::Dicke(p) => Ok(Probe::Operator(a.operator(&p.space(), 0)?)),
                Self::Cavity(_) => Err(unsupported()),
            };
        }
        let name = spec.name();
        match (self, name) {
            (Self::TwoLevel(_), "population") => Ok(Probe::Operator(excited_population())),
            (Self::Jc(p), "population") => Ok(Probe::Operator(embed(&excited_population(), 0, &p.space())?)),
            (Self::Dicke(p), "population") => Ok(Probe::Operator(embed(&excited_population(), 0, &p.space())?)),
            (Self::Cavity(p), "n") => Ok(Probe::Operator(number_operator(p.fock_dim)?)),
            (Self::Jc(p), "n") => Ok(Probe::Operator(embed(&boson_ops(p.fock_dim)?.n, 1, &p.space())?)),
            (Self::Dicke(p), "fidelity") => Ok(Probe::Fidelity {
                energies: dicke_energies(p),
                psi: self.dicke_psi(p)?,
            }),
            (Self::Dicke(p), "dFdK" | "dFdG") => Ok(Probe::FidelitySlope {
                energies: dicke_energies(p),
                psi: self.dicke_psi(p)?,
                up: name == "dFdG",
            }),
            _ => Err(unsupported()),
        }
    }
}

/// Real part of `⟨ψ̃(t)|X(t)|ψ̃(t)⟩` with `ψ̃ = e^{−iHt}ψ`, `H` diagonal.
fn interaction_overlap(traj: &Trajectory<Operator>, energies: &[f64], psi: &CVector) -> Vec<f64> {
    lossrate::models::dicke::interaction_fidelity(traj, energies, psi)
        .samples()
        .to_vec()
}

fn probe_values(probe: &Probe, traj: &Trajectory<Operator>) -> Result<Vec<f64>, HarnessError> {
    Ok(match probe {
        Probe::Operator(a) | Probe::Atom(a, _) => traj.expectation(a)?.re().into_samples(),
        Probe::Fidelity { energies, psi } => interaction_overlap(traj, energies, psi),
        Probe::FidelitySlope { .. } => unreachable!("slopes are not state expectations"),
    })
}

/// `Σᵢ ∂F/∂Rᵢ` from the first-order coefficients.
fn engine_slope(
    coeffs: &CoefficientSet,
    me: &MasterEquation,
    energies: &[f64],
    psi: &CVector,
    up: bool,
) -> Result<Vec<f64>, HarnessError> {
    let n = me.channels().len();
    let mut acc = vec![0.0; coeffs.grid().len()];
    for ch in 0..n {
        let param = if up { RateParam::up(ch) } else { RateParam::down(ch) };
        let alpha = MultiIndex::unit(n, param);
        let d = coeffs
            .get(&alpha)
            .ok_or_else(|| lossrate::Error::MissingCoefficient(alpha.to_string()))?;
        for (a, v) in acc.iter_mut().zip(interaction_overlap(d, energies, psi)) {
            *a += v;
        }
    }
    Ok(acc)
}

fn paper_columns(
    model: &Model,
    spec: &ObservableSpec,
    probe: &Probe,
    grid: &TimeGrid,
    orders: &[usize],
) -> Result<Vec<Column>, HarnessError> {
    let name = spec.name();
    let times = grid.times();
    let mut out = Vec::new();
    match (model, probe) {
        (Model::TwoLevel(p), _) => {
            let series: Option<fn(&TwoLevelParams, f64, usize) -> f64> = match name {
                "sigmaz" => Some(sigma_z_series),
                "population" => Some(population_series),
                _ => None,
            };
            if let Some(f) = series {
                for &q in orders {
                    let v = times.iter().map(|&t| f(p, t, q)).collect();
                    out.push(Column::new(name, Source::Paper, Some(q), v));
                }
            }
            if name == "sigmax" && orders.contains(&1) && p.initial == plus_x_state() {
                let v = times.iter().map(|&t| sigma_x_first_order_paper(p, t)).collect();
                out.push(Column::new(name, Source::Paper, Some(1), v));
            }
        }
        (Model::Cavity(p), Probe::Operator(a)) => {
            let max = orders.iter().copied().max().unwrap_or(0);
            let expansion = cavity_expansion(p, max, grid)?;
            for &q in orders {
                let v = expansion.assemble(p.kappa, q)?.expectation(a)?.re().into_samples();
                out.push(Column::new(name, Source::Paper, Some(q), v));
            }
        }
        (Model::Jc(p), Probe::Atom(_, a)) => {
            for &q in orders.iter().filter(|&&q| q <= 2) {
                let v = jc_gamma_series(p, p.excited_amplitudes(), a, grid, q)?.re().into_samples();
                out.push(Column::new(name, Source::Paper, Some(q), v));
            }
        }
        (Model::Dicke(p), Probe::Fidelity { .. }) => {
            let v = times.iter().map(|&t| dicke_fidelity_closed(p, t)).collect();
            out.push(Column::new(name, Source::Paper, None, v));
        }
        _ => {}
    }
    Ok(out)
}

/// One grid point of a sweep, or the whole scenario when there is none.
#[derive(Debug, Clone)]
pub struct Job {
    pub label: Option<(String, f64)>,
    pub model: ModelConfig,
    pub tolerances: BTreeMap<String, f64>,
}

impl Job {
    pub fn file_stem(&self, name: &str) -> String {
        match &self.label {
            Some((param, value)) => format!("{name}_{param}_{value}"),
            None => name.to_owned(),
        }
    }
}

pub fn jobs(cfg: &ScenarioConfig) -> Result<Vec<Job>, HarnessError> {
    let Some(sweep) = &cfg.sweep else {
        return Ok(vec![Job {
            label: None,
            model: cfg.model.clone(),
            tolerances: cfg.tolerances.clone(),
        }]);
    };
    sweep
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut tolerances = cfg.tolerances.clone();
            if let Some(extra) = sweep.tolerances.get(i) {
                tolerances.extend(extra.iter().map(|(k, v)| (k.clone(), *v)));
            }
            Ok(Job {
                label: Some((sweep.param.clone(), v)),
                model: cfg.model_at(&sweep.param, v)?,
                tolerances,
            })
        })
        .collect()
}

/// Builds the comparison report for one job.
pub fn compare(cfg: &ScenarioConfig, model_cfg: &ModelConfig) -> Result<ComparisonReport, HarnessError> {
    let model = Model::build(model_cfg)?;
    let me = model.master_equation()?;
    let rho0 = model.initial_state()?;
    let grid = match cfg.grid.steps {
        Some(steps) => TimeGrid::new(cfg.grid.t0, cfg.grid.t1, steps)?,
        None => default_grid(&me, cfg.grid.t0, cfg.grid.t1)?,
    };
    let probes = cfg
        .observables
        .iter()
        .map(|s| model.probe(s).map(|p| (s, p)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut columns = Vec::new();
    let mut hygiene = None;
    if cfg.compare.exact {
        let traj = evolve(&me, &rho0, &grid)?;
        hygiene = Some(Hygiene::of(&traj));
        for (spec, probe) in &probes {
            if !matches!(probe, Probe::FidelitySlope { .. }) {
                columns.push(Column::new(spec.name(), Source::Exact, None, probe_values(probe, &traj)?));
            }
        }
    }
    let wants_slopes = probes.iter().any(|(_, p)| matches!(p, Probe::FidelitySlope { .. }));
    let slopes = match (&model, wants_slopes) {
        (Model::Dicke(p), true) => Some(dicke_compare(p, &grid, DICKE_SLOPE_STEP)?),
        _ => None,
    };

    let opts = HierarchyOptions {
        order_cap: cfg.order_cap,
        ..HierarchyOptions::default()
    };
    let max_order = cfg.max_order().max(usize::from(wants_slopes));
    let coeffs = solve_hierarchy_with(&me, &rho0, &grid, max_order, &opts)?;
    let rates = RateAssignment::of(&me);
    for &q in &cfg.orders {
        let series = assemble(&coeffs, &rates, q)?;
        for (spec, probe) in &probes {
            if !matches!(probe, Probe::FidelitySlope { .. }) {
                columns.push(Column::new(spec.name(), Source::Engine, Some(q), probe_values(probe, &series)?));
            }
        }
    }
    for (spec, probe) in &probes {
        if let Probe::FidelitySlope { energies, psi, up } = probe {
            let s = slopes.as_ref().expect("computed above");
            let (fd, closed) = if *up {
                (&s.fd_slope_g, &s.closed_slope_g)
            } else {
                (&s.fd_slope_k, &s.closed_slope_k)
            };
            if cfg.compare.exact {
                columns.push(Column::new(spec.name(), Source::Exact, None, fd.samples().to_vec()));
            }
            columns.push(Column::new(
                spec.name(),
                Source::Engine,
                None,
                engine_slope(&coeffs, &me, energies, psi, *up)?,
            ));
            if cfg.compare.paper {
                columns.push(Column::new(spec.name(), Source::Paper, None, closed.samples().to_vec()));
            }
        }
    }
    if cfg.compare.paper {
        for (spec, probe) in &probes {
            columns.extend(paper_columns(&model, spec, probe, &grid, &cfg.orders)?);
        }
    }

    let mut finite_difference = Vec::new();
    if cfg.compare.finite_difference {
        let top = cfg.max_order().min(2);
        for alpha in coeffs.indices().iter().filter(|a| (1..=top as u32).contains(&a.total_order())) {
            let mut deviations = [0.0; 2];
            for (d, &h) in deviations.iter_mut().zip(&FD_STEPS) {
                *d = finite_difference_deviation(&coeffs, &me, &rho0, alpha, h)?;
            }
            finite_difference.push(FdEntry {
                index: alpha.to_string(),
                deviations,
            });
        }
    }

    let errors = error_columns(&columns);
    Ok(ComparisonReport {
        grid,
        times: grid.times(),
        columns,
        errors,
        finite_difference,
        hygiene,
    })
}

fn error_columns(columns: &[Column]) -> Vec<ErrorColumn> {
    let mut out = Vec::new();
    for exact in columns.iter().filter(|c| c.source == Source::Exact) {
        for c in columns
            .iter()
            .filter(|c| c.source != Source::Exact && c.observable == exact.observable)
        {
            out.push(ErrorColumn {
                column: c.name(),
                observable: c.observable.clone(),
                tag: c.tag(),
                order: c.order,
                values: exact.values.iter().zip(&c.values).map(|(e, v)| (e - v).abs()).collect(),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct JobReport {
    pub job: Job,
    pub csv: PathBuf,
    pub report: ComparisonReport,
    /// Tolerance checks by column, plus `hygiene` when the exact solver ran.
    pub pass: BTreeMap<String, bool>,
    pub runtime_seconds: f64,
}

impl JobReport {
    pub fn passed(&self) -> bool {
        self.pass.values().all(|&p| p)
    }

    fn summary(&self) -> Value {
        let r = &self.report;
        let mut max_err: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        let mut end_err: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
        for e in &r.errors {
            max_err.entry(&e.observable).or_default().insert(&e.tag, e.max());
            end_err.entry(&e.observable).or_default().insert(&e.tag, e.at_end());
        }
        // Ratio of successive engine errors: how fast the series converges.
        let mut convergence: BTreeMap<&str, Vec<Value>> = BTreeMap::new();
        for obs in max_err.keys() {
            let mut engine: Vec<&ErrorColumn> = r
                .errors
                .iter()
                .filter(|e| e.observable == *obs && e.tag.starts_with("engine_order"))
                .collect();
            engine.sort_by_key(|e| e.order);
            for w in engine.windows(2) {
                convergence.entry(obs).or_default().push(json!({
                    "from": w[0].order,
                    "to": w[1].order,
                    "error_ratio": w[1].max() / w[0].max(),
                }));
            }
        }
        let at_end: BTreeMap<String, f64> = r
            .columns
            .iter()
            .map(|c| (c.name(), *c.values.last().expect("non-empty")))
            .collect();
        json!({
            "param": self.job.label.as_ref().map(|(p, v)| json!({"name": p, "value": v})),
            "csv": self.csv,
            "grid": {"t0": r.grid.t0(), "t1": r.grid.t1(), "steps": r.grid.steps()},
            "max_abs_error": max_err,
            "error_at_t1": end_err,
            "convergence": convergence,
            "value_at_t1": at_end,
            "finite_difference": r.finite_difference.iter().map(|f| json!({
                "index": f.index,
                "h": FD_STEPS,
                "deviation": f.deviations,
                "ratio": f.ratio(),
            })).collect::<Vec<_>>(),
            "hygiene": r.hygiene.map(|h| json!({
                "trace_deviation": h.trace_deviation,
                "hermiticity_error": h.hermiticity_error,
                "min_eigenvalue": h.min_eigenvalue,
            })),
            "pass": self.pass,
            "runtime_seconds": self.runtime_seconds,
        })
    }
}

fn run_job(cfg: &ScenarioConfig, job: Job, dir: &Path) -> Result<JobReport, HarnessError> {
    let start = Instant::now();
    let report = compare(cfg, &job.model)?;
    let mut pass = BTreeMap::new();
    for (column, &tol) in &job.tolerances {
        let err = report.error(column).ok_or_else(|| {
            HarnessError::Config(format!("tolerance for `{column}`, which has no error column"))
        })?;
        pass.insert(column.clone(), err.max() <= tol);
    }
    if let Some(h) = report.hygiene {
        pass.insert("hygiene".to_owned(), h.passed());
    }
    let csv = dir.join(format!("{}.csv", job.file_stem(&cfg.name)));
    report.write_csv(&csv)?;
    Ok(JobReport {
        job,
        csv,
        report,
        pass,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub jobs: Vec<JobReport>,
    pub summary_path: PathBuf,
    pub runtime_seconds: f64,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.jobs.iter().all(JobReport::passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.jobs
            .iter()
            .flat_map(|j| {
                let stem = j.job.file_stem(&self.config.name);
                j.pass
                    .iter()
                    .filter(|(_, &ok)| !ok)
                    .map(move |(k, _)| format!("{stem}: {k}"))
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "config": self.config,
            "runtime_seconds": self.runtime_seconds,
            "passed": self.passed(),
            "jobs": self.jobs.iter().map(JobReport::summary).collect::<Vec<_>>(),
        })
    }
}

/// Runs every job of the scenario concurrently, writes one CSV per job and
/// the JSON summary after all have finished.
pub fn run(cfg: &ScenarioConfig) -> Result<RunSummary, HarnessError> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    let jobs = jobs(cfg)?;
    let results: Vec<Result<JobReport, HarnessError>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .into_iter()
            .map(|job| {
                let dir = &dir;
                s.spawn(move || run_job(cfg, job, dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario job panicked"))
            .collect()
    });
    let jobs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let summary_path = dir.join(format!("{}_summary.json", cfg.name));
    let mut summary = RunSummary {
        config: cfg.clone(),
        jobs,
        summary_path: summary_path.clone(),
        runtime_seconds: 0.0,
    };
    summary.runtime_seconds = start.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&summary.to_json()).expect("serializable") + "\n";
    std::fs::write(&summary_path, text).map_err(|source| HarnessError::Io {
        path: summary_path,
        source,
    })?;
    Ok(summary)
}
