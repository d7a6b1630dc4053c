//! Acceptance suite orchestration: configuration, per-subcommand runs, and report files.
//!
//! Every run writes `report.json` (deterministic for a fixed config and seed), per-module
//! CSV/JSON artifacts, and `timings.json` (wall-clock only, excluded from the report).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conventions::DEFAULT_SEED;
use crate::curvature::{self, CurvatureConfig, RadialModel, UniformityCheck};
use crate::cylinder;
use crate::energy::{self, RadialData, RadialPotential};
use crate::error::{LabError, Result};
use crate::linalg::C64;
use crate::metric::{self, BackgroundData, WeightKind};
use crate::rescaling;
use crate::solver::{self, Model, Perturbation, SolverConfig};
use crate::special::{self, ConeAngle, InequalityGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    SpecialFn,
    Curvature,
    SolveDisk,
    Sweep,
    Energy,
    Rescale,
    Cylinder,
    All,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::SpecialFn,
        Subcommand::Curvature,
        Subcommand::SolveDisk,
        Subcommand::Sweep,
        Subcommand::Energy,
        Subcommand::Rescale,
        Subcommand::Cylinder,
        Subcommand::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::SpecialFn => "special-fn",
            Subcommand::Curvature => "curvature",
            Subcommand::SolveDisk => "solve-disk",
            Subcommand::Sweep => "sweep",
            Subcommand::Energy => "energy",
            Subcommand::Rescale => "rescale",
            Subcommand::Cylinder => "cylinder",
            Subcommand::All => "all",
        }
    }

    /// Criteria evaluated by the subcommand.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Subcommand::SpecialFn => &[1, 2],
            Subcommand::Curvature => &[3, 4],
            Subcommand::SolveDisk => &[5, 7, 8],
            Subcommand::Sweep => &[6],
            Subcommand::Energy => &[11],
            Subcommand::Rescale => &[9],
            Subcommand::Cylinder => &[10],
            Subcommand::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12],
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown subcommand '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecialFnSection {
    pub betas: Vec<f64>,
    pub log_t_min: f64,
    pub points_per_beta: usize,
    pub inequalities: InequalityGrid,
}

impl Default for SpecialFnSection {
    fn default() -> Self {
        SpecialFnSection {
            betas: (1..=10).rev().map(|k| 0.05 * k as f64).collect(),
            log_t_min: -27.0,
            points_per_beta: 1000,
            inequalities: InequalityGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureSection {
    /// Ladder for the Gaussian-curvature constancy check.
    pub gauss_betas: Vec<f64>,
    pub gauss_radii: usize,
    /// Ladder for the bisectional uniformity check.
    pub betas: Vec<f64>,
    pub backgrounds: Vec<WeightKind>,
    pub dim: usize,
    pub per_level: usize,
    pub restarts: usize,
    pub fd_step: f64,
    pub max_spread: f64,
}

impl Default for CurvatureSection {
    fn default() -> Self {
        CurvatureSection {
            gauss_betas: vec![0.5, 0.25, 0.1, 0.05, 0.01],
            gauss_radii: 60,
            betas: vec![0.5, 0.25, 0.1, 0.05],
            backgrounds: vec![WeightKind::Quadratic, WeightKind::CrossTerm],
            dim: 2,
            per_level: 8,
            restarts: 16,
            fd_step: curvature::DEFAULT_FD_STEP,
            max_spread: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveDiskSection {
    /// Conic cone angles recovered against their closed forms; the cusp is always added.
    pub betas: Vec<f64>,
    /// Ladder of the equivalence and a priori checks.
    pub ladder: Vec<f64>,
    pub grid: usize,
    pub refinement_grid: usize,
    pub bump_amplitude: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for SolveDiskSection {
    fn default() -> Self {
        SolveDiskSection {
            betas: vec![0.5, 0.1, 0.01],
            ladder: vec![0.5, 0.25, 0.1, 0.05, 0.01],
            grid: 4096,
            refinement_grid: 1025,
            bump_amplitude: 1.0,
            r_min: 0.05,
            r_max: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub r_inner: f64,
    pub r_outer: f64,
    pub grid: usize,
    pub tolerance: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { betas: vec![0.5, 0.25, 0.1, 0.05, 0.01], r_inner: 0.25, r_outer: 0.75, grid: 4096, tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub betas: Vec<f64>,
    pub flat_betas: Vec<f64>,
    pub translation_samples: usize,
    pub final_gap: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        EnergySection {
            betas: vec![0.5, 0.1, 0.01, 0.001],
            flat_betas: vec![0.9, 0.5, 0.1, 0.01, 0.001],
            translation_samples: 20,
            final_gap: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RescaleSection {
    pub betas: Vec<f64>,
    pub radii: usize,
    pub expansion_betas: Vec<f64>,
    pub pullback_samples: usize,
}

impl Default for RescaleSection {
    fn default() -> Self {
        RescaleSection {
            betas: vec![0.2, 0.1, 0.05, 0.025],
            radii: 41,
            expansion_betas: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            pullback_samples: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderSection {
    pub samples: usize,
    pub records: usize,
    pub ricci_samples: usize,
}

impl Default for CylinderSection {
    fn default() -> Self {
        CylinderSection { samples: 1000, records: 20, ricci_samples: 50 }
    }
}

/// Run configuration; every section defaults to the acceptance suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub special_fn: SpecialFnSection,
    pub curvature: CurvatureSection,
    pub solve_disk: SolveDiskSection,
    pub sweep: SweepSection,
    pub energy: EnergySection,
    pub rescale: RescaleSection,
    pub cylinder: CylinderSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            special_fn: SpecialFnSection::default(),
            curvature: CurvatureSection::default(),
            solve_disk: SolveDiskSection::default(),
            sweep: SweepSection::default(),
            energy: EnergySection::default(),
            rescale: RescaleSection::default(),
            cylinder: CylinderSection::default(),
        }
    }
}

fn check_ladder(name: &str, ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(LabError::Config(format!("{name}: empty ladder")));
    }
    if let Some(b) = ladder.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(LabError::Config(format!("{name}: {b} is outside (0, 1)")));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::Config(format!("{name}: ladder is not strictly decreasing")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        check_ladder("special_fn.betas", &self.special_fn.betas)?;
        check_ladder("curvature.gauss_betas", &self.curvature.gauss_betas)?;
        check_ladder("curvature.betas", &self.curvature.betas)?;
        check_ladder("solve_disk.betas", &self.solve_disk.betas)?;
        check_ladder("solve_disk.ladder", &self.solve_disk.ladder)?;
        check_ladder("sweep.betas", &self.sweep.betas)?;
        check_ladder("energy.betas", &self.energy.betas)?;
        check_ladder("rescale.betas", &self.rescale.betas)?;
        check_ladder("rescale.expansion_betas", &self.rescale.expansion_betas)?;
        if self.curvature.dim < 2 || self.curvature.backgrounds.is_empty() {
            return Err(LabError::Config("curvature needs dim ≥ 2 and at least one background".into()));
        }
        for g in [self.solve_disk.grid, self.sweep.grid, self.solve_disk.refinement_grid] {
            if g < 64 {
                return Err(LabError::Config(format!("grid {g} < 64")));
            }
        }
        if self.rescale.radii < 2 || self.curvature.gauss_radii < 2 {
            return Err(LabError::Config("need at least two radii".into()));
        }
        Ok(())
    }

    /// Applies `--beta-ladder` to the ladders read by `sub`.
    pub fn override_ladder(&mut self, sub: Subcommand, ladder: &[f64]) -> Result<()> {
        check_ladder("--beta-ladder", ladder)?;
        let l = ladder.to_vec();
        let every = sub == Subcommand::All;
        if every || sub == Subcommand::SpecialFn {
            self.special_fn.betas = l.clone();
        }
        if every || sub == Subcommand::Curvature {
            self.curvature.betas = l.clone();
        }
        if every || sub == Subcommand::SolveDisk {
            self.solve_disk.ladder = l.clone();
        }
        if every || sub == Subcommand::Sweep {
            self.sweep.betas = l.clone();
        }
        if every || sub == Subcommand::Energy {
            self.energy.betas = l.clone();
        }
        if every || sub == Subcommand::Rescale {
            self.rescale.betas = l;
        }
        Ok(())
    }

    pub fn override_grid(&mut self, grid: usize) -> Result<()> {
        if grid < 64 {
            return Err(LabError::Config(format!("grid {grid} < 64")));
        }
        self.solve_disk.grid = grid;
        self.sweep.grid = grid;
        Ok(())
    }

    fn solver(&self, grid: usize) -> SolverConfig {
        SolverConfig { grid, r_min: self.solve_disk.r_min, r_max: self.solve_disk.r_max, ..Default::default() }
    }
}

pub fn parse_ladder(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| LabError::Config(format!("ladder entry '{p}': {e}"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Measured,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionEntry {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    /// Runtime budget in seconds.
    pub budget_s: f64,
    pub within_budget: bool,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub subcommand: Subcommand,
    pub seed: u64,
    pub criteria: Vec<CriterionEntry>,
    /// Recorded constants, keyed by name.
    pub constants: BTreeMap<String, f64>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.status != Status::Fail)
    }

    pub fn entry(&self, id: u8) -> Option<&CriterionEntry> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "cancellation identity",
        2 => "A/B inequalities",
        3 => "disk model curvature",
        4 => "bisectional uniformity",
        5 => "solver oracle",
        6 => "local convergence to the cusp",
        7 => "uniform equivalence",
        8 => "a priori bounds",
        9 => "rescaling limit",
        10 => "cylinder classification",
        11 => "energy functionals",
        12 => "full suite",
        _ => "unknown",
    }
}

fn budget(id: u8) -> f64 {
    match id {
        1 | 2 => 1.0,
        3 | 9 | 10 => 5.0,
        4 => 120.0,
        5 | 6 => 30.0,
        7 => 60.0,
        8 => 10.0,
        11 => 20.0,
        _ => 300.0,
    }
}

/// Artifacts of one criterion besides its report entry.
#[derive(Default)]
struct Artifacts {
    csv: Vec<(String, String)>,
    json: Vec<(String, Value)>,
    constants: Vec<(String, f64)>,
}

struct Outcome {
    passed: bool,
    details: Value,
    artifacts: Artifacts,
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| LabError::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| LabError::Io(e.to_string()))?).map_err(|e| LabError::Io(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn criterion_1(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.special_fn;
    let ts = special::linspace(s.log_t_min, 0.25f64.ln(), s.points_per_beta);
    let mut worst: f64 = 0.0;
    let mut naive: f64 = 0.0;
    for &b in &s.betas {
        for &lt in &ts {
            worst = worst.max(special::cancellation_residual(lt, b));
            naive = naive.max(special::cancellation_residual_naive(lt, b));
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-10,
        details: json!({ "points": s.betas.len() * ts.len(), "max_relative_residual": worst, "naive_max_relative_residual": naive, "tolerance": 1e-10 }),
        artifacts: Artifacts::default(),
    })
}

fn criterion_2(cfg: &RunConfig) -> Result<Outcome> {
    let rep = special::check_ab_inequalities(&cfg.special_fn.inequalities);
    let violation = rep.part_i_max_violation.max(rep.part_ii_max_violation);
    let eq = rep.max_equality_error();
    let passed = violation <= 1e-14 && eq <= 1e-9;
    let details = json!({
        "points": rep.points,
        "part_i_max_violation": rep.part_i_max_violation,
        "part_ii_max_violation": rep.part_ii_max_violation,
        "max_equality_error": eq,
        "sup_a_scaled": rep.sup_a_scaled,
        "sup_b": rep.sup_b,
    });
    let artifacts = Artifacts { json: vec![("special_fn.json".into(), to_value(&rep))], ..Default::default() };
    Ok(Outcome { passed, details, artifacts })
}

#[derive(Serialize)]
struct GaussRow {
    beta: f64,
    r: f64,
    k: f64,
    k_substitution: f64,
}

fn criterion_3(cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.curvature;
    let radii: Vec<f64> = special::linspace(1e-4f64.ln(), 0.9f64.ln(), c.gauss_radii).into_iter().map(f64::exp).collect();
    let disk = |x: f64| -2.0 * (-(2.0 * x).exp_m1()).ln();
    let mut rows = Vec::new();
    let mut means = Vec::new();
    let mut max_std: f64 = 0.0;
    let mut max_oracle: f64 = 0.0;
    let mut max_identity: f64 = 0.0;
    for &b in &c.gauss_betas {
        let beta = ConeAngle::new(b)?;
        let mut ks = Vec::new();
        for &r in &radii {
            let z = C64::from_polar(r, 0.3);
            let k = curvature::gauss_curvature_radial(&RadialModel::Conic(beta), z)?;
            // w = z^β carries the disk model to the Poincaré disk 1/(1-|w|²)².
            let w = C64::from_polar(r.powf(b), 0.3 * b);
            let k_sub = curvature::gauss_curvature_radial(&disk, w)?;
            let pulled = b * b * r.powf(2.0 * (b - 1.0)) * disk(b * r.ln()).exp();
            let lam = metric::eval_disk_model(z, beta)?;
            max_identity = max_identity.max((pulled - lam).abs() / lam);
            max_oracle = max_oracle.max((k - k_sub).abs());
            ks.push(k);
            rows.push(GaussRow { beta: b, r, k, k_substitution: k_sub });
        }
        let mean = ks.iter().sum::<f64>() / ks.len() as f64;
        let std = (ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / ks.len() as f64).sqrt();
        max_std = max_std.max(std);
        means.push(mean);
    }
    let variation = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - means.iter().cloned().fold(f64::INFINITY, f64::min);
    let passed = max_std <= 1e-6 && variation <= 1e-6 && max_oracle <= 1e-6 && max_identity <= 1e-12;
    Ok(Outcome {
        passed,
        details: json!({
            "max_grid_std": max_std,
            "beta_variation": variation,
            "constant": means[0],
            "max_substitution_gap": max_oracle,
            "max_pullback_identity_error": max_identity,
        }),
        artifacts: Artifacts { csv: vec![("gauss_curvature.csv".into(), csv_string(&rows)?)], ..Default::default() },
    })
}

#[derive(Serialize)]
struct BisecCsvRow {
    background: WeightKind,
    beta: f64,
    point_id: usize,
    log_t: f64,
    sup_bisec: f64,
    g11_ratio: f64,
    offdiag_ratio: f64,
}

fn criterion_4(cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.curvature;
    let ccfg = CurvatureConfig { fd_step: c.fd_step, restarts: c.restarts, seed: cfg.seed, ..Default::default() };
    let samples = curvature::standard_samples(c.dim, c.per_level, cfg.seed);
    let mut rows = Vec::new();
    let mut per_bg = Vec::new();
    let mut passed = true;
    let mut ceiling: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for &kind in &c.backgrounds {
        let bg = BackgroundData::normalized(c.dim, kind)?;
        let mut reports = Vec::new();
        for &b in &c.betas {
            let rep = curvature::bisectional_sup(ConeAngle::uniform(b)?, &bg, &samples, &ccfg)?;
            sym = sym.max(rep.max_symmetry_residual);
            for r in &rep.rows {
                rows.push(BisecCsvRow {
                    background: kind,
                    beta: r.beta,
                    point_id: r.point_id,
                    log_t: r.log_t,
                    sup_bisec: r.sup_bisec,
                    g11_ratio: r.g11_ratio,
                    offdiag_ratio: r.offdiag_ratio,
                });
            }
            reports.push(rep);
        }
        let u = UniformityCheck::from_reports(&reports);
        passed &= u.passes(c.max_spread);
        ceiling = ceiling.max(u.ceiling);
        per_bg.push(json!({ "background": kind, "per_beta_sup": u.per_beta, "ceiling": u.ceiling, "spread": u.spread, "monotone_growth": u.monotone_growth }));
    }
    Ok(Outcome {
        passed,
        details: json!({ "backgrounds": per_bg, "recorded_ceiling": ceiling, "max_spread_allowed": c.max_spread, "max_symmetry_residual": sym, "points_per_beta": samples.len() }),
        artifacts: Artifacts {
            csv: vec![("curvature.csv".into(), csv_string(&rows)?)],
            constants: vec![("curvature_ceiling".into(), ceiling)],
            ..Default::default()
        },
    })
}

#[derive(Serialize)]
struct ProfileRow {
    beta: f64,
    r: f64,
    lambda: f64,
    lambda_model: f64,
    relative_error: f64,
}

fn criterion_5(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.solve_disk;
    let scfg = cfg.solver(s.grid);
    let mut models: Vec<Model> = s.betas.iter().map(|&b| Model::from_beta(b)).collect::<Result<_>>()?;
    models.push(Model::Cusp);
    let mut per_model = Vec::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for m in &models {
        let st = solver::solve_radial_ke(*m, &scfg)?;
        let err = st.max_relative_error();
        let plain = SolverConfig { grid: s.refinement_grid, richardson: false, ..scfg.clone() };
        let plain_fine = SolverConfig { grid: 2 * s.refinement_grid - 1, ..plain.clone() };
        let e1 = solver::solve_radial_ke(*m, &plain)?.max_relative_error();
        let e2 = solver::solve_radial_ke(*m, &plain_fine)?.max_relative_error();
        let ratio = e1 / e2;
        passed &= err <= 1e-6 && (3.2..=4.8).contains(&ratio) && st.iterations <= 8;
        per_model.push(json!({ "beta": m.beta(), "max_relative_error": err, "refinement_ratio": ratio, "newton_iterations": st.iterations }));
        let stride = (st.x.len() / 256).max(1);
        for i in (0..st.x.len()).step_by(stride) {
            rows.push(ProfileRow {
                beta: m.beta(),
                r: st.x[i].exp(),
                lambda: st.lambda(i),
                lambda_model: st.log_lambda_model[i].exp(),
                relative_error: (st.log_lambda[i] - st.log_lambda_model[i]).exp_m1(),
            });
        }
    }
    Ok(Outcome {
        passed,
        details: json!({ "grid": s.grid, "models": per_model }),
        artifacts: Artifacts { csv: vec![("solve_disk.csv".into(), csv_string(&rows)?)], ..Default::default() },
    })
}

fn criterion_6(cfg: &RunConfig) -> Result<Outcome> {
    let w = &cfg.sweep;
    let scfg = cfg.solver(w.grid);
    let table = solver::beta_sweep_convergence(&w.betas, w.r_inner, w.r_outer, &scfg)?;
    let smallest = table.rows.iter().min_by(|a, b| a.beta.partial_cmp(&b.beta).unwrap()).unwrap();
    let at_001 = table.rows.iter().find(|r| r.beta == 0.01);
    let final_c0 = at_001.unwrap_or(smallest).c0;
    let passed = final_c0 <= w.tolerance && table.c0_non_increasing;
    Ok(Outcome {
        passed,
        details: json!({
            "rows": table.rows.len(),
            "c0_at_smallest_beta": smallest.c0,
            "c0_at_beta_0_01": at_001.map(|r| r.c0),
            "c0_non_increasing": table.c0_non_increasing,
            "c1_non_increasing": table.c1_non_increasing,
            "remark_monotone_fraction": table.remark_monotone_fraction,
        }),
        artifacts: Artifacts {
            csv: vec![("sweep.csv".into(), csv_string(&table.rows)?)],
            json: vec![("sweep.json".into(), to_value(&table))],
            ..Default::default()
        },
    })
}

fn criterion_7(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.solve_disk;
    let bumped = SolverConfig { perturbation: Perturbation::Bump { amplitude: s.bump_amplitude }, ..cfg.solver(s.grid) };
    let rep = solver::verify_uniform_equivalence(&s.ladder, &bumped)?;
    let flat = solver::verify_uniform_equivalence(&s.ladder, &cfg.solver(s.grid))?;
    let flat_gap = flat.constant - 1.0;
    let passed = rep.spread <= 2.0 && flat_gap <= 1e-6 && rep.constant.is_finite();
    Ok(Outcome {
        passed,
        details: json!({ "recorded_constant": rep.constant, "spread": rep.spread, "unperturbed_gap": flat_gap, "rows": rep.rows }),
        artifacts: Artifacts {
            json: vec![("equivalence.json".into(), to_value(&rep))],
            constants: vec![("equivalence_constant".into(), rep.constant)],
            ..Default::default()
        },
    })
}

fn criterion_8(cfg: &RunConfig) -> Result<Outcome> {
    let s = &cfg.solve_disk;
    let bumped = SolverConfig { perturbation: Perturbation::Bump { amplitude: s.bump_amplitude }, ..cfg.solver(s.grid) };
    let cusp = solver::verify_apriori_bounds(&solver::solve_radial_ke(Model::Cusp, &bumped)?);
    let reports: Vec<solver::AprioriReport> = s
        .ladder
        .iter()
        .map(|&b| Ok(solver::verify_apriori_bounds(&solver::solve_radial_ke(Model::from_beta(b)?, &bumped)?)))
        .collect::<Result<_>>()?;
    let names = ["lower_bound", "sup_bound", "growth"];
    let limit = cusp.constants();
    let mut growth = Vec::new();
    let mut passed = true;
    for k in 0..3 {
        let hi = reports.iter().map(|r| r.constants()[k]).fold(0.0, f64::max);
        let lo = reports.iter().map(|r| r.constants()[k]).fold(f64::INFINITY, f64::min);
        let ok = hi <= 2.0 * limit[k];
        passed &= ok;
        growth.push(json!({ "constant": names[k], "max_over_ladder": hi, "min_over_ladder": lo, "cusp_value": limit[k], "growth_vs_cusp": hi / limit[k], "ok": ok }));
    }
    let c_rec = reports.iter().chain(std::iter::once(&cusp)).map(|r| r.lower_bound_constant).fold(0.0, f64::max);
    let sign_ok = reports.iter().chain(std::iter::once(&cusp)).all(|r| r.lower_bound_min >= -c_rec);
    let max_principle = reports.iter().all(|r| !r.min_interior || r.second_difference_at_min >= 0.0);
    passed &= sign_ok && max_principle;
    Ok(Outcome {
        passed,
        details: json!({ "constants": growth, "c_rec": c_rec, "sign_check": sign_ok, "interior_minimum_convex": max_principle, "per_beta": reports, "cusp": cusp }),
        artifacts: Artifacts { constants: vec![("c_rec".into(), c_rec)], ..Default::default() },
    })
}

fn criterion_9(cfg: &RunConfig) -> Result<Outcome> {
    use rand::Rng;
    let r = &cfg.rescale;
    let conv = rescaling::limit_convergence(&r.betas, r.radii)?;
    let moduli: Vec<f64> = (0..9).map(|i| 0.5 * 4f64.powf(i as f64 / 8.0)).collect();
    let exp = rescaling::expansion_check(&r.expansion_betas, &moduli)?;
    let mut rng = energy::seeded_rng(cfg.seed);
    let mut cross: f64 = 0.0;
    let mut roundtrip: f64 = 0.0;
    for _ in 0..r.pullback_samples {
        let b = r.betas[rng.gen_range(0..r.betas.len())];
        let beta = ConeAngle::new(b)?;
        let w = vec![C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU)), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))];
        let a = rescaling::pullback_rescaled_model(&w, beta)?;
        let f = rescaling::pullback_from_potential(&w, beta)?;
        cross = cross.max(crate::linalg::max_abs(&(&a - &f)));
        let back = rescaling::invert_rescaling(&rescaling::apply_rescaling(&w, beta)?, beta)?;
        roundtrip = roundtrip.max(w.iter().zip(&back).map(|(p, q)| (p - q).norm() / p.norm().max(1.0)).fold(0.0, f64::max));
    }
    let passed = (0.8..=1.2).contains(&conv.slope) && conv.unit_circle_error <= 1e-14 && cross <= 1e-8 && roundtrip <= 1e-14;
    Ok(Outcome {
        passed,
        details: json!({
            "slope": conv.slope,
            "c_fit": conv.c_fit,
            "sup_deviation": conv.sup_deviation,
            "gradient_ratio_deviation": conv.gradient_ratio_deviation,
            "unit_circle_error": conv.unit_circle_error,
            "limit_coefficient": rescaling::limit_coefficient(),
            "pullback_cross_check": cross,
            "round_trip": roundtrip,
            "expansion": exp,
        }),
        artifacts: Artifacts {
            csv: vec![("rescale.csv".into(), csv_string(&conv.rows)?)],
            json: vec![("expansion.json".into(), to_value(&exp))],
            constants: vec![("rescale_slope".into(), conv.slope), ("rescale_c_fit".into(), conv.c_fit)],
        },
    })
}

fn criterion_10(cfg: &RunConfig) -> Result<Outcome> {
    let c = &cfg.cylinder;
    let mut rng = energy::seeded_rng(cfg.seed);
    let rep = cylinder::classification_check(c.samples, &mut rng, c.records)?;
    let samples = cylinder::cover_samples(3, c.ricci_samples, &mut rng);
    let metric = cylinder::CylindricalMetric::new(cylinder::random_positive_definite(3, &mut rng))?;
    let flat = cylinder::ricci_flat_check(&metric, &samples, 1e-10)?;
    let control = cylinder::ricci_flat_check(&cylinder::RadiallyWarped(metric), &samples, 1e-10)?;
    let passed = rep.min_gap > 0.0
        && rep.max_invariant_error <= 1e-10
        && rep.max_recovery_error <= 1e-12
        && rep.max_witness_residual <= 1e-10
        && flat.passed
        && !control.passed;
    Ok(Outcome {
        passed,
        details: json!({
            "samples": rep.samples,
            "min_a_minus_b2": rep.min_gap,
            "max_invariant_error": rep.max_invariant_error,
            "max_recovery_error": rep.max_recovery_error,
            "max_witness_residual": rep.max_witness_residual,
            "ricci_flat": flat,
            "negative_control": control,
        }),
        artifacts: Artifacts { json: vec![("cylinder.json".into(), to_value(&rep.records))], ..Default::default() },
    })
}

fn criterion_11(cfg: &RunConfig) -> Result<Outcome> {
    let e = &cfg.energy;
    let flat = RadialData::default();
    let mut l_err: f64 = 0.0;
    for &b in &e.flat_betas {
        let l = energy::energy_l(&RadialPotential::Constant { value: 0.0 }, b, &flat)?.value;
        l_err = l_err.max((l + (std::f64::consts::PI / b).ln()).abs());
    }
    let mut rng = energy::seeded_rng(cfg.seed);
    let mut translation: f64 = 0.0;
    for i in 0..e.translation_samples {
        use rand::Rng;
        let phi = energy::random_admissible(&mut rng);
        let c: f64 = rng.gen_range(-3.0..3.0);
        let b = e.betas[i % e.betas.len()];
        let e0 = energy::energy_e(&phi, b, &flat)?.value;
        let e1 = energy::energy_e(&phi.shifted(c), b, &flat)?.value;
        let l0 = energy::energy_l(&phi, b, &flat)?.value;
        let l1 = energy::energy_l(&phi.shifted(c), b, &flat)?.value;
        translation = translation.max((e1 - e0 - c).abs()).max((l1 - l0 + c).abs());
    }
    let table = energy::beta_continuity(&RadialPotential::cusp(), &e.betas, &flat)?;
    let domination = energy::domination_check(&e.betas, 2000);
    let stationarity: Vec<_> = e.betas.iter().map(|&b| energy::stationarity_check(b)).collect();
    let gap = table.final_gap.unwrap_or(f64::INFINITY);
    let passed = l_err <= 1e-8 && translation <= 1e-10 && table.cauchy && gap <= e.final_gap;
    let rows: Vec<_> = table.rows.iter().filter_map(|r| r.report).collect();
    Ok(Outcome {
        passed,
        details: json!({
            "l_of_zero_max_error": l_err,
            "translation_max_error": translation,
            "cauchy": table.cauchy,
            "final_gap": table.final_gap,
            "g_limit": table.limit.report.map(|r| r.g),
            "domination": domination,
            "stationarity": stationarity,
        }),
        artifacts: Artifacts {
            csv: vec![("energy.csv".into(), csv_string(&rows)?)],
            json: vec![("energy.json".into(), to_value(&table))],
            constants: vec![("domination_constant".into(), domination.constant)],
        },
    })
}

fn evaluate(id: u8, cfg: &RunConfig) -> Result<Outcome> {
    match id {
        1 => criterion_1(cfg),
        2 => criterion_2(cfg),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(cfg),
        6 => criterion_6(cfg),
        7 => criterion_7(cfg),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(cfg),
        _ => Err(LabError::Config(format!("criterion {id} is not evaluated directly"))),
    }
}

fn write(out: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::write(out.join(name), contents)?;
    Ok(())
}

fn pretty(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| LabError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Runs `sub`, writes its artifacts under `out`, and returns the report.
pub fn run(sub: Subcommand, cfg: &RunConfig, out: &Path) -> Result<SuiteReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let mut criteria = Vec::new();
    let mut constants = BTreeMap::new();
    let mut timings = BTreeMap::new();
    for &id in sub.criteria().iter().filter(|&&id| id != 12) {
        let t0 = Instant::now();
        let outcome = evaluate(id, cfg);
        let elapsed = t0.elapsed().as_secs_f64();
        timings.insert(format!("criterion_{id:02}"), elapsed);
        let (status, details) = match outcome {
            Ok(o) => {
                for (name, body) in &o.artifacts.csv {
                    write(out, name, body)?;
                }
                for (name, body) in &o.artifacts.json {
                    write(out, name, &pretty(body)?)?;
                }
                constants.extend(o.artifacts.constants.into_iter());
                (if o.passed { Status::Pass } else { Status::Fail }, o.details)
            }
            Err(e) => (Status::Fail, json!({ "error": e.to_string() })),
        };
        let within_budget = elapsed <= budget(id);
        let status = if within_budget { status } else { Status::Fail };
        criteria.push(CriterionEntry { id, name: criterion_name(id), status, budget_s: budget(id), within_budget, details });
    }
    let total = start.elapsed().as_secs_f64();
    timings.insert("total".into(), total);
    if sub == Subcommand::All {
        let failing: Vec<u8> = criteria.iter().filter(|c| c.status == Status::Fail).map(|c| c.id).collect();
        let within_budget = total <= budget(12);
        criteria.push(CriterionEntry {
            id: 12,
            name: criterion_name(12),
            status: if failing.is_empty() && within_budget { Status::Pass } else { Status::Fail },
            budget_s: budget(12),
            within_budget,
            details: json!({ "exit_status": if failing.is_empty() { 0 } else { 1 }, "failing": failing }),
        });
    }
    let report = SuiteReport { subcommand: sub, seed: cfg.seed, criteria, constants };
    write(out, "report.json", &pretty(&report)?)?;
    write(out, "timings.json", &pretty(&timings)?)?;
    if sub == Subcommand::All {
        write(out, "summary.txt", &summary(&report))?;
    }
    Ok(report)
}

/// One line per criterion.
pub fn summary(report: &SuiteReport) -> String {
    let mut s = String::new();
    for c in &report.criteria {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Measured => "MEASURED",
        };
        s.push_str(&format!("criterion {:>2} {:<32} {}\n", c.id, c.name, tag));
    }
    s
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("conecusp-out")
}
