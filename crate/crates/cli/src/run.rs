//! Experiment runners. Each returns its tables; `main` decides where they go.

use attnflow::asymptotics::compute_constants;
use attnflow::catalog::extremizer_catalog;
use attnflow::cluster::{cluster_sweep, SweepConfig};
use attnflow::density::{compare, grid_angles};
use attnflow::experiments::{clustered_flow, four_peak_sweep, random_start_flow};
use attnflow::interaction::{energy, stationarity_residual};
use attnflow::stationary::{
    eigen_mixture, four_peak_angle, four_peak_ensemble, indefinite_crossover, indefinite_energy_comparison,
    uniform_stationarity_residual,
};
use attnflow::{derive_seed, Ensemble, Sign};
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::CliError;

/// Residual below which `check-stationary` reports a candidate as stationary.
pub const STATIONARY_TOL: f64 = 1e-8;

pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// The first artifact is the one printed to stdout when no output directory is given.
pub struct Report {
    pub artifacts: Vec<Artifact>,
    pub notes: Vec<String>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header.iter().map(AsRef::as_ref))
            .expect("in-memory write");
        Table { w }
    }

    fn row(&mut self, fields: Vec<String>) {
        self.w.write_record(&fields).expect("in-memory write");
    }

    fn finish(self, name: &str) -> Artifact {
        let bytes = self.w.into_inner().expect("in-memory flush");
        Artifact {
            name: name.to_string(),
            contents: String::from_utf8(bytes).expect("ascii csv"),
        }
    }
}

pub fn run(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Simulate => simulate(cfg, seed),
        Experiment::SweepClusters => sweep_clusters(cfg, seed),
        Experiment::FourPeak => four_peak(cfg),
        Experiment::Density => density(cfg),
        Experiment::MaximizeNd => maximize_nd(cfg, seed),
        Experiment::IndefiniteEnergy => indefinite(cfg),
        Experiment::CheckStationary => check_stationary(cfg),
        Experiment::Constants => constants(cfg),
    }
}

fn simulate(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let d = cfg.interaction()?;
    let traj = random_start_flow(&d, cfg.n_particles, &cfg.flow(seed))?;
    let mut t = Table::new(&["step", "energy", "dissipation", "max_residual"]);
    for ((e, g), r) in traj.energies.iter().zip(&traj.dissipations).zip(&traj.max_residuals) {
        t.row(vec![e.0.to_string(), num(e.1), num(g.1), num(r.1)]);
    }
    Ok(Report {
        artifacts: vec![t.finish("simulate.csv")],
        notes: vec![format!(
            "final energy {:.6e}, max residual {:.3e}",
            traj.final_energy(),
            traj.final_residual()
        )],
    })
}

fn sweep_clusters(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let sweep = SweepConfig {
        flow: cfg.flow(seed),
        trials: cfg.trials,
        n_particles: cfg.n_particles,
        radius_tol: cfg.radius_tol,
    };
    let res = cluster_sweep(&cfg.lambda2, &sweep)?;
    let mut summary = Table::new(&["lambda2", "count_single", "count_two"]);
    for r in &res.rows {
        summary.row(vec![
            num(r.lambda2),
            r.count_single.to_string(),
            r.count_two.to_string(),
        ]);
    }
    let mut header = vec!["lambda2".to_string(), "trial".into(), "k".into()];
    for c in 0..2 {
        header.extend((0..2).map(|i| format!("center{c}_{i}")));
    }
    header.extend(["energy_final".into(), "residual_final".into()]);
    let mut trials = Table::new(&header);
    for tr in &res.trials {
        let mut row = vec![num(tr.lambda2), tr.trial.to_string(), tr.clusters.k.to_string()];
        row.extend(center_fields(&tr.clusters.centers, 2, 2));
        row.extend([num(tr.energy_final), num(tr.residual_final)]);
        trials.row(row);
    }
    let saturated = res.trials.iter().filter(|t| t.clusters.saturated).count();
    let mut notes: Vec<String> = res
        .rows
        .iter()
        .map(|r| {
            format!(
                "lambda2 {:.4}: {} single, {} two",
                r.lambda2, r.count_single, r.count_two
            )
        })
        .collect();
    if saturated > 0 {
        notes.push(format!(
            "{saturated} trials did not fit within radius {}",
            cfg.radius_tol
        ));
    }
    Ok(Report {
        artifacts: vec![
            trials.finish("sweep-clusters.csv"),
            summary.finish("sweep-clusters-summary.csv"),
        ],
        notes,
    })
}

/// Center coordinates padded with empty fields up to `max_k` centers.
fn center_fields(centers: &[attnflow::UnitVector], max_k: usize, dim: usize) -> Vec<String> {
    (0..max_k)
        .flat_map(|c| (0..dim).map(move |i| centers.get(c).map_or(String::new(), |z| num(z.as_slice()[i]))))
        .collect()
}

fn four_peak(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let runs = four_peak_sweep(&cfg.lambda2, cfg.tau, cfg.normalization, cfg.steps)?;
    let mut t = Table::new(&["lambda2", "phi_mean", "tanh_ratio", "energy_final"]);
    for r in &runs {
        t.row(vec![
            num(r.lambda2),
            num(r.phi_mean),
            num(r.tanh_ratio),
            num(r.energy_final),
        ]);
    }
    Ok(Report {
        artifacts: vec![t.finish("four-peak.csv")],
        notes: Vec::new(),
    })
}

fn density(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    if cfg.dim != 2 {
        return Err(CliError::Config("density needs a 2x2 diagonal matrix".into()));
    }
    let m = cfg.diagonal()?;
    let c = compare(cfg.eps, [m[0], m[1]], cfg.grid, cfg.tau, cfg.iters)?;
    let mut t = Table::new(&["theta", "mass", "asymptotic_mass", "conjectured_mass"]);
    for (i, theta) in grid_angles(cfg.grid).iter().enumerate() {
        t.row(vec![
            num(*theta),
            num(c.solution.mass()[i]),
            num(c.first_order[i]),
            num(c.conjectured.mass()[i]),
        ]);
    }
    Ok(Report {
        artifacts: vec![t.finish("density.csv")],
        notes: vec![format!(
            "upsilon {:.6}, first-order l2 error {:.3e}, conjectured l2 error {:.3e}",
            c.upsilon, c.first_order_error, c.conjectured_error
        )],
    })
}

fn maximize_nd(cfg: &ExperimentConfig, seed: u64) -> Result<Report, CliError> {
    let d = cfg.interaction()?;
    let catalog = extremizer_catalog(&d);
    let predicted = match cfg.sign {
        Sign::Maximize => catalog.maximizer.energy(),
        Sign::Minimize => catalog.minimizer.energy(),
    };
    let mut header = vec!["trial".to_string(), "k".into(), "max_radius".into()];
    for c in 0..cfg.max_k {
        header.extend((0..cfg.dim).map(|i| format!("center{c}_{i}")));
    }
    header.extend([
        "energy_final".into(),
        "residual_final".into(),
        "predicted_energy".into(),
    ]);
    let mut t = Table::new(&header);
    let mut worst_gap: f64 = 0.0;
    for trial in 0..cfg.trials {
        let flow = cfg.flow(derive_seed(seed, &[trial as u64]));
        let r = clustered_flow(&d, cfg.n_particles, &flow, cfg.max_k, cfg.radius_tol)?;
        let e = r.trajectory.final_energy();
        let mut row = vec![trial.to_string(), r.clusters.k.to_string(), num(r.clusters.max_radius)];
        row.extend(center_fields(&r.clusters.centers, cfg.max_k, cfg.dim));
        row.extend([
            num(e),
            num(r.trajectory.final_residual()),
            predicted.map_or(String::new(), num),
        ]);
        t.row(row);
        if let Some(p) = predicted {
            worst_gap = worst_gap.max((e - p).abs() / p.abs().max(1.0));
        }
    }
    let note = match predicted {
        Some(_) => format!("largest relative gap to the closed-form energy {worst_gap:.3e}"),
        None => "no closed-form extremizer for this spectrum".to_string(),
    };
    Ok(Report {
        artifacts: vec![t.finish("maximize-nd.csv")],
        notes: vec![note],
    })
}

fn indefinite(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut t = Table::new(&["lambda2", "e_single", "e_two_min", "e_two_max"]);
    for &l in &cfg.lambda2 {
        let e = indefinite_energy_comparison(l)?;
        t.row(vec![num(l), num(e.single), num(e.two_min), num(e.two_max)]);
    }
    let (lo, hi) = (cfg.lambda2[0], cfg.lambda2[cfg.lambda2.len() - 1]);
    let note = match indefinite_crossover(lo, hi) {
        Ok(x) => format!("single cluster and pair along e1 tie at lambda2 = {x:.12}"),
        Err(_) => format!("no crossover in [{lo}, {hi}]"),
    };
    Ok(Report {
        artifacts: vec![t.finish("indefinite-energy.csv")],
        notes: vec![note],
    })
}

fn check_stationary(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let d = cfg.interaction()?;
    let n = d.dim();
    let mut candidates: Vec<(String, Ensemble)> = Vec::new();
    for i in 0..n {
        let z = d.eigenvector(i);
        candidates.push((format!("dirac_z{i}"), Ensemble::dirac(z.clone())));
        candidates.push((format!("pair_z{i}"), Ensemble::antipodal_pair(&z, 0.5)?));
    }
    let all: Vec<usize> = (0..n).collect();
    candidates.push(("mixture_all".into(), eigen_mixture(&d, &all, &vec![1.0 / n as f64; n])?));
    if n == 2 {
        if let Ok(diag) = cfg.diagonal() {
            if let Ok(sol) = four_peak_angle(diag[0], diag[1]) {
                candidates.push(("four_peak".into(), four_peak_ensemble(sol.phi)));
            }
        }
    }
    let mut t = Table::new(&["candidate", "residual", "stationary", "energy"]);
    let mut found = 0;
    for (name, mu) in &candidates {
        let r = stationarity_residual(mu, &d)?.max_residual;
        found += usize::from(r < STATIONARY_TOL);
        t.row(vec![
            name.clone(),
            num(r),
            (r < STATIONARY_TOL).to_string(),
            num(energy(mu, &d)?),
        ]);
    }
    if n <= 3 {
        let r = uniform_stationarity_residual(&d, cfg.resolution)?;
        found += usize::from(r < STATIONARY_TOL);
        t.row(vec![
            "uniform".into(),
            num(r),
            (r < STATIONARY_TOL).to_string(),
            String::new(),
        ]);
    }
    Ok(Report {
        artifacts: vec![t.finish("check-stationary.csv")],
        notes: vec![format!("{found} stationary candidates (residual < {STATIONARY_TOL:e})")],
    })
}

fn constants(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let c = compute_constants(cfg.dim, cfg.resolution)?;
    if !(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0) {
        return Err(CliError::Numerical(format!("constants are not positive: {c:?}")));
    }
    let body = json!({ "n": c.n, "c1": c.c1, "c2": c.c2, "c3": c.c3, "alpha": c.alpha });
    Ok(Report {
        artifacts: vec![Artifact {
            name: "constants.json".into(),
            contents: format!("{}\n", serde_json::to_string_pretty(&body).expect("plain numbers")),
        }],
        notes: Vec::new(),
    })
}
