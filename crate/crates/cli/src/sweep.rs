//! Execution of sweeps: one independent work item per parameter cell.

use rayon::prelude::*;

use fracbern::inequality::{
    check_derivative_identity, default_fd_steps, estimate_bernstein_constant_with, estimate_decay_constant_with,
    estimate_poincare_constant_with, maximal_domination_constant, sample_band_limited, ConstantEstimate, EnsembleSpec,
    Refinement,
};
use fracbern::kernel::{check_two_sided_bound, ProbeGrid};
use fracbern::periodic::{default_c3_grids, estimate_c3, heat_sup_counterexample};
use fracbern::positivity::{banded_kernel_l1, find_eps_star, CertificateGrids};
use fracbern::spectral::{FrequencyAnnulus, Projection};
use fracbern::FractionalParams;

use crate::config::{ConfigError, SweepConfig, SweepPlan, Task};
use crate::report::{Provenance, ReportTable, Row};

/// One point of the Cartesian product a sweep runs over.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub task: Task,
    pub alpha: f64,
    pub dim: usize,
    pub q: Option<f64>,
    pub n_scale: Option<f64>,
    pub t: Option<f64>,
}

impl SweepConfig {
    /// Cells in row-major order of `(alpha, dim, q, N, t)`.
    pub fn cells(&self) -> Vec<Cell> {
        let qs: Vec<Option<f64>> =
            if self.task.uses_q() { self.q_list.iter().map(|q| Some(q.0)).collect() } else { vec![None] };
        let ns: Vec<Option<f64>> =
            if self.task.uses_n() { self.n_list.iter().copied().map(Some).collect() } else { vec![None] };
        let ts: Vec<Option<f64>> =
            if self.task.cell_per_time() { self.times().into_iter().map(Some).collect() } else { vec![None] };
        let mut out = Vec::new();
        for &alpha in &self.alpha_list {
            for &dim in &self.dim_list {
                for &q in &qs {
                    for &n_scale in &ns {
                        for &t in &ts {
                            out.push(Cell { task: self.task, alpha, dim, q, n_scale, t });
                        }
                    }
                }
            }
        }
        out
    }

    fn provenance(&self) -> Provenance {
        match self.task {
            t if t.uses_ensemble() => Provenance::current(Some(self.ensemble.n), Some(self.ensemble.box_len)),
            Task::Counterexample => Provenance::current(Some(self.ensemble.n), Some(1.0)),
            _ => Provenance::current(None, None),
        }
    }

    fn ensemble_for(&self, cell: &Cell) -> Result<EnsembleSpec, String> {
        let e = &self.ensemble;
        let annulus = match (e.annulus, cell.n_scale) {
            (Some([a1, a2]), _) => FrequencyAnnulus::new(a1, a2).map_err(|err| err.to_string())?,
            (None, Some(n)) => FrequencyAnnulus::band(n),
            (None, None) => FrequencyAnnulus::new(1.0, 4.0).map_err(|err| err.to_string())?,
        };
        Ok(EnsembleSpec { annulus, n_samples: e.n_samples, seed: e.seed, dim: cell.dim, box_len: e.box_len, n: e.n })
    }

    fn refinement(&self) -> Refinement {
        Refinement { rounds: self.tolerances.refine_rounds, ..Refinement::default() }
    }
}

fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

fn base_row(cell: &Cell, quantity: &str, value: f64) -> Row {
    Row {
        task: cell.task.as_str().into(),
        alpha: cell.alpha,
        dim: cell.dim,
        q: cell.q,
        n_scale: cell.n_scale,
        t: cell.t,
        quantity: quantity.into(),
        value,
        error_bound: None,
        witness: String::new(),
        seed: None,
    }
}

fn estimate_row(cell: &Cell, est: &ConstantEstimate) -> Row {
    Row {
        witness: est.witness.label(),
        seed: Some(est.ensemble.seed),
        t: est.witness.t,
        ..base_row(cell, est.quantity.as_str(), est.value)
    }
}

fn run_cell(cfg: &SweepConfig, cell: &Cell) -> Result<Vec<Row>, String> {
    let err = |e: fracbern::Error| e.to_string();
    let params = FractionalParams::new(cell.alpha, cell.dim, 1.0).map_err(err)?;
    let tol = &cfg.tolerances;
    let times = cfg.times();
    match cell.task {
        Task::KernelBounds => {
            let mut grid = ProbeGrid::standard(&[cell.alpha]);
            grid.t = times;
            let rep = check_two_sided_bound(&[params], &grid).map_err(err)?;
            let at = |p: fracbern::kernel::ProbePoint| format!("t={:e};r={:e}", p.t, p.r);
            Ok(vec![
                Row {
                    error_bound: Some(rep.ratio_min - rep.certified_min),
                    witness: at(rep.argmin),
                    ..base_row(cell, "ratio_min", rep.ratio_min)
                },
                Row {
                    error_bound: Some(rep.certified_max - rep.ratio_max),
                    witness: at(rep.argmax),
                    ..base_row(cell, "ratio_max", rep.ratio_max)
                },
                Row { witness: at(rep.worst_point), ..base_row(cell, "c1_hat", rep.c1_hat) },
            ])
        }
        Task::EpsStar => {
            let grids = CertificateGrids { t: times, rel_tol: tol.certificate_rel, ..CertificateGrids::default() };
            let (eps, cert) = find_eps_star(&params, &grids).map_err(err)?;
            let witness = match cert.worst.first() {
                Some(o) => format!("t={:e};r={:e}", o.t, o.r),
                None => String::new(),
            };
            Ok(vec![
                Row {
                    witness: format!("certified={}", cert.is_positive()),
                    ..base_row(cell, "eps_star", eps)
                },
                Row { witness: witness.clone(), ..base_row(cell, "certified_margin", cert.min_margin) },
                Row { witness, ..base_row(cell, "relative_margin", cert.min_relative_margin) },
                Row { ..base_row(cell, "small_time_margin", cert.small_time_margin) },
            ])
        }
        Task::BandedL1 => {
            let t = cell.t.expect("banded cells carry a time");
            let est = banded_kernel_l1(cell.alpha, cell.dim, t, tol.l1).map_err(err)?;
            Ok(vec![Row { error_bound: Some(est.err), ..base_row(cell, "banded_l1", est.value) }])
        }
        Task::PeriodicC3 => {
            let (_, x_grid) = default_c3_grids();
            let rep = estimate_c3(&params, &times, &x_grid).map_err(err)?;
            let witness = format!("t={:e};x={}", rep.argmin_t, fmt_point(&rep.argmin_x));
            Ok(vec![
                Row { witness: witness.clone(), ..base_row(cell, "c3_hat", rep.c3_hat) },
                Row { witness, ..base_row(cell, "c3_certified", rep.c3_certified) },
            ])
        }
        Task::Decay => {
            let ens = cfg.ensemble_for(cell)?;
            let n = cell.n_scale.expect("decay cells carry N");
            let q = cell.q.expect("decay cells carry q");
            let est = estimate_decay_constant_with(&params, q, n, &ens, &times, cfg.refinement()).map_err(err)?;
            Ok(vec![estimate_row(cell, &est)])
        }
        Task::Bernstein => {
            let ens = cfg.ensemble_for(cell)?;
            let n = cell.n_scale.expect("bernstein cells carry N");
            let q = cell.q.expect("bernstein cells carry q");
            let est = estimate_bernstein_constant_with(&params, q, n, &ens, Projection::Band, cfg.refinement())
                .map_err(err)?;
            Ok(vec![estimate_row(cell, &est)])
        }
        Task::Poincare => {
            let ens = cfg.ensemble_for(cell)?;
            let q = cell.q.expect("poincare cells carry q");
            let est = estimate_poincare_constant_with(&params, q, &ens, cfg.refinement()).map_err(err)?;
            Ok(vec![estimate_row(cell, &est)])
        }
        Task::Maximal => {
            let ens = cfg.ensemble_for(cell)?;
            let est = maximal_domination_constant(&params, &ens, &times).map_err(err)?;
            Ok(vec![estimate_row(cell, &est)])
        }
        Task::Counterexample => {
            if cell.alpha != 2.0 || cell.dim != 1 {
                return Err("the sup-norm counterexample is defined for alpha=2, d=1".into());
            }
            let rep = heat_sup_counterexample(tol.delta0, &times, cfg.ensemble.n).map_err(err)?;
            let mut rows: Vec<Row> = rep
                .rows
                .iter()
                .map(|&(t, ratio)| Row {
                    t: Some(t),
                    witness: format!("delta0={:e}", rep.delta0),
                    ..base_row(cell, "sup_ratio", ratio)
                })
                .collect();
            rows.push(Row {
                witness: format!("delta0={:e};intercept={:e}", rep.delta0, rep.fit_intercept),
                ..base_row(cell, "fitted_c0", rep.fitted_c0)
            });
            Ok(rows)
        }
        Task::DerivativeCheck => {
            let ens = cfg.ensemble_for(cell)?;
            let n = cell.n_scale.expect("derivative cells carry N");
            let q = cell.q.expect("derivative cells carry q");
            let steps = default_fd_steps(cell.alpha, n);
            let mut worst = (f64::NEG_INFINITY, 0usize);
            for i in 0..ens.n_samples {
                let f = sample_band_limited(&ens, i).map_err(err)?;
                let chk = check_derivative_identity(&f, n, &params, q, &steps).map_err(err)?;
                let rel = chk.residual / (q * chk.pairing.abs());
                if rel > worst.0 {
                    worst = (rel, i);
                }
            }
            Ok(vec![Row {
                witness: format!("member={}", worst.1),
                seed: Some(ens.seed),
                ..base_row(cell, "relative_residual", worst.0)
            }])
        }
    }
}

fn error_row(cell: &Cell, message: String, seed: Option<u64>) -> Row {
    Row { error_bound: None, witness: message, seed, ..base_row(cell, "error", f64::NAN) }
}

/// Run every cell of one sweep. Failing cells become `error` rows.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ReportTable, ConfigError> {
    cfg.validate()?;
    let cells = cfg.cells();
    let results: Vec<Vec<Row>> = cells
        .par_iter()
        .map(|cell| {
            run_cell(cfg, cell).unwrap_or_else(|msg| {
                log::warn!("cell {cell:?} failed: {msg}");
                let seed = cfg.task.uses_ensemble().then_some(cfg.ensemble.seed);
                vec![error_row(cell, msg, seed)]
            })
        })
        .collect();
    let mut table = ReportTable::new(cfg.provenance());
    table.rows = results.into_iter().flatten().collect();
    Ok(table)
}

/// Run every sweep of a plan and concatenate the tables. The provenance grid
/// is reported only when all grid-based sweeps share it.
pub fn run_plan(plan: &SweepPlan) -> Result<ReportTable, ConfigError> {
    for cfg in plan.sweeps() {
        cfg.validate()?;
    }
    let mut merged: Option<ReportTable> = None;
    for cfg in plan.sweeps() {
        let table = run_sweep(cfg)?;
        merged = Some(match merged {
            None => table,
            Some(mut acc) => {
                let (a, b) = (&acc.provenance, &table.provenance);
                if a.grid_n.is_none() {
                    acc.provenance.grid_n = b.grid_n;
                    acc.provenance.box_len = b.box_len;
                } else if b.grid_n.is_some() && (a.grid_n, a.box_len) != (b.grid_n, b.box_len) {
                    acc.provenance.grid_n = None;
                    acc.provenance.box_len = None;
                }
                acc.rows.extend(table.rows);
                acc
            }
        });
    }
    Ok(merged.expect("a plan has at least one sweep"))
}

/// [`run_plan`] on a dedicated pool of `workers` threads.
pub fn run_plan_with_workers(plan: &SweepPlan, workers: usize) -> Result<ReportTable, ConfigError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    pool.install(|| run_plan(plan))
}
