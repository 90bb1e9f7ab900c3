//! Batch front end: resolves a [`RunConfig`], runs one experiment, and writes
//! data tables, `manifest.json` and, on failure, `error.json`.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::constants::{angular_to_ghz, cubic_metres_to_mm3, field_to_tesla};
use crate::dynamics::{
    build_kernel, evolve_pseudomode, evolve_volterra, EmitterConfig, MemoryKernel, TimeGrid, TimeSeries,
};
use crate::error::{Error, Result};
use crate::modes::{analytic_mode_volume, coupling_strength, quantize_mode, CavityConfig};
use crate::network::{
    coupling_vs_separation_sweep, dipole_dipole_coupling, effective_coupling, transfer_dynamics, TwoEmitterConfig,
};
use crate::spectral::{field_sweep_map, linspace, spectral_scan, FrequencyAxis};

pub use config::{parse_config, AxisKind, Experiment, RunConfig, Solver};
pub use output::{ErrorReport, Header, Manifest, OutputFormat, Table};

pub const TOOL: &str = "nanomag";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Worker threads for sweeps; `None` uses every available core. Never
    /// changes the output.
    pub threads: Option<usize>,
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    /// Headline numbers for the terminal.
    pub summary: Vec<String>,
}

/// A failed run: the stage that failed and why.
#[derive(Debug)]
pub struct RunFailure {
    pub stage: String,
    pub error: Error,
}

impl RunFailure {
    fn at(stage: &str) -> impl FnOnce(Error) -> RunFailure + '_ {
        move |error| RunFailure {
            stage: stage.to_string(),
            error,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.error)
    }
}

/// Hash of the resolved configuration, stamped into every data file.
pub fn config_hash(cfg: &RunConfig) -> String {
    output::sha256_hex(format!("{}version = {VERSION}\n", cfg.canonical_text()).as_bytes())
}

/// Writes `error.json` for a failure at `stage` into `dir`.
pub fn report_error(dir: &Path, stage: &str, err: &Error) -> Result<()> {
    ErrorReport::new(stage, err).write(dir)
}

/// Runs `cfg`, writing its outputs to `opts.out_dir`. On failure `error.json`
/// is written there instead (best effort) and the failing stage is returned.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> std::result::Result<RunOutcome, RunFailure> {
    let result = run_inner(cfg, opts);
    if let Err(f) = &result {
        if let Err(e) = report_error(&opts.out_dir, &f.stage, &f.error) {
            log::error!("could not write error report: {e}");
        }
    }
    result
}

struct Produced {
    tables: Vec<Table>,
    derived: BTreeMap<String, f64>,
    summary: Vec<String>,
}

fn run_inner(cfg: &RunConfig, opts: &RunOptions) -> std::result::Result<RunOutcome, RunFailure> {
    let start = Instant::now();
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| RunFailure::at("output")(e.into()))?;
    let stage = cfg.experiment.name();

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = opts.threads {
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| RunFailure::at("setup")(Error::Numerical(format!("cannot start worker threads: {e}"))))?
    };
    let threads = pool.current_num_threads();
    let produced = pool
        .install(|| match cfg.experiment {
            Experiment::Modes => run_modes(cfg),
            Experiment::Spectrum => run_spectrum(cfg),
            Experiment::Fieldmap => run_fieldmap(cfg),
            Experiment::Decay => run_decay(cfg),
            Experiment::Transfer => run_transfer(cfg),
            Experiment::CouplingSweep => run_coupling_sweep(cfg),
        })
        .map_err(RunFailure::at(stage))?;

    let hash = config_hash(cfg);
    let header = Header {
        tool: TOOL,
        version: VERSION,
        experiment: stage.to_string(),
        config_sha256: hash.clone(),
    };
    let mut outputs = Vec::new();
    for t in &produced.tables {
        outputs.push(t.write(&opts.out_dir, opts.format, &header).map_err(RunFailure::at("output"))?);
    }
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        experiment: stage.to_string(),
        config_sha256: hash,
        config: cfg.resolved.clone(),
        config_text: cfg.canonical_text(),
        derived: produced.derived,
        outputs,
        format: opts.format,
        threads,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(&opts.out_dir).map_err(RunFailure::at("output"))?;
    Ok(RunOutcome {
        manifest,
        summary: produced.summary,
    })
}

fn emitter_for(cfg: &RunConfig, cavity: &CavityConfig, distance: f64) -> Result<EmitterConfig> {
    Ok(EmitterConfig::at_distance(distance, cfg.emitter_direction, cavity.kittel_frequency())?
        .with_dipole_scale(cfg.dipole_scale))
}

/// Length in nm, rounded to 1e-6 nm for display.
fn nm(length: f64) -> f64 {
    (length * 1e15).round() / 1e6
}

fn mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

fn headline(cavity: &CavityConfig, emitter: &EmitterConfig) -> Result<(Vec<String>, BTreeMap<String, f64>)> {
    let kittel = quantize_mode(1, cavity)?;
    let g = coupling_strength(&kittel, emitter)?;
    let mut derived = BTreeMap::new();
    derived.insert("omega_K_over_2pi_GHz".into(), angular_to_ghz(kittel.omega));
    derived.insert("Veff_mm3".into(), cubic_metres_to_mm3(kittel.veff));
    derived.insert("Veff_over_V".into(), kittel.veff / cavity.volume());
    derived.insert("g_over_2pi_MHz".into(), mhz(g));
    derived.insert("linewidth_rad_per_s".into(), cavity.linewidth());
    let summary = vec![
        format!("omega_K/2pi = {:.6} GHz", angular_to_ghz(kittel.omega)),
        format!(
            "V_eff = {:.6e} mm^3 ({:.4} x physical volume)",
            cubic_metres_to_mm3(kittel.veff),
            kittel.veff / cavity.volume()
        ),
        format!("g/2pi = {:.6} MHz", mhz(g)),
    ];
    Ok((summary, derived))
}

fn run_modes(cfg: &RunConfig) -> Result<Produced> {
    let cavity = cfg.cavity;
    let emitter = emitter_for(cfg, &cavity, cfg.emitter_distance)?;
    let mut table = Table::new(
        "modes",
        &[
            "n",
            "m",
            "omega_over_2pi_GHz",
            "linewidth_over_2pi_MHz",
            "Veff_mm3",
            "Veff_closed_form_mm3",
            "Hzp_A_per_m",
            "g_over_2pi_MHz",
        ],
    )
    .note("R_nm", nm(cavity.radius))
    .note("a_nm", nm(cfg.emitter_distance));
    for mode in cavity.modes()? {
        table.push(vec![
            mode.n as f64,
            mode.m as f64,
            angular_to_ghz(mode.omega),
            mhz(mode.linewidth),
            cubic_metres_to_mm3(mode.veff),
            cubic_metres_to_mm3(analytic_mode_volume(mode.n, &cavity)?),
            mode.hzp,
            mhz(coupling_strength(&mode, &emitter)?),
        ]);
    }
    let (summary, derived) = headline(&cavity, &emitter)?;
    Ok(Produced {
        tables: vec![table],
        derived,
        summary,
    })
}

fn run_spectrum(cfg: &RunConfig) -> Result<Produced> {
    let cavity = cfg.cavity;
    let emitter = emitter_for(cfg, &cavity, cfg.emitter_distance)?;
    let (lo, hi, n) = cfg.frequency_range;
    let grid = spectral_scan(&linspace(lo, hi, n), &emitter, &cavity)?;
    let mut table = Table::new("spectrum", &["omega_over_2pi_GHz", "J_rad_per_s"])
        .note("R_nm", nm(cavity.radius))
        .note("a_nm", nm(cfg.emitter_distance))
        .note("n_max", cavity.n_max);
    for (w, j) in grid.omegas.iter().zip(&grid.values) {
        table.push(vec![angular_to_ghz(*w), *j]);
    }
    let mut lines = Table::new(
        "spectrum_lines",
        &["n", "omega_over_2pi_GHz", "g_over_2pi_MHz", "peak_J_rad_per_s"],
    );
    for l in &grid.lines {
        lines.push(vec![l.n as f64, angular_to_ghz(l.omega), mhz(l.coupling), l.peak()]);
    }
    let (summary, mut derived) = headline(&cavity, &emitter)?;
    let model_at_k: f64 = grid.lines.iter().map(|l| l.evaluate(cavity.kittel_frequency())).sum();
    derived.insert("J_at_omega_K_rad_per_s".into(), model_at_k);
    Ok(Produced {
        tables: vec![table, lines],
        derived,
        summary,
    })
}

fn run_fieldmap(cfg: &RunConfig) -> Result<Produced> {
    let cavity = cfg.cavity;
    let emitter = emitter_for(cfg, &cavity, cfg.emitter_distance)?;
    let (hlo, hhi, hn) = cfg.field_range;
    let axis = match cfg.fieldmap_axis {
        AxisKind::Normalized => {
            let (lo, hi, n) = cfg.normalized_range;
            FrequencyAxis::Normalized(linspace(lo, hi, n))
        }
        AxisKind::Absolute => {
            let (lo, hi, n) = cfg.frequency_range;
            FrequencyAxis::Absolute(linspace(lo, hi, n))
        }
    };
    let map = field_sweep_map(&linspace(hlo, hhi, hn), axis, &emitter, &cavity)?;
    let mut table = Table::new("fieldmap", &["H0_T", "omega_GHz", "omega_over_omega_K", "J"])
        .note("R_nm", nm(cavity.radius))
        .note("a_nm", nm(cfg.emitter_distance))
        .note("n_max", cavity.n_max)
        .note("J_unit", "rad/s; peak heights span decades, plot on a nonlinear colour scale");
    for (i, &h) in map.h0.iter().enumerate() {
        for (j, &v) in map.values[i].iter().enumerate() {
            let w = map.omega(i, j);
            table.push(vec![field_to_tesla(h), angular_to_ghz(w), w / map.kittel[i], v]);
        }
    }
    let (summary, derived) = headline(&cavity, &emitter)?;
    Ok(Produced {
        tables: vec![table],
        derived,
        summary,
    })
}

/// Output grid for the decay run of `kernel`.
fn decay_grid(cfg: &RunConfig, kernel: &MemoryKernel, resolve_kernel: bool) -> Result<TimeGrid> {
    match cfg.dt {
        Some(dt) => {
            let grid = TimeGrid::new(cfg.t_end, dt)?;
            let stride = (grid.steps() / cfg.samples).max(1);
            Ok(grid.with_stride(stride))
        }
        None if resolve_kernel => TimeGrid::for_kernel(kernel, cfg.t_end, cfg.samples),
        None => TimeGrid::with_samples(cfg.t_end, cfg.samples, f64::INFINITY),
    }
}

struct DecayRun {
    radius: f64,
    omega_k: f64,
    g: f64,
    series: TimeSeries,
    volterra: Option<TimeSeries>,
}

fn run_decay(cfg: &RunConfig) -> Result<Produced> {
    let a_over_r = cfg.emitter_distance / cfg.cavity.radius;
    let runs = cfg
        .radii
        .par_iter()
        .map(|&radius| {
            let cavity = cfg.cavity.with_radius(radius)?;
            let emitter = emitter_for(cfg, &cavity, a_over_r * radius)?;
            let kernel = build_kernel(&emitter, &cavity)?;
            let needs_volterra = matches!(cfg.solver, Solver::Volterra | Solver::Both);
            let grid = decay_grid(cfg, &kernel, needs_volterra)?;
            let volterra = if needs_volterra {
                Some(evolve_volterra(&kernel, &grid)?)
            } else {
                None
            };
            let series = match cfg.solver {
                Solver::Volterra => volterra.clone().expect("volterra run"),
                _ => evolve_pseudomode(&kernel, &grid)?,
            };
            Ok(DecayRun {
                radius,
                omega_k: cavity.kittel_frequency(),
                g: kernel.terms[0].coupling,
                series,
                volterra: if cfg.solver == Solver::Both { volterra } else { None },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut tables = Vec::new();
    let mut summary_cols = vec![
        "R_nm",
        "omega_K_over_2pi_GHz",
        "g_over_2pi_MHz",
        "t_first_min_us",
        "P_first_min",
        "rabi_over_2pi_MHz",
        "t_revival_us",
        "P_revival",
    ];
    if cfg.solver == Solver::Both {
        summary_cols.push("max_solver_deviation");
    }
    let mut summary_table = Table::new("decay_summary", &summary_cols)
        .note("a_over_R", a_over_r)
        .note("solver", format!("{:?}", cfg.solver).to_lowercase());
    let mut derived = BTreeMap::new();
    for run in &runs {
        let label = format!("{}", nm(run.radius));
        let mut cols = vec!["t_us", "population"];
        if run.volterra.is_some() {
            cols = vec!["t_us", "population_pseudomode", "population_volterra"];
        }
        let mut t = Table::new(format!("decay_R{label}nm"), &cols)
            .note("R_nm", nm(run.radius))
            .note("a_nm", nm(a_over_r * run.radius))
            .note("omega0_over_2pi_GHz", angular_to_ghz(run.omega_k));
        for k in 0..run.series.len() {
            let mut row = vec![run.series.times[k] * 1e6, run.series.populations[k]];
            if let Some(v) = &run.volterra {
                row.push(v.populations[k]);
            }
            t.push(row);
        }
        tables.push(t);

        let (t_min, p_min) = run.series.first_minimum().unwrap_or((f64::NAN, f64::NAN));
        let (t_rev, p_rev) = run.series.first_revival().unwrap_or((f64::NAN, f64::NAN));
        let rabi = run.series.rabi_frequency().unwrap_or(f64::NAN);
        let mut row = vec![
            nm(run.radius),
            angular_to_ghz(run.omega_k),
            mhz(run.g),
            t_min * 1e6,
            p_min,
            mhz(rabi),
            t_rev * 1e6,
            p_rev,
        ];
        if let Some(v) = &run.volterra {
            let dev = run.series.max_abs_difference(v);
            row.push(dev);
            derived.insert(format!("max_solver_deviation_R{label}nm"), dev);
        }
        summary_table.push(row);
        derived.insert(format!("g_over_2pi_MHz_R{label}nm"), mhz(run.g));
        derived.insert(format!("rabi_over_2pi_MHz_R{label}nm"), mhz(rabi));
    }
    tables.push(summary_table);

    let cavity = cfg.cavity;
    let emitter = emitter_for(cfg, &cavity, cfg.emitter_distance)?;
    let (mut summary, base) = headline(&cavity, &emitter)?;
    derived.extend(base);
    for run in &runs {
        let rabi = run.series.rabi_frequency();
        summary.push(format!(
            "R = {:.1} nm: g/2pi = {:.4} MHz, Rabi/2pi = {}",
            run.radius * 1e9,
            mhz(run.g),
            rabi.map_or("n/a (no minimum within t_end)".to_string(), |r| format!("{:.4} MHz", mhz(r)))
        ));
    }
    Ok(Produced {
        tables,
        derived,
        summary,
    })
}

fn run_transfer(cfg: &RunConfig) -> Result<Produced> {
    let cavity = cfg.cavity;
    let two = TwoEmitterConfig::antipodal(
        cavity,
        cfg.emitter_distance,
        cfg.emitter_direction,
        cfg.detuning,
        cfg.dipole_scale,
    )?;
    let model = two.model()?;
    let grid = match cfg.dt {
        Some(dt) => {
            let grid = TimeGrid::new(cfg.t_end, dt)?;
            let stride = (grid.steps() / cfg.samples).max(1);
            grid.with_stride(stride)
        }
        None => TimeGrid::with_samples(cfg.t_end, cfg.samples, model.step_limit().0)?,
    };
    let result = transfer_dynamics(&two, &grid)?;
    let g = result.couplings[0];
    let g_eff = effective_coupling(g, two.detuning)?;
    let g_dip = dipole_dipole_coupling(two.separation())?;

    let mut table = Table::new("transfer_dynamics", &["t_us", "P1", "P2", "Pb"])
        .note("R_nm", nm(cavity.radius))
        .note("a_nm", nm(cfg.emitter_distance))
        .note("detuning_over_2pi_MHz", mhz(two.detuning))
        .note("linewidth_rad_per_s", cavity.linewidth());
    for k in 0..result.times.len() {
        table.push(vec![result.times[k] * 1e6, result.p1[k], result.p2[k], result.pb[k]]);
    }

    let mut derived = BTreeMap::new();
    derived.insert("omega_K_over_2pi_GHz".into(), angular_to_ghz(cavity.kittel_frequency()));
    derived.insert("g_over_2pi_MHz".into(), mhz(g));
    derived.insert("detuning_over_2pi_MHz".into(), mhz(two.detuning));
    derived.insert("g_eff_over_2pi_kHz".into(), mhz(g_eff) * 1e3);
    derived.insert("g_dip_over_2pi_Hz".into(), mhz(g_dip) * 1e6);
    derived.insert("separation_nm".into(), two.separation() * 1e9);
    derived.insert(
        "higher_modes_detuned".into(),
        if two.higher_modes_detuned() { 1.0 } else { 0.0 },
    );
    if let Some(w) = result.swap_frequency {
        derived.insert("swap_frequency_over_2pi_kHz".into(), mhz(w) * 1e3);
    }
    if let Some(f) = result.fidelity {
        derived.insert("first_transfer_fidelity".into(), f);
    }
    let summary = vec![
        format!("omega_K/2pi = {:.6} GHz", angular_to_ghz(cavity.kittel_frequency())),
        format!("g/2pi = {:.6} MHz, Delta/2pi = {:.6} MHz", mhz(g), mhz(two.detuning)),
        format!("g_eff/2pi = g^2/Delta/2pi = {:.4} kHz", mhz(g_eff) * 1e3),
        format!(
            "swap frequency/2pi = {}",
            result
                .swap_frequency
                .map_or("n/a (no crossing within t_end)".into(), |w| format!("{:.4} kHz", mhz(w) * 1e3))
        ),
        format!(
            "g_dip/2pi at 2a = {:.2} nm: {:.4} Hz",
            two.separation() * 1e9,
            mhz(g_dip) * 1e6
        ),
    ];
    Ok(Produced {
        tables: vec![table],
        derived,
        summary,
    })
}

fn run_coupling_sweep(cfg: &RunConfig) -> Result<Produced> {
    let (lo, hi, n) = cfg.sweep_radius_range;
    let radii = linspace(lo, hi, n);
    let delta_over_g = match cfg.detuning {
        crate::network::Detuning::OverCoupling(k) => k,
        crate::network::Detuning::Absolute(_) => {
            return Err(Error::config(
                "detuning_MHz",
                None,
                "the coupling sweep fixes Δ relative to g; use delta_over_g",
            ))
        }
    };
    let rows = coupling_vs_separation_sweep(
        &cfg.cavity,
        &radii,
        cfg.gap,
        delta_over_g,
        cfg.emitter_direction,
        cfg.dipole_scale,
    )?;
    let mut table = Table::new(
        "coupling_sweep",
        &["separation_nm", "g_eff_Hz", "g_dip_Hz", "R_nm", "g_over_2pi_MHz"],
    )
    .note("G_nm", nm(cfg.gap))
    .note("delta_over_g", delta_over_g)
    .note("frequencies", "g_eff_Hz and g_dip_Hz are g/2pi in Hz");
    for r in &rows {
        table.push(vec![
            r.separation * 1e9,
            mhz(r.g_eff) * 1e6,
            mhz(r.g_dip) * 1e6,
            r.radius * 1e9,
            mhz(r.coupling),
        ]);
    }
    let point = coupling_vs_separation_sweep(
        &cfg.cavity,
        &[cfg.cavity.radius],
        cfg.gap,
        delta_over_g,
        cfg.emitter_direction,
        cfg.dipole_scale,
    )?[0];
    let mut derived = BTreeMap::new();
    derived.insert("separation_nm".into(), point.separation * 1e9);
    derived.insert("g_eff_over_2pi_kHz".into(), mhz(point.g_eff) * 1e3);
    derived.insert("g_dip_over_2pi_Hz".into(), mhz(point.g_dip) * 1e6);
    derived.insert("g_eff_over_g_dip".into(), point.g_eff / point.g_dip);
    let summary = vec![format!(
        "R = {:.1} nm, 2a = {:.1} nm: g_eff/2pi = {:.3} kHz, g_dip/2pi = {:.3} Hz, ratio = {:.0}",
        point.radius * 1e9,
        point.separation * 1e9,
        mhz(point.g_eff) * 1e3,
        mhz(point.g_dip) * 1e6,
        point.g_eff / point.g_dip
    )];
    Ok(Produced {
        tables: vec![table],
        derived,
        summary,
    })
}
