//! Mode pipelines and artifact writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use squeeze::dtwa::{evolve, sample_initial, IntegratorConfig};
use squeeze::fit::{
    fit_nu, locate_jc, optimal_squeezing_from, thermalization_time_from, SizePoint, SqueezingOptimum,
};
use squeeze::hydro::zero_mode_variance;
use squeeze::math::derive_seed;
use squeeze::model::{css_energy, Convention, LatticeSpec};
use squeeze::oat::{optimize, scaling_exponents, xi2_approx, xi2_exact, SemiclassicalParams, Xi2Form};
use squeeze::observables::ObservableSeries;
use squeeze::quantum::{
    default_chi_pairs, extract_chi, ground_state_energy, var_q_conditional, EchoConfig, QuantumHamiltonian,
    TimeGrid,
};
use squeeze::spinwave::{critical_temperature, solve_jc};

use crate::config::{DtwaSection, Format, Mode, QuantumTask, RunConfig, SweepPoint, Xi2FormName, OUT_ENV};
use crate::output::Table;

pub const TOOLKIT: &str = "spinsqueeze";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_RULE: &str = "trajectory k of a run with seed s uses ChaCha8(seed = s, stream = k); \
                             sweep point i runs with seed splitmix64(master ^ splitmix64(i))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    Run,
    Sweep,
    Fit,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Applies overrides: flags first, then the output-directory variable.
pub fn resolve(mut cfg: RunConfig, ov: &Overrides) -> RunConfig {
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(w) = ov.workers {
        cfg.workers = w;
    }
    if let Some(f) = ov.format {
        cfg.format = f;
    }
    if let Some(o) = &ov.out {
        cfg.output_dir = o.clone();
    } else if let Some(o) = std::env::var_os(OUT_ENV) {
        cfg.output_dir = PathBuf::from(o);
    }
    cfg
}

#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub seed: u64,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub elapsed_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub toolkit: &'static str,
    pub version: &'static str,
    pub verb: Verb,
    pub mode: Mode,
    pub seed: u64,
    pub seed_rule: &'static str,
    pub workers: usize,
    pub started_unix: u64,
    pub elapsed_s: f64,
    pub files: Vec<String>,
    pub points: Vec<PointRecord>,
    pub failures: usize,
}

struct Outputs {
    dir: PathBuf,
    format: Format,
    files: Vec<String>,
}

impl Outputs {
    fn write(&mut self, stem: &str, table: &Table) -> Result<String> {
        let name = format!("{stem}.{}", self.format.extension());
        table.write(&self.dir.join(&name), self.format)?;
        self.files.push(name.clone());
        Ok(name)
    }
}

/// Runs `verb` on a resolved config and writes the resolved config, data
/// files and `manifest.json` into the output directory. Partial sweep
/// failures are recorded in the manifest and turned into an error.
pub fn execute(cfg: &RunConfig, verb: Verb) -> Result<Manifest> {
    cfg.validate(verb == Verb::Sweep)?;
    if verb == Verb::Fit && cfg.mode != Mode::Fit {
        bail!("config error at `mode`: the fit verb needs mode = \"fit\"");
    }
    let started = Instant::now();
    let started_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    std::fs::write(cfg.output_dir.join("resolved_config.toml"), cfg.to_toml()?)?;
    let mut out = Outputs {
        dir: cfg.output_dir.clone(),
        format: cfg.format,
        files: vec!["resolved_config.toml".into()],
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let points = pool.install(|| match verb {
        Verb::Sweep => run_sweep(cfg, &mut out),
        _ => run_mode(cfg, &mut out),
    })?;
    let failures = points.iter().filter(|p| p.error.is_some()).count();
    let manifest = Manifest {
        toolkit: TOOLKIT,
        version: VERSION,
        verb,
        mode: cfg.mode,
        seed: cfg.seed,
        seed_rule: SEED_RULE,
        workers: cfg.workers,
        started_unix,
        elapsed_s: started.elapsed().as_secs_f64(),
        files: out.files.clone(),
        points,
        failures,
    };
    std::fs::write(cfg.output_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    if failures > 0 {
        let list: Vec<String> = manifest
            .points
            .iter()
            .filter_map(|p| p.error.as_ref().map(|e| format!("  point {} ({}): {e}", p.index, p.label)))
            .collect();
        bail!("{failures} of {} points failed:\n{}", manifest.points.len(), list.join("\n"));
    }
    Ok(manifest)
}

fn run_mode(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<PointRecord>> {
    let t0 = Instant::now();
    let record = |label: &str, file: Option<String>| PointRecord {
        index: 0,
        seed: cfg.seed,
        label: label.into(),
        file,
        elapsed_s: t0.elapsed().as_secs_f64(),
        error: None,
    };
    match cfg.mode {
        Mode::Dtwa => {
            let lattice = cfg.lattice()?;
            let dtwa = cfg.dtwa.as_ref().unwrap();
            let (series, aborted, dt) = dtwa_series(lattice, dtwa, cfg.seed, cfg.workers)?;
            let table = dtwa_table(&series, lattice, dtwa, cfg.seed, aborted, dt);
            let name = out.write("series", &table)?;
            Ok(vec![record("dtwa", Some(name))])
        }
        Mode::Oat => {
            run_oat(cfg, out)?;
            Ok(vec![record("oat", None)])
        }
        Mode::Spinwave => run_spinwave(cfg, out),
        Mode::Quantum => {
            let name = run_quantum(cfg, out)?;
            Ok(vec![record("quantum", Some(name))])
        }
        Mode::Hydro => {
            run_hydro(cfg, out)?;
            Ok(vec![record("hydro", None)])
        }
        Mode::Fit => run_fit(cfg, out),
    }
}

fn dtwa_series(
    lattice: &LatticeSpec,
    dtwa: &DtwaSection,
    seed: u64,
    workers: usize,
) -> Result<(ObservableSeries, usize, f64)> {
    let mut integ = IntegratorConfig::for_spec(lattice, dtwa.t_max, dtwa.n_outputs)?;
    if let Some(dt) = dtwa.dt {
        let steps = (dtwa.t_max / dt).ceil().max(1.0) as usize;
        integ.stride = steps.div_ceil(dtwa.n_outputs).max(1);
        integ.dt = dtwa.t_max / (integ.stride * dtwa.n_outputs) as f64;
    }
    integ.field = dtwa.field;
    let ens = sample_initial(lattice, dtwa.polarization, dtwa.trajectories, seed, dtwa.z_constrained)?;
    let rec = evolve(&ens, lattice, &integ, workers)?;
    let series = ObservableSeries::from_record(&rec, dtwa.conditional)?;
    Ok((series, rec.aborted.len(), integ.dt))
}

fn dtwa_table(
    series: &ObservableSeries,
    lattice: &LatticeSpec,
    dtwa: &DtwaSection,
    seed: u64,
    aborted: usize,
    dt: f64,
) -> Table {
    Table::from_series(series)
        .meta("toolkit", TOOLKIT)
        .meta("version", VERSION)
        .meta("mode", "dtwa")
        .meta("d", lattice.d)
        .meta("L", lattice.l)
        .meta("alpha", lattice.alpha)
        .meta("j_perp", lattice.j_perp)
        .meta("j_z", lattice.j_z)
        .meta("polarization", dtwa.polarization)
        .meta("trajectories", dtwa.trajectories)
        .meta("z_constrained", dtwa.z_constrained)
        .meta("dt", dt)
        .meta("seed", seed)
        .meta("aborted", aborted)
}

/// Squeezing optimum of one series, as aggregated by sweeps and fits.
#[derive(Debug, Clone, Copy)]
struct PointSummary {
    j_z: f64,
    alpha: f64,
    polarization: f64,
    n_sites: f64,
    t_therm: f64,
    plateau: f64,
    opt: SqueezingOptimum,
}

fn summarize(
    times: &[f64],
    xi2: &[f64],
    errs: &[f64],
    m_xy: &[f64],
    t_therm: Option<f64>,
    tol: f64,
    window: usize,
) -> Result<(f64, f64, SqueezingOptimum)> {
    let tt = t_therm.unwrap_or_else(|| thermalization_time_from(times, m_xy, tol));
    let opt = optimal_squeezing_from(times, xi2, errs, tt, window)?;
    let t_end = times.last().copied().unwrap_or(0.0);
    let late: Vec<f64> =
        times.iter().zip(m_xy).filter(|(t, _)| **t >= 2.0 * t_end / 3.0).map(|(_, v)| *v).collect();
    Ok((tt, squeeze::math::median(&late), opt))
}

fn run_sweep(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<PointRecord>> {
    let base = cfg.lattice()?;
    let dtwa = cfg.dtwa.as_ref().unwrap();
    let grid = cfg.sweep.as_ref().unwrap();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (i, p) in grid.points(base, dtwa.polarization).into_iter().enumerate() {
        let t0 = Instant::now();
        let seed = derive_seed(cfg.seed, i as u64);
        let label = point_label(&p);
        let mut lattice = base.clone();
        lattice.j_z = p.j_z;
        lattice.l = p.l;
        lattice.alpha = p.alpha;
        let mut section = dtwa.clone();
        section.polarization = p.polarization;
        let result = (|| -> Result<(String, PointSummary)> {
            lattice.validate()?;
            let (series, aborted, dt) = dtwa_series(&lattice, &section, seed, cfg.workers)?;
            let table = dtwa_table(&series, &lattice, &section, seed, aborted, dt).meta("sweep_index", i);
            let name = out.write(&format!("point_{i:04}"), &table)?;
            let errs: Vec<f64> = series.rows.iter().map(|r| r.err_xi2).collect();
            let (t_therm, plateau, opt) = summarize(
                &series.times(),
                &series.xi2(),
                &errs,
                &series.m_xy(),
                None,
                section.therm_tol,
                section.window,
            )?;
            let summary = PointSummary {
                j_z: p.j_z,
                alpha: p.alpha,
                polarization: p.polarization,
                n_sites: lattice.n_sites() as f64,
                t_therm,
                plateau,
                opt,
            };
            Ok((name, summary))
        })();
        let elapsed_s = t0.elapsed().as_secs_f64();
        match result {
            Ok((name, s)) => {
                summaries.push(s);
                records.push(PointRecord { index: i, seed, label, file: Some(name), elapsed_s, error: None });
            }
            Err(e) => records.push(PointRecord {
                index: i,
                seed,
                label,
                file: None,
                elapsed_s,
                error: Some(format!("{e:#}")),
            }),
        }
    }
    aggregate(&summaries, base.d, out)?;
    Ok(records)
}

fn point_label(p: &SweepPoint) -> String {
    format!("j_z={} L={} alpha={} p={}", p.j_z, p.l, p.alpha, p.polarization)
}

/// Writes the per-series optima, `ν` per control value (where at least four
/// sizes spanning a decade exist) and the critical coupling (where `ν` is
/// known at six or more couplings).
fn aggregate(summaries: &[PointSummary], d: u32, out: &mut Outputs) -> Result<()> {
    let mut agg = Table::new(&[
        "j_z",
        "alpha",
        "polarization",
        "n_sites",
        "xi2_opt",
        "t_opt",
        "err_xi2",
        "no_derivative_minimum",
        "t_therm",
        "m_xy_plateau",
    ]);
    for s in summaries {
        agg.push(vec![
            s.j_z,
            s.alpha,
            s.polarization,
            s.n_sites,
            s.opt.xi2_opt,
            s.opt.t_opt,
            s.opt.err,
            s.opt.no_derivative_minimum as u8 as f64,
            s.t_therm,
            s.plateau,
        ]);
    }
    out.write("aggregate", &agg)?;

    let key = |s: &PointSummary| (s.alpha.to_bits(), s.polarization.to_bits(), s.j_z.to_bits());
    let mut groups: BTreeMap<(u64, u64, u64), Vec<&PointSummary>> = BTreeMap::new();
    for s in summaries {
        groups.entry(key(s)).or_default().push(s);
    }
    let mut nu = Table::new(&["j_z", "alpha", "polarization", "nu", "nu_err", "r_squared", "n_sizes"]);
    let mut curves: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for (k, g) in &groups {
        let pts: Vec<SizePoint> =
            g.iter().map(|s| SizePoint { n: s.n_sites, xi2_opt: s.opt.xi2_opt, err: s.opt.err }).collect();
        if let Ok(f) = fit_nu(&pts) {
            let (alpha, p, j_z) = (f64::from_bits(k.0), f64::from_bits(k.1), f64::from_bits(k.2));
            nu.push(vec![j_z, alpha, p, f.nu, f.nu_err, f.r_squared, pts.len() as f64]);
            curves.entry((k.0, k.1)).or_default().push((j_z, f.nu));
        }
    }
    if nu.rows.is_empty() {
        return Ok(());
    }
    out.write("nu", &nu)?;
    let mut jc = Table::new(&[
        "alpha",
        "polarization",
        "j_c",
        "err",
        "bracket_lo",
        "bracket_hi",
        "floor",
        "ceiling",
        "ramp_start",
        "ramp_end",
    ])
    .meta("d", d);
    for ((a, p), curve) in &curves {
        if curve.len() < 6 {
            continue;
        }
        let e = locate_jc(curve, d)?;
        let r = e.ramp;
        jc.push(vec![
            f64::from_bits(*a),
            f64::from_bits(*p),
            e.j_c,
            e.err,
            e.bracket.0,
            e.bracket.1,
            r.map_or(f64::NAN, |r| r.floor),
            r.map_or(f64::NAN, |r| r.ceiling),
            r.map_or(f64::NAN, |r| r.ramp_start),
            r.map_or(f64::NAN, |r| r.ramp_end),
        ]);
    }
    if !jc.rows.is_empty() {
        out.write("jc", &jc)?;
    }
    Ok(())
}

fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn meta_f64(t: &Table, key: &str, path: &Path) -> Result<f64> {
    t.get_meta(key)
        .ok_or_else(|| anyhow!("{}: header lacks `{key}`", path.display()))?
        .parse()
        .with_context(|| format!("{}: header `{key}`", path.display()))
}

fn run_fit(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<PointRecord>> {
    let fit = cfg.fit.as_ref().unwrap();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (i, path) in collect_inputs(&fit.inputs)?.into_iter().enumerate() {
        let t0 = Instant::now();
        let result = (|| -> Result<Option<PointSummary>> {
            let t = Table::read_csv(&path)?;
            let (Some(times), Some(xi2), Some(err), Some(m_xy)) =
                (t.column("t"), t.column("xi2"), t.column("err_xi2"), t.column("m_xy"))
            else {
                return Ok(None);
            };
            let (t_therm, plateau, opt) =
                summarize(&times, &xi2, &err, &m_xy, fit.t_therm, fit.therm_tol, fit.window)?;
            Ok(Some(PointSummary {
                j_z: meta_f64(&t, "j_z", &path)?,
                alpha: meta_f64(&t, "alpha", &path)?,
                polarization: meta_f64(&t, "polarization", &path)?,
                n_sites: meta_f64(&t, "n_sites", &path)?,
                t_therm,
                plateau,
                opt,
            }))
        })();
        let label = path.display().to_string();
        let elapsed_s = t0.elapsed().as_secs_f64();
        match result {
            Ok(None) => continue,
            Ok(Some(s)) => {
                summaries.push(s);
                records.push(PointRecord { index: i, seed: cfg.seed, label, file: None, elapsed_s, error: None });
            }
            Err(e) => records.push(PointRecord {
                index: i,
                seed: cfg.seed,
                label,
                file: None,
                elapsed_s,
                error: Some(format!("{e:#}")),
            }),
        }
    }
    if summaries.is_empty() && records.is_empty() {
        bail!("config error at `fit.inputs`: no series files found");
    }
    aggregate(&summaries, fit.d, out)?;
    Ok(records)
}

fn run_oat(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let o = cfg.oat.as_ref().unwrap();
    let form = match o.form {
        Xi2FormName::Exact => Xi2Form::Exact,
        Xi2FormName::Approx => Xi2Form::Approx,
    };
    let params = |n: f64| SemiclassicalParams { n, m_xy: o.m_xy, chi: o.chi, v0: n / 4.0, c: o.c, gamma: o.gamma };
    let mut opt = Table::new(&["n", "t_opt", "xi2_opt"]);
    let mut curve = Table::new(&["n", "t", "xi2"]);
    for &n in &o.sizes {
        let p = params(n);
        let best = optimize(&p, form)?;
        opt.push(vec![n, best.t_opt, best.xi2_opt]);
        if o.curve_points > 1 {
            let (lo, hi) = ((0.1 / o.chi).ln(), (n.sqrt() / o.chi).ln());
            for k in 0..o.curve_points {
                let t = (lo + (hi - lo) * k as f64 / (o.curve_points - 1) as f64).exp();
                let v = match form {
                    Xi2Form::Exact => xi2_exact(&p, t),
                    Xi2Form::Approx => xi2_approx(&p, t),
                };
                curve.push(vec![n, t, v]);
            }
        }
    }
    let mut opt = opt.meta("gamma", o.gamma).meta("chi", o.chi).meta("form", format!("{:?}", o.form));
    if let Ok(e) = scaling_exponents(o.gamma) {
        opt = opt.meta("predicted_xi2_exponent", e.xi2).meta("predicted_t_exponent", e.t);
    }
    if o.sizes.len() >= 2 {
        let x: Vec<f64> = o.sizes.iter().map(|n| n.ln()).collect();
        let yx: Vec<f64> = opt.rows.iter().map(|r| r[2].ln()).collect();
        let yt: Vec<f64> = opt.rows.iter().map(|r| r[1].ln()).collect();
        let fx = squeeze::math::line_fit(&x, &yx, None)?;
        let ft = squeeze::math::line_fit(&x, &yt, None)?;
        opt = opt.meta("fitted_xi2_exponent", fx.slope).meta("fitted_t_exponent", ft.slope);
    }
    out.write("oat_optimum", &opt)?;
    if !curve.rows.is_empty() {
        out.write("oat_curve", &curve)?;
    }
    Ok(())
}

fn run_spinwave(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<PointRecord>> {
    let sw = cfg.spinwave.as_ref().unwrap();
    let mut table = Table::new(&["alpha", "t_c", "j_c", "t_0", "energy_density"])
        .meta("d", sw.d)
        .meta("s", sw.s);
    let mut records = Vec::new();
    for (i, &alpha) in sw.alphas.iter().enumerate() {
        let t0 = Instant::now();
        let row = (|| -> Result<Vec<f64>> {
            let t_c = critical_temperature(alpha, sw.d, sw.s)?;
            match &sw.energy_model {
                None => Ok(vec![alpha, t_c, f64::NAN, f64::NAN, f64::NAN]),
                Some(model) => match solve_jc(alpha, sw.d, sw.s, model) {
                    Ok(r) => Ok(vec![
                        alpha,
                        t_c,
                        r.j_c.unwrap_or(f64::NAN),
                        r.t_0.unwrap_or(f64::NAN),
                        r.energy_density.unwrap_or(f64::NAN),
                    ]),
                    Err(squeeze::Error::NoBoundary { .. }) => Ok(vec![alpha, t_c, f64::NAN, f64::NAN, f64::NAN]),
                    Err(e) => Err(e.into()),
                },
            }
        })();
        let label = format!("alpha={alpha}");
        let elapsed_s = t0.elapsed().as_secs_f64();
        match row {
            Ok(r) => {
                table.push(r);
                records.push(PointRecord { index: i, seed: cfg.seed, label, file: None, elapsed_s, error: None });
            }
            Err(e) => records.push(PointRecord {
                index: i,
                seed: cfg.seed,
                label,
                file: None,
                elapsed_s,
                error: Some(format!("{e:#}")),
            }),
        }
    }
    let name = out.write("spinwave", &table)?;
    for r in &mut records {
        r.file = Some(name.clone());
    }
    Ok(records)
}

fn run_quantum(cfg: &RunConfig, out: &mut Outputs) -> Result<String> {
    let lattice = cfg.lattice()?.clone();
    let q = cfg.quantum.as_ref().unwrap();
    let n = lattice.n_sites();
    let chi_grid = TimeGrid { t_max: q.chi_t_max, n_times: q.chi_n_times };
    match q.task {
        QuantumTask::Echo => {
            let echo = EchoConfig {
                hamiltonian: QuantumHamiltonian::Xxz(lattice.clone()),
                chi: q.chi,
                grid: TimeGrid { t_max: q.t_max, n_times: q.n_times },
                chi_grid,
                krylov: q.krylov,
            };
            let s = var_q_conditional(&echo)?;
            let mut t = Table::new(&["t", "var_q", "var_q_per_site"])
                .meta("mode", "quantum-echo")
                .meta("n_sites", n)
                .meta("alpha", lattice.alpha)
                .meta("j_z", lattice.j_z)
                .meta("chi", s.chi)
                .meta("dropped_weight", s.dropped_weight);
            for (time, v) in s.times.iter().zip(&s.var_q) {
                t.push(vec![*time, *v, v / n as f64]);
            }
            out.write("echo", &t)
        }
        QuantumTask::Chi => {
            let h = QuantumHamiltonian::Xxz(lattice.clone());
            let c = extract_chi(&h, &default_chi_pairs(n), chi_grid, &q.krylov)?;
            let mut t = Table::new(&["m", "delta_e", "amplitude"])
                .meta("mode", "quantum-chi")
                .meta("n_sites", n)
                .meta("alpha", lattice.alpha)
                .meta("j_z", lattice.j_z)
                .meta("chi", c.chi)
                .meta("intercept", c.intercept)
                .meta("r_squared", c.r_squared)
                .meta("monotone", c.monotone)
                .meta("flagged", c.flagged);
            for s in &c.splittings {
                t.push(vec![s.m, s.delta_e, s.amplitude]);
            }
            out.write("chi", &t)
        }
        QuantumTask::GroundState => {
            let e0 = ground_state_energy(&lattice)?;
            let scale = Convention::Spin.bilinear_scale();
            let e_css = css_energy(&lattice, Convention::Spin)?;
            let mut t = Table::new(&["n_sites", "e0_pauli", "e0_spin_per_site", "css_spin_per_site", "excitation_per_site"])
                .meta("mode", "quantum-ground-state")
                .meta("alpha", lattice.alpha)
                .meta("j_z", lattice.j_z);
            let nf = n as f64;
            t.push(vec![nf, e0, e0 * scale / nf, e_css / nf, (e_css - e0 * scale) / nf]);
            out.write("ground_state", &t)
        }
    }
}

fn run_hydro(cfg: &RunConfig, out: &mut Outputs) -> Result<()> {
    let h = cfg.hydro.as_ref().unwrap();
    let params = h.params();
    let z = zero_mode_variance(&params, h.t_max, h.n_points, cfg.seed)?;
    let expected = 2.0 * params.gamma * params.temperature / params.n;
    let mut t = Table::new(&["t", "mean", "variance"])
        .meta("mode", "hydro")
        .meta("n", params.n)
        .meta("gamma", params.gamma)
        .meta("temperature", params.temperature)
        .meta("slope", z.fit.slope)
        .meta("slope_err", z.slope_err)
        .meta("expected_slope", expected);
    for i in 0..z.times.len() {
        t.push(vec![z.times[i], z.mean[i], z.variance[i]]);
    }
    out.write("zero_mode", &t)?;
    let mut spec = Table::new(&["j", "k", "stiffness", "omega", "damping_sum"]);
    for j in 0..=params.n_modes / 2 {
        spec.push(vec![
            j as f64,
            params.momentum(j),
            params.stiffness(j),
            params.spin_wave_frequency(j),
            params.damping_sum(j),
        ]);
    }
    out.write("spectrum", &spec)?;
    Ok(())
}
