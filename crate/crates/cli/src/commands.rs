//! The seven subcommands. Each validates its whole scenario before doing any
//! numerical work and returns the JSON summary it staged.

use std::path::PathBuf;
use std::sync::mpsc;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wavelab_core::analytic::{
    audit_separable, calibrate_constant, calibration_residual, dispersion, dispersion_with_form, residual,
    residual_with_form, Candidate, CalibrationFamily, FreeParticle, PlaneWave, SeparableSolution,
};
use wavelab_core::em_kinematics::{
    canonical_momentum, gamma_from_momentum, legendre_energy, total_energy, velocity_from_momentum, FieldContext,
    ParticleState,
};
use wavelab_core::evolution::{check_run, evolve, evolve_with, InitialData, Snapshot, StepperConfig};
use wavelab_core::observables::{compare_runs, field_moments, packet_stats, populations, PacketStats};
use wavelab_core::stationary::{em_stationary_residual, EigenvalueKind, EmForm, SpectrumResult, StationaryCandidate};
use wavelab_core::{Complex64, EquationSpec, Family, Grid1D};

use crate::error::{CliError, CliResult, CoreContext};
use crate::initial;
use crate::output::{fmt_f64, render_json, write_temp, CsvTable, Provenance, Staging};
use crate::scenario::{stationary_basis, RawCandidate, Scenario};

pub(crate) struct Ctx<'a> {
    pub scenario: &'a Scenario,
    pub staging: &'a mut Staging,
    pub seed: u64,
}

impl Ctx<'_> {
    fn prov(&self) -> &Provenance {
        &self.scenario.provenance
    }

    fn file(&self, suffix: &str) -> String {
        format!("{}_{suffix}", self.scenario.name())
    }

    fn csv(&mut self, suffix: &str, table: &CsvTable) -> CliResult<()> {
        let bytes = table.render(self.prov());
        let name = self.file(suffix);
        self.staging.stage(&name, &bytes)
    }

    fn json(&mut self, suffix: &str, body: Value) -> CliResult<Value> {
        let bytes = render_json(self.prov(), body.clone());
        let name = self.file(suffix);
        self.staging.stage(&name, &bytes)?;
        Ok(body)
    }
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn default_grid() -> Grid1D {
    Grid1D::new(0.0, 1.0, 16, wavelab_core::Boundary::Periodic).expect("fixed grid is valid")
}

fn spectrum_gram_error(spectrum: &SpectrumResult) -> CliResult<f64> {
    let v = &spectrum.eigenvectors;
    let mut worst: f64 = 0.0;
    for i in 0..v.len() {
        for j in 0..v.len() {
            let g = v[i].inner(&v[j]).at("eigensolve")?;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

pub(crate) fn eigensolve(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let es = sc.section(&sc.raw.eigensolve, "eigensolve")?;
    let grid = sc.grid()?;
    let spec = sc.equation()?;
    if es.n_states == 0 {
        return Err(CliError::validation("eigensolve.n_states", "must be at least 1"));
    }
    let spectrum = stationary_basis(&spec, &grid, es.n_states, "eigensolve")?;
    let energies = spectrum.energies();
    let mut table = CsvTable::new(&["index", "eigenvalue", "energy"]);
    for (i, (ev, e)) in spectrum.eigenvalues.iter().zip(&energies).enumerate() {
        table.push(vec![i.to_string(), f(*ev), f(*e)]);
    }
    ctx.csv("spectrum.csv", &table)?;
    if sc.raw.outputs.eigenvectors {
        let mut header = vec!["x".to_string()];
        for i in 0..spectrum.len() {
            header.push(format!("re_{i}"));
            header.push(format!("im_{i}"));
        }
        let mut vt = CsvTable::new(&header);
        for (j, x) in grid.points().iter().enumerate() {
            let mut row = vec![f(*x)];
            for v in &spectrum.eigenvectors {
                row.push(f(v.values()[j].re));
                row.push(f(v.values()[j].im));
            }
            vt.push(row);
        }
        ctx.csv("eigenvectors.csv", &vt)?;
    }
    let kind = match spectrum.kind {
        EigenvalueKind::Energy => "energy",
        EigenvalueKind::EnergySquared => "energy_squared",
    };
    ctx.json(
        "eigensolve.json",
        json!({
            "command": "eigensolve",
            "family": spec.family().name(),
            "eigenvalue_kind": kind,
            "n_states": spectrum.len(),
            "eigenvalues": spectrum.eigenvalues,
            "energies": energies,
            "orthonormality_error": spectrum_gram_error(&spectrum)?,
        }),
    )
}

/// Everything `evolve` needs, built and checked before stepping.
pub(crate) struct EvolvePlan {
    pub spec: EquationSpec,
    pub grid: Grid1D,
    pub initial: InitialData,
    pub config: StepperConfig,
    pub basis: Option<SpectrumResult>,
}

pub(crate) fn plan_evolve(sc: &Scenario, population_states: usize) -> CliResult<EvolvePlan> {
    let grid = sc.grid()?;
    let spec = sc.equation()?;
    if !spec.family().is_time_dependent() {
        return Err(CliError::validation(
            "equation.family",
            format!("{} is stationary; evolve needs a time-dependent family", spec.family()),
        ));
    }
    let raw_initial = sc.section(&sc.raw.initial, "initial")?;
    let initial = initial::build(raw_initial, &spec, &grid)?;
    let config = sc.stepper()?;
    let basis = if population_states > 0 {
        Some(stationary_basis(&spec, &grid, population_states, "outputs.population_states")?)
    } else {
        None
    };
    check_run(&spec, &initial, &config).at("stepper")?;
    Ok(EvolvePlan {
        spec,
        grid,
        initial,
        config,
        basis,
    })
}

fn snapshot_csv(prov: &Provenance, s: &Snapshot) -> Vec<u8> {
    let mut t = CsvTable::new(&["x", "re", "im", "abs2"]);
    let grid = s.psi.grid();
    for (x, z) in grid.points().iter().zip(s.psi.values()) {
        t.push(vec![f(*x), f(z.re), f(z.im), f(z.norm_sqr())]);
    }
    t.render(prov)
}

/// Per-snapshot reductions accumulated while a run streams.
#[derive(Default)]
struct Tracker {
    steps: Vec<usize>,
    times: Vec<f64>,
    norm: Vec<f64>,
    energy: Vec<f64>,
    centroid: Vec<f64>,
    width: Vec<f64>,
    populations: Vec<Vec<f64>>,
    period: Option<f64>,
}

impl Tracker {
    fn record(&mut self, s: &Snapshot, basis: Option<&SpectrumResult>) -> wavelab_core::Result<()> {
        let (c, w, _) = field_moments(&s.psi);
        self.steps.push(s.step_index);
        self.times.push(s.t);
        self.norm.push(s.diagnostics.norm);
        self.energy.push(s.diagnostics.energy);
        self.centroid.push(c);
        self.width.push(w);
        if s.psi.grid().is_periodic() {
            self.period = Some(s.psi.grid().length());
        }
        if let Some(b) = basis {
            let p = populations(std::slice::from_ref(s), b)?;
            self.populations.push(p.populations.into_iter().next().unwrap_or_default());
        }
        Ok(())
    }

    fn packet(&self) -> PacketStats {
        PacketStats {
            times: self.times.clone(),
            centroid: self.centroid.clone(),
            width: self.width.clone(),
            norm: self.norm.clone(),
            period: self.period,
        }
    }

    fn relative_drift(series: &[f64]) -> f64 {
        let first = series.first().copied().unwrap_or(0.0);
        let scale = first.abs().max(f64::MIN_POSITIVE);
        max_of(series.iter().map(|v| (v - first).abs() / scale))
    }

    fn summary(&self, plan: &EvolvePlan) -> Value {
        let (steps, dt) = plan.config.schedule();
        let packet = self.packet();
        let mut out = json!({
            "family": plan.spec.family().name(),
            "steps": steps,
            "dt": dt,
            "t_end": plan.config.t_end,
            "snapshots": self.times.len(),
            "norm_initial": self.norm.first(),
            "norm_final": self.norm.last(),
            "norm_drift": Self::relative_drift(&self.norm),
            "energy_initial": self.energy.first(),
            "energy_final": self.energy.last(),
            "energy_drift": Self::relative_drift(&self.energy),
            "centroid_initial": packet.centroid.first(),
            "centroid_final": packet.centroid.last(),
            "width_initial": packet.width.first(),
            "width_final": packet.width.last(),
            "width_growth": packet.width_growth(),
            "mean_speed": packet.mean_speed(),
        });
        if let Some(basis) = &plan.basis {
            let n = basis.len();
            let dev: Vec<f64> = (0..n)
                .map(|j| {
                    let p0 = self.populations.first().map(|r| r[j]).unwrap_or(0.0);
                    max_of(self.populations.iter().map(|r| (r[j] - p0).abs()))
                })
                .collect();
            out["populations"] = json!({
                "levels": basis.eigenvalues,
                "initial": self.populations.first(),
                "final": self.populations.last(),
                "max_deviation": dev,
                "max_deviation_all": max_of(dev.iter().copied()),
            });
        }
        out
    }
}

pub(crate) fn evolve_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let outputs = sc.raw.outputs.clone();
    let plan = plan_evolve(sc, outputs.population_states)?;
    let prov = ctx.prov().clone();
    let dir = ctx.staging.dir().to_path_buf();
    let name = sc.name().to_string();

    let mut tracker = Tracker::default();
    let (tx, rx) = mpsc::sync_channel::<(String, Vec<u8>)>(4);
    let (run, written) = thread::scope(|s| {
        let writer = s.spawn(move || {
            let mut done: Vec<(PathBuf, PathBuf)> = Vec::new();
            for (file, bytes) in rx {
                match write_temp(&dir, &file, &bytes) {
                    Ok(pair) => done.push(pair),
                    Err(e) => return (done, Some(e)),
                }
            }
            (done, None)
        });
        let mut writer_gone = false;
        let run = evolve_with(&plan.spec, &plan.initial, &plan.config, |snap| {
            tracker.record(&snap, plan.basis.as_ref())?;
            if outputs.snapshots && !writer_gone {
                let file = format!("{name}_{}.csv", snap.step_index);
                writer_gone = tx.send((file, snapshot_csv(&prov, &snap))).is_err();
            }
            Ok(())
        });
        drop(tx);
        (run, writer.join().expect("writer thread panicked"))
    });
    let (files, write_error) = written;
    for (tmp, dest) in files {
        ctx.staging.adopt(tmp, dest);
    }
    run.at("evolve")?;
    if let Some(e) = write_error {
        return Err(e);
    }

    let mut diag = CsvTable::new(&["step", "t", "norm", "energy"]);
    for i in 0..tracker.times.len() {
        diag.push(vec![
            tracker.steps[i].to_string(),
            f(tracker.times[i]),
            f(tracker.norm[i]),
            f(tracker.energy[i]),
        ]);
    }
    ctx.csv("diagnostics.csv", &diag)?;
    if outputs.packet_stats {
        let mut pt = CsvTable::new(&["step", "t", "centroid", "width", "norm"]);
        for i in 0..tracker.times.len() {
            pt.push(vec![
                tracker.steps[i].to_string(),
                f(tracker.times[i]),
                f(tracker.centroid[i]),
                f(tracker.width[i]),
                f(tracker.norm[i]),
            ]);
        }
        ctx.csv("packet.csv", &pt)?;
    }
    if let Some(basis) = &plan.basis {
        let mut header = vec!["step".to_string(), "t".to_string()];
        header.extend((0..basis.len()).map(|j| format!("p_{j}")));
        let mut pop = CsvTable::new(&header);
        for (i, row) in tracker.populations.iter().enumerate() {
            let mut r = vec![tracker.steps[i].to_string(), f(tracker.times[i])];
            r.extend(row.iter().map(|v| f(*v)));
            pop.push(r);
        }
        ctx.csv("populations.csv", &pop)?;
    }
    let mut summary = tracker.summary(&plan);
    summary["command"] = json!("evolve");
    ctx.json("evolve.json", summary)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn dispersion_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let spec = sc.equation()?;
    let section = sc.section(&sc.raw.dispersion, "dispersion")?;
    let grid = if sc.raw.grid.is_some() { sc.grid()? } else { default_grid() };
    let ks: Vec<f64> = match (&section.k, &section.random) {
        (Some(k), None) => k.clone(),
        (None, Some(r)) => {
            if !(r.k_min < r.k_max) || r.count == 0 {
                return Err(CliError::validation(
                    "dispersion.random",
                    "needs count >= 1 and k_min < k_max",
                ));
            }
            let mut g = rng(ctx.seed);
            (0..r.count).map(|_| g.gen_range(r.k_min..r.k_max)).collect()
        }
        _ => {
            return Err(CliError::validation(
                "dispersion",
                "give exactly one of `k` or `random`",
            ))
        }
    };
    // validate every k before evaluating residuals
    let results: Vec<_> = ks
        .iter()
        .map(|&k| dispersion(&spec, k).at("dispersion.k"))
        .collect::<CliResult<_>>()?;
    let times = [0.0, 0.5, 1.0];
    let mut table = CsvTable::new(&["k", "omega", "phase_velocity", "group_velocity", "residual"]);
    let mut worst: f64 = 0.0;
    for d in &results {
        let wave = PlaneWave::new(Complex64::new(1.0, 0.0), d.k, d.omega);
        let r = residual(
            &spec,
            &Candidate::PlaneWave {
                wave: &wave,
                grid: &grid,
                times: &times,
            },
        )
        .at("dispersion")?;
        worst = worst.max(r);
        table.push(vec![f(d.k), f(d.omega), f(d.phase_velocity), f(d.group_velocity), f(r)]);
    }
    ctx.csv("dispersion.csv", &table)?;
    ctx.json(
        "dispersion.json",
        json!({
            "command": "dispersion",
            "family": spec.family().name(),
            "seed": ctx.seed,
            "count": results.len(),
            "max_residual": worst,
        }),
    )
}

pub(crate) fn residual_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let spec = sc.equation()?;
    let section = sc.section(&sc.raw.residual, "residual")?;
    let times = section.times.clone().unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
    let family = spec.family();
    let hbar = spec.constants().hbar();
    let mut table = CsvTable::new(&["candidate", "mode", "k", "omega", "residual"]);
    let mut summary = json!({ "command": "residual", "family": family.name() });

    match section.candidate {
        RawCandidate::Separable => {
            let grid = sc.grid()?;
            let basis = stationary_basis(&spec, &grid, section.state + 1, "residual.state")?;
            let spatial = &basis.eigenvectors[section.state];
            match family {
                Family::NewTD | Family::RelNewTD => {
                    let audit = audit_separable(&spec, spatial, &times).at("residual")?;
                    table.push(vec![
                        "separable".into(),
                        "paper_literal".into(),
                        "".into(),
                        f(audit.literal_omega),
                        f(audit.literal_residual),
                    ]);
                    table.push(vec![
                        "separable".into(),
                        "rederived".into(),
                        "".into(),
                        f(audit.rederived_omega),
                        f(audit.rederived_residual),
                    ]);
                    summary["literal_omega"] = json!(audit.literal_omega);
                    summary["literal_residual"] = json!(audit.literal_residual);
                    summary["rederived_omega"] = json!(audit.rederived_omega);
                    summary["rederived_residual"] = json!(audit.rederived_residual);
                    summary["frequency_ratio"] = json!(audit.literal_omega / audit.rederived_omega);
                }
                Family::SchrodingerTD | Family::KleinGordon => {
                    let omega = basis.energies()[section.state] / hbar;
                    let sol = SeparableSolution::stationary(spatial.clone(), omega);
                    let r = residual(
                        &spec,
                        &Candidate::Separable {
                            solution: &sol,
                            times: &times,
                        },
                    )
                    .at("residual")?;
                    table.push(vec!["separable".into(), "stationary".into(), "".into(), f(omega), f(r)]);
                    summary["stationary_residual"] = json!(r);
                }
                other => {
                    return Err(CliError::validation(
                        "residual.candidate",
                        format!("separable candidates are not defined for {other}"),
                    ))
                }
            }
        }
        RawCandidate::PlaneWave => {
            let grid = if sc.raw.grid.is_some() { sc.grid()? } else { default_grid() };
            let p = spec.momentum();
            let p_mag = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ks = section.k.clone().unwrap_or_else(|| {
                if family.is_electromagnetic() {
                    vec![p_mag / hbar]
                } else {
                    vec![1.0]
                }
            });
            let mut worst = serde_json::Map::new();
            let mut note = |mode: &str, r: f64| {
                let prev = worst.get(mode).and_then(Value::as_f64).unwrap_or(0.0);
                worst.insert(mode.to_string(), json!(prev.max(r)));
            };
            for &k in &ks {
                match family {
                    Family::EmStationaryP => {
                        let wave = PlaneWave::new(Complex64::new(1.0, 0.0), k, 0.0);
                        let cand = StationaryCandidate::PlaneWave { wave: &wave, grid: &grid };
                        let scale = cand.norm();
                        for (form, label) in [(EmForm::CNumber, "c_number"), (EmForm::Operator, "operator")] {
                            let r = em_stationary_residual(&spec, &cand, form).at("residual")? / scale;
                            table.push(vec!["plane_wave".into(), label.into(), f(k), f(0.0), f(r)]);
                            note(label, r);
                        }
                    }
                    Family::EmTimeDepP => {
                        for (form, label) in [(EmForm::CNumber, "c_number"), (EmForm::Operator, "operator")] {
                            let d = dispersion_with_form(&spec, k, form).at("residual")?;
                            let wave = PlaneWave::new(Complex64::new(1.0, 0.0), k, d.omega);
                            let r = residual_with_form(
                                &spec,
                                &Candidate::PlaneWave {
                                    wave: &wave,
                                    grid: &grid,
                                    times: &times,
                                },
                                form,
                            )
                            .at("residual")?;
                            table.push(vec!["plane_wave".into(), label.into(), f(k), f(d.omega), f(r)]);
                            note(label, r);
                        }
                    }
                    _ if family.is_time_dependent() => {
                        let d = dispersion(&spec, k).at("residual")?;
                        let wave = PlaneWave::new(Complex64::new(1.0, 0.0), k, d.omega);
                        let r = residual(
                            &spec,
                            &Candidate::PlaneWave {
                                wave: &wave,
                                grid: &grid,
                                times: &times,
                            },
                        )
                        .at("residual")?;
                        table.push(vec!["plane_wave".into(), "dispersion".into(), f(k), f(d.omega), f(r)]);
                        note("dispersion", r);
                    }
                    other => {
                        return Err(CliError::validation(
                            "residual.candidate",
                            format!("plane-wave candidates are not defined for {other}"),
                        ))
                    }
                }
            }
            summary["max_residual"] = Value::Object(worst);
        }
    }
    ctx.csv("residual.csv", &table)?;
    ctx.json("residual.json", summary)
}

fn calibration_families(sc: &Scenario) -> CliResult<Vec<CalibrationFamily>> {
    let section = sc.section(&sc.raw.calibrate, "calibrate")?;
    if let Some(names) = &section.families {
        return names
            .iter()
            .map(|n| {
                CalibrationFamily::from_name(n).ok_or_else(|| {
                    let all: Vec<&str> = CalibrationFamily::ALL.iter().map(|f| f.name()).collect();
                    CliError::validation(
                        "calibrate.families",
                        format!("unknown family `{n}`; expected one of {}", all.join(", ")),
                    )
                })
            })
            .collect();
    }
    if sc.raw.equation.is_none() {
        return Ok(CalibrationFamily::ALL.to_vec());
    }
    let fam = match sc.family()? {
        Family::SchrodingerStationary => CalibrationFamily::NonRelStationary,
        Family::NewTD => CalibrationFamily::NonRelTimeDependent,
        Family::EmStationaryP => CalibrationFamily::EmStationary,
        Family::EmTimeDepP => CalibrationFamily::EmTimeDependent,
        other => {
            return Err(CliError::validation(
                "equation.family",
                format!("{other} has no calibrated constant"),
            ))
        }
    };
    Ok(vec![fam])
}

fn audit_markdown(prov: &Provenance, rows: &[Value], freq: Option<&Value>) -> Vec<u8> {
    let mut s = String::new();
    s.push_str(&format!("# Calibration audit: {}\n\n", prov.name));
    s.push_str(&format!("scenario_sha256: {}\n\n", prov.sha256));
    s.push_str("| family | computed | printed | printed formula | matches |\n");
    s.push_str("|---|---|---|---|---|\n");
    for r in rows {
        let printed = r["printed"].as_f64().map(fmt_f64).unwrap_or_else(|| "-".into());
        let matches = match r["matches"].as_bool() {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "-",
        };
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            r["family"].as_str().unwrap_or(""),
            fmt_f64(r["computed"].as_f64().unwrap_or(f64::NAN)),
            printed,
            r["printed_formula"].as_str().unwrap_or(""),
            matches
        ));
    }
    if let Some(freq) = freq {
        s.push_str("\n| separable frequency | omega | residual |\n|---|---|---|\n");
        for mode in ["literal", "rederived"] {
            s.push_str(&format!(
                "| {mode} | {} | {} |\n",
                fmt_f64(freq[format!("{mode}_omega")].as_f64().unwrap_or(f64::NAN)),
                fmt_f64(freq[format!("{mode}_residual")].as_f64().unwrap_or(f64::NAN)),
            ));
        }
    }
    s.into_bytes()
}

pub(crate) fn calibrate_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let section = sc.section(&sc.raw.calibrate, "calibrate")?;
    let families = calibration_families(sc)?;
    let constants = sc.constants()?;
    if !(section.p.is_finite() && section.p != 0.0) {
        return Err(CliError::validation("calibrate.p", "must be finite and nonzero"));
    }
    // frequency audit of the fixed-energy families, when the scenario has one
    let freq_spec = match &sc.raw.equation {
        Some(_) if matches!(sc.family()?, Family::NewTD | Family::RelNewTD) && sc.raw.grid.is_some() => {
            Some((sc.equation()?, sc.grid()?))
        }
        _ => None,
    };

    let mut table = CsvTable::new(&[
        "family",
        "computed",
        "printed",
        "printed_formula",
        "matches",
        "residual_computed",
        "residual_printed",
    ]);
    let mut rows = Vec::new();
    for family in families {
        let trial = match family {
            CalibrationFamily::EmStationary | CalibrationFamily::EmTimeDependent => FreeParticle::relativistic(
                constants,
                section.p,
                section.vector_potential,
                section.scalar_potential,
            ),
            _ => FreeParticle::nonrelativistic(constants, section.p),
        };
        let wave = trial.trial_wave();
        let cal = calibrate_constant(family, &wave, &trial).at("calibrate")?;
        let r_comp = calibration_residual(family, cal.computed, &wave, &trial);
        let r_print = cal.printed.map(|p| calibration_residual(family, p, &wave, &trial));
        table.push(vec![
            family.name().into(),
            f(cal.computed),
            cal.printed.map(f).unwrap_or_default(),
            cal.printed_formula.into(),
            cal.matches.map(|m| m.to_string()).unwrap_or_default(),
            f(r_comp),
            r_print.map(f).unwrap_or_default(),
        ]);
        rows.push(json!({
            "family": family.name(),
            "energy": trial.energy,
            "computed": cal.computed,
            "printed": cal.printed,
            "printed_formula": cal.printed_formula,
            "matches": cal.matches,
            "residual_computed": r_comp,
            "residual_printed": r_print,
        }));
    }
    let freq = match freq_spec {
        Some((spec, grid)) => {
            let state = sc.raw.residual.as_ref().map(|r| r.state).unwrap_or(0);
            let basis = stationary_basis(&spec, &grid, state + 1, "calibrate")?;
            let times = [0.0, 0.5, 1.0];
            let audit = audit_separable(&spec, &basis.eigenvectors[state], &times).at("calibrate")?;
            Some(json!({
                "family": spec.family().name(),
                "energy": spec.energy(),
                "literal_omega": audit.literal_omega,
                "literal_residual": audit.literal_residual,
                "rederived_omega": audit.rederived_omega,
                "rederived_residual": audit.rederived_residual,
            }))
        }
        None => None,
    };
    ctx.csv("calibration.csv", &table)?;
    let md = audit_markdown(ctx.prov(), &rows, freq.as_ref());
    let name = ctx.file("audit.md");
    ctx.staging.stage(&name, &md)?;
    ctx.json(
        "calibration.json",
        json!({
            "command": "calibrate",
            "p": section.p,
            "calibrations": rows,
            "frequency_audit": freq,
        }),
    )
}

pub(crate) fn kinematics_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let section = sc.section(&sc.raw.kinematics, "kinematics")?;
    let k = sc.constants()?;
    if section.samples == 0 {
        return Err(CliError::validation("kinematics.samples", "must be at least 1"));
    }
    if !(section.max_speed > 0.0 && section.max_speed < 1.0) {
        return Err(CliError::validation("kinematics.max_speed", "must lie in (0, 1)"));
    }
    for (key, v) in [
        ("kinematics.max_vector_potential", section.max_vector_potential),
        ("kinematics.max_scalar_potential", section.max_scalar_potential),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::validation(key, "must be non-negative and finite"));
        }
    }
    let mut g = rng(ctx.seed);
    let c = k.c();
    let e0 = k.rest_energy();
    let mut table = CsvTable::new(&[
        "index",
        "speed",
        "gamma",
        "energy",
        "roundtrip_error",
        "gamma_error",
        "legendre_error",
        "shell_error",
    ]);
    let (mut w_rt, mut w_g, mut w_l, mut w_s) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let sym = |g: &mut ChaCha8Rng, m: f64| if m > 0.0 { g.gen_range(-m..=m) } else { 0.0 };
    for i in 0..section.samples {
        let speed = c * section.max_speed * g.gen::<f64>();
        let cos_t: f64 = g.gen_range(-1.0..=1.0);
        let phi_ang: f64 = g.gen_range(0.0..std::f64::consts::TAU);
        let sin_t = (1.0 - cos_t * cos_t).sqrt();
        let u = [
            speed * sin_t * phi_ang.cos(),
            speed * sin_t * phi_ang.sin(),
            speed * cos_t,
        ];
        let a = [
            sym(&mut g, section.max_vector_potential),
            sym(&mut g, section.max_vector_potential),
            sym(&mut g, section.max_vector_potential),
        ];
        let phi = sym(&mut g, section.max_scalar_potential);
        let field = FieldContext::new(a, phi);
        let state = ParticleState::with_velocity(k, field, u).at("kinematics")?;
        let p = canonical_momentum(&state).at("kinematics")?;
        let back = ParticleState::with_momentum(k, field, p);
        let u2 = velocity_from_momentum(&back);
        let rt = (0..3).map(|j| (u[j] - u2[j]).abs()).fold(0.0, f64::max) / c;
        let gamma = 1.0 / (1.0 - speed * speed / (c * c)).sqrt();
        let g_err = (gamma_from_momentum(&back) - gamma).abs() / gamma;
        let energy = total_energy(&back);
        let legendre = legendre_energy(&state).at("kinematics")?;
        let l_err = (legendre - energy).abs() / energy.abs().max(e0);
        // free-field reduction: same kinetic momentum with the potentials removed
        let kin = back.kinetic_momentum();
        let free = ParticleState::with_momentum(k, FieldContext::free(), kin);
        let ef = total_energy(&free);
        let p2: f64 = kin.iter().map(|x| x * x).sum();
        let s_err = (ef * ef - e0 * e0 - c * c * p2).abs() / (ef * ef);
        w_rt = w_rt.max(rt);
        w_g = w_g.max(g_err);
        w_l = w_l.max(l_err);
        w_s = w_s.max(s_err);
        table.push(vec![
            i.to_string(),
            f(speed),
            f(gamma),
            f(energy),
            f(rt),
            f(g_err),
            f(l_err),
            f(s_err),
        ]);
    }
    ctx.csv("kinematics.csv", &table)?;
    ctx.json(
        "kinematics.json",
        json!({
            "command": "kinematics",
            "seed": ctx.seed,
            "samples": section.samples,
            "max_roundtrip_error": w_rt,
            "max_gamma_error": w_g,
            "max_legendre_error": w_l,
            "max_shell_error": w_s,
        }),
    )
}

fn collect(plan: &EvolvePlan) -> CliResult<Vec<Snapshot>> {
    evolve(&plan.spec, &plan.initial, &plan.config).at("evolve")
}

pub(crate) fn compare_cmd(ctx: &mut Ctx) -> CliResult<Value> {
    let sc = ctx.scenario;
    let section = sc.section(&sc.raw.compare, "compare")?;
    let load = |p: &PathBuf, key: &str| -> CliResult<Scenario> {
        let path = sc.base_dir.join(p);
        Scenario::load(&path).map_err(|e| match e {
            CliError::Validation { key: k, message } => CliError::validation(format!("{key}:{k}"), message),
            other => other,
        })
    };
    let sa = load(&section.a, "compare.a")?;
    let sb = load(&section.b, "compare.b")?;
    let pa = plan_evolve(&sa, 0)?;
    let pb = plan_evolve(&sb, 0)?;
    if pa.grid != pb.grid {
        return Err(CliError::validation("compare", "the two scenarios use different grids"));
    }
    let (na, da) = pa.config.schedule();
    let (nb, db) = pb.config.schedule();
    if na != nb || (da - db).abs() > 1e-12 * da || pa.config.snapshot_stride != pb.config.snapshot_stride {
        return Err(CliError::validation(
            "compare",
            "the two scenarios must share dt, t_end and snapshot_stride",
        ));
    }
    let basis = if section.population_states > 0 {
        Some(stationary_basis(&pa.spec, &pa.grid, section.population_states, "compare.population_states")?)
    } else {
        None
    };

    let (ra, rb) = thread::scope(|s| {
        let ha = s.spawn(|| collect(&pa));
        let hb = s.spawn(|| collect(&pb));
        (ha.join().expect("run a panicked"), hb.join().expect("run b panicked"))
    });
    let (a, b) = (ra?, rb?);
    let report = compare_runs(&a, &b, basis.as_ref()).at("compare")?;
    let (sa_stats, sb_stats) = (packet_stats(&a), packet_stats(&b));

    let mut table = CsvTable::new(&["t", "l2_distance", "centroid_a", "centroid_b", "width_a", "width_b"]);
    for i in 0..a.len() {
        let d = a[i].psi.distance(&b[i].psi).at("compare")?;
        table.push(vec![
            f(a[i].t),
            f(d),
            f(sa_stats.centroid[i]),
            f(sb_stats.centroid[i]),
            f(sa_stats.width[i]),
            f(sb_stats.width[i]),
        ]);
    }
    ctx.csv("compare.csv", &table)?;
    let run = |s: &Scenario, p: &EvolvePlan, st: &PacketStats, snaps: &[Snapshot]| {
        let energy: Vec<f64> = snaps.iter().map(|s| s.diagnostics.energy).collect();
        json!({
            "scenario": s.name(),
            "scenario_sha256": s.provenance.sha256,
            "family": p.spec.family().name(),
            "width_growth": st.width_growth(),
            "mean_speed": st.mean_speed(),
            "energy_drift": Tracker::relative_drift(&energy),
        })
    };
    ctx.json(
        "compare.json",
        json!({
            "command": "compare",
            "a": run(&sa, &pa, &sa_stats, &a),
            "b": run(&sb, &pb, &sb_stats, &b),
            "samples": report.samples,
            "max_l2_distance": report.max_l2_distance,
            "max_population_distance": report.max_population_distance,
            "width_growth_a": report.width_growth_a,
            "width_growth_b": report.width_growth_b,
            "width_growth_divergence": report.width_growth_divergence,
        }),
    )
}

