use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use gsd_core::distill::{captured_levels, DistillationPlan, EnergySource, MatrixExport};
use gsd_core::ipea::{run_ipea_with, Refinement};
use gsd_core::model::{build_hamiltonian, build_trial_state, diagonalize, TrialParams};
use gsd_core::noise::{jitter_j, noisy_pipeline_with};
use gsd_core::pea::{compute_spectrum, peak_uncertainty, sample_series};
use gsd_core::pulsec::{
    compile_controlled_evolution, compile_state_prep, parse_program, program_duration, program_unitary,
    refine_state_prep_angles, state_prep_fidelity, verify_equivalence, PrepAngles,
};
use gsd_core::qcore::expm_hermitian;
use gsd_core::{Params, Program, State};

use crate::config::RunConfig;

/// Minimum state-preparation fidelity accepted by `compile`.
const PREP_FIDELITY_MIN: f64 = 0.999;

pub struct Run<'a> {
    pub config: &'a RunConfig,
    pub out: PathBuf,
}

fn tag(p: &Params) -> String {
    format!("h{:.4}", p.h)
}

fn energy_pair(p: &Params, energy_j: f64) -> Value {
    json!({ "energy_J": energy_j, "energy_2piJ": p.to_two_pi_j(energy_j) })
}

impl Run<'_> {
    pub fn new(config: &RunConfig, out: PathBuf) -> Result<Run<'_>> {
        config.validate()?;
        fs::create_dir_all(&out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Run { config, out })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    fn write_json<S: Serialize>(&self, name: &str, value: &S) -> Result<PathBuf> {
        self.write(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn trial(&self) -> State {
        match self.config.eigenstate {
            Some(label) => label.state(),
            None => build_trial_state(&TrialParams::optimal()),
        }
    }

    pub fn spectrum(&self) -> Result<Value> {
        let mut summary = Vec::new();
        for p in self.config.params()? {
            let h = build_hamiltonian(&p)?;
            let records = sample_series(&self.trial(), &h, self.config.grid.dt / p.j, self.config.grid.points)?;
            let spectrum = compute_spectrum(&records, p.j)?;
            let peaks: Vec<Value> = spectrum
                .peaks
                .iter()
                .map(|pk| {
                    json!({
                        "energy_2piJ": pk.energy,
                        "energy_J": p.from_two_pi_j(pk.energy),
                        "weight": pk.weight,
                        "uncertainty_2piJ": pk.uncertainty,
                    })
                })
                .collect();
            let doc = json!({
                "J": p.j,
                "h": p.h,
                "points": self.config.grid.points,
                "dt_J": self.config.grid.dt,
                "spacing_2piJ": spectrum.spacing,
                "ground_relative_uncertainty": peak_uncertainty(&spectrum).ok(),
                "peaks": peaks,
            });
            self.write(&format!("spectrum_{}.csv", tag(&p)), &spectrum.to_csv())?;
            self.write_json(&format!("peaks_{}.json", tag(&p)), &doc)?;
            let energies: Vec<String> = spectrum.peaks.iter().map(|pk| format!("{:+.5}", pk.energy)).collect();
            println!("spectrum h={:.4}: peaks at {} (2πJ)", p.h, energies.join(", "));
            summary.push(doc);
        }
        Ok(Value::Array(summary))
    }

    fn refine(&self, p: &Params) -> Result<(Vec<Refinement<f64>>, Params)> {
        let noise = self.config.noise_or_noiseless();
        let actual = jitter_j(p, noise.delta_j_rel, &mut noise.rng());
        Ok((run_ipea_with(&self.trial(), p, &actual, &self.config.ipea_config())?, actual))
    }

    pub fn ipea(&self) -> Result<Value> {
        let mut summary = Vec::new();
        for p in self.config.params()? {
            let (refs, actual) = self.refine(&p)?;
            let exact = diagonalize(&p)?;
            let mut lines = String::new();
            let mut table = Vec::new();
            println!("ipea h={:.4}:", p.h);
            for (k, r) in refs.iter().enumerate() {
                for rep in &r.reports {
                    let line = json!({
                        "eigenvalue": k,
                        "iteration": rep.iteration,
                        "scale": rep.scale,
                        "residual": rep.residual,
                        "digit": rep.digit,
                        "value_2piJ": rep.value,
                        "uncertainty_2piJ": 10f64.powi(-(rep.iteration as i32)),
                        "corrected": rep.corrected,
                    });
                    let _ = writeln!(lines, "{line}");
                }
                let nearest = exact
                    .energies()
                    .into_iter()
                    .map(|e| p.to_two_pi_j(e))
                    .min_by(|a, b| (a - r.value()).abs().total_cmp(&(b - r.value()).abs()))
                    .expect("four levels");
                let history: Vec<String> =
                    r.reports.iter().map(|rep| format!("{:+.*}", rep.iteration, rep.value)).collect();
                println!(
                    "  {}  value {:+.6} ± {:.1e} (2πJ)  energy {:+.6} J  exact {:+.7}  history {}",
                    r.estimate,
                    r.value(),
                    r.uncertainty(),
                    r.energy(p.j),
                    nearest,
                    history.join(" → ")
                );
                table.push(json!({
                    "digits": r.estimate.to_string(),
                    "value_2piJ": r.value(),
                    "energy_J": r.energy(p.j),
                    "uncertainty_2piJ": r.uncertainty(),
                    "exact_2piJ": nearest,
                    "relative_error": ((r.value() - nearest) / nearest).abs(),
                    "iterations": r.reports.iter().map(|rep| json!({
                        "iteration": rep.iteration,
                        "value_2piJ": rep.value,
                        "uncertainty_2piJ": 10f64.powi(-(rep.iteration as i32)),
                    })).collect::<Vec<_>>(),
                }));
            }
            self.write(&format!("ipea_{}.jsonl", tag(&p)), &lines)?;
            let doc = json!({ "J": p.j, "h": p.h, "actual_J": actual.j, "eigenvalues": table });
            self.write_json(&format!("ipea_{}.json", tag(&p)), &doc)?;
            summary.push(doc);
        }
        Ok(Value::Array(summary))
    }

    pub fn distill(&self) -> Result<Value> {
        let noise = self.config.noise_or_noiseless();
        let source = EnergySource::Measured(self.config.ipea_config());
        let mut summary = Vec::new();
        for p in self.config.params()? {
            let run = noisy_pipeline_with(&self.trial(), &p, &noise, &source)?;
            let t = tag(&p);
            self.write_json(&format!("final_state_{t}.json"), &MatrixExport::from_density(&run.final_state))?;
            self.write_json(&format!("projected_{t}.json"), &MatrixExport::from_density(&run.projected))?;
            self.write(&format!("weights_{t}.csv"), &run.report.weights_csv())?;
            let doc = json!({
                "J": p.j,
                "h": p.h,
                "actual_J": run.actual.j,
                "reference": energy_pair(&p, run.plan.e0),
                "tagged": energy_pair(&p, run.plan.e1),
                "tau": run.plan.tau,
                "controlled_evolution_s": run.duration,
                "probability": run.probability,
                "report": run.report,
            });
            self.write_json(&format!("report_{t}.json"), &doc)?;
            let weights: Vec<String> = run.report.weights.iter().map(|(l, w)| format!("{l}:{w:.4}")).collect();
            println!(
                "distill h={:.4}: fidelity {:.6} purity {:.6} projection {:.6} weights {}",
                p.h,
                run.report.fidelity,
                run.report.purity,
                run.report.projection,
                weights.join(" ")
            );
            summary.push(doc);
        }
        Ok(Value::Array(summary))
    }

    /// Writes `prog`, reads it back and checks it against `oracle` if one is given.
    fn emit_block(&self, name: &str, prog: &Program, oracle: Option<&gsd_core::Operator>) -> Result<(Value, bool)> {
        let text = prog.to_text()?;
        let file = format!("{name}.pulse");
        let path = self.write(&file, &text)?;
        let back: Program = parse_program(&fs::read_to_string(&path)?)?;
        let round_trip = back == *prog && back.to_text()? == text;
        let (verified, deviation) = match oracle {
            Some(o) => {
                let (eq, dev) = verify_equivalence(&program_unitary(prog)?, o)?;
                (eq, Some(dev))
            }
            None => (true, None),
        };
        let ok = verified && round_trip;
        let status = if ok { "ok" } else { "FAILED" };
        println!(
            "compile {name}: {} steps, {:.3} ms, deviation {}, round trip {round_trip}: {status}",
            prog.len(),
            program_duration(prog)? * 1e3,
            deviation.map_or("n/a".to_string(), |d| format!("{d:.1e}"))
        );
        Ok((
            json!({
                "name": name,
                "file": file,
                "steps": prog.len(),
                "duration_s": program_duration(prog)?,
                "max_deviation": deviation,
                "verified": verified,
                "round_trip": round_trip,
            }),
            ok,
        ))
    }

    pub fn compile(&self) -> Result<Value> {
        let mut blocks = Vec::new();
        let mut all_ok = true;

        let angles = refine_state_prep_angles::<f64>()?;
        let fidelity = state_prep_fidelity(&angles)?;
        let (block, ok) = self.emit_block("state_prep", &compile_state_prep(&angles), None)?;
        let prep_ok = ok && fidelity >= PREP_FIDELITY_MIN;
        all_ok &= prep_ok;
        blocks.push(block);
        println!("compile state_prep: fidelity {fidelity:.9} (minimum {PREP_FIDELITY_MIN})");

        for p in self.config.params()? {
            let h = build_hamiltonian(&p)?;
            let mut times = vec![("controlled_u", self.config.grid.dt / p.j)];
            let levels = captured_levels(&self.trial(), &p, &EnergySource::Exact)?;
            if let (Some(&e0), Some(&e1)) = (levels.first(), levels.last()) {
                if levels.len() > 1 {
                    times.push(("distill", DistillationPlan::new(e0, e1, p.j)?.tau));
                }
            }
            for (name, t) in times {
                let prog = compile_controlled_evolution(t, &p)?;
                let oracle = expm_hermitian(&h, t)?.controlled_by_last(1);
                let (mut block, ok) = self.emit_block(&format!("{name}_{}", tag(&p)), &prog, Some(&oracle))?;
                block["t"] = json!(t);
                block["h"] = json!(p.h);
                all_ok &= ok;
                blocks.push(block);
            }
        }
        let doc = json!({
            "state_prep": {
                "angles": angles,
                "fidelity": fidelity,
                "printed_angle_fidelity": state_prep_fidelity(&PrepAngles::<f64>::printed())?,
                "passed": prep_ok,
            },
            "blocks": blocks,
            "passed": all_ok,
        });
        self.write_json("compile_report.json", &doc)?;
        if !all_ok {
            bail!("pulse program verification failed; see {}", self.out.join("compile_report.json").display());
        }
        Ok(doc)
    }

    pub fn report(&self) -> Result<Value> {
        let config = RunConfig { output: None, ..self.config.clone() };
        let doc = json!({
            "config": config,
            "spectrum": self.spectrum()?,
            "ipea": self.ipea()?,
            "distill": self.distill()?,
            "compile": self.compile()?,
        });
        self.write_json("summary.json", &doc)?;
        Ok(doc)
    }
}

pub fn output_dir(config: &RunConfig) -> &Path {
    config.output.as_deref().unwrap_or(Path::new("out"))
}
