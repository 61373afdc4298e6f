//! One preset per results figure. Curve presets are ordinary run configs;
//! fig2 and parts of fig5 and fig8 emit reduction profiles and density
//! matrices instead.

use std::path::Path;
use std::time::Instant;

use fockmeas::hilbert::density_view;
use fockmeas::kernel::{SystemParams, TwoModeParams};
use fockmeas::metrics::{excited_reduction_profile, two_mode_reduction_profile};
use fockmeas::protocol::run_postselected_multi;
use fockmeas::schedule::{build_schedule, prepare, tau_bell, tau_excited, Prepared};
use serde::Serialize;

use crate::config::{Mode, RunConfig, SignConfig, StrategyConfig, TargetConfig};
use crate::error::{CliError, Result};
use crate::output::{csv_table, fmt_sig, write_artifacts, Artifact};
use crate::runner::{run, Manifest};

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", "reduction factors |λ_k^(e)|^{2N} around |5⟩ for N = 1, 5 and l = 1, 2, 3"),
    ("fig2b", "reduction factors |λ_k^(e)|^{2N} around |10⟩ for N = 1, 5 and l = 1, 2, 3"),
    ("fig3", "|5⟩ and |10⟩ under the uniform strategy, S_2^(5) and S_3^(5)"),
    ("fig4", "Fock states n = 2, 4, 6, 8, 10 under S_3^(5)"),
    ("fig5", "(|0⟩ ± |5⟩)/√2 under uniform and S_3^(5), with density matrices at N = 10, 11"),
    ("fig7", "(|0⟩ + |n⟩)/√2 for n = 2, 4, 6, 8 under S_3^(5)"),
    ("fig8", "(|00⟩ ± |44⟩)/√2 under uniform and S_3^(5,15), with 2D reduction factors"),
    ("fig9", "(|00⟩ + |nn⟩)/√2 for n = 1, 3, 5 under S_3^(5,8) and n = 5 under S_3^(5,15)"),
];

pub fn list_presets() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetRun {
    pub file: String,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub artifacts: Vec<Artifact>,
    pub runs: Vec<PresetRun>,
}

fn with(target: TargetConfig, strategy: StrategyConfig, cycles: usize) -> RunConfig {
    RunConfig {
        strategy,
        cycles,
        mode: Mode::Postselected,
        ..RunConfig::minimal(target)
    }
}

fn superposed(n: usize) -> TargetConfig {
    TargetConfig::Superposed {
        n,
        c0: std::f64::consts::FRAC_1_SQRT_2,
        cn: std::f64::consts::FRAC_1_SQRT_2,
        sign: SignConfig::Plus,
    }
}

fn bell(n: usize) -> TargetConfig {
    TargetConfig::Bell {
        m: n,
        n,
        c00: std::f64::consts::FRAC_1_SQRT_2,
        cmn: std::f64::consts::FRAC_1_SQRT_2,
        sign: SignConfig::Plus,
    }
}

fn hybrid(l: usize, q: usize) -> StrategyConfig {
    StrategyConfig::Hybrid { l, q }
}

fn swap(l: usize, q: usize, switch_after: usize) -> StrategyConfig {
    StrategyConfig::HybridTwoMode {
        l,
        q,
        switch_after,
        after: None,
    }
}

/// Named run configs behind the curve files of a preset.
pub fn preset_configs(name: &str) -> Result<Vec<(String, RunConfig)>> {
    let u = StrategyConfig::Uniform;
    let configs = match name {
        "fig2a" | "fig2b" => vec![],
        "fig3" => {
            let mut v = Vec::new();
            for n in [5, 10] {
                for (tag, s) in [("uniform", u), ("S2_5", hybrid(2, 5)), ("S3_5", hybrid(3, 5))] {
                    v.push((format!("fig3_fock{n}_{tag}"), with(TargetConfig::Fock(n), s, 30)));
                }
            }
            v
        }
        "fig4" => [2, 4, 6, 8, 10]
            .into_iter()
            .map(|n| (format!("fig4_fock{n}_S3_5"), with(TargetConfig::Fock(n), hybrid(3, 5), 40)))
            .collect(),
        "fig5" => vec![
            ("fig5_superposed5_uniform".into(), with(superposed(5), u, 20)),
            ("fig5_superposed5_S3_5".into(), with(superposed(5), hybrid(3, 5), 20)),
        ],
        "fig7" => [2, 4, 6, 8]
            .into_iter()
            .map(|n| (format!("fig7_superposed{n}_S3_5"), with(superposed(n), hybrid(3, 5), 40)))
            .collect(),
        "fig8" => vec![
            ("fig8_bell4_uniform".into(), with(bell(4), u, 30)),
            ("fig8_bell4_S3_5_15".into(), with(bell(4), swap(3, 5, 15), 30)),
        ],
        "fig9" => vec![
            ("fig9_bell1_S3_5_8".into(), with(bell(1), swap(3, 5, 8), 40)),
            ("fig9_bell3_S3_5_8".into(), with(bell(3), swap(3, 5, 8), 40)),
            ("fig9_bell5_S3_5_8".into(), with(bell(5), swap(3, 5, 8), 40)),
            ("fig9_bell5_S3_5_15".into(), with(bell(5), swap(3, 5, 15), 40)),
        ],
        other => return Err(CliError::UnknownPreset(other.into())),
    };
    Ok(configs)
}

fn fock_profiles(name: &str, n: usize, k_max: usize) -> Artifact {
    let p = SystemParams::default();
    let base = tau_excited(n, 1, &p).expect("n >= 0 has a period");
    let columns: Vec<Vec<f64>> = [(1, 1), (5, 1), (5, 2), (5, 3)]
        .iter()
        .map(|&(cycles, l)| excited_reduction_profile(base * l as f64, &p, cycles, k_max + 1))
        .collect();
    let rows = (0..=k_max).map(|k| {
        let mut row = vec![k.to_string()];
        row.extend(columns.iter().map(|c| fmt_sig(c[k])));
        row
    });
    Artifact {
        name: format!("{name}_reduction.csv"),
        contents: csv_table(&["k", "N1_l1", "N5_l1", "N5_l2", "N5_l3"], rows),
    }
}

fn bell_profiles() -> Vec<Artifact> {
    let k_max = 40;
    let slow_fast = TwoModeParams::resonant(0.03, 0.05);
    let fast_slow = TwoModeParams::resonant(0.05, 0.03);
    [("a", slow_fast, 1), ("b", fast_slow, 1), ("c", slow_fast, 3), ("d", fast_slow, 3)]
        .into_iter()
        .map(|(panel, p, l)| {
            let tau = tau_bell(4, 4, l, &p).expect("nonzero target");
            let f = two_mode_reduction_profile(tau, &p, 5, (k_max + 1, k_max + 1));
            let rows = (0..=k_max).flat_map(|k| {
                let f = &f;
                (0..=k_max).map(move |kp| vec![k.to_string(), kp.to_string(), fmt_sig(f[k * (k_max + 1) + kp])])
            });
            Artifact {
                name: format!("fig8_reduction_{panel}.csv"),
                contents: csv_table(&["k", "kp", "factor"], rows),
            }
        })
        .collect()
}

fn density_matrices(configs: &[(String, RunConfig)]) -> Result<Vec<Artifact>> {
    let mut out = Vec::new();
    for (stem, config) in configs {
        let target = config.target_spec()?;
        let schedule = build_schedule(&target, &config.strategy_spec(), &config.couplings())?;
        let Prepared::Single { initial, targets } = prepare(&target, config.truncation_dims())? else {
            unreachable!("fig5 targets are single-mode")
        };
        let record = run_postselected_multi(&initial, &schedule, &targets, true)?;
        for cycles in [10, 11] {
            let state = record.at(cycles).snapshot.as_ref().expect("snapshots requested");
            let view = density_view(state);
            let dim = view.dim();
            let rows = (0..dim).flat_map(|k| {
                let view = &view;
                (0..dim).map(move |kp| {
                    let e = view.element(k, kp);
                    vec![k.to_string(), kp.to_string(), fmt_sig(e.re), fmt_sig(e.im)]
                })
            });
            let strategy = stem.rsplit_once("superposed5_").map(|(_, s)| s).unwrap_or(stem);
            out.push(Artifact {
                name: format!("fig5_density_{strategy}_N{cycles}.csv"),
                contents: csv_table(&["k", "kp", "re", "im"], rows),
            });
        }
    }
    Ok(out)
}

/// Evaluates every file of a preset in memory.
pub fn run_preset(name: &str) -> Result<PresetOutput> {
    let configs = preset_configs(name)?;
    let mut artifacts = Vec::new();
    let mut runs = Vec::new();
    for (stem, config) in &configs {
        let out = run(config)?;
        let file = format!("{stem}.csv");
        let curve = out.artifacts.into_iter().next().expect("curve artifact");
        artifacts.push(Artifact {
            name: file.clone(),
            contents: curve.contents,
        });
        runs.push(PresetRun {
            file,
            config: config.clone(),
        });
    }
    match name {
        "fig2a" => artifacts.push(fock_profiles(name, 5, 60)),
        "fig2b" => artifacts.push(fock_profiles(name, 10, 120)),
        "fig5" => artifacts.extend(density_matrices(&configs)?),
        "fig8" => artifacts.extend(bell_profiles()),
        _ => {}
    }
    Ok(PresetOutput { artifacts, runs })
}

#[derive(Debug, Clone, Serialize)]
struct PresetManifest {
    #[serde(flatten)]
    base: Manifest,
    runs: Vec<PresetRun>,
}

/// Runs a preset and writes its files and a manifest into `dir`.
pub fn preset_to_dir(name: &str, dir: &Path) -> Result<Vec<String>> {
    let started = Instant::now();
    let out = run_preset(name)?;
    write_artifacts(dir, &out.artifacts)?;
    let mut base = Manifest::new(None, &out.artifacts, started);
    base.preset = Some(name.to_string());
    let manifest = PresetManifest { base, runs: out.runs };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_artifacts(
        dir,
        &[Artifact {
            name: format!("{name}_manifest.json"),
            contents: text,
        }],
    )?;
    Ok(out.artifacts.into_iter().map(|a| a.name).collect())
}
