//! kind = decay_lemma: run the doubling-time engine over the shipped
//! profile battery or a profile loaded from CSV.

use super::{Emitter, Error, TableRow};
use crate::config::ExperimentConfig;
use ma_core::capacity::{
    decay_iterate, scan_h_constant, shipped_profile_battery, verify_h_alpha_b, DecayProfile,
};
use serde::Serialize;

#[derive(Serialize)]
struct ProfileOutcome {
    name: String,
    alpha: f64,
    b: f64,
    b_scanned: bool,
    grid_certified: bool,
    s0: f64,
    s_inf: f64,
    steps: usize,
    bound_check: bool,
    zero_beyond: bool,
    unit_steps: bool,
}

#[derive(Serialize)]
struct DecayPayload {
    profiles: Vec<ProfileOutcome>,
}

pub fn run(cfg: &ExperimentConfig, emitter: &mut Emitter<'_>) -> Result<(), Error> {
    let entries: Vec<(String, DecayProfile, f64)> = match &cfg.decay_profile {
        None => shipped_profile_battery()
            .into_iter()
            .map(|e| (e.name.to_string(), e.profile, e.alpha))
            .collect(),
        Some(path) => {
            let file = std::fs::File::open(path)?;
            let profile = DecayProfile::from_csv(std::io::BufReader::new(file))
                .map_err(Error::Config)?;
            vec![(
                path.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "profile".into()),
                profile,
                cfg.decay_alpha,
            )]
        }
    };

    let mut outcomes = Vec::new();
    for (name, profile, alpha) in entries {
        let (b, b_scanned) = match cfg.decay_b {
            Some(b) => (b, false),
            None => {
                let scanned = scan_h_constant(&profile, alpha)
                    .filter(|b| *b > 0.0)
                    .map(|b| b * 1.0001)
                    .unwrap_or(1.0);
                (scanned, true)
            }
        };
        let cert = verify_h_alpha_b(&profile, alpha, b);
        emitter.check(
            format!("h_certified_{name}"),
            cert.ok,
            format!("alpha = {alpha}, B = {b:.6e}"),
        );
        if !cert.ok {
            continue;
        }
        let report = decay_iterate(&profile, alpha, b)?;
        emitter.check(
            format!("bound_check_{name}"),
            report.bound_check,
            format!("S_inf = {:.6} vs s0 + 1/(1-2^-alpha)", report.s_inf),
        );
        emitter.check(
            format!("zero_beyond_{name}"),
            report.zero_beyond,
            "f vanishes at every sample past S_inf",
        );

        let mut csv = Vec::new();
        profile.to_csv(&mut csv)?;
        emitter.text(&format!("profile_{name}.csv"), &csv)?;

        outcomes.push(ProfileOutcome {
            name,
            alpha,
            b,
            b_scanned,
            grid_certified: cert.grid_certified,
            s0: report.s0,
            s_inf: report.s_inf,
            steps: report.s_sequence.len(),
            bound_check: report.bound_check,
            zero_beyond: report.zero_beyond,
            unit_steps: report.unit_steps,
        });
    }

    emitter.report(cfg, DecayPayload { profiles: outcomes }, Vec::<TableRow>::new())?;
    Ok(())
}
