//! The shipped decay-profile battery: ten profiles spanning the zero
//! profile, cutoff power laws for several exponents, clustered
//! fast-decay profiles with an active f(0) starting condition, truncated
//! exponentials, and a dilation pair.

use super::profile::DecayProfile;

/// Named profile plus the exponent alpha to certify it with. The
/// H-constant is found by the exhaustive sample-grid scan.
pub struct BatteryEntry {
    pub name: &'static str,
    pub profile: DecayProfile,
    pub alpha: f64,
}

fn cutoff_profile(cap: f64, inv_alpha: f64, step: f64) -> DecayProfile {
    let count = ((cap + 3.0 * step) / step).ceil() as usize;
    let samples: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let s = i as f64 * step;
            (s, (cap - s).max(0.0).powf(inv_alpha))
        })
        .collect();
    DecayProfile::new(samples).expect("cutoff profiles are valid")
}

fn clustered_profile(scale: f64) -> DecayProfile {
    // interval widths track the value, which keeps the scanned H constant
    // at order one and activates the f(0) form of the tail bound
    let values = [0.1 * scale, 0.01 * scale, 1e-4 * scale, 1e-8 * scale, 0.0];
    let mut samples = Vec::new();
    let mut s = 0.0;
    for (i, &v) in values.iter().enumerate() {
        samples.push((s, v));
        if i + 1 < values.len() {
            s += (values[i] / scale).max(1e-8);
        }
    }
    DecayProfile::new(samples).expect("clustered profiles are valid")
}

fn truncated_exp(c: f64, step: f64, cut: f64) -> DecayProfile {
    let count = (cut / step - 0.5).ceil() as usize;
    let mut samples: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let s = i as f64 * step;
            (s, c * (-s / c).exp())
        })
        .collect();
    samples.push((cut, 0.0));
    DecayProfile::new(samples).expect("truncated exponentials are valid")
}

/// Ten profiles exercising the decay engine.
pub fn shipped_profile_battery() -> Vec<BatteryEntry> {
    vec![
        BatteryEntry {
            name: "zero",
            profile: DecayProfile::new(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).unwrap(),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "linear_cutoff",
            profile: cutoff_profile(2.0, 1.0, 0.03),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "linear_cutoff_short",
            profile: cutoff_profile(0.8, 1.0, 0.02),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "quadratic_cutoff",
            profile: cutoff_profile(1.5, 2.0, 0.03),
            alpha: 0.5,
        },
        BatteryEntry {
            name: "sqrt_cutoff",
            profile: cutoff_profile(1.2, 0.5, 0.02),
            alpha: 2.0,
        },
        BatteryEntry {
            name: "remarks_fast",
            profile: clustered_profile(1.0),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "remarks_fast_dilated",
            profile: clustered_profile(3.0),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "trunc_exp_dense",
            profile: truncated_exp(0.35, 0.05, 6.0),
            alpha: 1.0,
        },
        BatteryEntry {
            name: "trunc_exp_coarse",
            profile: truncated_exp(0.5, 0.125, 5.0),
            alpha: 0.5,
        },
        BatteryEntry {
            name: "staircase",
            profile: DecayProfile::new(vec![
                (0.0, 0.5),
                (0.6, 0.2),
                (0.9, 0.05),
                (1.05, 0.004),
                (1.1, 0.0),
            ])
            .unwrap(),
            alpha: 1.0,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{decay_iterate, scan_h_constant, verify_h_alpha_b};

    #[test]
    fn battery_has_ten_entries_with_required_members() {
        let battery = shipped_profile_battery();
        assert_eq!(battery.len(), 10);
        assert!(battery.iter().any(|e| e.name == "zero"));
        // at least one entry activates the f(0) form of the bound
        let mut f0_active = 0;
        for entry in &battery {
            if entry.profile.first_value() == 0.0 {
                continue;
            }
            let b = scan_h_constant(&entry.profile, entry.alpha).unwrap() * 1.0001;
            if entry.profile.first_value().powf(entry.alpha) < 1.0 / (2.0 * b) {
                f0_active += 1;
            }
        }
        assert!(f0_active >= 1, "no Remarks-style entry in the battery");
    }

    #[test]
    fn every_battery_entry_passes_the_decay_engine() {
        for entry in shipped_profile_battery() {
            let b = match scan_h_constant(&entry.profile, entry.alpha) {
                Some(b) if b > 0.0 => b * 1.0001,
                _ => 1.0,
            };
            let cert = verify_h_alpha_b(&entry.profile, entry.alpha, b);
            assert!(cert.ok, "{}: H(alpha,B) fails", entry.name);
            let report = decay_iterate(&entry.profile, entry.alpha, b)
                .unwrap_or_else(|e| panic!("{}: {e}", entry.name));
            assert!(report.bound_check, "{}: {report:?}", entry.name);
            assert!(report.zero_beyond, "{}", entry.name);
            assert!(report.unit_steps, "{}", entry.name);
        }
    }
}
