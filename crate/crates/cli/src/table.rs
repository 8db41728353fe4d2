//! `table`: weight columns and existence horizons as CSV.

use osc_core::weights::horizons::{horizon_tomega, horizon_tstar, HorizonInput, Saturation};
use osc_core::weights::table::WeightTable;

use crate::config::{load_calibration, TableConfig};
use crate::error::{CliError, CliResult};
use crate::fmt_f64;

pub fn weights_csv(cfg: &TableConfig) -> CliResult<String> {
    Ok(WeightTable::build(cfg.t_min, cfg.t_max, cfg.points)?.to_csv())
}

fn saturation(s: Saturation) -> &'static str {
    match s {
        Saturation::Interior => "interior",
        Saturation::SaturatedHigh => "saturated_high",
        Saturation::SaturatedLow => "saturated_low",
    }
}

/// One row per data norm: `T*`, its closed form and saturation, then the
/// vorticity horizon for each configured `p`.
pub fn horizons_csv(cfg: &TableConfig) -> CliResult<String> {
    let constant = match cfg.constant {
        Some(c) => c,
        None => load_calibration(cfg.calibration.as_deref())?.0.iteration_constant,
    };
    if cfg.data_norms.is_empty() {
        return Err(CliError::Config("data_norms is empty".into()));
    }
    let mut out = String::from("data_norm,forcing_level,constant,t_star,t_star_closed_form,t_star_saturation");
    for p in &cfg.p_values {
        out.push_str(&format!(",t_omega_p{p}"));
    }
    out.push('\n');
    for &a in &cfg.data_norms {
        let h = horizon_tstar(&HorizonInput::velocity(a, cfg.forcing_level, constant))?;
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            fmt_f64(a),
            fmt_f64(cfg.forcing_level),
            fmt_f64(constant),
            fmt_f64(h.t),
            fmt_f64(h.closed_form),
            saturation(h.saturation)
        ));
        for &p in &cfg.p_values {
            let w = horizon_tomega(&HorizonInput::vorticity(a, cfg.forcing_level, constant, p))?;
            out.push_str(&format!(",{}", fmt_f64(w.t)));
        }
        out.push('\n');
    }
    Ok(out)
}
