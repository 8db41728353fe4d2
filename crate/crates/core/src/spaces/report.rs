use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spaces::besov::{besov_from_blocks, BesovIndex};
use crate::spaces::bmo::bmo_of_values;
use crate::spaces::littlewood_paley::lp_decompose;
use crate::spaces::lp::{lp_of_values, magnitudes};
use crate::spectral::SpectralField;
use crate::weights::phi1;

/// All monitored norms of one field at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub t: f64,
    /// `(p, ‖f‖_{L^p})` for each requested finite `p`.
    pub lp: Vec<(f64, f64)>,
    pub linf: f64,
    pub bmo: f64,
    pub bmo_global: f64,
    /// `B⁰_{∞,∞}` (inhomogeneous).
    pub besov_0_inf_inf: f64,
    /// `Ḃ¹_{∞,1}`.
    pub besov_hom_1_inf_1: f64,
    /// `Ḃ⁰_{∞,∞}`.
    pub besov_hom_0_inf_inf: f64,
    /// `φ₁(t)·‖f‖_∞`.
    pub weighted_linf: f64,
    /// `t^{1/2}·‖f‖_{Ḃ¹_{∞,1}}`.
    pub weighted_besov: f64,
    /// The homogeneous norms dropped a nonzero mean.
    pub mean_excluded: bool,
}

pub const CSV_HEADER: &str = "t,linf,bmo,bmo_global,besov_0_inf_inf,besov_hom_1_inf_1,besov_hom_0_inf_inf,weighted_linf,weighted_besov,mean_excluded";

impl NormReport {
    pub fn compute(f: &SpectralField, t: f64, p_list: &[f64]) -> Result<Self> {
        let g = *f.grid();
        let vals = f.to_real_values();
        let mags = magnitudes(&vals);
        let linf = lp_of_values(&g, &mags, f64::INFINITY)?;
        let lp = p_list
            .iter()
            .map(|&p| Ok((p, lp_of_values(&g, &mags, p)?)))
            .collect::<Result<Vec<_>>>()?;
        let inf = f64::INFINITY;
        let inh = lp_decompose(f, false);
        let hom = lp_decompose(f, true);
        let besov_0_inf_inf = besov_from_blocks(&inh, BesovIndex::new(0.0, inf, inf)?)?;
        let besov_hom_1_inf_1 = besov_from_blocks(&hom, BesovIndex::new(1.0, inf, 1.0)?)?;
        let besov_hom_0_inf_inf = besov_from_blocks(&hom, BesovIndex::new(0.0, inf, inf)?)?;
        Ok(NormReport {
            t,
            lp,
            linf,
            bmo: bmo_of_values(&g, &vals, true),
            bmo_global: bmo_of_values(&g, &vals, false),
            besov_0_inf_inf,
            besov_hom_1_inf_1,
            besov_hom_0_inf_inf,
            weighted_linf: if t > 0.0 { phi1(t) * linf } else { 0.0 },
            weighted_besov: t.max(0.0).sqrt() * besov_hom_1_inf_1,
            mean_excluded: hom.mean_excluded,
        })
    }

    /// Header matching [`NormReport::csv_row`]: the fixed columns followed by
    /// one `lp_<p>` column per requested exponent.
    pub fn csv_header(p_list: &[f64]) -> String {
        let mut h = CSV_HEADER.to_string();
        for p in p_list {
            h.push_str(&format!(",lp_{p}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.t,
            self.linf,
            self.bmo,
            self.bmo_global,
            self.besov_0_inf_inf,
            self.besov_hom_1_inf_1,
            self.besov_hom_0_inf_inf,
            self.weighted_linf,
            self.weighted_besov,
            self.mean_excluded
        );
        for (_, v) in &self.lp {
            row.push_str(&format!(",{v:.16e}"));
        }
        row
    }

    pub fn all_finite_nonnegative(&self) -> bool {
        let mut vals = vec![
            self.linf,
            self.bmo,
            self.bmo_global,
            self.besov_0_inf_inf,
            self.besov_hom_1_inf_1,
            self.besov_hom_0_inf_inf,
            self.weighted_linf,
            self.weighted_besov,
        ];
        vals.extend(self.lp.iter().map(|(_, v)| *v));
        vals.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}
