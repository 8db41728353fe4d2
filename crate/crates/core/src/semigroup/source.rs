use crate::error::{OscError, Result};
use crate::spectral::{Grid, SpectralField};

/// Time-indexed field supplier for Duhamel integrals.
pub trait SourceProvider: Sync {
    fn grid(&self) -> Grid;
    fn components(&self) -> usize;
    fn eval(&self, s: f64) -> Result<SpectralField>;
}

/// Source given by stored snapshots, linear in time between them.
#[derive(Debug, Clone)]
pub struct SnapshotSource {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl SnapshotSource {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(OscError::ShapeMismatch("snapshot times and fields differ in count".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(OscError::InvalidParameter("snapshot times must increase".into()));
        }
        for f in &fields[1..] {
            fields[0].check_compatible(f)?;
        }
        Ok(SnapshotSource { times, fields })
    }
}

impl SourceProvider for SnapshotSource {
    fn grid(&self) -> Grid {
        *self.fields[0].grid()
    }

    fn components(&self) -> usize {
        self.fields[0].components()
    }

    fn eval(&self, s: f64) -> Result<SpectralField> {
        let n = self.times.len();
        if s < self.times[0] - 1e-14 || s > self.times[n - 1] + 1e-14 {
            return Err(OscError::InvalidParameter(format!("source time {s} outside snapshots")));
        }
        if n == 1 {
            return Ok(self.fields[0].clone());
        }
        let k = self.times.partition_point(|&t| t <= s).clamp(1, n - 1);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = ((s - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.fields[k - 1].scale(1.0 - w).axpy(w, &self.fields[k])
    }
}
