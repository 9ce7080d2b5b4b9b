use std::collections::HashMap;
use std::sync::Mutex;

use super::{s_energy_sweep_with, EnergyResult, KernelChoice};
use crate::error::Result;
use crate::geometry::PointSet;

/// Memoizes energies by `(content hash, s)` so repeated sweeps and bound
/// checks over the same point set only pay for new exponents.
#[derive(Debug, Default)]
pub struct EnergyCache {
    entries: Mutex<HashMap<(String, u64), EnergyResult>>,
    kernel: KernelChoice,
}

impl EnergyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_kernel(kernel: KernelChoice) -> Self {
        Self {
            entries: Mutex::default(),
            kernel,
        }
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<(String, u64), EnergyResult>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Energies of `ps` at every `s`, computing only the exponents not yet cached.
    pub fn sweep(&self, ps: &PointSet, s_values: &[f64]) -> Result<Vec<EnergyResult>> {
        let hash = ps.content_hash();
        let missing: Vec<f64> = {
            let entries = self.lock();
            let mut m: Vec<f64> = s_values
                .iter()
                .copied()
                .filter(|s| !entries.contains_key(&(hash.clone(), s.to_bits())))
                .collect();
            m.dedup_by(|a, b| a.to_bits() == b.to_bits());
            m
        };
        if !missing.is_empty() {
            let fresh = s_energy_sweep_with(ps, &missing, self.kernel)?;
            let mut entries = self.lock();
            for r in fresh {
                entries.insert((hash.clone(), r.s.to_bits()), r);
            }
        }
        let entries = self.lock();
        Ok(s_values
            .iter()
            .map(|s| entries[&(hash.clone(), s.to_bits())].clone())
            .collect())
    }

    pub fn energy(&self, ps: &PointSet, s: f64) -> Result<EnergyResult> {
        Ok(self.sweep(ps, &[s])?.remove(0))
    }
}
