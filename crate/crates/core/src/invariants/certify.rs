//! Checks that an invariant holds across fresh parameter draws.

use rayon::prelude::*;
use serde::Serialize;

use super::InvariantSpec;
use crate::channels::ChannelFamily;
use crate::error::{Error, Result};
use crate::operators::random_mixed_state;
use crate::rng::RngSeed;

#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub draws: usize,
    pub states: usize,
    pub tol: f64,
    /// States where a denominator factor is smaller than this are skipped.
    pub skip_floor: f64,
    pub seed: RngSeed,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            draws: 5,
            states: 20,
            tol: 1e-7,
            skip_floor: 1e-6,
            seed: RngSeed::new(0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificationReport {
    pub invariant: InvariantSpec,
    pub draws: usize,
    pub states: usize,
    pub max_relative_drift: f64,
    pub certified: bool,
    /// Every evaluation was skipped.
    pub inconclusive: bool,
    pub skipped_states: usize,
    pub evaluated: usize,
    pub tol: f64,
}

const DRIFT_FLOOR: f64 = 1e-6;

/// Evaluates `inv` before and after the channel for `states` random mixed
/// states at each of `draws` parameter draws. Cell `(k, t)` uses its own
/// substream, so the result does not depend on scheduling.
pub fn certify_invariant(fam: &ChannelFamily, inv: &InvariantSpec, opts: &CertifyOptions) -> Result<CertificationReport> {
    if inv.dim() != fam.dim {
        return Err(Error::DimensionMismatch {
            left: fam.dim,
            right: inv.dim(),
        });
    }
    let channels = (0..opts.draws)
        .map(|k| fam.sample(&mut opts.seed.derive(1, k as u64).rng()))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..opts.draws)
        .flat_map(|k| (0..opts.states).map(move |t| (k, t)))
        .collect();
    let outcomes = cells
        .par_iter()
        .map(|&(k, t)| -> Result<Option<f64>> {
            let rho = random_mixed_state(fam.dim, opts.seed.derive(2, (k * opts.states + t) as u64))?;
            let after = channels[k].apply(&rho)?;
            let before_f = inv.factors(&rho)?;
            let after_f = inv.factors(&after)?;
            let small = inv
                .denominators()
                .any(|i| before_f[i].norm() < opts.skip_floor || after_f[i].norm() < opts.skip_floor);
            if small {
                return Ok(None);
            }
            let before = inv.combine(&before_f)?;
            let after = inv.combine(&after_f)?;
            Ok(Some((after - before).norm() / before.norm().max(DRIFT_FLOOR)))
        })
        .collect::<Result<Vec<_>>>()?;
    let drifts: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let skipped = outcomes.len() - drifts.len();
    let max_relative_drift = drifts.iter().copied().fold(0.0, f64::max);
    let inconclusive = drifts.is_empty();
    Ok(CertificationReport {
        invariant: inv.clone(),
        draws: opts.draws,
        states: opts.states,
        max_relative_drift: if inconclusive { f64::NAN } else { max_relative_drift },
        certified: !inconclusive && max_relative_drift <= opts.tol,
        inconclusive,
        skipped_states: skipped,
        evaluated: drifts.len(),
        tol: opts.tol,
    })
}
