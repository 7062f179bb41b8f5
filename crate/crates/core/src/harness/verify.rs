use rayon::prelude::*;

use crate::detectors::{brute_force_ml, sphere_decode, RadiusPolicy};
use crate::error::Result;
use crate::model::{rho_from_total_db, ChannelSpec, ModulationKind, ModulationSpec};
use crate::numerics::Rng;

/// One system of the oracle-equivalence suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyCase {
    pub l: usize,
    pub k: usize,
    pub modulation: ModulationSpec,
    pub snr_total_db: f64,
}

impl VerifyCase {
    /// 4×4 BPSK, 4×4 4-QAM and 2×2 16-QAM over the standard SNR points.
    pub fn standard_suite() -> Vec<VerifyCase> {
        let systems = [
            (4, 4, ModulationSpec::new(ModulationKind::Pam, 2)),
            (4, 4, ModulationSpec::new(ModulationKind::Qam, 4)),
            (2, 2, ModulationSpec::new(ModulationKind::Qam, 16)),
        ];
        let mut out = Vec::new();
        for (l, k, modulation) in systems {
            for snr_total_db in [-8.0, 0.0, 8.0, 16.0, 24.0, 34.0] {
                out.push(VerifyCase {
                    l,
                    k,
                    modulation,
                    snr_total_db,
                });
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        format!(
            "{}x{} {}-{} at {} dB",
            self.l, self.k, self.modulation.order, self.modulation.kind, self.snr_total_db
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub case: VerifyCase,
    pub trials: u64,
    /// Trials where the Fincke-Pohst decision equals brute force.
    pub fp_matches: u64,
    pub se_matches: u64,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.fp_matches == self.trials && self.se_matches == self.trials
    }
}

/// Compares both sphere decoders against exhaustive search on `trials`
/// random instances per case.
pub fn verify_oracles(cases: &[VerifyCase], trials: u64, seed: u64) -> Result<Vec<VerifyOutcome>> {
    let root = Rng::new(seed);
    let (fp, se) = (
        RadiusPolicy::fincke_pohst(),
        RadiusPolicy::schnorr_euchner(),
    );
    cases
        .iter()
        .enumerate()
        .map(|(c, case)| {
            let channel = ChannelSpec::Flat {
                l: case.l,
                k: case.k,
            };
            let constellation = case.modulation.build()?;
            let rho = rho_from_total_db(case.snr_total_db, case.k);
            let (fp_matches, se_matches) = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<(u64, u64)> {
                    let mut rng = root.derive(&[c as u64, t]);
                    let (model, _) = channel.draw_instance(&constellation, rho, &mut rng)?;
                    let ml = brute_force_ml(&model)?.s_hat;
                    let a = sphere_decode(&model, &fp, None)?.s_hat == ml;
                    let b = sphere_decode(&model, &se, None)?.s_hat == ml;
                    Ok((u64::from(a), u64::from(b)))
                })
                .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
            Ok(VerifyOutcome {
                case: *case,
                trials,
                fp_matches,
                se_matches,
            })
        })
        .collect()
}
