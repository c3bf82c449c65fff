//! Sampled supremum of `|W(ξ∘γ)|` over a grid of isometries.

use liouville::engine::{seminorm, Deformation, DistributionHandle, EvalParams, GammaSampler};
use liouville::families::{CyclicFuchsianGroup, HolomorphicQCFamily};
use liouville::holder::HolderFunction;
use liouville::projective::{GeodesicBox, C64};

fn main() -> liouville::error::Result<()> {
    let b = GeodesicBox::from_reals(1.0, 1.5, 3.0, 4.0)?;
    let xi = HolderFunction::bump(&b, 1.0)?;
    let fam = HolomorphicQCFamily::power_stretch(1.5)?;
    let group = CyclicFuchsianGroup::new(2.0)?;
    let params = EvalParams::default().with_tolerance(1e-5);

    for m in [4, 8] {
        let sampler = GammaSampler::new(m)?;
        for deformation in [Deformation::Identity, Deformation::Family { fam: fam.clone(), t: C64::new(0.0, 0.1) }] {
            let label = match &deformation {
                Deformation::Identity => "identity".to_string(),
                Deformation::Family { t, .. } => format!("power t = {t}"),
            };
            let handle = DistributionHandle::new(deformation, Some(group), params)?;
            let rep = seminorm(&handle, &xi, &sampler)?;
            println!("m = {m}, {label}: sup = {:.6} over {} samples ({} failed)", rep.value, rep.entries.len(), rep.failures);
        }
    }
    Ok(())
}
