//! Fixtures shared by the benchmarks.

use rlwe_forge::attacks::{reduce_samples, ReducedSamples};
use rlwe_forge::rlwe::{FieldGeometry, InstanceParams, RlweInstance, RlweSample};
use rlwe_forge::{ResidueContext, SubgroupDescriptor};

/// The n = 12 field Q(zeta_21) with q = 13 (residue degree 2).
pub struct Fixture {
    pub instance: RlweInstance,
    pub ctx: ResidueContext,
    pub samples: Vec<RlweSample>,
    pub reduced: ReducedSamples,
}

pub fn fixture(count: usize) -> Fixture {
    let h = SubgroupDescriptor::new(21, &[1]).expect("valid subgroup");
    let geometry = FieldGeometry::build(&h).expect("geometry");
    let instance = RlweInstance::with_geometry(InstanceParams::subgroup(21, &[1], 13, 0.5, 1), geometry).expect("instance");
    let ctx = ResidueContext::build(&h, 13).expect("residue context");
    let samples = instance.generate_samples(count);
    let reduced = reduce_samples(&ctx, &samples, 1).expect("reduction");
    Fixture { instance, ctx, samples, reduced }
}
