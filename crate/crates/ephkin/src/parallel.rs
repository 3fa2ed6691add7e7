//! Multi-threaded rate evaluation.
//!
//! Channels are cut into a fixed number of contiguous chunks per worker.
//! Each chunk fills its own partial accumulator and the partials are merged
//! in chunk order, so a given worker count always produces the same bits.
//! Different worker counts agree with the serial evaluator to within
//! reduction-order roundoff, about `1e-13` relative to the flux scale.

use ephkin_core::{
    CollisionRates, KineticState, KineticSystem, OccupationFactors, RateAccumulator, RateEvaluator,
};
use rayon::prelude::*;

const CHUNKS_PER_WORKER: usize = 4;

pub struct ThreadedRates {
    pool: rayon::ThreadPool,
    chunks: usize,
}

impl ThreadedRates {
    pub fn new(workers: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let workers = workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()?;
        Ok(ThreadedRates {
            pool,
            chunks: workers * CHUNKS_PER_WORKER,
        })
    }
}

fn chunk_len(len: usize, chunks: usize) -> usize {
    len.div_ceil(chunks).max(1)
}

impl RateEvaluator for ThreadedRates {
    fn rates(
        &self,
        system: &KineticSystem,
        state: &KineticState,
    ) -> ephkin_core::Result<CollisionRates> {
        let spectrum = &system.spectrum;
        spectrum.check_shape(state)?;
        let factors = OccupationFactors::new(state, &system.statistics)?;
        let channels = &system.channels;
        let partials: Vec<RateAccumulator> = self.pool.install(|| {
            let ep = channels
                .ep
                .par_chunks(chunk_len(channels.ep.len(), self.chunks))
                .map(|chunk| {
                    let mut acc = RateAccumulator::zeros(spectrum);
                    acc.add_ep(chunk, &factors);
                    acc
                });
            let pp = channels
                .pp
                .par_chunks(chunk_len(channels.pp.len(), self.chunks))
                .map(|chunk| {
                    let mut acc = RateAccumulator::zeros(spectrum);
                    acc.add_pp(chunk, &factors);
                    acc
                });
            ep.chain(pp).collect()
        });
        let mut total = RateAccumulator::zeros(spectrum);
        for partial in &partials {
            total.merge(partial);
        }
        Ok(total.finish(spectrum))
    }
}
