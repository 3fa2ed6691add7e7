//! Bundles everything a kinetic run needs.

use crate::bands::Spectrum;
use crate::channels::ChannelSet;
use crate::statistics::StatisticsPair;

#[derive(Clone, Debug)]
pub struct StatisticsSet {
    pub phonon: StatisticsPair,
    pub electron: StatisticsPair,
}

#[derive(Clone, Debug)]
pub struct KineticSystem {
    pub spectrum: Spectrum,
    pub channels: ChannelSet,
    pub statistics: StatisticsSet,
}
