//! CSV output. Floats are written with 17 significant digits so that every
//! value round-trips exactly; `#` lines are comments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ephkin_core::{DiagnosticsRecord, KineticState, Spectrum};

pub const TIMESERIES_HEADER: [&str; 12] = [
    "t",
    "count",
    "E_e",
    "E_p",
    "E_total",
    "H_p",
    "H_e",
    "H",
    "D_moment",
    "D_channel",
    "S",
    "dt",
];

pub const SNAPSHOT_HEADER: [&str; 6] =
    ["kind", "branch", "index", "energy", "weight", "occupation"];

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

pub fn write_timeseries<W: Write>(out: W, records: &[DiagnosticsRecord]) -> io::Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# S = -H with the 1/(8 pi^3) normalization absorbed into the weights"
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER).map_err(csv_error)?;
    for r in records {
        let row = [
            r.t,
            r.electron_count,
            r.electron_energy,
            r.phonon_energy,
            r.total_energy,
            r.h_phonon,
            r.h_electron,
            r.h,
            r.d_moment,
            r.d_channel,
            r.entropy,
            r.dt,
        ];
        w.write_record(row.iter().map(|x| float(*x)))
            .map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_snapshot<W: Write>(
    out: W,
    state: &KineticState,
    spectrum: &Spectrum,
) -> io::Result<()> {
    let mut out = out;
    writeln!(out, "# t = {}", float(state.t))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER).map_err(csv_error)?;
    for (level, n) in spectrum.band.levels().iter().zip(&state.electrons) {
        w.write_record([
            "electron".to_string(),
            String::new(),
            level.index.to_string(),
            float(level.energy),
            float(level.weight),
            float(*n),
        ])
        .map_err(csv_error)?;
    }
    for (branch, (b, occ)) in spectrum.branches.iter().zip(&state.phonons).enumerate() {
        for (m, n) in b.modes().iter().zip(occ) {
            w.write_record([
                "phonon".to_string(),
                branch.to_string(),
                m.index.to_string(),
                float(m.energy),
                float(m.weight),
                float(*n),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()
}

pub fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
