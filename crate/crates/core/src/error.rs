use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("aliasing: output rate {out_rate} Hz cannot hold occupied band edge {band_edge} Hz")]
    Aliasing { out_rate: f64, band_edge: f64 },

    #[error("spectral overlap: {0}")]
    SpectralOverlap(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no beat note above the noise floor (peak-to-floor ratio {snr_db:.1} dB)")]
    NoBeat { snr_db: f64 },

    #[error("laser settled on channel {settled} instead of target channel {target}")]
    Mislock {
        target: i32,
        settled: i32,
        state: Box<crate::locking::LockState>,
    },

    #[error("timing synchronisation failed: normalised correlation {0:.3}")]
    SyncFailure(f64),

    #[error("bit alignment failed: normalised correlation {0:.3}")]
    Alignment(f64),

    #[error("threshold {threshold:e} not bracketed by the curve")]
    NotBracketed { threshold: f64 },

    #[error("invalid channel id {0}")]
    InvalidChannel(i32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("plot: {0}")]
    Plot(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
