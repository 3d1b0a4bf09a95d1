//! File formats: WAV audio, binary coefficient and mask containers, CSV
//! exports and the bank descriptor.

mod container;
mod csv;
mod descriptor;
mod wav;

pub use container::{
    read_coefficients, read_mask, write_coefficients, write_mask, Precision, COEF_MAGIC, FORMAT_VERSION, MASK_MAGIC,
};
pub use csv::{export_response_csv, export_spectrogram_csv, response_csv, spectrogram_csv};
pub use descriptor::{read_bank, write_bank, BankFile};
pub use wav::{read_wav, write_wav, Signal, WavEncoding};
