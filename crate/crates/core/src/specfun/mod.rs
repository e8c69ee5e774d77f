//! Special functions in signed-logarithm form.

mod bateman;
pub mod fixtures;
mod pcf;
mod signed_log;

pub use bateman::{bateman_k, bateman_k_log, bateman_odd_sequence, bessel_k01_scaled};
pub use pcf::{
    outgoing_table, pcf_outgoing, pcf_regular, pcf_regular_imag, regular_imag_table, regular_table,
    PcfTable, PcfValue, OUTGOING_FORWARD_LIMIT,
};
pub use signed_log::SignedLog;
