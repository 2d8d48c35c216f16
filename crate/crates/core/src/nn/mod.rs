//! Numerical kernel: matrices, dense and LSTM layers with exact gradients,
//! Adam, MSE loss and a central-difference gradient checker.

mod adam;
mod checkpoint;
mod dense;
mod gradcheck;
mod init;
mod loss;
mod lstm;
mod matrix;
mod params;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use dense::{Activation, Dense};
pub use gradcheck::grad_check;
pub use init::Initializer;
pub use loss::mse_loss;
pub use lstm::{sigmoid, Gate, LstmCache, LstmLayer};
pub use matrix::{axpy, dot, Matrix};
pub use params::Parameters;
