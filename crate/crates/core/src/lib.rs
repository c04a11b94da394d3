//! Perfect simulation of chains with infinite, possibly discontinuous
//! memory through a localized mixture of context trees and coupling from
//! the past.

pub mod alphabet;
pub mod auxchains;
pub mod cftp;
pub mod decomposition;
pub mod error;
pub mod kernel;
pub mod stream;
pub mod update;
pub mod validation;

pub use alphabet::{Alphabet, PartialPast, Past, SuffixString, Symbol};
pub use error::{Error, Result};
pub use kernel::{Kernel, MarkovKernel, RenewalKernel, SeqRule};
pub use stream::{UniformSource, UniformStream};
pub use update::UpdateContext;
