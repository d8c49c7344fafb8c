//! Discrete-time coined quantum walks with absorbing walls.
//!
//! Three independent routes to the same absorption statistics:
//!
//! * [`simulate`] propagates amplitudes exactly and measures at the walls;
//! * [`genfun`] sums first-passage generating functions on the unit circle;
//! * [`eigen`] builds plane-wave solutions and their reflection off a wall.
//!
//! [`ddim`] extends the walk to `d` dimensions with one coin per axis.

pub mod coin;
pub mod ddim;
pub mod eigen;
pub mod error;
pub mod genfun;
pub mod output;
pub mod quad;
pub mod simulate;
pub mod state;

pub use coin::{Coin, StartSpinor};
pub use error::{Error, Result};
pub use state::WalkState1D;
