//! Mind-change complexity of functions on finite T0 spaces, with the
//! matching run algebra, learning machines and a Gröbner-basis learner.

pub mod dst;
pub mod groebner;
pub mod machines;
pub mod ordinal;
pub mod runs;
pub mod space;
