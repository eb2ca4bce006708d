//! Exact symbolic engine for the level-one free-boson representation of the
//! quantum affine superalgebra of type `sl(M+1|N+1)`.
//!
//! The crate builds truncated Fock modules over three families of deformed
//! oscillators, realizes the Drinfeld and Chevalley generators as vertex
//! operators acting on them, and checks the defining relations, evaluation
//! modules, intertwining operators, and graded character formulas entirely
//! over exact rational arithmetic.
//!
//! * [`coeff`]: exact scalars (rationals, Laurent objects in `q`, phases).
//! * [`boson`]: oscillator species, Fock states, weight lattices, bases.
//! * [`vertex`]: normal-ordered exponential operators and mode extraction.
//! * [`algebra`]: generator expressions, graded brackets, relation catalogue.
//! * [`evalrep`]: finite-dimensional evaluation modules and their checks.
//! * [`intertwiner`]: vertex-operator components of the intertwining maps.
//! * [`characters`]: brute-force and closed-form graded characters.
//! * [`report`]: structured pass/fail records shared by library and CLI.

pub mod coeff;

pub mod boson;
pub mod vertex;
pub mod algebra;
pub mod evalrep;
pub mod intertwiner;
pub mod characters;
pub mod report;
