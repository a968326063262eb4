//! Drinfeld modules over F_q[theta]: torsion towers over the completion
//! F_q((1/theta)), Newton polygons of additive polynomials, and analytic
//! reconstruction of periods.

pub mod analytic;
pub mod cli;
pub mod exec;
pub mod field_tower;
pub mod newton_polygon;
pub mod roots;
pub mod skew;
pub mod torsion_tower;
