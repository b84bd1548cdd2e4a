//! Automorphism data of holomorphic Z2-orbifolds of Niemeier lattice VOAs.

pub mod abelian;
pub mod affine;
pub mod codeaut;
pub mod data;
pub mod groupid;
pub mod lattice;
pub mod niemeier;
pub mod orbifold;
pub mod rootdata;
