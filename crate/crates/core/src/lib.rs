pub mod algebra;
pub mod pointgroup;
pub mod symmetry;
pub mod majorana;
pub mod sequence;
pub mod simulate;
