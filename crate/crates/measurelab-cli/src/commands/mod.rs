pub mod density_points;
pub mod disintegrate;
pub mod laws;
pub mod lebesgue;
pub mod rn;
pub mod variation;
