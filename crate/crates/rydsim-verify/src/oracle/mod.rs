//! Reference implementations that share no numerical code with `rydsim`.

pub mod enumerate;
pub mod lindblad;
pub mod quad;
pub mod twophoton;
