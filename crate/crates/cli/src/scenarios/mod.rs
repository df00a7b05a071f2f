pub mod entangle;
pub mod gate;
pub mod rabi;
pub mod synthesize;
pub mod verify;
