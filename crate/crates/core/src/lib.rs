pub mod fit;
pub mod harness;
pub mod leg;
pub mod sim;
pub mod trajectory;
