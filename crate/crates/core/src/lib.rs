pub mod density;
pub mod detection;
pub mod geometry;
pub mod imageio;
pub mod material;
pub mod pipeline;
pub mod sample_data;

pub use image::RgbImage;
