//! Polygon and raster primitives shared by the encoder, decoder and evaluation.

pub mod components;
pub mod contour;
pub mod offset;
pub mod polygon;
pub mod raster;
pub mod rect;

pub use components::{connected_components, Connectivity};
pub use contour::{contour_of_mask, extract_contour};
pub use offset::{inset_polygon, shrink_offset, shrink_polygon, DEFAULT_SHRINK_RATIO};
pub use polygon::{Point, Polygon};
pub use raster::{erode, rasterize, rasterize_into, BitMask, LabeledGrid};
pub use rect::{convex_hull, min_area_rect, RotatedRect};
