//! Annotation files, the tensor container and bundle directories.

pub mod annotation;
pub mod bundle;
pub mod tensor;

pub use annotation::{
    format_annotations, parse_annotations, read_annotation_file, to_annotations,
    write_annotation_file, AnnotationRecord,
};
pub use bundle::{read_bundle, write_bundle};
pub use tensor::Tensor;
