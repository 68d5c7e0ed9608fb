//! Directory layout for a label bundle: one tensor file per map plus an
//! instance table.

use std::path::Path;

use crate::encoder::{InstanceInfo, LabelBundle};
use crate::error::{Error, Result};
use crate::io::tensor::Tensor;

pub const KERNEL_FILE: &str = "kernel.ctmp";
pub const TRAINING_MASK_FILE: &str = "training_mask.ctmp";
pub const SHIFT_FILE: &str = "shift.ctmp";
pub const INSTANCE_ID_FILE: &str = "instance_id.ctmp";
pub const KERNEL_ID_FILE: &str = "kernel_id.ctmp";
pub const REFERENCE_FILE: &str = "reference.ctmp";
pub const IGNORE_FILE: &str = "ignore.ctmp";
pub const INSTANCES_FILE: &str = "instances.json";

pub fn write_bundle(dir: impl AsRef<Path>, bundle: &LabelBundle<f32>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    Tensor::from(&bundle.kernel_map).write(dir.join(KERNEL_FILE))?;
    Tensor::from(&bundle.training_mask).write(dir.join(TRAINING_MASK_FILE))?;
    Tensor::from(&bundle.shift_field).write(dir.join(SHIFT_FILE))?;
    Tensor::from(&bundle.instance_id).write(dir.join(INSTANCE_ID_FILE))?;
    Tensor::from(&bundle.kernel_id).write(dir.join(KERNEL_ID_FILE))?;
    Tensor::from(&bundle.reference_mask).write(dir.join(REFERENCE_FILE))?;
    Tensor::from(&bundle.ignore_mask).write(dir.join(IGNORE_FILE))?;
    let table = serde_json::to_string_pretty(&bundle.instances).expect("instances serialize");
    std::fs::write(dir.join(INSTANCES_FILE), table)?;
    Ok(())
}

pub fn read_bundle(dir: impl AsRef<Path>) -> Result<LabelBundle<f32>> {
    let dir = dir.as_ref();
    let kernel_map = Tensor::read(dir.join(KERNEL_FILE))?.to_bitmask()?;
    let (height, width) = kernel_map.dims();
    let same = |t: Tensor| -> Result<Tensor> {
        match t.dims() {
            d if d.len() >= 2 && d[0] == height && d[1] == width => Ok(t),
            d => Err(Error::ShapeMismatch {
                expected: vec![height, width],
                found: d.to_vec(),
            }),
        }
    };
    let training_mask = same(Tensor::read(dir.join(TRAINING_MASK_FILE))?)?.to_bitmask()?;
    let shift_field = same(Tensor::read(dir.join(SHIFT_FILE))?)?.to_shift_field()?;
    let instance_id = Tensor::read(dir.join(INSTANCE_ID_FILE))?.to_labeled_grid(height, width)?;
    let kernel_id = Tensor::read(dir.join(KERNEL_ID_FILE))?.to_labeled_grid(height, width)?;
    let reference_mask = same(Tensor::read(dir.join(REFERENCE_FILE))?)?.to_bitmask()?;
    let ignore_mask = same(Tensor::read(dir.join(IGNORE_FILE))?)?.to_bitmask()?;
    let instances: Vec<InstanceInfo> =
        serde_json::from_str(&std::fs::read_to_string(dir.join(INSTANCES_FILE))?).map_err(|e| {
            Error::Annotation {
                line: e.line(),
                message: format!("{INSTANCES_FILE}: {e}"),
            }
        })?;
    Ok(LabelBundle {
        height,
        width,
        kernel_map,
        training_mask,
        shift_field,
        instance_id,
        kernel_id,
        reference_mask,
        ignore_mask,
        instances,
    })
}
