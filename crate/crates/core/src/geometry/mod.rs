//! Shared geometric vocabulary: pinhole camera, stereo depth, 2D/3D boxes and IoU.

mod boxes;
mod camera;

pub use boxes::{box3d_corners, iou_2d, iou_3d, wrap_angle, BBox2D, BBox3D, Detection, Dims3};
pub use camera::{
    backproject_pixel, depth_to_disparity, disparity_to_depth, project_point, CameraIntrinsics,
    PixelDepth, Point3, StereoRig,
};

pub(crate) use camera::backproject_unchecked;
