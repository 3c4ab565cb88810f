//! Pinhole projection, depth-based back-projection and pixel transfer from a
//! pole camera into a windshield camera.

use pedsim::geometry::{backproject, map_pixel, project, transfer_point, CameraIntrinsics, RigidTransform};

fn main() {
    let k = CameraIntrinsics::new(800, 600, 90.0).expect("valid intrinsics");
    println!("fx = {:.1}, fy = {:.1}, principal point ({}, {})", k.fx(), k.fy(), k.cx(), k.cy());

    // World frame: x along the road, y left, z up.
    let pole = RigidTransform::camera_pose([15.0, -9.0, 6.0], 165f64.to_radians(), 20f64.to_radians());
    let car = RigidTransform::camera_pose([-20.0, -1.75, 1.4], 0.0, 0.0);

    let pedestrian = pedsim::geometry::CameraPoint::new(0.0, -6.0, 0.9);
    let in_pole = pole.apply(pedestrian);
    let px = project(in_pole, &k).expect("in front of the pole camera");
    println!("pole camera sees the pedestrian at ({:.1}, {:.1}), depth {:.2} m", px.u, px.v, in_pole.z);

    let lifted = backproject(px, in_pole.z, &k).expect("positive depth");
    let in_car = transfer_point(lifted, &pole, &car);
    println!("same point in the car camera frame: ({:.3}, {:.3}, {:.3})", in_car.x, in_car.y, in_car.z);

    let px_car = map_pixel(px, in_pole.z, &k, &pole, &car, &k).expect("in front of the car");
    let direct = project(car.apply(pedestrian), &k).expect("in front of the car");
    println!(
        "mapped pixel ({:.2}, {:.2}), direct projection ({:.2}, {:.2})",
        px_car.u, px_car.v, direct.u, direct.v
    );
}
