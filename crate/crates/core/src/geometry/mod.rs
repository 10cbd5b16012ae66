//! Curves, hyperplanes, direction quadratures, curve–plane intersection and
//! the acquisition-geometry checks (Kirillov-Tuy, encompassing).

mod curve;
mod kirillov_tuy;
mod plane;
mod sphere;

pub use curve::{make_three_circles, Arc, Curve, CurvePoint, CurveSpec, ROOT_SCAN_SAMPLES};
pub use kirillov_tuy::{check_encompasses, check_kirillov_tuy, KtReport};
pub use plane::{intersect, intersection_points, Aabb, Hyperplane, IntersectionFrame};
pub use sphere::{circle_nodes, gauss_legendre, tangent_frame, SphereGrid, SphereLayout};
