//! Closed-mesh builders and the reference meshes shipped under `fixtures/`.
//!
//! Every builder returns outward-oriented parts (positive signed volume).

use std::f64::consts::TAU;

use super::mesh::{Mesh, MeshSection, Point3, Triangle};
use super::volume::signed_triangle_volume;
use crate::material::rng::SplitMix64;

/// A closed part: vertices plus triangles indexing into them.
pub type Part = (Vec<Point3>, Vec<Triangle>);

/// Corner order: bit 0 selects x, bit 1 selects y, bit 2 selects z, in the
/// sequence 000, 100, 110, 010, 001, 101, 111, 011.
const BOX_TRIANGLES: [[usize; 3]; 12] = [
    [0, 2, 1],
    [0, 3, 2],
    [4, 5, 6],
    [4, 6, 7],
    [0, 1, 5],
    [0, 5, 4],
    [1, 2, 6],
    [1, 6, 5],
    [2, 3, 7],
    [2, 7, 6],
    [3, 0, 4],
    [3, 4, 7],
];

fn tris(list: &[[usize; 3]]) -> Vec<Triangle> {
    list.iter().map(|t| Triangle(*t)).collect()
}

/// Flips every triangle if the part encloses negative volume.
fn orient_outward(part: Part) -> Part {
    let (vertices, mut triangles) = part;
    let n = vertices.len() as f64;
    let c = vertices
        .iter()
        .fold(Point3::default(), |acc, v| acc.add(v))
        .scale(1.0 / n);
    let signed: f64 = triangles
        .iter()
        .map(|t| {
            signed_triangle_volume(
                vertices[t.0[0]].sub(&c),
                vertices[t.0[1]].sub(&c),
                vertices[t.0[2]].sub(&c),
            )
        })
        .sum();
    if signed < 0.0 {
        for t in &mut triangles {
            *t = t.flipped();
        }
    }
    (vertices, triangles)
}

/// Axis-aligned box between two corners.
pub fn box_part(min: Point3, max: Point3) -> Part {
    let vertices = vec![
        Point3::new(min.x, min.y, min.z),
        Point3::new(max.x, min.y, min.z),
        Point3::new(max.x, max.y, min.z),
        Point3::new(min.x, max.y, min.z),
        Point3::new(min.x, min.y, max.z),
        Point3::new(max.x, min.y, max.z),
        Point3::new(max.x, max.y, max.z),
        Point3::new(min.x, max.y, max.z),
    ];
    (vertices, tris(&BOX_TRIANGLES))
}

/// Orthonormal pair perpendicular to `d`.
fn frame(d: Point3) -> (Point3, Point3) {
    let len = d.dot(&d).sqrt();
    let d = d.scale(1.0 / len);
    let helper = if d.z.abs() < 0.9 {
        Point3::new(0.0, 0.0, 1.0)
    } else {
        Point3::new(1.0, 0.0, 0.0)
    };
    let u = d.cross(&helper);
    let u = u.scale(1.0 / u.dot(&u).sqrt());
    let v = d.cross(&u);
    (u, v)
}

/// Square-section beam from `p` to `q` with the given half-width.
pub fn beam(p: Point3, q: Point3, half_width: f64) -> Part {
    let (u, v) = frame(q.sub(&p));
    let corner = |su: f64, sv: f64, end: Point3| {
        end.add(&u.scale(su * half_width))
            .add(&v.scale(sv * half_width))
    };
    let vertices = vec![
        corner(-1.0, -1.0, p),
        corner(1.0, -1.0, p),
        corner(1.0, 1.0, p),
        corner(-1.0, 1.0, p),
        corner(-1.0, -1.0, q),
        corner(1.0, -1.0, q),
        corner(1.0, 1.0, q),
        corner(-1.0, 1.0, q),
    ];
    orient_outward((vertices, tris(&BOX_TRIANGLES)))
}

/// Triangular-section prism from `p` to `q`.
pub fn prism(p: Point3, q: Point3, half_width: f64) -> Part {
    let (u, v) = frame(q.sub(&p));
    let ring: Vec<Point3> = (0..3)
        .map(|i| {
            let a = TAU * i as f64 / 3.0;
            u.scale(a.cos() * half_width)
                .add(&v.scale(a.sin() * half_width))
        })
        .collect();
    let mut vertices: Vec<Point3> = ring.iter().map(|o| p.add(o)).collect();
    vertices.extend(ring.iter().map(|o| q.add(o)));
    let faces = [
        [0, 2, 1],
        [3, 4, 5],
        [0, 1, 4],
        [0, 4, 3],
        [1, 2, 5],
        [1, 5, 4],
        [2, 0, 3],
        [2, 3, 5],
    ];
    orient_outward((vertices, tris(&faces)))
}

pub fn tetrahedron(a: Point3, b: Point3, c: Point3, d: Point3) -> Part {
    orient_outward((
        vec![a, b, c, d],
        tris(&[[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]]),
    ))
}

/// Two apexes over a triangular ring: 5 vertices, 6 faces.
pub fn bipyramid(center: Point3, radius: f64, half_height: f64) -> Part {
    let mut vertices: Vec<Point3> = (0..3)
        .map(|i| {
            let a = TAU * i as f64 / 3.0;
            center.add(&Point3::new(radius * a.cos(), radius * a.sin(), 0.0))
        })
        .collect();
    vertices.push(center.add(&Point3::new(0.0, 0.0, half_height)));
    vertices.push(center.add(&Point3::new(0.0, 0.0, -half_height)));
    let faces = [
        [0, 1, 3],
        [1, 2, 3],
        [2, 0, 3],
        [1, 0, 4],
        [2, 1, 4],
        [0, 2, 4],
    ];
    orient_outward((vertices, tris(&faces)))
}

/// Torus around `axis` (0 = x, 1 = y, 2 = z) with `major` ring segments
/// and `minor` tube segments.
pub fn torus(
    center: Point3,
    axis: usize,
    ring_radius: f64,
    tube_radius: f64,
    major: usize,
    minor: usize,
) -> Part {
    let place = |a: f64, b: f64, along: f64| -> Point3 {
        let local = match axis {
            0 => Point3::new(along, a, b),
            1 => Point3::new(b, along, a),
            _ => Point3::new(a, b, along),
        };
        center.add(&local)
    };
    let mut vertices = Vec::with_capacity(major * minor);
    for i in 0..major {
        let u = TAU * i as f64 / major as f64;
        for j in 0..minor {
            let w = TAU * j as f64 / minor as f64;
            let r = ring_radius + tube_radius * w.cos();
            vertices.push(place(r * u.cos(), r * u.sin(), tube_radius * w.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % major) * minor + (j % minor);
    let mut triangles = Vec::with_capacity(2 * major * minor);
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push(Triangle::new(a, b, c));
            triangles.push(Triangle::new(a, c, d));
        }
    }
    orient_outward((vertices, triangles))
}

/// Star-shaped closed surface: `radius(stack, slice)` gives the distance
/// from `center` for each ring vertex; poles use `pole_radius`.
pub fn sphere_like(
    center: Point3,
    stacks: usize,
    slices: usize,
    pole_radius: [f64; 2],
    radius: impl Fn(usize, usize) -> f64,
) -> Part {
    assert!(stacks >= 2 && slices >= 3);
    let mut vertices = vec![center.add(&Point3::new(0.0, 0.0, pole_radius[0]))];
    for i in 1..stacks {
        let phi = std::f64::consts::PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let theta = TAU * j as f64 / slices as f64;
            let r = radius(i, j);
            vertices.push(center.add(&Point3::new(
                r * phi.sin() * theta.cos(),
                r * phi.sin() * theta.sin(),
                r * phi.cos(),
            )));
        }
    }
    vertices.push(center.add(&Point3::new(0.0, 0.0, -pole_radius[1])));
    let bottom = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * slices + (j % slices);
    let mut triangles = Vec::new();
    for j in 0..slices {
        triangles.push(Triangle::new(0, ring(1, j), ring(1, j + 1)));
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (
                ring(i, j),
                ring(i + 1, j),
                ring(i + 1, j + 1),
                ring(i, j + 1),
            );
            triangles.push(Triangle::new(a, b, c));
            triangles.push(Triangle::new(a, c, d));
        }
    }
    for j in 0..slices {
        triangles.push(Triangle::new(
            bottom,
            ring(stacks - 1, j + 1),
            ring(stacks - 1, j),
        ));
    }
    orient_outward((vertices, triangles))
}

fn section(name: &str, parts: impl IntoIterator<Item = Part>) -> MeshSection {
    let mut s = MeshSection::new(name);
    for (v, t) in parts {
        s.append(&v, &t);
    }
    s
}

fn mesh(id: &str, sections: Vec<MeshSection>) -> Mesh {
    Mesh::new(id, sections).expect("fixture meshes are well formed")
}

fn p(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(x, y, z)
}

fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

/// Rotation matrix from a uniformly drawn unit quaternion.
fn random_rotation(rng: &mut SplitMix64) -> [[f64; 3]; 3] {
    let (u1, u2, u3) = (rng.next_f64(), TAU * rng.next_f64(), TAU * rng.next_f64());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// A random closed part with at most `max_triangles` triangles (at least
/// 12): a box, a star-shaped sphere or a torus, randomly rotated and placed
/// around `at`.
pub fn random_closed_part(rng: &mut SplitMix64, at: Point3, max_triangles: usize) -> Part {
    let part = loop {
        let candidate = match rng.below(3) {
            0 => {
                let size = p(
                    uniform(rng, 0.2, 3.0),
                    uniform(rng, 0.2, 3.0),
                    uniform(rng, 0.2, 3.0),
                );
                box_part(size.scale(-0.5), size.scale(0.5))
            }
            1 => {
                let stacks = 2 + rng.below(7);
                let slices = 3 + rng.below(10);
                let radii: Vec<f64> = (0..stacks * slices)
                    .map(|_| uniform(rng, 0.6, 1.6))
                    .collect();
                let poles = [uniform(rng, 0.6, 1.6), uniform(rng, 0.6, 1.6)];
                sphere_like(Point3::default(), stacks, slices, poles, |i, j| {
                    radii[i * slices + j]
                })
            }
            _ => {
                let ring = uniform(rng, 1.0, 2.0);
                let tube = uniform(rng, 0.1, 0.8) * ring;
                torus(
                    Point3::default(),
                    rng.below(3),
                    ring,
                    tube,
                    3 + rng.below(10),
                    3 + rng.below(8),
                )
            }
        };
        if candidate.1.len() <= max_triangles.max(12) {
            break candidate;
        }
    };
    let r = random_rotation(rng);
    let (vertices, triangles) = part;
    let vertices = vertices
        .iter()
        .map(|v| {
            let rotated = Point3::new(
                r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
                r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
                r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
            );
            rotated.add(&at)
        })
        .collect();
    (vertices, triangles)
}

/// One to three disjoint random closed parts spread over one or two
/// sections, `max_triangles` in total at most.
pub fn random_closed_mesh(rng: &mut SplitMix64, max_triangles: usize) -> Mesh {
    let count = 1 + rng.below(3);
    let budget = (max_triangles / count).max(12);
    let mut sections = vec![MeshSection::new("a"), MeshSection::new("b")];
    for i in 0..count {
        let (v, t) = random_closed_part(rng, p(10.0 * i as f64, 0.0, 0.0), budget);
        sections[rng.below(2)].append(&v, &t);
    }
    sections.retain(|s| !s.triangles.is_empty());
    mesh("random", sections)
}

/// 1 cm cube at the origin, 8 vertices and 12 triangles.
pub fn unit_cube() -> Mesh {
    mesh(
        "cube",
        vec![section("cube", [box_part(p(0., 0., 0.), p(1., 1., 1.))])],
    )
}

/// Unit cube without its top face (10 triangles).
pub fn holed_cube() -> Mesh {
    let mut m = unit_cube();
    m.id = "holed_cube".into();
    m.sections[0].triangles.drain(2..4);
    m
}

/// Unit cube with its first triangle wound the wrong way.
pub fn cube_with_flipped_triangle() -> Mesh {
    let mut m = unit_cube();
    m.id = "flipped_cube".into();
    m.sections[0].triangles[0] = m.sections[0].triangles[0].flipped();
    m
}

/// 10 cm cube enclosing an inward-facing 5 cm cube: 875 cm³.
pub fn cube_with_cavity() -> Mesh {
    let outer = box_part(p(0., 0., 0.), p(10., 10., 10.));
    let (v, t) = box_part(p(2.5, 2.5, 2.5), p(7.5, 7.5, 7.5));
    let inner = (v, t.iter().map(Triangle::flipped).collect());
    mesh("cavity_cube", vec![section("shell", [outer, inner])])
}

/// Two disjoint unit cubes in separate sections.
pub fn two_cubes() -> Mesh {
    mesh(
        "two_cubes",
        vec![
            section("a", [box_part(p(0., 0., 0.), p(1., 1., 1.))]),
            section("b", [box_part(p(3., 0., 0.), p(4., 1., 1.))]),
        ],
    )
}

const WHEEL_RADIUS: f64 = 35.0;
const KNOBS_PER_TIRE: usize = 351;

fn wheel(name: &str, hub: Point3) -> MeshSection {
    let mut parts = vec![
        torus(hub, 0, 32.0, 3.0, 32, 6),
        torus(hub, 0, 29.0, 1.0, 32, 3),
        beam(hub.add(&p(-4.0, 0.0, 0.0)), hub.add(&p(4.0, 0.0, 0.0)), 2.0),
    ];
    for k in 0..24 {
        let a = TAU * k as f64 / 24.0;
        let side = if k % 2 == 0 { 1.0 } else { -1.0 };
        let dir = p(0.0, a.cos(), a.sin());
        parts.push(prism(
            hub.add(&dir.scale(2.5)).add(&p(side, 0.0, 0.0)),
            hub.add(&dir.scale(28.5)),
            0.15,
        ));
    }
    for k in 0..KNOBS_PER_TIRE {
        let a = TAU * k as f64 / KNOBS_PER_TIRE as f64;
        let side = if k % 2 == 0 { 1.0 } else { -1.0 };
        let radial = p(0.0, a.cos(), a.sin());
        let tangent = p(0.0, -a.sin(), a.cos());
        let base = hub.add(&radial.scale(33.0)).add(&p(side * 2.8, 0.0, 0.0));
        parts.push(tetrahedron(
            base.add(&radial.scale(0.5)),
            base.add(&radial.scale(-0.5)).add(&tangent.scale(0.5)),
            base.add(&radial.scale(-0.5)).add(&tangent.scale(-0.5)),
            base.add(&p(side * 1.0, 0.0, 0.0)),
        ));
    }
    section(name, parts)
}

/// Bicycle reference mesh: 5022 triangles, 4159 vertices, extent
/// 50 × 198 × 114 cm (x across the handlebar, y along the frame, z up).
pub fn bicycle() -> Mesh {
    let rear = p(0.0, WHEEL_RADIUS, WHEEL_RADIUS);
    let front = p(0.0, 198.0 - WHEEL_RADIUS, WHEEL_RADIUS);
    let bb = p(0.0, 80.0, 30.0);
    let seat_top = p(0.0, 60.0, 95.0);
    let head_top = p(0.0, 145.0, 90.0);
    let head_bottom = p(0.0, 150.0, 75.0);

    let mut frame = vec![
        beam(seat_top, head_top, 1.5),
        beam(bb, head_bottom, 2.0),
        beam(bb, seat_top, 1.5),
        beam(head_bottom, head_top, 2.0),
        beam(bb.add(&p(-5.0, 0.0, 0.0)), bb.add(&p(5.0, 0.0, 0.0)), 2.0),
        // kickstand
        beam(p(-6.0, 70.0, 31.0), p(-12.0, 62.0, 3.0), 0.8),
    ];
    for side in [-4.0, 4.0] {
        let axle = rear.add(&p(side, 0.0, 0.0));
        frame.push(beam(bb.add(&p(side, 0.0, 0.0)), axle, 1.0));
        frame.push(beam(p(side, 60.0, 93.0), axle, 1.0));
        frame.push(beam(
            p(side, 150.0, 75.0),
            front.add(&p(side, 0.0, 0.0)),
            1.2,
        ));
    }

    let handlebar = vec![
        beam(head_top, p(0.0, 152.0, 100.0), 1.5),
        beam(p(-25.0, 152.0, 100.0), p(25.0, 152.0, 100.0), 1.5),
    ];
    let saddle = vec![
        beam(seat_top, p(0.0, 58.0, 106.0), 1.3),
        beam(p(0.0, 45.0, 110.0), p(0.0, 70.0, 110.0), 4.0),
        bipyramid(p(0.0, 56.0, 100.0), 1.5, 1.0),
    ];

    let mut drivetrain = vec![
        beam(p(7.0, 80.0, 30.0), p(7.0, 88.0, 20.0), 1.0),
        beam(p(-7.0, 80.0, 30.0), p(-7.0, 72.0, 40.0), 1.0),
        beam(p(7.0, 88.0, 20.0), p(14.0, 88.0, 20.0), 1.5),
        beam(p(-14.0, 72.0, 40.0), p(-7.0, 72.0, 40.0), 1.5),
    ];
    // Chain loop around the chainring and rear sprocket.
    let path = [
        p(5.0, 80.0, 40.0),
        p(5.0, 35.0, 39.0),
        p(5.0, 35.0, 31.0),
        p(5.0, 80.0, 20.0),
    ];
    let lengths: Vec<f64> = (0..4)
        .map(|i| {
            let d = path[(i + 1) % 4].sub(&path[i]);
            d.dot(&d).sqrt()
        })
        .collect();
    let perimeter: f64 = lengths.iter().sum();
    let at = |s: f64| -> Point3 {
        let mut s = s.rem_euclid(perimeter);
        for i in 0..4 {
            if s <= lengths[i] {
                let d = path[(i + 1) % 4].sub(&path[i]);
                return path[i].add(&d.scale(s / lengths[i]));
            }
            s -= lengths[i];
        }
        path[0]
    };
    let links = 51;
    let step = perimeter / links as f64;
    for k in 0..links {
        let s = step * k as f64;
        drivetrain.push(prism(at(s), at(s + 0.7 * step), 0.3));
    }

    mesh(
        "bicycle",
        vec![
            wheel("rear_wheel", rear),
            wheel("front_wheel", front),
            section("frame", frame),
            section("handlebar", handlebar),
            section("saddle", saddle),
            section("drivetrain", drivetrain),
        ],
    )
}

fn boxes(id: &str, groups: &[(&str, &[([f64; 3], [f64; 3])])]) -> Mesh {
    let sections = groups
        .iter()
        .map(|(name, list)| {
            section(
                name,
                list.iter()
                    .map(|(lo, hi)| box_part(Point3::from(*lo), Point3::from(*hi))),
            )
        })
        .collect();
    mesh(id, sections)
}

fn legs(x: [f64; 2], y: [f64; 2], w: f64, h: f64) -> Vec<([f64; 3], [f64; 3])> {
    let mut out = Vec::new();
    for &lx in &x {
        for &ly in &y {
            out.push(([lx, ly, 0.0], [lx + w, ly + w, h]));
        }
    }
    out
}

/// Simple per-class meshes used by the sample scenes.
pub fn class_meshes() -> Vec<(&'static str, Mesh)> {
    let chair_legs = legs([0.0, 40.0], [0.0, 40.0], 3.0, 45.0);
    let table_legs = legs([2.0, 113.0], [2.0, 73.0], 5.0, 71.0);
    let dog_legs = legs([5.0, 47.0], [3.0, 17.0], 6.0, 30.0);
    let car_wheels: Vec<Part> = [(60.0, 0.0), (60.0, 180.0), (340.0, 0.0), (340.0, 180.0)]
        .iter()
        .map(|&(x, y)| torus(p(x, y, 32.0), 1, 22.0, 10.0, 16, 8))
        .collect();
    let hydrant_cap = sphere_like(p(15.0, 15.0, 60.0), 6, 12, [15.0, 15.0], |_, _| 15.0);

    let mut out = vec![
        ("bicycle", bicycle()),
        (
            "phone",
            boxes("phone", &[("body", &[([0.0, 0.0, 0.0], [7.1, 0.8, 14.7])])]),
        ),
        (
            "chair",
            boxes(
                "chair",
                &[
                    ("seat", &[([0.0, 0.0, 45.0], [43.0, 43.0, 49.0])]),
                    ("legs", &chair_legs),
                    ("back", &[([0.0, 40.0, 49.0], [43.0, 43.0, 95.0])]),
                ],
            ),
        ),
        (
            "table",
            boxes(
                "table",
                &[
                    ("top", &[([0.0, 0.0, 71.0], [120.0, 80.0, 75.0])]),
                    ("legs", &table_legs),
                ],
            ),
        ),
        (
            "bench",
            boxes(
                "bench",
                &[
                    ("seat", &[([0.0, 0.0, 40.0], [150.0, 40.0, 45.0])]),
                    (
                        "supports",
                        &[
                            ([10.0, 0.0, 0.0], [14.0, 40.0, 40.0]),
                            ([136.0, 0.0, 0.0], [140.0, 40.0, 40.0]),
                        ],
                    ),
                    ("back", &[([0.0, 36.0, 45.0], [150.0, 40.0, 85.0])]),
                ],
            ),
        ),
        (
            "dog",
            boxes(
                "dog",
                &[
                    ("body", &[([0.0, 0.0, 30.0], [58.0, 26.0, 55.0])]),
                    ("head", &[([58.0, 5.0, 45.0], [75.0, 21.0, 65.0])]),
                    ("legs", &dog_legs),
                ],
            ),
        ),
        (
            "person",
            boxes(
                "person",
                &[
                    ("torso", &[([0.0, 0.0, 85.0], [40.0, 22.0, 150.0])]),
                    ("head", &[([10.0, 2.0, 152.0], [30.0, 22.0, 175.0])]),
                    (
                        "legs",
                        &[
                            ([3.0, 3.0, 0.0], [17.0, 19.0, 85.0]),
                            ([23.0, 3.0, 0.0], [37.0, 19.0, 85.0]),
                        ],
                    ),
                    (
                        "arms",
                        &[
                            ([-10.0, 6.0, 75.0], [-1.0, 16.0, 148.0]),
                            ([41.0, 6.0, 75.0], [50.0, 16.0, 148.0]),
                        ],
                    ),
                ],
            ),
        ),
        (
            "backpack",
            boxes(
                "backpack",
                &[
                    ("bag", &[([0.0, 0.0, 0.0], [30.0, 15.0, 45.0])]),
                    ("pocket", &[([4.0, -5.0, 5.0], [26.0, -0.5, 25.0])]),
                ],
            ),
        ),
    ];

    let mut hydrant = boxes(
        "hydrant",
        &[("body", &[([0.0, 0.0, 0.0], [30.0, 30.0, 55.0])])],
    );
    hydrant.sections.push(section("cap", [hydrant_cap]));
    out.push(("hydrant", hydrant));

    let mut car = boxes(
        "car",
        &[
            ("body", &[([0.0, 0.0, 30.0], [420.0, 180.0, 90.0])]),
            ("cabin", &[([100.0, 5.0, 90.0], [320.0, 175.0, 140.0])]),
        ],
    );
    car.sections.push(section("wheels", car_wheels));
    out.push(("car", car));
    out
}
