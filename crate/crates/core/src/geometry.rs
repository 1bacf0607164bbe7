//! Level surfaces of `N1` over Bell-diagonal states.
//!
//! On the tetrahedron of valid correlation triples, `N1 = max|c_i|`, so the
//! level set `N1 = L` is the surface of the cube `[−L, L]³` clipped to the
//! tetrahedron.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::in_tetrahedron;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub c: [f64; 3],
    /// Cube face: `2k` for `c_{k+1} = −L`, `2k + 1` for `c_{k+1} = +L`.
    pub face: usize,
}

/// Samples each cube face on a `resolution × resolution` grid and keeps the
/// points inside the tetrahedron.
pub fn level_surface(level: f64, resolution: usize) -> Result<Vec<SurfacePoint>> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::OutOfRange {
            name: "level",
            value: level,
            range: "[0, 1]",
        });
    }
    if resolution < 2 {
        return Err(Error::OutOfRange {
            name: "resolution",
            value: resolution as f64,
            range: "[2, ∞)",
        });
    }
    let coord = |i: usize| level * (-1.0 + 2.0 * i as f64 / (resolution - 1) as f64);
    let mut out = Vec::new();
    for k in 0..3 {
        let (u, v) = ((k + 1) % 3, (k + 2) % 3);
        for (s, sign) in [-1.0, 1.0].into_iter().enumerate() {
            for i in 0..resolution {
                for j in 0..resolution {
                    let mut c = [0.0; 3];
                    c[k] = sign * level;
                    c[u] = coord(i);
                    c[v] = coord(j);
                    if in_tetrahedron(c) {
                        out.push(SurfacePoint { c, face: 2 * k + s });
                    }
                }
            }
        }
    }
    Ok(out)
}
