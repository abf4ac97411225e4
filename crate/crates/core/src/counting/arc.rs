//! Points of the rectangular lattice `{(a, gamma b)}` near an arc of a circle.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::torus::TorusSpec;

struct Arc {
    radius: f64,
    tol: f64,
    half_angle: f64,
    center: f64,
    gamma: f64,
}

impl Arc {
    fn new(r: f64, c: f64, theta: f64, center: f64, torus: &TorusSpec) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need R > 0 and c > 0, got R = {r}, c = {c}"
            )));
        }
        if !(theta > 0.0 && theta <= TAU) || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "arc angle must lie in (0, 2pi], got {theta}"
            )));
        }
        Ok(Self {
            radius: r,
            tol: c / r,
            half_angle: theta / 2.0,
            center,
            gamma: torus.gamma(),
        })
    }

    fn contains(&self, a: i64, b: i64) -> bool {
        let (x, y) = (a as f64, self.gamma * b as f64);
        let rho = x.hypot(y);
        if (rho - self.radius).abs() > self.tol {
            return false;
        }
        if self.half_angle >= PI {
            return true;
        }
        let diff = wrap(y.atan2(x) - self.center);
        diff.abs() <= self.half_angle
    }

    fn outer(&self) -> f64 {
        self.radius + self.tol
    }

    fn inner(&self) -> f64 {
        (self.radius - self.tol).max(0.0)
    }

    /// Bounding box of the annular sector, as `(xmin, xmax, ymin, ymax)`.
    fn bbox(&self) -> (f64, f64, f64, f64) {
        let ro = self.outer();
        if self.half_angle >= PI / 2.0 {
            // sectors this wide are cheap enough to box by the full disk
            return (-ro, ro, -ro, ro);
        }
        let ri = self.inner();
        let mut xs = Vec::with_capacity(8);
        let mut ys = Vec::with_capacity(8);
        for ang in [self.center - self.half_angle, self.center + self.half_angle] {
            for r in [ri, ro] {
                xs.push(r * ang.cos());
                ys.push(r * ang.sin());
            }
        }
        for k in 0..4 {
            let axis = k as f64 * PI / 2.0;
            if wrap(axis - self.center).abs() <= self.half_angle {
                xs.push(ro * axis.cos());
                ys.push(ro * axis.sin());
            }
        }
        let fold = |v: &[f64], f: fn(f64, f64) -> f64, init: f64| v.iter().copied().fold(init, f);
        (
            fold(&xs, f64::min, f64::INFINITY),
            fold(&xs, f64::max, f64::NEG_INFINITY),
            fold(&ys, f64::min, f64::INFINITY),
            fold(&ys, f64::max, f64::NEG_INFINITY),
        )
    }
}

/// Wrap an angle into `(-pi, pi]`.
fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Lattice points `(a, gamma b)` within distance `c / R` of the circle of
/// radius `R` whose polar angle lies within `theta / 2` of `center_angle`.
pub fn annulus_arc_count(r: f64, c: f64, theta: f64, center_angle: f64, torus: &TorusSpec) -> Result<u64> {
    let arc = Arc::new(r, c, theta, center_angle, torus)?;
    let (xmin, xmax, ymin, ymax) = arc.bbox();
    let (ro, ri) = (arc.outer(), arc.inner());
    let g = arc.gamma;
    let blo = (ymin / g).floor() as i64 - 1;
    let bhi = (ymax / g).ceil() as i64 + 1;
    let mut count = 0u64;
    for b in blo..=bhi {
        let y = g * b as f64;
        let out2 = ro * ro - y * y;
        if out2 < -1.0 {
            continue;
        }
        let amax = out2.max(0.0).sqrt();
        let in2 = ri * ri - y * y;
        let amin = if in2 > 0.0 { in2.sqrt() } else { 0.0 };
        let hi = (amax.ceil() as i64 + 1).min(xmax.ceil() as i64 + 1);
        let lo_box = xmin.floor() as i64 - 1;
        // |a| in [amin, amax], split into the two signs
        let pos = ((amin.floor() as i64 - 1).max(lo_box), hi);
        let neg = (
            (-(amax.ceil() as i64) - 1).max(lo_box),
            (-(amin.floor() as i64) + 1).min(hi),
        );
        let spans: [(i64, i64); 2] = if neg.1 >= pos.0 {
            [(neg.0, pos.1), (1, 0)]
        } else {
            [neg, pos]
        };
        for (lo, hi) in spans {
            for a in lo..=hi {
                if arc.contains(a, b) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Reference count scanning `|a| <= R + c/R + 1`, `|b| <= (R + c/R + 1) / gamma`.
pub fn annulus_arc_count_oracle(r: f64, c: f64, theta: f64, center_angle: f64, torus: &TorusSpec) -> Result<u64> {
    let arc = Arc::new(r, c, theta, center_angle, torus)?;
    let reach = arc.outer() + 1.0;
    let amax = reach.ceil() as i64;
    let bmax = (reach / arc.gamma).ceil() as i64;
    let mut count = 0u64;
    for a in -amax..=amax {
        for b in -bmax..=bmax {
            if arc.contains(a, b) {
                count += 1;
            }
        }
    }
    Ok(count)
}
