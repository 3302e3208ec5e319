//! Argument-principle zero counting on rectangles and root refinement.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::round;
use crate::C64;

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all = [re_min, re_max, im_min, im_max];
        if all.iter().any(|v| !v.is_finite()) || re_max < re_min || im_max < im_min {
            return Err(Error::InvalidConfig(alloc::format!(
                "rectangle bounds must be finite and ordered: {all:?}"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.re_max <= self.re_min || self.im_max <= self.im_min
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn diameter(&self) -> f64 {
        C64::new(self.re_max - self.re_min, self.im_max - self.im_min).norm()
    }

    /// Corners in counter-clockwise order starting bottom-left.
    pub fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits at fractions `(a, b)` of the width and height.
    fn quadrants(&self, a: f64, b: f64) -> [Rect; 4] {
        let xm = self.re_min + a * (self.re_max - self.re_min);
        let ym = self.im_min + b * (self.im_max - self.im_min);
        [
            Rect { re_max: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_max: ym, ..*self },
            Rect { re_min: xm, im_min: ym, ..*self },
            Rect { re_max: xm, im_min: ym, ..*self },
        ]
    }

    fn expanded(&self, factor: f64) -> Rect {
        let dx = 0.5 * factor * (self.re_max - self.re_min);
        let dy = 0.5 * factor * (self.im_max - self.im_min);
        let c = self.center();
        Rect {
            re_min: c.re - dx,
            re_max: c.re + dx,
            im_min: c.im - dy,
            im_max: c.im + dy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOptions {
    /// Uniform segments per edge before adaptive refinement.
    pub initial_segments: usize,
    /// Largest accepted phase increment between neighbouring samples.
    pub max_phase_step: f64,
    /// Bisection depth limit per initial segment.
    pub max_depth: u32,
    /// `|f|` below this on the contour aborts the count.
    pub zero_tol: f64,
    /// Newton stops once `|f| <` this.
    pub root_tol: f64,
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self {
            initial_segments: 64,
            max_phase_step: PI / 4.0,
            max_depth: 40,
            zero_tol: 1e-8,
            root_tol: 1e-10,
        }
    }
}

fn check(z: C64, v: C64, opts: &ContourOptions) -> Result<C64> {
    if !(v.re.is_finite() && v.im.is_finite()) || v.norm() < opts.zero_tol {
        return Err(Error::ZeroOnContour { re: z.re, im: z.im });
    }
    Ok(v)
}

fn phase_along<F>(f: &F, a: C64, fa: C64, b: C64, fb: C64, depth: u32, opts: &ContourOptions) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let step = (fb / fa).arg();
    if step.abs() < opts.max_phase_step {
        return Ok(step);
    }
    if depth >= opts.max_depth {
        return Err(Error::ContourRefinement { re: a.re, im: a.im });
    }
    let m = 0.5 * (a + b);
    let fm = check(m, f(m)?, opts)?;
    Ok(phase_along(f, a, fa, m, fm, depth + 1, opts)? + phase_along(f, m, fm, b, fb, depth + 1, opts)?)
}

/// Net number of zeros minus poles of `f` inside `rect`, by accumulating the
/// phase of `f` around the boundary with adaptive bisection.
pub fn winding_number<F>(f: &F, rect: &Rect, opts: &ContourOptions) -> Result<i64>
where
    F: Fn(C64) -> Result<C64>,
{
    if rect.is_degenerate() {
        return Ok(0);
    }
    let corners = rect.corners();
    let n = opts.initial_segments.max(1);
    let mut total = 0.0;
    for k in 0..4 {
        let (p, q) = (corners[k], corners[(k + 1) % 4]);
        let mut a = p;
        let mut fa = check(a, f(a)?, opts)?;
        for i in 1..=n {
            let b = if i == n { q } else { p + (q - p) * (i as f64 / n as f64) };
            let fb = check(b, f(b)?, opts)?;
            total += phase_along(f, a, fa, b, fb, 0, opts)?;
            a = b;
            fa = fb;
        }
    }
    let turns = total / (2.0 * PI);
    let rounded = round(turns);
    if (turns - rounded).abs() > 0.25 {
        return Err(Error::ContourRefinement {
            re: rect.re_min,
            im: rect.im_min,
        });
    }
    Ok(rounded as i64)
}

/// A refined zero and how many zeros the enclosing cell counted.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Zero {
    pub value: C64,
    pub multiplicity: i64,
}

fn newton<F, D>(f: &F, df: &D, start: C64, cell: &Rect, opts: &ContourOptions) -> Option<C64>
where
    F: Fn(C64) -> Result<C64>,
    D: Fn(C64) -> Result<C64>,
{
    let fence = cell.expanded(3.0);
    let mut z = start;
    for _ in 0..100 {
        let v = f(z).ok()?;
        let d = df(z).ok()?;
        if d.norm() == 0.0 {
            return None;
        }
        let dz = v / d;
        z -= dz;
        if !fence.contains(z) {
            return None;
        }
        if dz.norm() <= 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    let v = f(z).ok()?;
    (v.norm() < opts.root_tol).then_some(z)
}

/// Counts the zeros in `rect` and refines each by Newton's method started
/// from recursively subdivided cells.
pub fn locate_zeros<F, D>(f: &F, df: &D, rect: &Rect, opts: &ContourOptions) -> Result<(i64, Vec<Zero>)>
where
    F: Fn(C64) -> Result<C64>,
    D: Fn(C64) -> Result<C64>,
{
    let count = winding_number(f, rect, opts)?;
    let mut zeros = Vec::new();
    if count > 0 {
        refine(f, df, rect, count, 0, opts, &mut zeros)?;
    }
    Ok((count, zeros))
}

fn refine<F, D>(
    f: &F,
    df: &D,
    rect: &Rect,
    count: i64,
    depth: u32,
    opts: &ContourOptions,
    out: &mut Vec<Zero>,
) -> Result<()>
where
    F: Fn(C64) -> Result<C64>,
    D: Fn(C64) -> Result<C64>,
{
    if count == 1 {
        if let Some(z) = newton(f, df, rect.center(), rect, opts) {
            out.push(Zero {
                value: z,
                multiplicity: 1,
            });
            return Ok(());
        }
    }
    if depth >= 30 {
        // cell has shrunk onto a multiple zero
        let z = newton(f, df, rect.center(), rect, opts).unwrap_or(rect.center());
        out.push(Zero {
            value: z,
            multiplicity: count,
        });
        return Ok(());
    }
    // Try a few split points so that no zero sits on an internal edge.
    const SPLITS: [(f64, f64); 4] = [(0.5, 0.5), (0.47, 0.53), (0.53, 0.46), (0.41, 0.57)];
    let mut last_err = None;
    for (a, b) in SPLITS {
        let cells = rect.quadrants(a, b);
        let counts: Result<Vec<i64>> = cells.iter().map(|c| winding_number(f, c, opts)).collect();
        match counts {
            Ok(counts) => {
                for (cell, n) in cells.iter().zip(counts) {
                    if n > 0 {
                        refine(f, df, cell, n, depth + 1, opts, out)?;
                    }
                }
                return Ok(());
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::ContourRefinement {
        re: rect.center().re,
        im: rect.center().im,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(roots: [C64; 3]) -> impl Fn(C64) -> Result<C64> {
        move |z| Ok((z - roots[0]) * (z - roots[1]) * (z - roots[2]))
    }

    #[test]
    fn counts_cubic_zeros() {
        let roots = [C64::new(0.5, 0.5), C64::new(-1.0, 0.0), C64::new(2.0, -1.0)];
        let f = cubic(roots);
        let opts = ContourOptions::default();
        let r = Rect::new(-2.0, 3.0, -2.0, 2.0).unwrap();
        assert_eq!(winding_number(&f, &r, &opts).unwrap(), 3);
        let r = Rect::new(0.0, 3.0, -2.0, 2.0).unwrap();
        assert_eq!(winding_number(&f, &r, &opts).unwrap(), 2);
        let r = Rect::new(3.0, 4.0, -2.0, 2.0).unwrap();
        assert_eq!(winding_number(&f, &r, &opts).unwrap(), 0);
    }

    #[test]
    fn degenerate_rectangle_has_no_zeros() {
        let f = cubic([C64::new(0.0, 0.0); 3]);
        let r = Rect::new(1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(winding_number(&f, &r, &ContourOptions::default()).unwrap(), 0);
    }

    #[test]
    fn zero_on_contour_is_reported() {
        let f = cubic([C64::new(1.0, 0.0), C64::new(5.0, 5.0), C64::new(-5.0, 5.0)]);
        let r = Rect::new(1.0, 2.0, -1.0, 1.0).unwrap();
        assert!(matches!(
            winding_number(&f, &r, &ContourOptions::default()),
            Err(Error::ZeroOnContour { .. })
        ));
    }

    #[test]
    fn refines_all_zeros() {
        let roots = [C64::new(0.5, 0.5), C64::new(-1.0, 0.0), C64::new(2.0, -1.0)];
        let f = cubic(roots);
        let df = move |z: C64| {
            Ok((z - roots[1]) * (z - roots[2]) + (z - roots[0]) * (z - roots[2]) + (z - roots[0]) * (z - roots[1]))
        };
        let r = Rect::new(-2.0, 3.0, -2.0, 2.0).unwrap();
        let (n, zeros) = locate_zeros(&f, &df, &r, &ContourOptions::default()).unwrap();
        assert_eq!(n, 3);
        assert_eq!(zeros.len(), 3);
        for root in roots {
            assert!(zeros.iter().any(|z| (z.value - root).norm() < 1e-10));
        }
    }
}
