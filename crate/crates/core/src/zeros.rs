//! Locating the zeros of `H = 1 + K` in the half-plane `Re s >= 1/2`:
//! boundary certification, argument-principle counting on rectangles,
//! Newton refinement with multiplicity estimation, and catalog assembly
//! (`R_max`, `Z_max`, `mu_max`, `Z_dom`, `z_min`).

use crate::calibration::CalibrationResult;
use crate::kernel::KernelSpec;
use crate::laplace::{eval_h, eval_h_deriv, k_magnitude_envelope, laplace_k, TransformAccuracy};
use crate::{Complex64, Error, Result};

/// Axis-aligned rectangle in the `s`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.re1 - self.re0
    }
    pub fn height(&self) -> f64 {
        self.im1 - self.im0
    }
    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }
    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

/// The certified zero-search region.
///
/// `sigma_hi = 4 b^2 pi` is the closed-form zero-free threshold. The scan
/// only needs to reach `scan_sigma_hi`, the point where the monotone real-axis
/// value `K(sigma)` has dropped to 0.45: since `|K(sigma + i omega)| <=
/// K(sigma)` and `K` decreases along the real axis, everything to the right is
/// zero-free as well. `omega_max` is found by doubling until the sampled top
/// edge has `|K| <= 0.45`. Zeros above `omega_max` are not provably excluded;
/// the catalog is rectangle-certified.
#[derive(Debug, Clone)]
pub struct SearchRegion {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub scan_sigma_hi: f64,
    pub omega_max: f64,
    /// Smallest certified `|H|` on the sampled top/right edges.
    pub boundary_min_modulus: f64,
}

/// Hard cap for the `omega_max` doubling search. The calibrated bump heights
/// are large, so |K| stays near 1 far up the axis and the certified edge
/// lands near 2^19.
pub const OMEGA_HARD_CAP: f64 = (1u64 << 21) as f64;

/// Finds `omega_max` by doubling from 64 and certifies the edges.
pub fn certify_region(
    calib: &CalibrationResult,
    omega_probe_step: f64,
    acc: &TransformAccuracy,
) -> Result<SearchRegion> {
    let spec = &calib.spec;
    let sigma_lo = 0.5;
    let sigma_hi = 4.0 * spec.upper() * spec.upper() * std::f64::consts::PI;

    // Right scan edge: K is positive and decreasing on the real axis, and
    // |K(sigma + i omega)| <= K(sigma), so the first sigma with
    // K(sigma) <= 0.45 starts a certified zero-free half-plane.
    let k_real =
        |x: f64| -> Result<f64> { Ok(laplace_k(spec, Complex64::new(x, 0.0), acc)?.value.re) };
    let mut lo = sigma_lo;
    let mut hi = sigma_lo;
    while k_real(hi)? > 0.45 {
        lo = hi;
        hi *= 2.0;
        if hi > sigma_hi {
            hi = sigma_hi;
            break;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if k_real(mid)? > 0.45 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scan_sigma_hi = hi;

    // Top edge: double omega until |K| <= 0.45 across the sampled sigmas.
    // Sampling is at `omega_probe_step` up to sigma = 20 (where the
    // single-period bump terms still matter) and relative steps beyond.
    let sample_sigmas = {
        let mut v = Vec::new();
        let mut x = sigma_lo;
        while x < 20.0_f64.min(scan_sigma_hi) {
            v.push(x);
            x += omega_probe_step.max(1e-3);
        }
        while x < scan_sigma_hi {
            v.push(x);
            x *= 1.02;
        }
        v.push(scan_sigma_hi);
        v
    };
    let mut omega_max = 64.0;
    let mut min_h_top;
    loop {
        let mut max_k: f64 = 0.0;
        let mut min_h: f64 = f64::MAX;
        for &sg in &sample_sigmas {
            let k = laplace_k(spec, Complex64::new(sg, omega_max), acc)?;
            let kk = k.value.norm() + k.total_bound();
            max_k = max_k.max(kk);
            min_h = min_h.min((1.0 - kk).max(0.0));
        }
        if max_k <= 0.45 {
            min_h_top = min_h;
            break;
        }
        omega_max *= 2.0;
        if omega_max > OMEGA_HARD_CAP {
            return Err(Error::Certification(format!(
                "no omega <= {OMEGA_HARD_CAP:e} with |K| <= 0.45 on the top edge \
                 (last max |K| = {max_k:.4})"
            )));
        }
    }
    // Right edge of the scan box is certified by monotonicity; record its
    // level in the boundary modulus as well.
    let k_right = k_real(scan_sigma_hi)?;
    min_h_top = min_h_top.min(1.0 - k_right);
    // The closed-form envelope at the 4 b^2 pi threshold is at most 1/2.
    debug_assert!(k_magnitude_envelope(spec, sigma_hi) <= 0.5 + 1e-12);
    Ok(SearchRegion {
        sigma_lo,
        sigma_hi,
        scan_sigma_hi,
        omega_max,
        boundary_min_modulus: min_h_top.max(0.0),
    })
}

/// Options for the winding-number walker.
#[derive(Debug, Clone, Copy)]
pub struct WindingOptions {
    /// Maximum bisection depth per boundary segment.
    pub max_depth: u32,
    /// Reject the boundary if |H| drops below this floor on a sample.
    pub min_modulus: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        WindingOptions {
            max_depth: 42,
            min_modulus: 1e-9,
        }
    }
}

/// Walks the positively oriented boundary of `rect`, accumulating the change
/// of `arg f`; each accepted step changes the argument by less than pi/2.
/// Returns the winding number and the smallest sampled `|f|`.
pub fn winding_number<F>(f: &mut F, rect: Rect, opts: &WindingOptions) -> Result<(i64, f64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let corners = [
        Complex64::new(rect.re0, rect.im0),
        Complex64::new(rect.re1, rect.im0),
        Complex64::new(rect.re1, rect.im1),
        Complex64::new(rect.re0, rect.im1),
        Complex64::new(rect.re0, rect.im0),
    ];
    let mut total = 0.0f64;
    let mut min_mod = f64::MAX;
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = initial_pieces(a, b);
        let mut za = f(a)?;
        check_floor(za, a, opts)?;
        min_mod = min_mod.min(za.norm());
        let mut ta = 0.0f64;
        for &tb in &pieces {
            let pb = a + (b - a) * tb;
            let zb = f(pb)?;
            check_floor(zb, pb, opts)?;
            min_mod = min_mod.min(zb.norm());
            total += arg_step(f, a, b, ta, tb, za, zb, opts, 0, &mut min_mod)?;
            ta = tb;
            za = zb;
        }
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let rounded = w.round();
    if (w - rounded).abs() > 0.05 {
        return Err(Error::BoundaryNearZero(format!(
            "winding total {w} is not close to an integer on {rect:?}"
        )));
    }
    Ok((rounded as i64, min_mod))
}

fn check_floor(z: Complex64, at: Complex64, opts: &WindingOptions) -> Result<()> {
    if !z.norm().is_finite() || z.norm() < opts.min_modulus {
        return Err(Error::BoundaryNearZero(format!(
            "|f({at})| = {:e} below floor",
            z.norm()
        )));
    }
    Ok(())
}

/// Initial subdivision of an axis-aligned edge, tied to the known feature
/// scales of `H`: fine near the origin of the traversed coordinate, steps
/// growing proportionally to it further out (the transform's features widen
/// linearly with distance). Returned as parameters `t in (0, 1]`.
fn initial_pieces(a: Complex64, b: Complex64) -> Vec<f64> {
    let (c0, c1) = if (a.re - b.re).abs() < 1e-300 {
        (a.im, b.im)
    } else {
        (a.re, b.re)
    };
    let lo = c0.min(c1);
    let hi = c0.max(c1);
    let len = hi - lo;
    if len <= 0.0 {
        return vec![1.0];
    }
    // Ascending breakpoints from lo with step max(0.2, |coord|/64).
    let mut marks = Vec::new();
    let mut x = lo;
    loop {
        let step = 0.2f64.max(x.abs() / 64.0);
        x += step;
        if x >= hi - 1e-12 * (1.0 + hi.abs()) || marks.len() > 200_000 {
            break;
        }
        marks.push(x);
    }
    marks.push(hi);
    // Map to parameters along the direction of travel.
    let mut ts: Vec<f64> = if c0 <= c1 {
        marks.iter().map(|m| (m - c0) / (c1 - c0)).collect()
    } else {
        let mut v: Vec<f64> = marks.iter().rev().map(|m| (m - c0) / (c1 - c0)).collect();
        // the reversed list ends at t for `lo`; ensure the terminal 1.0
        v.push(1.0);
        v
    };
    ts.retain(|t| *t > 0.0 && *t <= 1.0);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    if ts.last().map(|t| (t - 1.0).abs() > 1e-12).unwrap_or(true) {
        ts.push(1.0);
    }
    ts
}

#[allow(clippy::too_many_arguments)]
fn arg_step<F>(
    f: &mut F,
    a: Complex64,
    b: Complex64,
    ta: f64,
    tb: f64,
    za: Complex64,
    zb: Complex64,
    opts: &WindingOptions,
    depth: u32,
    min_mod: &mut f64,
) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let dphi = (zb / za).arg();
    let dlog = (zb.norm() / za.norm()).ln().abs();
    if dphi.abs() < std::f64::consts::FRAC_PI_2 && dlog < 0.7 {
        return Ok(dphi);
    }
    if depth >= opts.max_depth {
        return Err(Error::BoundaryNearZero(format!(
            "phase step not resolved after {} bisections near t in [{ta}, {tb}]",
            opts.max_depth
        )));
    }
    let tm = 0.5 * (ta + tb);
    let pm = a + (b - a) * tm;
    let zm = f(pm)?;
    check_floor(zm, pm, opts)?;
    *min_mod = min_mod.min(zm.norm());
    Ok(arg_step(f, a, b, ta, tm, za, zm, opts, depth + 1, min_mod)?
        + arg_step(f, a, b, tm, tb, zm, zb, opts, depth + 1, min_mod)?)
}

/// Number of zeros of `H` (with multiplicity) inside `rect`.
pub fn count_zeros(spec: &KernelSpec, rect: Rect, acc: &TransformAccuracy) -> Result<i64> {
    let mut f = |s: Complex64| Ok(eval_h(spec, s, acc)?.value);
    winding_number(&mut f, rect, &WindingOptions::default()).map(|(w, _)| w)
}

/// A refined zero.
#[derive(Debug, Clone, Copy)]
pub struct RefinedZero {
    pub location: Complex64,
    pub multiplicity: u32,
    pub residual: f64,
}

/// Newton refinement from `seed`, with multiplicity read off a small circle
/// and cross-checked against the derivative magnitudes.
pub fn refine_zero(
    spec: &KernelSpec,
    seed: Complex64,
    acc: &TransformAccuracy,
) -> Result<RefinedZero> {
    let mut z = seed;
    let mut converged = false;
    let mut h_norm = f64::MAX;
    for _ in 0..100 {
        let h = eval_h(spec, z, acc)?;
        h_norm = h.value.norm();
        if h_norm <= 1e-12 {
            converged = true;
            break;
        }
        let dh = eval_h_deriv(spec, z, 1, acc)?;
        if dh.value.norm() < 1e-300 {
            break;
        }
        let mut step = h.value / dh.value;
        // Damp wild steps; the zeros of interest are isolated.
        let cap = 0.5 * (1.0 + z.norm());
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        z -= step;
        if z.re <= 0.0 {
            z = Complex64::new(1e-3, z.im);
        }
        if step.norm() < 1e-14 * (1.0 + z.norm()) && h_norm < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged && h_norm > 1e-10 {
        return Err(Error::Refinement(format!(
            "Newton stalled near {z} with |H| = {h_norm:e}"
        )));
    }
    // Final polish and residual at doubled accuracy: the Newton limit above
    // is a zero of the base-accuracy evaluator, which can sit a full
    // truncation gap away from the finer one.
    let fine = acc.doubled();
    for _ in 0..4 {
        let h = eval_h(spec, z, &fine)?;
        if h.value.norm() <= 1e-13 {
            break;
        }
        let dh = eval_h_deriv(spec, z, 1, &fine)?;
        if dh.value.norm() < 1e-300 {
            break;
        }
        z -= h.value / dh.value;
    }
    let residual = eval_h(spec, z, &fine)?.value.norm();
    if residual > 1e-10 {
        return Err(Error::Refinement(format!(
            "refined zero {z} keeps |H| = {residual:e} at doubled accuracy"
        )));
    }
    // Multiplicity estimate 1: winding number on a small circle.
    let mu_winding = circle_winding(spec, z, 1e-3, acc)?;
    // Multiplicity estimate 2: first derivative order with non-small value
    // (compared as |H^(j)|/j! to keep the orders on equal footing).
    let mut mu_deriv = 0u32;
    let mut fact = 1.0f64;
    for order in 1..=4u32 {
        fact *= order as f64;
        let d = eval_h_deriv(spec, z, order, acc)?;
        if d.value.norm() / fact > 1e-6 {
            mu_deriv = order;
            break;
        }
    }
    if mu_deriv == 0 || mu_winding <= 0 || mu_deriv != mu_winding as u32 {
        return Err(Error::MultiplicityAmbiguous(format!(
            "zero near {z}: circle winding gives {mu_winding}, derivative test gives {mu_deriv}"
        )));
    }
    Ok(RefinedZero {
        location: z,
        multiplicity: mu_deriv,
        residual,
    })
}

fn circle_winding(
    spec: &KernelSpec,
    center: Complex64,
    radius: f64,
    acc: &TransformAccuracy,
) -> Result<i64> {
    let mut prev: Option<Complex64> = None;
    let mut total = 0.0;
    let n = 48;
    for k in 0..=n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let p = center + Complex64::new(radius * th.cos(), radius * th.sin());
        let z = eval_h(spec, p, acc)?.value;
        if z.norm() < 1e-13 {
            return Err(Error::BoundaryNearZero(format!(
                "|H| ~ 0 on the multiplicity circle at {p}"
            )));
        }
        if let Some(q) = prev {
            let d = (z / q).arg();
            if d.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::BoundaryNearZero(
                    "phase step too large on multiplicity circle".into(),
                ));
            }
            total += d;
        }
        prev = Some(z);
    }
    Ok((total / (2.0 * std::f64::consts::PI)).round() as i64)
}

/// A cataloged zero (one row per zero, conjugates included).
#[derive(Debug, Clone, Copy)]
pub struct CatalogZero {
    pub location: Complex64,
    pub multiplicity: u32,
    pub residual: f64,
}

/// The zero catalog with the derived dominance data.
#[derive(Debug, Clone)]
pub struct ZeroCatalog {
    pub region: SearchRegion,
    /// All zeros in the region, conjugate pairs included, sorted by
    /// increasing imaginary part then real part.
    pub zeros: Vec<CatalogZero>,
    pub r_max: f64,
    /// Indices into `zeros` with `Re = R_max` (clustering tolerance 1e-6).
    pub z_max: Vec<usize>,
    pub mu_max: u32,
    /// Indices of the maximal-multiplicity subset of `z_max`.
    pub z_dom: Vec<usize>,
    /// The element of `Z_dom` with positive imaginary part and minimal
    /// modulus.
    pub z_min: Complex64,
    /// Winding count of the whole upper-half region.
    pub total_winding: i64,
}

impl ZeroCatalog {
    /// Zeros of `Z_dom` with positive imaginary part.
    pub fn z_dom_upper(&self) -> Vec<CatalogZero> {
        self.z_dom
            .iter()
            .map(|&i| self.zeros[i])
            .filter(|z| z.location.im > 0.0)
            .collect()
    }

    /// Members of `Z_max` that are not in `Z_dom`.
    pub fn z_max_subdominant(&self) -> Vec<CatalogZero> {
        self.z_max
            .iter()
            .filter(|i| !self.z_dom.contains(i))
            .map(|&i| self.zeros[i])
            .collect()
    }

    /// Real parts strictly below `R_max` present in the catalog (descending).
    pub fn lower_real_parts(&self) -> Vec<f64> {
        let mut parts: Vec<f64> = self
            .zeros
            .iter()
            .map(|z| z.location.re)
            .filter(|&re| re < self.r_max - 1e-6)
            .collect();
        parts.sort_by(|a, b| b.total_cmp(a));
        parts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        parts
    }
}

struct QuadtreeState<'a> {
    spec: &'a KernelSpec,
    acc: TransformAccuracy,
    found: Vec<RefinedZero>,
    boxes_counted: u64,
    leaf_diameter: f64,
}

/// Quadtree subdivision of the region: boxes with nonzero winding are split
/// until small, then Newton-refined. Split lines are jittered when a boundary
/// passes too close to a zero.
pub fn build_catalog(
    calib: &CalibrationResult,
    region: &SearchRegion,
    acc: &TransformAccuracy,
) -> Result<ZeroCatalog> {
    build_catalog_with_leaf(calib, region, acc, 2e-3)
}

/// `build_catalog` with an explicit quadtree leaf diameter; the catalog must
/// be invariant under shrinking it.
pub fn build_catalog_with_leaf(
    calib: &CalibrationResult,
    region: &SearchRegion,
    acc: &TransformAccuracy,
    leaf_diameter: f64,
) -> Result<ZeroCatalog> {
    let spec = &calib.spec;
    let root = Rect {
        re0: region.sigma_lo,
        re1: region.scan_sigma_hi,
        im0: 0.0,
        im1: region.omega_max,
    };
    let mut st = QuadtreeState {
        spec,
        acc: *acc,
        found: Vec::new(),
        boxes_counted: 0,
        leaf_diameter,
    };
    let total = count_child(&mut st, root)?;
    subdivide(&mut st, root, total, 0)?;

    // Deduplicate refinements that converged to the same point.
    let mut zeros_upper: Vec<RefinedZero> = Vec::new();
    for z in st.found {
        if zeros_upper
            .iter()
            .any(|e| (e.location - z.location).norm() < 1e-8 * (1.0 + z.location.norm()))
        {
            continue;
        }
        zeros_upper.push(z);
    }
    let sum_mu: i64 = zeros_upper.iter().map(|z| z.multiplicity as i64).sum();
    if sum_mu != total {
        return Err(Error::Refinement(format!(
            "winding total {total} does not match catalog multiplicity sum {sum_mu}"
        )));
    }
    // No zero sits on the real axis (H > 1 there); every refined zero must
    // have strictly positive imaginary part.
    for z in &zeros_upper {
        if z.location.im <= 1e-8 {
            return Err(Error::Refinement(format!(
                "refined zero {} sits on the real axis",
                z.location
            )));
        }
    }
    // Mirror into conjugate pairs.
    let mut zeros: Vec<CatalogZero> = Vec::new();
    for z in &zeros_upper {
        zeros.push(CatalogZero {
            location: z.location.conj(),
            multiplicity: z.multiplicity,
            residual: z.residual,
        });
        zeros.push(CatalogZero {
            location: z.location,
            multiplicity: z.multiplicity,
            residual: z.residual,
        });
    }
    zeros.sort_by(|a, b| {
        (a.location.im, a.location.re)
            .partial_cmp(&(b.location.im, b.location.re))
            .unwrap()
    });
    let r_max = zeros.iter().map(|z| z.location.re).fold(f64::MIN, f64::max);
    let z_max: Vec<usize> = (0..zeros.len())
        .filter(|&i| (zeros[i].location.re - r_max).abs() <= 1e-6)
        .collect();
    let mu_max = z_max.iter().map(|&i| zeros[i].multiplicity).max().unwrap();
    let z_dom: Vec<usize> = z_max
        .iter()
        .cloned()
        .filter(|&i| zeros[i].multiplicity == mu_max)
        .collect();
    // z_min: minimal modulus among Z_dom with Im > 0; a tie is surfaced.
    let mut upper: Vec<&CatalogZero> = z_dom
        .iter()
        .map(|&i| &zeros[i])
        .filter(|z| z.location.im > 0.0)
        .collect();
    upper.sort_by(|a, b| a.location.norm().total_cmp(&b.location.norm()));
    if upper.len() >= 2 && (upper[0].location.norm() - upper[1].location.norm()).abs() < 1e-8 {
        return Err(Error::MultiplicityAmbiguous(format!(
            "two dominant zeros share the minimal modulus: {} and {}",
            upper[0].location, upper[1].location
        )));
    }
    let z_min = upper[0].location;
    Ok(ZeroCatalog {
        region: region.clone(),
        zeros,
        r_max,
        z_max,
        mu_max,
        z_dom,
        z_min,
        total_winding: total,
    })
}

fn subdivide(st: &mut QuadtreeState, rect: Rect, count: i64, depth: u32) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if depth > 90 {
        return Err(Error::Refinement(format!(
            "quadtree depth exhausted at {rect:?} with count {count}"
        )));
    }
    if rect.diameter() < st.leaf_diameter {
        let z = refine_zero(st.spec, rect.center(), &st.acc)?;
        if z.multiplicity as i64 != count {
            return Err(Error::MultiplicityAmbiguous(format!(
                "leaf at {rect:?} holds {count} zeros but refinement found multiplicity {}",
                z.multiplicity
            )));
        }
        st.found.push(z);
        return Ok(());
    }
    // Split the longer side; the omega axis is split at a geometric midpoint
    // when it spans more than a factor of 4 (features widen with height).
    let split_vertical = rect.height() > rect.width();
    let mut jitter = 0.5f64;
    for attempt in 0..9 {
        let (ra, rb) = if split_vertical {
            let mid = if rect.im1 > 4.0 * rect.im0.max(1.0) {
                (rect.im0.max(1.0) * rect.im1).sqrt() * (0.9 + 0.2 * jitter)
            } else {
                rect.im0 + (rect.im1 - rect.im0) * jitter
            };
            (Rect { im1: mid, ..rect }, Rect { im0: mid, ..rect })
        } else {
            let mid = rect.re0 + (rect.re1 - rect.re0) * jitter;
            (Rect { re1: mid, ..rect }, Rect { re0: mid, ..rect })
        };
        let counts = (count_child(st, ra), count_child(st, rb));
        match counts {
            (Ok(ca), Ok(cb)) => {
                if ca + cb != count {
                    return Err(Error::Refinement(format!(
                        "winding is not additive: {count} != {ca} + {cb} at {rect:?}"
                    )));
                }
                subdivide(st, ra, ca, depth + 1)?;
                subdivide(st, rb, cb, depth + 1)?;
                return Ok(());
            }
            (Err(Error::BoundaryNearZero(_)), _) | (_, Err(Error::BoundaryNearZero(_))) => {
                // Shift the split line and retry.
                jitter = 0.5
                    + 0.07 * (attempt + 1) as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Err(Error::BoundaryNearZero(format!(
        "could not find a clean split line for {rect:?}"
    )))
}

fn count_child(st: &mut QuadtreeState, rect: Rect) -> Result<i64> {
    st.boxes_counted += 1;
    let spec = st.spec;
    let acc = st.acc;
    let mut f = |s: Complex64| Ok(eval_h(spec, s, &acc)?.value);
    winding_number(&mut f, rect, &WindingOptions::default()).map(|(w, _)| w)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Winding oracle on a known polynomial: (z - a)(z - b)^2.
    #[test]
    fn winding_counts_polynomial_zeros() {
        let a = Complex64::new(1.0, 1.0);
        let b = Complex64::new(2.0, -0.5);
        let mut f = |z: Complex64| -> crate::Result<Complex64> { Ok((z - a) * (z - b) * (z - b)) };
        let opts = WindingOptions::default();
        let all = Rect {
            re0: 0.0,
            re1: 3.0,
            im0: -2.0,
            im1: 2.0,
        };
        assert_eq!(winding_number(&mut f, all, &opts).unwrap().0, 3);
        let only_a = Rect {
            re0: 0.0,
            re1: 1.5,
            im0: 0.0,
            im1: 2.0,
        };
        assert_eq!(winding_number(&mut f, only_a, &opts).unwrap().0, 1);
        let only_b = Rect {
            re0: 1.5,
            re1: 3.0,
            im0: -2.0,
            im1: 0.0,
        };
        assert_eq!(winding_number(&mut f, only_b, &opts).unwrap().0, 2);
        let none = Rect {
            re0: 4.0,
            re1: 6.0,
            im0: -1.0,
            im1: 1.0,
        };
        assert_eq!(winding_number(&mut f, none, &opts).unwrap().0, 0);
    }

    #[test]
    fn winding_rejects_zero_on_boundary() {
        let a = Complex64::new(1.0, 0.0);
        let mut f = |z: Complex64| -> crate::Result<Complex64> { Ok(z - a) };
        let through = Rect {
            re0: 0.0,
            re1: 1.0,
            im0: -1.0,
            im1: 1.0,
        };
        assert!(matches!(
            winding_number(&mut f, through, &WindingOptions::default()),
            Err(Error::BoundaryNearZero(_))
        ));
    }

    #[test]
    fn winding_handles_double_zero() {
        let b = Complex64::new(0.3, 0.7);
        let mut f = |z: Complex64| -> crate::Result<Complex64> { Ok((z - b) * (z - b)) };
        let rect = Rect {
            re0: 0.0,
            re1: 1.0,
            im0: 0.0,
            im1: 1.4,
        };
        assert_eq!(
            winding_number(&mut f, rect, &WindingOptions::default())
                .unwrap()
                .0,
            2
        );
    }
}
