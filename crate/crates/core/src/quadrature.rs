//! Adaptive Simpson quadrature in one and two dimensions.

/// Recursion depth cap of [`simpson`].
pub const MAX_DEPTH: u32 = 40;

/// `∫_a^b f` by adaptive Simpson with absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || crate::math::abs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `∫_{ax}^{bx} ∫_{lo(x)}^{hi(x)} f(x, y) dy dx` by nested adaptive Simpson.
/// The inner bounds may depend on `x`, which keeps sheared integrands inside
/// a narrow band.
pub fn simpson_2d<F, B>(f: F, ax: f64, bx: f64, inner: B, tol: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
    B: Fn(f64) -> (f64, f64),
{
    let width = bx - ax;
    simpson(
        |x| {
            let (lo, hi) = inner(x);
            simpson(|y| f(x, y), lo, hi, tol / width.max(1.0))
        },
        ax,
        bx,
        tol,
    )
}
