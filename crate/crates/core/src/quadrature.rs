//! Adaptive Gauss–Kronrod (7/15) quadrature with caller-supplied breakpoints.

// Kronrod abscissae on [0, 1] (symmetric), with Kronrod and Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 48;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        return value;
    }
    let mid = 0.5 * (a + b);
    adapt(f, a, mid, 0.5 * tol, depth + 1) + adapt(f, mid, b, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Interior `breakpoints` (kinks or discontinuities of `f`) split the range up front;
/// points outside `(a, b)` are ignored. The tolerance is shared across pieces in
/// proportion to their length.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, breakpoints: &[f64]) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup();
    let mut knots = Vec::with_capacity(cuts.len() + 2);
    knots.push(a);
    knots.extend(cuts);
    knots.push(b);
    let width = b - a;
    knots
        .windows(2)
        .map(|w| adapt(&f, w[0], w[1], tol * (w[1] - w[0]) / width, 0))
        .sum()
}

fn gk15_vec<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, buf: &mut [f64], value: &mut [f64], gauss: &mut [f64]) -> f64 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    f(center, buf);
    for k in 0..buf.len() {
        value[k] = buf[k] * WGK[7];
        gauss[k] = buf[k] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, buf);
        let lower = buf.to_vec();
        f(center + dx, buf);
        for k in 0..buf.len() {
            let sum = lower[k] + buf[k];
            value[k] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
    }
    let mut err = 0.0f64;
    for k in 0..value.len() {
        err = err.max(((value[k] - gauss[k]) * half).abs());
        value[k] *= half;
    }
    err
}

fn adapt_vec<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, tol: f64, depth: u32, out: &mut [f64]) {
    let dim = out.len();
    let (mut buf, mut value, mut gauss) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let err = gk15_vec(f, a, b, &mut buf, &mut value, &mut gauss);
    if err <= tol || depth >= MAX_DEPTH || b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        out.iter_mut().zip(&value).for_each(|(o, v)| *o += v);
        return;
    }
    let mid = 0.5 * (a + b);
    adapt_vec(f, a, mid, 0.5 * tol, depth + 1, out);
    adapt_vec(f, mid, b, 0.5 * tol, depth + 1, out);
}

/// Vector-valued [`integrate`]: `f(x, out)` fills `dim` integrands at `x`, and all of
/// them share one subdivision, refined until every component meets `tol`.
pub fn integrate_vec<F: Fn(f64, &mut [f64])>(f: F, dim: usize, a: f64, b: f64, tol: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if !(b > a) || dim == 0 {
        return out;
    }
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup();
    let mut knots = Vec::with_capacity(cuts.len() + 2);
    knots.push(a);
    knots.extend(cuts);
    knots.push(b);
    let width = b - a;
    for w in knots.windows(2) {
        adapt_vec(&f, w[0], w[1], tol * (w[1] - w[0]) / width, 0, &mut out);
    }
    out
}
