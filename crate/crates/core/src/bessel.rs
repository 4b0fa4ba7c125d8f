//! Bessel functions of the first kind for integer order.

#[allow(unused_imports)]
use num_traits::Float;

/// Above this argument the ascending series loses too many digits to
/// cancellation and backward recurrence takes over.
const SERIES_LIMIT: f64 = 12.0;

/// `J_p(x)` for integer `p` and finite real `x`.
///
/// Uses `J_{−p}(x) = (−1)^p J_p(x)` and `J_p(−x) = (−1)^p J_p(x)`.
pub fn bessel_j(p: i32, x: f64) -> f64 {
    let n = p.unsigned_abs();
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT { series(n, ax) } else { miller(n, ax) };
    let flips = (p < 0) as u32 + (x < 0.0) as u32;
    if n % 2 == 1 && flips == 1 {
        -v
    } else {
        v
    }
}

/// `[J_{−P}(x), …, J_P(x)]`.
pub fn bessel_vector(p_max: usize, x: f64) -> alloc::vec::Vec<f64> {
    let p_max = p_max as i32;
    (-p_max..=p_max).map(|p| bessel_j(p, x)).collect()
}

fn series(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let mut term = 1.0;
    for i in 1..=n {
        term *= x / (2.0 * i as f64);
    }
    if term == 0.0 {
        return 0.0;
    }
    let q = x * x / 4.0;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -q / (m * (m + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && m > x {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J₀ + 2 Σ J_{2k} = 1`.
fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut start = (top + 20.0 + (60.0 * top).sqrt()) as u32;
    start += start % 2;
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut sum = 0.0;
    let mut jn = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == n {
            jn = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            sum += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            sum *= 1e-250;
            jn *= 1e-250;
        }
    }
    jn / (sum + cur)
}
