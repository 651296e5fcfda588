//! Lag polynomials: mapping unconstrained parameters into the
//! stationary/invertible region and checking root moduli.

use num_complex::Complex64;

/// Partial autocorrelations are kept strictly inside (-1, 1) by this factor.
const PACF_SHRINK: f64 = 0.999;

/// Maps unconstrained reals to coefficients `c` such that
/// `1 - c1 z - ... - cp z^p` has every root outside the unit circle
/// (tanh to partial autocorrelations, then Durbin-Levinson).
pub fn constrain(raw: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = raw.iter().map(|u| PACF_SHRINK * u.tanh()).collect();
    let mut coef: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = coef.clone();
        for j in 0..k {
            coef[j] = prev[j] - r * prev[k - 1 - j];
        }
        coef.push(r);
    }
    coef
}

/// Inverse of [`constrain`] (reverse Durbin-Levinson, then atanh).
/// Returns `None` when the coefficients are outside the region.
pub fn unconstrain(coef: &[f64]) -> Option<Vec<f64>> {
    let p = coef.len();
    let mut cur = coef.to_vec();
    let mut pacf = vec![0.0; p];
    for k in (0..p).rev() {
        let r = cur[k];
        if r.abs() >= PACF_SHRINK {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + r * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(pacf.iter().map(|r| (r / PACF_SHRINK).atanh()).collect())
}

/// Roots of `1 + a1 z + ... + an z^n`. Trailing zero coefficients lower the degree.
pub fn lag_roots(a: &[f64]) -> Vec<Complex64> {
    let degree = match a.iter().rposition(|c| *c != 0.0) {
        Some(i) => i + 1,
        None => return Vec::new(),
    };
    // monic form: z^n + (a_{n-1}/a_n) z^{n-1} + ... + 1/a_n
    let lead = a[degree - 1];
    let mut monic: Vec<Complex64> = Vec::with_capacity(degree + 1);
    monic.push(Complex64::new(1.0 / lead, 0.0));
    for c in &a[..degree - 1] {
        monic.push(Complex64::new(c / lead, 0.0));
    }
    monic.push(Complex64::new(1.0, 0.0));
    durand_kerner(&monic)
}

/// Smallest root modulus of `1 + a1 z + ...`, infinite for a constant polynomial.
pub fn min_root_modulus(a: &[f64]) -> f64 {
    lag_roots(a).iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

// `coef` in ascending powers, last entry 1.
fn durand_kerner(coef: &[Complex64]) -> Vec<Complex64> {
    let n = coef.len() - 1;
    let eval = |z: Complex64| coef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|i| seed.powu(i as u32)).collect();
    // scale the starting circle to the root bound
    let bound = 1.0 + coef[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    for r in roots.iter_mut() {
        *r *= bound;
    }
    for _ in 0..500 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            let zi = roots[i];
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (zi - roots[j]));
            if denom.norm() == 0.0 {
                continue;
            }
            let delta = eval(zi) / denom;
            roots[i] = zi - delta;
            change = change.max(delta.norm());
        }
        if change < 1e-15 {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_root_is_reciprocal() {
        // 1 - 0.5 z
        let m = min_root_modulus(&[-0.5]);
        assert!((m - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_roots() {
        // (1 - z/2)(1 - z/3) = 1 - 5/6 z + 1/6 z^2
        let mut roots: Vec<f64> = lag_roots(&[-5.0 / 6.0, 1.0 / 6.0]).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] - 2.0).abs() < 1e-10 && (roots[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn constrained_coefficients_are_stationary() {
        for seed in 0..200u64 {
            let raw: Vec<f64> = (0..5).map(|i| (((seed * 31 + i * 17) % 97) as f64 / 97.0 - 0.5) * 12.0).collect();
            for p in 1..=5 {
                let c = constrain(&raw[..p]);
                let lag: Vec<f64> = c.iter().map(|x| -x).collect();
                assert!(min_root_modulus(&lag) > 1.0, "seed {seed} p {p}: {c:?}");
            }
        }
    }

    #[test]
    fn unconstrain_inverts() {
        let raw = [0.3, -1.2, 0.7];
        let back = unconstrain(&constrain(&raw)).unwrap();
        for (a, b) in raw.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(unconstrain(&[1.5]).is_none());
    }
}
