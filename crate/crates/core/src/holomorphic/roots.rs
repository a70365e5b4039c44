use super::Polynomial;
use crate::C64;

/// All roots of `p` (with repetition) by Aberth–Ehrlich simultaneous iteration.
///
/// Constant and zero polynomials have no roots.
pub fn aberth(p: &Polynomial) -> Vec<C64> {
    let n = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(n) => n,
    };
    let c = p.coeffs();
    if n == 1 {
        return vec![-c[0] / c[1]];
    }
    let dp = p.derivative();
    let lead = c[n].norm();
    let radius = if c[0].norm() > 0.0 {
        (c[0].norm() / lead).powf(1.0 / n as f64)
    } else {
        1.0
    };
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            C64::from_polar(radius, angle)
        })
        .collect();
    let mut done = vec![false; n];
    for _ in 0..500 {
        let mut all = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let pv = p.eval(z[k]);
            let dv = dp.eval(z[k]);
            if pv.norm() <= 4.0 * f64::EPSILON * p.eval_scale(z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = pv / dv;
            let s: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| C64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if !w.is_finite() {
                done[k] = true;
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * z[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_simple_roots() {
        let want = [
            C64::new(0.3, 0.1),
            C64::new(-2.0, 0.0),
            C64::new(0.0, 5.0),
            C64::new(1.0, -1.0),
        ];
        let p = Polynomial::from_roots(&want);
        let got = aberth(&p);
        for w in want {
            let best = got
                .iter()
                .map(|g| (g - w).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "{w} missed by {best}");
        }
    }

    #[test]
    fn constant_has_no_roots() {
        assert!(aberth(&Polynomial::constant(C64::new(2.0, 0.0))).is_empty());
    }
}
