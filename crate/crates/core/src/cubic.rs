//! Real roots of polynomials of degree at most three.

use std::f64::consts::TAU;

/// `c[0] + c[1] x + c[2] x^2 + c[3] x^3`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly3 {
    pub c: [f64; 4],
}

impl Poly3 {
    pub fn new(c: [f64; 4]) -> Self {
        Self { c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c[3] * x + self.c[2]) * x + self.c[1]) * x + self.c[0]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c[3] * x + 2.0 * self.c[2]) * x + self.c[1]
    }

    fn second_derivative(&self, x: f64) -> f64 {
        6.0 * self.c[3] * x + 2.0 * self.c[2]
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new([0, 1, 2, 3].map(|i| self.c[i] + o.c[i]))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.c.map(|v| v * s))
    }

    /// Sum of absolute term values at `x`, the natural size of a rounding error.
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.c[0].abs() + ax * (self.c[1].abs() + ax * (self.c[2].abs() + ax * self.c[3].abs()))
    }

    /// Distinct real roots, ascending, each polished by Newton steps.
    pub fn real_roots(&self) -> Vec<f64> {
        let [c0, c1, c2, c3] = self.c;
        let mut roots = if c3 != 0.0 {
            monic_cubic_roots(c2 / c3, c1 / c3, c0 / c3)
        } else if c2 != 0.0 {
            quadratic_roots(c2, c1, c0)
        } else if c1 != 0.0 {
            vec![-c0 / c1]
        } else {
            Vec::new()
        };
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots.retain(|r| r.is_finite());
        roots.sort_by(|a, b| a.total_cmp(b));
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1e-300));
        roots
    }

    /// Newton steps, kept only while they reduce `|p|`.
    pub fn polish(&self, x0: f64) -> f64 {
        let mut x = x0;
        let mut fx = self.eval(x).abs();
        for _ in 0..8 {
            let d = self.derivative(x);
            if d == 0.0 || fx == 0.0 {
                break;
            }
            let nx = x - self.eval(x) / d;
            let nf = self.eval(nx).abs();
            if !(nf < fx) {
                break;
            }
            x = nx;
            fx = nf;
        }
        x
    }

    /// Newton on the derivative, for locating a tangency (double root).
    fn polish_extremum(&self, x0: f64) -> f64 {
        let mut x = x0;
        for _ in 0..8 {
            let d2 = self.second_derivative(x);
            if d2 == 0.0 {
                break;
            }
            let nx = x - self.derivative(x) / d2;
            if !nx.is_finite() {
                break;
            }
            x = nx;
        }
        x
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        let x = -b / (2.0 * a);
        return vec![x];
    }
    // the stable pair of formulas
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    let mut out = vec![q / a];
    if q != 0.0 {
        out.push(c / q);
    }
    out
}

/// Roots of `x^3 + a x^2 + b x + c`; a near-tangent double root is reported
/// as a candidate so polishing can confirm it.
fn monic_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let shift = a / 3.0;
    let q3 = q * q * q;
    if r * r < q3 {
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let sq = -2.0 * q.sqrt();
        (0..3)
            .map(|k| sq * ((theta + TAU * k as f64) / 3.0).cos() - shift)
            .collect()
    } else {
        let big = -(r.abs() + (r * r - q3).sqrt()).cbrt().copysign(r);
        let small = if big == 0.0 { 0.0 } else { q / big };
        let mut out = vec![big + small - shift];
        if q > 0.0 {
            out.push(q.sqrt().copysign(r) - shift);
        }
        out
    }
}

/// Real roots of `p` that survive the tangency check: candidates from the
/// closed form whose polished value is not a root are dropped.
pub fn verified_roots(p: &Poly3) -> Vec<f64> {
    let mut out = Vec::new();
    for x in p.real_roots() {
        let v = p.eval(x).abs();
        if v <= 1e-12 * p.magnitude(x).max(f64::MIN_POSITIVE) {
            out.push(x);
        } else {
            // maybe a tangency the closed form approximated
            let e = p.polish_extremum(x);
            if p.eval(e).abs() <= 1e-12 * p.magnitude(e) {
                out.push(e);
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_roots(k: f64, r: [f64; 3]) -> Poly3 {
        let [a, b, c] = r;
        Poly3::new([
            -k * a * b * c,
            k * (a * b + a * c + b * c),
            -k * (a + b + c),
            k,
        ])
    }

    #[test]
    fn three_real() {
        let p = from_roots(2.0, [-3.0, 0.5, 4.0]);
        let r = verified_roots(&p);
        assert_eq!(r.len(), 3);
        for (x, y) in r.iter().zip([-3.0, 0.5, 4.0]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn one_real() {
        // (x - 2)(x^2 + 1)
        let p = Poly3::new([-2.0, 1.0, -2.0, 1.0]);
        let r = verified_roots(&p);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn double_root() {
        let p = from_roots(-1.5, [1.0, 1.0, -2.0]);
        let r = verified_roots(&p);
        assert!(r.iter().any(|x| (x - 1.0).abs() < 1e-7));
        assert!(r.iter().any(|x| (x + 2.0).abs() < 1e-12));
    }

    #[test]
    fn lower_degree() {
        let p = Poly3::new([-6.0, 1.0, 1.0, 0.0]);
        let r = verified_roots(&p);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 3.0).abs() < 1e-14 && (r[1] - 2.0).abs() < 1e-14);
        let p = Poly3::new([3.0, -1.5, 0.0, 0.0]);
        assert_eq!(verified_roots(&p), vec![2.0]);
        assert!(verified_roots(&Poly3::new([1.0, 0.0, 0.0, 0.0])).is_empty());
    }

    proptest! {
        #[test]
        fn recovers_distinct_roots(
            k in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64],
            a in -50.0..50.0f64,
            gap1 in 1e-3..30.0f64,
            gap2 in 1e-3..30.0f64,
        ) {
            let roots = [a, a + gap1, a + gap1 + gap2];
            let p = from_roots(k, roots);
            let r = verified_roots(&p);
            prop_assert_eq!(r.len(), 3);
            for (x, y) in r.iter().zip(roots) {
                prop_assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()), "{} vs {}", x, y);
            }
        }

        #[test]
        fn roots_are_roots(c in proptest::array::uniform4(-10.0..10.0f64)) {
            let p = Poly3::new(c);
            for x in verified_roots(&p) {
                prop_assert!(p.eval(x).abs() <= 1e-10 * p.magnitude(x).max(1e-300));
            }
        }
    }
}
