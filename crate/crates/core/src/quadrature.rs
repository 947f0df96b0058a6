//! Fixed-order Gauss–Legendre quadrature.

use crate::scalar::Scalar;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`; exact for polynomials of
/// degree `2n - 1`.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Tricomi initial guess; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "a quadrature rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let one = T::one();
        let two = T::of(2.0);
        let nf = T::of_usize(n);
        // Roots come in +- pairs; solve for the positive half.
        for i in 0..n.div_ceil(2) {
            let guess = T::PI() * (T::of_usize(i) + T::of(0.75)) / (nf + T::of(0.5));
            let mut x = guess.cos();
            let mut deriv = T::zero();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                let dx = p / dp;
                x = x - dx;
                if dx.abs() <= T::epsilon() * x.abs().max(one) {
                    deriv = legendre_with_derivative(n, x).1;
                    break;
                }
            }
            let w = two / ((one - x * x) * deriv * deriv);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    /// Smallest rule that integrates degree-`degree` polynomials exactly.
    pub fn exact_for_degree(degree: usize) -> Self {
        Self::new((degree + 1).div_ceil(2).max(1))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::of(2.0);
        let mid = (a + b) / T::of(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }

    pub fn integrate(&self, a: T, b: T, mut f: impl FnMut(T) -> T) -> T {
        self.mapped(a, b)
            .fold(T::zero(), |acc, (x, w)| acc + w * f(x))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p_prev = T::one();
    let mut p = x;
    for k in 2..=n {
        let kf = T::of_usize(k);
        let next = ((T::of(2.0) * kf - T::one()) * x * p - (kf - T::one()) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::of_usize(n);
    let dp = nf * (x * p - p_prev) / (x * x - T::one());
    (p, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules_match_closed_forms() {
        let r = GaussLegendre::<f64>::new(1);
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
        let r = GaussLegendre::<f64>::new(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
        let r = GaussLegendre::<f64>::new(3);
        assert!((r.nodes()[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_on_monomials() {
        for n in [1usize, 2, 5, 17, 64, 201] {
            let rule = GaussLegendre::<f64>::new(n);
            let wsum: f64 = rule.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n} weight sum {wsum}");
            for deg in 0..2 * n {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!(
                    (got - want).abs() < 1e-13 * want.max(1e-3) / 1e-3,
                    "n={n} deg={deg} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn single_precision_rule() {
        let rule = GaussLegendre::<f32>::exact_for_degree(6);
        assert_eq!(rule.len(), 4);
        let got = rule.integrate(-1.0, 2.0, |x| x.powi(6));
        assert!((got - 129.0 / 7.0).abs() < 1e-4);
    }
}
