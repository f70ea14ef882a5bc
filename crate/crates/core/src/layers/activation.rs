/// Piecewise-linear gate activation: `clamp(0.2x + 0.5, 0, 1)`, reaching 0
/// at `x ≤ -2.5` and 1 at `x ≥ 2.5`.
#[inline]
pub fn hard_sigmoid(x: f64) -> f64 {
    if x <= -2.5 {
        0.0
    } else if x >= 2.5 {
        1.0
    } else {
        0.2 * x + 0.5
    }
}

/// Slope of [`hard_sigmoid`]; 0 at the kinks.
#[inline]
pub fn hard_sigmoid_deriv(x: f64) -> f64 {
    if x > -2.5 && x < 2.5 {
        0.2
    } else {
        0.0
    }
}

/// Cell-input nonlinearity.
#[inline]
pub(crate) fn candidate_activation(x: f64) -> f64 {
    x.tanh()
}

/// Nonlinearity applied to the internal state before the output gate.
#[inline]
pub(crate) fn state_activation(x: f64) -> f64 {
    x.tanh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn branch_values() {
        assert_eq!(hard_sigmoid(0.0), 0.5);
        assert_eq!(hard_sigmoid(-2.5), 0.0);
        assert_eq!(hard_sigmoid(2.5), 1.0);
        assert_eq!(hard_sigmoid(1.0), 0.7);
        assert_eq!(hard_sigmoid(-10.0), 0.0);
        assert_eq!(hard_sigmoid(10.0), 1.0);
    }

    #[test]
    fn derivative_values() {
        assert_eq!(hard_sigmoid_deriv(0.0), 0.2);
        assert_eq!(hard_sigmoid_deriv(3.0), 0.0);
        assert_eq!(hard_sigmoid_deriv(-2.5), 0.0);
        assert_eq!(hard_sigmoid_deriv(2.5), 0.0);
    }

    proptest! {
        #[test]
        fn monotone_and_bounded(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(hard_sigmoid(lo) <= hard_sigmoid(hi));
            prop_assert!((0.0..=1.0).contains(&hard_sigmoid(a)));
        }

        #[test]
        fn continuous(x in -5.0f64..5.0) {
            let h = 1e-9;
            prop_assert!((hard_sigmoid(x + h) - hard_sigmoid(x)).abs() <= 0.2 * h + 1e-15);
        }
    }
}
