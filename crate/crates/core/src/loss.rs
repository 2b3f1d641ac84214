//! Loss primitives shared by the score, region and refinement stages.
//! These are plain evaluations; gradients are left to the trainer.

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Transition point of the smooth L1 loss.
pub const SMOOTH_L1_BETA: f64 = 1.0;

/// Huber-style smooth L1 with transition `beta`:
/// `0.5·x²/β` for `|x| < β`, else `|x| − 0.5·β`.
pub fn smooth_l1(x: f64, beta: f64) -> f64 {
    let a = x.abs();
    if a < beta {
        0.5 * a * a / beta
    } else {
        a - 0.5 * beta
    }
}

/// Elementwise smooth L1 of `pred − target`, summed.
pub fn smooth_l1_sum(pred: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(pred.len(), target.len());
    pred.iter()
        .zip(target)
        .map(|(p, t)| smooth_l1(p - t, SMOOTH_L1_BETA))
        .sum()
}

/// `−ln p` of the true-class probability; the flag reports clamping.
pub fn cross_entropy(probs: &[f64], class: usize) -> (f64, bool) {
    let p = probs[class];
    if p < PROB_FLOOR {
        (-PROB_FLOOR.ln(), true)
    } else {
        (-p.ln(), false)
    }
}

/// Checks that `probs` is a probability vector within `tol`.
pub fn is_distribution(probs: &[f64], tol: f64) -> bool {
    probs.iter().all(|p| p.is_finite() && *p >= -tol) && (probs.iter().sum::<f64>() - 1.0).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_l1_closed_form() {
        assert_eq!(smooth_l1(0.5, 1.0), 0.125);
        assert_eq!(smooth_l1(-1.0, 1.0), 0.5);
        assert_eq!(smooth_l1(3.0, 1.0), 2.5);
        assert_eq!(smooth_l1(0.0, 1.0), 0.0);
    }

    #[test]
    fn smooth_l1_continuous_at_beta() {
        for beta in [0.1, 1.0, 2.5] {
            let eps = 1e-12;
            let below = smooth_l1(beta - eps, beta);
            let above = smooth_l1(beta + eps, beta);
            assert!((below - above).abs() < 1e-9);
            // Slopes agree (value 1 on both sides).
            let h = 1e-6;
            let left = (smooth_l1(beta, beta) - smooth_l1(beta - h, beta)) / h;
            let right = (smooth_l1(beta + h, beta) - smooth_l1(beta, beta)) / h;
            assert!((left - right).abs() < 1e-5);
        }
    }

    #[test]
    fn cross_entropy_clamps() {
        let (v, clamped) = cross_entropy(&[1.0, 0.0], 1);
        assert!(clamped);
        assert!((v - 27.631021115928547).abs() < 1e-12);
        assert_eq!(cross_entropy(&[0.0, 1.0], 1), (0.0, false));
    }
}
