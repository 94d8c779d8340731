/// Dot product of the original and modified gradients. A positive value means the
/// modified vector is still an ascent direction of the original objective.
///
/// Panics if the lengths differ.
pub fn descent_direction_check(grad_original: &[f64], grad_filtered: &[f64]) -> f64 {
    assert_eq!(
        grad_original.len(),
        grad_filtered.len(),
        "gradient lengths differ"
    );
    grad_original
        .iter()
        .zip(grad_filtered)
        .map(|(a, b)| a * b)
        .sum()
}

/// Number of element-wise products `a_e * b_e` that are `>= 0`, for per-element
/// diagnosis of a failed check.
pub fn nonnegative_terms(grad_original: &[f64], grad_filtered: &[f64]) -> usize {
    grad_original
        .iter()
        .zip(grad_filtered)
        .filter(|(a, b)| *a * *b >= 0.0)
        .count()
}
