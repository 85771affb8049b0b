//! Reference procedures for external scorers.
//!
//! Neural models are not run here. These functions spell out how a
//! compliant harness must combine per-token log-probabilities, given a
//! callback standing in for the model.

/// Left-to-right chain rule: `sum_i log P(w_i | w_<i)`.
///
/// `log_prob(prefix, token)` returns the natural-log probability of `token`
/// following `prefix`.
pub fn chain_rule_score<F>(tokens: &[String], mut log_prob: F) -> f64
where
    F: FnMut(&[String], &str) -> f64,
{
    (0..tokens.len())
        .map(|i| log_prob(&tokens[..i], &tokens[i]))
        .sum()
}

/// Pseudo-log-likelihood: mask each position in turn and sum the
/// log-probability the model assigns to the original token there.
///
/// `masked_log_prob(tokens, i)` receives the full sequence and the masked
/// position and returns `log P(tokens[i] | tokens without i)`.
pub fn pseudo_log_likelihood<F>(tokens: &[String], mut masked_log_prob: F) -> f64
where
    F: FnMut(&[String], usize) -> f64,
{
    (0..tokens.len()).map(|i| masked_log_prob(tokens, i)).sum()
}
