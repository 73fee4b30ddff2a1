/// Result of a bounded candidate search.
#[derive(Clone, Debug, PartialEq)]
pub struct RetryOutcome<C> {
    pub candidate: Option<C>,
    /// Calls made to the source, at most the budget.
    pub attempts: u32,
}

/// Default number of candidate requests before concluding the basket is empty:
/// one request and up to four more.
pub const DEFAULT_CANDIDATE_ATTEMPTS: u32 = 5;

/// Asks `source` for a candidate until it yields one or `max_total_attempts`
/// calls came back empty. Source errors (e.g. a service timeout) propagate.
pub fn request_candidate_with_retry<C, E>(
    mut source: impl FnMut(u32) -> Result<Option<C>, E>,
    max_total_attempts: u32,
) -> Result<RetryOutcome<C>, E> {
    let budget = max_total_attempts.max(1);
    for attempt in 1..=budget {
        if let Some(c) = source(attempt)? {
            return Ok(RetryOutcome {
                candidate: Some(c),
                attempts: attempt,
            });
        }
    }
    Ok(RetryOutcome {
        candidate: None,
        attempts: budget,
    })
}
