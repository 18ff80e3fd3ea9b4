use serde::{Deserialize, Serialize};

/// One integer `(n, K, k)` consistent with a published individual count and
/// point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleCounts {
    pub n: u64,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub k: u64,
    pub estimate: f64,
}

/// Every `(n, K, k)` with `n + K - k = distinct_total`, `1 <= k <= min(n, K)`
/// and `|nK/k - target| <= tolerance`, ordered by `k` then `n`.
///
/// Used to check that a reported Lincoln-Petersen estimate is attainable
/// when only the totals were published.
pub fn feasibility_search(distinct_total: u64, target_estimate: f64, tolerance: f64) -> Vec<FeasibleCounts> {
    let mut out = Vec::new();
    for k in 1..=distinct_total {
        // K = distinct_total - n + k >= k  <=>  n <= distinct_total
        for n in k..=distinct_total {
            let big_k = distinct_total - n + k;
            let estimate = (n as f64 * big_k as f64) / k as f64;
            if (estimate - target_estimate).abs() <= tolerance {
                out.push(FeasibleCounts { n, big_k, k, estimate });
            }
        }
    }
    out
}
