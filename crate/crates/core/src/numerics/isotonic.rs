//! Pool-adjacent-violators projection onto non-decreasing sequences.

/// Replaces `y` by its least-squares non-decreasing fit (unit weights).
/// Returns the number of pooled blocks that contain more than one sample.
pub fn isotonic_project(y: &mut [f64]) -> usize {
    let n = y.len();
    if n < 2 {
        return 0;
    }
    // Each block: (sum, count).
    let mut sums: Vec<f64> = Vec::with_capacity(n);
    let mut counts: Vec<usize> = Vec::with_capacity(n);
    for &v in y.iter() {
        sums.push(v);
        counts.push(1);
        while sums.len() > 1 {
            let k = sums.len();
            let mean_last = sums[k - 1] / counts[k - 1] as f64;
            let mean_prev = sums[k - 2] / counts[k - 2] as f64;
            if mean_prev <= mean_last {
                break;
            }
            let s = sums.pop().unwrap();
            let c = counts.pop().unwrap();
            sums[k - 2] += s;
            counts[k - 2] += c;
        }
    }
    let mut pooled = 0;
    let mut i = 0;
    for (s, c) in sums.iter().zip(counts.iter()) {
        if *c > 1 {
            pooled += 1;
            let mean = s / *c as f64;
            for v in y[i..i + c].iter_mut() {
                *v = mean;
            }
        }
        i += c;
    }
    pooled
}
