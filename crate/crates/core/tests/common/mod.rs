//! Brute-force reference implementations shared by the test targets.
#![allow(dead_code)]

use compatup::dataset::Label;
use compatup::matrix::FeatureMatrix;
use rand::Rng;

/// Compatibility straight from the indicator sums.
pub fn compatibility_oracle(h1: &[Label], h2: &[Label], y: &[Label]) -> Option<f64> {
    let first: usize = (0..y.len()).map(|i| usize::from(h1[i] == y[i])).sum();
    let both: usize = (0..y.len()).map(|i| usize::from(h1[i] == y[i] && h2[i] == y[i])).sum();
    (first > 0).then(|| both as f64 / first as f64)
}

/// AUC by comparing every (positive, negative) pair; ties count half.
pub fn auc_oracle(scores: &[f64], labels: &[Label]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1;
                if si > sj {
                    wins += 1.0;
                } else if si == sj {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Optimal transport cost between two uniform empirical measures.
///
/// Each sample is replicated to a common size `lcm(m, n)` so the transport
/// problem becomes an assignment problem, solved exactly by a DP over
/// subsets of the second sample.
pub fn wasserstein_oracle(a: &[f64], b: &[f64]) -> f64 {
    let n_total = a.len() / gcd(a.len(), b.len()) * b.len();
    assert!(n_total <= 16, "oracle limited to small supports");
    let xs: Vec<f64> = a
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, n_total / a.len()))
        .collect();
    let ys: Vec<f64> = b
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, n_total / b.len()))
        .collect();
    let full = 1usize << n_total;
    let mut dp = vec![f64::INFINITY; full];
    dp[0] = 0.0;
    for mask in 0..full {
        if dp[mask].is_infinite() {
            continue;
        }
        let k = mask.count_ones() as usize;
        if k == n_total {
            continue;
        }
        for (j, &y) in ys.iter().enumerate() {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                let cost = dp[mask] + (xs[k] - y).abs();
                if cost < dp[next] {
                    dp[next] = cost;
                }
            }
        }
    }
    dp[full - 1] / n_total as f64
}

pub fn pearson_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Weighted sum of squared deviations from the weighted mean.
pub fn weighted_sse(ys: &[(f64, f64)]) -> f64 {
    let w: f64 = ys.iter().map(|p| p.1).sum();
    if w == 0.0 {
        return 0.0;
    }
    let mean = ys.iter().map(|p| p.0 * p.1).sum::<f64>() / w;
    ys.iter().map(|(y, wi)| wi * (y - mean).powi(2)).sum()
}

/// SSE of the two children produced by `x[feature] <= threshold`.
pub fn split_sse(x: &FeatureMatrix, y: &[Label], w: &[f64], feature: usize, threshold: f64) -> f64 {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for i in 0..x.rows() {
        let p = (f64::from(y[i]), w[i]);
        if x.get(i, feature) <= threshold {
            left.push(p);
        } else {
            right.push(p);
        }
    }
    weighted_sse(&left) + weighted_sse(&right)
}

/// Every (feature, midpoint) candidate with its children SSE.
pub fn enumerate_splits(x: &FeatureMatrix, y: &[Label], w: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for f in 0..x.cols() {
        let mut vals = x.column(f);
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for pair in vals.windows(2) {
            let t = pair[0] / 2.0 + pair[1] / 2.0;
            out.push((f, t, split_sse(x, y, w, f, t)));
        }
    }
    out
}

/// Weights `k / 64` for `k` in 1..=256: exact under scaling by 0.5, 3, 10.
pub fn dyadic_weight<R: Rng>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(1u32..=256)) / 64.0
}

pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, d: usize, levels: u32) -> (FeatureMatrix, Vec<Label>) {
    let data = (0..n * d).map(|_| f64::from(rng.gen_range(0..levels)) / 2.0).collect();
    let y = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
    (FeatureMatrix::new(data, n, d).expect("shape"), y)
}
