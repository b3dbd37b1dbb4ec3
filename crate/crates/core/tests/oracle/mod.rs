//! Reference implementations used only by tests. Nothing here calls the
//! filtering or quantization code under test.

#![allow(dead_code)]

use iconoclasm::Hmm;

/// Every latent path of length `len` over `k` states, in lexicographic order.
pub fn all_paths(k: usize, len: usize) -> Vec<Vec<usize>> {
    let total = k.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut path = vec![0; len];
            for slot in path.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            path
        })
        .collect()
}

/// `P(x, z)` straight from the factorization.
pub fn joint(hmm: &Hmm, xs: &[usize], zs: &[usize]) -> f64 {
    let k = hmm.states();
    let v = hmm.symbols();
    let mut p = hmm.initial()[zs[0]] * hmm.emission()[zs[0] * v + xs[0]];
    for t in 1..xs.len() {
        p *= hmm.transition()[zs[t - 1] * k + zs[t]] * hmm.emission()[zs[t] * v + xs[t]];
    }
    p
}

/// `P(x)` by summing the joint over every latent path.
pub fn marginal(hmm: &Hmm, xs: &[usize]) -> f64 {
    all_paths(hmm.states(), xs.len())
        .iter()
        .map(|zs| joint(hmm, xs, zs))
        .sum()
}

/// `P(z | x)` for every path, aligned with [`all_paths`].
pub fn path_posterior(hmm: &Hmm, xs: &[usize]) -> Vec<f64> {
    let paths = all_paths(hmm.states(), xs.len());
    let joints: Vec<f64> = paths.iter().map(|zs| joint(hmm, xs, zs)).collect();
    let total: f64 = joints.iter().sum();
    joints.into_iter().map(|j| j / total).collect()
}

/// `P(z_T = i | x_1..x_T)` by enumeration.
pub fn last_marginal(hmm: &Hmm, xs: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; hmm.states()];
    for (zs, p) in all_paths(hmm.states(), xs.len())
        .iter()
        .zip(path_posterior(hmm, xs))
    {
        out[zs[xs.len() - 1]] += p;
    }
    out
}

/// `P(z_t = i | x_1..x_t, z_{t+1} = next)` by enumeration over paths of
/// length `t + 1` (`t` is 1-based, `prefix` has length `t`).
pub fn step_conditional(hmm: &Hmm, prefix: &[usize], next: usize) -> Vec<f64> {
    let k = hmm.states();
    let t = prefix.len();
    let mut out = vec![0.0; k];
    for zs in all_paths(k, t) {
        let w = joint(hmm, prefix, &zs) * hmm.transition()[zs[t - 1] * k + next];
        out[zs[t - 1]] += w;
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

/// `P(x_{t+1} = v | x_1..x_t)` as a ratio of enumerated marginals.
pub fn predictive(hmm: &Hmm, prefix: &[usize]) -> Vec<f64> {
    let denom = if prefix.is_empty() {
        1.0
    } else {
        marginal(hmm, prefix)
    };
    (0..hmm.symbols())
        .map(|v| {
            let mut longer = prefix.to_vec();
            longer.push(v);
            marginal(hmm, &longer) / denom
        })
        .collect()
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Largest-remainder apportionment written as repeated linear scans:
/// hand out the shortfall one unit at a time to the largest unused
/// remainder, raise zeros to one, then settle the difference on the
/// largest entries.
pub fn reference_apportion(probs: &[f64], precision: u32) -> Vec<u32> {
    let total = 1u64 << precision;
    let ideal: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    let mut freqs: Vec<u64> = ideal.iter().map(|x| x.floor() as u64).collect();
    let rema: Vec<f64> = ideal
        .iter()
        .zip(&freqs)
        .map(|(x, f)| x - *f as f64)
        .collect();

    let mut used = vec![false; probs.len()];
    let mut shortfall = total.saturating_sub(freqs.iter().sum());
    while shortfall > 0 && used.iter().any(|u| !u) {
        let mut best: Option<usize> = None;
        for i in 0..probs.len() {
            if !used[i] && best.is_none_or(|b| rema[i] > rema[b]) {
                best = Some(i);
            }
        }
        let b = best.unwrap();
        used[b] = true;
        freqs[b] += 1;
        shortfall -= 1;
    }

    for f in freqs.iter_mut() {
        *f = (*f).max(1);
    }

    loop {
        let sum: u64 = freqs.iter().sum();
        if sum == total {
            break;
        }
        let mut best = 0;
        for i in 1..freqs.len() {
            if freqs[i] > freqs[best] {
                best = i;
            }
        }
        if sum < total {
            freqs[best] += total - sum;
        } else {
            // Largest entry that can still give something up.
            let mut donor = None;
            for i in 0..freqs.len() {
                if freqs[i] > 1 && donor.is_none_or(|d: usize| freqs[i] > freqs[d]) {
                    donor = Some(i);
                }
            }
            let d = donor.unwrap();
            let take = (sum - total).min(freqs[d] - 1);
            freqs[d] -= take;
        }
    }
    freqs.into_iter().map(|f| f as u32).collect()
}

/// Stationary distribution of a row-stochastic matrix by power iteration.
pub fn stationary(transition: &[f64], k: usize) -> Vec<f64> {
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..10_000 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                next[j] += pi[i] * transition[i * k + j];
            }
        }
        pi = next;
    }
    pi
}
