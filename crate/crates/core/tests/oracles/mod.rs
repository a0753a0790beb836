//! Independent reference implementations used as test oracles. Everything
//! here is deliberately naive: brute force where possible, and algebraic
//! forms that differ from the library's.

#![allow(dead_code)]

/// AUC by enumerating every positive/negative pair; ties earn half.
pub fn auc_all_pairs(y: &[u8], s: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..y.len() {
        if y[i] != 1 {
            continue;
        }
        for j in 0..y.len() {
            if y[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if s[i] > s[j] {
                wins += 1.0;
            } else if s[i] == s[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Cohen's kappa in the closed 2×2 form
/// 2(tp·tn − fn·fp) / ((tp+fp)(fp+tn) + (tp+fn)(fn+tn)).
pub fn kappa_2x2(tn: u64, fp: u64, fn_: u64, tp: u64) -> f64 {
    let (tn, fp, fn_, tp) = (tn as f64, fp as f64, fn_ as f64, tp as f64);
    let den = (tp + fp) * (fp + tn) + (tp + fn_) * (fn_ + tn);
    if den == 0.0 {
        0.0
    } else {
        2.0 * (tp * tn - fn_ * fp) / den
    }
}

/// Precision, recall and F1 for one class, with F1 = 2tp / (2tp + fp + fn)
/// and 0 for empty denominators.
pub fn prf(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (div(tp, tp + fp), div(tp, tp + fn_), div(2 * tp, 2 * tp + fp + fn_))
}

/// Gini impurity as 1 − Σ p_c².
pub fn gini(labels: &[u8]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let n = labels.len() as f64;
    let p1 = labels.iter().filter(|&&v| v == 1).count() as f64 / n;
    1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleTree {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<OracleTree>,
        right: Box<OracleTree>,
    },
}

/// Greedy CART by exhaustive enumeration of every axis-aligned cut between
/// distinct values. Ties go to the lowest feature, then the lowest
/// threshold; impure nodes split even at zero impurity decrease.
pub fn cart_exhaustive(rows: &[Vec<f64>], y: &[u8], idx: &[usize]) -> OracleTree {
    let labels: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
    let pos = labels.iter().filter(|&&v| v == 1).count();
    let value = pos as f64 / idx.len() as f64;
    if pos == 0 || pos == idx.len() {
        return OracleTree::Leaf(value);
    }
    let parent = gini(&labels);
    let n = idx.len() as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..rows[0].len() {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let mut t = w[0] + (w[1] - w[0]) / 2.0;
            if t >= w[1] {
                t = w[0];
            }
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
            let ly: Vec<u8> = l.iter().map(|&i| y[i]).collect();
            let ry: Vec<u8> = r.iter().map(|&i| y[i]).collect();
            let child = (ly.len() as f64 * gini(&ly) + ry.len() as f64 * gini(&ry)) / n;
            let dec = parent - child;
            let better = match best {
                None => true,
                Some((_, _, b)) => dec > b + 1e-12 * b.abs().max(1.0),
            };
            if better {
                best = Some((f, t, dec));
            }
        }
    }
    match best {
        None => OracleTree::Leaf(value),
        Some((feature, threshold, _)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][feature] <= threshold);
            OracleTree::Split {
                feature,
                threshold,
                left: Box::new(cart_exhaustive(rows, y, &l)),
                right: Box::new(cart_exhaustive(rows, y, &r)),
            }
        }
    }
}

/// Mean log loss of raw scores.
pub fn log_loss(scores: &[f64], y: &[u8]) -> f64 {
    scores
        .iter()
        .zip(y)
        .map(|(&s, &t)| {
            let p = 1.0 / (1.0 + (-s).exp());
            if t == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / y.len() as f64
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), or 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Plain one-way ANOVA F over two groups, computed from the textbook sums.
pub fn anova_f(a: &[f64], b: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let g = mean(&all);
    let (ma, mb) = (mean(a), mean(b));
    let ssb = a.len() as f64 * (ma - g).powi(2) + b.len() as f64 * (mb - g).powi(2);
    let ssw: f64 = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() + b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
    ssb / (ssw / (all.len() - 2) as f64)
}

/// Upper tail of F(1.5; 1, 4), evaluated at 40 digits with an
/// arbitrary-precision incomplete beta.
pub const F_SF_1_5_1_4: f64 = 0.287_864_134_726_690_7;
