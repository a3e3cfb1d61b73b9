use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(z: &DenseMatrix) -> DenseMatrix {
    let mut p = z.clone();
    for i in 0..p.rows() {
        let row = p.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            total += *v;
        }
        row.iter_mut().for_each(|v| *v /= total);
    }
    p
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

/// Fraction of `mask` whose row argmax equals the label. Ties go to the
/// lowest class index.
pub fn accuracy(scores: &DenseMatrix, labels: &[usize], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let hits = mask.iter().filter(|&&i| argmax(scores.row(i)) == labels[i]).count();
    Ok(hits as f64 / mask.len() as f64)
}

/// Rank-sum AUROC; tied scores share their average rank, so a tie between
/// a positive and a negative counts one half. `None` when one class is
/// absent.
pub fn auroc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1..=end averaged.
        let rank = (start + end + 1) as f64 / 2.0;
        pos_rank_sum += rank * order[start..end].iter().filter(|&&i| positive[i]).count() as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}
