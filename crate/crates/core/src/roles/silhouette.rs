use super::kmeans::{dist, Point};
use crate::error::{Error, Result};

/// Mean silhouette over all points. Points in singleton clusters score 0;
/// a point whose intra and nearest-other mean distances are both 0 scores 0.
pub fn silhouette_score(points: &[Point], labels: &[usize]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::Contract("points and labels differ in length".into()));
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let non_empty = sizes.iter().filter(|&&s| s > 0).count();
    if non_empty < 2 {
        return Err(Error::Undefined("silhouette needs at least two clusters".into()));
    }
    if sizes.iter().all(|&s| s <= 1) {
        return Err(Error::Undefined("every cluster is a singleton".into()));
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for (i, p) in points.iter().enumerate() {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (q, &l) in points.iter().zip(labels) {
            sums[l] += dist(p, q);
        }
        let own = labels[i];
        if sizes[own] <= 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / points.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_pairs_score_near_one() {
        let pts = [[0.0, 0.0], [0.1, 0.0], [90.0, 90.0], [90.1, 90.0]];
        assert!(silhouette_score(&pts, &[0, 0, 1, 1]).unwrap() > 0.95);
    }

    #[test]
    fn identical_points_score_zero() {
        let pts = [[5.0, 5.0]; 4];
        assert_eq!(silhouette_score(&pts, &[0, 0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_clusterings() {
        let pts = [[0.0, 0.0], [1.0, 1.0]];
        assert!(silhouette_score(&pts, &[0, 0]).is_err());
        assert!(silhouette_score(&pts, &[0, 1]).is_err());
    }
}
